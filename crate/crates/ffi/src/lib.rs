//! C ABI for `noneq-atomdyn`.
//!
//! Every fallible function returns an [`NaStatus`]. On failure the message is kept
//! per thread and can be copied out with [`na_last_error_message`]. Models are
//! opaque heap handles created by the `na_model_*` constructors and released with
//! [`na_model_free`]. Lengths are SI (m, rad/s, K, C·m). A slab thickness of
//! `INFINITY` selects the semi-infinite body.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use noneq_atomdyn::dynamics::{three_level_steady, two_level_steady};
use noneq_atomdyn::matprops::{permittivity, surface_resonance, PermittivityModel};
use noneq_atomdyn::quadrature::env_body_factors;
use noneq_atomdyn::rates::{transition_rates, DipoleSpec, RateSet, ThermalEnv};
use noneq_atomdyn::slab_optics::Geometry;
use noneq_atomdyn::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Permittivity or table problems, including mirror permittivity requests.
    Material = 3,
    /// Singular Fresnel or slab denominators.
    Optics = 4,
    QuadratureNoConvergence = 5,
    /// Coupling vanishes or the steady state is not unique.
    Rates = 6,
    InvalidState = 7,
    Panic = 99,
}

/// Opaque permittivity model.
pub struct NaModel(PermittivityModel);

/// Transition rates for one frequency, as computed by the library.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaRates {
    pub omega: f64,
    pub gamma0: f64,
    pub alpha_w: f64,
    pub alpha_m: f64,
    pub n_eff: f64,
    pub t_eff: f64,
    pub gamma_down: f64,
    pub gamma_up: f64,
}

impl From<RateSet> for NaRates {
    fn from(r: RateSet) -> Self {
        NaRates {
            omega: r.omega,
            gamma0: r.gamma0,
            alpha_w: r.alpha_w,
            alpha_m: r.alpha_m,
            n_eff: r.n_eff,
            t_eff: r.t_eff,
            gamma_down: r.gamma_down,
            gamma_up: r.gamma_up,
        }
    }
}

impl NaRates {
    fn to_rate_set(self) -> RateSet {
        RateSet {
            omega: self.omega,
            gamma0: self.gamma0,
            alpha_w: self.alpha_w,
            alpha_m: self.alpha_m,
            n_eff: self.n_eff,
            t_eff: self.t_eff,
            gamma_down: self.gamma_down,
            gamma_up: self.gamma_up,
            alpha_err: [0.0; 2],
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> NaStatus {
    match err {
        Error::InvalidArgument(_) | Error::RegimeParameterMismatch { .. } | Error::DivergentAtContact(_) => {
            NaStatus::InvalidArgument
        }
        Error::MirrorHasNoFinitePermittivity
        | Error::TabulatedOutOfRange { .. }
        | Error::NoSurfaceResonance
        | Error::TableParse { .. } => NaStatus::Material,
        Error::DegenerateDenominator(_) | Error::ResonantDenominator(_) => NaStatus::Optics,
        Error::QuadratureNoConvergence { .. } => NaStatus::QuadratureNoConvergence,
        Error::BothAlphasZero
        | Error::ZeroTotalRate
        | Error::BothChannelsDark
        | Error::DegenerateRateMatrix
        | Error::NonUniqueSteadyState
        | Error::DisconnectedLevels(_)
        | Error::DegenerateScheme(_) => NaStatus::Rates,
        Error::InvalidState(_) | Error::NonDiagonalInput => NaStatus::InvalidState,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (NaStatus, String)>>(f: F) -> NaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            NaStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            NaStatus::Panic
        }
    }
}

fn lib<T>(r: noneq_atomdyn::Result<T>) -> Result<T, (NaStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn non_null<'a, T>(p: *const T, name: &str) -> Result<&'a T, (NaStatus, String)> {
    // SAFETY: the caller guarantees that a non-null pointer is valid for reads.
    unsafe { p.as_ref() }.ok_or_else(|| (NaStatus::NullPointer, format!("{name} is null")))
}

fn non_null_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, (NaStatus, String)> {
    // SAFETY: the caller guarantees that a non-null pointer is valid for writes.
    unsafe { p.as_mut() }.ok_or_else(|| (NaStatus::NullPointer, format!("{name} is null")))
}

/// Views `p` as `N` consecutive doubles.
fn array_mut<'a, const N: usize>(p: *mut f64, name: &str) -> Result<&'a mut [f64; N], (NaStatus, String)> {
    non_null_mut(p.cast::<[f64; N]>(), name)
}

fn array<'a, const N: usize>(p: *const f64, name: &str) -> Result<&'a [f64; N], (NaStatus, String)> {
    non_null(p.cast::<[f64; N]>(), name)
}

fn geometry(z: f64, delta: f64) -> Result<Geometry, (NaStatus, String)> {
    lib(if delta == f64::INFINITY { Geometry::semi_infinite(z) } else { Geometry::new(z, delta) })
}

fn new_model(model: PermittivityModel, out: *mut *mut NaModel) -> NaStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        lib(model.validate())?;
        *out = Box::into_raw(Box::new(NaModel(model)));
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn na_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes). Returns the full message length in bytes,
/// without the terminator, so callers can size a buffer with a first call.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn na_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = CString::new(e.borrow().replace('\0', " ")).unwrap_or_default();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            // SAFETY: `buf` holds at least `len` bytes and n < len.
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// GaAs Drude-Lorentz model with the built-in parameters.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn na_model_gaas(out: *mut *mut NaModel) -> NaStatus {
    new_model(PermittivityModel::gaas(), out)
}

/// Gold Drude model with the built-in parameters.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn na_model_gold(out: *mut *mut NaModel) -> NaStatus {
    new_model(PermittivityModel::gold(), out)
}

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn na_model_vacuum(out: *mut *mut NaModel) -> NaStatus {
    new_model(PermittivityModel::Vacuum, out)
}

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn na_model_perfect_mirror(out: *mut *mut NaModel) -> NaStatus {
    new_model(PermittivityModel::PerfectMirror, out)
}

/// ε(ω) = ε∞ (ω² − ω_l² + iγω)/(ω² − ω_r² + iγω).
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn na_model_drude_lorentz(
    eps_inf: f64,
    omega_l: f64,
    omega_r: f64,
    gamma: f64,
    out: *mut *mut NaModel,
) -> NaStatus {
    new_model(PermittivityModel::DrudeLorentz { eps_inf, omega_l, omega_r, gamma }, out)
}

/// ε(ω) = 1 − ω_pl²/(ω² + iγω).
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn na_model_drude(omega_pl: f64, gamma: f64, out: *mut *mut NaModel) -> NaStatus {
    new_model(PermittivityModel::Drude { omega_pl, gamma }, out)
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle from a `na_model_*` constructor that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn na_model_free(model: *mut NaModel) {
    if !model.is_null() {
        // SAFETY: the handle came from Box::into_raw and is freed once.
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Complex permittivity at `omega`.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn na_permittivity(
    model: *const NaModel,
    omega: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> NaStatus {
    guard(|| {
        let m = non_null(model, "model")?;
        let re = non_null_mut(out_re, "out_re")?;
        let im = non_null_mut(out_im, "out_im")?;
        let eps = lib(permittivity(&m.0, omega))?;
        *re = eps.re;
        *im = eps.im;
        Ok(())
    })
}

/// Frequency where Re ε = −1.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn na_surface_resonance(model: *const NaModel, out: *mut f64) -> NaStatus {
    guard(|| {
        let m = non_null(model, "model")?;
        let out = non_null_mut(out, "out")?;
        *out = lib(surface_resonance(&m.0))?;
        Ok(())
    })
}

/// The B, C and D factors, each as (x, y, z).
///
/// # Safety
/// Pointers must be null or valid; each output holds 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn na_env_body_factors(
    model: *const NaModel,
    omega: f64,
    z: f64,
    delta: f64,
    out_b: *mut f64,
    out_c: *mut f64,
    out_d: *mut f64,
) -> NaStatus {
    guard(|| {
        let m = non_null(model, "model")?;
        let b = array_mut::<3>(out_b, "out_b")?;
        let c = array_mut::<3>(out_c, "out_c")?;
        let d = array_mut::<3>(out_d, "out_d")?;
        let f = lib(env_body_factors(omega, &geometry(z, delta)?, &m.0))?;
        *b = f.b;
        *c = f.c;
        *d = f.d;
        Ok(())
    })
}

/// Rates of a transition at `omega` with dipole components `dipole` (C·m).
///
/// # Safety
/// Pointers must be null or valid; `dipole` holds 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn na_transition_rates(
    model: *const NaModel,
    omega: f64,
    z: f64,
    delta: f64,
    dipole: *const f64,
    t_m: f64,
    t_w: f64,
    out: *mut NaRates,
) -> NaStatus {
    guard(|| {
        let m = non_null(model, "model")?;
        let d = lib(DipoleSpec::from_components(*array::<3>(dipole, "dipole")?))?;
        let out = non_null_mut(out, "out")?;
        let env = lib(ThermalEnv::new(t_m, t_w))?;
        *out = lib(transition_rates(omega, &d, &geometry(z, delta)?, &m.0, &env))?.into();
        Ok(())
    })
}

/// Steady populations (ground, excited) of a two-level emitter.
///
/// # Safety
/// Pointers must be null or valid; `out` holds 2 doubles.
#[no_mangle]
pub unsafe extern "C" fn na_two_level_steady(rates: *const NaRates, out: *mut f64) -> NaStatus {
    guard(|| {
        let r = non_null(rates, "rates")?.to_rate_set();
        let out = array_mut::<2>(out, "out")?;
        let rho = lib(two_level_steady(&r))?;
        *out = [rho.get(0, 0).re, rho.get(1, 1).re];
        Ok(())
    })
}

/// Steady populations (ρ11, ρ22, ρ33) of a Λ system from the 3↔1 and 3↔2 rates.
///
/// # Safety
/// Pointers must be null or valid; `out` holds 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn na_three_level_steady(
    rates31: *const NaRates,
    rates32: *const NaRates,
    out: *mut f64,
) -> NaStatus {
    guard(|| {
        let r31 = non_null(rates31, "rates31")?.to_rate_set();
        let r32 = non_null(rates32, "rates32")?.to_rate_set();
        let out = array_mut::<3>(out, "out")?;
        let rho = lib(three_level_steady(&r31, &r32))?;
        *out = [rho.get(0, 0).re, rho.get(1, 1).re, rho.get(2, 2).re];
        Ok(())
    })
}
