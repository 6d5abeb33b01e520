//! Environment/body factors B(ω), C(ω), D(ω), their closed-form limits and asymptotes.
//!
//! Each factor is a 3-vector (x, y, z). A planar slab is isotropic in-plane, so
//! internally only three independent pieces are integrated: TE in-plane, TM
//! in-plane and TM normal. Integrals run in reduced variables: propagative
//! modes over s = c k_z/ω ∈ [0, 1], evanescent ones over u = c Im k_z/ω ∈ (0, ∞).

mod asymptotes;
mod gk;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::C;
use crate::error::{Error, Result};
use crate::matprops::PermittivityModel;
use crate::slab_optics::{reduced_kzm, slab_reduced, Geometry, Medium, Polarization};

pub use asymptotes::{asymptote_d, DAsymptote, Regime};
pub(crate) use gk::{integrate, Budget, Tolerance};

pub(crate) const STRICT: Budget = Budget { max_panels: 400_000, lenient: false };
const SURVEY: Budget = Budget { max_panels: 2_000, lenient: true };
/// Output grouping of the split components: TE and TM in-plane add up to one component.
const GROUPS: [usize; 3] = [0, 0, 1];
const LABELS_B: [&str; 3] = ["B_xy(TE)", "B_xy(TM)", "B_z(TM)"];
const LABELS_C: [&str; 3] = ["C_xy(TE)", "C_xy(TM)", "C_z(TM)"];
const LABELS_D: [&str; 3] = ["D_xy(TE)", "D_xy(TM)", "D_z(TM)"];

const TOL_B: Tolerance = Tolerance { rel: 1e-10, abs: 1e-15 };
const TOL_C: Tolerance = Tolerance { rel: 1e-9, abs: 1e-12 };
const TOL_D: Tolerance = Tolerance { rel: 1e-10, abs: 1e-15 };

/// How hard the quadrature works.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accuracy {
    /// Full tolerances; failure to converge is an error.
    #[default]
    Standard,
    /// 10⁻⁵ relative, bounded work, best estimate returned when the budget runs out.
    /// Meant for dense spectral scans where fine fringe structure of thick
    /// transparent slabs is irrelevant.
    Survey,
    /// User tolerances for every factor; failure to converge is an error.
    Custom { rel: f64, abs: f64 },
}

impl Accuracy {
    fn tol(self, t: Tolerance) -> Tolerance {
        match self {
            Accuracy::Standard => t,
            Accuracy::Survey => Tolerance { rel: t.rel.max(1e-5), abs: t.abs },
            Accuracy::Custom { rel, abs } => Tolerance { rel, abs },
        }
    }

    fn budget(self) -> Budget {
        match self {
            Accuracy::Standard | Accuracy::Custom { .. } => STRICT,
            Accuracy::Survey => SURVEY,
        }
    }

    /// Cap on structure-resolving initial panels.
    fn panel_cap(self) -> f64 {
        match self {
            Accuracy::Standard | Accuracy::Custom { .. } => 1e6,
            Accuracy::Survey => 256.0,
        }
    }
}

/// Angular weight M_p^φ(k, ω) of a mode, normalized by (ω/c)² for TM.
pub fn angular_weight(p: Polarization, phi: f64, k: f64, omega: f64) -> [f64; 3] {
    match p {
        Polarization::TE => [1.0, 1.0, 0.0],
        Polarization::TM => {
            let kt = k * C / omega;
            let kz2 = (1.0 - kt * kt).abs();
            [phi * kz2, phi * kz2, 2.0 * kt * kt]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QuadDiagnostics {
    /// Estimated absolute error per (x, y, z) component.
    pub abs_error: [f64; 3],
    pub subdivisions: usize,
}

/// One factor together with its polarization split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub value: [f64; 3],
    pub te: [f64; 3],
    pub tm: [f64; 3],
    pub diagnostics: QuadDiagnostics,
}

impl Factor {
    fn from_parts(v: [f64; 3], e: [f64; 3], panels: usize) -> Self {
        let te = [v[0], v[0], 0.0];
        let tm = [v[1], v[1], v[2]];
        Factor {
            value: [v[0] + v[1], v[0] + v[1], v[2]],
            te,
            tm,
            diagnostics: QuadDiagnostics {
                abs_error: [e[0] + e[1], e[0] + e[1], e[2]],
                subdivisions: panels,
            },
        }
    }

    fn zero() -> Self {
        Self::from_parts([0.0; 3], [0.0; 3], 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FactorDiagnostics {
    pub b: QuadDiagnostics,
    pub c: QuadDiagnostics,
    pub d: QuadDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvBodyFactors {
    pub omega: f64,
    pub geom: Geometry,
    pub model: PermittivityModel,
    pub b: [f64; 3],
    pub c: [f64; 3],
    pub d: [f64; 3],
    pub diagnostics: FactorDiagnostics,
}

impl EnvBodyFactors {
    /// Left-hand sides of the three positivity constraints, per component:
    /// 1 + B + 2C, 1 − B + 2D, 1 + C + D.
    pub fn constraint_margins(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            m[0][i] = 1.0 + self.b[i] + 2.0 * self.c[i];
            m[1][i] = 1.0 - self.b[i] + 2.0 * self.d[i];
            m[2][i] = 1.0 + self.c[i] + self.d[i];
        }
        m
    }
}

struct Reduced {
    medium: Medium,
    delta: Option<f64>,
    z: f64,
}

fn reduce(omega: f64, geom: &Geometry, model: &PermittivityModel) -> Result<Reduced> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidArgument(format!("omega must be > 0, got {omega}")));
    }
    geom.validate()?;
    let scale = omega / C;
    Ok(Reduced {
        medium: Medium::at(model, omega)?,
        delta: geom.delta().map(|d| d * scale),
        z: geom.z * scale,
    })
}

fn uniform(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |i| a + (b - a) * i as f64 / n as f64)
}

fn finish_breaks(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Panels for [0, 1] in s: resolve the Fabry-Perot fringes of a transparent slab
/// and, for C, the e^{2isz̃} oscillation.
fn propagative_breaks(r: &Reduced, z: f64, acc: Accuracy) -> Vec<f64> {
    let mut n = 8usize;
    if let (Medium::Dielectric(eps), Some(dt)) = (r.medium, r.delta) {
        let k0 = reduced_kzm(Complex64::new(0.0, 0.0), eps);
        let k1 = reduced_kzm(Complex64::new(1.0, 0.0), eps);
        let survive = (-2.0 * dt * k0.im.min(k1.im)).exp();
        if survive > 1e-16 {
            let phase = 2.0 * dt * (k1.re - k0.re).abs();
            n += (phase / (std::f64::consts::PI / 2.0)).ceil().min(acc.panel_cap()) as usize;
        }
    }
    if z > 0.0 {
        n = n.max((4.0 * z / std::f64::consts::PI).ceil().min(4e6) as usize);
    }
    uniform(0.0, 1.0, n).collect()
}

fn evanescent_breaks(r: &Reduced, u_max: f64, acc: Accuracy) -> Vec<f64> {
    let mut v = vec![0.0, u_max];
    let lo = 1e-6 * r.delta.map_or(1.0, |d| d.min(1.0));
    let decades = (u_max / lo).log10();
    let n = (16.0 * decades).ceil() as usize;
    v.extend((0..=n).map(|i| lo * 10f64.powf(decades * i as f64 / n as f64)));
    if let Medium::Dielectric(eps) = r.medium {
        // Guided modes of a slab live in u < sqrt(Re ε − 1); they only exist if a
        // round trip through the slab is not absorbed.
        if eps.re > 1.0 {
            let q = (eps.re - 1.0).sqrt();
            let top = q.min(u_max);
            let modes = match r.delta {
                Some(d) if d * eps.im.abs() / q < 36.0 => d * q / std::f64::consts::PI,
                _ => 0.0,
            };
            let m = 16 + (16.0 * modes).min(acc.panel_cap()) as usize;
            v.extend(uniform(0.0, top, m));
        }
        // Surface polariton of the interface.
        if eps.re < -1.0 {
            let u_sp = 1.0 / (-eps.re - 1.0).sqrt();
            if u_sp < u_max {
                let w = (eps.im.abs() / (-eps.re)).max(1e-6) * u_sp;
                v.extend((-8..=8).map(|j| u_sp + w * j as f64 / 4.0).filter(|&x| x > 0.0 && x < u_max));
            }
        }
    }
    finish_breaks(v.into_iter().filter(|&x| x <= u_max).collect())
}

pub fn compute_b(omega: f64, geom: &Geometry, model: &PermittivityModel) -> Result<Factor> {
    compute_b_with(omega, geom, model, Accuracy::Standard)
}

pub fn compute_b_with(
    omega: f64,
    geom: &Geometry,
    model: &PermittivityModel,
    acc: Accuracy,
) -> Result<Factor> {
    let r = reduce(omega, geom, model)?;
    let f = |s: f64| -> Result<[f64; 3]> {
        let co = slab_reduced(Complex64::new(s, 0.0), r.medium, r.delta)?;
        let a1 = co.rho_te.norm_sqr() + co.tau_te.norm_sqr();
        let a2 = co.rho_tm.norm_sqr() + co.tau_tm.norm_sqr();
        Ok([0.75 * a1, 0.75 * s * s * a2, 1.5 * (1.0 - s * s) * a2])
    };
    let breaks = propagative_breaks(&r, 0.0, acc);
    let o = integrate(f, &breaks, acc.tol(TOL_B), acc.budget(), GROUPS, LABELS_B)?;
    Ok(Factor::from_parts(o.value, o.error, o.panels))
}

pub fn compute_c(omega: f64, geom: &Geometry, model: &PermittivityModel) -> Result<Factor> {
    compute_c_with(omega, geom, model, Accuracy::Standard)
}

pub fn compute_c_with(
    omega: f64,
    geom: &Geometry,
    model: &PermittivityModel,
    acc: Accuracy,
) -> Result<Factor> {
    let r = reduce(omega, geom, model)?;
    if r.medium.is_vacuum() {
        return Ok(Factor::zero());
    }
    let z = r.z;
    let f = |s: f64| -> Result<[f64; 3]> {
        let co = slab_reduced(Complex64::new(s, 0.0), r.medium, r.delta)?;
        let ph = Complex64::from_polar(1.0, 2.0 * s * z);
        let c1 = (co.rho_te * ph).re;
        let c2 = (co.rho_tm * ph).re;
        Ok([0.75 * c1, -0.75 * s * s * c2, 1.5 * (1.0 - s * s) * c2])
    };
    let breaks = propagative_breaks(&r, z, acc);
    let o = integrate(f, &breaks, acc.tol(TOL_C), acc.budget(), GROUPS, LABELS_C)?;
    Ok(Factor::from_parts(o.value, o.error, o.panels))
}

/// Upper cut of the evanescent integral in u.
pub(crate) fn evanescent_cutoff(z: f64) -> f64 {
    (30.0 / z).max(10.0)
}

pub fn compute_d(omega: f64, geom: &Geometry, model: &PermittivityModel) -> Result<Factor> {
    compute_d_with(omega, geom, model, Accuracy::Standard)
}

pub fn compute_d_with(
    omega: f64,
    geom: &Geometry,
    model: &PermittivityModel,
    acc: Accuracy,
) -> Result<Factor> {
    if geom.z <= 0.0 {
        return Err(Error::DivergentAtContact(geom.z));
    }
    let r = reduce(omega, geom, model)?;
    let eps = match r.medium {
        Medium::PerfectMirror => return Ok(Factor::zero()),
        Medium::Dielectric(e) if e == Complex64::new(1.0, 0.0) => return Ok(Factor::zero()),
        Medium::Dielectric(e) => e,
    };
    let z = r.z;
    let f = |u: f64| -> Result<[f64; 3]> {
        let co = slab_reduced(Complex64::new(0.0, u), r.medium, r.delta)?;
        let w = 0.75 * (-2.0 * u * z).exp();
        Ok([
            w * co.rho_te.im,
            w * u * u * co.rho_tm.im,
            2.0 * w * (1.0 + u * u) * co.rho_tm.im,
        ])
    };
    let u_max = evanescent_cutoff(z);
    let breaks = evanescent_breaks(&r, u_max, acc);
    let mut o = integrate(f, &breaks, acc.tol(TOL_D), acc.budget(), GROUPS, LABELS_D)?;
    // Neglected tails: Im ρ_TE ≲ Im ε/(4u²), Im ρ_TM bounded by its large-u limit.
    let decay = (-2.0 * u_max * z).exp();
    let i1 = ((eps - 1.0) / (eps + 1.0)).im.abs().max(1.0);
    o.error[0] += 0.75 * eps.im.abs() / 4.0 * decay / u_max;
    let poly = u_max * u_max / (2.0 * z) + u_max / (2.0 * z * z) + 1.0 / (4.0 * z * z * z);
    o.error[1] += 0.75 * i1 * decay * poly;
    o.error[2] += 1.5 * i1 * decay * (poly + 1.0 / (2.0 * z));
    Ok(Factor::from_parts(o.value, o.error, o.panels))
}

/// B, C and D at one point, evaluated concurrently.
pub fn env_body_factors(
    omega: f64,
    geom: &Geometry,
    model: &PermittivityModel,
) -> Result<EnvBodyFactors> {
    env_body_factors_with(omega, geom, model, Accuracy::Standard)
}

pub fn env_body_factors_with(
    omega: f64,
    geom: &Geometry,
    model: &PermittivityModel,
    acc: Accuracy,
) -> Result<EnvBodyFactors> {
    let (b, (c, d)) = rayon::join(
        || compute_b_with(omega, geom, model, acc),
        || {
            rayon::join(
                || compute_c_with(omega, geom, model, acc),
                || compute_d_with(omega, geom, model, acc),
            )
        },
    );
    let (b, c, d) = (b?, c?, d?);
    Ok(EnvBodyFactors {
        omega,
        geom: *geom,
        model: model.clone(),
        b: b.value,
        c: c.value,
        d: d.value,
        diagnostics: FactorDiagnostics {
            b: b.diagnostics,
            c: c.diagnostics,
            d: d.diagnostics,
        },
    })
}

fn g_series(x: f64) -> f64 {
    let x2 = x * x;
    1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0 - x2 * x2 * x2 / 45360.0
}

fn sinc_series(x: f64) -> f64 {
    let x2 = x * x;
    1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0
}

/// Closed-form C of a perfect mirror, with x = 2ωz/c.
pub fn mirror_c_closed_form(omega: f64, z: f64) -> Result<[f64; 3]> {
    if !(omega > 0.0 && z >= 0.0 && z.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need omega > 0 and z >= 0, got omega = {omega}, z = {z}"
        )));
    }
    let x = 2.0 * omega * z / C;
    let (g, sinc) = if x < 1e-3 {
        (g_series(x), sinc_series(x))
    } else {
        let (s, c) = x.sin_cos();
        (s / (x * x * x) - c / (x * x), s / x)
    };
    let xy = 1.5 * (g - sinc);
    Ok([xy, xy, 3.0 * g])
}

/// The angular normalization identity Σ_p ∫ k dk/k_z M_p⁺ divided by 4ω/3c,
/// evaluated with the same quadrature as B and C. Exactly (1, 1, 1) in theory.
pub fn sum_rule(omega: f64) -> Result<[f64; 3]> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidArgument(format!("omega must be > 0, got {omega}")));
    }
    // Reduced variables make the result independent of ω; the weights are
    // still built from physical k so the conversion path is exercised.
    let scale = omega / C;
    let f = |s: f64| -> Result<[f64; 3]> {
        let k = (1.0 - s * s).max(0.0).sqrt() * scale;
        let te = angular_weight(Polarization::TE, 1.0, k, omega);
        let tm = angular_weight(Polarization::TM, 1.0, k, omega);
        Ok([0.75 * te[0], 0.75 * tm[0], 0.75 * tm[2]])
    };
    let o = integrate(f, &[0.0, 0.5, 1.0], TOL_B, STRICT, GROUPS, LABELS_B)?;
    Ok([o.value[0] + o.value[1], o.value[0] + o.value[1], o.value[2]])
}
