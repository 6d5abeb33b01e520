//! Mode kinematics and Fresnel / finite-thickness slab scattering coefficients.
//!
//! Internally everything works in reduced variables: wavevectors in units of
//! ω/c and lengths in units of c/ω. The public functions taking physical
//! quantities convert at the boundary.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::C;
use crate::error::{Error, Result};
use crate::matprops::{permittivity, PermittivityModel};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Exponents with real part below this are flushed to exactly zero.
const EXP_FLOOR: f64 = -700.0;
/// Threshold on |1 - r² e^{2ik_zm δ}| below which the slab is at an exact lossless resonance.
const RESONANCE_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    TE,
    TM,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    Propagative,
    Evanescent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeKinematics {
    pub omega: f64,
    /// Transverse wavenumber, rad/m.
    pub k: f64,
    /// Vacuum normal component, rad/m.
    pub k_z: Complex64,
    /// Normal component inside the medium, rad/m.
    pub k_zm: Complex64,
    pub sector: Sector,
}

/// Square root on the decaying branch: Im ≥ 0, and Re ≥ 0 when Im = 0.
pub(crate) fn sqrt_decaying(x: Complex64) -> Complex64 {
    let r = x.sqrt();
    if r.im < 0.0 || (r.im == 0.0 && r.re < 0.0) {
        -r
    } else {
        r
    }
}

/// Reduced k_zm from the reduced vacuum k_z: k_zm² = ε − 1 + k_z².
pub(crate) fn reduced_kzm(kz: Complex64, eps: Complex64) -> Complex64 {
    sqrt_decaying(eps - 1.0 + kz * kz)
}

pub fn kinematics(omega: f64, k: f64, eps: Complex64) -> ModeKinematics {
    let scale = omega / C;
    let kt = k / scale;
    let (kz, sector) = if kt <= 1.0 {
        (
            Complex64::new(((1.0 - kt) * (1.0 + kt)).sqrt(), 0.0),
            Sector::Propagative,
        )
    } else {
        (
            Complex64::new(0.0, ((kt - 1.0) * (kt + 1.0)).sqrt()),
            Sector::Evanescent,
        )
    };
    let kzm = reduced_kzm(kz, eps);
    ModeKinematics {
        omega,
        k,
        k_z: kz * scale,
        k_zm: kzm * scale,
        sector,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FresnelCoefficients {
    pub r_te: Complex64,
    pub r_tm: Complex64,
    pub t_te: Complex64,
    pub t_tm: Complex64,
    pub tbar_te: Complex64,
    pub tbar_tm: Complex64,
}

impl FresnelCoefficients {
    fn vacuum() -> Self {
        Self {
            r_te: Complex64::new(0.0, 0.0),
            r_tm: Complex64::new(0.0, 0.0),
            t_te: ONE,
            t_tm: ONE,
            tbar_te: ONE,
            tbar_tm: ONE,
        }
    }

    pub fn r(&self, p: Polarization) -> Complex64 {
        match p {
            Polarization::TE => self.r_te,
            Polarization::TM => self.r_tm,
        }
    }
}

fn fresnel_reduced(kz: Complex64, kzm: Complex64, eps: Complex64) -> Result<FresnelCoefficients> {
    if eps == ONE {
        return Ok(FresnelCoefficients::vacuum());
    }
    let den_te = kz + kzm;
    let den_tm = eps * kz + kzm;
    if !(den_te.norm() > f64::MIN_POSITIVE) {
        return Err(Error::DegenerateDenominator("k_z + k_zm"));
    }
    if !(den_tm.norm() > f64::MIN_POSITIVE) {
        return Err(Error::DegenerateDenominator("eps k_z + k_zm"));
    }
    let sq = eps.sqrt();
    Ok(FresnelCoefficients {
        r_te: (kz - kzm) / den_te,
        r_tm: (eps * kz - kzm) / den_tm,
        t_te: 2.0 * kz / den_te,
        t_tm: 2.0 * sq * kz / den_tm,
        tbar_te: 2.0 * kzm / den_te,
        tbar_tm: 2.0 * sq * kzm / den_tm,
    })
}

/// Single-interface vacuum/medium Fresnel coefficients.
pub fn fresnel(kin: &ModeKinematics, eps: Complex64) -> Result<FresnelCoefficients> {
    let scale = kin.omega / C;
    fresnel_reduced(kin.k_z / scale, kin.k_zm / scale, eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SlabThickness {
    Finite(f64),
    SemiInfinite,
}

/// Atom-slab distance and slab thickness, both in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub z: f64,
    pub thickness: SlabThickness,
}

impl Geometry {
    pub fn new(z: f64, delta: f64) -> Result<Self> {
        let g = Self {
            z,
            thickness: SlabThickness::Finite(delta),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn semi_infinite(z: f64) -> Result<Self> {
        let g = Self {
            z,
            thickness: SlabThickness::SemiInfinite,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z.is_finite() && self.z >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "atom-slab distance must be finite and >= 0, got {}",
                self.z
            )));
        }
        if let SlabThickness::Finite(d) = self.thickness {
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "slab thickness must be finite and >= 0, got {d}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_semi_infinite(&self) -> bool {
        matches!(self.thickness, SlabThickness::SemiInfinite)
    }

    /// Thickness in meters, `None` for a semi-infinite slab.
    pub fn delta(&self) -> Option<f64> {
        match self.thickness {
            SlabThickness::Finite(d) => Some(d),
            SlabThickness::SemiInfinite => None,
        }
    }
}

/// What the slab is made of at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Medium {
    Dielectric(Complex64),
    PerfectMirror,
}

impl Medium {
    pub fn at(model: &PermittivityModel, omega: f64) -> Result<Self> {
        if model.is_mirror() {
            return Ok(Medium::PerfectMirror);
        }
        permittivity(model, omega).map(Medium::Dielectric)
    }

    pub fn eps(&self) -> Option<Complex64> {
        match *self {
            Medium::Dielectric(e) => Some(e),
            Medium::PerfectMirror => None,
        }
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(*self, Medium::Dielectric(e) if e == ONE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabCoefficients {
    pub rho_te: Complex64,
    pub rho_tm: Complex64,
    pub tau_te: Complex64,
    pub tau_tm: Complex64,
}

impl SlabCoefficients {
    pub const VACUUM: SlabCoefficients = SlabCoefficients {
        rho_te: Complex64 { re: 0.0, im: 0.0 },
        rho_tm: Complex64 { re: 0.0, im: 0.0 },
        tau_te: ONE,
        tau_tm: ONE,
    };

    pub const MIRROR: SlabCoefficients = SlabCoefficients {
        rho_te: Complex64 { re: -1.0, im: 0.0 },
        rho_tm: ONE,
        tau_te: Complex64 { re: 0.0, im: 0.0 },
        tau_tm: Complex64 { re: 0.0, im: 0.0 },
    };

    pub fn rho(&self, p: Polarization) -> Complex64 {
        match p {
            Polarization::TE => self.rho_te,
            Polarization::TM => self.rho_tm,
        }
    }

    pub fn tau(&self, p: Polarization) -> Complex64 {
        match p {
            Polarization::TE => self.tau_te,
            Polarization::TM => self.tau_tm,
        }
    }
}

fn exp_clamped(x: Complex64) -> Complex64 {
    if x.re < EXP_FLOOR {
        Complex64::new(0.0, 0.0)
    } else {
        x.exp()
    }
}

/// Slab coefficients from the reduced vacuum k_z (k_z c/ω) and reduced thickness
/// δ̃ = ωδ/c (`None` for a semi-infinite slab).
pub(crate) fn slab_reduced(
    kz: Complex64,
    medium: Medium,
    delta_tilde: Option<f64>,
) -> Result<SlabCoefficients> {
    let eps = match medium {
        Medium::PerfectMirror => return Ok(SlabCoefficients::MIRROR),
        Medium::Dielectric(e) => e,
    };
    if eps == ONE || delta_tilde == Some(0.0) {
        return Ok(SlabCoefficients::VACUUM);
    }
    let kzm = reduced_kzm(kz, eps);
    let f = fresnel_reduced(kz, kzm, eps)?;
    let Some(dt) = delta_tilde else {
        return Ok(SlabCoefficients {
            rho_te: f.r_te,
            rho_tm: f.r_tm,
            tau_te: Complex64::new(0.0, 0.0),
            tau_tm: Complex64::new(0.0, 0.0),
        });
    };
    let round_trip = exp_clamped(2.0 * I * kzm * dt);
    let one_pass = exp_clamped(I * (kzm - kz) * dt);
    let channel = |r: Complex64, t: Complex64, tbar: Complex64| -> Result<(Complex64, Complex64)> {
        let den = ONE - r * r * round_trip;
        let mag = den.norm();
        if mag < RESONANCE_FLOOR {
            return Err(Error::ResonantDenominator(mag));
        }
        Ok((r * (ONE - round_trip) / den, t * tbar * one_pass / den))
    };
    let (rho_te, tau_te) = channel(f.r_te, f.t_te, f.tbar_te)?;
    let (rho_tm, tau_tm) = channel(f.r_tm, f.t_tm, f.tbar_tm)?;
    Ok(SlabCoefficients {
        rho_te,
        rho_tm,
        tau_te,
        tau_tm,
    })
}

/// ρ_p and τ_p for a slab of the given geometry.
pub fn slab_coefficients(
    kin: &ModeKinematics,
    medium: Medium,
    geom: &Geometry,
) -> Result<SlabCoefficients> {
    let scale = kin.omega / C;
    slab_reduced(kin.k_z / scale, medium, geom.delta().map(|d| d * scale))
}
