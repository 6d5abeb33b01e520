//! Closed-form large-distance and contact behaviour of D(ω).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{integrate, Tolerance, STRICT};
use crate::constants::C;
use crate::error::{Error, Result};
use crate::matprops::{permittivity, PermittivityModel};
use crate::slab_optics::{slab_reduced, Geometry, Medium};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// z̃ ≫ 1 at the actual thickness.
    LargeZ,
    /// z̃ ≪ 1, thickness-independent near-field divergence.
    SmallZ,
    /// z̃ ≫ 1 for an opaque slab.
    LargeZThick,
    /// z̃ ≫ 1 for a slab much thinner than the internal wavelength.
    LargeZThin,
    /// Thickness sent to zero before the distance.
    ContactThinFirst,
    /// Distance sent to zero before the thickness grows.
    ContactThickFirst,
}

impl Regime {
    pub const ALL: [Regime; 6] = [
        Regime::LargeZ,
        Regime::SmallZ,
        Regime::LargeZThick,
        Regime::LargeZThin,
        Regime::ContactThinFirst,
        Regime::ContactThickFirst,
    ];

    fn name(self) -> &'static str {
        match self {
            Regime::LargeZ => "large_z",
            Regime::SmallZ => "small_z",
            Regime::LargeZThick => "large_z_thick",
            Regime::LargeZThin => "large_z_thin",
            Regime::ContactThinFirst => "contact_thin_first",
            Regime::ContactThickFirst => "contact_thick_first",
        }
    }
}

/// Predicted D split by polarization. TE has no normal component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DAsymptote {
    pub te_xy: f64,
    pub tm_xy: f64,
    pub tm_z: f64,
}

impl DAsymptote {
    pub fn total(&self) -> [f64; 3] {
        let xy = self.te_xy + self.tm_xy;
        [xy, xy, self.tm_z]
    }
}

const LARGE_Z: f64 = 10.0;
const SMALL_Z: f64 = 0.1;
/// Im(q δ̃) above which cot(q δ̃) is −i to e^{−10}.
const OPAQUE: f64 = 5.0;
const THIN: f64 = 0.1;

fn mismatch(regime: Regime, reason: String) -> Error {
    Error::RegimeParameterMismatch { regime: regime.name(), reason }
}

/// ¾ ∫₀^∞ Im ρ_TE(u) du, the finite TE part of D at contact.
fn te_contact(eps: Complex64, delta: Option<f64>) -> Result<f64> {
    let top = 1e3 * eps.norm().max(1.0).max(delta.map_or(1.0, |d| 1.0 / d));
    let lo = 1e-6 * delta.map_or(1.0, |d| d.min(1.0));
    let decades = (top / lo).log10();
    let n = (16.0 * decades).ceil() as usize;
    let mut breaks: Vec<f64> = std::iter::once(0.0)
        .chain((0..=n).map(|i| lo * 10f64.powf(decades * i as f64 / n as f64)))
        .collect();
    breaks.dedup();
    let f = |u: f64| -> Result<[f64; 1]> {
        Ok([slab_reduced(Complex64::new(0.0, u), Medium::Dielectric(eps), delta)?.rho_te.im])
    };
    let o = integrate(f, &breaks, Tolerance { rel: 1e-8, abs: 1e-13 }, STRICT, [0], ["D_xy(TE) contact"])?;
    // Tail beyond `top`: Im ρ_TE ~ Im ε/(4u²).
    Ok(0.75 * (o.value[0] + eps.im / (4.0 * top)))
}

fn cot(x: Complex64) -> Complex64 {
    // cot x = i (e^{2ix} + 1)/(e^{2ix} − 1), stable for large Im x.
    let e = (Complex64::new(0.0, 2.0) * x).exp();
    Complex64::new(0.0, 1.0) * (e + 1.0) / (e - 1.0)
}

pub fn asymptote_d(
    omega: f64,
    geom: &Geometry,
    model: &PermittivityModel,
    regime: Regime,
) -> Result<DAsymptote> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidArgument(format!("omega must be > 0, got {omega}")));
    }
    geom.validate()?;
    let eps = permittivity(model, omega)?;
    let scale = omega / C;
    let z = geom.z * scale;
    let delta = geom.delta().map(|d| d * scale);
    let q = (eps - 1.0).sqrt();
    let thick = match delta {
        None => true,
        Some(d) => (q * d).im >= OPAQUE,
    };

    let need_large = || {
        if z < LARGE_Z {
            Err(mismatch(regime, format!("needs z~ >= {LARGE_Z}, got {z}")))
        } else {
            Ok(())
        }
    };
    let need_small = || {
        if !(z > 0.0 && z <= SMALL_Z) {
            Err(mismatch(regime, format!("needs 0 < z~ <= {SMALL_Z}, got {z}")))
        } else {
            Ok(())
        }
    };
    let large = |f: Complex64| DAsymptote {
        te_xy: -3.0 * f.im / (8.0 * z * z),
        tm_xy: -9.0 * (eps * f).im / (16.0 * z.powi(4)),
        tm_z: -3.0 * (eps * f).im / (4.0 * z * z),
    };
    let i1 = ((eps - 1.0) / (eps + 1.0)).im;
    let near = |te: f64| DAsymptote {
        te_xy: te,
        tm_xy: 3.0 * i1 / (16.0 * z.powi(3)),
        tm_z: 3.0 * i1 / (8.0 * z.powi(3)),
    };

    match regime {
        Regime::LargeZ => {
            need_large()?;
            let f = match delta {
                None => -Complex64::new(0.0, 1.0) / q,
                Some(d) => cot(q * d) / q,
            };
            Ok(large(f))
        }
        Regime::LargeZThick => {
            need_large()?;
            if !thick {
                return Err(mismatch(regime, format!("slab not opaque: Im(q d~) < {OPAQUE}")));
            }
            Ok(large(-Complex64::new(0.0, 1.0) / q))
        }
        Regime::LargeZThin => {
            need_large()?;
            let d = delta.ok_or_else(|| mismatch(regime, "slab is semi-infinite".into()))?;
            if (q * d).norm() > THIN {
                return Err(mismatch(regime, format!("needs |q| d~ <= {THIN}, got {}", (q * d).norm())));
            }
            // cot(qδ̃)/q → 1/(δ̃ q²).
            Ok(large(1.0 / (d * (eps - 1.0))))
        }
        Regime::SmallZ => {
            need_small()?;
            Ok(near(te_contact(eps, delta)?))
        }
        Regime::ContactThickFirst => {
            need_small()?;
            if let Some(d) = delta {
                if d < 10.0 * z {
                    return Err(mismatch(regime, format!("needs d~ >= 10 z~, got d~ = {d}")));
                }
            }
            Ok(near(te_contact(eps, delta)?))
        }
        Regime::ContactThinFirst => {
            need_small()?;
            let d = delta.ok_or_else(|| mismatch(regime, "slab is semi-infinite".into()))?;
            if d > THIN * z {
                return Err(mismatch(regime, format!("needs d~ <= {THIN} z~, got d~ = {d}")));
            }
            // Thin film: Im ρ_TM ≈ δ̃ u I₂/2 for 1 ≪ u ≪ 1/δ̃.
            let i2 = ((eps * eps - 1.0) / eps).im;
            Ok(DAsymptote {
                te_xy: te_contact(eps, Some(d))?,
                tm_xy: 9.0 * d * i2 / (64.0 * z.powi(4)),
                tm_z: 9.0 * d * i2 / (32.0 * z.powi(4)),
            })
        }
    }
}
