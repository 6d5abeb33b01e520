//! Frequency-dependent dielectric permittivity models.

use std::io::BufRead;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants;
use crate::error::{Error, Result};

/// Linear-in-ω interpolated optical data. Queries outside the sampled range fail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedPermittivity {
    omega: Vec<f64>,
    eps: Vec<Complex64>,
}

impl TabulatedPermittivity {
    pub fn new(omega: Vec<f64>, eps: Vec<Complex64>) -> Result<Self> {
        if omega.len() != eps.len() {
            return Err(Error::InvalidArgument(
                "tabulated omega and eps lengths differ".into(),
            ));
        }
        if omega.len() < 2 {
            return Err(Error::InvalidArgument(
                "tabulated permittivity needs at least two samples".into(),
            ));
        }
        if omega.iter().any(|w| !w.is_finite() || *w <= 0.0)
            || eps.iter().any(|e| !e.re.is_finite() || !e.im.is_finite())
        {
            return Err(Error::InvalidArgument(
                "tabulated samples must be finite with omega > 0".into(),
            ));
        }
        if omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "tabulated omega must be strictly increasing".into(),
            ));
        }
        Ok(Self { omega, eps })
    }

    /// Parses `omega_rad_per_s, eps_real[, eps_imag]` rows. Fields may be separated
    /// by commas and/or whitespace; `#` starts a comment.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut omega = Vec::new();
        let mut eps = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::TableParse {
                line: lineno,
                msg: e.to_string(),
            })?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if fields.len() != 2 && fields.len() != 3 {
                return Err(Error::TableParse {
                    line: lineno,
                    msg: format!("expected 2 or 3 columns, found {}", fields.len()),
                });
            }
            let mut vals = [0.0f64; 3];
            for (v, f) in vals.iter_mut().zip(&fields) {
                *v = f.parse().map_err(|_| Error::TableParse {
                    line: lineno,
                    msg: format!("not a number: {f:?}"),
                })?;
            }
            omega.push(vals[0]);
            eps.push(Complex64::new(vals[1], vals[2]));
        }
        Self::new(omega, eps).map_err(|e| Error::TableParse {
            line: 0,
            msg: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref()).map_err(|e| Error::TableParse {
            line: 0,
            msg: format!("{}: {e}", path.as_ref().display()),
        })?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn range(&self) -> (f64, f64) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }

    pub fn eval(&self, omega: f64) -> Result<Complex64> {
        let (lo, hi) = self.range();
        if !(lo..=hi).contains(&omega) {
            return Err(Error::TabulatedOutOfRange { omega, lo, hi });
        }
        let i = self.omega.partition_point(|&w| w <= omega);
        if i == self.omega.len() {
            return Ok(self.eps[i - 1]);
        }
        let (w0, w1) = (self.omega[i - 1], self.omega[i]);
        let t = (omega - w0) / (w1 - w0);
        Ok(self.eps[i - 1] * (1.0 - t) + self.eps[i] * t)
    }
}

/// Dielectric response of the slab material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PermittivityModel {
    Vacuum,
    /// ε → ∞ idealization; handled by exact reflection coefficients, never by a number.
    PerfectMirror,
    DrudeLorentz {
        eps_inf: f64,
        omega_l: f64,
        omega_r: f64,
        gamma: f64,
    },
    Drude {
        omega_pl: f64,
        gamma: f64,
    },
    Tabulated(TabulatedPermittivity),
}

impl PermittivityModel {
    /// Gallium arsenide, Drude-Lorentz phonon-polariton model.
    pub fn gaas() -> Self {
        use constants::gaas::*;
        PermittivityModel::DrudeLorentz {
            eps_inf: EPS_INF,
            omega_l: OMEGA_L,
            omega_r: OMEGA_R,
            gamma: GAMMA,
        }
    }

    /// Gold, Drude free-electron model.
    pub fn gold() -> Self {
        use constants::gold::*;
        PermittivityModel::Drude {
            omega_pl: OMEGA_PL,
            gamma: GAMMA,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        match *self {
            PermittivityModel::DrudeLorentz {
                eps_inf,
                omega_l,
                omega_r,
                gamma,
            } => {
                if !(eps_inf.is_finite() && ok(omega_l) && omega_r > 0.0 && ok(omega_r) && ok(gamma))
                {
                    return Err(Error::InvalidArgument(
                        "Drude-Lorentz parameters must be finite and non-negative (omega_r > 0)".into(),
                    ));
                }
            }
            PermittivityModel::Drude { omega_pl, gamma } => {
                if !(ok(omega_pl) && ok(gamma)) {
                    return Err(Error::InvalidArgument(
                        "Drude parameters must be finite and non-negative".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn is_mirror(&self) -> bool {
        matches!(self, PermittivityModel::PerfectMirror)
    }

    /// Largest characteristic frequency of the model (rad/s), if it has one.
    pub fn max_frequency(&self) -> Option<f64> {
        match *self {
            PermittivityModel::DrudeLorentz {
                omega_l,
                omega_r,
                gamma,
                ..
            } => Some(omega_l.max(omega_r).max(gamma)),
            PermittivityModel::Drude { omega_pl, gamma } => Some(omega_pl.max(gamma)),
            PermittivityModel::Tabulated(ref t) => Some(t.range().1),
            _ => None,
        }
    }
}

/// ε(ω) for the given model.
pub fn permittivity(model: &PermittivityModel, omega: f64) -> Result<Complex64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "omega must be positive and finite, got {omega}"
        )));
    }
    match *model {
        PermittivityModel::Vacuum => Ok(Complex64::new(1.0, 0.0)),
        PermittivityModel::PerfectMirror => Err(Error::MirrorHasNoFinitePermittivity),
        PermittivityModel::DrudeLorentz {
            eps_inf,
            omega_l,
            omega_r,
            gamma,
        } => {
            let w2 = omega * omega;
            let num = Complex64::new(w2 - omega_l * omega_l, gamma * omega);
            let den = Complex64::new(w2 - omega_r * omega_r, gamma * omega);
            Ok(eps_inf * num / den)
        }
        PermittivityModel::Drude { omega_pl, gamma } => {
            let den = Complex64::new(omega * omega, omega * gamma);
            Ok(Complex64::new(1.0, 0.0) - omega_pl * omega_pl / den)
        }
        PermittivityModel::Tabulated(ref t) => t.eval(omega),
    }
}

const SCAN_POINTS: usize = 4000;

/// Surface-mode frequency: the first upward crossing of Re ε(ω) = −1.
///
/// A log grid from 10⁻⁴ to 10 times the largest model frequency is scanned for
/// a sign change of Re ε + 1 from negative to positive, then bisected down to
/// the floating-point resolution of the bracket.
pub fn surface_resonance(model: &PermittivityModel) -> Result<f64> {
    let (lo, hi) = match model {
        PermittivityModel::PerfectMirror => return Err(Error::MirrorHasNoFinitePermittivity),
        PermittivityModel::Vacuum => return Err(Error::NoSurfaceResonance),
        PermittivityModel::Tabulated(t) => t.range(),
        _ => {
            let top = model.max_frequency().ok_or(Error::NoSurfaceResonance)?;
            if top <= 0.0 {
                return Err(Error::NoSurfaceResonance);
            }
            (1e-4 * top, 10.0 * top)
        }
    };
    let f = |w: f64| permittivity(model, w).map(|e| e.re + 1.0);
    let ratio = (hi / lo).powf(1.0 / (SCAN_POINTS - 1) as f64);
    let mut w_prev = lo;
    let mut f_prev = f(lo)?;
    for i in 1..SCAN_POINTS {
        let w = if i == SCAN_POINTS - 1 {
            hi
        } else {
            lo * ratio.powi(i as i32)
        };
        let fw = f(w)?;
        if f_prev < 0.0 && fw >= 0.0 {
            return bisect(f, w_prev, w);
        }
        w_prev = w;
        f_prev = fw;
    }
    Err(Error::NoSurfaceResonance)
}

fn bisect(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<f64> {
    // f(a) < 0 <= f(b)
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m)? < 0.0 {
            a = m;
        } else {
            b = m;
        }
        if (b - a) <= 4.0 * f64::EPSILON * b {
            break;
        }
    }
    Ok(0.5 * (a + b))
}
