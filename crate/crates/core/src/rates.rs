//! Transition rates, effective photon numbers and temperatures, and Markov-validity estimates.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::constants::{C, EPS0, HBAR, K_B};
use crate::error::{Error, Result};
use crate::matprops::{surface_resonance, PermittivityModel};
use crate::quadrature::{env_body_factors, env_body_factors_with, Accuracy, EnvBodyFactors};
use crate::slab_optics::{Geometry, SlabThickness};

/// Bose-Einstein occupation n(ω, T).
pub fn mean_photon_n(omega: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega / (K_B * t)).exp_m1()
}

/// Temperature at which n(ω, T) equals `n`; 0 for n = 0.
pub fn temperature_for_n(omega: f64, n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    HBAR * omega / (K_B * (1.0 / n).ln_1p())
}

/// Vacuum spontaneous-emission rate ω³|d|²/(3πε₀ħc³).
pub fn gamma0(omega: f64, d: f64) -> f64 {
    omega.powi(3) * d * d / (3.0 * std::f64::consts::PI * EPS0 * HBAR * C.powi(3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleSpec {
    /// |d| in C·m.
    pub magnitude: f64,
    /// (|d_x|², |d_y|², |d_z|²)/|d|².
    pub dtilde: [f64; 3],
}

impl DipoleSpec {
    pub fn new(magnitude: f64, dtilde: [f64; 3]) -> Result<Self> {
        if !(magnitude.is_finite() && magnitude >= 0.0) {
            return Err(Error::InvalidArgument(format!("dipole magnitude must be >= 0, got {magnitude}")));
        }
        if dtilde.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
            return Err(Error::InvalidArgument(format!("dtilde components must be >= 0, got {dtilde:?}")));
        }
        let s: f64 = dtilde.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("dtilde must sum to 1, got {s}")));
        }
        Ok(Self { magnitude, dtilde })
    }

    /// From the Cartesian moduli |d_x|, |d_y|, |d_z|.
    pub fn from_components(d: [f64; 3]) -> Result<Self> {
        let m2: f64 = d.iter().map(|x| x * x).sum();
        if !(m2 > 0.0 && m2.is_finite()) {
            return Err(Error::InvalidArgument("dipole vector must be non-zero".into()));
        }
        Self::new(m2.sqrt(), [d[0] * d[0] / m2, d[1] * d[1] / m2, d[2] * d[2] / m2])
    }

    pub fn parallel(magnitude: f64) -> Self {
        Self { magnitude, dtilde: [0.5, 0.5, 0.0] }
    }

    pub fn perpendicular(magnitude: f64) -> Self {
        Self { magnitude, dtilde: [0.0, 0.0, 1.0] }
    }

    pub fn isotropic(magnitude: f64) -> Self {
        Self { magnitude, dtilde: [1.0 / 3.0; 3] }
    }

    pub fn preset(name: &str, magnitude: f64) -> Result<Self> {
        match name {
            "parallel" => Ok(Self::parallel(magnitude)),
            "perpendicular" => Ok(Self::perpendicular(magnitude)),
            "isotropic" => Ok(Self::isotropic(magnitude)),
            other => Err(Error::InvalidArgument(format!(
                "unknown dipole orientation '{other}' (parallel, perpendicular, isotropic)"
            ))),
        }
    }

    fn dot(&self, v: &[f64; 3]) -> f64 {
        self.dtilde.iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

/// Body temperature T_M and surrounding-wall temperature T_W, kelvin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalEnv {
    pub t_m: f64,
    pub t_w: f64,
}

impl ThermalEnv {
    pub fn new(t_m: f64, t_w: f64) -> Result<Self> {
        for (name, t) in [("T_M", t_m), ("T_W", t_w)] {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be finite and >= 0, got {t}")));
            }
        }
        Ok(Self { t_m, t_w })
    }

    pub fn equilibrium(t: f64) -> Result<Self> {
        Self::new(t, t)
    }

    pub fn t_min(&self) -> f64 {
        self.t_m.min(self.t_w)
    }

    pub fn t_max(&self) -> f64 {
        self.t_m.max(self.t_w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSet {
    pub omega: f64,
    pub gamma0: f64,
    pub alpha_w: f64,
    pub alpha_m: f64,
    pub n_eff: f64,
    pub t_eff: f64,
    /// Γ(ω), emission.
    pub gamma_down: f64,
    /// Γ(−ω), absorption.
    pub gamma_up: f64,
    /// Quadrature error bound propagated to α_W and α_M.
    pub alpha_err: [f64; 2],
}

impl RateSet {
    /// Rates Γ(ω) = g(1 + n), Γ(−ω) = g n for a given total coupling g (s⁻¹) and
    /// photon number n, without any environment calculation. α_W is set to 1.
    pub fn from_n_eff(omega: f64, g: f64, n_eff: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidArgument(format!("omega must be > 0, got {omega}")));
        }
        if !(g >= 0.0 && g.is_finite() && n_eff >= 0.0 && n_eff.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rate scale and n_eff must be finite and >= 0, got {g}, {n_eff}"
            )));
        }
        Ok(Self {
            omega,
            gamma0: g,
            alpha_w: 1.0,
            alpha_m: 0.0,
            n_eff,
            t_eff: temperature_for_n(omega, n_eff),
            gamma_down: g * (1.0 + n_eff),
            gamma_up: g * n_eff,
            alpha_err: [0.0; 2],
        })
    }
}

/// α_W = (1 + B + 2C)/2 · d̃ and α_M = (1 − B + 2D)/2 · d̃, with error bounds.
pub fn alphas_from_factors(f: &EnvBodyFactors, dtilde: &[f64; 3]) -> ([f64; 2], [f64; 2]) {
    let mut aw = 0.0;
    let mut am = 0.0;
    let mut ew = 0.0;
    let mut em = 0.0;
    for i in 0..3 {
        aw += 0.5 * (1.0 + f.b[i] + 2.0 * f.c[i]) * dtilde[i];
        am += 0.5 * (1.0 - f.b[i] + 2.0 * f.d[i]) * dtilde[i];
        let (eb, ec, ed) = (
            f.diagnostics.b.abs_error[i],
            f.diagnostics.c.abs_error[i],
            f.diagnostics.d.abs_error[i],
        );
        ew += 0.5 * (eb + 2.0 * ec) * dtilde[i];
        em += 0.5 * (eb + 2.0 * ed) * dtilde[i];
    }
    ([aw, am], [ew, em])
}

pub fn alphas(
    omega: f64,
    geom: &Geometry,
    model: &PermittivityModel,
    dtilde: &[f64; 3],
) -> Result<(f64, f64)> {
    let f = env_body_factors(omega, geom, model)?;
    let ([aw, am], _) = alphas_from_factors(&f, dtilde);
    Ok((aw, am))
}

/// Rates from already computed factors; lets sweeps reuse B/C/D across temperatures.
pub fn rates_from_factors(
    f: &EnvBodyFactors,
    dipole: &DipoleSpec,
    env: &ThermalEnv,
) -> Result<RateSet> {
    let omega = f.omega;
    let ([aw, am], alpha_err) = alphas_from_factors(f, &dipole.dtilde);
    let sum = aw + am;
    if sum == 0.0 {
        return Err(Error::BothAlphasZero);
    }
    let nw = mean_photon_n(omega, env.t_w);
    let nm = mean_photon_n(omega, env.t_m);
    let n_eff = (nw * aw + nm * am) / sum;
    let g0 = gamma0(omega, dipole.magnitude);
    Ok(RateSet {
        omega,
        gamma0: g0,
        alpha_w: aw,
        alpha_m: am,
        n_eff,
        t_eff: temperature_for_n(omega, n_eff),
        gamma_down: g0 * sum * (1.0 + n_eff),
        gamma_up: g0 * sum * n_eff,
        alpha_err,
    })
}

pub fn transition_rates(
    omega: f64,
    dipole: &DipoleSpec,
    geom: &Geometry,
    model: &PermittivityModel,
    env: &ThermalEnv,
) -> Result<RateSet> {
    let f = env_body_factors(omega, geom, model)?;
    rates_from_factors(&f, dipole, env)
}

/// Equilibrium special case Γ(±ω) = Γ₀[1 + (C + D)·d̃]{1 + n, n}.
pub fn equilibrium_rates(
    omega: f64,
    dipole: &DipoleSpec,
    geom: &Geometry,
    model: &PermittivityModel,
    t: f64,
) -> Result<RateSet> {
    ThermalEnv::equilibrium(t)?;
    let f = env_body_factors(omega, geom, model)?;
    let mut cd = [0.0; 3];
    for i in 0..3 {
        cd[i] = f.c[i] + f.d[i];
    }
    let total = dipole.dtilde.iter().sum::<f64>() + dipole.dot(&cd);
    let ([aw, am], alpha_err) = alphas_from_factors(&f, &dipole.dtilde);
    if total == 0.0 {
        return Err(Error::BothAlphasZero);
    }
    let n = mean_photon_n(omega, t);
    let g0 = gamma0(omega, dipole.magnitude);
    Ok(RateSet {
        omega,
        gamma0: g0,
        alpha_w: aw,
        alpha_m: am,
        n_eff: n,
        t_eff: if n > 0.0 { t } else { 0.0 },
        gamma_down: g0 * total * (1.0 + n),
        gamma_up: g0 * total * n,
        alpha_err,
    })
}

/// Distance in [z_lo, z_hi] (meters) where α_W = α_M, if the difference changes sign there.
pub fn crossover_distance(
    omega: f64,
    dipole: &DipoleSpec,
    thickness: SlabThickness,
    model: &PermittivityModel,
    z_lo: f64,
    z_hi: f64,
) -> Result<Option<f64>> {
    if !(z_lo > 0.0 && z_hi > z_lo) {
        return Err(Error::InvalidArgument(format!("need 0 < z_lo < z_hi, got [{z_lo}, {z_hi}]")));
    }
    let diff = |z: f64| -> Result<f64> {
        let g = Geometry { z, thickness };
        g.validate()?;
        let (aw, am) = alphas(omega, &g, model, &dipole.dtilde)?;
        Ok(aw - am)
    };
    let (mut a, mut b) = (z_lo.ln(), z_hi.ln());
    let (mut fa, fb) = (diff(z_lo)?, diff(z_hi)?);
    if fa == 0.0 {
        return Ok(Some(z_lo));
    }
    if fa.signum() == fb.signum() {
        return Ok(None);
    }
    while b - a > 1e-10 {
        let m = 0.5 * (a + b);
        let fm = diff(m.exp())?;
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(Some((0.5 * (a + b)).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovDiagnostics {
    /// Relaxation time 1/(Γ(ω) + Γ(−ω)).
    pub tau_r: f64,
    /// Rotating-wave time scale 1/(2ω).
    pub tau_a: f64,
    /// Bath correlation time: |⟨E(s)E(0)⟩| stays below 1/e of its initial value after it.
    pub tau_b: f64,
    pub born_markov_ok: bool,
    pub rwa_ok: bool,
    /// Upper frequency of the correlation spectrum grid, rad/s.
    pub grid_omega_max: f64,
    /// Samples on the positive-frequency half of the grid.
    pub grid_samples: usize,
}

const SPECTRUM_SAMPLES: usize = 1 << 14;
const SPECTRUM_SPAN: f64 = 20.0;
const SPECTRUM_FLOOR: f64 = 1e-3;
const UNIFORM_NODES: usize = 256;
const PEAK_NODES: usize = 96;

/// Frequencies around which a model's response is sharply structured, with their widths.
fn resonances(model: &PermittivityModel) -> Vec<(f64, f64)> {
    let mut v = Vec::new();
    match *model {
        PermittivityModel::DrudeLorentz { omega_l, omega_r, gamma, .. } => {
            let w = gamma.max(1e-6 * omega_r);
            v.push((omega_r, w));
            v.push((omega_l, w));
        }
        PermittivityModel::Drude { gamma, omega_pl } => {
            v.push((omega_pl, gamma.max(1e-6 * omega_pl)));
        }
        _ => {}
    }
    if let Ok(wp) = surface_resonance(model) {
        let w = v.first().map_or(1e-3 * wp, |r| r.1);
        v.push((wp, w));
    }
    v
}

/// Projected field spectrum γ(ω') ∝ Γ(ω')/|d|² on both signs of ω', sampled on a
/// node set that resolves the model's resonances, then interpolated onto a
/// uniform grid and Fourier transformed. τ_B is the time after which |C(s)|/|C(0)|
/// stays below 1/e.
fn correlation_time(
    dipole: &DipoleSpec,
    geom: &Geometry,
    model: &PermittivityModel,
    env: &ThermalEnv,
    omega: f64,
) -> Result<(f64, f64)> {
    let t = env.t_max();
    let scale = if t > 0.0 { K_B * t / HBAR } else { omega };
    let w_max = SPECTRUM_SPAN * scale;
    let w_min = SPECTRUM_FLOOR * scale;

    let mut nodes: Vec<f64> = (0..=UNIFORM_NODES)
        .map(|i| w_min + (w_max - w_min) * i as f64 / UNIFORM_NODES as f64)
        .collect();
    for (c, w) in resonances(model) {
        for j in 0..=PEAK_NODES {
            let x = c + 40.0 * w * (2.0 * j as f64 / PEAK_NODES as f64 - 1.0);
            if x > w_min && x < w_max {
                nodes.push(x);
            }
        }
    }
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();

    let unit = DipoleSpec { magnitude: 1.0, ..*dipole };
    let spectrum: Vec<(f64, f64)> = {
        use rayon::prelude::*;
        nodes
            .par_iter()
            .map(|&w| {
                let f = env_body_factors_with(w, geom, model, Accuracy::Survey)?;
                let r = rates_from_factors(&f, &unit, env)?;
                Ok((r.gamma_down, r.gamma_up))
            })
            .collect::<Result<Vec<_>>>()?
    };

    let n = SPECTRUM_SAMPLES;
    let dw = w_max / n as f64;
    let mut buf = vec![Complex64::new(0.0, 0.0); 2 * n];
    let mut j = 0;
    for k in 1..n {
        let w = k as f64 * dw;
        if w < nodes[0] {
            continue;
        }
        while j + 2 < nodes.len() && nodes[j + 1] < w {
            j += 1;
        }
        let (x0, x1) = (nodes[j], nodes[j + 1]);
        let s = ((w - x0) / (x1 - x0)).clamp(0.0, 1.0);
        let down = spectrum[j].0 + s * (spectrum[j + 1].0 - spectrum[j].0);
        let up = spectrum[j].1 + s * (spectrum[j + 1].1 - spectrum[j].1);
        buf[k] = Complex64::new(down, 0.0);
        buf[2 * n - k] = Complex64::new(up, 0.0);
    }
    FftPlanner::new().plan_fft_forward(2 * n).process(&mut buf);
    let c0 = buf[0].norm();
    let ds = std::f64::consts::PI / w_max;
    let target = c0 / std::f64::consts::E;
    // |C| of a two-sided spectrum beats at twice the carrier frequency, so the
    // decay is read off the envelope: the last time |C| is above C(0)/e. Only the
    // first quarter of the periodic window is trusted.
    let window = n / 2;
    let mut tau = f64::INFINITY;
    for m in (1..window).rev() {
        let (a, b) = (buf[m - 1].norm(), buf[m].norm());
        if a >= target {
            tau = if b < target {
                ds * ((m - 1) as f64 + (a - target) / (a - b))
            } else {
                ds * m as f64
            };
            break;
        }
    }
    Ok((tau, w_max))
}

pub fn markov_diagnostics(
    omega: f64,
    dipole: &DipoleSpec,
    geom: &Geometry,
    model: &PermittivityModel,
    env: &ThermalEnv,
) -> Result<MarkovDiagnostics> {
    let r = transition_rates(omega, dipole, geom, model, env)?;
    let tau_r = 1.0 / (r.gamma_down + r.gamma_up);
    let tau_a = 1.0 / (2.0 * omega);
    let (tau_b, grid_omega_max) = correlation_time(dipole, geom, model, env, omega)?;
    Ok(MarkovDiagnostics {
        tau_r,
        tau_a,
        tau_b,
        born_markov_ok: tau_b < tau_r / 10.0,
        rwa_ok: tau_a < tau_r / 10.0,
        grid_omega_max,
        grid_samples: SPECTRUM_SAMPLES,
    })
}
