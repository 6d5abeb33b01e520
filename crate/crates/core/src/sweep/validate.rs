//! Built-in invariant suite behind `noneq-atomdyn validate`.

use std::fmt::Write as _;

use crate::constants::{gaas, gold, C};
use crate::dynamics::two_level_steady;
use crate::matprops::{surface_resonance, PermittivityModel};
use crate::quadrature::{
    asymptote_d, compute_c, compute_d, env_body_factors, mirror_c_closed_form, sum_rule, Regime,
};
use crate::rates::{mean_photon_n, rates_from_factors, DipoleSpec, ThermalEnv};
use crate::slab_optics::Geometry;

/// Test hook: a relative offset applied to the reference value of the sum rule,
/// so that the failure path of the report can be exercised.
pub const PERTURB_ENV: &str = "NONEQ_ATOMDYN_VALIDATE_PERTURB";

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// What is measured, in a few words.
    pub what: &'static str,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "noneq-atomdyn validate");
        let _ = writeln!(s, "{:<28} {:<44} {:>10} {:>10}  result", "check", "quantity", "measured", "bound");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<28} {:<44} {:>10.2e} {:>10.2e}  {}",
                c.name,
                c.what,
                c.measured,
                c.bound,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        let n = self.checks.iter().filter(|c| c.pass).count();
        let _ = writeln!(s, "summary: {n}/{} checks passed", self.checks.len());
        s
    }
}

/// A check whose value is an upper bound on a deviation; errors count as failures.
fn at_most(name: &'static str, what: &'static str, bound: f64, measured: crate::Result<f64>) -> Check {
    let measured = measured.unwrap_or(f64::NAN);
    Check { name, what, measured, bound, pass: measured <= bound }
}

fn sum_rule_check(perturb: f64) -> crate::Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..20 {
        let omega = 1e12 * 1e4f64.powf(i as f64 / 19.0);
        for v in sum_rule(omega)? {
            worst = worst.max((v - (1.0 + perturb)).abs());
        }
    }
    Ok(worst)
}

fn mirror_c_check() -> crate::Result<f64> {
    let omega = gaas::OMEGA_R;
    let mut worst = 0.0f64;
    for i in 0..8 {
        let zt = 0.1 * 500f64.powf(i as f64 / 7.0);
        let z = zt * C / omega;
        let num = compute_c(omega, &Geometry::semi_infinite(z)?, &PermittivityModel::PerfectMirror)?;
        let exact = mirror_c_closed_form(omega, z)?;
        for k in 0..3 {
            worst = worst.max((num.value[k] - exact[k]).abs());
        }
    }
    Ok(worst)
}

fn mirror_bd_check() -> crate::Result<f64> {
    let omega = gaas::OMEGA_R;
    let f = env_body_factors(omega, &Geometry::semi_infinite(1e-6)?, &PermittivityModel::PerfectMirror)?;
    Ok((0..3).map(|k| (f.b[k] - 1.0).abs().max(f.d[k].abs())).fold(0.0, f64::max))
}

fn vacuum_check() -> crate::Result<f64> {
    let mut worst = 0.0f64;
    for (omega, z, delta) in [(1e13, 1e-7, 1e-6), (5e13, 2e-6, 1e-2), (2e14, 1e-5, 3e-8)] {
        let f = env_body_factors(omega, &Geometry::new(z, delta)?, &PermittivityModel::Vacuum)?;
        let r = rates_from_factors(&f, &DipoleSpec::isotropic(1e-29), &ThermalEnv::new(300.0, 300.0)?)?;
        worst = worst.max((r.alpha_w - 1.0).abs()).max(r.alpha_m.abs());
    }
    Ok(worst)
}

fn contact_check() -> crate::Result<f64> {
    let model = PermittivityModel::gaas();
    let omega = 1.2 * gaas::OMEGA_R;
    let geom = Geometry::semi_infinite(1e-3 * C / omega)?;
    let d = compute_d(omega, &geom, &model)?;
    let law = asymptote_d(omega, &geom, &model, Regime::SmallZ)?;
    let exact = law.total();
    Ok((0..3).map(|k| ((d.value[k] - exact[k]) / exact[k]).abs()).fold(0.0, f64::max))
}

fn large_z_check() -> crate::Result<f64> {
    let model = PermittivityModel::gaas();
    let omega = 1.2 * gaas::OMEGA_R;
    let geom = Geometry::semi_infinite(50.0 * C / omega)?;
    let d = compute_d(omega, &geom, &model)?;
    let law = asymptote_d(omega, &geom, &model, Regime::LargeZThick)?;
    let exact = law.total();
    Ok((0..3).map(|k| ((d.value[k] - exact[k]) / exact[k]).abs()).fold(0.0, f64::max))
}

/// Sample points shared by the constraint and clamping checks.
fn sample_points() -> crate::Result<Vec<(PermittivityModel, f64, Geometry)>> {
    let gaas_m = PermittivityModel::gaas();
    let gold_m = PermittivityModel::gold();
    Ok(vec![
        (gaas_m.clone(), gaas::OMEGA_R, Geometry::new(1e-7, 1e-6)?),
        (gaas_m.clone(), surface_resonance(&gaas_m)?, Geometry::new(5e-7, 2e-6)?),
        (gaas_m, 1.5 * gaas::OMEGA_R, Geometry::semi_infinite(3e-6)?),
        (gold_m.clone(), gold::OMEGA_ROOM, Geometry::new(1e-6, 2e-8)?),
        (gold_m, 0.5 * gold::OMEGA_ROOM, Geometry::semi_infinite(1e-5)?),
    ])
}

/// Most negative constraint left-hand side, reported as a violation (≥ 0).
fn constraints_check() -> crate::Result<f64> {
    let mut worst = 0.0f64;
    for (model, omega, geom) in sample_points()? {
        let f = env_body_factors(omega, &geom, &model)?;
        for row in f.constraint_margins() {
            for m in row {
                worst = worst.max(-m);
            }
        }
    }
    Ok(worst)
}

fn clamping_check() -> crate::Result<f64> {
    let mut worst = 0.0f64;
    for (model, omega, geom) in sample_points()? {
        let f = env_body_factors(omega, &geom, &model)?;
        for (t_m, t_w) in [(50.0, 600.0), (600.0, 50.0), (300.0, 100.0)] {
            let r = rates_from_factors(&f, &DipoleSpec::isotropic(1e-29), &ThermalEnv::new(t_m, t_w)?)?;
            let lo = mean_photon_n(omega, f64::min(t_m, t_w));
            let hi = mean_photon_n(omega, f64::max(t_m, t_w));
            worst = worst.max(lo - r.n_eff).max(r.n_eff - hi);
        }
    }
    Ok(worst)
}

fn equilibrium_check() -> crate::Result<f64> {
    let model = PermittivityModel::gaas();
    let omega = surface_resonance(&model)?;
    let env = ThermalEnv::equilibrium(300.0)?;
    let mut vals = Vec::new();
    for z in [1e-8, 1e-7, 1e-6, 1e-5] {
        let f = env_body_factors(omega, &Geometry::new(z, 1e-2)?, &model)?;
        let r = rates_from_factors(&f, &DipoleSpec::isotropic(1e-29), &env)?;
        vals.push(two_level_steady(&r)?.get(1, 1).re);
    }
    let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    Ok(hi - lo)
}

/// Runs every check. `perturb` offsets the sum-rule reference (0 for a normal run).
pub fn run_checks(perturb: f64) -> Report {
    let checks = vec![
        at_most("sum_rule", "max |sum rule - 1|, 20 frequencies", 1e-9, sum_rule_check(perturb)),
        at_most("mirror_c_closed_form", "max |C_num - C_closed|, 8 distances", 1e-8, mirror_c_check()),
        at_most("mirror_b_d", "max(|B - 1|, |D|) for a perfect mirror", 1e-12, mirror_bd_check()),
        at_most("vacuum_limit", "max(|alpha_W - 1|, |alpha_M|), no body", 1e-9, vacuum_check()),
        at_most("contact_asymptote", "rel. error of D vs contact law", 0.02, contact_check()),
        at_most("large_z_asymptote", "rel. error of D vs thick large-z law", 0.05, large_z_check()),
        at_most("constraint_inequalities", "most negative constraint lhs", 1e-9, constraints_check()),
        at_most("n_eff_clamping", "n_eff outside [n(T_min), n(T_max)]", 1e-9, clamping_check()),
        at_most("equilibrium_z_independence", "spread of rho22 over 3 decades of z", 1e-8, equilibrium_check()),
    ];
    Report { checks }
}

/// Perturbation requested through [`PERTURB_ENV`]; 0 when unset or unparsable.
pub fn perturbation_from_env() -> f64 {
    std::env::var(PERTURB_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(0.0)
}
