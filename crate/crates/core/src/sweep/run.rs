//! Grid evaluation for the rates, steady and dynamics commands.

use rayon::prelude::*;

use crate::dynamics::{
    closest_thermal, lambda_relaxation_rates, purity, three_level_evolve, three_level_steady, two_level_evolve,
    two_level_steady, DensityMatrix, LevelScheme,
};
use crate::error::Result;
use crate::quadrature::{env_body_factors_with, EnvBodyFactors};
use crate::rates::{rates_from_factors, RateSet, ThermalEnv};
use crate::slab_optics::Geometry;

use super::config::{Command, FreqGrid, Resolved, SchemeKind};
use super::SweepError;

/// One output cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Missing,
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    /// Number of rows whose status is not "ok".
    pub failed: usize,
}

/// Status text for a failed row, kept free of separators.
fn status_of(e: &crate::Error) -> String {
    e.to_string().replace([',', '\n', '"'], ";")
}

fn geometry(z: f64, delta: f64) -> Result<Geometry> {
    if delta.is_infinite() {
        Geometry::semi_infinite(z)
    } else {
        Geometry::new(z, delta)
    }
}

/// A grid point without temperatures: one or two frequencies, z and δ.
#[derive(Debug, Clone, Copy)]
struct Point {
    omega: [f64; 2],
    z: f64,
    delta: f64,
}

fn points(r: &Resolved) -> Vec<Point> {
    let mut out = Vec::new();
    let freqs: Vec<[f64; 2]> = match &r.freq {
        FreqGrid::Single(w) => w.iter().map(|&w| [w, f64::NAN]).collect(),
        FreqGrid::Lambda { omega31, omega32 } => omega31
            .iter()
            .flat_map(|&a| omega32.iter().map(move |&b| [a, b]))
            .collect(),
    };
    for omega in freqs {
        for &z in &r.z {
            for &delta in &r.delta {
                out.push(Point { omega, z, delta });
            }
        }
    }
    out
}

fn factors(r: &Resolved, omega: f64, p: &Point) -> Result<EnvBodyFactors> {
    env_body_factors_with(omega, &geometry(p.z, p.delta)?, &r.model, r.accuracy)
}

/// Runs `f` over the grid points on `jobs` threads; rows come back in grid order.
fn map_points<F>(r: &Resolved, jobs: usize, f: F) -> std::result::Result<Vec<Vec<Vec<Value>>>, SweepError>
where
    F: Fn(&Point) -> Vec<Vec<Value>> + Sync + Send,
{
    let pts = points(r);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| SweepError::Runtime(format!("thread pool: {e}")))?;
    Ok(pool.install(|| pts.par_iter().map(&f).collect()))
}

fn num(x: f64) -> Value {
    Value::Num(x)
}

fn failed_row(prefix: Vec<Value>, width: usize, e: &crate::Error) -> Vec<Value> {
    let mut row = prefix;
    row.resize(width - 1, Value::Missing);
    row.push(Value::Text(status_of(e)));
    row
}

fn finish(columns: Vec<&'static str>, nested: Vec<Vec<Vec<Value>>>) -> Table {
    let rows: Vec<Vec<Value>> = nested.into_iter().flatten().collect();
    let failed = rows
        .iter()
        .filter(|row| !matches!(row.last(), Some(Value::Text(s)) if s == "ok"))
        .count();
    Table { columns, rows, failed }
}

pub const RATES_COLUMNS: [&str; 13] = [
    "omega",
    "z",
    "delta",
    "T_M",
    "T_W",
    "alpha_W",
    "alpha_M",
    "n_eff",
    "T_eff",
    "gamma_down_over_gamma0",
    "gamma_up_over_gamma0",
    "quad_err",
    "status",
];

/// One row per (ω, z, δ, temperature pair); B, C, D are computed once per (ω, z, δ).
pub fn cmd_rates(r: &Resolved, jobs: usize) -> std::result::Result<Table, SweepError> {
    let width = RATES_COLUMNS.len();
    let nested = map_points(r, jobs, |p| {
        let f = factors(r, p.omega[0], p);
        r.temperatures
            .iter()
            .map(|t| {
                let prefix = vec![num(p.omega[0]), num(p.z), num(p.delta), num(t.t_m), num(t.t_w)];
                let rates = f
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|f| rates_from_factors(f, &r.dipole, &ThermalEnv::new(t.t_m, t.t_w)?));
                match rates {
                    Ok(s) => {
                        let mut row = prefix;
                        row.extend([
                            num(s.alpha_w),
                            num(s.alpha_m),
                            num(s.n_eff),
                            num(s.t_eff),
                            num(s.gamma_down / s.gamma0),
                            num(s.gamma_up / s.gamma0),
                            num(s.alpha_err[0].max(s.alpha_err[1])),
                            Value::Text("ok".into()),
                        ]);
                        row
                    }
                    Err(e) => failed_row(prefix, width, &e),
                }
            })
            .collect()
    })?;
    Ok(finish(RATES_COLUMNS.to_vec(), nested))
}

pub const STEADY_TWO_LEVEL_COLUMNS: [&str; 14] = [
    "omega",
    "z",
    "delta",
    "T_M",
    "T_W",
    "n_eff",
    "T_eff",
    "rho11",
    "rho22",
    "purity",
    "rho22_over_rho11",
    "closest_T",
    "thermal_distance",
    "status",
];

pub const STEADY_LAMBDA_COLUMNS: [&str; 18] = [
    "omega31",
    "omega32",
    "z",
    "delta",
    "T_M",
    "T_W",
    "n_eff31",
    "n_eff32",
    "T_eff31",
    "T_eff32",
    "rho11",
    "rho22",
    "rho33",
    "purity",
    "rho22_over_rho11",
    "closest_T",
    "thermal_distance",
    "status",
];

fn lambda_scheme(r: &Resolved, p: &Point) -> LevelScheme {
    LevelScheme::Lambda { omega31: p.omega[0], omega32: p.omega[1], d31: r.dipole, d32: r.dipole }
}

/// Rates for every temperature pair at one grid point: one set (two-level) or (Γ³¹, Γ³²).
fn point_rates(r: &Resolved, p: &Point) -> Vec<Result<[RateSet; 2]>> {
    let lambda = matches!(r.freq, FreqGrid::Lambda { .. });
    let scheme_ok = if lambda { lambda_scheme(r, p).validate() } else { Ok(()) };
    let f0 = scheme_ok.and_then(|_| factors(r, p.omega[0], p));
    let f1 = if lambda { Some(f0.as_ref().map_err(Clone::clone).and_then(|_| factors(r, p.omega[1], p))) } else { None };
    r.temperatures
        .iter()
        .map(|t| {
            let env = ThermalEnv::new(t.t_m, t.t_w)?;
            let a = rates_from_factors(f0.as_ref().map_err(Clone::clone)?, &r.dipole, &env)?;
            let b = match &f1 {
                Some(f1) => rates_from_factors(f1.as_ref().map_err(Clone::clone)?, &r.dipole, &env)?,
                None => a,
            };
            Ok([a, b])
        })
        .collect()
}

fn prefix_of(p: &Point, lambda: bool, t_m: f64, t_w: f64) -> Vec<Value> {
    let mut v = vec![num(p.omega[0])];
    if lambda {
        v.push(num(p.omega[1]));
    }
    v.extend([num(p.z), num(p.delta), num(t_m), num(t_w)]);
    v
}

pub fn cmd_steady(r: &Resolved, jobs: usize) -> std::result::Result<Table, SweepError> {
    let lambda = r.scheme == SchemeKind::Lambda;
    let columns = if lambda { STEADY_LAMBDA_COLUMNS.to_vec() } else { STEADY_TWO_LEVEL_COLUMNS.to_vec() };
    let width = columns.len();
    let nested = map_points(r, jobs, |p| {
        point_rates(r, p)
            .into_iter()
            .zip(&r.temperatures)
            .map(|(rates, t)| {
                let prefix = prefix_of(p, lambda, t.t_m, t.t_w);
                let body = rates.and_then(|[a, b]| -> Result<Vec<Value>> {
                    if lambda {
                        let rho = three_level_steady(&a, &b)?;
                        let (tc, dist) = closest_thermal(&rho, &lambda_scheme(r, p))?;
                        let pop = rho.populations();
                        Ok(vec![
                            num(a.n_eff),
                            num(b.n_eff),
                            num(a.t_eff),
                            num(b.t_eff),
                            num(pop[0]),
                            num(pop[1]),
                            num(pop[2]),
                            num(purity(&rho)),
                            num(pop[1] / pop[0]),
                            num(tc),
                            num(dist),
                        ])
                    } else {
                        let rho = two_level_steady(&a)?;
                        let scheme = LevelScheme::TwoLevel { omega0: p.omega[0], dipole: r.dipole };
                        let (tc, dist) = closest_thermal(&rho, &scheme)?;
                        let pop = rho.populations();
                        Ok(vec![
                            num(a.n_eff),
                            num(a.t_eff),
                            num(pop[0]),
                            num(pop[1]),
                            num(purity(&rho)),
                            num(pop[1] / pop[0]),
                            num(tc),
                            num(dist),
                        ])
                    }
                });
                match body {
                    Ok(b) => {
                        let mut row = prefix;
                        row.extend(b);
                        row.push(Value::Text("ok".into()));
                        row
                    }
                    Err(e) => failed_row(prefix, width, &e),
                }
            })
            .collect()
    })?;
    Ok(finish(columns, nested))
}

pub const DYNAMICS_TWO_LEVEL_COLUMNS: [&str; 12] = [
    "omega", "z", "delta", "T_M", "T_W", "t", "rho11", "rho22", "re_rho12", "im_rho12", "steady_dev", "status",
];

pub const DYNAMICS_LAMBDA_COLUMNS: [&str; 18] = [
    "omega31", "omega32", "z", "delta", "T_M", "T_W", "t", "rho11", "rho22", "rho33", "re_rho12", "im_rho12",
    "re_rho13", "im_rho13", "re_rho23", "im_rho23", "steady_dev", "status",
];

/// Relaxation is considered complete after this many slowest-rate lifetimes.
pub const STEADY_CHECK_LIFETIMES: f64 = 50.0;

/// Time series of every independent matrix entry at the requested times. The
/// last row carries max |ρ(t_max) − ρ(∞)| when t_max is past the relaxation.
pub fn cmd_dynamics(r: &Resolved, jobs: usize) -> std::result::Result<Table, SweepError> {
    let dynamics = r
        .dynamics
        .as_ref()
        .ok_or_else(|| SweepError::Config("missing [dynamics] table".into()))?;
    let lambda = r.scheme == SchemeKind::Lambda;
    let columns = if lambda { DYNAMICS_LAMBDA_COLUMNS.to_vec() } else { DYNAMICS_TWO_LEVEL_COLUMNS.to_vec() };
    let width = columns.len();
    let t_last = *dynamics.times.last().expect("times validated non-empty");
    let nested = map_points(r, jobs, |p| {
        let mut rows = Vec::new();
        for (rates, t) in point_rates(r, p).into_iter().zip(&r.temperatures) {
            let series = rates.and_then(|[a, b]| -> Result<Vec<(DensityMatrix, Option<f64>)>> {
                let sh = &dynamics.lamb_shifts;
                let evolve = |tt: f64| {
                    if lambda {
                        let deltas = (p.omega[0] - p.omega[1] + sh[0], p.omega[0] + sh[1], p.omega[1] + sh[2]);
                        three_level_evolve(&dynamics.rho0, tt, &a, &b, deltas)
                    } else {
                        two_level_evolve(&dynamics.rho0, tt, &a, p.omega[0] + sh[0])
                    }
                };
                let (slow, steady) = if lambda {
                    (lambda_relaxation_rates(&a, &b)[1], three_level_steady(&a, &b))
                } else {
                    (a.gamma_down + a.gamma_up, two_level_steady(&a))
                };
                let check = slow > 0.0 && t_last >= STEADY_CHECK_LIFETIMES / slow;
                let mut out = Vec::with_capacity(dynamics.times.len());
                for (i, &tt) in dynamics.times.iter().enumerate() {
                    let rho = evolve(tt)?;
                    let dev = if check && i + 1 == dynamics.times.len() {
                        Some(rho.max_abs_diff(steady.as_ref().map_err(Clone::clone)?))
                    } else {
                        None
                    };
                    out.push((rho, dev));
                }
                Ok(out)
            });
            match series {
                Ok(series) => {
                    for ((rho, dev), &tt) in series.into_iter().zip(&dynamics.times) {
                        let mut row = prefix_of(p, lambda, t.t_m, t.t_w);
                        row.push(num(tt));
                        let n = rho.dim();
                        row.extend((0..n).map(|i| num(rho.get(i, i).re)));
                        for i in 0..n {
                            for j in i + 1..n {
                                row.push(num(rho.get(i, j).re));
                                row.push(num(rho.get(i, j).im));
                            }
                        }
                        row.push(dev.map_or(Value::Missing, num));
                        row.push(Value::Text("ok".into()));
                        rows.push(row);
                    }
                }
                Err(e) => rows.push(failed_row(prefix_of(p, lambda, t.t_m, t.t_w), width, &e)),
            }
        }
        rows
    })?;
    Ok(finish(columns, nested))
}

pub fn run(r: &Resolved, jobs: usize) -> std::result::Result<Table, SweepError> {
    match r.command {
        Command::Rates => cmd_rates(r, jobs),
        Command::Steady => cmd_steady(r, jobs),
        Command::Dynamics => cmd_dynamics(r, jobs),
    }
}
