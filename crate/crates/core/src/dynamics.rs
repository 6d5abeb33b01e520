//! Time evolution and steady states of two-level, Λ-type and non-degenerate N-level emitters.
//!
//! Levels are indexed from the lowest: for a two-level atom index 0 is the ground
//! state |1⟩ and index 1 the excited state |2⟩. In the Λ scheme, indices 0, 1, 2 are
//! |1⟩, |2⟩, |3⟩, with the 1↔2 transition forbidden.

use nalgebra::{DMatrix, Matrix2, Matrix3, Vector2, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};
use crate::rates::{DipoleSpec, RateSet};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const POP_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const DIAGONAL_TOL: f64 = 1e-12;
/// Eigenvector-matrix condition number above which the exponential is used instead.
const EIGEN_CONDITION_MAX: f64 = 1e8;

/// A validated atomic density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self { m };
        rho.validate()?;
        Ok(rho)
    }

    /// Row-major entries of a `dim` × `dim` matrix.
    pub fn from_row_slice(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if dim < 2 || entries.len() != dim * dim {
            return Err(Error::InvalidState(format!(
                "need {} entries for dimension {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_populations(p: &[f64]) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::InvalidState("dimension must be at least 2".into()));
        }
        let mut m = DMatrix::zeros(p.len(), p.len());
        for (i, &x) in p.iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        Self::new(m)
    }

    /// |ψ⟩⟨ψ| for a normalized state vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("state vector norm² = {norm}, expected 1")));
        }
        let n = psi.len();
        Self::from_row_slice(
            n,
            &(0..n * n).map(|k| psi[k / n] * psi[k % n].conj()).collect::<Vec<_>>(),
        )
    }

    /// The basis state |i⟩⟨i|.
    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::InvalidState(format!("level {i} out of range for dimension {dim}")));
        }
        let mut p = vec![0.0; dim];
        p[i] = 1.0;
        Self::from_populations(&p)
    }

    pub fn ground(dim: usize) -> Result<Self> {
        Self::basis(dim, 0)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.m[(i, j)].norm() <= tol))
    }

    /// Largest |ρ − ρ'| entry.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.m - &other.m).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<()> {
        let m = &self.m;
        let n = m.nrows();
        if n < 2 || m.ncols() != n {
            return Err(Error::InvalidState(format!("shape {}x{} is not square of dimension >= 2", n, m.ncols())));
        }
        if m.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        for i in 0..n {
            for j in i..n {
                let d = (m[(i, j)] - m[(j, i)].conj()).norm();
                if d > HERMITIAN_TOL {
                    return Err(Error::InvalidState(format!("not Hermitian at ({i},{j}): deviation {d:e}")));
                }
            }
        }
        let tr = m.trace();
        if (tr - 1.0).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        for i in 0..n {
            let p = m[(i, i)].re;
            if !(-POP_TOL..=1.0 + POP_TOL).contains(&p) {
                return Err(Error::InvalidState(format!("population rho_{i}{i} = {p} outside [0, 1]")));
            }
        }
        let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eig = h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidState(format!("smallest eigenvalue {min_eig:e} is negative")));
        }
        Ok(())
    }
}

/// An allowed transition between `lower` and `upper` (0-based level indices).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub lower: usize,
    pub upper: usize,
    pub dipole: DipoleSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LevelScheme {
    TwoLevel {
        omega0: f64,
        dipole: DipoleSpec,
    },
    /// |1⟩, |2⟩ lower levels, |3⟩ upper; ω₃₁ > ω₃₂ > 0 and 1↔2 forbidden.
    Lambda {
        omega31: f64,
        omega32: f64,
        d31: DipoleSpec,
        d32: DipoleSpec,
    },
    /// Level frequencies in increasing order, with the allowed transitions.
    NLevel {
        levels: Vec<f64>,
        transitions: Vec<Transition>,
    },
}

impl LevelScheme {
    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::DegenerateScheme(s));
        match self {
            LevelScheme::TwoLevel { omega0, .. } => {
                if !(*omega0 > 0.0 && omega0.is_finite()) {
                    return bad(format!("omega0 must be > 0, got {omega0}"));
                }
            }
            LevelScheme::Lambda { omega31, omega32, .. } => {
                if !(*omega32 > 0.0 && omega31 > omega32 && omega31.is_finite()) {
                    return bad(format!("need omega31 > omega32 > 0, got {omega31}, {omega32}"));
                }
            }
            LevelScheme::NLevel { levels, transitions } => {
                if levels.len() < 2 {
                    return bad("at least two levels are required".into());
                }
                if levels.iter().any(|w| !w.is_finite()) || levels.windows(2).any(|w| w[1] <= w[0]) {
                    return bad(format!("level frequencies must be strictly increasing: {levels:?}"));
                }
                if transitions.is_empty() {
                    return bad("no allowed transitions".into());
                }
                for t in transitions {
                    if t.lower >= t.upper || t.upper >= levels.len() {
                        return bad(format!("transition {}->{} must have lower < upper < {}", t.upper, t.lower, levels.len()));
                    }
                }
            }
        }
        let mut w: Vec<f64> = self.transitions().iter().map(|t| t.2).collect();
        w.sort_by(|a, b| a.total_cmp(b));
        if w.windows(2).any(|p| (p[1] - p[0]) <= 1e-12 * p[1]) {
            return bad(format!("transition frequencies are not pairwise distinct: {w:?}"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            LevelScheme::TwoLevel { .. } => 2,
            LevelScheme::Lambda { .. } => 3,
            LevelScheme::NLevel { levels, .. } => levels.len(),
        }
    }

    /// Level frequencies measured from the lowest level.
    pub fn energies(&self) -> Vec<f64> {
        match self {
            LevelScheme::TwoLevel { omega0, .. } => vec![0.0, *omega0],
            LevelScheme::Lambda { omega31, omega32, .. } => vec![0.0, omega31 - omega32, *omega31],
            LevelScheme::NLevel { levels, .. } => levels.iter().map(|w| w - levels[0]).collect(),
        }
    }

    /// Allowed transitions as (lower, upper, ω_upper,lower, dipole).
    pub fn transitions(&self) -> Vec<(usize, usize, f64, DipoleSpec)> {
        match self {
            LevelScheme::TwoLevel { omega0, dipole } => vec![(0, 1, *omega0, *dipole)],
            LevelScheme::Lambda { omega31, omega32, d31, d32 } => {
                vec![(0, 2, *omega31, *d31), (1, 2, *omega32, *d32)]
            }
            LevelScheme::NLevel { levels, transitions } => transitions
                .iter()
                .map(|t| (t.lower, t.upper, levels[t.upper] - levels[t.lower], t.dipole))
                .collect(),
        }
    }
}

fn check_dim(rho: &DensityMatrix, dim: usize) -> Result<()> {
    if rho.dim() != dim {
        return Err(Error::InvalidState(format!("expected a {dim}x{dim} state, got {0}x{0}", rho.dim())));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

fn check_rates(r: &RateSet) -> Result<()> {
    if !(r.gamma_down >= 0.0 && r.gamma_up >= 0.0 && r.gamma_down.is_finite() && r.gamma_up.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "rates must be finite and >= 0, got Gamma(w) = {}, Gamma(-w) = {}",
            r.gamma_down, r.gamma_up
        )));
    }
    Ok(())
}

/// e^{(iΔ − γ/2) t}
fn coherence_factor(delta: f64, gamma: f64, t: f64) -> Complex64 {
    Complex64::from_polar((-0.5 * gamma * t).exp(), delta * t)
}

/// Two-level solution: populations relax at γ = Γ(ω₀) + Γ(−ω₀), ρ₁₂ picks up e^{iΔt}e^{−γt/2}.
pub fn two_level_evolve(rho0: &DensityMatrix, t: f64, rates: &RateSet, delta_omega: f64) -> Result<DensityMatrix> {
    check_dim(rho0, 2)?;
    check_time(t)?;
    check_rates(rates)?;
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let gamma = rates.gamma_down + rates.gamma_up;
    let p2 = rho0.get(1, 1).re;
    let p2t = if gamma > 0.0 {
        let p_inf = rates.gamma_up / gamma;
        p_inf + (p2 - p_inf) * (-gamma * t).exp()
    } else {
        p2
    };
    let c12 = rho0.get(0, 1) * coherence_factor(delta_omega, gamma, t);
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(1.0 - p2t, 0.0), c12, c12.conj(), Complex64::new(p2t, 0.0)],
    );
    Ok(DensityMatrix { m })
}

/// diag(1 + n_eff, n_eff)/(1 + 2 n_eff).
pub fn two_level_steady(rates: &RateSet) -> Result<DensityMatrix> {
    check_rates(rates)?;
    if rates.gamma_down <= 0.0 {
        return Err(Error::ZeroTotalRate);
    }
    let n = rates.n_eff;
    if !(n >= 0.0 && n.is_finite()) {
        return Err(Error::InvalidArgument(format!("n_eff must be finite and >= 0, got {n}")));
    }
    let z = 1.0 + 2.0 * n;
    DensityMatrix::from_populations(&[(1.0 + n) / z, n / z])
}

/// Population sector of the Λ system in terms of (ρ₁₁, ρ₂₂): x' = A x + b.
fn lambda_population_system(r31: &RateSet, r32: &RateSet) -> (Matrix2<f64>, Vector2<f64>) {
    let (d31, u31, d32, u32) = (r31.gamma_down, r31.gamma_up, r32.gamma_down, r32.gamma_up);
    (
        Matrix2::new(-(u31 + d31), -d31, -d32, -(u32 + d32)),
        Vector2::new(d31, d32),
    )
}

/// Relaxation rates of the Λ populations (magnitudes of the two eigenvalues of the
/// population generator), largest first.
pub fn lambda_relaxation_rates(rates31: &RateSet, rates32: &RateSet) -> [f64; 2] {
    let (a, _) = lambda_population_system(rates31, rates32);
    let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let disc = (0.25 * (p - s) * (p - s) + q * r).max(0.0).sqrt();
    let half = -0.5 * (p + s);
    [half + disc, half - disc]
}

/// x(t) for x' = A x + b through the eigendecomposition of A, or `None` when A is
/// singular or its eigenvectors are too close to parallel.
fn propagate_eigen(a: &Matrix2<f64>, b: &Vector2<f64>, x0: &Vector2<f64>, t: f64) -> Option<Vector2<f64>> {
    let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let half_tr = 0.5 * (p + s);
    // Discriminant ((p − s)/2)² + q r; q r = Γ(ω₃₁)Γ(ω₃₂) ≥ 0, so the roots are real.
    let disc = (0.25 * (p - s) * (p - s) + q * r).max(0.0).sqrt();
    let lam = [half_tr + disc, half_tr - disc];
    let mut cols = [Vector2::zeros(); 2];
    for (k, &l) in lam.iter().enumerate() {
        let v1 = Vector2::new(q, l - p);
        let v2 = Vector2::new(l - s, r);
        let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
        let nv = v.norm();
        if nv == 0.0 {
            // A is a multiple of the identity; any basis diagonalizes it.
            cols[k] = if k == 0 { Vector2::x() } else { Vector2::y() };
        } else {
            cols[k] = v / nv;
        }
    }
    let v = Matrix2::from_columns(&cols);
    let vinv = v.try_inverse()?;
    if v.norm() * vinv.norm() > EIGEN_CONDITION_MAX {
        return None;
    }
    let ainv = a.try_inverse()?;
    let x_inf = -(ainv * b);
    let c = vinv * (x0 - x_inf);
    Some(x_inf + v * Vector2::new(c[0] * (lam[0] * t).exp(), c[1] * (lam[1] * t).exp()))
}

/// Same as [`propagate_eigen`] through the exponential of the augmented generator.
fn propagate_expm(a: &Matrix2<f64>, b: &Vector2<f64>, x0: &Vector2<f64>, t: f64) -> Vector2<f64> {
    let mut g = Matrix3::zeros();
    g.fixed_view_mut::<2, 2>(0, 0).copy_from(&(a * t));
    g.fixed_view_mut::<2, 1>(0, 2).copy_from(&(b * t));
    let y = g.exp() * Vector3::new(x0[0], x0[1], 1.0);
    Vector2::new(y[0], y[1])
}

/// Λ-system solution. `deltas` are the (possibly Lamb-shifted) splittings (Δ₂₁, Δ₃₁, Δ₃₂).
pub fn three_level_evolve(
    rho0: &DensityMatrix,
    t: f64,
    rates31: &RateSet,
    rates32: &RateSet,
    deltas: (f64, f64, f64),
) -> Result<DensityMatrix> {
    check_dim(rho0, 3)?;
    check_time(t)?;
    check_rates(rates31)?;
    check_rates(rates32)?;
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let (a, b) = lambda_population_system(rates31, rates32);
    let x0 = Vector2::new(rho0.get(0, 0).re, rho0.get(1, 1).re);
    let x = match propagate_eigen(&a, &b, &x0, t) {
        Some(x) => x,
        None => propagate_expm(&a, &b, &x0, t),
    };
    if !(x[0].is_finite() && x[1].is_finite()) {
        return Err(Error::DegenerateRateMatrix);
    }
    let (d31, u31, d32, u32) = (rates31.gamma_down, rates31.gamma_up, rates32.gamma_down, rates32.gamma_up);
    let (delta21, delta31, delta32) = deltas;
    let c12 = rho0.get(0, 1) * coherence_factor(delta21, u31 + u32, t);
    let c13 = rho0.get(0, 2) * coherence_factor(delta31, d31 + u31 + d32, t);
    let c23 = rho0.get(1, 2) * coherence_factor(delta32, d32 + u32 + d31, t);
    let re = |x: f64| Complex64::new(x, 0.0);
    let m = DMatrix::from_row_slice(
        3,
        3,
        &[
            re(x[0]), c12, c13,
            c12.conj(), re(x[1]), c23,
            c13.conj(), c23.conj(), re(1.0 - x[0] - x[1]),
        ],
    );
    Ok(DensityMatrix { m })
}

/// Λ-system steady state from the products of the rates, checked against the n_eff form.
pub fn three_level_steady(rates31: &RateSet, rates32: &RateSet) -> Result<DensityMatrix> {
    check_rates(rates31)?;
    check_rates(rates32)?;
    if rates31.gamma_down <= 0.0 || rates32.gamma_down <= 0.0 {
        return Err(Error::ZeroTotalRate);
    }
    let (d31, u31, d32, u32) = (rates31.gamma_down, rates31.gamma_up, rates32.gamma_down, rates32.gamma_up);
    let z = d31 * u32 + u31 * d32 + u31 * u32;
    if z == 0.0 {
        return Err(Error::BothChannelsDark);
    }
    let p = [d31 * u32 / z, u31 * d32 / z, u31 * u32 / z];

    let (n31, n32) = (rates31.n_eff, rates32.n_eff);
    let zn = 3.0 * n31 * n32 + n31 + n32;
    if zn > 0.0 {
        let q = [n32 * (1.0 + n31) / zn, n31 * (1.0 + n32) / zn, n31 * n32 / zn];
        let dev = p.iter().zip(&q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if dev > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "rate sets are inconsistent with their n_eff (steady states differ by {dev:e})"
            )));
        }
    }
    DensityMatrix::from_populations(&p)
}

/// Null vector of the classical rate matrix built from Γ(±ω_nm), one [`RateSet`] per
/// transition in the order of [`LevelScheme::transitions`].
pub fn nlevel_steady(scheme: &LevelScheme, rates: &[RateSet]) -> Result<DensityMatrix> {
    scheme.validate()?;
    let trans = scheme.transitions();
    if rates.len() != trans.len() {
        return Err(Error::InvalidArgument(format!(
            "{} rate sets supplied for {} transitions",
            rates.len(),
            trans.len()
        )));
    }
    let n = scheme.dim();
    // q[i][j]: rate of i → j.
    let mut q = vec![vec![0.0f64; n]; n];
    for (&(lo, up, omega, _), r) in trans.iter().zip(rates) {
        check_rates(r)?;
        if (r.omega - omega).abs() > 1e-9 * omega {
            return Err(Error::InvalidArgument(format!(
                "rate set for {up}->{lo} was computed at {:e} rad/s, transition is at {omega:e}",
                r.omega
            )));
        }
        q[lo][up] += r.gamma_up;
        q[up][lo] += r.gamma_down;
    }

    // reach[i][j]: j reachable from i.
    let mut reach: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j || q[i][j] > 0.0).collect()).collect();
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut linked: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| reach[i][j] || reach[j][i]).collect()).collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if linked[i][k] && linked[k][j] {
                    linked[i][j] = true;
                }
            }
        }
    }
    let cut: Vec<usize> = (1..n).filter(|&i| !linked[0][i]).collect();
    if !cut.is_empty() {
        return Err(Error::DisconnectedLevels(format!("levels {cut:?} are not connected to level 0")));
    }
    // A level is recurrent when everything it reaches can reach it back; one closed class
    // of recurrent levels means one steady state.
    let recurrent: Vec<usize> = (0..n).filter(|&i| (0..n).all(|j| !reach[i][j] || reach[j][i])).collect();
    let first = recurrent[0];
    if recurrent.iter().any(|&i| !reach[first][i]) {
        return Err(Error::NonUniqueSteadyState);
    }

    // Grassmann-Taksar-Heyman elimination: subtraction-free, so populations many orders of
    // magnitude below the ground state keep full relative accuracy.
    let order: Vec<usize> = {
        // Eliminate the levels outside the closed class first; put one recurrent level last.
        let mut o: Vec<usize> = (0..n).filter(|&i| i != first).collect();
        o.push(first);
        o.reverse();
        o
    };
    let mut a: Vec<Vec<f64>> = order.iter().map(|&i| order.iter().map(|&j| q[i][j]).collect()).collect();
    for k in (1..n).rev() {
        let s: f64 = (0..k).map(|j| a[k][j]).sum();
        if s <= 0.0 {
            return Err(Error::NonUniqueSteadyState);
        }
        for i in 0..k {
            a[i][k] /= s;
        }
        for i in 0..k {
            let aik = a[i][k];
            if aik != 0.0 {
                for j in 0..k {
                    a[i][j] += aik * a[k][j];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    x[0] = 1.0;
    for k in 1..n {
        x[k] = (0..k).map(|i| x[i] * a[i][k]).sum();
    }
    let total: f64 = x.iter().sum();
    let mut p = vec![0.0; n];
    for (k, &lvl) in order.iter().enumerate() {
        p[lvl] = x[k] / total;
    }
    DensityMatrix::from_populations(&p)
}

/// Tr ρ².
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.m.iter().map(|c| c.norm_sqr()).sum()
}

/// Gibbs populations of `scheme` at temperature `t` (kelvin).
pub fn thermal_populations(scheme: &LevelScheme, t: f64) -> Vec<f64> {
    let e = scheme.energies();
    if t <= 0.0 {
        let mut p = vec![0.0; e.len()];
        p[0] = 1.0;
        return p;
    }
    let w: Vec<f64> = e.iter().map(|&x| (-HBAR * x / (K_B * t)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter().map(|x| x / z).collect()
}

/// Temperature range searched by [`closest_thermal`], kelvin.
pub const CLOSEST_THERMAL_RANGE: (f64, f64) = (0.1, 1e4);

/// Trace-norm distance to the Gibbs state at `t`; for diagonal states this is the
/// L1 distance between populations.
pub fn thermal_distance(rho: &DensityMatrix, scheme: &LevelScheme, t: f64) -> f64 {
    thermal_populations(scheme, t)
        .iter()
        .zip(rho.populations())
        .map(|(a, b)| (a - b).abs())
        .sum()
}

/// Temperature of the closest Gibbs state and the distance to it.
pub fn closest_thermal(rho: &DensityMatrix, scheme: &LevelScheme) -> Result<(f64, f64)> {
    scheme.validate()?;
    check_dim(rho, scheme.dim())?;
    if !rho.is_diagonal(DIAGONAL_TOL) {
        return Err(Error::NonDiagonalInput);
    }
    let f = |t: f64| thermal_distance(rho, scheme, t);
    let (lo, hi) = CLOSEST_THERMAL_RANGE;
    const SCAN: usize = 400;
    let grid: Vec<f64> = (0..SCAN)
        .map(|i| lo * (hi / lo).powf(i as f64 / (SCAN - 1) as f64))
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let ibest = (0..SCAN).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
    let mut a = grid[ibest.saturating_sub(1)];
    let mut b = grid[(ibest + 1).min(SCAN - 1)];

    // Golden section. The bracket is shrunk well past 0.05 K so that the returned
    // distance is accurate too: near a thermal state the distance is V-shaped in T.
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 * b {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let mut best = (0.5 * (a + b), f(0.5 * (a + b)));
    if vals[ibest] < best.1 {
        best = (grid[ibest], vals[ibest]);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::mean_photon_n;
    use proptest::prelude::*;

    const W0: f64 = 0.5463e14;
    const W31: f64 = 0.5463e14;
    const W32: f64 = 1.02 * 0.506e14;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rs(omega: f64, g: f64, n: f64) -> RateSet {
        RateSet::from_n_eff(omega, g, n).unwrap()
    }

    fn lambda_scheme() -> LevelScheme {
        LevelScheme::Lambda {
            omega31: W31,
            omega32: W32,
            d31: DipoleSpec::isotropic(1e-29),
            d32: DipoleSpec::isotropic(1e-29),
        }
    }

    /// Random valid state: a mixture of a random pure state and a random diagonal.
    fn random_state(dim: usize, seed: &[f64]) -> DensityMatrix {
        let psi: Vec<Complex64> = (0..dim).map(|i| c(seed[2 * i] - 0.5, seed[2 * i + 1] - 0.5)).collect();
        let norm = psi.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt().max(1e-3);
        let psi: Vec<Complex64> = psi.iter().map(|x| x / norm).collect();
        let wsum: f64 = seed[2 * dim..3 * dim].iter().sum::<f64>() + 1e-3;
        let mix = seed[3 * dim];
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = psi[i] * psi[j].conj() * mix;
            }
            m[(i, i)] += c((1.0 - mix) * (seed[2 * dim + i] + 1e-3 / dim as f64) / wsum, 0.0);
        }
        DensityMatrix::new(m).unwrap()
    }

    #[test]
    fn validation_rejects_bad_states() {
        let e = |v: &[f64]| DensityMatrix::from_row_slice(2, &v.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>());
        assert!(e(&[0.5, 0.0, 0.0, 0.5]).is_ok());
        assert!(matches!(e(&[0.6, 0.0, 0.0, 0.5]), Err(Error::InvalidState(_))));
        assert!(matches!(e(&[1.1, 0.0, 0.0, -0.1]), Err(Error::InvalidState(_))));
        assert!(matches!(e(&[0.5, 0.1, 0.0, 0.5]), Err(Error::InvalidState(_))));
        // Hermitian, unit trace, but |ρ₁₂|² > ρ₁₁ρ₂₂.
        assert!(matches!(e(&[0.5, 0.6, 0.6, 0.5]), Err(Error::InvalidState(_))));
        assert!(DensityMatrix::from_populations(&[1.0]).is_err());
    }

    #[test]
    fn scheme_validation() {
        let d = DipoleSpec::isotropic(1e-29);
        assert!(lambda_scheme().validate().is_ok());
        let bad = LevelScheme::Lambda { omega31: 1.0, omega32: 1.0, d31: d, d32: d };
        assert!(matches!(bad.validate(), Err(Error::DegenerateScheme(_))));
        let eq = LevelScheme::NLevel {
            levels: vec![0.0, 1.0, 2.0],
            transitions: vec![
                Transition { lower: 0, upper: 1, dipole: d },
                Transition { lower: 1, upper: 2, dipole: d },
            ],
        };
        assert!(matches!(eq.validate(), Err(Error::DegenerateScheme(_))));
        let unsorted = LevelScheme::NLevel {
            levels: vec![0.0, 2.0, 1.0],
            transitions: vec![Transition { lower: 0, upper: 1, dipole: d }],
        };
        assert!(matches!(unsorted.validate(), Err(Error::DegenerateScheme(_))));
    }

    #[test]
    fn identity_at_zero_time() {
        let rho = random_state(2, &[0.1, 0.7, 0.3, 0.9, 0.2, 0.5, 0.4]);
        assert_eq!(two_level_evolve(&rho, 0.0, &rs(W0, 1e9, 0.3), 1e13).unwrap(), rho);
        let rho3 = random_state(3, &[0.1, 0.7, 0.3, 0.9, 0.2, 0.5, 0.4, 0.8, 0.6, 0.3]);
        let r = three_level_evolve(&rho3, 0.0, &rs(W31, 1e9, 0.3), &rs(W32, 2e9, 0.1), (1.0, 2.0, 3.0)).unwrap();
        assert_eq!(r, rho3);
    }

    #[test]
    fn two_level_pure_decay_reaches_ground() {
        let r = rs(W0, 1e9, 0.0);
        let rho = two_level_evolve(&DensityMatrix::basis(2, 1).unwrap(), 50.0 / 1e9, &r, 0.0).unwrap();
        assert!((rho.get(0, 0).re - 1.0).abs() < 1e-10);
        assert!(rho.get(1, 1).re.abs() < 1e-10);
    }

    #[test]
    fn two_level_coherence_after_two_lifetimes() {
        let r = rs(W0, 1e9, 0.4);
        let gamma = r.gamma_down + r.gamma_up;
        let plus = [c(0.5f64.sqrt(), 0.0), c(0.5f64.sqrt(), 0.0)];
        let rho = two_level_evolve(&DensityMatrix::pure(&plus).unwrap(), 2.0 / gamma, &r, 3e13).unwrap();
        assert!((rho.get(0, 1).norm() - 0.5 * (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn two_level_steady_forms() {
        let n = mean_photon_n(W0, 300.0);
        let rho = two_level_steady(&rs(W0, 1e9, n)).unwrap();
        assert!((rho.get(1, 1).re - n / (1.0 + 2.0 * n)).abs() < 1e-15);
        let rho = two_level_steady(&rs(W0, 1e9, 0.0)).unwrap();
        assert_eq!(rho.populations(), vec![1.0, 0.0]);
        assert_eq!(two_level_steady(&rs(W0, 0.0, 0.0)), Err(Error::ZeroTotalRate));
    }

    #[test]
    fn three_level_steady_equilibrium_is_gibbs() {
        for t in [20.0, 300.0, 5000.0] {
            let rho = three_level_steady(&rs(W31, 1.3e9, mean_photon_n(W31, t)), &rs(W32, 0.7e9, mean_photon_n(W32, t))).unwrap();
            let g = thermal_populations(&lambda_scheme(), t);
            for i in 0..3 {
                assert!((rho.get(i, i).re - g[i]).abs() < 1e-12, "T = {t}");
            }
        }
    }

    #[test]
    fn three_level_steady_errors() {
        assert_eq!(three_level_steady(&rs(W31, 1e9, 0.0), &rs(W32, 1e9, 0.0)), Err(Error::BothChannelsDark));
        assert_eq!(three_level_steady(&rs(W31, 0.0, 0.0), &rs(W32, 1e9, 0.1)), Err(Error::ZeroTotalRate));
        // One dark channel is fine: all population ends in the other lower level.
        let rho = three_level_steady(&rs(W31, 1e9, 0.0), &rs(W32, 1e9, 0.2)).unwrap();
        assert_eq!(rho.populations(), vec![1.0, 0.0, 0.0]);
    }

    /// Classical RK4 on the printed population and coherence equations.
    fn rk4_lambda(rho0: &DensityMatrix, t: f64, r31: &RateSet, r32: &RateSet, deltas: (f64, f64, f64), steps: usize) -> [Complex64; 6] {
        let (d31, u31, d32, u32) = (r31.gamma_down, r31.gamma_up, r32.gamma_down, r32.gamma_up);
        let (l21, l31, l32) = deltas;
        let i = Complex64::i();
        let rhs = |y: &[Complex64; 6]| -> [Complex64; 6] {
            [
                -u31 * y[0] + d31 * y[2],
                -u32 * y[1] + d32 * y[2],
                u31 * y[0] - d31 * y[2] + u32 * y[1] - d32 * y[2],
                (i * l21 - 0.5 * (u31 + u32)) * y[3],
                (i * l31 - 0.5 * (d31 + u31 + d32)) * y[4],
                (i * l32 - 0.5 * (d32 + u32 + d31)) * y[5],
            ]
        };
        let mut y = [rho0.get(0, 0), rho0.get(1, 1), rho0.get(2, 2), rho0.get(0, 1), rho0.get(0, 2), rho0.get(1, 2)];
        let h = t / steps as f64;
        let add = |y: &[Complex64; 6], k: &[Complex64; 6], s: f64| -> [Complex64; 6] {
            std::array::from_fn(|j| y[j] + k[j] * s)
        };
        for _ in 0..steps {
            let k1 = rhs(&y);
            let k2 = rhs(&add(&y, &k1, h / 2.0));
            let k3 = rhs(&add(&y, &k2, h / 2.0));
            let k4 = rhs(&add(&y, &k3, h));
            y = std::array::from_fn(|j| y[j] + (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0));
        }
        y
    }

    #[test]
    fn three_level_matches_rk4() {
        let r31 = rs(W31, 2.0e9, 0.8);
        let r32 = rs(W32, 1.1e9, 3.0);
        let deltas = (3e9, 5e9, 2e9);
        let rho0 = random_state(3, &[0.3, 0.1, 0.8, 0.6, 0.2, 0.9, 0.5, 0.1, 0.7, 0.6]);
        for k in 1..=10 {
            let t = k as f64 * 2e-10;
            let exact = three_level_evolve(&rho0, t, &r31, &r32, deltas).unwrap();
            let y = rk4_lambda(&rho0, t, &r31, &r32, deltas, 4000);
            let want = [exact.get(0, 0), exact.get(1, 1), exact.get(2, 2), exact.get(0, 1), exact.get(0, 2), exact.get(1, 2)];
            for j in 0..6 {
                assert!((y[j] - want[j]).norm() < 1e-8, "t = {t}, entry {j}: {} vs {}", y[j], want[j]);
            }
        }
    }

    #[test]
    fn defective_rate_matrix_uses_exponential() {
        // Γ(ω₃₂) = 0 and equal diagonals make the population generator a Jordan block.
        let r31 = RateSet { gamma_down: 1e9, gamma_up: 1e9, ..rs(W31, 1.0, 0.0) };
        let r32 = RateSet { gamma_down: 0.0, gamma_up: 2e9, ..rs(W32, 1.0, 0.0) };
        let (a, b) = lambda_population_system(&r31, &r32);
        let x0 = Vector2::new(0.2, 0.5);
        assert!(propagate_eigen(&a, &b, &x0, 1e-9).is_none());
        let rho0 = DensityMatrix::from_populations(&[0.2, 0.5, 0.3]).unwrap();
        for t in [1e-10, 1e-9, 5e-9] {
            let exact = three_level_evolve(&rho0, t, &r31, &r32, (0.0, 0.0, 0.0)).unwrap();
            let y = rk4_lambda(&rho0, t, &r31, &r32, (0.0, 0.0, 0.0), 20000);
            for (j, &(p, q)) in [(0, 0), (1, 1), (2, 2)].iter().enumerate() {
                assert!((y[j] - exact.get(p, q)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn three_level_long_time_is_steady() {
        let r31 = rs(W31, 2.0e9, 0.05);
        let r32 = rs(W32, 1.1e9, 1.5);
        let rho0 = random_state(3, &[0.9, 0.1, 0.2, 0.6, 0.4, 0.3, 0.5, 0.5, 0.2, 0.7]);
        // Slowest relaxation rate is the smaller eigenvalue magnitude of the population block.
        let slow = lambda_relaxation_rates(&r31, &r32)[1];
        let (a, _) = lambda_population_system(&r31, &r32);
        let eig = a.eigenvalues().unwrap();
        assert!((slow - eig.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min)).abs() < 1e-6 * slow);
        let rho = three_level_evolve(&rho0, 50.0 / slow, &r31, &r32, (0.0, 0.0, 0.0)).unwrap();
        let st = three_level_steady(&r31, &r32).unwrap();
        assert!(rho.max_abs_diff(&st) < 1e-8);
    }

    #[test]
    fn nlevel_specializes_to_closed_forms() {
        let d = DipoleSpec::isotropic(1e-29);
        let r = rs(W0, 1e9, 0.37);
        let two = LevelScheme::TwoLevel { omega0: W0, dipole: d };
        let a = nlevel_steady(&two, &[r]).unwrap();
        assert!(a.max_abs_diff(&two_level_steady(&r).unwrap()) < 1e-10);

        let (r31, r32) = (rs(W31, 2e9, 0.2), rs(W32, 0.5e9, 4.0));
        let b = nlevel_steady(&lambda_scheme(), &[r31, r32]).unwrap();
        assert!(b.max_abs_diff(&three_level_steady(&r31, &r32).unwrap()) < 1e-10);
    }

    #[test]
    fn nlevel_errors() {
        let d = DipoleSpec::isotropic(1e-29);
        let four = LevelScheme::NLevel {
            levels: vec![0.0, 1.0e14, 2.3e14, 3.9e14],
            transitions: vec![
                Transition { lower: 0, upper: 1, dipole: d },
                Transition { lower: 2, upper: 3, dipole: d },
            ],
        };
        let rates = [rs(1.0e14, 1e9, 0.1), rs(1.6e14, 1e9, 0.1)];
        assert!(matches!(nlevel_steady(&four, &rates), Err(Error::DisconnectedLevels(_))));
        assert_eq!(
            nlevel_steady(&lambda_scheme(), &[rs(W31, 1e9, 0.0), rs(W32, 1e9, 0.0)]),
            Err(Error::NonUniqueSteadyState)
        );
        assert!(matches!(nlevel_steady(&lambda_scheme(), &[rs(W31, 1e9, 0.0)]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn four_level_ladder_is_gibbs() {
        let d = DipoleSpec::isotropic(1e-29);
        let levels = vec![0.0, 0.4e14, 0.95e14, 1.7e14];
        let scheme = LevelScheme::NLevel {
            levels: levels.clone(),
            transitions: (0..3).map(|i| Transition { lower: i, upper: i + 1, dipole: d }).collect(),
        };
        for t in [50.0, 300.0, 3000.0] {
            let rates: Vec<RateSet> = (0..3)
                .map(|i| {
                    let w = levels[i + 1] - levels[i];
                    rs(w, 1e8 * (1.0 + i as f64), mean_photon_n(w, t))
                })
                .collect();
            let rho = nlevel_steady(&scheme, &rates).unwrap();
            let g = thermal_populations(&scheme, t);
            for i in 0..4 {
                assert!((rho.get(i, i).re - g[i]).abs() < 1e-10, "T = {t}, level {i}");
            }
        }
    }

    #[test]
    fn purity_examples() {
        assert!((purity(&DensityMatrix::pure(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap()) - 1.0).abs() < 1e-15);
        assert!((purity(&DensityMatrix::from_populations(&[1.0 / 3.0; 3]).unwrap()) - 1.0 / 3.0).abs() < 1e-15);
        assert!((purity(&DensityMatrix::from_populations(&[0.6, 0.3, 0.1]).unwrap()) - 0.46).abs() < 1e-15);
    }

    #[test]
    fn closest_thermal_self_retrieval() {
        let s = lambda_scheme();
        for t0 in [3.0, 300.0, 2500.0] {
            let rho = DensityMatrix::from_populations(&thermal_populations(&s, t0)).unwrap();
            let (t, dist) = closest_thermal(&rho, &s).unwrap();
            assert!((t - t0).abs() < 0.1, "{t} vs {t0}");
            assert!(dist < 1e-8, "distance {dist}");
        }
    }

    #[test]
    fn closest_thermal_matches_dense_scan() {
        let s = lambda_scheme();
        let rho = DensityMatrix::from_populations(&[0.5, 0.5, 0.0]).unwrap();
        let (t, dist) = closest_thermal(&rho, &s).unwrap();
        let (lo, hi) = CLOSEST_THERMAL_RANGE;
        let scan = (0..10_000)
            .map(|i| {
                let tt = lo * (hi / lo).powf(i as f64 / 9999.0);
                (tt, thermal_distance(&rho, &s, tt))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!(dist > 0.1);
        assert!(dist <= scan.1 + 1e-12);
        assert!(t > lo && t < hi);
        assert!((t - scan.0).abs() < 0.01 * scan.0);
    }

    #[test]
    fn closest_thermal_rejects_coherent_input() {
        let plus = [c(0.5f64.sqrt(), 0.0), c(0.5f64.sqrt(), 0.0)];
        let two = LevelScheme::TwoLevel { omega0: W0, dipole: DipoleSpec::isotropic(1e-29) };
        assert_eq!(closest_thermal(&DensityMatrix::pure(&plus).unwrap(), &two), Err(Error::NonDiagonalInput));
    }

    #[test]
    fn ote_population_extremum() {
        // n³² at the hotter bath and n³¹ at the colder one maximize ρ₁₁.
        let (t_min, t_max) = (50.0, 600.0);
        let r31 = rs(W31, 1e9, mean_photon_n(W31, t_min));
        let r32 = rs(W32, 1e9, mean_photon_n(W32, t_max));
        let p_ote = three_level_steady(&r31, &r32).unwrap().get(0, 0).re;
        for k in 0..100 {
            let t = t_min + (t_max - t_min) * k as f64 / 99.0;
            let eq = three_level_steady(&rs(W31, 1e9, mean_photon_n(W31, t)), &rs(W32, 1e9, mean_photon_n(W32, t))).unwrap();
            assert!(p_ote >= eq.get(0, 0).re, "T = {t}");
        }
    }

    fn rates_strategy(omega: f64) -> impl Strategy<Value = RateSet> {
        (1e7f64..1e10, 0.0f64..5.0).prop_map(move |(g, n)| rs(omega, g, n))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn evolution_preserves_invariants(
            seed in proptest::collection::vec(0.0f64..1.0, 10),
            r31 in rates_strategy(W31),
            r32 in rates_strategy(W32),
            t in 0.0f64..5e-9,
            deltas in (-1e10f64..1e10, -1e10f64..1e10, -1e10f64..1e10),
        ) {
            let rho2 = random_state(2, &seed);
            let out2 = two_level_evolve(&rho2, t, &r31, deltas.0).unwrap();
            prop_assert!((out2.trace() - 1.0).norm() < 1e-10);
            prop_assert!(DensityMatrix::new(out2.matrix().clone()).is_ok());

            let rho3 = random_state(3, &seed);
            let out3 = three_level_evolve(&rho3, t, &r31, &r32, deltas).unwrap();
            prop_assert!((out3.trace() - 1.0).norm() < 1e-10);
            let m = out3.matrix();
            prop_assert!((m - m.adjoint()).iter().all(|c| c.norm() < 1e-10));
            prop_assert!(DensityMatrix::new(m.clone()).is_ok());
        }

        #[test]
        fn semigroup_and_fixed_point(
            seed in proptest::collection::vec(0.0f64..1.0, 10),
            r31 in rates_strategy(W31),
            r32 in rates_strategy(W32),
            t1 in 0.0f64..3e-9,
            t2 in 0.0f64..3e-9,
            deltas in (-1e10f64..1e10, -1e10f64..1e10, -1e10f64..1e10),
        ) {
            let rho2 = random_state(2, &seed);
            let a = two_level_evolve(&two_level_evolve(&rho2, t1, &r31, deltas.0).unwrap(), t2, &r31, deltas.0).unwrap();
            let b = two_level_evolve(&rho2, t1 + t2, &r31, deltas.0).unwrap();
            prop_assert!(a.max_abs_diff(&b) < 1e-10);

            let rho3 = random_state(3, &seed);
            let a = three_level_evolve(&three_level_evolve(&rho3, t1, &r31, &r32, deltas).unwrap(), t2, &r31, &r32, deltas).unwrap();
            let b = three_level_evolve(&rho3, t1 + t2, &r31, &r32, deltas).unwrap();
            prop_assert!(a.max_abs_diff(&b) < 1e-10);

            let s2 = two_level_steady(&r31).unwrap();
            prop_assert!(two_level_evolve(&s2, t1, &r31, deltas.0).unwrap().max_abs_diff(&s2) < 1e-10);
            if let Ok(s3) = three_level_steady(&r31, &r32) {
                prop_assert!(three_level_evolve(&s3, t1, &r31, &r32, deltas).unwrap().max_abs_diff(&s3) < 1e-10);
            }
        }

        #[test]
        fn coherence_decay_is_monotone(
            seed in proptest::collection::vec(0.0f64..1.0, 10),
            r in rates_strategy(W0),
            t1 in 0.0f64..3e-9,
            dt in 0.0f64..3e-9,
        ) {
            let rho = random_state(2, &seed);
            let a = two_level_evolve(&rho, t1, &r, 1e10).unwrap().get(0, 1).norm();
            let b = two_level_evolve(&rho, t1 + dt, &r, 1e10).unwrap().get(0, 1).norm();
            prop_assert!(b <= a * (1.0 + 1e-14));
        }

        #[test]
        fn detailed_balance_at_equilibrium(t in 5.0f64..5000.0, g1 in 1e7f64..1e10, g2 in 1e7f64..1e10) {
            let s = lambda_scheme();
            let rates = [rs(W31, g1, mean_photon_n(W31, t)), rs(W32, g2, mean_photon_n(W32, t))];
            let rho = nlevel_steady(&s, &rates).unwrap();
            let p = rho.populations();
            for (lo, up, w, _) in s.transitions() {
                let want = (-HBAR * w / (K_B * t)).exp();
                prop_assert!((p[up] / p[lo] - want).abs() <= 1e-9 * want.max(1e-300) + 1e-300);
            }
        }
    }
}
