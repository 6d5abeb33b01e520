//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;

const C_LIGHT: f64 = 299_792_458.0;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Root with Im ≥ 0 (Re ≥ 0 on the real axis).
fn root(x: Complex64) -> Complex64 {
    let r = x.sqrt();
    if r.im < 0.0 || (r.im == 0.0 && r.re < 0.0) {
        -r
    } else {
        r
    }
}

/// Slab reflection and transmission (ρ_TE, ρ_TM, τ_TE, τ_TM) at reduced k_z, written
/// out from the Airy sums without sharing code with the library.
pub fn slab(kz: Complex64, eps: Complex64, delta: Option<f64>) -> [Complex64; 4] {
    let kzm = root(eps - 1.0 + kz * kz);
    let r_te = (kz - kzm) / (kz + kzm);
    let r_tm = (eps * kz - kzm) / (eps * kz + kzm);
    match delta {
        None => [r_te, r_tm, c(0.0, 0.0), c(0.0, 0.0)],
        Some(d) => {
            let e2 = (c(0.0, 2.0) * kzm * d).exp();
            let e1 = (c(0.0, 1.0) * (kzm - kz) * d).exp();
            let one = c(1.0, 0.0);
            let rho = |r: Complex64| r * (one - e2) / (one - r * r * e2);
            let tau = |r: Complex64| (one - r * r) * e1 / (one - r * r * e2);
            [rho(r_te), rho(r_tm), tau(r_te), tau(r_tm)]
        }
    }
}

fn trapezoid<F: Fn(f64) -> [f64; 3]>(f: F, a: f64, b: f64, n: usize) -> [f64; 3] {
    let h = (b - a) / n as f64;
    let mut s = [0.0; 3];
    for i in 0..=n {
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        let v = f(a + h * i as f64);
        for k in 0..3 {
            s[k] += w * v[k];
        }
    }
    s.map(|x| x * h)
}

pub const TRAPEZOID_POINTS: usize = 100_000;

/// (B, C, D) by plain trapezoid rules; D uses u = L t/(1 − t) with L = 1/(2 z̃).
/// Components are (x, y, z).
pub fn trapezoid_factors(omega: f64, z: f64, delta: Option<f64>, eps: Complex64) -> [[f64; 3]; 3] {
    trapezoid_factors_n(omega, z, delta, eps, TRAPEZOID_POINTS)
}

pub fn trapezoid_factors_n(omega: f64, z: f64, delta: Option<f64>, eps: Complex64, n: usize) -> [[f64; 3]; 3] {
    let k0 = omega / C_LIGHT;
    let zt = z * k0;
    let dt = delta.map(|d| d * k0);

    let b = trapezoid(
        |s| {
            let [rte, rtm, tte, ttm] = slab(c(s, 0.0), eps, dt);
            let a1 = rte.norm_sqr() + tte.norm_sqr();
            let a2 = rtm.norm_sqr() + ttm.norm_sqr();
            let xy = 0.75 * (a1 + s * s * a2);
            [xy, xy, 1.5 * (1.0 - s * s) * a2]
        },
        0.0,
        1.0,
        n,
    );
    let cc = trapezoid(
        |s| {
            let [rte, rtm, _, _] = slab(c(s, 0.0), eps, dt);
            let ph = c(0.0, 2.0 * s * zt).exp();
            let xy = 0.75 * ((rte * ph).re - s * s * (rtm * ph).re);
            [xy, xy, 1.5 * (1.0 - s * s) * (rtm * ph).re]
        },
        0.0,
        1.0,
        n,
    );
    // Logarithmic map in u: thin films carry a TM mode whose width scales with its
    // distance from u = 0, which a uniform grid cannot resolve.
    let d_integrand = |u: f64| -> [f64; 3] {
        let [rte, rtm, _, _] = slab(c(0.0, u), eps, dt);
        let w = 0.75 * (-2.0 * u * zt).exp();
        let xy = w * (rte.im + u * u * rtm.im);
        [xy, xy, 2.0 * w * (1.0 + u * u) * rtm.im]
    };
    let u_lo = 1e-4 * dt.unwrap_or(zt).min(zt);
    let u_hi = 60.0 / zt;
    let mut d = trapezoid(
        |x| {
            let u = x.exp();
            d_integrand(u).map(|v| v * u)
        },
        u_lo.ln(),
        u_hi.ln(),
        n,
    );
    let head = d_integrand(0.5 * u_lo);
    for k in 0..3 {
        d[k] += head[k] * u_lo;
    }
    [b, cc, d]
}

/// Classical fourth-order Runge-Kutta for y' = f(y) on complex vectors.
pub fn rk4<const N: usize, F>(f: F, y0: [Complex64; N], t: f64, steps: usize) -> [Complex64; N]
where
    F: Fn(&[Complex64; N]) -> [Complex64; N],
{
    let h = t / steps as f64;
    let mut y = y0;
    let axpy = |y: &[Complex64; N], k: &[Complex64; N], s: f64| -> [Complex64; N] { std::array::from_fn(|j| y[j] + k[j] * s) };
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&axpy(&y, &k1, h / 2.0));
        let k3 = f(&axpy(&y, &k2, h / 2.0));
        let k4 = f(&axpy(&y, &k3, h));
        y = std::array::from_fn(|j| y[j] + (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0));
    }
    y
}

/// Right-hand side of the Λ-system equations for (ρ11, ρ22, ρ33, ρ12, ρ13, ρ23), with
/// rates (Γ(ω31), Γ(−ω31), Γ(ω32), Γ(−ω32)) and splittings (Δ21, Δ31, Δ32).
pub fn lambda_rhs(g: [f64; 4], d: [f64; 3]) -> impl Fn(&[Complex64; 6]) -> [Complex64; 6] {
    let [d31, u31, d32, u32] = g;
    let i = c(0.0, 1.0);
    move |y: &[Complex64; 6]| {
        [
            -u31 * y[0] + d31 * y[2],
            -u32 * y[1] + d32 * y[2],
            u31 * y[0] - d31 * y[2] + u32 * y[1] - d32 * y[2],
            (i * d[0] - 0.5 * (u31 + u32)) * y[3],
            (i * d[1] - 0.5 * (d31 + u31 + d32)) * y[4],
            (i * d[2] - 0.5 * (d32 + u32 + d31)) * y[5],
        ]
    }
}

/// Two-level optical Bloch equations for (ρ22, ρ12).
pub fn bloch_rhs(down: f64, up: f64, delta: f64) -> impl Fn(&[Complex64; 2]) -> [Complex64; 2] {
    let i = c(0.0, 1.0);
    move |y: &[Complex64; 2]| [-down * y[0] + up * (1.0 - y[0]), (i * delta - 0.5 * (down + up)) * y[1]]
}
