mod common;

use common::{bloch_rhs, lambda_rhs, rk4, trapezoid_factors};
use noneq_atomdyn::constants::{gaas, gold};
use noneq_atomdyn::dynamics::{
    nlevel_steady, three_level_evolve, three_level_steady, two_level_evolve, two_level_steady, DensityMatrix,
    LevelScheme,
};
use noneq_atomdyn::matprops::{permittivity, surface_resonance, PermittivityModel};
use noneq_atomdyn::quadrature::env_body_factors;
use noneq_atomdyn::rates::{DipoleSpec, RateSet};
use noneq_atomdyn::slab_optics::Geometry;
use num_complex::Complex64;

fn check_grid(model: &PermittivityModel, omegas: [f64; 3], zs: [f64; 3], deltas: &[Option<f64>]) {
    let mut worst = 0.0f64;
    for &omega in &omegas {
        let eps = permittivity(model, omega).unwrap();
        for &z in &zs {
            for &delta in deltas {
                let geom = match delta {
                    Some(d) => Geometry::new(z, d).unwrap(),
                    None => Geometry::semi_infinite(z).unwrap(),
                };
                let f = env_body_factors(omega, &geom, model).unwrap();
                let [b, c, d] = trapezoid_factors(omega, z, delta, eps);
                for (name, lib, oracle) in [("B", f.b, b), ("C", f.c, c), ("D", f.d, d)] {
                    for k in [0, 2] {
                        let scale = oracle[k].abs().max(1e-6 * (oracle[0].abs() + oracle[2].abs()));
                        let rel = (lib[k] - oracle[k]).abs() / scale;
                        worst = worst.max(rel);
                        assert!(
                            rel < 1e-6,
                            "{name}[{k}] at omega={omega:e}, z={z:e}, delta={delta:?}: {} vs {} (rel {rel:e})",
                            lib[k],
                            oracle[k]
                        );
                    }
                }
            }
        }
    }
    eprintln!("worst relative deviation {worst:e}");
}

#[test]
fn gaas_factors_match_trapezoid_oracle() {
    let m = PermittivityModel::gaas();
    let wp = surface_resonance(&m).unwrap();
    check_grid(&m, [0.9 * gaas::OMEGA_R, wp, 1.2 * gaas::OMEGA_R], [1e-7, 1e-6, 5e-6], &[Some(1e-7), Some(1e-6), Some(1e-5), None]);
}

#[test]
fn gold_factors_match_trapezoid_oracle() {
    let m = PermittivityModel::gold();
    let w = gold::OMEGA_ROOM;
    check_grid(&m, [0.5 * w, w, 2.5 * w], [1e-7, 1e-6, 5e-6], &[Some(1e-8), Some(1e-7), Some(1e-6), None]);
}

fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn two_level_evolution_matches_bloch_integration() {
    let r = RateSet::from_n_eff(gaas::OMEGA_R, 2.0e3, 0.7).unwrap();
    let delta = 3.0e3;
    let rho0 = DensityMatrix::pure(&[Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).unwrap();
    let y0 = [rho0.get(1, 1), rho0.get(0, 1)];
    for k in 1..=10 {
        let t = k as f64 * 2e-4;
        let y = rk4(bloch_rhs(r.gamma_down, r.gamma_up, delta), y0, t, 4000);
        let rho = two_level_evolve(&rho0, t, &r, delta).unwrap();
        assert!((rho.get(1, 1) - y[0]).norm() < 1e-8);
        assert!((rho.get(0, 1) - y[1]).norm() < 1e-8);
    }
}

#[test]
fn lambda_evolution_matches_rk4() {
    let r31 = RateSet::from_n_eff(1.5 * gaas::OMEGA_R, 1.0e3, 0.3).unwrap();
    let r32 = RateSet::from_n_eff(gaas::OMEGA_R, 2.5e3, 1.4).unwrap();
    let splits = (2.0e3, -1.0e3, 4.0e3);
    let amp = [0.5, 0.5, 0.5f64.sqrt()].map(c64);
    let rho0 = DensityMatrix::pure(&amp).unwrap();
    let g = [r31.gamma_down, r31.gamma_up, r32.gamma_down, r32.gamma_up];
    let y0 = [
        rho0.get(0, 0),
        rho0.get(1, 1),
        rho0.get(2, 2),
        rho0.get(0, 1),
        rho0.get(0, 2),
        rho0.get(1, 2),
    ];
    for k in 1..=10 {
        let t = k as f64 * 1e-4;
        let y = rk4(lambda_rhs(g, [splits.0, splits.1, splits.2]), y0, t, 4000);
        let rho = three_level_evolve(&rho0, t, &r31, &r32, splits).unwrap();
        let got = [rho.get(0, 0), rho.get(1, 1), rho.get(2, 2), rho.get(0, 1), rho.get(0, 2), rho.get(1, 2)];
        for j in 0..6 {
            assert!((got[j] - y[j]).norm() < 1e-8, "t={t:e} component {j}: {} vs {}", got[j], y[j]);
        }
    }
}

#[test]
fn nlevel_solver_reproduces_closed_forms() {
    let d = DipoleSpec::isotropic(1e-29);
    let r = RateSet::from_n_eff(gaas::OMEGA_R, 7.0e2, 0.45).unwrap();
    let two = LevelScheme::TwoLevel { omega0: gaas::OMEGA_R, dipole: d };
    let a = nlevel_steady(&two, &[r]).unwrap();
    assert!(a.max_abs_diff(&two_level_steady(&r).unwrap()) < 1e-10);

    let r31 = RateSet::from_n_eff(1.3 * gaas::OMEGA_R, 4.0e2, 0.2).unwrap();
    let r32 = RateSet::from_n_eff(gaas::OMEGA_R, 9.0e2, 2.1).unwrap();
    let lambda = LevelScheme::Lambda { omega31: r31.omega, omega32: r32.omega, d31: d, d32: d };
    let b = nlevel_steady(&lambda, &[r31, r32]).unwrap();
    assert!(b.max_abs_diff(&three_level_steady(&r31, &r32).unwrap()) < 1e-10);
}
