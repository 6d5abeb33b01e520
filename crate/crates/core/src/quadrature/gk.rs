//! Globally adaptive 15/7-point Gauss-Kronrod quadrature for small vector integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

/// Panel budget. A lenient budget returns the current estimate when exhausted
/// instead of failing.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Budget {
    pub max_panels: usize,
    pub lenient: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Outcome<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    priority: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, o: &Self) -> bool {
        self.priority == o.priority
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.priority.total_cmp(&o.priority)
    }
}

fn rule<const N: usize, F>(f: &F, a: f64, b: f64) -> Result<([f64; N], [f64; N])>
where
    F: Fn(f64) -> Result<[f64; N]>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    let fc = f(c)?;
    for i in 0..N {
        k[i] = WGK[7] * fc[i];
        g[i] = WG[3] * fc[i];
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx)?;
        let f2 = f(c + dx)?;
        for i in 0..N {
            let s = f1[i] + f2[i];
            k[i] += WGK[j] * s;
            if j % 2 == 1 {
                g[i] += WG[j / 2] * s;
            }
        }
    }
    let mut err = [0.0; N];
    for i in 0..N {
        k[i] *= h;
        err[i] = (k[i] - g[i] * h).abs();
    }
    Ok((k, err))
}

/// Integrates `f` over [breaks[0], breaks[last]], starting from the given panels and
/// bisecting the worst one. Components mapped to the same entry of `group` are
/// judged together: the summed error must meet `max(rel |Σ I|, abs)`.
pub(crate) fn integrate<const N: usize, F>(
    f: F,
    breaks: &[f64],
    tol: Tolerance,
    budget: Budget,
    group: [usize; N],
    labels: [&'static str; N],
) -> Result<Outcome<N>>
where
    F: Fn(f64) -> Result<[f64; N]>,
{
    debug_assert!(breaks.len() >= 2);
    let mut initial = Vec::with_capacity(breaks.len() - 1);
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (v, e) = rule(&f, w[0], w[1])?;
            initial.push((w[0], w[1], v, e));
        }
    }
    let mut total = [0.0; N];
    let mut err = [0.0; N];
    for (_, _, v, e) in &initial {
        for i in 0..N {
            total[i] += v[i];
            err[i] += e[i];
        }
    }
    let groups = group.iter().max().map_or(0, |g| g + 1);
    let grouped = |v: &[f64; N], abs: bool| -> Vec<f64> {
        let mut out = vec![0.0; groups];
        for i in 0..N {
            out[group[i]] += if abs { v[i].abs() } else { v[i] };
        }
        out
    };
    let threshold = |total: &[f64; N]| -> Vec<f64> {
        grouped(total, false).iter().map(|t| (tol.rel * t.abs()).max(tol.abs)).collect()
    };
    // Fixed scales so the heap ordering stays consistent.
    let scale = threshold(&total);
    let priority = |e: &[f64; N]| -> f64 {
        grouped(e, true).iter().zip(&scale).map(|(e, s)| e / s).fold(0.0, f64::max)
    };
    let mut heap: BinaryHeap<Panel<N>> = initial
        .into_iter()
        .map(|(a, b, value, error)| Panel {
            a,
            b,
            value,
            error,
            priority: priority(&error),
        })
        .collect();
    let mut done: Vec<Panel<N>> = Vec::new();

    let converged = |total: &[f64; N], err: &[f64; N]| {
        grouped(err, true).iter().zip(threshold(total)).all(|(e, t)| *e <= t)
    };

    while !converged(&total, &err) {
        let Some(p) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a && m < p.b) || p.b - p.a <= 1e-15 * p.a.abs().max(p.b.abs()) {
            // Cannot split further at double precision.
            done.push(Panel { priority: 0.0, ..p });
            continue;
        }
        if heap.len() + done.len() + 2 > budget.max_panels {
            heap.push(p);
            if budget.lenient {
                break;
            }
            let ratio = |i: usize| {
                let g = grouped(&err, true)[group[i]];
                g / threshold(&total)[group[i]]
            };
            let worst = (0..N)
                .max_by(|&a, &b| (ratio(a) * err[a].abs()).total_cmp(&(ratio(b) * err[b].abs())))
                .unwrap_or(0);
            return Err(Error::QuadratureNoConvergence {
                component: labels[worst],
                error: err[worst],
                subdivisions: heap.len() + done.len(),
            });
        }
        let (v1, e1) = rule(&f, p.a, m)?;
        let (v2, e2) = rule(&f, m, p.b)?;
        for i in 0..N {
            total[i] += v1[i] + v2[i] - p.value[i];
            err[i] += e1[i] + e2[i] - p.error[i];
        }
        heap.push(Panel { a: p.a, b: m, value: v1, error: e1, priority: priority(&e1) });
        heap.push(Panel { a: m, b: p.b, value: v2, error: e2, priority: priority(&e2) });
    }

    // Re-sum from scratch to shed accumulated update round-off.
    let mut panels: Vec<Panel<N>> = heap.into_vec();
    panels.extend(done);
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for p in &panels {
        for i in 0..N {
            value[i] += p.value[i];
            error[i] += p.error[i];
        }
    }
    Ok(Outcome { value, error, panels: panels.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TIGHT: Tolerance = Tolerance { rel: 1e-12, abs: 1e-15 };
    const STRICT: Budget = Budget { max_panels: 10_000, lenient: false };

    #[test]
    fn polynomials_are_exact_on_one_panel() {
        let r = integrate(|x| Ok([x.powi(12), 1.0]), &[0.0, 1.0], TIGHT, Budget { max_panels: 10, lenient: false }, [0, 1], ["p", "c"]).unwrap();
        assert!((r.value[0] - 1.0 / 13.0).abs() < 1e-15);
        assert!((r.value[1] - 1.0).abs() < 1e-15);
        assert_eq!(r.panels, 1);
    }

    #[test]
    fn oscillatory_and_peaked() {
        let r = integrate(
            |x| Ok([(50.0 * x).cos(), 1e-3 / ((x - 0.3).powi(2) + 1e-6)]),
            &[0.0, 1.0],
            TIGHT,
            STRICT,
            [0, 1],
            ["cos", "peak"],
        )
        .unwrap();
        assert!((r.value[0] - (50f64).sin() / 50.0).abs() < 1e-12);
        let exact = (0.7f64 / 1e-3).atan() + (0.3f64 / 1e-3).atan();
        assert!((r.value[1] - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn grouped_components_share_a_tolerance() {
        // A tiny component riding on a large one in the same group converges with it.
        let f = |x: f64| Ok([1e6 * x, 1e-9 * (1.0 / (x + 1e-9)).sin()]);
        let tight = Budget { max_panels: 200, lenient: false };
        let r = integrate(f, &[0.0, 1.0], Tolerance { rel: 1e-9, abs: 0.0 }, tight, [0, 0], ["big", "small"]).unwrap();
        assert!((r.value[0] - 5e5).abs() < 1e-6);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        let r = integrate(|x: f64| Ok([1.0 / x.sqrt()]), &[0.0, 1.0], TIGHT, STRICT, [0], ["s"]).unwrap();
        assert!((r.value[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn reports_non_convergence() {
        let bad = |x: f64| Ok([(1.0 / x).sin() / x]);
        let tight = Budget { max_panels: 50, lenient: false };
        let e = integrate(bad, &[1e-12, 1.0], TIGHT, tight, [0], ["bad"]).unwrap_err();
        assert!(matches!(e, Error::QuadratureNoConvergence { component: "bad", .. }));
        let loose = Budget { max_panels: 50, lenient: true };
        let r = integrate(bad, &[1e-12, 1.0], TIGHT, loose, [0], ["bad"]).unwrap();
        assert!(r.panels <= 50 && r.value[0].is_finite());
    }

    #[test]
    fn integrand_errors_propagate() {
        let e = integrate(
            |x: f64| if x > 0.5 { Err(Error::ResonantDenominator(0.0)) } else { Ok([x]) },
            &[0.0, 1.0],
            TIGHT,
            STRICT,
            [0],
            ["x"],
        )
        .unwrap_err();
        assert_eq!(e, Error::ResonantDenominator(0.0));
    }
}
