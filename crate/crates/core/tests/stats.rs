#![allow(clippy::needless_range_loop)]

use approx::assert_relative_eq;
use consim_core::stats::surface::SURFACE_TERMS;
use consim_core::stats::{
    anova_power_required_n, anova_two_way, cohens_f, eta_squared_from_f, f_cdf, noncentral_f_cdf, noncentral_f_sf,
    ols_fit, AnovaObservation, Classification, PowerSpec, QuadraticSurface, Rect,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

/// Solves `a x = b` by Gauss-Jordan elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let m = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= m * a[c][k];
                }
                b[r] -= m * b[c];
            }
        }
    }
    (0..n).map(|i| b[i] / a[i][i]).collect()
}

fn random_design(rng: &mut ChaCha8Rng, n: usize, p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let y = rows
        .iter()
        .map(|r| {
            1.5 + r.iter().enumerate().map(|(j, x)| (j as f64 - 1.0) * x).sum::<f64>()
                + rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    (rows, y)
}

#[test]
fn ols_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (rows, y) = random_design(&mut rng, 40, 3);
    let fit = ols_fit(&["x1", "x2", "x3"], &rows, &y, true).unwrap();
    let x: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect())
        .collect();
    let p = 4;
    let xtx: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| x.iter().map(|r| r[i] * r[j]).sum()).collect())
        .collect();
    let xty: Vec<f64> = (0..p).map(|i| x.iter().zip(&y).map(|(r, y)| r[i] * y).sum()).collect();
    let beta = solve(xtx.clone(), xty);
    for (a, b) in fit.coefficients.iter().zip(&beta) {
        assert_relative_eq!(a, b, epsilon = 1e-10);
    }
    let sigma2 = fit.rss / (40 - p) as f64;
    for j in 0..p {
        let unit: Vec<f64> = (0..p).map(|i| (i == j) as u8 as f64).collect();
        let inv_jj = solve(xtx.clone(), unit)[j];
        assert_relative_eq!(fit.std_errors[j], (sigma2 * inv_jj).sqrt(), epsilon = 1e-10);
    }
    let ybar = y.iter().sum::<f64>() / 40.0;
    let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    assert_relative_eq!(fit.r_squared, 1.0 - fit.rss / tss, epsilon = 1e-12);
}

proptest! {
    #[test]
    fn residuals_orthogonal_to_design(seed in any::<u64>(), n in 8usize..40, p in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rows, y) = random_design(&mut rng, n, p);
        let names: Vec<String> = (0..p).map(|j| format!("x{j}")).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let fit = ols_fit(&names, &rows, &y, true).unwrap();
        let scale = y.iter().map(|v| v.abs()).sum::<f64>() + 1.0;
        prop_assert!(fit.residuals.iter().sum::<f64>().abs() < 1e-9 * scale);
        for j in 0..p {
            let dot: f64 = rows.iter().zip(&fit.residuals).map(|(r, e)| r[j] * e).sum();
            prop_assert!(dot.abs() < 1e-9 * scale * 2.0, "column {} dot {}", j, dot);
        }
        prop_assert!(fit.r_squared >= -1e-12 && fit.r_squared <= 1.0 + 1e-12);
    }

    #[test]
    fn anova_sums_of_squares_reconcile(seed in any::<u64>(), per in 3usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::new();
        for (g, shift) in [("bad", 0.0), ("good", 3.0), ("info_correction", -1.0)] {
            for i in 0..per {
                let x = (i + 1) as f64 / 10.0;
                let noise: f64 = rng.sample(StandardNormal);
                data.push(AnovaObservation { bot_type: g.into(), proportion: x, outcome: 10.0 + shift + 4.0 * x + noise });
            }
        }
        let t = anova_two_way(&data).unwrap();
        let ss: f64 = t.terms.iter().map(|r| r.sum_sq).sum::<f64>() + t.residual.sum_sq;
        prop_assert!((ss - t.total_sum_sq).abs() < 1e-8 * t.total_sum_sq);
        let df: usize = t.terms.iter().map(|r| r.df).sum::<usize>() + t.residual.df;
        prop_assert_eq!(df, data.len() - 1);
        for r in &t.terms {
            prop_assert!((0.0..=1.0).contains(&r.p));
        }
    }

    #[test]
    fn cohens_f_is_monotone_and_inverts(a in 0.0f64..0.999, b in 0.0f64..0.999) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(cohens_f(lo).unwrap() <= cohens_f(hi).unwrap());
        prop_assert!((eta_squared_from_f(cohens_f(a).unwrap()) - a).abs() < 1e-12);
    }

    #[test]
    fn noncentral_f_monotone(x in 0.05f64..8.0, dx in 0.01f64..2.0, d1 in 1u32..20, d2 in 2u32..60, lambda in 0.0f64..30.0, dl in 0.1f64..10.0) {
        let (d1, d2) = (d1 as f64, d2 as f64);
        prop_assert!(noncentral_f_cdf(x, d1, d2, lambda) <= noncentral_f_cdf(x + dx, d1, d2, lambda) + 1e-12);
        prop_assert!(noncentral_f_cdf(x, d1, d2, lambda + dl) <= noncentral_f_cdf(x, d1, d2, lambda) + 1e-12);
        let total = noncentral_f_cdf(x, d1, d2, lambda) + noncentral_f_sf(x, d1, d2, lambda);
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn stationary_point_has_zero_gradient(beta in proptest::array::uniform6(-10.0f64..10.0)) {
        let s = QuadraticSurface::new(beta);
        let sp = s.stationary_point();
        if let Some((b, d)) = sp.point {
            let (gb, gd) = s.gradient(b, d);
            let scale = 1.0 + b.abs() + d.abs();
            prop_assert!(gb.hypot(gd) < 1e-8 * scale * scale, "gradient {} {}", gb, gd);
            let det = 4.0 * beta[4] * beta[5] - beta[3] * beta[3];
            let expected = if det < 0.0 { Classification::Saddle } else if beta[4] < 0.0 { Classification::Max } else { Classification::Min };
            prop_assert_eq!(sp.classification, expected);
        }
    }

    #[test]
    fn box_extrema_dominate_grid(beta in proptest::array::uniform6(-10.0f64..10.0)) {
        let s = QuadraticSurface::new(beta);
        let r = Rect { b_lo: 0.1, b_hi: 1.0, d_lo: 0.1, d_hi: 1.5 };
        let e = s.extrema_on_box(r);
        prop_assert!(r.contains(e.argmin.0, e.argmin.1) && r.contains(e.argmax.0, e.argmax.1));
        let tol = 1e-9 * (1.0 + e.max.abs().max(e.min.abs()));
        for i in 0..200 {
            for j in 0..200 {
                let b = r.b_lo + (r.b_hi - r.b_lo) * i as f64 / 199.0;
                let d = r.d_lo + (r.d_hi - r.d_lo) * j as f64 / 199.0;
                let v = s.eval(b, d);
                prop_assert!(v >= e.min - tol && v <= e.max + tol);
            }
        }
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn power_grows_with_n(f in 0.05f64..1.5, k in 2usize..25, n in 2.0f64..200.0) {
        let spec = PowerSpec::new(f, k);
        prop_assert!(spec.power_at(n) <= spec.power_at(n + 1.0) + 1e-12);
    }

    #[test]
    fn larger_effects_need_fewer_observations(f in 0.1f64..1.5, k in 2usize..25) {
        let n1 = anova_power_required_n(&PowerSpec::new(f, k)).unwrap();
        let n2 = anova_power_required_n(&PowerSpec::new(2.0 * f, k)).unwrap();
        prop_assert!(n2.n <= n1.n + 1e-6);
        prop_assert!(n1.achieved_power >= 0.8);
    }
}

#[test]
fn noncentral_f_matches_monte_carlo() {
    let (x, d1, d2, lambda): (f64, f64, f64, f64) = (2.0, 9.0, 10.0, 5.0);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let central = ChiSquared::new(d1 - 1.0).unwrap();
    let denom = ChiSquared::new(d2).unwrap();
    let draws = 1_000_000;
    let mut below = 0u32;
    for _ in 0..draws {
        // noncentral chi-square as one shifted normal plus a central remainder
        let z: f64 = rng.sample(StandardNormal);
        let num = (z + lambda.sqrt()).powi(2) + central.sample(&mut rng);
        let f = (num / d1) / (denom.sample(&mut rng) / d2);
        below += (f <= x) as u32;
    }
    let p = below as f64 / draws as f64;
    let se = (p * (1.0 - p) / draws as f64).sqrt();
    let exact = noncentral_f_cdf(x, d1, d2, lambda);
    assert!((exact - p).abs() < 4.0 * se, "series {exact}, simulated {p}");
}

#[test]
fn zero_noncentrality_is_central() {
    for (x, d1, d2) in [(0.5, 1.0, 5.0), (2.0, 9.0, 10.0), (4.0, 3.0, 120.0)] {
        assert_relative_eq!(noncentral_f_cdf(x, d1, d2, 0.0), f_cdf(x, d1, d2), epsilon = 1e-12);
    }
}

#[test]
fn cohen_table_sample_size() {
    // medium effect, four groups
    let s = anova_power_required_n(&PowerSpec::new(0.25, 4)).unwrap();
    assert_eq!(s.n_ceil, 45);
}

#[test]
fn surface_fit_recovers_exact_quadratic() {
    let truth = QuadraticSurface::new([2.0, -1.0, 0.5, 3.0, -4.0, 1.5]);
    let mut pts = Vec::new();
    for i in 1..=10 {
        for j in 1..=10 {
            let (b, d) = (i as f64 / 10.0, j as f64 / 10.0);
            pts.push((b, d, truth.eval(b, d)));
        }
    }
    let (s, fit) = consim_core::stats::fit_quadratic_surface(&pts).unwrap();
    for (a, b) in s.beta.iter().zip(&truth.beta) {
        assert_relative_eq!(a, b, epsilon = 1e-9);
    }
    assert_eq!(&fit.terms[1..], &SURFACE_TERMS);
}
