use proptest::prelude::*;
use swellfront::analysis::{
    classify, compare, fit_power_law, ExperimentSeries, FitMode, FitWindow, FrontRegime, Material,
    Measurement,
};

fn power_curve(c: f64, g: f64, t0: f64, t1: f64, n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let t = t0 * (t1 / t0).powf(i as f64 / (n - 1) as f64);
            (t, c * t.powf(g))
        })
        .collect()
}

#[test]
fn square_root_law() {
    let curve: Vec<_> = (1..=100).map(|i| (i as f64, (i as f64).sqrt())).collect();
    let fit = fit_power_law(&curve, FitWindow::new(1.0, 100.0), FitMode::ThroughOrigin).unwrap();
    assert!((fit.gamma - 0.5).abs() < 1e-12);
    assert_eq!(classify(fit.gamma), FrontRegime::Diffusive);
}

#[test]
fn window_limits_the_points() {
    let curve = power_curve(1.0, 0.3, 0.01, 100.0, 200);
    let fit = fit_power_law(&curve, FitWindow::new(2.0, 50.0), FitMode::ThroughOrigin).unwrap();
    assert!(fit.window.0 >= 2.0 && fit.window.1 <= 50.0);
    assert_eq!(
        fit.n_points,
        curve.iter().filter(|(t, _)| (2.0..=50.0).contains(t)).count()
    );
}

proptest! {
    #[test]
    fn intercept_fit_recovers_exponent(
        c in 0.01f64..100.0,
        g in -1.0f64..2.0,
        t0 in 0.01f64..10.0,
        ratio in 2.0f64..1e4,
        n in 3usize..200,
    ) {
        let curve = power_curve(c, g, t0, t0 * ratio, n);
        let fit = fit_power_law(&curve, FitWindow::new(0.0, f64::INFINITY), FitMode::WithIntercept).unwrap();
        prop_assert!((fit.gamma - g).abs() < 1e-10, "{} vs {g}", fit.gamma);
        prop_assert!((fit.intercept - c.ln()).abs() < 1e-8);
    }

    #[test]
    fn intercept_fit_is_scale_covariant(
        pts in prop::collection::vec((0.1f64..1000.0, 0.01f64..20.0), 3..50),
        lambda in 1e-3f64..1e3,
    ) {
        let mut pts = pts;
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-6);
        prop_assume!(pts.len() >= 3);
        let window = FitWindow::new(0.0, f64::INFINITY);
        let scaled: Vec<_> = pts.iter().map(|(t, s)| (*t, lambda * s)).collect();
        let a = fit_power_law(&pts, window, FitMode::WithIntercept).unwrap();
        let b = fit_power_law(&scaled, window, FitMode::WithIntercept).unwrap();
        prop_assert!((a.gamma - b.gamma).abs() < 1e-9 * (1.0 + a.gamma.abs()));
        prop_assert!((a.rmse_log - b.rmse_log).abs() < 1e-9);
    }

    #[test]
    fn through_origin_recovers_pure_power(g in 0.05f64..1.5, t1 in 2.0f64..1e4) {
        let curve = power_curve(1.0, g, 1.0, t1, 50);
        let fit = fit_power_law(&curve, FitWindow::default(), FitMode::ThroughOrigin).unwrap();
        prop_assert!((fit.gamma - g).abs() < 1e-10);
    }

    #[test]
    fn classification_follows_sign(g in -2.0f64..2.0) {
        let expected = if g > 0.5 {
            FrontRegime::SuperDiffusive
        } else if g < 0.5 {
            FrontRegime::SubDiffusive
        } else {
            FrontRegime::Diffusive
        };
        prop_assert_eq!(classify(g), expected);
    }

    #[test]
    fn compare_on_linear_curve_is_exact(slope in 0.0f64..1.0, times in prop::collection::vec(0.1f64..40.0, 1..8)) {
        let mut times = times;
        times.sort_by(f64::total_cmp);
        times.dedup();
        let mut records = vec![Measurement { t: 0.0, front: 0.0, length: 20.0, area: 340.0 }];
        records.extend(times.iter().map(|t| Measurement { t: *t, front: slope * t, length: 20.0, area: 340.0 }));
        let series = ExperimentSeries::new(Material::Dense, records).unwrap();
        let curve = vec![(0.0, 0.0), (40.0, 40.0 * slope)];
        let rep = compare(&curve, &series).unwrap();
        prop_assert!(rep.rmse < 1e-12);
        prop_assert!(rep.flagged.is_empty());
    }
}

#[test]
fn through_origin_is_not_scale_covariant() {
    let curve = power_curve(1.0, 0.4, 1.0, 40.0, 50);
    let scaled: Vec<_> = curve.iter().map(|(t, s)| (*t, 3.0 * s)).collect();
    let a = fit_power_law(&curve, FitWindow::default(), FitMode::ThroughOrigin).unwrap();
    let b = fit_power_law(&scaled, FitWindow::default(), FitMode::ThroughOrigin).unwrap();
    assert!((a.gamma - b.gamma).abs() > 0.1);
}
