use proptest::prelude::*;

use spiked_hyp::contour::{self, QuadratureSettings};
use spiked_hyp::density::{lr_contour, lr_limit, TwoSampleDesign};
use spiked_hyp::jack::{series_eval, Spectrum, DEFAULT_MAX_TERMS};
use spiked_hyp::params::{ParameterVectors, SpikeArgument};

fn series(a: &[f64], b: &[f64], x: f64, y: &[f64], alpha: f64) -> f64 {
    let params = ParameterVectors::real(a, b).unwrap();
    let spike = SpikeArgument::new(x, y.len(), alpha).unwrap();
    series_eval(&params, &spike, &Spectrum::new(y.to_vec()).unwrap(), 1e-15, DEFAULT_MAX_TERMS).unwrap().value.re
}

#[test]
fn likelihood_ratio_matches_series_form() {
    for (p, n1, n2, tau, lambda) in [
        (2, 6, 6, 0.5, vec![0.7, 0.2]),
        (3, 5, 8, 0.3, vec![0.9, 0.4, 0.1]),
        (3, 9, 4, 0.6, vec![0.5, 0.45, 0.3]),
        (1, 4, 7, 0.4, vec![0.65]),
    ] {
        let design = TwoSampleDesign::new(p, n1, n2).unwrap();
        let got = lr_contour(tau, &lambda, &design, 1e-12).unwrap().value;
        let prefactor = (1.0 - tau).powf(n1 as f64 / 2.0);
        let want = prefactor * series(&[(n1 + n2) as f64 / 2.0], &[], tau, &lambda, 2.0);
        assert!((got - want).abs() <= 1e-10 * want, "p = {p}: {got} vs {want}");
    }
}

#[test]
fn limit_matches_series_form() {
    let (n1, tau, mu) = (10, 0.3, [1.5, 0.5]);
    let got = lr_limit(tau, &mu, 2, n1, 1e-12).unwrap().value;
    let want = (1.0 - tau).powf(n1 as f64 / 2.0) * series(&[], &[], n1 as f64 * tau / 2.0, &mu, 2.0);
    assert!((got - want).abs() <= 1e-11 * want, "{got} vs {want}");

    let got = lr_limit(0.45, &[2.0, 1.2, 0.3], 3, 7, 1e-12).unwrap().value;
    let want = 0.55f64.powf(3.5) * series(&[], &[], 7.0 * 0.45 / 2.0, &[2.0, 1.2, 0.3], 2.0);
    assert!((got - want).abs() <= 1e-11 * want, "{got} vs {want}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn contour_matches_series(
        y in proptest::collection::vec(0.2..2.0f64, 1..6),
        a in 0.5..2.5f64,
        b in 3.0..6.0f64,
        x in 0.1..1.5f64,
        alpha in prop::sample::select(vec![1.0, 2.0, 3.0, 0.5]),
    ) {
        let params = ParameterVectors::real(&[a], &[b]).unwrap();
        let spike = SpikeArgument::new(x, y.len(), alpha).unwrap();
        let spectrum = Spectrum::new(y).unwrap();
        let settings = QuadratureSettings::with_tol(1e-12);
        let got = contour::eval(&params, &spike, &spectrum, &settings).unwrap().value;
        let want = series_eval(&params, &spike, &spectrum, 1e-15, DEFAULT_MAX_TERMS).unwrap().value;
        prop_assert!((got - want).norm() <= 1e-9 * want.norm(), "{} vs {}", got, want);
    }

    #[test]
    fn realness_for_real_inputs(
        y in proptest::collection::vec(0.2..2.0f64, 2..5),
        x in 0.1..1.0f64,
        alpha in prop::sample::select(vec![1.0, 2.0]),
    ) {
        let params = ParameterVectors::real(&[], &[]).unwrap();
        let spike = SpikeArgument::new(x, y.len(), alpha).unwrap();
        let v = contour::eval(&params, &spike, &Spectrum::new(y).unwrap(), &QuadratureSettings::with_tol(1e-12)).unwrap();
        prop_assert!(v.value.im.abs() <= v.err_estimate.max(1e-15 * v.value.norm()));
    }
}
