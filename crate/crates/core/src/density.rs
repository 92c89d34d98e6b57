//! Joint eigenvalue density and likelihood ratio for testing `Σ₁ = Σ₂`
//! against the rank-one alternative `Σ₁ = (I + ψhψ')Σ₂`.
//!
//! With `A₁ ~ W_p(n₁, Σ₁)` and `A₂ ~ W_p(n₂, Σ₂)` independent, the
//! eigenvalues `f₁ > ⋯ > f_p` of `A₁A₂⁻¹` have density
//!
//! ```text
//! c · |Δ|^(−n₁/2) ∏ f_j^((n₁−p−1)/2) ∏ (1+f_j)^(−n/2) · 1F0(n/2; I − Δ⁻¹, Λ) · ∏_{j<k} (f_j − f_k),
//! ```
//!
//! with `n = n₁ + n₂`, `Λ = F(I+F)⁻¹` and `I − Δ⁻¹` of rank one with
//! eigenvalue `τ = h/(1+h)`. The `1F0` factor is evaluated by the contour
//! formula, so the likelihood ratio costs one contour integral.

use std::f64::consts::PI;

use crate::contour::{eval_contour_i, eval_contour_iii, QuadratureSettings};
use crate::error::{Error, Result};
use crate::gamma::{ln_beta, ln_gamma_real};
use crate::jack::Spectrum;
use crate::params::{ParameterVectors, SpikeArgument};
use crate::result::{EvalResult, Method};

/// Dimension and degrees of freedom of the two Wishart samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoSampleDesign {
    pub p: usize,
    pub n1: usize,
    pub n2: usize,
}

impl TwoSampleDesign {
    pub fn new(p: usize, n1: usize, n2: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::Domain("dimension p must be positive".into()));
        }
        if n1 < p || n2 < p {
            return Err(Error::Domain(format!("need n1, n2 >= p, got n1 = {n1}, n2 = {n2}, p = {p}")));
        }
        Ok(Self { p, n1, n2 })
    }

    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }
}

/// Spike size `h > 0` and the derived eigenvalue `τ = h/(1+h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeAlternative {
    h: f64,
    tau: f64,
}

impl SpikeAlternative {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Domain(format!("spike size h = {h} must be positive")));
        }
        Ok(Self { h, tau: h / (1.0 + h) })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `log |Δ| = log(1 + h)`.
    pub fn log_det(&self) -> f64 {
        self.h.ln_1p()
    }
}

/// Eigenvalues `f₁ > ⋯ > f_p > 0` and `λ_j = f_j/(1+f_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueConfig {
    f: Vec<f64>,
    lambda: Vec<f64>,
}

impl EigenvalueConfig {
    pub fn new(f: Vec<f64>) -> Result<Self> {
        if f.is_empty() {
            return Err(Error::Domain("at least one eigenvalue is needed".into()));
        }
        if f.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Domain("eigenvalues must be positive".into()));
        }
        if f.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Domain("eigenvalues must be strictly decreasing".into()));
        }
        let lambda = f.iter().map(|v| v / (1.0 + v)).collect();
        Ok(Self { f, lambda })
    }

    /// Sorts `f` into decreasing order first.
    pub fn from_unsorted(mut f: Vec<f64>) -> Result<Self> {
        f.sort_by(|a, b| b.total_cmp(a));
        Self::new(f)
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }
}

/// `log Γ_p(a) = (p(p−1)/4) log π + Σ_{i=1}^p log Γ(a − (i−1)/2)`.
pub fn multivariate_gamma_log(p: usize, a: f64) -> Result<f64> {
    let mut total = (p * p.saturating_sub(1)) as f64 / 4.0 * PI.ln();
    for i in 0..p {
        let arg = a - i as f64 / 2.0;
        if arg <= 0.0 {
            return Err(Error::GammaPole(format!("Γ_{p}({a}) needs a > {}", (p as f64 - 1.0) / 2.0)));
        }
        total += ln_gamma_real(arg)?;
    }
    Ok(total)
}

/// `log c` for the normalization constant of the joint density.
pub fn constant_c(design: &TwoSampleDesign) -> Result<f64> {
    let p = design.p;
    let half = |k: usize| k as f64 / 2.0;
    Ok((p * p) as f64 / 2.0 * PI.ln() + multivariate_gamma_log(p, half(design.n()))?
        - multivariate_gamma_log(p, half(p))?
        - multivariate_gamma_log(p, half(design.n1))?
        - multivariate_gamma_log(p, half(design.n2))?)
}

/// `∏_{j<k} (f_j − f_k)`.
pub fn vandermonde(f: &EigenvalueConfig) -> f64 {
    let f = f.f();
    let mut product = 1.0;
    for j in 0..f.len() {
        for k in j + 1..f.len() {
            product *= f[j] - f[k];
        }
    }
    product
}

/// A density or likelihood-ratio value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValue {
    pub value: f64,
    pub err_estimate: f64,
    /// Contour route used for the matrix-argument factor, if one was needed.
    pub method: Option<Method>,
    pub effort: usize,
}

fn null_log_density(f: &EigenvalueConfig, design: &TwoSampleDesign) -> Result<f64> {
    let p = design.p as f64;
    let exponent = (design.n1 as f64 - p - 1.0) / 2.0;
    let n_half = design.n() as f64 / 2.0;
    let body: f64 = f.f().iter().map(|&v| exponent * v.ln() - n_half * v.ln_1p()).sum();
    Ok(constant_c(design)? + body + vandermonde(f).ln())
}

/// Joint density of the eigenvalues of `A₁A₂⁻¹`; `alt = None` is the null
/// hypothesis `Δ = I`.
pub fn joint_density(
    f: &EigenvalueConfig,
    alt: Option<&SpikeAlternative>,
    design: &TwoSampleDesign,
    tol: f64,
) -> Result<DensityValue> {
    if f.f().len() != design.p {
        return Err(Error::Domain(format!("{} eigenvalues given for p = {}", f.f().len(), design.p)));
    }
    let null = null_log_density(f, design)?.exp();
    match alt {
        None => Ok(DensityValue { value: null, err_estimate: 4.0 * f64::EPSILON * null, method: None, effort: 0 }),
        Some(alt) => {
            let lr = lr_contour(alt.tau(), f.lambda(), design, tol)?;
            Ok(DensityValue {
                value: null * lr.value,
                err_estimate: null * lr.err_estimate,
                method: lr.method,
                effort: lr.effort,
            })
        }
    }
}

fn real_case(
    params: &ParameterVectors,
    x: f64,
    y: &[f64],
    tol: f64,
) -> Result<EvalResult> {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let spectrum = Spectrum::new(sorted)?;
    let spike = SpikeArgument::new(x, y.len(), 2.0)?;
    let settings = QuadratureSettings::with_tol(tol);
    if y.len().is_multiple_of(2) {
        eval_contour_i(params, &spike, &spectrum, &settings)
    } else {
        eval_contour_iii(params, &spike, &spectrum, &settings)
    }
}

/// Likelihood ratio `|Δ|^(−n₁/2) 1F0(n/2; τ, Λ)` from one contour integral.
///
/// Even `p` integrates around a closed circle, odd `p` around a keyhole
/// with the half-integer shift `m = p/2 − 1`.
pub fn lr_contour(tau: f64, lambda: &[f64], design: &TwoSampleDesign, tol: f64) -> Result<DensityValue> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Domain(format!("τ = {tau} must lie in (0, 1)")));
    }
    if lambda.len() != design.p || lambda.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
        return Err(Error::Domain(format!("need {} values of λ in (0, 1)", design.p)));
    }
    let params = ParameterVectors::real(&[design.n() as f64 / 2.0], &[])?;
    let v = real_case(&params, tau, lambda, tol)?;
    let scale = (design.n1 as f64 / 2.0 * (-tau).ln_1p()).exp();
    Ok(DensityValue {
        value: scale * v.value.re,
        err_estimate: scale * v.err_estimate,
        method: Some(v.method),
        effort: v.effort,
    })
}

/// Limit of the likelihood ratio as `n₂ → ∞` with `μ_j = (n₂/n₁) f_j`:
/// `(1−τ)^(n₁/2) 0F0(n₁τ/2; M)`.
pub fn lr_limit(tau: f64, mu: &[f64], p: usize, n1: usize, tol: f64) -> Result<DensityValue> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Domain(format!("τ = {tau} must lie in (0, 1)")));
    }
    if mu.len() != p || mu.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
        return Err(Error::Domain(format!("need {p} positive values of μ")));
    }
    let params = ParameterVectors::real(&[], &[])?;
    let v = real_case(&params, n1 as f64 * tau / 2.0, mu, tol)?;
    let scale = (n1 as f64 / 2.0 * (-tau).ln_1p()).exp();
    Ok(DensityValue {
        value: scale * v.value.re,
        err_estimate: scale * v.err_estimate,
        method: Some(v.method),
        effort: v.effort,
    })
}

/// `((n−p)/2) B(p/2, (n−p)/2)`, the constant in front of the likelihood
/// ratio integral; it equals `Γ(m+1)/(n/2 − m)_m` with `m = p/2 − 1`.
pub fn lr_prefactor(design: &TwoSampleDesign) -> Result<f64> {
    let p = design.p as f64;
    let rest = (design.n() as f64 - p) / 2.0;
    Ok(rest * ln_beta(p / 2.0, rest)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jack::series_eval;
    use crate::params::rising_factorial_gamma;
    use num_complex::Complex64 as C64;
    use proptest::prelude::*;

    #[test]
    fn multivariate_gamma_values() {
        assert!((multivariate_gamma_log(1, 3.7).unwrap() - ln_gamma_real(3.7).unwrap()).abs() < 1e-15);
        // √π · Γ(2) · Γ(3/2) = π/2
        assert!((multivariate_gamma_log(2, 2.0).unwrap() - (PI / 2.0).ln()).abs() < 1e-14);
        // log Γ_3(4) = (3/2) log π + log Γ(4) + log Γ(3.5) + log Γ(3)
        assert!((multivariate_gamma_log(3, 4.0).unwrap() - 5.4029750809091747963).abs() < 1e-13);
        assert!(multivariate_gamma_log(3, 0.9).is_err());
    }

    #[test]
    fn normalization_constant() {
        let d = TwoSampleDesign::new(1, 2, 2).unwrap();
        assert!(constant_c(&d).unwrap().abs() < 1e-14);
        let d = TwoSampleDesign::new(1, 5, 7).unwrap();
        let want = ln_gamma_real(6.0).unwrap() - ln_gamma_real(2.5).unwrap() - ln_gamma_real(3.5).unwrap();
        assert!((constant_c(&d).unwrap() - want).abs() < 1e-13);
        let d = TwoSampleDesign::new(2, 4, 4).unwrap();
        assert!((constant_c(&d).unwrap() - 3.8066624897703197574).abs() < 1e-12);
        assert!(TwoSampleDesign::new(3, 2, 5).is_err());
    }

    #[test]
    fn vandermonde_examples() {
        assert_eq!(vandermonde(&EigenvalueConfig::new(vec![2.5]).unwrap()), 1.0);
        assert_eq!(vandermonde(&EigenvalueConfig::new(vec![3.0, 1.0]).unwrap()), 2.0);
        assert_eq!(vandermonde(&EigenvalueConfig::new(vec![4.0, 2.0, 1.0]).unwrap()), 6.0);
        assert!(EigenvalueConfig::new(vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn beta_prime_reduction() {
        let d = TwoSampleDesign::new(1, 7, 4).unwrap();
        for f in [0.1, 0.8, 3.0, 12.0] {
            let got = joint_density(&EigenvalueConfig::new(vec![f]).unwrap(), None, &d, 1e-12).unwrap().value;
            let ln = -ln_beta(3.5, 2.0).unwrap() + 2.5 * f64::ln(f) - 5.5 * f64::ln_1p(f);
            assert!((got - ln.exp()).abs() < 1e-13 * got);
        }
    }

    #[test]
    fn small_spike_approaches_null() {
        let d = TwoSampleDesign::new(2, 6, 6).unwrap();
        let f = EigenvalueConfig::new(vec![2.0, 0.5]).unwrap();
        let null = joint_density(&f, None, &d, 1e-12).unwrap().value;
        let alt = joint_density(&f, Some(&SpikeAlternative::new(1e-9).unwrap()), &d, 1e-12).unwrap().value;
        assert!((alt - null).abs() < 1e-7 * null);
        assert!(SpikeAlternative::new(-0.5).is_err());
        assert!(SpikeAlternative::new(0.0).is_err());
    }

    #[test]
    fn spiked_density_fixture() {
        // Matrix 1F0(6; τ = 1/2, Λ = (2/3, 1/3)); the pinned value is a
        // high-precision circle average of (1 − τ q'Λq)^(−6).
        let d = TwoSampleDesign::new(2, 6, 6).unwrap();
        let f = EigenvalueConfig::new(vec![2.0, 0.5]).unwrap();
        let alt = SpikeAlternative::new(1.0).unwrap();
        let params = ParameterVectors::real(&[6.0], &[]).unwrap();
        let spike = SpikeArgument::new(0.5, 2, 2.0).unwrap();
        let y = Spectrum::new(f.lambda().to_vec()).unwrap();
        let series = series_eval(&params, &spike, &y, 1e-16, 5000).unwrap().value.re;
        let null = joint_density(&f, None, &d, 1e-12).unwrap().value;
        let got = joint_density(&f, Some(&alt), &d, 1e-12).unwrap();
        assert!((got.value - null * 0.125 * series).abs() < 1e-10 * got.value);
        assert!((series - SPIKED_1F0).abs() < 1e-10 * series);
        assert_eq!(got.method, Some(Method::ContourI));
    }

    const SPIKED_1F0: f64 = 6.389_037_075_210_672_4;

    #[test]
    fn prefactor_identity() {
        for (p, n1, n2) in [(2, 5, 7), (3, 4, 9), (5, 6, 6)] {
            let d = TwoSampleDesign::new(p, n1, n2).unwrap();
            let m = p as f64 / 2.0 - 1.0;
            let a = d.n() as f64 / 2.0;
            let want = ln_gamma_real(m + 1.0).unwrap().exp() / rising_factorial_gamma(C64::new(a - m, 0.0), m).unwrap().re;
            assert!((lr_prefactor(&d).unwrap() - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn likelihood_ratio_matches_series() {
        for (p, tau, lambda) in [(2, 0.4, vec![0.7, 0.2]), (3, 0.6, vec![0.8, 0.5, 0.1]), (1, 0.3, vec![0.45])] {
            let d = TwoSampleDesign::new(p, 5, 6).unwrap();
            let lr = lr_contour(tau, &lambda, &d, 1e-12).unwrap();
            let params = ParameterVectors::real(&[5.5], &[]).unwrap();
            let spike = SpikeArgument::new(tau, p, 2.0).unwrap();
            let y = Spectrum::new(lambda.clone()).unwrap();
            let want = (1.0 - tau).powf(2.5) * series_eval(&params, &spike, &y, 1e-16, 5000).unwrap().value.re;
            assert!((lr.value - want).abs() < 1e-10 * want, "p={p}: {} vs {want}", lr.value);
        }
    }

    #[test]
    fn likelihood_ratio_small_tau() {
        let d = TwoSampleDesign::new(3, 5, 6).unwrap();
        let lr = lr_contour(1e-6, &[0.8, 0.5, 0.1], &d, 1e-12).unwrap();
        assert!((lr.value - 1.0).abs() < 1e-3);
        let lim = lr_limit(1e-6, &[1.5, 0.5], 2, 10, 1e-12).unwrap();
        assert!((lim.value - 1.0).abs() < 1e-3);
    }

    #[test]
    fn limit_fixture() {
        let lim = lr_limit(0.3, &[1.5, 0.5], 2, 10, 1e-12).unwrap();
        let params = ParameterVectors::real(&[], &[]).unwrap();
        let spike = SpikeArgument::new(1.5, 2, 2.0).unwrap();
        let y = Spectrum::new(vec![1.5, 0.5]).unwrap();
        let series = series_eval(&params, &spike, &y, 1e-16, 5000).unwrap().value.re;
        assert!((lim.value - 0.7f64.powi(5) * series).abs() < 1e-11 * lim.value);
        assert!((lim.value - LIMIT_FIXTURE).abs() < 1e-11 * lim.value);
    }

    const LIMIT_FIXTURE: f64 = 0.862_944_094_414_527_34;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn lambda_order_is_irrelevant(l in proptest::collection::vec(0.05..0.95f64, 3), tau in 0.1..0.9f64) {
            let d = TwoSampleDesign::new(3, 4, 5).unwrap();
            let mut rev = l.clone();
            rev.reverse();
            let a = lr_contour(tau, &l, &d, 1e-12).unwrap().value;
            let b = lr_contour(tau, &rev, &d, 1e-12).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }

        #[test]
        fn density_is_nonnegative(f1 in 0.1..20.0f64, gap in 0.05..5.0f64, h in 0.01..10.0f64) {
            let d = TwoSampleDesign::new(2, 4, 7).unwrap();
            let f = EigenvalueConfig::new(vec![f1 + gap, f1]).unwrap();
            let v = joint_density(&f, Some(&SpikeAlternative::new(h).unwrap()), &d, 1e-12).unwrap();
            prop_assert!(v.value >= -v.err_estimate);
        }
    }
}
