//! Parameter algebra shared by every evaluator: Pochhammer symbols, the
//! ratio `ρ_k(a, b)`, parameter shifts and the gate on admissible parameters.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result, Violation};
use crate::gamma::{is_nonpositive_integer, ln_gamma};

/// Numerator parameters `a` (length p) and denominator parameters `b` (length q).
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVectors {
    pub a: Vec<C64>,
    pub b: Vec<C64>,
}

impl ParameterVectors {
    /// Builds a validated parameter set: no denominator may be 0, −1, −2, …
    /// and `p ≤ q + 1`.
    pub fn new(a: Vec<C64>, b: Vec<C64>) -> Result<Self> {
        let params = Self { a, b };
        let mut violations = Vec::new();
        params.check_standing(&mut violations);
        if violations.is_empty() {
            Ok(params)
        } else {
            Err(Error::Validation(violations))
        }
    }

    pub fn real(a: &[f64], b: &[f64]) -> Result<Self> {
        Self::new(
            a.iter().map(|&v| C64::new(v, 0.0)).collect(),
            b.iter().map(|&v| C64::new(v, 0.0)).collect(),
        )
    }

    /// Skips validation. Used for derived parameter sets such as `a − m`.
    pub fn unchecked(a: Vec<C64>, b: Vec<C64>) -> Self {
        Self { a, b }
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn q(&self) -> usize {
        self.b.len()
    }

    /// `p = q + 1`: the series has unit radius and a cut on `[1, ∞)`.
    pub fn has_unit_radius(&self) -> bool {
        self.p() == self.q() + 1
    }

    pub fn is_real(&self) -> bool {
        self.a.iter().chain(&self.b).all(|v| v.im == 0.0)
    }

    fn check_standing(&self, out: &mut Vec<Violation>) {
        for (l, b) in self.b.iter().enumerate() {
            if is_nonpositive_integer(*b) {
                out.push(Violation {
                    parameter: format!("b[{l}]"),
                    reason: format!("{b} is a nonpositive integer"),
                });
            }
        }
        if self.p() > self.q() + 1 {
            out.push(Violation {
                parameter: "p".into(),
                reason: format!("p = {} exceeds q + 1 = {}", self.p(), self.q() + 1),
            });
        }
    }
}

/// Rank-one `X` summarized by its nonzero eigenvalue, together with the
/// matrix dimension and the family index (2 = real, 1 = complex).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeArgument {
    pub x: f64,
    pub r: usize,
    pub alpha: f64,
}

impl SpikeArgument {
    pub fn new(x: f64, r: usize, alpha: f64) -> Result<Self> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Domain(format!("spike eigenvalue x = {x} must be positive")));
        }
        if r == 0 {
            return Err(Error::Domain("dimension r must be at least 1".into()));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha = {alpha} must be positive")));
        }
        Ok(Self { x, r, alpha })
    }

    /// `r / α`.
    pub fn ratio(&self) -> f64 {
        self.r as f64 / self.alpha
    }

    /// Splits `r/α` into `m + 1` (integer case) or `m + ε`.
    pub fn decompose(&self) -> SpikeDecomposition {
        let ratio = self.ratio();
        let nearest = ratio.round();
        if nearest >= 1.0 && (ratio - nearest).abs() <= 1e-12 * ratio {
            SpikeDecomposition { m: nearest - 1.0, epsilon: None }
        } else {
            let m = ratio.floor();
            SpikeDecomposition { m, epsilon: Some(ratio - m) }
        }
    }
}

/// `m` and, for non-integer `r/α`, the fractional part `ε`.
///
/// The real-case route for odd `r` keeps `ε` absent and carries a
/// half-integer `m = r/2 − 1` (which is `−1/2` for `r = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeDecomposition {
    pub m: f64,
    pub epsilon: Option<f64>,
}

impl SpikeDecomposition {
    pub fn half_integer(r: usize) -> Self {
        Self { m: r as f64 / 2.0 - 1.0, epsilon: None }
    }

    pub fn is_integer_m(&self) -> bool {
        self.m.fract() == 0.0
    }
}

/// Rising factorial `(a)_k = a (a+1) ⋯ (a+k−1)`, with `(a)_0 = 1`.
pub fn rising_factorial(a: C64, k: usize) -> C64 {
    (0..k).fold(C64::new(1.0, 0.0), |acc, j| acc * (a + j as f64))
}

/// `(a)_m = Γ(a+m)/Γ(a)` for real, possibly non-integer `m`.
pub fn rising_factorial_gamma(a: C64, m: f64) -> Result<C64> {
    Ok((ln_gamma(a + m)? - ln_gamma(a)?).exp())
}

fn is_nonnegative_integer(v: f64) -> bool {
    v >= 0.0 && v.fract() == 0.0
}

/// `ρ_k(a, b) = ∏(a_l)_k / ∏(b_l)_k`; non-integer orders use the gamma ratio.
pub fn rho(params: &ParameterVectors, k: f64) -> Result<C64> {
    if is_nonnegative_integer(k) {
        let k = k as usize;
        let num = params.a.iter().fold(C64::new(1.0, 0.0), |acc, &a| acc * rising_factorial(a, k));
        let den = params.b.iter().fold(C64::new(1.0, 0.0), |acc, &b| acc * rising_factorial(b, k));
        Ok(num / den)
    } else {
        let mut log = C64::new(0.0, 0.0);
        for &a in &params.a {
            log += ln_gamma(a + k)? - ln_gamma(a)?;
        }
        for &b in &params.b {
            log -= ln_gamma(b + k)? - ln_gamma(b)?;
        }
        Ok(log.exp())
    }
}

/// Subtracts `m` from every entry of `a` and `b`.
pub fn shift_parameters(params: &ParameterVectors, m: f64) -> ParameterVectors {
    ParameterVectors::unchecked(
        params.a.iter().map(|&a| a - m).collect(),
        params.b.iter().map(|&b| b - m).collect(),
    )
}

/// Outcome of [`validate_proposition_conditions`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::Validation(self.violations))
        }
    }
}

fn as_integer(z: C64) -> Option<f64> {
    (z.im == 0.0 && z.re.fract() == 0.0).then_some(z.re)
}

/// Checks the conditions under which the contour formula is asserted.
///
/// For integer `m`: `a_l ∉ {1, …, m}` and `b_l ∉ {m, m−1, m−2, …}`. For
/// half-integer `m` only the gamma poles of `ρ_m(a−m, b−m)` and of the
/// shifted kernel denominators are rejected.
pub fn validate_proposition_conditions(params: &ParameterVectors, m: f64) -> ValidationReport {
    let mut violations = Vec::new();
    params.check_standing(&mut violations);
    if m.fract() == 0.0 {
        for (l, &a) in params.a.iter().enumerate() {
            if let Some(v) = as_integer(a) {
                if v >= 1.0 && v <= m {
                    violations.push(Violation {
                        parameter: format!("a[{l}]"),
                        reason: format!("{v} lies in {{1, ..., {m}}}"),
                    });
                }
            }
        }
        for (l, &b) in params.b.iter().enumerate() {
            if let Some(v) = as_integer(b) {
                if v <= m {
                    violations.push(Violation {
                        parameter: format!("b[{l}]"),
                        reason: format!("{v} lies in {{{m}, {}, ...}}", m - 1.0),
                    });
                }
            }
        }
    } else {
        let mut pole = |name: String, z: C64| {
            if is_nonpositive_integer(z) {
                violations.push(Violation { parameter: name, reason: format!("gamma pole at {z}") });
            }
        };
        for (l, &a) in params.a.iter().enumerate() {
            pole(format!("a[{l}]"), a);
            pole(format!("a[{l}] - m"), a - m);
        }
        for (l, &b) in params.b.iter().enumerate() {
            pole(format!("b[{l}] - m"), b - m);
        }
    }
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn rising_factorial_examples() {
        assert_eq!(rising_factorial(c(2.0), 3), c(24.0));
        assert_eq!(rising_factorial(C64::new(0.3, -1.2), 0), c(1.0));
        assert_eq!(rising_factorial(c(1.0), 6), c(720.0));
    }

    #[test]
    fn rising_factorial_gamma_examples() {
        assert!((rising_factorial_gamma(c(2.0), 3.0).unwrap() - 24.0).norm() < 1e-12);
        // Γ(1.5) = √π/2
        let v = rising_factorial_gamma(c(1.0), 0.5).unwrap();
        assert!((v.re - 0.886_226_925_452_758_013_65).abs() < 1e-14);
        assert!((rising_factorial_gamma(c(0.5), 1.0).unwrap() - 0.5).norm() < 1e-14);
        assert!(matches!(rising_factorial_gamma(c(-2.0), 0.5), Err(Error::GammaPole(_))));
        assert!(matches!(rising_factorial_gamma(c(0.5), -1.5), Err(Error::GammaPole(_))));
    }

    #[test]
    fn rho_examples() {
        let empty = ParameterVectors::real(&[], &[]).unwrap();
        assert_eq!(rho(&empty, 5.0).unwrap(), c(1.0));
        let p = ParameterVectors::real(&[2.0], &[3.0]).unwrap();
        assert!((rho(&p, 2.0).unwrap() - 0.5).norm() < 1e-15);
        // Γ(2)/Γ(1.5)
        let p = ParameterVectors::real(&[1.5], &[]).unwrap();
        assert!((rho(&p, 0.5).unwrap().re - 1.128_379_167_095_512_573_9).abs() < 1e-13);
    }

    #[test]
    fn shift_examples() {
        let p = ParameterVectors::real(&[3.0], &[5.0]).unwrap();
        assert_eq!(shift_parameters(&p, 1.0), ParameterVectors::real(&[2.0], &[4.0]).unwrap());
        let e = ParameterVectors::real(&[], &[]).unwrap();
        assert_eq!(shift_parameters(&e, 2.0), e);
        let p = ParameterVectors::real(&[10.0 / 2.0], &[]).unwrap();
        assert_eq!(shift_parameters(&p, 2.0).a, vec![c(3.0)]);
    }

    #[test]
    fn validation_examples() {
        let p = ParameterVectors::real(&[2.0], &[]).unwrap();
        assert!(!validate_proposition_conditions(&p, 3.0).is_ok());
        let p = ParameterVectors::real(&[], &[1.0]).unwrap();
        assert!(!validate_proposition_conditions(&p, 3.0).is_ok());
        let p = ParameterVectors::real(&[10.5], &[7.2]).unwrap();
        assert!(validate_proposition_conditions(&p, 3.0).is_ok());
        // half-integer m: only poles matter
        let p = ParameterVectors::real(&[2.0], &[]).unwrap();
        assert!(validate_proposition_conditions(&p, 1.5).is_ok());
        let p = ParameterVectors::real(&[1.5], &[]).unwrap();
        assert!(!validate_proposition_conditions(&p, 1.5).is_ok());
        let p = ParameterVectors::real(&[], &[0.5]).unwrap();
        assert!(!validate_proposition_conditions(&p, 0.5).is_ok());
    }

    #[test]
    fn standing_conditions() {
        assert!(ParameterVectors::real(&[], &[-2.0]).is_err());
        assert!(ParameterVectors::real(&[1.0, 2.0, 3.0], &[4.0]).is_err());
        assert!(ParameterVectors::real(&[1.0, 2.0], &[4.0]).is_ok());
    }

    #[test]
    fn decomposition() {
        let s = SpikeArgument::new(0.3, 4, 2.0).unwrap();
        assert_eq!(s.decompose(), SpikeDecomposition { m: 1.0, epsilon: None });
        let s = SpikeArgument::new(0.3, 3, 2.0).unwrap();
        assert_eq!(s.decompose(), SpikeDecomposition { m: 1.0, epsilon: Some(0.5) });
        let s = SpikeArgument::new(0.3, 2, 3.0).unwrap();
        let d = s.decompose();
        assert_eq!(d.m, 0.0);
        assert!((d.epsilon.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(SpikeDecomposition::half_integer(5).m, 1.5);
        assert!(SpikeArgument::new(0.0, 2, 2.0).is_err());
    }

    fn complex_off_poles() -> impl Strategy<Value = C64> {
        (-6.0..6.0f64, -3.0..3.0f64).prop_filter("away from poles", |(re, im)| {
            im.abs() > 0.05 || *re > 0.05 || (re.fract().abs() > 0.05 && re.fract().abs() < 0.95)
        }).prop_map(|(re, im)| C64::new(re, im))
    }

    proptest! {
        #[test]
        fn gamma_route_matches_product(a in complex_off_poles(), k in 0usize..=10) {
            let prod = rising_factorial(a, k);
            let via_gamma = rising_factorial_gamma(a, k as f64).unwrap();
            prop_assert!((prod - via_gamma).norm() <= 1e-13 * prod.norm().max(1e-300) * 10.0 + 1e-300,
                "{} vs {}", prod, via_gamma);
        }

        #[test]
        fn rho_shift_identity(
            a in proptest::collection::vec(0.3..4.0f64, 0..3),
            b in proptest::collection::vec(0.3..4.0f64, 0..3),
            m in 0usize..=8,
            extra in 0usize..=8,
        ) {
            let l = m + extra;
            let params = ParameterVectors::unchecked(
                a.iter().map(|&v| c(v)).collect(),
                b.iter().map(|&v| c(v)).collect(),
            );
            let shifted = shift_parameters(&params, m as f64);
            let lhs = rho(&params, (l - m) as f64).unwrap();
            let rhs = rho(&shifted, l as f64).unwrap() / rho(&shifted, m as f64).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-11 * lhs.norm());
        }

        #[test]
        fn shift_round_trip(a in proptest::collection::vec(-5.0..5.0f64, 0..3), m in -4.0..4.0f64) {
            let params = ParameterVectors::unchecked(a.iter().map(|&v| c(v)).collect(), vec![c(1.5)]);
            let back = shift_parameters(&shift_parameters(&params, m), -m);
            for (x, y) in back.a.iter().chain(&back.b).zip(params.a.iter().chain(&params.b)) {
                prop_assert!((x - y).norm() <= 1e-14 * (1.0 + y.norm()));
            }
        }

        #[test]
        fn log_gamma_recurrence(re in -8.0..8.0f64, im in 0.1..6.0f64, sign in proptest::bool::ANY) {
            let z = C64::new(re, if sign { im } else { -im });
            let lhs = ln_gamma(z + 1.0).unwrap();
            let rhs = ln_gamma(z).unwrap() + z.ln();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
        }
    }
}
