//! Series oracle for the rank-one matrix-argument function.
//!
//! For single-row partitions the Jack polynomials come from the generating
//! function
//!
//! ```text
//! ∏_j (1 − z y_j)^(−1/α) = Σ_k c_k z^k,   C_k^α(Y) = k! c_k / (1/α)_k,
//! ```
//!
//! so the rank-one series term is `ρ_k x^k c_k / (r/α)_k`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::{rising_factorial, ParameterVectors, SpikeArgument};
use crate::EvalResult;
use crate::Method;

/// Default term budget for [`series_eval`].
pub const DEFAULT_MAX_TERMS: usize = 5000;

/// Eigenvalues of `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    y: Vec<f64>,
}

impl Spectrum {
    pub fn new(y: Vec<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::Domain("spectrum must be nonempty".into()));
        }
        if let Some(bad) = y.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Domain(format!("eigenvalue {bad} is not positive")));
        }
        Ok(Self { y })
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.y.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.y.iter().copied().fold(f64::MAX, f64::min)
    }
}

/// Single-row Jack polynomial values `C_k^α(Y)` for `k = 0..=K`.
///
/// Values are stored relative to `scale = max y_j` so that long tables do
/// not overflow: `C_k = scale^k · normalized[k]`.
#[derive(Debug, Clone)]
pub struct JackTable {
    pub alpha: f64,
    scale: f64,
    y_scaled: Vec<f64>,
    /// Generating-function coefficients of the scaled spectrum.
    coeffs: Vec<f64>,
    /// Binomial coefficients `(1/α)_n / n!`.
    binomial: Vec<f64>,
}

impl JackTable {
    fn new(y: &Spectrum, alpha: f64) -> Self {
        let scale = y.max();
        Self {
            alpha,
            scale,
            y_scaled: y.values().iter().map(|v| v / scale).collect(),
            coeffs: Vec::new(),
            binomial: Vec::new(),
        }
    }

    /// Number of tabulated degrees.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Extends the table through degree `k`.
    ///
    /// Multiplies the truncated binomial series of each factor in turn.
    pub fn extend_to(&mut self, k: usize) {
        let inv_alpha = 1.0 / self.alpha;
        while self.binomial.len() <= k {
            let n = self.binomial.len();
            let next = if n == 0 { 1.0 } else { self.binomial[n - 1] * (inv_alpha + (n - 1) as f64) / n as f64 };
            self.binomial.push(next);
        }
        let start = self.coeffs.len();
        if start > k {
            return;
        }
        let mut product = vec![0.0; k + 1];
        product[0] = 1.0;
        let mut powers = vec![0.0; k + 1];
        for &y in &self.y_scaled {
            let mut p = 1.0;
            for (i, slot) in powers.iter_mut().enumerate() {
                *slot = self.binomial[i] * p;
                p *= y;
            }
            let mut next = vec![0.0; k + 1];
            for n in 0..=k {
                let mut acc = 0.0;
                for i in 0..=n {
                    acc += product[n - i] * powers[i];
                }
                next[n] = acc;
            }
            product = next;
        }
        self.coeffs = product;
    }

    /// Generating-function coefficient `c_k` of the scaled spectrum.
    pub fn scaled_coefficient(&self, k: usize) -> f64 {
        self.coeffs[k]
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `C_k^α(Y)`; may overflow for very large `k`.
    pub fn value(&self, k: usize) -> f64 {
        let rising = rising_factorial(C64::new(1.0 / self.alpha, 0.0), k).re;
        let factorial: f64 = (1..=k).map(|i| i as f64).product();
        self.scale.powi(k as i32) * factorial * self.coeffs[k] / rising
    }

    /// `C_0 … C_K` as plain values.
    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.value(k)).collect()
    }
}

/// Tabulates `C_k^α(Y)` for the single-row partitions `(k)`, `k = 0..=K`.
pub fn jack_single_row(y: &Spectrum, alpha: f64, k_max: usize) -> JackTable {
    let mut table = JackTable::new(y, alpha);
    table.extend_to(k_max);
    table
}

/// Sums the rank-one series directly.
///
/// Rejects `p = q + 1` with `x·max y ≥ 1`, where the series diverges.
pub fn series_eval(
    params: &ParameterVectors,
    spike: &SpikeArgument,
    y: &Spectrum,
    tol: f64,
    max_terms: usize,
) -> Result<EvalResult> {
    if y.len() != spike.r {
        return Err(Error::Domain(format!("spectrum has {} entries but r = {}", y.len(), spike.r)));
    }
    if params.p() > params.q() + 1 {
        return Err(Error::Domain("p > q + 1: the series diverges".into()));
    }
    let reach = spike.x * y.max();
    if params.has_unit_radius() && reach >= 1.0 {
        return Err(Error::Domain(format!("x·max(y) = {reach} >= 1: the series diverges")));
    }
    let ratio = C64::new(spike.ratio(), 0.0);
    let mut table = JackTable::new(y, spike.alpha);
    let mut block = 64usize.min(max_terms);
    table.extend_to(block);
    let xs = spike.x * table.scale();
    // term_k = ρ_k (x·scale)^k c_k / (r/α)_k, built from its ratio recursion
    // without the c_k factor, which is applied separately.
    let mut weight = C64::new(1.0, 0.0);
    let mut sum = C64::new(0.0, 0.0);
    let mut small = 0;
    let mut last = 0.0;
    for k in 0..max_terms {
        if k >= table.len() {
            block = (block * 2).min(max_terms);
            table.extend_to(block);
        }
        let term = weight * table.scaled_coefficient(k);
        sum += term;
        last = term.norm();
        if last <= tol * sum.norm() {
            small += 1;
            if small == 3 {
                return Ok(EvalResult {
                    value: sum,
                    err_estimate: last.max(f64::EPSILON * sum.norm()),
                    method: Method::Series,
                    effort: k + 1,
                });
            }
        } else {
            small = 0;
        }
        let kf = k as f64;
        let num = params.a.iter().fold(C64::new(1.0, 0.0), |acc, &a| acc * (a + kf));
        let den = params.b.iter().fold(C64::new(1.0, 0.0), |acc, &b| acc * (b + kf));
        weight *= num / den * xs / (ratio + kf);
        if !weight.re.is_finite() || !weight.im.is_finite() {
            return Err(Error::NonConvergence("series terms overflowed".into()));
        }
    }
    Err(Error::NonConvergence(format!(
        "series not converged after {max_terms} terms (last term {last:e})"
    )))
}
