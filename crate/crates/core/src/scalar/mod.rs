//! Scalar generalized hypergeometric kernels `pFq(a, b; z)` at complex `z`.
//!
//! Closed forms cover `0F0` and `1F0`; `1F1` goes through Kummer's
//! transformation, `2F1` through the classical transformation ladder, and
//! every other case through the defining series. Arguments beyond the reach
//! of those methods are handled by [`holonomic::Continuation`].

pub mod gauss;
pub mod holonomic;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::ParameterVectors;

pub use gauss::{gauss2f1_continued, gauss2f1_route, GaussRoute};
pub use holonomic::Continuation;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Default relative tolerance for kernel evaluations.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Term cap for the defining series.
pub const MAX_TERMS: usize = 10_000;

/// Largest `|z|` at which the `0F1` series is summed directly.
const SERIES_0F1: f64 = 16.0;
/// Largest `|z|` at which the Kummer-stabilized `1F1` series is used.
const SERIES_1F1: f64 = 40.0;
/// Largest `|z|` for other entire kernels.
const SERIES_ENTIRE: f64 = 4.0;
/// Largest `|z|` for other kernels with a unit radius of convergence.
const SERIES_UNIT: f64 = 0.6;
/// Smallest `|z|` for the convergent expansion about infinity (`p = q + 1`).
const LARGE_UNIT: f64 = 2.0;
/// Smallest `|z|` for the asymptotic expansion about infinity (`p = q`).
const LARGE_ASYMPTOTIC: f64 = 50.0;
/// Smallest `|z|` at which the Bessel expansion of `0F1` is tried.
const ASYMPTOTIC_0F1: f64 = 400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelCase {
    F00,
    F01,
    F10,
    F11,
    F21,
    Generic,
}

impl KernelCase {
    /// `(p, q)` for the named cases; `None` for [`KernelCase::Generic`].
    pub fn orders(self) -> Option<(usize, usize)> {
        match self {
            KernelCase::F00 => Some((0, 0)),
            KernelCase::F01 => Some((0, 1)),
            KernelCase::F10 => Some((1, 0)),
            KernelCase::F11 => Some((1, 1)),
            KernelCase::F21 => Some((2, 1)),
            KernelCase::Generic => None,
        }
    }

    pub fn from_orders(p: usize, q: usize) -> Self {
        match (p, q) {
            (0, 0) => KernelCase::F00,
            (0, 1) => KernelCase::F01,
            (1, 0) => KernelCase::F10,
            (1, 1) => KernelCase::F11,
            (2, 1) => KernelCase::F21,
            _ => KernelCase::Generic,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelCase::F00 => "0F0",
            KernelCase::F01 => "0F1",
            KernelCase::F10 => "1F0",
            KernelCase::F11 => "1F1",
            KernelCase::F21 => "2F1",
            KernelCase::Generic => "generic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::F00, Self::F01, Self::F10, Self::F11, Self::F21]
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
    }
}

/// A scalar kernel: parameters plus the case tag that selects the method.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarKernel {
    pub params: ParameterVectors,
    pub case: KernelCase,
}

impl ScalarKernel {
    pub fn new(params: ParameterVectors) -> Self {
        let case = KernelCase::from_orders(params.p(), params.q());
        Self { params, case }
    }

    /// Uses an explicit tag, which must agree with `(p, q)`.
    pub fn with_case(params: ParameterVectors, case: KernelCase) -> Result<Self> {
        match case.orders() {
            Some(pq) if pq != (params.p(), params.q()) => Err(Error::Domain(format!(
                "case {} needs (p, q) = {:?}, got ({}, {})",
                case.name(),
                pq,
                params.p(),
                params.q()
            ))),
            None if KernelCase::from_orders(params.p(), params.q()) != KernelCase::Generic => {
                Err(Error::Domain("generic tag used for a named case".into()))
            }
            _ => Ok(Self { params, case }),
        }
    }

    /// `|z|` up to which [`scalar_pfq`] evaluates without continuation.
    pub fn direct_radius(&self) -> f64 {
        match self.case {
            KernelCase::F00 | KernelCase::F10 | KernelCase::F21 => f64::INFINITY,
            KernelCase::F01 => SERIES_0F1,
            KernelCase::F11 => SERIES_1F1,
            KernelCase::Generic if self.params.has_unit_radius() => SERIES_UNIT,
            KernelCase::Generic => SERIES_ENTIRE,
        }
    }

    fn continuation_start(&self, z: C64) -> C64 {
        let r = if self.params.has_unit_radius() {
            SERIES_UNIT
        } else {
            SERIES_ENTIRE.min(self.direct_radius())
        };
        z * (r / z.norm())
    }
}

/// Sums the defining series from index `start`, returning the partial sum
/// and the number of terms used.
///
/// Stops once three consecutive terms fall below `tol·|partial sum|`.
pub fn series_sum(
    params: &ParameterVectors,
    z: C64,
    start: usize,
    tol: f64,
    max_terms: usize,
) -> Result<(C64, usize)> {
    series_sum_with_magnitude(params, z, start, tol, max_terms).map(|(sum, terms, _)| (sum, terms))
}

/// Like [`series_sum`], also returning `Σ|term|`, whose ratio to `|sum|`
/// measures the cancellation in the sum.
pub fn series_sum_with_magnitude(
    params: &ParameterVectors,
    z: C64,
    start: usize,
    tol: f64,
    max_terms: usize,
) -> Result<(C64, usize, f64)> {
    if params.has_unit_radius() && z.norm() >= 1.0 && !terminates(params) {
        return Err(Error::Domain(format!("series diverges at |z| = {} >= 1", z.norm())));
    }
    if params.p() > params.q() + 1 && !terminates(params) {
        return Err(Error::Domain("series with p > q + 1 diverges".into()));
    }
    let mut term = ONE;
    for k in 0..start {
        term *= step_ratio(params, k, z);
    }
    let mut sum = C64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    let mut small = 0;
    for k in start..start + max_terms {
        sum += term;
        magnitude += term.norm();
        if term.norm() <= tol * sum.norm() || term == C64::new(0.0, 0.0) {
            small += 1;
            if small == 3 {
                return Ok((sum, k - start + 1, magnitude));
            }
        } else {
            small = 0;
        }
        term *= step_ratio(params, k, z);
        if !term.re.is_finite() {
            return Err(Error::NonConvergence("series terms overflowed".into()));
        }
    }
    Err(Error::NonConvergence(format!("series did not converge in {max_terms} terms at z = {z}")))
}

/// `t_{k+1} / t_k` for the series terms `t_k = ρ_k z^k / k!`.
fn step_ratio(params: &ParameterVectors, k: usize, z: C64) -> C64 {
    let kf = k as f64;
    let num = params.a.iter().fold(ONE, |acc, &a| acc * (a + kf));
    let den = params.b.iter().fold(ONE, |acc, &b| acc * (b + kf));
    num / den * z / (kf + 1.0)
}

fn terminates(params: &ParameterVectors) -> bool {
    params.a.iter().any(|&a| crate::gamma::is_nonpositive_integer(a))
}

/// The first `count` coefficients `ρ_k / k!` of the defining series.
pub fn series_coefficients(params: &ParameterVectors, count: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(count);
    let mut t = ONE;
    for k in 0..count {
        out.push(t);
        t *= step_ratio(params, k, ONE);
    }
    out
}

fn on_cut(z: C64) -> bool {
    z.im == 0.0 && z.re >= 1.0
}

/// `pFq(a, b; z)` to relative accuracy `tol`.
pub fn scalar_pfq(kernel: &ScalarKernel, z: C64, tol: f64) -> Result<C64> {
    let params = &kernel.params;
    if params.has_unit_radius() && on_cut(z) && !terminates(params) {
        return Err(Error::BranchCut(format!("{z}")));
    }
    if z == C64::new(0.0, 0.0) {
        return Ok(ONE);
    }
    if kernel.case == KernelCase::F01 {
        if let Some(v) = bessel_0f1(params.b[0], z) {
            return Ok(v);
        }
    }
    match kernel.case {
        KernelCase::F00 => Ok(z.exp()),
        KernelCase::F10 => Ok(pow1m(z, -params.a[0])),
        KernelCase::F11 if z.norm() <= SERIES_1F1 => kummer_stabilize(params.a[0], params.b[0], z),
        KernelCase::F21 => gauss2f1_continued(params.a[0], params.a[1], params.b[0], z),
        _ if z.norm() <= kernel.direct_radius() || terminates(params) => {
            series_sum(params, z, 0, tol.min(1e-14), MAX_TERMS).map(|(v, _)| v)
        }
        _ => match large_argument(params, z) {
            Some(v) => Ok(v),
            None => Continuation::start(params, kernel.continuation_start(z))?.eval(z),
        },
    }
}

/// `(1 − z)^e` on the principal branch.
pub fn pow1m(z: C64, e: C64) -> C64 {
    let w = ONE - z;
    // Keep the side of the cut selected by the sign of a zero imaginary part.
    let w = C64::new(w.re, if z.im == 0.0 { -z.im } else { w.im });
    (e * w.ln()).exp()
}

/// `1F1(a; b; z)`, applying Kummer's transformation `e^z 1F1(b − a; b; −z)`
/// when `Re z < 0`.
pub fn kummer_stabilize(a: C64, b: C64, z: C64) -> Result<C64> {
    if crate::gamma::is_nonpositive_integer(b) {
        return Err(Error::GammaPole(format!("1F1 denominator {b}")));
    }
    if z.re < 0.0 {
        let params = ParameterVectors::unchecked(vec![b - a], vec![b]);
        let (v, _) = series_sum(&params, -z, 0, 1e-16, MAX_TERMS)?;
        Ok(z.exp() * v)
    } else {
        let params = ParameterVectors::unchecked(vec![a], vec![b]);
        Ok(series_sum(&params, z, 0, 1e-16, MAX_TERMS)?.0)
    }
}

/// `0F1(; b; z)` for large `|z|` with `Re z ≤ 0` from the Hankel expansion
/// of the Bessel function: `0F1(; ν+1; −w²) = Γ(ν+1) w^{−ν} J_ν(2w)`.
///
/// Returns `None` outside that region or when the expansion cannot reach
/// full precision.
pub fn bessel_0f1(b: C64, z: C64) -> Option<C64> {
    let nu = b - 1.0;
    if z.re > 0.0 || z.norm() < ASYMPTOTIC_0F1 || z.norm().sqrt() < 20.0 + nu.norm_sqr() {
        return None;
    }
    let w = (-z).sqrt();
    let big = 2.0 * w;
    let mu = 4.0 * nu * nu;
    let mut p = ONE;
    let mut q = C64::new(0.0, 0.0);
    let mut term = ONE;
    let mut previous = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (8.0 * k as f64 * big);
        let size = term.norm();
        if size > previous {
            return None;
        }
        previous = size;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += sign * term;
        } else {
            p += sign * term;
        }
        if size <= 1e-17 {
            let omega = big - (0.5 * nu + 0.25) * std::f64::consts::PI;
            let j = (2.0 / (std::f64::consts::PI * big)).sqrt() * (p * omega.cos() - q * omega.sin());
            let gamma = crate::gamma::gamma(b).ok()?;
            return Some(gamma * (-nu * w.ln()).exp() * j);
        }
    }
    None
}

/// `pFq(a; b; z)` for `p ≥ q` from its expansion about infinity,
///
/// ```text
/// Σ_i [∏_j Γ(b_j)/Γ(b_j − a_i)] [∏_{k≠i} Γ(a_k − a_i)/Γ(a_k)] (−z)^(−a_i)
///     · q+1F(p−1)(a_i, 1 + a_i − b; 1 + a_i − a_{k≠i}; ±1/z),
/// ```
///
/// with `+1/z` for `p = q + 1` (a convergent series for `|z| > 1`) and
/// `−1/z` for `p = q` (an asymptotic series, used only for `Re z ≪ 0`
/// where the exponentially small companion term is negligible).
///
/// Returns `None` when the expansion does not apply or would be
/// inaccurate, including when two `a_i` differ by an integer.
pub fn large_argument(params: &ParameterVectors, z: C64) -> Option<C64> {
    let (p, q) = (params.p(), params.q());
    let unit = p == q + 1;
    if p == 0 || !(unit || p == q) {
        return None;
    }
    if unit {
        if z.norm() < LARGE_UNIT {
            return None;
        }
    } else {
        let size = z.norm();
        let growth = params.a.iter().map(|a| a.re).sum::<f64>() - params.b.iter().map(|b| b.re).sum::<f64>();
        // e^z z^(Σa−Σb) must be far below the algebraic part ~ |z|^(−max Re a).
        let worst = params.a.iter().map(|a| a.re).fold(f64::MIN, f64::max);
        if size < LARGE_ASYMPTOTIC || z.re + (growth + worst).max(0.0) * size.ln() > -45.0 {
            return None;
        }
    }
    for (i, &ai) in params.a.iter().enumerate() {
        for (k, &ak) in params.a.iter().enumerate() {
            let d = ak - ai;
            if k != i && d.im.abs() < 1e-9 && (d.re - d.re.round()).abs() < 1e-6 {
                return None;
            }
        }
    }
    let w = if unit { ONE / z } else { -ONE / z };
    let log_mz = (-z).ln();
    let mut total = C64::new(0.0, 0.0);
    for (i, &ai) in params.a.iter().enumerate() {
        let mut coef = ONE;
        for &b in &params.b {
            coef *= crate::gamma::gamma(b).ok()? * crate::gamma::rgamma(b - ai);
        }
        for (k, &ak) in params.a.iter().enumerate() {
            if k != i {
                coef *= crate::gamma::gamma(ak - ai).ok()? * crate::gamma::rgamma(ak);
            }
        }
        if coef == C64::new(0.0, 0.0) {
            continue;
        }
        let mut num = vec![ai];
        num.extend(params.b.iter().map(|&b| 1.0 + ai - b));
        let den: Vec<C64> = params.a.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, &ak)| 1.0 + ai - ak).collect();
        let mut term = ONE;
        let mut sum = ONE;
        let mut previous = f64::INFINITY;
        let mut converged = false;
        for n in 0..2000 {
            let nf = n as f64;
            let ratio = num.iter().fold(ONE, |acc, &v| acc * (v + nf)) / den.iter().fold(ONE, |acc, &v| acc * (v + nf))
                / (nf + 1.0);
            term *= ratio * w;
            if term == C64::new(0.0, 0.0) {
                converged = true;
                break;
            }
            let size = term.norm();
            if !unit && size > previous {
                return None;
            }
            previous = size;
            sum += term;
            if size <= 1e-17 * sum.norm() {
                converged = true;
                break;
            }
        }
        if !converged {
            return None;
        }
        total += coef * (-ai * log_mz).exp() * sum;
    }
    Some(total)
}

/// Evaluates one kernel along a path of nearby arguments, reusing the
/// continuation state between calls.
#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    kernel: ScalarKernel,
    tol: f64,
    continuation: Option<Continuation>,
}

impl KernelEvaluator {
    pub fn new(kernel: ScalarKernel, tol: f64) -> Self {
        Self { kernel, tol, continuation: None }
    }

    pub fn kernel(&self) -> &ScalarKernel {
        &self.kernel
    }

    pub fn eval(&mut self, z: C64) -> Result<C64> {
        if self.kernel.case == KernelCase::F01 {
            if let Some(v) = bessel_0f1(self.kernel.params.b[0], z) {
                return Ok(v);
            }
        }
        let direct = self.kernel.direct_radius();
        if z.norm() <= direct || terminates(&self.kernel.params) {
            return scalar_pfq(&self.kernel, z, self.tol);
        }
        if self.kernel.params.has_unit_radius() && on_cut(z) {
            return Err(Error::BranchCut(format!("{z}")));
        }
        if let Some(v) = large_argument(&self.kernel.params, z) {
            return Ok(v);
        }
        let reusable = self.continuation.as_ref().is_some_and(|c| {
            let guard = if self.kernel.params.has_unit_radius() { SERIES_UNIT } else { SERIES_ENTIRE };
            holonomic::segment_distance_to_origin(c.center(), z) >= 0.5 * guard
                && !(self.kernel.params.has_unit_radius() && crosses_cut(c.center(), z))
        });
        if !reusable {
            self.continuation = Some(Continuation::start(&self.kernel.params, self.kernel.continuation_start(z))?);
        }
        self.continuation.as_mut().expect("continuation initialized").eval(z)
    }
}

/// Whether the segment `[p, q]` passes within a small distance of `[1, ∞)`
/// or through the half-line.
fn crosses_cut(p: C64, q: C64) -> bool {
    if (p.im > 0.0) == (q.im > 0.0) && p.im != 0.0 && q.im != 0.0 {
        return false;
    }
    let t = if p.im == q.im { 0.0 } else { p.im / (p.im - q.im) };
    let x = p.re + t * (q.re - p.re);
    x > 0.8
}
