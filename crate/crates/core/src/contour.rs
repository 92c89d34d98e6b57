//! Contour-integral evaluation of the rank-one matrix-argument function.
//!
//! With `r/α = m + 1` an integer,
//!
//! ```text
//! pFq^α(a, b; x, Y) = Γ(m+1) / (x^m ρ_m(a−m, b−m))
//!                     · (1/2πi) ∮ pFq(a−m, b−m; x s) Δ_y(s) ds,
//! Δ_y(s) = ∏_j (s − y_j)^(−1/α).
//! ```
//!
//! For `r/α = m + ε`, `0 < ε < 1`, the kernel becomes
//! `s^(ε−1) p+1Fq+1(a−m, 1; b−m, ε; x s)` with prefactor `(ε)_m` in place of
//! `Γ(m+1)`. In the real case `α = 2` the integer formula also holds for odd
//! `r` with the half-integer `m = r/2 − 1`.
//!
//! When the integrand is single valued (integer `r/α`) the contour is a
//! closed circle and the periodic trapezoidal rule is used. Otherwise the
//! integrand has cuts along the negative real axis and the contour is a
//! keyhole: a lower leg from `−∞`, an arc through the right vertex and an
//! upper leg back to `−∞`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gamma::ln_gamma_real;
use crate::jack::Spectrum;
use crate::params::{
    rho, rising_factorial_gamma, shift_parameters, validate_proposition_conditions, ParameterVectors,
    SpikeArgument, SpikeDecomposition,
};
use crate::result::{EvalResult, Method};
use crate::scalar::{series_coefficients, series_sum_with_magnitude, KernelEvaluator, ScalarKernel, MAX_TERMS};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Gauss–Legendre order of one panel.
const GL_ORDER: usize = 16;
/// Deepest bisection of a single panel.
const MAX_DEPTH: usize = 48;
/// Most geometric panels along a leg.
const MAX_LEG_PANELS: usize = 160;
/// Relative size of the rounding floor for a quadrature sum `Σ|f w|`.
const ROUNDING: f64 = 1e-14;
/// Largest `|x s|` at which the kernel tail is summed term by term rather
/// than formed as a difference.
const TAIL_SERIES_RADIUS: f64 = 0.9;

/// Accuracy target and work limits for one contour evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Relative tolerance on the integral.
    pub tol: f64,
    /// Maximum number of integrand evaluations.
    pub max_nodes: usize,
    /// Multiplies the radius of the circle or arc, keeping the right vertex.
    pub radius_scale: f64,
    /// Multiplies the distance of the keyhole legs from the real axis.
    pub leg_height_scale: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self { tol: 1e-12, max_nodes: 4_000_000, radius_scale: 1.0, leg_height_scale: 1.0 }
    }
}

impl QuadratureSettings {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// Shape of the integration path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    ClosedCircle,
    Keyhole,
}

/// An integration path around `0` and the spectrum, traversed
/// counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSpec {
    pub geometry: Geometry,
    /// Centre of the circle (or of the arc) on the real axis.
    pub center: f64,
    pub radius: f64,
    /// Rightmost real point of the path.
    pub right_vertex: f64,
    /// Distance of the legs from the real axis; zero for a closed circle.
    pub leg_height: f64,
    /// Leftmost abscissa the legs may reach; the adaptive rule usually stops
    /// much earlier.
    pub truncation_abscissa: f64,
    pub budget: QuadratureSettings,
}

impl ContourSpec {
    /// Real part where the arc meets the legs.
    pub fn attach_point(&self) -> f64 {
        let delta = (self.leg_height / self.radius).asin();
        self.center - self.radius * delta.cos()
    }

    /// The nodes and weights of the `n`-point trapezoidal rule on the
    /// circle, scaled so that `Σ f(s) w ≈ (1/2πi) ∮ f(s) ds`.
    pub fn circle_nodes(&self, n: usize) -> Vec<(C64, C64)> {
        (0..n)
            .map(|k| {
                let e = C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
                (self.center + self.radius * e, self.radius * e / n as f64)
            })
            .collect()
    }

    /// Whether the closed path (or the arc with its legs) stays clear of `z`.
    fn encloses(&self, z: f64) -> bool {
        (z - self.center).abs() < self.radius
    }
}

/// Picks the integration path.
///
/// The path is a closed circle when the integrand is single valued, which
/// happens exactly when `r/α` is an integer, and a keyhole otherwise.
pub fn build_contour(
    y: &Spectrum,
    spike: &SpikeArgument,
    params: &ParameterVectors,
    budget: QuadratureSettings,
) -> Result<ContourSpec> {
    let y_max = y.max();
    let unit = params.has_unit_radius();
    if unit && spike.x * y_max >= 1.0 {
        return Err(Error::Domain(format!(
            "x·max(y) = {} >= 1: no contour separates the spectrum from the kernel cut",
            spike.x * y_max
        )));
    }
    if !(budget.radius_scale >= 1.0 && budget.leg_height_scale > 0.0) {
        return Err(Error::Domain("radius scale must be at least 1 and leg height scale positive".into()));
    }
    let right_vertex = if unit {
        0.5 * (y_max + (1.0 / spike.x).min(10.0 * y_max))
    } else {
        1.5 * y_max + 1.0
    };
    let gap = right_vertex - y_max;
    let left = y.min().min(0.0) - gap;
    let radius = 0.5 * (right_vertex - left) * budget.radius_scale;
    let center = right_vertex - radius;
    let single_valued = spike.decompose().epsilon.is_none();
    let (geometry, leg_height, truncation_abscissa) = if single_valued {
        (Geometry::ClosedCircle, 0.0, center - radius)
    } else {
        // Legs decay like |s|^(−1−Re a) when the kernel decays algebraically.
        let algebraic = params.p() >= 1 && params.p() >= params.q();
        if let Some(a) = params.a.iter().find(|a| algebraic && a.re <= 0.0) {
            return Err(Error::Domain(format!(
                "numerator parameter {a} has Re a <= 0: the keyhole integral diverges"
            )));
        }
        let spread = y_max - y.min();
        let h = (0.05f64.max(0.01 * spread) * budget.leg_height_scale).min(0.5 * radius);
        (Geometry::Keyhole, h, -f64::MAX.sqrt())
    };
    let spec = ContourSpec { geometry, center, radius, right_vertex, leg_height, truncation_abscissa, budget };
    debug_assert!(spec.encloses(0.0) && y.values().iter().all(|&v| spec.encloses(v)));
    Ok(spec)
}

/// A keyhole around `0` and the spectrum, used for entire kernels.
pub fn keyhole_contour(y: &Spectrum, budget: QuadratureSettings) -> ContourSpec {
    let right_vertex = 1.5 * y.max() + 1.0;
    let left = y.min().min(0.0) - (right_vertex - y.max());
    let radius = 0.5 * (right_vertex - left);
    let spread = y.max() - y.min();
    ContourSpec {
        geometry: Geometry::Keyhole,
        center: right_vertex - radius,
        radius,
        right_vertex,
        leg_height: 0.05f64.max(0.01 * spread).min(0.5 * radius),
        truncation_abscissa: -f64::MAX.sqrt(),
        budget,
    }
}

/// `Δ_y(s) = exp(−(1/α) Σ Log(s − y_j))` with principal logarithms.
///
/// Fails when `s` lies on one of the cuts `(−∞, y_j]`.
pub fn weight_delta_y(s: C64, y: &Spectrum, alpha: f64) -> Result<C64> {
    if s.im == 0.0 && s.re <= y.max() {
        return Err(Error::BranchCut(format!("s = {s} lies on a cut of the weight")));
    }
    Ok(delta_unchecked(s, y.values(), alpha))
}

fn delta_unchecked(s: C64, y: &[f64], alpha: f64) -> C64 {
    let log: C64 = y.iter().map(|&v| (s - v).ln()).sum();
    (-log / alpha).exp()
}

/// Part of the path an integrand evaluation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    Circle,
    Arc,
    LowerLeg,
    UpperLeg,
}

/// A function integrated along a contour.
///
/// The segment tag lets stateful integrands keep separate evaluation state
/// for each piece of the path.
pub trait Integrand {
    fn eval(&mut self, segment: Segment, s: C64) -> Result<C64>;

    /// True when `f(conj s) = conj f(s)`; the quadrature then evaluates
    /// only the upper half of the contour.
    fn conjugate_symmetric(&self) -> bool {
        false
    }
}

impl<F: FnMut(C64) -> C64> Integrand for F {
    fn eval(&mut self, _segment: Segment, s: C64) -> Result<C64> {
        Ok(self(s))
    }
}

/// Result of [`quadrature`]: the value of `(1/2πi) ∫ f(s) ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOutcome {
    pub value: C64,
    pub error: f64,
    pub nodes: usize,
    /// Leftmost abscissa reached by the legs (keyhole only).
    pub truncation: Option<f64>,
}

/// Integrates `f` along the contour, returning `(1/2πi) ∫ f(s) ds`.
pub fn quadrature(contour: &ContourSpec, f: &mut dyn Integrand) -> Result<QuadratureOutcome> {
    match contour.geometry {
        Geometry::ClosedCircle => trapezoid(contour, f),
        Geometry::Keyhole => keyhole(contour, f),
    }
}

fn trapezoid(contour: &ContourSpec, f: &mut dyn Integrand) -> Result<QuadratureOutcome> {
    let budget = contour.budget;
    let symmetric = f.conjugate_symmetric();
    let node = |k: usize, n: usize| C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
    // Contribution of node k out of n; with symmetry a node in the open
    // upper half stands for itself and its mirror image.
    let mut term = |k: usize, n: usize| -> Result<C64> {
        let e = node(k, n);
        let v = f.eval(Segment::Circle, contour.center + contour.radius * e)? * e;
        Ok(if !symmetric {
            v
        } else if k == 0 || 2 * k == n {
            C64::new(v.re, 0.0)
        } else {
            C64::new(2.0 * v.re, 0.0)
        })
    };
    let mut n = 16;
    let mut sum = ZERO;
    let mut abs = 0.0;
    let mut evaluations = 0;
    let first = if symmetric { n / 2 + 1 } else { n };
    for k in 0..first {
        let v = term(k, n)?;
        sum += v;
        abs += v.norm();
        evaluations += 1;
    }
    let mut previous = sum * contour.radius / n as f64;
    let mut diffs: Vec<f64> = Vec::new();
    loop {
        let mut added = ZERO;
        let last = if symmetric { n } else { 2 * n };
        for k in (1..last).step_by(2) {
            let v = term(k, 2 * n)?;
            added += v;
            abs += v.norm();
            evaluations += 1;
        }
        sum += added;
        n *= 2;
        let current = sum * contour.radius / n as f64;
        let floor = ROUNDING * abs * contour.radius / n as f64;
        let diff = (current - previous).norm();
        if !(current.re.is_finite() && current.im.is_finite()) {
            return Err(Error::NonConvergence("integrand is not finite on the circle".into()));
        }
        if n >= 64 && (diff <= budget.tol * current.norm() || diff <= floor) {
            let error = diff.max(floor);
            return Ok(QuadratureOutcome { value: current, error, nodes: evaluations, truncation: None });
        }
        diffs.push(diff);
        // Changes that stop shrinking are rounding noise in the integrand:
        // the rule has converged as far as the evaluations allow.
        if let [.., d0, d1, d2, d3] = diffs[..] {
            if n >= 256 && d1.max(d2).max(d3) > 0.5 * d0 {
                let error = d1.max(d2).max(d3);
                return Ok(QuadratureOutcome { value: current, error, nodes: evaluations, truncation: None });
            }
        }
        if 2 * n > budget.max_nodes {
            return Err(Error::NonConvergence(format!(
                "trapezoidal rule not converged with {n} nodes (change {diff:e})"
            )));
        }
        previous = current;
    }
}

fn gauss_legendre() -> &'static ([f64; GL_ORDER], [f64; GL_ORDER]) {
    static RULE: OnceLock<([f64; GL_ORDER], [f64; GL_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut nodes = [0.0; GL_ORDER];
        let mut weights = [0.0; GL_ORDER];
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// One real parameter interval of a path, with the map to the integrand
/// value times the path derivative.
struct Panel {
    lo: f64,
    hi: f64,
    value: C64,
    abs: f64,
}

/// Tracks node counts and the accumulated error of adaptive panels.
struct Adaptive<'a> {
    f: &'a mut dyn Integrand,
    nodes: usize,
    max_nodes: usize,
    error: f64,
    abs: f64,
}

impl Adaptive<'_> {
    fn rule(&mut self, g: &dyn Fn(&mut dyn Integrand, f64) -> Result<C64>, lo: f64, hi: f64) -> Result<Panel> {
        let (x, w) = gauss_legendre();
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut value = ZERO;
        let mut abs = 0.0;
        for i in 0..GL_ORDER {
            let v = g(&mut *self.f, mid + half * x[i])? * (w[i] * half);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonConvergence("integrand is not finite on the contour".into()));
            }
            value += v;
            abs += v.norm();
        }
        self.nodes += GL_ORDER;
        if self.nodes > self.max_nodes {
            return Err(Error::NonConvergence(format!("quadrature exceeded {} nodes", self.max_nodes)));
        }
        Ok(Panel { lo, hi, value, abs })
    }

    /// Integrates over `[lo, hi]`, bisecting until halves agree with their
    /// parent to within `eps` times the fraction of the interval.
    fn integrate(
        &mut self,
        g: &dyn Fn(&mut dyn Integrand, f64) -> Result<C64>,
        lo: f64,
        hi: f64,
        eps: f64,
    ) -> Result<C64> {
        let width = hi - lo;
        let mut total = ZERO;
        let mut stack = vec![(self.rule(g, lo, hi)?, 0usize)];
        while let Some((panel, depth)) = stack.pop() {
            let mid = 0.5 * (panel.lo + panel.hi);
            let left = self.rule(g, panel.lo, mid)?;
            let right = self.rule(g, mid, panel.hi)?;
            let refined = left.value + right.value;
            let diff = (refined - panel.value).norm();
            let share = eps * (panel.hi - panel.lo) / width;
            let floor = ROUNDING * (left.abs + right.abs);
            if diff <= share || diff <= floor || depth >= MAX_DEPTH {
                total += refined;
                self.error += diff.min(share.max(floor)) + floor;
                self.abs += left.abs + right.abs;
                if depth >= MAX_DEPTH && diff > share.max(floor) {
                    self.error += diff;
                }
            } else {
                // Right first so the left half is processed next: evaluation
                // then moves monotonically along the path.
                stack.push((right, depth + 1));
                stack.push((left, depth + 1));
            }
        }
        Ok(total)
    }
}

fn keyhole(contour: &ContourSpec, f: &mut dyn Integrand) -> Result<QuadratureOutcome> {
    let budget = contour.budget;
    let (c, radius, h) = (contour.center, contour.radius, contour.leg_height);
    let theta_max = PI - (h / radius).asin();
    let t_attach = contour.attach_point();
    let symmetric = f.conjugate_symmetric();
    // With symmetry the lower half of the arc adds the mirror image of the
    // upper half, leaving twice the imaginary part.
    let arc = move |f: &mut dyn Integrand, theta: f64| -> Result<C64> {
        let e = C64::from_polar(1.0, theta);
        let v = f.eval(Segment::Arc, c + radius * e)? * C64::new(0.0, radius) * e;
        Ok(if symmetric { C64::new(0.0, 2.0 * v.im) } else { v })
    };
    // Legs in the variable w with t = t_attach − w²: the lower leg runs
    // left to right and the upper leg right to left.
    let legs = move |f: &mut dyn Integrand, w: f64| -> Result<C64> {
        let t = t_attach - w * w;
        let upper = f.eval(Segment::UpperLeg, C64::new(t, h))?;
        let lower = if symmetric { upper.conj() } else { f.eval(Segment::LowerLeg, C64::new(t, -h))? };
        Ok((lower - upper) * (2.0 * w))
    };
    let theta_lo = if symmetric { 0.0 } else { -theta_max };

    let mut adaptive = Adaptive { f, nodes: 0, max_nodes: budget.max_nodes, error: 0.0, abs: 0.0 };
    // A coarse pass over the arc sets the absolute accuracy target.
    let mut coarse = ZERO;
    let mut coarse_abs = 0.0;
    let pieces = 8;
    for k in 0..pieces {
        let lo = theta_lo + (theta_max - theta_lo) * k as f64 / pieces as f64;
        let hi = lo + (theta_max - theta_lo) / pieces as f64;
        let p = adaptive.rule(&arc, lo, hi)?;
        coarse += p.value;
        coarse_abs += p.abs;
    }
    let eps = (budget.tol * coarse.norm()).max(ROUNDING * coarse_abs);
    adaptive.nodes = 0;

    let mut total = adaptive.integrate(&arc, theta_lo, theta_max, eps)?;

    let mut w_lo = 0.0;
    let mut w_hi = radius.sqrt().max(h.sqrt());
    let mut history: Vec<f64> = Vec::new();
    let mut quiet = 0;
    let mut tail = f64::INFINITY;
    for _ in 0..MAX_LEG_PANELS {
        let part = adaptive.integrate(&legs, w_lo, w_hi, eps)?;
        total += part;
        history.push(part.norm());
        let n = history.len();
        tail = if history[n - 1] == 0.0 {
            0.0
        } else if n >= 3 {
            let ratio = (history[n - 1] / history[n - 2]).max(history[n - 2] / history[n - 3]);
            if ratio < 0.95 {
                history[n - 1] * ratio / (1.0 - ratio)
            } else {
                f64::INFINITY
            }
        } else {
            f64::INFINITY
        };
        quiet = if tail <= eps { quiet + 1 } else { 0 };
        if quiet >= 3 || history[n - 1] == 0.0 && n >= 3 {
            let two_pi_i = C64::new(0.0, 2.0 * PI);
            let floor = ROUNDING * adaptive.abs;
            return Ok(QuadratureOutcome {
                value: total / two_pi_i,
                error: (adaptive.error + tail + floor) / (2.0 * PI),
                nodes: adaptive.nodes,
                truncation: Some(t_attach - w_hi * w_hi),
            });
        }
        w_lo = w_hi;
        w_hi *= 2.0;
        if t_attach - w_hi * w_hi < contour.truncation_abscissa {
            break;
        }
    }
    Err(Error::NonConvergence(format!("leg integrals did not decay (tail estimate {tail:e})")))
}

/// The contour integrand `s^(ε−1) K(x s) Δ_y(s)`, where `K` is a kernel
/// with its first `drop` Taylor terms removed.
///
/// Those terms integrate to zero around the contour, and removing them
/// keeps the integral free of cancellation when `x` is small.
struct KernelIntegrand<'a> {
    evaluators: [KernelEvaluator; 4],
    params: ParameterVectors,
    leading: Vec<C64>,
    x: f64,
    y: &'a [f64],
    alpha: f64,
    power: Option<f64>,
}

impl KernelIntegrand<'_> {
    /// The kernel minus its first `drop` Taylor terms, taken from the
    /// direct sum or from `K − P`, whichever cancels less.
    fn tail_kernel(&mut self, segment: Segment, z: C64) -> Result<C64> {
        let drop = self.leading.len();
        let index = segment as usize;
        if drop == 0 {
            return self.evaluators[index].eval(z);
        }
        let series = |params: &ParameterVectors| {
            series_sum_with_magnitude(params, z, drop, 1e-17, MAX_TERMS)
                .ok()
                .map(|(sum, _, magnitude)| (sum, magnitude / sum.norm()))
        };
        let unit = self.params.has_unit_radius();
        let direct = if z.norm() <= TAIL_SERIES_RADIUS { series(&self.params) } else { None };
        if let Some((sum, loss)) = direct {
            if loss <= 10.0 {
                return Ok(sum);
            }
        }
        let full = self.evaluators[index].eval(z)?;
        let head = self.leading.iter().rev().fold(ZERO, |acc, &c| acc * z + c);
        let difference = full - head;
        let loss = full.norm().max(head.norm()) / difference.norm();
        let direct = match direct {
            None if loss > 1e4 && (!unit || z.norm() < 1.0) => series(&self.params),
            other => other,
        };
        Ok(match direct {
            Some((sum, series_loss)) if series_loss < loss => sum,
            _ => difference,
        })
    }
}

impl Integrand for KernelIntegrand<'_> {
    fn eval(&mut self, segment: Segment, s: C64) -> Result<C64> {
        let kernel = self.tail_kernel(segment, s * self.x)?;
        let mut v = kernel * delta_unchecked(s, self.y, self.alpha);
        if let Some(power) = self.power {
            v *= (power * s.ln()).exp();
        }
        Ok(v)
    }

    fn conjugate_symmetric(&self) -> bool {
        self.params.is_real()
    }
}

/// Everything that distinguishes the three contour formulas.
struct Route {
    kernel: ParameterVectors,
    drop: usize,
    prefactor: C64,
    power: Option<f64>,
    method: Method,
}

fn integrate_route(
    route: Route,
    params: &ParameterVectors,
    spike: &SpikeArgument,
    y: &Spectrum,
    settings: &QuadratureSettings,
) -> Result<EvalResult> {
    let contour = build_contour(y, spike, params, *settings)?;
    let kernel = ScalarKernel::new(route.kernel.clone());
    let tol = 1e-15;
    let evaluator = KernelEvaluator::new(kernel, tol);
    let mut integrand = KernelIntegrand {
        evaluators: [evaluator.clone(), evaluator.clone(), evaluator.clone(), evaluator],
        leading: series_coefficients(&route.kernel, route.drop),
        params: route.kernel,
        x: spike.x,
        y: y.values(),
        alpha: spike.alpha,
        power: route.power,
    };
    let outcome = quadrature(&contour, &mut integrand)?;
    let value = route.prefactor * outcome.value;
    let scale = route.prefactor.norm();
    Ok(EvalResult {
        value,
        err_estimate: scale * outcome.error + 4.0 * f64::EPSILON * value.norm(),
        method: route.method,
        effort: outcome.nodes,
    })
}

fn check_inputs(params: &ParameterVectors, spike: &SpikeArgument, y: &Spectrum, m: f64) -> Result<()> {
    if y.len() != spike.r {
        return Err(Error::Domain(format!("spectrum has {} entries but r = {}", y.len(), spike.r)));
    }
    if params.p() > params.q() + 1 {
        return Err(Error::Domain("p > q + 1 is not supported".into()));
    }
    validate_proposition_conditions(params, m).into_result()
}

fn power_prefactor(params: &ParameterVectors, spike: &SpikeArgument, m: f64, lead: C64) -> Result<C64> {
    let shifted = shift_parameters(params, m);
    let rho_m = rho(&shifted, m)?;
    if rho_m == ZERO || !rho_m.re.is_finite() {
        return Err(Error::GammaPole(format!("ρ_m(a−m, b−m) = {rho_m} at m = {m}")));
    }
    Ok(lead / (spike.x.powf(m) * rho_m))
}

fn integer_route(params: &ParameterVectors, spike: &SpikeArgument, m: f64, method: Method) -> Result<Route> {
    let lead = C64::new(ln_gamma_real(m + 1.0)?.exp(), 0.0);
    Ok(Route {
        kernel: shift_parameters(params, m),
        drop: m.max(0.0).ceil() as usize,
        prefactor: power_prefactor(params, spike, m, lead)?,
        power: None,
        method,
    })
}

/// Integer `r/α = m + 1`, closed-circle contour.
pub fn eval_contour_i(
    params: &ParameterVectors,
    spike: &SpikeArgument,
    y: &Spectrum,
    settings: &QuadratureSettings,
) -> Result<EvalResult> {
    let d = spike.decompose();
    if d.epsilon.is_some() {
        return Err(Error::Domain(format!("r/α = {} is not an integer", spike.ratio())));
    }
    check_inputs(params, spike, y, d.m)?;
    let route = integer_route(params, spike, d.m, Method::ContourI)?;
    integrate_route(route, params, spike, y, settings)
}

/// Fractional `r/α = m + ε`, keyhole contour.
pub fn eval_contour_ii(
    params: &ParameterVectors,
    spike: &SpikeArgument,
    y: &Spectrum,
    settings: &QuadratureSettings,
) -> Result<EvalResult> {
    let d = spike.decompose();
    let Some(eps) = d.epsilon else {
        return Err(Error::Domain(format!("r/α = {} is an integer", spike.ratio())));
    };
    let m = d.m;
    check_inputs(params, spike, y, m)?;
    let shifted = shift_parameters(params, m);
    let mut a = shifted.a.clone();
    a.push(C64::new(1.0, 0.0));
    let mut b = shifted.b.clone();
    b.push(C64::new(eps, 0.0));
    let lead = rising_factorial_gamma(C64::new(eps, 0.0), m)?;
    let route = Route {
        kernel: ParameterVectors::unchecked(a, b),
        drop: m as usize,
        prefactor: power_prefactor(params, spike, m, lead)?,
        power: Some(eps - 1.0),
        method: Method::ContourII,
    };
    integrate_route(route, params, spike, y, settings)
}

/// Real case `α = 2` with any `r`, using `m = r/2 − 1`.
pub fn eval_contour_iii(
    params: &ParameterVectors,
    spike: &SpikeArgument,
    y: &Spectrum,
    settings: &QuadratureSettings,
) -> Result<EvalResult> {
    if spike.alpha != 2.0 {
        return Err(Error::Domain(format!("the half-integer route needs α = 2, got {}", spike.alpha)));
    }
    let m = SpikeDecomposition::half_integer(spike.r).m;
    check_inputs(params, spike, y, m)?;
    let route = integer_route(params, spike, m, Method::ContourIII)?;
    integrate_route(route, params, spike, y, settings)
}

/// Evaluates by the contour formula that fits `r/α`.
///
/// Integer ratios use the closed-circle formula, `α = 2` with odd `r` the
/// half-integer formula, and every other ratio the fractional formula.
pub fn eval(
    params: &ParameterVectors,
    spike: &SpikeArgument,
    y: &Spectrum,
    settings: &QuadratureSettings,
) -> Result<EvalResult> {
    match spike.decompose().epsilon {
        None => eval_contour_i(params, spike, y, settings),
        Some(_) if spike.alpha == 2.0 => eval_contour_iii(params, spike, y, settings),
        Some(_) => eval_contour_ii(params, spike, y, settings),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jack::{series_eval, DEFAULT_MAX_TERMS};
    use crate::scalar::scalar_pfq;
    use proptest::prelude::*;

    fn spectrum(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    fn real(a: &[f64], b: &[f64]) -> ParameterVectors {
        ParameterVectors::real(a, b).unwrap()
    }

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm()
    }

    fn series(params: &ParameterVectors, spike: &SpikeArgument, y: &Spectrum) -> C64 {
        series_eval(params, spike, y, 1e-16, DEFAULT_MAX_TERMS).unwrap().value
    }

    fn settings() -> QuadratureSettings {
        QuadratureSettings::default()
    }

    #[test]
    fn weight_examples() {
        let y = spectrum(&[1.0, 2.0]);
        let s = C64::new(3.5, 0.0);
        let w = weight_delta_y(s, &y, 2.0).unwrap();
        assert!((w - 1.0 / (2.5f64 * 1.5).sqrt()).norm() < 1e-15 && w.im == 0.0);
        let w = weight_delta_y(C64::new(3.0, 0.0), &y, 1.0).unwrap();
        assert!((w - 0.5).norm() < 1e-15);
        let s = C64::new(-0.7, 0.4);
        let (up, down) = (weight_delta_y(s, &y, 2.0).unwrap(), weight_delta_y(s.conj(), &y, 2.0).unwrap());
        assert!((up.conj() - down).norm() < 1e-15);
        assert!(matches!(weight_delta_y(C64::new(1.5, 0.0), &y, 2.0), Err(Error::BranchCut(_))));
    }

    #[test]
    fn geometry_choice() {
        let y = spectrum(&[0.5, 1.5]);
        let params = real(&[], &[]);
        let spike = SpikeArgument::new(0.3, 2, 1.0).unwrap();
        assert_eq!(build_contour(&y, &spike, &params, settings()).unwrap().geometry, Geometry::ClosedCircle);
        let y3 = spectrum(&[0.5, 1.5, 2.0]);
        let spike = SpikeArgument::new(0.3, 3, 2.0).unwrap();
        let c = build_contour(&y3, &spike, &params, settings()).unwrap();
        assert_eq!(c.geometry, Geometry::Keyhole);
        assert!(c.leg_height > 0.0 && c.leg_height < c.radius);
        let y = spectrum(&[0.4, 1.2]);
        let spike = SpikeArgument::new(0.5, 2, 2.0).unwrap();
        let c = build_contour(&y, &spike, &real(&[1.5], &[]), settings()).unwrap();
        assert!(c.right_vertex > 1.2 && c.right_vertex < 2.0);
        let spike = SpikeArgument::new(0.9, 2, 2.0).unwrap();
        assert!(matches!(build_contour(&y, &spike, &real(&[1.5], &[]), settings()), Err(Error::Domain(_))));
    }

    fn circle(center: f64, radius: f64) -> ContourSpec {
        ContourSpec {
            geometry: Geometry::ClosedCircle,
            center,
            radius,
            right_vertex: center + radius,
            leg_height: 0.0,
            truncation_abscissa: center - radius,
            budget: settings(),
        }
    }

    #[test]
    fn residue_and_analyticity() {
        let c = circle(1.0, 0.5);
        let out = quadrature(&c, &mut |s: C64| 1.0 / (s - 1.0)).unwrap();
        assert!((out.value - 1.0).norm() < 1e-14);
        for k in 0..5 {
            let out = quadrature(&c, &mut |s: C64| s.powu(k)).unwrap();
            assert!(out.value.norm() < 1e-14);
        }
        let nodes = c.circle_nodes(64);
        let sum: C64 = nodes.iter().map(|(s, w)| w / (s - 1.2)).sum();
        assert!((sum - 1.0).norm() < 1e-12);
    }

    #[test]
    fn hankel_reciprocal_gamma() {
        // (1/2πi) ∫ e^s s^(−z) ds = 1/Γ(z) around the negative axis.
        let contour = ContourSpec {
            geometry: Geometry::Keyhole,
            center: 0.0,
            radius: 1.0,
            right_vertex: 1.0,
            leg_height: 0.05,
            truncation_abscissa: -1e150,
            budget: settings(),
        };
        for (z, want) in [(0.5, 0.56418958354775628695), (2.0 / 3.0, 0.73848811162164831294)] {
            let out = quadrature(&contour, &mut |s: C64| (s - z * s.ln()).exp()).unwrap();
            assert!((out.value - want).norm() < 1e-13, "{}", out.value);
            assert!(out.value.im.abs() <= out.error);
        }
    }

    #[test]
    fn real_case_fixture() {
        let y = spectrum(&[0.5, 1.5]);
        let spike = SpikeArgument::new(0.3, 2, 2.0).unwrap();
        let v = eval_contour_i(&real(&[], &[]), &spike, &y, &settings()).unwrap();
        assert!((v.value.re - 1.357_462_447_638_544_5).abs() < 1e-12);
        assert!(v.value.im.abs() <= v.err_estimate);
        assert_eq!(v.method, Method::ContourI);
    }

    #[test]
    fn small_spike_limit() {
        let y = spectrum(&[0.3, 0.9, 1.4, 2.2]);
        for (a, b) in [(vec![], vec![]), (vec![0.7], vec![2.4]), (vec![1.3], vec![]), (vec![0.6, 1.7], vec![2.9])] {
            for (r, alpha) in [(4, 2.0), (4, 1.0)] {
                let spike = SpikeArgument::new(1e-12, r, alpha).unwrap();
                let v = eval(&real(&a, &b), &spike, &y, &settings()).unwrap();
                assert!((v.value - 1.0).norm() < 1e-9, "{a:?} {b:?}: {}", v.value);
            }
        }
        let y3 = spectrum(&[0.3, 0.9, 1.4]);
        for (r, alpha) in [(3, 2.0), (2, 3.0)] {
            let spike = SpikeArgument::new(1e-12, r, alpha).unwrap();
            let y = if r == 3 { &y3 } else { &spectrum(&[0.3, 0.9]) };
            let v = eval_contour_ii(&real(&[0.8], &[2.5]), &spike, y, &settings()).unwrap();
            assert!((v.value - 1.0).norm() < 1e-8, "{}", v.value);
        }
    }

    #[test]
    fn fractional_route_matches_series() {
        let params = real(&[], &[]);
        let spike = SpikeArgument::new(0.4, 2, 3.0).unwrap();
        let y = spectrum(&[0.6, 1.3]);
        let v = eval_contour_ii(&params, &spike, &y, &settings()).unwrap();
        assert!(rel(v.value, series(&params, &spike, &y)) < 1e-9, "{}", v.value);
        let spike = SpikeArgument::new(0.7, 3, 2.0).unwrap();
        let y = spectrum(&[0.6, 1.3, 1.9]);
        let v = eval_contour_ii(&params, &spike, &y, &settings()).unwrap();
        assert!(rel(v.value, series(&params, &spike, &y)) < 1e-9, "{}", v.value);
    }

    #[test]
    fn half_integer_route() {
        let y = spectrum(&[0.6, 1.3, 1.9]);
        let params = real(&[], &[]);
        let spike = SpikeArgument::new(0.7, 3, 2.0).unwrap();
        let iii = eval_contour_iii(&params, &spike, &y, &settings()).unwrap();
        let ii = eval_contour_ii(&params, &spike, &y, &settings()).unwrap();
        assert!(rel(iii.value, ii.value) < 1e-9);
        assert_eq!(iii.method, Method::ContourIII);

        let y4 = spectrum(&[0.6, 1.3, 1.9, 0.2]);
        let spike = SpikeArgument::new(0.7, 4, 2.0).unwrap();
        let i = eval_contour_i(&real(&[0.3], &[1.7]), &spike, &y4, &settings()).unwrap();
        let iii = eval_contour_iii(&real(&[0.3], &[1.7]), &spike, &y4, &settings()).unwrap();
        assert!(rel(iii.value, i.value) < 1e-12);

        let y5 = spectrum(&[0.6, 1.3, 1.9, 0.2, 0.9]);
        let params = real(&[1.4], &[]);
        let spike = SpikeArgument::new(0.35, 5, 2.0).unwrap();
        let v = eval_contour_iii(&params, &spike, &y5, &settings()).unwrap();
        assert!(rel(v.value, series(&params, &spike, &y5)) < 1e-9, "{}", v.value);
    }

    #[test]
    fn single_eigenvalue_real_case() {
        // r = 1 uses m = −1/2; the value is the scalar function itself.
        let params = real(&[1.7], &[]);
        let spike = SpikeArgument::new(0.6, 1, 2.0).unwrap();
        let v = eval(&params, &spike, &spectrum(&[1.2]), &settings()).unwrap();
        let want = scalar_pfq(&ScalarKernel::new(params), C64::new(0.72, 0.0), 1e-15).unwrap();
        assert!(rel(v.value, want) < 1e-11, "{} vs {want}", v.value);
    }

    #[test]
    fn repeated_eigenvalue_half_integer_route() {
        let params = real(&[1.6764651640443402, 1.1432728019958747], &[5.523172720780707]);
        let spike = SpikeArgument::new(0.599200523204951, 5, 2.0).unwrap();
        let y = spectrum(&[1.2812870727381864; 5]);
        let v = eval_contour_iii(&params, &spike, &y, &settings()).unwrap();
        assert!(rel(v.value, series(&params, &spike, &y)) < 1e-10);
        assert!(v.effort < 20_000, "effort {}", v.effort);
    }

    #[test]
    fn nonpositive_numerator_on_keyhole_is_rejected() {
        let params = ParameterVectors::new(vec![C64::new(-0.5, 1.0)], vec![C64::new(2.0, 0.0)]).unwrap();
        let spike = SpikeArgument::new(1.0, 3, 2.0).unwrap();
        let err = eval(&params, &spike, &spectrum(&[0.5, 0.8, 1.1]), &settings()).unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "{err}");
    }

    #[test]
    fn complex_parameters_agree_across_routes() {
        let params = ParameterVectors::new(vec![C64::new(0.5, 1.0)], vec![C64::new(2.0, 0.0)]).unwrap();
        let spike = SpikeArgument::new(1.0, 3, 2.0).unwrap();
        let y = spectrum(&[0.5, 0.8, 1.1]);
        let ii = eval_contour_ii(&params, &spike, &y, &settings()).unwrap().value;
        let iii = eval_contour_iii(&params, &spike, &y, &settings()).unwrap().value;
        let want = series(&params, &spike, &y);
        assert!(rel(ii, want) < 1e-11 && rel(iii, want) < 1e-11, "{ii} {iii} {want}");
    }

    #[test]
    fn validation_rejects_excluded_parameters() {
        let y = spectrum(&[0.6, 1.3, 1.9, 0.2]);
        let spike = SpikeArgument::new(0.5, 4, 1.0).unwrap();
        // m = 3: a = 2 is excluded.
        let err = eval_contour_i(&real(&[2.0], &[4.5]), &spike, &y, &settings()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert_eq!(err.exit_code(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn scalar_reduction(v in 0.2..2.0f64, x in 0.05..1.2f64, a in 0.5..2.5f64, b in 2.6..5.0f64, r in 2usize..5) {
            let params = real(&[a], &[b]);
            for alpha in [1.0, 2.0] {
                let spike = SpikeArgument::new(x, r, alpha).unwrap();
                let got = eval(&params, &spike, &spectrum(&vec![v; r]), &settings()).unwrap().value;
                let want = scalar_pfq(&ScalarKernel::new(params.clone()), C64::new(x * v, 0.0), 1e-15).unwrap();
                prop_assert!(rel(got, want) < 1e-10, "α={} r={}: {} vs {}", alpha, r, got, want);
            }
        }

        #[test]
        fn permutation_invariance(y in proptest::collection::vec(0.1..2.0f64, 4), x in 0.1..1.0f64) {
            let params = real(&[0.9], &[2.2]);
            let spike = SpikeArgument::new(x, 4, 2.0).unwrap();
            let mut rotated = y.clone();
            rotated.rotate_left(1);
            let p = eval(&params, &spike, &spectrum(&y), &settings()).unwrap().value;
            let q = eval(&params, &spike, &spectrum(&rotated), &settings()).unwrap().value;
            prop_assert!(rel(p, q) < 1e-12);
        }
    }
}
