//! Analytic continuation of `pFq` by re-expanding Taylor series of the
//! hypergeometric differential equation
//!
//! ```text
//! [θ ∏(θ + b_l − 1) − z ∏(θ + a_i)] F = 0,   θ = z d/dz.
//! ```
//!
//! The equation is regular away from `z = 0` (and `z = 1` when `p = q + 1`),
//! so a local expansion converges in a disk reaching the nearest of those
//! points. Stepping the expansion centre along a path gives `F` at arguments
//! where the defining series suffers cancellation or does not converge.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::{rho, ParameterVectors};

use super::series_sum;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Number of Taylor coefficients kept per local expansion.
const TERMS: usize = 64;
/// Maximum number of re-expansions for a single continuation request.
const MAX_STEPS: usize = 200_000;
/// Most expansions kept in a continuation chain.
const MAX_CHAIN: usize = 20_000;
/// Bound on `Σ|c_n| r^n` relative to the leading terms of an expansion.
const CANCELLATION: f64 = 100.0;

fn poly_mul(p: &[C64], q: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; p.len() + q.len() - 1];
    for (i, &x) in p.iter().enumerate() {
        for (j, &y) in q.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// The differential operator of one `pFq`.
#[derive(Debug, Clone)]
pub struct HypergeometricOde {
    params: ParameterVectors,
    /// Coefficients of `θ ∏(θ + b_l − 1)` in powers of θ.
    lhs: Vec<C64>,
    /// Coefficients of `∏(θ + a_i)`, zero-padded to the same length.
    rhs: Vec<C64>,
}

impl HypergeometricOde {
    pub fn new(params: &ParameterVectors) -> Self {
        let mut lhs = vec![ZERO, ONE];
        for &b in &params.b {
            lhs = poly_mul(&lhs, &[b - 1.0, ONE]);
        }
        let mut rhs = vec![ONE];
        for &a in &params.a {
            rhs = poly_mul(&rhs, &[a, ONE]);
        }
        rhs.resize(lhs.len(), ZERO);
        Self { params: params.clone(), lhs, rhs }
    }

    /// Order of the equation, `q + 1`.
    pub fn order(&self) -> usize {
        self.lhs.len() - 1
    }

    /// Distance from `z` to the nearest singular point of the equation.
    pub fn singular_distance(&self, z: C64) -> f64 {
        let d = z.norm();
        if self.params.has_unit_radius() {
            d.min((z - 1.0).norm())
        } else {
            d
        }
    }

    /// Taylor coefficients in `t = (z − center)/scale` from the first
    /// `order()` of them.
    pub fn expand(&self, center: C64, scale: f64, init: &[C64], terms: usize) -> Vec<C64> {
        let d = self.order();
        debug_assert_eq!(init.len(), d);
        let terms = terms.max(d);
        // table[j][k] is the k-th Taylor coefficient of θ^j F about `center`.
        let mut table: Vec<Vec<C64>> = vec![Vec::with_capacity(terms + 1); d + 1];
        table[0].extend_from_slice(init);
        let c = center / scale;
        let fill = |table: &mut Vec<Vec<C64>>, top: usize| {
            // Entries table[j][top - j] for j = 1..=d, given table[0][..=top].
            for j in 1..=d.min(top) {
                let k = top - j;
                let v = c * (k as f64 + 1.0) * table[j - 1][k + 1] + table[j - 1][k] * k as f64;
                if table[j].len() == k {
                    table[j].push(v);
                } else {
                    table[j][k] = v;
                }
            }
        };
        for top in 0..d {
            fill(&mut table, top);
        }
        let lead_root = ONE - if self.params.has_unit_radius() { center } else { ZERO };
        let zpow = c.powu(d as u32);
        while table[0].len() < terms {
            let top = table[0].len();
            let n = top - d;
            table[0].push(ZERO);
            fill(&mut table, top);
            let mut residual = ZERO;
            for j in 0..=d {
                residual += (self.lhs[j] - center * self.rhs[j]) * table[j][n];
                if n > 0 {
                    residual -= scale * self.rhs[j] * table[j][n - 1];
                }
            }
            let rising: f64 = (1..=d).map(|i| (n + i) as f64).product();
            let lead = lead_root * zpow * rising;
            table[0][top] = -residual / lead;
            fill(&mut table, top);
        }
        table.swap_remove(0)
    }
}

/// A local expansion together with the disk in which it is trusted.
#[derive(Debug, Clone)]
struct LocalExpansion {
    center: C64,
    /// Length unit of the expansion variable.
    scale: f64,
    coeffs: Vec<C64>,
    radius: f64,
}

impl LocalExpansion {
    fn eval(&self, z: C64) -> C64 {
        let h = (z - self.center) / self.scale;
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * h + c)
    }

    /// First `count` Taylor coefficients about `z`, in units of `scale`.
    fn recenter(&self, z: C64, count: usize, scale: f64) -> Vec<C64> {
        let h = (z - self.center) / self.scale;
        let mut out = Vec::with_capacity(count);
        // Repeated synthetic division by (t − h) gives the shifted coefficients.
        let mut work = self.coeffs.clone();
        for _ in 0..count {
            let mut acc = ZERO;
            for c in work.iter_mut().rev() {
                acc = acc * h + *c;
                *c = acc;
            }
            out.push(work[0]);
            work.remove(0);
        }
        let ratio = scale / self.scale;
        let mut factor = 1.0;
        for c in &mut out {
            *c *= factor;
            factor *= ratio;
        }
        out
    }
}

/// Stateful continuation of one `pFq` along a sequence of arguments.
///
/// The expansions built so far form a chain of overlapping disks. A request
/// is answered from the chain when one of its disks contains the argument,
/// so revisiting a region gives the same value instead of re-marching and
/// accumulating rounding error.
#[derive(Debug, Clone)]
pub struct Continuation {
    ode: HypergeometricOde,
    chain: Vec<LocalExpansion>,
    cursor: usize,
}

impl Continuation {
    /// Starts from `z0`, where the defining series is accurate.
    pub fn start(params: &ParameterVectors, z0: C64) -> Result<Self> {
        let ode = HypergeometricOde::new(params);
        let mut init = Vec::with_capacity(ode.order());
        let mut factorial = 1.0;
        for k in 0..ode.order() {
            if k > 0 {
                factorial *= k as f64;
            }
            let shifted = ParameterVectors::unchecked(
                params.a.iter().map(|&a| a + k as f64).collect(),
                params.b.iter().map(|&b| b + k as f64).collect(),
            );
            let (value, _) = series_sum(&shifted, z0, 0, 1e-17, 20_000)?;
            init.push(rho(params, k as f64)? / factorial * value);
        }
        let scale = Self::scale_at(&ode, z0)?;
        let mut factor = 1.0;
        for c in &mut init {
            *c *= factor;
            factor *= scale;
        }
        let local = Self::build(&ode, z0, init)?;
        Ok(Self { ode, chain: vec![local], cursor: 0 })
    }

    /// Centre of the expansion used by the most recent evaluation.
    pub fn center(&self) -> C64 {
        self.chain[self.cursor].center
    }

    fn scale_at(ode: &HypergeometricOde, center: C64) -> Result<f64> {
        let scale = 0.5 * ode.singular_distance(center);
        if scale == 0.0 {
            return Err(Error::Domain("continuation reached a singular point".into()));
        }
        Ok(scale)
    }

    /// Builds the expansion about `center` from initial coefficients given in
    /// units of [`Self::scale_at`].
    fn build(ode: &HypergeometricOde, center: C64, init: Vec<C64>) -> Result<LocalExpansion> {
        let scale = Self::scale_at(ode, center)?;
        let mut radius = 1.0;
        let coeffs = ode.expand(center, scale, &init, TERMS);
        for _ in 0..60 {
            let mut peak = 0.0f64;
            let mut tail = 0.0f64;
            let mut head = 0.0f64;
            let mut total = 0.0f64;
            let mut power = 1.0;
            for (n, c) in coeffs.iter().enumerate() {
                let size = c.norm() * power;
                peak = peak.max(size);
                total += size;
                if n < 3 {
                    head = head.max(size);
                }
                if n + 4 >= coeffs.len() {
                    tail = tail.max(size);
                }
                power *= radius;
            }
            if !peak.is_finite() {
                return Err(Error::NonConvergence("continuation coefficients overflowed".into()));
            }
            // Truncation below rounding, and no heavy cancellation inside the disk.
            if tail <= 1e-17 * peak && total <= CANCELLATION * head {
                return Ok(LocalExpansion { center, scale, coeffs, radius: radius * scale });
            }
            radius *= 0.5;
        }
        Err(Error::NonConvergence("continuation step size underflow".into()))
    }

    /// `F(z)`, extending the chain along the straight segment to `z` when no
    /// stored disk contains it.
    pub fn eval(&mut self, z: C64) -> Result<C64> {
        let reach = |e: &LocalExpansion| (z - e.center).norm() / e.radius;
        let mut i = self.cursor;
        loop {
            if reach(&self.chain[i]) <= 1.0 {
                self.cursor = i;
                return Ok(self.chain[i].eval(z));
            }
            let here = (z - self.chain[i].center).norm();
            let closer = |j: usize| (z - self.chain[j].center).norm() < here;
            if i + 1 < self.chain.len() && closer(i + 1) {
                i += 1;
            } else if i > 0 && closer(i - 1) {
                i -= 1;
            } else {
                break;
            }
        }
        // Branch off at the closest disk; later disks lie elsewhere.
        self.chain.truncate(i + 1);
        if self.chain.len() > MAX_CHAIN {
            self.chain.drain(..self.chain.len() - MAX_CHAIN / 2);
        }
        let mut steps = 0;
        loop {
            let local = self.chain.last().expect("chain is never empty");
            if (z - local.center).norm() <= local.radius {
                break;
            }
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::NonConvergence(format!("continuation to {z} exceeded step budget")));
            }
            let dir = (z - local.center) / (z - local.center).norm();
            let next = local.center + dir * (0.9 * local.radius);
            let init = local.recenter(next, self.ode.order(), Self::scale_at(&self.ode, next)?);
            let built = Self::build(&self.ode, next, init)?;
            self.chain.push(built);
        }
        self.cursor = self.chain.len() - 1;
        Ok(self.chain[self.cursor].eval(z))
    }
}

/// Distance from the origin to the segment `[p, q]`.
pub(crate) fn segment_distance_to_origin(p: C64, q: C64) -> f64 {
    let d = q - p;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return p.norm();
    }
    let t = (-(p.re * d.re + p.im * d.im) / len2).clamp(0.0, 1.0);
    (p + d * t).norm()
}
