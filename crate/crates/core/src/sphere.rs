//! Monte Carlo over the unit sphere for the real case `α = 2`.
//!
//! With `X` of rank one the orthogonal-group average reduces to
//!
//! ```text
//! pFq^(2)(a, b; x, Y) = E_q[ pFq(a, b; x · q'Yq) ],   q uniform on S^(r−1).
//! ```
//!
//! Sample `i` of a stream is generated from a fixed block of ChaCha8 words,
//! so it does not depend on how a run is split into chunks.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contour::{keyhole_contour, quadrature, QuadratureSettings};
use crate::error::{Error, Result};
use crate::gamma::ln_gamma_real;
use crate::jack::Spectrum;
use crate::params::{ParameterVectors, SpikeArgument};
use crate::result::{EvalResult, Method};
use crate::scalar::{scalar_pfq, ScalarKernel};

/// A point on the unit sphere together with its stream position.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereSample {
    pub q: Vec<f64>,
    pub seed: u64,
    pub index: u64,
}

/// Random words consumed by one sample of dimension `r`: two `f64`
/// uniforms per Box–Muller pair, two words each.
fn words_per_sample(r: usize) -> u128 {
    4 * r.div_ceil(2) as u128
}

fn gaussian_fill(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for pair in out.chunks_mut(2) {
        let u1 = 1.0 - rng.random::<f64>();
        let u2 = rng.random::<f64>();
        let radius = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        pair[0] = radius * c;
        if pair.len() > 1 {
            pair[1] = radius * s;
        }
    }
}

fn normalize(g: &mut [f64]) {
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    g.iter_mut().for_each(|v| *v /= norm);
}

/// Sample `index` of the stream `seed`: a normalized standard Gaussian
/// vector in `r` dimensions.
pub fn sphere_sample(seed: u64, index: u64, r: usize) -> SphereSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(index as u128 * words_per_sample(r));
    let mut q = vec![0.0; r];
    gaussian_fill(&mut rng, &mut q);
    normalize(&mut q);
    SphereSample { q, seed, index }
}

/// Running mean and variance (Welford) of complex samples.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: C64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: C64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += (delta.conj() * (v - self.mean)).re;
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2.max(0.0) / ((self.n - 1) as f64 * self.n as f64)).sqrt()
    }
}

/// Mean of `f(q'Yq)` over `n` sphere samples, with its standard error.
fn average<F: FnMut(f64) -> Result<C64>>(y: &Spectrum, n: u64, seed: u64, mut f: F) -> Result<(C64, f64)> {
    if n == 0 {
        return Err(Error::Domain("at least one sample is needed".into()));
    }
    let r = y.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = vec![0.0; r];
    let mut moments = Moments::default();
    for _ in 0..n {
        gaussian_fill(&mut rng, &mut q);
        let norm2: f64 = q.iter().map(|v| v * v).sum();
        let t = q.iter().zip(y.values()).map(|(g, w)| g * g * w).sum::<f64>() / norm2;
        moments.push(f(t)?);
    }
    Ok((moments.mean, moments.stderr()))
}

/// Monte Carlo estimate of the real-case function from the sphere average.
pub fn sphere_average(
    params: &ParameterVectors,
    spike: &SpikeArgument,
    y: &Spectrum,
    n_samples: u64,
    seed: u64,
) -> Result<EvalResult> {
    if spike.alpha != 2.0 {
        return Err(Error::Domain(format!("the sphere average needs α = 2, got {}", spike.alpha)));
    }
    if y.len() != spike.r {
        return Err(Error::Domain(format!("spectrum has {} entries but r = {}", y.len(), spike.r)));
    }
    if params.has_unit_radius() && spike.x * y.max() >= 1.0 {
        return Err(Error::Domain(format!("x·max(y) = {} >= 1", spike.x * y.max())));
    }
    let kernel = ScalarKernel::new(params.clone());
    let (value, stderr) = average(y, n_samples, seed, |t| scalar_pfq(&kernel, C64::new(spike.x * t, 0.0), 1e-14))?;
    Ok(EvalResult { value, err_estimate: stderr, method: Method::SphereMc, effort: n_samples as usize })
}

/// Both sides of the sphere-to-contour identity
///
/// ```text
/// E_q[exp(θ q'Yq)] = Γ(r/2) θ^(1 − r/2) (1/2πi) ∫ e^(θ s) Δ_y(s) ds,   θ = x/w.
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    pub sphere: C64,
    pub sphere_stderr: f64,
    pub contour: C64,
    pub contour_error: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
}

impl IdentityReport {
    /// Gap measured in Monte Carlo standard errors.
    pub fn z_score(&self) -> f64 {
        if self.sphere_stderr == 0.0 {
            if self.abs_gap <= self.contour_error { 0.0 } else { f64::INFINITY }
        } else {
            self.abs_gap / self.sphere_stderr
        }
    }
}

/// Evaluates both sides of the identity with a keyhole contour.
pub fn onatski_identity_check(
    x: f64,
    w: f64,
    y: &Spectrum,
    n_samples: u64,
    seed: u64,
    tol: f64,
) -> Result<IdentityReport> {
    if !(x > 0.0 && w > 0.0) {
        return Err(Error::Domain("x and w must be positive".into()));
    }
    let theta = x / w;
    let r = y.len() as f64;
    let (sphere, sphere_stderr) = average(y, n_samples, seed, |t| Ok(C64::new((theta * t).exp(), 0.0)))?;
    let contour = keyhole_contour(y, QuadratureSettings::with_tol(tol));
    let values = y.values().to_vec();
    let mut integrand = |s: C64| {
        let log: C64 = values.iter().map(|&v| (s - v).ln()).sum();
        (theta * s - 0.5 * log).exp()
    };
    let outcome = quadrature(&contour, &mut integrand)?;
    let prefactor = (ln_gamma_real(0.5 * r)? + (1.0 - 0.5 * r) * theta.ln()).exp();
    let contour_value = prefactor * outcome.value;
    let abs_gap = (sphere - contour_value).norm();
    Ok(IdentityReport {
        sphere,
        sphere_stderr,
        contour: contour_value,
        contour_error: prefactor * outcome.error,
        abs_gap,
        rel_gap: abs_gap / contour_value.norm(),
    })
}
