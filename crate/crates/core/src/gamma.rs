//! Complex log-gamma on the principal branch.
//!
//! Stirling's series is used once `Re z` is large enough; smaller arguments
//! are shifted upward with `lnΓ(z) = lnΓ(z + n) − Σ ln(z + k)`. Summing
//! principal logarithms keeps the result on the branch that is continuous
//! off the negative real axis and satisfies `lnΓ(z+1) = lnΓ(z) + ln z`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

/// B_{2k} / (2k (2k − 1)) for k = 1..10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43_867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

/// Minimum real part before Stirling's series is applied.
const STIRLING_RE: f64 = 12.0;

/// True when `z` is one of 0, −1, −2, …
pub fn is_nonpositive_integer(z: C64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0
}

fn stirling(w: C64) -> C64 {
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut corr = C64::new(0.0, 0.0);
    let mut p = inv;
    for c in STIRLING {
        let term = p * c;
        corr += term;
        if term.norm() < 1e-18 * corr.norm() {
            break;
        }
        p *= inv2;
    }
    (w - 0.5) * w.ln() - w + HALF_LN_2PI + corr
}

/// Principal-branch `ln Γ(z)`.
pub fn ln_gamma(z: C64) -> Result<C64> {
    if is_nonpositive_integer(z) {
        return Err(Error::GammaPole(format!("{z}")));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite gamma argument {z}")));
    }
    if z.re >= STIRLING_RE {
        return Ok(stirling(z));
    }
    let shift = (STIRLING_RE - z.re).ceil() as usize;
    let mut w = z;
    let mut logs = C64::new(0.0, 0.0);
    for _ in 0..shift {
        logs += w.ln();
        w += 1.0;
    }
    Ok(stirling(w) - logs)
}

/// `ln |Γ(x)|` for real `x` away from the poles.
pub fn ln_gamma_real(x: f64) -> Result<f64> {
    ln_gamma(C64::new(x, 0.0)).map(|v| v.re)
}

pub fn gamma(z: C64) -> Result<C64> {
    ln_gamma(z).map(|v| v.exp())
}

/// `1/Γ(z)`, which is entire: zero at the poles of Γ.
pub fn rgamma(z: C64) -> C64 {
    match ln_gamma(z) {
        Ok(v) => (-v).exp(),
        Err(_) => C64::new(0.0, 0.0),
    }
}

/// `ln B(a, b)` for positive reals.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    Ok(ln_gamma_real(a)? + ln_gamma_real(b)? - ln_gamma_real(a + b)?)
}
