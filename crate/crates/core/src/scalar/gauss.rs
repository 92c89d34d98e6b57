//! `2F1(a, b; c; z)` off the unit disk through the classical linear
//! transformations.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gamma::{gamma, is_nonpositive_integer, rgamma};
use crate::params::ParameterVectors;

use super::holonomic::Continuation;
use super::{pow1m, series_sum, MAX_TERMS};

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Largest transformed modulus accepted for a series route.
const ROUTE_LIMIT: f64 = 0.8;
/// Distance to an integer below which a parameter difference is treated as
/// degenerate (the connection coefficients blow up).
const DEGENERATE: f64 = 1e-4;

/// The six arguments reachable by the classical transformations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaussRoute {
    /// `z`
    Direct,
    /// `z / (z − 1)`
    Pfaff,
    /// `1 − z`
    OneMinus,
    /// `1 / z`
    Inverse,
    /// `1 / (1 − z)`
    InverseOneMinus,
    /// `1 − 1/z`
    OneMinusInverse,
}

impl GaussRoute {
    pub const ALL: [GaussRoute; 6] = [
        GaussRoute::Direct,
        GaussRoute::Pfaff,
        GaussRoute::OneMinus,
        GaussRoute::Inverse,
        GaussRoute::InverseOneMinus,
        GaussRoute::OneMinusInverse,
    ];

    pub fn argument(self, z: C64) -> C64 {
        match self {
            GaussRoute::Direct => z,
            GaussRoute::Pfaff => z / (z - 1.0),
            GaussRoute::OneMinus => ONE - z,
            GaussRoute::Inverse => z.inv(),
            GaussRoute::InverseOneMinus => (ONE - z).inv(),
            GaussRoute::OneMinusInverse => ONE - z.inv(),
        }
    }
}

fn near_integer(v: C64) -> bool {
    v.im.abs() < DEGENERATE && (v.re - v.re.round()).abs() < DEGENERATE
}

fn f21(a: C64, b: C64, c: C64, w: C64) -> Result<C64> {
    if is_nonpositive_integer(c) {
        return Err(Error::GammaPole(format!("2F1 denominator {c}")));
    }
    let params = ParameterVectors::unchecked(vec![a, b], vec![c]);
    Ok(series_sum(&params, w, 0, 1e-16, MAX_TERMS)?.0)
}

/// Evaluates `2F1(a, b; c; z)` through one specific transformation.
///
/// Fails with a domain error when the route is degenerate for these
/// parameters or its transformed argument lies outside the unit disk.
pub fn gauss2f1_route(a: C64, b: C64, c: C64, z: C64, route: GaussRoute) -> Result<C64> {
    let w = route.argument(z);
    if w.norm() >= 1.0 {
        return Err(Error::Domain(format!("{route:?} argument |{w}| >= 1")));
    }
    let s = c - a - b;
    match route {
        GaussRoute::Direct => f21(a, b, c, z),
        GaussRoute::Pfaff => Ok(pow1m(z, -a) * f21(a, c - b, c, w)?),
        GaussRoute::OneMinus | GaussRoute::OneMinusInverse if near_integer(s) => {
            Err(Error::Domain("c − a − b is an integer".into()))
        }
        GaussRoute::Inverse | GaussRoute::InverseOneMinus if near_integer(a - b) => {
            Err(Error::Domain("a − b is an integer".into()))
        }
        GaussRoute::OneMinus => {
            let g1 = gamma(c)? * gamma(s)? * rgamma(c - a) * rgamma(c - b);
            let g2 = gamma(c)? * gamma(-s)? * rgamma(a) * rgamma(b);
            Ok(g1 * f21(a, b, ONE - s, w)? + g2 * pow1m(z, s) * f21(c - a, c - b, s + 1.0, w)?)
        }
        GaussRoute::Inverse => {
            let mz = -z;
            let g1 = gamma(c)? * gamma(b - a)? * rgamma(b) * rgamma(c - a);
            let g2 = gamma(c)? * gamma(a - b)? * rgamma(a) * rgamma(c - b);
            Ok(g1 * mz.powc(-a) * f21(a, a - c + 1.0, a - b + 1.0, w)?
                + g2 * mz.powc(-b) * f21(b, b - c + 1.0, b - a + 1.0, w)?)
        }
        GaussRoute::InverseOneMinus => {
            let g1 = gamma(c)? * gamma(b - a)? * rgamma(b) * rgamma(c - a);
            let g2 = gamma(c)? * gamma(a - b)? * rgamma(a) * rgamma(c - b);
            Ok(g1 * pow1m(z, -a) * f21(a, c - b, a - b + 1.0, w)?
                + g2 * pow1m(z, -b) * f21(b, c - a, b - a + 1.0, w)?)
        }
        GaussRoute::OneMinusInverse => {
            let g1 = gamma(c)? * gamma(s)? * rgamma(c - a) * rgamma(c - b);
            let g2 = gamma(c)? * gamma(-s)? * rgamma(a) * rgamma(b);
            Ok(g1 * z.powc(-a) * f21(a, a - c + 1.0, a + b - c + 1.0, w)?
                + g2 * pow1m(z, s) * z.powc(a - c) * f21(c - a, ONE - a, s + 1.0, w)?)
        }
    }
}

/// `2F1(a, b; c; z)` for `z ∉ [1, ∞)`.
///
/// Tries the transformations in order of increasing transformed modulus and
/// falls back to analytic continuation of the differential equation when
/// every series route is degenerate or too slowly convergent (for example
/// near `z = e^{±iπ/3}`).
pub fn gauss2f1_continued(a: C64, b: C64, c: C64, z: C64) -> Result<C64> {
    if is_nonpositive_integer(c) {
        return Err(Error::GammaPole(format!("2F1 denominator {c}")));
    }
    if z == C64::new(0.0, 0.0) {
        return Ok(ONE);
    }
    if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        let params = ParameterVectors::unchecked(vec![a, b], vec![c]);
        return Ok(series_sum(&params, z, 0, 1e-16, MAX_TERMS)?.0);
    }
    if z.im == 0.0 && z.re >= 1.0 {
        return Err(Error::BranchCut(format!("{z}")));
    }
    let mut routes: Vec<(f64, GaussRoute)> =
        GaussRoute::ALL.iter().map(|&r| (r.argument(z).norm(), r)).collect();
    routes.sort_by(|x, y| x.0.total_cmp(&y.0));
    for (modulus, route) in routes {
        if modulus > ROUTE_LIMIT {
            break;
        }
        match gauss2f1_route(a, b, c, z, route) {
            Ok(v) if v.re.is_finite() && v.im.is_finite() => return Ok(v),
            Ok(_) | Err(Error::Domain(_)) | Err(Error::GammaPole(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    let params = ParameterVectors::unchecked(vec![a, b], vec![c]);
    Continuation::start(&params, z * (0.5 / z.norm()))?.eval(z)
}
