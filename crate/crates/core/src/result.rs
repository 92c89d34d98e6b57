//! Evaluation results shared by every route.

use num_complex::Complex64 as C64;

/// Which numerical route produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ContourI,
    ContourII,
    ContourIII,
    Series,
    SphereMc,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::ContourI => "contour-i",
            Method::ContourII => "contour-ii",
            Method::ContourIII => "contour-iii",
            Method::Series => "series",
            Method::SphereMc => "sphere-mc",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// A computed value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: C64,
    pub err_estimate: f64,
    pub method: Method,
    /// Quadrature nodes, series terms or Monte Carlo samples used.
    pub effort: usize,
}
