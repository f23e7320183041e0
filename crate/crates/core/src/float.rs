//! f64 transcendentals routed through libm so the crate builds without std
//! and produces identical bits on every platform.

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn log1p(x: f64) -> f64 {
    libm::log1p(x)
}

/// ln 2, the logistic loss at a zero score.
pub(crate) const LN_2: f64 = core::f64::consts::LN_2;
