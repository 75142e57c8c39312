//! Finite differences for functions that are smooth only on one side of a point.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Central second difference `(f(x+h) − 2f(x) + f(x−h))/h²`.
pub fn second_difference<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// One-sided limit of `f″` at `x`: central second differences at distances
/// `2h, 3h, 4h` on the requested side, extrapolated quadratically to `x`.
/// Only values of `f` on that side of `x` (and at `x` itself) enter.
pub fn one_sided_second_derivative<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64, side: Side) -> f64 {
    let s = match side {
        Side::Left => -h,
        Side::Right => h,
    };
    let d = |k: f64| second_difference(f, x + k * s, h);
    6.0 * d(2.0) - 8.0 * d(3.0) + 3.0 * d(4.0)
}
