/// Result of a one-dimensional Legendre transform `sup_α {-αs - e(α)}` style optimisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreValue {
    pub value: f64,
    /// Optimiser location.
    pub argmax: f64,
    /// Set when the optimiser sits on the end of the search interval, so the
    /// true supremum may lie outside it.
    pub at_boundary: bool,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimisation of a unimodal function on `[lo, hi]`.
///
/// Returns `(argmin, min)`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    let candidates = [(lo, f(lo)), (hi, f(hi)), ((a + b) / 2.0, f((a + b) / 2.0))];
    candidates
        .into_iter()
        .filter(|(_, v)| !v.is_nan())
        .fold((f64::NAN, f64::INFINITY), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// `I(s) = sup_{α∈[lo,hi]} (-α s - e(α))` for convex `e`.
pub fn legendre_transform<F: FnMut(f64) -> f64>(mut e: F, s: f64, lo: f64, hi: f64) -> LegendreValue {
    let (arg, min) = golden_section_min(|a| a * s + e(a), lo, hi, 1e-10 * (hi - lo).max(1.0));
    let edge = 1e-6 * (hi - lo);
    LegendreValue {
        value: -min,
        argmax: arg,
        at_boundary: (arg - lo).abs() < edge || (hi - arg).abs() < edge,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_pressure_gives_gaussian_rate() {
        // e(α) = -m α + v α²/2 has rate (s - m)² / (2v).
        let (m, v) = (0.7, 1.3);
        for s in [-0.5, 0.0, 0.7, 2.0] {
            let r = legendre_transform(|a| -m * a + v * a * a / 2.0, s, -20.0, 20.0);
            assert!((r.value - (s - m) * (s - m) / (2.0 * v)).abs() < 1e-9, "s={s}");
            assert!(!r.at_boundary);
        }
    }

    #[test]
    fn flags_boundary_optimum() {
        let r = legendre_transform(|a| -a, 5.0, -1.0, 1.0);
        assert!(r.at_boundary);
        assert!((r.argmax + 1.0).abs() < 1e-9);
    }
}
