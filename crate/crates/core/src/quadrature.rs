//! Adaptive Simpson quadrature on finite intervals.

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Below a few ulps of the local value the error estimate is rounding noise.
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || delta.abs() <= 15.0 * tol.max(floor) {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrate over consecutive panels delimited by `breaks` (sorted), so that
/// kinks at the breakpoints never sit inside a Simpson cell.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], tol: f64) -> f64 {
    let panels = breaks.len().saturating_sub(1).max(1) as f64;
    breaks
        .windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], tol / panels))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(&|x: f64| 3.0 * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_quarter_period() {
        let v = adaptive_simpson(&f64::cos, 0.0, FRAC_PI_2, 1e-12);
        assert!((v - 1.0).abs() < 1e-11);
    }

    #[test]
    fn unreachable_tolerance_terminates_quickly() {
        let n = std::cell::Cell::new(0u64);
        let f = |x: f64| {
            n.set(n.get() + 1);
            1.0 / (1.0 - 0.9986 * (1.0 - (x - 0.5).abs()))
        };
        let v = adaptive_simpson(&f, 0.0, 0.5, 1e-12) + adaptive_simpson(&f, 0.5, 1.0, 1e-12);
        let exact = 2.0 / 0.9986 * ((1.0 - 0.4993) / 0.0014f64).ln();
        assert!(((v - exact) / exact).abs() < 1e-12);
        assert!(n.get() < 200_000, "{} evaluations", n.get());
    }

    #[test]
    fn peaked_integrand() {
        // ∫_0^1 1/(1e-4 + x^2) dx = atan(100)/1e-2
        let v = adaptive_simpson(&|x: f64| 1.0 / (1e-4 + x * x), 0.0, 1.0, 1e-9);
        let exact = 100f64.atan() * 100.0;
        assert!(((v - exact) / exact).abs() < 1e-9);
    }
}
