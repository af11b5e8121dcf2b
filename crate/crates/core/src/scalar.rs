//! One-dimensional bracketing root finding and golden-section search.

/// Bisection on a bracket whose endpoints have opposite signs.
///
/// Stops when the bracket width drops below `rel_tol · max(|lo|, |hi|)` (or
/// `abs_floor`, whichever is larger).
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64, abs_floor: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= (rel_tol * lo.abs().max(hi.abs())).max(abs_floor) || mid == lo || mid == hi {
            return mid;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `count` points spaced geometrically from `start` to `end` (both positive).
pub fn geometric_grid(start: f64, end: f64, count: usize) -> Vec<f64> {
    debug_assert!(start > 0.0 && end > start && count >= 2);
    let ratio = (end / start).ln() / (count - 1) as f64;
    (0..count).map(|i| start * (ratio * i as f64).exp()).collect()
}

/// Scans `f` on the given ordered points and refines every sign change by bisection.
/// Exact zeros on grid points are reported as roots.
pub fn scan_roots<F: Fn(f64) -> f64>(f: &F, points: &[f64], rel_tol: f64) -> Vec<f64> {
    let values: Vec<f64> = points.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..points.len() {
        if values[i] == 0.0 {
            roots.push(points[i]);
            continue;
        }
        if i + 1 < points.len() && values[i + 1] != 0.0 && (values[i] < 0.0) != (values[i + 1] < 0.0) {
            if !(values[i].is_finite() && values[i + 1].is_finite()) {
                continue;
            }
            roots.push(bisect(f, points[i], points[i + 1], rel_tol, 0.0));
        }
    }
    roots
}

/// Result of [`golden_section_max`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenMax {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Maximizes a unimodal function on `[lo, hi]` until the bracket is narrower than `tol`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> GoldenMax {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while (hi - lo) > tol && iterations < max_iter {
        iterations += 1;
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    GoldenMax { x, value: f(x), iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15, 0.0);
        assert!((r - 2.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn scan_finds_all_cubic_roots() {
        let f = |x: f64| (x - 1.0) * (x - 2.0) * (x - 5.0);
        let pts: Vec<f64> = (0..=70).map(|i| i as f64 * 0.1 + 0.05).collect();
        let roots = scan_roots(&f, &pts, 1e-14);
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([1.0, 2.0, 5.0]) {
            assert!((r - e).abs() < 1e-12);
        }
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let g = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10, 200);
        assert!((g.x - 0.3).abs() < 1e-9);
        assert!(g.iterations < 60);
    }

    #[test]
    fn geometric_grid_endpoints() {
        let g = geometric_grid(1e-3, 1e3, 7);
        assert!((g[0] - 1e-3).abs() < 1e-18);
        assert!((g[6] - 1e3).abs() < 1e-9);
        assert!((g[3] - 1.0).abs() < 1e-12);
    }
}
