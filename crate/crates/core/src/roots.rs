//! Scalar search primitives shared by the solvers: monotone root bracketing,
//! golden-section refinement and dense grid scans.

/// Finds a zero of a nonincreasing function on `[lo, hi]`.
///
/// Requires `f(lo) >= 0 >= f(hi)`. Bisects until the bracket is narrower
/// than `tol`, then takes one secant step across the final bracket. For the
/// piecewise-linear functions used throughout this crate the secant step is
/// exact once both ends lie on the same linear piece. When `f` vanishes on a
/// whole interval the lowest zero found by the bisection is kept.
pub fn nonincreasing_root<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo <= 0.0 {
        return lo;
    }
    if f_hi > 0.0 {
        return hi;
    }
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid > 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    let f_mid = f(mid);
    if f_hi == 0.0 {
        return hi;
    }
    let denom = f_lo - f_hi;
    if denom > 0.0 && denom.is_finite() {
        let secant = lo + f_lo * (hi - lo) / denom;
        if secant >= lo && secant <= hi {
            let f_sec = f(secant);
            if f_sec.abs() <= f_mid.abs() {
                return secant;
            }
        }
    }
    mid
}

/// Maximizes a unimodal function on `[lo, hi]` by golden-section search.
///
/// Returns `(argmax, value)`. Stops once the bracket is narrower than `tol`.
pub fn golden_max<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    if hi <= lo {
        return (lo, f(lo));
    }
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..300 {
        if hi - lo <= tol {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    // Candidates include the bracket ends.
    let mut best = (x1, f1);
    for (x, v) in [(x2, f2), (lo, f(lo)), (hi, f(hi))] {
        if v > best.1 || (v == best.1 && x < best.0) {
            best = (x, v);
        }
    }
    best
}

/// Evenly spaced grid with `points` nodes including both ends.
pub fn linspace(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> + Clone {
    let n = points.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |k| if k + 1 == n { hi } else { lo + step * k as f64 })
}

/// Scans a 1-D grid, then refines the best cell with golden-section search.
///
/// Ties on the grid resolve to the smallest coordinate; the refined point
/// replaces the grid point only on strict improvement.
pub fn grid_then_golden<F>(mut f: F, lo: f64, hi: f64, points: usize, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    if hi <= lo {
        return (lo, f(lo));
    }
    let n = points.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let mut best_k = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (k, x) in linspace(lo, hi, n).enumerate() {
        let v = f(x);
        if v > best_v {
            best_v = v;
            best_k = k;
        }
    }
    let best_x = if best_k + 1 == n { hi } else { lo + step * best_k as f64 };
    let cell_lo = (best_x - step).max(lo);
    let cell_hi = (best_x + step).min(hi);
    let (x, v) = golden_max(&mut f, cell_lo, cell_hi, tol);
    if v > best_v {
        (x, v)
    } else {
        (best_x, best_v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_of_linear_function_is_exact() {
        let r = nonincreasing_root(|x| 18.0 - 3.0 * x, -5.0, 40.0, 1e-10);
        assert_eq!(r, 6.0);
    }

    #[test]
    fn root_of_clamped_piecewise_function() {
        let f = |x: f64| (10.0 - x).clamp(0.0, 10.0) + (8.0 - x).clamp(0.0, 10.0) - x;
        let r = nonincreasing_root(f, -1.0, 30.0, 1e-12);
        assert!((r - 6.0).abs() < 1e-12);
    }

    #[test]
    fn flat_zero_region_returns_left_edge() {
        let f = |x: f64| (2.0 - x).max(0.0);
        let r = nonincreasing_root(f, 0.0, 10.0, 1e-12);
        assert!((r - 2.0).abs() < 1e-9);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, v) = golden_max(|x| -(x - 1.25) * (x - 1.25), -3.0, 4.0, 1e-10);
        assert!((x - 1.25).abs() < 1e-8);
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn golden_keeps_boundary_maximum() {
        let (x, _) = golden_max(|x| x, 0.0, 1.0, 1e-10);
        assert_eq!(x, 1.0);
    }

    #[test]
    fn grid_ties_resolve_to_smallest_point() {
        let (x, _) = grid_then_golden(|_| 3.0, 2.0, 5.0, 11, 1e-9);
        assert_eq!(x, 2.0);
    }

    #[test]
    fn linspace_hits_both_ends() {
        let v: Vec<f64> = linspace(0.0, 1.0, 5).collect();
        assert_eq!(v, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
