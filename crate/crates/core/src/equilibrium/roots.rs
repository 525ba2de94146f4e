//! Bracketing root scan on a mixed logarithmic/linear grid plus bisection.

use crate::scalar::Scalar;

/// Number of grid points used by the equilibrium scans.
pub const SCAN_POINTS: usize = 2048;

/// Grid over `(lo, hi]`: half the points log-spaced from `lo` (resolves roots
/// close to zero), half evenly spaced; merged, sorted and deduplicated.
pub(crate) fn mixed_grid<T: Scalar>(lo: T, hi: T, count: usize) -> Vec<T> {
    let half = (count / 2).max(2);
    let mut grid = Vec::with_capacity(2 * half);
    let (llo, lhi) = (lo.ln(), hi.ln());
    for i in 0..half {
        let s = T::from_usize_lossy(i) / T::from_usize_lossy(half - 1);
        grid.push((llo + (lhi - llo) * s).exp());
    }
    for i in 1..=half {
        grid.push(hi * T::from_usize_lossy(i) / T::from_usize_lossy(half));
    }
    grid.push(hi);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    grid.dedup_by(|a, b| (*a - *b).abs() <= T::epsilon() * b.abs());
    grid
}

/// Bisection on a sign-changing bracket until `|f| <= ftol` or the bracket
/// collapses to machine precision.
pub(crate) fn bisect<T: Scalar>(f: &impl Fn(T) -> T, mut a: T, mut b: T, ftol: T) -> T {
    let mut fa = f(a);
    for _ in 0..400 {
        let mid = a + (b - a) * T::lit(0.5);
        let fm = f(mid);
        if fm.abs() <= ftol || fm == T::zero() {
            return mid;
        }
        if mid <= a || mid >= b || (b - a) <= T::epsilon() * T::lit(2.0) * mid.abs() {
            return mid;
        }
        if (fm > T::zero()) == (fa > T::zero()) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    a + (b - a) * T::lit(0.5)
}

/// All sign changes of `f` along `grid`, refined by bisection.
pub(crate) fn scan_roots<T: Scalar>(f: impl Fn(T) -> T, grid: &[T], ftol: T) -> Vec<T> {
    let mut roots = Vec::new();
    let values: Vec<T> = grid.iter().map(|&x| f(x)).collect();
    let mut i = 0;
    while i + 1 < grid.len() {
        let (f0, f1) = (values[i], values[i + 1]);
        if f0 == T::zero() {
            roots.push(grid[i]);
        } else if f1 != T::zero() && (f0 > T::zero()) != (f1 > T::zero()) {
            roots.push(bisect(&f, grid[i], grid[i + 1], ftol));
        }
        i += 1;
    }
    if let (Some(&last), Some(&fl)) = (grid.last(), values.last()) {
        if fl == T::zero() {
            roots.push(last);
        }
    }
    roots
}

/// Roots where `f` touches zero without changing sign (even multiplicity).
/// Candidates are local minima of `|f|` on the grid; each is refined by
/// golden-section search and kept if `|f| <= ftol` there.
pub(crate) fn touch_roots<T: Scalar>(f: impl Fn(T) -> T, grid: &[T], ftol: T) -> Vec<T> {
    let values: Vec<T> = grid.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 1..grid.len().saturating_sub(1) {
        let (l, m, r) = (values[i - 1], values[i], values[i + 1]);
        let same_sign = (l > T::zero()) == (m > T::zero()) && (m > T::zero()) == (r > T::zero());
        if m == T::zero() || !same_sign || m.abs() > l.abs() || m.abs() > r.abs() {
            continue;
        }
        let x = golden_min(&|x| f(x).abs(), grid[i - 1], grid[i + 1]);
        if f(x).abs() <= ftol {
            roots.push(x);
        }
    }
    roots
}

fn golden_min<T: Scalar>(h: &impl Fn(T) -> T, mut a: T, mut b: T) -> T {
    let inv_phi = T::lit(0.618_033_988_749_894_9);
    let mut x1 = b - (b - a) * inv_phi;
    let mut x2 = a + (b - a) * inv_phi;
    let (mut h1, mut h2) = (h(x1), h(x2));
    for _ in 0..200 {
        if (b - a) <= T::epsilon() * T::lit(4.0) * b.abs() {
            break;
        }
        if h1 <= h2 {
            b = x2;
            x2 = x1;
            h2 = h1;
            x1 = b - (b - a) * inv_phi;
            h1 = h(x1);
        } else {
            a = x1;
            x1 = x2;
            h1 = h2;
            x2 = a + (b - a) * inv_phi;
            h2 = h(x2);
        }
    }
    if h1 <= h2 {
        x1
    } else {
        x2
    }
}

/// Sign-change roots and touching roots, sorted, with near-duplicates merged.
pub(crate) fn all_roots<T: Scalar>(f: impl Fn(T) -> T, grid: &[T], ftol: T) -> Vec<T> {
    let mut roots = scan_roots(&f, grid, ftol);
    roots.extend(touch_roots(&f, grid, ftol));
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    roots.dedup_by(|a, b| (*a - *b).abs() <= T::lit(1e-9) * (T::one() + b.abs()));
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_sorted_and_covers_range() {
        let g = mixed_grid(1e-12_f64, 2.0, SCAN_POINTS);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!((g[0] - 1e-12).abs() < 1e-24);
        assert_eq!(*g.last().unwrap(), 2.0);
        assert!(g.len() >= SCAN_POINTS);
    }

    #[test]
    fn finds_all_cubic_roots() {
        // (y - 2/3)(y - 1)(y - 2), the pre-step bistable profile
        let f = |y: f64| (y - 2.0 / 3.0) * (y - 1.0) * (y - 2.0);
        let g = mixed_grid(1e-12, 5.0, SCAN_POINTS);
        let r = scan_roots(f, &g, 1e-14);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([2.0 / 3.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn resolves_root_near_zero() {
        let f = |y: f64| 0.01 - y;
        let g = mixed_grid(1e-12, 100.0, SCAN_POINTS);
        let r = scan_roots(f, &g, 1e-15);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.01).abs() < 1e-13);
    }

    #[test]
    fn no_sign_change_no_root() {
        let g = mixed_grid(1e-6, 1.0, 64);
        assert!(scan_roots(|y: f64| 1.0 + y, &g, 1e-12).is_empty());
    }

    #[test]
    fn touching_root_found_off_grid() {
        // double root at an irrational point, no sign change anywhere
        let r0 = std::f64::consts::FRAC_1_SQRT_2;
        let f = |y: f64| -(y - r0) * (y - r0) * (1.0 + y);
        let g = mixed_grid(1e-9, 3.0, 257);
        assert!(scan_roots(f, &g, 1e-12).is_empty());
        let r = all_roots(f, &g, 1e-12);
        assert_eq!(r.len(), 1);
        assert!((r[0] - r0).abs() < 1e-6);
    }

    #[test]
    fn near_miss_minimum_is_not_a_root() {
        let f = |y: f64| (y - 1.0) * (y - 1.0) + 1e-3;
        let g = mixed_grid(1e-9, 3.0, 257);
        assert!(all_roots(f, &g, 1e-12).is_empty());
    }
}
