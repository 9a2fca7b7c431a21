//! Fixtures shared by the benchmarks.

use fraclab_core::FracOrder;

/// Orders exercised by every benchmark group.
pub fn orders() -> Vec<FracOrder> {
    [(1, 0.25), (2, 0.5), (3, 0.75)].iter().map(|&(n, s)| FracOrder::new(n, s).expect("valid order")).collect()
}

/// Point `(x_1, 0.3, 0.3, ...)` in the open half space.
pub fn interior_point(n: usize, x1: f64) -> Vec<f64> {
    let mut x = vec![0.3; n];
    x[0] = x1;
    x
}

/// Mirror of [`interior_point`] across the boundary, scaled by `k`.
pub fn exterior_point(n: usize, k: f64) -> Vec<f64> {
    let mut y = interior_point(n, -k);
    y.iter_mut().skip(1).for_each(|c| *c *= -k);
    y
}
