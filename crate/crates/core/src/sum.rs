//! Deterministic reductions.
//!
//! Every grid reduction goes through `sum_rows`: each row is accumulated with
//! Neumaier compensation, the row totals are combined with a fixed pairwise
//! tree. The row map may run in parallel, but since rows are independent and
//! the final reduction is sequential over a fixed layout, the result is
//! bit-identical for any thread count.

use crate::par;

/// Compensated (Neumaier) summation.
pub fn neumaier(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Pairwise summation with a small sequential base case.
pub fn pairwise(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise(&xs[..mid]) + pairwise(&xs[mid..])
}

/// Sum `rows` independent row totals; see module docs for the determinism
/// contract.
pub fn sum_rows<F>(rows: usize, row: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    pairwise(&par::map_indexed(rows, row))
}
