//! The discrete X-metric `M = -laplacian + V + log(1+|x|)` and a plain
//! conjugate gradient solver for it.
//!
//! `M` is symmetric positive definite (the weight is bounded below by
//! `inf V > 0`), so CG applies directly. It serves two roles: the dual-norm
//! surrogate in the Cerami residual, and the descent preconditioner in the
//! solver. All inner products go through the deterministic reductions.

use crate::grid::{GridSpec, ScalarField};
use crate::{par, sum};

pub(crate) struct XMetric {
    grid: GridSpec,
    /// `V(x) + log(1+|x|)` at each cell
    weight: Vec<f64>,
}

impl XMetric {
    pub fn new(v_field: &ScalarField, star_field: &ScalarField) -> Self {
        let weight = v_field
            .values()
            .iter()
            .zip(star_field.values())
            .map(|(&a, &b)| a + b)
            .collect();
        Self {
            grid: v_field.grid(),
            weight,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// `out = -lap(z) + w z`
    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        let n = self.grid.n();
        let inv_h2 = 1.0 / self.grid.cell_area();
        let w = &self.weight;
        par::for_each_chunk_mut(out, n, |i, row| {
            for (j, o) in row.iter_mut().enumerate() {
                let c = z[i * n + j];
                let west = if i > 0 { z[(i - 1) * n + j] } else { 0.0 };
                let east = if i + 1 < n { z[(i + 1) * n + j] } else { 0.0 };
                let south = if j > 0 { z[i * n + j - 1] } else { 0.0 };
                let north = if j + 1 < n { z[i * n + j + 1] } else { 0.0 };
                *o = (4.0 * c - west - east - south - north) * inv_h2 + w[i * n + j] * c;
            }
        });
    }
}

fn dot(n: usize, a: &[f64], b: &[f64]) -> f64 {
    sum::sum_rows(n, |i| {
        sum::neumaier((i * n..(i + 1) * n).map(|k| a[k] * b[k]))
    })
}

/// Solve `M x = rhs` to relative residual `tol`, starting from `x` (warm
/// start; pass zeros for a cold solve). Returns the iteration count.
pub(crate) fn cg_solve(
    metric: &XMetric,
    rhs: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> usize {
    let n = metric.grid().n();
    let len = rhs.len();
    let rhs_norm = dot(n, rhs, rhs).sqrt();
    if rhs_norm == 0.0 {
        x.fill(0.0);
        return 0;
    }
    let mut r = vec![0.0; len];
    let mut ap = vec![0.0; len];
    metric.apply(x, &mut ap);
    for k in 0..len {
        r[k] = rhs[k] - ap[k];
    }
    let mut p = r.clone();
    let mut rr = dot(n, &r, &r);
    let target = tol * rhs_norm;
    let mut iterations = 0;
    while rr.sqrt() > target && iterations < max_iter {
        metric.apply(&p, &mut ap);
        let pap = dot(n, &p, &ap);
        if pap <= 0.0 {
            break; // loss of positive definiteness means rounding won; stop
        }
        let alpha = rr / pap;
        for k in 0..len {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_next = dot(n, &r, &r);
        let beta = rr_next / rr;
        for k in 0..len {
            p[k] = r[k] + beta * p[k];
        }
        rr = rr_next;
        iterations += 1;
    }
    iterations
}
