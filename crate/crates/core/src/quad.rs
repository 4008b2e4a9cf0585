//! Adaptive quadrature for the self-cell average of a radial kernel.
//!
//! The kernels in use (`log r`, `log(1+r)`, `log(1+1/r)`, `1/r`) are smooth
//! away from the origin and integrably singular at it. The cell is split
//! into four symmetric quadrants; each quadrant is peeled into geometric
//! L-shaped shells around the corner singularity, and each shell rectangle
//! is integrated with adaptive tensor Gauss-Legendre. The innermost corner
//! square shrinks until its worst-case contribution is below tolerance.

/// 7-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_X: [f64; 7] = [
    -0.9491079123427585,
    -0.7415311855993945,
    -0.4058451513773972,
    0.0,
    0.4058451513773972,
    0.7415311855993945,
    0.9491079123427585,
];
const GL_W: [f64; 7] = [
    0.1294849661688697,
    0.2797053914892767,
    0.3818300505051189,
    0.4179591836734694,
    0.3818300505051189,
    0.2797053914892767,
    0.1294849661688697,
];

fn gl_rect(f: &impl Fn(f64, f64) -> f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let cx = 0.5 * (x0 + x1);
    let rx = 0.5 * (x1 - x0);
    let cy = 0.5 * (y0 + y1);
    let ry = 0.5 * (y1 - y0);
    let mut acc = 0.0;
    for (xi, wi) in GL_X.iter().zip(GL_W) {
        let x = cx + rx * xi;
        let mut inner = 0.0;
        for (yj, wj) in GL_X.iter().zip(GL_W) {
            inner += wj * f(x, cy + ry * yj);
        }
        acc += wi * inner;
    }
    acc * rx * ry
}

fn adaptive_rect(
    f: &impl Fn(f64, f64) -> f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let whole = gl_rect(f, x0, x1, y0, y1);
    let mx = 0.5 * (x0 + x1);
    let my = 0.5 * (y0 + y1);
    let split = gl_rect(f, x0, mx, y0, my)
        + gl_rect(f, mx, x1, y0, my)
        + gl_rect(f, x0, mx, my, y1)
        + gl_rect(f, mx, x1, my, y1);
    if (split - whole).abs() <= tol || depth == 0 {
        return split;
    }
    let t = tol / 4.0;
    adaptive_rect(f, x0, mx, y0, my, t, depth - 1)
        + adaptive_rect(f, mx, x1, y0, my, t, depth - 1)
        + adaptive_rect(f, x0, mx, my, y1, t, depth - 1)
        + adaptive_rect(f, mx, x1, my, y1, t, depth - 1)
}

/// `(1/h^2) * integral over [-h/2, h/2]^2 of k(|z|) dz` to absolute
/// tolerance `tol` on the average. `k` must be integrable at the origin and
/// bounded by `c (1 + |log r| + 1/r)` near it.
pub fn singular_cell_average(k: impl Fn(f64) -> f64, h: f64, tol: f64) -> f64 {
    let a = 0.5 * h;
    let tol_integral = tol * h * h;
    // one quadrant [0,a]^2 by symmetry of |z|
    let f = |x: f64, y: f64| k(x.hypot(y));
    let mut total = 0.0;
    let mut s = a;
    // peel L-shaped shells [0,s]^2 \ [0,s/2]^2 until the corner square's
    // worst-case mass (bounded via |k| <= c(1+|log s|+1/s) on it) is negligible
    let shells_tol = tol_integral / 8.0;
    for shell in 0..200 {
        let s2 = 0.5 * s;
        let corner_bound = s2 * s2 * (1.0 + s2.ln().abs()) + 4.0 * s2 * k_mass_bound(&k, s2);
        total += adaptive_rect(&f, s2, s, 0.0, s, shells_tol / (shell + 1) as f64, 24);
        total += adaptive_rect(&f, 0.0, s2, s2, s, shells_tol / (shell + 1) as f64, 24);
        s = s2;
        if corner_bound < tol_integral / 16.0 {
            break;
        }
    }
    4.0 * total / (h * h)
}

// crude bound for the remaining corner mass: sample |k| on the shell edge and
// assume 1/r-type growth inward
fn k_mass_bound(k: &impl Fn(f64) -> f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    k(s).abs() * s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_cell_average_matches_closed_form() {
        // (1/h^2) int_{[-h/2,h/2]^2} ln|z| dz = ln h + pi/4 - 3/2 - (ln 2)/2
        let c1 = std::f64::consts::FRAC_PI_4 - 1.5 - 0.5 * std::f64::consts::LN_2;
        for h in [1.0, 0.25, 0.1] {
            let got = singular_cell_average(|r| r.ln(), h, 1e-12);
            let want = h.ln() + c1;
            assert!((got - want).abs() < 1e-11, "h={h}: got {got}, want {want}");
        }
    }

    #[test]
    fn riesz_cell_average_matches_closed_form() {
        // (1/h^2) int 1/|z| dz = 4 asinh(1) / h
        for h in [1.0, 0.5, 0.125] {
            let got = singular_cell_average(|r| 1.0 / r, h, 1e-12);
            let want = 4.0 * 1.0f64.asinh() / h;
            assert!(
                (got - want).abs() < 1e-10 * want,
                "h={h}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn smooth_kernel_average_is_exact() {
        // k(r) = r^2 averages to h^2/6 over the cell
        let h = 0.3;
        let got = singular_cell_average(|r| r * r, h, 1e-13);
        assert!((got - h * h / 6.0).abs() < 1e-13);
    }
}
