//! Truncated computational domain, cell-centered scalar fields, quadrature
//! and norms.
//!
//! The square `[-L, L]^2` is split into `n x n` cells of side `h = 2L/n`;
//! fields are sampled at cell centers and extended by zero outside the box.
//! All quadrature is the midpoint rule with weight `h^2`. The Dirichlet
//! energy uses forward differences over cell links including the boundary
//! ghost links, which makes the five-point Laplacian its exact discrete
//! adjoint.

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::{par, sum};

/// The truncated computational square: half-width `L`, `n` cells per side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    half_width: f64,
    n: usize,
    spacing: f64,
}

impl GridSpec {
    /// `n` must be even and at least 8; `half_width` positive.
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-width must be positive and finite, got {half_width}"
            )));
        }
        if n < 8 {
            return Err(Error::InvalidGrid(format!(
                "need at least 8 cells per side, got {n}"
            )));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "cell count must be even for the padded convolution, got {n}"
            )));
        }
        Ok(Self {
            half_width,
            n,
            spacing: 2.0 * half_width / n as f64,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Cell side `h`, represented exactly as the quotient `2L/n`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Midpoint quadrature weight `h^2`.
    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    pub fn cell_count(&self) -> usize {
        self.n * self.n
    }

    /// Center of cell `(i, j)`: `(-L + (i+1/2)h, -L + (j+1/2)h)`.
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            -self.half_width + (i as f64 + 0.5) * self.spacing,
            -self.half_width + (j as f64 + 0.5) * self.spacing,
        )
    }
}

/// A real-valued function sampled at cell centers, row-major in `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.cell_count()],
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64 + Sync + Send) -> Self {
        let n = grid.n();
        let mut field = Self::zeros(grid);
        par::for_each_chunk_mut(&mut field.values, n, |i, row| {
            for (j, v) in row.iter_mut().enumerate() {
                let (x, y) = grid.center(i, j);
                *v = f(x, y);
            }
        });
        field
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::InvalidInput(format!(
                "expected {} values for a {0}x{0} grid, got {1}",
                grid.n(),
                values.len()
            )));
        }
        let field = Self { grid, values };
        field.validate()?;
        Ok(field)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.grid.n + j] = v;
    }

    /// Errors with the first non-finite entry, if any.
    pub fn validate(&self) -> Result<()> {
        let n = self.grid.n;
        for (k, v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteField { i: k / n, j: k % n });
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scale_in_place(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.scale_in_place(c);
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync + Send) -> Self {
        let mut out = self.clone();
        par::for_each_chunk_mut(&mut out.values, self.grid.n, |_, row| {
            for v in row.iter_mut() {
                *v = f(*v);
            }
        });
        out
    }

    /// Pointwise max(u, 0).
    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(0.0))
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    /// `self - c * other`; grids must match.
    pub fn sub_scaled(&self, other: &Self, c: f64) -> Result<Self> {
        check_same_grid(self, other)?;
        let mut out = self.clone();
        for (o, &v) in out.values.iter_mut().zip(&other.values) {
            *o -= c * v;
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn check_same_grid(a: &ScalarField, b: &ScalarField) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(format!(
            "fields on different grids: (L={}, n={}) vs (L={}, n={})",
            a.grid.half_width, a.grid.n, b.grid.half_width, b.grid.n
        )));
    }
    Ok(())
}

/// Every norm used by the variational framework, evaluated consistently on
/// one field. `x_norm_sq` is the squared weighted-space norm
/// `dirichlet + v_weighted + star`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub l2: f64,
    pub p_exp: f64,
    pub lp: f64,
    pub dirichlet: f64,
    pub v_weighted: f64,
    pub star: f64,
    pub x_norm_sq: f64,
    pub h1_sq: f64,
}

/// `(h^2 sum |u|^p)^(1/p)`; zero iff `u == 0`.
pub fn lp_norm(u: &ScalarField, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "lp_norm needs finite p >= 1, got {p}"
        )));
    }
    u.validate()?;
    let n = u.grid.n();
    let vals = u.values();
    let total = if p == 2.0 {
        sum::sum_rows(n, |i| {
            sum::neumaier(vals[i * n..(i + 1) * n].iter().map(|&v| v * v))
        })
    } else {
        sum::sum_rows(n, |i| {
            sum::neumaier(vals[i * n..(i + 1) * n].iter().map(|&v| v.abs().powf(p)))
        })
    };
    Ok((u.grid.cell_area() * total).powf(1.0 / p))
}

/// Forward-difference Dirichlet energy `h^2 sum |grad u|^2` with zero ghost
/// cells outside the box. Every link, including the boundary ghost links,
/// is counted exactly once, so the value is `sum over links (du)^2`.
pub fn dirichlet_energy(u: &ScalarField) -> Result<f64> {
    u.validate()?;
    Ok(dirichlet_energy_unchecked(u))
}

pub(crate) fn dirichlet_energy_unchecked(u: &ScalarField) -> f64 {
    let n = u.grid.n();
    let vals = u.values();
    sum::sum_rows(n, |i| {
        let row = &vals[i * n..(i + 1) * n];
        let next = if i + 1 < n {
            Some(&vals[(i + 1) * n..(i + 2) * n])
        } else {
            None
        };
        let mut terms = Vec::with_capacity(3 * n + 2);
        for j in 0..n {
            // x-link (i -> i+1), ghost row above the last one
            let d = match next {
                Some(nr) => nr[j] - row[j],
                None => -row[j],
            };
            terms.push(d * d);
            // y-link (j -> j+1), ghost column after the last one
            let d = if j + 1 < n {
                row[j + 1] - row[j]
            } else {
                -row[j]
            };
            terms.push(d * d);
            // left ghost x-link belongs to row 0
            if i == 0 {
                terms.push(row[j] * row[j]);
            }
        }
        // bottom ghost y-link of this row
        terms.push(row[0] * row[0]);
        sum::neumaier(terms)
    })
}

/// Link pairing `sum over links (du)(dv)`, the bilinear form whose diagonal
/// is `dirichlet_energy`.
pub(crate) fn dirichlet_pairing(u: &ScalarField, v: &ScalarField) -> f64 {
    let n = u.grid.n();
    let uv = u.values();
    let vv = v.values();
    sum::sum_rows(n, |i| {
        let ur = &uv[i * n..(i + 1) * n];
        let vr = &vv[i * n..(i + 1) * n];
        let (un, vn) = if i + 1 < n {
            (
                Some(&uv[(i + 1) * n..(i + 2) * n]),
                Some(&vv[(i + 1) * n..(i + 2) * n]),
            )
        } else {
            (None, None)
        };
        let mut terms = Vec::with_capacity(3 * n + 2);
        for j in 0..n {
            let du = match un {
                Some(r) => r[j] - ur[j],
                None => -ur[j],
            };
            let dv = match vn {
                Some(r) => r[j] - vr[j],
                None => -vr[j],
            };
            terms.push(du * dv);
            let du = if j + 1 < n { ur[j + 1] - ur[j] } else { -ur[j] };
            let dv = if j + 1 < n { vr[j + 1] - vr[j] } else { -vr[j] };
            terms.push(du * dv);
            if i == 0 {
                terms.push(ur[j] * vr[j]);
            }
        }
        terms.push(ur[0] * vr[0]);
        sum::neumaier(terms)
    })
}

/// `h^2 sum w u^2`.
pub fn weighted_mass(u: &ScalarField, w: &ScalarField) -> Result<f64> {
    check_same_grid(u, w)?;
    u.validate()?;
    w.validate()?;
    Ok(weighted_mass_unchecked(u, w))
}

pub(crate) fn weighted_mass_unchecked(u: &ScalarField, w: &ScalarField) -> f64 {
    let n = u.grid.n();
    let uv = u.values();
    let wv = w.values();
    u.grid.cell_area()
        * sum::sum_rows(n, |i| {
            sum::neumaier((i * n..(i + 1) * n).map(|k| wv[k] * uv[k] * uv[k]))
        })
}

/// `h^2 sum f g`.
pub fn quadrature_dot(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    check_same_grid(f, g)?;
    Ok(quadrature_dot_unchecked(f, g))
}

pub(crate) fn quadrature_dot_unchecked(f: &ScalarField, g: &ScalarField) -> f64 {
    let n = f.grid.n();
    let fv = f.values();
    let gv = g.values();
    f.grid.cell_area()
        * sum::sum_rows(n, |i| {
            sum::neumaier((i * n..(i + 1) * n).map(|k| fv[k] * gv[k]))
        })
}

/// Five-point `-laplacian` with zero Dirichlet ghosts, scaled `1/h^2`.
/// Exact discrete adjoint of `dirichlet_energy`:
/// `<neg_laplacian(u), v>_h = dirichlet_pairing(u, v)` in exact arithmetic.
pub fn neg_laplacian(u: &ScalarField) -> ScalarField {
    let n = u.grid.n();
    let inv_h2 = 1.0 / u.grid.cell_area();
    let vals = u.values();
    let mut out = ScalarField::zeros(u.grid);
    par::for_each_chunk_mut(out.values_mut(), n, |i, row| {
        for (j, o) in row.iter_mut().enumerate() {
            let c = vals[i * n + j];
            let w = if i > 0 { vals[(i - 1) * n + j] } else { 0.0 };
            let e = if i + 1 < n {
                vals[(i + 1) * n + j]
            } else {
                0.0
            };
            let s = if j > 0 { vals[i * n + j - 1] } else { 0.0 };
            let nn = if j + 1 < n { vals[i * n + j + 1] } else { 0.0 };
            *o = (4.0 * c - w - e - s - nn) * inv_h2;
        }
    });
    out
}

/// The `log(1+|x|)` weight sampled at cell centers.
pub fn star_weight(grid: GridSpec) -> ScalarField {
    ScalarField::from_fn(grid, |x, y| (1.0 + x.hypot(y)).ln())
}

/// Populate every norm in one pass over the field.
pub fn norms(u: &ScalarField, potential: &PotentialSpec, p: f64) -> Result<NormReport> {
    let v_field = potential.evaluate(u.grid())?;
    norms_with_weights(u, &v_field, &star_weight(u.grid()), p)
}

pub(crate) fn norms_with_weights(
    u: &ScalarField,
    v_field: &ScalarField,
    star_field: &ScalarField,
    p: f64,
) -> Result<NormReport> {
    let l2 = lp_norm(u, 2.0)?;
    let lp = lp_norm(u, p)?;
    let dirichlet = dirichlet_energy_unchecked(u);
    let v_weighted = weighted_mass_unchecked(u, v_field);
    let star = weighted_mass_unchecked(u, star_field);
    Ok(NormReport {
        l2,
        p_exp: p,
        lp,
        dirichlet,
        v_weighted,
        star,
        x_norm_sq: dirichlet + v_weighted + star,
        h1_sq: dirichlet + l2 * l2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn random_field(grid: GridSpec, seed: u64) -> ScalarField {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut f = ScalarField::zeros(grid);
        for v in f.values_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        f
    }

    /// Double-double accumulation; independent oracle for the quadrature sums.
    fn dd_sum(xs: impl Iterator<Item = f64>) -> f64 {
        let mut hi = 0.0f64;
        let mut lo = 0.0f64;
        for x in xs {
            let s = hi + x;
            let bb = s - hi;
            let err = (hi - (s - bb)) + (x - bb);
            hi = s;
            lo += err;
        }
        hi + lo
    }

    #[test]
    fn grid_invariants() {
        let g = GridSpec::new(1.0, 8).unwrap();
        assert_eq!(g.spacing(), 2.0 * g.half_width() / g.n() as f64);
        assert!(GridSpec::new(1.0, 7).is_err());
        assert!(GridSpec::new(1.0, 9).is_err());
        assert!(GridSpec::new(1.0, 6).is_err());
        assert!(GridSpec::new(0.0, 8).is_err());
        assert!(GridSpec::new(-2.0, 8).is_err());
    }

    #[test]
    fn cell_centers_are_symmetric() {
        let g = GridSpec::new(2.0, 16).unwrap();
        let (x0, y0) = g.center(0, 0);
        let (x1, y1) = g.center(15, 15);
        assert_eq!(x0, -x1);
        assert_eq!(y0, -y1);
    }

    #[test]
    fn lp_norm_constant_field() {
        // u = 1 on [-1,1]^2 has area 4, so |u|_2 = 2
        for n in [8, 16, 64] {
            let g = GridSpec::new(1.0, n).unwrap();
            let u = ScalarField::from_fn(g, |_, _| 1.0);
            assert!((lp_norm(&u, 2.0).unwrap() - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn lp_norm_zero_field() {
        let g = GridSpec::new(1.0, 16).unwrap();
        let u = ScalarField::zeros(g);
        assert_eq!(lp_norm(&u, 2.0).unwrap(), 0.0);
        assert_eq!(lp_norm(&u, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn lp_norm_matches_extended_precision_resummation() {
        let g = GridSpec::new(1.5, 24).unwrap();
        let u = random_field(g, 7);
        let p = 4.0;
        let direct =
            (g.cell_area() * dd_sum(u.values().iter().map(|v| v.abs().powf(p)))).powf(1.0 / p);
        let got = lp_norm(&u, p).unwrap();
        assert!((got - direct).abs() <= 1e-13 * direct.abs());
    }

    #[test]
    fn lp_norm_rejects_non_finite() {
        let g = GridSpec::new(1.0, 8).unwrap();
        let mut u = ScalarField::zeros(g);
        u.values_mut()[5] = f64::NAN;
        assert!(matches!(
            lp_norm(&u, 2.0),
            Err(Error::NonFiniteField { .. })
        ));
    }

    #[test]
    fn dirichlet_zero_field() {
        let g = GridSpec::new(1.0, 16).unwrap();
        assert_eq!(dirichlet_energy(&ScalarField::zeros(g)).unwrap(), 0.0);
    }

    #[test]
    fn dirichlet_unit_spike_is_four() {
        // interior spike: four links of magnitude 1/h, energy h^2 * 4 / h^2 = 4
        for n in [8, 32] {
            let g = GridSpec::new(1.0, n).unwrap();
            let mut u = ScalarField::zeros(g);
            u.set(n / 2, n / 2, 1.0);
            assert!((dirichlet_energy(&u).unwrap() - 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn dirichlet_corner_spike_counts_ghost_links() {
        let g = GridSpec::new(1.0, 8).unwrap();
        let mut u = ScalarField::zeros(g);
        u.set(0, 0, 1.0);
        assert!((dirichlet_energy(&u).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn dirichlet_constant_is_not_flat() {
        // zero extension makes constants cost boundary energy
        let g = GridSpec::new(1.0, 16).unwrap();
        let u = ScalarField::from_fn(g, |_, _| 1.0);
        assert!(dirichlet_energy(&u).unwrap() > 0.0);
    }

    #[test]
    fn dirichlet_sine_mode_near_continuum() {
        // int |grad sin(pi x)sin(pi y)|^2 over [-1,1]^2 = 2 pi^2. The sine
        // mode has a nonzero normal derivative at the box edge, so the zero
        // extension kinks there and the link quadrature converges at first
        // order; Richardson with the h^1 model recovers the continuum value.
        let continuum = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
        let energy_at = |n: usize| {
            let g = GridSpec::new(1.0, n).unwrap();
            let u = ScalarField::from_fn(g, |x, y| {
                (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin()
            });
            dirichlet_energy(&u).unwrap()
        };
        let coarse = energy_at(128);
        let reference = 2.0 * energy_at(1024) - energy_at(512);
        assert!((reference - continuum).abs() / continuum < 1e-4);
        assert!((coarse - reference).abs() / reference < 0.01);
    }

    #[test]
    fn weighted_mass_constant() {
        let g = GridSpec::new(1.0, 16).unwrap();
        let one = ScalarField::from_fn(g, |_, _| 1.0);
        assert!((weighted_mass(&one, &one).unwrap() - 4.0).abs() < 1e-13);
    }

    #[test]
    fn weighted_mass_zero_field() {
        let g = GridSpec::new(2.0, 16).unwrap();
        let w = star_weight(g);
        let u = ScalarField::zeros(g);
        assert_eq!(weighted_mass(&u, &w).unwrap(), 0.0);
    }

    #[test]
    fn weighted_mass_matches_extended_precision() {
        let g = GridSpec::new(3.0, 32).unwrap();
        let u = random_field(g, 11);
        let w = ScalarField::from_fn(g, |x, y| 1.0 + x * x + y * y);
        let oracle = g.cell_area()
            * dd_sum(
                u.values()
                    .iter()
                    .zip(w.values())
                    .map(|(&uv, &wv)| wv * uv * uv),
            );
        let got = weighted_mass(&u, &w).unwrap();
        assert!((got - oracle).abs() <= 1e-13 * oracle.abs().max(1.0));
    }

    #[test]
    fn weighted_mass_grid_mismatch() {
        let a = ScalarField::zeros(GridSpec::new(1.0, 8).unwrap());
        let b = ScalarField::zeros(GridSpec::new(1.0, 16).unwrap());
        assert!(matches!(weighted_mass(&a, &b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn norm_report_zero_field() {
        let g = GridSpec::new(4.0, 16).unwrap();
        let v = PotentialSpec::harmonic(1.0, 1.0).unwrap();
        let r = norms(&ScalarField::zeros(g), &v, 6.0).unwrap();
        assert_eq!(r.l2, 0.0);
        assert_eq!(r.lp, 0.0);
        assert_eq!(r.dirichlet, 0.0);
        assert_eq!(r.v_weighted, 0.0);
        assert_eq!(r.star, 0.0);
        assert_eq!(r.x_norm_sq, 0.0);
        assert_eq!(r.h1_sq, 0.0);
    }

    #[test]
    fn norm_report_decomposition() {
        let g = GridSpec::new(4.0, 24).unwrap();
        let v = PotentialSpec::harmonic(1.0, 1.0).unwrap();
        for seed in 0..100 {
            let u = random_field(g, seed);
            let r = norms(&u, &v, 6.0).unwrap();
            let lhs = r.x_norm_sq;
            let rhs = r.dirichlet + r.v_weighted + r.star;
            assert!((lhs - rhs).abs() <= 1e-14 * rhs.abs());
            assert!(r.l2 >= 0.0 && r.lp >= 0.0 && r.star >= 0.0);
        }
    }

    #[test]
    fn star_norm_of_concentrated_mass() {
        // unit mass at |x| ~ 3 weighs ~ log(4)
        let g = GridSpec::new(6.0, 240).unwrap();
        // find the cell center closest to (3, 0)
        let mut best = (0usize, 0usize, f64::MAX);
        for i in 0..g.n() {
            for j in 0..g.n() {
                let (x, y) = g.center(i, j);
                let d = (x - 3.0).hypot(y);
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        let mut u = ScalarField::zeros(g);
        // unit mass: h^2 u^2 = 1
        u.set(best.0, best.1, 1.0 / g.cell_area().sqrt());
        let w = star_weight(g);
        let star = weighted_mass(&u, &w).unwrap();
        let (x, y) = g.center(best.0, best.1);
        let expected = (1.0 + x.hypot(y)).ln();
        assert!((star - expected).abs() < 1e-12);
        assert!((star - 4.0f64.ln()).abs() < 0.01);
    }

    #[test]
    fn laplacian_is_exact_adjoint_of_links() {
        let g = GridSpec::new(2.0, 20).unwrap();
        for seed in 0..10 {
            let u = random_field(g, seed);
            let v = random_field(g, seed + 100);
            let lhs = quadrature_dot(&neg_laplacian(&u), &v).unwrap();
            let rhs = dirichlet_pairing(&u, &v);
            assert!(
                (lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0),
                "adjoint gap {} vs {}",
                lhs,
                rhs
            );
        }
    }

    #[test]
    fn laplacian_quadratic_form_is_dirichlet() {
        let g = GridSpec::new(2.0, 16).unwrap();
        let u = random_field(g, 3);
        let lhs = quadrature_dot(&neg_laplacian(&u), &u).unwrap();
        let rhs = dirichlet_energy(&u).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }
}
