//! The action functional, its derivative, the fibering map and the
//! diagnostics that make the variational identities executable.
//!
//! With `a = int (|grad u|^2 + V u^2)`, `q = (gamma/2pi) V0(u)` and
//! `m = b |u|_p^p`, the energy along the ray through `u` is the fibering
//! polynomial `g(t) = t^2 a/2 + t^4 q/4 - t^p m/p`; for `p > 4` its positive
//! critical point is unique and defines the Nehari projection. The identity
//! `I(u) - I'(u)[u]/4 = a/4 + (1/4 - 1/p) m` holds for every discrete field,
//! not only critical points, and is checked at `1e-12`.

use crate::error::{Error, Result};
use crate::grid::{self, check_same_grid, star_weight, GridSpec, NormReport, ScalarField};
use crate::kernel::{v0_with_conv, ConvolutionPlan, TWO_PI};
use crate::potential::PotentialSpec;
use crate::precond::{cg_solve, XMetric};
use crate::sum;

/// Problem data: equation coefficients plus the sampled potential, the
/// `log(1+|x|)` weight and the convolution plan, built once per grid.
pub struct Problem {
    grid: GridSpec,
    potential: PotentialSpec,
    p_exp: f64,
    gamma: f64,
    b_coef: f64,
    v_field: ScalarField,
    star_field: ScalarField,
    plan: ConvolutionPlan,
    metric: XMetric,
}

/// Dual-norm CG tolerance used by the Cerami residual.
pub const CERAMI_CG_TOL: f64 = 1e-6;

impl Problem {
    /// Requires `p > 4` (standing hypothesis) and positive `gamma`, `b`.
    pub fn new(
        grid: GridSpec,
        potential: PotentialSpec,
        p_exp: f64,
        gamma: f64,
        b_coef: f64,
    ) -> Result<Self> {
        if !(p_exp.is_finite() && p_exp > 4.0) {
            return Err(Error::InvalidProblem(format!(
                "the nonlinearity exponent must satisfy p > 4, got p = {p_exp}"
            )));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        if !(b_coef.is_finite() && b_coef > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "b must be positive, got {b_coef}"
            )));
        }
        let v_field = potential.evaluate(grid)?;
        let star_field = star_weight(grid);
        let plan = ConvolutionPlan::new(grid);
        let metric = XMetric::new(&v_field, &star_field);
        Ok(Self {
            grid,
            potential,
            p_exp,
            gamma,
            b_coef,
            v_field,
            star_field,
            plan,
            metric,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn p_exp(&self) -> f64 {
        self.p_exp
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn b_coef(&self) -> f64 {
        self.b_coef
    }

    pub fn potential_field(&self) -> &ScalarField {
        &self.v_field
    }

    pub fn star_field(&self) -> &ScalarField {
        &self.star_field
    }

    pub fn plan(&self) -> &ConvolutionPlan {
        &self.plan
    }

    pub(crate) fn metric(&self) -> &XMetric {
        &self.metric
    }

    fn check(&self, u: &ScalarField) -> Result<()> {
        if u.grid() != self.grid {
            return Err(Error::GridMismatch(
                "field grid differs from problem grid".into(),
            ));
        }
        u.validate()
    }

    /// `h^2 (log conv u^2)`, shared by every nonlocal term.
    pub(crate) fn conv_sq(&self, u: &ScalarField) -> Vec<f64> {
        self.plan.convolve_sq(u)
    }

    /// Newtonian potential of `u^2`.
    pub fn phi(&self, u: &ScalarField) -> Result<ScalarField> {
        crate::kernel::phi_u(u, &self.plan)
    }

    pub fn norm_report(&self, u: &ScalarField) -> Result<NormReport> {
        grid::norms_with_weights(u, &self.v_field, &self.star_field, self.p_exp)
    }

    /// `I(u) = (a + q/2)/2 ... `: precisely `a/2 + q/4 - m/p`.
    pub fn energy(&self, u: &ScalarField) -> Result<f64> {
        self.check(u)?;
        let conv = self.conv_sq(u);
        Ok(self.fibering_with_conv(u, &conv).energy_at(1.0))
    }

    /// Fibering coefficients `(a, q, m)`; errors on `u = 0` where the ray
    /// degenerates.
    pub fn fibering_coefficients(&self, u: &ScalarField) -> Result<FiberingCoefficients> {
        self.check(u)?;
        let conv = self.conv_sq(u);
        let c = self.fibering_with_conv(u, &conv);
        if !(c.a > 0.0 && c.m > 0.0) {
            return Err(Error::Degenerate(format!(
                "fibering requires a nontrivial field (a = {}, m = {})",
                c.a, c.m
            )));
        }
        Ok(c)
    }

    pub(crate) fn fibering_with_conv(&self, u: &ScalarField, conv: &[f64]) -> FiberingCoefficients {
        let a =
            grid::dirichlet_energy_unchecked(u) + grid::weighted_mass_unchecked(u, &self.v_field);
        let q = self.gamma / TWO_PI * v0_with_conv(u, conv);
        let m = self.b_coef * self.lp_pow(u);
        FiberingCoefficients {
            a,
            q,
            m,
            p_exp: self.p_exp,
        }
    }

    /// `h^2 sum |u|^p` (the p-th power of the norm, not the norm).
    fn lp_pow(&self, u: &ScalarField) -> f64 {
        let n = self.grid.n();
        let p = self.p_exp;
        let vals = u.values();
        let total = if p == 6.0 {
            sum::sum_rows(n, |i| {
                sum::neumaier(vals[i * n..(i + 1) * n].iter().map(|&v| {
                    let v2 = v * v;
                    v2 * v2 * v2
                }))
            })
        } else {
            sum::sum_rows(n, |i| {
                sum::neumaier(vals[i * n..(i + 1) * n].iter().map(|&v| v.abs().powf(p)))
            })
        };
        self.grid.cell_area() * total
    }

    /// `I'(u)[v]`, assembled from the bilinear pieces (link pairing, mass
    /// terms, the convolution and the power term).
    pub fn directional_derivative(&self, u: &ScalarField, v: &ScalarField) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        check_same_grid(u, v)?;
        let conv = self.conv_sq(u);
        Ok(self.derivative_with_conv(u, v, &conv))
    }

    fn derivative_with_conv(&self, u: &ScalarField, v: &ScalarField, conv: &[f64]) -> f64 {
        let n = self.grid.n();
        let h2 = self.grid.cell_area();
        let links = grid::dirichlet_pairing(u, v);
        let uv = u.values();
        let vv = v.values();
        let wv = self.v_field.values();
        let mass = h2
            * sum::sum_rows(n, |i| {
                sum::neumaier((i * n..(i + 1) * n).map(|k| wv[k] * uv[k] * vv[k]))
            });
        // (gamma/2pi) B0(u^2, uv) = (gamma/2pi) h^2 sum conv u v
        let nonlocal = self.gamma / TWO_PI
            * h2
            * sum::sum_rows(n, |i| {
                sum::neumaier((i * n..(i + 1) * n).map(|k| conv[k] * uv[k] * vv[k]))
            });
        let p = self.p_exp;
        let power = self.b_coef
            * h2
            * sum::sum_rows(n, |i| {
                sum::neumaier((i * n..(i + 1) * n).map(|k| {
                    let x = uv[k];
                    if p == 6.0 {
                        let x2 = x * x;
                        x2 * x2 * x * vv[k]
                    } else {
                        x.abs().powf(p - 2.0) * x * vv[k]
                    }
                }))
            });
        links + mass + nonlocal - power
    }

    /// Strong-form gradient: `g = -lap u + V u + gamma phi_u u - b |u|^{p-2} u`.
    /// Adjoint-exact: `<g, v>_h = directional_derivative(u, v)` up to
    /// rounding, because the five-point Laplacian is the exact adjoint of
    /// the link gradient.
    pub fn gradient_field(&self, u: &ScalarField) -> Result<ScalarField> {
        self.check(u)?;
        let conv = self.conv_sq(u);
        Ok(self.gradient_with_conv(u, &conv))
    }

    pub(crate) fn gradient_with_conv(&self, u: &ScalarField, conv: &[f64]) -> ScalarField {
        let mut g = grid::neg_laplacian(u);
        let p = self.p_exp;
        let gamma_over = self.gamma / TWO_PI;
        let b = self.b_coef;
        let uv = u.values();
        let wv = self.v_field.values();
        for (k, gv) in g.values_mut().iter_mut().enumerate() {
            let x = uv[k];
            let phi_term = gamma_over * conv[k] * x;
            let power = if p == 6.0 {
                let x2 = x * x;
                x2 * x2 * x
            } else {
                x.abs().powf(p - 2.0) * x
            };
            *gv += wv[k] * x + phi_term - b * power;
        }
        g
    }

    /// `|I'(u)[u]|`'s signed value; zero on the Nehari manifold.
    pub fn nehari_slope(&self, u: &ScalarField) -> Result<f64> {
        self.check(u)?;
        let conv = self.conv_sq(u);
        Ok(self.fibering_with_conv(u, &conv).slope_at(1.0))
    }

    /// Relative gap of the identity `I(u) - I'(u)[u]/4 = a/4 + (1/4 - 1/p) m`,
    /// an exact identity of the discretized functional for arbitrary `u`.
    pub fn identity_check(&self, u: &ScalarField) -> Result<f64> {
        self.check(u)?;
        let conv = self.conv_sq(u);
        let c = self.fibering_with_conv(u, &conv);
        let lhs = c.energy_at(1.0) - 0.25 * self.derivative_with_conv(u, u, &conv);
        let rhs = 0.25 * c.a + (0.25 - 1.0 / self.p_exp) * c.m;
        Ok((lhs - rhs).abs() / (1.0 + lhs.abs()))
    }

    /// Cerami residual `(1 + |u|_X) |I'(u)|_{X'}`, with the dual norm
    /// modelled as `sqrt(<g, M^{-1} g>_h)` for the X-metric `M`; the inverse
    /// is applied by CG to tolerance `1e-6`.
    pub fn cerami_residual(&self, u: &ScalarField) -> Result<f64> {
        self.check(u)?;
        let conv = self.conv_sq(u);
        let g = self.gradient_with_conv(u, &conv);
        let mut z = vec![0.0; self.grid.cell_count()];
        Ok(self.cerami_with_gradient(u, &g, &mut z))
    }

    pub(crate) fn cerami_with_gradient(
        &self,
        u: &ScalarField,
        g: &ScalarField,
        warm: &mut [f64],
    ) -> f64 {
        let x_norm = (grid::dirichlet_energy_unchecked(u)
            + grid::weighted_mass_unchecked(u, &self.v_field)
            + grid::weighted_mass_unchecked(u, &self.star_field))
        .sqrt();
        let dual = self.dual_norm(g, warm);
        (1.0 + x_norm) * dual
    }

    /// `sqrt(<g, M^{-1} g>_h)`; `warm` carries the CG start between calls.
    pub(crate) fn dual_norm(&self, g: &ScalarField, warm: &mut [f64]) -> f64 {
        cg_solve(
            &self.metric,
            g.values(),
            warm,
            CERAMI_CG_TOL,
            50 * self.grid.n(),
        );
        let z = ScalarField::from_values(self.grid, warm.to_vec()).expect("cg output finite");
        grid::quadrature_dot_unchecked(g, &z).max(0.0).sqrt()
    }

    /// All solver diagnostics recomputed from scratch on one field.
    pub fn diagnostics(&self, u: &ScalarField) -> Result<Diagnostics> {
        self.check(u)?;
        let conv = self.conv_sq(u);
        let c = self.fibering_with_conv(u, &conv);
        let g = self.gradient_with_conv(u, &conv);
        let mut warm = vec![0.0; self.grid.cell_count()];
        let cerami = self.cerami_with_gradient(u, &g, &mut warm);
        Ok(Diagnostics {
            energy: c.energy_at(1.0),
            residual_l2: grid::lp_norm(&g, 2.0)?,
            cerami_residual: cerami,
            identity_gap: self.identity_check(u)?,
            nehari_gap: c.slope_at(1.0).abs(),
        })
    }
}

/// Coefficients of the fibering polynomial `g(t) = t^2 a/2 + t^4 q/4 - t^p m/p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberingCoefficients {
    /// `int |grad u|^2 + V u^2`
    pub a: f64,
    /// `(gamma/2pi) V0(u)`; either sign
    pub q: f64,
    /// `b |u|_p^p`
    pub m: f64,
    pub p_exp: f64,
}

impl FiberingCoefficients {
    /// `I(t u)`.
    pub fn energy_at(&self, t: f64) -> f64 {
        let t2 = t * t;
        0.5 * t2 * self.a + 0.25 * t2 * t2 * self.q - t.powf(self.p_exp) / self.p_exp * self.m
    }

    /// `d/dt I(t u) = t a + t^3 q - t^{p-1} m`.
    pub fn slope_at(&self, t: f64) -> f64 {
        t * self.a + t * t * t * self.q - t.powf(self.p_exp - 1.0) * self.m
    }

    /// `h(t) = a + t^2 q - t^{p-2} m`, whose positive root is the projection.
    fn h(&self, t: f64) -> f64 {
        self.a + t * t * self.q - t.powf(self.p_exp - 2.0) * self.m
    }

    fn h_prime(&self, t: f64) -> f64 {
        2.0 * t * self.q - (self.p_exp - 2.0) * t.powf(self.p_exp - 3.0) * self.m
    }
}

/// The unique `t > 0` with `d/dt I(t u) = 0`: bracketing bisection to
/// relative width `1e-12`, then Newton polish. Unique because `h(0) = a > 0`,
/// `h -> -infinity` and `h` changes sign once for `p > 4`.
pub fn nehari_project(c: &FiberingCoefficients) -> Result<f64> {
    if !(c.a.is_finite() && c.a > 0.0) || !(c.m.is_finite() && c.m > 0.0) {
        return Err(Error::Degenerate(format!(
            "no Nehari projection: need a > 0 and m > 0, got a = {}, m = {}",
            c.a, c.m
        )));
    }
    let mut hi = (2.0 * (c.a + c.q.abs()) / c.m).powf(1.0 / (c.p_exp - 2.0)) + 1.0;
    let mut lo = 0.0;
    let mut guard = 0;
    while c.h(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::Degenerate("Nehari bracket expansion failed".into()));
        }
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if c.h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..4 {
        let dh = c.h_prime(t);
        if dh == 0.0 {
            break;
        }
        let next = t - c.h(t) / dh;
        if next.is_finite() && next > lo * 0.5 && next < hi * 2.0 {
            t = next;
        }
    }
    Ok(t)
}

/// Solver diagnostics; every entry is recomputable from the field alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub energy: f64,
    pub residual_l2: f64,
    pub cerami_residual: f64,
    pub identity_gap: f64,
    pub nehari_gap: f64,
}
