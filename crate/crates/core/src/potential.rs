//! Potential catalog.
//!
//! Admissible potentials are positive, locally integrable and grow along
//! every direction; the catalog deliberately includes a shifted, angularly
//! modulated well with no reflection or rotation symmetry and no limit at
//! infinity. A finite box can only sample these conditions, so
//! `check_hypothesis` reports measured sublevel areas and warns when a
//! sublevel set touches the boundary instead of proving anything.

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `V = c0 + a |x|^2`
    Harmonic { c0: f64, a: f64 },
    /// `V = c0 + a |x1|^alpha + b |x2|^beta`
    Anisotropic {
        c0: f64,
        a: f64,
        alpha: f64,
        b: f64,
        beta: f64,
    },
    /// `V = c0 + a |x - x0|^2 (1 + eps sin(k theta))` with `theta` the angle
    /// around `x0`. For `eps != 0` this has no reflection or rotation
    /// symmetry and no limit pattern at infinity.
    ShiftedModulated {
        c0: f64,
        a: f64,
        center: [f64; 2],
        eps: f64,
        k: f64,
    },
    /// Grid samples supplied by the caller.
    Tabulated { field: ScalarField },
}

impl PotentialSpec {
    pub fn harmonic(c0: f64, a: f64) -> Result<Self> {
        let v = Self::Harmonic { c0, a };
        v.validate()?;
        Ok(v)
    }

    pub fn anisotropic(c0: f64, a: f64, alpha: f64, b: f64, beta: f64) -> Result<Self> {
        let v = Self::Anisotropic {
            c0,
            a,
            alpha,
            b,
            beta,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn shifted_modulated(c0: f64, a: f64, center: [f64; 2], eps: f64, k: f64) -> Result<Self> {
        let v = Self::ShiftedModulated {
            c0,
            a,
            center,
            eps,
            k,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn tabulated(field: ScalarField) -> Result<Self> {
        let v = Self::Tabulated { field };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| -> Result<()> {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidPotential(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
            Ok(())
        };
        match self {
            Self::Harmonic { c0, a } => {
                positive("c0", *c0)?;
                positive("a", *a)
            }
            Self::Anisotropic {
                c0,
                a,
                alpha,
                b,
                beta,
            } => {
                positive("c0", *c0)?;
                positive("a", *a)?;
                positive("alpha", *alpha)?;
                positive("b", *b)?;
                positive("beta", *beta)
            }
            Self::ShiftedModulated {
                c0,
                a,
                center,
                eps,
                k,
            } => {
                positive("c0", *c0)?;
                positive("a", *a)?;
                if !(center[0].is_finite() && center[1].is_finite()) {
                    return Err(Error::InvalidPotential("center must be finite".into()));
                }
                if !(eps.is_finite() && eps.abs() < 1.0) {
                    return Err(Error::InvalidPotential(format!(
                        "modulation amplitude must satisfy |eps| < 1 to keep V positive, got {eps}"
                    )));
                }
                if !k.is_finite() {
                    return Err(Error::InvalidPotential("k must be finite".into()));
                }
                Ok(())
            }
            Self::Tabulated { field } => {
                field.validate()?;
                let min = field.values().iter().cloned().fold(f64::INFINITY, f64::min);
                if min <= 0.0 {
                    return Err(Error::InvalidPotential(format!(
                        "tabulated potential must be strictly positive, min = {min}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Closed-form value at a point; `None` for tabulated samples.
    pub fn value_at(&self, x: f64, y: f64) -> Option<f64> {
        match self {
            Self::Harmonic { c0, a } => Some(c0 + a * (x * x + y * y)),
            Self::Anisotropic {
                c0,
                a,
                alpha,
                b,
                beta,
            } => Some(c0 + a * x.abs().powf(*alpha) + b * y.abs().powf(*beta)),
            Self::ShiftedModulated {
                c0,
                a,
                center,
                eps,
                k,
            } => {
                let dx = x - center[0];
                let dy = y - center[1];
                let theta = dy.atan2(dx);
                Some(c0 + a * (dx * dx + dy * dy) * (1.0 + eps * (k * theta).sin()))
            }
            Self::Tabulated { .. } => None,
        }
    }

    /// Sample at cell centers. Tabulated potentials must already live on the
    /// requested grid.
    pub fn evaluate(&self, grid: GridSpec) -> Result<ScalarField> {
        self.validate()?;
        match self {
            Self::Tabulated { field } => {
                if field.grid() != grid {
                    return Err(Error::GridMismatch(
                        "tabulated potential sampled on a different grid".into(),
                    ));
                }
                Ok(field.clone())
            }
            _ => Ok(ScalarField::from_fn(grid, |x, y| {
                self.value_at(x, y).expect("analytic kind")
            })),
        }
    }

    /// Lower bound `c0` for analytic kinds, grid minimum for tabulated.
    pub fn floor(&self) -> f64 {
        match self {
            Self::Harmonic { c0, .. }
            | Self::Anisotropic { c0, .. }
            | Self::ShiftedModulated { c0, .. } => *c0,
            Self::Tabulated { field } => {
                field.values().iter().cloned().fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Whether the default normalization `inf V = 1` holds at sample level.
    pub fn meets_unit_normalization(&self) -> bool {
        self.floor() >= 1.0
    }

    /// Measure sublevel sets `{V <= M}` inside the box for each threshold.
    pub fn check_hypothesis(&self, grid: GridSpec, m_list: &[f64]) -> Result<HypothesisReport> {
        if m_list.is_empty() {
            return Err(Error::InvalidInput(
                "threshold list must be nonempty".into(),
            ));
        }
        if m_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "threshold list must be increasing".into(),
            ));
        }
        let v = self.evaluate(grid)?;
        let n = grid.n();
        let min_v = v.values().iter().cloned().fold(f64::INFINITY, f64::min);
        let mut rows = Vec::with_capacity(m_list.len());
        for &m in m_list {
            let mut count = 0usize;
            let mut min_boundary_distance = f64::INFINITY;
            let mut touches = false;
            for i in 0..n {
                for j in 0..n {
                    if v.at(i, j) <= m {
                        count += 1;
                        let (x, y) = grid.center(i, j);
                        let d = (grid.half_width() - x.abs()).min(grid.half_width() - y.abs());
                        min_boundary_distance = min_boundary_distance.min(d);
                        if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                            touches = true;
                        }
                    }
                }
            }
            rows.push(SublevelRow {
                threshold: m,
                area: grid.cell_area() * count as f64,
                min_boundary_distance: if count > 0 {
                    Some(min_boundary_distance)
                } else {
                    None
                },
                touches_boundary: touches,
            });
        }
        Ok(HypothesisReport {
            min_v,
            positive_floor: min_v > 0.0,
            unit_normalized: min_v >= 1.0,
            rows,
        })
    }
}

/// Measured area of one sublevel set and its distance to the truncation
/// boundary. A touching sublevel set means the box is too small to say
/// anything about the finite-measure condition at that threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SublevelRow {
    pub threshold: f64,
    pub area: f64,
    pub min_boundary_distance: Option<f64>,
    pub touches_boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub min_v: f64,
    pub positive_floor: bool,
    pub unit_normalized: bool,
    pub rows: Vec<SublevelRow>,
}

impl HypothesisReport {
    pub fn any_boundary_warning(&self) -> bool {
        self.rows.iter().any(|r| r.touches_boundary)
    }
}
