//! Planar cross-sections of the Bloch bodies, sampled on a square grid.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::tuple_len;
use crate::bloch::{is_state, observable_membership, BlochRole, BlochVector, TOL_POS};
use crate::error::{BlochError, Result};
use crate::io::TupleRef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionTarget {
    /// Bloch vectors of density matrices.
    StateBody,
    /// Bloch vectors of traceless observables with spectrum in `[−1, 1]`.
    ObservableBody,
    /// States whose distance to the unit sphere is below half a grid cell.
    PureShell,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionSpec {
    pub dim: usize,
    #[serde(default)]
    pub tuple: TupleRef,
    /// Two orthonormal directions spanning the plane.
    pub plane: [Vec<f64>; 2],
    /// Grid points per axis over `[−1, 1]`.
    pub n: usize,
    pub target: SectionTarget,
    #[serde(default)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionPoint {
    pub x: f64,
    pub y: f64,
    pub member: bool,
}

impl SectionSpec {
    /// Plane spanned by coordinate axes `a` and `b` (0-based).
    pub fn coordinate_plane(
        dim: usize,
        a: usize,
        b: usize,
        n: usize,
        target: SectionTarget,
    ) -> Result<Self> {
        let len = tuple_len(dim);
        if a >= len || b >= len || a == b {
            return Err(BlochError::Domain(format!(
                "axes must be two distinct indices below {len}, got {a} and {b}"
            )));
        }
        let mut ea = vec![0.0; len];
        let mut eb = vec![0.0; len];
        ea[a] = 1.0;
        eb[b] = 1.0;
        Ok(Self {
            dim,
            tuple: TupleRef::default(),
            plane: [ea, eb],
            n,
            target,
            tol: None,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(BlochError::Domain(format!(
                "dimension must be >= 2, got {}",
                self.dim
            )));
        }
        if self.n < 2 {
            return Err(BlochError::Domain(format!(
                "grid needs n >= 2, got {}",
                self.n
            )));
        }
        let len = tuple_len(self.dim);
        let [a, b] = &self.plane;
        if a.len() != len || b.len() != len {
            return Err(BlochError::Structural(format!(
                "plane directions need {len} coordinates"
            )));
        }
        let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>();
        let residual = (dot(a, a) - 1.0)
            .abs()
            .max((dot(b, b) - 1.0).abs())
            .max(dot(a, b).abs());
        if residual > 1e-10 {
            return Err(BlochError::Domain(format!(
                "plane directions are not orthonormal (residual {residual:.3e})"
            )));
        }
        Ok(())
    }

    /// Samples the grid, `y`-major: all `x` for the first `y`, then the next.
    pub fn sample(&self, seed: u64) -> Result<Vec<SectionPoint>> {
        self.validate()?;
        let tuple = self.tuple.resolve(self.dim, seed)?;
        let tol = self.tol.unwrap_or(TOL_POS);
        let n = self.n;
        let step = 2.0 / (n - 1) as f64;
        let coord = |i: usize| -1.0 + i as f64 * step;
        let [ea, eb] = &self.plane;
        let role = match self.target {
            SectionTarget::ObservableBody => BlochRole::Observable,
            _ => BlochRole::State,
        };
        (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (x, y) = (coord(idx % n), coord(idx / n));
                let coords = ea.iter().zip(eb).map(|(a, b)| x * a + y * b).collect();
                let p = BlochVector::new(self.dim, role, coords)?;
                let member = match self.target {
                    SectionTarget::StateBody => is_state(&p, &tuple, tol)?.member,
                    SectionTarget::ObservableBody => observable_membership(&p, &tuple, tol)?.member,
                    SectionTarget::PureShell => {
                        p.norm() >= 1.0 - 0.5 * step && is_state(&p, &tuple, tol)?.member
                    }
                };
                Ok(SectionPoint { x, y, member })
            })
            .collect()
    }
}

/// CSV with header `x,y,member` and `member ∈ {0, 1}`.
pub fn section_csv(points: &[SectionPoint]) -> String {
    let mut out = String::from("x,y,member\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.x, p.y, u8::from(p.member));
    }
    out
}
