//! Reduced states and concurrence of pure bipartite states.
//!
//! Composite basis index: `i = i₁ · d₂ + i₂`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::basis::{tuple_len, OperatorTuple};
use crate::bloch::{state_to_bloch, DensityMatrix, TOL_POS};
use crate::error::{BlochError, Result};
use crate::linalg::{identity, kron, real, trace_product, CMatrix};

/// Tolerance on `|tr ρ² − 1|` for the purity flag.
pub const PURITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    dims: (usize, usize),
    rho: DensityMatrix,
    pure: bool,
}

impl BipartiteState {
    pub fn new(dims: (usize, usize), matrix: CMatrix, tol: f64) -> Result<Self> {
        let (d1, d2) = dims;
        if d1 < 2 || d2 < 2 {
            return Err(BlochError::Domain(format!(
                "subsystem dimensions must be at least 2, got {d1}x{d2}"
            )));
        }
        if matrix.nrows() != d1 * d2 || matrix.ncols() != d1 * d2 {
            return Err(BlochError::DimensionMismatch {
                expected: d1 * d2,
                found: matrix.nrows(),
            });
        }
        let rho = DensityMatrix::new(matrix, tol)?;
        let pure = (rho.purity() - 1.0).abs() <= PURITY_TOL;
        Ok(Self { dims, rho, pure })
    }

    pub fn from_pure_vector(dims: (usize, usize), psi: &[Complex64]) -> Result<Self> {
        let (d1, d2) = dims;
        if psi.len() != d1 * d2 {
            return Err(BlochError::DimensionMismatch {
                expected: d1 * d2,
                found: psi.len(),
            });
        }
        let rho = DensityMatrix::from_pure(psi)?;
        Self::new(dims, rho.into_matrix(), TOL_POS)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        self.rho.matrix()
    }

    pub fn is_pure(&self) -> bool {
        self.pure
    }

    pub fn purity(&self) -> f64 {
        self.rho.purity()
    }

    fn require_pure(&self) -> Result<()> {
        if self.pure {
            Ok(())
        } else {
            Err(BlochError::PurityRequired {
                purity: self.purity(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

pub fn partial_trace(state: &BipartiteState, keep: Keep) -> DensityMatrix {
    let (d1, d2) = state.dims;
    let rho = state.matrix();
    let reduced = match keep {
        Keep::First => CMatrix::from_fn(d1, d1, |i, j| {
            (0..d2).map(|k| rho[(i * d2 + k, j * d2 + k)]).sum()
        }),
        Keep::Second => CMatrix::from_fn(d2, d2, |i, j| {
            (0..d1).map(|k| rho[(k * d2 + i, k * d2 + j)]).sum()
        }),
    };
    DensityMatrix::new_unchecked(reduced)
}

/// Which normalization constant multiplies `1 − tr ρₖ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConcurrenceNorm {
    /// `α = dₖ/(dₖ − 1)`: the maximally entangled state has `C = 1`.
    #[default]
    Normalized,
    /// `α = 2` regardless of dimension.
    Fixed2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrenceResult {
    pub value: f64,
    /// `(‖r₁‖, ‖r₂‖)` in the Gell-Mann tuples of each side.
    pub reduced_norms: (f64, f64),
    pub alpha: f64,
}

fn reduced_norms(state: &BipartiteState) -> Result<(f64, f64)> {
    let (d1, d2) = state.dims;
    let t1 = crate::basis::gell_mann_tuple(d1)?;
    let t2 = crate::basis::gell_mann_tuple(d2)?;
    let r1 = state_to_bloch(&partial_trace(state, Keep::First), &t1)?;
    let r2 = state_to_bloch(&partial_trace(state, Keep::Second), &t2)?;
    Ok((r1.norm(), r2.norm()))
}

/// `1 − tr ρ₁² = 1 − tr ρ₂²` of a pure state, as twice the sum of squared
/// 2×2 minors of the coefficient matrix `M[i₁][i₂] = ψ[i₁ d₂ + i₂]`.
/// Free of cancellation near product states.
fn purity_deficit(state: &BipartiteState) -> f64 {
    let (d1, d2) = state.dims;
    let rho = state.matrix();
    let pivot = (0..d1 * d2)
        .max_by(|&a, &b| rho[(a, a)].re.total_cmp(&rho[(b, b)].re))
        .unwrap_or(0);
    let scale = rho[(pivot, pivot)].re.sqrt();
    let psi = |i1: usize, i2: usize| rho[(i1 * d2 + i2, pivot)] / scale;
    let mut sum = 0.0;
    for i in 0..d1 {
        for k in i + 1..d1 {
            for j in 0..d2 {
                for l in j + 1..d2 {
                    sum += (psi(i, j) * psi(k, l) - psi(i, l) * psi(k, j)).norm_sqr();
                }
            }
        }
    }
    2.0 * sum
}

/// `C = √(1 − ‖r_k‖²) = √(α (1 − tr ρₖ²))` on the smaller side `k`, with
/// `α = dₖ/(dₖ − 1)`; [`ConcurrenceNorm::Fixed2`] uses `α = 2`.
pub fn concurrence(state: &BipartiteState, norm: ConcurrenceNorm) -> Result<ConcurrenceResult> {
    state.require_pure()?;
    let (d1, d2) = state.dims;
    let norms = reduced_norms(state)?;
    let dk = d1.min(d2) as f64;
    let alpha = match norm {
        ConcurrenceNorm::Normalized => dk / (dk - 1.0),
        ConcurrenceNorm::Fixed2 => 2.0,
    };
    Ok(ConcurrenceResult {
        value: (alpha * purity_deficit(state)).sqrt(),
        reduced_norms: norms,
        alpha,
    })
}

/// `|((d₁−1)/d₁) ‖r₁‖² + 1/d₁ − ((d₂−1)/d₂) ‖r₂‖² − 1/d₂|`, zero for pure states.
pub fn reduced_norm_relation(state: &BipartiteState) -> Result<f64> {
    state.require_pure()?;
    let (d1, d2) = state.dims;
    let (n1, n2) = reduced_norms(state)?;
    let side = |d: usize, n: f64| {
        let d = d as f64;
        (d - 1.0) / d * n * n + 1.0 / d
    };
    Ok((side(d1, n1) - side(d2, n2)).abs())
}

/// Tuple on `d₁d₂` built from tuples of the factors:
/// `Υ₁ ⊗ I/√d₂`, then `I/√d₁ ⊗ Υ₂`, then `Υ₁ ⊗ Υ₂/√2` in lexicographic order.
pub fn product_tuple(t1: &OperatorTuple, t2: &OperatorTuple) -> Result<OperatorTuple> {
    let (d1, d2) = (t1.dim(), t2.dim());
    let id1 = identity(d1) / real((d1 as f64).sqrt());
    let id2 = identity(d2) / real((d2 as f64).sqrt());
    let mut elements = Vec::with_capacity(tuple_len(d1 * d2));
    elements.extend(t1.elements().iter().map(|a| kron(a, &id2)));
    elements.extend(t2.elements().iter().map(|b| kron(&id1, b)));
    let s = real(std::f64::consts::FRAC_1_SQRT_2);
    for a in t1.elements() {
        for b in t2.elements() {
            elements.push(kron(a, b) * s);
        }
    }
    OperatorTuple::new(d1 * d2, format!("{}x{}", t1.label(), t2.label()), elements)
}

/// `a ⊗ b` as a composite state vector.
pub fn product_vector(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let va = DVector::from_column_slice(a);
    let vb = DVector::from_column_slice(b);
    va.kronecker(&vb).iter().copied().collect()
}

/// `tr(ρ₁²)` and `tr(ρ₂²)`.
pub fn reduced_purities(state: &BipartiteState) -> (f64, f64) {
    let p = |m: &DensityMatrix| trace_product(m.matrix(), m.matrix()).re;
    (
        p(&partial_trace(state, Keep::First)),
        p(&partial_trace(state, Keep::Second)),
    )
}
