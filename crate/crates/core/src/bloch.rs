//! Bloch vectors of qudit states and traceless observables.
//!
//! With an operator tuple `Υ` of dimension `d`:
//!
//! ```text
//! ρ = I/d + √((d−1)/(2d)) (r · Υ),    r = √(d/(2(d−1))) tr(ρ Υ)
//! X = √(d/2) (n · Υ),                 n = √(1/(2d)) tr(X Υ)
//! ```
//!
//! Membership in the set of state Bloch vectors is decided by the operator
//! norm of the negative part of `r · Υ`: `r` describes a state iff
//! `‖(r·Υ)⁻‖₀ ≤ √(2/(d(d−1)))`. Observables with spectrum in `[−1, 1]`
//! correspond to `‖n·Υ‖₀ ≤ √(2/d)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{tuple_len, OperatorTuple, StructureConstants};
use crate::error::{BlochError, Result};
use crate::linalg::{
    hermitian_eigenvalues, hermiticity_residual, identity, real, trace, trace_product, CMatrix,
};

/// Default tolerance on eigenvalues and membership margins.
pub const TOL_POS: f64 = 1e-9;

/// Threshold `√(2/(d(d−1)))` on the negative-part norm of `r · Υ`.
pub fn state_threshold(d: usize) -> f64 {
    (2.0 / (d * (d - 1)) as f64).sqrt()
}

/// Threshold `√(2/d)` on the operator norm of `n · Υ`.
pub fn observable_threshold(d: usize) -> f64 {
    (2.0 / d as f64).sqrt()
}

fn state_scale(d: usize) -> f64 {
    ((d - 1) as f64 / (2 * d) as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlochRole {
    /// Bloch vector `r` of a state.
    State,
    /// Bloch vector `n` of a traceless observable.
    Observable,
    /// Plain coefficient vector `p` of `p · Υ`.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    dim: usize,
    role: BlochRole,
    coords: Vec<f64>,
}

impl BlochVector {
    pub fn new(dim: usize, role: BlochRole, coords: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(BlochError::Domain(format!(
                "dimension must be >= 2, got {dim}"
            )));
        }
        if coords.len() != tuple_len(dim) {
            return Err(BlochError::Structural(format!(
                "Bloch vector for d = {dim} needs {} coordinates, got {}",
                tuple_len(dim),
                coords.len()
            )));
        }
        Ok(Self { dim, role, coords })
    }

    pub fn zeros(dim: usize, role: BlochRole) -> Self {
        Self {
            dim,
            role,
            coords: vec![0.0; tuple_len(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn role(&self) -> BlochRole {
        self.role
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn with_role(mut self, role: BlochRole) -> Self {
        self.role = role;
        self
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        check_dims(self.dim, other.dim)?;
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Same direction, scaled to the given norm. The zero vector stays zero.
    pub fn scaled_to(&self, norm: f64) -> Self {
        let current = self.norm();
        let factor = if current > 0.0 { norm / current } else { 0.0 };
        Self {
            dim: self.dim,
            role: self.role,
            coords: self.coords.iter().map(|x| x * factor).collect(),
        }
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(BlochError::DimensionMismatch { expected, found })
    }
}

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(BlochError::Structural(format!(
            "matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() < 2 {
        return Err(BlochError::Domain(format!(
            "dimension must be >= 2, got {}",
            m.nrows()
        )));
    }
    Ok(m.nrows())
}

/// Hermitian, unit-trace, positive semidefinite d×d matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and `λ_min ≥ −tol`.
    pub fn new(matrix: CMatrix, tol: f64) -> Result<Self> {
        check_square(&matrix)?;
        let herm = hermiticity_residual(&matrix);
        if herm > tol {
            return Err(BlochError::Domain(format!(
                "density matrix is not Hermitian (residual {herm:.3e})"
            )));
        }
        let tr = trace(&matrix);
        if (tr - real(1.0)).norm() > tol {
            return Err(BlochError::Domain(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        let min = hermitian_eigenvalues(&matrix)[0];
        if min < -tol {
            return Err(BlochError::Domain(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    /// `|ψ⟩⟨ψ|` for the normalized `ψ`.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(BlochError::Domain("state vector has zero norm".into()));
        }
        let v = v / real(norm);
        let matrix = &v * v.adjoint();
        check_square(&matrix)?;
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: identity(d) / real(d as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        trace_product(&self.matrix, &self.matrix).re
    }
}

/// Hermitian d×d matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: CMatrix,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix)?;
        let scale = matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let herm = hermiticity_residual(&matrix);
        if herm > crate::basis::TOL_HERM * scale {
            return Err(BlochError::Domain(format!(
                "observable is not Hermitian (residual {herm:.3e})"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }

    /// Largest |eigenvalue|.
    pub fn operator_norm(&self) -> f64 {
        crate::linalg::operator_norm(&self.matrix)
    }
}

pub fn state_to_bloch(rho: &DensityMatrix, t: &OperatorTuple) -> Result<BlochVector> {
    let d = t.dim();
    check_dims(d, rho.dim())?;
    let scale = (d as f64 / (2 * (d - 1)) as f64).sqrt();
    let coords = t
        .elements()
        .iter()
        .map(|el| scale * trace_product(rho.matrix(), el).re)
        .collect();
    BlochVector::new(d, BlochRole::State, coords)
}

/// `τ = I/d + √((d−1)/(2d)) (r · Υ)` without any positivity check.
pub fn bloch_to_operator(r: &BlochVector, t: &OperatorTuple) -> Result<CMatrix> {
    let d = t.dim();
    check_dims(d, r.dim())?;
    let mut tau = t.combine(r.coords()) * real(state_scale(d));
    for i in 0..d {
        tau[(i, i)] += real(1.0 / d as f64);
    }
    Ok(tau)
}

/// Inverse of [`bloch_to_operator`] for any Hermitian unit-trace matrix.
pub fn operator_to_bloch(tau: &CMatrix, t: &OperatorTuple, tol: f64) -> Result<BlochVector> {
    let d = t.dim();
    check_dims(d, check_square(tau)?)?;
    let herm = hermiticity_residual(tau);
    if herm > tol {
        return Err(BlochError::Domain(format!(
            "operator is not Hermitian (residual {herm:.3e})"
        )));
    }
    let tr = trace(tau);
    if (tr - real(1.0)).norm() > tol {
        return Err(BlochError::Domain(format!(
            "operator trace is {tr}, expected 1"
        )));
    }
    let scale = (d as f64 / (2 * (d - 1)) as f64).sqrt();
    let coords = t
        .elements()
        .iter()
        .map(|el| scale * trace_product(tau, el).re)
        .collect();
    BlochVector::new(d, BlochRole::State, coords)
}

/// Reconstructs the density matrix, failing with [`BlochError::NotAState`]
/// when `r` lies outside the state Bloch body at tolerance `tol`.
pub fn bloch_to_state(r: &BlochVector, t: &OperatorTuple, tol: f64) -> Result<DensityMatrix> {
    let check = is_state(r, t, tol)?;
    if !check.member {
        return Err(BlochError::NotAState {
            negative_part_norm: check.negative_part_norm,
            threshold: check.threshold,
        });
    }
    Ok(DensityMatrix::new_unchecked(bloch_to_operator(r, t)?))
}

pub fn observable_to_bloch(x: &Observable, t: &OperatorTuple) -> Result<BlochVector> {
    let d = t.dim();
    check_dims(d, x.dim())?;
    let scale = x.matrix().iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tr = x.trace();
    if tr.abs() > crate::basis::TOL_HERM * scale * d as f64 {
        return Err(BlochError::Domain(format!(
            "observable must be traceless, trace is {tr:.3e}"
        )));
    }
    let factor = (1.0 / (2 * d) as f64).sqrt();
    let coords = t
        .elements()
        .iter()
        .map(|el| factor * trace_product(x.matrix(), el).re)
        .collect();
    BlochVector::new(d, BlochRole::Observable, coords)
}

/// `X = √(d/2) (n · Υ)`.
pub fn bloch_to_observable(n: &BlochVector, t: &OperatorTuple) -> Result<Observable> {
    let d = t.dim();
    check_dims(d, n.dim())?;
    let x = t.combine(n.coords()) * real((d as f64 / 2.0).sqrt());
    Ok(Observable { matrix: x })
}

/// `tr(ρX) = √(d−1) (r · n)`.
pub fn expectation(r: &BlochVector, n: &BlochVector) -> Result<f64> {
    if r.role() != BlochRole::State || n.role() != BlochRole::Observable {
        return Err(BlochError::Domain(format!(
            "expectation needs (state, observable) vectors, got ({:?}, {:?})",
            r.role(),
            n.role()
        )));
    }
    let d = r.dim();
    Ok(((d - 1) as f64).sqrt() * r.dot(n)?)
}

/// `tr(ρ²) = 1/d + ((d−1)/d) ‖r‖²`.
pub fn purity(r: &BlochVector) -> f64 {
    let d = r.dim() as f64;
    1.0 / d + (d - 1.0) / d * r.norm_sq()
}

/// Coefficients `a₂, …, a_d` of the characteristic polynomial of
/// `τ = I/d + √((d−1)/(2d)) (r · Υ)`; `a_j` is the j-th elementary symmetric
/// polynomial of the eigenvalues of `τ`. `τ ≥ 0` iff every `a_j ≥ 0`, and `τ`
/// is pure iff every `a_j = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivityCoefficients {
    dim: usize,
    a: Vec<f64>,
}

impl PositivityCoefficients {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `a_j` for `2 ≤ j ≤ d`.
    pub fn get(&self, j: usize) -> f64 {
        assert!(
            (2..=self.dim).contains(&j),
            "a_{j} undefined for d = {}",
            self.dim
        );
        self.a[j - 2]
    }

    /// `(a₂, …, a_d)`.
    pub fn values(&self) -> &[f64] {
        &self.a
    }

    pub fn all_nonnegative(&self, tol: f64) -> bool {
        self.a.iter().all(|&x| x >= -tol)
    }

    pub fn all_zero(&self, tol: f64) -> bool {
        self.a.iter().all(|&x| x.abs() <= tol)
    }
}

/// Element `s I + Σ cₖ Υᵏ` of the operator algebra, multiplied through the
/// structure constants.
struct AlgebraElement {
    scalar: Complex64,
    coeffs: Vec<Complex64>,
}

impl AlgebraElement {
    fn mul(&self, other: &Self, sc: &StructureConstants) -> Self {
        let d = sc.dim() as f64;
        let dot: Complex64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum();
        let scalar = self.scalar * other.scalar + dot * (2.0 / d);
        let mut coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| self.scalar * b + other.scalar * a)
            .collect();
        sc.for_each_full(|k, m, l, f, g| {
            let (a, b) = (self.coeffs[k], other.coeffs[m]);
            if a != Complex64::new(0.0, 0.0) && b != Complex64::new(0.0, 0.0) {
                coeffs[l] += Complex64::new(g, f) * a * b;
            }
        });
        Self { scalar, coeffs }
    }
}

/// Power sums `tr(τᵏ)`, `k = 1..=up_to`, computed in the operator algebra
/// through the structure constants (no matrices are formed).
pub fn power_sums(r: &BlochVector, sc: &StructureConstants, up_to: usize) -> Result<Vec<f64>> {
    let d = sc.dim();
    check_dims(d, r.dim())?;
    let scale = state_scale(d);
    let tau = AlgebraElement {
        scalar: real(1.0 / d as f64),
        coeffs: r.coords().iter().map(|x| real(x * scale)).collect(),
    };
    let mut sums = Vec::with_capacity(up_to);
    if up_to == 0 {
        return Ok(sums);
    }
    let mut power = AlgebraElement {
        scalar: tau.scalar,
        coeffs: tau.coeffs.clone(),
    };
    sums.push((power.scalar * d as f64).re);
    for _ in 1..up_to {
        power = power.mul(&tau, sc);
        sums.push((power.scalar * d as f64).re);
    }
    Ok(sums)
}

/// Elementary symmetric polynomials `e₀..=e_n` from power sums `s₁..=s_n`
/// by Newton's identities.
fn newton_elementary(sums: &[f64]) -> Vec<f64> {
    let mut e = vec![1.0];
    for j in 1..=sums.len() {
        let mut acc = 0.0;
        for i in 1..=j {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * e[j - i] * sums[i - 1];
        }
        e.push(acc / j as f64);
    }
    e
}

/// `(qₖ = Σᵢⱼ gₖᵢⱼ rᵢ rⱼ)` for the closed-form coefficients.
fn g_contraction(r: &[f64], sc: &StructureConstants) -> Vec<f64> {
    let mut q = vec![0.0; r.len()];
    sc.for_each_full(|i, j, k, _, g| {
        if g != 0.0 {
            q[k] += g * r[i] * r[j];
        }
    });
    q
}

/// `a₂, a₃, a₄` in closed form through `‖r‖²` and contractions with `g`;
/// higher orders through Newton's identities on `tr(τʲ)`.
pub fn positivity_coefficients(
    r: &BlochVector,
    sc: &StructureConstants,
) -> Result<PositivityCoefficients> {
    let d = sc.dim();
    check_dims(d, r.dim())?;
    let df = d as f64;
    let norm2 = r.norm_sq();
    let c = state_scale(d);
    let q = g_contraction(r.coords(), sc);
    let cubic: f64 = q.iter().zip(r.coords()).map(|(a, b)| a * b).sum();
    let quartic: f64 = q.iter().map(|x| x * x).sum();

    let mut a = Vec::with_capacity(d - 1);
    // 2! a₂
    a.push((df - 1.0) / df * (1.0 - norm2) / 2.0);
    if d >= 3 {
        let v = (df - 1.0) * (df - 2.0) / (df * df) * (1.0 - 3.0 * norm2)
            + 2.0 * (df - 1.0) / df * c * cubic;
        a.push(v / 6.0);
    }
    if d >= 4 {
        let d3 = df * df * df;
        let v = (df - 1.0) * (df - 2.0) * (df - 3.0) / d3 * (1.0 - 6.0 * norm2)
            + 3.0 * (df - 1.0).powi(2) * (df - 2.0) / d3 * norm2 * norm2
            + 8.0 * (df - 1.0) * (df - 3.0) / (df * df) * c * cubic
            - 3.0 * (df - 1.0).powi(2) / (df * df) * quartic;
        a.push(v / 24.0);
    }
    if d >= 5 {
        let sums = power_sums(r, sc, d)?;
        let e = newton_elementary(&sums);
        a.extend_from_slice(&e[5..=d]);
    }
    Ok(PositivityCoefficients { dim: d, a })
}

/// All of `a₂..=a_d` through Newton's identities on power sums.
pub fn positivity_coefficients_recursive(
    r: &BlochVector,
    sc: &StructureConstants,
) -> Result<PositivityCoefficients> {
    let d = sc.dim();
    let sums = power_sums(r, sc, d)?;
    let e = newton_elementary(&sums);
    Ok(PositivityCoefficients {
        dim: d,
        a: e[2..=d].to_vec(),
    })
}

/// `‖(p·Υ)⁻‖₀ = max(0, −λ_min(p·Υ))`.
pub fn negative_part_norm(p: &BlochVector, t: &OperatorTuple) -> Result<f64> {
    check_dims(t.dim(), p.dim())?;
    let min = hermitian_eigenvalues(&t.combine(p.coords()))[0];
    Ok((-min).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateCheck {
    pub member: bool,
    pub negative_part_norm: f64,
    /// `√(2/(d(d−1)))`.
    pub threshold: f64,
    /// `threshold − negative_part_norm`; negative outside the body.
    pub margin: f64,
    pub norm: f64,
}

/// State membership by the negative-part criterion.
pub fn is_state(r: &BlochVector, t: &OperatorTuple, tol: f64) -> Result<StateCheck> {
    check_dims(t.dim(), r.dim())?;
    let threshold = state_threshold(t.dim());
    let norm = r.norm();
    let negative_part_norm = if norm == 0.0 {
        0.0
    } else {
        negative_part_norm(r, t)?
    };
    let margin = threshold - negative_part_norm;
    Ok(StateCheck {
        member: margin >= -tol,
        negative_part_norm,
        threshold,
        margin,
        norm,
    })
}

/// Pure iff the negative-part norm sits on the threshold and `‖r‖² = 1`.
pub fn is_pure_state(r: &BlochVector, t: &OperatorTuple, tol: f64) -> Result<bool> {
    let check = is_state(r, t, tol)?;
    Ok(check.margin.abs() <= tol && (r.norm_sq() - 1.0).abs() <= tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableCheck {
    pub member: bool,
    /// `‖n · Υ‖₀`.
    pub operator_norm: f64,
    /// `√(2/d)`.
    pub threshold: f64,
    pub margin: f64,
}

pub fn observable_membership(
    n: &BlochVector,
    t: &OperatorTuple,
    tol: f64,
) -> Result<ObservableCheck> {
    check_dims(t.dim(), n.dim())?;
    let threshold = observable_threshold(t.dim());
    let operator_norm = if n.norm() == 0.0 {
        0.0
    } else {
        crate::linalg::operator_norm(&t.combine(n.coords()))
    };
    let margin = threshold - operator_norm;
    Ok(ObservableCheck {
        member: margin >= -tol,
        operator_norm,
        threshold,
        margin,
    })
}

/// True iff `n` is the Bloch vector of a traceless observable with spectrum
/// in `[−1, 1]`.
pub fn is_observable_bloch(n: &BlochVector, t: &OperatorTuple, tol: f64) -> Result<bool> {
    Ok(observable_membership(n, t, tol)?.member)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBounds {
    /// `√(2/d) ‖p‖`.
    pub lower: f64,
    /// `‖p · Υ‖₀`.
    pub value: f64,
    /// `√(2(d−1)/d) ‖p‖`.
    pub upper: f64,
}

pub fn operator_norm_bounds(p: &BlochVector, t: &OperatorTuple) -> Result<NormBounds> {
    check_dims(t.dim(), p.dim())?;
    let d = t.dim() as f64;
    let norm = p.norm();
    let value = if norm == 0.0 {
        0.0
    } else {
        crate::linalg::operator_norm(&t.combine(p.coords()))
    };
    Ok(NormBounds {
        lower: (2.0 / d).sqrt() * norm,
        value,
        upper: (2.0 * (d - 1.0) / d).sqrt() * norm,
    })
}
