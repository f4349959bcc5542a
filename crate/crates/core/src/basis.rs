//! Operator tuples: d²−1 traceless Hermitian matrices that, together with the
//! identity, form an orthogonal basis of the d×d complex matrices.
//!
//! Every tuple handled here satisfies
//!
//! * `Υᵏ = (Υᵏ)†`,
//! * `tr Υᵏ = 0`,
//! * `tr(Υᵏ Υᵐ) = 2 δₖₘ`.
//!
//! The products of tuple elements decompose back into the basis through the
//! symmetric constants `g` and the antisymmetric constants `f`:
//!
//! ```text
//! Υᵏ Υᵐ = (2/d) δₖₘ I + Σₗ (gₖₘₗ + i fₖₘₗ) Υˡ
//! ```
//!
//! Those constants are stored sparsely, see [`StructureConstants`].

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{BlochError, Result};
use crate::linalg::{hermiticity_residual, trace, trace_product, CMatrix, I, ONE, ZERO};
use crate::random::haar_orthogonal;

/// Hermiticity tolerance used when a tuple is constructed.
pub const TOL_HERM: f64 = 1e-10;
/// Orthonormality tolerance for tuples and basis changes.
pub const TOL_ORTH: f64 = 1e-10;
/// Agreement tolerance between two routes to the structure constants.
pub const TOL_SC: f64 = 1e-9;
/// Structure constants with smaller magnitude are not stored.
pub const EPS_SC: f64 = 1e-12;

/// Label of the generalized Gell-Mann tuple in the bundled registry.
pub const GELL_MANN: &str = "gell-mann";

/// Number of elements of an operator tuple for dimension `d`.
pub fn tuple_len(d: usize) -> usize {
    d * d - 1
}

/// An ordered tuple of d²−1 traceless Hermitian d×d matrices.
///
/// The fields are not guaranteed to satisfy the tuple invariants when the
/// value was built with [`OperatorTuple::new_unchecked`]; use
/// [`validate_tuple`] to inspect such values.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTuple {
    dim: usize,
    label: String,
    elements: Vec<CMatrix>,
}

impl OperatorTuple {
    /// Builds a tuple and rejects it unless all invariants hold within
    /// [`TOL_ORTH`].
    pub fn new(dim: usize, label: impl Into<String>, elements: Vec<CMatrix>) -> Result<Self> {
        let tuple = Self::new_unchecked(dim, label, elements);
        let report = validate_tuple(&tuple, TOL_ORTH)?;
        if !report.is_empty() {
            return Err(BlochError::InvalidTuple(report.to_string()));
        }
        Ok(tuple)
    }

    pub fn new_unchecked(dim: usize, label: impl Into<String>, elements: Vec<CMatrix>) -> Self {
        Self {
            dim,
            label: label.into(),
            elements,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn into_elements(self) -> Vec<CMatrix> {
        self.elements
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The operator `p · Υ = Σₖ pₖ Υᵏ`.
    pub fn combine(&self, p: &[f64]) -> CMatrix {
        assert_eq!(p.len(), self.elements.len(), "coefficient length");
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (pk, el) in p.iter().zip(&self.elements) {
            if *pk != 0.0 {
                out.zip_apply(el, |o, e| *o += e * *pk);
            }
        }
        out
    }

    /// Complex combination `Σₖ cₖ Υᵏ`.
    pub fn combine_complex(&self, c: &[Complex64]) -> CMatrix {
        assert_eq!(c.len(), self.elements.len(), "coefficient length");
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (ck, el) in c.iter().zip(&self.elements) {
            out.zip_apply(el, |o, e| *o += e * *ck);
        }
        out
    }

    /// Coefficients `pₖ = ½ tr(Υᵏ W)`; real for Hermitian `W`.
    pub fn coefficients(&self, w: &CMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .map(|el| 0.5 * trace_product(el, w).re)
            .collect()
    }

    /// Tuple with elements `Υ'ᵏ = Σⱼ Oⱼₖ Υʲ` for a real orthogonal `O`.
    pub fn rotated(&self, orthogonal: &DMatrix<f64>, label: impl Into<String>) -> Result<Self> {
        let n = self.len();
        if orthogonal.nrows() != n || orthogonal.ncols() != n {
            return Err(BlochError::Structural(format!(
                "rotation must be {n}x{n}, got {}x{}",
                orthogonal.nrows(),
                orthogonal.ncols()
            )));
        }
        let elements = (0..n)
            .map(|k| {
                let column: Vec<f64> = orthogonal.column(k).iter().copied().collect();
                self.combine(&column)
            })
            .collect();
        Ok(Self::new_unchecked(self.dim, label, elements))
    }
}

/// The generalized Gell-Mann tuple.
///
/// Ordering: symmetric generators `|j⟩⟨k| + |k⟩⟨j|` for `j < k` in
/// lexicographic order, then antisymmetric generators `−i(|j⟩⟨k| − |k⟩⟨j|)` in
/// the same order, then the diagonal generators
/// `√(2/(l(l+1))) (Σ_{m≤l} |m⟩⟨m| − l |l+1⟩⟨l+1|)` for `l = 1..d−1`.
/// For `d = 2` this is `(σ₁, σ₂, σ₃)`.
pub fn gell_mann_tuple(d: usize) -> Result<OperatorTuple> {
    if d < 2 {
        return Err(BlochError::Domain(format!(
            "dimension must be >= 2, got {d}"
        )));
    }
    let mut elements = Vec::with_capacity(tuple_len(d));
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| (j + 1..d).map(move |k| (j, k)))
        .collect();
    for &(j, k) in &pairs {
        let mut m = CMatrix::zeros(d, d);
        m[(j, k)] = ONE;
        m[(k, j)] = ONE;
        elements.push(m);
    }
    for &(j, k) in &pairs {
        let mut m = CMatrix::zeros(d, d);
        m[(j, k)] = -I;
        m[(k, j)] = I;
        elements.push(m);
    }
    for l in 1..d {
        let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(d, d);
        for i in 0..l {
            m[(i, i)] = Complex64::new(scale, 0.0);
        }
        m[(l, l)] = Complex64::new(-scale * l as f64, 0.0);
        elements.push(m);
    }
    Ok(OperatorTuple::new_unchecked(d, GELL_MANN, elements))
}

/// Gell-Mann tuple rotated by a seeded Haar-random orthogonal matrix of
/// `R^(d²−1)`.
pub fn random_tuple(d: usize, seed: u64) -> Result<OperatorTuple> {
    let base = gell_mann_tuple(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rotation = haar_orthogonal(tuple_len(d), &mut rng);
    base.rotated(&rotation, format!("random-{seed}"))
}

/// One failed tuple invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotHermitian {
        k: usize,
        residual: f64,
    },
    NonzeroTrace {
        k: usize,
        trace: f64,
    },
    /// `tr(Υᵏ Υᵐ)` differs from `2 δₖₘ`.
    NotOrthonormal {
        k: usize,
        m: usize,
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotHermitian { k, residual } => {
                write!(f, "element {k} not Hermitian (residual {residual:.3e})")
            }
            Violation::NonzeroTrace { k, trace } => {
                write!(f, "element {k} has trace {trace:.3e}")
            }
            Violation::NotOrthonormal { k, m, value } => {
                let expected = if k == m { 2.0 } else { 0.0 };
                write!(f, "tr(U{k} U{m}) = {value:.6} (expected {expected})")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks every tuple invariant against `tol`.
///
/// Wrong element counts or matrix shapes are structural errors; invariant
/// failures are collected in the report.
pub fn validate_tuple(t: &OperatorTuple, tol: f64) -> Result<ValidationReport> {
    let d = t.dim;
    if d < 2 {
        return Err(BlochError::Structural(format!("dimension {d} < 2")));
    }
    if t.elements.len() != tuple_len(d) {
        return Err(BlochError::Structural(format!(
            "expected {} elements for d = {d}, got {}",
            tuple_len(d),
            t.elements.len()
        )));
    }
    if let Some((k, el)) = t
        .elements
        .iter()
        .enumerate()
        .find(|(_, el)| el.nrows() != d || el.ncols() != d)
    {
        return Err(BlochError::Structural(format!(
            "element {k} is {}x{}, expected {d}x{d}",
            el.nrows(),
            el.ncols()
        )));
    }

    let mut report = ValidationReport::default();
    for (k, el) in t.elements.iter().enumerate() {
        let residual = hermiticity_residual(el);
        if residual > tol {
            report
                .violations
                .push(Violation::NotHermitian { k, residual });
        }
        let tr = trace(el).norm();
        if tr > tol {
            report
                .violations
                .push(Violation::NonzeroTrace { k, trace: tr });
        }
    }
    for k in 0..t.elements.len() {
        for m in k..t.elements.len() {
            let value = trace_product(&t.elements[k], &t.elements[m]).re;
            let expected = if k == m { 2.0 } else { 0.0 };
            if (value - expected).abs() > tol {
                report
                    .violations
                    .push(Violation::NotOrthonormal { k, m, value });
            }
        }
    }
    Ok(report)
}

fn ensure_valid(t: &OperatorTuple) -> Result<()> {
    let report = validate_tuple(t, TOL_ORTH)?;
    if report.is_empty() {
        Ok(())
    } else {
        Err(BlochError::InvalidTuple(report.to_string()))
    }
}

/// Symmetric and antisymmetric structure constants of a tuple.
///
/// Only index triples `k ≤ m ≤ l` are stored. Any other ordering is resolved
/// through the permutation: `g` is fully symmetric and `f` changes sign under
/// every transposition, so both symmetries hold exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    dim: usize,
    eps: f64,
    entries: BTreeMap<(usize, usize, usize), Entry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    f: f64,
    g: f64,
}

/// Sorted triple plus the parity of the sorting permutation (+1 or −1).
fn canonical(k: usize, m: usize, l: usize) -> ((usize, usize, usize), f64) {
    let mut idx = [k, m, l];
    let mut sign = 1.0;
    for i in 0..3 {
        for j in 0..2 - i {
            if idx[j] > idx[j + 1] {
                idx.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    ((idx[0], idx[1], idx[2]), sign)
}

impl StructureConstants {
    /// Builds from canonical `(k ≤ m ≤ l, f, g)` entries. `f` on triples with a
    /// repeated index is forced to zero.
    pub fn from_entries(
        dim: usize,
        entries: impl IntoIterator<Item = (usize, usize, usize, f64, f64)>,
        eps: f64,
    ) -> Result<Self> {
        let n = tuple_len(dim);
        let mut map = BTreeMap::new();
        for (k, m, l, f, g) in entries {
            if k > m || m > l || l >= n {
                return Err(BlochError::Structural(format!(
                    "entry ({k}, {m}, {l}) is not a sorted index triple below {n}"
                )));
            }
            let f = if k == m || m == l { 0.0 } else { f };
            let f = if f.abs() < eps { 0.0 } else { f };
            let g = if g.abs() < eps { 0.0 } else { g };
            if f != 0.0 || g != 0.0 {
                map.insert((k, m, l), Entry { f, g });
            }
        }
        Ok(Self {
            dim,
            eps,
            entries: map,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        tuple_len(self.dim)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn threshold(&self) -> f64 {
        self.eps
    }

    /// Number of stored canonical entries.
    pub fn stored(&self) -> usize {
        self.entries.len()
    }

    pub fn f(&self, k: usize, m: usize, l: usize) -> f64 {
        let (key, sign) = canonical(k, m, l);
        self.entries.get(&key).map_or(0.0, |e| sign * e.f)
    }

    pub fn g(&self, k: usize, m: usize, l: usize) -> f64 {
        let (key, _) = canonical(k, m, l);
        self.entries.get(&key).map_or(0.0, |e| e.g)
    }

    /// Canonical entries `(k, m, l, f, g)` with `k ≤ m ≤ l`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, f64, f64)> + '_ {
        self.entries
            .iter()
            .map(|(&(k, m, l), e)| (k, m, l, e.f, e.g))
    }

    /// Visits every nonzero index triple in full (all distinct permutations
    /// of each stored entry) with its `f` and `g`.
    pub fn for_each_full(&self, mut visit: impl FnMut(usize, usize, usize, f64, f64)) {
        for (&(a, b, c), e) in &self.entries {
            let perms = [
                (a, b, c, 1.0),
                (b, c, a, 1.0),
                (c, a, b, 1.0),
                (b, a, c, -1.0),
                (a, c, b, -1.0),
                (c, b, a, -1.0),
            ];
            let mut seen: [(usize, usize, usize); 6] = [(usize::MAX, 0, 0); 6];
            let mut count = 0;
            for (k, m, l, sign) in perms {
                if seen[..count].contains(&(k, m, l)) {
                    continue;
                }
                seen[count] = (k, m, l);
                count += 1;
                visit(k, m, l, sign * e.f, e.g);
            }
        }
    }

    /// Matrix `Mₗₘ = Σₖ fₗₘₖ hₖ`.
    pub fn contract_f(&self, h: &[f64]) -> DMatrix<f64> {
        let n = self.len();
        assert_eq!(h.len(), n, "contraction vector length");
        let mut out = DMatrix::zeros(n, n);
        self.for_each_full(|l, m, k, f, _| {
            if f != 0.0 {
                out[(l, m)] += f * h[k];
            }
        });
        out
    }

    /// Matrix `Mₗₘ = Σₖ gₗₘₖ hₖ`.
    pub fn contract_g(&self, h: &[f64]) -> DMatrix<f64> {
        let n = self.len();
        assert_eq!(h.len(), n, "contraction vector length");
        let mut out = DMatrix::zeros(n, n);
        self.for_each_full(|l, m, k, _, g| {
            if g != 0.0 {
                out[(l, m)] += g * h[k];
            }
        });
        out
    }
}

/// Sparse view of a matrix: nonzero entries grouped by row.
struct SparseRows {
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseRows {
    fn new(m: &CMatrix) -> Self {
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter(|&j| m[(i, j)] != ZERO)
                    .map(|j| (j, m[(i, j)]))
                    .collect()
            })
            .collect();
        Self { rows }
    }

    fn product_into(&self, other: &SparseRows, out: &mut CMatrix) {
        out.fill(ZERO);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                for &(p, b) in &other.rows[j] {
                    out[(i, p)] += a * b;
                }
            }
        }
    }

    /// `tr(p · self)`.
    fn trace_after(&self, p: &CMatrix) -> Complex64 {
        let mut acc = ZERO;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, c) in row {
                acc += p[(j, i)] * c;
            }
        }
        acc
    }
}

/// Structure constants `gₖₘₗ = ¼ tr({Υᵏ, Υᵐ} Υˡ)` and
/// `fₖₘₗ = (1/4i) tr([Υᵏ, Υᵐ] Υˡ)`.
///
/// For Hermitian elements both reduce to parts of `t = tr(Υᵏ Υᵐ Υˡ)`:
/// `g = Re t / 2`, `f = Im t / 2`.
pub fn structure_constants(t: &OperatorTuple) -> Result<StructureConstants> {
    ensure_valid(t)?;
    let n = t.len();
    let d = t.dim;
    let sparse: Vec<SparseRows> = t.elements.iter().map(SparseRows::new).collect();
    let mut product = CMatrix::zeros(d, d);
    let mut entries = Vec::new();
    for k in 0..n {
        for m in k..n {
            sparse[k].product_into(&sparse[m], &mut product);
            for (l, el) in sparse.iter().enumerate().skip(m) {
                let tr = el.trace_after(&product);
                entries.push((k, m, l, 0.5 * tr.im, 0.5 * tr.re));
            }
        }
    }
    StructureConstants::from_entries(d, entries, EPS_SC)
}

/// Orthogonal matrix relating Bloch coordinates in two tuples.
///
/// `Tⱼₖ = ½ tr(bʲ aᵏ)`; a coefficient vector `p` in tuple `a` becomes `T p` in
/// tuple `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisChange {
    dim: usize,
    matrix: DMatrix<f64>,
}

impl BasisChange {
    pub fn new(dim: usize, matrix: DMatrix<f64>) -> Result<Self> {
        let n = tuple_len(dim);
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(BlochError::Structural(format!(
                "basis change must be {n}x{n}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Maps coefficients from the source tuple into the target tuple.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_column_slice(p);
        (&self.matrix * v).iter().copied().collect()
    }

    /// `max |TᵀT − I|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.matrix.nrows();
        let gram = self.matrix.transpose() * &self.matrix;
        (gram - DMatrix::<f64>::identity(n, n)).amax()
    }

    pub fn inverse(&self) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix.transpose(),
        }
    }
}

pub fn change_of_basis(a: &OperatorTuple, b: &OperatorTuple) -> Result<BasisChange> {
    if a.dim != b.dim {
        return Err(BlochError::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    ensure_valid(a)?;
    ensure_valid(b)?;
    let n = a.len();
    let matrix = DMatrix::from_fn(n, n, |j, k| {
        0.5 * trace_product(&b.elements[j], &a.elements[k]).re
    });
    BasisChange::new(a.dim, matrix)
}

/// Re-expresses structure constants of tuple `a` in tuple `b`, given
/// `T = change_of_basis(a, b)`:
/// `f'ₖₘₗ = Σ Tₖⱼ₁ Tₘⱼ₂ Tₗⱼ₃ fⱼ₁ⱼ₂ⱼ₃`, and likewise for `g`.
pub fn transform_constants(sc: &StructureConstants, t: &BasisChange) -> Result<StructureConstants> {
    if sc.dim != t.dim {
        return Err(BlochError::DimensionMismatch {
            expected: sc.dim,
            found: t.dim,
        });
    }
    let n = sc.len();
    let tm = &t.matrix;
    let idx = |a: usize, b: usize, c: usize| (a * n + b) * n + c;

    // First mode from the sparse input: X[j1, k2, k3] = Σ T[j1, k1] F[k1, k2, k3].
    let mut f1 = vec![0.0; n * n * n];
    let mut g1 = vec![0.0; n * n * n];
    sc.for_each_full(|k1, k2, k3, f, g| {
        for j1 in 0..n {
            let w = tm[(j1, k1)];
            if w == 0.0 {
                continue;
            }
            f1[idx(j1, k2, k3)] += w * f;
            g1[idx(j1, k2, k3)] += w * g;
        }
    });

    // Second mode, dense.
    let mut f2 = vec![0.0; n * n * n];
    let mut g2 = vec![0.0; n * n * n];
    for j1 in 0..n {
        for k2 in 0..n {
            for k3 in 0..n {
                let (fv, gv) = (f1[idx(j1, k2, k3)], g1[idx(j1, k2, k3)]);
                if fv == 0.0 && gv == 0.0 {
                    continue;
                }
                for j2 in 0..n {
                    let w = tm[(j2, k2)];
                    f2[idx(j1, j2, k3)] += w * fv;
                    g2[idx(j1, j2, k3)] += w * gv;
                }
            }
        }
    }

    // Third mode, only for sorted output triples.
    let mut entries = Vec::new();
    for j1 in 0..n {
        for j2 in j1..n {
            for j3 in j2..n {
                let mut fv = 0.0;
                let mut gv = 0.0;
                for k3 in 0..n {
                    let w = tm[(j3, k3)];
                    fv += w * f2[idx(j1, j2, k3)];
                    gv += w * g2[idx(j1, j2, k3)];
                }
                entries.push((j1, j2, j3, fv, gv));
            }
        }
    }
    StructureConstants::from_entries(sc.dim, entries, sc.eps)
}

/// `max |Υᵏ Υᵐ − ((2/d) δₖₘ I + Σₗ (gₖₘₗ + i fₖₘₗ) Υˡ)|` over all pairs.
pub fn product_reconstruction_residual(t: &OperatorTuple, sc: &StructureConstants) -> f64 {
    let n = t.len();
    let d = t.dim;
    let mut worst = 0.0f64;
    for k in 0..n {
        for m in 0..n {
            let direct = &t.elements[k] * &t.elements[m];
            let coeffs: Vec<Complex64> = (0..n)
                .map(|l| Complex64::new(sc.g(k, m, l), sc.f(k, m, l)))
                .collect();
            let mut rebuilt = t.combine_complex(&coeffs);
            if k == m {
                for i in 0..d {
                    rebuilt[(i, i)] += Complex64::new(2.0 / d as f64, 0.0);
                }
            }
            worst = worst.max(crate::linalg::max_abs_diff(&direct, &rebuilt));
        }
    }
    worst
}
