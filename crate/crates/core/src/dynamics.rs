//! Closed and open qudit dynamics as ODEs on Bloch vectors.
//!
//! Closed evolution under `H = h₀ I/d + h · Υ` is `ṙ = B_H r` with the
//! skew-symmetric `B_H,lm = −2 Σₖ f_lmk hₖ`. Lindblad evolution adds a
//! dissipative part and a drift:
//!
//! ```text
//! ṙ = (B_H + B_dis) r + c
//! B_dis,lm = ½ Σₖ γₖ Re tr([Υˡ, Lₖ] Υᵐ Lₖ†)
//! c_l      = √(1/(2d(d−1))) Σₖ γₖ tr(Υˡ [Lₖ, Lₖ†])
//! ```
//!
//! The drift is kept apart from the matrix so the homogeneous part can be
//! inspected on its own.
//!
//! The unitary propagator `U = e^{−iφ} (u₀ I − i √(d/2) u · Υ)` is evolved
//! through its coefficients, with `φ = ∫ h₀/d`.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::basis::{tuple_len, OperatorTuple, StructureConstants};
use crate::bloch::{is_state, BlochRole, BlochVector, TOL_POS};
use crate::error::{BlochError, Result};
use crate::linalg::{commutator, identity, real, trace_product, CMatrix, I};
use crate::ode::{integrate_segments, IntegratorSettings};

/// Values that can be linearly interpolated between table samples.
pub trait Interpolate: Clone {
    fn interpolate(&self, other: &Self, w: f64) -> Self;
}

impl Interpolate for f64 {
    fn interpolate(&self, other: &Self, w: f64) -> Self {
        (1.0 - w) * self + w * other
    }
}

impl Interpolate for Vec<f64> {
    fn interpolate(&self, other: &Self, w: f64) -> Self {
        self.iter()
            .zip(other)
            .map(|(a, b)| (1.0 - w) * a + w * b)
            .collect()
    }
}

impl Interpolate for CMatrix {
    fn interpolate(&self, other: &Self, w: f64) -> Self {
        self * real(1.0 - w) + other * real(w)
    }
}

/// A time-dependent coefficient.
#[derive(Clone)]
pub enum TimeSeries<T> {
    Constant(T),
    /// `(start, value)` pairs sorted by start; the value holds until the next
    /// start. Times before the first start take the first value.
    Piecewise(Vec<(f64, T)>),
    /// `(t, value)` samples sorted by time, linearly interpolated and held
    /// constant outside the table.
    Table(Vec<(f64, T)>),
    Function(Arc<dyn Fn(f64) -> T + Send + Sync>),
}

impl<T: std::fmt::Debug> std::fmt::Debug for TimeSeries<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TimeSeries::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            TimeSeries::Piecewise(v) => f.debug_tuple("Piecewise").field(v).finish(),
            TimeSeries::Table(v) => f.debug_tuple("Table").field(v).finish(),
            TimeSeries::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl<T: Interpolate> TimeSeries<T> {
    pub fn at(&self, t: f64) -> T {
        match self {
            TimeSeries::Constant(v) => v.clone(),
            TimeSeries::Piecewise(segments) => {
                let idx = segments.partition_point(|(start, _)| *start <= t);
                segments[idx.saturating_sub(1)].1.clone()
            }
            TimeSeries::Table(samples) => {
                let idx = samples.partition_point(|(ts, _)| *ts <= t);
                if idx == 0 {
                    samples[0].1.clone()
                } else if idx == samples.len() {
                    samples[idx - 1].1.clone()
                } else {
                    let (ta, va) = &samples[idx - 1];
                    let (tb, vb) = &samples[idx];
                    va.interpolate(vb, (t - ta) / (tb - ta))
                }
            }
            TimeSeries::Function(f) => f(t),
        }
    }

    /// Value on the piece starting at `segment_start`: piecewise series are
    /// held at their value there, everything else is evaluated at `t`.
    pub fn at_segment(&self, t: f64, segment_start: f64) -> T {
        match self {
            TimeSeries::Piecewise(_) => self.at(segment_start),
            _ => self.at(t),
        }
    }

    /// Times where the series jumps or has a kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            TimeSeries::Piecewise(s) | TimeSeries::Table(s) => s.iter().map(|(t, _)| *t).collect(),
            _ => Vec::new(),
        }
    }

    pub fn is_piecewise_constant(&self) -> bool {
        matches!(self, TimeSeries::Constant(_) | TimeSeries::Piecewise(_))
    }

    pub fn is_constant(&self) -> bool {
        match self {
            TimeSeries::Constant(_) => true,
            TimeSeries::Piecewise(s) | TimeSeries::Table(s) => s.len() == 1,
            TimeSeries::Function(_) => false,
        }
    }

    /// Every explicitly stored value; empty for closures.
    fn stored(&self) -> Vec<&T> {
        match self {
            TimeSeries::Constant(v) => vec![v],
            TimeSeries::Piecewise(s) | TimeSeries::Table(s) => s.iter().map(|(_, v)| v).collect(),
            TimeSeries::Function(_) => Vec::new(),
        }
    }

    fn check_sorted(&self, what: &str) -> Result<()> {
        if let TimeSeries::Piecewise(s) | TimeSeries::Table(s) = self {
            if s.is_empty() {
                return Err(BlochError::Structural(format!("{what}: empty time series")));
            }
            if s.windows(2).any(|w| !(w[0].0 < w[1].0)) {
                return Err(BlochError::Structural(format!(
                    "{what}: time points must be strictly increasing"
                )));
            }
        }
        Ok(())
    }
}

/// Hamiltonian `H(t) = h₀(t) I/d + h(t) · Υ` in a fixed tuple;
/// `h₀ = tr H`, `h = ½ tr(Υ H)`.
#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    dim: usize,
    h0: TimeSeries<f64>,
    h: TimeSeries<Vec<f64>>,
}

impl HamiltonianSpec {
    pub fn new(dim: usize, h0: TimeSeries<f64>, h: TimeSeries<Vec<f64>>) -> Result<Self> {
        h0.check_sorted("h0")?;
        h.check_sorted("h")?;
        let n = tuple_len(dim);
        for v in h.stored() {
            if v.len() != n {
                return Err(BlochError::Structural(format!(
                    "Hamiltonian coefficients need {n} entries, got {}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(BlochError::Domain(
                    "Hamiltonian coefficients must be finite".into(),
                ));
            }
        }
        Ok(Self { dim, h0, h })
    }

    pub fn constant(dim: usize, h0: f64, h: Vec<f64>) -> Result<Self> {
        Self::new(dim, TimeSeries::Constant(h0), TimeSeries::Constant(h))
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            h0: TimeSeries::Constant(0.0),
            h: TimeSeries::Constant(vec![0.0; tuple_len(dim)]),
        }
    }

    /// Decomposes a constant Hermitian matrix in the tuple.
    pub fn from_matrix(hamiltonian: &CMatrix, t: &OperatorTuple) -> Result<Self> {
        if hamiltonian.nrows() != t.dim() || hamiltonian.ncols() != t.dim() {
            return Err(BlochError::DimensionMismatch {
                expected: t.dim(),
                found: hamiltonian.nrows(),
            });
        }
        let h0 = crate::linalg::trace(hamiltonian).re;
        Self::constant(t.dim(), h0, t.coefficients(hamiltonian))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h0_at(&self, t: f64) -> f64 {
        self.h0.at(t)
    }

    pub fn h_at(&self, t: f64) -> Vec<f64> {
        self.h.at(t)
    }

    pub fn is_constant(&self) -> bool {
        self.h0.is_constant() && self.h.is_constant()
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.h0.is_piecewise_constant() && self.h.is_piecewise_constant()
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.h0.breakpoints();
        b.extend(self.h.breakpoints());
        b
    }

    fn h_at_segment(&self, t: f64, start: f64) -> Vec<f64> {
        self.h.at_segment(t, start)
    }

    fn h0_at_segment(&self, t: f64, start: f64) -> f64 {
        self.h0.at_segment(t, start)
    }

    /// `H(t)` as a matrix in the given tuple.
    pub fn matrix_at(&self, t: f64, tuple: &OperatorTuple) -> CMatrix {
        let mut m = tuple.combine(&self.h_at(t));
        let shift = self.h0_at(t) / self.dim as f64;
        for i in 0..self.dim {
            m[(i, i)] += real(shift);
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct Dissipator {
    pub gamma: f64,
    pub op: TimeSeries<CMatrix>,
}

impl Dissipator {
    pub fn constant(gamma: f64, op: CMatrix) -> Self {
        Self {
            gamma,
            op: TimeSeries::Constant(op),
        }
    }
}

/// List of `(γₖ, Lₖ(t))` with every `γₖ ≥ 0`.
#[derive(Debug, Clone, Default)]
pub struct DissipatorSpec {
    terms: Vec<Dissipator>,
}

impl DissipatorSpec {
    pub fn new(dim: usize, terms: Vec<Dissipator>) -> Result<Self> {
        for (index, term) in terms.iter().enumerate() {
            if !(term.gamma >= 0.0) {
                return Err(BlochError::NegativeRate {
                    index,
                    gamma: term.gamma,
                });
            }
            term.op.check_sorted(&format!("dissipator {index}"))?;
            for m in term.op.stored() {
                if m.nrows() != dim || m.ncols() != dim {
                    return Err(BlochError::Structural(format!(
                        "dissipator {index} is {}x{}, expected {dim}x{dim}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
            }
        }
        Ok(Self { terms })
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &[Dissipator] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn at(&self, t: f64) -> Vec<(f64, CMatrix)> {
        self.terms.iter().map(|d| (d.gamma, d.op.at(t))).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|d| d.op.is_constant())
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.terms.iter().all(|d| d.op.is_piecewise_constant())
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.terms.iter().flat_map(|d| d.op.breakpoints()).collect()
    }

    fn at_segment(&self, t: f64, start: f64) -> Vec<(f64, CMatrix)> {
        self.terms
            .iter()
            .map(|d| (d.gamma, d.op.at_segment(t, start)))
            .collect()
    }
}

/// Affine generator `r ↦ B r + c` on `R^(d²−1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochGenerator {
    dim: usize,
    matrix: DMatrix<f64>,
    drift: DVector<f64>,
}

impl BlochGenerator {
    pub fn zero(dim: usize) -> Self {
        let n = tuple_len(dim);
        Self {
            dim,
            matrix: DMatrix::zeros(n, n),
            drift: DVector::zeros(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn drift(&self) -> &DVector<f64> {
        &self.drift
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(r);
        (&self.matrix * v + &self.drift).iter().copied().collect()
    }

    pub fn sum(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
            drift: &self.drift + &other.drift,
        }
    }

    /// `max |B + Bᵀ|`.
    pub fn skew_residual(&self) -> f64 {
        (&self.matrix + self.matrix.transpose()).amax()
    }
}

/// `B_lm = −2 Σₖ f_lmk hₖ`, made exactly skew-symmetric.
pub fn hamiltonian_generator(h: &[f64], sc: &StructureConstants) -> Result<BlochGenerator> {
    let n = sc.len();
    if h.len() != n {
        return Err(BlochError::DimensionMismatch {
            expected: n,
            found: h.len(),
        });
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(BlochError::Domain(
            "Hamiltonian coefficients must be finite".into(),
        ));
    }
    let b = sc.contract_f(h) * -2.0;
    let skew = (&b - b.transpose()) * 0.5;
    Ok(BlochGenerator {
        dim: sc.dim(),
        matrix: skew,
        drift: DVector::zeros(n),
    })
}

/// Dissipative matrix and drift for the terms `(γₖ, Lₖ)` at one instant.
pub fn lindblad_generator(terms: &[(f64, CMatrix)], t: &OperatorTuple) -> Result<BlochGenerator> {
    let d = t.dim();
    let n = t.len();
    let mut matrix = DMatrix::zeros(n, n);
    let mut drift = DVector::zeros(n);
    let drift_scale = (1.0 / (2 * d * (d - 1)) as f64).sqrt();
    for (index, (gamma, l)) in terms.iter().enumerate() {
        if !(*gamma >= 0.0) {
            return Err(BlochError::NegativeRate {
                index,
                gamma: *gamma,
            });
        }
        if l.nrows() != d || l.ncols() != d {
            return Err(BlochError::DimensionMismatch {
                expected: d,
                found: l.nrows(),
            });
        }
        if *gamma == 0.0 {
            continue;
        }
        let l_dag = l.adjoint();
        let normal_defect = commutator(l, &l_dag);
        for (row, el) in t.elements().iter().enumerate() {
            // tr([Υˡ, L] Υᵐ L†) = tr(L† [Υˡ, L] Υᵐ)
            let left = &l_dag * commutator(el, l);
            for (col, other) in t.elements().iter().enumerate() {
                matrix[(row, col)] += 0.5 * gamma * trace_product(&left, other).re;
            }
            drift[row] += drift_scale * gamma * trace_product(el, &normal_defect).re;
        }
    }
    Ok(BlochGenerator {
        dim: d,
        matrix,
        drift,
    })
}

/// Sample times for a trajectory, decoupled from the internal step.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    samples: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, samples: Vec<f64>) -> Result<Self> {
        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(BlochError::Domain(format!(
                "time window must satisfy t1 > t0, got [{t0}, {t1}]"
            )));
        }
        if samples.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(BlochError::Domain("sample times must be sorted".into()));
        }
        if samples.iter().any(|&s| s < t0 || s > t1) {
            return Err(BlochError::Domain(format!(
                "sample times must lie in [{t0}, {t1}]"
            )));
        }
        Ok(Self { t0, t1, samples })
    }

    /// `t0, t0 + every, …`, always ending with `t1`.
    pub fn uniform(t0: f64, t1: f64, every: f64) -> Result<Self> {
        if !(every > 0.0) {
            return Err(BlochError::Domain(format!(
                "sampling interval must be positive, got {every}"
            )));
        }
        let count = ((t1 - t0) / every + 1e-9).floor() as usize;
        let mut samples: Vec<f64> = (0..=count).map(|i| t0 + i as f64 * every).collect();
        samples.retain(|&s| s < t1 - 1e-12 * (t1 - t0).abs());
        samples.push(t1);
        Self::new(t0, t1, samples)
    }

    pub fn endpoints(t0: f64, t1: f64) -> Result<Self> {
        Self::new(t0, t1, vec![t0, t1])
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub integrator: String,
    pub dt: f64,
    pub steps: usize,
    pub tuple_label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<BlochVector>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn last(&self) -> &BlochVector {
        self.points.last().expect("trajectory has samples")
    }

    pub fn norms(&self) -> Vec<f64> {
        self.points.iter().map(BlochVector::norm).collect()
    }

    /// CSV with header `t,r_1,…,r_{d²−1},norm`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        let n = self.points.first().map_or(0, |p| p.coords().len());
        for k in 1..=n {
            let _ = write!(out, ",r_{k}");
        }
        out.push_str(",norm\n");
        for (t, p) in self.times.iter().zip(&self.points) {
            let _ = write!(out, "{t}");
            for x in p.coords() {
                let _ = write!(out, ",{x}");
            }
            let _ = writeln!(out, ",{}", p.norm());
        }
        out
    }
}

const RK4: &str = "rk4-halving";

fn check_initial(r0: &BlochVector, tuple: &OperatorTuple, sc: &StructureConstants) -> Result<()> {
    if tuple.dim() != sc.dim() {
        return Err(BlochError::DimensionMismatch {
            expected: tuple.dim(),
            found: sc.dim(),
        });
    }
    if r0.dim() != tuple.dim() {
        return Err(BlochError::DimensionMismatch {
            expected: tuple.dim(),
            found: r0.dim(),
        });
    }
    let check = is_state(r0, tuple, TOL_POS)?;
    if !check.member {
        return Err(BlochError::NotAState {
            negative_part_norm: check.negative_part_norm,
            threshold: check.threshold,
        });
    }
    Ok(())
}

fn to_trajectory(
    dim: usize,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    dt: f64,
    steps: usize,
    tuple: &OperatorTuple,
) -> Result<Trajectory> {
    let points = states
        .into_iter()
        .map(|coords| BlochVector::new(dim, BlochRole::State, coords))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        times,
        points,
        meta: TrajectoryMeta {
            integrator: RK4.to_string(),
            dt,
            steps,
            tuple_label: tuple.label().to_string(),
        },
    })
}

/// Integrates `ṙ = B_H(t) r` from a valid initial state.
pub fn evolve_closed(
    r0: &BlochVector,
    ham: &HamiltonianSpec,
    tuple: &OperatorTuple,
    sc: &StructureConstants,
    grid: &TimeGrid,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    evolve_open(r0, ham, &DissipatorSpec::none(), tuple, sc, grid, settings)
}

/// Integrates `ṙ = (B_H(t) + B_dis(t)) r + c(t)` and checks that every sample
/// stays in the state Bloch body up to `max(TOL_POS, 10 · settings.tol)`.
pub fn evolve_open(
    r0: &BlochVector,
    ham: &HamiltonianSpec,
    dis: &DissipatorSpec,
    tuple: &OperatorTuple,
    sc: &StructureConstants,
    grid: &TimeGrid,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    check_initial(r0, tuple, sc)?;
    if ham.dim() != tuple.dim() {
        return Err(BlochError::DimensionMismatch {
            expected: tuple.dim(),
            found: ham.dim(),
        });
    }
    for (index, term) in dis.terms().iter().enumerate() {
        if !(term.gamma >= 0.0) {
            return Err(BlochError::NegativeRate {
                index,
                gamma: term.gamma,
            });
        }
    }

    let build = |t: f64, start: f64| -> Result<BlochGenerator> {
        let gen = hamiltonian_generator(&ham.h_at_segment(t, start), sc)?;
        if dis.is_empty() {
            Ok(gen)
        } else {
            Ok(gen.sum(&lindblad_generator(&dis.at_segment(t, start), tuple)?))
        }
    };
    // Surface construction errors before integrating.
    build(grid.t0(), grid.t0())?;

    let piecewise = ham.is_piecewise_constant() && dis.is_piecewise_constant();
    let mut cache: Option<(f64, BlochGenerator)> = None;
    let rhs = |t: f64, start: f64, r: &Vec<f64>| -> Vec<f64> {
        if !piecewise {
            return build(t, start).expect("generator validated at t0").apply(r);
        }
        if cache.as_ref().is_none_or(|(s, _)| *s != start) {
            cache = Some((start, build(t, start).expect("generator validated at t0")));
        }
        cache.as_ref().map(|(_, g)| g.apply(r)).unwrap_or_default()
    };
    let mut breakpoints = ham.breakpoints();
    breakpoints.extend(dis.breakpoints());
    let sol = integrate_segments(
        rhs,
        &r0.coords().to_vec(),
        grid.t0(),
        grid.t1(),
        &breakpoints,
        grid.samples(),
        settings,
    )?;
    let trajectory = to_trajectory(tuple.dim(), sol.times, sol.states, sol.dt, sol.steps, tuple)?;

    if !dis.is_empty() {
        let tol = TOL_POS.max(10.0 * settings.tol);
        for (t, p) in trajectory.times.iter().zip(&trajectory.points) {
            let check = is_state(p, tuple, tol)?;
            if !check.member {
                return Err(BlochError::MembershipLost {
                    time: *t,
                    negative_part_norm: check.negative_part_norm,
                    threshold: check.threshold,
                });
            }
        }
    }
    Ok(trajectory)
}

/// Coefficients `(u₀, u, φ)` of the propagator at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitarySample {
    pub time: f64,
    pub u0: Complex64,
    pub u: Vec<Complex64>,
    /// `∫ h₀/d` from `t0`.
    pub phase: f64,
}

impl UnitarySample {
    pub fn identity(dim: usize, time: f64) -> Self {
        Self {
            time,
            u0: Complex64::new(1.0, 0.0),
            u: vec![Complex64::new(0.0, 0.0); tuple_len(dim)],
            phase: 0.0,
        }
    }

    /// `|u₀|² + ‖u‖² − 1`.
    pub fn normalization_defect(&self) -> f64 {
        self.u0.norm_sqr() + self.u.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0
    }

    /// Largest residual of the quadratic constraint imposed by unitarity,
    /// `u₀ ūⱼ − ū₀ uⱼ + √(d/2) Σₖₘ (fₖₘⱼ − i gₖₘⱼ) uₖ ūₘ = 0`.
    pub fn constraint_residual(&self, sc: &StructureConstants) -> f64 {
        let s = (sc.dim() as f64 / 2.0).sqrt();
        let mut acc: Vec<Complex64> = self
            .u
            .iter()
            .map(|uj| self.u0 * uj.conj() - self.u0.conj() * uj)
            .collect();
        sc.for_each_full(|k, m, j, f, g| {
            acc[j] += Complex64::new(f, -g) * self.u[k] * self.u[m].conj() * s;
        });
        acc.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryCoefficients {
    pub dim: usize,
    pub samples: Vec<UnitarySample>,
    pub dt: f64,
    pub tol: f64,
}

impl UnitaryCoefficients {
    pub fn last(&self) -> &UnitarySample {
        self.samples.last().expect("coefficients have samples")
    }

    pub fn max_normalization_defect(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.normalization_defect().abs())
            .fold(0.0, f64::max)
    }
}

/// Integrates the propagator coefficients:
///
/// ```text
/// u̇₀ = −√(2/d) h · u
/// u̇ⱼ = √(2/d) u₀ hⱼ + Σₖₘ (fⱼₖₘ − i gⱼₖₘ) hₖ uₘ
/// φ̇  = h₀ / d
/// ```
///
/// from `u₀ = 1`, `u = 0`, `φ = 0`.
pub fn evolve_unitary_coefficients(
    ham: &HamiltonianSpec,
    sc: &StructureConstants,
    grid: &TimeGrid,
    settings: &IntegratorSettings,
) -> Result<UnitaryCoefficients> {
    let d = sc.dim();
    if ham.dim() != d {
        return Err(BlochError::DimensionMismatch {
            expected: d,
            found: ham.dim(),
        });
    }
    let n = tuple_len(d);
    let coupling = (2.0 / d as f64).sqrt();

    // Mⱼₘ = Σₖ (fⱼₖₘ − i gⱼₖₘ) hₖ = −Σₖ fⱼₘₖ hₖ − i Σₖ gⱼₘₖ hₖ
    let mixing = |h: &[f64]| -> DMatrix<Complex64> {
        let mf = sc.contract_f(h);
        let mg = sc.contract_g(h);
        DMatrix::from_fn(n, n, |j, m| Complex64::new(-mf[(j, m)], -mg[(j, m)]))
    };
    let piecewise = ham.is_piecewise_constant();
    let mut cache: Option<(f64, DMatrix<Complex64>, Vec<f64>, f64)> = None;
    let rhs = |t: f64, start: f64, y: &Vec<Complex64>| -> Vec<Complex64> {
        let stale = !piecewise || cache.as_ref().is_none_or(|c| c.0 != start);
        if stale {
            let h = ham.h_at_segment(t, start);
            cache = Some((start, mixing(&h), h, ham.h0_at_segment(t, start)));
        }
        let (_, mix, h, h0) = cache.as_ref().expect("filled above");
        let u0 = y[0];
        let u = &y[1..=n];
        let mut out = vec![Complex64::new(0.0, 0.0); n + 2];
        let h_dot_u: Complex64 = h.iter().zip(u).map(|(a, b)| b * *a).sum();
        out[0] = -h_dot_u * coupling;
        for j in 0..n {
            let mut acc = u0 * (coupling * h[j]);
            for m in 0..n {
                acc += mix[(j, m)] * u[m];
            }
            out[1 + j] = acc;
        }
        out[n + 1] = Complex64::new(h0 / d as f64, 0.0);
        out
    };
    let mut y0 = vec![Complex64::new(0.0, 0.0); n + 2];
    y0[0] = Complex64::new(1.0, 0.0);
    let sol = integrate_segments(
        rhs,
        &y0,
        grid.t0(),
        grid.t1(),
        &ham.breakpoints(),
        grid.samples(),
        settings,
    )?;
    let samples = sol
        .times
        .iter()
        .zip(&sol.states)
        .map(|(&time, y)| UnitarySample {
            time,
            u0: y[0],
            u: y[1..=n].to_vec(),
            phase: y[n + 1].re,
        })
        .collect();
    Ok(UnitaryCoefficients {
        dim: d,
        samples,
        dt: sol.dt,
        tol: settings.tol,
    })
}

/// `U = e^{−iφ} (u₀ I − i √(d/2) u · Υ)`. Fails when the normalization
/// `|u₀|² + ‖u‖² = 1` is off by more than `10 · tol`.
pub fn reconstruct_unitary(
    sample: &UnitarySample,
    tuple: &OperatorTuple,
    tol: f64,
) -> Result<CMatrix> {
    let d = tuple.dim();
    if sample.u.len() != tuple.len() {
        return Err(BlochError::DimensionMismatch {
            expected: tuple.len(),
            found: sample.u.len(),
        });
    }
    let defect = sample.normalization_defect();
    if defect.abs() > 10.0 * tol {
        return Err(BlochError::Integrity(format!(
            "|u0|^2 + ||u||^2 - 1 = {defect:.3e} exceeds {:.1e}",
            10.0 * tol
        )));
    }
    let s = (d as f64 / 2.0).sqrt();
    let v = identity(d) * sample.u0 - tuple.combine_complex(&sample.u) * (I * s);
    let phase = Complex64::from_polar(1.0, -sample.phase);
    Ok(v * phase)
}
