//! JSON schemas and the tuple registry.
//!
//! Complex numbers are `[re, im]` pairs and matrices are lists of rows.
//! Structure-constant indices are 1-based in JSON.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{
    gell_mann_tuple, random_tuple, structure_constants, OperatorTuple, StructureConstants, EPS_SC,
    GELL_MANN,
};
use crate::bloch::{state_to_bloch, BlochRole, BlochVector, DensityMatrix, Observable, TOL_POS};
use crate::dynamics::{
    evolve_open, Dissipator, DissipatorSpec, HamiltonianSpec, TimeGrid, TimeSeries, Trajectory,
};
use crate::entanglement::BipartiteState;
use crate::error::{BlochError, Result};
use crate::linalg::CMatrix;
use crate::ode::IntegratorSettings;

/// Label resolving to a seeded random tuple; the seed comes from the caller.
pub const RANDOM: &str = "random";

pub type MatrixData = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_data(m: &CMatrix) -> MatrixData {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_data(data: &MatrixData) -> Result<CMatrix> {
    let rows = data.len();
    let cols = data.first().map_or(0, Vec::len);
    if rows == 0 || data.iter().any(|r| r.len() != cols) {
        return Err(BlochError::Structural(
            "matrix rows must be non-empty and of equal length".into(),
        ));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        let [re, im] = data[i][j];
        num_complex::Complex64::new(re, im)
    }))
}

fn check_matrix_dim(m: &CMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(BlochError::Structural(format!(
            "expected a {dim}x{dim} matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TupleJson {
    pub dim: usize,
    pub label: String,
    pub elements: Vec<MatrixData>,
}

impl TupleJson {
    pub fn from_tuple(t: &OperatorTuple) -> Self {
        Self {
            dim: t.dim(),
            label: t.label().to_string(),
            elements: t.elements().iter().map(matrix_to_data).collect(),
        }
    }

    /// Parses without checking the tuple invariants.
    pub fn into_tuple_unchecked(self) -> Result<OperatorTuple> {
        let elements = self
            .elements
            .iter()
            .map(|e| {
                let m = matrix_from_data(e)?;
                check_matrix_dim(&m, self.dim)?;
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OperatorTuple::new_unchecked(self.dim, self.label, elements))
    }

    pub fn into_tuple(self) -> Result<OperatorTuple> {
        let t = self.into_tuple_unchecked()?;
        OperatorTuple::new(t.dim(), t.label().to_string(), t.into_elements())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantJson {
    pub k: usize,
    pub m: usize,
    pub l: usize,
    pub f: f64,
    pub g: f64,
}

/// Canonical `k ≤ m ≤ l` entries with 1-based indices.
pub fn constants_to_json(sc: &StructureConstants) -> Vec<ConstantJson> {
    sc.entries()
        .map(|(k, m, l, f, g)| ConstantJson {
            k: k + 1,
            m: m + 1,
            l: l + 1,
            f,
            g,
        })
        .collect()
}

pub fn constants_from_json(dim: usize, entries: &[ConstantJson]) -> Result<StructureConstants> {
    let mut list = Vec::with_capacity(entries.len());
    for e in entries {
        if e.k == 0 || e.m == 0 || e.l == 0 {
            return Err(BlochError::Structural(
                "constant indices are 1-based".into(),
            ));
        }
        list.push((e.k - 1, e.m - 1, e.l - 1, e.f, e.g));
    }
    StructureConstants::from_entries(dim, list, EPS_SC)
}

/// Density matrix or observable; `dims` is present for bipartite states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 2]>,
    pub matrix: MatrixData,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self {
            dim: m.nrows(),
            dims: None,
            matrix: matrix_to_data(m),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let m = matrix_from_data(&self.matrix)?;
        check_matrix_dim(&m, self.dim)?;
        Ok(m)
    }

    pub fn to_state(&self, tol: f64) -> Result<DensityMatrix> {
        DensityMatrix::new(self.to_matrix()?, tol)
    }

    pub fn to_observable(&self) -> Result<Observable> {
        Observable::new(self.to_matrix()?)
    }

    pub fn to_bipartite(&self, tol: f64) -> Result<BipartiteState> {
        let [d1, d2] = self.dims.ok_or_else(|| {
            BlochError::Structural("bipartite state needs \"dims\": [d1, d2]".into())
        })?;
        BipartiteState::new((d1, d2), self.to_matrix()?, tol)
    }
}

/// A bipartite state as a density matrix with `dims`, or as amplitudes
/// `psi[i₁ d₂ + i₂]` of a pure state.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BipartiteJson {
    Vector {
        dims: [usize; 2],
        psi: Vec<[f64; 2]>,
    },
    Matrix(MatrixJson),
}

impl BipartiteJson {
    pub fn to_state(&self, tol: f64) -> Result<BipartiteState> {
        match self {
            BipartiteJson::Vector { dims, psi } => {
                let amplitudes: Vec<Complex64> = psi
                    .iter()
                    .map(|[re, im]| Complex64::new(*re, *im))
                    .collect();
                BipartiteState::from_pure_vector((dims[0], dims[1]), &amplitudes)
            }
            BipartiteJson::Matrix(m) => m.to_bipartite(tol),
        }
    }
}

/// A state file is either a matrix or a Bloch vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorOrBloch {
    Bloch(BlochVector),
    Matrix(MatrixJson),
}

/// Tuple lookup: `gell-mann`, `random` (with the given seed) or `random-<seed>`.
pub fn registry_tuple(label: &str, dim: usize, seed: u64) -> Result<OperatorTuple> {
    if dim < 2 {
        return Err(BlochError::Domain(format!(
            "dimension must be >= 2, got {dim}"
        )));
    }
    match label {
        GELL_MANN => gell_mann_tuple(dim),
        RANDOM => random_tuple(dim, seed),
        other => match other.strip_prefix("random-").map(str::parse::<u64>) {
            Some(Ok(s)) => random_tuple(dim, s),
            _ => Err(BlochError::InvalidTuple(format!(
                "unknown tuple label {other:?}"
            ))),
        },
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TupleRef {
    Label(String),
    Inline(TupleJson),
}

impl Default for TupleRef {
    fn default() -> Self {
        TupleRef::Label(GELL_MANN.to_string())
    }
}

impl TupleRef {
    pub fn resolve(&self, dim: usize, seed: u64) -> Result<OperatorTuple> {
        match self {
            TupleRef::Label(label) => registry_tuple(label, dim, seed),
            TupleRef::Inline(json) => {
                if json.dim != dim {
                    return Err(BlochError::DimensionMismatch {
                        expected: dim,
                        found: json.dim,
                    });
                }
                json.clone().into_tuple()
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimedValue<T> {
    pub t: f64,
    pub value: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimedSeries<T> {
    Piecewise(Vec<TimedValue<T>>),
    Table(Vec<TimedValue<T>>),
}

/// A plain value, `{"piecewise": [{"t", "value"}…]}` or `{"table": […]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeriesJson<T> {
    Constant(T),
    Timed(TimedSeries<T>),
}

impl<T> SeriesJson<T> {
    fn convert<U>(&self, f: impl Fn(&T) -> Result<U>) -> Result<TimeSeries<U>> {
        let pairs = |v: &[TimedValue<T>]| -> Result<Vec<(f64, U)>> {
            v.iter().map(|s| Ok((s.t, f(&s.value)?))).collect()
        };
        Ok(match self {
            SeriesJson::Constant(v) => TimeSeries::Constant(f(v)?),
            SeriesJson::Timed(TimedSeries::Piecewise(v)) => TimeSeries::Piecewise(pairs(v)?),
            SeriesJson::Timed(TimedSeries::Table(v)) => TimeSeries::Table(pairs(v)?),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DissipatorJson {
    pub gamma: f64,
    #[serde(rename = "L")]
    pub l: SeriesJson<MatrixData>,
}

/// Evolution problem as read from JSON.
///
/// The initial state is given either as `r0` (Bloch coordinates) or as
/// `rho0` (density matrix).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionSpec {
    pub dim: usize,
    #[serde(default)]
    pub tuple: TupleRef,
    #[serde(default)]
    pub h0: Option<SeriesJson<f64>>,
    #[serde(default)]
    pub h: Option<SeriesJson<Vec<f64>>>,
    #[serde(default)]
    pub dissipators: Vec<DissipatorJson>,
    pub t0: f64,
    pub t1: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub sample_every: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub r0: Option<Vec<f64>>,
    #[serde(default)]
    pub rho0: Option<MatrixData>,
}

/// A fully validated evolution problem.
#[derive(Debug, Clone)]
pub struct EvolutionProblem {
    pub tuple: OperatorTuple,
    pub constants: StructureConstants,
    pub hamiltonian: HamiltonianSpec,
    pub dissipators: DissipatorSpec,
    pub grid: TimeGrid,
    pub settings: IntegratorSettings,
    pub r0: BlochVector,
}

impl EvolutionSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self, seed: u64) -> Result<EvolutionProblem> {
        let d = self.dim;
        let tuple = self.tuple.resolve(d, seed)?;
        let constants = structure_constants(&tuple)?;
        let h0 = match &self.h0 {
            Some(s) => s.convert(|v| Ok(*v))?,
            None => TimeSeries::Constant(0.0),
        };
        let h = match &self.h {
            Some(s) => s.convert(|v| Ok(v.clone()))?,
            None => TimeSeries::Constant(vec![0.0; tuple.len()]),
        };
        let hamiltonian = HamiltonianSpec::new(d, h0, h)?;
        let terms = self
            .dissipators
            .iter()
            .map(|dj| {
                Ok(Dissipator {
                    gamma: dj.gamma,
                    op: dj.l.convert(matrix_from_data)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let dissipators = DissipatorSpec::new(d, terms)?;
        let grid = match self.sample_every {
            Some(every) => TimeGrid::uniform(self.t0, self.t1, every)?,
            None => TimeGrid::endpoints(self.t0, self.t1)?,
        };
        let defaults = IntegratorSettings::default();
        let settings = IntegratorSettings {
            dt: self.dt,
            tol: self.tol.unwrap_or(defaults.tol),
            ..defaults
        };
        let r0 = match (&self.r0, &self.rho0) {
            (Some(r), None) => BlochVector::new(d, BlochRole::State, r.clone())?,
            (None, Some(m)) => {
                let m = matrix_from_data(m)?;
                check_matrix_dim(&m, d)?;
                state_to_bloch(&DensityMatrix::new(m, TOL_POS)?, &tuple)?
            }
            (None, None) => BlochVector::zeros(d, BlochRole::State),
            (Some(_), Some(_)) => {
                return Err(BlochError::Structural(
                    "give either \"r0\" or \"rho0\", not both".into(),
                ))
            }
        };
        Ok(EvolutionProblem {
            tuple,
            constants,
            hamiltonian,
            dissipators,
            grid,
            settings,
            r0,
        })
    }
}

impl EvolutionProblem {
    pub fn run(&self) -> Result<Trajectory> {
        evolve_open(
            &self.r0,
            &self.hamiltonian,
            &self.dissipators,
            &self.tuple,
            &self.constants,
            &self.grid,
            &self.settings,
        )
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
