use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use qudit_bloch::basis::{structure_constants, validate_tuple, GELL_MANN};
use qudit_bloch::bloch::{
    bloch_to_observable, bloch_to_state, is_pure_state, is_state, observable_membership,
    observable_to_bloch, operator_to_bloch, state_to_bloch, BlochRole, BlochVector, TOL_POS,
};
use qudit_bloch::entanglement::{concurrence, ConcurrenceNorm};
use qudit_bloch::io::{
    constants_to_json, read_json, registry_tuple, BipartiteJson, EvolutionSpec, MatrixJson,
    OperatorOrBloch, TupleJson, TupleRef,
};
use qudit_bloch::section::{section_csv, SectionSpec};
use qudit_bloch::{BlochError, OperatorTuple};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "qudit-bloch",
    version,
    about = "Bloch vectors of d-level quantum systems"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Membership and validation tolerance.
    #[arg(long, global = true, default_value_t = TOL_POS)]
    tol: f64,
    /// Seed for the `random` tuple label.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Registry label (`gell-mann`, `random`, `random-<seed>`) or a tuple JSON file.
    #[arg(long, global = true)]
    tuple: Option<String>,
}

#[derive(Args)]
struct Output {
    /// Write here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write an operator tuple as JSON.
    Basis {
        #[arg(long, value_parser = parse_dim)]
        dim: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Write the nonzero structure constants of a tuple.
    Constants {
        #[arg(long, value_parser = parse_dim)]
        dim: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Convert a matrix file to its Bloch vector.
    ToBloch {
        input: PathBuf,
        /// Use the observable map for a traceless Hermitian matrix.
        #[arg(long)]
        observable: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Convert a Bloch-vector file to its matrix.
    FromBloch {
        input: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Report Bloch-body membership of a matrix or Bloch-vector file.
    Check { input: PathBuf },
    /// Integrate an evolution spec and write the trajectory CSV.
    Evolve {
        spec: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Sample a planar section of a Bloch body and write it as CSV.
    Section {
        spec: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Concurrence of a pure bipartite state.
    Concurrence {
        input: PathBuf,
        /// Use `α = 2` for every dimension.
        #[arg(long)]
        fixed_alpha: bool,
    },
    /// Check the tuple axioms of a tuple file, or of `--tuple` at `--dim`.
    Validate {
        input: Option<PathBuf>,
        #[arg(long, value_parser = parse_dim)]
        dim: Option<usize>,
    },
}

fn parse_dim(s: &str) -> std::result::Result<usize, String> {
    let d: usize = s.parse().map_err(|e| format!("{e}"))?;
    if d < 2 {
        return Err(format!("dimension must be >= 2, got {d}"));
    }
    Ok(d)
}

enum Verdict {
    Yes,
    No,
}

fn emit(output: &Output, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_json(output: &Output, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(output, &text)
}

fn read<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    read_json(path).with_context(|| format!("reading {}", path.display()))
}

fn tuple_ref(global: &Global) -> Result<Option<TupleRef>> {
    let Some(value) = &global.tuple else {
        return Ok(None);
    };
    if registry_tuple(value, 2, global.seed).is_ok() {
        return Ok(Some(TupleRef::Label(value.clone())));
    }
    let json: TupleJson = read(Path::new(value))?;
    Ok(Some(TupleRef::Inline(json)))
}

fn tuple(global: &Global, dim: usize) -> Result<OperatorTuple> {
    let reference = tuple_ref(global)?.unwrap_or_else(|| TupleRef::Label(GELL_MANN.into()));
    Ok(reference.resolve(dim, global.seed)?)
}

fn basis(global: &Global, dim: usize, output: &Output) -> Result<Verdict> {
    let t = tuple(global, dim)?;
    emit_json(output, &TupleJson::from_tuple(&t))?;
    Ok(Verdict::Yes)
}

fn constants(global: &Global, dim: usize, output: &Output) -> Result<Verdict> {
    let t = tuple(global, dim)?;
    let sc = structure_constants(&t)?;
    emit_json(
        output,
        &json!({ "dim": dim, "label": t.label(), "constants": constants_to_json(&sc) }),
    )?;
    Ok(Verdict::Yes)
}

fn to_bloch(global: &Global, input: &Path, observable: bool, output: &Output) -> Result<Verdict> {
    let m: MatrixJson = read(input)?;
    let t = tuple(global, m.dim)?;
    let v = if observable {
        observable_to_bloch(&m.to_observable()?, &t)?
    } else {
        state_to_bloch(&m.to_state(global.tol)?, &t)?
    };
    emit_json(output, &v)?;
    Ok(Verdict::Yes)
}

fn from_bloch(global: &Global, input: &Path, output: &Output) -> Result<Verdict> {
    let v: BlochVector = read(input)?;
    let t = tuple(global, v.dim())?;
    let m = match v.role() {
        BlochRole::State => bloch_to_state(&v, &t, global.tol)?.into_matrix(),
        BlochRole::Observable => bloch_to_observable(&v, &t)?.into_matrix(),
        BlochRole::Raw => t.combine(v.coords()),
    };
    emit_json(output, &MatrixJson::from_matrix(&m))?;
    Ok(Verdict::Yes)
}

fn check(global: &Global, input: &Path) -> Result<Verdict> {
    let v = match read::<OperatorOrBloch>(input)? {
        OperatorOrBloch::Bloch(v) => v,
        OperatorOrBloch::Matrix(m) => {
            let t = tuple(global, m.dim)?;
            operator_to_bloch(&m.to_matrix()?, &t, global.tol)?
        }
    };
    let d = v.dim();
    let t = tuple(global, d)?;
    println!("dim: {d}");
    println!("tuple: {}", t.label());
    println!("norm: {}", v.norm());
    if v.role() == BlochRole::Observable {
        let c = observable_membership(&v, &t, global.tol)?;
        println!("operator_norm: {}", c.operator_norm);
        println!("threshold: {}", c.threshold);
        println!("margin: {}", c.margin);
        println!("member: {}", if c.member { "yes" } else { "no" });
        return Ok(if c.member { Verdict::Yes } else { Verdict::No });
    }
    let c = is_state(&v, &t, global.tol)?;
    println!("negative_part_norm: {}", c.negative_part_norm);
    println!("threshold: {}", c.threshold);
    println!("margin: {}", c.margin);
    println!("member: {}", if c.member { "yes" } else { "no" });
    if !c.member {
        println!("verdict: not a state");
        return Ok(Verdict::No);
    }
    println!(
        "pure_condition_threshold: |margin| = {:.3e}",
        c.margin.abs()
    );
    println!(
        "pure_condition_norm: |norm^2 - 1| = {:.3e}",
        (v.norm_sq() - 1.0).abs()
    );
    let pure = is_pure_state(&v, &t, global.tol)?;
    println!("verdict: {}", if pure { "pure" } else { "mixed" });
    Ok(Verdict::Yes)
}

fn evolve(global: &Global, spec: &Path, output: &Output) -> Result<Verdict> {
    let mut spec: EvolutionSpec = read(spec)?;
    if let Some(t) = tuple_ref(global)? {
        spec.tuple = t;
    }
    let trajectory = spec.build(global.seed)?.run()?;
    emit(output, &trajectory.to_csv())?;
    Ok(Verdict::Yes)
}

fn section(global: &Global, spec: &Path, output: &Output) -> Result<Verdict> {
    let mut spec: SectionSpec = read(spec)?;
    if let Some(t) = tuple_ref(global)? {
        spec.tuple = t;
    }
    spec.tol.get_or_insert(global.tol);
    emit(output, &section_csv(&spec.sample(global.seed)?))?;
    Ok(Verdict::Yes)
}

fn concurrence_cmd(global: &Global, input: &Path, fixed_alpha: bool) -> Result<Verdict> {
    let state = read::<BipartiteJson>(input)?.to_state(global.tol)?;
    let norm = if fixed_alpha {
        ConcurrenceNorm::Fixed2
    } else {
        ConcurrenceNorm::Normalized
    };
    let res = concurrence(&state, norm)?;
    println!("concurrence: {}", res.value);
    println!("reduced_norm_1: {}", res.reduced_norms.0);
    println!("reduced_norm_2: {}", res.reduced_norms.1);
    println!("alpha: {}", res.alpha);
    Ok(Verdict::Yes)
}

fn validate(global: &Global, input: Option<&Path>, dim: Option<usize>) -> Result<Verdict> {
    let t = match (input, dim) {
        (Some(path), _) => read::<TupleJson>(path)?.into_tuple_unchecked()?,
        (None, Some(d)) => tuple(global, d)?,
        (None, None) => anyhow::bail!("give a tuple file or --dim"),
    };
    let report = validate_tuple(&t, global.tol.max(qudit_bloch::basis::TOL_ORTH))?;
    println!("{}: {report}", t.label());
    Ok(if report.is_empty() {
        Verdict::Yes
    } else {
        Verdict::No
    })
}

fn run(cli: &Cli) -> Result<Verdict> {
    let g = &cli.global;
    match &cli.command {
        Command::Basis { dim, output } => basis(g, *dim, output),
        Command::Constants { dim, output } => constants(g, *dim, output),
        Command::ToBloch {
            input,
            observable,
            output,
        } => to_bloch(g, input, *observable, output),
        Command::FromBloch { input, output } => from_bloch(g, input, output),
        Command::Check { input } => check(g, input),
        Command::Evolve { spec, output } => evolve(g, spec, output),
        Command::Section { spec, output } => section(g, spec, output),
        Command::Concurrence { input, fixed_alpha } => concurrence_cmd(g, input, *fixed_alpha),
        Command::Validate { input, dim } => validate(g, input.as_deref(), *dim),
    }
}

/// 1 for a well-posed question with a negative answer, 2 for bad input.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<BlochError>() {
        Some(
            BlochError::PurityRequired { .. }
            | BlochError::NotAState { .. }
            | BlochError::MembershipLost { .. },
        ) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Verdict::Yes) => ExitCode::SUCCESS,
        Ok(Verdict::No) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
