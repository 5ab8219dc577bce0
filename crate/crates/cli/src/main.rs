//! Command-line front end: loads structure files, runs the checks, frames,
//! torsion computations, decompositions, generators and the integrability
//! search from `hermlie-core`, and emits deterministic reports.
//!
//! Exit codes: 0 = every check passed, 1 = a mathematical check failed,
//! 2 = input or usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use hermlie_core::error::{Error, Result};
use hermlie_core::frames::ComplexFrame;
use hermlie_core::generators::{
    build_flat, build_kaehler_flat, random_flat_spec, random_kaehler_flat_spec, FlatSpec,
    KahlerFlatSpec,
};
use hermlie_core::hermitian::{
    admissible_frame, chern_connection_torsion, chern_torsion, decompose, j_adapted_family,
    kaehler_defect, proof_suite, two_step_constraint_defect, unitary_frame,
};
use hermlie_core::io::{load_structure, scalar_json, structure_to_json};
use hermlie_core::lie::{
    compatibility_defect, integrability_defect, AlmostComplexStructure, LieAlgebra, MetricTensor,
};
use hermlie_core::mat::ZeroTest;
use hermlie_core::riemannian::{flatness_defect, milnor_decompose, milnor_verify};
use hermlie_core::scalar::Scalar;
use hermlie_core::search::{search_integrable, SearchConfig};
use hermlie_core::subspace::Subspace;
use hermlie_core::ArithmeticPolicy;

#[derive(Parser)]
#[command(
    name = "hermlie",
    about = "Invariants of metric Lie algebras with compatible complex structures: \
             curvature, Chern torsion, canonical decompositions, generators, and a \
             randomized integrability search",
    version
)]
struct Cli {
    /// Emit the report as JSON instead of plain text.
    #[arg(long, global = true)]
    json: bool,

    /// Tolerance for float-mode zero tests.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tolerance: f64,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Refuse to degrade to floating point: fail instead when a step leaves
    /// exact arithmetic.
    #[arg(long, global = true)]
    exact: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify properties of a structure file: flatness, the Kähler
    /// condition, or the two-step constraint identities.
    Check(CheckArgs),
    /// Build a complex frame and print its structure constants C, D and the
    /// frame Gram matrix.
    Frame(FrameArgs),
    /// Compute the Chern torsion through both available routes and report
    /// their agreement.
    Torsion(TorsionArgs),
    /// Decompose a flat metric into rotation-block form (and, when a complex
    /// structure is present, report its block dimensions).
    Decompose(DecomposeArgs),
    /// Generate a flat or Kähler-flat structure file from a rate matrix.
    Generate(GenerateArgs),
    /// Randomized search for integrable compatible complex structures.
    Search(SearchArgs),
    /// Evaluate every identity used in the flat-implies-Kähler argument.
    ProofSuite(ProofSuiteArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("what").required(true).multiple(true).args(["flat", "kahler", "lemma2"])))]
struct CheckArgs {
    /// Structure file to check.
    file: PathBuf,
    /// Check that the metric is flat.
    #[arg(long)]
    flat: bool,
    /// Check integrability, compatibility and vanishing Chern torsion.
    #[arg(long)]
    kahler: bool,
    /// Check the two-step solvable structure-constant identities.
    #[arg(long)]
    lemma2: bool,
}

#[derive(Args)]
struct FrameArgs {
    /// Structure file (must contain a complex structure).
    file: PathBuf,
    /// Real basis indices whose J-invariant span seeds the frame; the whole
    /// space when omitted.
    #[arg(long, value_delimiter = ',')]
    vectors: Option<Vec<usize>>,
}

#[derive(Args)]
struct TorsionArgs {
    /// Structure file (must contain a complex structure).
    file: PathBuf,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Structure file.
    file: PathBuf,
}

#[derive(Args)]
#[command(group(ArgGroup::new("family").required(true).args(["flat", "kahler_flat"])))]
#[command(group(ArgGroup::new("source").required(true).args(["spec", "rates", "random"])))]
struct GenerateArgs {
    /// Generate a flat structure (no complex structure).
    #[arg(long)]
    flat: bool,
    /// Generate a Kähler-flat structure (metric + complex structure).
    #[arg(long = "kahler-flat")]
    kahler_flat: bool,
    /// JSON spec file ({"f": rows, "dim_z": n} or {"f": rows, "q":…, "m":…, "t":…}).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Inline rate matrix, rows separated by ';', entries by ',' (e.g. "1,0;0,2").
    #[arg(long)]
    rates: Option<String>,
    /// Central dimension for --flat with inline --rates.
    #[arg(long, default_value_t = 0)]
    dim_z: usize,
    /// Invariant complex pairs in the complement (--kahler-flat with --rates).
    #[arg(long, default_value_t = 0)]
    pairs: usize,
    /// Complement directions paired with central ones (--kahler-flat with --rates).
    #[arg(long, default_value_t = 0)]
    singles: usize,
    /// Invariant complex pairs in the center (--kahler-flat with --rates).
    #[arg(long, default_value_t = 0)]
    central_pairs: usize,
    /// Draw a random valid spec instead of providing one.
    #[arg(long)]
    random: bool,
    /// Ambient dimension cap for --random.
    #[arg(long, default_value_t = 12)]
    max_dim: usize,
    /// Write the structure file here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    /// Structure file (a complex structure in the file is ignored; the
    /// search draws its own candidates).
    file: PathBuf,
    /// Number of descent runs.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Iteration cap per run.
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    /// Integrability threshold for counting a run as converged.
    #[arg(long, default_value_t = 1e-10)]
    threshold: f64,
    /// Chern-torsion threshold separating Kähler from non-Kähler finds.
    #[arg(long, default_value_t = 1e-8)]
    torsion_threshold: f64,
}

#[derive(Args)]
struct ProofSuiteArgs {
    /// Structure file (must contain a complex structure and a flat metric).
    file: PathBuf,
}

/// One check line of a report.
#[derive(Serialize, Clone)]
struct Record {
    name: String,
    mode: &'static str,
    defect: f64,
    threshold: f64,
    verdict: &'static str,
}

/// The full report. JSON output is byte-identical across runs with the same
/// input and flags, except for `wall_time_ms`.
#[derive(Serialize)]
struct Report {
    command: String,
    records: Vec<Record>,
    summary: String,
    wall_time_ms: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    payload: Option<Value>,
}

fn record(name: &str, exact: bool, defect: f64, tol: f64) -> Record {
    let (verdict, threshold) = if exact {
        (if defect == 0.0 { "PASS" } else { "FAIL" }, 0.0)
    } else {
        (if defect < tol { "PASS" } else { "FAIL" }, tol)
    };
    Record {
        name: name.to_string(),
        mode: if exact { "exact" } else { "float" },
        defect,
        threshold,
        verdict,
    }
}

struct Ctx {
    json: bool,
    tolerance: f64,
    seed: u64,
    exact: bool,
    started: Instant,
}

impl Ctx {
    fn policy(&self) -> ArithmeticPolicy {
        if self.exact {
            ArithmeticPolicy::RequireExact
        } else {
            ArithmeticPolicy::Auto
        }
    }

    fn frame_zt(&self) -> ZeroTest {
        if self.exact {
            ZeroTest::Exact
        } else {
            ZeroTest::Tol(self.tolerance)
        }
    }

    fn finish(&self, command: &str, records: Vec<Record>, summary: Option<String>, payload: Option<Value>, extra_text: &[String]) -> u8 {
        let all_pass = records.iter().all(|r| r.verdict == "PASS");
        let summary = summary.unwrap_or_else(|| if all_pass { "PASS".into() } else { "FAIL".into() });
        let report = Report {
            command: command.to_string(),
            records,
            summary,
            wall_time_ms: self.started.elapsed().as_millis(),
            payload,
        };
        if self.json {
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        } else {
            println!("COMMAND {}", report.command);
            for r in &report.records {
                println!(
                    "  {:28} {:5}  defect {:>12.3e}  threshold {:>12.3e}  {}",
                    r.name, r.mode, r.defect, r.threshold, r.verdict
                );
            }
            for line in extra_text {
                println!("{line}");
            }
            println!("SUMMARY {}", report.summary);
        }
        if all_pass {
            0
        } else {
            1
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        json: cli.json,
        tolerance: cli.tolerance,
        seed: cli.seed,
        exact: cli.exact,
        started: Instant::now(),
    };
    match run(&ctx, &cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e))
        }
    }
}

/// Operational problems (bad files, invalid specs, impossible requests) are
/// exit 2; mathematical verdicts about well-formed input are exit 1.
fn error_exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_)
        | Error::Io(_)
        | Error::InvalidInput(_)
        | Error::SpecInvalid(_)
        | Error::DimensionMismatch(_)
        | Error::ExactnessLost(_) => 2,
        _ => 1,
    }
}

fn run(ctx: &Ctx, command: &Command) -> Result<u8> {
    match command {
        Command::Check(args) => run_check(ctx, args),
        Command::Frame(args) => run_frame(ctx, args),
        Command::Torsion(args) => run_torsion(ctx, args),
        Command::Decompose(args) => run_decompose(ctx, args),
        Command::Generate(args) => run_generate(ctx, args),
        Command::Search(args) => run_search(ctx, args),
        Command::ProofSuite(args) => run_proof_suite(ctx, args),
    }
}

fn load(path: &Path) -> Result<(LieAlgebra, MetricTensor, Option<AlmostComplexStructure>)> {
    load_structure(path, true)
}

fn require_j(
    j: Option<AlmostComplexStructure>,
    path: &Path,
) -> Result<AlmostComplexStructure> {
    j.ok_or_else(|| {
        Error::InvalidInput(format!(
            "{} carries no complex structure (missing \"j\" field)",
            path.display()
        ))
    })
}

fn run_check(ctx: &Ctx, args: &CheckArgs) -> Result<u8> {
    let (alg, g, j) = load(&args.file)?;
    let data_exact = alg.is_exact() && g.is_exact();
    let mut records = Vec::new();

    if args.flat {
        records.push(record(
            "flatness",
            data_exact,
            flatness_defect(&alg, &g),
            ctx.tolerance,
        ));
    }

    if args.kahler {
        let j = require_j(j.clone(), &args.file)?;
        let exact_in = data_exact && j.is_exact();
        match j.validate(ctx.frame_zt()) {
            Ok(()) => {
                let int_defect = integrability_defect(&alg, &j, ctx.frame_zt())?;
                records.push(record("integrability", exact_in, int_defect, ctx.tolerance));
                records.push(record(
                    "compatibility",
                    exact_in,
                    compatibility_defect(&g, &j),
                    ctx.tolerance,
                ));
                let gates_pass = records
                    .iter()
                    .rev()
                    .take(2)
                    .all(|r| r.verdict == "PASS");
                if gates_pass {
                    let frame = unitary_frame(&alg, &g, &j, ctx.policy(), ctx.frame_zt())?;
                    records.push(record(
                        "torsion",
                        frame.is_exact(),
                        kaehler_defect(&frame),
                        ctx.tolerance,
                    ));
                }
            }
            Err(Error::NotComplexStructure { defect }) => {
                records.push(record("complex-structure", exact_in, defect, ctx.tolerance));
            }
            Err(e) => return Err(e),
        }
    }

    if args.lemma2 {
        let j = require_j(j, &args.file)?;
        if !alg.is_two_step_solvable(ZeroTest::Tol(ctx.tolerance)) {
            return Err(Error::NotTwoStepSolvable);
        }
        let (frame, layout) = admissible_frame(&alg, &g, &j, ctx.policy(), ctx.frame_zt())?;
        records.push(record(
            "two-step-constraints",
            frame.is_exact(),
            two_step_constraint_defect(&frame, &layout),
            ctx.tolerance,
        ));
    }

    Ok(ctx.finish("check", records, None, None, &[]))
}

fn complex_entry_text(v: &hermlie_core::ComplexScalar) -> String {
    format!("{v}")
}

fn frame_tables_json(frame: &ComplexFrame) -> Value {
    let n = frame.cdim;
    let mut c_entries = Vec::new();
    let mut d_entries = Vec::new();
    for jj in 0..n {
        for i in 0..n {
            for k in 0..n {
                let c = frame.c_at(jj, i, k);
                if c.abs_f64() != 0.0 {
                    c_entries.push(json!([jj, i, k, scalar_json(&c.re), scalar_json(&c.im)]));
                }
                let d = frame.d_at(jj, i, k);
                if d.abs_f64() != 0.0 {
                    d_entries.push(json!([jj, i, k, scalar_json(&d.re), scalar_json(&d.im)]));
                }
            }
        }
    }
    let gmat: Vec<Vec<Value>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let v = &frame.gmat[(i, k)];
                    json!([scalar_json(&v.re), scalar_json(&v.im)])
                })
                .collect()
        })
        .collect();
    json!({"c": c_entries, "d": d_entries, "gram": gmat})
}

fn frame_tables_text(frame: &ComplexFrame, lines: &mut Vec<String>) {
    let n = frame.cdim;
    lines.push("holomorphic structure constants C[j][i][k]:".into());
    for jj in 0..n {
        for i in 0..n {
            for k in 0..n {
                let v = frame.c_at(jj, i, k);
                if v.abs_f64() != 0.0 {
                    lines.push(format!("  C[{jj}][{i}][{k}] = {}", complex_entry_text(v)));
                }
            }
        }
    }
    lines.push("mixed structure constants D[j][i][k]:".into());
    for jj in 0..n {
        for i in 0..n {
            for k in 0..n {
                let v = frame.d_at(jj, i, k);
                if v.abs_f64() != 0.0 {
                    lines.push(format!("  D[{jj}][{i}][{k}] = {}", complex_entry_text(v)));
                }
            }
        }
    }
    lines.push("frame Gram matrix:".into());
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|k| complex_entry_text(&frame.gmat[(i, k)]))
            .collect();
        lines.push(format!("  [{}]", row.join(", ")));
    }
}

fn run_frame(ctx: &Ctx, args: &FrameArgs) -> Result<u8> {
    let (alg, g, j) = load(&args.file)?;
    let j = require_j(j, &args.file)?;
    let space = match &args.vectors {
        None => Subspace::full(alg.dim),
        Some(indices) => {
            let mut vecs = Vec::new();
            for &i in indices {
                if i >= alg.dim {
                    return Err(Error::InvalidInput(format!(
                        "--vectors index {i} exceeds dimension {}",
                        alg.dim
                    )));
                }
                let e = hermlie_core::lie::basis_vector(alg.dim, i);
                vecs.push(j.apply(&e));
                vecs.push(e);
            }
            Subspace::from_spanning(alg.dim, &vecs, ctx.frame_zt())
        }
    };
    let vectors = j_adapted_family(&space, &g, &j, ctx.policy(), ctx.frame_zt())?;
    let frame = match ComplexFrame::from_vectors(&alg, &g, &j, &vectors, ctx.frame_zt()) {
        Ok(frame) => frame,
        Err(Error::NotIntegrable { defect }) => {
            let records = vec![record("integrability", false, defect, ctx.tolerance)];
            return Ok(ctx.finish("frame", records, None, None, &[]));
        }
        Err(e) => return Err(e),
    };
    let exact = frame.is_exact();
    let (b1, b2, b3) = frame.bianchi_defect();
    let records = vec![
        record("reconstruction", exact, frame.reconstruction_defect, ctx.tolerance),
        record(
            "bracket-expansion",
            exact,
            frame.structure_equation_defect(&alg)?,
            ctx.tolerance,
        ),
        record("bracket-identity-ccc", exact, b1, ctx.tolerance),
        record("bracket-identity-cdd", exact, b2, ctx.tolerance),
        record("bracket-identity-mixed", exact, b3, ctx.tolerance),
    ];
    let mut lines = Vec::new();
    frame_tables_text(&frame, &mut lines);
    let payload = frame_tables_json(&frame);
    Ok(ctx.finish("frame", records, None, Some(payload), &lines))
}

fn run_torsion(ctx: &Ctx, args: &TorsionArgs) -> Result<u8> {
    let (alg, g, j) = load(&args.file)?;
    let j = require_j(j, &args.file)?;
    let frame = unitary_frame(&alg, &g, &j, ctx.policy(), ctx.frame_zt())?;
    let exact = frame.is_exact();
    let closed = chern_torsion(&frame);
    let (solved, consistency) = chern_connection_torsion(&frame, ctx.frame_zt())?;
    let route_diff = closed.max_diff(&solved);
    let records = vec![
        record("route-agreement", exact, route_diff, 1e-12f64.max(ctx.tolerance * 0.01)),
        record("connection-compatibility", exact, consistency, ctx.tolerance),
    ];
    let n = frame.cdim;
    let mut components = Vec::new();
    let mut lines = vec![format!("torsion max-norm {:.6e}", closed.max_abs())];
    for jj in 0..n {
        for i in 0..n {
            for k in (i + 1)..n {
                let v = closed.at(jj, i, k);
                if v.abs_f64() != 0.0 {
                    components.push(json!([jj, i, k, scalar_json(&v.re), scalar_json(&v.im)]));
                    lines.push(format!("  T[{jj}][{i}][{k}] = {}", complex_entry_text(v)));
                }
            }
        }
    }
    let payload = json!({
        "max_abs": closed.max_abs(),
        "components": components,
    });
    Ok(ctx.finish("torsion", records, None, Some(payload), &lines))
}

fn run_decompose(ctx: &Ctx, args: &DecomposeArgs) -> Result<u8> {
    let (alg, g, j) = load(&args.file)?;
    let mut records = Vec::new();
    let mut lines = Vec::new();
    let mut payload = serde_json::Map::new();

    match milnor_decompose(&alg, &g, ctx.policy(), ctx.frame_zt(), ctx.seed) {
        Ok(fs) => {
            let verify = milnor_verify(&alg, &g, &fs, ctx.frame_zt())?;
            let exact = fs.is_exact() && alg.is_exact() && g.is_exact();
            for clause in &verify.clauses {
                records.push(record(clause.name, exact, clause.defect, ctx.tolerance));
            }
            payload.insert(
                "rotation_form".into(),
                hermlie_core::io::flat_structure_to_json(&fs),
            );
            lines.push(format!(
                "rotation blocks: {} plane(s), complement dim {}, central dim {}",
                fs.eps_pairs.len(),
                fs.h_basis.len(),
                fs.z_basis.len()
            ));
            for (i, row) in fs.f.iter().enumerate() {
                let rates: Vec<String> = row.iter().map(|r| format!("{r}")).collect();
                lines.push(format!("  rates[{i}] = [{}]", rates.join(", ")));
            }
        }
        Err(Error::NotFlat { defect }) => {
            records.push(record(
                "flatness",
                alg.is_exact() && g.is_exact(),
                defect,
                ctx.tolerance,
            ));
        }
        Err(e) => return Err(e),
    }

    if let Some(j) = j {
        let dec = decompose(&alg, &g, &j, ctx.frame_zt())?;
        let (no_core, invariant_derived, no_w) = dec.pure_types();
        payload.insert(
            "complex_blocks".into(),
            json!({
                "r": dec.r,
                "s": dec.s,
                "n": dec.n,
                "derived_invariant_dim": dec.gprime_j.dim(),
                "middle_real_dim": dec.u.dim(),
                "w_dim": dec.w.dim(),
                "pure_type_i": no_core,
                "pure_type_ii": invariant_derived,
                "pure_type_iii": no_w,
            }),
        );
        lines.push(format!(
            "complex blocks: r={} s={} n={} (derived∩J-derived dim {}, middle dim {}, outer dim {})",
            dec.r,
            dec.s,
            dec.n,
            dec.gprime_j.dim(),
            dec.u.dim(),
            dec.w.dim()
        ));
    }

    Ok(ctx.finish(
        "decompose",
        records,
        None,
        Some(Value::Object(payload)),
        &lines,
    ))
}

fn parse_rate_matrix(text: &str) -> Result<Vec<Vec<Scalar>>> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|cell| Scalar::parse_exact(cell.trim()))
                .collect()
        })
        .collect()
}

fn spec_field_usize(v: &Value, field: &str) -> Result<usize> {
    match v.get(field) {
        None => Ok(0),
        Some(Value::Number(n)) => n
            .as_u64()
            .map(|x| x as usize)
            .ok_or_else(|| Error::SpecInvalid(format!("field \"{field}\" must be a nonnegative integer"))),
        Some(_) => Err(Error::SpecInvalid(format!(
            "field \"{field}\" must be a nonnegative integer"
        ))),
    }
}

fn spec_rates(v: &Value) -> Result<Vec<Vec<Scalar>>> {
    let rows = v
        .get("f")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::SpecInvalid("spec needs a matrix field \"f\"".into()))?;
    rows.iter()
        .map(|row| {
            let cells = row
                .as_array()
                .ok_or_else(|| Error::SpecInvalid("rows of \"f\" must be arrays".into()))?;
            cells
                .iter()
                .map(|cell| match cell {
                    Value::String(s) => Scalar::parse_exact(s),
                    Value::Number(n) => Scalar::parse_exact(&n.to_string()),
                    _ => Err(Error::SpecInvalid("rate entries must be numbers or strings".into())),
                })
                .collect()
        })
        .collect()
}

fn run_generate(ctx: &Ctx, args: &GenerateArgs) -> Result<u8> {
    use rand::SeedableRng;
    let doc = if args.flat {
        let spec = if args.random {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(ctx.seed);
            random_flat_spec(&mut rng, args.max_dim)
        } else if let Some(path) = &args.spec {
            let text = std::fs::read_to_string(path)?;
            let v: Value =
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("invalid spec JSON: {e}")))?;
            let f = spec_rates(&v)?;
            FlatSpec {
                p: f.len(),
                dim_h: f.first().map_or(0, Vec::len),
                dim_z: spec_field_usize(&v, "dim_z")?,
                f,
            }
        } else {
            let f = parse_rate_matrix(args.rates.as_ref().expect("clap guarantees a source"))?;
            FlatSpec {
                p: f.len(),
                dim_h: f.first().map_or(0, Vec::len),
                dim_z: args.dim_z,
                f,
            }
        };
        let (alg, g, fs) = build_flat(&spec)?;
        let mut doc = structure_to_json(&alg, &g, None);
        doc["flat_structure"] = hermlie_core::io::flat_structure_to_json(&fs);
        doc
    } else {
        let spec = if args.random {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(ctx.seed);
            random_kaehler_flat_spec(&mut rng, args.max_dim)
        } else if let Some(path) = &args.spec {
            let text = std::fs::read_to_string(path)?;
            let v: Value =
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("invalid spec JSON: {e}")))?;
            let f = spec_rates(&v)?;
            KahlerFlatSpec {
                p: f.len(),
                q: spec_field_usize(&v, "q")?,
                m: spec_field_usize(&v, "m")?,
                t: spec_field_usize(&v, "t")?,
                f,
            }
        } else {
            let f = parse_rate_matrix(args.rates.as_ref().expect("clap guarantees a source"))?;
            KahlerFlatSpec {
                p: f.len(),
                q: args.pairs,
                m: args.singles,
                t: args.central_pairs,
                f,
            }
        };
        let (alg, g, j, fs) = build_kaehler_flat(&spec)?;
        let mut doc = structure_to_json(&alg, &g, Some(&j));
        doc["flat_structure"] = hermlie_core::io::flat_structure_to_json(&fs);
        doc
    };
    let text = serde_json::to_string_pretty(&doc).expect("structure serializes");
    match &args.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(0)
}

fn run_search(ctx: &Ctx, args: &SearchArgs) -> Result<u8> {
    let (alg, g, _) = load(&args.file)?;
    let config = SearchConfig {
        samples: args.samples,
        max_iters: args.max_iters,
        step: 0.1,
        integrability_threshold: args.threshold,
        torsion_threshold: args.torsion_threshold,
        seed: ctx.seed,
    };
    let report = search_integrable(&alg, &g, &config)?;
    let mut records = Vec::new();
    let mut lines = Vec::new();
    let mut outcomes = Vec::new();
    for o in &report.outcomes {
        records.push(Record {
            name: format!("sample-{}", o.index),
            mode: "float",
            defect: o.defect,
            threshold: args.threshold,
            verdict: if o.converged { "PASS" } else { "FAIL" },
        });
        let torsion_text = o
            .torsion
            .map(|t| format!(" torsion {t:.3e}"))
            .unwrap_or_default();
        lines.push(format!(
            "sample {:>3} {} defect {:.3e} iterations {}{}",
            o.index,
            if o.converged { "converged" } else { "stalled  " },
            o.defect,
            o.iterations,
            torsion_text
        ));
        outcomes.push(json!({
            "index": o.index,
            "converged": o.converged,
            "defect": o.defect,
            "iterations": o.iterations,
            "torsion": o.torsion,
        }));
    }
    let summary = format!(
        "integrable={} non_kahler_integrable={}",
        report.integrable, report.non_kahler_integrable
    );
    let payload = json!({
        "integrable": report.integrable,
        "non_kahler_integrable": report.non_kahler_integrable,
        "outcomes": outcomes,
    });
    // The search reports observations, not verdicts: finding no integrable
    // structure (or a non-Kähler one) is a result, not a failure.
    ctx.finish("search", records, Some(summary), Some(payload), &lines);
    Ok(0)
}

fn run_proof_suite(ctx: &Ctx, args: &ProofSuiteArgs) -> Result<u8> {
    let (alg, g, j) = load(&args.file)?;
    let j = require_j(j, &args.file)?;
    let frame_exact = admissible_frame(&alg, &g, &j, ctx.policy(), ctx.frame_zt())
        .map(|(frame, _)| frame.is_exact())
        .unwrap_or(false);
    match proof_suite(&alg, &g, &j, ctx.policy(), ctx.frame_zt()) {
        Ok(rows) => {
            let mut records = Vec::new();
            let mut lines = Vec::new();
            for row in &rows {
                records.push(record(row.name, frame_exact, row.defect, ctx.tolerance));
                if row.vacuous {
                    lines.push(format!("  note: {} is vacuous on this input", row.name));
                }
            }
            Ok(ctx.finish("proof-suite", records, None, None, &lines))
        }
        Err(Error::NotFlat { defect }) => {
            let records = vec![record(
                "flatness",
                alg.is_exact() && g.is_exact(),
                defect,
                ctx.tolerance,
            )];
            Ok(ctx.finish("proof-suite", records, None, None, &[]))
        }
        Err(e) => Err(e),
    }
}
