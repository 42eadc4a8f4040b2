//! Command-line frontend: argument parsing, report emission, exit codes.
//! Exit code 0 = success, 1 = usage/input error, 2 = a verifier found a
//! counterexample, 3 = budget refusal.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde_json::json;

use crate::classifier::{
    default_e2_shapes, default_e301_shapes, enumerate_sets, verify_bounds, verify_prop_e2,
    verify_prop_e301, verify_thm_e3, BoundsCheck, EnumTask, Filters, VerificationReport,
    DEFAULT_BUDGET,
};
use crate::curves::{
    construct_example_n2, construct_extremal_n400, construct_p2p1_circuit, fit_multidegree_one,
    CircuitKind,
};
use crate::error::{Result, SegreError};
use crate::field::FieldSpec;
use crate::geometry::{PointSet, Shape};
use crate::io::{
    scalars_to_ints, CurveJson, DefectReportJson, PointSetFile, ReportFile, ReportResults,
    VerificationJson,
};
use crate::pgl2::projectively_equivalent;
use crate::segre::{analyze, embed_matrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_COUNTEREXAMPLE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "segre",
    version,
    about = "Exact invariants of finite point sets on Segre varieties"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct OutputOpts {
    /// Write the JSON report to this path (also printed to stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit timestamp and elapsed-time fields for byte-stable output
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the full defect report of a point-set file
    Analyze {
        /// Path to a point-set JSON file
        input: PathBuf,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Print the Segre-embedded coordinate rows of a point-set file
    Embed {
        input: PathBuf,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Fit a multidegree-(1,...,1) rational normal curve through a point set
    FitCurve {
        input: PathBuf,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Enumerate point sets with the given invariants, up to symmetry
    Enumerate {
        /// Multiprojective shape as a comma list, e.g. 1,1,1
        #[arg(long)]
        shape: String,
        /// Prime field modulus
        #[arg(long)]
        field: String,
        /// Number of points per set
        #[arg(long)]
        cardinality: usize,
        /// Keep only nondegenerate sets
        #[arg(long)]
        nondegenerate: bool,
        /// Keep only minimal sets (no two points on a fiber of any eta_i)
        #[arg(long)]
        minimal: bool,
        /// Keep only circuits
        #[arg(long)]
        circuit: bool,
        /// Lower bound on the defect e(S)
        #[arg(long, default_value_t = 0)]
        min_defect: usize,
        /// Upper bound on the defect e(S)
        #[arg(long)]
        max_defect: Option<usize>,
        /// Disable first-point symmetry reduction (full enumeration)
        #[arg(long)]
        no_reduction: bool,
        /// Take only worker i of n, as "i/n" (disjoint task partition)
        #[arg(long)]
        worker: Option<String>,
        /// Refuse tasks whose estimated rank checks exceed this
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Rayon worker threads
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Keep at most this many emitted sets in the report
        #[arg(long)]
        emit_limit: Option<usize>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Run one of the built-in statement verifiers
    Verify {
        /// One of: e2, e3, e301, n3, n4a, n4b, n400
        statement: String,
        /// Comma list of prime moduli for enumeration (default 2,3)
        #[arg(long, default_value = "2,3")]
        fields: String,
        /// Prime modulus for the positive/curve part (e3, e301, n400; default 5)
        #[arg(long, default_value_t = 5)]
        positive_field: u64,
        /// Restrict to these shapes (repeatable comma lists, e.g. --shape 2,1)
        #[arg(long = "shape")]
        shapes: Vec<String>,
        /// Maximum cardinality for bound scans (n3, n4a, n4b)
        #[arg(long, default_value_t = 6)]
        cap: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Build a named example configuration and write it as a point-set file
    Construct {
        /// One of: n2, extremal, p2p1:twisted_cubic, p2p1:conic_line, p2p1:three_lines
        kind: String,
        /// RNG seed (mandatory, for reproducible output)
        #[arg(long)]
        seed: u64,
        /// Prime field modulus
        #[arg(long)]
        field: String,
        /// Multiprojective shape (n2 and extremal kinds)
        #[arg(long)]
        shape: Option<String>,
        /// Target defect e(S) (n2 and extremal kinds)
        #[arg(long, default_value_t = 1)]
        e: usize,
        #[command(flatten)]
        output: OutputOpts,
    },
}

fn parse_shape(s: &str) -> Result<Shape> {
    let dims: std::result::Result<Vec<usize>, _> =
        s.split(',').map(|t| t.trim().parse::<usize>()).collect();
    let dims = dims.map_err(|_| SegreError::Parse(format!("bad shape '{s}'")))?;
    Shape::new(dims)
}

fn parse_field(s: &str) -> Result<FieldSpec> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("q") {
        return Ok(FieldSpec::rational());
    }
    let p: u64 = t
        .parse()
        .map_err(|_| SegreError::Parse(format!("bad field '{s}': expected a prime or 'Q'")))?;
    FieldSpec::prime(p)
}

fn parse_prime_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|t| {
            let p: u64 = t
                .trim()
                .parse()
                .map_err(|_| SegreError::Parse(format!("bad prime '{t}'")))?;
            FieldSpec::prime(p)?;
            Ok(p)
        })
        .collect()
}

fn parse_worker(s: &str) -> Result<(usize, usize)> {
    let err = || SegreError::Parse(format!("bad worker spec '{s}', expected i/n with i < n"));
    let (i, n) = s.split_once('/').ok_or_else(err)?;
    let i: usize = i.trim().parse().map_err(|_| err())?;
    let n: usize = n.trim().parse().map_err(|_| err())?;
    if n == 0 || i >= n {
        return Err(err());
    }
    Ok((i, n))
}

fn configure_jobs(jobs: usize) {
    if jobs > 0 {
        // ignore failure: the global pool can only be built once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
}

fn emit(report: &ReportFile, out: Option<&PathBuf>) -> Result<()> {
    let text = report.to_json();
    print!("{text}");
    if let Some(path) = out {
        std::fs::write(path, text)?;
    }
    Ok(())
}

fn load_input(path: &PathBuf) -> Result<PointSet> {
    PointSetFile::load(path)
}

fn cmd_analyze(input: &PathBuf, output: &OutputOpts) -> Result<()> {
    let s = load_input(input)?;
    let rep = analyze(&s)?;
    let inputs = json!({
        "command": "analyze",
        "input": PointSetFile::from_point_set(&s)?,
    });
    let report = ReportFile::new(
        inputs,
        ReportResults::Analyze { report: DefectReportJson::from_report(&rep)? },
        !output.no_timestamp,
    );
    emit(&report, output.out.as_ref())
}

fn cmd_embed(input: &PathBuf, output: &OutputOpts) -> Result<()> {
    let s = load_input(input)?;
    let m = embed_matrix(&s);
    let rows = m
        .rows_iter()
        .map(scalars_to_ints)
        .collect::<Result<Vec<Vec<i64>>>>()?;
    let inputs = json!({
        "command": "embed",
        "input": PointSetFile::from_point_set(&s)?,
    });
    let report = ReportFile::new(inputs, ReportResults::Embed { rows }, !output.no_timestamp);
    emit(&report, output.out.as_ref())
}

fn cmd_fit_curve(input: &PathBuf, output: &OutputOpts) -> Result<()> {
    let s = load_input(input)?;
    let curve = fit_multidegree_one(&s)?;
    // per-factor witnesses: the Moebius map taking the first factor's
    // projection of S to factor i's projection, when one exists
    let k = s.shape().k();
    let first: Vec<_> = s.points().iter().map(|p| p.factor(0).clone()).collect();
    let mut witnesses = Vec::with_capacity(k);
    for i in 0..k {
        let proj_i: Vec<_> = s.points().iter().map(|p| p.factor(i).clone()).collect();
        let w = projectively_equivalent(&first, &proj_i)?;
        witnesses.push(match w {
            Some(m) => {
                let ints = scalars_to_ints(m.entries())?;
                Some(vec![ints[..2].to_vec(), ints[2..].to_vec()])
            }
            None => None,
        });
    }
    let inputs = json!({
        "command": "fit-curve",
        "input": PointSetFile::from_point_set(&s)?,
    });
    let curve_json = match &curve {
        Some(c) => Some(CurveJson::from_curve(c)?),
        None => None,
    };
    let report = ReportFile::new(
        inputs,
        ReportResults::FitCurve { curve: curve_json, equivalence_witnesses: witnesses },
        !output.no_timestamp,
    );
    emit(&report, output.out.as_ref())
}

#[allow(clippy::too_many_arguments)]
fn cmd_enumerate(
    shape: &str,
    field: &str,
    cardinality: usize,
    filters: Filters,
    no_reduction: bool,
    worker: Option<&str>,
    budget: u64,
    emit_limit: Option<usize>,
    output: &OutputOpts,
) -> Result<()> {
    let shape = parse_shape(shape)?;
    let field = parse_field(field)?;
    let mut task = EnumTask::new(shape, field, cardinality, filters);
    task.budget = budget;
    if no_reduction {
        task.reduction = crate::classifier::Reduction::None;
    }
    if let Some(w) = worker {
        task.partition = Some(parse_worker(w)?);
    }
    let outcome = enumerate_sets(&task)?;
    let emitted_count = outcome.emitted.len();
    let keep = emit_limit.unwrap_or(emitted_count).min(emitted_count);
    let emitted = outcome.emitted[..keep]
        .iter()
        .map(|(s, _)| PointSetFile::from_point_set(s))
        .collect::<Result<Vec<_>>>()?;
    let inputs = json!({
        "command": "enumerate",
        "shape": task.shape.dims(),
        "field": crate::io::FieldJson::from_field(&task.field),
        "cardinality": cardinality,
        "filters": {
            "nondegenerate": task.filters.nondegenerate,
            "minimal": task.filters.minimal,
            "circuit": task.filters.circuit,
            "min_defect": task.filters.min_defect,
            "max_defect": task.filters.max_defect,
        },
        "reduction": !no_reduction,
        "worker": worker,
        "budget": budget,
    });
    let report = ReportFile::new(
        inputs,
        ReportResults::Enumerate {
            emitted,
            emitted_count,
            corrected_total: outcome.corrected_total.to_string(),
        },
        !output.no_timestamp,
    );
    emit(&report, output.out.as_ref())
}

fn shapes_or_default(shapes: &[String], default: Vec<Shape>) -> Result<Vec<Shape>> {
    if shapes.is_empty() {
        Ok(default)
    } else {
        shapes.iter().map(|s| parse_shape(s)).collect()
    }
}

fn run_verifier(
    statement: &str,
    fields: &[u64],
    positive_field: u64,
    shapes: &[String],
    cap: usize,
    budget: u64,
) -> Result<VerificationReport> {
    match statement {
        "e2" => {
            let shape_list = shapes_or_default(shapes, default_e2_shapes())?;
            verify_prop_e2(fields, &shape_list, budget)
        }
        "e3" => {
            if !shapes.is_empty() {
                return Err(SegreError::Parse(
                    "e3 uses its fixed shape list; --shape is not accepted".into(),
                ));
            }
            verify_thm_e3(fields, positive_field, budget)
        }
        "e301" => {
            let shape_list = shapes_or_default(shapes, default_e301_shapes())?;
            verify_prop_e301(positive_field, &shape_list, budget)
        }
        "n3" | "n4a" | "n4b" | "n400" => {
            let which: BoundsCheck = statement.parse()?;
            let default: Vec<Shape> = match which {
                BoundsCheck::N3 => {
                    [&[2usize, 1][..], &[3, 1], &[2, 2]].iter().map(|d| Shape::new(d.to_vec())).collect::<Result<_>>()?
                }
                BoundsCheck::N4a | BoundsCheck::N4b => {
                    [&[1usize, 1][..], &[1, 1, 1]].iter().map(|d| Shape::new(d.to_vec())).collect::<Result<_>>()?
                }
                BoundsCheck::N400 => {
                    [&[2usize, 1][..], &[1, 1, 1]].iter().map(|d| Shape::new(d.to_vec())).collect::<Result<_>>()?
                }
            };
            let shape_list = shapes_or_default(shapes, default)?;
            let field_p = match which {
                BoundsCheck::N3 => *fields.first().unwrap_or(&2),
                BoundsCheck::N4a | BoundsCheck::N4b => *fields.first().unwrap_or(&3),
                BoundsCheck::N400 => positive_field,
            };
            verify_bounds(which, field_p, &shape_list, cap, budget)
        }
        other => Err(SegreError::Parse(format!(
            "unknown statement id '{other}'; expected one of e2, e3, e301, n3, n4a, n4b, n400"
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    statement: &str,
    fields: &str,
    positive_field: u64,
    shapes: &[String],
    cap: usize,
    budget: u64,
    output: &OutputOpts,
) -> Result<bool> {
    let fields = parse_prime_list(fields)?;
    FieldSpec::prime(positive_field)?;
    let rep = run_verifier(statement, &fields, positive_field, shapes, cap, budget)?;
    let success = rep.success();
    let inputs = json!({
        "command": "verify",
        "statement": statement,
        "fields": fields,
        "positive_field": positive_field,
        "shapes": shapes,
        "cap": cap,
        "budget": budget,
    });
    let report = ReportFile::new(
        inputs,
        ReportResults::Verify {
            report: VerificationJson::from_report(&rep, !output.no_timestamp)?,
        },
        !output.no_timestamp,
    );
    emit(&report, output.out.as_ref())?;
    Ok(success)
}

fn cmd_construct(
    kind: &str,
    seed: u64,
    field: &str,
    shape: Option<&str>,
    e: usize,
    output: &OutputOpts,
) -> Result<()> {
    let field = parse_field(field)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let need_shape = || -> Result<Shape> {
        let s = shape.ok_or_else(|| {
            SegreError::Parse(format!("construct {kind} requires --shape"))
        })?;
        parse_shape(s)
    };
    let s = match kind {
        "n2" => construct_example_n2(&need_shape()?, &field, e, &mut rng)?,
        "extremal" => construct_extremal_n400(&need_shape()?, &field, e, &mut rng)?,
        _ => match kind.strip_prefix("p2p1:") {
            Some(sub) => {
                let ck: CircuitKind = sub.parse()?;
                construct_p2p1_circuit(&field, ck, &mut rng)?
            }
            None => {
                return Err(SegreError::Parse(format!(
                    "unknown construct kind '{kind}'; expected n2, extremal, \
                     p2p1:twisted_cubic, p2p1:conic_line or p2p1:three_lines"
                )))
            }
        },
    };
    // each constructor asserts its own contract; re-analyze so the report
    // the user sees is the re-read invariants, not the builder's word
    let rep = analyze(&s)?;
    let inputs = json!({
        "command": "construct",
        "kind": kind,
        "seed": seed,
        "field": crate::io::FieldJson::from_field(&field),
        "shape": shape,
        "e": e,
    });
    let report = ReportFile::new(
        inputs,
        ReportResults::Construct {
            point_set: PointSetFile::from_point_set(&s)?,
            report: DefectReportJson::from_report(&rep)?,
        },
        !output.no_timestamp,
    );
    emit(&report, output.out.as_ref())
}

fn dispatch(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Analyze { input, output } => cmd_analyze(input, output).map(|_| true),
        Command::Embed { input, output } => cmd_embed(input, output).map(|_| true),
        Command::FitCurve { input, output } => cmd_fit_curve(input, output).map(|_| true),
        Command::Enumerate {
            shape,
            field,
            cardinality,
            nondegenerate,
            minimal,
            circuit,
            min_defect,
            max_defect,
            no_reduction,
            worker,
            budget,
            jobs,
            emit_limit,
            output,
        } => {
            configure_jobs(*jobs);
            let filters = Filters {
                nondegenerate: *nondegenerate,
                minimal: *minimal,
                circuit: *circuit,
                min_defect: *min_defect,
                max_defect: *max_defect,
            };
            cmd_enumerate(
                shape,
                field,
                *cardinality,
                filters,
                *no_reduction,
                worker.as_deref(),
                *budget,
                *emit_limit,
                output,
            )
            .map(|_| true)
        }
        Command::Verify {
            statement,
            fields,
            positive_field,
            shapes,
            cap,
            budget,
            jobs,
            output,
        } => {
            configure_jobs(*jobs);
            cmd_verify(statement, fields, *positive_field, shapes, *cap, *budget, output)
        }
        Command::Construct { kind, seed, field, shape, e, output } => {
            cmd_construct(kind, *seed, field, shape.as_deref(), *e, output).map(|_| true)
        }
    }
}

/// Parse args, run, and translate the outcome into the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with exit code 0
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_COUNTEREXAMPLE,
        Err(SegreError::BudgetExceeded { estimate, budget }) => {
            eprintln!(
                "refused: task needs about {estimate} rank checks, budget is {budget} \
                 (raise --budget to proceed)"
            );
            EXIT_BUDGET
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
