//! Batch front end for the `tentfarey` library.
//!
//! Every subcommand produces the same flat row table
//! (`theorem,r,alpha,beta,x,n,backend,value,target,normalized`) rendered
//! as CSV or JSON, written to standard output or to a file:
//!
//! * `map` — forward orbits and invariant-density values of the family;
//! * `cf` — entries and convergents of a continued-fraction expansion;
//! * `tail` — the tail series of a power singularity, exact at the slow
//!   endpoint and floating elsewhere;
//! * `iterate` — transfer-operator iterates of an observable on a depth
//!   schedule;
//! * `renewal` — first-return weights, cell measures, and variation norms;
//! * `experiment` — a full batch driver configured from a JSON file.
//!
//! Identical invocations produce byte-identical tables.  Exit status is
//! `0` on success, `2` for input errors, and `3` when a request exceeds an
//! exact-arithmetic capacity limit.

#![forbid(unsafe_code)]

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use tentfarey::cf::{parse_exact_value, ContinuedFraction, ConvergentTable};
use tentfarey::experiments::{self, ExperimentConfig, Schedule};
use tentfarey::num_util::log_abs_bigint;
use tentfarey::observable::ExtendedReal;
use tentfarey::series::{to_csv, to_json, SeriesRow};
use tentfarey::tail::FareyTailSweep;
use tentfarey::{map, renewal, tail, Error, Result};

/// Batch tables for the interpolated tent–Farey family.
#[derive(Parser)]
#[command(name = "tentfarey", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward orbits and the invariant density along them.
    Map(MapArgs),
    /// Entries and convergents of a continued-fraction expansion.
    Cf(CfArgs),
    /// Tail series of a power singularity along its coding cylinders.
    Tail(TailArgs),
    /// Transfer-operator iterates of an observable on a depth schedule.
    Iterate(IterateArgs),
    /// First-return weights, cell measures, and variation norms.
    Renewal(RenewalArgs),
    /// Run a batch driver described by a JSON configuration file.
    Experiment(ExperimentArgs),
}

/// Output encoding.
#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    /// Comma-separated rows under the fixed header.
    Csv,
    /// A JSON array of row objects mirroring the CSV schema.
    Json,
}

#[derive(Args)]
struct Output {
    /// Output encoding (default csv; a configuration file's choice is
    /// overridden when the flag is given).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Destination file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MapArgs {
    /// Map parameter in [0, 1].
    #[arg(long, default_value_t = map::R_FAREY)]
    r: f64,
    /// Starting points, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.6, 0.9])]
    x: Vec<f64>,
    /// Orbit length per starting point.
    #[arg(long, default_value_t = 8)]
    steps: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CfArgs {
    /// Expansion: a point (`2/3`, `0.375`, `sqrt2-1`), bracketed entries
    /// (`[0;1,2,periodic:3]`), or a named entry rule.
    #[arg(long)]
    value: String,
    /// Number of leading entries to tabulate.
    #[arg(long, default_value_t = 16)]
    entries: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TailArgs {
    /// Map parameter in [0, 1].
    #[arg(long, default_value_t = map::R_FAREY)]
    r: f64,
    /// Singularity location: a point, or any expansion at r = 1.
    #[arg(long)]
    beta: String,
    /// Singularity exponent in (0, 1).
    #[arg(long)]
    alpha: f64,
    /// Observation point.
    #[arg(long, default_value = "3/10")]
    x: String,
    /// Depth schedule: `a..b`, `a..b:step`, `dyadic:a..b`, or an explicit
    /// comma-separated list; defaults per parameter regime.
    #[arg(long)]
    schedule: Option<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct IterateArgs {
    /// Map parameter in [0, 1].
    #[arg(long, default_value_t = map::R_FAREY)]
    r: f64,
    /// Singularity exponent for the default power observable.
    #[arg(long)]
    alpha: Option<f64>,
    /// Singularity location: a point or an expansion.
    #[arg(long)]
    beta: Option<String>,
    /// Observable override: `power:beta=…,alpha=…`, `indicator:[a,b]`,
    /// `linear:…`, or `const:c`.
    #[arg(long)]
    observable: Option<String>,
    /// Evaluation points, comma separated; defaults per regime.
    #[arg(long, value_delimiter = ',')]
    points: Vec<f64>,
    /// Depth schedule, as for `tail`.
    #[arg(long)]
    schedule: Option<String>,
    /// Evaluation backend: `tree`, `grid`, `grid:N`, or `auto`.
    #[arg(long)]
    backend: Option<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct RenewalArgs {
    /// Largest return index tabulated.
    #[arg(long, default_value_t = 20)]
    max_k: u64,
    /// Optional point where the return weights are evaluated.
    #[arg(long)]
    x: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[command(flatten)]
    output: Output,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(command: &Command) -> Result<()> {
    match command {
        Command::Map(args) => run_map(args),
        Command::Cf(args) => run_cf(args),
        Command::Tail(args) => run_tail(args),
        Command::Iterate(args) => run_iterate(args),
        Command::Renewal(args) => run_renewal(args),
        Command::Experiment(args) => run_experiment(args),
    }
}

/// Writes the rows in the requested encoding.
fn emit(rows: &[SeriesRow], format: Format, out: Option<&Path>) -> Result<()> {
    let text = match format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(rows),
    };
    match out {
        Some(path) => fs::write(path, &text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must lie in [0, 1], got {v}")))
    }
}

/// Orbit rows carry the iterate in `value` and the invariant density at
/// that iterate in `normalized`; two summary rows close the table with the
/// nonzero fixed point and the invariant mass of the reference interval.
fn run_map(args: &MapArgs) -> Result<()> {
    check_unit_interval("r", args.r)?;
    let r = args.r;
    let mut rows = Vec::new();
    for &start in &args.x {
        check_unit_interval("x", start)?;
        let mut point = start;
        for n in 0..=args.steps {
            if n > 0 {
                point = map::forward(r, point);
            }
            rows.push(
                SeriesRow::new("diagnostics", r, start, n, "orbit", ExtendedReal::Finite(point))
                    .with_normalized(map::invariant_density(r, point)),
            );
        }
    }
    let fp = map::nonzero_fixed_point(r);
    rows.push(
        SeriesRow::new("diagnostics", r, fp, 0, "fixed-point", ExtendedReal::Finite(fp))
            .with_normalized(map::invariant_density(r, fp)),
    );
    // The reference mass: the whole interval away from the slow endpoint,
    // the right half (mass ln 2) at it, where the full measure is infinite.
    let (lo, target) = if r == map::R_FAREY { (0.5, std::f64::consts::LN_2) } else { (0.0, 1.0) };
    rows.push(
        SeriesRow::new(
            "diagnostics",
            r,
            1.0,
            0,
            "mass",
            ExtendedReal::Finite(map::invariant_measure(r, lo, 1.0)),
        )
        .with_target(target),
    );
    emit(&rows, args.output.format.unwrap_or(Format::Csv), args.output.out.as_deref())
}

/// The ratio `pⱼ/qⱼ` computed through logarithms, so convergents keep
/// their value even after the integers leave `f64` range.
fn convergent_f64(table: &ConvergentTable, order: i64) -> f64 {
    (log_abs_bigint(table.p(order)) - log_abs_bigint(table.q(order))).exp()
}

/// Entry rows carry `aᵢ` in `value` and `ln aᵢ` in `normalized`;
/// convergent rows carry `pᵢ/qᵢ` in `value` and `ln qᵢ` in `normalized`.
/// Finite expansions stop early; rule expansions stop at their entry
/// capacity.
fn run_cf(args: &CfArgs) -> Result<()> {
    if args.entries == 0 {
        return Err(Error::InvalidInput("--entries must be positive".to_owned()));
    }
    let expansion = ContinuedFraction::parse(&args.value)?;
    let mut table = ConvergentTable::new();
    let mut rows = Vec::new();
    for i in 1..=args.entries {
        let Some(a) = expansion.entry(i)? else { break };
        let log_a = log_abs_bigint(&a);
        rows.push(
            SeriesRow::new(
                "diagnostics",
                map::R_FAREY,
                0.0,
                i,
                "cf:entry",
                ExtendedReal::Finite(a.to_f64().unwrap_or(f64::INFINITY)),
            )
            .with_beta(&args.value)
            .with_normalized(log_a),
        );
        table.push(a);
        let order = table.len() as i64;
        rows.push(
            SeriesRow::new(
                "diagnostics",
                map::R_FAREY,
                0.0,
                i,
                "cf:convergent",
                ExtendedReal::Finite(convergent_f64(&table, order)),
            )
            .with_beta(&args.value)
            .with_normalized(log_abs_bigint(table.q(order))),
        );
    }
    // The deepest convergent is the natural display point for every row.
    let x = convergent_f64(&table, table.len() as i64);
    for row in &mut rows {
        row.x = x;
    }
    emit(&rows, args.output.format.unwrap_or(Format::Csv), args.output.out.as_deref())
}

/// At the slow endpoint the sweep is exact: symbolic `inf` rows mark
/// singular hits and `normalized` carries the log magnitude.  Away from it
/// the floating cylinder sum is used.
fn run_tail(args: &TailArgs) -> Result<()> {
    check_unit_interval("r", args.r)?;
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha must lie in (0, 1), got {}",
            args.alpha
        )));
    }
    let schedule = match &args.schedule {
        Some(s) => Schedule::parse(s)?,
        None => Schedule::default_for(args.r),
    };
    let depths = schedule.depths()?;
    let mut rows = Vec::new();
    if args.r == map::R_FAREY {
        let expansion = ContinuedFraction::parse(&args.beta)?;
        let x = parse_exact_value(&args.x)?;
        let x_display = x.to_f64();
        let mut sweep = FareyTailSweep::new(&expansion, args.alpha, x)?;
        for &n in &depths {
            sweep.advance_to(n)?;
            let step = sweep.measure();
            let mut row = SeriesRow::new(
                "diagnostics",
                args.r,
                x_display,
                n,
                "cf",
                step.magnitude.to_extended(),
            )
            .with_alpha(args.alpha)
            .with_beta(&args.beta);
            if let Some(l) = step.magnitude.ln() {
                row = row.with_normalized(l);
            }
            rows.push(row);
        }
    } else {
        let beta = parse_exact_value(&args.beta)?.to_f64();
        let x = parse_exact_value(&args.x)?.to_f64();
        for &n in &depths {
            let value = tail::singular_tail(args.r, beta, args.alpha, n, x);
            let mut row = SeriesRow::new("diagnostics", args.r, x, n, "float", value)
                .with_alpha(args.alpha)
                .with_beta(&args.beta);
            if let ExtendedReal::Finite(v) = value {
                if v > 0.0 {
                    row = row.with_normalized(v.ln());
                }
            }
            rows.push(row);
        }
    }
    emit(&rows, args.output.format.unwrap_or(Format::Csv), args.output.out.as_deref())
}

/// Delegates to the convergence driver; the family tag records which of
/// the two parameter regimes the run illustrates.
fn run_iterate(args: &IterateArgs) -> Result<()> {
    let schedule = args.schedule.as_deref().map(Schedule::parse).transpose()?;
    let theorem = if args.r == map::R_FAREY { "3.2" } else { "3.1" };
    let config = ExperimentConfig {
        theorem: theorem.to_owned(),
        r: args.r,
        alpha: args.alpha,
        beta: args.beta.clone(),
        observable: args.observable.clone(),
        points: args.points.clone(),
        schedule,
        backend: args.backend.clone(),
        k: None,
        j_max: None,
        format: None,
        out: None,
    };
    let series = experiments::run_convergence(&config)?;
    emit(&series.rows, args.output.format.unwrap_or(Format::Csv), args.output.out.as_deref())
}

/// Per index `k`: the return-cell measure, the variation norm of the
/// weighted indicator, and the two comparison envelopes (the cubic decay
/// level and the measure-proportional level), each with the norm ratio in
/// `normalized`.  With `--x`, weight rows and a partial-sum row against
/// the closed form are appended.
fn run_renewal(args: &RenewalArgs) -> Result<()> {
    if args.max_k == 0 {
        return Err(Error::InvalidInput("--max-k must be positive".to_owned()));
    }
    if let Some(x) = args.x {
        check_unit_interval("x", x)?;
    }
    let mut rows = Vec::new();
    for report in renewal::return_norm_report(args.max_k) {
        let k = report.k;
        let (lo, hi) = renewal::return_cell(k);
        let mid = 0.5 * (lo + hi);
        rows.push(SeriesRow::new(
            "diagnostics",
            map::R_FAREY,
            mid,
            k,
            "measure",
            ExtendedReal::Finite(renewal::return_cell_measure(k)),
        ));
        rows.push(SeriesRow::new(
            "diagnostics",
            map::R_FAREY,
            mid,
            k,
            "bv:norm",
            ExtendedReal::Finite(report.norm),
        ));
        rows.push(
            SeriesRow::new(
                "diagnostics",
                map::R_FAREY,
                mid,
                k,
                "bv:cube-bound",
                ExtendedReal::Finite(report.cube_bound),
            )
            .with_normalized(report.norm / report.cube_bound),
        );
        rows.push(
            SeriesRow::new(
                "diagnostics",
                map::R_FAREY,
                mid,
                k,
                "bv:mass-bound",
                ExtendedReal::Finite(report.measure_bound),
            )
            .with_normalized(report.norm / report.measure_bound),
        );
        if let Some(x) = args.x {
            rows.push(SeriesRow::new(
                "diagnostics",
                map::R_FAREY,
                x,
                k,
                "weight",
                ExtendedReal::Finite(renewal::return_weight(k, x)),
            ));
        }
    }
    if let Some(x) = args.x {
        let sum = renewal::return_weight_partial_sum(args.max_k, x);
        let closed = renewal::return_weight_partial_sum_closed(args.max_k, x);
        rows.push(
            SeriesRow::new(
                "diagnostics",
                map::R_FAREY,
                x,
                args.max_k,
                "weight:partial-sum",
                ExtendedReal::Finite(sum),
            )
            .with_target(closed)
            .with_normalized(sum - closed),
        );
    }
    emit(&rows, args.output.format.unwrap_or(Format::Csv), args.output.out.as_deref())
}

/// Loads a JSON configuration, lets the command-line `--format`/`--out`
/// override the file's choices, and dispatches on the family tag.
fn run_experiment(args: &ExperimentArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", args.config.display())))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("bad configuration: {e}")))?;
    let format = match args.output.format {
        Some(f) => f,
        None => match config.format.as_deref() {
            None | Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(other) => {
                return Err(Error::InvalidInput(format!("unknown format {other:?}")))
            }
        },
    };
    let out = args
        .output
        .out
        .clone()
        .or_else(|| config.out.as_ref().map(PathBuf::from));
    let series = experiments::run(&config)?;
    emit(&series.rows, format, out.as_deref())
}
