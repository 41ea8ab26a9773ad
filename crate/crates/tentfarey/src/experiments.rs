//! Batch experiment drivers behind the `experiment` subcommand.
//!
//! Each driver walks a configured family of operator iterates and emits a
//! flat table of [`SeriesRow`]s — one row per `(point, depth)` pair plus
//! summary rows such as decay fits and late-window maxima — so a run can be
//! rendered as CSV or JSON with a stable schema.  The drivers are:
//!
//! * [`run_convergence`] — iterate the operator on an observable and track
//!   the approach to `∫v dλ · h_r`: direct values on the exact branch tree
//!   for `r < 1`, `ln(n)`-scaled grid values in the slow `r = 1` regime;
//! * [`run_limsup_report`] — exact tail magnitudes along the orbit closure
//!   of a pre-periodic singularity, where the scaled iterates split into
//!   symbolic `+∞` hits and decaying subsequences;
//! * [`run_witness_table`] — the two bounded-entry witness expansions with
//!   sparse twos (quadratic-gap and geometric-gap block layouts), their
//!   index and entry checks, orbit samples, and the log-domain bounding
//!   sequences whose direction flips at exponent `1/2`;
//! * [`run_entry_score`] — the score `(a_{j+1})^α · ln(n_{k,j}) / q_j^{2(1−α)}`
//!   classifying the scaled iterates at a rational observation point `1/k`;
//! * [`run_diagnostics`] — wandering-rate, singular-cover, and entry-score
//!   summability tables.
//!
//! [`run`] dispatches on the configuration's tag.  Every row names the
//! backend that produced it, `+∞` is the symbolic marker rather than a
//! float, and a fixed configuration always reproduces a byte-identical
//! table: assembly is single-threaded and the parallel tree reductions are
//! association-fixed.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::cf::{self, ContinuedFraction, EntryRule, OrbitCycle};
use crate::coding;
use crate::error::{capacity, invalid};
use crate::map;
use crate::num_util::{least_squares_slope, log_abs_bigint, log_add_exp};
use crate::observable::{ExtendedReal, Observable};
use crate::quad;
use crate::series::{self, SeriesRow};
use crate::surd::ExactPoint;
use crate::tail::{FareyTailSweep, TailMagnitude};
use crate::transfer::{self, GridOperator, MAX_TREE_DEPTH};
use crate::{Error, Result};

/// Default grid resolution for the `r = 1` backend.
const DEFAULT_GRID: usize = 1 << 14;

/// Hard cap on the witness-table range: the geometric-gap family needs a
/// log-domain denominator table out to index `2^n`, held in memory.
const MAX_WITNESS_RANGE: u64 = 20;

/// `(√5 − 1)/2`, the all-ones expansion; the witness orbits accumulate here.
fn golden() -> f64 {
    (5.0f64.sqrt() - 1.0) / 2.0
}

/// The iterate depths an experiment visits.
///
/// Whatever the form, the realized list must be nonempty, start at `1` or
/// later, and increase strictly; [`Schedule::depths`] enforces this.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// `from, from+step, …`, stopping at the last value `≤ to`.
    Linear {
        /// First depth.
        from: u64,
        /// Inclusive upper bound.
        to: u64,
        /// Positive increment.
        step: u64,
    },
    /// `from, 2·from, 4·from, …`, stopping at the last value `≤ to`.
    Dyadic {
        /// First depth.
        from: u64,
        /// Inclusive upper bound.
        to: u64,
    },
    /// An explicit list.
    Explicit(Vec<u64>),
}

impl Schedule {
    /// The concrete, validated depth list.
    ///
    /// # Errors
    ///
    /// Rejects an empty realization, a zero step or depth, and any
    /// non-increasing explicit list.
    pub fn depths(&self) -> Result<Vec<u64>> {
        let list: Vec<u64> = match self {
            Schedule::Linear { from, to, step } => {
                if *step == 0 {
                    return Err(invalid("schedule step must be positive"));
                }
                (*from..=*to).step_by(usize::try_from(*step).unwrap_or(usize::MAX)).collect()
            }
            Schedule::Dyadic { from, to } => {
                let mut out = Vec::new();
                let mut n = *from;
                while n <= *to {
                    out.push(n);
                    match n.checked_mul(2) {
                        Some(next) => n = next,
                        None => break,
                    }
                }
                out
            }
            Schedule::Explicit(list) => list.clone(),
        };
        if list.is_empty() {
            return Err(invalid("empty depth schedule"));
        }
        if list[0] == 0 {
            return Err(invalid("depths start at 1"));
        }
        if list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("depths must increase strictly"));
        }
        Ok(list)
    }

    /// Parses the command-line forms `a..b` (linear), `a..b:s` (linear with
    /// stride `s`), `dyadic:a..b`, and a comma-separated explicit list.
    ///
    /// # Errors
    ///
    /// Rejects malformed syntax; the realized list is validated by
    /// [`Schedule::depths`] at use time.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_range = |body: &str| -> Result<(u64, u64)> {
            let (a, b) = body
                .split_once("..")
                .ok_or_else(|| invalid(format!("expected a..b in schedule, got {body:?}")))?;
            let a = a.trim().parse().map_err(|_| invalid("bad schedule start"))?;
            let b = b.trim().parse().map_err(|_| invalid("bad schedule end"))?;
            Ok((a, b))
        };
        if let Some(body) = s.strip_prefix("dyadic:") {
            let (from, to) = parse_range(body)?;
            return Ok(Schedule::Dyadic { from, to });
        }
        if s.contains("..") {
            let (body, step) = match s.rsplit_once(':') {
                Some((body, step)) => {
                    (body, step.trim().parse().map_err(|_| invalid("bad schedule stride"))?)
                }
                None => (s, 1),
            };
            let (from, to) = parse_range(body)?;
            return Ok(Schedule::Linear { from, to, step });
        }
        let list = s
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| invalid(format!("bad depth {t:?}"))))
            .collect::<Result<Vec<u64>>>()?;
        Ok(Schedule::Explicit(list))
    }

    /// The per-regime default: a linear sweep within exact-tree reach for
    /// `r < 1`, a dyadic sweep for the logarithmic `r = 1` phenomena.
    #[must_use]
    pub fn default_for(r: f64) -> Self {
        if r == map::R_FAREY {
            Schedule::Dyadic { from: 1, to: 4096 }
        } else {
            Schedule::Linear { from: 1, to: 22, step: 1 }
        }
    }
}

/// A complete batch run description, loadable from JSON.
///
/// Only `theorem` is mandatory; everything else falls back to per-driver
/// defaults (singular observable at `β`, a small off-orbit point set, the
/// regime default schedule).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Report family: `3.1`, `3.2`, `3.3a`, `3.3b`, or `diagnostics`.  The
    /// tag is data — it is echoed into the first column of every row.
    pub theorem: String,
    /// Map parameter in `[0, 1]`; defaults to `1`.
    #[serde(default = "default_r")]
    pub r: f64,
    /// Singularity exponent in `(0, 1)`, where the run needs one.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Singularity location: point syntax, bracketed expansion, or entry
    /// rule, as in [`ContinuedFraction::parse`].
    #[serde(default)]
    pub beta: Option<String>,
    /// Observable override, as in [`Observable::parse`]; defaults to the
    /// singular power at `β` with exponent `α`.
    #[serde(default)]
    pub observable: Option<String>,
    /// Evaluation points in `[0, 1]`.
    #[serde(default)]
    pub points: Vec<f64>,
    /// Iterate depths; defaults per regime.
    #[serde(default)]
    pub schedule: Option<Schedule>,
    /// Backend request: `tree`, `grid`, `grid:N`, or `cf`.
    #[serde(default)]
    pub backend: Option<String>,
    /// Observation index: the witness point `ζ_k` (tag `3.3a`) or the
    /// rational `1/k` (tag `3.3b`).
    #[serde(default)]
    pub k: Option<u64>,
    /// Entry-score depth bound for tag `3.3b`.
    #[serde(default)]
    pub j_max: Option<u64>,
    /// Output format (`csv` or `json`); the command line may override.
    #[serde(default)]
    pub format: Option<String>,
    /// Output path; standard output when absent.
    #[serde(default)]
    pub out: Option<String>,
}

fn default_r() -> f64 {
    map::R_FAREY
}

/// The ordered row table produced by one run.
#[derive(Debug, Clone)]
pub struct ExperimentSeries {
    /// Rows in emission order.
    pub rows: Vec<SeriesRow>,
}

impl ExperimentSeries {
    /// Renders the table as CSV with the fixed header.
    #[must_use]
    pub fn to_csv(&self) -> String {
        series::to_csv(&self.rows)
    }

    /// Renders the table as JSON.
    #[must_use]
    pub fn to_json(&self) -> String {
        series::to_json(&self.rows)
    }
}

/// Runs the experiment a configuration describes, dispatching on its tag.
///
/// Tag `3.2` runs the orbit-closure report when the backend is `cf` and the
/// grid series otherwise.
///
/// # Errors
///
/// Unknown tags and malformed parameters are input errors; depth requests
/// beyond the exact-tree or table capacity are capacity errors.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentSeries> {
    match config.theorem.as_str() {
        "3.1" => run_convergence(config),
        "3.2" => {
            if config.backend.as_deref() == Some("cf") {
                run_limsup_report(config)
            } else {
                run_convergence(config)
            }
        }
        "3.3a" => run_witness_table(config),
        "3.3b" => run_entry_score(config),
        "diagnostics" => run_diagnostics(config),
        other => Err(invalid(format!(
            "unknown experiment tag {other:?}; use 3.1, 3.2, 3.3a, 3.3b, or diagnostics"
        ))),
    }
}

/// A parsed singularity: its expansion, exact value when one exists, and a
/// binary64 stand-in for the floating backends.
struct PointSpec {
    cf: ContinuedFraction,
    exact: Option<ExactPoint>,
    value: f64,
    text: String,
}

fn parse_point(spec: &str) -> Result<PointSpec> {
    let cf = ContinuedFraction::parse(spec)?;
    let exact = cf.value_exact().ok();
    let value = match &exact {
        Some(p) => p.to_f64(),
        None => cf_value_f64(&cf),
    };
    Ok(PointSpec { cf, exact, value, text: spec.trim().to_string() })
}

/// Binary64 value of an expansion, by a truncated backward fold.  Forty
/// entries leave a remainder below resolution even in the slowest all-ones
/// case, and an entry beyond `e^45` cuts the fold off early — everything
/// past it is invisible at this precision, and rules with fast-growing
/// entries must not be materialized that deep.
fn cf_value_f64(cf: &ContinuedFraction) -> f64 {
    let mut logs = Vec::with_capacity(40);
    for i in 1..=40u64 {
        let log_a = match cf {
            ContinuedFraction::Rule(rule) => rule.log_entry(i),
            _ => match cf.entry(i) {
                Ok(Some(a)) => log_abs_bigint(&a),
                _ => break,
            },
        };
        logs.push(log_a);
        if log_a > 45.0 {
            break;
        }
    }
    let mut x = 0.0;
    for log_a in logs.iter().rev() {
        x = 1.0 / (log_a.exp() + x);
    }
    x
}

/// Multiplies a finite value by a nonnegative factor; the symbolic `+∞`
/// stays symbolic (the scale never argues an infinite hit away).
fn scale_extended(value: ExtendedReal, factor: f64) -> ExtendedReal {
    match value {
        ExtendedReal::Finite(v) => ExtendedReal::Finite(factor * v),
        ExtendedReal::PosInf => ExtendedReal::PosInf,
    }
}

// ---------------------------------------------------------------------------
// Convergence series (tags 3.1 and 3.2).
// ---------------------------------------------------------------------------

/// Iterates the operator on the configured observable and emits the series
/// together with its pointwise target `∫v dλ · h_r(x)`.
///
/// For `r < 1` the exact branch tree is used and each point closes with a
/// `tree:fit` row holding the geometric error-decay ratio.  For `r = 1` the
/// grid backend is used, values are `ln(n)`-scaled, and a singular
/// observable is sampled with its cell-resolution cap (no finite target
/// exists there: the reference measure gives every neighborhood of the
/// origin infinite mass, so the singular integral diverges).  Points lying
/// on the forward orbit of `β` are flagged with an `:omega` backend suffix
/// and excluded from fits.
///
/// # Errors
///
/// Rejects parameters outside their domains; tree depths beyond
/// [`MAX_TREE_DEPTH`] are capacity errors.
pub fn run_convergence(config: &ExperimentConfig) -> Result<ExperimentSeries> {
    let r = config.r;
    if !(0.0..=1.0).contains(&r) {
        return Err(invalid(format!("map parameter {r} outside [0, 1]")));
    }
    let beta = config.beta.as_deref().map(parse_point).transpose()?;
    let observable = build_observable(config, beta.as_ref())?;
    let points = if config.points.is_empty() {
        vec![0.3, 0.6, 0.9]
    } else {
        config.points.clone()
    };
    if let Some(bad) = points.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(invalid(format!("evaluation point {bad} outside [0, 1]")));
    }
    let schedule = config.schedule.clone().unwrap_or_else(|| Schedule::default_for(r));
    let depths = schedule.depths()?;
    let beta_text = beta.as_ref().map_or_else(String::new, |b| b.text.clone());
    let omega = omega_points(r, beta.as_ref());
    if r < map::R_FAREY {
        convergence_tree(config, r, &observable, &points, &depths, &beta_text, &omega)
    } else {
        convergence_grid(config, &observable, &points, &depths, &beta_text, &omega)
    }
}

fn build_observable(config: &ExperimentConfig, beta: Option<&PointSpec>) -> Result<Observable> {
    if let Some(spec) = &config.observable {
        return Observable::parse(spec);
    }
    let beta = beta.ok_or_else(|| invalid("need beta (or an explicit observable)"))?;
    let alpha = config.alpha.ok_or_else(|| invalid("need alpha for the singular observable"))?;
    match &beta.exact {
        Some(point) => Observable::singular(point.clone(), alpha, 1.0),
        None => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(invalid(format!("exponent {alpha} outside (0, 1)")));
            }
            Ok(Observable::SingularPower {
                beta: beta.value,
                beta_exact: None,
                alpha,
                scale: 1.0,
            })
        }
    }
}

fn observable_alpha(observable: &Observable) -> Option<f64> {
    match observable {
        Observable::SingularPower { alpha, .. } => Some(*alpha),
        _ => None,
    }
}

/// Leading forward-orbit points of the singularity, for flagging evaluation
/// points that sit on the accumulation set.
fn omega_points(r: f64, beta: Option<&PointSpec>) -> Vec<f64> {
    let Some(beta) = beta else { return Vec::new() };
    let mut orbit = Vec::with_capacity(64);
    let mut z = beta.value;
    for _ in 0..64 {
        orbit.push(z);
        z = map::forward(r, z);
    }
    orbit
}

fn near_orbit(x: f64, orbit: &[f64]) -> bool {
    orbit.iter().any(|z| (x - z).abs() < 1e-9)
}

fn convergence_tree(
    config: &ExperimentConfig,
    r: f64,
    observable: &Observable,
    points: &[f64],
    depths: &[u64],
    beta_text: &str,
    omega: &[f64],
) -> Result<ExperimentSeries> {
    let deepest = *depths.last().expect("depths validated nonempty");
    if deepest > u64::from(MAX_TREE_DEPTH) {
        return Err(capacity(format!(
            "exact tree depth {deepest} exceeds {MAX_TREE_DEPTH}; use the grid backend"
        )));
    }
    let mass = observable.integral_lebesgue();
    let alpha = observable_alpha(observable);
    let f = |y: f64| observable.eval(y);
    let mut rows = Vec::new();
    for &x in points {
        let flagged = near_orbit(x, omega);
        let backend = if flagged { "tree:omega" } else { "tree" };
        let target = mass * map::invariant_density(r, x);
        let mut errors: Vec<(f64, f64)> = Vec::new();
        for &n in depths {
            let value = transfer::pf_exact(r, n as u32, &f, x)?;
            let mut row = SeriesRow::new(&config.theorem, r, x, n, backend, value)
                .with_beta(beta_text)
                .with_target(target);
            if let Some(a) = alpha {
                row = row.with_alpha(a);
            }
            if let ExtendedReal::Finite(v) = value {
                row = row.with_normalized(v / target);
                let err = (v - target).abs();
                if err > 0.0 {
                    errors.push((n as f64, err.ln()));
                }
            }
            rows.push(row);
        }
        // Per-point error-decay fit: ln|error| against n, reported as the
        // per-step ratio so a clean geometric approach shows up below one.
        if !flagged && errors.len() >= 2 {
            let slope = least_squares_slope(&errors);
            let mut row = SeriesRow::new(
                &config.theorem,
                r,
                x,
                deepest,
                "tree:fit",
                ExtendedReal::Finite(slope.exp()),
            )
            .with_beta(beta_text)
            .with_normalized(slope);
            if let Some(a) = alpha {
                row = row.with_alpha(a);
            }
            rows.push(row);
        }
    }
    Ok(ExperimentSeries { rows })
}

fn grid_size(config: &ExperimentConfig) -> Result<usize> {
    match config.backend.as_deref() {
        None | Some("grid") | Some("auto") => Ok(DEFAULT_GRID),
        Some(spec) => {
            if let Some(n) = spec.strip_prefix("grid:") {
                let n: usize = n.parse().map_err(|_| invalid("bad grid size"))?;
                if !(2..=1 << 24).contains(&n) {
                    return Err(capacity(format!("grid size {n} outside 2..=2^24")));
                }
                Ok(n)
            } else {
                Err(invalid(format!("unknown backend {spec:?} for a grid run")))
            }
        }
    }
}

/// The support of a bounded observable, or `None` for a singular one.
fn bounded_support(observable: &Observable) -> Option<(f64, f64)> {
    match observable {
        Observable::SingularPower { .. } => None,
        Observable::Indicator { lo, hi } => Some((*lo, *hi)),
        Observable::PiecewiseLinear { nodes } => {
            Some((nodes[0].0, nodes[nodes.len() - 1].0))
        }
    }
}

fn convergence_grid(
    config: &ExperimentConfig,
    observable: &Observable,
    points: &[f64],
    depths: &[u64],
    beta_text: &str,
    omega: &[f64],
) -> Result<ExperimentSeries> {
    let intervals = grid_size(config)?;
    let op = GridOperator::farey_hat(intervals);
    let alpha = observable_alpha(observable);
    let width = 1.0 / intervals as f64;
    // A singular sample is capped at its own cell average so one node does
    // not carry an unrepresentable spike; its reference-measure integral is
    // infinite, so those rows get no target.
    let (mut values, capped) = match observable {
        Observable::SingularPower { alpha, scale, .. } => {
            let cap = scale * width.powf(-alpha) / (1.0 - alpha);
            (op.sample(|y| observable.eval_f64(y).min(cap)), true)
        }
        _ => (op.sample(|y| observable.eval_f64(y)), false),
    };
    let target = bounded_support(observable).and_then(|(lo, hi)| {
        (lo > 0.0).then(|| {
            quad::integrate(&|y: f64| observable.eval_f64(y) / y, lo, hi, 1e-12)
        })
    });
    let backend_base = if capped {
        format!("grid:{intervals}:capped")
    } else {
        format!("grid:{intervals}")
    };
    let mut rows = Vec::new();
    let mut at = 0u64;
    for &n in depths {
        op.iterate(&mut values, n - at);
        at = n;
        let scale = (n as f64).ln();
        for &x in points {
            let backend = if near_orbit(x, omega) {
                format!("{backend_base}:omega")
            } else {
                backend_base.clone()
            };
            let value = scale * op.interpolate(&values, x);
            let mut row = SeriesRow::new(
                &config.theorem,
                map::R_FAREY,
                x,
                n,
                &backend,
                ExtendedReal::Finite(value),
            )
            .with_beta(beta_text);
            if let Some(a) = alpha {
                row = row.with_alpha(a);
            }
            if let Some(t) = target {
                row = row.with_target(t).with_normalized(value / t);
            }
            rows.push(row);
        }
    }
    Ok(ExperimentSeries { rows })
}

// ---------------------------------------------------------------------------
// Orbit-closure report (tag 3.2, backend cf).
// ---------------------------------------------------------------------------

/// Exact tail magnitudes along the orbit closure of a pre-periodic
/// singularity.
///
/// For a quadratic `β` the closure is the orbit cycle; at each cycle point
/// the sweep emits the per-depth tail magnitude — symbolic `+∞` whenever
/// the depth-`n` branch maps the point back onto `β`, a finite log-domain
/// value otherwise — and closes with a `cf:fit` row: the slope of `ln v`
/// against `ln q` over the decaying subsequence, whose expected value is
/// `2(α−1)`.
///
/// For a rational `β` the closure is the origin alone.  Raw rows there hit
/// symbolic `+∞` as soon as the depth reaches the spelling of `β`
/// (two branch words land exactly on the singularity from then on); the
/// paired `tree:remainder` rows zero the observable on the depth-`n`
/// itinerary cylinder first, and that `ln(n)`-scaled remainder is the part
/// that dies out — its rows carry target `0`.
///
/// # Errors
///
/// A rule-generated expansion has no finite orbit closure and is rejected
/// as unsupported; other failures are input errors.
pub fn run_limsup_report(config: &ExperimentConfig) -> Result<ExperimentSeries> {
    let spec = config.beta.as_deref().ok_or_else(|| invalid("need beta"))?;
    let beta = parse_point(spec)?;
    let alpha = config.alpha.ok_or_else(|| invalid("need alpha"))?;
    let exact = beta.exact.clone().ok_or_else(|| {
        Error::Unsupported(
            "orbit report needs a rational or quadratic singularity; \
             a rule-generated expansion has no finite orbit closure"
                .into(),
        )
    })?;
    let schedule =
        config.schedule.clone().unwrap_or(Schedule::Dyadic { from: 1, to: 4096 });
    let n_max = *schedule.depths()?.last().expect("depths validated nonempty");
    let orbit = cf::farey_orbit_cycle(&exact)?;
    let origin = ExactPoint::rational(0, 1)?;
    let mut rows = Vec::new();
    if orbit.cycle.contains(&origin) {
        origin_rows(config, &beta, &exact, alpha, n_max, &mut rows)?;
    } else {
        cycle_rows(config, &beta, alpha, &orbit, n_max, &mut rows)?;
    }
    Ok(ExperimentSeries { rows })
}

fn cycle_rows(
    config: &ExperimentConfig,
    beta: &PointSpec,
    alpha: f64,
    orbit: &OrbitCycle,
    n_max: u64,
    rows: &mut Vec<SeriesRow>,
) -> Result<()> {
    let period = orbit.period.max(1);
    // Every depth through 64, then dyadic blocks wide enough to cover each
    // residue class of the cycle length.
    let mut sample: Vec<u64> = (1..=n_max.min(64)).collect();
    let mut block = 128u64;
    while block <= n_max {
        for offset in 0..period {
            let n = block + offset;
            if n <= n_max {
                sample.push(n);
            }
        }
        block *= 2;
    }
    for zeta in &orbit.cycle {
        let mut sweep = FareyTailSweep::new(&beta.cf, alpha, zeta.clone())?;
        let x = zeta.to_f64();
        let mut decay: Vec<(f64, f64)> = Vec::new();
        for &n in &sample {
            sweep.advance_to(n)?;
            let step = sweep.measure();
            let mut row;
            match step.magnitude {
                TailMagnitude::Infinite => {
                    row = SeriesRow::new(
                        &config.theorem,
                        map::R_FAREY,
                        x,
                        n,
                        "cf",
                        ExtendedReal::PosInf,
                    );
                }
                TailMagnitude::Log(log_v) => {
                    if n > 64 {
                        decay.push((step.log_q, log_v));
                    }
                    row = SeriesRow::new(
                        &config.theorem,
                        map::R_FAREY,
                        x,
                        n,
                        "cf",
                        ExtendedReal::Finite(log_v.exp()),
                    )
                    .with_normalized(log_v);
                }
            }
            row = row.with_alpha(alpha).with_beta(&beta.text);
            rows.push(row);
        }
        if decay.len() >= 2 {
            let slope = least_squares_slope(&decay);
            rows.push(
                SeriesRow::new(
                    &config.theorem,
                    map::R_FAREY,
                    x,
                    n_max,
                    "cf:fit",
                    ExtendedReal::Finite(slope),
                )
                .with_alpha(alpha)
                .with_beta(&beta.text)
                .with_target(2.0 * alpha - 2.0)
                .with_normalized(slope),
            );
        }
    }
    Ok(())
}

fn origin_rows(
    config: &ExperimentConfig,
    beta: &PointSpec,
    exact: &ExactPoint,
    alpha: f64,
    n_max: u64,
    rows: &mut Vec<SeriesRow>,
) -> Result<()> {
    let v = Observable::singular(exact.clone(), alpha, 1.0)?;
    let full = |y: f64| v.eval(y);
    let depth_cap = n_max.min(16);
    for n in 1..=depth_cap {
        let scale = (n as f64).ln();
        let raw = transfer::pf_exact(map::R_FAREY, n as u32, &full, 0.0)?;
        rows.push(
            SeriesRow::new(
                &config.theorem,
                map::R_FAREY,
                0.0,
                n,
                "tree",
                scale_extended(raw, scale),
            )
            .with_alpha(alpha)
            .with_beta(&beta.text),
        );
        let word = coding::code_point_exact(true, exact, n);
        let (lo, hi) = coding::cylinder_interval(map::R_FAREY, &word);
        let masked = |y: f64| {
            if (lo..=hi).contains(&y) {
                ExtendedReal::Finite(0.0)
            } else {
                v.eval(y)
            }
        };
        let remainder = transfer::pf_exact(map::R_FAREY, n as u32, &masked, 0.0)?;
        rows.push(
            SeriesRow::new(
                &config.theorem,
                map::R_FAREY,
                0.0,
                n,
                "tree:remainder",
                scale_extended(remainder, scale),
            )
            .with_alpha(alpha)
            .with_beta(&beta.text)
            .with_target(0.0),
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Witness table (tag 3.3a).
// ---------------------------------------------------------------------------

/// `ln q_j` along a rule-generated expansion, for `j ≤ max`.
fn log_q_table(rule: &EntryRule, max: u64) -> Vec<f64> {
    let mut table = Vec::with_capacity(max as usize + 1);
    table.push(0.0); // q₀ = 1
    let mut prev2 = f64::NEG_INFINITY; // q₋₁ = 0
    for j in 1..=max {
        let prev = table[(j - 1) as usize];
        let next = log_add_exp(rule.log_entry(j) + prev, prev2);
        prev2 = prev;
        table.push(next);
    }
    table
}

/// `ln q_j` for the all-ones expansion, in closed form: the denominators
/// are Fibonacci numbers, so no table is needed at the huge indices the
/// geometric-gap family reaches.
fn log_q_golden(j: u64) -> f64 {
    let m = j + 1;
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
    let tail = (sign * phi.powi(-2 * i32::try_from(m.min(600)).expect("capped"))).ln_1p();
    m as f64 * phi.ln() - 5.0f64.ln() / 2.0 + tail
}

/// The observation point `ζ_k`: `k` ones, a two, then the all-ones tail.
fn zeta_point(k: u64) -> f64 {
    let mut x = 1.0 / (2.0 + golden());
    for _ in 0..k {
        x = 1.0 / (1.0 + x);
    }
    x
}

/// Forward orbit of a rule-generated expansion in digit steps: a leading
/// entry above one counts down, a leading one is consumed.
struct ShiftWalker<'a> {
    rule: &'a EntryRule,
    start: u64,
    lead: u64,
}

impl<'a> ShiftWalker<'a> {
    fn new(rule: &'a EntryRule) -> Result<Self> {
        let lead = entry_u64(rule, 1)?;
        Ok(ShiftWalker { rule, start: 1, lead })
    }

    fn step(&mut self) -> Result<()> {
        if self.lead > 1 {
            self.lead -= 1;
        } else {
            self.start += 1;
            self.lead = entry_u64(self.rule, self.start)?;
        }
        Ok(())
    }

    /// Binary64 value of the current point `[0; lead, a_{start+1}, …]`.
    fn value(&self) -> Result<f64> {
        let mut x = 0.0;
        for i in (self.start + 1..=self.start + 40).rev() {
            x = 1.0 / (entry_u64(self.rule, i)? as f64 + x);
        }
        Ok(1.0 / (self.lead as f64 + x))
    }
}

fn entry_u64(rule: &EntryRule, i: u64) -> Result<u64> {
    rule.entry(i)?
        .to_u64()
        .ok_or_else(|| capacity(format!("entry at index {i} exceeds 64 bits")))
}

/// The two witness families and their scaled-tail bounding sequences.
///
/// Both witnesses have entries in `{1, 2}` with a two closing each block of
/// ones; block lengths grow linearly (`2m`) in the quadratic-gap family and
/// geometrically (`2^m`) in the geometric-gap family, putting the `n`-th
/// two at index `Λ(n) = n(n+2)` and `Λ(n) = 2^n+n−2` respectively.  Per
/// family and per `n` in the schedule the table holds:
///
/// * `cf:lambda` — `Λ(n)` itself;
/// * `cf:marker` — the entry at `Λ(n)−1`, with target `2` (the geometric
///   family meets it from `n = 2`; in the quadratic family the two sits at
///   `Λ(n)` exactly, which the untargeted `cf:marker-unshifted` and
///   `cf:nearest-two` rows show);
/// * `shift:orbit` — per `n`, the orbit point at the step where the
///   block-closing two is in front (left of 1/2) and at step `Λ(n)+n+1`
///   inside the following ones run (hugging the all-ones point), with the
///   gap to the all-ones point in `normalized`;
/// * `log:upper-matched`, `log:upper-offset` — upper bounds for the scaled
///   tail at `ζ_k` along and between the aligned depths (target `0` where
///   the bound closes: always for `upper-matched` and the quadratic-gap
///   `upper-offset`, only below exponent `1/2` for the geometric-gap one);
/// * `log:lower-burst`, `log:lower-burst-q` — geometric-gap lower bounds
///   along the burst subsequence in closed γ-power form and in raw
///   denominator form; above exponent `1/2` they grow without bound
///   (target `inf`);
/// * `log:liminf-upper` — the geometric-gap bound forcing the liminf to
///   zero along the aligned subsequence;
/// * `log:scale` — the empirical two-sided constant relating `q_j` of the
///   all-ones expansion to its exponential profile.
///
/// All bound rows carry the log-domain value in `normalized`, so underflow
/// of the plain value loses nothing.
///
/// # Errors
///
/// Requires `α ∈ (0, 1)`; ranges beyond [`MAX_WITNESS_RANGE`] are capacity
/// errors (the geometric family's tables grow like `2^n`).
pub fn run_witness_table(config: &ExperimentConfig) -> Result<ExperimentSeries> {
    let alpha = config.alpha.ok_or_else(|| invalid("need alpha"))?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("exponent {alpha} outside (0, 1)")));
    }
    let schedule =
        config.schedule.clone().unwrap_or(Schedule::Linear { from: 1, to: 10, step: 1 });
    let ns = schedule.depths()?;
    let n_top = *ns.last().expect("depths validated nonempty");
    if n_top > MAX_WITNESS_RANGE {
        return Err(capacity(format!(
            "witness range {n_top} exceeds {MAX_WITNESS_RANGE}"
        )));
    }
    let k = config.k.unwrap_or(0);
    let zeta = zeta_point(k);
    let gamma = golden();
    let log_gap = (0.5 - gamma).abs().ln();
    let mut rows = Vec::new();

    let quadratic_gap = EntryRule::OnesBlocksLinear;
    let geometric_gap = EntryRule::OnesBlocksGeometric;
    let lambda_quadratic = |n: u64| n * (n + 2);
    let lambda_geometric = |n: u64| (1u64 << n) + n - 2;

    for (rule, name, lambda, two_gap) in [
        (&quadratic_gap, "ones-blocks-linear", &lambda_quadratic as &dyn Fn(u64) -> u64, 2),
        (&geometric_gap, "ones-blocks-geometric", &lambda_geometric, 4),
    ] {
        index_and_entry_rows(config, rule, name, lambda, &ns, &mut rows)?;
        orbit_rows(config, rule, name, lambda, two_gap, &ns, gamma, &mut rows)?;
    }

    // Log-domain bounding sequences.  The quadratic-gap family needs `ln q`
    // only up to Λ(n_top); the geometric-gap family up to 2^n_top.
    let quadratic_logq = log_q_table(&quadratic_gap, lambda_quadratic(n_top) + 2);
    let geometric_logq = log_q_table(&geometric_gap, lambda_geometric(n_top) + 2);
    let decay = 2.0 * (1.0 - alpha);
    let push_bound = |rows: &mut Vec<SeriesRow>,
                      name: &str,
                      kind: &str,
                      x: f64,
                      n: u64,
                      log_value: f64,
                      target: Option<f64>| {
        let mut row = SeriesRow::new(
            &config.theorem,
            map::R_FAREY,
            x,
            n,
            kind,
            ExtendedReal::Finite(log_value.exp()),
        )
        .with_alpha(alpha)
        .with_beta(name)
        .with_normalized(log_value);
        if let Some(t) = target {
            row = row.with_target(t);
        }
        rows.push(row);
    };

    for &l in &ns {
        // Aligned depths: the orbit point has just passed a two, so it sits
        // left of 1/2 and the gap to the all-ones point is bounded below.
        let aligned = (lambda_quadratic(l) + (l - 1) + (k + 1)) as f64;
        let b_matched = aligned.ln().ln()
            - decay * quadratic_logq[lambda_quadratic(l) as usize]
            - alpha * log_gap;
        push_bound(&mut rows, "ones-blocks-linear", "log:upper-matched", zeta, l, b_matched, Some(0.0));
        // Between aligned depths the distance contracts through a run of
        // ones, paid for by one further denominator factor.
        let b_offset = (((l + 2) * (l + 5)) as f64).ln().ln()
            - decay * quadratic_logq[(l * (l + 2)) as usize]
            + alpha * quadratic_logq[(2 * (l + 1) + 1) as usize]
            - alpha * log_gap;
        push_bound(&mut rows, "ones-blocks-linear", "log:upper-offset", zeta, l, b_offset, Some(0.0));

        let b_matched_geo = ((l + 1) as f64 * std::f64::consts::LN_2).ln()
            - decay * geometric_logq[1usize << l]
            - alpha * log_gap;
        push_bound(
            &mut rows,
            "ones-blocks-geometric",
            "log:upper-matched",
            zeta,
            l,
            b_matched_geo,
            Some(0.0),
        );
        let b_offset_geo = ((l + 2) as f64 * std::f64::consts::LN_2).ln()
            + alpha * log_q_golden(2 * (1u64 << l) + 2)
            - decay * geometric_logq[1usize << l];
        push_bound(
            &mut rows,
            "ones-blocks-geometric",
            "log:upper-offset",
            zeta,
            l,
            b_offset_geo,
            (alpha < 0.5).then_some(0.0),
        );
    }

    // Empirical two-sided constant for the all-ones denominators, scanned
    // over every index the geometric-gap rows touch.
    let log_gamma = gamma.ln();
    let mut scale_log = f64::NEG_INFINITY;
    let mut scale_at = 1u64;
    for j in 1..=2 * (1u64 << n_top) + 2 {
        let dev = (log_q_golden(j) + j as f64 * log_gamma).abs();
        if dev > scale_log {
            scale_log = dev;
            scale_at = j;
        }
    }
    let burst_target = if alpha > 0.5 { Some(f64::INFINITY) } else { None };
    for &n in &ns {
        // Burst depths sit two past the aligned ones: the orbit point has
        // returned to the all-ones pattern and hugs γ at convergent
        // precision, so the tail refuses the usual decay.
        let exponent = 2.0f64.powi(i32::try_from(n + 1).expect("small"))
            * (1.0 - 2.0 * alpha)
            + 2.0 * (3.0 * n as f64 - 2.0) * (1.0 - alpha);
        let burst = (n as f64 * std::f64::consts::LN_2).ln() + exponent * log_gamma
            - 2.0 * scale_log;
        push_bound(&mut rows, "ones-blocks-geometric", "log:lower-burst", zeta, n, burst, burst_target);

        let burst_q = (n as f64 * std::f64::consts::LN_2).ln()
            + 2.0 * alpha * log_q_golden(1u64 << n)
            - 2.0 * n as f64 * (1.0 - alpha) * std::f64::consts::LN_2
            - decay * log_q_golden((1u64 << n) + n - 2);
        push_bound(&mut rows, "ones-blocks-geometric", "log:lower-burst-q", zeta, n, burst_q, burst_target);

        if n >= 2 {
            let aligned = (lambda_geometric(n) + n - 1) as f64;
            let liminf = aligned.ln().ln()
                - decay * geometric_logq[(lambda_geometric(n) - 1) as usize]
                - alpha * log_gap;
            push_bound(
                &mut rows,
                "ones-blocks-geometric",
                "log:liminf-upper",
                zeta,
                n,
                liminf,
                Some(0.0),
            );
        }
    }
    rows.push(
        SeriesRow::new(
            &config.theorem,
            map::R_FAREY,
            gamma,
            scale_at,
            "log:scale",
            ExtendedReal::Finite(scale_log.exp()),
        )
        .with_alpha(alpha)
        .with_normalized(scale_log),
    );
    Ok(ExperimentSeries { rows })
}

fn index_and_entry_rows(
    config: &ExperimentConfig,
    rule: &EntryRule,
    name: &str,
    lambda: &dyn Fn(u64) -> u64,
    ns: &[u64],
    rows: &mut Vec<SeriesRow>,
) -> Result<()> {
    for &n in ns {
        let at = lambda(n);
        rows.push(
            SeriesRow::new(
                &config.theorem,
                map::R_FAREY,
                0.0,
                n,
                "cf:lambda",
                ExtendedReal::Finite(at as f64),
            )
            .with_beta(name),
        );
        if at >= 2 {
            let entry = entry_u64(rule, at - 1)?;
            rows.push(
                SeriesRow::new(
                    &config.theorem,
                    map::R_FAREY,
                    0.0,
                    n,
                    "cf:marker",
                    ExtendedReal::Finite(entry as f64),
                )
                .with_beta(name)
                .with_target(2.0),
            );
        }
        let entry = entry_u64(rule, at)?;
        rows.push(
            SeriesRow::new(
                &config.theorem,
                map::R_FAREY,
                0.0,
                n,
                "cf:marker-unshifted",
                ExtendedReal::Finite(entry as f64),
            )
            .with_beta(name),
        );
        // Where the block-closing two actually sits relative to Λ(n):
        // scan outward — in both families a two lies within a couple of
        // indices of Λ(n), so this stops immediately.
        let mut nearest: Option<u64> = None;
        'scan: for d in 0..=at {
            for candidate in [at.checked_sub(d), Some(at + d)] {
                let Some(p) = candidate else { continue };
                if p >= 1 && entry_u64(rule, p)? == 2 {
                    nearest = Some(p);
                    break 'scan;
                }
            }
        }
        if let Some(p) = nearest {
            rows.push(
                SeriesRow::new(
                    &config.theorem,
                    map::R_FAREY,
                    0.0,
                    n,
                    "cf:nearest-two",
                    ExtendedReal::Finite(p as f64),
                )
                .with_beta(name)
                .with_normalized(p as f64 - at as f64),
            );
        }
    }
    Ok(())
}

fn orbit_rows(
    config: &ExperimentConfig,
    rule: &EntryRule,
    name: &str,
    lambda: &dyn Fn(u64) -> u64,
    two_gap: u64,
    ns: &[u64],
    gamma: f64,
    rows: &mut Vec<SeriesRow>,
) -> Result<()> {
    // Consuming the digits through the block-closing two costs
    // Λ(n) + n − (two_gap − 2) steps, so two steps before that the orbit
    // point has the two in front and sits left of 1/2; at Λ(n) + n + 1 it
    // is inside the following ones run and hugs the all-ones point.
    let mut targets: Vec<u64> = Vec::new();
    for &n in ns {
        let at = lambda(n) + n;
        if at >= two_gap {
            targets.push(at - two_gap);
        }
        targets.push(at + 1);
    }
    targets.sort_unstable();
    targets.dedup();
    let mut walker = ShiftWalker::new(rule)?;
    let mut step = 0u64;
    for &j in &targets {
        while step < j {
            walker.step()?;
            step += 1;
        }
        let value = walker.value()?;
        rows.push(
            SeriesRow::new(
                &config.theorem,
                map::R_FAREY,
                0.0,
                j,
                "shift:orbit",
                ExtendedReal::Finite(value),
            )
            .with_beta(name)
            .with_normalized((value - gamma).abs()),
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Entry score (tag 3.3b).
// ---------------------------------------------------------------------------

/// The per-index scores governing the scaled tail at a rational observation
/// point `1/k`, plus a late-window maximum as the limsup stand-in.
///
/// Rows carry target `0` exactly when the expansion's summability
/// certificate settles decay (bounded entries, or exponent below `1/2`);
/// otherwise the numbers are reported without a verdict.
///
/// # Errors
///
/// Requires a positive `k` and an exponent in `(0, 1)`; an expansion that
/// ends before the requested index range is an input error.
pub fn run_entry_score(config: &ExperimentConfig) -> Result<ExperimentSeries> {
    let alpha = config.alpha.ok_or_else(|| invalid("need alpha"))?;
    let spec = config.beta.clone().unwrap_or_else(|| "arith:1,1".to_string());
    let beta = ContinuedFraction::parse(&spec)?;
    let k = config.k.unwrap_or(1);
    if k == 0 {
        return Err(invalid("the observation index k must be positive"));
    }
    let j_max = config.j_max.unwrap_or(30);
    let report = cf::summability_report(&beta, alpha)?;
    let settled_zero = report.summable == Some(true);
    let x = 1.0 / k as f64;
    let mut rows = Vec::new();
    let mut scores: Vec<(u64, f64)> = Vec::new();
    for j in 1..=j_max {
        let Some(score) = cf::s_score(&beta, k, j, alpha)? else { continue };
        let mut row = SeriesRow::new(
            &config.theorem,
            map::R_FAREY,
            x,
            j,
            "cf",
            ExtendedReal::Finite(score.value),
        )
        .with_alpha(alpha)
        .with_beta(&spec)
        .with_normalized(score.log_value);
        if settled_zero {
            row = row.with_target(0.0);
        }
        rows.push(row);
        scores.push((j, score.value));
    }
    let cut = j_max / 2;
    let window_max = scores
        .iter()
        .filter(|(j, _)| *j >= cut)
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    if window_max.is_finite() {
        let mut row = SeriesRow::new(
            &config.theorem,
            map::R_FAREY,
            x,
            j_max,
            "cf:limsup-proxy",
            ExtendedReal::Finite(window_max),
        )
        .with_alpha(alpha)
        .with_beta(&spec);
        if settled_zero {
            row = row.with_target(0.0);
        }
        rows.push(row);
    }
    Ok(ExperimentSeries { rows })
}

// ---------------------------------------------------------------------------
// Diagnostics.
// ---------------------------------------------------------------------------

/// Wandering-rate, singular-cover, and summability tables.
///
/// The wandering rows compare the closed-form rate against its profile
/// (`ln(n+1)` in the slow regime, the saturating mass otherwise).  When a
/// singularity and exponent are configured, the cover rows list the
/// shrinking radii around the orbit cylinder — the scale on which the
/// scaled iterates may legitimately fail to converge — with the running
/// cover sum at a small test dimension in `normalized`, and the
/// summability rows echo the expansion's partial-sum table and
/// certificate.
///
/// # Errors
///
/// Rejects parameters outside their domains.
pub fn run_diagnostics(config: &ExperimentConfig) -> Result<ExperimentSeries> {
    let r = config.r;
    if !(0.0..=1.0).contains(&r) {
        return Err(invalid(format!("map parameter {r} outside [0, 1]")));
    }
    let schedule =
        config.schedule.clone().unwrap_or(Schedule::Dyadic { from: 1, to: 4096 });
    let ns = schedule.depths()?;
    let mut rows = Vec::new();
    for &n in &ns {
        let w = transfer::wandering_rate(r, n);
        let target =
            if r == map::R_FAREY { ((n + 1) as f64).ln() } else { 1.0 };
        rows.push(
            SeriesRow::new(
                &config.theorem,
                r,
                0.0,
                n,
                "closed-form",
                ExtendedReal::Finite(w),
            )
            .with_target(target)
            .with_normalized(w - target),
        );
    }
    let (Some(spec), Some(alpha)) = (&config.beta, config.alpha) else {
        return Ok(ExperimentSeries { rows });
    };
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("exponent {alpha} outside (0, 1)")));
    }
    let beta = parse_point(spec)?;
    cover_rows(config, r, &beta, alpha, &ns, &mut rows)?;
    if r == map::R_FAREY {
        let report = cf::summability_report(&beta.cf, alpha)?;
        for (eps, sum, used) in &report.partial_sums {
            rows.push(
                SeriesRow::new(
                    &config.theorem,
                    r,
                    0.0,
                    *used,
                    "cf:partial-sum",
                    ExtendedReal::Finite(*sum),
                )
                .with_alpha(alpha)
                .with_beta(&beta.text)
                .with_normalized(*eps),
            );
        }
        if let Some(summable) = report.summable {
            rows.push(
                SeriesRow::new(
                    &config.theorem,
                    r,
                    0.0,
                    0,
                    "cf:certificate",
                    ExtendedReal::Finite(f64::from(u8::from(summable))),
                )
                .with_alpha(alpha)
                .with_beta(&beta.text),
            );
        }
    }
    Ok(ExperimentSeries { rows })
}

/// Radii of the shrinking neighborhoods around the depth-`n` orbit cylinder
/// outside of which the scaled iterates converge; their cover sum at a small
/// test dimension shows the exceptional set collapsing.
fn cover_rows(
    config: &ExperimentConfig,
    r: f64,
    beta: &PointSpec,
    alpha: f64,
    ns: &[u64],
    rows: &mut Vec<SeriesRow>,
) -> Result<()> {
    const TEST_DIMENSION: f64 = 0.1;
    let mut cover_sum = 0.0;
    if r < map::R_FAREY {
        let log_factor = (2.0 - r).ln() * (1.0 - 1.0 / alpha);
        for &n in ns {
            let log_radius = n as f64 * log_factor;
            cover_sum += (TEST_DIMENSION
                * (std::f64::consts::LN_2 + log_radius))
                .exp();
            rows.push(
                SeriesRow::new(
                    &config.theorem,
                    r,
                    0.0,
                    n,
                    "cover:s=0.1",
                    ExtendedReal::Finite(log_radius.exp()),
                )
                .with_alpha(alpha)
                .with_beta(&beta.text)
                .with_normalized(cover_sum),
            );
        }
        return Ok(());
    }
    // Slow regime: the radius follows the itinerary's convergent
    // denominator, so walk the digit spelling alongside the schedule.
    let mut walk = cf::CodingWalk::new(&beta.cf)?;
    let mut at = 0u64;
    for &n in ns {
        while at < n {
            if walk.advance().is_err() {
                return Ok(());
            }
            at += 1;
        }
        if n < 2 {
            continue;
        }
        let book = walk.bookkeeping();
        let log_q = log_abs_bigint(walk.convergents().q(i64::try_from(book.m).unwrap_or(0)));
        let log_radius =
            (n as f64).ln().ln() / alpha - 2.0 * (1.0 / alpha - 1.0) * log_q;
        cover_sum +=
            (TEST_DIMENSION * (std::f64::consts::LN_2 + log_radius)).exp();
        rows.push(
            SeriesRow::new(
                &config.theorem,
                r,
                0.0,
                n,
                "cover:s=0.1",
                ExtendedReal::Finite(log_radius.exp()),
            )
            .with_alpha(alpha)
            .with_beta(&beta.text)
            .with_normalized(cover_sum),
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(theorem: &str) -> ExperimentConfig {
        ExperimentConfig {
            theorem: theorem.to_string(),
            r: map::R_FAREY,
            alpha: None,
            beta: None,
            observable: None,
            points: Vec::new(),
            schedule: None,
            backend: None,
            k: None,
            j_max: None,
            format: None,
            out: None,
        }
    }

    #[test]
    fn schedule_forms_parse_and_validate() {
        assert_eq!(
            Schedule::parse("8..32:8").unwrap().depths().unwrap(),
            vec![8, 16, 24, 32]
        );
        assert_eq!(
            Schedule::parse("dyadic:1..64").unwrap().depths().unwrap(),
            vec![1, 2, 4, 8, 16, 32, 64]
        );
        assert_eq!(Schedule::parse("3,5,9").unwrap().depths().unwrap(), vec![3, 5, 9]);
        assert!(Schedule::Explicit(vec![5, 3]).depths().is_err());
        assert!(Schedule::Explicit(vec![0, 3]).depths().is_err());
        assert!(Schedule::Linear { from: 1, to: 9, step: 0 }.depths().is_err());
        assert!(Schedule::parse("junk..more").is_err());
    }

    #[test]
    fn unknown_tags_and_deep_trees_are_rejected() {
        let err = run(&base("9.9")).unwrap_err();
        assert_eq!(err.exit_code(), 2);

        let mut config = base("3.1");
        config.r = 0.5;
        config.alpha = Some(0.4);
        config.beta = Some("1/3".into());
        config.schedule = Some(Schedule::Explicit(vec![30]));
        let err = run(&config).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn interior_series_tracks_the_density_target() {
        let mut config = base("3.1");
        config.r = 0.5;
        config.alpha = Some(0.4);
        config.beta = Some("1/3".into());
        config.points = vec![0.2];
        config.schedule = Some(Schedule::Explicit(vec![4, 8, 12]));
        let series = run(&config).unwrap();
        let values: Vec<&SeriesRow> =
            series.rows.iter().filter(|row| row.backend == "tree").collect();
        assert_eq!(values.len(), 3);
        let miss = |row: &SeriesRow| (row.normalized.unwrap() - 1.0).abs();
        assert!(miss(values[2]) < miss(values[0]));
        assert!(miss(values[2]) < 0.2);
        let fit = series.rows.iter().find(|row| row.backend == "tree:fit").unwrap();
        let ratio = fit.value.as_f64();
        assert!(ratio > 0.0 && ratio < 1.0, "ratio {ratio}");
    }

    #[test]
    fn orbit_points_are_flagged_and_skip_the_fit() {
        let mut config = base("3.1");
        config.r = 0.5;
        config.alpha = Some(0.4);
        config.beta = Some("1/3".into());
        // 1/3 maps to 1/2 at this parameter: (2−r)x/(1−rx) = 0.5/... = 0.6.
        let image = map::forward(0.5, 1.0 / 3.0);
        config.points = vec![image];
        config.schedule = Some(Schedule::Explicit(vec![2, 4]));
        let series = run(&config).unwrap();
        assert!(series.rows.iter().all(|row| row.backend == "tree:omega"));
    }

    #[test]
    fn grid_series_is_ln_scaled_with_the_invariant_mass_target() {
        let mut config = base("3.2");
        config.observable = Some("linear:0.5,0.5;1,1".into());
        config.backend = Some("grid:1024".into());
        config.points = vec![0.6];
        config.schedule = Some(Schedule::Explicit(vec![16, 256]));
        let series = run(&config).unwrap();
        assert_eq!(series.rows.len(), 2);
        for row in &series.rows {
            assert_eq!(row.backend, "grid:1024");
            assert!((row.target.unwrap() - 0.5).abs() < 1e-9);
            assert!(row.value.as_f64() > 0.0);
        }
    }

    #[test]
    fn singular_grid_rows_are_capped_and_untargeted() {
        let mut config = base("3.2");
        config.alpha = Some(0.5);
        config.beta = Some("sqrt2-1".into());
        config.backend = Some("grid:512".into());
        config.points = vec![0.3];
        config.schedule = Some(Schedule::Explicit(vec![8]));
        let series = run(&config).unwrap();
        let row = &series.rows[0];
        assert_eq!(row.backend, "grid:512:capped");
        assert!(row.target.is_none());
        assert!(row.value.as_f64().is_finite());
    }

    #[test]
    fn origin_contrast_for_a_rational_singularity() {
        let mut config = base("3.2");
        config.backend = Some("cf".into());
        config.alpha = Some(0.5);
        config.beta = Some("2/3".into());
        config.schedule = Some(Schedule::Explicit(vec![8]));
        let series = run(&config).unwrap();
        let full: Vec<&SeriesRow> =
            series.rows.iter().filter(|row| row.backend == "tree").collect();
        let remainder: Vec<&SeriesRow> =
            series.rows.iter().filter(|row| row.backend == "tree:remainder").collect();
        assert_eq!(full.len(), 8);
        assert_eq!(remainder.len(), 8);
        // The spelling of 2/3 has three digits: raw rows go symbolic there.
        assert!(!full[1].value.is_infinite());
        assert!(full[3].value.is_infinite());
        assert!(full[7].value.is_infinite());
        for row in remainder {
            assert!(!row.value.is_infinite());
            assert_eq!(row.target, Some(0.0));
        }
    }

    #[test]
    fn orbit_cycle_rows_alternate_between_symbolic_and_decaying() {
        let mut config = base("3.2");
        config.backend = Some("cf".into());
        config.alpha = Some(0.5);
        config.beta = Some("sqrt2-1".into());
        config.schedule = Some(Schedule::Explicit(vec![512]));
        let series = run(&config).unwrap();
        let beta = 2.0f64.sqrt() - 1.0;
        let image = 2.0f64.sqrt() / 2.0;
        for row in series.rows.iter().filter(|row| row.backend == "cf") {
            let matched = if (row.x - beta).abs() < 1e-12 {
                row.n % 2 == 0
            } else {
                assert!((row.x - image).abs() < 1e-12);
                row.n % 2 == 1
            };
            assert_eq!(row.value.is_infinite(), matched, "n = {}, x = {}", row.n, row.x);
        }
        let fits: Vec<&SeriesRow> =
            series.rows.iter().filter(|row| row.backend == "cf:fit").collect();
        assert_eq!(fits.len(), 2);
        for fit in fits {
            assert_eq!(fit.target, Some(-1.0));
            assert!((fit.value.as_f64() + 1.0).abs() < 0.3, "slope {:?}", fit.value);
        }
    }

    #[test]
    fn limsup_report_rejects_rule_expansions() {
        let mut config = base("3.2");
        config.backend = Some("cf".into());
        config.alpha = Some(0.5);
        config.beta = Some("ones-blocks-linear".into());
        assert!(matches!(run(&config), Err(Error::Unsupported(_))));
    }

    #[test]
    fn witness_markers_separate_the_two_families() {
        let mut config = base("3.3a");
        config.alpha = Some(0.6);
        config.schedule = Some(Schedule::Linear { from: 2, to: 8, step: 1 });
        let series = run(&config).unwrap();
        for row in series.rows.iter().filter(|row| row.backend == "cf:marker") {
            let expected = if row.beta == "ones-blocks-geometric" { 2.0 } else { 1.0 };
            assert_eq!(row.value.as_f64(), expected, "{} n={}", row.beta, row.n);
        }
        // The unshifted column shows the quadratic-gap two sitting at Λ(n).
        for row in series.rows.iter().filter(|row| row.backend == "cf:marker-unshifted") {
            let expected = if row.beta == "ones-blocks-linear" { 2.0 } else { 1.0 };
            assert_eq!(row.value.as_f64(), expected, "{} n={}", row.beta, row.n);
        }
    }

    #[test]
    fn witness_orbit_bursts_hug_the_all_ones_point() {
        let mut config = base("3.3a");
        config.alpha = Some(0.6);
        config.schedule = Some(Schedule::Linear { from: 3, to: 7, step: 1 });
        let series = run(&config).unwrap();
        let bursts: Vec<&SeriesRow> = series
            .rows
            .iter()
            .filter(|row| {
                row.backend == "shift:orbit" && row.beta == "ones-blocks-geometric"
            })
            .collect();
        // Rows alternate aligned (left of 1/2) and burst (near γ) steps.
        for pair in bursts.chunks(2) {
            assert!(pair[0].value.as_f64() < 0.5);
            assert!(pair[1].normalized.unwrap() < 1e-2);
        }
    }

    #[test]
    fn witness_bounds_decay_in_the_small_exponent_regime() {
        let mut config = base("3.3a");
        config.alpha = Some(0.3);
        config.schedule = Some(Schedule::Linear { from: 2, to: 9, step: 1 });
        let series = run(&config).unwrap();
        for kind in
            ["log:upper-matched", "log:upper-offset", "log:lower-burst", "log:liminf-upper"]
        {
            for family in ["ones-blocks-linear", "ones-blocks-geometric"] {
                let logs: Vec<f64> = series
                    .rows
                    .iter()
                    .filter(|row| row.backend == kind && row.beta == family)
                    .map(|row| row.normalized.unwrap())
                    .collect();
                if logs.is_empty() {
                    continue;
                }
                assert!(
                    logs.last().unwrap() < &logs[0],
                    "{kind} {family} fails to decay: {logs:?}"
                );
            }
        }
    }

    #[test]
    fn burst_bounds_grow_past_the_half_exponent() {
        let mut config = base("3.3a");
        config.alpha = Some(0.75);
        config.schedule = Some(Schedule::Linear { from: 2, to: 8, step: 1 });
        let series = run(&config).unwrap();
        for kind in ["log:lower-burst", "log:lower-burst-q"] {
            let rows: Vec<&SeriesRow> =
                series.rows.iter().filter(|row| row.backend == kind).collect();
            assert!(!rows.is_empty());
            for pair in rows.windows(2) {
                assert!(
                    pair[1].normalized.unwrap() > pair[0].normalized.unwrap(),
                    "{kind} fails to grow"
                );
            }
            for row in rows {
                assert_eq!(row.target, Some(f64::INFINITY));
            }
        }
    }

    #[test]
    fn scale_constant_is_the_golden_ratio() {
        let mut config = base("3.3a");
        config.alpha = Some(0.5);
        config.schedule = Some(Schedule::Linear { from: 1, to: 5, step: 1 });
        let series = run(&config).unwrap();
        let row = series.rows.iter().find(|row| row.backend == "log:scale").unwrap();
        assert_eq!(row.n, 1);
        assert!((row.value.as_f64() - (1.0 + 5.0f64.sqrt()) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn entry_score_matches_a_hand_computation() {
        let mut config = base("3.3b");
        config.alpha = Some(0.5);
        let series = run(&config).unwrap();
        // Increasing entries 1, 2, 3, …: at index three the score is
        // √4 · ln(1+2+3−1) / q₃ with q₃ = 10.
        let row = series.rows.iter().find(|row| row.n == 3 && row.backend == "cf").unwrap();
        assert!((row.value.as_f64() - 2.0 * 5.0f64.ln() / 10.0).abs() < 1e-12);
        // At exponent 1/2 no certificate settles the series: no verdict.
        assert!(row.target.is_none());
        let last = series.rows.iter().rfind(|row| row.backend == "cf").unwrap();
        assert!(last.value.as_f64() < 1e-6);
        let proxy =
            series.rows.iter().find(|row| row.backend == "cf:limsup-proxy").unwrap();
        assert!(proxy.value.as_f64() < 1e-6);
    }

    #[test]
    fn entry_score_certificate_sets_the_target() {
        let mut config = base("3.3b");
        config.alpha = Some(0.4);
        config.j_max = Some(12);
        let series = run(&config).unwrap();
        assert!(series.rows.iter().all(|row| row.target == Some(0.0)));
    }

    #[test]
    fn diagnostics_cover_wandering_and_summability() {
        let mut config = base("diagnostics");
        config.alpha = Some(0.5);
        config.beta = Some("sqrt2-1".into());
        config.schedule = Some(Schedule::Dyadic { from: 1, to: 64 });
        let series = run(&config).unwrap();
        for row in series.rows.iter().filter(|row| row.backend == "closed-form") {
            assert_eq!(row.normalized, Some(0.0));
        }
        let covers: Vec<&SeriesRow> =
            series.rows.iter().filter(|row| row.backend == "cover:s=0.1").collect();
        assert!(covers.len() >= 4);
        assert!(covers.last().unwrap().value.as_f64() < covers[0].value.as_f64());
        let partial: Vec<&SeriesRow> =
            series.rows.iter().filter(|row| row.backend == "cf:partial-sum").collect();
        assert_eq!(partial.len(), 2);
        let certificate =
            series.rows.iter().find(|row| row.backend == "cf:certificate").unwrap();
        assert_eq!(certificate.value.as_f64(), 1.0);
    }

    #[test]
    fn identical_configs_reproduce_identical_tables() {
        let mut config = base("3.3a");
        config.alpha = Some(0.75);
        config.schedule = Some(Schedule::Linear { from: 1, to: 6, step: 1 });
        assert_eq!(run(&config).unwrap().to_csv(), run(&config).unwrap().to_csv());

        let mut config = base("3.1");
        config.r = 0.5;
        config.alpha = Some(0.4);
        config.beta = Some("1/3".into());
        config.points = vec![0.2, 0.7];
        config.schedule = Some(Schedule::Explicit(vec![6, 10]));
        assert_eq!(run(&config).unwrap().to_csv(), run(&config).unwrap().to_csv());
    }

    #[test]
    fn configs_round_trip_through_json() {
        let text = r#"{
            "theorem": "3.3b",
            "alpha": 0.5,
            "beta": "arith:1,1",
            "k": 2,
            "j_max": 10,
            "schedule": {"linear": {"from": 1, "to": 5, "step": 1}}
        }"#;
        let config: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(config.theorem, "3.3b");
        assert_eq!(config.k, Some(2));
        let series = run(&config).unwrap();
        assert!((series.rows[0].x - 0.5).abs() < 1e-15);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"theorem":"3.1","junk":1}"#).is_err());
    }
}
