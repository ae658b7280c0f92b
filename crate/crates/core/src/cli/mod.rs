//! The `hosi` command-line front end.
//!
//! Four subcommands share one set of run flags: `estimate` samples,
//! `oracle` prints exact values, `compare` does both and reports z-scores,
//! and `transform` applies Möbius inversion to a CSV of closed indices.

pub mod external;
pub mod function;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::mobius::{moebius_transform, zeta_transform, SubsetMap};
use crate::model::{enumerate_subsets, BlackBox, Family, SubsetFilter, VarSubset};
use crate::moment::{estimate_centered, estimate_difference, estimate_total_effect};
use crate::oracles::IndexOracle;
use crate::sampling::{derive_seed, PickFreezeDesign, PointSet};
use crate::spectral::{estimate_ult_spectral, estimate_weighted_spectral, SpectralDesign, SpectralForm};
use crate::walsh::{estimate_ult_walsh, estimate_weighted_walsh, MAX_BASE};

pub use function::FunctionSpec;

const MAX_ORDER: u32 = 16;

#[derive(Debug, Parser)]
#[command(name = "hosi", version, about = "Higher-order Sobol' indices of black-box functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate indices by sampling.
    Estimate(RunArgs),
    /// Print exact values for functions with closed forms.
    Oracle(RunArgs),
    /// Estimate, then score each estimate against the exact value.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Largest acceptable |z| before the exit code turns nonzero.
        #[arg(long, default_value_t = 4.0)]
        z_max: f64,
    },
    /// Turn closed indices into components (or back, with --inverse).
    Transform(TransformArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FamilyArg {
    Moment,
    Fourier,
    Walsh,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorArg {
    /// Moment family: products minus fully independent products.
    Difference,
    /// Moment family: products minus the pooled mean to the power p.
    Centered,
    /// Moment family, p = 2: the total index of the subset.
    Total,
    /// Spectral families: p cyclic blocks.
    Full,
    /// Spectral families: p - 1 blocks plus the alternating closure.
    Reduced,
    /// Spectral families, odd p: the Dirichlet-weighted measure.
    Dirichlet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Closed indices `ul-tau_u`.
    Index,
    /// ANOVA-style components `sigma_u`, by Möbius inversion.
    Component,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PointsArg {
    Mc,
    Lattice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Args)]
pub struct RunArgs {
    /// Function to analyse, e.g. `rect:eps=0.1,0.2` or `extern:./model.sh`.
    #[arg(long, short = 'f')]
    pub function: String,
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    #[arg(long, value_enum, default_value_t = FamilyArg::Moment)]
    pub family: FamilyArg,
    /// Walsh base.
    #[arg(long, default_value_t = 2)]
    pub base: u32,
    /// Defaults to `difference` (moment) or `full` (spectral).
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorArg>,
    /// `all`, `singletons`, `pairs`, or explicit sets like `{1,3};{2}`.
    #[arg(long, default_value = "singletons")]
    pub subsets: String,
    #[arg(long, value_enum, default_value_t = Quantity::Index)]
    pub quantity: Quantity,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, value_enum, default_value_t = PointsArg::Mc)]
    pub points: PointsArg,
    /// Dirichlet cutoff N (Fourier) or level m (Walsh).
    #[arg(long)]
    pub cutoff: Option<u32>,
    /// Dirichlet modulation (Fourier) or offset (Walsh), one per coordinate.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub modulation: Vec<i64>,
    /// Seconds to wait for an external evaluator's reply.
    #[arg(long, default_value_t = 60.0)]
    pub timeout: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct TransformArgs {
    /// CSV with columns `subset,value[,std_error]`; `#` lines are skipped.
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    /// Number of variables; inferred from the largest index when omitted.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Components to closed indices instead.
    #[arg(long)]
    pub inverse: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Everything needed to reproduce a run; written at the top of each output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub function: String,
    pub p: u32,
    pub family: Family,
    pub estimator: EstimatorArg,
    pub subsets: String,
    pub quantity: Quantity,
    pub n: usize,
    pub seed: u64,
    pub workers: usize,
    pub points: PointsArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<u32>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub modulation: Vec<i64>,
    pub timeout: f64,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_max: Option<f64>,
}

fn field(name: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("--{name}: {msg}"))
}

impl RunConfig {
    /// Checks every field that does not need the function itself.
    pub fn from_args(command: &str, args: &RunArgs, z_max: Option<f64>) -> Result<Self> {
        if args.p < 2 || args.p > MAX_ORDER {
            return Err(field("p", format!("must be in 2..={MAX_ORDER}, got {}", args.p)));
        }
        if command != "oracle" && args.n < 2 {
            return Err(field("n", format!("need at least 2 replicates, got {}", args.n)));
        }
        if args.workers == 0 {
            return Err(field("workers", "must be at least 1"));
        }
        if !(args.timeout.is_finite() && args.timeout > 0.0) {
            return Err(field("timeout", format!("must be positive, got {}", args.timeout)));
        }
        if let Some(z) = z_max {
            if !(z.is_finite() && z > 0.0) {
                return Err(field("z-max", format!("must be positive, got {z}")));
            }
        }
        let family = match args.family {
            FamilyArg::Moment => Family::Moment,
            FamilyArg::Fourier => Family::Fourier,
            FamilyArg::Walsh => {
                if args.base < 2 || args.base > MAX_BASE {
                    return Err(field("base", format!("must be in 2..={MAX_BASE}, got {}", args.base)));
                }
                Family::Walsh { base: args.base }
            }
        };
        let estimator = args.estimator.unwrap_or(match family {
            Family::Moment => EstimatorArg::Difference,
            _ => EstimatorArg::Full,
        });
        let moment_only = matches!(
            estimator,
            EstimatorArg::Difference | EstimatorArg::Centered | EstimatorArg::Total
        );
        if moment_only != (family == Family::Moment) {
            return Err(field(
                "estimator",
                format!("`{estimator:?}` does not apply to the {} family", family.tag()).to_lowercase(),
            ));
        }
        if estimator == EstimatorArg::Total && args.p != 2 {
            return Err(field("estimator", "the total index is defined for p = 2"));
        }
        if estimator == EstimatorArg::Dirichlet {
            if args.p % 2 == 0 {
                return Err(field("p", "the Dirichlet-weighted measure needs odd p"));
            }
            if args.cutoff.is_none() {
                return Err(field("cutoff", "required by the dirichlet estimator"));
            }
            if args.modulation.iter().any(|&m| m < 0) && family != Family::Fourier {
                return Err(field("modulation", "Walsh offsets are nonnegative"));
            }
        } else if args.cutoff.is_some() || !args.modulation.is_empty() {
            return Err(field("cutoff", "only the dirichlet estimator takes a cutoff or modulation"));
        }
        if args.quantity == Quantity::Component
            && matches!(estimator, EstimatorArg::Total | EstimatorArg::Dirichlet)
        {
            return Err(field("quantity", "components need a closed-index estimator"));
        }
        let cfg = RunConfig {
            command: command.to_string(),
            function: args.function.clone(),
            p: args.p,
            family,
            estimator,
            subsets: args.subsets.trim().to_string(),
            quantity: args.quantity,
            n: args.n,
            seed: args.seed,
            workers: args.workers,
            points: args.points,
            cutoff: args.cutoff,
            modulation: args.modulation.clone(),
            timeout: args.timeout,
            format: args.format,
            z_max,
        };
        // explicit sets are checked against the dimension once it is known
        if !matches!(cfg.subsets.as_str(), "all" | "singletons" | "pairs") && !cfg.subsets.starts_with('{') {
            cfg.select_subsets(1)?;
        }
        Ok(cfg)
    }

    /// Resolves the selector for a `dim`-variable function.
    pub fn select_subsets(&self, dim: usize) -> Result<Vec<VarSubset>> {
        match self.subsets.as_str() {
            "all" => enumerate_subsets(dim, SubsetFilter::Nonempty)
                .map_err(|e| field("subsets", format!("`all` needs d <= 20: {e}"))),
            "singletons" => enumerate_subsets(dim, SubsetFilter::Singletons),
            "pairs" => Ok(enumerate_subsets(dim, SubsetFilter::UpToSize(2))?
                .into_iter()
                .filter(|u| u.len() == 2)
                .collect()),
            text if text.starts_with('{') => {
                let mut out: Vec<VarSubset> = Vec::new();
                for part in text.split(';') {
                    let u = VarSubset::parse(dim, part.trim())
                        .map_err(|e| field("subsets", format!("`{}`: {e}", part.trim())))?;
                    if u.is_empty() {
                        return Err(field("subsets", "the empty set carries no index"));
                    }
                    if !out.contains(&u) {
                        out.push(u);
                    }
                }
                Ok(out)
            }
            other => Err(field(
                "subsets",
                format!("expected all, singletons, pairs or {{i,j}};{{k}}, got `{other}`"),
            )),
        }
    }

    fn point_set(&self) -> PointSet {
        match self.points {
            PointsArg::Mc => PointSet::MonteCarlo,
            PointsArg::Lattice => PointSet::ShiftedLattice,
        }
    }

    fn modulation_for(&self, dim: usize) -> Result<Vec<i64>> {
        match self.modulation.len() {
            0 => Ok(vec![0; dim]),
            len if len == dim => Ok(self.modulation.clone()),
            len => Err(field("modulation", format!("{len} entries for a {dim}-variable function"))),
        }
    }
}

/// One output line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub subset: String,
    pub family: String,
    pub p: u32,
    pub estimator: String,
    pub n: usize,
    pub seed: u64,
    pub value: f64,
    pub std_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
}

/// The rows of a run together with its configuration.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub config: serde_json::Value,
    pub notes: Vec<String>,
    pub rows: Vec<Row>,
}

struct Estimate {
    subset: VarSubset,
    value: f64,
    std_error: f64,
    tag: String,
}

fn estimate_one(cfg: &RunConfig, f: &dyn BlackBox, u: VarSubset, exec: &Executor) -> Result<Estimate> {
    let (d, p, n) = (f.dim(), cfg.p as usize, cfg.n);
    let seed = derive_seed(cfg.seed, u.mask());
    let points = cfg.point_set();
    let (value, std_error, tag) = match (cfg.family, cfg.estimator) {
        (Family::Moment, est) => {
            let design = PickFreezeDesign::with_points(seed, n, d, p, u, points)?;
            let r = match est {
                EstimatorArg::Centered => estimate_centered(f, &design, exec)?,
                EstimatorArg::Total => estimate_total_effect(f, &design, exec)?,
                _ => estimate_difference(f, &design, exec)?,
            };
            (r.value, r.std_error, r.estimator.tag().to_string())
        }
        (family, EstimatorArg::Dirichlet) => {
            let design = SpectralDesign::with_points(seed, n, d, p, u, SpectralForm::Full, points)?;
            let cutoff = cfg.cutoff.unwrap_or(0);
            let modulation = cfg.modulation_for(d)?;
            let r = match family {
                Family::Walsh { base } => {
                    let offset: Vec<u64> = modulation.iter().map(|&m| m as u64).collect();
                    estimate_weighted_walsh(f, base, cutoff, &offset, &design, exec)?
                }
                _ => estimate_weighted_spectral(f, cutoff, &modulation, &design, exec)?,
            };
            (r.value, r.std_error, r.variant.tag())
        }
        (family, est) => {
            let form = if est == EstimatorArg::Reduced {
                SpectralForm::Reduced
            } else {
                SpectralForm::Full
            };
            let design = SpectralDesign::with_points(seed, n, d, p, u, form, points)?;
            let r = match family {
                Family::Walsh { base } => estimate_ult_walsh(f, base, &design, exec)?,
                _ => estimate_ult_spectral(f, &design, exec)?,
            };
            (r.value, r.std_error, r.variant.tag())
        }
    };
    Ok(Estimate {
        subset: u,
        value,
        std_error,
        tag,
    })
}

/// Downward closure of `targets`, without the empty set.
fn closure(targets: &[VarSubset]) -> Vec<VarSubset> {
    let mut out: Vec<VarSubset> = targets
        .iter()
        .flat_map(|u| u.subsets())
        .filter(|v| !v.is_empty())
        .collect();
    out.sort_by_key(|v| (v.len(), v.mask()));
    out.dedup();
    out
}

fn estimate_all(cfg: &RunConfig, f: &dyn BlackBox, targets: &[VarSubset]) -> Result<Vec<Estimate>> {
    let exec = Executor::new(cfg.workers);
    if cfg.estimator == EstimatorArg::Dirichlet {
        return Ok(vec![estimate_one(cfg, f, VarSubset::full(f.dim()), &exec)?]);
    }
    if cfg.quantity == Quantity::Index {
        return targets.iter().map(|&u| estimate_one(cfg, f, u, &exec)).collect();
    }
    let mut closed = SubsetMap::new(f.dim());
    let mut tag = String::new();
    for v in closure(targets) {
        let e = estimate_one(cfg, f, v, &exec)?;
        closed.insert(v, e.value, Some(e.std_error))?;
        tag = e.tag;
    }
    let comps = moebius_transform(&closed)?;
    targets
        .iter()
        .map(|&u| {
            let c = comps.get(u).expect("closure covers every target");
            Ok(Estimate {
                subset: u,
                value: c.value,
                std_error: c.std_error.unwrap_or(0.0),
                tag: format!("moebius({tag})"),
            })
        })
        .collect()
}

fn exact_one(cfg: &RunConfig, oracle: &dyn IndexOracle, u: VarSubset) -> Result<f64> {
    let p = cfg.p;
    match (cfg.estimator, cfg.quantity) {
        (EstimatorArg::Total, _) => {
            let full = VarSubset::full(u.dim());
            Ok(oracle.moment_ult(full, 2)? - oracle.moment_ult(u.complement(), 2)?)
        }
        (EstimatorArg::Dirichlet, _) => {
            if cfg.modulation.iter().any(|&m| m != 0) {
                return Err(Error::Unsupported(
                    "exact weighted measures are available for zero modulation only".into(),
                ));
            }
            let cutoff = cfg.cutoff.unwrap_or(0);
            match cfg.family {
                Family::Walsh { base } => oracle.walsh_weighted(p, base, cutoff),
                _ => oracle.fourier_weighted(p, cutoff),
            }
        }
        (_, Quantity::Index) => oracle.ult(cfg.family, u, p),
        (_, Quantity::Component) => oracle.component(cfg.family, u, p),
    }
}

fn z_score(value: f64, std_error: f64, exact: f64) -> f64 {
    let diff = value - exact;
    if std_error > 0.0 {
        diff / std_error
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

fn notes(cfg: &RunConfig) -> Vec<String> {
    let mut out = Vec::new();
    if cfg.p % 2 == 1 && cfg.estimator != EstimatorArg::Dirichlet {
        out.push(format!(
            "p = {} is odd: indices may be negative and are reported unclamped",
            cfg.p
        ));
    }
    if cfg.family != Family::Moment && cfg.estimator != EstimatorArg::Dirichlet {
        out.push("spectral standard errors ignore the variability of the estimated mean".into());
    }
    if cfg.estimator == EstimatorArg::Centered {
        out.push("centered standard errors ignore the variability of the pooled mean".into());
    }
    if cfg.quantity == Quantity::Component && cfg.command != "oracle" {
        out.push("component standard errors assume independent closed-index estimates".into());
    }
    if cfg.estimator == EstimatorArg::Dirichlet {
        out.push("the Dirichlet-weighted measure covers all coordinates; --subsets is ignored".into());
    }
    out
}

/// Runs `estimate`, `oracle` or `compare` and returns the report plus
/// whether every |z| stayed within bounds.
pub fn run(cfg: &RunConfig) -> Result<(Report, bool)> {
    let spec = FunctionSpec::parse_with_timeout(&cfg.function, Duration::from_secs_f64(cfg.timeout))?;
    let f = spec.black_box();
    let targets = cfg.select_subsets(f.dim())?;
    if cfg.estimator == EstimatorArg::Dirichlet {
        cfg.modulation_for(f.dim())?;
    }
    let oracle = match cfg.command.as_str() {
        "estimate" => None,
        _ => Some(spec.oracle().ok_or_else(|| {
            Error::Unsupported(format!(
                "`{}` has no exact values; use `hosi estimate` instead",
                cfg.function
            ))
        })?),
    };
    let family = cfg.family.tag();
    let rows: Vec<Row> = if cfg.command == "oracle" {
        let oracle = oracle.expect("checked above");
        let subjects = if cfg.estimator == EstimatorArg::Dirichlet {
            vec![VarSubset::full(f.dim())]
        } else {
            targets
        };
        subjects
            .into_iter()
            .map(|u| {
                Ok(Row {
                    subset: u.to_string(),
                    family: family.clone(),
                    p: cfg.p,
                    estimator: "exact".into(),
                    n: 0,
                    seed: cfg.seed,
                    value: exact_one(cfg, oracle, u)?,
                    std_error: 0.0,
                    oracle: None,
                    z: None,
                })
            })
            .collect::<Result<_>>()?
    } else {
        estimate_all(cfg, f, &targets)?
            .into_iter()
            .map(|e| {
                let exact = oracle.map(|o| exact_one(cfg, o, e.subset)).transpose()?;
                Ok(Row {
                    subset: e.subset.to_string(),
                    family: family.clone(),
                    p: cfg.p,
                    estimator: e.tag,
                    n: cfg.n,
                    seed: cfg.seed,
                    value: e.value,
                    std_error: e.std_error,
                    oracle: exact,
                    z: exact.map(|x| z_score(e.value, e.std_error, x)),
                })
            })
            .collect::<Result<_>>()?
    };
    let z_max = cfg.z_max.unwrap_or(f64::INFINITY);
    let within = rows.iter().all(|r| r.z.is_none_or(|z| z.abs() <= z_max));
    let report = Report {
        config: serde_json::to_value(cfg)?,
        notes: notes(cfg),
        rows,
    };
    Ok((report, within))
}

/// Shortest round-trip decimal, switching to exponent form for very large
/// or very small magnitudes.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn header_lines(config: &serde_json::Value, notes: &[String]) -> String {
    let mut out = String::new();
    if let serde_json::Value::Object(map) = config {
        for (k, v) in map {
            let shown = match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            let _ = writeln!(out, "# {k}={shown}");
        }
    }
    for n in notes {
        let _ = writeln!(out, "# note: {n}");
    }
    out
}

/// Renders a report as CSV with `#` header lines.
pub fn render_csv(report: &Report) -> Result<String> {
    let mut out = header_lines(&report.config, &report.notes);
    let scored = report.rows.iter().any(|r| r.oracle.is_some());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["subset", "family", "p", "estimator", "n", "seed", "value", "std_error"];
    if scored {
        header.extend(["oracle", "z"]);
    }
    w.write_record(&header)?;
    for r in &report.rows {
        let mut rec = vec![
            r.subset.clone(),
            r.family.clone(),
            r.p.to_string(),
            r.estimator.clone(),
            r.n.to_string(),
            r.seed.to_string(),
            format_float(r.value),
            format_float(r.std_error),
        ];
        if scored {
            rec.push(r.oracle.map(format_float).unwrap_or_default());
            rec.push(r.z.map(format_float).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}

pub fn render_json(report: &Report) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

/// Reads `subset,value[,std_error]` columns from a CSV file.
pub fn read_subset_csv(text: &str, dim: Option<usize>) -> Result<SubsetMap> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let subset_col = col("subset").ok_or_else(|| Error::invalid("input has no `subset` column"))?;
    let value_col = col("value").ok_or_else(|| Error::invalid("input has no `value` column"))?;
    let se_col = col("std_error");
    let mut raw = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let number = |i: usize, what: &str| -> Result<f64> {
            let s = rec.get(i).unwrap_or("");
            s.parse::<f64>()
                .map_err(|_| Error::invalid(format!("record {}: bad {what} `{s}`", line + 1)))
        };
        let se = match se_col {
            Some(i) if !rec.get(i).unwrap_or("").is_empty() => Some(number(i, "std_error")?),
            _ => None,
        };
        raw.push((rec.get(subset_col).unwrap_or("").to_string(), number(value_col, "value")?, se));
    }
    let inferred = raw
        .iter()
        .flat_map(|(s, _, _)| {
            s.trim_matches(|c| c == '{' || c == '}')
                .split(',')
                .filter_map(|t| t.trim().parse::<usize>().ok())
                .collect::<Vec<_>>()
        })
        .max()
        .unwrap_or(0);
    let dim = dim.unwrap_or(inferred);
    if dim == 0 {
        return Err(field("dim", "cannot infer the number of variables from an empty input"));
    }
    let mut map = SubsetMap::new(dim);
    for (s, value, se) in raw {
        let u = VarSubset::parse(dim, &s)?;
        if map.get(u).is_some() && !u.is_empty() {
            return Err(Error::invalid(format!("subset {u} appears twice")));
        }
        map.insert(u, value, se)?;
    }
    Ok(map)
}

fn run_transform(args: &TransformArgs) -> Result<String> {
    let text = std::fs::read_to_string(&args.input)?;
    let input = read_subset_csv(&text, args.dim)?;
    let output = if args.inverse {
        zeta_transform(&input)?
    } else {
        moebius_transform(&input)?
    };
    let mut entries: Vec<_> = output.iter().filter(|(u, _)| !u.is_empty()).collect();
    entries.sort_by_key(|(u, _)| (u.len(), u.mask()));
    let direction = if args.inverse { "zeta" } else { "moebius" };
    match args.format {
        Format::Csv => {
            let mut out = format!("# input={}\n# transform={direction}\n# dim={}\n", args.input.display(), output.dim());
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["subset", "value", "std_error"])?;
            for (u, v) in entries {
                w.write_record([
                    u.to_string(),
                    format_float(v.value),
                    v.std_error.map(format_float).unwrap_or_default(),
                ])?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
            Ok(out)
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = entries
                .into_iter()
                .map(|(u, v)| {
                    serde_json::json!({"subset": u.to_string(), "value": v.value, "std_error": v.std_error})
                })
                .collect();
            let doc = serde_json::json!({
                "config": {"input": args.input.display().to_string(), "transform": direction, "dim": output.dim()},
                "rows": rows,
            });
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Executes a parsed command line and returns the process exit code:
/// 0 on success, 1 when `compare` finds an estimate beyond `--z-max`.
pub fn execute(cli: &Cli) -> Result<i32> {
    let (name, args, z_max) = match &cli.command {
        Command::Estimate(a) => ("estimate", a, None),
        Command::Oracle(a) => ("oracle", a, None),
        Command::Compare { run, z_max } => ("compare", run, Some(*z_max)),
        Command::Transform(t) => {
            emit(&run_transform(t)?, t.out.as_ref())?;
            return Ok(0);
        }
    };
    let cfg = RunConfig::from_args(name, args, z_max)?;
    let (report, within) = run(&cfg)?;
    let text = match cfg.format {
        Format::Csv => render_csv(&report)?,
        Format::Json => render_json(&report)?,
    };
    emit(&text, args.out.as_ref())?;
    Ok(if within { 0 } else { 1 })
}

/// Entry point for the `hosi` binary; errors exit with code 2.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(line: &str) -> Cli {
        Cli::try_parse_from(std::iter::once("hosi").chain(line.split_whitespace())).unwrap()
    }

    fn config(line: &str) -> Result<RunConfig> {
        match args(line).command {
            Command::Estimate(a) => RunConfig::from_args("estimate", &a, None),
            _ => unreachable!(),
        }
    }

    #[test]
    fn defaults_follow_the_family() {
        assert_eq!(config("estimate -f rect:eps=0.1").unwrap().estimator, EstimatorArg::Difference);
        let c = config("estimate -f rect:eps=0.1 --family walsh --base 3").unwrap();
        assert_eq!(c.estimator, EstimatorArg::Full);
        assert_eq!(c.family, Family::Walsh { base: 3 });
    }

    #[test]
    fn field_errors_name_the_flag() {
        let cases = [
            ("estimate -f rect:eps=0.1 --p 1", "--p"),
            ("estimate -f rect:eps=0.1 --n 1", "--n"),
            ("estimate -f rect:eps=0.1 --workers 0", "--workers"),
            ("estimate -f rect:eps=0.1 --estimator full", "--estimator"),
            ("estimate -f rect:eps=0.1 --family fourier --estimator dirichlet --p 3", "--cutoff"),
            ("estimate -f rect:eps=0.1 --family fourier --estimator dirichlet --cutoff 1", "--p"),
            ("estimate -f rect:eps=0.1 --subsets some", "--subsets"),
            ("estimate -f rect:eps=0.1 --family walsh --base 1", "--base"),
        ];
        for (line, flag) in cases {
            let msg = config(line).unwrap_err().to_string();
            assert!(msg.contains(flag), "{line}: {msg}");
        }
    }

    #[test]
    fn selectors() {
        let c = config("estimate -f rect:eps=0.1 --subsets pairs").unwrap();
        let pairs = c.select_subsets(4).unwrap();
        assert_eq!(pairs.len(), 6);
        assert!(pairs.iter().all(|u| u.len() == 2));
        let c = config("estimate -f rect:eps=0.1 --subsets {1,3};{2};{3,1}").unwrap();
        let picked: Vec<String> = c.select_subsets(3).unwrap().iter().map(|u| u.to_string()).collect();
        assert_eq!(picked, ["{1,3}", "{2}"]);
        assert_eq!(config("estimate -f x:1 --subsets all").unwrap().select_subsets(3).unwrap().len(), 7);
    }

    #[test]
    fn z_is_zero_for_exact_agreement() {
        assert_eq!(z_score(0.0, 0.0, 0.0), 0.0);
        assert_eq!(z_score(1.0, 0.0, 0.0), f64::INFINITY);
        assert_eq!(z_score(1.0, 0.5, 0.0), 2.0);
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-9, 6.02e23, 1e-300, 0.0, 123456.789] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(0.25), "0.25");
        assert_eq!(format_float(1e-7), "1e-7");
    }

    #[test]
    fn oracle_rows_for_a_rectangle() {
        let cfg = match args("oracle -f rect:eps=0.1,0.2 --p 2 --subsets all").command {
            Command::Oracle(a) => RunConfig::from_args("oracle", &a, None).unwrap(),
            _ => unreachable!(),
        };
        let (report, ok) = run(&cfg).unwrap();
        assert!(ok);
        assert_eq!(report.rows.len(), 3);
        // ul-tau_{1}^(2) = eps^2 (1/eps_1 - 1) with eps = 0.02
        let expected = 0.02f64.powi(2) * (1.0 / 0.1 - 1.0);
        assert!((report.rows[0].value - expected).abs() < 1e-15);
        let csv = render_csv(&report).unwrap();
        assert!(csv.contains("# command=oracle\n"));
        assert!(csv.contains("subset,family,p,estimator,n,seed,value,std_error\n"));
    }

    #[test]
    fn transform_reads_estimate_output() {
        let text = "# seed=1\nsubset,family,value,std_error\n{1},moment,1.0,0.1\n{2},moment,2.0,0.1\n\"{1,2}\",moment,4.5,0.2\n";
        let map = read_subset_csv(text, None).unwrap();
        assert_eq!(map.dim(), 2);
        let comp = moebius_transform(&map).unwrap();
        assert!((comp.value(VarSubset::full(2)).unwrap() - 1.5).abs() < 1e-15);
    }
}
