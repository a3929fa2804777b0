//! `gw`: exact Galton–Watson laws, estimator laws, metrics, simulation and
//! verification suites from the command line.
//!
//! Exit status is 0 on success, 1 on domain errors (for example a subcritical
//! law where a supercritical one is required) and 2 on usage errors. Errors
//! are reported as one line of JSON on stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use gw_core::lab::{self, ExperimentSpec, SuiteConfig};
use gw_core::measures::{point_value, DiscreteMeasure, Point};
use gw_core::montecarlo::{self, SimConfig};
use gw_core::{engine, estimator, metrics, offspring, FamilySpec, OffspringLaw};

#[derive(Parser)]
#[command(name = "gw", version, about = "Exact laws, metrics and simulation for Galton–Watson processes")]
struct Cli {
    /// Truncation budget per engine step [default: 1e-12]
    #[arg(long, global = true, env = "GW_BUDGET")]
    budget: Option<f64>,
    /// Seed for all randomness [default: 0, or the experiment file's seed]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the result here instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Output format [default depends on the command]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Omit the timestamp field from JSON output
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Worker threads [default: available cores]
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Build an offspring law and print its atoms
    BuildLaw(FamilyArgs),
    /// Law of the generation size Z_n
    Law {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        horizon: Horizon,
    },
    /// Joint law of (Z_{n-1}, Z_n)
    Joint {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        horizon: Horizon,
        /// Condition on Z_{n-1} > 0
        #[arg(long)]
        conditioned: bool,
    },
    /// Law of the estimator Z_n / Z_{n-1} (0 when Z_{n-1} = 0)
    EstimatorLaw {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        horizon: Horizon,
        /// Condition on Z_{n-1} > 0
        #[arg(long)]
        conditioned: bool,
    },
    /// Extinction probability q, the smallest fixed point of the pgf
    Extinction(FamilyArgs),
    /// Distance between two measures stored as JSON files
    Metric {
        /// tv, prohorov or bl (bounded Lipschitz)
        #[arg(long, value_enum, default_value = "prohorov")]
        kind: MetricArg,
        /// First measure: a measure, or any output of build-law, law or estimator-law
        a: PathBuf,
        /// Second measure
        b: PathBuf,
        /// Include the optimal coupling for Prohorov
        #[arg(long)]
        certificate: bool,
    },
    /// Simulate trajectories and tabulate (Z_{n-1}, Z_n) pairs
    Simulate {
        #[command(flatten)]
        family: FamilyArgs,
        /// Number of replications
        #[arg(long, default_value_t = 1_000_000)]
        reps: u64,
        /// Last generation
        #[arg(long, short, default_value_t = 3)]
        n: usize,
        /// Initial population
        #[arg(long, default_value_t = 1)]
        z0: u64,
        /// Replications whose population exceeds this are excluded
        #[arg(long, default_value_t = montecarlo::DEFAULT_POPULATION_CAP)]
        cap: u64,
    },
    /// Run verification suites
    Verify {
        /// "all" or a single claim id
        #[arg(long, default_value = "all")]
        suite: String,
        /// Random instances per randomized claim
        #[arg(long, default_value_t = 25)]
        instances: usize,
    },
    /// Robustness-modulus sweep described by a JSON experiment file
    Modulus {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Tv,
    Prohorov,
    Bl,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyKind {
    Binary,
    ThreePoint,
    Poisson,
    Polynomial,
    Raw,
}

#[derive(Args)]
struct FamilyArgs {
    /// Offspring family
    #[arg(long, value_enum)]
    family: Option<FamilyKind>,
    /// binary: mass at 2; polynomial: decay exponent (> 2)
    #[arg(long)]
    p: Option<f64>,
    /// three-point masses at 0, 2 and 3
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long)]
    p2: Option<f64>,
    #[arg(long)]
    p3: Option<f64>,
    /// Poisson rate
    #[arg(long)]
    lambda: Option<f64>,
    /// Truncation point for poisson and polynomial [default: set by --budget]
    #[arg(long)]
    k: Option<u64>,
    /// raw: comma-separated weights of 0, 1, 2, ...
    #[arg(long, value_delimiter = ',')]
    weights: Vec<f64>,
    /// JSON family spec file, e.g. {"family": "binary", "p": 0.75}
    #[arg(long, conflicts_with = "family")]
    spec: Option<PathBuf>,
}

#[derive(Args)]
struct Horizon {
    /// Generation
    #[arg(long, short)]
    n: usize,
    /// Initial population
    #[arg(long, default_value_t = 1)]
    z0: u64,
}

enum Failure {
    Domain(gw_core::Error),
    Usage(String),
}

impl From<gw_core::Error> for Failure {
    fn from(e: gw_core::Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn need(v: Option<f64>, name: &str, family: &str) -> Outcome<f64> {
    v.ok_or_else(|| usage(format!("--{name} is required for --family {family}")))
}

impl FamilyArgs {
    fn spec(&self) -> Outcome<FamilySpec> {
        if let Some(path) = &self.spec {
            return serde_json::from_str(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())));
        }
        Ok(match self.family.ok_or_else(|| usage("one of --family or --spec is required"))? {
            FamilyKind::Binary => FamilySpec::Binary { p: need(self.p, "p", "binary")? },
            FamilyKind::ThreePoint => FamilySpec::ThreePoint {
                p0: need(self.p0, "p0", "three-point")?,
                p2: need(self.p2, "p2", "three-point")?,
                p3: need(self.p3, "p3", "three-point")?,
            },
            FamilyKind::Poisson => FamilySpec::Poisson { lambda: need(self.lambda, "lambda", "poisson")?, k: self.k },
            FamilyKind::Polynomial => FamilySpec::Polynomial { p: need(self.p, "p", "polynomial")?, k: self.k },
            FamilyKind::Raw => {
                if self.weights.is_empty() {
                    return Err(usage("--weights is required for --family raw"));
                }
                FamilySpec::Raw { weights: self.weights.clone() }
            }
        })
    }
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn point_text(x: &Point) -> String {
    if *x.denom() == 1 {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Measure from any JSON this tool writes: a bare measure, or an object
/// holding one under `law` or `measure`.
fn measure_from(value: &Value) -> Option<DiscreteMeasure> {
    if let Ok(m) = serde_json::from_value::<DiscreteMeasure>(value.clone()) {
        return Some(m);
    }
    ["law", "measure"].iter().find_map(|key| value.get(key).and_then(measure_from))
}

fn load_measure(path: &Path) -> Outcome<DiscreteMeasure> {
    let value: Value = serde_json::from_str(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    measure_from(&value).ok_or_else(|| usage(format!("{}: no measure found", path.display())))
}

struct Csv {
    schema: &'static str,
    notes: Vec<String>,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn new(schema: &'static str, header: &[&'static str]) -> Self {
        Self { schema, notes: Vec::new(), header: header.to_vec(), rows: Vec::new() }
    }

    fn row(&mut self, fields: Vec<String>) {
        self.rows.push(fields);
    }

    fn render(&self) -> Outcome<Vec<u8>> {
        let mut out = format!("# {} columns={}\n", self.schema, self.header.join(",")).into_bytes();
        for note in &self.notes {
            out.extend(format!("# {note}\n").into_bytes());
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| usage(format!("csv: {e}"));
        w.write_record(&self.header).map_err(fail)?;
        for r in &self.rows {
            w.write_record(r).map_err(fail)?;
        }
        out.extend(w.into_inner().map_err(|e| usage(format!("csv: {e}")))?);
        Ok(out)
    }
}

struct Ctx {
    budget: f64,
    seed: Option<u64>,
    output: Option<PathBuf>,
    format: Option<Format>,
    timestamp: bool,
}

impl Ctx {
    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn json(&self, schema: &str, body: impl Serialize) -> Outcome<Vec<u8>> {
        let mut map = Map::new();
        map.insert("schema".into(), json!(schema));
        if self.timestamp {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            map.insert("timestamp".into(), json!(secs));
        }
        match serde_json::to_value(body).map_err(|e| usage(format!("json: {e}")))? {
            Value::Object(fields) => map.extend(fields),
            other => {
                map.insert("result".into(), other);
            }
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(map)).map_err(|e| usage(format!("json: {e}")))?;
        text.push('\n');
        Ok(text.into_bytes())
    }

    fn emit(&self, bytes: Vec<u8>) -> Outcome<()> {
        match &self.output {
            Some(path) => fs::write(path, bytes).map_err(|e| usage(format!("{}: {e}", path.display()))),
            None => {
                use std::io::Write;
                std::io::stdout().write_all(&bytes).map_err(|e| usage(format!("stdout: {e}")))
            }
        }
    }
}

fn measure_csv(schema: &'static str, m: &DiscreteMeasure) -> Csv {
    let mut csv = Csv::new(schema, &["value", "value_f64", "probability"]);
    csv.notes.push(format!("defect={}", m.defect()));
    for (x, w) in m.atoms() {
        csv.row(vec![point_text(&x), point_value(&x).to_string(), w.to_string()]);
    }
    csv
}

fn build_law(ctx: &Ctx, family: &FamilyArgs) -> Outcome<(FamilySpec, OffspringLaw)> {
    let spec = family.spec()?;
    let law = offspring::build(&spec, ctx.budget)?;
    Ok((spec, law))
}

fn run(cli: Cli) -> Outcome<bool> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(usage("--jobs must be >= 1"));
        }
        rayon_pool(jobs)?;
    }
    let budget = cli.budget.unwrap_or(gw_core::DEFAULT_BUDGET);
    if !(budget.is_finite() && (0.0..1.0).contains(&budget)) {
        return Err(usage(format!("--budget {budget} must lie in [0, 1)")));
    }
    let ctx = Ctx { budget, seed: cli.seed, output: cli.output, format: cli.format, timestamp: !cli.no_timestamp };
    let mut ok = true;
    let bytes = match &cli.command {
        Command::BuildLaw(family) => {
            let (spec, law) = build_law(&ctx, family)?;
            match ctx.format(Format::Json) {
                Format::Json => ctx.json(
                    "gw.law.v1",
                    json!({ "spec": spec, "law": law, "criticality": law.criticality() }),
                )?,
                Format::Csv => measure_csv("gw.law.v1", &law.measure).render()?,
            }
        }
        Command::Law { family, horizon } => {
            let (_, law) = build_law(&ctx, family)?;
            let g = engine::propagate(&law, horizon.n, horizon.z0, ctx.budget)?;
            match ctx.format(Format::Csv) {
                Format::Json => ctx.json("gw.generation.v1", &g)?,
                Format::Csv => measure_csv("gw.generation.v1", &g.law).render()?,
            }
        }
        Command::Joint { family, horizon, conditioned } => {
            let (_, law) = build_law(&ctx, family)?;
            let mut joint = engine::joint_law(&law, horizon.n, horizon.z0, ctx.budget)?;
            if *conditioned {
                joint = engine::condition_on_survival(&joint)?;
            }
            match ctx.format(Format::Csv) {
                Format::Json => ctx.json("gw.joint.v1", &joint)?,
                Format::Csv => {
                    let mut csv = Csv::new("gw.joint.v1", &["z_prev", "z", "probability"]);
                    csv.notes.push(format!("defect={}", joint.defect));
                    for &(j, k, p) in &joint.entries {
                        csv.row(vec![j.to_string(), k.to_string(), p.to_string()]);
                    }
                    csv.render()?
                }
            }
        }
        Command::EstimatorLaw { family, horizon, conditioned } => {
            let (_, law) = build_law(&ctx, family)?;
            let e = estimator::estimator_law_for(&law, horizon.n, horizon.z0, ctx.budget, *conditioned)?;
            match ctx.format(Format::Csv) {
                Format::Json => ctx.json("gw.estimator.v1", &e)?,
                Format::Csv => measure_csv("gw.estimator.v1", &e.law).render()?,
            }
        }
        Command::Extinction(family) => {
            let (_, law) = build_law(&ctx, family)?;
            let ext = offspring::extinction_probability(&law)?;
            match ctx.format {
                Some(Format::Json) => ctx.json("gw.extinction.v1", &ext)?,
                Some(Format::Csv) => {
                    let mut csv = Csv::new("gw.extinction.v1", &["q", "criticality", "residual"]);
                    csv.row(vec![format!("{:.12}", ext.q), ext.criticality.as_str().into(), ext.residual.to_string()]);
                    csv.render()?
                }
                None => format!("{:.12}\n", ext.q).into_bytes(),
            }
        }
        Command::Metric { kind, a, b, certificate } => {
            let (a, b) = (load_measure(a)?, load_measure(b)?);
            let mut result = match kind {
                MetricArg::Tv => metrics::total_variation(&a, &b),
                MetricArg::Prohorov => metrics::prohorov(&a, &b),
                MetricArg::Bl => metrics::bounded_lipschitz(&a, &b)?,
            };
            if !certificate {
                result.certificate = None;
            }
            let name = match kind {
                MetricArg::Tv => "tv",
                MetricArg::Prohorov => "prohorov",
                MetricArg::Bl => "bounded_lipschitz",
            };
            match ctx.format(Format::Json) {
                Format::Json => ctx.json("gw.metric.v1", json!({ "kind": name, "result": result }))?,
                Format::Csv => {
                    let mut csv = Csv::new("gw.metric.v1", &["kind", "value", "defect_slack"]);
                    csv.row(vec![name.into(), result.value.to_string(), result.defect_slack.to_string()]);
                    csv.render()?
                }
            }
        }
        Command::Simulate { family, reps, n, z0, cap } => {
            let (_, law) = build_law(&ctx, family)?;
            let cfg = SimConfig {
                seed: ctx.seed.unwrap_or(0),
                replications: *reps,
                n_max: *n,
                z0: *z0,
                population_cap: *cap,
                jobs: 0,
            };
            let table = montecarlo::simulate_paths(&law, &cfg)?;
            match ctx.format(Format::Csv) {
                Format::Json => ctx.json("gw.simulate.v1", &table)?,
                Format::Csv => {
                    let mut csv = Csv::new("gw.simulate.v1", &["n", "z_prev", "z", "count"]);
                    csv.notes.push(format!("seed={} replications={} z0={} cap={}", cfg.seed, reps, z0, cap));
                    for g in &table.generations {
                        csv.notes.push(format!("excluded n={} count={}", g.n, g.excluded));
                        for &(j, k, c) in &g.pairs {
                            csv.row(vec![g.n.to_string(), j.to_string(), k.to_string(), c.to_string()]);
                        }
                    }
                    csv.render()?
                }
            }
        }
        Command::Verify { suite, instances } => {
            let cfg = SuiteConfig { budget: ctx.budget, seed: ctx.seed.unwrap_or(0), instances: *instances };
            let reports = lab::run_suite(suite, &cfg)?;
            ok = reports.iter().all(|r| r.holds());
            match ctx.format(Format::Json) {
                Format::Json => ctx.json("gw.verify.v1", json!({ "suite": suite, "all_pass": ok, "reports": reports }))?,
                Format::Csv => {
                    let mut csv = Csv::new(
                        "gw.verify.v1",
                        &["claim", "lhs", "rhs", "slack", "pass", "inconclusive", "instance"],
                    );
                    for r in &reports {
                        csv.row(vec![
                            r.claim.clone(),
                            r.lhs.to_string(),
                            r.rhs.to_string(),
                            r.slack.to_string(),
                            r.pass.to_string(),
                            r.inconclusive.to_string(),
                            r.instance.to_string(),
                        ]);
                    }
                    csv.render()?
                }
            }
        }
        Command::Modulus { config } => {
            let mut spec: ExperimentSpec =
                serde_json::from_str(&read(config)?).map_err(|e| usage(format!("{}: {e}", config.display())))?;
            if let Some(seed) = ctx.seed {
                spec.seed = seed;
            }
            if let Some(b) = cli.budget {
                spec.budget = b;
            }
            let rows = lab::robustness_modulus(&spec)?;
            let bytes = match ctx.format(Format::Csv) {
                Format::Json => ctx.json("gw.modulus.v1", json!({ "experiment": spec, "rows": rows }))?,
                Format::Csv => {
                    let mut csv = Csv::new(
                        "gw.modulus.v1",
                        &["label", "d_tv", "modulus", "argmax_n", "method", "flag", "slack"],
                    );
                    csv.notes.push(format!("center={} n_range={:?} metric={:?}", spec.center, spec.n_range, spec.metric));
                    for r in &rows {
                        csv.row(vec![
                            r.label.clone(),
                            r.d_tv.to_string(),
                            r.modulus.to_string(),
                            r.argmax_n.to_string(),
                            r.method.clone(),
                            r.flag.clone(),
                            r.slack.to_string(),
                        ]);
                    }
                    csv.render()?
                }
            };
            if ctx.output.is_none() {
                if let Some(path) = &spec.output {
                    fs::write(path, &bytes).map_err(|e| usage(format!("{path}: {e}")))?;
                    return Ok(true);
                }
            }
            bytes
        }
    };
    ctx.emit(bytes)?;
    Ok(ok)
}

fn rayon_pool(jobs: usize) -> Outcome<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| usage(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Domain(e)) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("{}", json!({ "error": "usage", "message": msg }));
            ExitCode::from(2)
        }
    }
}
