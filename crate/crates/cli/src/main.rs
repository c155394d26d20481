//! Command-line front end: builds environments from flags or a flat config
//! file, dispatches to the library, and persists replayable run records.
//!
//! Exit codes: 0 on success, 1 when an internal invariant is violated (a
//! permutation cross-check or replay comparison fails), 2 on usage errors.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stirring::bars::{fixed_bars_from_rows, read_bar_file, write_bar_file, BarSource};
use stirring::bounds::Classification;
use stirring::meander::{run_meander, write_trajectory, Horizon, Limits, Verdict};
use stirring::perm::{meander_permutation, stirring_permutation};
use stirring::record::{self, RunRecord, Task};
use stirring::useful::UsefulIndex;
use stirring::{
    bounds, root_cycle_length, BarStore, CycleVerdict, ExperimentConfig, SweepEstimator, Tree,
    TreeSpec,
};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant violation: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

#[derive(Debug)]
enum Failure {
    /// Exit 1: the toolkit contradicted itself.
    Invariant(String),
    /// Exit 2: bad flags, files, or parameters.
    Usage(String),
}

impl From<stirring::Error> for Failure {
    fn from(e: stirring::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "stirring",
    version,
    about = "Random-stirring simulator: trajectories, permutation cycles, \
             useful-bar statistics, renewal densities, and closed-form bounds"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one trajectory and write its crossing record.
    Simulate(SimulateArgs),
    /// Extract the one-period permutation of a finite environment by both
    /// routes (motion and transposition composition) and print its cycles.
    Perm(PermArgs),
    /// List useful bars in one environment, or with --runs estimate the
    /// one-period count distribution over random environments.
    Useful(UsefulArgs),
    /// Estimate the strong-renewal-point density of the biased comparison
    /// walk against its closed-form value.
    Renewal(RenewalArgs),
    /// Evaluate the closed-form criteria and classify parameter points.
    Bounds(BoundsArgs),
    /// Drive one estimator across an increasing period grid (CSV output).
    Sweep(SweepArgs),
    /// Re-execute a persisted run record and verify its tallies.
    Replay(ReplayArgs),
}

/// Flags shared by every simulation-backed subcommand.  Any long flag here
/// can also be given as a `key = value` line in `--config`; explicit flags
/// win.
#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Tree family: regular:<d> | degree:<d0>[,reduced] | full:<d>x<depth>
    /// | two-level-binary.
    #[arg(long)]
    tree: Option<String>,
    /// Shorthand for --tree regular:<d>.
    #[arg(long)]
    d: Option<u32>,
    /// Shorthand for --tree degree:<d0>.
    #[arg(long)]
    d0: Option<u32>,
    /// Cylinder period.
    #[arg(long = "T")]
    t: Option<f64>,
    /// Master seed for random environments.
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed bar file (edge-path<TAB>height lines) instead of a seeded
    /// environment.
    #[arg(long)]
    bars: Option<PathBuf>,
    /// Maximum tree depth before a run is censored.
    #[arg(long)]
    depth_cap: Option<u32>,
    /// Per-run crossing-event budget.
    #[arg(long)]
    budget: Option<usize>,
    /// Clock horizon.
    #[arg(long)]
    horizon: Option<f64>,
    /// Number of independent runs (selects estimator mode where relevant).
    #[arg(long)]
    runs: Option<u64>,
    /// Output directory for records and CSVs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; tallies are independent of this.
    #[arg(long)]
    jobs: Option<usize>,
}

const KNOWN_KEYS: &[&str] = &[
    "tree",
    "d",
    "d0",
    "T",
    "seed",
    "bars",
    "depth-cap",
    "budget",
    "horizon",
    "runs",
    "out",
    "jobs",
];

/// Flag values merged with the config file (flags win).
struct Settings {
    file: HashMap<String, String>,
    args: CommonArgs,
}

impl Settings {
    fn load(args: CommonArgs) -> Result<Self, Failure> {
        let mut file = HashMap::new();
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    return Err(Failure::Usage(format!(
                        "{}:{}: expected `key = value`",
                        path.display(),
                        lineno + 1
                    )));
                };
                let key = key.trim().to_string();
                if !KNOWN_KEYS.contains(&key.as_str()) {
                    return Err(Failure::Usage(format!(
                        "{}:{}: unknown key {key:?} (known: {})",
                        path.display(),
                        lineno + 1,
                        KNOWN_KEYS.join(", ")
                    )));
                }
                file.insert(key, value.trim().to_string());
            }
        }
        Ok(Settings { file, args })
    }

    fn get<T: FromStr + Clone>(&self, key: &str, flag: &Option<T>) -> Result<Option<T>, Failure> {
        if let Some(v) = flag {
            return Ok(Some(v.clone()));
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Failure::Usage(format!("config key {key} has unparsable value {raw:?}"))
            }),
        }
    }

    fn period(&self) -> Result<f64, Failure> {
        self.get("T", &self.args.t)?
            .ok_or_else(|| Failure::Usage("a period is required (--T)".into()))
    }

    fn seed(&self) -> Result<u64, Failure> {
        Ok(self.get("seed", &self.args.seed)?.unwrap_or(0))
    }

    fn budget(&self) -> Result<usize, Failure> {
        Ok(self.get("budget", &self.args.budget)?.unwrap_or(1_000_000))
    }

    fn depth_cap(&self) -> Result<u32, Failure> {
        Ok(self.get("depth-cap", &self.args.depth_cap)?.unwrap_or(512))
    }

    fn out_dir(&self) -> Result<Option<PathBuf>, Failure> {
        self.get("out", &self.args.out)
    }

    fn apply_jobs(&self) -> Result<(), Failure> {
        if let Some(n) = self.get("jobs", &self.args.jobs)? {
            if n == 0 {
                return Err(Failure::Usage("--jobs must be positive".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Failure::Usage(format!("cannot size thread pool: {e}")))?;
        }
        Ok(())
    }

    fn tree_spec(&self) -> Result<TreeSpec, Failure> {
        let depth_cap = self.depth_cap()?;
        if let Some(grammar) = self.get("tree", &self.args.tree)? {
            return parse_tree(&grammar, depth_cap);
        }
        if let Some(d) = self.get("d", &self.args.d)? {
            return Ok(TreeSpec::regular(d, depth_cap)?);
        }
        if let Some(d0) = self.get("d0", &self.args.d0)? {
            return Ok(TreeSpec::degree_regular(d0, false, depth_cap)?);
        }
        Err(Failure::Usage(
            "a tree is required (--tree, --d, or --d0)".into(),
        ))
    }

    /// The environment named on the command line: a fixed bar file, or a
    /// lazily sampled one from the seed.
    fn environment(&self, tree: &Tree, t: f64) -> Result<Box<dyn BarSource>, Failure> {
        match self.get("bars", &self.args.bars)? {
            Some(path) => {
                let file = File::open(&path)
                    .map_err(|e| Failure::Usage(format!("cannot open {}: {e}", path.display())))?;
                let rows = read_bar_file(BufReader::new(file))?;
                Ok(Box::new(fixed_bars_from_rows(tree, t, &rows)?))
            }
            None => Ok(Box::new(BarStore::new(t, self.seed()?)?)),
        }
    }

    fn experiment_config(&self) -> Result<ExperimentConfig, Failure> {
        let t = self.period()?;
        Ok(ExperimentConfig {
            tree: self.tree_spec()?,
            t,
            n_runs: self
                .get("runs", &self.args.runs)?
                .ok_or_else(|| Failure::Usage("a run count is required (--runs)".into()))?,
            max_events: self.budget()?,
            horizon: self.get("horizon", &self.args.horizon)?.unwrap_or(3.0 * t),
            master_seed: self.seed()?,
        })
    }
}

fn parse_tree(grammar: &str, depth_cap: u32) -> Result<TreeSpec, Failure> {
    let bad = || {
        Failure::Usage(format!(
            "unrecognized tree {grammar:?}; expected regular:<d>, \
             degree:<d0>[,reduced], full:<d>x<depth>, or two-level-binary"
        ))
    };
    if grammar == "two-level-binary" {
        return Ok(TreeSpec::two_level_binary());
    }
    if let Some(rest) = grammar.strip_prefix("regular:") {
        let d = rest.parse().map_err(|_| bad())?;
        return Ok(TreeSpec::regular(d, depth_cap)?);
    }
    if let Some(rest) = grammar.strip_prefix("degree:") {
        let (num, reduced) = match rest.strip_suffix(",reduced") {
            Some(num) => (num, true),
            None => (rest, false),
        };
        let d0 = num.parse().map_err(|_| bad())?;
        return Ok(TreeSpec::degree_regular(d0, reduced, depth_cap)?);
    }
    if let Some(rest) = grammar.strip_prefix("full:") {
        let (d, depth) = rest.split_once('x').ok_or_else(bad)?;
        let d = d.parse().map_err(|_| bad())?;
        let depth = depth.parse().map_err(|_| bad())?;
        return Ok(TreeSpec::full_truncation(d, depth));
    }
    Err(bad())
}

fn parse_grid(raw: &str) -> Result<Vec<f64>, Failure> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("bad grid entry {tok:?}")))
        })
        .collect()
}

fn ensure_out_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn write_run_record(dir: &Path, rec: &RunRecord) -> Result<PathBuf, Failure> {
    ensure_out_dir(dir)?;
    let path = dir.join("run.json");
    let file = File::create(&path)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", path.display())))?;
    record::write_record(rec, BufWriter::new(file))?;
    Ok(path)
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Periodic { .. } => "periodic",
        Verdict::Stuck => "stuck",
        Verdict::DepthCapHit => "censored-at-depth",
        Verdict::BudgetExhausted => "censored-at-budget",
        Verdict::HorizonReached => "horizon-reached",
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Simulate(a) => cmd_simulate(a),
        Cmd::Perm(a) => cmd_perm(a),
        Cmd::Useful(a) => cmd_useful(a),
        Cmd::Renewal(a) => cmd_renewal(a),
        Cmd::Bounds(a) => cmd_bounds(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Replay(a) => cmd_replay(a),
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Start vertex as a path string (default the root).
    #[arg(long)]
    start: Option<String>,
    /// Start height in [0, T).
    #[arg(long, default_value_t = 0.0)]
    height: f64,
    /// Stop after this many exact periods instead of a clock horizon.
    #[arg(long, conflicts_with = "horizon")]
    periods: Option<u64>,
    /// Follow the root's orbit until it closes and report the cycle length
    /// instead of recording a horizon-limited trajectory.
    #[arg(long)]
    cycle: bool,
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Failure> {
    let s = Settings::load(a.common)?;
    s.apply_jobs()?;
    let t = s.period()?;
    let tree = Tree::new(s.tree_spec()?);
    let source = s.environment(&tree, t)?;

    if a.cycle {
        match root_cycle_length(&tree, source.as_ref(), s.budget()?)? {
            CycleVerdict::FiniteCycle(n) => println!("root cycle length: {n}"),
            CycleVerdict::CensoredAtDepth => {
                println!("root cycle censored at the depth cap (candidate infinite)")
            }
            CycleVerdict::CensoredAtBudget => {
                println!("root cycle censored at the event budget (candidate infinite)")
            }
        }
        return Ok(());
    }

    let start = match &a.start {
        Some(path) => tree.vertex_by_string(path)?,
        None => tree.root(),
    };
    let horizon = match a.periods {
        Some(n) => Horizon::Periods(n),
        None => Horizon::Clock(s.get("horizon", &s.args.horizon)?.unwrap_or(t)),
    };
    let limits = Limits {
        max_events: s.budget()?,
        horizon,
        detect_cycles: true,
    };
    let traj = run_meander(&tree, source.as_ref(), start, a.height, &limits)?;
    println!(
        "verdict={} events={} covered={}",
        verdict_label(traj.verdict),
        traj.events.len(),
        traj.covered()
    );
    if let Some(cycle) = &traj.cycle {
        println!(
            "period: {} wraps ({} clock) from event {}",
            cycle.period_wraps, cycle.period_clock, cycle.first_repeat
        );
    }
    if let Some(dir) = s.out_dir()? {
        ensure_out_dir(&dir)?;
        let path = dir.join("trajectory.txt");
        let file = File::create(&path)
            .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", path.display())))?;
        write_trajectory(&tree, &traj, s.seed()?, BufWriter::new(file))?;
        println!("trajectory written to {}", path.display());
    } else {
        let mut out = Vec::new();
        write_trajectory(&tree, &traj, s.seed()?, &mut out)?;
        print!("{}", String::from_utf8_lossy(&out));
    }
    Ok(())
}

#[derive(Args)]
struct PermArgs {
    #[command(flatten)]
    common: CommonArgs,
}

fn cmd_perm(a: PermArgs) -> Result<(), Failure> {
    let s = Settings::load(a.common)?;
    s.apply_jobs()?;
    let t = s.period()?;
    let tree = Tree::new(s.tree_spec()?);
    if !tree.spec().is_finite() {
        return Err(Failure::Usage(
            "permutation extraction needs a finite tree (full:<d>x<depth> or two-level-binary)"
                .into(),
        ));
    }
    let source = s.environment(&tree, t)?;
    let by_motion = meander_permutation(&tree, source.as_ref())?;
    let by_composition = stirring_permutation(&tree, source.as_ref())?;
    if by_motion != by_composition {
        let dump = serde_json::json!({
            "by_motion": by_motion.cycles_as_paths(&tree),
            "by_composition": by_composition.cycles_as_paths(&tree),
        });
        if let Some(dir) = s.out_dir()? {
            ensure_out_dir(&dir)?;
            write_text(&dir.join("mismatch.json"), &dump.to_string())?;
            let mut bars_dump = Vec::new();
            let bars = stirring::bars::environment_bars(&tree, source.as_ref())?;
            write_bar_file(&tree, &bars, &mut bars_dump)?;
            write_text(
                &dir.join("mismatch.bars"),
                &String::from_utf8_lossy(&bars_dump),
            )?;
        }
        return Err(Failure::Invariant(format!(
            "permutation routes disagree: {dump}"
        )));
    }
    let cycles = by_motion.cycles_as_paths(&tree);
    let json = serde_json::to_string_pretty(&cycles).expect("string table serializes");
    println!("{json}");
    if let Some(dir) = s.out_dir()? {
        ensure_out_dir(&dir)?;
        write_text(&dir.join("cycles.json"), &json)?;
    }
    Ok(())
}

#[derive(Args)]
struct UsefulArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Report bars useful relative to this anchor clock (default 0).
    #[arg(long, default_value_t = 0.0)]
    since: f64,
    /// Report bars useful at this clock (default the period).
    #[arg(long)]
    until: Option<f64>,
}

fn cmd_useful(a: UsefulArgs) -> Result<(), Failure> {
    let s = Settings::load(a.common)?;
    s.apply_jobs()?;

    if s.get("runs", &s.args.runs)?.is_some() {
        let cfg = s.experiment_config()?;
        let rec = record::record(&command_line(), Some(cfg), Task::UsefulBarCount)?;
        let row = &rec.tallies.rows[0];
        println!("{}", stirring::EstimateRecord::CSV_HEADER);
        println!("{}", row.csv_row());
        if let Some(dir) = s.out_dir()? {
            let path = write_run_record(&dir, &rec)?;
            if let Some(hist) = &rec.tallies.histogram {
                write_text(&dir.join("useful_histogram.csv"), &hist.csv())?;
            }
            println!("record written to {}", path.display());
        }
        return Ok(());
    }

    let t = s.period()?;
    let tree = Tree::new(s.tree_spec()?);
    let source = s.environment(&tree, t)?;
    let horizon = s.get("horizon", &s.args.horizon)?.unwrap_or(t);
    let limits = Limits {
        max_events: s.budget()?,
        horizon: Horizon::Clock(horizon),
        detect_cycles: false,
    };
    let traj = run_meander(&tree, source.as_ref(), tree.root(), 0.0, &limits)?;
    let index = UsefulIndex::new(&tree, &traj);
    let until = a.until.unwrap_or(t);
    let report = index.report_between(a.since, until)?;
    let rows: Vec<serde_json::Value> = report
        .members
        .iter()
        .map(|m| {
            serde_json::json!({
                "edge": tree.edge_string(m.bar.edge),
                "height": m.bar.height,
                "parent_arrival": m.parent_arrival,
                "child_arrival": m.child_arrival,
                "child_departure": m.child_departure,
            })
        })
        .collect();
    println!(
        "{}",
        serde_json::json!({
            "since": a.since,
            "until": until,
            "count": report.len(),
            "members": rows,
        })
    );
    Ok(())
}

#[derive(Args)]
struct RenewalArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Upward bias; `inf` gives the always-ascending walk.
    #[arg(long)]
    beta: f64,
    /// States per sampled path.
    #[arg(long, default_value_t = 1_000_000)]
    steps: usize,
    /// Independent paths pooled into the estimate.
    #[arg(long, default_value_t = 20)]
    replicas: usize,
}

fn cmd_renewal(a: RenewalArgs) -> Result<(), Failure> {
    let s = Settings::load(a.common)?;
    s.apply_jobs()?;
    let task = Task::RenewalDensity {
        beta: a.beta,
        path_len: a.steps,
        replicas: a.replicas,
        seed: s.seed()?,
    };
    let rec = record::record(&command_line(), None, task)?;
    let density = rec.tallies.density.as_ref().expect("renewal task tallies");
    println!(
        "beta={} density={} ci99=[{}, {}] predicted={}",
        density.beta,
        density.mean,
        density.lo99,
        density.hi99,
        stirring::renewal::DensityEstimate::predicted(a.beta),
    );
    if let Some(dir) = s.out_dir()? {
        let path = write_run_record(&dir, &rec)?;
        println!("record written to {}", path.display());
    }
    Ok(())
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated period grid; defaults to the single --T value.
    #[arg(long)]
    t_grid: Option<String>,
    /// Quadrature tolerance for the integral criterion.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

fn cmd_bounds(a: BoundsArgs) -> Result<(), Failure> {
    let s = Settings::load(a.common)?;
    let d0 = s
        .get("d0", &s.args.d0)?
        .ok_or_else(|| Failure::Usage("bounds needs --d0".into()))?;
    let grid = match &a.t_grid {
        Some(raw) => parse_grid(raw)?,
        None => vec![s.period()?],
    };
    let mut csv = String::from(Classification::CSV_HEADER);
    csv.push('\n');
    for &t in &grid {
        let row = bounds::classify(d0, t, a.tol)?;
        csv.push_str(&row.csv_row());
        csv.push('\n');
    }
    print!("{csv}");
    if let Some(dir) = s.out_dir()? {
        ensure_out_dir(&dir)?;
        write_text(&dir.join("bounds.csv"), &csv)?;
    }
    Ok(())
}

#[derive(Copy, Clone, ValueEnum)]
enum EstimatorArg {
    /// P(one-period useful-bar count clears its threshold) + histogram.
    UsefulCount,
    /// Frontier-departure rate among observed returns.
    Frontier,
    /// P(no return to the root observed after the probe clock).
    Return,
    /// Root cycle lengths with censored ("candidate infinite") mass.
    Survey,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum)]
    estimator: EstimatorArg,
    /// Comma-separated strictly increasing period grid.
    #[arg(long)]
    grid: String,
    /// Episode target for the frontier estimator.
    #[arg(long, default_value_t = 200)]
    target_episodes: u64,
    /// Probe clock for the return estimator.
    #[arg(long, default_value_t = 0.5)]
    s0: f64,
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Failure> {
    let s = Settings::load(a.common)?;
    s.apply_jobs()?;
    let grid = parse_grid(&a.grid)?;
    let estimator = match a.estimator {
        EstimatorArg::UsefulCount => SweepEstimator::UsefulBarCount,
        EstimatorArg::Frontier => SweepEstimator::FrontierDeparture {
            target_episodes: a.target_episodes,
        },
        EstimatorArg::Return => SweepEstimator::ReturnProbability { s0: a.s0 },
        EstimatorArg::Survey => SweepEstimator::CycleLengthSurvey,
    };
    let base_t = grid.first().copied().unwrap_or(1.0);
    let cfg = ExperimentConfig {
        tree: s.tree_spec()?,
        t: base_t,
        n_runs: s
            .get("runs", &s.args.runs)?
            .ok_or_else(|| Failure::Usage("a run count is required (--runs)".into()))?,
        max_events: s.budget()?,
        horizon: s
            .get("horizon", &s.args.horizon)?
            .unwrap_or(3.0 * base_t),
        master_seed: s.seed()?,
    };
    let rec = record::record(&command_line(), Some(cfg), Task::Sweep { grid, estimator })?;
    let csv = stirring::experiments::sweep_csv(&rec.tallies.rows);
    print!("{csv}");
    if let Some(dir) = s.out_dir()? {
        let path = write_run_record(&dir, &rec)?;
        write_text(&dir.join("sweep.csv"), &csv)?;
        println!("record written to {}", path.display());
    }
    Ok(())
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Run record to re-execute.
    #[arg(long)]
    record: PathBuf,
}

fn cmd_replay(a: ReplayArgs) -> Result<(), Failure> {
    let s = Settings::load(a.common)?;
    s.apply_jobs()?;
    let file = File::open(&a.record)
        .map_err(|e| Failure::Usage(format!("cannot open {}: {e}", a.record.display())))?;
    let rec = record::read_record(BufReader::new(file))?;
    let report = record::replay(&rec)?;
    if report.matched {
        println!("replay ok: tallies reproduced bit-for-bit");
        return Ok(());
    }
    let dump = serde_json::json!({
        "recorded": rec.tallies,
        "reproduced": report.reproduced,
    });
    let diff_path = a.record.with_extension("mismatch.json");
    let _ = fs::write(&diff_path, dump.to_string());
    Err(Failure::Invariant(format!(
        "replay of {} diverged; recorded and reproduced tallies dumped to {}",
        a.record.display(),
        diff_path.display()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    #[test]
    fn tree_grammar_round_trips() {
        assert!(matches!(
            parse_tree("regular:5", 64).unwrap().kind,
            stirring::TreeKind::RegularOffspring { offspring: 5 }
        ));
        assert!(matches!(
            parse_tree("degree:40,reduced", 64).unwrap().kind,
            stirring::TreeKind::DegreeRegular {
                degree: 40,
                reduced_root: true
            }
        ));
        assert!(parse_tree("full:2x3", 64).unwrap().is_finite());
        assert!(parse_tree("two-level-binary", 64).unwrap().is_finite());
        assert!(parse_tree("regular:x", 64).is_err());
        assert!(parse_tree("ladder:3", 64).is_err());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0.5, 1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert!(parse_grid("0.5,phi").is_err());
    }

    #[test]
    fn config_file_feeds_defaults_and_flags_win() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "# sweep defaults").unwrap();
        writeln!(file, "T = 2.5").unwrap();
        writeln!(file, "seed = 9").unwrap();
        writeln!(file, "d = 3").unwrap();
        let args = CommonArgs {
            config: Some(file.path().to_path_buf()),
            seed: Some(4),
            ..CommonArgs::default()
        };
        let s = Settings::load(args).unwrap();
        assert_eq!(s.period().unwrap(), 2.5);
        assert_eq!(s.seed().unwrap(), 4);
        assert!(matches!(
            s.tree_spec().unwrap().kind,
            stirring::TreeKind::RegularOffspring { offspring: 3 }
        ));
    }

    #[test]
    fn config_file_rejects_unknown_keys() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "period = 2.5").unwrap();
        let args = CommonArgs {
            config: Some(file.path().to_path_buf()),
            ..CommonArgs::default()
        };
        assert!(matches!(Settings::load(args), Err(Failure::Usage(_))));
    }
}
