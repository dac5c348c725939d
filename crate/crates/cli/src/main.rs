//! `vdsim`: seeded reproduction runs for the noisy virtual distillation
//! experiments.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 configuration error,
//! 3 resource error (register too large, output not writable).

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rayon::prelude::*;

use config::{ConfigError, Experiment, ExperimentConfig, Overrides};
use output::{Manifest, ReadError};
use vdsim_core::distillation::{noisy_mitigated_analytic, simulate_vd};
use vdsim_core::experiments::{drift_sweep, row_at, summarize, thermal_sweep, AggregateRow};
use vdsim_core::noise::{NoiseKind, NoiseModel};
use vdsim_core::qaoa::{erdos_renyi, noise_sweep, MaxCutInstance, SweepOptions};
use vdsim_core::quantum::random::{random_density_matrix, random_pauli_string};
use vdsim_core::quantum::PauliObservable;
use vdsim_core::record::SweepRecord;
use vdsim_core::seed::{derive_seed, stream_rng, GRAPH_STREAM};

#[derive(Parser)]
#[command(name = "vdsim", version, about = "Noisy virtual distillation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the file).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for instance-level parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimised QAOA over the noise grid, with and without distillation.
    QaoaSweep(Common),
    /// Distillation of the ground/thermal mixture over the noise grid.
    ThermalSweep(Common),
    /// Coherent mismatch of the dominant eigenvector per noise level.
    Drift {
        #[command(flatten)]
        common: Common,
        /// Reuse the optima stored in an earlier qaoa-sweep records.csv.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Compare the simulated distillation circuit to its closed form.
    VdCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        n_qubits: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Recompute aggregate.csv from a records.csv.
    Summarize {
        #[command(flatten)]
        common: Common,
        /// Defaults to <out>/records.csv.
        #[arg(long)]
        records: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Resource(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Numerical(_) => 1,
            Failure::Config(_) => 2,
            Failure::Resource(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Resource(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Resource(format!("I/O: {e}"))
    }
}

impl From<vdsim_core::Error> for Failure {
    fn from(e: vdsim_core::Error) -> Self {
        use vdsim_core::Error as E;
        match e {
            E::Resource { .. } => Failure::Resource(e.to_string()),
            E::Contract(_) | E::Unsupported(_) => Failure::Config(e.to_string()),
            E::Degenerate(_) => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<ReadError> for Failure {
    fn from(e: ReadError) -> Self {
        match e {
            ReadError::Io(io) => Failure::Config(format!("cannot read records: {io}")),
            ReadError::Format(m) => Failure::Config(format!("malformed records: {m}")),
        }
    }
}

type Outcome = Result<(), Failure>;
type Instances = Vec<(u64, u64, MaxCutInstance)>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("vdsim: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn resolve(experiment: Experiment, common: &Common) -> Result<ExperimentConfig, Failure> {
    let file = config::load(common.config.as_deref())?;
    let over = Overrides {
        seed: common.seed,
        jobs: common.jobs,
        out: common.out.clone(),
    };
    Ok(ExperimentConfig::resolve(experiment, file, &over)?)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::Resource(format!("cannot start {jobs} worker threads: {e}")))
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn run(command: Command) -> Outcome {
    match command {
        Command::QaoaSweep(common) => {
            let cfg = resolve(Experiment::QaoaSweep, &common)?;
            let (instances, records) = qaoa_records(&cfg)?;
            write_sweep(&cfg, &instances, &records)
        }
        Command::ThermalSweep(common) => {
            let cfg = resolve(Experiment::ThermalSweep, &common)?;
            let instances = generate_instances(&cfg)?;
            let grid = cfg.eps_grid();
            let kinds = cfg.channel.kinds();
            let records = per_instance(&cfg, &instances, |(k, seed, g)| {
                let mut out = Vec::new();
                for &kind in &kinds {
                    out.extend(thermal_sweep(g, *k, *seed, kind, &grid, cfg.eta, cfg.variance_threshold)?);
                }
                Ok(out)
            })?;
            write_sweep(&cfg, &instances, &records)
        }
        Command::Drift { common, records } => {
            let cfg = resolve(Experiment::Drift, &common)?;
            output::ensure_dir(&cfg.output_dir)?;
            let mut manifest = Manifest::new(&command_line());
            manifest.section("config", &cfg.to_toml());
            let records = match records {
                Some(path) => {
                    manifest.section("input", &format!("records = {}", path.display()));
                    output::read_records(&path)?
                }
                None => {
                    let (instances, records) = qaoa_records(&cfg)?;
                    output::write_graphs(&cfg.output_dir, &instances)?;
                    output::write_records(&cfg.output_dir, &records)?;
                    manifest.section("seeds", &seed_lines(&instances));
                    records
                }
            };
            let points = drift_sweep(&records)?;
            output::write_drift(&cfg.output_dir, &points)?;
            manifest.write(&cfg.output_dir)?;
            for p in &points {
                println!("{:<12} eps={:.4} mean c={:.6}", p.channel.as_str(), p.eps, p.mean_mismatch);
            }
            Ok(())
        }
        Command::VdCheck {
            common,
            n_qubits,
            trials,
        } => {
            let cfg = resolve(Experiment::VdCheck, &common)?;
            vd_check(&cfg, n_qubits, trials, common.out.is_some())
        }
        Command::Summarize { common, records } => {
            let out = common.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let path = records.unwrap_or_else(|| out.join("records.csv"));
            let recs = output::read_records(&path)?;
            let rows = summarize(&recs)?;
            output::ensure_dir(&out)?;
            output::write_aggregate(&out, &rows)?;
            print_headline(&rows);
            Ok(())
        }
    }
}

fn generate_instances(cfg: &ExperimentConfig) -> Result<Instances, Failure> {
    (0..cfg.n_instances)
        .map(|k| {
            let seed = derive_seed(cfg.master_seed, k);
            let g = erdos_renyi(cfg.n_vertices, cfg.edge_prob, &mut stream_rng(seed, GRAPH_STREAM))?;
            Ok((k, seed, g))
        })
        .collect()
}

/// Runs `f` on every instance in the worker pool; results stay in instance order.
fn per_instance(
    cfg: &ExperimentConfig,
    instances: &[(u64, u64, MaxCutInstance)],
    f: impl Fn(&(u64, u64, MaxCutInstance)) -> vdsim_core::Result<Vec<SweepRecord>> + Sync,
) -> Result<Vec<SweepRecord>, Failure> {
    let chunks: Vec<vdsim_core::Result<Vec<SweepRecord>>> = pool(cfg.jobs)?.install(|| instances.par_iter().map(&f).collect());
    let mut records = Vec::new();
    for c in chunks {
        records.extend(c?);
    }
    Ok(records)
}

fn qaoa_records(cfg: &ExperimentConfig) -> Result<(Instances, Vec<SweepRecord>), Failure> {
    let instances = generate_instances(cfg)?;
    let opts = SweepOptions {
        eps_grid: cfg.eps_grid(),
        variance_threshold: cfg.variance_threshold,
        ..SweepOptions::default()
    };
    let kinds = cfg.channel.kinds();
    let records = per_instance(cfg, &instances, |(k, seed, g)| {
        let mut out = Vec::new();
        for &kind in &kinds {
            out.extend(noise_sweep(g, *k, *seed, kind, &opts)?);
        }
        Ok(out)
    })?;
    Ok((instances, records))
}

fn seed_lines(instances: &[(u64, u64, MaxCutInstance)]) -> String {
    instances
        .iter()
        .map(|(k, seed, g)| format!("instance_{k} = {{ seed = {seed}, edges = {}, c_max = {} }}", g.edges().len(), g.c_max()))
        .collect::<Vec<_>>()
        .join("\n")
}

fn write_sweep(cfg: &ExperimentConfig, instances: &[(u64, u64, MaxCutInstance)], records: &[SweepRecord]) -> Outcome {
    for r in records {
        r.check().map_err(|e| Failure::Numerical(format!("instance {} eps {}: {e}", r.instance_id, r.eps)))?;
    }
    let dir = &cfg.output_dir;
    output::ensure_dir(dir)?;
    output::write_graphs(dir, instances)?;
    output::write_records(dir, records)?;
    let rows = summarize(records)?;
    output::write_aggregate(dir, &rows)?;
    let mut manifest = Manifest::new(&command_line());
    manifest.section("config", &cfg.to_toml());
    manifest.section("seeds", &seed_lines(instances));
    manifest.write(dir)?;
    print_headline(&rows);
    Ok(())
}

fn print_headline(rows: &[AggregateRow]) {
    for kind in NoiseKind::BOTH {
        let Some(last) = rows.iter().filter(|r| r.channel == kind).max_by(|a, b| a.eps.total_cmp(&b.eps)) else {
            continue;
        };
        let at = row_at(rows, kind, last.eps).expect("row exists");
        match at.error_reduction {
            Some(r) => println!(
                "{:<12} eps={:.4} error reduction {:.1}%  distance {:.5} -> {:.5}",
                kind.as_str(),
                at.eps,
                100.0 * r,
                at.distance_unmitigated,
                at.distance_mitigated
            ),
            None => println!("{:<12} eps={:.4} error reduction null", kind.as_str(), at.eps),
        }
    }
}

/// Writes a manifest only when `--out` was given.
fn vd_check(cfg: &ExperimentConfig, n_qubits: usize, trials: usize, write: bool) -> Outcome {
    if n_qubits == 0 || trials == 0 {
        return Err(Failure::Config("n-qubits and trials must be positive".into()));
    }
    let cases: Vec<(NoiseKind, f64)> = NoiseKind::BOTH
        .iter()
        .flat_map(|&k| [0.0, 0.05, 0.1].map(|e| (k, e)))
        .collect();
    let seed = derive_seed(cfg.master_seed, 0);
    // One dense 2N+1 register per worker at a time.
    let deviations: Vec<Result<f64, Failure>> = pool(cfg.jobs)?.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream_rng(seed, 2 + t as u64);
                let rank = rng.gen_range(1..=1usize << n_qubits.min(6));
                let rho = random_density_matrix(n_qubits, rank, &mut rng);
                let obs = PauliObservable::from_string(random_pauli_string(n_qubits, &mut rng));
                let mut worst = 0.0f64;
                for &(kind, eps) in &cases {
                    let model = NoiseModel::new(kind, eps)?;
                    let circuit = simulate_vd(&rho, &obs, &model)?.mitigated;
                    let closed = noisy_mitigated_analytic(&rho, &obs, &model)?;
                    worst = worst.max((circuit - closed).abs());
                }
                Ok(worst)
            })
            .collect()
    });
    let mut worst = 0.0f64;
    for d in deviations {
        worst = worst.max(d?);
    }
    println!("vd-check: n_qubits={n_qubits} trials={trials} cases={}", cases.len());
    println!("max |circuit - closed form| = {worst:.3e}");
    if write {
        let out = &cfg.output_dir;
        output::ensure_dir(out)?;
        let mut manifest = Manifest::new(&command_line());
        manifest.section("config", &cfg.to_toml());
        manifest.section("result", &format!("n_qubits = {n_qubits}\ntrials = {trials}\nmax_deviation = {worst:.16e}"));
        manifest.write(out)?;
    }
    if worst > 1e-10 {
        return Err(Failure::Numerical(format!("deviation {worst:e} exceeds 1e-10")));
    }
    Ok(())
}
