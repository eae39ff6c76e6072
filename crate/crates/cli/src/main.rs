//! Command-line front end: generate synthetic instances, cluster edge-list
//! graphs with the four spectral variants, run experiment sweeps, and check
//! the closed-form spectrum oracles. All outputs are deterministic given the
//! full flag set including --seed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fairsc::error::Error as CoreError;
use fairsc::fairness::{fairness_matrix, GroupAssignment};
use fairsc::graph::{
    parse_edge_list, parse_label_file, write_edge_list, write_label_file, Clustering, Graph,
};
use fairsc::linalg::{nullspace_basis, smallest_eigenpairs};
use fairsc::metrics::report;
use fairsc::sbm::{
    expected_adjacency, expected_laplacian, perturb_groups, sample_fair_sbm, theoretical_spectrum,
    FairSbmConfig,
};
use fairsc::spectral::{fair_sc_normalized, fair_sc_unnormalized, sc_normalized, sc_unnormalized};

mod experiment;

use experiment::{run_experiment, ExperimentSpec, SweepVar};

#[derive(Parser)]
#[command(
    name = "fairsc",
    version,
    about = "Spectral clustering with proportionality constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic graph and write .edges/.groups/.truth files
    Generate(GenerateArgs),
    /// Cluster an edge-list graph and print a CSV report row
    Cluster(ClusterArgs),
    /// Run a sweep (over n, k, or the perturbation p) and write a CSV
    Experiment(ExperimentArgs),
    /// Compare the dense spectra of the expected matrices with their
    /// closed-form values
    SpectrumCheck(SpectrumArgs),
}

#[derive(Args, Clone)]
pub(crate) struct ModelArgs {
    /// Vertex count (for the k sweep: the target count before rounding)
    #[arg(long)]
    pub(crate) n: usize,
    /// Cluster count
    #[arg(long)]
    pub(crate) k: usize,
    /// Group count
    #[arg(long)]
    pub(crate) h: usize,
    /// Same cluster, same group connection probability
    #[arg(long)]
    pub(crate) a: f64,
    /// Different cluster, same group
    #[arg(long)]
    pub(crate) b: f64,
    /// Same cluster, different group
    #[arg(long)]
    pub(crate) c: f64,
    /// Different cluster, different group
    #[arg(long)]
    pub(crate) d: f64,
    /// Group fractions (comma list summing to 1); default 1/h each
    #[arg(long, value_delimiter = ',')]
    pub(crate) eta: Option<Vec<f64>>,
    /// Cluster sizes (comma list summing to n); default n/k each
    #[arg(long, value_delimiter = ',')]
    pub(crate) cluster_sizes: Option<Vec<usize>>,
}

impl ModelArgs {
    pub(crate) fn build_config(&self, allow_degenerate: bool) -> Result<FairSbmConfig, CliError> {
        self.build_config_for_n(self.n, allow_degenerate)
    }

    pub(crate) fn build_config_for_n(&self, n: usize, allow_degenerate: bool) -> Result<FairSbmConfig, CliError> {
        let sizes = match &self.cluster_sizes {
            Some(sizes) => {
                if sizes.len() != self.k {
                    return Err(CliError::config(format!(
                        "--cluster-sizes has {} entries, expected k = {}",
                        sizes.len(),
                        self.k
                    )));
                }
                if sizes.iter().sum::<usize>() != n {
                    return Err(CliError::config(format!(
                        "--cluster-sizes sums to {}, expected n = {}",
                        sizes.iter().sum::<usize>(),
                        n
                    )));
                }
                sizes.clone()
            }
            None => {
                if self.k == 0 || n % self.k != 0 {
                    return Err(CliError::config(format!(
                        "k = {} must divide n = {} (or pass --cluster-sizes)",
                        self.k, n
                    )));
                }
                vec![n / self.k; self.k]
            }
        };
        let fractions = match &self.eta {
            Some(eta) => {
                if eta.len() != self.h {
                    return Err(CliError::config(format!(
                        "--eta has {} entries, expected h = {}",
                        eta.len(),
                        self.h
                    )));
                }
                eta.clone()
            }
            None => vec![1.0 / self.h as f64; self.h],
        };
        let cfg = if allow_degenerate {
            FairSbmConfig::new_unchecked(sizes, fractions, self.a, self.b, self.c, self.d)
        } else {
            FairSbmConfig::new(sizes, fractions, self.a, self.b, self.c, self.d)
        };
        cfg.map_err(CliError::from)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reassign each first-group vertex to the second group with this
    /// probability before writing .groups (needs h = 2)
    #[arg(long)]
    perturb_p: Option<f64>,
    /// Skip the a > b > c > d check (degenerate test configurations)
    #[arg(long, hide = true)]
    allow_degenerate: bool,
    /// Output prefix; writes <prefix>.edges, <prefix>.groups, <prefix>.truth
    #[arg(long)]
    out: PathBuf,
}

/// The four clustering algorithms exposed on the command line.
#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    #[value(name = "sc-u")]
    ScU,
    #[value(name = "sc-n")]
    ScN,
    #[value(name = "fair-u")]
    FairU,
    #[value(name = "fair-n")]
    FairN,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::ScU => "sc-u",
            Algo::ScN => "sc-n",
            Algo::FairU => "fair-u",
            Algo::FairN => "fair-n",
        }
    }

    fn is_fair(self) -> bool {
        matches!(self, Algo::FairU | Algo::FairN)
    }

    /// Stable tag used to derive per-algorithm seeds; independent of the
    /// position in an --algos list.
    pub fn tag(self) -> u64 {
        match self {
            Algo::ScU => 1,
            Algo::ScN => 2,
            Algo::FairU => 3,
            Algo::FairN => 4,
        }
    }

    pub fn run(
        self,
        g: &Graph,
        k: usize,
        groups: &GroupAssignment,
        rng: &mut impl Rng,
    ) -> Result<Clustering, CoreError> {
        let (clustering, _) = match self {
            Algo::ScU => sc_unnormalized(g, k, rng)?,
            Algo::ScN => sc_normalized(g, k, rng)?,
            Algo::FairU => fair_sc_unnormalized(g, k, groups, rng)?,
            Algo::FairN => fair_sc_normalized(g, k, groups, rng)?,
        };
        Ok(clustering)
    }
}

#[derive(Args)]
struct ClusterArgs {
    /// Edge-list file
    #[arg(long)]
    graph: PathBuf,
    /// Group-label file (required for fair-u / fair-n)
    #[arg(long)]
    groups: Option<PathBuf>,
    /// Reference clustering file; enables the error column
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Algorithm
    #[arg(long)]
    algo: Algo,
    /// Cluster count
    #[arg(long)]
    k: usize,
    /// Vertex count; inferred from --groups/--truth when omitted
    #[arg(long)]
    n: Option<usize>,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restrict to the largest connected component before clustering
    #[arg(long)]
    largest_component: bool,
    /// Output label file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub(crate) struct ExperimentArgs {
    #[command(flatten)]
    pub(crate) model: ModelArgs,
    /// Swept variable
    #[arg(long)]
    pub(crate) sweep: SweepVar,
    /// Sweep values (comma list; integers for n/k, probabilities for p)
    #[arg(long, value_delimiter = ',', required = true)]
    pub(crate) values: Vec<String>,
    /// Trials per sweep point
    #[arg(long, default_value_t = 10)]
    pub(crate) trials: usize,
    /// Algorithms to run
    #[arg(long, value_delimiter = ',', required = true)]
    pub(crate) algos: Vec<Algo>,
    /// Fixed group perturbation applied in n/k sweeps (needs h = 2)
    #[arg(long, default_value_t = 0.0)]
    pub(crate) perturb_p: f64,
    /// Base seed; trial t uses base_seed + t
    #[arg(long, default_value_t = 0)]
    pub(crate) seed: u64,
    /// Output CSV path
    #[arg(long)]
    pub(crate) out: PathBuf,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    model: ModelArgs,
}

/// CLI-level error carrying the exit code it maps to: 2 for invalid input or
/// configuration, 3 for I/O, 4 for algorithmic precondition failures.
pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 2,
        }
    }

    fn io(context: &str, err: std::io::Error) -> Self {
        Self {
            message: format!("{context}: {err}"),
            code: 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        let code = match err {
            CoreError::IsolatedVertex(_) | CoreError::NotPositiveDefinite { .. } => 4,
            _ => 2,
        };
        Self {
            message: err.to_string(),
            code,
        }
    }
}

/// Locale-independent float formatting with 12 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.11e}")
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(&format!("reading {}", path.display()), e))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(&format!("writing {}", path.display()), e))
}

fn groups_from_labels(labels: Vec<usize>) -> Result<GroupAssignment, CliError> {
    let h = labels.iter().copied().max().map_or(0, |m| m + 1);
    GroupAssignment::new(h.max(1), labels).map_err(CliError::from)
}

fn clustering_from_labels(labels: Vec<usize>) -> Result<Clustering, CliError> {
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    Clustering::new(k.max(1), labels).map_err(CliError::from)
}

fn cmd_generate(args: &GenerateArgs) -> Result<(), CliError> {
    let cfg = args.model.build_config(args.allow_degenerate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (graph, truth, mut groups) = sample_fair_sbm(&cfg, &mut rng)?;
    if let Some(p) = args.perturb_p {
        groups = perturb_groups(&groups, p, &mut rng)?;
    }
    write_file(&args.out.with_extension("edges"), &write_edge_list(&graph))?;
    write_file(
        &args.out.with_extension("groups"),
        &write_label_file(groups.labels()),
    )?;
    write_file(
        &args.out.with_extension("truth"),
        &write_label_file(truth.labels()),
    )?;
    println!(
        "n={} edges={} prefix={}",
        graph.n(),
        graph.edge_count(),
        args.out.display()
    );
    Ok(())
}

fn cmd_cluster(args: &ClusterArgs) -> Result<(), CliError> {
    let groups_labels = args
        .groups
        .as_deref()
        .map(|p| read_file(p).and_then(|text| parse_label_file(&text).map_err(CliError::from)))
        .transpose()?;
    let truth_labels = args
        .truth
        .as_deref()
        .map(|p| read_file(p).and_then(|text| parse_label_file(&text).map_err(CliError::from)))
        .transpose()?;

    if args.algo.is_fair() && groups_labels.is_none() {
        return Err(CliError::config(format!(
            "--algo {} requires --groups",
            args.algo.name()
        )));
    }

    let n = args
        .n
        .or(groups_labels.as_ref().map(Vec::len))
        .or(truth_labels.as_ref().map(Vec::len))
        .ok_or_else(|| CliError::config("--n is required without --groups or --truth"))?;
    for (name, len) in [
        ("--groups", groups_labels.as_ref().map(Vec::len)),
        ("--truth", truth_labels.as_ref().map(Vec::len)),
    ] {
        if let Some(len) = len {
            if len != n {
                return Err(CliError::config(format!(
                    "{name} has {len} labels but n = {n}"
                )));
            }
        }
    }

    let graph_text = read_file(&args.graph)?;
    let mut graph = parse_edge_list(&graph_text, n)?;
    let mut groups = match groups_labels {
        Some(labels) => groups_from_labels(labels)?,
        None => GroupAssignment::single_group(n),
    };
    let mut truth = truth_labels.map(clustering_from_labels).transpose()?;

    if args.largest_component {
        let (sub, kept) = graph.largest_component();
        if kept.len() < graph.n() {
            eprintln!(
                "largest component keeps {} of {} vertices; outputs are indexed over the kept vertices in ascending original order",
                kept.len(),
                graph.n()
            );
        }
        groups = groups_from_labels(kept.iter().map(|&v| groups.labels()[v]).collect())?;
        truth = truth
            .map(|t| clustering_from_labels(kept.iter().map(|&v| t.labels()[v]).collect()))
            .transpose()?;
        graph = sub;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let started = Instant::now();
    let clustering = args.algo.run(&graph, args.k, &groups, &mut rng)?;
    let runtime_ms = started.elapsed().as_secs_f64() * 1e3;

    write_file(&args.out, &write_label_file(clustering.labels()))?;

    let mut rep = report(&graph, &clustering, &groups, truth.as_ref())?;
    rep.runtime_ms = runtime_ms;
    println!("algo,k,h,n,error,balance_avg,ratiocut,ncut,runtime_ms");
    println!(
        "{},{},{},{},{},{},{},{},{}",
        args.algo.name(),
        args.k,
        groups.h(),
        graph.n(),
        rep.error.map(fmt_f64).unwrap_or_default(),
        fmt_f64(rep.balance_avg),
        fmt_f64(rep.ratio_cut),
        fmt_f64(rep.ncut),
        fmt_f64(rep.runtime_ms),
    );
    Ok(())
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<(), CliError> {
    let spec = ExperimentSpec::from_args(args)?;
    let csv = run_experiment(&spec)?;
    write_file(&args.out, &csv)?;
    Ok(())
}

fn cmd_spectrum_check(args: &SpectrumArgs) -> Result<ExitCode, CliError> {
    let cfg = args.model.build_config(false)?;
    if cfg.n() > 500 {
        return Err(CliError::config(format!(
            "spectrum check is limited to n <= 500, got n = {}",
            cfg.n()
        )));
    }
    let oracle = theoretical_spectrum(&cfg)?;
    let (a, _, _, _) = cfg.probabilities();
    let n = cfg.n();

    // shifted expected adjacency against the closed-form multiset
    let mut shifted = expected_adjacency(&cfg)?;
    for i in 0..n {
        shifted[[i, i]] += a;
    }
    let dense = smallest_eigenpairs(&shifted, n)?;
    let predicted = oracle.adjacency_spectrum();
    let adjacency_dev = dense
        .values()
        .iter()
        .zip(&predicted)
        .map(|(got, want)| (got - want).abs())
        .fold(0.0f64, f64::max);

    // constrained expected Laplacian spectrum
    let constrained_dev = if cfg.h() >= 2 {
        let (_, can_groups) = cfg.canonical_labels();
        let groups = GroupAssignment::new(cfg.h(), can_groups)?;
        let f = fairness_matrix(&groups)?;
        let z = nullspace_basis(&f.t().to_owned())?;
        let lap = expected_laplacian(&cfg)?;
        let m = z.t().dot(&lap.dot(&z));
        let dense = smallest_eigenpairs(&m, m.nrows())?;
        let predicted = oracle.constrained_spectrum();
        dense
            .values()
            .iter()
            .zip(&predicted)
            .map(|(got, want)| (got - want).abs())
            .fold(0.0f64, f64::max)
    } else {
        0.0
    };

    let max_dev = adjacency_dev.max(constrained_dev);
    println!(
        "adjacency_max_dev={} constrained_max_dev={} max_dev={}",
        fmt_f64(adjacency_dev),
        fmt_f64(constrained_dev),
        fmt_f64(max_dev),
    );
    if max_dev <= 1e-8 {
        println!("spectrum check: PASS");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("spectrum check: FAIL");
        Ok(ExitCode::FAILURE)
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Generate(args) => cmd_generate(args).map(|()| ExitCode::SUCCESS),
        Command::Cluster(args) => cmd_cluster(args).map(|()| ExitCode::SUCCESS),
        Command::Experiment(args) => cmd_experiment(args).map(|()| ExitCode::SUCCESS),
        Command::SpectrumCheck(args) => cmd_spectrum_check(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
