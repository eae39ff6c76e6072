//! Sweep runner: samples one graph per (sweep value, trial), runs every
//! requested algorithm on it, and emits one CSV row per (value, trial,
//! algorithm) in deterministic order. Trials run on rayon; rows are buffered
//! and ordered before writing, so the CSV is byte-stable for a given spec.

use std::time::Instant;

use clap::ValueEnum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use fairsc::metrics::report;
use fairsc::sbm::{perturb_groups, sample_fair_sbm, FairSbmConfig};

use crate::{fmt_f64, Algo, CliError, ExperimentArgs};

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum SweepVar {
    N,
    K,
    P,
}

impl SweepVar {
    fn name(self) -> &'static str {
        match self {
            SweepVar::N => "n",
            SweepVar::K => "k",
            SweepVar::P => "p",
        }
    }
}

/// One sweep point: the instance configuration, the cluster count handed to
/// the algorithms, the perturbation applied to the sampled groups, and the
/// value label for the CSV.
struct SweepPoint {
    cfg: FairSbmConfig,
    k: usize,
    perturb: f64,
    value_label: String,
}

pub struct ExperimentSpec {
    sweep: SweepVar,
    points: Vec<SweepPoint>,
    trials: usize,
    algos: Vec<Algo>,
    base_seed: u64,
}

impl ExperimentSpec {
    pub fn from_args(args: &ExperimentArgs) -> Result<Self, CliError> {
        if args.trials < 1 {
            return Err(CliError::config("--trials must be at least 1"));
        }
        if args.algos.is_empty() {
            return Err(CliError::config("--algos must name at least one algorithm"));
        }
        let needs_perturbation =
            args.sweep == SweepVar::P || args.perturb_p > 0.0;
        if needs_perturbation && args.model.h != 2 {
            return Err(CliError::config(
                "group perturbation is defined for exactly two groups (h = 2)",
            ));
        }
        if args.sweep != SweepVar::P && !(0.0..=1.0).contains(&args.perturb_p) {
            return Err(CliError::config("--perturb-p must lie in [0, 1]"));
        }
        let mut points = Vec::with_capacity(args.values.len());
        for raw in &args.values {
            let point = match args.sweep {
                SweepVar::N => {
                    if args.model.cluster_sizes.is_some() {
                        return Err(CliError::config(
                            "--cluster-sizes cannot be combined with --sweep n",
                        ));
                    }
                    let n: usize = parse_value(raw)?;
                    SweepPoint {
                        cfg: args.model.build_config_for_n(n, false)?,
                        k: args.model.k,
                        perturb: args.perturb_p,
                        value_label: n.to_string(),
                    }
                }
                SweepVar::K => {
                    if args.model.cluster_sizes.is_some() {
                        return Err(CliError::config(
                            "--cluster-sizes cannot be combined with --sweep k",
                        ));
                    }
                    let k: usize = parse_value(raw)?;
                    if k == 0 {
                        return Err(CliError::config("swept k must be positive"));
                    }
                    // round the target up to the nearest multiple of k*h
                    let cell = k * args.model.h;
                    let n = cell * args.model.n.div_ceil(cell);
                    let mut model = args.model.clone();
                    model.k = k;
                    SweepPoint {
                        cfg: model.build_config_for_n(n, false)?,
                        k,
                        perturb: args.perturb_p,
                        value_label: k.to_string(),
                    }
                }
                SweepVar::P => {
                    let p: f64 = parse_value(raw)?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(CliError::config(format!(
                            "swept perturbation {p} outside [0, 1]"
                        )));
                    }
                    SweepPoint {
                        cfg: args.model.build_config(false)?,
                        k: args.model.k,
                        perturb: p,
                        value_label: fmt_f64(p),
                    }
                }
            };
            points.push(point);
        }
        Ok(Self {
            sweep: args.sweep,
            points,
            trials: args.trials,
            algos: args.algos.clone(),
            base_seed: args.seed,
        })
    }
}

fn parse_value<T: std::str::FromStr>(raw: &str) -> Result<T, CliError> {
    raw.trim()
        .parse()
        .map_err(|_| CliError::config(format!("invalid sweep value {raw:?}")))
}

// splitmix64, for deriving independent sub-seeds
fn mix_seed(master: u64, salt: u64) -> u64 {
    let mut z = master ^ salt.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn run_trial(
    spec: &ExperimentSpec,
    point_idx: usize,
    trial: usize,
) -> Result<Vec<String>, CliError> {
    let point = &spec.points[point_idx];
    // base_seed + trial index; points of a p sweep share the trial's graph
    let trial_seed = spec.base_seed.wrapping_add(trial as u64);
    let mut sample_rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let (graph, truth, groups) = sample_fair_sbm(&point.cfg, &mut sample_rng)?;
    let algo_groups = if point.perturb > 0.0 || spec.sweep == SweepVar::P {
        let mut perturb_rng = ChaCha8Rng::seed_from_u64(mix_seed(trial_seed, 0x9e));
        perturb_groups(&groups, point.perturb, &mut perturb_rng)?
    } else {
        groups.clone()
    };

    let mut rows = Vec::with_capacity(spec.algos.len());
    for &algo in &spec.algos {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(trial_seed, 1000 + algo.tag()));
        let started = Instant::now();
        let clustering = algo.run(&graph, point.k, &algo_groups, &mut rng)?;
        let runtime_ms = started.elapsed().as_secs_f64() * 1e3;
        // error vs the planted clustering; balance vs the unperturbed groups
        let rep = report(&graph, &clustering, &groups, Some(&truth))?;
        rows.push(format!(
            "{},{},{},{},{},{},{},{},{}",
            spec.sweep.name(),
            point.value_label,
            trial,
            algo.name(),
            rep.error.map(fmt_f64).unwrap_or_default(),
            fmt_f64(rep.balance_avg),
            fmt_f64(rep.ratio_cut),
            fmt_f64(rep.ncut),
            fmt_f64(runtime_ms),
        ));
    }
    Ok(rows)
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<String, CliError> {
    let tasks: Vec<(usize, usize)> = (0..spec.points.len())
        .flat_map(|p| (0..spec.trials).map(move |t| (p, t)))
        .collect();
    // tasks come back in (point, trial) order; rows within a task follow the
    // --algos order
    let results: Result<Vec<Vec<String>>, CliError> = tasks
        .par_iter()
        .map(|&(point_idx, trial)| run_trial(spec, point_idx, trial))
        .collect();
    let mut csv = String::from("sweep_var,value,trial,algo,error,balance_avg,ratiocut,ncut,runtime_ms\n");
    for rows in results? {
        for row in rows {
            csv.push_str(&row);
            csv.push('\n');
        }
    }
    Ok(csv)
}
