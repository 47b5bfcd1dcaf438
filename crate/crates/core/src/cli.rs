//! Command-line entry points: simulate / learn / eval / bench.

use crate::data::{load_manifest, DatasetBundle, Manifest, ManifestEntry};
use crate::error::{Error, Result};
use crate::fusion::{learn_pag, HyperParams, LearnOutput};
use crate::graph::{parse_graph, render_graph};
use crate::metrics::{report, PenaltyMatrix};
use crate::search::SearchConfig;
use crate::synth::{export_ground_truth, intervene_sample, mask_latents, BayesNetSpec, InterventionPlan};
use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Deserialize;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_TIMEOUT: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "causalfuse", version, about = "Causal structure learning from observational and interventional discrete data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample data sets from a Bayesian-network spec and intervention plan
    Simulate {
        /// network spec JSON
        spec: PathBuf,
        /// intervention plan JSON
        plan: PathBuf,
        /// output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Learn a PAG from a data-set manifest
    Learn {
        /// manifest JSON naming the data sets in processing order
        manifest: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
        /// output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Score a learnt graph against the true MAG
    Eval {
        /// learnt PAG graph file
        pag: PathBuf,
        /// true MAG graph file
        mag: PathBuf,
        /// optional penalty-matrix JSON overriding edge credits
        #[arg(long)]
        penalties: Option<PathBuf>,
        /// also write the metrics JSON here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a simulate -> learn -> eval sweep and emit a results CSV
    Bench {
        /// network spec JSON
        spec: PathBuf,
        /// sweep config JSON
        sweep: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
        /// output CSV path
        #[arg(long, default_value = "bench.csv")]
        out: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
pub struct CommonOpts {
    /// CI-test significance threshold t
    #[arg(long = "alpha-sig", default_value_t = 0.05)]
    pub alpha_sig: f64,
    /// posterior cut-off c for edge selection
    #[arg(long, default_value_t = 0.5)]
    pub cutoff: f64,
    /// maximum separating-set size k
    #[arg(long = "max-sepset", default_value_t = 10)]
    pub max_sepset: usize,
    /// BDeu equivalent sample size
    #[arg(long, default_value_t = 1.0)]
    pub ess: f64,
    /// prior factors to use, e.g. --factors 1,3
    #[arg(long, value_delimiter = ',', default_values_t = vec![1u8, 2, 3])]
    pub factors: Vec<u8>,
    /// worker threads for bench cells
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// base random seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// wall-clock limit in seconds per learning run
    #[arg(long, default_value_t = 14_400)]
    pub timeout: u64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub hyper: HyperParams,
    pub search: SearchConfig,
    pub threads: usize,
    pub timeout_secs: u64,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl CommonOpts {
    pub fn run_config(&self, out_dir: PathBuf) -> Result<RunConfig> {
        if !(0.0..1.0).contains(&self.alpha_sig) || self.alpha_sig <= 0.0 {
            return Err(Error::Validation("--alpha-sig must lie in (0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.cutoff) {
            return Err(Error::Validation("--cutoff must lie in [0, 1]".into()));
        }
        if self.ess <= 0.0 {
            return Err(Error::Validation("--ess must be positive".into()));
        }
        if self.threads < 1 {
            return Err(Error::Validation("--threads must be at least 1".into()));
        }
        if self.timeout == 0 {
            return Err(Error::Validation("--timeout must be positive".into()));
        }
        let mask: BTreeSet<u8> = self.factors.iter().copied().collect();
        if mask.is_empty() || mask.iter().any(|f| !(1..=3).contains(f)) {
            return Err(Error::Validation(
                "--factors must be a nonempty subset of 1,2,3".into(),
            ));
        }
        let mut hyper = HyperParams {
            t: self.alpha_sig,
            c: self.cutoff,
            k: self.max_sepset,
            factor_mask: mask,
            ..HyperParams::default()
        };
        hyper.params.alpha = self.ess;
        hyper.search.params = hyper.params;
        Ok(RunConfig {
            search: hyper.search,
            hyper,
            threads: self.threads,
            timeout_secs: self.timeout,
            seed: self.seed,
            out_dir,
        })
    }
}

/// Write via a temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn cmd_simulate(spec_path: &Path, plan_path: &Path, out: &Path) -> Result<()> {
    let spec = BayesNetSpec::load(spec_path)?;
    let plan = InterventionPlan::load(plan_path)?;
    plan.validate(&spec)?;
    std::fs::create_dir_all(out)?;

    let latents: BTreeSet<usize> = plan
        .latents
        .iter()
        .map(|n| spec.index_of(n).expect("validated"))
        .collect();

    let obs = intervene_sample(
        &spec,
        &BTreeSet::new(),
        plan.observational.n,
        plan.observational.seed,
    )?;
    let obs = mask_latents(&obs, &latents);
    write_atomic(&out.join("obs.csv"), &obs.to_csv())?;

    let mut entries = Vec::new();
    for (idx, entry) in plan.interventional.iter().enumerate() {
        let targets: BTreeSet<usize> = entry
            .targets
            .iter()
            .map(|n| spec.index_of(n).expect("validated"))
            .collect();
        let table = intervene_sample(&spec, &targets, entry.n, entry.seed)?;
        let table = mask_latents(&table, &latents);
        let name = format!("int_{:02}.csv", idx + 1);
        write_atomic(&out.join(&name), &table.to_csv())?;
        entries.push(ManifestEntry {
            path: name,
            targets: entry.targets.clone(),
        });
    }
    let manifest = Manifest {
        observational: "obs.csv".into(),
        interventional: entries,
    };
    write_atomic(
        &out.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest)?,
    )?;

    let (dag, mag) = export_ground_truth(&spec, &latents)?;
    write_atomic(&out.join("true_dag.txt"), &render_graph(&dag))?;
    write_atomic(&out.join("true_mag.txt"), &render_graph(&mag))?;
    Ok(())
}

/// Run learning on a worker thread so the wall-clock limit can be enforced;
/// partial results are discarded on timeout.
pub fn learn_with_timeout(bundle: DatasetBundle, hyper: HyperParams, timeout_secs: u64) -> Result<LearnOutput> {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let _ = tx.send(learn_pag(&bundle, &hyper));
    });
    match rx.recv_timeout(Duration::from_secs(timeout_secs)) {
        Ok(result) => result,
        Err(_) => Err(Error::Timeout(timeout_secs)),
    }
}

pub fn cmd_learn(manifest: &Path, cfg: &RunConfig) -> Result<()> {
    let bundle = load_manifest(manifest)?;
    let names: Vec<String> = bundle.variables().iter().map(|v| v.name.clone()).collect();
    let output = learn_with_timeout(bundle, cfg.hyper.clone(), cfg.timeout_secs)?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    write_atomic(&cfg.out_dir.join("pag.txt"), &render_graph(&output.pag))?;
    write_atomic(
        &cfg.out_dir.join("edge_probs.json"),
        &serde_json::to_string_pretty(&output.probs.to_json(&names))?,
    )?;
    write_atomic(
        &cfg.out_dir.join("diagnostics.json"),
        &serde_json::to_string_pretty(&output.diagnostics)?,
    )?;
    Ok(())
}

pub fn cmd_eval(pag_path: &Path, mag_path: &Path, penalties: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let pag = parse_graph(&std::fs::read_to_string(pag_path)?)?;
    let mag = parse_graph(&std::fs::read_to_string(mag_path)?)?;
    let matrix = match penalties {
        Some(p) => PenaltyMatrix::from_json(&std::fs::read_to_string(p)?)?,
        None => PenaltyMatrix::default(),
    };
    let metrics = report(&pag, &mag, &matrix)?;
    let text = serde_json::to_string_pretty(&metrics)?;
    println!("{text}");
    if let Some(path) = out {
        write_atomic(path, &text)?;
    }
    Ok(())
}

/// Sweep description for `bench`: the cross product of sample sizes and
/// interventional-set counts, each repeated; or an ordering study when
/// `orderings` is set.
#[derive(Debug, Clone, Deserialize)]
pub struct SweepConfig {
    pub repeats: usize,
    pub sample_sizes: Vec<usize>,
    pub num_sets: Vec<usize>,
    #[serde(default = "one")]
    pub targets_per_set: usize,
    #[serde(default)]
    pub latents: Vec<String>,
    /// when set, shuffle the interventional processing order this many
    /// times per cell instead of repeating with fresh data
    #[serde(default)]
    pub orderings: Option<usize>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone)]
struct BenchRow {
    n: usize,
    sets: usize,
    repeat: usize,
    precision: f64,
    recall: f64,
    f1: f64,
    bsf: f64,
    learnt_edges: usize,
    runtime_s: f64,
    status: String,
}

fn mix_seed(base: u64, cell: u64, repeat: u64) -> u64 {
    let mut x = base
        .wrapping_add(cell.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(repeat.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    x ^= x >> 31;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 29;
    x
}

/// Build one synthetic bundle: observational data plus `sets` single- or
/// multi-target interventional tables with randomly chosen targets.
fn bench_bundle(
    spec: &BayesNetSpec,
    latents: &BTreeSet<usize>,
    n: usize,
    sets: usize,
    targets_per_set: usize,
    seed: u64,
    ordering_seed: Option<u64>,
) -> Result<(DatasetBundle, crate::graph::MixedGraph)> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let observable: Vec<usize> = (0..spec.variables.len())
        .filter(|v| !latents.contains(v))
        .collect();
    let obs = mask_latents(&intervene_sample(spec, &BTreeSet::new(), n, seed ^ 1)?, latents);

    let mut interventional = Vec::new();
    for s in 0..sets {
        let mut pool = observable.clone();
        pool.shuffle(&mut rng);
        let targets: BTreeSet<usize> = pool.into_iter().take(targets_per_set).collect();
        let table = mask_latents(
            &intervene_sample(spec, &targets, n, seed ^ (s as u64 + 2))?,
            latents,
        );
        // targets must be re-indexed into the observed-column space
        let masked_targets: BTreeSet<usize> = targets
            .iter()
            .map(|&t| observable.iter().position(|&o| o == t).expect("observable"))
            .collect();
        interventional.push((table, masked_targets));
    }
    if let Some(os) = ordering_seed {
        let mut orng = ChaCha12Rng::seed_from_u64(os);
        interventional.shuffle(&mut orng);
    }
    let (_, mag) = export_ground_truth(spec, latents)?;
    Ok((
        DatasetBundle {
            observational: obs,
            interventional,
        },
        mag,
    ))
}

fn bench_cell(
    spec: &BayesNetSpec,
    sweep: &SweepConfig,
    cfg: &RunConfig,
    n: usize,
    sets: usize,
    repeat: usize,
    cell_idx: u64,
) -> BenchRow {
    let mut row = BenchRow {
        n,
        sets,
        repeat,
        precision: f64::NAN,
        recall: f64::NAN,
        f1: f64::NAN,
        bsf: f64::NAN,
        learnt_edges: 0,
        runtime_s: 0.0,
        status: "ok".into(),
    };
    let latents: BTreeSet<usize> = sweep
        .latents
        .iter()
        .filter_map(|l| spec.index_of(l))
        .collect();
    let seed = mix_seed(cfg.seed, cell_idx, repeat as u64);
    let ordering_seed = sweep.orderings.map(|_| mix_seed(cfg.seed ^ 0x5EED, cell_idx, repeat as u64));
    let start = Instant::now();
    let outcome = bench_bundle(spec, &latents, n, sets, sweep.targets_per_set, seed, ordering_seed)
        .and_then(|(bundle, mag)| {
            let out = learn_with_timeout(bundle, cfg.hyper.clone(), cfg.timeout_secs)?;
            let metrics = report(&out.pag, &mag, &PenaltyMatrix::default())?;
            Ok((out, metrics))
        });
    row.runtime_s = start.elapsed().as_secs_f64();
    match outcome {
        Ok((out, metrics)) => {
            row.precision = metrics.precision;
            row.recall = metrics.recall;
            row.f1 = metrics.f1;
            row.bsf = metrics.bsf;
            row.learnt_edges = out.pag.edge_count();
        }
        Err(Error::Timeout(_)) => row.status = "T".into(),
        Err(e) => row.status = format!("M: {e}"),
    }
    row
}

pub fn cmd_bench(spec_path: &Path, sweep_path: &Path, cfg: &RunConfig, out: &Path) -> Result<()> {
    let spec = BayesNetSpec::load(spec_path)?;
    spec.validate()?;
    let sweep: SweepConfig = serde_json::from_str(&std::fs::read_to_string(sweep_path)?)?;
    if sweep.repeats == 0 || sweep.sample_sizes.is_empty() || sweep.num_sets.is_empty() {
        return Err(Error::Validation(
            "sweep needs repeats >= 1 and nonempty sample_sizes / num_sets".into(),
        ));
    }
    let repeats = sweep.orderings.unwrap_or(sweep.repeats);
    let mut jobs: Vec<(usize, usize, usize, u64)> = Vec::new();
    let mut cell_idx = 0u64;
    for &n in &sweep.sample_sizes {
        for &sets in &sweep.num_sets {
            for repeat in 0..repeats {
                jobs.push((n, sets, repeat, cell_idx));
            }
            cell_idx += 1;
        }
    }

    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<BenchRow>> = Mutex::new(Vec::with_capacity(jobs.len()));
    std::thread::scope(|scope| {
        for _ in 0..cfg.threads.min(jobs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(n, sets, repeat, cell)) = jobs.get(i) else {
                    break;
                };
                let row = bench_cell(&spec, &sweep, cfg, n, sets, repeat, cell);
                rows.lock().unwrap().push(row);
            });
        }
    });
    let mut rows = rows.into_inner().unwrap();
    rows.sort_by_key(|r| (r.n, r.sets, r.repeat));

    let mut csv = String::from("n,sets,repeat,precision,recall,f1,bsf,learnt_edges,runtime_s,status\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{:.4},{:.4},{:.4},{:.4},{},{:.3},{}\n",
            r.n, r.sets, r.repeat, r.precision, r.recall, r.f1, r.bsf, r.learnt_edges, r.runtime_s,
            r.status.replace(',', ";")
        ));
    }
    for &n in &sweep.sample_sizes {
        for &sets in &sweep.num_sets {
            let ok: Vec<&BenchRow> = rows
                .iter()
                .filter(|r| r.n == n && r.sets == sets && r.status == "ok")
                .collect();
            if ok.is_empty() {
                continue;
            }
            let m = ok.len() as f64;
            let mean = |f: fn(&BenchRow) -> f64| ok.iter().map(|r| f(r)).sum::<f64>() / m;
            csv.push_str(&format!(
                "{},{},mean,{:.4},{:.4},{:.4},{:.4},{:.1},{:.3},ok\n",
                n,
                sets,
                mean(|r| r.precision),
                mean(|r| r.recall),
                mean(|r| r.f1),
                mean(|r| r.bsf),
                mean(|r| r.learnt_edges as f64),
                mean(|r| r.runtime_s),
            ));
        }
    }
    write_atomic(out, &csv)?;
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Timeout(_) => EXIT_TIMEOUT,
        _ => EXIT_VALIDATION,
    }
}

/// Dispatch a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Simulate { spec, plan, out } => cmd_simulate(&spec, &plan, &out),
        Command::Learn { manifest, opts, out } => opts
            .run_config(out)
            .and_then(|cfg| cmd_learn(&manifest, &cfg)),
        Command::Eval { pag, mag, penalties, out } => {
            cmd_eval(&pag, &mag, penalties.as_deref(), out.as_deref())
        }
        Command::Bench { spec, sweep, opts, out } => opts
            .run_config(out.parent().unwrap_or(Path::new(".")).to_path_buf())
            .and_then(|cfg| cmd_bench(&spec, &sweep, &cfg, &out)),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
