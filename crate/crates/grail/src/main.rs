use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use grail::config::ExperimentConfig;
use grail::dataset::{self, Dataset};
use grail::experiment::{self, GazeSourceKind, GeneralizeOptions, SweepOptions};
use grail::results::{ResultRow, ResultsTable};
use grail::weights::WeightFile;
use grail::{env_kind, inspect, parse_rules, rules_text};
use grail_core::envs::{DecoyMode, EnvConfig};
use grail_core::learning::EpochRecord;
use grail_core::ClauseWeights;
use serde::Serialize;

/// Gaze-guided relational imitation learning on mini Atari-style games.
#[derive(Parser, Debug)]
#[command(name = "grail", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// TOML experiment file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// asterix-mini, seaquest-mini or freeway-mini
    #[arg(long, global = true)]
    env: Option<String>,
    /// Rule file; defaults to the bundled rule base of the environment
    #[arg(long, global = true)]
    rules: Option<PathBuf>,
    /// Worker threads for independent runs
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Roll the scripted expert and write a demonstration dataset
    GenData {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        episodes: Option<usize>,
        /// Objects per non-player type
        #[arg(long)]
        objects: Option<usize>,
        /// Add the intangible decoy bonus: correlated or random
        #[arg(long)]
        decoy: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Train rule weights on a dataset
    Train {
        #[arg(long)]
        data: Option<PathBuf>,
        /// Output directory for weights.txt, train.jsonl and report.json
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip gaze modulation (the NSFR-IL ablation)
        #[arg(long)]
        no_gaze: bool,
        /// Share of trajectories to train on
        #[arg(long)]
        fraction: Option<f64>,
        /// fixations or model
        #[arg(long, value_parser = parse_source)]
        gaze_source: Option<GazeSourceKind>,
        /// Keep the default predicate parameters
        #[arg(long)]
        no_calibrate: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Roll a policy over evaluation seeds and report its mean score
    Eval {
        /// Weight file to evaluate
        #[arg(long, conflicts_with_all = ["constant_weight", "expert"])]
        weights: Option<PathBuf>,
        /// Evaluate the rule base with every weight set to this value
        #[arg(long, conflicts_with = "expert")]
        constant_weight: Option<f64>,
        /// Evaluate the scripted expert
        #[arg(long)]
        expert: bool,
        /// Objects per type at evaluation time
        #[arg(long)]
        objects: Option<usize>,
        /// Number of evaluation seeds
        #[arg(long)]
        seeds: Option<usize>,
        /// Held-out dataset for action accuracy
        #[arg(long)]
        data: Option<PathBuf>,
        /// Write result rows as JSON lines
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Print a weight file as a table, heaviest rule first
    Inspect {
        #[arg(long)]
        weights: PathBuf,
        /// Emit JSON lines instead of the table
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Score against training-set fraction for both methods
    Sweep {
        #[arg(long)]
        data: Option<PathBuf>,
        /// Held-out dataset for accuracy and evaluation settings
        #[arg(long)]
        test_data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        fractions: Option<Vec<f64>>,
        /// Comma-separated: grail, nsfr
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        #[arg(long)]
        train_seeds: Option<usize>,
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        no_gaze: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Train at some object counts and evaluate at others
    Generalize {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        train_objects: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        eval_objects: Option<Vec<usize>>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        no_gaze: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_source(s: &str) -> Result<GazeSourceKind, String> {
    match s {
        "fixations" => Ok(GazeSourceKind::Fixations),
        "model" => Ok(GazeSourceKind::Model),
        _ => Err(format!("expected fixations or model, got {s}")),
    }
}

/// A problem with the invocation rather than with the run.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn required<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Usage(format!("missing --{flag} (or `{flag}` in --config)")).into())
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(e) = &common.env {
        cfg.env = e.clone();
    }
    if let Some(r) = &common.rules {
        cfg.rules = Some(r.clone());
    }
    if let Some(j) = common.jobs {
        cfg.jobs = j;
    }
    Ok(cfg)
}

fn check(cfg: &ExperimentConfig) -> Result<()> {
    cfg.validate().map_err(|e| Usage(e.to_string()))?;
    Ok(())
}

fn env_config(cfg: &ExperimentConfig, objects: usize) -> Result<EnvConfig> {
    let mut env = EnvConfig::new(env_kind(&cfg.env)?).with_objects(objects);
    env.decoy = match cfg.decoy.as_deref() {
        Some("correlated") => Some(DecoyMode::Correlated),
        Some("random") => Some(DecoyMode::Random),
        _ => None,
    };
    Ok(env)
}

/// Rule text and parsed rule base for the configured environment.
fn rules(cfg: &ExperimentConfig, kind: grail_core::envs::EnvKind) -> Result<(String, grail_core::RuleBase)> {
    let text = rules_text(kind, cfg.rules.as_deref())?;
    let origin = cfg
        .rules
        .as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_else(|| format!("<bundled {}>", kind.name()));
    let rb = parse_rules(kind, &text, &origin)?;
    Ok((text, rb))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(table: &ResultsTable, out: Option<&Path>) -> Result<()> {
    print!("{}", table.render());
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        write_text(&dir.join("results.jsonl"), &table.to_jsonl()?)?;
        write_text(&dir.join("results.tsv"), &table.to_tsv())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    method: &'a str,
    fraction: f64,
    kept_trajectories: &'a [u64],
    train_frames: usize,
    val_frames: usize,
    stop_reason: grail_core::learning::StopReason,
    best_epoch: Option<usize>,
    initial_val_loss: f64,
    best_val_loss: f64,
    calibration_loss: Option<(f64, f64)>,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData {
            out,
            episodes,
            objects,
            decoy,
            common,
        } => {
            let mut cfg = load_config(&common)?;
            cfg.episodes = episodes.unwrap_or(cfg.episodes);
            cfg.objects = objects.unwrap_or(cfg.objects);
            cfg.decoy = decoy.or(cfg.decoy);
            let out = required(out.or(cfg.out.clone()), "out")?;
            check(&cfg)?;
            let env = env_config(&cfg, cfg.objects)?;
            let (_, rb) = rules(&cfg, env.kind)?;
            let data = dataset::generate(&env, &rb, cfg.episodes, cfg.seed)?;
            dataset::write(&out, &data)?;
            println!(
                "{} samples in {} trajectories (max {} objects) written to {}",
                data.stats.samples,
                data.stats.trajectories,
                data.stats.max_object_count,
                out.display()
            );
        }
        Command::Train {
            data,
            out,
            no_gaze,
            fraction,
            gaze_source,
            no_calibrate,
            common,
        } => {
            let mut cfg = load_config(&common)?;
            cfg.data = data.or(cfg.data);
            cfg.fraction = fraction.unwrap_or(cfg.fraction);
            cfg.gaze &= !no_gaze;
            cfg.calibrate &= !no_calibrate;
            cfg.gaze_source = gaze_source.unwrap_or(cfg.gaze_source);
            let data_dir = required(cfg.data.clone(), "data")?;
            let out = required(out.or(cfg.out.clone()), "out")?;
            check(&cfg)?;
            let ds: Dataset = dataset::read(&data_dir)?;
            cfg.env = ds.config.kind.name().to_string();
            let (text, rb) = rules(&cfg, ds.config.kind)?;
            let trained = experiment::train_policy(&rb, &ds, &cfg.train_options())?;
            let wf = WeightFile::new(&text, &rb, &trained.weights, trained.policy_config(&ds.config))?;
            wf.save(&out.join("weights.txt"))?;
            let mut log = String::new();
            for e in &trained.report.epochs {
                log.push_str(&serde_json::to_string::<EpochRecord>(e)?);
                log.push('\n');
            }
            write_text(&out.join("train.jsonl"), &log)?;
            let r = &trained.report;
            let summary = TrainSummary {
                method: experiment::method_name(cfg.gaze),
                fraction: cfg.fraction,
                kept_trajectories: &trained.kept_trajectories,
                train_frames: r.train_frames,
                val_frames: r.val_frames,
                stop_reason: r.stop_reason,
                best_epoch: r.best_epoch,
                initial_val_loss: r.initial_val_loss,
                best_val_loss: r.best_val_loss,
                calibration_loss: trained.calibration.as_ref().map(|c| (c.initial_loss, c.final_loss)),
            };
            write_text(&out.join("report.json"), &(serde_json::to_string_pretty(&summary)? + "\n"))?;
            println!(
                "{}: {} epochs, validation loss {:.4} -> {:.4}, {} of {} trajectories; weights in {}",
                summary.method,
                r.epochs.len(),
                r.initial_val_loss,
                r.best_val_loss,
                trained.kept_trajectories.len(),
                ds.stats.trajectories,
                out.join("weights.txt").display()
            );
        }
        Command::Eval {
            weights,
            constant_weight,
            expert,
            objects,
            seeds,
            data,
            out,
            common,
        } => {
            let mut cfg = load_config(&common)?;
            cfg.seeds = seeds.unwrap_or(cfg.seeds);
            cfg.data = data.or(cfg.data);
            let wf = weights.as_deref().map(WeightFile::load).transpose()?;
            if let Some(wf) = &wf {
                if common.env.is_none() {
                    cfg.env = wf.config.env.clone();
                }
                cfg.objects = wf.config.objects_per_type;
            }
            cfg.objects = objects.or(cfg.eval_objects).unwrap_or(cfg.objects);
            check(&cfg)?;
            let env = env_config(&cfg, cfg.objects)?;
            let (text, rb) = rules(&cfg, env.kind)?;
            let seeds = experiment::eval_seeds(cfg.seed, cfg.seeds);
            let test = cfg.data.as_deref().map(dataset::read).transpose()?;
            let (method, eval, accuracy) = if expert {
                ("expert".to_string(), experiment::evaluate_expert(&rb, &env, &seeds)?, None)
            } else {
                let (method, w, pcfg) = match (&wf, constant_weight) {
                    (Some(wf), _) => {
                        wf.check_rules(&text)?;
                        (
                            experiment::method_name(wf.config.use_gaze).to_string(),
                            wf.weights(),
                            Some(wf.config.clone()),
                        )
                    }
                    (None, Some(c)) => (format!("W={c}"), ClauseWeights::constant(rb.len(), c), None),
                    (None, None) => return Err(Usage("eval needs --weights, --constant-weight or --expert".into()).into()),
                };
                let (params, rcfg) = match pcfg {
                    Some(p) => (p.predicates, p.reasoner),
                    None => (Default::default(), cfg.reasoner.clone()),
                };
                let pipe = grail_core::pipeline::Pipeline::new(&rb, &env.inventory(), &params, &rcfg)?;
                let eval = experiment::evaluate(&pipe, &w, &env, &seeds)?;
                let acc = match &test {
                    Some(t) => Some(experiment::accuracy(&pipe, &w, &t.records)?),
                    None => None,
                };
                (method, eval, acc)
            };
            let accuracy = if expert {
                test.as_ref().map(|_| 1.0)
            } else {
                accuracy
            };
            let table = ResultsTable {
                rows: vec![ResultRow {
                    method,
                    env: env.kind.name().to_string(),
                    train_objects: wf.as_ref().map(|w| w.config.objects_per_type).unwrap_or(env.objects_per_type),
                    eval_objects: env.objects_per_type,
                    fraction: 1.0,
                    train_seed: cfg.seed,
                    mean: eval.mean,
                    std: eval.std,
                    n_seeds: seeds.len(),
                    accuracy,
                }],
            };
            emit(&table, out.as_deref())?;
        }
        Command::Inspect { weights, json, common } => {
            let cfg = load_config(&common)?;
            let wf = WeightFile::load(&weights)?;
            if let Some(path) = &cfg.rules {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                wf.check_rules(&text)?;
            }
            let rows = inspect::rows(&wf);
            if json {
                for r in &rows {
                    println!("{}", serde_json::to_string(r)?);
                }
            } else {
                print!("{}", inspect::render(&rows));
            }
        }
        Command::Sweep {
            data,
            test_data,
            out,
            fractions,
            methods,
            train_seeds,
            seeds,
            no_gaze,
            common,
        } => {
            let mut cfg = load_config(&common)?;
            cfg.data = data.or(cfg.data);
            cfg.fractions = fractions.unwrap_or(cfg.fractions);
            cfg.train_seeds = train_seeds.unwrap_or(cfg.train_seeds);
            cfg.seeds = seeds.unwrap_or(cfg.seeds);
            let data_dir = required(cfg.data.clone(), "data")?;
            check(&cfg)?;
            let methods = match methods {
                Some(m) => m
                    .iter()
                    .map(|s| match s.as_str() {
                        "grail" => Ok(true),
                        "nsfr" | "nsfr-il" => Ok(false),
                        other => Err(Usage(format!("unknown method `{other}` (grail or nsfr)"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?,
                None if no_gaze => vec![false],
                None => vec![true, false],
            };
            let ds = dataset::read(&data_dir)?;
            let test = test_data.as_deref().map(dataset::read).transpose()?;
            let (_, rb) = rules(&cfg, ds.config.kind)?;
            let opts = SweepOptions {
                fractions: cfg.fractions.clone(),
                methods,
                train_seeds: (0..cfg.train_seeds as u64).map(|k| cfg.seed + k).collect(),
                eval_seeds: experiment::eval_seeds(cfg.seed, cfg.seeds),
                jobs: cfg.jobs,
            };
            let table = experiment::sweep(&rb, &ds, test.as_ref(), &cfg.train_options(), &opts)?;
            emit(&table, out.as_deref().or(cfg.out.as_deref()))?;
        }
        Command::Generalize {
            out,
            train_objects,
            eval_objects,
            episodes,
            seeds,
            no_gaze,
            common,
        } => {
            let mut cfg = load_config(&common)?;
            cfg.train_objects_grid = train_objects.unwrap_or(cfg.train_objects_grid);
            cfg.eval_objects_grid = eval_objects.unwrap_or(cfg.eval_objects_grid);
            cfg.episodes = episodes.unwrap_or(cfg.episodes);
            cfg.seeds = seeds.unwrap_or(cfg.seeds);
            cfg.gaze &= !no_gaze;
            check(&cfg)?;
            let env = env_config(&cfg, 1)?;
            let (_, rb) = rules(&cfg, env.kind)?;
            let opts = GeneralizeOptions {
                train_objects: cfg.train_objects_grid.clone(),
                eval_objects: cfg.eval_objects_grid.clone(),
                episodes: cfg.episodes,
                data_seed: cfg.seed,
                eval_seeds: experiment::eval_seeds(cfg.seed, cfg.seeds),
                jobs: cfg.jobs,
            };
            let table = experiment::generalize(&rb, &env, &cfg.train_options(), &opts)?;
            emit(&table, out.as_deref().or(cfg.out.as_deref()))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
