//! Training, evaluation and the sweep and generalization protocols.

use std::collections::BTreeSet;

use grail_core::envs::{
    evaluate_policy, evaluation_seeds, EnvConfig, EnvError, EvalSummary, Expert, StepRecord,
};
use grail_core::gaze::{fit_gaze_model, GazeFitConfig};
use grail_core::grounding::{
    build_atom_index, calibrate_predicates, oracle_valuation, CalibrationConfig, CalibrationReport,
    SoftPredicateParams,
};
use grail_core::learning::{train, TrainConfig, TrainReport};
use grail_core::pipeline::{GazeSource, Pipeline};
use grail_core::{ClauseWeights, GazeModelParams, ReasonerConfig, RuleBase};
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{self, Dataset};
use crate::results::{ResultRow, ResultsTable};
use crate::weights::PolicyConfig;
use crate::Error;

/// Most states used to calibrate predicates or fit the gaze model.
const MAX_FIT_STATES: usize = 1000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GazeSourceKind {
    /// Heatmaps rendered from the recorded fixations.
    #[default]
    Fixations,
    /// Heatmaps predicted by a gaze model fitted to the recorded ones.
    Model,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOptions {
    pub use_gaze: bool,
    pub gaze_source: GazeSourceKind,
    pub gaze_sigma: f64,
    pub calibrate: bool,
    /// Share of trajectories kept, in `(0, 1]`.
    pub fraction: f64,
    pub train: TrainConfig,
    pub reasoner: ReasonerConfig,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            use_gaze: true,
            gaze_source: GazeSourceKind::Fixations,
            gaze_sigma: grail_core::gaze::DEFAULT_SIGMA,
            calibrate: true,
            fraction: 1.0,
            train: TrainConfig::default(),
            reasoner: ReasonerConfig::default(),
        }
    }
}

pub fn method_name(use_gaze: bool) -> &'static str {
    if use_gaze {
        "GRAIL"
    } else {
        "NSFR-IL"
    }
}

#[derive(Clone, Debug)]
pub struct TrainedPolicy {
    pub pipeline: Pipeline,
    pub weights: ClauseWeights,
    pub report: TrainReport,
    pub calibration: Option<CalibrationReport>,
    pub gaze_model: Option<GazeModelParams>,
    pub kept_trajectories: Vec<u64>,
}

impl TrainedPolicy {
    pub fn policy_config(&self, env: &EnvConfig) -> PolicyConfig {
        PolicyConfig {
            env: env.kind.name().to_string(),
            objects_per_type: env.objects_per_type,
            use_gaze: self.report.use_gaze,
            reasoner: self.pipeline.rcfg.clone(),
            predicates: self.pipeline.params.clone(),
            gaze_model: self.gaze_model.clone(),
        }
    }
}

/// Keeps `ceil(fraction · n)` trajectories (at least two), chosen by a seeded
/// shuffle of the trajectory ids.
pub fn subsample(records: &[StepRecord], fraction: f64, seed: u64) -> Result<(Vec<StepRecord>, Vec<u64>), Error> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("fraction must lie in (0, 1], got {fraction}")));
    }
    let ids: BTreeSet<u64> = records.iter().map(|r| r.episode_id).collect();
    let mut ids: Vec<u64> = ids.into_iter().collect();
    let keep = ((fraction * ids.len() as f64).ceil() as usize).clamp(ids.len().min(2), ids.len());
    if keep < ids.len() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(2);
        ids.shuffle(&mut rng);
        ids.truncate(keep);
        ids.sort_unstable();
    }
    let kept = records.iter().filter(|r| ids.binary_search(&r.episode_id).is_ok()).cloned().collect();
    Ok((kept, ids))
}

fn spread<T>(items: &[T]) -> impl Iterator<Item = &T> {
    let step = items.len().div_ceil(MAX_FIT_STATES).max(1);
    items.iter().step_by(step)
}

/// Fits predicate thresholds and temperatures to crisp atom labels of the
/// demonstration states.
pub fn calibrate(rb: &RuleBase, env: &EnvConfig, records: &[StepRecord]) -> Result<CalibrationReport, Error> {
    let idx = build_atom_index(rb, &env.inventory())?;
    let base = SoftPredicateParams::default();
    let data = spread(records)
        .map(|r| Ok((r.state.clone(), oracle_valuation(&r.state, &base, &idx)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(calibrate_predicates(&data, &base, &idx, &CalibrationConfig::default())?)
}

/// Grounding, optional predicate calibration, optional gaze modulation and
/// behavior cloning on a dataset.
pub fn train_policy(rb: &RuleBase, data: &Dataset, opts: &TrainOptions) -> Result<TrainedPolicy, Error> {
    let (records, kept) = subsample(&data.records, opts.fraction, opts.train.seed)?;
    let calibration = if opts.calibrate {
        Some(calibrate(rb, &data.config, &records)?)
    } else {
        None
    };
    let params = calibration.as_ref().map(|c| c.params.clone()).unwrap_or_default();
    let pipeline = Pipeline::new(rb, &data.config.inventory(), &params, &opts.reasoner)?;
    let fixations = GazeSource::Fixations {
        sigma: opts.gaze_sigma,
    };
    let (source, gaze_model) = match (opts.use_gaze, opts.gaze_source) {
        (false, _) => (None, None),
        (true, GazeSourceKind::Fixations) => (Some(fixations), None),
        (true, GazeSourceKind::Model) => {
            let frames = spread(&records)
                .map(|r| Ok((r.state.clone(), pipeline.heatmap(r, &fixations)?)))
                .collect::<Result<Vec<_>, Error>>()?;
            let n_types = data.config.inventory().types.len();
            let fit = fit_gaze_model(&frames, &GazeModelParams::new(n_types), &GazeFitConfig::default())?;
            (Some(GazeSource::Model(fit.params.clone())), Some(fit.params))
        }
    };
    let frames = pipeline.frames(&records, source.as_ref())?;
    let report = train(&frames, &pipeline.graph, &pipeline.rcfg, &opts.train, opts.use_gaze)?;
    Ok(TrainedPolicy {
        weights: report.weights.clone(),
        pipeline,
        report,
        calibration,
        gaze_model,
        kept_trajectories: kept,
    })
}

/// Evaluation seeds for a master seed; seed 0 gives the standard set.
pub fn eval_seeds(seed: u64, n: usize) -> Vec<u64> {
    evaluation_seeds(n)
        .into_iter()
        .map(|s| s.wrapping_add(seed.wrapping_mul(1 << 20)))
        .collect()
}

/// The same policy over another environment configuration, e.g. more
/// objects per type.
pub fn rebuild(pipeline: &Pipeline, env: &EnvConfig) -> Result<Pipeline, Error> {
    Ok(Pipeline::new(&pipeline.rb, &env.inventory(), &pipeline.params, &pipeline.rcfg)?)
}

pub fn evaluate(pipeline: &Pipeline, w: &ClauseWeights, env: &EnvConfig, seeds: &[u64]) -> Result<EvalSummary, Error> {
    Ok(evaluate_policy(env, seeds, &mut |s| {
        pipeline.act(w, s).map_err(|e| EnvError::Policy(e.to_string()))
    })?)
}

/// The scripted expert through the same harness: the reference ceiling.
pub fn evaluate_expert(rb: &RuleBase, env: &EnvConfig, seeds: &[u64]) -> Result<EvalSummary, Error> {
    let ignore: Vec<usize> = env.decoy_slot().into_iter().collect();
    let expert = Expert::new(rb, &env.inventory(), &SoftPredicateParams::default(), &ignore)?;
    Ok(evaluate_policy(env, seeds, &mut |s| Ok(expert.decide(s)?.action))?)
}

pub fn accuracy(pipeline: &Pipeline, w: &ClauseWeights, records: &[StepRecord]) -> Result<f64, Error> {
    Ok(pipeline.accuracy(w, records)?)
}

/// Runs `f` over `cells`, on `jobs` threads when `jobs > 1`. Results keep
/// cell order, so output does not depend on scheduling.
pub fn run_cells<C, R, F>(cells: &[C], jobs: usize, f: F) -> Result<Vec<R>, Error>
where
    C: Sync,
    R: Send,
    F: Fn(&C) -> Result<R, Error> + Sync + Send,
{
    if jobs <= 1 {
        return cells.iter().map(&f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| cells.par_iter().map(&f).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOptions {
    pub fractions: Vec<f64>,
    pub methods: Vec<bool>,
    pub train_seeds: Vec<u64>,
    pub eval_seeds: Vec<u64>,
    pub jobs: usize,
}

/// Trains every (fraction, method, seed) cell and evaluates it. Accuracy is
/// measured on `test` when given.
pub fn sweep(
    rb: &RuleBase,
    data: &Dataset,
    test: Option<&Dataset>,
    base: &TrainOptions,
    opts: &SweepOptions,
) -> Result<ResultsTable, Error> {
    let mut cells = Vec::new();
    for &fraction in &opts.fractions {
        for &use_gaze in &opts.methods {
            for &seed in &opts.train_seeds {
                cells.push((fraction, use_gaze, seed));
            }
        }
    }
    let eval_env = match test {
        Some(t) => t.config.clone(),
        None => data.config.clone(),
    };
    let rows = run_cells(&cells, opts.jobs, |&(fraction, use_gaze, seed)| {
        let o = TrainOptions {
            use_gaze,
            fraction,
            train: TrainConfig { seed, ..base.train.clone() },
            ..base.clone()
        };
        let p = train_policy(rb, data, &o)?;
        let eval = evaluate(&p.pipeline, &p.weights, &eval_env, &opts.eval_seeds)?;
        let accuracy = match test {
            Some(t) => Some(accuracy(&p.pipeline, &p.weights, &t.records)?),
            None => None,
        };
        Ok(ResultRow {
            method: method_name(use_gaze).to_string(),
            env: data.config.kind.name().to_string(),
            train_objects: data.config.objects_per_type,
            eval_objects: eval_env.objects_per_type,
            fraction,
            train_seed: seed,
            mean: eval.mean,
            std: eval.std,
            n_seeds: opts.eval_seeds.len(),
            accuracy,
        })
    })?;
    Ok(ResultsTable { rows })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizeOptions {
    pub train_objects: Vec<usize>,
    pub eval_objects: Vec<usize>,
    pub episodes: usize,
    pub data_seed: u64,
    pub eval_seeds: Vec<u64>,
    pub jobs: usize,
}

/// Trains at each object count and evaluates every trained policy at every
/// evaluation count.
pub fn generalize(rb: &RuleBase, env: &EnvConfig, base: &TrainOptions, opts: &GeneralizeOptions) -> Result<ResultsTable, Error> {
    let trained = run_cells(&opts.train_objects, opts.jobs, |&n| {
        let cfg = env.clone().with_objects(n);
        let data = dataset::generate(&cfg, rb, opts.episodes, opts.data_seed)?;
        Ok((n, train_policy(rb, &data, base)?))
    })?;
    let mut cells = Vec::new();
    for (k, _) in trained.iter().enumerate() {
        for &m in &opts.eval_objects {
            cells.push((k, m));
        }
    }
    let rows = run_cells(&cells, opts.jobs, |&(k, m)| {
        let (n, p) = &trained[k];
        let cfg = env.clone().with_objects(m);
        let pipe = rebuild(&p.pipeline, &cfg)?;
        let eval = evaluate(&pipe, &p.weights, &cfg, &opts.eval_seeds)?;
        Ok(ResultRow {
            method: method_name(base.use_gaze).to_string(),
            env: env.kind.name().to_string(),
            train_objects: *n,
            eval_objects: m,
            fraction: base.fraction,
            train_seed: base.train.seed,
            mean: eval.mean,
            std: eval.std,
            n_seeds: opts.eval_seeds.len(),
            accuracy: None,
        })
    })?;
    Ok(ResultsTable { rows })
}
