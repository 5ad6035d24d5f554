//! Expert rollouts, dataset generation and policy evaluation.

use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{synth_gaze, EnvConfig, EnvError, Env, Expert, TerminalReason};
use crate::gaze::FixationList;
use crate::grounding::LogicState;
use crate::math::mean_std;

/// RNG stream for expert noise and synthetic gaze, kept apart from the game
/// dynamics so that gaze settings never change a trajectory.
const GAZE_STREAM: u64 = 7;

/// One recorded demonstration step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub episode_id: u64,
    pub t: usize,
    pub state: LogicState,
    pub action: usize,
    pub fixations: FixationList,
    pub fired_rule: Option<usize>,
    pub score_delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpisodeSummary {
    pub episode_id: u64,
    pub score: f64,
    pub length: usize,
    pub terminal: TerminalReason,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DatasetStats {
    pub samples: usize,
    pub trajectories: usize,
    pub max_object_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerateOptions {
    pub n_episodes: usize,
    pub seed: u64,
}

/// Seed of episode `e` under a master seed.
pub fn episode_seed(master: u64, e: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(e + 1);
    rng.next_u64()
}

/// Number of evaluation seeds behind a reported mean score.
pub const DEFAULT_EVAL_SEEDS: usize = 50;

/// Seeds used for policy evaluation: fixed and disjoint from training
/// episodes drawn through [`episode_seed`] with overwhelming probability.
pub fn evaluation_seeds(n: usize) -> Vec<u64> {
    (0..n as u64).map(|i| 1_000_000 + i).collect()
}

/// Rolls the expert for one episode from `seed`.
pub fn expert_episode(
    cfg: &EnvConfig,
    expert: &Expert,
    episode_id: u64,
    seed: u64,
) -> Result<(Vec<StepRecord>, EpisodeSummary), EnvError> {
    let mut env = Env::reset(cfg, seed)?;
    let mut aux = ChaCha8Rng::seed_from_u64(seed);
    aux.set_stream(GAZE_STREAM);
    let n_actions = env.n_actions();
    let mut records = Vec::new();
    loop {
        let d = expert.decide(&env.state())?;
        let mut action = d.action;
        if cfg.expert_epsilon > 0.0 && aux.gen::<f64>() < cfg.expert_epsilon {
            action = aux.gen_range(0..n_actions);
        }
        env.place_decoy(Some(action));
        let state = env.state();
        let fixations = synth_gaze(&state, &d, cfg, &mut aux);
        let t = env.t();
        let out = env.step(action)?;
        records.push(StepRecord {
            episode_id,
            t,
            state,
            action,
            fixations,
            fired_rule: d.clause,
            score_delta: out.score_delta,
        });
        if let Some(reason) = out.terminal {
            let summary = EpisodeSummary {
                episode_id,
                score: env.score(),
                length: env.t(),
                terminal: reason,
            };
            return Ok((records, summary));
        }
    }
}

pub fn dataset_stats(records: &[StepRecord], cfg: &EnvConfig) -> DatasetStats {
    let mut ids: Vec<u64> = records.iter().map(|r| r.episode_id).collect();
    ids.sort_unstable();
    ids.dedup();
    DatasetStats {
        samples: records.len(),
        trajectories: ids.len(),
        max_object_count: if records.is_empty() {
            0
        } else {
            cfg.inventory().len()
        },
    }
}

/// Rolls `opts.n_episodes` expert episodes with ids `0..n`.
pub fn generate_dataset(
    cfg: &EnvConfig,
    expert: &Expert,
    opts: &GenerateOptions,
) -> Result<(Vec<StepRecord>, Vec<EpisodeSummary>, DatasetStats), EnvError> {
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for e in 0..opts.n_episodes as u64 {
        let (r, s) = expert_episode(cfg, expert, e, episode_seed(opts.seed, e))?;
        records.extend(r);
        summaries.push(s);
    }
    let stats = dataset_stats(&records, cfg);
    Ok((records, summaries, stats))
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalSummary {
    pub scores: Vec<f64>,
    pub lengths: Vec<usize>,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

/// Rolls `policy` once per seed until the episode ends.
pub fn evaluate_policy(
    cfg: &EnvConfig,
    seeds: &[u64],
    policy: &mut dyn FnMut(&LogicState) -> Result<usize, EnvError>,
) -> Result<EvalSummary, EnvError> {
    let mut scores = Vec::with_capacity(seeds.len());
    let mut lengths = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut env = Env::reset(cfg, seed)?;
        loop {
            env.place_decoy(None);
            let a = policy(&env.state())?;
            if env.step(a)?.terminal.is_some() {
                break;
            }
        }
        scores.push(env.score());
        lengths.push(env.t());
    }
    let (mean, std) = mean_std(&scores);
    Ok(EvalSummary {
        scores,
        lengths,
        mean,
        std,
    })
}
