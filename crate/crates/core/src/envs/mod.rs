//! Deterministic object-centric mini-games, scripted experts and synthetic
//! gaze.
//!
//! All games live on a grid of square cells; object coordinates are emitted in
//! pixels (cell center times cell size) so that grounding normalizes them by
//! the frame size exactly as it would for detector output.

mod asterix;
mod expert;
mod freeway;
mod rollout;
mod seaquest;


use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grounding::{LogicState, ObjectInventory};

pub use expert::{synth_gaze, Decision, Expert, Priority};
pub use rollout::{
    dataset_stats, episode_seed, evaluate_policy, evaluation_seeds, expert_episode, DEFAULT_EVAL_SEEDS,
    generate_dataset, DatasetStats, EpisodeSummary, EvalSummary, GenerateOptions, StepRecord,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("action id {action} is out of range for {env} ({n_actions} actions)")]
    IllegalAction {
        env: &'static str,
        action: usize,
        n_actions: usize,
    },
    #[error("step called on a finished episode")]
    EpisodeOver,
    #[error("invalid environment configuration: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Grounding(#[from] crate::grounding::GroundingError),
    #[error("policy failed: {0}")]
    Policy(alloc::string::String),
}

/// Which game a configuration describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EnvKind {
    Asterix,
    Seaquest,
    Freeway,
}

impl EnvKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Asterix => "asterix-mini",
            EnvKind::Seaquest => "seaquest-mini",
            EnvKind::Freeway => "freeway-mini",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "asterix-mini" | "asterix" => Some(EnvKind::Asterix),
            "seaquest-mini" | "seaquest" => Some(EnvKind::Seaquest),
            "freeway-mini" | "freeway" => Some(EnvKind::Freeway),
            _ => None,
        }
    }

    /// Ordered action names; indices are the action ids.
    pub fn actions(self) -> &'static [&'static str] {
        match self {
            EnvKind::Asterix => &["noop", "up", "right", "left", "down"],
            EnvKind::Seaquest => &["noop", "fire", "up", "right", "left", "down"],
            EnvKind::Freeway => &["noop", "up", "down"],
        }
    }
}

/// How the intangible decoy bonus of the spurious-correlation variant moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DecoyMode {
    /// Placed where a bonus rule would fire whenever the expert idles,
    /// anywhere otherwise.
    Correlated,
    /// Placed uniformly at random every step.
    Random,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnvConfig {
    pub kind: EnvKind,
    pub frame_w: f64,
    pub frame_h: f64,
    pub cols: usize,
    pub rows: usize,
    pub objects_per_type: usize,
    pub max_steps: usize,
    /// Cells per step of the fastest movers (enemies, cars).
    pub enemy_speed: usize,
    /// Bonuses and divers move on steps that are multiples of this.
    pub slow_period: usize,
    pub decoy: Option<DecoyMode>,
    /// Probability of adding one distractor fixation per frame.
    pub gaze_noise: f64,
    /// Gaussian width used when rendering fixations, in pixels.
    pub gaze_sigma: f64,
    /// Probability that the expert takes a uniformly random action.
    pub expert_epsilon: f64,
}

impl EnvConfig {
    pub fn new(kind: EnvKind) -> Self {
        EnvConfig {
            kind,
            frame_w: 84.0,
            frame_h: 84.0,
            cols: 12,
            rows: 12,
            objects_per_type: 1,
            max_steps: 200,
            enemy_speed: 1,
            slow_period: 2,
            decoy: None,
            gaze_noise: 0.1,
            gaze_sigma: crate::gaze::DEFAULT_SIGMA,
            expert_epsilon: 0.0,
        }
    }

    pub fn asterix() -> Self {
        Self::new(EnvKind::Asterix)
    }

    pub fn seaquest() -> Self {
        Self::new(EnvKind::Seaquest)
    }

    pub fn freeway() -> Self {
        Self::new(EnvKind::Freeway)
    }

    pub fn with_objects(mut self, n: usize) -> Self {
        self.objects_per_type = n;
        self
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        if self.objects_per_type == 0 {
            return Err(EnvError::Config("objects_per_type must be at least 1"));
        }
        if self.cols < 5 || self.rows < 5 {
            return Err(EnvError::Config("grid must be at least 5x5"));
        }
        if !(self.frame_w > 0.0 && self.frame_h > 0.0) {
            return Err(EnvError::Config("frame dimensions must be positive"));
        }
        if self.max_steps == 0 || self.enemy_speed == 0 || self.slow_period == 0 {
            return Err(EnvError::Config("step counts and speeds must be positive"));
        }
        if !(0.0..=1.0).contains(&self.gaze_noise) || !(0.0..=1.0).contains(&self.expert_epsilon) {
            return Err(EnvError::Config("probabilities must lie in [0, 1]"));
        }
        if !(self.gaze_sigma > 0.0) {
            return Err(EnvError::Config("gaze sigma must be positive"));
        }
        if self.decoy.is_some() && self.kind != EnvKind::Asterix {
            return Err(EnvError::Config("decoys are only defined for asterix-mini"));
        }
        Ok(())
    }

    pub fn cell_w(&self) -> f64 {
        self.frame_w / self.cols as f64
    }

    pub fn cell_h(&self) -> f64 {
        self.frame_h / self.rows as f64
    }

    /// Pixel center of a grid cell.
    pub fn cell_center(&self, col: i32, row: i32) -> (f64, f64) {
        (
            (col as f64 + 0.5) * self.cell_w(),
            (row as f64 + 0.5) * self.cell_h(),
        )
    }

    /// The object slots this configuration populates.
    pub fn inventory(&self) -> ObjectInventory {
        let n = self.objects_per_type;
        match self.kind {
            EnvKind::Asterix => {
                let mut groups = alloc::vec![("player", 1), ("enemy", n), ("bonus", n)];
                if self.decoy.is_some() {
                    groups.push(("bonus", 1));
                }
                ObjectInventory::from_counts(self.kind.name(), &groups)
            }
            EnvKind::Seaquest => ObjectInventory::from_counts(
                self.kind.name(),
                &[
                    ("player", 1),
                    ("shark", n),
                    ("submarine", n),
                    ("enemy_missile", n),
                    ("diver", n),
                    ("player_missile", 1),
                    ("oxygen_bar", 1),
                    ("collected_diver", seaquest::DIVER_CAPACITY),
                ],
            ),
            EnvKind::Freeway => ObjectInventory::from_counts(
                self.kind.name(),
                &[("player", 1), ("car", n * freeway::lanes(self))],
            ),
        }
    }

    /// Slot of the decoy object, if the configuration has one.
    pub fn decoy_slot(&self) -> Option<usize> {
        self.decoy.map(|_| 1 + 2 * self.objects_per_type)
    }
}

/// The full-size Seaquest inventory (49 slots).
pub fn seaquest_full_inventory() -> ObjectInventory {
    ObjectInventory::from_counts(
        "seaquest",
        &[
            ("player", 1),
            ("shark", 12),
            ("submarine", 12),
            ("enemy_missile", 8),
            ("diver", 8),
            ("player_missile", 1),
            ("oxygen_bar", 1),
            ("collected_diver", 6),
        ],
    )
}

/// The full-size Asterix inventory (25 slots).
pub fn asterix_full_inventory() -> ObjectInventory {
    ObjectInventory::from_counts("asterix", &[("player", 1), ("enemy", 12), ("bonus", 12)])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TerminalReason {
    Collision,
    OutOfOxygen,
    StepCap,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub score_delta: f64,
    pub terminal: Option<TerminalReason>,
}

/// A horizontally moving entity on the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Mover {
    pub col: i32,
    pub row: i32,
    /// +1 moves right, −1 moves left.
    pub dir: i32,
    pub present: bool,
}

/// Direction of travel in a row: odd rows move right, even rows move left.
pub(crate) fn row_dir(row: i32) -> i32 {
    if row % 2 == 1 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug)]
enum Game {
    Asterix(asterix::Asterix),
    Seaquest(seaquest::Seaquest),
    Freeway(freeway::Freeway),
}

/// A running episode.
#[derive(Clone, Debug)]
pub struct Env {
    cfg: EnvConfig,
    rng: ChaCha8Rng,
    game: Game,
    t: usize,
    score: f64,
    done: Option<TerminalReason>,
}

impl Env {
    /// Starts an episode. The same `(cfg, seed)` always yields the same
    /// initial state and, for the same actions, the same trajectory.
    pub fn reset(cfg: &EnvConfig, seed: u64) -> Result<Env, EnvError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let game = match cfg.kind {
            EnvKind::Asterix => Game::Asterix(asterix::Asterix::reset(cfg, &mut rng)),
            EnvKind::Seaquest => Game::Seaquest(seaquest::Seaquest::reset(cfg, &mut rng)),
            EnvKind::Freeway => Game::Freeway(freeway::Freeway::reset(cfg, &mut rng)),
        };
        Ok(Env {
            cfg: cfg.clone(),
            rng,
            game,
            t: 0,
            score: 0.0,
            done: None,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn terminal(&self) -> Option<TerminalReason> {
        self.done
    }

    pub fn n_actions(&self) -> usize {
        self.cfg.kind.actions().len()
    }

    /// Current observation.
    pub fn state(&self) -> LogicState {
        match &self.game {
            Game::Asterix(g) => g.state(&self.cfg),
            Game::Seaquest(g) => g.state(&self.cfg),
            Game::Freeway(g) => g.state(&self.cfg),
        }
    }

    /// Moves the decoy (if any) before the next observation. `expert_action`
    /// is the action the expert takes in the current state.
    pub fn place_decoy(&mut self, expert_action: Option<usize>) {
        if let Game::Asterix(g) = &mut self.game {
            g.place_decoy(&self.cfg, &mut self.rng, expert_action);
        }
    }

    pub fn step(&mut self, action: usize) -> Result<StepOutcome, EnvError> {
        if self.done.is_some() {
            return Err(EnvError::EpisodeOver);
        }
        if action >= self.n_actions() {
            return Err(EnvError::IllegalAction {
                env: self.cfg.kind.name(),
                action,
                n_actions: self.n_actions(),
            });
        }
        let t = self.t;
        let (delta, terminal) = match &mut self.game {
            Game::Asterix(g) => g.step(&self.cfg, &mut self.rng, action, t),
            Game::Seaquest(g) => g.step(&self.cfg, &mut self.rng, action, t),
            Game::Freeway(g) => g.step(&self.cfg, &mut self.rng, action, t),
        };
        self.t += 1;
        self.score += delta;
        let terminal = terminal.or_else(|| {
            if self.t >= self.cfg.max_steps {
                Some(TerminalReason::StepCap)
            } else {
                None
            }
        });
        self.done = terminal;
        Ok(StepOutcome {
            score_delta: delta,
            terminal,
        })
    }
}

/// A row drawn uniformly from `lo..hi` other than `avoid`.
pub(crate) fn random_row(rng: &mut ChaCha8Rng, lo: i32, hi: i32, avoid: i32) -> i32 {
    loop {
        let r = rng.gen_range(lo..hi);
        if r != avoid || hi - lo <= 1 {
            return r;
        }
    }
}

