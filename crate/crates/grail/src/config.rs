//! Experiment configuration files (TOML). Every key is optional; command-line
//! flags override the file.
//!
//! ```toml
//! env = "asterix-mini"
//! rules = "rules/asterix.rules"
//! seed = 7
//! episodes = 40
//! objects = 1
//! eval_objects = 3
//! gaze = true
//! gaze_source = "fixations"   # or "model"
//! calibrate = true
//! fraction = 1.0
//! seeds = 50
//! fractions = [0.1, 0.25, 0.5, 0.75, 1.0]
//!
//! [train]
//! learning_rate = 0.01
//! batch_size = 32
//!
//! [reasoner]
//! policy_temperature = 1.0
//! ```

use std::path::{Path, PathBuf};

use grail_core::envs::DEFAULT_EVAL_SEEDS;
use grail_core::learning::TrainConfig;
use grail_core::ReasonerConfig;
use serde::{Deserialize, Serialize};

use crate::experiment::{GazeSourceKind, TrainOptions};
use crate::Error;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: String,
    pub rules: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub episodes: usize,
    pub objects: usize,
    pub eval_objects: Option<usize>,
    /// `"correlated"` or `"random"`: add the intangible decoy bonus.
    pub decoy: Option<String>,
    pub gaze: bool,
    pub gaze_source: GazeSourceKind,
    pub gaze_sigma: f64,
    pub calibrate: bool,
    pub fraction: f64,
    pub fractions: Vec<f64>,
    pub train_objects_grid: Vec<usize>,
    pub eval_objects_grid: Vec<usize>,
    pub train_seeds: usize,
    pub seeds: usize,
    pub jobs: usize,
    pub train: TrainConfig,
    pub reasoner: ReasonerConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            env: "asterix-mini".into(),
            rules: None,
            data: None,
            out: None,
            seed: 0,
            episodes: 40,
            objects: 1,
            eval_objects: None,
            decoy: None,
            gaze: true,
            gaze_source: GazeSourceKind::Fixations,
            gaze_sigma: grail_core::gaze::DEFAULT_SIGMA,
            calibrate: true,
            fraction: 1.0,
            fractions: vec![0.1, 0.25, 0.5, 0.75, 1.0],
            train_objects_grid: vec![1, 2],
            eval_objects_grid: vec![1, 2, 3],
            train_seeds: 1,
            seeds: DEFAULT_EVAL_SEEDS,
            jobs: 1,
            train: TrainConfig::default(),
            reasoner: ReasonerConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Path(path.to_path_buf(), e))?;
        Ok(toml::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<(), Error> {
        crate::env_kind(&self.env)?;
        for f in std::iter::once(&self.fraction).chain(&self.fractions) {
            if !(*f > 0.0 && *f <= 1.0) {
                return Err(Error::Config(format!("fraction must lie in (0, 1], got {f}")));
            }
        }
        for p in [&self.rules, &self.data].into_iter().flatten() {
            if !p.exists() {
                return Err(Error::Config(format!("{} does not exist", p.display())));
            }
        }
        if self.seeds == 0 {
            return Err(Error::Config("at least one evaluation seed is needed".into()));
        }
        if self.objects == 0 {
            return Err(Error::Config("objects per type must be at least 1".into()));
        }
        match self.decoy.as_deref() {
            None | Some("correlated") | Some("random") => Ok(()),
            Some(other) => Err(Error::Config(format!("unknown decoy mode `{other}`"))),
        }
    }

    pub fn train_options(&self) -> TrainOptions {
        TrainOptions {
            use_gaze: self.gaze,
            gaze_source: self.gaze_source,
            gaze_sigma: self.gaze_sigma,
            calibrate: self.calibrate,
            fraction: self.fraction,
            train: TrainConfig {
                seed: self.seed,
                ..self.train.clone()
            },
            reasoner: self.reasoner.clone(),
        }
    }
}
