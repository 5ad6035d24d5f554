//! File formats, experiment protocols and the `grail` command line on top of
//! [`grail_core`].

pub mod config;
pub mod dataset;
pub mod experiment;
pub mod inspect;
pub mod results;
pub mod weights;

use std::path::{Path, PathBuf};

use grail_core::envs::{EnvError, EnvKind};
use grail_core::gaze::GazeError;
use grail_core::grounding::GroundingError;
use grail_core::learning::LearningError;
use grail_core::logic::{asterix_signatures, freeway_signatures, parse_rulebase, seaquest_signatures, ParseError};
use grail_core::pipeline::PipelineError;
use grail_core::reasoner::ReasonerError;
use grail_core::{RuleBase, SignatureSet};

/// Rule bases shipped with the repository.
pub const ASTERIX_RULES: &str = include_str!("../../../rules/asterix.rules");
pub const SEAQUEST_RULES: &str = include_str!("../../../rules/seaquest.rules");

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}: {source}", path = .0.display(), source = .1)]
    Path(PathBuf, std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Config(String),
    #[error("rule file {path}: {source}")]
    Rules { path: String, source: ParseError },
    #[error("weights were trained on rules with sha256 {expected}, but the given rules hash to {found}")]
    HashMismatch { expected: String, found: String },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Grounding(#[from] GroundingError),
    #[error(transparent)]
    Reasoner(#[from] ReasonerError),
    #[error(transparent)]
    Learning(#[from] LearningError),
    #[error(transparent)]
    Gaze(#[from] GazeError),
}

pub fn signatures(kind: EnvKind) -> SignatureSet {
    match kind {
        EnvKind::Asterix => asterix_signatures(),
        EnvKind::Seaquest => seaquest_signatures(),
        EnvKind::Freeway => freeway_signatures(),
    }
}

/// Rule text from `path`, or the bundled rule base of `kind`.
pub fn rules_text(kind: EnvKind, path: Option<&Path>) -> Result<String, Error> {
    match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Path(p.to_path_buf(), e)),
        None => match kind {
            EnvKind::Asterix => Ok(ASTERIX_RULES.to_string()),
            EnvKind::Seaquest => Ok(SEAQUEST_RULES.to_string()),
            EnvKind::Freeway => Err(Error::Config(
                "freeway-mini ships without a rule base; pass --rules".into(),
            )),
        },
    }
}

pub fn parse_rules(kind: EnvKind, text: &str, origin: &str) -> Result<RuleBase, Error> {
    parse_rulebase(text, &signatures(kind)).map_err(|source| Error::Rules {
        path: origin.to_string(),
        source,
    })
}

pub fn env_kind(name: &str) -> Result<EnvKind, Error> {
    EnvKind::from_name(name).ok_or_else(|| {
        Error::Config(format!(
            "unknown environment `{name}` (expected asterix-mini, seaquest-mini or freeway-mini)"
        ))
    })
}
