//! Versioned plain-text weight files.
//!
//! ```text
//! # grail-weights v1
//! # rules-sha256 <hex digest of the rule file>
//! # clauses <M>
//! # config <one-line JSON>
//! <weight>\t<clause text>
//! ```
//!
//! Clause lines follow rule-file order. Weights are written in shortest
//! round-trip form, so reading a file back gives the exact values.

use std::fs;
use std::path::Path;

use grail_core::grounding::SoftPredicateParams;
use grail_core::logic::clause_to_string;
use grail_core::{ClauseWeights, GazeModelParams, ReasonerConfig, RuleBase};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Error;

const MAGIC: &str = "# grail-weights v1";

/// Everything besides the weights needed to rebuild the policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub env: String,
    pub objects_per_type: usize,
    pub use_gaze: bool,
    pub reasoner: ReasonerConfig,
    pub predicates: SoftPredicateParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaze_model: Option<GazeModelParams>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightFile {
    pub rules_sha256: String,
    pub config: PolicyConfig,
    /// `(clause text, weight)` in rule-file order.
    pub entries: Vec<(String, f64)>,
}

pub fn rules_digest(rules_text: &str) -> String {
    hex::encode(Sha256::digest(rules_text.as_bytes()))
}

impl WeightFile {
    pub fn new(rules_text: &str, rb: &RuleBase, w: &ClauseWeights, config: PolicyConfig) -> Result<Self, Error> {
        if w.len() != rb.len() {
            return Err(Error::Format(format!("{} weights for {} clauses", w.len(), rb.len())));
        }
        let mut entries = vec![(String::new(), 0.0); rb.len()];
        for c in &rb.clauses {
            entries[c.weight_slot] = (clause_to_string(c, &rb.signatures), w.0[c.weight_slot]);
        }
        Ok(WeightFile {
            rules_sha256: rules_digest(rules_text),
            config,
            entries,
        })
    }

    pub fn weights(&self) -> ClauseWeights {
        ClauseWeights(self.entries.iter().map(|e| e.1).collect())
    }

    /// Fails unless the file was trained against exactly `rules_text`.
    pub fn check_rules(&self, rules_text: &str) -> Result<(), Error> {
        let found = rules_digest(rules_text);
        if found != self.rules_sha256 {
            return Err(Error::HashMismatch {
                expected: self.rules_sha256.clone(),
                found,
            });
        }
        Ok(())
    }

    pub fn render(&self) -> Result<String, Error> {
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        out.push_str(&format!("# rules-sha256 {}\n", self.rules_sha256));
        out.push_str(&format!("# clauses {}\n", self.entries.len()));
        out.push_str(&format!("# config {}\n", serde_json::to_string(&self.config)?));
        for (text, w) in &self.entries {
            out.push_str(&format!("{w}\t{text}\n"));
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let bad = |line: usize, msg: &str| Error::Format(format!("weight file line {line}: {msg}"));
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut header = |key: &str| -> Result<String, Error> {
            let (n, l) = lines.next().ok_or_else(|| bad(0, "truncated header"))?;
            l.strip_prefix(key)
                .map(|v| v.trim().to_string())
                .ok_or_else(|| bad(n, &format!("expected `{key}`")))
        };
        if !header(MAGIC)?.is_empty() {
            return Err(bad(1, "unsupported version"));
        }
        let rules_sha256 = header("# rules-sha256")?;
        let m: usize = header("# clauses")?.parse().map_err(|_| bad(3, "bad clause count"))?;
        let config: PolicyConfig = serde_json::from_str(&header("# config")?)?;
        let mut entries = Vec::with_capacity(m);
        for (n, l) in lines {
            if l.trim().is_empty() {
                continue;
            }
            let (w, clause) = l.split_once('\t').ok_or_else(|| bad(n, "expected `weight<TAB>clause`"))?;
            let w: f64 = w.parse().map_err(|_| bad(n, "bad weight"))?;
            if !(0.0..=1.0).contains(&w) {
                return Err(bad(n, "weight outside [0, 1]"));
            }
            entries.push((clause.to_string(), w));
        }
        if entries.len() != m {
            return Err(Error::Format(format!("header promises {m} clauses, found {}", entries.len())));
        }
        Ok(WeightFile {
            rules_sha256,
            config,
            entries,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.render()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::Path(path.to_path_buf(), e))?;
        Self::parse(&text)
    }
}
