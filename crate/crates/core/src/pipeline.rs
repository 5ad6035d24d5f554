//! End-to-end glue: a rule base compiled for one inventory, turning recorded
//! demonstrations into training frames and states into actions.

use alloc::vec::Vec;

use crate::envs::{EnvError, StepRecord};
use crate::gaze::{modulate_state, predict_heatmap, render_heatmap, GazeError, GazeHeatmap, GazeModelParams};
use crate::grounding::{
    build_atom_index, ground_valuation, AtomIndex, GroundingError, LogicState, ObjectInventory,
    SoftPredicateParams, ValuationVector,
};
use crate::learning::{act, Frame, LearningError};
use crate::logic::RuleBase;
use crate::reasoner::{compile, ClauseWeights, InferenceGraph, ReasonerConfig, ReasonerError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Grounding(#[from] GroundingError),
    #[error(transparent)]
    Reasoner(#[from] ReasonerError),
    #[error(transparent)]
    Gaze(#[from] GazeError),
    #[error(transparent)]
    Learning(#[from] LearningError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("weights have {found} entries, rule base has {expected} clauses")]
    WeightCount { expected: usize, found: usize },
}

/// Where training heatmaps come from.
#[derive(Clone, Debug, PartialEq)]
pub enum GazeSource {
    /// Gaussians of width `sigma` pixels rendered at the recorded fixations.
    Fixations { sigma: f64 },
    /// Predictions of a fitted gaze model.
    Model(GazeModelParams),
}

/// A rule base grounded and compiled over one object inventory.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub rb: RuleBase,
    pub idx: AtomIndex,
    pub graph: InferenceGraph,
    pub params: SoftPredicateParams,
    pub rcfg: ReasonerConfig,
}

fn dims(s: &LogicState) -> (usize, usize) {
    (libm::round(s.frame_h) as usize, libm::round(s.frame_w) as usize)
}

impl Pipeline {
    pub fn new(
        rb: &RuleBase,
        inv: &ObjectInventory,
        params: &SoftPredicateParams,
        rcfg: &ReasonerConfig,
    ) -> Result<Self, PipelineError> {
        let idx = build_atom_index(rb, inv)?;
        let graph = compile(rb, &idx)?;
        Ok(Pipeline {
            rb: rb.clone(),
            idx,
            graph,
            params: params.clone(),
            rcfg: rcfg.clone(),
        })
    }

    pub fn valuation(&self, s: &LogicState) -> Result<ValuationVector, PipelineError> {
        Ok(ground_valuation(s, &self.params, &self.idx)?)
    }

    /// Heatmap for a recorded step.
    pub fn heatmap(&self, rec: &StepRecord, source: &GazeSource) -> Result<GazeHeatmap, PipelineError> {
        let d = dims(&rec.state);
        Ok(match source {
            GazeSource::Fixations { sigma } => render_heatmap(&rec.fixations, *sigma, d)?,
            GazeSource::Model(phi) => predict_heatmap(&rec.state, phi, d),
        })
    }

    /// Training frame for a recorded step; `gaze` adds the modulated valuation.
    pub fn frame(&self, rec: &StepRecord, gaze: Option<&GazeSource>) -> Result<Frame, PipelineError> {
        let v0 = self.valuation(&rec.state)?;
        let vg = match gaze {
            Some(src) => {
                let g = self.heatmap(rec, src)?;
                Some(modulate_state(&v0, &g, &self.idx, &rec.state)?.0)
            }
            None => None,
        };
        Ok(Frame {
            v0: v0.0,
            vg,
            action: rec.action,
            trajectory: rec.episode_id,
        })
    }

    pub fn frames(
        &self,
        records: &[StepRecord],
        gaze: Option<&GazeSource>,
    ) -> Result<Vec<Frame>, PipelineError> {
        records.iter().map(|r| self.frame(r, gaze)).collect()
    }

    fn check_weights(&self, w: &ClauseWeights) -> Result<(), PipelineError> {
        if w.len() != self.rb.len() {
            return Err(PipelineError::WeightCount {
                expected: self.rb.len(),
                found: w.len(),
            });
        }
        Ok(())
    }

    /// Greedy action of the policy on an unmodulated state.
    pub fn act(&self, w: &ClauseWeights, s: &LogicState) -> Result<usize, PipelineError> {
        self.check_weights(w)?;
        let v = self.valuation(s)?;
        Ok(act(&v.0, w, &self.graph, &self.rcfg))
    }

    /// Fraction of recorded steps where the greedy policy matches the expert.
    pub fn accuracy(&self, w: &ClauseWeights, records: &[StepRecord]) -> Result<f64, PipelineError> {
        self.check_weights(w)?;
        if records.is_empty() {
            return Ok(0.0);
        }
        let mut hits = 0usize;
        for r in records {
            if self.act(w, &r.state)? == r.action {
                hits += 1;
            }
        }
        Ok(hits as f64 / records.len() as f64)
    }
}
