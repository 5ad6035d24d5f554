//! Gaze-guided relational imitation learning.
//!
//! Object-centric game states are grounded into fuzzy valuations over ground
//! atoms, optionally reweighted by gaze heatmaps, and pushed through a weighted,
//! differentiable forward-chaining reasoner. Clause weights are trained by
//! behavior cloning against demonstrations from the built-in mini-games.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, the command line
//! and experiment drivers live in the companion `grail` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod envs;
pub mod gaze;
pub mod grounding;
pub mod learning;
pub mod logic;
pub mod math;
pub mod optim;
pub mod pipeline;
pub mod reasoner;

pub use gaze::{BoundingBox, Fixation, FixationList, GazeHeatmap, GazeModelParams};
pub use grounding::{
    AtomIndex, LogicState, ObjectInventory, ObjectState, SoftPredicateParams, ValuationVector,
};
pub use logic::{parse_rulebase, pretty_print, validate_rulebase, RuleBase, SignatureSet};
pub use reasoner::{ClauseWeights, InferenceGraph, ReasonerConfig};
