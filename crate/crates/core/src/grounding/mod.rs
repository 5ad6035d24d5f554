//! Grounding of object-centric states into fuzzy atom valuations.
//!
//! A [`LogicState`] lists every object slot of an [`ObjectInventory`] with
//! its raw pixel features. [`build_atom_index`] enumerates the ground atoms a
//! rule base can touch over that inventory; [`ground_valuation`] evaluates
//! them with smooth predicates over screen-normalized coordinates, and
//! [`oracle_valuation`] gives their crisp 0/1 counterparts.

mod calibrate;
mod index;
mod predicates;
mod valuation;

use alloc::string::String;
use alloc::vec::Vec;

pub use calibrate::{calibrate_predicates, calibration_loss, CalibrationConfig, CalibrationReport};
pub use index::{
    build_atom_index, clause_substitutions, AtomIndex, GroundArg, GroundAtom, Substitution,
};
pub(crate) use index::ground_atom;
pub use predicates::{relation_for, ParamGroup, Relation, SoftParam, SoftPredicateParams};
pub use valuation::{ground_valuation, oracle_valuation};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GroundingError {
    #[error("inventory has no `player` slot")]
    NoPlayerSlot,
    #[error("predicate `{0}` has no evaluation semantics")]
    UnknownSemantics(String),
    #[error("state has {found} object slots, inventory has {expected}")]
    SlotCount { expected: usize, found: usize },
    #[error("slot {slot}: type id {found} does not match inventory type id {expected}")]
    TypeMismatch {
        slot: usize,
        expected: usize,
        found: usize,
    },
    #[error("slot {slot}: coordinates ({x}, {y}) outside the {w}x{h} frame")]
    OutOfFrame {
        slot: usize,
        x: f64,
        y: f64,
        w: f64,
        h: f64,
    },
    #[error("slot {slot}: features do not follow the {layout:?} layout")]
    LayoutMismatch { slot: usize, layout: Layout },
    #[error("calibration needs a nonempty dataset")]
    EmptyDataset,
    #[error("label vector has length {found}, atom index has {expected}")]
    LabelLength { expected: usize, found: usize },
    #[error("calibration loss became non-finite at step {step}")]
    Diverged { step: usize },
}

/// One slot of an object inventory.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InventorySlot {
    pub slot_id: usize,
    pub type_label: String,
}

/// The fixed, ordered list of object slots an environment can populate.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObjectInventory {
    pub env_name: String,
    /// Distinct type labels; `ObjectState::type_id` indexes this list.
    pub types: Vec<String>,
    pub slots: Vec<InventorySlot>,
    pub max_count: usize,
}

impl ObjectInventory {
    /// Builds an inventory from `(type_label, count)` groups, in order.
    pub fn from_counts(env_name: &str, groups: &[(&str, usize)]) -> Self {
        let mut types: Vec<String> = Vec::new();
        let mut slots = Vec::new();
        for &(label, count) in groups {
            if !types.iter().any(|t| t == label) {
                types.push(label.into());
            }
            for _ in 0..count {
                slots.push(InventorySlot {
                    slot_id: slots.len(),
                    type_label: label.into(),
                });
            }
        }
        ObjectInventory {
            env_name: env_name.into(),
            max_count: slots.len(),
            types,
            slots,
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn type_id(&self, label: &str) -> Option<usize> {
        self.types.iter().position(|t| t == label)
    }

    pub fn slot_type_id(&self, slot: usize) -> usize {
        self.type_id(&self.slots[slot].type_label)
            .expect("slot labels are registered in `types`")
    }

    pub fn player_slot(&self) -> Option<usize> {
        self.slots.iter().position(|s| s.type_label == "player")
    }

    pub fn slots_of_type<'a>(&'a self, label: &'a str) -> impl Iterator<Item = usize> + 'a {
        self.slots
            .iter()
            .filter(move |s| s.type_label == label)
            .map(|s| s.slot_id)
    }
}

/// Feature layout of a state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Layout {
    /// `[is_present, type, x, y]`
    Asterix,
    /// `[is_present, x, y, width, height, orientation, type]`
    Seaquest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Orientation {
    Left,
    Right,
}

/// Raw features of one object slot. `x`/`y` give the object's center in
/// pixels; width, height and orientation are only meaningful for the
/// Seaquest layout.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObjectState {
    pub present: bool,
    pub type_id: usize,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub orientation: Option<Orientation>,
}

impl ObjectState {
    pub fn absent(type_id: usize) -> Self {
        ObjectState {
            present: false,
            type_id,
            x: 0.0,
            y: 0.0,
            w: 0.0,
            h: 0.0,
            orientation: None,
        }
    }
}

/// Symbolic observation: one entry per inventory slot.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogicState {
    pub layout: Layout,
    pub frame_w: f64,
    pub frame_h: f64,
    pub objects: Vec<ObjectState>,
}

impl LogicState {
    /// Per-object feature rows in the layout's column order.
    pub fn features(&self) -> Vec<Vec<f64>> {
        self.objects
            .iter()
            .map(|o| {
                let present = if o.present { 1.0 } else { 0.0 };
                match self.layout {
                    Layout::Asterix => alloc::vec![present, o.type_id as f64, o.x, o.y],
                    Layout::Seaquest => {
                        let orient = match o.orientation {
                            Some(Orientation::Right) => 1.0,
                            _ => 0.0,
                        };
                        alloc::vec![present, o.x, o.y, o.w, o.h, orient, o.type_id as f64]
                    }
                }
            })
            .collect()
    }

    /// Checks the state against an inventory and its layout.
    pub fn validate(&self, inv: &ObjectInventory) -> Result<(), GroundingError> {
        if self.objects.len() != inv.len() {
            return Err(GroundingError::SlotCount {
                expected: inv.len(),
                found: self.objects.len(),
            });
        }
        for (slot, o) in self.objects.iter().enumerate() {
            let expected = inv.slot_type_id(slot);
            if o.type_id != expected {
                return Err(GroundingError::TypeMismatch {
                    slot,
                    expected,
                    found: o.type_id,
                });
            }
            if self.layout == Layout::Asterix
                && (o.w != 0.0 || o.h != 0.0 || o.orientation.is_some())
            {
                return Err(GroundingError::LayoutMismatch {
                    slot,
                    layout: self.layout,
                });
            }
            let inside =
                (0.0..=self.frame_w).contains(&o.x) && (0.0..=self.frame_h).contains(&o.y);
            if o.present && !inside {
                return Err(GroundingError::OutOfFrame {
                    slot,
                    x: o.x,
                    y: o.y,
                    w: self.frame_w,
                    h: self.frame_h,
                });
            }
        }
        Ok(())
    }

    pub(crate) fn nx(&self, slot: usize) -> f64 {
        self.objects[slot].x / self.frame_w
    }

    pub(crate) fn ny(&self, slot: usize) -> f64 {
        self.objects[slot].y / self.frame_h
    }
}

/// Fuzzy truth values, one per ground atom of an [`AtomIndex`].
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValuationVector(pub Vec<f64>);

impl ValuationVector {
    pub fn zeros(n: usize) -> Self {
        ValuationVector(alloc::vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl core::ops::Index<usize> for ValuationVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
