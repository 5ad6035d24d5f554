//! Crisp rule-following expert and its synthetic gaze.

use alloc::vec::Vec;

use rand::Rng;

use super::EnvConfig;
use crate::gaze::{Fixation, FixationList};
use crate::grounding::{build_atom_index, oracle_valuation, AtomIndex, GroundingError, LogicState, ObjectInventory, SoftPredicateParams};
use crate::logic::RuleBase;
use crate::reasoner::{compile, InferenceGraph, ReasonerError};

/// Arbitration class of a clause, derived from its head name. Lower values
/// win when several clauses fire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Priority {
    /// `evade`, `dodge`
    Safety,
    /// `air`, `diver`
    Resource,
    /// `bonus`, `fire`, `aim`, unless the action is `noop`
    Reward,
    Other,
}

impl Priority {
    pub fn of_head(name: &str) -> Priority {
        let has = |k: &str| name.split('_').any(|w| w.starts_with(k));
        if has("evade") || has("dodge") {
            Priority::Safety
        } else if has("air") || has("diver") {
            Priority::Resource
        } else if !name.starts_with("noop") && (has("bonus") || has("fire") || has("aim")) {
            Priority::Reward
        } else {
            Priority::Other
        }
    }
}

/// The expert's choice in one state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub action: usize,
    /// Clause that decided the action; `None` when nothing fired.
    pub clause: Option<usize>,
    /// Object slots of the deciding ground clause.
    pub slots: Vec<usize>,
}

/// Evaluates a rule base crisply and acts on the highest-priority firing
/// clause, taking the first in file order within a priority class.
#[derive(Clone, Debug)]
pub struct Expert {
    params: SoftPredicateParams,
    compiled: Option<(AtomIndex, InferenceGraph)>,
    /// Ground clause indices in arbitration order.
    order: Vec<usize>,
    noop: usize,
    player: Option<usize>,
    ignore: Vec<usize>,
}

impl Expert {
    /// `ignore` lists object slots the expert does not perceive.
    pub fn new(
        rb: &RuleBase,
        inv: &ObjectInventory,
        params: &SoftPredicateParams,
        ignore: &[usize],
    ) -> Result<Self, ReasonerError> {
        let noop = rb.actions().iter().position(|a| a == "noop").unwrap_or(0);
        let player = inv.player_slot();
        let idx = build_atom_index(rb, inv)?;
        let graph = match compile(rb, &idx) {
            Ok(g) => g,
            Err(ReasonerError::EmptyGraph) => {
                return Ok(Expert {
                    params: params.clone(),
                    compiled: None,
                    order: Vec::new(),
                    noop,
                    player,
                    ignore: ignore.to_vec(),
                })
            }
            Err(e) => return Err(e),
        };
        let mut order: Vec<usize> = (0..graph.clauses.len())
            .filter(|&k| {
                let c = &graph.clauses[k];
                c.body
                    .iter()
                    .all(|&a| idx.entity_refs[a].iter().all(|s| !ignore.contains(s)))
            })
            .collect();
        order.sort_by_key(|&k| {
            let c = &graph.clauses[k];
            (Priority::of_head(rb.head_name(c.clause)), c.clause, k)
        });
        Ok(Expert {
            params: params.clone(),
            compiled: Some((idx, graph)),
            order,
            noop,
            player,
            ignore: ignore.to_vec(),
        })
    }

    pub fn noop_action(&self) -> usize {
        self.noop
    }

    pub fn decide(&self, s: &LogicState) -> Result<Decision, GroundingError> {
        let idle = Decision {
            action: self.noop,
            clause: None,
            slots: self.player.into_iter().collect(),
        };
        let Some((idx, g)) = &self.compiled else {
            return Ok(idle);
        };
        let y = if self.ignore.is_empty() {
            oracle_valuation(s, &self.params, idx)?
        } else {
            let mut seen = s.clone();
            for &o in &self.ignore {
                if let Some(obj) = seen.objects.get_mut(o) {
                    obj.present = false;
                }
            }
            oracle_valuation(&seen, &self.params, idx)?
        };
        for &k in &self.order {
            let c = &g.clauses[k];
            if c.body.iter().all(|&a| y[a] == 1.0) {
                let action = g
                    .head_atoms_by_action
                    .iter()
                    .position(|atoms| atoms.contains(&c.head))
                    .unwrap_or(self.noop);
                let mut slots = Vec::new();
                for &a in &c.body {
                    for &o in &idx.entity_refs[a] {
                        if !slots.contains(&o) {
                            slots.push(o);
                        }
                    }
                }
                return Ok(Decision {
                    action,
                    clause: Some(c.clause),
                    slots,
                });
            }
        }
        Ok(idle)
    }
}

/// Fixations on the centers of the decision's objects, plus with probability
/// `cfg.gaze_noise` one fixation on another present object.
pub fn synth_gaze<R: Rng + ?Sized>(
    s: &LogicState,
    d: &Decision,
    cfg: &EnvConfig,
    rng: &mut R,
) -> FixationList {
    let mut fx: Vec<Fixation> = d
        .slots
        .iter()
        .filter(|&&o| s.objects[o].present)
        .map(|&o| Fixation::at(s.objects[o].x, s.objects[o].y))
        .collect();
    if cfg.gaze_noise > 0.0 && rng.gen::<f64>() < cfg.gaze_noise {
        let others: Vec<usize> = (0..s.objects.len())
            .filter(|o| s.objects[*o].present && !d.slots.contains(o))
            .collect();
        if !others.is_empty() {
            let o = others[rng.gen_range(0..others.len())];
            fx.push(Fixation::at(s.objects[o].x, s.objects[o].y));
        }
    }
    FixationList(fx)
}
