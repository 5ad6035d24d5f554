//! Soft and crisp valuation of an atom index on a logic state.

use alloc::vec::Vec;

use super::index::{AtomEval, AtomIndex};
use super::predicates::{evaluate, Eval, Margin};
use super::{GroundingError, LogicState, SoftPredicateParams, ValuationVector};

/// Initial valuation `v⁽⁰⁾`: every body atom evaluated by its soft predicate,
/// masked by the presence of the objects it references. Head atoms start at 0.
pub fn ground_valuation(
    s: &LogicState,
    params: &SoftPredicateParams,
    idx: &AtomIndex,
) -> Result<ValuationVector, GroundingError> {
    s.validate(&idx.inventory)?;
    Ok(ValuationVector(
        (0..idx.len())
            .map(|i| match atom_eval(s, params, idx, i) {
                Some(Eval::Crisp(v)) => v,
                Some(Eval::Soft(m)) => m.value(),
                None => 0.0,
            })
            .collect(),
    ))
}

/// Crisp 0/1 valuation `y_t`: the zero-temperature limit of
/// [`ground_valuation`] at the same thresholds.
pub fn oracle_valuation(
    s: &LogicState,
    params: &SoftPredicateParams,
    idx: &AtomIndex,
) -> Result<ValuationVector, GroundingError> {
    s.validate(&idx.inventory)?;
    Ok(ValuationVector(
        (0..idx.len())
            .map(|i| match atom_eval(s, params, idx, i) {
                Some(Eval::Crisp(v)) => v,
                Some(Eval::Soft(m)) => m.crisp(),
                None => 0.0,
            })
            .collect(),
    ))
}

/// Evaluation of atom `i`, or `None` for head atoms and atoms masked out by
/// an absent object.
fn atom_eval(
    s: &LogicState,
    params: &SoftPredicateParams,
    idx: &AtomIndex,
    i: usize,
) -> Option<Eval> {
    match idx.evals[i] {
        AtomEval::Head => None,
        AtomEval::Body { rel, a, b, aux } => {
            if idx.entity_refs[i].iter().any(|&o| !s.objects[o].present) {
                return None;
            }
            Some(evaluate(rel, s, a, b, &aux, params))
        }
    }
}

/// Soft margins of the present, soft body atoms of a state, for calibration.
/// Entries are `(atom index, margin)`; the remaining body atoms have fixed
/// values returned alongside.
pub(crate) fn soft_margins(
    s: &LogicState,
    params: &SoftPredicateParams,
    idx: &AtomIndex,
) -> (Vec<(usize, Margin)>, Vec<(usize, f64)>) {
    let mut soft = Vec::new();
    let mut fixed = Vec::new();
    for i in idx.body_atoms() {
        match atom_eval(s, params, idx, i) {
            Some(Eval::Soft(m)) => soft.push((i, m)),
            Some(Eval::Crisp(v)) => fixed.push((i, v)),
            None => fixed.push((i, 0.0)),
        }
    }
    (soft, fixed)
}
