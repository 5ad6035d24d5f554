//! Fitting soft-predicate parameters to crisp labels by Bernoulli NLL.

use alloc::vec::Vec;

use crate::math::{clamp_prob, exp, ln, LOG_EPS};
use crate::optim::Adam;

use super::index::AtomIndex;
use super::predicates::ParamGroup;
use super::valuation::soft_margins;
use super::{GroundingError, LogicState, SoftPredicateParams, ValuationVector};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationConfig {
    pub steps: usize,
    pub learning_rate: f64,
    /// Bounds kept on every temperature.
    pub min_temperature: f64,
    pub max_temperature: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            steps: 300,
            learning_rate: 0.01,
            min_temperature: 1e-4,
            max_temperature: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationReport {
    pub params: SoftPredicateParams,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub steps: usize,
}

fn check(
    data: &[(LogicState, ValuationVector)],
    idx: &AtomIndex,
) -> Result<(), GroundingError> {
    if data.is_empty() {
        return Err(GroundingError::EmptyDataset);
    }
    for (s, y) in data {
        if y.len() != idx.len() {
            return Err(GroundingError::LabelLength {
                expected: idx.len(),
                found: y.len(),
            });
        }
        s.validate(&idx.inventory)?;
    }
    Ok(())
}

fn bce(v: f64, y: f64) -> f64 {
    let p = clamp_prob(v);
    -(y * ln(p) + (1.0 - y) * ln(1.0 - p))
}

/// Loss and gradient with respect to `(threshold, ln τ)` per parameter group.
fn loss_and_grad(
    data: &[(LogicState, ValuationVector)],
    params: &SoftPredicateParams,
    idx: &AtomIndex,
) -> (f64, Vec<f64>) {
    let n_body = idx.body_atoms().count().max(1) as f64;
    let mut total = 0.0;
    let mut grad = alloc::vec![0.0; 2 * ParamGroup::ALL.len()];
    for (s, y) in data {
        let (soft, fixed) = soft_margins(s, params, idx);
        let mut sample = 0.0;
        for (i, v) in fixed {
            sample += bce(v, y[i]);
        }
        for (i, m) in soft {
            let v = m.value();
            sample += bce(v, y[i]);
            if !(LOG_EPS..=1.0 - LOG_EPS).contains(&v) {
                continue;
            }
            let dl_dv = -y[i] / v + (1.0 - y[i]) / (1.0 - v);
            let sign = if m.complement { -1.0 } else { 1.0 };
            let dv_du = sign * v * (1.0 - v);
            let tau = params.get(m.group).temperature;
            let g = m.group.index();
            let k = dl_dv * dv_du / n_body;
            grad[2 * g] += k * m.thr_coef / tau;
            grad[2 * g + 1] += k * -m.u;
        }
        total += sample / n_body;
    }
    let n = data.len() as f64;
    for g in &mut grad {
        *g /= n;
    }
    (total / n, grad)
}

/// Mean per-atom Bernoulli negative log-likelihood of the body-atom labels.
pub fn calibration_loss(
    data: &[(LogicState, ValuationVector)],
    params: &SoftPredicateParams,
    idx: &AtomIndex,
) -> Result<f64, GroundingError> {
    check(data, idx)?;
    Ok(loss_and_grad(data, params, idx).0)
}

/// Full-batch Adam on thresholds and log-temperatures. The returned
/// parameters are the best seen, so `final_loss <= initial_loss`.
pub fn calibrate_predicates(
    data: &[(LogicState, ValuationVector)],
    init: &SoftPredicateParams,
    idx: &AtomIndex,
    cfg: &CalibrationConfig,
) -> Result<CalibrationReport, GroundingError> {
    check(data, idx)?;
    let groups = ParamGroup::ALL;
    let mut flat: Vec<f64> = groups
        .iter()
        .flat_map(|&g| {
            let p = init.get(g);
            [p.threshold, ln(p.temperature)]
        })
        .collect();
    let unflatten = |flat: &[f64]| {
        let mut p = init.clone();
        for (k, &g) in groups.iter().enumerate() {
            let sp = p.get_mut(g);
            sp.threshold = flat[2 * k];
            sp.temperature = exp(flat[2 * k + 1]);
        }
        p
    };

    let (initial_loss, _) = loss_and_grad(data, init, idx);
    let mut best = (initial_loss, init.clone());
    let mut adam = Adam::new(flat.len());
    for step in 0..cfg.steps {
        let current = unflatten(&flat);
        let (loss, mut grad) = loss_and_grad(data, &current, idx);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(GroundingError::Diverged { step });
        }
        if loss < best.0 {
            best = (loss, current);
        }
        for (k, g) in groups.iter().enumerate() {
            if !g.has_threshold() {
                grad[2 * k] = 0.0;
            }
        }
        adam.step(&mut flat, &grad, cfg.learning_rate);
        for k in 0..groups.len() {
            flat[2 * k] = flat[2 * k].clamp(1e-3, 1.0 - 1e-3);
            flat[2 * k + 1] = flat[2 * k + 1].clamp(ln(cfg.min_temperature), ln(cfg.max_temperature));
        }
    }
    if cfg.steps > 0 {
        let last = unflatten(&flat);
        let (loss, _) = loss_and_grad(data, &last, idx);
        if !loss.is_finite() {
            return Err(GroundingError::Diverged { step: cfg.steps });
        }
        if loss < best.0 {
            best = (loss, last);
        }
    }
    Ok(CalibrationReport {
        params: best.1,
        initial_loss,
        final_loss: best.0,
        steps: cfg.steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grounding::{build_atom_index, Layout, ObjectInventory, ObjectState};
    use crate::logic::{asterix_signatures, parse_rulebase};

    #[test]
    fn all_zero_labels_give_finite_loss() {
        let rb = parse_rulebase(
            "right_bonus(X) :- closeby(O1,O2), type(O1,player).",
            &asterix_signatures(),
        )
        .unwrap();
        let inv = ObjectInventory::from_counts("t", &[("player", 1), ("enemy", 1)]);
        let idx = build_atom_index(&rb, &inv).unwrap();
        let o = |t| ObjectState {
            present: true,
            type_id: t,
            x: 40.0,
            y: 40.0,
            w: 0.0,
            h: 0.0,
            orientation: None,
        };
        let s = LogicState {
            layout: Layout::Asterix,
            frame_w: 84.0,
            frame_h: 84.0,
            objects: alloc::vec![o(0), o(1)],
        };
        let p = SoftPredicateParams::default().with_temperature(1e-6);
        let y = ValuationVector::zeros(idx.len());
        let l = calibration_loss(&[(s, y)], &p, &idx).unwrap();
        assert!(l.is_finite());
        assert!(l > 1.0);
    }

    #[test]
    fn empty_dataset_rejected() {
        let rb = parse_rulebase("", &asterix_signatures()).unwrap();
        let inv = ObjectInventory::from_counts("t", &[("player", 1)]);
        let idx = build_atom_index(&rb, &inv).unwrap();
        assert_eq!(
            calibrate_predicates(&[], &SoftPredicateParams::default(), &idx, &Default::default()),
            Err(GroundingError::EmptyDataset)
        );
    }
}
