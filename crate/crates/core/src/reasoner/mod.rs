//! Weighted differentiable forward chaining.
//!
//! A rule base is compiled against an atom index into ground clauses. Each
//! inference step sets every head atom to the softor of its previous value and
//! the contributions `wᵢ · Π body` of its ground clauses; other atoms pass
//! through. Action scores take the hard max over each action's head atoms and
//! the policy is a softmax over the scores.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::grounding::{clause_substitutions, ground_atom, AtomIndex, GroundingError, Substitution};
use crate::logic::RuleBase;
use crate::math::{argmax, exp, ln};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReasonerError {
    #[error("no clause of the rule base can be grounded over this inventory")]
    EmptyGraph,
    #[error(transparent)]
    Grounding(#[from] GroundingError),
    #[error("ground clause {clause} refers to atom {atom} but there are only {n_atoms}")]
    AtomOutOfRange {
        clause: usize,
        atom: usize,
        n_atoms: usize,
    },
    #[error("ground clause {clause} uses weight slot {slot} but there are only {n_weights}")]
    SlotOutOfRange {
        clause: usize,
        slot: usize,
        n_weights: usize,
    },
    #[error("head atom {atom} maps to action {action} but there are only {n_actions}")]
    ActionOutOfRange {
        atom: usize,
        action: usize,
        n_actions: usize,
    },
}

/// Which smooth disjunction aggregates a head atom's inputs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SoftorKind {
    /// `min(1, γ · ln(1 + Σ (exp(vᵢ/γ) − 1)))`
    #[default]
    LogSumExp,
    /// `min(1, Σ vᵢ)`
    BoundedSum,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ReasonerConfig {
    pub t_max: usize,
    pub gamma: f64,
    pub policy_temperature: f64,
    pub softor: SoftorKind,
}

impl Default for ReasonerConfig {
    fn default() -> Self {
        ReasonerConfig {
            t_max: 2,
            gamma: 0.01,
            policy_temperature: 1.0,
            softor: SoftorKind::LogSumExp,
        }
    }
}

/// One weight per clause, kept in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClauseWeights(pub Vec<f64>);

impl ClauseWeights {
    /// Independent `U(0, 1)` draws.
    pub fn uniform<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        ClauseWeights((0..m).map(|_| rng.gen::<f64>()).collect())
    }

    pub fn constant(m: usize, w: f64) -> Self {
        ClauseWeights(alloc::vec![w; m])
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

/// A clause instantiated by one substitution.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundClause {
    /// Source clause index in the rule base.
    pub clause: usize,
    pub weight_slot: usize,
    pub head: usize,
    pub body: Vec<usize>,
    pub substitution: Option<Substitution>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InferenceGraph {
    pub n_atoms: usize,
    pub n_weights: usize,
    pub actions: Vec<String>,
    pub clauses: Vec<GroundClause>,
    /// Distinct head atoms, ascending.
    pub heads: Vec<usize>,
    /// For each entry of `heads`, the ground clauses concluding it.
    pub head_clauses: Vec<Vec<usize>>,
    /// For each action, its ground head atoms.
    pub head_atoms_by_action: Vec<Vec<usize>>,
}

impl InferenceGraph {
    /// Assembles a graph from ground clauses; `head_actions` maps head atoms
    /// onto action indices. Head atoms need not be action atoms, which allows
    /// chaining through intermediate heads.
    pub fn new(
        n_atoms: usize,
        n_weights: usize,
        actions: Vec<String>,
        clauses: Vec<GroundClause>,
        head_actions: &[(usize, usize)],
    ) -> Result<Self, ReasonerError> {
        if clauses.is_empty() {
            return Err(ReasonerError::EmptyGraph);
        }
        for (k, c) in clauses.iter().enumerate() {
            if let Some(&a) = c.body.iter().chain([&c.head]).find(|&&a| a >= n_atoms) {
                return Err(ReasonerError::AtomOutOfRange {
                    clause: k,
                    atom: a,
                    n_atoms,
                });
            }
            if c.weight_slot >= n_weights {
                return Err(ReasonerError::SlotOutOfRange {
                    clause: k,
                    slot: c.weight_slot,
                    n_weights,
                });
            }
        }
        let mut heads: Vec<usize> = clauses.iter().map(|c| c.head).collect();
        heads.sort_unstable();
        heads.dedup();
        let mut head_clauses = alloc::vec![Vec::new(); heads.len()];
        for (k, c) in clauses.iter().enumerate() {
            let h = heads.binary_search(&c.head).expect("collected above");
            head_clauses[h].push(k);
        }
        let mut head_atoms_by_action = alloc::vec![Vec::new(); actions.len()];
        for &(atom, action) in head_actions {
            if action >= actions.len() {
                return Err(ReasonerError::ActionOutOfRange {
                    atom,
                    action,
                    n_actions: actions.len(),
                });
            }
            if atom >= n_atoms {
                return Err(ReasonerError::AtomOutOfRange {
                    clause: usize::MAX,
                    atom,
                    n_atoms,
                });
            }
            if !head_atoms_by_action[action].contains(&atom) {
                head_atoms_by_action[action].push(atom);
            }
        }
        for v in &mut head_atoms_by_action {
            v.sort_unstable();
        }
        Ok(InferenceGraph {
            n_atoms,
            n_weights,
            actions,
            clauses,
            heads,
            head_clauses,
            head_atoms_by_action,
        })
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    /// Ground clause count per source clause.
    pub fn clause_counts(&self) -> Vec<usize> {
        let mut out = alloc::vec![0; self.n_weights];
        for c in &self.clauses {
            out[c.weight_slot] += 1;
        }
        out
    }
}

/// Compiles `rb` into ground clauses over the atoms of `idx`, one per clause
/// and substitution, in clause then substitution order.
pub fn compile(rb: &RuleBase, idx: &AtomIndex) -> Result<InferenceGraph, ReasonerError> {
    let mut clauses = Vec::new();
    let mut head_actions = Vec::new();
    for (ci, c) in rb.clauses.iter().enumerate() {
        let Some(action) = rb.clause_action(ci) else {
            continue;
        };
        for sub in clause_substitutions(rb, ci, &idx.inventory)? {
            let Some(head) = idx.get(&ground_atom(rb, c, &c.head, &sub)) else {
                continue;
            };
            let body: Option<Vec<usize>> = c
                .body
                .iter()
                .map(|a| idx.get(&ground_atom(rb, c, a, &sub)))
                .collect();
            let Some(body) = body else { continue };
            head_actions.push((head, action));
            clauses.push(GroundClause {
                clause: ci,
                weight_slot: c.weight_slot,
                head,
                body,
                substitution: Some(sub),
            });
        }
    }
    InferenceGraph::new(
        idx.len(),
        rb.len(),
        rb.actions().to_vec(),
        clauses,
        &head_actions,
    )
}

/// Largest input (floored at zero) and the scaled sum
/// `1 + Σ_{i≠argmax} (exp((vᵢ − m)/γ) − exp(−m/γ))`, so that the softor is
/// `m + γ ln s`.
fn lse_parts(values: &[f64], gamma: f64) -> (f64, usize, f64) {
    let mut arg = 0;
    let mut m = 0.0;
    for (i, &v) in values.iter().enumerate() {
        if v > m {
            m = v;
            arg = i;
        }
    }
    let base = exp(-m / gamma);
    let mut s = 1.0;
    for (i, &v) in values.iter().enumerate() {
        if i != arg {
            s += exp((v.max(0.0) - m) / gamma) - base;
        }
    }
    (m, arg, s)
}

fn softor_raw(values: &[f64], gamma: f64, kind: SoftorKind) -> f64 {
    match kind {
        SoftorKind::LogSumExp => {
            if values.is_empty() {
                return 0.0;
            }
            let (m, _, s) = lse_parts(values, gamma);
            m + gamma * ln(s)
        }
        SoftorKind::BoundedSum => values.iter().sum(),
    }
}

/// Log-sum-exp smooth maximum with zero as identity,
/// `min(1, γ · ln(1 + Σ (exp(vᵢ/γ) − 1)))`. Inputs are expected in `[0, 1]`.
pub fn softor(values: &[f64], gamma: f64) -> f64 {
    softor_with(values, gamma, SoftorKind::LogSumExp)
}

pub fn softor_with(values: &[f64], gamma: f64, kind: SoftorKind) -> f64 {
    softor_raw(values, gamma, kind).min(1.0)
}

/// Partial derivatives of the softor with respect to each input; all zero
/// when the clamp is active.
fn softor_grad(values: &[f64], gamma: f64, kind: SoftorKind, out: &mut Vec<f64>) {
    out.clear();
    if softor_raw(values, gamma, kind) > 1.0 {
        out.resize(values.len(), 0.0);
        return;
    }
    match kind {
        SoftorKind::LogSumExp => {
            let (m, _, s) = lse_parts(values, gamma);
            for &v in values {
                out.push(exp((v.max(0.0) - m) / gamma) / s);
            }
        }
        SoftorKind::BoundedSum => out.resize(values.len(), 1.0),
    }
}

/// Valuations after each inference step, `v⁽⁰⁾ … v⁽ᵀ⁾`.
#[derive(Clone, Debug)]
pub struct ForwardTape {
    pub steps: Vec<Vec<f64>>,
}

impl ForwardTape {
    pub fn last(&self) -> &[f64] {
        self.steps.last().expect("tape holds the input")
    }
}

fn contribution(v: &[f64], w: f64, body: &[usize]) -> f64 {
    body.iter().fold(w, |acc, &j| acc * v[j])
}

/// Runs `cfg.t_max` inference steps and keeps every intermediate valuation.
pub fn forward_tape(v_in: &[f64], w: &[f64], g: &InferenceGraph, cfg: &ReasonerConfig) -> ForwardTape {
    assert_eq!(v_in.len(), g.n_atoms, "valuation length must match the graph");
    let mut steps = Vec::with_capacity(cfg.t_max + 1);
    steps.push(v_in.to_vec());
    let mut inputs = Vec::new();
    for _ in 0..cfg.t_max {
        let prev = steps.last().expect("nonempty");
        let mut next = prev.clone();
        for (h, &atom) in g.heads.iter().enumerate() {
            inputs.clear();
            inputs.push(prev[atom]);
            for &k in &g.head_clauses[h] {
                let c = &g.clauses[k];
                inputs.push(contribution(prev, w[c.weight_slot], &c.body));
            }
            next[atom] = softor_with(&inputs, cfg.gamma, cfg.softor);
        }
        steps.push(next);
    }
    ForwardTape { steps }
}

/// `v⁽ᵀ⁾` after `cfg.t_max` steps of weighted forward chaining.
pub fn forward_chain(v_in: &[f64], w: &[f64], g: &InferenceGraph, cfg: &ReasonerConfig) -> Vec<f64> {
    let mut tape = forward_tape(v_in, w, g, cfg);
    tape.steps.pop().expect("nonempty")
}

/// Reverse pass: given `∂L/∂v⁽ᵀ⁾`, accumulates `∂L/∂W` into `dw` and
/// returns `∂L/∂v⁽⁰⁾`.
pub fn backward(
    tape: &ForwardTape,
    w: &[f64],
    g: &InferenceGraph,
    cfg: &ReasonerConfig,
    d_out: &[f64],
    dw: &mut [f64],
) -> Vec<f64> {
    let mut adj = d_out.to_vec();
    let mut inputs = Vec::new();
    let mut partials = Vec::new();
    for t in (1..tape.steps.len()).rev() {
        let prev = &tape.steps[t - 1];
        let mut adj_prev = adj.clone();
        for &atom in &g.heads {
            adj_prev[atom] = 0.0;
        }
        for (h, &atom) in g.heads.iter().enumerate() {
            let a = adj[atom];
            if a == 0.0 {
                continue;
            }
            inputs.clear();
            inputs.push(prev[atom]);
            for &k in &g.head_clauses[h] {
                let c = &g.clauses[k];
                inputs.push(contribution(prev, w[c.weight_slot], &c.body));
            }
            softor_grad(&inputs, cfg.gamma, cfg.softor, &mut partials);
            adj_prev[atom] += a * partials[0];
            for (n, &k) in g.head_clauses[h].iter().enumerate() {
                let gk = a * partials[n + 1];
                if gk == 0.0 {
                    continue;
                }
                let c = &g.clauses[k];
                let wk = w[c.weight_slot];
                dw[c.weight_slot] += gk * contribution(prev, 1.0, &c.body);
                for (p, &j) in c.body.iter().enumerate() {
                    let mut rest = wk;
                    for (q, &jj) in c.body.iter().enumerate() {
                        if q != p {
                            rest *= prev[jj];
                        }
                    }
                    adj_prev[j] += gk * rest;
                }
            }
        }
        adj = adj_prev;
    }
    adj
}

/// Hard max of `v` over each action's head atoms; actions without head
/// atoms score 0.
pub fn action_scores(v: &[f64], g: &InferenceGraph) -> Vec<f64> {
    g.head_atoms_by_action
        .iter()
        .map(|atoms| atoms.iter().map(|&a| v[a]).fold(0.0, f64::max))
        .collect()
}

/// Atom realizing each action's score (the first maximal head atom), if any.
pub fn score_argmax_atoms(v: &[f64], g: &InferenceGraph) -> Vec<Option<usize>> {
    g.head_atoms_by_action
        .iter()
        .map(|atoms| {
            let vals: Vec<f64> = atoms.iter().map(|&a| v[a]).collect();
            argmax(&vals).map(|i| atoms[i])
        })
        .collect()
}

/// `softmax(s / temperature)`.
pub fn policy_distribution(s: &[f64], cfg: &ReasonerConfig) -> Vec<f64> {
    let z = log_sum_exp_scaled(s, cfg.policy_temperature);
    s.iter().map(|x| exp(x / cfg.policy_temperature - z)).collect()
}

/// `ln π(a)` computed without forming π.
pub fn log_policy(s: &[f64], a: usize, cfg: &ReasonerConfig) -> f64 {
    s[a] / cfg.policy_temperature - log_sum_exp_scaled(s, cfg.policy_temperature)
}

fn log_sum_exp_scaled(s: &[f64], temp: f64) -> f64 {
    let max = s.iter().map(|x| x / temp).fold(f64::NEG_INFINITY, f64::max);
    max + ln(s.iter().map(|x| exp(x / temp - max)).sum())
}

/// Greedy action: argmax of the scores, lowest index on ties.
pub fn greedy_action(s: &[f64]) -> usize {
    argmax(s).unwrap_or(0)
}
