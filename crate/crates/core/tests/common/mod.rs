#![allow(dead_code)]

use grail_core::grounding::{build_atom_index, AtomIndex};
use grail_core::logic::{asterix_signatures, parse_rulebase};
use grail_core::reasoner::{compile, forward_tape, GroundClause, InferenceGraph, ReasonerConfig, ReasonerError};
use grail_core::{ObjectInventory, RuleBase};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const HEADS: [&str; 12] = [
    "noop_far_enemy",
    "noop_no_bonus",
    "up_dodge_left",
    "up_dodge_right",
    "down_dodge_left",
    "down_dodge_right",
    "up_bonus_left",
    "up_bonus_right",
    "down_bonus_left",
    "down_bonus_right",
    "right_bonus",
    "left_bonus",
];

const BINARY: [&str; 8] = [
    "closest",
    "closeby",
    "notcloseby",
    "on_left",
    "on_right",
    "same_row",
    "above_row",
    "below_row",
];
const UNARY: [&str; 5] = ["at_top", "at_bottom", "visible", "on_odd", "on_even"];
const TYPES: [&str; 3] = ["player", "enemy", "bonus"];

fn random_atom(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..3) {
        0 => format!("{}(O1,O2)", BINARY.choose(rng).unwrap()),
        1 => {
            let v = ["O1", "O2"].choose(rng).unwrap();
            format!("{}({v})", UNARY.choose(rng).unwrap())
        }
        _ => format!("type(O2,{})", TYPES[1 + rng.gen_range(0..2)]),
    }
}

/// Rule text with `n` clauses over the Asterix vocabulary. Every body pins
/// `O1` to the player and mentions `O2`, so each clause is groundable.
pub fn random_rule_text(rng: &mut ChaCha8Rng, n: usize) -> String {
    let mut out = String::new();
    for _ in 0..n {
        let head = HEADS.choose(rng).unwrap();
        let mut body = vec!["type(O1,player)".to_string(), format!("{}(O1,O2)", BINARY.choose(rng).unwrap())];
        for _ in 0..rng.gen_range(0..3) {
            body.push(random_atom(rng));
        }
        body.shuffle(rng);
        out.push_str(&format!("{head}(X) :- {}.\n", body.join(", ")));
    }
    out
}

/// Player plus up to `max_objects - 1` enemies and bonuses.
pub fn random_inventory(rng: &mut ChaCha8Rng, max_objects: usize) -> ObjectInventory {
    let others = rng.gen_range(1..max_objects);
    let enemies = rng.gen_range(0..=others);
    ObjectInventory::from_counts(
        "asterix",
        &[("player", 1), ("enemy", enemies), ("bonus", others - enemies)],
    )
}

pub struct Instance {
    pub rb: RuleBase,
    pub inv: ObjectInventory,
    pub idx: AtomIndex,
    pub graph: InferenceGraph,
}

/// A compiled random rule base with at most `max_clauses` clauses over at
/// most `max_objects` objects.
pub fn random_instance(rng: &mut ChaCha8Rng, max_clauses: usize, max_objects: usize) -> Instance {
    loop {
        let n = rng.gen_range(1..=max_clauses);
        let text = random_rule_text(rng, n);
        let rb = parse_rulebase(&text, &asterix_signatures()).expect("generated rules parse");
        let inv = random_inventory(rng, max_objects);
        let idx = build_atom_index(&rb, &inv).expect("generated rules ground");
        match compile(&rb, &idx) {
            Ok(graph) => return Instance { rb, inv, idx, graph },
            Err(ReasonerError::EmptyGraph) => continue,
            Err(e) => panic!("{e}"),
        }
    }
}

/// Random valuation: uniform on body atoms, zero on heads.
pub fn random_valuation(rng: &mut ChaCha8Rng, idx: &AtomIndex) -> Vec<f64> {
    (0..idx.len())
        .map(|i| if idx.is_head(i) { 0.0 } else { rng.gen::<f64>() })
        .collect()
}

/// A layered program over `n_atoms` atoms where later atoms may be derived
/// from earlier derived ones, so that chaining depth matters.
pub fn random_chain_graph(rng: &mut ChaCha8Rng) -> InferenceGraph {
    let n_atoms = rng.gen_range(4..12);
    let n_facts = rng.gen_range(2..n_atoms - 1);
    let n_clauses = rng.gen_range(1..10);
    let mut clauses = Vec::new();
    for k in 0..n_clauses {
        let head = rng.gen_range(n_facts..n_atoms);
        let len = rng.gen_range(1..4);
        let body: Vec<usize> = (0..len).map(|_| rng.gen_range(0..head)).collect();
        clauses.push(GroundClause {
            clause: k,
            weight_slot: k,
            head,
            body,
            substitution: None,
        });
    }
    let heads: Vec<(usize, usize)> = (n_facts..n_atoms).map(|a| (a, a % 2)).collect();
    InferenceGraph::new(n_atoms, n_clauses, vec!["a".into(), "b".into()], clauses, &heads)
        .expect("well-formed graph")
}

/// Classical synchronous boolean forward chaining for `t` steps.
pub fn boolean_chain(v: &[bool], w: &[bool], g: &InferenceGraph, t: usize) -> Vec<bool> {
    let mut cur = v.to_vec();
    for _ in 0..t {
        let mut next = cur.clone();
        for c in &g.clauses {
            if w[c.weight_slot] && c.body.iter().all(|&j| cur[j]) {
                next[c.head] = true;
            }
        }
        cur = next;
    }
    cur
}

/// Smallest distance of any softor input to the clamp, and of any action's
/// winning head atom to its runner-up, along the forward pass.
pub fn kink_margin(v: &[f64], w: &[f64], g: &InferenceGraph, cfg: &ReasonerConfig) -> f64 {
    let tape = forward_tape(v, w, g, cfg);
    let mut margin = f64::INFINITY;
    for t in 0..cfg.t_max {
        let prev = &tape.steps[t];
        for (h, &atom) in g.heads.iter().enumerate() {
            let mut inputs = vec![prev[atom]];
            for &k in &g.head_clauses[h] {
                let c = &g.clauses[k];
                inputs.push(c.body.iter().fold(w[c.weight_slot], |acc, &j| acc * prev[j]));
            }
            let max = inputs.iter().cloned().fold(f64::MIN, f64::max);
            let sum: f64 = inputs.iter().map(|x| ((x - max) / cfg.gamma).exp()).sum();
            margin = margin.min((1.0 - (max + cfg.gamma * sum.ln())).abs());
        }
    }
    let last = tape.last();
    for atoms in &g.head_atoms_by_action {
        let mut vals: Vec<f64> = atoms.iter().map(|&a| last[a]).collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        if vals.len() > 1 {
            margin = margin.min(vals[0] - vals[1]);
        }
    }
    margin
}
