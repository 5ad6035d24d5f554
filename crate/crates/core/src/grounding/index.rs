//! Enumeration of ground atoms and clause substitutions.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::logic::{Clause, PredId, PredicateKind, RuleBase, Term};

use super::predicates::{relation_for, EvalAux, Relation};
use super::{GroundingError, ObjectInventory};

/// Argument of a ground atom: an inventory slot or a symbolic constant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroundArg {
    Slot(usize),
    Const(String),
}

impl fmt::Display for GroundArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundArg::Slot(s) => write!(f, "obj{s}"),
            GroundArg::Const(c) => f.write_str(c),
        }
    }
}

/// A predicate applied to ground arguments.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<GroundArg>,
    pub pred: PredId,
}

impl GroundAtom {
    /// Object slots this atom mentions, in argument order, without repeats.
    pub fn slots(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for a in &self.args {
            if let GroundArg::Slot(s) = a {
                if !out.contains(s) {
                    out.push(*s);
                }
            }
        }
        out
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// Slot bindings for the body variables of one clause, aligned with
/// [`Clause::body_variables`], plus the slot bound to the head argument.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Substitution {
    pub bindings: Vec<usize>,
    pub head_slot: usize,
}

/// How an atom gets its initial value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum AtomEval {
    /// Derived only by inference; starts at 0.
    Head,
    Body {
        rel: Relation,
        a: usize,
        b: usize,
        aux: EvalAux,
    },
}

/// Canonical ordering of the ground atoms a rule base touches over an
/// inventory.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomIndex {
    pub atoms: Vec<GroundAtom>,
    pub lookup: BTreeMap<GroundAtom, usize>,
    /// Object slots referenced by each atom.
    pub entity_refs: Vec<Vec<usize>>,
    pub inventory: ObjectInventory,
    pub(crate) evals: Vec<AtomEval>,
}

impl AtomIndex {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn get(&self, atom: &GroundAtom) -> Option<usize> {
        self.lookup.get(atom).copied()
    }

    /// Whether atom `i` is an action-head atom.
    pub fn is_head(&self, i: usize) -> bool {
        self.evals[i] == AtomEval::Head
    }

    /// Indices of atoms whose value comes from grounding.
    pub fn body_atoms(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| !self.is_head(i))
    }

    /// Looks up an atom by predicate name and slot/constant arguments given
    /// as text, e.g. `("closeby", &["obj0", "obj3"])`.
    pub fn find(&self, predicate: &str, args: &[&str]) -> Option<usize> {
        self.atoms.iter().position(|a| {
            a.predicate == predicate
                && a.args.len() == args.len()
                && a.args.iter().zip(args).all(|(g, t)| match g {
                    GroundArg::Slot(s) => t.strip_prefix("obj").and_then(|n| n.parse().ok()) == Some(*s),
                    GroundArg::Const(c) => c == t,
                })
        })
    }
}

fn variable_domain(
    rb: &RuleBase,
    clause: &Clause,
    var: &str,
    inv: &ObjectInventory,
) -> Vec<usize> {
    let sigs = &rb.signatures;
    let mut allowed: Vec<bool> = alloc::vec![true; inv.len()];
    let mut restrict = |ok: &dyn Fn(&str) -> bool| {
        for (slot, a) in allowed.iter_mut().enumerate() {
            if !ok(&inv.slots[slot].type_label) {
                *a = false;
            }
        }
    };
    for atom in &clause.body {
        let sig = sigs.predicate(atom.pred);
        for (pos, t) in atom.args.iter().enumerate() {
            if t.as_variable() != Some(var) {
                continue;
            }
            if let Some(types) = sigs.sort(sig.arg_sorts[pos]).admitted_types() {
                restrict(&|label| types.iter().any(|t| t == label));
            }
        }
        // `type(V, c)` fixes the slot type.
        if relation_for(&sig.name) == Some(Relation::TypeIs) && atom.args.len() == 2 {
            if let (Some(v), Term::Constant { name, .. }) = (atom.args[0].as_variable(), &atom.args[1])
            {
                if v == var {
                    restrict(&|label| label == name);
                }
            }
        }
    }
    (0..inv.len()).filter(|&s| allowed[s]).collect()
}

/// Enumerates the type-consistent, injective substitutions of one clause's
/// body variables over the inventory, in lexicographic slot order.
pub fn clause_substitutions(
    rb: &RuleBase,
    clause: usize,
    inv: &ObjectInventory,
) -> Result<Vec<Substitution>, GroundingError> {
    let c = &rb.clauses[clause];
    let head_default = inv.player_slot().ok_or(GroundingError::NoPlayerSlot)?;
    let vars = c.body_variables();
    let domains: Vec<Vec<usize>> = vars
        .iter()
        .map(|v| variable_domain(rb, c, v, inv))
        .collect();
    let head_var = c.head.args.first().and_then(Term::as_variable);
    let head_pos = head_var.and_then(|h| vars.iter().position(|v| *v == h));

    let mut out = Vec::new();
    let mut current = Vec::with_capacity(vars.len());
    enumerate(&domains, &mut current, &mut |b| {
        let head_slot = match head_pos {
            Some(p) => b[p],
            None => head_default,
        };
        if head_pos.is_some() && inv.slots[head_slot].type_label != "player" {
            return;
        }
        out.push(Substitution {
            bindings: b.to_vec(),
            head_slot,
        });
    });
    Ok(out)
}

fn enumerate(domains: &[Vec<usize>], current: &mut Vec<usize>, emit: &mut dyn FnMut(&[usize])) {
    if current.len() == domains.len() {
        emit(current);
        return;
    }
    for &s in &domains[current.len()] {
        if current.contains(&s) {
            continue;
        }
        current.push(s);
        enumerate(domains, current, emit);
        current.pop();
    }
}

/// Grounds atom `atom` of clause `c` under a substitution.
pub(crate) fn ground_atom(
    rb: &RuleBase,
    c: &Clause,
    atom: &crate::logic::Atom,
    sub: &Substitution,
) -> GroundAtom {
    let vars = c.body_variables();
    let sig = rb.signatures.predicate(atom.pred);
    let args = atom
        .args
        .iter()
        .map(|t| match t {
            Term::Variable(v) => match vars.iter().position(|x| x == v) {
                Some(p) => GroundArg::Slot(sub.bindings[p]),
                None => GroundArg::Slot(sub.head_slot),
            },
            Term::Constant { name, .. } => GroundArg::Const(name.clone()),
        })
        .collect();
    GroundAtom {
        predicate: sig.name.clone(),
        args,
        pred: atom.pred,
    }
}

/// Builds the canonical atom index of `rb` over `inv`.
///
/// Every body atom reachable by some clause substitution is included, plus
/// one head atom per head predicate with at least one ground clause. Atoms
/// are ordered by predicate name, then arguments.
pub fn build_atom_index(rb: &RuleBase, inv: &ObjectInventory) -> Result<AtomIndex, GroundingError> {
    let sigs = &rb.signatures;
    let mut set: BTreeMap<GroundAtom, ()> = BTreeMap::new();
    for (ci, c) in rb.clauses.iter().enumerate() {
        for atom in &c.body {
            let name = &sigs.predicate(atom.pred).name;
            if relation_for(name).is_none() {
                return Err(GroundingError::UnknownSemantics(name.clone()));
            }
        }
        for sub in clause_substitutions(rb, ci, inv)? {
            for atom in &c.body {
                set.insert(ground_atom(rb, c, atom, &sub), ());
            }
            set.insert(ground_atom(rb, c, &c.head, &sub), ());
        }
    }

    let atoms: Vec<GroundAtom> = set.into_keys().collect();
    let mut lookup = BTreeMap::new();
    let mut entity_refs = Vec::with_capacity(atoms.len());
    let mut evals = Vec::with_capacity(atoms.len());
    let collected_type = inv.type_id("collected_diver");
    for (i, a) in atoms.iter().enumerate() {
        lookup.insert(a.clone(), i);
        entity_refs.push(a.slots());
        let eval = if sigs.predicate(a.pred).kind == PredicateKind::ActionHead {
            AtomEval::Head
        } else {
            let rel = relation_for(&a.predicate).expect("checked above");
            let slot = |k: usize| match a.args.get(k) {
                Some(GroundArg::Slot(s)) => *s,
                _ => 0,
            };
            let type_const = match a.args.get(1) {
                Some(GroundArg::Const(c)) if rel == Relation::TypeIs => inv.type_id(c),
                _ => None,
            };
            AtomEval::Body {
                rel,
                a: slot(0),
                b: if rel.arity() == 2 && !rel.takes_type_constant() {
                    slot(1)
                } else {
                    slot(0)
                },
                aux: EvalAux {
                    type_const,
                    collected_type,
                },
            }
        };
        evals.push(eval);
    }
    Ok(AtomIndex {
        atoms,
        lookup,
        entity_refs,
        inventory: inv.clone(),
        evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{asterix_signatures, parse_rulebase, seaquest_signatures};
    use alloc::string::ToString;

    fn seaquest_inventory() -> ObjectInventory {
        ObjectInventory::from_counts(
            "seaquest",
            &[
                ("player", 1),
                ("shark", 12),
                ("submarine", 12),
                ("enemy_missile", 8),
                ("diver", 8),
                ("player_missile", 1),
                ("oxygen_bar", 1),
                ("collected_diver", 6),
            ],
        )
    }

    #[test]
    fn closeby_with_player_first_arg() {
        let rb = parse_rulebase(
            "right_bonus(X) :- closeby(O1,O2), type(O1,player).",
            &asterix_signatures(),
        )
        .unwrap();
        let inv = ObjectInventory::from_counts("t", &[("player", 1), ("enemy", 2)]);
        let idx = build_atom_index(&rb, &inv).unwrap();
        let n = idx.atoms.iter().filter(|a| a.predicate == "closeby").count();
        assert_eq!(n, 2);
    }

    #[test]
    fn empty_rule_base_has_no_atoms() {
        let rb = parse_rulebase("", &asterix_signatures()).unwrap();
        let inv = ObjectInventory::from_counts("t", &[("player", 1)]);
        assert_eq!(build_atom_index(&rb, &inv).unwrap().len(), 0);
    }

    #[test]
    fn seaquest_atom_count() {
        let text = include_str!("../../../../rules/seaquest.rules");
        let rb = parse_rulebase(text, &seaquest_signatures()).unwrap();
        let inv = seaquest_inventory();
        assert_eq!(inv.len(), 49);
        let idx = build_atom_index(&rb, &inv).unwrap();
        assert_eq!(idx.len(), 293);
        let heads = (0..idx.len()).filter(|&i| idx.is_head(i)).count();
        assert_eq!(heads, 16);
    }

    #[test]
    fn ordering_and_lookup_agree() {
        let text = include_str!("../../../../rules/asterix.rules");
        let rb = parse_rulebase(text, &asterix_signatures()).unwrap();
        let inv = ObjectInventory::from_counts("a", &[("player", 1), ("enemy", 2), ("bonus", 2)]);
        let idx = build_atom_index(&rb, &inv).unwrap();
        for (i, a) in idx.atoms.iter().enumerate() {
            assert_eq!(idx.get(a), Some(i));
        }
        for w in idx.atoms.windows(2) {
            assert!(
                (w[0].predicate.as_str(), &w[0].args) < (w[1].predicate.as_str(), &w[1].args)
            );
        }
        assert_eq!(idx.find("closeby", &["obj0", "obj1"]).map(|i| idx.atoms[i].to_string()),
            Some("closeby(obj0,obj1)".into()));
    }

    #[test]
    fn substitutions_are_injective() {
        let text = include_str!("../../../../rules/seaquest.rules");
        let rb = parse_rulebase(text, &seaquest_signatures()).unwrap();
        let inv = ObjectInventory::from_counts(
            "s",
            &[("player", 1), ("shark", 2), ("submarine", 1), ("oxygen_bar", 1)],
        );
        let last = rb.len() - 1;
        let subs = clause_substitutions(&rb, last, &inv).unwrap();
        // noop_evade binds P, E, E2 with E != E2 over three enemies.
        assert_eq!(subs.len(), 6);
        assert!(subs.iter().all(|s| s.bindings[1] != s.bindings[2]));
    }
}
