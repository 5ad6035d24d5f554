//! First-order rule language: sorts, predicate signatures, terms, atoms and
//! definite clauses with action heads.
//!
//! Rule files are parsed against a [`SignatureSet`], which fixes the
//! predicates a rule base may mention, the sorts of their arguments, and the
//! ordered action set the heads map onto.

mod parse;
mod print;
mod signatures;
mod validate;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use parse::{parse_rulebase, parse_rulebase_with, ParseError, ParseOptions};
pub use print::{atom_to_string, clause_to_string, pretty_print};
pub use signatures::{asterix_signatures, freeway_signatures, seaquest_signatures};
pub use validate::{validate_rulebase, validate_rulebase_with, Diagnostic, DiagnosticKind, Severity};

/// Longest clause body accepted by default.
pub const DEFAULT_MAX_BODY: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SortId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredId(pub usize);

/// What the values of a sort are.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SortKind {
    /// Ranges over object slots whose type label is listed. An empty list
    /// admits every slot.
    Objects(Vec<String>),
    /// A closed set of symbolic constants, e.g. object type labels.
    Symbols(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sort {
    pub name: String,
    pub kind: SortKind,
}

impl Sort {
    pub fn objects(name: &str, types: &[&str]) -> Self {
        Sort {
            name: name.into(),
            kind: SortKind::Objects(types.iter().map(|t| String::from(*t)).collect()),
        }
    }

    pub fn symbols(name: &str, values: &[&str]) -> Self {
        Sort {
            name: name.into(),
            kind: SortKind::Symbols(values.iter().map(|t| String::from(*t)).collect()),
        }
    }

    pub fn is_object_sort(&self) -> bool {
        matches!(self.kind, SortKind::Objects(_))
    }

    /// Type labels admitted by an object sort; `None` means any label.
    pub fn admitted_types(&self) -> Option<&[String]> {
        match &self.kind {
            SortKind::Objects(types) if !types.is_empty() => Some(types),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredicateKind {
    BodySoft,
    BodyCrisp,
    ActionHead,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateSignature {
    pub name: String,
    pub arity: usize,
    pub arg_sorts: Vec<SortId>,
    pub kind: PredicateKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("duplicate sort `{0}`")]
    DuplicateSort(String),
    #[error("duplicate predicate `{0}`")]
    DuplicatePredicate(String),
    #[error("predicate `{pred}` refers to unknown sort `{sort}`")]
    UnknownSort { pred: String, sort: String },
    #[error("action head `{pred}` maps to action `{action}` which is not in the action list")]
    UnknownAction { pred: String, action: String },
}

/// The vocabulary a rule base is written in.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SignatureSet {
    sorts: Vec<Sort>,
    predicates: Vec<PredicateSignature>,
    actions: Vec<String>,
}

/// Action named by an action-head predicate: the text before the first `_`.
pub fn action_prefix(head_name: &str) -> &str {
    head_name.split('_').next().unwrap_or(head_name)
}

impl SignatureSet {
    /// Starts an empty set over the given ordered action list.
    pub fn new(actions: &[&str]) -> Self {
        SignatureSet {
            sorts: Vec::new(),
            predicates: Vec::new(),
            actions: actions.iter().map(|a| String::from(*a)).collect(),
        }
    }

    pub fn add_sort(&mut self, sort: Sort) -> Result<SortId, SignatureError> {
        if self.find_sort(&sort.name).is_some() {
            return Err(SignatureError::DuplicateSort(sort.name));
        }
        self.sorts.push(sort);
        Ok(SortId(self.sorts.len() - 1))
    }

    /// Adds a predicate whose argument sorts are given by name.
    pub fn add_predicate(
        &mut self,
        name: &str,
        arg_sorts: &[&str],
        kind: PredicateKind,
    ) -> Result<PredId, SignatureError> {
        if self.find_predicate(name).is_some() {
            return Err(SignatureError::DuplicatePredicate(name.into()));
        }
        let mut sorts = Vec::with_capacity(arg_sorts.len());
        for s in arg_sorts {
            let id = self.find_sort(s).ok_or_else(|| SignatureError::UnknownSort {
                pred: name.into(),
                sort: String::from(*s),
            })?;
            sorts.push(id);
        }
        if kind == PredicateKind::ActionHead {
            let action = action_prefix(name);
            if !self.actions.iter().any(|a| a == action) {
                return Err(SignatureError::UnknownAction {
                    pred: name.into(),
                    action: action.into(),
                });
            }
        }
        self.predicates.push(PredicateSignature {
            name: name.into(),
            arity: sorts.len(),
            arg_sorts: sorts,
            kind,
        });
        Ok(PredId(self.predicates.len() - 1))
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn predicates(&self) -> &[PredicateSignature] {
        &self.predicates
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn sort(&self, id: SortId) -> &Sort {
        &self.sorts[id.0]
    }

    pub fn predicate(&self, id: PredId) -> &PredicateSignature {
        &self.predicates[id.0]
    }

    pub fn find_sort(&self, name: &str) -> Option<SortId> {
        self.sorts.iter().position(|s| s.name == name).map(SortId)
    }

    pub fn find_predicate(&self, name: &str) -> Option<PredId> {
        self.predicates.iter().position(|p| p.name == name).map(PredId)
    }

    pub fn find_action(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == name)
    }

    /// Index into [`Self::actions`] for an action-head predicate.
    pub fn action_of(&self, pred: PredId) -> Option<usize> {
        let sig = self.predicate(pred);
        if sig.kind != PredicateKind::ActionHead {
            return None;
        }
        self.find_action(action_prefix(&sig.name))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Variable(String),
    Constant { name: String, sort: SortId },
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Variable(n) => n,
            Term::Constant { name, .. } => name,
        }
    }

    pub fn as_variable(&self) -> Option<&str> {
        match self {
            Term::Variable(n) => Some(n),
            Term::Constant { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub pred: PredId,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(Term::as_variable)
    }
}

/// 1-based position in the source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
    pub weight_slot: usize,
    pub span: Span,
}

impl Clause {
    /// Variables occurring in the body, in first-occurrence order.
    pub fn body_variables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for v in self.body.iter().flat_map(Atom::variables) {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    /// Head variables that never occur in the body.
    pub fn head_only_variables(&self) -> Vec<&str> {
        let body = self.body_variables();
        let mut out: Vec<&str> = Vec::new();
        for v in self.head.variables() {
            if !body.contains(&v) && !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }
}

/// A weighted rule base over a fixed signature set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleBase {
    pub clauses: Vec<Clause>,
    pub signatures: SignatureSet,
    /// Distinct head predicates in order of first appearance.
    pub action_heads: Vec<PredId>,
}

impl RuleBase {
    /// Builds a rule base, deriving `action_heads` from the clauses.
    pub fn new(signatures: SignatureSet, clauses: Vec<Clause>) -> Self {
        let mut action_heads = Vec::new();
        for c in &clauses {
            if !action_heads.contains(&c.head.pred) {
                action_heads.push(c.head.pred);
            }
        }
        RuleBase {
            clauses,
            signatures,
            action_heads,
        }
    }

    pub fn empty(signatures: SignatureSet) -> Self {
        Self::new(signatures, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// The ordered action set the policy ranges over.
    pub fn actions(&self) -> &[String] {
        self.signatures.actions()
    }

    /// Action index of clause `i`'s head.
    pub fn clause_action(&self, i: usize) -> Option<usize> {
        self.signatures.action_of(self.clauses[i].head.pred)
    }

    pub fn head_name(&self, i: usize) -> &str {
        &self.signatures.predicate(self.clauses[i].head.pred).name
    }

    /// Equality ignoring source positions.
    pub fn same_structure(&self, other: &RuleBase) -> bool {
        self.signatures == other.signatures
            && self.action_heads == other.action_heads
            && self.clauses.len() == other.clauses.len()
            && self.clauses.iter().zip(&other.clauses).all(|(a, b)| {
                a.head == b.head && a.body == b.body && a.weight_slot == b.weight_slot
            })
    }
}
