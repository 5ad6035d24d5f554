use alloc::string::String;
use alloc::vec::Vec;

use super::{PredicateKind, RuleBase, SortKind, Term, DEFAULT_MAX_BODY};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    HeadOnlyVariable(String),
    DuplicateClause { first: usize },
    ActionHeadInBody,
    HeadNotAction,
    ArityMismatch,
    EmptyBody,
    BodyTooLong { len: usize, max: usize },
    WeightSlotsNotPermutation,
    SortConflict(String),
    BadTerm(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Offending clause; `None` for whole-base problems.
    pub clause: Option<usize>,
    pub kind: DiagnosticKind,
}

impl Diagnostic {
    fn error(clause: Option<usize>, kind: DiagnosticKind) -> Self {
        Diagnostic {
            severity: Severity::Error,
            clause,
            kind,
        }
    }

    fn warning(clause: usize, kind: DiagnosticKind) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            clause: Some(clause),
            kind,
        }
    }
}

pub fn validate_rulebase(rb: &RuleBase) -> Vec<Diagnostic> {
    validate_rulebase_with(rb, DEFAULT_MAX_BODY)
}

/// Checks every rule-base invariant, returning diagnostics instead of
/// failing. Head-only variables and duplicated clauses are warnings; the
/// rest are errors.
pub fn validate_rulebase_with(rb: &RuleBase, max_body_len: usize) -> Vec<Diagnostic> {
    let sigs = &rb.signatures;
    let mut out = Vec::new();

    let mut slots: Vec<usize> = rb.clauses.iter().map(|c| c.weight_slot).collect();
    slots.sort_unstable();
    if slots.iter().enumerate().any(|(i, &s)| i != s) {
        out.push(Diagnostic::error(None, DiagnosticKind::WeightSlotsNotPermutation));
    }

    for (ci, clause) in rb.clauses.iter().enumerate() {
        let head_sig = sigs.predicate(clause.head.pred);
        if head_sig.kind != PredicateKind::ActionHead {
            out.push(Diagnostic::error(Some(ci), DiagnosticKind::HeadNotAction));
        }
        if clause.body.is_empty() {
            out.push(Diagnostic::error(Some(ci), DiagnosticKind::EmptyBody));
        }
        if clause.body.len() > max_body_len {
            out.push(Diagnostic::error(
                Some(ci),
                DiagnosticKind::BodyTooLong {
                    len: clause.body.len(),
                    max: max_body_len,
                },
            ));
        }

        // Object type labels admitted so far for each variable; `None` is "any".
        let mut domains: Vec<(&str, Option<Vec<&str>>)> = Vec::new();
        for (ai, atom) in core::iter::once(&clause.head).chain(&clause.body).enumerate() {
            let sig = sigs.predicate(atom.pred);
            if ai > 0 && sig.kind == PredicateKind::ActionHead {
                out.push(Diagnostic::error(Some(ci), DiagnosticKind::ActionHeadInBody));
            }
            if sig.arity != atom.args.len() {
                out.push(Diagnostic::error(Some(ci), DiagnosticKind::ArityMismatch));
                continue;
            }
            for (term, &sort_id) in atom.args.iter().zip(&sig.arg_sorts) {
                let sort = sigs.sort(sort_id);
                match (term, &sort.kind) {
                    (Term::Variable(v), SortKind::Objects(types)) => {
                        if ai == 0 {
                            continue;
                        }
                        let admitted: Option<Vec<&str>> = if types.is_empty() {
                            None
                        } else {
                            Some(types.iter().map(String::as_str).collect())
                        };
                        match domains.iter_mut().find(|(n, _)| n == v) {
                            None => domains.push((v, admitted)),
                            Some((_, dom)) => {
                                if let Some(new) = admitted {
                                    let merged: Vec<&str> = match dom.take() {
                                        None => new,
                                        Some(old) => {
                                            old.into_iter().filter(|t| new.contains(t)).collect()
                                        }
                                    };
                                    if merged.is_empty() {
                                        out.push(Diagnostic::error(
                                            Some(ci),
                                            DiagnosticKind::SortConflict(v.clone()),
                                        ));
                                    }
                                    *dom = Some(merged);
                                }
                            }
                        }
                    }
                    (Term::Constant { name, .. }, SortKind::Symbols(values))
                        if values.contains(name) => {}
                    (t, _) => out.push(Diagnostic::error(
                        Some(ci),
                        DiagnosticKind::BadTerm(String::from(t.name())),
                    )),
                }
            }
        }

        for v in clause.head_only_variables() {
            out.push(Diagnostic::warning(ci, DiagnosticKind::HeadOnlyVariable(v.into())));
        }
        if let Some(first) = rb.clauses[..ci]
            .iter()
            .position(|o| o.head == clause.head && o.body == clause.body)
        {
            out.push(Diagnostic::warning(ci, DiagnosticKind::DuplicateClause { first }));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_rulebase, seaquest_signatures, Atom, Clause, Span};
    use alloc::vec;

    #[test]
    fn head_only_variable_is_a_warning() {
        let rb = parse_rulebase("up_air(X) :- oxygen_low(B).", &seaquest_signatures()).unwrap();
        let d = validate_rulebase(&rb);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Warning);
        assert_eq!(d[0].kind, DiagnosticKind::HeadOnlyVariable("X".into()));
    }

    #[test]
    fn action_head_in_body_is_an_error() {
        let sigs = seaquest_signatures();
        let up_air = sigs.find_predicate("up_air").unwrap();
        let x = || vec![Term::Variable("X".into())];
        let clause = Clause {
            head: Atom { pred: up_air, args: x() },
            body: vec![Atom { pred: up_air, args: x() }],
            weight_slot: 0,
            span: Span::default(),
        };
        let rb = RuleBase::new(sigs, vec![clause]);
        let d = validate_rulebase(&rb);
        assert!(d
            .iter()
            .any(|d| d.severity == Severity::Error && d.kind == DiagnosticKind::ActionHeadInBody));
    }

    #[test]
    fn duplicate_clause_is_a_warning() {
        let text = "up_air(X) :- oxygen_low(B).\nup_air(X) :- oxygen_low(B).";
        let rb = parse_rulebase(text, &seaquest_signatures()).unwrap();
        let d = validate_rulebase(&rb);
        assert!(d.iter().any(|d| d.severity == Severity::Warning
            && d.kind == DiagnosticKind::DuplicateClause { first: 0 }
            && d.clause == Some(1)));
        assert!(d.iter().all(|d| d.severity == Severity::Warning));
    }

    #[test]
    fn sort_conflicts_and_bad_slots_are_errors() {
        let text = "up_evade(X) :- close_by_enemy(P,E), visible_diver(E).";
        let mut rb = parse_rulebase(text, &seaquest_signatures()).unwrap();
        let d = validate_rulebase(&rb);
        assert!(d.iter().any(|d| d.kind == DiagnosticKind::SortConflict("E".into())));
        rb.clauses[0].weight_slot = 3;
        let d = validate_rulebase(&rb);
        assert!(d.iter().any(|d| d.kind == DiagnosticKind::WeightSlotsNotPermutation));
    }

    #[test]
    fn clean_clause_has_no_diagnostics() {
        let text = "up_evade(P) :- close_by_enemy(P,E), visible_enemy(E).";
        let rb = parse_rulebase(text, &seaquest_signatures()).unwrap();
        assert!(validate_rulebase(&rb).is_empty());
    }
}
