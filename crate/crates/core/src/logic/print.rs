use alloc::string::String;
use alloc::vec::Vec;

use super::{Atom, Clause, RuleBase, SignatureSet, Term};

pub fn atom_to_string(atom: &Atom, sigs: &SignatureSet) -> String {
    let args: Vec<&str> = atom.args.iter().map(Term::name).collect();
    alloc::format!("{}({})", sigs.predicate(atom.pred).name, args.join(","))
}

pub fn clause_to_string(clause: &Clause, sigs: &SignatureSet) -> String {
    let body: Vec<String> = clause.body.iter().map(|a| atom_to_string(a, sigs)).collect();
    alloc::format!("{} :- {}.", atom_to_string(&clause.head, sigs), body.join(", "))
}

/// One clause per line, in weight-slot order.
pub fn pretty_print(rb: &RuleBase) -> String {
    let mut out = String::new();
    for c in &rb.clauses {
        out.push_str(&clause_to_string(c, &rb.signatures));
        out.push('\n');
    }
    out
}
