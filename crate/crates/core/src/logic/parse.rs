//! Rule-file parser.
//!
//! ```text
//! rule    := head ":-" body "."
//! head    := ident "(" termlist ")"
//! body    := atom ("," atom)*
//! atom    := ident "(" termlist ")"
//! term    := UpperIdent | lowerIdent
//! comment := "%" .* EOL
//! ```
//!
//! Whitespace, including newlines, is insignificant, so a clause may span
//! several lines.

use alloc::string::String;
use alloc::vec::Vec;

use super::{
    Atom, Clause, PredicateKind, RuleBase, SignatureSet, SortKind, Span, Term, DEFAULT_MAX_BODY,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{span}: syntax error: {msg}")]
    Syntax { span: Span, msg: String },
    #[error("{span}: unknown predicate `{name}`")]
    UnknownPredicate { span: Span, name: String },
    #[error("{span}: `{name}` takes {expected} argument(s), found {found}")]
    ArityMismatch {
        span: Span,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("{span}: action-head predicate `{name}` cannot appear in a clause body")]
    ActionHeadInBody { span: Span, name: String },
    #[error("{span}: clause head `{name}` is not an action-head predicate")]
    HeadNotAction { span: Span, name: String },
    #[error("{span}: constant `{name}` is not a member of sort `{sort}`")]
    BadConstant { span: Span, name: String, sort: String },
    #[error("{span}: variable `{name}` used where sort `{sort}` expects a constant")]
    VariableInSymbolPosition { span: Span, name: String, sort: String },
    #[error("{span}: body has {len} atoms, limit is {max}")]
    BodyTooLong { span: Span, len: usize, max: usize },
}

#[derive(Clone, Copy, Debug)]
pub struct ParseOptions {
    pub max_body_len: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            max_body_len: DEFAULT_MAX_BODY,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Neck,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => alloc::format!("identifier `{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Neck => "`:-`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let span = Span { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '%' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' | ')' | ',' | '.' => {
                chars.next();
                col += 1;
                out.push((
                    match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        ',' => Tok::Comma,
                        _ => Tok::Dot,
                    },
                    span,
                ));
            }
            ':' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'-') {
                    chars.next();
                    col += 1;
                    out.push((Tok::Neck, span));
                } else {
                    return Err(ParseError::Syntax {
                        span,
                        msg: "expected `:-`".into(),
                    });
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        ident.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(ident), span));
            }
            other => {
                return Err(ParseError::Syntax {
                    span,
                    msg: alloc::format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push((Tok::Eof, Span { line, col }));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    sigs: &'a SignatureSet,
}

/// An atom as written, before it is checked against the signatures.
struct RawAtom {
    name: String,
    span: Span,
    args: Vec<(String, Span)>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &(Tok, Span) {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Span, ParseError> {
        let (tok, span) = self.bump();
        if tok == want {
            Ok(span)
        } else {
            Err(ParseError::Syntax {
                span,
                msg: alloc::format!("expected {}, found {}", want.describe(), tok.describe()),
            })
        }
    }

    fn ident(&mut self) -> Result<(String, Span), ParseError> {
        match self.bump() {
            (Tok::Ident(s), span) => Ok((s, span)),
            (tok, span) => Err(ParseError::Syntax {
                span,
                msg: alloc::format!("expected identifier, found {}", tok.describe()),
            }),
        }
    }

    fn raw_atom(&mut self) -> Result<RawAtom, ParseError> {
        let (name, span) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        loop {
            args.push(self.ident()?);
            match self.bump() {
                (Tok::Comma, _) => continue,
                (Tok::RParen, _) => break,
                (tok, span) => {
                    return Err(ParseError::Syntax {
                        span,
                        msg: alloc::format!("expected `,` or `)`, found {}", tok.describe()),
                    })
                }
            }
        }
        Ok(RawAtom { name, span, args })
    }

    fn resolve(&self, raw: RawAtom, in_head: bool) -> Result<Atom, ParseError> {
        let pred = self
            .sigs
            .find_predicate(&raw.name)
            .ok_or_else(|| ParseError::UnknownPredicate {
                span: raw.span,
                name: raw.name.clone(),
            })?;
        let sig = self.sigs.predicate(pred);
        if sig.arity != raw.args.len() {
            return Err(ParseError::ArityMismatch {
                span: raw.span,
                name: raw.name,
                expected: sig.arity,
                found: raw.args.len(),
            });
        }
        match (in_head, sig.kind == PredicateKind::ActionHead) {
            (true, false) => {
                return Err(ParseError::HeadNotAction {
                    span: raw.span,
                    name: raw.name,
                })
            }
            (false, true) => {
                return Err(ParseError::ActionHeadInBody {
                    span: raw.span,
                    name: raw.name,
                })
            }
            _ => {}
        }
        let mut args = Vec::with_capacity(raw.args.len());
        for ((text, span), &sort_id) in raw.args.into_iter().zip(&sig.arg_sorts) {
            let sort = self.sigs.sort(sort_id);
            let is_var = text.starts_with(|c: char| c.is_ascii_uppercase());
            let term = match (&sort.kind, is_var) {
                (SortKind::Objects(_), true) => Term::Variable(text),
                (SortKind::Symbols(values), false) => {
                    if !values.iter().any(|v| *v == text) {
                        return Err(ParseError::BadConstant {
                            span,
                            name: text,
                            sort: sort.name.clone(),
                        });
                    }
                    Term::Constant {
                        name: text,
                        sort: sort_id,
                    }
                }
                (SortKind::Symbols(_), true) => {
                    return Err(ParseError::VariableInSymbolPosition {
                        span,
                        name: text,
                        sort: sort.name.clone(),
                    })
                }
                (SortKind::Objects(_), false) => {
                    return Err(ParseError::BadConstant {
                        span,
                        name: text,
                        sort: sort.name.clone(),
                    })
                }
            };
            args.push(term);
        }
        Ok(Atom { pred, args })
    }

    fn clause(&mut self, slot: usize, opts: &ParseOptions) -> Result<Clause, ParseError> {
        let head_raw = self.raw_atom()?;
        let span = head_raw.span;
        let head = self.resolve(head_raw, true)?;
        self.expect(Tok::Neck)?;
        let mut body = Vec::new();
        loop {
            let raw = self.raw_atom()?;
            body.push(self.resolve(raw, false)?);
            match self.bump() {
                (Tok::Comma, _) => continue,
                (Tok::Dot, _) => break,
                (tok, span) => {
                    return Err(ParseError::Syntax {
                        span,
                        msg: alloc::format!("expected `,` or `.`, found {}", tok.describe()),
                    })
                }
            }
        }
        if body.len() > opts.max_body_len {
            return Err(ParseError::BodyTooLong {
                span,
                len: body.len(),
                max: opts.max_body_len,
            });
        }
        Ok(Clause {
            head,
            body,
            weight_slot: slot,
            span,
        })
    }
}

/// Parses a rule file with the default options. Clauses keep file order and
/// receive weight slots `0..M` in that order.
pub fn parse_rulebase(text: &str, signatures: &SignatureSet) -> Result<RuleBase, ParseError> {
    parse_rulebase_with(text, signatures, &ParseOptions::default())
}

pub fn parse_rulebase_with(
    text: &str,
    signatures: &SignatureSet,
    opts: &ParseOptions,
) -> Result<RuleBase, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        sigs: signatures,
    };
    let mut clauses = Vec::new();
    while p.peek().0 != Tok::Eof {
        let slot = clauses.len();
        clauses.push(p.clause(slot, opts)?);
    }
    Ok(RuleBase::new(signatures.clone(), clauses))
}

impl ParseError {
    pub fn span(&self) -> Span {
        match self {
            ParseError::Syntax { span, .. }
            | ParseError::UnknownPredicate { span, .. }
            | ParseError::ArityMismatch { span, .. }
            | ParseError::ActionHeadInBody { span, .. }
            | ParseError::HeadNotAction { span, .. }
            | ParseError::BadConstant { span, .. }
            | ParseError::VariableInSymbolPosition { span, .. }
            | ParseError::BodyTooLong { span, .. } => *span,
        }
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{asterix_signatures, seaquest_signatures};

    #[test]
    fn parses_single_seaquest_clause() {
        let rb = parse_rulebase("up_air(X) :- oxygen_low(B).", &seaquest_signatures()).unwrap();
        assert_eq!(rb.len(), 1);
        let c = &rb.clauses[0];
        let sigs = &rb.signatures;
        assert_eq!(sigs.predicate(c.head.pred).name, "up_air");
        assert_eq!(sigs.predicate(c.head.pred).arity, 1);
        assert_eq!(c.body.len(), 1);
        assert_eq!(sigs.predicate(c.body[0].pred).name, "oxygen_low");
        assert_eq!(c.weight_slot, 0);
        assert_eq!(rb.actions()[rb.clause_action(0).unwrap()], "up");
    }

    #[test]
    fn empty_file_gives_empty_rulebase() {
        let rb = parse_rulebase("", &seaquest_signatures()).unwrap();
        assert!(rb.is_empty());
        let rb = parse_rulebase("  % only a comment\n\n", &seaquest_signatures()).unwrap();
        assert!(rb.is_empty());
    }

    #[test]
    fn parses_six_atom_asterix_body() {
        let text = "left_bonus(X) :- on_right(O1,O2), type(O1,player), type(O2,bonus), \
                    same_row(O1,O2), closeby(O1,O2), visible(O2).";
        let rb = parse_rulebase(text, &asterix_signatures()).unwrap();
        assert_eq!(rb.len(), 1);
        assert_eq!(rb.clauses[0].body.len(), 6);
        assert_eq!(rb.actions()[rb.clause_action(0).unwrap()], "left");
    }

    #[test]
    fn unknown_predicate_is_reported_with_position() {
        let err = parse_rulebase("up_air(X) :- missing_pred(B).", &seaquest_signatures())
            .unwrap_err();
        match err {
            ParseError::UnknownPredicate { span, name } => {
                assert_eq!(name, "missing_pred");
                assert_eq!(span, Span { line: 1, col: 14 });
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn arity_mismatch() {
        let err = parse_rulebase("up_air(X) :- oxygen_low(B, C).", &seaquest_signatures())
            .unwrap_err();
        assert!(matches!(err, ParseError::ArityMismatch { expected: 1, found: 2, .. }));
    }

    #[test]
    fn action_head_in_body_is_rejected() {
        let err =
            parse_rulebase("up_air(X) :- up_evade(Y).", &seaquest_signatures()).unwrap_err();
        assert!(matches!(err, ParseError::ActionHeadInBody { .. }));
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let err = parse_rulebase("up_air(X) :- oxygen_low(B)\nfire_left(X) :- x.", &seaquest_signatures())
            .unwrap_err();
        match err {
            ParseError::Syntax { span, .. } => assert_eq!(span, Span { line: 2, col: 1 }),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_rulebase("up_air(X) : oxygen_low(B).", &seaquest_signatures()).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { span: Span { line: 1, col: 11 }, .. }));
    }

    #[test]
    fn constants_are_checked_against_their_sort() {
        let sigs = asterix_signatures();
        let err = parse_rulebase("left_bonus(X) :- type(O1, dragon).", &sigs).unwrap_err();
        assert!(matches!(err, ParseError::BadConstant { .. }));
        let err = parse_rulebase("left_bonus(X) :- type(O1, T).", &sigs).unwrap_err();
        assert!(matches!(err, ParseError::VariableInSymbolPosition { .. }));
    }

    #[test]
    fn body_length_cap_is_configurable() {
        let text = "left_bonus(X) :- visible(A), visible(B), visible(C).";
        let sigs = asterix_signatures();
        assert!(parse_rulebase(text, &sigs).is_ok());
        let err = parse_rulebase_with(text, &sigs, &ParseOptions { max_body_len: 2 }).unwrap_err();
        assert!(matches!(err, ParseError::BodyTooLong { len: 3, max: 2, .. }));
    }

    #[test]
    fn multiple_clauses_share_a_head() {
        let text = "up_evade(X) :- close_by_enemy(P,E).\nup_evade(X) :- close_by_missile(P,M).";
        let rb = parse_rulebase(text, &seaquest_signatures()).unwrap();
        assert_eq!(rb.len(), 2);
        assert_eq!(rb.action_heads.len(), 1);
        assert_eq!(rb.clauses[1].weight_slot, 1);
    }
}
