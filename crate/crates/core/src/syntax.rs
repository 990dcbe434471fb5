//! Text format for knowledge bases and queries.
//!
//! ```text
//! kb         := section*
//! section    := "tbox:" inclusion* | "abox:" assertion*
//!             | ("concepts:" | "roles:" | "individuals:") name ("," ? name)*
//! inclusion  := lhs "<=" concept
//! assertion  := lhs "(" name ")" | name "(" name "," name ")"
//! query      := inclusion | lhs "(" name ")"
//! lhs        := "T" "(" concept ")" | concept
//! concept    := conj ("|" conj)*
//! conj       := unary ("&" unary)*
//! unary      := "~" unary | ("exists" | "forall") name "." concept
//!             | "(" concept ")" | "Top" | "Bot" | name
//! ```
//!
//! `#` starts a comment running to the end of the line. Whitespace (including
//! newlines) only separates tokens. `T`, `Top`, `Bot`, `exists` and `forall`
//! are reserved. Each section header may appear at most once.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::kb::{Assertion, Concept, Inclusion, KnowledgeBase, Query, Signature};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lex,
    Syntax,
    TypRestriction,
    DuplicateSection,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Le,
    Tilde,
    Amp,
    Bar,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Tilde => f.write_str("`~`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

const RESERVED: [&str; 5] = ["T", "Top", "Bot", "exists", "forall"];
const SECTIONS: [&str; 5] = ["tbox", "abox", "concepts", "roles", "individuals"];

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);
    while let Some(&ch) = chars.peek() {
        let (tl, tc) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let ch = chars.next();
            if ch == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            ch
        };
        let tok = match ch {
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
                continue;
            }
            c if c.is_whitespace() => {
                bump(&mut chars);
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            ':' => Tok::Colon,
            '~' => Tok::Tilde,
            '&' => Tok::Amp,
            '|' => Tok::Bar,
            '<' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    out.push(Spanned { tok: Tok::Le, line: tl, column: tc });
                    continue;
                }
                return Err(ParseError {
                    line: tl,
                    column: tc,
                    message: "expected `<=`".into(),
                    kind: ParseErrorKind::Lex,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        name.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                out.push(Spanned { tok: Tok::Ident(name), line: tl, column: tc });
                continue;
            }
            other => {
                return Err(ParseError {
                    line: tl,
                    column: tc,
                    message: format!("unexpected character `{other}`"),
                    kind: ParseErrorKind::Lex,
                })
            }
        };
        bump(&mut chars);
        out.push(Spanned { tok, line: tl, column: tc });
    }
    out.push(Spanned { tok: Tok::Eof, line, column });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(text)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError { line: t.line, column: t.column, message: message.into(), kind }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.error_here(ParseErrorKind::Syntax, format!("expected {wanted}, found {}", self.peek()))
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn name(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.next();
                Ok(s)
            }
            Tok::Ident(s) => Err(self.error_here(
                ParseErrorKind::Syntax,
                format!("`{s}` is reserved and cannot be used as {what}"),
            )),
            _ => Err(self.unexpected(what)),
        }
    }

    fn at_section_header(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Colon
    }

    fn at_typ(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == "T") && *self.peek_at(1) == Tok::LParen
    }

    fn concept(&mut self) -> Result<Concept, ParseError> {
        let mut left = self.conj()?;
        while *self.peek() == Tok::Bar {
            self.next();
            let right = self.conj()?;
            left = Concept::or(left, right);
        }
        Ok(left)
    }

    fn conj(&mut self) -> Result<Concept, ParseError> {
        let mut left = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.next();
            let right = self.unary()?;
            left = Concept::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Concept, ParseError> {
        if self.at_typ() {
            return Err(self.error_here(
                ParseErrorKind::TypRestriction,
                "`T(...)` may only appear outermost on an inclusion's left-hand side or an asserted concept",
            ));
        }
        match self.peek().clone() {
            Tok::Tilde => {
                self.next();
                Ok(Concept::not(self.unary()?))
            }
            Tok::LParen => {
                self.next();
                let c = self.concept()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(c)
            }
            Tok::Ident(s) if s == "exists" || s == "forall" => {
                self.next();
                let role = self.name("a role name")?;
                self.expect(Tok::Dot, "`.` after the role name")?;
                let body = self.concept()?;
                Ok(if s == "exists" {
                    Concept::exists(role, body)
                } else {
                    Concept::forall(role, body)
                })
            }
            Tok::Ident(s) if s == "Top" => {
                self.next();
                Ok(Concept::Top)
            }
            Tok::Ident(s) if s == "Bot" => {
                self.next();
                Ok(Concept::Bottom)
            }
            Tok::Ident(_) => Ok(Concept::Atom(self.name("a concept name")?)),
            _ => Err(self.unexpected("a concept")),
        }
    }

    /// A concept that may carry one outermost typicality operator.
    fn lhs(&mut self) -> Result<Concept, ParseError> {
        if !self.at_typ() {
            return self.concept();
        }
        let start = self.pos;
        self.next();
        self.next();
        let inner = self.concept()?;
        self.expect(Tok::RParen, "`)` closing `T(`")?;
        if matches!(self.peek(), Tok::Amp | Tok::Bar) {
            let t = &self.toks[start];
            return Err(ParseError {
                line: t.line,
                column: t.column,
                message: "`T(...)` cannot be combined with other concepts".into(),
                kind: ParseErrorKind::TypRestriction,
            });
        }
        Ok(Concept::typ(inner))
    }

    fn inclusion_rest(&mut self, lhs: Concept) -> Result<Inclusion, ParseError> {
        self.expect(Tok::Le, "`<=`")?;
        let rhs = self.concept()?;
        // Both sides were checked while parsing, so construction cannot fail.
        Ok(Inclusion::new(lhs, rhs).expect("typicality placement checked by the parser"))
    }

    fn assertion(&mut self) -> Result<Assertion, ParseError> {
        let lhs = self.lhs()?;
        self.expect(Tok::LParen, "`(` before an individual name")?;
        let first = self.name("an individual name")?;
        if *self.peek() == Tok::Comma {
            self.next();
            let second = self.name("an individual name")?;
            self.expect(Tok::RParen, "`)`")?;
            return match lhs {
                Concept::Atom(role) => Ok(Assertion::role(role, first, second)),
                _ => Err(self.error_here(
                    ParseErrorKind::Syntax,
                    "a role assertion needs a plain role name",
                )),
            };
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(Assertion::concept(lhs, first).expect("typicality placement checked by the parser"))
    }

    fn names_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut out = Vec::new();
        while !self.at_section_header() && *self.peek() != Tok::Eof {
            if *self.peek() == Tok::Comma {
                self.next();
                continue;
            }
            out.push(self.name("a name")?);
        }
        Ok(out)
    }

    fn kb(&mut self) -> Result<KnowledgeBase, ParseError> {
        let mut seen = BTreeSet::new();
        let mut tbox = Vec::new();
        let mut abox = Vec::new();
        let mut declared = Signature::default();
        while *self.peek() != Tok::Eof {
            if !self.at_section_header() {
                return Err(self.unexpected("a section header such as `tbox:` or `abox:`"));
            }
            let header = match self.peek().clone() {
                Tok::Ident(s) => s,
                _ => unreachable!(),
            };
            if !SECTIONS.contains(&header.as_str()) {
                return Err(self.error_here(
                    ParseErrorKind::Syntax,
                    format!("unknown section `{header}`"),
                ));
            }
            if !seen.insert(header.clone()) {
                return Err(self.error_here(
                    ParseErrorKind::DuplicateSection,
                    format!("section `{header}` appears more than once"),
                ));
            }
            self.next();
            self.next();
            match header.as_str() {
                "tbox" => {
                    while !self.at_section_header() && *self.peek() != Tok::Eof {
                        let lhs = self.lhs()?;
                        tbox.push(self.inclusion_rest(lhs)?);
                    }
                }
                "abox" => {
                    while !self.at_section_header() && *self.peek() != Tok::Eof {
                        abox.push(self.assertion()?);
                    }
                }
                "concepts" => declared.atoms.extend(self.names_list()?),
                "roles" => declared.roles.extend(self.names_list()?),
                "individuals" => declared.individuals.extend(self.names_list()?),
                _ => unreachable!(),
            }
        }
        Ok(KnowledgeBase::with_declared(tbox, abox, declared))
    }

    fn query(&mut self) -> Result<Query, ParseError> {
        let lhs = self.lhs()?;
        let q = match self.peek() {
            Tok::Le => Query::Inclusion(self.inclusion_rest(lhs)?),
            Tok::LParen => {
                self.next();
                let individual = self.name("an individual name")?;
                self.expect(Tok::RParen, "`)`")?;
                Query::assertion(lhs, individual).expect("typicality placement checked by the parser")
            }
            _ => return Err(self.unexpected("`<=` or `(individual)`")),
        };
        if *self.peek() != Tok::Eof {
            return Err(self.unexpected("end of query"));
        }
        Ok(q)
    }
}

pub fn parse_kb(text: &str) -> Result<KnowledgeBase, ParseError> {
    Parser::new(text)?.kb()
}

pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    Parser::new(text)?.query()
}

/// Parses a single concept (typicality allowed outermost).
pub fn parse_concept(text: &str) -> Result<Concept, ParseError> {
    let mut p = Parser::new(text)?;
    let c = p.lhs()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of concept"));
    }
    Ok(c)
}

pub fn serialize_kb(k: &KnowledgeBase) -> String {
    let mut out = String::new();
    let extra = k.declared_only();
    for (header, names) in [
        ("concepts", &extra.atoms),
        ("roles", &extra.roles),
        ("individuals", &extra.individuals),
    ] {
        if !names.is_empty() {
            let list: Vec<&str> = names.iter().map(String::as_str).collect();
            out.push_str(&format!("{header}: {}\n", list.join(", ")));
        }
    }
    out.push_str("tbox:\n");
    for inc in k.tbox() {
        out.push_str(&format!("  {inc}\n"));
    }
    out.push_str("abox:\n");
    for a in k.abox() {
        out.push_str(&format!("  {a}\n"));
    }
    out
}

// Printing: binding strength 1 = `|`, 2 = `&`, 3 = unary. Quantifier bodies
// extend to the right as far as possible, so a quantifier needs parentheses
// whenever something could follow it.
fn write_concept(
    f: &mut fmt::Formatter<'_>,
    c: &Concept,
    min_level: u8,
    right_open: bool,
) -> fmt::Result {
    let level = match c {
        Concept::Or(..) => 1,
        Concept::And(..) => 2,
        _ => 3,
    };
    let quantifier = matches!(c, Concept::Exists(..) | Concept::Forall(..))
        || matches!(c, Concept::Not(_) if ends_with_quantifier(c));
    if level < min_level || (quantifier && !right_open) {
        f.write_str("(")?;
        write_concept(f, c, 0, true)?;
        return f.write_str(")");
    }
    match c {
        Concept::Atom(a) => f.write_str(a),
        Concept::Top => f.write_str("Top"),
        Concept::Bottom => f.write_str("Bot"),
        Concept::Not(inner) => {
            f.write_str("~")?;
            write_concept(f, inner, 3, right_open)
        }
        Concept::And(a, b) => {
            write_concept(f, a, 2, false)?;
            f.write_str(" & ")?;
            write_concept(f, b, 3, right_open)
        }
        Concept::Or(a, b) => {
            write_concept(f, a, 1, false)?;
            f.write_str(" | ")?;
            write_concept(f, b, 2, right_open)
        }
        Concept::Exists(r, body) => {
            write!(f, "exists {r}. ")?;
            write_concept(f, body, 0, right_open)
        }
        Concept::Forall(r, body) => {
            write!(f, "forall {r}. ")?;
            write_concept(f, body, 0, right_open)
        }
        Concept::Typ(inner) => {
            f.write_str("T(")?;
            write_concept(f, inner, 0, true)?;
            f.write_str(")")
        }
    }
}

fn ends_with_quantifier(c: &Concept) -> bool {
    match c {
        Concept::Exists(..) | Concept::Forall(..) => true,
        Concept::Not(inner) => ends_with_quantifier(inner),
        _ => false,
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_concept(f, self, 0, true)
    }
}

impl fmt::Display for Inclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <= {}", self.lhs(), self.rhs())
    }
}

fn write_applied(f: &mut fmt::Formatter<'_>, c: &Concept, individual: &str) -> fmt::Result {
    match c {
        Concept::Atom(_) | Concept::Top | Concept::Bottom | Concept::Typ(_) => {
            write!(f, "{c}({individual})")
        }
        Concept::Not(inner) if matches!(**inner, Concept::Atom(_)) => {
            write!(f, "{c}({individual})")
        }
        _ => write!(f, "({c})({individual})"),
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assertion::Concept { concept, individual } => write_applied(f, concept, individual),
            Assertion::Role { role, subject, object } => write!(f, "{role}({subject}, {object})"),
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Inclusion(inc) => write!(f, "{inc}"),
            Query::Assertion { concept, individual } => write_applied(f, concept, individual),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> Concept {
        Concept::atom(n)
    }

    #[test]
    fn parses_penguin_tbox() {
        let kb = parse_kb("tbox: Penguin <= Bird\n T(Bird) <= Fly\n T(Penguin) <= ~Fly").unwrap();
        assert_eq!(
            kb.tbox(),
            &[
                Inclusion::strict(a("Penguin"), a("Bird")).unwrap(),
                Inclusion::defeasible(a("Bird"), a("Fly")).unwrap(),
                Inclusion::defeasible(a("Penguin"), Concept::not(a("Fly"))).unwrap(),
            ]
        );
        assert!(kb.abox().is_empty());
    }

    #[test]
    fn parses_empty_sections() {
        let kb = parse_kb("tbox:\nabox:").unwrap();
        assert_eq!(kb, KnowledgeBase::default());
        assert_eq!(serialize_kb(&kb), "tbox:\nabox:\n");
    }

    #[test]
    fn nested_typicality_is_rejected_with_location() {
        let err = parse_kb("tbox: T(T(A)) <= B").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::TypRestriction);
        assert_eq!((err.line, err.column), (1, 9));
        let err = parse_kb("tbox:\n  A <= T(B)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::TypRestriction);
        assert_eq!(err.line, 2);
        let err = parse_kb("tbox: T(A) & B <= C").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::TypRestriction);
        let err = parse_kb("abox: ~T(A)(a)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::TypRestriction);
    }

    #[test]
    fn duplicate_and_unknown_sections() {
        let err = parse_kb("tbox:\nabox:\ntbox:").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateSection);
        assert_eq!(err.line, 3);
        assert_eq!(parse_kb("boxes:").unwrap_err().kind, ParseErrorKind::Syntax);
        assert_eq!(parse_kb("A <= B").unwrap_err().kind, ParseErrorKind::Syntax);
    }

    #[test]
    fn lex_errors() {
        let err = parse_kb("tbox: A < B").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Lex);
        assert_eq!((err.line, err.column), (1, 9));
        assert_eq!(parse_kb("tbox: A <= $").unwrap_err().kind, ParseErrorKind::Lex);
    }

    #[test]
    fn queries() {
        let q = parse_query("T(Penguin & Black) <= ~Fly").unwrap();
        assert_eq!(
            q,
            Query::Inclusion(
                Inclusion::defeasible(
                    Concept::and(a("Penguin"), a("Black")),
                    Concept::not(a("Fly"))
                )
                .unwrap()
            )
        );
        let q = parse_query("~Fly(i)").unwrap();
        assert_eq!(q, Query::assertion(Concept::not(a("Fly")), "i").unwrap());
        let q = parse_query("(A | C)(joe)").unwrap();
        assert_eq!(q, Query::assertion(Concept::or(a("A"), a("C")), "joe").unwrap());
        let err = parse_query("").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Syntax);
        assert_eq!((err.line, err.column), (1, 1));
        assert!(parse_query("A(a) B").is_err());
    }

    #[test]
    fn precedence_and_quantifier_scope() {
        assert_eq!(
            parse_concept("~A & B | C").unwrap(),
            Concept::or(Concept::and(Concept::not(a("A")), a("B")), a("C"))
        );
        assert_eq!(
            parse_concept("A & exists r. B | C").unwrap(),
            Concept::and(a("A"), Concept::exists("r", Concept::or(a("B"), a("C"))))
        );
        assert_eq!(
            parse_concept("(forall r. B) & C").unwrap(),
            Concept::and(Concept::forall("r", a("B")), a("C"))
        );
    }

    #[test]
    fn abox_assertions_and_comments() {
        let kb = parse_kb(
            "# courses\ntbox:\n  T(CS) <= forall taught. A\nabox:\n  CS(c1) # first\n  taught(c1, joe)\n  T(B)(c2)\n",
        )
        .unwrap();
        assert_eq!(
            kb.abox(),
            &[
                Assertion::concept(a("CS"), "c1").unwrap(),
                Assertion::role("taught", "c1", "joe"),
                Assertion::concept(Concept::typ(a("B")), "c2").unwrap(),
            ]
        );
        assert!(parse_kb("abox: (A | B)(a, b)").is_err());
    }

    #[test]
    fn declarations_round_trip() {
        let kb = parse_kb("concepts: Black, Extra\nroles: r\ntbox:\n  Black <= Top\nabox:\n").unwrap();
        assert!(kb.signature().atoms.contains("Extra"));
        assert!(kb.signature().roles.contains("r"));
        let text = serialize_kb(&kb);
        assert_eq!(parse_kb(&text).unwrap(), kb);
        assert!(text.starts_with("concepts: Extra\nroles: r\n"));
    }

    #[test]
    fn printing_keeps_structure() {
        let cases = [
            Concept::and(Concept::exists("r", a("A")), a("B")),
            Concept::and(a("B"), Concept::exists("r", a("A"))),
            Concept::or(Concept::and(a("B"), Concept::forall("r", a("A"))), a("C")),
            Concept::not(Concept::or(a("A"), a("B"))),
            Concept::not(Concept::exists("r", Concept::and(a("A"), a("B")))),
            Concept::and(Concept::not(Concept::exists("r", a("A"))), a("B")),
            Concept::and(a("A"), Concept::and(a("B"), a("C"))),
            Concept::or(a("A"), Concept::or(a("B"), a("C"))),
        ];
        for c in cases {
            let text = c.to_string();
            assert_eq!(parse_concept(&text).unwrap(), c, "{text}");
        }
    }
}
