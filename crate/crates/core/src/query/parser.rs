//! Recursive-descent parser for the supported SPARQL subset.
//!
//! ```text
//! query    := prefix* 'SELECT' 'DISTINCT'? ('*' | var+) 'WHERE'? group
//! group    := '{' (triples | group ('UNION' group)* | 'OPTIONAL' group | '.')* '}'
//! triples  := term verb objects (';' verb objects)*
//! objects  := term (',' term)*
//! ```
//!
//! Prefixed names are expanded textually; `a` abbreviates `rdf:type`.
//! UNION is distributed to the top level, so every query becomes a flat list
//! of conjunctive branches.

use std::collections::BTreeMap;

use super::{PatternTerm, QueryError, TriplePattern, Ucq, Var};
use crate::rdf::{vocab, Term};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Iri(String),
    PName(String, String),
    Var(String),
    Literal(Term),
    Word(String),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn syntax(position: usize, message: impl Into<String>) -> QueryError {
    QueryError::Syntax {
        position,
        message: message.into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>, QueryError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = src[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        let start = i;
        match c {
            '#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '<' => {
                let end = src[i + 1..]
                    .find(|ch: char| ch == '>' || ch.is_whitespace())
                    .map(|e| e + i + 1)
                    .filter(|&e| bytes[e] == b'>')
                    .ok_or_else(|| syntax(start, "unterminated IRI"))?;
                out.push(Token {
                    tok: Tok::Iri(src[i + 1..end].to_string()),
                    pos: start,
                });
                i = end + 1;
            }
            '?' | '$' => {
                i += 1;
                let s = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                if s == i {
                    return Err(syntax(start, "empty variable name"));
                }
                out.push(Token {
                    tok: Tok::Var(src[s..i].to_string()),
                    pos: start,
                });
            }
            '"' | '\'' => {
                let (term, end) = lex_literal(src, i, c)?;
                out.push(Token {
                    tok: Tok::Literal(term),
                    pos: start,
                });
                i = end;
            }
            '{' | '}' | '.' | ';' | ',' | '*' | '(' | ')' | '+' | '/' | '|' | '^' | '!' => {
                out.push(Token {
                    tok: Tok::Punct(c),
                    pos: start,
                });
                i += 1;
            }
            c if c.is_alphabetic() || c == '_' || c == ':' => {
                while i < bytes.len() {
                    let ch = src[i..].chars().next().unwrap();
                    if ch.is_alphanumeric() || matches!(ch, '_' | '-' | ':') {
                        i += ch.len_utf8();
                    } else if ch == '.'
                        && src[i + 1..]
                            .chars()
                            .next()
                            .is_some_and(|n| n.is_alphanumeric() || n == '_')
                    {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let word = &src[start..i];
                if word.starts_with("_:") {
                    return Err(QueryError::UnsupportedConstruct(
                        "blank node in query".into(),
                    ));
                }
                let tok = match word.split_once(':') {
                    Some((p, l)) => Tok::PName(p.to_string(), l.to_string()),
                    None => Tok::Word(word.to_string()),
                };
                out.push(Token { tok, pos: start });
            }
            other => return Err(syntax(start, format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

fn lex_literal(src: &str, start: usize, quote: char) -> Result<(Term, usize), QueryError> {
    let mut lexical = String::new();
    let mut it = src[start + 1..].char_indices();
    let mut end = None;
    while let Some((off, c)) = it.next() {
        match c {
            c if c == quote => {
                end = Some(start + 1 + off + 1);
                break;
            }
            '\\' => match it.next() {
                Some((_, 'n')) => lexical.push('\n'),
                Some((_, 't')) => lexical.push('\t'),
                Some((_, 'r')) => lexical.push('\r'),
                Some((_, e @ ('"' | '\'' | '\\'))) => lexical.push(e),
                _ => return Err(syntax(start + 1 + off, "bad escape in literal")),
            },
            '\n' => return Err(syntax(start, "unterminated literal")),
            c => lexical.push(c),
        }
    }
    let mut i = end.ok_or_else(|| syntax(start, "unterminated literal"))?;
    let rest = &src[i..];
    if let Some(tail) = rest.strip_prefix('@') {
        let n = tail
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
            .unwrap_or(tail.len());
        if n == 0 {
            return Err(syntax(i, "empty language tag"));
        }
        let term = Term::lang_literal(&lexical, &tail[..n]);
        i += 1 + n;
        return Ok((term, i));
    }
    if let Some(tail) = rest.strip_prefix("^^<") {
        let n = tail
            .find('>')
            .ok_or_else(|| syntax(i, "unterminated datatype IRI"))?;
        let term = Term::typed_literal(&lexical, &tail[..n]);
        i += 3 + n + 1;
        return Ok((term, i));
    }
    Ok((Term::literal(&lexical), i))
}

#[derive(Debug, Clone)]
enum Element {
    Triples(Vec<TriplePattern>),
    Union(Vec<Group>),
    Optional(Group),
}

#[derive(Debug, Clone, Default)]
struct Group {
    elements: Vec<Element>,
}

enum Projection {
    All,
    Vars(Vec<Var>),
}

struct Parser {
    toks: Vec<Token>,
    idx: usize,
    end: usize,
    prefixes: BTreeMap<String, String>,
}

const UNSUPPORTED_WORDS: &[&str] = &[
    "FILTER",
    "BIND",
    "VALUES",
    "MINUS",
    "GRAPH",
    "SERVICE",
    "CONSTRUCT",
    "DESCRIBE",
    "ASK",
    "GROUP",
    "ORDER",
    "HAVING",
    "LIMIT",
    "OFFSET",
    "FROM",
];
const AGGREGATES: &[&str] = &[
    "COUNT",
    "SUM",
    "MIN",
    "MAX",
    "AVG",
    "SAMPLE",
    "GROUP_CONCAT",
];

impl Parser {
    fn new(src: &str) -> Result<Parser, QueryError> {
        let mut prefixes = BTreeMap::new();
        prefixes.insert(
            "rdf".to_string(),
            "http://www.w3.org/1999/02/22-rdf-syntax-ns#".to_string(),
        );
        prefixes.insert(
            "rdfs".to_string(),
            "http://www.w3.org/2000/01/rdf-schema#".to_string(),
        );
        prefixes.insert(
            "xsd".to_string(),
            "http://www.w3.org/2001/XMLSchema#".to_string(),
        );
        Ok(Parser {
            toks: tokenize(src)?,
            idx: 0,
            end: src.len(),
            prefixes,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|t| t.pos).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|t| t.tok.clone());
        self.idx += 1;
        t
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x.eq_ignore_ascii_case(w))
    }

    fn is_punct(&self, c: char) -> bool {
        self.peek() == Some(&Tok::Punct(c))
    }

    fn expect_punct(&mut self, c: char) -> Result<(), QueryError> {
        if self.is_punct(c) {
            self.idx += 1;
            Ok(())
        } else {
            Err(syntax(self.pos(), format!("expected '{c}'")))
        }
    }

    fn check_unsupported_word(&self) -> Result<(), QueryError> {
        if let Some(Tok::Word(w)) = self.peek() {
            let upper = w.to_ascii_uppercase();
            if UNSUPPORTED_WORDS.contains(&upper.as_str()) {
                return Err(QueryError::UnsupportedConstruct(upper));
            }
            if AGGREGATES.contains(&upper.as_str()) {
                return Err(QueryError::UnsupportedConstruct(format!(
                    "aggregate {upper}"
                )));
            }
        }
        Ok(())
    }

    fn header(&mut self) -> Result<Projection, QueryError> {
        while self.is_word("PREFIX") {
            self.idx += 1;
            let pos = self.pos();
            let prefix = match self.next() {
                Some(Tok::PName(p, l)) if l.is_empty() => p,
                _ => return Err(syntax(pos, "expected prefix name ending in ':'")),
            };
            let pos = self.pos();
            let iri = match self.next() {
                Some(Tok::Iri(i)) => i,
                _ => return Err(syntax(pos, "expected IRI after prefix")),
            };
            self.prefixes.insert(prefix, iri);
        }
        self.check_unsupported_word()?;
        if !self.is_word("SELECT") {
            return Err(syntax(self.pos(), "expected SELECT"));
        }
        self.idx += 1;
        if self.is_word("DISTINCT") || self.is_word("REDUCED") {
            self.idx += 1;
        }
        let projection = if self.is_punct('*') {
            self.idx += 1;
            Projection::All
        } else {
            let mut vars = Vec::new();
            loop {
                match self.peek() {
                    Some(Tok::Var(v)) => {
                        vars.push(Var::new(v));
                        self.idx += 1;
                    }
                    Some(Tok::Punct('(')) => {
                        self.idx += 1;
                        self.check_unsupported_word()?;
                        return Err(QueryError::UnsupportedConstruct(
                            "expression in projection".into(),
                        ));
                    }
                    _ => break,
                }
            }
            if vars.is_empty() {
                return Err(syntax(self.pos(), "expected projection variables or '*'"));
            }
            Projection::Vars(vars)
        };
        if self.is_word("WHERE") {
            self.idx += 1;
        }
        Ok(projection)
    }

    fn group(&mut self) -> Result<Group, QueryError> {
        self.expect_punct('{')?;
        let mut group = Group::default();
        loop {
            self.check_unsupported_word()?;
            match self.peek() {
                None => return Err(syntax(self.pos(), "unterminated group")),
                Some(Tok::Punct('}')) => {
                    self.idx += 1;
                    return Ok(group);
                }
                Some(Tok::Punct('.')) => {
                    self.idx += 1;
                }
                Some(Tok::Punct('{')) => {
                    if matches!(self.toks.get(self.idx + 1).map(|t| &t.tok), Some(Tok::Word(w)) if w.eq_ignore_ascii_case("SELECT"))
                    {
                        return Err(QueryError::UnsupportedConstruct("subquery".into()));
                    }
                    let mut alts = vec![self.group()?];
                    while self.is_word("UNION") {
                        self.idx += 1;
                        alts.push(self.group()?);
                    }
                    group.elements.push(Element::Union(alts));
                }
                Some(Tok::Word(w)) if w.eq_ignore_ascii_case("UNION") => {
                    return Err(syntax(self.pos(), "UNION must follow a group"));
                }
                Some(Tok::Word(w)) if w.eq_ignore_ascii_case("OPTIONAL") => {
                    self.idx += 1;
                    group.elements.push(Element::Optional(self.group()?));
                }
                Some(_) => group.elements.push(Element::Triples(self.triples()?)),
            }
        }
    }

    fn triples(&mut self) -> Result<Vec<TriplePattern>, QueryError> {
        let mut out = Vec::new();
        let subject = self.term(false)?;
        loop {
            let property = self.verb()?;
            loop {
                let object = self.term(false)?;
                out.push(TriplePattern {
                    subject: subject.clone(),
                    property: property.clone(),
                    object,
                });
                if self.is_punct(',') {
                    self.idx += 1;
                } else {
                    break;
                }
            }
            if self.is_punct(';') {
                self.idx += 1;
                if self.is_punct('.') || self.is_punct('}') {
                    break;
                }
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn verb(&mut self) -> Result<PatternTerm, QueryError> {
        if self.is_word("a") {
            self.idx += 1;
            self.reject_path()?;
            return Ok(PatternTerm::Const(vocab::vocab().rdf_type));
        }
        if matches!(self.peek(), Some(Tok::Punct('^' | '!' | '('))) {
            return Err(QueryError::UnsupportedConstruct("property path".into()));
        }
        let t = self.term(true)?;
        if let PatternTerm::Const(c) = &t {
            if c.is_literal() {
                return Err(syntax(self.pos(), "literal in property position"));
            }
        }
        self.reject_path()?;
        Ok(t)
    }

    fn reject_path(&self) -> Result<(), QueryError> {
        if matches!(self.peek(), Some(Tok::Punct('+' | '*' | '/' | '|' | '^'))) {
            return Err(QueryError::UnsupportedConstruct("property path".into()));
        }
        Ok(())
    }

    fn term(&mut self, property: bool) -> Result<PatternTerm, QueryError> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Var(v)) => Ok(PatternTerm::Var(Var::new(&v))),
            Some(Tok::Iri(i)) => Term::try_iri(&i)
                .map(PatternTerm::Const)
                .map_err(|e| syntax(pos, e.to_string())),
            Some(Tok::PName(p, l)) => {
                let base = self
                    .prefixes
                    .get(&p)
                    .ok_or_else(|| syntax(pos, format!("undeclared prefix '{p}:'")))?;
                Term::try_iri(&format!("{base}{l}"))
                    .map(PatternTerm::Const)
                    .map_err(|e| syntax(pos, e.to_string()))
            }
            Some(Tok::Literal(t)) if !property => Ok(PatternTerm::Const(t)),
            Some(Tok::Word(w)) if w == "a" && !property => {
                Err(syntax(pos, "'a' is only allowed in property position"))
            }
            Some(Tok::Word(w)) => {
                let upper = w.to_ascii_uppercase();
                if UNSUPPORTED_WORDS.contains(&upper.as_str()) {
                    Err(QueryError::UnsupportedConstruct(upper))
                } else {
                    Err(syntax(pos, format!("unexpected word '{w}'")))
                }
            }
            Some(other) => Err(syntax(pos, format!("unexpected token {other:?}"))),
            None => Err(syntax(pos, "unexpected end of query")),
        }
    }

    fn finish(&self) -> Result<(), QueryError> {
        if self.idx < self.toks.len() {
            return Err(syntax(self.pos(), "trailing input after query"));
        }
        Ok(())
    }
}

/// Distributes unions: returns the alternatives of a group as flat pattern lists.
fn alternatives(group: &Group) -> Result<Vec<Vec<TriplePattern>>, QueryError> {
    let mut acc: Vec<Vec<TriplePattern>> = vec![Vec::new()];
    for el in &group.elements {
        let alts: Vec<Vec<TriplePattern>> = match el {
            Element::Triples(ts) => vec![ts.clone()],
            Element::Union(groups) => {
                let mut v = Vec::new();
                for g in groups {
                    v.extend(alternatives(g)?);
                }
                v
            }
            Element::Optional(_) => {
                return Err(QueryError::UnsupportedConstruct(
                    "OPTIONAL (only accepted as multi-query plan input)".into(),
                ))
            }
        };
        let mut next = Vec::with_capacity(acc.len() * alts.len());
        for a in &acc {
            for b in &alts {
                let mut joined = a.clone();
                joined.extend(b.iter().cloned());
                next.push(joined);
            }
        }
        acc = next;
    }
    Ok(acc)
}

fn projection_vars(projection: Projection, branches: &[Vec<TriplePattern>]) -> Vec<Var> {
    match projection {
        Projection::Vars(vs) => vs,
        Projection::All => {
            let mut seen = Vec::new();
            for p in branches.iter().flatten() {
                for v in p.vars() {
                    if !seen.contains(v) && !v.is_fresh() {
                        seen.push(v.clone());
                    }
                }
            }
            seen
        }
    }
}

pub fn parse_query(text: &str) -> Result<Ucq, QueryError> {
    let mut p = Parser::new(text)?;
    let projection = p.header()?;
    let group = p.group()?;
    p.finish()?;
    let mut branches = alternatives(&group)?;
    branches.retain(|b| !b.is_empty());
    if branches.is_empty() {
        return Err(syntax(0, "query has no triple patterns"));
    }
    let projection = projection_vars(projection, &branches);
    Ok(Ucq::new(projection, branches))
}

/// A root pattern with OPTIONAL residual groups, the textual form of a
/// multi-query-optimized plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptionalQuery {
    pub projection: Vec<Var>,
    pub root: Vec<TriplePattern>,
    pub optionals: Vec<Vec<TriplePattern>>,
}

pub fn parse_optional_query(text: &str) -> Result<OptionalQuery, QueryError> {
    let mut p = Parser::new(text)?;
    let projection = p.header()?;
    let group = p.group()?;
    p.finish()?;
    let mut root = Vec::new();
    let mut optionals = Vec::new();
    for el in &group.elements {
        match el {
            Element::Triples(ts) => root.extend(ts.iter().cloned()),
            Element::Optional(g) => {
                let alts = alternatives(g)?;
                if alts.len() != 1 {
                    return Err(QueryError::UnsupportedConstruct(
                        "UNION inside OPTIONAL".into(),
                    ));
                }
                optionals.push(alts.into_iter().next().unwrap());
            }
            Element::Union(_) => {
                return Err(QueryError::UnsupportedConstruct(
                    "UNION in a multi-query plan".into(),
                ))
            }
        }
    }
    if root.is_empty() {
        return Err(syntax(0, "multi-query plan needs a root pattern"));
    }
    let mut all = vec![root.clone()];
    all.extend(optionals.iter().cloned());
    let projection = projection_vars(projection, &all);
    Ok(OptionalQuery {
        projection,
        root,
        optionals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_star() {
        let q = parse_query("SELECT ?s WHERE { ?s <type> <Taxon> . ?s <commonName> ?n }").unwrap();
        assert_eq!(q.width(), 1);
        assert_eq!(q.branches[0].stars.len(), 1);
        assert_eq!(q.branches[0].stars[0].edges(), 2);
        assert_eq!(q.projection, vec![Var::new("s")]);
    }

    #[test]
    fn two_branch_union() {
        let q = parse_query(
            "PREFIX ex: <http://ex.org/>
             SELECT ?s WHERE { { ?s a ex:Taxon } UNION { ?s a ex:ObsTaxon } }",
        )
        .unwrap();
        assert_eq!(q.width(), 2);
        assert!(q.branches.iter().all(|b| b.stars.len() == 1));
    }

    #[test]
    fn union_flattening_is_associative() {
        let a = parse_query("SELECT * { {?s <p> ?o} UNION { {?s <q> ?o} UNION {?s <r> ?o} } }")
            .unwrap();
        let b =
            parse_query("SELECT * { {?s <p> ?o} UNION {?s <q> ?o} UNION {?s <r> ?o} }").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.width(), 3);
    }

    #[test]
    fn union_distributes_over_conjunction() {
        let q = parse_query("SELECT * { ?s <n> ?n . {?s <p> ?o} UNION {?s <q> ?o} }").unwrap();
        assert_eq!(q.width(), 2);
        assert!(q.branches.iter().all(|b| b.pattern_count() == 2));
    }

    #[test]
    fn predicate_object_lists() {
        let q = parse_query("SELECT * { ?s <p> ?a , ?b ; <q> \"x\"@en . }").unwrap();
        assert_eq!(q.branches[0].pattern_count(), 3);
    }

    #[test]
    fn property_paths_rejected() {
        assert_eq!(
            parse_query("SELECT ?s WHERE { ?s <p>+ ?o }"),
            Err(QueryError::UnsupportedConstruct("property path".into()))
        );
        assert!(matches!(
            parse_query("SELECT ?s WHERE { ?s <p>/<q> ?o }"),
            Err(QueryError::UnsupportedConstruct(_))
        ));
    }

    #[test]
    fn filter_and_aggregates_rejected() {
        assert_eq!(
            parse_query("SELECT ?s WHERE { ?s <p> ?o FILTER(?o) }"),
            Err(QueryError::UnsupportedConstruct("FILTER".into()))
        );
        assert!(matches!(
            parse_query("SELECT (COUNT(?s) AS ?c) WHERE { ?s <p> ?o }"),
            Err(QueryError::UnsupportedConstruct(_))
        ));
        assert!(matches!(
            parse_query("SELECT ?s WHERE { ?s <p> ?o OPTIONAL { ?s <q> ?r } }"),
            Err(QueryError::UnsupportedConstruct(_))
        ));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_query("SELECT ?s WHERE { ?s <p> }") {
            Err(QueryError::Syntax { position, .. }) => assert_eq!(position, 25),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_query("SELECT ?s { ?s ex:p ?o }"),
            Err(QueryError::Syntax { .. })
        ));
    }

    #[test]
    fn optional_query_form() {
        let q = parse_optional_query(
            "SELECT ?s ?n { ?s <name> ?n OPTIONAL { ?s a <A> } OPTIONAL { ?s a <B> } }",
        )
        .unwrap();
        assert_eq!(q.root.len(), 1);
        assert_eq!(q.optionals.len(), 2);
    }
}
