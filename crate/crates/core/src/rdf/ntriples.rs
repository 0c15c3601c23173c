//! Line-oriented N-Triples reader and canonical writer.

use std::io::{self, BufRead, Write};

use super::{Graph, RdfError, Term, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Abort on the first malformed line.
    #[default]
    Strict,
    /// Skip malformed lines and count them.
    Lenient,
}

#[derive(Debug, Clone, Default)]
pub struct Parsed {
    pub graph: Graph,
    /// Malformed lines skipped in lenient mode.
    pub skipped: Vec<RdfError>,
}

pub fn parse_ntriples(text: &str, mode: ParseMode) -> Result<Parsed, RdfError> {
    parse_lines(
        text.lines().map(|l| Ok::<_, io::Error>(l.to_string())),
        mode,
    )
}

pub fn parse_ntriples_reader<R: BufRead>(reader: R, mode: ParseMode) -> Result<Parsed, RdfError> {
    parse_lines(reader.lines(), mode)
}

fn parse_lines<I>(lines: I, mode: ParseMode) -> Result<Parsed, RdfError>
where
    I: Iterator<Item = io::Result<String>>,
{
    let mut out = Parsed::default();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| RdfError::MalformedLine {
            line: line_no,
            reason: e.to_string(),
        })?;
        match parse_line(&line) {
            Ok(Some(t)) => {
                out.graph.insert(t);
            }
            Ok(None) => {}
            Err(reason) => {
                let err = RdfError::MalformedLine {
                    line: line_no,
                    reason,
                };
                match mode {
                    ParseMode::Strict => return Err(err),
                    ParseMode::Lenient => out.skipped.push(err),
                }
            }
        }
    }
    Ok(out)
}

fn parse_line(line: &str) -> Result<Option<Triple>, String> {
    let mut cur = Cursor::new(line);
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let subject = cur.term()?;
    cur.skip_ws();
    let property = cur.term()?;
    cur.skip_ws();
    let object = cur.term()?;
    cur.skip_ws();
    if cur.peek() != Some('.') {
        return Err("missing terminating '.'".into());
    }
    cur.bump();
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return Err(format!(
            "unexpected trailing content at column {}",
            cur.pos + 1
        ));
    }
    Triple::new(subject, property, object)
        .map(Some)
        .map_err(|e| e.to_string())
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r')) {
            self.bump();
        }
    }

    fn term(&mut self) -> Result<Term, String> {
        match self.peek() {
            Some('<') => self
                .iri()
                .and_then(|s| Term::try_iri(&s).map_err(|e| e.to_string())),
            Some('_') => self.blank(),
            Some('"') => self.literal(),
            Some(c) => Err(format!(
                "unexpected character {c:?} at column {}",
                self.pos + 1
            )),
            None => Err("unexpected end of line".into()),
        }
    }

    fn iri(&mut self) -> Result<String, String> {
        let start = self.pos;
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                Some('>') => return Ok(out),
                Some('\\') => out.push(self.unicode_escape()?),
                Some(c) if c.is_whitespace() || c == '<' || c == '"' => {
                    return Err(format!("bad IRI bracket starting at column {}", start + 1));
                }
                Some(c) => out.push(c),
                None => return Err(format!("unterminated IRI starting at column {}", start + 1)),
            }
        }
    }

    fn blank(&mut self) -> Result<Term, String> {
        if !self.rest().starts_with("_:") {
            return Err(format!("bad blank node at column {}", self.pos + 1));
        }
        self.pos += 2;
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
        {
            self.bump();
        }
        // A label may not end with '.'; give it back to the terminator.
        while self.src[start..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        Term::try_blank(&self.src[start..self.pos]).map_err(|e| e.to_string())
    }

    fn literal(&mut self) -> Result<Term, String> {
        let start = self.pos;
        self.bump();
        let mut lexical = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => match self.peek() {
                    Some('u' | 'U') => lexical.push(self.unicode_escape()?),
                    Some(c) => {
                        self.bump();
                        lexical.push(match c {
                            't' => '\t',
                            'b' => '\u{8}',
                            'n' => '\n',
                            'r' => '\r',
                            'f' => '\u{c}',
                            '"' => '"',
                            '\'' => '\'',
                            '\\' => '\\',
                            other => return Err(format!("bad escape \\{other}")),
                        });
                    }
                    None => return Err("unterminated literal".into()),
                },
                Some(c) => lexical.push(c),
                None => {
                    return Err(format!(
                        "unterminated literal starting at column {}",
                        start + 1
                    ))
                }
            }
        }
        if self.peek() == Some('@') {
            self.bump();
            let s = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                self.bump();
            }
            if s == self.pos {
                return Err("empty language tag".into());
            }
            return Ok(Term::lang_literal(&lexical, &self.src[s..self.pos]));
        }
        if self.rest().starts_with("^^") {
            self.pos += 2;
            if self.peek() != Some('<') {
                return Err("datatype must be an IRI".into());
            }
            let dt = self.iri()?;
            return Ok(Term::typed_literal(&lexical, &dt));
        }
        Ok(Term::literal(&lexical))
    }

    /// Called after a backslash in an IRI or literal; expects `uXXXX` or `UXXXXXXXX`.
    fn unicode_escape(&mut self) -> Result<char, String> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err("bad escape sequence".into()),
        };
        let rest = self.rest();
        if rest.len() < width || !rest.is_char_boundary(width) {
            return Err("truncated unicode escape".into());
        }
        let hex = &rest[..width];
        let code = u32::from_str_radix(hex, 16).map_err(|_| format!("bad hex {hex:?}"))?;
        self.pos += width;
        char::from_u32(code).ok_or_else(|| format!("invalid code point {code:#x}"))
    }
}

/// One triple per line, sorted by subject, property and object lexical forms.
pub fn serialize_ntriples(graph: &Graph) -> String {
    let mut out = String::new();
    for t in graph.sorted_lexical() {
        out.push_str(&t.to_string());
        out.push('\n');
    }
    out
}

pub fn write_ntriples<W: Write>(graph: &Graph, mut w: W) -> io::Result<()> {
    for t in graph.sorted_lexical() {
        writeln!(w, "{t}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TAXON: &str = "http://purl.uniprot.org/taxonomy/";
    const SUBCLASS: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";

    fn strict(text: &str) -> Result<Graph, RdfError> {
        parse_ntriples(text, ParseMode::Strict).map(|p| p.graph)
    }

    #[test]
    fn single_subclass_triple() {
        let text = format!("<{TAXON}9606> <{SUBCLASS}> <{TAXON}40674> .\n");
        let g = strict(&text).unwrap();
        assert_eq!(g.len(), 1);
        let t = g.iter().next().unwrap();
        assert_eq!(t.subject, Term::iri(&format!("{TAXON}9606")));
        assert_eq!(t.object, Term::iri(&format!("{TAXON}40674")));
    }

    #[test]
    fn empty_input_and_comments() {
        assert!(strict("").unwrap().is_empty());
        assert!(strict("# comment\n\n   \n").unwrap().is_empty());
    }

    #[test]
    fn duplicate_lines_collapse() {
        let line = "<http://ex.org/a> <http://ex.org/p> \"v\" .\n";
        assert_eq!(strict(&line.repeat(2)).unwrap().len(), 1);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let text = "<http://ex.org/a> <http://ex.org/p> <http://ex.org/b> .\n<http://ex.org/a> <http://ex.org/p> <http://ex.org/b>\n";
        match strict(text) {
            Err(RdfError::MalformedLine { line, reason }) => {
                assert_eq!(line, 2);
                assert!(reason.contains("'.'"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            strict("<http://ex.org/a <http://ex.org/p> \"x\" ."),
            Err(RdfError::MalformedLine { line: 1, .. })
        ));
        assert!(matches!(
            strict("<http://ex.org/a> <http://ex.org/p> \"x ."),
            Err(RdfError::MalformedLine { line: 1, .. })
        ));
        assert!(strict("\"lit\" <http://ex.org/p> <http://ex.org/b> .").is_err());
    }

    #[test]
    fn lenient_mode_skips_and_counts() {
        let text = "bad line\n<http://ex.org/a> <http://ex.org/p> \"x\" .\n<x> <y>\n";
        let parsed = parse_ntriples(text, ParseMode::Lenient).unwrap();
        assert_eq!(parsed.graph.len(), 1);
        assert_eq!(parsed.skipped.len(), 2);
    }

    #[test]
    fn literal_forms() {
        let g = strict(concat!(
            "<http://ex.org/a> <http://ex.org/p> \"Ostrich\"@en .\n",
            "<http://ex.org/a> <http://ex.org/p> \"5\"^^<http://www.w3.org/2001/XMLSchema#int> .\n",
            "_:b1 <http://ex.org/p> \"tab\\there \\u00e9\" . # trailing comment\n",
        ))
        .unwrap();
        assert_eq!(g.len(), 3);
        assert!(g.contains(&Triple::from_parts(
            Term::blank("b1"),
            Term::iri("http://ex.org/p"),
            Term::literal("tab\there é"),
        )));
    }

    #[test]
    fn serialize_literal_in_quotes() {
        let g: Graph = [Triple::from_parts(
            Term::iri(&format!("{TAXON}8801")),
            Term::iri("http://purl.uniprot.org/core/commonName"),
            Term::literal("Ostrich"),
        )]
        .into_iter()
        .collect();
        let text = serialize_ntriples(&g);
        assert_eq!(text.lines().count(), 1);
        assert!(text.contains("\"Ostrich\""));
        assert_eq!(serialize_ntriples(&Graph::new()), "");
    }

    #[test]
    fn serialization_is_sorted_lexically() {
        let text = "<http://ex.org/b> <http://ex.org/p> \"1\" .\n<http://ex.org/a> <http://ex.org/p> \"2\" .\n";
        let out = serialize_ntriples(&strict(text).unwrap());
        assert!(out.starts_with("<http://ex.org/a>"));
    }

    fn arb_term(subject: bool) -> impl Strategy<Value = Term> {
        let iri = "[a-z]{1,6}".prop_map(|s| Term::iri(&format!("http://ex.org/{s}")));
        let blank = "[a-z][a-z0-9]{0,4}".prop_map(|s| Term::blank(&s));
        if subject {
            prop_oneof![iri, blank].boxed()
        } else {
            let lit = "[ -~éü\\n\\t]{0,8}".prop_map(|s| Term::literal(&s));
            let lang = ("[a-z]{0,5}", "[a-z]{2}").prop_map(|(s, l)| Term::lang_literal(&s, &l));
            prop_oneof![iri, blank, lit, lang].boxed()
        }
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        prop::collection::vec((arb_term(true), "[a-z]{1,4}", arb_term(false)), 0..30).prop_map(
            |ts| {
                ts.into_iter()
                    .map(|(s, p, o)| {
                        Triple::from_parts(s, Term::iri(&format!("http://ex.org/{p}")), o)
                    })
                    .collect()
            },
        )
    }

    proptest! {
        #[test]
        fn parse_serialize_round_trip(g in arb_graph()) {
            let text = serialize_ntriples(&g);
            let back = strict(&text).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert!(back.len() <= text.lines().count());
        }
    }
}
