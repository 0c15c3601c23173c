use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use once_cell::sync::Lazy;
use parking_lot::RwLock;
use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TermKind {
    Iri,
    Literal,
    Blank,
}

/// The resolved content of a [`Term`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TermData {
    Iri(String),
    Blank(String),
    Literal {
        lexical: String,
        datatype: Option<String>,
        lang: Option<String>,
    },
}

impl TermData {
    pub fn kind(&self) -> TermKind {
        match self {
            TermData::Iri(_) => TermKind::Iri,
            TermData::Blank(_) => TermKind::Blank,
            TermData::Literal { .. } => TermKind::Literal,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("IRI must not be empty")]
    EmptyIri,
    #[error("IRI contains whitespace: {0:?}")]
    WhitespaceInIri(String),
    #[error("blank node label must not be empty")]
    EmptyBlank,
}

#[derive(Default)]
struct Interner {
    terms: Vec<Arc<TermData>>,
    ids: HashMap<Arc<TermData>, u32>,
}

static INTERNER: Lazy<RwLock<Interner>> = Lazy::new(|| RwLock::new(Interner::default()));

/// An interned RDF term.
///
/// Terms are small integer handles into a process-wide side table, so copies,
/// equality and hashing never touch the lexical form. Equality of handles is
/// equality of kind and every lexical component. `Ord` follows interning order,
/// which is deterministic for a deterministic sequence of inputs; use
/// [`Term::cmp_lexical`] where an input-independent order is needed.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term(u32);

impl Term {
    pub fn intern(data: TermData) -> Term {
        if let Some(&id) = INTERNER.read().ids.get(&data) {
            return Term(id);
        }
        let mut table = INTERNER.write();
        if let Some(&id) = table.ids.get(&data) {
            return Term(id);
        }
        let id = u32::try_from(table.terms.len()).expect("term table overflow");
        let data = Arc::new(data);
        table.terms.push(data.clone());
        table.ids.insert(data, id);
        Term(id)
    }

    pub fn try_iri(iri: &str) -> Result<Term, TermError> {
        if iri.is_empty() {
            return Err(TermError::EmptyIri);
        }
        if iri.chars().any(char::is_whitespace) {
            return Err(TermError::WhitespaceInIri(iri.to_string()));
        }
        Ok(Term::intern(TermData::Iri(iri.to_string())))
    }

    /// Panics on an invalid IRI; meant for constants.
    pub fn iri(iri: &str) -> Term {
        Term::try_iri(iri).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn try_blank(label: &str) -> Result<Term, TermError> {
        if label.is_empty() {
            return Err(TermError::EmptyBlank);
        }
        Ok(Term::intern(TermData::Blank(label.to_string())))
    }

    pub fn blank(label: &str) -> Term {
        Term::try_blank(label).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn literal(lexical: &str) -> Term {
        Term::intern(TermData::Literal {
            lexical: lexical.to_string(),
            datatype: None,
            lang: None,
        })
    }

    pub fn typed_literal(lexical: &str, datatype: &str) -> Term {
        Term::intern(TermData::Literal {
            lexical: lexical.to_string(),
            datatype: Some(datatype.to_string()),
            lang: None,
        })
    }

    pub fn lang_literal(lexical: &str, lang: &str) -> Term {
        Term::intern(TermData::Literal {
            lexical: lexical.to_string(),
            datatype: None,
            lang: Some(lang.to_string()),
        })
    }

    pub fn data(self) -> Arc<TermData> {
        INTERNER.read().terms[self.0 as usize].clone()
    }

    pub fn kind(self) -> TermKind {
        self.data().kind()
    }

    pub fn is_iri(self) -> bool {
        self.kind() == TermKind::Iri
    }

    pub fn is_literal(self) -> bool {
        self.kind() == TermKind::Literal
    }

    /// The IRI string, blank label, or literal lexical form.
    pub fn lexical(self) -> String {
        match &*self.data() {
            TermData::Iri(s) | TermData::Blank(s) => s.clone(),
            TermData::Literal { lexical, .. } => lexical.clone(),
        }
    }

    /// Order by resolved content rather than by handle.
    pub fn cmp_lexical(self, other: Term) -> std::cmp::Ordering {
        if self == other {
            return std::cmp::Ordering::Equal;
        }
        let table = INTERNER.read();
        table.terms[self.0 as usize].cmp(&table.terms[other.0 as usize])
    }

    /// Stable byte encoding of the term content, used for hashing across runs.
    pub fn write_canonical(self, out: &mut Vec<u8>) {
        let table = INTERNER.read();
        match &*table.terms[self.0 as usize] {
            TermData::Iri(s) => {
                out.push(b'I');
                out.extend_from_slice(s.as_bytes());
            }
            TermData::Blank(s) => {
                out.push(b'B');
                out.extend_from_slice(s.as_bytes());
            }
            TermData::Literal {
                lexical,
                datatype,
                lang,
            } => {
                out.push(b'L');
                out.extend_from_slice(lexical.as_bytes());
                if let Some(dt) = datatype {
                    out.extend_from_slice(b"^^");
                    out.extend_from_slice(dt.as_bytes());
                }
                if let Some(lang) = lang {
                    out.push(b'@');
                    out.extend_from_slice(lang.as_bytes());
                }
            }
        }
        out.push(0);
    }
}

impl fmt::Display for Term {
    /// N-Triples syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.data() {
            TermData::Iri(s) => write!(f, "<{s}>"),
            TermData::Blank(s) => write!(f, "_:{s}"),
            TermData::Literal {
                lexical,
                datatype,
                lang,
            } => {
                f.write_str("\"")?;
                for c in lexical.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")?;
                if let Some(lang) = lang {
                    write!(f, "@{lang}")?;
                } else if let Some(dt) = datatype {
                    write!(f, "^^<{dt}>")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.data().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        TermData::deserialize(deserializer).map(Term::intern)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_content_interns_to_same_handle() {
        assert_eq!(Term::iri("http://ex.org/a"), Term::iri("http://ex.org/a"));
        assert_ne!(
            Term::iri("http://ex.org/a"),
            Term::literal("http://ex.org/a")
        );
        assert_ne!(Term::literal("x"), Term::lang_literal("x", "en"));
        assert_ne!(
            Term::typed_literal("1", "http://www.w3.org/2001/XMLSchema#integer"),
            Term::literal("1")
        );
    }

    #[test]
    fn iri_validation() {
        assert_eq!(Term::try_iri(""), Err(TermError::EmptyIri));
        assert!(matches!(
            Term::try_iri("http://ex.org/a b"),
            Err(TermError::WhitespaceInIri(_))
        ));
    }

    #[test]
    fn literal_display_escapes() {
        let t = Term::literal("say \"hi\"\n");
        assert_eq!(t.to_string(), r#""say \"hi\"\n""#);
        assert_eq!(
            Term::lang_literal("Ostrich", "en").to_string(),
            "\"Ostrich\"@en"
        );
    }

    #[test]
    fn serde_round_trip() {
        let t = Term::typed_literal("5", "http://www.w3.org/2001/XMLSchema#int");
        let json = serde_json::to_string(&t).unwrap();
        let back: Term = serde_json::from_str(&json).unwrap();
        assert_eq!(t, back);
    }
}
