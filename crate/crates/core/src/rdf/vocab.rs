use once_cell::sync::Lazy;

use super::Term;

pub const RDF_TYPE_IRI: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_SUBCLASSOF_IRI: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const RDFS_SUBPROPERTYOF_IRI: &str = "http://www.w3.org/2000/01/rdf-schema#subPropertyOf";
pub const RDFS_DOMAIN_IRI: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
pub const RDFS_RANGE_IRI: &str = "http://www.w3.org/2000/01/rdf-schema#range";

/// Interned handles for the RDF/RDFS terms the reasoner understands.
#[derive(Debug, Clone, Copy)]
pub struct RdfsVocab {
    pub rdf_type: Term,
    pub sub_class_of: Term,
    pub sub_property_of: Term,
    pub domain: Term,
    pub range: Term,
}

static VOCAB: Lazy<RdfsVocab> = Lazy::new(|| RdfsVocab {
    rdf_type: Term::iri(RDF_TYPE_IRI),
    sub_class_of: Term::iri(RDFS_SUBCLASSOF_IRI),
    sub_property_of: Term::iri(RDFS_SUBPROPERTYOF_IRI),
    domain: Term::iri(RDFS_DOMAIN_IRI),
    range: Term::iri(RDFS_RANGE_IRI),
});

impl RdfsVocab {
    pub fn get() -> &'static RdfsVocab {
        &VOCAB
    }

    /// The four schema-level properties (rdf:type excluded).
    pub fn schema_properties(&self) -> [Term; 4] {
        [
            self.sub_class_of,
            self.sub_property_of,
            self.domain,
            self.range,
        ]
    }

    pub fn is_schema_property(&self, t: Term) -> bool {
        self.schema_properties().contains(&t)
    }
}

pub fn vocab() -> &'static RdfsVocab {
    RdfsVocab::get()
}
