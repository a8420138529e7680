//! Built-in problem documents with their expected results.

use crate::document::{DocumentError, Problem, ProblemDocument};

const SOURCES: &[(&str, &str)] = &[
    ("identity-family", include_str!("../gallery/identity-family.json")),
    ("scalar-winding", include_str!("../gallery/scalar-winding.json")),
    ("su2-generator", include_str!("../gallery/su2-generator.json")),
    ("su2-clutch", include_str!("../gallery/su2-clutch.json")),
    ("laplacian-family", include_str!("../gallery/laplacian-family.json")),
    ("unipotent-family", include_str!("../gallery/unipotent-family.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|(n, _)| *n)
}

/// Parsed documents in gallery order.
pub fn gallery() -> Vec<ProblemDocument> {
    SOURCES
        .iter()
        .map(|(name, src)| ProblemDocument::from_json(src).unwrap_or_else(|e| panic!("gallery entry {name}: {e}")))
        .collect()
}

pub fn document(name: &str) -> Option<ProblemDocument> {
    SOURCES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| ProblemDocument::from_json(src).expect("gallery entries parse"))
}

/// A gallery entry, built.
pub fn problem(name: &str) -> Result<Problem, DocumentError> {
    document(name)
        .ok_or_else(|| DocumentError::Schema { path: ".".into(), message: format!("no gallery entry named `{name}`") })?
        .build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_builds_and_carries_expectations() {
        let docs = gallery();
        assert!(docs.len() >= 5);
        for (doc, name) in docs.into_iter().zip(names()) {
            assert_eq!(doc.name.as_deref(), Some(name));
            assert!(doc.expected.is_some(), "{name} lacks expected values");
            doc.build().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert_eq!(document("scalar-winding").unwrap().expected.unwrap().degree, Some(-2));
        assert_eq!(document("su2-generator").unwrap().expected.unwrap().abs_degree, Some(1));
    }
}
