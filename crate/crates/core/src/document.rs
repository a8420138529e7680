//! The JSON problem document and its conversion into evaluators.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::Assertions;
use crate::expr::Expr;
use crate::integrate::IntegrationOptions;
use crate::maps::{DirectSigma, MapError, MatrixMap};
use crate::symbol::{MultiIndex, SamplingSpec, SymbolError, SymbolFamily, SymbolSpec};

pub const DOCUMENT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
}

impl DocumentError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        DocumentError::Schema { path: path.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    /// Space dimension.
    pub n: usize,
    /// System size.
    pub m: usize,
    /// Operator order; required for symbol documents.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    /// Dimension of Λ; defaults to `q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Dimension of the parameter sphere Σ. Zero drops Σ, leaving `S^(2n-1)`.
    pub q: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variables {
    /// Ambient coordinates of Σ ⊂ ℝ^(q+1).
    #[serde(default)]
    pub lambda: Vec<String>,
    pub x: Vec<String>,
    pub xi: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientEntry {
    pub alpha: MultiIndex,
    pub matrix: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSection {
    pub coefficients: Vec<CoefficientEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectSigmaSection {
    /// Expressions in the λ, x, ξ variables, read as ambient coordinates.
    pub matrix: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "path", rename_all = "snake_case", deny_unknown_fields)]
pub enum CertificateRequest {
    Wu { p: u64 },
    Sw { q: usize },
    Nonorientable,
}

/// Values a correct run must reproduce.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Expected {
    pub degree: Option<i64>,
    /// Expected `|degree|` when the sign is convention dependent.
    pub abs_degree: Option<i64>,
    pub best_bound: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub dims: Dims,
    pub variables: Variables,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<SymbolSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct_sigma: Option<DirectSigmaSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_radius: Option<f64>,
    #[serde(default)]
    pub quadrature: IntegrationOptions,
    #[serde(default)]
    pub sampling: SamplingSpec,
    #[serde(default)]
    pub assertions: Assertions,
    #[serde(default)]
    pub certificates_requested: Vec<CertificateRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
}

/// How σ is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Symbol,
    DirectSigma,
}

/// A checked document with its evaluator.
pub struct Problem {
    pub document: ProblemDocument,
    pub mode: Mode,
    /// Present in symbol mode.
    pub family: Option<SymbolFamily>,
    pub sigma: Arc<dyn MatrixMap>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem").field("document", &self.document).field("mode", &self.mode).finish()
    }
}

impl ProblemDocument {
    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            DocumentError::at(if path.is_empty() { ".".into() } else { path }, e.into_inner().to_string())
        })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, DocumentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| DocumentError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn mode(&self) -> Option<Mode> {
        match (&self.symbol, &self.direct_sigma) {
            (Some(_), None) => Some(Mode::Symbol),
            (None, Some(_)) => Some(Mode::DirectSigma),
            _ => None,
        }
    }

    /// `d`, defaulting to `q`.
    pub fn lambda_dimension(&self) -> usize {
        self.dims.d.unwrap_or(self.dims.q)
    }

    /// Checks cross-field consistency and builds the evaluator.
    pub fn build(self) -> Result<Problem, DocumentError> {
        if self.version != DOCUMENT_VERSION {
            return Err(DocumentError::at("version", format!("unsupported version {}, expected {DOCUMENT_VERSION}", self.version)));
        }
        let Dims { n, m, q, .. } = self.dims;
        if n == 0 {
            return Err(DocumentError::at("dims.n", "must be at least 1"));
        }
        if m == 0 {
            return Err(DocumentError::at("dims.m", "must be at least 1"));
        }
        if q % 2 == 1 {
            return Err(DocumentError::at("dims.q", format!("must be even, got {q}")));
        }
        let v = &self.variables;
        let lambda_len = if q == 0 { 0 } else { q + 1 };
        if v.lambda.len() != lambda_len {
            return Err(DocumentError::at(
                "variables.lambda",
                format!("expected {lambda_len} names (ambient coordinates of S^{q}), got {}", v.lambda.len()),
            ));
        }
        if v.x.len() != n {
            return Err(DocumentError::at("variables.x", format!("expected {n} names, got {}", v.x.len())));
        }
        if v.xi.len() != n {
            return Err(DocumentError::at("variables.xi", format!("expected {n} names, got {}", v.xi.len())));
        }
        let mut seen = BTreeSet::new();
        for name in v.lambda.iter().chain(&v.x).chain(&v.xi) {
            if name == "i" || !seen.insert(name.as_str()) {
                return Err(DocumentError::at("variables", format!("name `{name}` is reserved or repeated")));
            }
        }
        let mode = self.mode().ok_or_else(|| {
            DocumentError::at(".", "exactly one of `symbol` and `direct_sigma` must be present")
        })?;
        match mode {
            Mode::DirectSigma => {
                let ds = self.direct_sigma.as_ref().expect("mode checked");
                check_square(&ds.matrix, m, "direct_sigma.matrix")?;
                let vars: Vec<&String> = v.lambda.iter().chain(&v.x).chain(&v.xi).collect();
                check_expressions(&ds.matrix, &vars, "direct_sigma.matrix")?;
                let sigma = DirectSigma::parse(&ds.matrix, &vars).map_err(|e| map_error("direct_sigma.matrix", e))?;
                Ok(Problem { document: self, mode, family: None, sigma: Arc::new(sigma) })
            }
            Mode::Symbol => {
                if q == 0 {
                    return Err(DocumentError::at("dims.q", "symbol documents need a parameter sphere, q ≥ 2"));
                }
                let k = self.dims.k.ok_or_else(|| DocumentError::at("dims.k", "required for symbol documents"))?;
                let basepoint = self.basepoint.clone().ok_or_else(|| DocumentError::at("basepoint", "required for symbol documents"))?;
                let k_radius = self.k_radius.ok_or_else(|| DocumentError::at("k_radius", "required for symbol documents"))?;
                let sym = self.symbol.as_ref().expect("mode checked");
                let vars: Vec<&String> = v.lambda.iter().chain(&v.x).collect();
                for (idx, c) in sym.coefficients.iter().enumerate() {
                    let path = format!("symbol.coefficients[{idx}]");
                    if c.alpha.0.len() != n {
                        return Err(DocumentError::at(format!("{path}.alpha"), format!("expected {n} entries")));
                    }
                    if c.alpha.order() != k {
                        return Err(DocumentError::at(format!("{path}.alpha"), format!("order {} differs from k = {k}", c.alpha.order())));
                    }
                    check_square(&c.matrix, m, &format!("{path}.matrix"))?;
                    check_expressions(&c.matrix, &vars, &format!("{path}.matrix"))?;
                }
                let spec = SymbolSpec {
                    n,
                    m,
                    k,
                    lambda_vars: v.lambda.clone(),
                    x_vars: v.x.clone(),
                    xi_vars: v.xi.clone(),
                    coefficients: sym.coefficients.iter().map(|c| (c.alpha.clone(), c.matrix.clone())).collect(),
                    basepoint,
                    k_radius,
                };
                let family = SymbolFamily::new(spec).map_err(|e| match e {
                    SymbolError::Invalid(msg) => DocumentError::at("symbol", msg),
                    other => DocumentError::at("symbol.coefficients", other.to_string()),
                })?;
                let sigma = Arc::new(family.clone().reduce());
                Ok(Problem { document: self, mode, family: Some(family), sigma })
            }
        }
    }
}

fn check_square(rows: &[Vec<String>], m: usize, path: &str) -> Result<(), DocumentError> {
    if rows.len() != m {
        return Err(DocumentError::at(path, format!("expected {m} rows, got {}", rows.len())));
    }
    for (r, row) in rows.iter().enumerate() {
        if row.len() != m {
            return Err(DocumentError::at(format!("{path}[{r}]"), format!("expected {m} entries, got {}", row.len())));
        }
    }
    Ok(())
}

/// Parses every entry and checks it only reads declared variables.
fn check_expressions(rows: &[Vec<String>], vars: &[&String], path: &str) -> Result<(), DocumentError> {
    for (r, row) in rows.iter().enumerate() {
        for (c, src) in row.iter().enumerate() {
            let at = format!("{path}[{r}][{c}]");
            let e = Expr::parse(src).map_err(|e| DocumentError::at(&at, e.to_string()))?;
            let undeclared = e.variables().into_iter().find(|name| !vars.iter().any(|v| v.as_str() == *name)).map(String::from);
            if let Some(bad) = undeclared {
                return Err(DocumentError::at(at, format!("variable `{bad}` is not declared here")));
            }
        }
    }
    Ok(())
}

fn map_error(path: &str, e: MapError) -> DocumentError {
    match e {
        MapError::Entry { row, col, source } => DocumentError::at(format!("{path}[{row}][{col}]"), source.to_string()),
        other => DocumentError::at(path, other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const WINDING: &str = r#"{
        "version": 1,
        "dims": {"n": 1, "m": 1, "q": 0},
        "variables": {"x": ["x"], "xi": ["y"]},
        "direct_sigma": {"matrix": [["(x + i*y)^2"]]}
    }"#;

    #[test]
    fn parses_and_builds_direct_document() {
        let p = ProblemDocument::from_json(WINDING).unwrap().build().unwrap();
        assert_eq!(p.mode, Mode::DirectSigma);
        assert_eq!(p.sigma.ambient_dim(), 2);
        assert_eq!(p.document.quadrature, IntegrationOptions::default());
    }

    #[test]
    fn schema_errors_carry_paths() {
        let bad = WINDING.replace(r#""xi": ["y"]"#, r#""xi": 3"#);
        match ProblemDocument::from_json(&bad) {
            Err(DocumentError::Schema { path, .. }) => assert_eq!(path, "variables.xi"),
            other => panic!("{other:?}"),
        }
        let missing = WINDING.replace(r#", "xi": ["y"]"#, "");
        match ProblemDocument::from_json(&missing) {
            Err(DocumentError::Schema { path, message }) => {
                assert_eq!(path, "variables");
                assert!(message.contains("xi"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let undeclared = WINDING.replace("(x + i*y)^2", "z");
        match ProblemDocument::from_json(&undeclared).unwrap().build() {
            Err(DocumentError::Schema { path, .. }) => assert_eq!(path, "direct_sigma.matrix[0][0]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn requires_exactly_one_mode() {
        let both = WINDING.replace(
            r#""direct_sigma""#,
            r#""symbol": {"coefficients": []}, "direct_sigma""#,
        );
        assert!(ProblemDocument::from_json(&both).unwrap().build().is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let d = ProblemDocument::from_json(WINDING).unwrap();
        assert_eq!(ProblemDocument::from_json(&d.to_json()).unwrap(), d);
    }
}
