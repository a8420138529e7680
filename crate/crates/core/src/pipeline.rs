//! End-to-end runs of a problem: validation, integrals, certificates and
//! the JSON report.

use std::time::Instant;

use serde::Serialize;

use crate::certify::{
    best_bound, certify_nonorientable, certify_sw, certify_wu, refuse, BifurcationCertificate, BoundSummary,
    CertifyError, Criterion, HypothesisChecklist,
};
use crate::document::{CertificateRequest, Mode, Problem, ProblemDocument};
use crate::forms::FormsError;
use crate::integrate::{
    chern_pairing, degree, odd_trace_integral, DegreeResult, IntegrateError, IntegrationOptions, NormalizationConstant,
};
use crate::maps::MapError;
use crate::symbol::{direction_samples, sphere_samples, EllipticityReport, LocalityReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Validate,
    Degree,
    Chern,
    Certify,
}

/// How a run ended; the CLI maps this to its exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    InputError,
    NonConvergence,
    ValidationFailed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::InputError => 1,
            Outcome::NonConvergence => 2,
            Outcome::ValidationFailed => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub mode: Mode,
    /// Symbol mode: `p` on unit `ξ`. Direct mode: `σ` on the domain.
    pub invertibility: EllipticityReport,
    /// Symbol mode only.
    pub locality: Option<LocalityReport>,
    pub notes: Vec<String>,
}

/// Samples invertibility (and locality, for symbols) of a problem.
pub fn validate(problem: &Problem) -> ValidationReport {
    let s = &problem.document.sampling;
    match &problem.family {
        Some(family) => {
            let invertibility = family.check_ellipticity(s);
            let locality = family.check_locality(s);
            ValidationReport {
                pass: invertibility.pass && locality.pass,
                mode: Mode::Symbol,
                invertibility,
                locality: Some(locality),
                notes: vec![
                    "interior ellipticity is sampled; the Shapiro-Lopatinskij condition and invertibility at ν are user assertions".into(),
                ],
            }
        }
        None => {
            let dims = &problem.document.dims;
            let (q, n) = (dims.q, dims.n);
            let lambdas = if q == 0 {
                vec![vec![]]
            } else {
                let mut pole = vec![0.0; q + 1];
                pole[q] = 1.0;
                sphere_samples(q, s.lambda_per_axis, &pole)
            };
            let fibers = direction_samples(2 * n, s.xi_directions * s.x_per_axis);
            let mut report = EllipticityReport::empty(s.singular_value_threshold);
            for lambda in &lambdas {
                for fiber in &fibers {
                    let mut ambient = lambda.clone();
                    ambient.extend_from_slice(fiber);
                    let value = problem.sigma.eval(&ambient).map_err(|e| e.to_string());
                    report.record_matrix(lambda, &fiber[..n], &fiber[n..], value);
                }
            }
            report.finish();
            ValidationReport {
                pass: report.pass,
                mode: Mode::DirectSigma,
                invertibility: report,
                locality: None,
                notes: vec!["σ is given directly; locality outside K is taken from the assertions".into()],
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeEntry {
    pub label: String,
    pub mode: Mode,
    pub q: usize,
    pub n: usize,
    pub converged: bool,
    pub result: DegreeResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conventions {
    pub orientation: String,
    pub degree_constant: String,
    pub chern_constant: String,
    pub relation: String,
    pub single_term: String,
}

impl Conventions {
    fn for_dims(q: usize, n: usize) -> Self {
        let s = (q / 2 + n) as u32;
        Conventions {
            orientation: "product orientation with the Σ factor first; each sphere is oriented as the boundary of its \
                          unit ball (outward normal first); the fiber sphere sits in ℝ^(2n) with coordinates \
                          (x₁..x_n, ξ₁..ξ_n)"
                .into(),
            degree_constant: format!("(s-1)!/((2πi)^s (2s-1)!) with s = {s}: {}", NormalizationConstant::odd_trace(s)),
            chern_constant: format!("-(j-1)!/((2πi)^j (2j-1)!) with j = {s}: {}", NormalizationConstant::chern(s)),
            relation: "the Chern pairing equals minus the degree".into(),
            single_term: "only the term j = n + q/2 of the Chern-character series has the right form degree to pair \
                          with [S^q × S^(2n-1)]; the others are not evaluated"
                .into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub validation_ms: f64,
    pub integration_ms: f64,
    pub total_ms: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub outcome: Outcome,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundSummary>,
    /// Whether the degree matches the document's expected value, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches_expected: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub version: u32,
    pub subcommand: Subcommand,
    pub input_echo: ProblemDocument,
    pub validation: Option<ValidationReport>,
    pub degrees: Vec<DegreeEntry>,
    pub certificates: Vec<BifurcationCertificate>,
    pub summary: Summary,
    pub timing: Timing,
    pub conventions: Conventions,
}

impl Report {
    /// Pretty JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// JSON with the timing block removed, for reproducibility checks.
    pub fn to_json_without_timing(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        v.as_object_mut().expect("object").remove("timing");
        serde_json::to_string_pretty(&v).expect("values serialize")
    }

    /// First snapped value, if any.
    pub fn snapped(&self) -> Option<i64> {
        self.degrees.first().and_then(|d| d.result.snapped)
    }
}

fn classify(e: &IntegrateError) -> Outcome {
    match e {
        IntegrateError::NonConvergence(_) => Outcome::NonConvergence,
        IntegrateError::Forms(FormsError::Singular { .. })
        | IntegrateError::Forms(FormsError::Map(MapError::SingularReference { .. } | MapError::Singular { .. })) => {
            Outcome::ValidationFailed
        }
        _ => Outcome::InputError,
    }
}

/// The integral the subcommand asks for on the problem's domain.
pub fn integrate_problem(problem: &Problem, chern: bool, opts: &IntegrationOptions) -> Result<DegreeResult, IntegrateError> {
    let (q, n) = (problem.document.dims.q, problem.document.dims.n);
    let sigma = problem.sigma.as_ref();
    match (chern, q) {
        (true, _) => chern_pairing(sigma, q, n, opts),
        (false, 0) => odd_trace_integral(sigma, n, opts),
        (false, _) => degree(sigma, q, n, opts),
    }
}

/// Runs a subcommand. `threads` is recorded in the timing block only.
pub fn run(problem: &Problem, sub: Subcommand, opts: &IntegrationOptions, threads: usize) -> Report {
    let start = Instant::now();
    let doc = &problem.document;
    let (q, n, d) = (doc.dims.q, doc.dims.n, doc.lambda_dimension());
    let mut outcome = Outcome::Ok;
    let mut texts = Vec::new();

    let validation = matches!(sub, Subcommand::Validate | Subcommand::Certify).then(|| validate(problem));
    let validation_ms = start.elapsed().as_secs_f64() * 1e3;
    if let Some(v) = &validation {
        if v.pass {
            texts.push("validation PASS".to_string());
        } else {
            outcome = Outcome::ValidationFailed;
            texts.push("validation FAIL".to_string());
        }
    }

    let mut degrees = Vec::new();
    let integrate_start = Instant::now();
    let wants_integral = match sub {
        Subcommand::Validate => false,
        Subcommand::Certify => outcome == Outcome::Ok,
        _ => true,
    };
    if wants_integral {
        let chern = sub == Subcommand::Chern;
        let label = match (chern, q) {
            (true, _) => format!("Chern pairing on S^{q} × S^{}", 2 * n - 1),
            (false, 0) => format!("odd trace integral on S^{}", 2 * n - 1),
            (false, _) => format!("degree on S^{q} × S^{}", 2 * n - 1),
        };
        let (result, converged) = match integrate_problem(problem, chern, opts) {
            Ok(r) => (Some(r), true),
            Err(IntegrateError::NonConvergence(r)) => {
                outcome = outcome.max(Outcome::NonConvergence);
                texts.push(format!("no integer within tolerance; refine (raw = {:.6})", r.raw));
                (Some(*r), false)
            }
            Err(e) => {
                outcome = outcome.max(classify(&e));
                texts.push(e.to_string());
                (None, false)
            }
        };
        if let Some(result) = result {
            if let Some(k) = result.snapped {
                texts.push(format!("{label} = {k}"));
            }
            degrees.push(DegreeEntry { label, mode: problem.mode, q, n, converged, result });
        }
    }
    let integration_ms = integrate_start.elapsed().as_secs_f64() * 1e3;

    let mut matches_expected = None;
    if let (Some(exp), Some(entry)) = (&doc.expected, degrees.first()) {
        if entry.result.kind != crate::integrate::IntegralKind::ChernPairing {
            let got = entry.result.snapped;
            let ok = exp.degree.map_or(true, |e| got == Some(e)) && exp.abs_degree.map_or(true, |e| got.map(i64::abs) == Some(e));
            matches_expected = Some(ok);
        }
    }

    let mut certificates = Vec::new();
    let mut bounds = None;
    if sub == Subcommand::Certify {
        if let (Some(v), Some(k)) = (&validation, degrees.first().and_then(|e| e.result.snapped)) {
            let checklist = HypothesisChecklist::new(
                d,
                Some(v.invertibility.pass),
                v.locality.as_ref().map(|l| l.pass),
                &doc.assertions,
            );
            for req in &doc.certificates_requested {
                let cert = match *req {
                    CertificateRequest::Wu { p } => {
                        if p >= 3 && 2 * (p as usize - 1) != q {
                            Ok(refuse(Criterion::Wu, Some(p), 2 * (p as usize - 1), d, k, &checklist,
                                format!("p = {p} needs a sphere of dimension {}, the problem provides q = {q}", 2 * (p - 1))))
                        } else {
                            certify_wu(k, d, p, &checklist)
                        }
                    }
                    CertificateRequest::Sw { q: wanted } => Ok(if wanted != q {
                        refuse(Criterion::StiefelWhitney, None, wanted, d, k, &checklist,
                            format!("requested q = {wanted}, the problem provides q = {q}"))
                    } else {
                        certify_sw(k, d, q, &checklist)
                    }),
                    CertificateRequest::Nonorientable => Ok(certify_nonorientable(d, &checklist)),
                };
                match cert {
                    Ok(c) => certificates.push(c),
                    Err(e @ CertifyError::NotOddPrime(_)) => {
                        outcome = outcome.max(Outcome::InputError);
                        texts.push(e.to_string());
                    }
                }
            }
            let summary = best_bound(&certificates);
            texts.push(summary.text.clone());
            bounds = Some(summary);
        }
    }

    Report {
        version: doc.version,
        subcommand: sub,
        input_echo: doc.clone(),
        validation,
        degrees,
        certificates,
        summary: Summary { outcome, text: texts.join("; "), bounds, matches_expected },
        timing: Timing { validation_ms, integration_ms, total_ms: start.elapsed().as_secs_f64() * 1e3, threads },
        conventions: Conventions::for_dims(q, n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    #[test]
    fn identity_family_degree_is_zero() {
        let p = gallery::problem("identity-family").unwrap();
        let r = run(&p, Subcommand::Degree, &p.document.quadrature, 1);
        assert_eq!(r.summary.outcome, Outcome::Ok);
        assert_eq!(r.snapped(), Some(0));
        assert_eq!(r.degrees[0].result.raw, crate::expr::C64::new(0.0, 0.0));
    }

    #[test]
    fn clutch_certificate() {
        let p = gallery::problem("su2-clutch").unwrap();
        let r = run(&p, Subcommand::Certify, &p.document.quadrature, 1);
        assert_eq!(r.summary.outcome, Outcome::Ok, "{}", r.summary.text);
        assert!(r.validation.as_ref().unwrap().pass);
        assert_eq!(r.certificates.len(), 1);
        assert!(r.certificates[0].granted());
        assert_eq!(r.summary.bounds.as_ref().unwrap().best_bound, Some(3));
        assert_eq!(r.summary.matches_expected, Some(true));
    }

    #[test]
    fn failing_validation_stops_certify() {
        let mut doc = gallery::document("unipotent-family").unwrap();
        doc.symbol.as_mut().unwrap().coefficients[0].matrix[1][1] = "a".into();
        let p = doc.build().unwrap();
        let r = run(&p, Subcommand::Certify, &p.document.quadrature, 1);
        assert_eq!(r.summary.outcome, Outcome::ValidationFailed);
        assert!(r.degrees.is_empty() && r.certificates.is_empty());
    }

    #[test]
    fn reports_are_reproducible() {
        let p = gallery::problem("scalar-winding").unwrap();
        let a = run(&p, Subcommand::Degree, &p.document.quadrature, 1).to_json_without_timing();
        let b = run(&p, Subcommand::Degree, &p.document.quadrature, 4).to_json_without_timing();
        assert_eq!(a, b);
    }
}
