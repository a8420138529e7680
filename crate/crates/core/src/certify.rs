//! Lower bounds on the covering dimension of the bifurcation set from a
//! computed degree.
//!
//! Two criteria are implemented. The mod-p one uses an odd prime `p` and a
//! sphere of dimension `q = 2(p-1)`; the mod-2 one uses a sphere of
//! dimension 2 or 4 and an operator with complex coefficients. Hypotheses
//! that cannot be witnessed from the symbol are user assertions and are
//! copied into every certificate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertifyError {
    #[error("p = {0} is not an odd prime")]
    NotOddPrime(u64),
}

/// Outcome of one checklist entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Asserted,
    NotAsserted,
    NotChecked,
}

impl Status {
    pub fn ok(self) -> bool {
        matches!(self, Status::Pass | Status::Asserted)
    }

    pub fn from_assertion(flag: bool) -> Status {
        if flag {
            Status::Asserted
        } else {
            Status::NotAsserted
        }
    }

    pub fn from_check(pass: bool) -> Status {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// User assertions for the hypotheses no sampling can witness.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Assertions {
    pub h1_lopatinskij: bool,
    pub h2_invertible_at_nu: bool,
    pub h3_boundary_leading_terms: bool,
    /// Stands in for the sampled locality check when σ is given directly.
    pub h3_interior_locality: bool,
    pub lambda_orientable: bool,
    pub sigma_orientation_preserving: bool,
    pub h1prime_complex_structure: bool,
    /// Enables the manual `d - 1` bound for a nonorientable index bundle.
    pub index_bundle_nonorientable: bool,
}

impl Assertions {
    pub fn all() -> Self {
        Assertions {
            h1_lopatinskij: true,
            h2_invertible_at_nu: true,
            h3_boundary_leading_terms: true,
            h3_interior_locality: true,
            lambda_orientable: true,
            sigma_orientation_preserving: true,
            h1prime_complex_structure: true,
            index_bundle_nonorientable: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisChecklist {
    pub h1_interior_ellipticity: Status,
    pub h1_lopatinskij: Status,
    pub h2_invertible_at_nu: Status,
    pub h3_boundary_leading_terms: Status,
    pub h3_interior_locality: Status,
    pub lambda_orientable: Status,
    pub lambda_dimension: usize,
    pub sigma_orientation_preserving: Status,
    pub h1prime_complex_structure: Status,
    pub index_bundle_nonorientable: Status,
}

impl HypothesisChecklist {
    /// Checklist from sampled checks (`None` when not run) and assertions.
    /// An unchecked locality entry falls back to its assertion.
    pub fn new(d: usize, ellipticity: Option<bool>, locality: Option<bool>, a: &Assertions) -> Self {
        let checked = |r: Option<bool>| r.map_or(Status::NotChecked, Status::from_check);
        let locality = match locality {
            Some(pass) => Status::from_check(pass),
            None => Status::from_assertion(a.h3_interior_locality),
        };
        HypothesisChecklist {
            h1_interior_ellipticity: checked(ellipticity),
            h1_lopatinskij: Status::from_assertion(a.h1_lopatinskij),
            h2_invertible_at_nu: Status::from_assertion(a.h2_invertible_at_nu),
            h3_boundary_leading_terms: Status::from_assertion(a.h3_boundary_leading_terms),
            h3_interior_locality: locality,
            lambda_orientable: Status::from_assertion(a.lambda_orientable),
            lambda_dimension: d,
            sigma_orientation_preserving: Status::from_assertion(a.sigma_orientation_preserving),
            h1prime_complex_structure: Status::from_assertion(a.h1prime_complex_structure),
            index_bundle_nonorientable: Status::from_assertion(a.index_bundle_nonorientable),
        }
    }

    /// Every entry passed or asserted; sampled checks count as passed.
    pub fn all_ok(d: usize) -> Self {
        Self::new(d, Some(true), Some(true), &Assertions::all())
    }

    /// The analytic hypotheses shared by both criteria, in reporting order.
    fn common(&self) -> [(&'static str, Status); 5] {
        [
            ("interior ellipticity (H1)", self.h1_interior_ellipticity),
            ("Shapiro-Lopatinskij condition (H1)", self.h1_lopatinskij),
            ("invertibility at ν (H2)", self.h2_invertible_at_nu),
            ("boundary leading terms independent of λ (H3)", self.h3_boundary_leading_terms),
            ("coefficients independent of λ outside K (H3)", self.h3_interior_locality),
        ]
    }

    fn first_failure(entries: &[(&'static str, Status)]) -> Option<String> {
        entries
            .iter()
            .find(|(_, s)| !s.ok())
            .map(|(name, s)| format!("hypothesis not satisfied: {name} is {s:?}"))
    }

    pub fn any_fail(&self) -> bool {
        [
            self.h1_interior_ellipticity,
            self.h1_lopatinskij,
            self.h2_invertible_at_nu,
            self.h3_boundary_leading_terms,
            self.h3_interior_locality,
            self.lambda_orientable,
            self.sigma_orientation_preserving,
            self.h1prime_complex_structure,
        ]
        .contains(&Status::Fail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// First Wu class mod an odd prime.
    Wu,
    /// Stiefel-Whitney class mod 2 after forgetting the complex structure.
    StiefelWhitney,
    /// First Stiefel-Whitney class of a nonorientable index bundle.
    NonorientableIndexBundle,
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Criterion::Wu => "the mod-p Wu criterion",
            Criterion::StiefelWhitney => "the mod-2 Stiefel-Whitney criterion",
            Criterion::NonorientableIndexBundle => "a nonorientable index bundle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Grant,
    Refuse,
}

pub const TOPOLOGY_CLAUSE: &str =
    "the bifurcation set either separates Λ or cannot be deformed to a point inside Λ";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BifurcationCertificate {
    pub criterion: Criterion,
    pub verdict: Verdict,
    /// First failed criterion of a refusal.
    pub reason: Option<String>,
    pub prime: Option<u64>,
    pub q: usize,
    pub d: usize,
    pub degree: Option<i64>,
    /// `d - q` when granted.
    pub bound: Option<usize>,
    pub conclusion: Option<String>,
    pub topology_clause: Option<String>,
    pub checklist: HypothesisChecklist,
    pub arithmetic_trace: Vec<String>,
}

impl BifurcationCertificate {
    pub fn granted(&self) -> bool {
        self.verdict == Verdict::Grant
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= p {
        if p % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// `r · (2r-1)! mod p`.
pub fn wu_unit(r: u64, p: u64) -> u64 {
    let fact = (1..2 * r).fold(1u128, |acc, k| acc * k as u128 % p as u128);
    (fact * r as u128 % p as u128) as u64
}

fn finish(
    criterion: Criterion,
    prime: Option<u64>,
    q: usize,
    d: usize,
    degree: i64,
    checklist: &HypothesisChecklist,
    trace: Vec<String>,
    refusal: Option<String>,
) -> BifurcationCertificate {
    let granted = refusal.is_none();
    BifurcationCertificate {
        criterion,
        verdict: if granted { Verdict::Grant } else { Verdict::Refuse },
        reason: refusal,
        prime,
        q,
        d,
        degree: Some(degree),
        bound: granted.then(|| d - q),
        conclusion: granted.then(|| format!("covering dimension of B ≥ {} (d = {d}, q = {q})", d - q)),
        topology_clause: granted.then(|| TOPOLOGY_CLAUSE.to_string()),
        checklist: checklist.clone(),
        arithmetic_trace: trace,
    }
}

/// A refusal decided before any criterion-specific arithmetic, such as a
/// request for a sphere dimension the problem does not provide.
pub fn refuse(
    criterion: Criterion,
    prime: Option<u64>,
    q: usize,
    d: usize,
    degree: i64,
    checklist: &HypothesisChecklist,
    reason: String,
) -> BifurcationCertificate {
    finish(criterion, prime, q, d, degree, checklist, vec![], Some(reason))
}

/// Mod-p criterion on a sphere of dimension `q = 2(p-1)`.
///
/// Grants iff `p ≤ d/2 + 1`, `q ≤ d`, Λ is asserted orientable, the other
/// hypotheses hold, and `p ∤ deg`.
pub fn certify_wu(
    degree: i64,
    d: usize,
    p: u64,
    checklist: &HypothesisChecklist,
) -> Result<BifurcationCertificate, CertifyError> {
    if p == 2 || !is_prime(p) {
        return Err(CertifyError::NotOddPrime(p));
    }
    let q = 2 * (p as usize - 1);
    let r = (p - 1) / 2;
    let residue = degree.rem_euclid(p as i64) as u64;
    let unit = wu_unit(r, p);
    let mut trace = vec![
        format!("p = {p}, q = 2(p-1) = {q}, r = (p-1)/2 = {r}"),
        format!("pairing of the first Wu class with [Σ] ≡ ±r(2r-1)!·deg (mod {p})"),
        format!("r(2r-1)! ≡ {unit} (mod {p}), a unit since 2r-1 < p"),
        format!("deg = {degree} ≡ {residue} (mod {p})"),
        format!("pairing ≡ ±{} (mod {p})", unit as u128 * residue as u128 % p as u128),
    ];
    let mut entries = vec![("Λ orientable", checklist.lambda_orientable)];
    entries.extend(checklist.common());
    let refusal = if 2 * p as usize > d + 2 {
        Some(format!("p = {p} exceeds d/2 + 1 = {}", d as f64 / 2.0 + 1.0))
    } else if q > d {
        Some(format!("q = {q} exceeds d = {d}"))
    } else if let Some(r) = HypothesisChecklist::first_failure(&entries) {
        Some(r)
    } else if residue == 0 {
        Some(format!("deg = {degree} is divisible by p = {p}"))
    } else {
        None
    };
    if refusal.is_none() {
        // the unit claim is re-derived, not assumed
        assert_ne!(unit, 0, "r(2r-1)! must be a unit mod p");
        trace.push(format!(
            "if the index bundle is nonorientable its first Stiefel-Whitney class is nonzero and dim B ≥ d - 1 ≥ d - q; \
             otherwise the nonzero pairing above gives dim B ≥ d - q = {}",
            d - q
        ));
    }
    Ok(finish(Criterion::Wu, Some(p), q, d, degree, checklist, trace, refusal))
}

/// Mod-2 criterion on a sphere of dimension `q ∈ {2, 4}`.
///
/// Grants iff `deg` is odd, `q ≤ d`, the complex-coefficient hypothesis is
/// asserted and the shared hypotheses hold. Other `q` are refused.
pub fn certify_sw(degree: i64, d: usize, q: usize, checklist: &HypothesisChecklist) -> BifurcationCertificate {
    let mut trace = Vec::new();
    let refusal = if q != 2 && q != 4 {
        Some(format!(
            "q = {q} is not 2 or 4: for s = q/2 ≥ 3 the factor (s-1)! is even and kills the mod-2 reduction"
        ))
    } else {
        let s = q / 2;
        trace.push(format!("s = q/2 = {s}, (s-1)! = 1 is odd"));
        trace.push(format!("c_s = ±(s-1)!·ch_s, so ⟨c_s, [Σ]⟩ ≡ deg = {degree} (mod 2)"));
        trace.push(format!("the mod-2 reduction of c_s is the Stiefel-Whitney class ω_{q} of the realified bundle"));
        let mut entries = vec![("complex coefficients (H1')", checklist.h1prime_complex_structure)];
        entries.extend(checklist.common());
        if q > d {
            Some(format!("q = {q} exceeds d = {d}"))
        } else if let Some(r) = HypothesisChecklist::first_failure(&entries) {
            Some(r)
        } else if degree.rem_euclid(2) == 0 {
            Some(format!("deg = {degree} is even"))
        } else {
            trace.push(format!("deg odd, hence ω_{q} ≠ 0 and dim B ≥ d - q = {}", d - q));
            None
        }
    };
    finish(Criterion::StiefelWhitney, None, q, d, degree, checklist, trace, refusal)
}

/// Manual path: a user-asserted nonorientable index bundle gives `d - 1`.
pub fn certify_nonorientable(d: usize, checklist: &HypothesisChecklist) -> BifurcationCertificate {
    let mut entries = vec![("nonorientable index bundle", checklist.index_bundle_nonorientable)];
    entries.extend(checklist.common());
    let refusal = if d < 1 {
        Some("d must be at least 1".to_string())
    } else {
        HypothesisChecklist::first_failure(&entries)
    };
    let trace = vec!["ω₁ of the index bundle is nonzero by assertion; not computed from the symbol".to_string()];
    BifurcationCertificate {
        degree: None,
        ..finish(Criterion::NonorientableIndexBundle, None, 1, d, 0, checklist, trace, refusal)
    }
}

/// Best granted bound over several certificates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub best_bound: Option<usize>,
    pub granted: Vec<BifurcationCertificate>,
    pub refused: usize,
    pub text: String,
    pub note: String,
}

pub const HIGHER_CLASSES_NOTE: &str = "only first Wu classes are paired with spheres: \
     the characteristic numbers of higher Wu classes on spherical classes vanish";

pub fn best_bound(certificates: &[BifurcationCertificate]) -> BoundSummary {
    let granted: Vec<BifurcationCertificate> = certificates.iter().filter(|c| c.granted()).cloned().collect();
    let best = granted.iter().filter_map(|c| c.bound).max();
    let text = match best {
        Some(b) => {
            let from = granted.iter().find(|c| c.bound == Some(b)).expect("best comes from a grant");
            format!("covering dimension of B ≥ {b} (from {} on q = {})", from.criterion, from.q)
        }
        None => "no certificate".to_string(),
    };
    BoundSummary {
        best_bound: best,
        refused: certificates.len() - granted.len(),
        granted,
        text,
        note: HIGHER_CLASSES_NOTE.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wu_examples() {
        let ok = HypothesisChecklist::all_ok(6);
        let c = certify_wu(1, 6, 3, &ok).unwrap();
        assert!(c.granted());
        assert_eq!((c.q, c.bound), (4, Some(2)));
        assert!(!certify_wu(3, 6, 3, &ok).unwrap().granted());
        let c = certify_wu(1, 4, 5, &HypothesisChecklist::all_ok(4)).unwrap();
        assert!(c.reason.unwrap().contains("d/2 + 1"));
        assert_eq!(certify_wu(1, 6, 9, &ok), Err(CertifyError::NotOddPrime(9)));
        assert_eq!(certify_wu(1, 6, 2, &ok), Err(CertifyError::NotOddPrime(2)));
    }

    #[test]
    fn wu_needs_orientable_lambda() {
        let mut a = Assertions::all();
        a.lambda_orientable = false;
        let c = certify_wu(1, 6, 3, &HypothesisChecklist::new(6, Some(true), Some(true), &a)).unwrap();
        assert!(c.reason.unwrap().contains("Λ orientable"));
    }

    #[test]
    fn sw_examples() {
        assert_eq!(certify_sw(1, 5, 2, &HypothesisChecklist::all_ok(5)).bound, Some(3));
        assert!(!certify_sw(2, 5, 2, &HypothesisChecklist::all_ok(5)).granted());
        assert_eq!(certify_sw(1, 7, 4, &HypothesisChecklist::all_ok(7)).bound, Some(3));
        let c = certify_sw(1, 8, 6, &HypothesisChecklist::all_ok(8));
        assert!(c.reason.unwrap().contains("(s-1)! is even"));
    }

    #[test]
    fn failed_check_blocks_grant() {
        let cl = HypothesisChecklist::new(6, Some(false), Some(true), &Assertions::all());
        assert!(cl.any_fail());
        assert!(!certify_sw(1, 6, 2, &cl).granted());
        assert!(!certify_wu(1, 6, 3, &cl).unwrap().granted());
    }

    #[test]
    fn unit_is_nonzero_for_small_primes() {
        for p in (3..200).filter(|&p| is_prime(p)) {
            assert_ne!(wu_unit((p - 1) / 2, p), 0);
        }
        // Wilson: (p-1)! ≡ -1, here r=1, p=3: 1·1! = 1
        assert_eq!(wu_unit(1, 3), 1);
    }

    #[test]
    fn best_bound_examples() {
        let ok = HypothesisChecklist::all_ok(6);
        let a = certify_sw(1, 6, 2, &ok);
        let b = certify_sw(1, 6, 4, &ok);
        assert_eq!(best_bound(&[a.clone(), b.clone()]).best_bound, Some(4));
        assert_eq!(best_bound(&[b]).best_bound, Some(2));
        let none = best_bound(&[certify_sw(2, 6, 2, &ok)]);
        assert_eq!((none.best_bound, none.text.as_str()), (None, "no certificate"));
        let manual = certify_nonorientable(6, &HypothesisChecklist::all_ok(6));
        assert!(!manual.granted());
        let mut asserted = Assertions::all();
        asserted.index_bundle_nonorientable = true;
        let manual = certify_nonorientable(6, &HypothesisChecklist::new(6, Some(true), Some(true), &asserted));
        assert_eq!(manual.bound, Some(5));
        assert_eq!(best_bound(&[a, manual]).best_bound, Some(5));
    }
}
