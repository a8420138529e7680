//! Families of principal symbols `p(λ, x, ξ) = Σ_{|α|=k} a_α(λ, x) ξ^α`,
//! sampled hypothesis checks, and the reduced symbol `σ = p · p(ν, ·)⁻¹`.
//!
//! The parameter `λ` ranges over a sphere `Σ = S^q` given by its ambient
//! coordinates in `ℝ^(q+1)`; the basepoint `ν` is a unit vector there.
//! Coordinates are normalized so that the compact set `K` where the
//! coefficients may depend on `λ` lies in the ball `|x| < K_radius ≤ 1`.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{DualValue, C64};
use crate::geometry::SphereChart;
use crate::linalg::CMatrix;
use crate::maps::{seed_ambient, ExprMatrix, MapError, MatrixJet, MatrixMap};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("invalid symbol family: {0}")]
    Invalid(String),
    #[error("coefficient {alpha}: {source}")]
    Coefficient {
        alpha: MultiIndex,
        #[source]
        source: MapError,
    },
}

/// A multi-index `α ∈ ℕⁿ`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `ξ^α`.
    pub fn monomial(&self, xi: &[f64]) -> f64 {
        self.0.iter().zip(xi).map(|(&a, &x)| x.powi(a as i32)).product()
    }

    fn monomial_dual(&self, xi: &[DualValue]) -> DualValue {
        let dirs = xi.first().map_or(0, |v| v.directions());
        self.0
            .iter()
            .zip(xi)
            .fold(DualValue::constant(C64::new(1.0, 0.0), dirs), |acc, (&a, x)| acc.mul(&x.powu(a)))
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Everything needed to build a [`SymbolFamily`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSpec {
    pub n: usize,
    pub m: usize,
    pub k: u32,
    /// Ambient coordinate names of `Σ ⊂ ℝ^(q+1)`.
    pub lambda_vars: Vec<String>,
    pub x_vars: Vec<String>,
    pub xi_vars: Vec<String>,
    /// `(α, a_α)` with `a_α` an `m × m` grid of expressions in `λ` and `x`.
    pub coefficients: Vec<(MultiIndex, Vec<Vec<String>>)>,
    pub basepoint: Vec<f64>,
    pub k_radius: f64,
}

#[derive(Debug, Clone)]
struct Coefficient {
    alpha: MultiIndex,
    matrix: ExprMatrix,
}

/// A validated, compiled symbol family.
#[derive(Debug, Clone)]
pub struct SymbolFamily {
    spec: SymbolSpec,
    coefficients: Vec<Coefficient>,
}

fn check_names(names: &[&String]) -> Result<(), SymbolError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if n.as_str() == "i" {
            return Err(SymbolError::Invalid("`i` is reserved for the imaginary unit".into()));
        }
        if !seen.insert(n.as_str()) {
            return Err(SymbolError::Invalid(format!("variable `{n}` declared twice")));
        }
    }
    Ok(())
}

impl SymbolFamily {
    pub fn new(spec: SymbolSpec) -> Result<Self, SymbolError> {
        let invalid = |msg: String| Err(SymbolError::Invalid(msg));
        if spec.n == 0 || spec.m == 0 || spec.k == 0 {
            return invalid(format!("need n, m, k ≥ 1, got n={}, m={}, k={}", spec.n, spec.m, spec.k));
        }
        if spec.x_vars.len() != spec.n || spec.xi_vars.len() != spec.n {
            return invalid(format!(
                "expected {} x and ξ variables, got {} and {}",
                spec.n,
                spec.x_vars.len(),
                spec.xi_vars.len()
            ));
        }
        if spec.lambda_vars.is_empty() {
            return invalid("at least one λ coordinate is required".into());
        }
        if spec.basepoint.len() != spec.lambda_vars.len() {
            return invalid(format!(
                "basepoint has {} coordinates, Σ has {}",
                spec.basepoint.len(),
                spec.lambda_vars.len()
            ));
        }
        let norm = spec.basepoint.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return invalid(format!("basepoint must be a unit vector, has norm {norm}"));
        }
        if !(spec.k_radius > 0.0 && spec.k_radius <= 1.0) {
            return invalid(format!("K_radius must lie in (0, 1], got {}", spec.k_radius));
        }
        let all: Vec<&String> = spec.lambda_vars.iter().chain(&spec.x_vars).chain(&spec.xi_vars).collect();
        check_names(&all)?;
        if spec.coefficients.is_empty() {
            return invalid("no coefficients".into());
        }
        let vars: Vec<&String> = spec.lambda_vars.iter().chain(&spec.x_vars).collect();
        let mut seen = BTreeSet::new();
        let mut coefficients = Vec::with_capacity(spec.coefficients.len());
        for (alpha, entries) in &spec.coefficients {
            if alpha.0.len() != spec.n {
                return invalid(format!("multi-index {alpha} has {} entries, expected {}", alpha.0.len(), spec.n));
            }
            if alpha.order() != spec.k {
                return invalid(format!("multi-index {alpha} has order {}, expected {}", alpha.order(), spec.k));
            }
            if !seen.insert(alpha.clone()) {
                return invalid(format!("multi-index {alpha} listed twice"));
            }
            if entries.len() != spec.m || entries.iter().any(|r| r.len() != spec.m) {
                return invalid(format!("coefficient {alpha} must be {m}×{m}", m = spec.m));
            }
            let matrix = ExprMatrix::parse(entries, &vars)
                .map_err(|source| SymbolError::Coefficient { alpha: alpha.clone(), source })?;
            coefficients.push(Coefficient { alpha: alpha.clone(), matrix });
        }
        Ok(SymbolFamily { spec, coefficients })
    }

    pub fn spec(&self) -> &SymbolSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn m(&self) -> usize {
        self.spec.m
    }

    /// Dimension `q` of the parameter sphere.
    pub fn q(&self) -> usize {
        self.spec.lambda_vars.len() - 1
    }

    pub fn basepoint(&self) -> &[f64] {
        &self.spec.basepoint
    }

    fn bind(lambda: &[f64], x: &[f64]) -> Vec<C64> {
        lambda.iter().chain(x).map(|&v| C64::new(v, 0.0)).collect()
    }

    /// `a_α(λ, x)` for every coefficient.
    pub fn coefficients_at(&self, lambda: &[f64], x: &[f64]) -> Result<Vec<(MultiIndex, CMatrix)>, SymbolError> {
        let values = Self::bind(lambda, x);
        self.coefficients
            .iter()
            .map(|c| {
                c.matrix
                    .eval(&values)
                    .map(|a| (c.alpha.clone(), a))
                    .map_err(|source| SymbolError::Coefficient { alpha: c.alpha.clone(), source })
            })
            .collect()
    }

    /// `p(λ, x, ξ)`.
    pub fn eval_p(&self, lambda: &[f64], x: &[f64], xi: &[f64]) -> Result<CMatrix, SymbolError> {
        let mut p = CMatrix::zeros(self.spec.m);
        for (alpha, a) in self.coefficients_at(lambda, x)? {
            p = &p + &a.scale(C64::new(alpha.monomial(xi), 0.0));
        }
        Ok(p)
    }

    /// `p` and its partials, with `λ`, `x`, `ξ` already seeded.
    fn eval_p_jet(&self, lambda: &[DualValue], x: &[DualValue], xi: &[DualValue]) -> Result<MatrixJet, SymbolError> {
        let dirs = xi.first().map_or(0, |v| v.directions());
        let m = self.spec.m;
        let mut jet = MatrixJet::constant(CMatrix::zeros(m), dirs);
        let inputs: Vec<DualValue> = lambda.iter().chain(x).cloned().collect();
        for c in &self.coefficients {
            let a = c
                .matrix
                .eval_dual(&inputs)
                .map_err(|source| SymbolError::Coefficient { alpha: c.alpha.clone(), source })?;
            let mono = c.alpha.monomial_dual(xi);
            jet.value = &jet.value + &a.value.scale(mono.value);
            for (k, (dp, da)) in jet.partials.iter_mut().zip(&a.partials).enumerate() {
                *dp = &(&*dp + &da.scale(mono.value)) + &a.value.scale(mono.partials[k]);
            }
        }
        Ok(jet)
    }

    /// Interior ellipticity screen on a grid of `λ`, `x` and unit `ξ`.
    pub fn check_ellipticity(&self, s: &SamplingSpec) -> EllipticityReport {
        let lambdas = sphere_samples(self.q(), s.lambda_per_axis, &self.spec.basepoint);
        let xs = cube_samples(self.spec.n, s.x_per_axis);
        let xis = direction_samples(self.spec.n, s.xi_directions);
        let per_lambda: Vec<EllipticityReport> = lambdas
            .par_iter()
            .map(|lambda| {
                let mut r = EllipticityReport::empty(s.singular_value_threshold);
                for x in &xs {
                    for xi in &xis {
                        r.record(self, lambda, x, xi);
                    }
                }
                r
            })
            .collect();
        let mut total = EllipticityReport::empty(s.singular_value_threshold);
        for r in per_lambda {
            total.merge(r);
        }
        total.finish();
        total
    }

    /// Checks that every `a_α` is independent of `λ` for `|x| ≥ K_radius`.
    pub fn check_locality(&self, s: &SamplingSpec) -> LocalityReport {
        let lambdas = sphere_samples(self.q(), s.lambda_per_axis, &self.spec.basepoint);
        let radii: Vec<f64> = [1.0, 1.1, 1.25, 1.5, 2.0].iter().map(|f| f * self.spec.k_radius).collect();
        let dirs = direction_samples(self.spec.n, s.x_per_axis * s.x_per_axis.max(1));
        let mut report = LocalityReport { pass: true, samples: 0, max_deviation: 0.0, tolerance: s.locality_tolerance, witness: None, errors: vec![] };
        for r in &radii {
            for dir in &dirs {
                let x: Vec<f64> = dir.iter().map(|v| v * r).collect();
                let reference = match self.coefficients_at(&self.spec.basepoint, &x) {
                    Ok(c) => c,
                    Err(e) => {
                        report.errors.push(e.to_string());
                        continue;
                    }
                };
                for lambda in &lambdas {
                    report.samples += 1;
                    let here = match self.coefficients_at(lambda, &x) {
                        Ok(c) => c,
                        Err(e) => {
                            report.errors.push(e.to_string());
                            continue;
                        }
                    };
                    for ((alpha, a), (_, b)) in here.iter().zip(&reference) {
                        let dev = (a - b).max_abs();
                        if dev > report.max_deviation {
                            report.max_deviation = dev;
                            report.witness = Some(LocalityWitness {
                                lambda: lambda.clone(),
                                x: x.clone(),
                                alpha: alpha.clone(),
                                deviation: dev,
                            });
                        }
                    }
                }
            }
        }
        report.errors.truncate(16);
        report.pass = report.errors.is_empty() && report.max_deviation <= s.locality_tolerance;
        if report.pass {
            report.witness = None;
        }
        report
    }

    /// The reduced symbol. Ellipticity is the caller's responsibility; a
    /// singular `p(ν, x, ξ)` surfaces as an error at evaluation time.
    pub fn reduce(self) -> ReducedSymbol {
        ReducedSymbol { family: self }
    }
}

/// Sample counts and thresholds for the hypothesis checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSpec {
    pub lambda_per_axis: usize,
    pub x_per_axis: usize,
    pub xi_directions: usize,
    pub singular_value_threshold: f64,
    pub locality_tolerance: f64,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        SamplingSpec {
            lambda_per_axis: 8,
            x_per_axis: 8,
            xi_directions: 32,
            singular_value_threshold: 1e-8,
            locality_tolerance: 1e-10,
        }
    }
}

/// Points of `S^q` on an angle grid that includes the poles, plus `extra`.
pub fn sphere_samples(q: usize, per_axis: usize, extra: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![extra.to_vec()];
    if q == 0 {
        out.push(extra.iter().map(|v| -v).collect());
        return out;
    }
    let per_axis = per_axis.max(2);
    let chart = SphereChart::new(q).expect("q ≥ 1");
    let count = per_axis.pow(q as u32);
    for idx in 0..count {
        let mut rest = idx;
        let angles: Vec<f64> = (0..q)
            .map(|axis| {
                let k = rest % per_axis;
                rest /= per_axis;
                if axis + 1 < q {
                    PI * k as f64 / (per_axis - 1) as f64
                } else {
                    2.0 * PI * k as f64 / per_axis as f64
                }
            })
            .collect();
        out.push(chart.embed(&angles));
    }
    out
}

/// `per_axis^n` points of `[-1, 1]^n`, endpoints included.
pub fn cube_samples(n: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let per_axis = per_axis.max(2);
    let pts: Vec<f64> = (0..per_axis).map(|k| -1.0 + 2.0 * k as f64 / (per_axis - 1) as f64).collect();
    (0..per_axis.pow(n as u32))
        .map(|idx| {
            let mut rest = idx;
            (0..n)
                .map(|_| {
                    let k = rest % per_axis;
                    rest /= per_axis;
                    pts[k]
                })
                .collect()
        })
        .collect()
}

/// About `count` unit vectors in `ℝⁿ`.
pub fn direction_samples(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        0 => vec![vec![]],
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count.max(4))
            .map(|k| {
                let t = 2.0 * PI * k as f64 / count.max(4) as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let per_axis = ((count as f64).powf(1.0 / (n - 1) as f64).ceil() as usize).max(3);
            sphere_samples(n - 1, per_axis, &{
                let mut e = vec![0.0; n];
                e[0] = 1.0;
                e
            })
        }
    }
}

/// A sampled point with the smallest singular value found there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipticityWitness {
    pub lambda: Vec<f64>,
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub min_singular_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipticityReport {
    pub pass: bool,
    pub samples: usize,
    pub threshold: f64,
    pub min_abs_det: f64,
    pub min_singular_value: f64,
    pub worst_condition: f64,
    /// Sample attaining the smallest singular value.
    pub witness: Option<EllipticityWitness>,
    pub errors: Vec<String>,
}

impl EllipticityReport {
    pub fn empty(threshold: f64) -> Self {
        EllipticityReport {
            pass: true,
            samples: 0,
            threshold,
            min_abs_det: f64::INFINITY,
            min_singular_value: f64::INFINITY,
            worst_condition: 1.0,
            witness: None,
            errors: vec![],
        }
    }

    fn record(&mut self, f: &SymbolFamily, lambda: &[f64], x: &[f64], xi: &[f64]) {
        let p = f.eval_p(lambda, x, xi).map_err(|e| e.to_string());
        self.record_matrix(lambda, x, xi, p);
    }

    /// Adds one sampled matrix, or the error raised while evaluating it.
    pub fn record_matrix(&mut self, lambda: &[f64], x: &[f64], xi: &[f64], p: Result<CMatrix, String>) {
        self.samples += 1;
        let p = match p {
            Ok(p) => p,
            Err(e) => {
                if self.errors.len() < 16 {
                    self.errors.push(e);
                }
                return;
            }
        };
        let (lo, hi) = p.singular_value_range();
        self.min_abs_det = self.min_abs_det.min(p.det().norm());
        let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        self.worst_condition = self.worst_condition.max(cond);
        if lo < self.min_singular_value {
            self.min_singular_value = lo;
            self.witness = Some(EllipticityWitness {
                lambda: lambda.to_vec(),
                x: x.to_vec(),
                xi: xi.to_vec(),
                min_singular_value: lo,
            });
        }
    }

    /// Sets the verdict once all samples are in.
    pub fn finish(&mut self) {
        self.pass = self.errors.is_empty() && self.min_singular_value >= self.threshold;
    }

    pub fn merge(&mut self, o: EllipticityReport) {
        self.samples += o.samples;
        self.min_abs_det = self.min_abs_det.min(o.min_abs_det);
        self.worst_condition = self.worst_condition.max(o.worst_condition);
        if o.min_singular_value < self.min_singular_value {
            self.min_singular_value = o.min_singular_value;
            self.witness = o.witness;
        }
        for e in o.errors {
            if self.errors.len() < 16 {
                self.errors.push(e);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalityWitness {
    pub lambda: Vec<f64>,
    pub x: Vec<f64>,
    pub alpha: MultiIndex,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalityReport {
    pub pass: bool,
    pub samples: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    /// Worst sample, reported only on failure.
    pub witness: Option<LocalityWitness>,
    pub errors: Vec<String>,
}

/// `σ(λ, x, ξ) = p(λ, x, ξ) · p(ν, x, ξ)⁻¹` for `|x| < K_radius`, and the
/// identity for `|x| ≥ K_radius`.
///
/// As a [`MatrixMap`] it reads the ambient point `(λ, x, ξ)` of
/// `S^q × S^(2n-1) ⊂ ℝ^(q+1) × ℝ^(2n)`.
#[derive(Debug, Clone)]
pub struct ReducedSymbol {
    family: SymbolFamily,
}

impl ReducedSymbol {
    pub fn family(&self) -> &SymbolFamily {
        &self.family
    }

    /// `σ` at a point, value only.
    pub fn sigma(&self, lambda: &[f64], x: &[f64], xi: &[f64]) -> Result<CMatrix, MapError> {
        let mut ambient = lambda.to_vec();
        ambient.extend_from_slice(x);
        ambient.extend_from_slice(xi);
        self.eval(&ambient)
    }

    fn outside(&self, x: &[f64]) -> bool {
        x.iter().map(|v| v * v).sum::<f64>() >= self.family.spec.k_radius.powi(2)
    }
}

fn lift(e: SymbolError) -> MapError {
    match e {
        SymbolError::Coefficient { source, .. } => source,
        SymbolError::Invalid(msg) => MapError::Invalid(msg),
    }
}

impl MatrixMap for ReducedSymbol {
    fn size(&self) -> usize {
        self.family.spec.m
    }

    fn ambient_dim(&self) -> usize {
        self.family.spec.lambda_vars.len() + 2 * self.family.spec.n
    }

    fn jet(&self, ambient: &[f64], tangents: &[Vec<f64>]) -> Result<MatrixJet, MapError> {
        let (ql, n) = (self.family.spec.lambda_vars.len(), self.family.spec.n);
        let x = &ambient[ql..ql + n];
        let m = self.size();
        if self.outside(x) {
            return Ok(MatrixJet::constant(CMatrix::identity(m), tangents.len()));
        }
        let seeded = seed_ambient(ambient, tangents);
        let (lambda, rest) = seeded.split_at(ql);
        let (xs, xis) = rest.split_at(n);
        let p = self.family.eval_p_jet(lambda, xs, xis).map_err(lift)?;
        let nu: Vec<DualValue> = self
            .family
            .spec
            .basepoint
            .iter()
            .map(|&v| DualValue::constant(C64::new(v, 0.0), tangents.len()))
            .collect();
        let p_nu = self.family.eval_p_jet(&nu, xs, xis).map_err(lift)?;
        let inv = p_nu.value.inverse().ok_or_else(|| MapError::SingularReference {
            x: x.to_vec(),
            xi: ambient[ql + n..].to_vec(),
        })?;
        let sigma = &p.value * &inv;
        let partials = p
            .partials
            .iter()
            .zip(&p_nu.partials)
            .map(|(dp, dpn)| &(dp - &(&sigma * dpn)) * &inv)
            .collect();
        Ok(MatrixJet { value: sigma, partials })
    }
}
