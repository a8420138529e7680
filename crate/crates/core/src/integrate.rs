//! Degree and Chern-character pairings as weighted sums of top-form values.
//!
//! The integral of `tr((σ⁻¹dσ)^D)` over an oriented product of spheres is
//! the sum over grid nodes of the coordinate weight times the top-form
//! coefficient, times the grid's orientation sign. Nodes are processed in
//! fixed-size blocks in parallel; the block partials are combined with a
//! pairwise tree in grid order, so the result does not depend on the number
//! of worker threads.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::C64;
use crate::forms::{top_form, FormsError, MaurerCartanFrame, CONDITION_CAP};
use crate::geometry::{build_product_grid, GeometryError, QuadratureGrid};
use crate::maps::MatrixMap;

/// Nodes per parallel work item. Fixed so the summation tree is fixed.
const BLOCK: usize = 2048;

/// Largest `s` for which constants are tabulated exactly.
pub const MAX_CONSTANT_ORDER: u32 = 20;

#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("invalid dimensions: {0}")]
    Dimensions(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error("no integer within tolerance after resolutions {:?}: raw = {}, error estimate {:e}",
            .0.resolutions_used, .0.raw, .0.abs_error_estimate)]
    NonConvergence(Box<DegreeResult>),
}

/// `sign · rational · π^(-s) · i^(imag)` with `imag ∈ {0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizationConstant {
    pub s: u32,
    pub rational: BigRational,
    pub imaginary: bool,
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

impl NormalizationConstant {
    /// `(s-1)! / ((2πi)^s (2s-1)!)`.
    pub fn odd_trace(s: u32) -> Self {
        assert!((1..=MAX_CONSTANT_ORDER).contains(&s), "constant order {s} out of range");
        let mut rational =
            BigRational::new(factorial(s - 1), (BigInt::one() << s as usize) * factorial(2 * s - 1));
        // i^(-s) = (-i)^s: 1, -i, -1, i
        let imaginary = s % 2 == 1;
        if s % 4 == 1 || s % 4 == 2 {
            rational = -rational;
        }
        NormalizationConstant { s, rational, imaginary }
    }

    /// Constant of the degree on `S^q × S^(2n-1)`, i.e. `s = q/2 + n`.
    pub fn degree(q: u32, n: u32) -> Self {
        Self::odd_trace(q / 2 + n)
    }

    /// Chern-character pairing constant for `j`, carrying the leading minus sign.
    pub fn chern(j: u32) -> Self {
        let c = Self::odd_trace(j);
        NormalizationConstant { rational: -c.rational, ..c }
    }

    pub fn value(&self) -> C64 {
        let r = self.rational.to_f64().expect("finite rational") * std::f64::consts::PI.powi(-(self.s as i32));
        if self.imaginary {
            C64::new(0.0, r)
        } else {
            C64::new(r, 0.0)
        }
    }

    /// `|rational|`, the magnitude up to the π power.
    pub fn magnitude(&self) -> BigRational {
        self.rational.abs()
    }
}

impl fmt::Display for NormalizationConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} · π^-{}", self.rational, self.s)?;
        if self.imaginary {
            write!(f, " · i")?;
        }
        Ok(())
    }
}

impl Serialize for NormalizationConstant {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("NormalizationConstant", 4)?;
        st.serialize_field("s", &self.s)?;
        st.serialize_field("rational", &self.rational.to_string())?;
        st.serialize_field("pi_power", &-(self.s as i32))?;
        st.serialize_field("i_power", &u8::from(self.imaginary))?;
        st.serialize_field("value", &crate::report::Complex::from(self.value()))?;
        st.serialize_field("text", &self.to_string())?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralKind {
    Degree,
    OddTrace,
    ChernPairing,
}

/// Tolerances and resolution ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationOptions {
    /// Starting nodes per axis.
    pub resolution: usize,
    /// Extra rounds allowed, each 1.5× finer, beyond the first pair.
    pub max_refinements: u32,
    pub snap_tolerance: f64,
    pub imag_tolerance: f64,
    pub condition_cap: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            resolution: 16,
            max_refinements: 3,
            snap_tolerance: 0.05,
            imag_tolerance: 1e-3,
            condition_cap: CONDITION_CAP,
        }
    }
}

impl IntegrationOptions {
    pub fn with_resolution(self, resolution: usize) -> Self {
        IntegrationOptions { resolution, ..self }
    }
}

/// Next rung of the resolution ladder.
pub fn refine(resolution: usize) -> usize {
    ((resolution as f64) * 1.5).round() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeResult {
    pub kind: IntegralKind,
    /// Normalized integral at the finest resolution.
    #[serde(with = "crate::report::complex")]
    pub raw: C64,
    pub snapped: Option<i64>,
    pub abs_error_estimate: f64,
    pub imag_residual: f64,
    pub resolutions_used: Vec<usize>,
    /// Normalized integral at each resolution, coarse to fine.
    #[serde(with = "crate::report::complex_vec")]
    pub trace: Vec<C64>,
    pub orientation_sign: f64,
    pub constant_used: NormalizationConstant,
    pub total_dim: usize,
    pub nodes_evaluated: usize,
}

/// Unnormalized oriented integral and the sum of absolute contributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawIntegral {
    pub value: C64,
    pub abs_sum: f64,
}

fn pairwise(v: &[C64]) -> C64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise(a) + pairwise(b)
}

/// `orientation · Σ coord_weight · top_form` over the grid.
///
/// Errors name the first failing node in grid order.
pub fn integrate_top_form(map: &dyn MatrixMap, grid: &QuadratureGrid, cap: f64) -> Result<RawIntegral, IntegrateError> {
    if map.ambient_dim() != grid.ambient_dim() {
        return Err(IntegrateError::Dimensions(format!(
            "map reads {} ambient coordinates but the grid provides {}",
            map.ambient_dim(),
            grid.ambient_dim()
        )));
    }
    let len = grid.len();
    let blocks = len.div_ceil(BLOCK);
    let partials: Vec<Result<(C64, f64), FormsError>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let range = b * BLOCK..((b + 1) * BLOCK).min(len);
            let mut terms = Vec::with_capacity(range.len());
            let mut abs = 0.0;
            for k in range {
                let node = grid.node(k);
                let jet = map.jet(&node.ambient, &node.tangents)?;
                let f = MaurerCartanFrame::from_jet(&jet, &node.ambient, cap)?;
                let t = top_form(&f) * node.coord_weight;
                abs += t.norm();
                terms.push(t);
            }
            Ok((pairwise(&terms), abs))
        })
        .collect();
    let mut sums = Vec::with_capacity(blocks);
    let mut abs_sum = 0.0;
    for p in partials {
        let (s, a) = p?;
        sums.push(s);
        abs_sum += a;
    }
    Ok(RawIntegral { value: pairwise(&sums) * grid.orientation_sign(), abs_sum })
}

/// Runs the resolution ladder on grids produced by `build` and snaps.
fn ladder(
    map: &dyn MatrixMap,
    kind: IntegralKind,
    constant: NormalizationConstant,
    opts: &IntegrationOptions,
    build: impl Fn(usize) -> Result<QuadratureGrid, GeometryError>,
) -> Result<DegreeResult, IntegrateError> {
    let c = constant.value();
    let mut resolutions = Vec::new();
    let mut trace = Vec::new();
    let mut resolution = opts.resolution;
    let mut nodes = 0;
    let rounds = 2 + opts.max_refinements as usize;
    let mut result = None;
    for round in 0..rounds {
        let grid = build(resolution)?;
        let raw = integrate_top_form(map, &grid, opts.condition_cap)?;
        nodes += grid.len();
        resolutions.push(resolution);
        trace.push(raw.value * c);
        let floor = 64.0 * f64::EPSILON * raw.abs_sum * c.norm();
        if round > 0 {
            let (prev, cur) = (trace[round - 1], trace[round]);
            let estimate = (cur - prev).norm() + floor;
            let nearest = cur.re.round();
            let snapped = ((cur.re - nearest).abs() <= opts.snap_tolerance
                && cur.im.abs() <= opts.imag_tolerance
                && estimate <= opts.snap_tolerance)
                .then_some(nearest as i64);
            let r = DegreeResult {
                kind,
                raw: cur,
                snapped,
                abs_error_estimate: estimate,
                imag_residual: cur.im.abs(),
                resolutions_used: resolutions.clone(),
                trace: trace.clone(),
                orientation_sign: grid.orientation_sign(),
                constant_used: constant.clone(),
                total_dim: grid.total_dim(),
                nodes_evaluated: nodes,
            };
            if snapped.is_some() {
                return Ok(r);
            }
            result = Some(r);
        }
        resolution = refine(resolution);
    }
    Err(IntegrateError::NonConvergence(Box::new(result.expect("at least two rounds"))))
}

fn check_fiber(n: usize) -> Result<(), IntegrateError> {
    if n == 0 {
        return Err(IntegrateError::Dimensions("n must be at least 1".into()));
    }
    Ok(())
}

/// Degree of `σ` on `S^q × S^(2n-1)` with constant `(s-1)!/((2πi)^s (2s-1)!)`, `s = q/2 + n`.
pub fn degree(map: &dyn MatrixMap, q: usize, n: usize, opts: &IntegrationOptions) -> Result<DegreeResult, IntegrateError> {
    if q < 2 || q % 2 == 1 {
        return Err(IntegrateError::Dimensions(format!("the parameter sphere needs even q ≥ 2, got {q}")));
    }
    check_fiber(n)?;
    let constant = NormalizationConstant::degree(q as u32, n as u32);
    ladder(map, IntegralKind::Degree, constant, opts, |r| build_product_grid(q, n, r))
}

/// `(j-1)!/((2πi)^j (2j-1)!) ∮ tr((G⁻¹dG)^(2j-1))` over `S^(2j-1)`.
pub fn odd_trace_integral(map: &dyn MatrixMap, j: usize, opts: &IntegrationOptions) -> Result<DegreeResult, IntegrateError> {
    check_fiber(j)?;
    let constant = NormalizationConstant::odd_trace(j as u32);
    ladder(map, IntegralKind::OddTrace, constant, opts, |r| build_product_grid(0, j, r))
}

/// `⟨ch_{q/2}, [S^q]⟩` via the single surviving term `j = n + q/2` of the
/// Chern-character pairing, with its leading minus sign.
///
/// Other terms of the sum have the wrong form degree to pair with the
/// product cycle, so they are never evaluated. With these conventions the
/// pairing equals minus the degree.
pub fn chern_pairing(map: &dyn MatrixMap, q: usize, n: usize, opts: &IntegrationOptions) -> Result<DegreeResult, IntegrateError> {
    if q % 2 == 1 {
        return Err(IntegrateError::Dimensions(format!("q must be even, got {q}")));
    }
    check_fiber(n)?;
    let constant = NormalizationConstant::chern((q / 2 + n) as u32);
    ladder(map, IntegralKind::ChernPairing, constant, opts, |r| build_product_grid(q, n, r))
}

/// `true` if the two constants agree up to sign and powers of `i`.
pub fn same_magnitude(a: &NormalizationConstant, b: &NormalizationConstant) -> bool {
    a.s == b.s && a.magnitude() == b.magnitude() && !a.rational.is_zero()
}
