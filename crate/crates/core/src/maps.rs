//! Matrix-valued maps on ambient coordinates, evaluated together with their
//! derivatives along chart directions.
//!
//! A map sees the ambient point `z` and the tangent vectors `∂z/∂u_i` of the
//! chart at that point. Expression-backed maps seed each ambient coordinate
//! as a dual number carrying those tangents, so the returned partials are
//! already chart derivatives.

use std::sync::Arc;

use thiserror::Error;

use crate::expr::{Compiled, DualValue, Expr, ExprError, C64};
use crate::linalg::CMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("expression error in entry ({row}, {col}): {source}")]
    Entry {
        row: usize,
        col: usize,
        #[source]
        source: ExprError,
    },
    #[error("{0}")]
    Expr(#[from] ExprError),
    #[error("reference symbol p(ν, x, ξ) is singular at x = {x:?}, ξ = {xi:?}")]
    SingularReference { x: Vec<f64>, xi: Vec<f64> },
    #[error("map is singular at ambient point {ambient:?}")]
    Singular { ambient: Vec<f64> },
    #[error("{0}")]
    Invalid(String),
}

/// Value of a matrix map and its partial derivatives along chart directions.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixJet {
    pub value: CMatrix,
    pub partials: Vec<CMatrix>,
}

impl MatrixJet {
    pub fn constant(value: CMatrix, directions: usize) -> Self {
        let m = value.dim();
        MatrixJet { value, partials: vec![CMatrix::zeros(m); directions] }
    }

    /// Product rule.
    pub fn mul(&self, o: &MatrixJet) -> MatrixJet {
        MatrixJet {
            value: &self.value * &o.value,
            partials: self
                .partials
                .iter()
                .zip(&o.partials)
                .map(|(a, b)| &(a * &o.value) + &(&self.value * b))
                .collect(),
        }
    }

    /// Assembles a jet from a row-major grid of scalar dual values.
    pub fn from_duals(m: usize, entries: &[DualValue]) -> MatrixJet {
        let dirs = entries.first().map_or(0, |e| e.directions());
        let value = CMatrix::from_fn(m, |r, c| entries[r * m + c].value);
        let partials = (0..dirs)
            .map(|i| CMatrix::from_fn(m, |r, c| entries[r * m + c].partials[i]))
            .collect();
        MatrixJet { value, partials }
    }
}

/// A smooth `GL(m, ℂ)`-valued map on an ambient domain.
pub trait MatrixMap: Send + Sync {
    /// Matrix size `m`.
    fn size(&self) -> usize;

    /// Number of ambient coordinates the map reads.
    fn ambient_dim(&self) -> usize;

    /// `tangents[i]` is the ambient velocity along chart direction `i`.
    fn jet(&self, ambient: &[f64], tangents: &[Vec<f64>]) -> Result<MatrixJet, MapError>;

    /// Value only.
    fn eval(&self, ambient: &[f64]) -> Result<CMatrix, MapError> {
        Ok(self.jet(ambient, &[])?.value)
    }
}

impl<T: MatrixMap + ?Sized> MatrixMap for Arc<T> {
    fn size(&self) -> usize {
        (**self).size()
    }
    fn ambient_dim(&self) -> usize {
        (**self).ambient_dim()
    }
    fn jet(&self, ambient: &[f64], tangents: &[Vec<f64>]) -> Result<MatrixJet, MapError> {
        (**self).jet(ambient, tangents)
    }
}

impl<T: MatrixMap + ?Sized> MatrixMap for Box<T> {
    fn size(&self) -> usize {
        (**self).size()
    }
    fn ambient_dim(&self) -> usize {
        (**self).ambient_dim()
    }
    fn jet(&self, ambient: &[f64], tangents: &[Vec<f64>]) -> Result<MatrixJet, MapError> {
        (**self).jet(ambient, tangents)
    }
}

/// Ambient coordinates as dual numbers whose partials are the chart tangents.
pub fn seed_ambient(ambient: &[f64], tangents: &[Vec<f64>]) -> Vec<DualValue> {
    let mut seeds = vec![0.0; tangents.len()];
    ambient
        .iter()
        .enumerate()
        .map(|(a, &z)| {
            for (s, t) in seeds.iter_mut().zip(tangents) {
                *s = t[a];
            }
            DualValue::seeded(z, &seeds)
        })
        .collect()
}

/// An `m × m` grid of expressions in the ambient variables.
#[derive(Debug, Clone)]
pub struct ExprMatrix {
    m: usize,
    entries: Vec<Compiled>,
}

impl ExprMatrix {
    pub fn new<S: AsRef<str>>(entries: &[Vec<Expr>], variables: &[S]) -> Result<Self, MapError> {
        let m = entries.len();
        if m == 0 || entries.iter().any(|r| r.len() != m) {
            return Err(MapError::Invalid(format!("expression matrix must be square, got {m} rows")));
        }
        let mut compiled = Vec::with_capacity(m * m);
        for (row, r) in entries.iter().enumerate() {
            for (col, e) in r.iter().enumerate() {
                compiled.push(e.compile(variables).map_err(|source| MapError::Entry { row, col, source })?);
            }
        }
        Ok(ExprMatrix { m, entries: compiled })
    }

    /// Parses every entry, then compiles.
    pub fn parse<S: AsRef<str>, V: AsRef<str>>(entries: &[Vec<S>], variables: &[V]) -> Result<Self, MapError> {
        let mut parsed = Vec::with_capacity(entries.len());
        for (row, r) in entries.iter().enumerate() {
            let mut out = Vec::with_capacity(r.len());
            for (col, src) in r.iter().enumerate() {
                out.push(Expr::parse(src.as_ref()).map_err(|source| MapError::Entry { row, col, source })?);
            }
            parsed.push(out);
        }
        Self::new(&parsed, variables)
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn variables(&self) -> &[String] {
        self.entries[0].variables()
    }

    pub fn eval(&self, values: &[C64]) -> Result<CMatrix, MapError> {
        let mut out = CMatrix::zeros(self.m);
        for (k, e) in self.entries.iter().enumerate() {
            out[(k / self.m, k % self.m)] = e.eval(values).map_err(|source| self.entry_error(k, source))?;
        }
        Ok(out)
    }

    pub fn eval_dual(&self, values: &[DualValue]) -> Result<MatrixJet, MapError> {
        let mut duals = Vec::with_capacity(self.m * self.m);
        for (k, e) in self.entries.iter().enumerate() {
            duals.push(e.eval_dual(values).map_err(|source| self.entry_error(k, source))?);
        }
        Ok(MatrixJet::from_duals(self.m, &duals))
    }

    fn entry_error(&self, k: usize, source: ExprError) -> MapError {
        MapError::Entry { row: k / self.m, col: k % self.m, source }
    }
}

/// A map given directly by expressions in the ambient coordinates.
#[derive(Debug, Clone)]
pub struct DirectSigma {
    matrix: ExprMatrix,
}

impl DirectSigma {
    /// `variables` name the ambient coordinates in order.
    pub fn parse<S: AsRef<str>, V: AsRef<str>>(entries: &[Vec<S>], variables: &[V]) -> Result<Self, MapError> {
        Ok(DirectSigma { matrix: ExprMatrix::parse(entries, variables)? })
    }
}

impl MatrixMap for DirectSigma {
    fn size(&self) -> usize {
        self.matrix.size()
    }

    fn ambient_dim(&self) -> usize {
        self.matrix.variables().len()
    }

    fn jet(&self, ambient: &[f64], tangents: &[Vec<f64>]) -> Result<MatrixJet, MapError> {
        self.matrix.eval_dual(&seed_ambient(ambient, tangents))
    }

    fn eval(&self, ambient: &[f64]) -> Result<CMatrix, MapError> {
        let values: Vec<C64> = ambient.iter().map(|&z| C64::new(z, 0.0)).collect();
        self.matrix.eval(&values)
    }
}

/// Pointwise block-diagonal sum `σ ⊕ τ`.
pub struct BlockSum<A, B> {
    pub first: A,
    pub second: B,
}

impl<A: MatrixMap, B: MatrixMap> MatrixMap for BlockSum<A, B> {
    fn size(&self) -> usize {
        self.first.size() + self.second.size()
    }

    fn ambient_dim(&self) -> usize {
        self.first.ambient_dim()
    }

    fn jet(&self, ambient: &[f64], tangents: &[Vec<f64>]) -> Result<MatrixJet, MapError> {
        let a = self.first.jet(ambient, tangents)?;
        let b = self.second.jet(ambient, tangents)?;
        Ok(MatrixJet {
            value: a.value.direct_sum(&b.value),
            partials: a.partials.iter().zip(&b.partials).map(|(x, y)| x.direct_sum(y)).collect(),
        })
    }
}

/// Constant conjugation `U σ U⁻¹`.
pub struct Conjugated<A> {
    inner: A,
    u: CMatrix,
    u_inv: CMatrix,
}

impl<A: MatrixMap> Conjugated<A> {
    /// Returns `None` if `u` is singular.
    pub fn new(inner: A, u: CMatrix) -> Option<Self> {
        let u_inv = u.inverse()?;
        Some(Conjugated { inner, u, u_inv })
    }
}

impl<A: MatrixMap> MatrixMap for Conjugated<A> {
    fn size(&self) -> usize {
        self.inner.size()
    }

    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    fn jet(&self, ambient: &[f64], tangents: &[Vec<f64>]) -> Result<MatrixJet, MapError> {
        let j = self.inner.jet(ambient, tangents)?;
        let conj = |a: &CMatrix| &(&self.u * a) * &self.u_inv;
        Ok(MatrixJet { value: conj(&j.value), partials: j.partials.iter().map(conj).collect() })
    }
}

/// Pointwise inverse `σ⁻¹`, whose degree is the negative of `σ`'s.
pub struct Inverted<A>(pub A);

impl<A: MatrixMap> MatrixMap for Inverted<A> {
    fn size(&self) -> usize {
        self.0.size()
    }

    fn ambient_dim(&self) -> usize {
        self.0.ambient_dim()
    }

    fn jet(&self, ambient: &[f64], tangents: &[Vec<f64>]) -> Result<MatrixJet, MapError> {
        let j = self.0.jet(ambient, tangents)?;
        let inv = j.value.inverse().ok_or_else(|| MapError::Singular { ambient: ambient.to_vec() })?;
        let partials = j.partials.iter().map(|d| (&(&inv * d) * &inv).scale(C64::new(-1.0, 0.0))).collect();
        Ok(MatrixJet { value: inv, partials })
    }
}

/// An affine matrix field `R(z) = R₀ + Σ_a z_a R_a` on the ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineField {
    pub constant: CMatrix,
    pub linear: Vec<CMatrix>,
}

impl AffineField {
    fn jet(&self, ambient: &[f64], tangents: &[Vec<f64>]) -> MatrixJet {
        let mut value = self.constant.clone();
        for (r, &z) in self.linear.iter().zip(ambient) {
            value = &value + &r.scale(C64::new(z, 0.0));
        }
        let m = value.dim();
        let partials = tangents
            .iter()
            .map(|t| {
                self.linear
                    .iter()
                    .zip(t)
                    .fold(CMatrix::zeros(m), |acc, (r, &v)| &acc + &r.scale(C64::new(v, 0.0)))
            })
            .collect();
        MatrixJet { value, partials }
    }
}

/// `(I + εL(z)) · σ(z) · (I + εR(z))` with affine fields `L`, `R`.
///
/// For `ε·max ‖L‖, ε·max ‖R‖ < 1` on the unit spheres the factors stay
/// invertible along `t ↦ tε`, so the result is homotopic to `σ` through
/// invertible maps.
pub struct Perturbed<A> {
    pub inner: A,
    pub left: AffineField,
    pub right: AffineField,
    pub epsilon: f64,
}

impl<A: MatrixMap> Perturbed<A> {
    fn factor(&self, field: &AffineField, ambient: &[f64], tangents: &[Vec<f64>]) -> MatrixJet {
        let eps = C64::new(self.epsilon, 0.0);
        let j = field.jet(ambient, tangents);
        let m = j.value.dim();
        MatrixJet {
            value: &CMatrix::identity(m) + &j.value.scale(eps),
            partials: j.partials.iter().map(|d| d.scale(eps)).collect(),
        }
    }
}

impl<A: MatrixMap> MatrixMap for Perturbed<A> {
    fn size(&self) -> usize {
        self.inner.size()
    }

    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    fn jet(&self, ambient: &[f64], tangents: &[Vec<f64>]) -> Result<MatrixJet, MapError> {
        let s = self.inner.jet(ambient, tangents)?;
        let l = self.factor(&self.left, ambient, tangents);
        let r = self.factor(&self.right, ambient, tangents);
        Ok(l.mul(&s).mul(&r))
    }
}

/// A map defined by a closure, for tests and examples.
pub struct FnMap<F> {
    pub size: usize,
    pub ambient_dim: usize,
    pub f: F,
}

impl<F> MatrixMap for FnMap<F>
where
    F: Fn(&[DualValue]) -> Result<Vec<DualValue>, MapError> + Send + Sync,
{
    fn size(&self) -> usize {
        self.size
    }

    fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    fn jet(&self, ambient: &[f64], tangents: &[Vec<f64>]) -> Result<MatrixJet, MapError> {
        let entries = (self.f)(&seed_ambient(ambient, tangents))?;
        Ok(MatrixJet::from_duals(self.size, &entries))
    }
}


impl<T: MatrixMap + ?Sized> MatrixMap for &T {
    fn size(&self) -> usize {
        (**self).size()
    }
    fn ambient_dim(&self) -> usize {
        (**self).ambient_dim()
    }
    fn jet(&self, ambient: &[f64], tangents: &[Vec<f64>]) -> Result<MatrixJet, MapError> {
        (**self).jet(ambient, tangents)
    }
}
