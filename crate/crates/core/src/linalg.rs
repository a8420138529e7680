//! Small square complex matrices.
//!
//! The symbol sizes here are tiny (m ≤ 8 or so), so a row-major `Vec`
//! with hand-written kernels beats a general linear algebra crate on the
//! per-node hot path. Singular values for validation reports go through
//! nalgebra.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::expr::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for k in 0..n {
            m[(k, k)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        CMatrix { n, data: rows.iter().flatten().copied().collect() }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(f(r, c));
            }
        }
        CMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|k| self[(k, k)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |r, c| self[(c, r)].conj())
    }

    /// Largest absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|c| (0..self.n).map(|r| self[(r, c)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Block-diagonal `self ⊕ other`.
    pub fn direct_sum(&self, other: &CMatrix) -> Self {
        let n = self.n + other.n;
        Self::from_fn(n, |r, c| match (r < self.n, c < self.n) {
            (true, true) => self[(r, c)],
            (false, false) => other[(r - self.n, c - self.n)],
            _ => ZERO,
        })
    }

    /// `out += a * b`, all of dimension `n`, on raw row-major slices.
    pub fn mul_acc(n: usize, a: &[C64], b: &[C64], out: &mut [C64]) {
        for r in 0..n {
            for k in 0..n {
                let x = a[r * n + k];
                if x == ZERO {
                    continue;
                }
                let brow = &b[k * n..(k + 1) * n];
                let orow = &mut out[r * n..(r + 1) * n];
                for (o, y) in orow.iter_mut().zip(brow) {
                    *o += x * y;
                }
            }
        }
    }

    pub fn lu(&self) -> Option<Lu> {
        Lu::factor(self)
    }

    pub fn inverse(&self) -> Option<CMatrix> {
        self.lu().map(|lu| lu.inverse())
    }

    pub fn det(&self) -> C64 {
        self.lu().map_or(ZERO, |lu| lu.det())
    }

    /// Smallest and largest singular values.
    pub fn singular_value_range(&self) -> (f64, f64) {
        let m = nalgebra::DMatrix::from_fn(self.n, self.n, |r, c| self[(r, c)]);
        let sv = m.singular_values();
        let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let max = sv.iter().copied().fold(0.0, f64::max);
        (min, max)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.n + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.n + c]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        let mut out = CMatrix::zeros(self.n);
        CMatrix::mul_acc(self.n, &self.data, &rhs.data, &mut out.data);
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// LU factorization with partial pivoting, `P·A = L·U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    fn factor(a: &CMatrix) -> Option<Lu> {
        let n = a.n;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|r| (r, lu[(r, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot == 0.0 || !pivot.is_finite() {
                return None;
            }
            if p != k {
                for c in 0..n {
                    lu.data.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let inv = ONE / lu[(k, k)];
            for r in k + 1..n {
                let f = lu[(r, k)] * inv;
                lu[(r, k)] = f;
                if f == ZERO {
                    continue;
                }
                for c in k + 1..n {
                    let u = lu[(k, c)];
                    lu[(r, c)] -= f * u;
                }
            }
        }
        Some(Lu { lu, perm, sign })
    }

    pub fn det(&self) -> C64 {
        (0..self.lu.n).map(|k| self.lu[(k, k)]).product::<C64>() * self.sign
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.lu.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            for c in 0..r {
                let l = self.lu[(r, c)];
                let xc = x[c];
                x[r] -= l * xc;
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                let u = self.lu[(r, c)];
                let xc = x[c];
                x[r] -= u * xc;
            }
            x[r] /= self.lu[(r, r)];
        }
        b.copy_from_slice(&x);
    }

    pub fn inverse(&self) -> CMatrix {
        let n = self.lu.n;
        let mut inv = CMatrix::zeros(n);
        let mut col = vec![ZERO; n];
        for c in 0..n {
            col.iter_mut().for_each(|v| *v = ZERO);
            col[c] = ONE;
            self.solve_in_place(&mut col);
            for r in 0..n {
                inv[(r, c)] = col[r];
            }
        }
        inv
    }
}

/// Inverse together with the 1-norm condition number `‖A‖₁‖A⁻¹‖₁`.
pub fn inverse_with_condition(a: &CMatrix) -> Option<(CMatrix, f64)> {
    let inv = a.inverse()?;
    let cond = a.norm1() * inv.norm1();
    if !cond.is_finite() {
        return None;
    }
    Some((inv, cond))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn inverse_round_trip() {
        let a = CMatrix::from_rows(&[
            vec![c(0.0, 1.0), c(2.0, 0.0), c(1.0, -1.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(3.0, 0.5)],
            vec![c(-2.0, 1.0), c(1.0, 1.0), c(0.0, 0.0)],
        ]);
        let inv = a.inverse().unwrap();
        let prod = &a * &inv;
        assert!((&prod - &CMatrix::identity(3)).max_abs() < 1e-14);
    }

    #[test]
    fn determinant_with_pivoting() {
        let a = CMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]);
        assert_eq!(a.det(), c(-1.0, 0.0));
        let b = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]]);
        assert!(b.lu().is_none());
    }

    #[test]
    fn condition_number_of_diagonal() {
        let a = CMatrix::from_rows(&[vec![c(1e-3, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(2.0, 0.0)]]);
        let (_, cond) = inverse_with_condition(&a).unwrap();
        assert!((cond - 2000.0).abs() < 1e-9);
        let (lo, hi) = a.singular_value_range();
        assert!((lo - 1e-3).abs() < 1e-15 && (hi - 2.0).abs() < 1e-14);
    }
}
