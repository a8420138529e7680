//! Independent oracles shared by the integration tests. Nothing here goes
//! through the crate's form or quadrature code.
#![allow(dead_code)]

use std::f64::consts::PI;

use symdeg::expr::C64;
use symdeg::linalg::CMatrix;
use symdeg::maps::MatrixMap;

/// `Σ_π sign(π) tr(A_π(1) ⋯ A_π(D))` by recursive enumeration.
pub fn permutation_top_form(a: &[CMatrix]) -> C64 {
    fn go(a: &[CMatrix], used: &mut Vec<bool>, acc: CMatrix, sign: f64, out: &mut C64) {
        let depth = used.iter().filter(|u| **u).count();
        if depth == a.len() {
            *out += acc.trace() * sign;
            return;
        }
        for i in 0..a.len() {
            if used[i] {
                continue;
            }
            // each already-placed larger index is an inversion
            let inversions = (i + 1..a.len()).filter(|&j| used[j]).count();
            used[i] = true;
            let next = &acc * &a[i];
            let s = if inversions % 2 == 0 { sign } else { -sign };
            go(a, used, next, s, out);
            used[i] = false;
        }
    }
    let m = a.first().map_or(1, |x| x.dim());
    let mut out = C64::new(0.0, 0.0);
    go(a, &mut vec![false; a.len()], CMatrix::identity(m), 1.0, &mut out);
    out
}

fn central_difference(map: &dyn MatrixMap, point: &[f64], dir: &[f64], h: f64) -> CMatrix {
    let shift = |t: f64| -> Vec<f64> { point.iter().zip(dir).map(|(p, d)| p + t * d).collect() };
    let plus = map.eval(&shift(h)).unwrap();
    let minus = map.eval(&shift(-h)).unwrap();
    (&plus - &minus).scale(C64::new(0.5 / h, 0.0))
}

/// Degree of a map `S³ → GL(m)` that is a group homomorphism from SU(2).
///
/// Bi-invariance makes the integrand constant, so the integral is its value
/// at one point times the area `2π²`. The frame is measured by finite
/// differences along `e₂, e₃, e₄` at `(1, 0, 0, 0)`, a positive frame for
/// the outward-normal orientation.
pub fn su2_bi_invariance_degree(map: &dyn MatrixMap) -> f64 {
    let base = [1.0, 0.0, 0.0, 0.0];
    let g_inv = map.eval(&base).unwrap().inverse().unwrap();
    let frame: Vec<CMatrix> = (1..4)
        .map(|k| {
            let mut dir = [0.0; 4];
            dir[k] = 1.0;
            &g_inv * &central_difference(map, &base, &dir, 1e-5)
        })
        .collect();
    let v = permutation_top_form(&frame);
    // (s-1)!/((2πi)^s (2s-1)!) at s = 2 is -1/(24π²)
    let c = -1.0 / (24.0 * PI * PI);
    (c * v * 2.0 * PI * PI).re
}

/// The clutching map `S² × S¹ → SU(2) ⊂ ℂ²` written out by hand.
fn clutch(p: [f64; 3]) -> [f64; 4] {
    let [th, ph, t] = p;
    let (a, b, c) = (th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos());
    let w = C64::new(t.cos(), t.sin());
    let u = (1.0 + c) / 2.0 + w * ((1.0 - c) / 2.0);
    let v = C64::new(a, b) * (C64::new(1.0, 0.0) - w) / 2.0;
    [u.re, u.im, v.re, v.im]
}

fn jacobian(f: fn([f64; 3]) -> [f64; 4], p: [f64; 3]) -> [[f64; 4]; 3] {
    let h = 1e-6;
    let mut out = [[0.0; 4]; 3];
    for (k, col) in out.iter_mut().enumerate() {
        let (mut a, mut b) = (p, p);
        a[k] += h;
        b[k] -= h;
        let (fa, fb) = (f(a), f(b));
        for i in 0..4 {
            col[i] = (fa[i] - fb[i]) / (2.0 * h);
        }
    }
    out
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn det4(m: [[f64; 4]; 4]) -> f64 {
    (0..4)
        .map(|j| {
            let minor = [0, 1, 2].map(|r| {
                let row = &m[r + 1];
                let cols: Vec<f64> = (0..4).filter(|&c| c != j).map(|c| row[c]).collect();
                [cols[0], cols[1], cols[2]]
            });
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            s * m[0][j] * det3(minor)
        })
        .sum()
}

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal basis of `y^⊥` by Gram-Schmidt on the standard basis.
fn complement(y: [f64; 4]) -> Vec<[f64; 4]> {
    let mut basis: Vec<[f64; 4]> = vec![y];
    for k in 0..4 {
        let mut e = [0.0; 4];
        e[k] = 1.0;
        for b in &basis {
            let d = dot(&e, b);
            for i in 0..4 {
                e[i] -= d * b[i];
            }
        }
        let n = dot(&e, &e).sqrt();
        if n > 1e-6 && basis.len() < 4 {
            basis.push(e.map(|x| x / n));
        }
    }
    basis.split_off(1)
}

/// Signed preimage count of a regular value `y` under `F`, domain oriented
/// by the chart order `(θ, φ, t)` and target by the outward normal of `S³`.
fn signed_preimages(f: fn([f64; 3]) -> [f64; 4], y: [f64; 4]) -> i64 {
    let b = complement(y);
    let mut roots: Vec<[f64; 3]> = Vec::new();
    let mut total = 0;
    let steps = 12;
    for i in 0..steps {
        for j in 0..steps {
            for k in 0..steps {
                let mut p = [
                    PI * (i as f64 + 0.5) / steps as f64,
                    2.0 * PI * j as f64 / steps as f64,
                    2.0 * PI * k as f64 / steps as f64,
                ];
                let mut converged = false;
                for _ in 0..60 {
                    let fp = f(p);
                    let r = [0, 1, 2].map(|l| dot(&fp, &b[l]));
                    if r.iter().map(|x| x.abs()).fold(0.0, f64::max) < 1e-13 {
                        converged = true;
                        break;
                    }
                    let jac = jacobian(f, p);
                    // row l, column c: ∂_c ⟨F, b_l⟩
                    let m = [0, 1, 2].map(|l| [0, 1, 2].map(|c| dot(&jac[c], &b[l])));
                    let d = det3(m);
                    if d.abs() < 1e-12 {
                        break;
                    }
                    for c in 0..3 {
                        let mut mc = m;
                        for l in 0..3 {
                            mc[l][c] = r[l];
                        }
                        p[c] -= det3(mc) / d;
                    }
                }
                if !converged || dot(&f(p), &y) <= 0.0 {
                    continue;
                }
                let fp = f(p);
                let canon = [p[0], p[1].rem_euclid(2.0 * PI), p[2].rem_euclid(2.0 * PI)];
                if !(0.0..PI).contains(&canon[0]) {
                    continue;
                }
                let same = |q: &[f64; 3]| {
                    let fq = f(*q);
                    (0..4).all(|i| (fq[i] - fp[i]).abs() < 1e-8)
                        && (0..3).all(|i| {
                            let d = (q[i] - canon[i]).abs();
                            d < 1e-6 || (i > 0 && (2.0 * PI - d).abs() < 1e-6)
                        })
                };
                if roots.iter().any(same) {
                    continue;
                }
                roots.push(canon);
                let jac = jacobian(f, canon);
                let sign = det4([fp, jac[0], jac[1], jac[2]]).signum() as i64;
                total += sign;
            }
        }
    }
    assert!(!roots.is_empty(), "no preimage found for {y:?}");
    total
}

/// Degree of the clutching map by counting preimages of two regular values.
pub fn clutch_preimage_degree() -> i64 {
    let normalize = |v: [f64; 4]| {
        let n = dot(&v, &v).sqrt();
        v.map(|x| x / n)
    };
    let first = signed_preimages(clutch, normalize([0.3, -0.5, 0.7, 0.41]));
    let second = signed_preimages(clutch, normalize([-0.2, 0.6, -0.35, 0.66]));
    assert_eq!(first, second, "preimage counts disagree between regular values");
    first
}
