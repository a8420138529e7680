//! The top-degree coefficient of `tr((σ⁻¹dσ)^D)` at a single point.
//!
//! With `A_i = σ⁻¹ ∂σ/∂u_i` the coefficient of `du₁∧…∧du_D` is
//! `Σ_π sgn(π) tr(A_{π(1)}⋯A_{π(D)})`. Summing over permutations costs
//! `D!` products; the subset recursion below builds the antisymmetrized
//! products `M(S)` for every subset `S` of directions instead:
//!
//! `M(∅) = I`, `M(S) = Σ_{i∈S} (-1)^{#{j∈S : j<i}} A_i · M(S∖{i})`.
//!
//! The sign is the parity of moving `i` to the front of the sorted word
//! `S`, so `M(S)` is exactly the signed sum over orderings of `S`.

use thiserror::Error;

use crate::expr::C64;
use crate::linalg::{inverse_with_condition, CMatrix};
use crate::maps::{MapError, MatrixJet, MatrixMap};

/// Largest tolerated conditioning of `σ` at a node: the 1-norm condition
/// number, or the size of the frame `σ⁻¹∂σ` when that is larger. The
/// second measure is what notices zeros of a scalar `σ`.
pub const CONDITION_CAP: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormsError {
    #[error("σ is numerically singular at ambient point {ambient:?} (condition {condition:e})")]
    Singular { ambient: Vec<f64>, condition: f64 },
    #[error(transparent)]
    Map(#[from] MapError),
}

/// The matrices `A_i = σ⁻¹ ∂σ/∂u_i` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct MaurerCartanFrame {
    pub a: Vec<CMatrix>,
}

impl MaurerCartanFrame {
    pub fn new(a: Vec<CMatrix>) -> Self {
        assert!(a.windows(2).all(|w| w[0].dim() == w[1].dim()), "frame matrices must share a size");
        MaurerCartanFrame { a }
    }

    /// Frame of a jet, refusing when `σ` is worse conditioned than `cap`.
    pub fn from_jet(jet: &MatrixJet, ambient: &[f64], cap: f64) -> Result<Self, FormsError> {
        let singular = |condition| FormsError::Singular { ambient: ambient.to_vec(), condition };
        let (inv, condition) = inverse_with_condition(&jet.value).ok_or_else(|| singular(f64::INFINITY))?;
        let a: Vec<CMatrix> = jet.partials.iter().map(|d| &inv * d).collect();
        let frame_size = a.iter().map(CMatrix::norm1).fold(0.0, f64::max);
        let worst = condition.max(frame_size);
        if !(worst <= cap) {
            return Err(singular(worst));
        }
        Ok(MaurerCartanFrame { a })
    }

    pub fn degree(&self) -> usize {
        self.a.len()
    }

    pub fn size(&self) -> usize {
        self.a.first().map_or(0, |a| a.dim())
    }

    /// Frame with each matrix replaced by `f(A_i)`.
    pub fn map(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        MaurerCartanFrame { a: self.a.iter().map(f).collect() }
    }

    /// Blockwise `A_i ⊕ B_i`.
    pub fn direct_sum(&self, other: &MaurerCartanFrame) -> Self {
        assert_eq!(self.degree(), other.degree());
        MaurerCartanFrame { a: self.a.iter().zip(&other.a).map(|(x, y)| x.direct_sum(y)).collect() }
    }
}

/// Frame of `map` at an ambient point with the given chart tangents.
pub fn frame(map: &dyn MatrixMap, ambient: &[f64], tangents: &[Vec<f64>]) -> Result<MaurerCartanFrame, FormsError> {
    let jet = map.jet(ambient, tangents)?;
    MaurerCartanFrame::from_jet(&jet, ambient, CONDITION_CAP)
}

/// Coefficient of `du₁∧…∧du_D` in `tr((σ⁻¹dσ)^D)`.
pub fn top_form(f: &MaurerCartanFrame) -> C64 {
    let d = f.degree();
    let m = f.size();
    if d == 0 {
        return C64::new(m as f64, 0.0);
    }
    if m == 1 {
        // scalar one-forms anticommute, so only D = 1 survives
        return if d == 1 { f.a[0][(0, 0)] } else { C64::new(0.0, 0.0) };
    }
    let mm = m * m;
    let full = (1usize << d) - 1;
    let mut table = vec![C64::new(0.0, 0.0); (full + 1) * mm];
    for k in 0..m {
        table[k * m + k] = C64::new(1.0, 0.0);
    }
    let mut scratch = vec![C64::new(0.0, 0.0); mm];
    for s in 1..=full {
        scratch.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        let mut below = 0u32;
        for i in 0..d {
            if s & (1 << i) == 0 {
                continue;
            }
            let rest = s & !(1 << i);
            let a = f.a[i].as_slice();
            let prev = &table[rest * mm..(rest + 1) * mm];
            if below % 2 == 0 {
                CMatrix::mul_acc(m, a, prev, &mut scratch);
            } else {
                let neg: Vec<C64> = a.iter().map(|v| -v).collect();
                CMatrix::mul_acc(m, &neg, prev, &mut scratch);
            }
            below += 1;
        }
        if s == full {
            return (0..m).map(|k| scratch[k * m + k]).sum();
        }
        table[s * mm..(s + 1) * mm].copy_from_slice(&scratch);
    }
    unreachable!("the loop returns at the full subset")
}

/// `Σ_π sgn(π) tr(A_{π(1)}⋯A_{π(D)})` by enumerating permutations with
/// Heap's algorithm. Factorial cost; kept as a reference implementation.
pub fn top_form_by_permutations(f: &MaurerCartanFrame) -> C64 {
    let d = f.degree();
    let m = f.size();
    if d == 0 {
        return C64::new(m as f64, 0.0);
    }
    let mut perm: Vec<usize> = (0..d).collect();
    let mut counters = vec![0usize; d];
    let mut sign = 1.0;
    let word = |perm: &[usize]| {
        let mut acc = f.a[perm[0]].clone();
        for &k in &perm[1..] {
            acc = &acc * &f.a[k];
        }
        acc.trace()
    };
    let mut total = word(&perm);
    let mut i = 1;
    while i < d {
        if counters[i] < i {
            let j = if i % 2 == 0 { 0 } else { counters[i] };
            perm.swap(j, i);
            sign = -sign;
            total += word(&perm) * sign;
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    total
}
