//! The identification `S³ ≅ SU(2)` has degree one. Raising it to the `k`-th
//! power pointwise multiplies the degree by `k`.

use symdeg::gallery;
use symdeg::integrate::odd_trace_integral;
use symdeg::maps::{MapError, MatrixJet, MatrixMap};

struct Power<M> {
    inner: M,
    k: usize,
}

impl<M: MatrixMap> MatrixMap for Power<M> {
    fn size(&self) -> usize {
        self.inner.size()
    }

    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    fn jet(&self, ambient: &[f64], tangents: &[Vec<f64>]) -> Result<MatrixJet, MapError> {
        let g = self.inner.jet(ambient, tangents)?;
        Ok((1..self.k).fold(g.clone(), |acc, _| acc.mul(&g)))
    }
}

fn main() {
    let problem = gallery::problem("su2-generator").unwrap();
    let opts = problem.document.quadrature;
    for k in 1..=3 {
        let map = Power { inner: problem.sigma.as_ref(), k };
        let r = odd_trace_integral(&map, 2, &opts).unwrap();
        println!(
            "g^{k}  degree {:>2?}  raw {:.12}  resolutions {:?}  {} nodes",
            r.snapped, r.raw.re, r.resolutions_used, r.nodes_evaluated
        );
    }
}
