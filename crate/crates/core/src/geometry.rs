//! Angular charts and tensor quadrature on spheres and sphere products.
//!
//! `S^d ⊂ ℝ^(d+1)` is charted by hyperspherical angles
//! `(θ₁, …, θ_{d-1}, φ)` with `θ_j ∈ [0, π]` and `φ ∈ [0, 2π)`:
//!
//! ```text
//! e_1(φ)          = (cos φ, sin φ)
//! e_d(θ₁, rest…)  = (sin θ₁ · e_{d-1}(rest…), cos θ₁)
//! ```
//!
//! so `e_2(θ, φ) = (sin θ cos φ, sin θ sin φ, cos θ)`. Each θ axis carries
//! Gauss–Legendre nodes (never at a pole) and φ carries the periodic
//! trapezoidal rule.
//!
//! A product grid on `S^q × S^(2n-1)` orders chart coordinates with the
//! `S^q` angles first and the fiber angles second, and its orientation is
//! the product orientation in that order, each factor oriented as the
//! boundary of its unit ball (outward normal first).

use std::f64::consts::PI;

use thiserror::Error;

pub const MIN_RESOLUTION: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("resolution {resolution} is below the minimum of {MIN_RESOLUTION} nodes per axis")]
    ResolutionTooLow { resolution: usize },
    #[error("sphere dimension must be at least 1")]
    ZeroDimension,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_n(z) and P_{n-1}(z)
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let step = pn / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Surface area of the unit sphere `S^dim`, `2π^((d+1)/2) / Γ((d+1)/2)`.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        0 => 2.0,
        1 => 2.0 * PI,
        d => 2.0 * PI / (d as f64 - 1.0) * sphere_area(d - 2),
    }
}

/// Hyperspherical chart of `S^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereChart {
    dim: usize,
}

impl SphereChart {
    pub fn new(dim: usize) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::ZeroDimension);
        }
        Ok(SphereChart { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim + 1
    }

    /// Embedding point.
    pub fn embed(&self, angles: &[f64]) -> Vec<f64> {
        let mut point = vec![0.0; self.dim + 1];
        let mut tangents = vec![vec![0.0; self.dim + 1]; self.dim];
        self.embed_with_tangents(angles, &mut point, &mut tangents);
        point
    }

    /// Embedding point and its chart partials `∂e/∂angle_j`.
    pub fn embed_with_tangents(&self, angles: &[f64], point: &mut [f64], tangents: &mut [Vec<f64>]) {
        debug_assert_eq!(angles.len(), self.dim);
        let d = self.dim;
        // innermost circle
        let phi = angles[d - 1];
        point.iter_mut().for_each(|v| *v = 0.0);
        tangents.iter_mut().for_each(|t| t.iter_mut().for_each(|v| *v = 0.0));
        point[0] = phi.cos();
        point[1] = phi.sin();
        tangents[d - 1][0] = -phi.sin();
        tangents[d - 1][1] = phi.cos();
        // wrap outward: level ℓ has ambient length ℓ+1 and uses angle d-ℓ
        for level in 2..=d {
            let j = d - level;
            let (s, c) = angles[j].sin_cos();
            for k in 0..level {
                for t in tangents.iter_mut().skip(j + 1) {
                    t[k] *= s;
                }
                tangents[j][k] = c * point[k];
                point[k] *= s;
            }
            point[level] = c;
            tangents[j][level] = -s;
        }
    }

    /// Volume density `sin^(d-1) θ₁ · sin^(d-2) θ₂ ⋯ sin θ_{d-1}`.
    pub fn jacobian(&self, angles: &[f64]) -> f64 {
        (0..self.dim - 1)
            .map(|j| angles[j].sin().powi((self.dim - 1 - j) as i32))
            .product()
    }

    /// `+1` if the chart order agrees with the outward-normal-first orientation.
    pub fn orientation_sign(&self) -> f64 {
        let angles: Vec<f64> = (0..self.dim).map(|j| if j + 1 == self.dim { 0.3 } else { 1.1 }).collect();
        let mut point = vec![0.0; self.dim + 1];
        let mut tangents = vec![vec![0.0; self.dim + 1]; self.dim];
        self.embed_with_tangents(&angles, &mut point, &mut tangents);
        let mut rows = vec![point];
        rows.extend(tangents);
        real_det(rows).signum()
    }

    pub fn area(&self) -> f64 {
        sphere_area(self.dim)
    }
}

fn real_det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs())).unwrap();
        if a[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for r in k + 1..n {
            let f = a[r][k] / a[k][k];
            for c in k..n {
                a[r][c] -= f * a[k][c];
            }
        }
    }
    det
}

#[derive(Debug, Clone, PartialEq)]
struct Axis {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Axis {
    fn polar(resolution: usize) -> Axis {
        let (x, w) = gauss_legendre(resolution);
        Axis {
            nodes: x.iter().map(|x| 0.5 * PI * (x + 1.0)).collect(),
            weights: w.iter().map(|w| 0.5 * PI * w).collect(),
        }
    }

    fn periodic(resolution: usize) -> Axis {
        let h = 2.0 * PI / resolution as f64;
        Axis {
            nodes: (0..resolution).map(|j| j as f64 * h).collect(),
            weights: vec![h; resolution],
        }
    }
}

/// One quadrature node.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    /// Chart coordinates, `S^q` angles first.
    pub chart: Vec<f64>,
    /// Product of the 1-D rule weights, i.e. the weight for `du₁…du_D`.
    pub coord_weight: f64,
    /// Hyperspherical volume density at the node.
    pub jacobian: f64,
    /// Ambient coordinates, `ℝ^(q+1)` block first.
    pub ambient: Vec<f64>,
    /// `tangents[i][a] = ∂ ambient_a / ∂ chart_i`.
    pub tangents: Vec<Vec<f64>>,
}

impl Node {
    /// Weight for integrating scalar functions against the surface measure.
    pub fn weight(&self) -> f64 {
        self.coord_weight * self.jacobian
    }
}

/// Tensor-product grid on one sphere or a product of two spheres.
///
/// Nodes are generated on demand from the per-axis rules, in row-major
/// order over the chart axes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    factors: Vec<SphereChart>,
    axes: Vec<Axis>,
    resolution: usize,
    orientation_sign: f64,
}

fn factor_axes(chart: &SphereChart, resolution: usize) -> Vec<Axis> {
    let mut axes: Vec<Axis> = (0..chart.dim() - 1).map(|_| Axis::polar(resolution)).collect();
    axes.push(Axis::periodic(resolution));
    axes
}

/// Grid on a single sphere `S^dim`.
pub fn build_sphere_grid(dim: usize, resolution: usize) -> Result<QuadratureGrid, GeometryError> {
    if resolution < MIN_RESOLUTION {
        return Err(GeometryError::ResolutionTooLow { resolution });
    }
    let chart = SphereChart::new(dim)?;
    Ok(QuadratureGrid {
        axes: factor_axes(&chart, resolution),
        orientation_sign: chart.orientation_sign(),
        factors: vec![chart],
        resolution,
    })
}

/// Grid on `S^q × S^(2n-1)`. With `q = 0` the parameter factor is dropped
/// and the grid covers `S^(2n-1)` alone.
pub fn build_product_grid(q: usize, n: usize, resolution: usize) -> Result<QuadratureGrid, GeometryError> {
    if n == 0 {
        return Err(GeometryError::ZeroDimension);
    }
    let fiber = build_sphere_grid(2 * n - 1, resolution)?;
    if q == 0 {
        return Ok(fiber);
    }
    let base = build_sphere_grid(q, resolution)?;
    let mut axes = base.axes;
    axes.extend(fiber.axes);
    Ok(QuadratureGrid {
        factors: vec![base.factors[0], fiber.factors[0]],
        axes,
        resolution,
        orientation_sign: base.orientation_sign * fiber.orientation_sign,
    })
}

impl QuadratureGrid {
    pub fn total_dim(&self) -> usize {
        self.axes.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.factors.iter().map(|f| f.ambient_dim()).sum()
    }

    pub fn factors(&self) -> &[SphereChart] {
        &self.factors
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn orientation_sign(&self) -> f64 {
        self.orientation_sign
    }

    /// Same nodes, opposite orientation.
    pub fn reversed(&self) -> Self {
        QuadratureGrid { orientation_sign: -self.orientation_sign, ..self.clone() }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.nodes.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Ambient coordinates of a chart point.
    pub fn ambient(&self, chart: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.ambient_dim());
        let mut offset = 0;
        for f in &self.factors {
            out.extend(f.embed(&chart[offset..offset + f.dim()]));
            offset += f.dim();
        }
        out
    }

    pub fn node(&self, index: usize) -> Node {
        let dim = self.total_dim();
        let mut chart = vec![0.0; dim];
        let mut coord_weight = 1.0;
        let mut rest = index;
        for (slot, axis) in chart.iter_mut().zip(&self.axes).rev() {
            let k = rest % axis.nodes.len();
            rest /= axis.nodes.len();
            *slot = axis.nodes[k];
            coord_weight *= axis.weights[k];
        }
        let ambient_dim = self.ambient_dim();
        let mut ambient = vec![0.0; ambient_dim];
        let mut tangents = vec![vec![0.0; ambient_dim]; dim];
        let mut jacobian = 1.0;
        let (mut chart_off, mut amb_off) = (0, 0);
        for f in &self.factors {
            let (d, a) = (f.dim(), f.ambient_dim());
            let angles = &chart[chart_off..chart_off + d];
            let mut local_tangents = vec![vec![0.0; a]; d];
            f.embed_with_tangents(angles, &mut ambient[amb_off..amb_off + a], &mut local_tangents);
            for (j, t) in local_tangents.into_iter().enumerate() {
                tangents[chart_off + j][amb_off..amb_off + a].copy_from_slice(&t);
            }
            jacobian *= f.jacobian(angles);
            chart_off += d;
            amb_off += a;
        }
        Node { chart, coord_weight, jacobian, ambient, tangents }
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        (0..self.len()).map(|k| self.node(k))
    }

    /// Surface-measure integral of a scalar function of the ambient point.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.nodes().map(|n| n.weight() * f(&n.ambient)).sum()
    }
}
