//! Velocity-space lattice, sampled fields, quadrature and finite differences.
//!
//! Nodes sit at cell centres `v_k = -L + (k + 1/2) dv`, so the lattice never
//! contains `v = 0` and all node differences are integer multiples of `dv`.
//! Every integral is a plain Riemann sum with weight `dv³` per node.

use serde::{Deserialize, Serialize};

use crate::error::{LandauError, Result};
use crate::reduce::{tree_max, tree_sum};
use crate::sym3::Sym3;

/// Uniform cubic lattice covering `[-L, L)³` with `n` nodes per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    n: usize,
    half_width: f64,
    dv: f64,
}

impl VelocityGrid {
    /// Builds the lattice. `n` must be even and at least 8, `half_width > 0`.
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(LandauError::InvalidGrid(format!(
                "n = {n}: nodes per axis must be an even integer >= 8"
            )));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(LandauError::InvalidGrid(format!(
                "L = {half_width}: half width must be positive"
            )));
        }
        Ok(Self {
            n,
            half_width,
            dv: 2.0 * half_width / n as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn dv(&self) -> f64 {
        self.dv
    }

    /// Quadrature weight of one node.
    pub fn cell_volume(&self) -> f64 {
        self.dv * self.dv * self.dv
    }

    /// Total number of nodes, `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node `k` along one axis.
    pub fn coord(&self, k: usize) -> f64 {
        -self.half_width + (k as f64 + 0.5) * self.dv
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn ijk(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    pub fn node(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.ijk(idx);
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    /// Samples `g` at every node.
    pub fn sample<F: Fn([f64; 3]) -> f64>(&self, g: F) -> ScalarField {
        let values = (0..self.len()).map(|idx| g(self.node(idx))).collect();
        ScalarField { grid: *self, values }
    }

    /// Index of the node whose cell contains `v`, if inside the box.
    pub fn locate(&self, v: [f64; 3]) -> Option<usize> {
        let mut ijk = [0usize; 3];
        for (slot, x) in ijk.iter_mut().zip(v) {
            let k = ((x + self.half_width) / self.dv).floor();
            if k < 0.0 || k >= self.n as f64 {
                return None;
            }
            *slot = k as usize;
        }
        Some(self.index(ijk[0], ijk[1], ijk[2]))
    }
}

/// One real value per node.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: VelocityGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: VelocityGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: VelocityGrid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: VelocityGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LandauError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map<F: Fn(f64) -> f64>(&self, g: F) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&x| g(x)).collect(),
        }
    }

    /// Pointwise `self * other`.
    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &ScalarField, beta: f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        tree_max(0..self.values.len(), &|i| self.values[i])
    }
}

/// Three reals per node, stored component-major.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: VelocityGrid,
    comps: [Vec<f64>; 3],
}

impl VectorField {
    pub fn zeros(grid: VelocityGrid) -> Self {
        let z = vec![0.0; grid.len()];
        Self {
            grid,
            comps: [z.clone(), z.clone(), z],
        }
    }

    pub fn from_components(grid: VelocityGrid, comps: [Vec<f64>; 3]) -> Result<Self> {
        for c in &comps {
            if c.len() != grid.len() {
                return Err(LandauError::LengthMismatch {
                    expected: grid.len(),
                    got: c.len(),
                });
            }
        }
        Ok(Self { grid, comps })
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.comps[i]
    }

    pub fn at(&self, idx: usize) -> [f64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|x| x.is_finite())
    }
}

/// Symmetric 3×3 matrix per node, six stored components `[xx, yy, zz, xy, xz, yz]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixField {
    grid: VelocityGrid,
    comps: [Vec<f64>; 6],
}

impl MatrixField {
    pub fn zeros(grid: VelocityGrid) -> Self {
        let z = vec![0.0; grid.len()];
        Self {
            grid,
            comps: std::array::from_fn(|_| z.clone()),
        }
    }

    pub fn from_components(grid: VelocityGrid, comps: [Vec<f64>; 6]) -> Result<Self> {
        for c in &comps {
            if c.len() != grid.len() {
                return Err(LandauError::LengthMismatch {
                    expected: grid.len(),
                    got: c.len(),
                });
            }
        }
        Ok(Self { grid, comps })
    }

    /// Builds the field node by node.
    pub fn from_fn<F: Fn(usize) -> Sym3>(grid: VelocityGrid, g: F) -> Self {
        let mut out = Self::zeros(grid);
        for idx in 0..grid.len() {
            out.set(idx, g(idx));
        }
        out
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    pub fn at(&self, idx: usize) -> Sym3 {
        Sym3(std::array::from_fn(|c| self.comps[c][idx]))
    }

    pub fn set(&mut self, idx: usize, m: Sym3) {
        for (c, v) in m.0.into_iter().enumerate() {
            self.comps[c][idx] = v;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|x| x.is_finite())
    }

    /// Largest eigenvalue over all nodes.
    pub fn max_eigenvalue(&self) -> f64 {
        tree_max(0..self.grid.len(), &|idx| self.at(idx).max_eigenvalue())
    }

    /// Smallest eigenvalue over all nodes.
    pub fn min_eigenvalue(&self) -> f64 {
        -tree_max(0..self.grid.len(), &|idx| -self.at(idx).min_eigenvalue())
    }
}

/// `⟨v⟩ = (1 + |v|²)^{1/2}`.
pub fn japanese_bracket(v: [f64; 3]) -> f64 {
    (1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Riemann sum `Σ g dv³`.
pub fn integrate(g: &ScalarField) -> f64 {
    let vals = g.values();
    tree_sum(0..vals.len(), &|i| vals[i]) * g.grid().cell_volume()
}

/// Discrete `L^p` norm `(Σ |g|^p dv³)^{1/p}` for `p >= 1`.
pub fn lp_norm(g: &ScalarField, p: f64) -> Result<f64> {
    if !(p >= 1.0) || p.is_nan() {
        return Err(LandauError::OutOfRange {
            field: "p",
            value: p,
            interval: "[1, inf)",
        });
    }
    let vals = g.values();
    let w = g.grid().cell_volume();
    if p == 1.0 {
        return Ok(tree_sum(0..vals.len(), &|i| vals[i].abs()) * w);
    }
    if p.is_infinite() {
        return Ok(tree_max(0..vals.len(), &|i| vals[i].abs()).max(0.0));
    }
    let s = tree_sum(0..vals.len(), &|i| vals[i].abs().powf(p)) * w;
    Ok(s.powf(1.0 / p))
}

/// Weighted moment `M_s(g) = Σ |g| ⟨v⟩^s dv³`.
pub fn weighted_moment(g: &ScalarField, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(LandauError::OutOfRange {
            field: "s",
            value: s,
            interval: "[0, inf)",
        });
    }
    let grid = *g.grid();
    let vals = g.values();
    if s == 0.0 {
        return Ok(tree_sum(0..vals.len(), &|i| vals[i].abs()) * grid.cell_volume());
    }
    let sum = tree_sum(0..vals.len(), &|i| {
        vals[i].abs() * japanese_bracket(grid.node(i)).powf(s)
    });
    Ok(sum * grid.cell_volume())
}

/// First derivative along `axis` at node `(i, j, k)`.
///
/// Central differences in the interior, second-order one-sided stencils on the
/// outermost layer. Exact for quadratics everywhere.
pub(crate) fn derivative_at(values: &[f64], grid: &VelocityGrid, idx: usize, axis: usize) -> f64 {
    let n = grid.n();
    let stride = match axis {
        0 => n * n,
        1 => n,
        _ => 1,
    };
    let pos = grid.ijk(idx)[axis];
    let h = grid.dv();
    if pos == 0 {
        (-3.0 * values[idx] + 4.0 * values[idx + stride] - values[idx + 2 * stride]) / (2.0 * h)
    } else if pos == n - 1 {
        (3.0 * values[idx] - 4.0 * values[idx - stride] + values[idx - 2 * stride]) / (2.0 * h)
    } else {
        (values[idx + stride] - values[idx - stride]) / (2.0 * h)
    }
}

/// Finite-difference gradient.
pub fn gradient(g: &ScalarField) -> VectorField {
    let grid = *g.grid();
    let vals = g.values();
    let comps = std::array::from_fn(|axis| {
        (0..grid.len())
            .map(|idx| derivative_at(vals, &grid, idx, axis))
            .collect()
    });
    VectorField { grid, comps }
}

/// Finite-difference Hessian (gradient of the gradient, symmetrised).
pub fn hessian(g: &ScalarField) -> MatrixField {
    let grid = *g.grid();
    let grad = gradient(g);
    let second = |i: usize, j: usize, idx: usize| derivative_at(grad.component(i), &grid, idx, j);
    MatrixField::from_fn(grid, |idx| {
        Sym3([
            second(0, 0, idx),
            second(1, 1, idx),
            second(2, 2, idx),
            0.5 * (second(0, 1, idx) + second(1, 0, idx)),
            0.5 * (second(0, 2, idx) + second(2, 0, idx)),
            0.5 * (second(1, 2, idx) + second(2, 1, idx)),
        ])
    })
}
