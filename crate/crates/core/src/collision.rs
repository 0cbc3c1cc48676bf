//! Landau collision operator in conservative flux form, and the weak form.
//!
//! `Q(f) = ∇·(ā ∇f − b̄ f)` with fluxes on the staggered faces between
//! neighbouring nodes and zero flux through the outer faces of the box.
//! Summing `Q` over the lattice telescopes to zero, so mass is conserved
//! exactly; momentum and energy are conserved only to second order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convolution::DensitySpectrum;
use crate::error::{LandauError, Result};
use crate::grid::{gradient, hessian, MatrixField, ScalarField, VectorField, VelocityGrid};
use crate::kernel::{kernel_a, kernel_b, padded_offset, Gamma, KernelTables};
use crate::reduce::tree_sum;
use crate::sym3::{slot, Sym3};

/// Source of the drift coefficient on faces.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftForm {
    /// Face average of the convolved `b̄ = b ∗ f`.
    Table,
    /// `b̄_i = Σ_j ∂_j ā_ij` by central differences at the nodes, which equals
    /// `a ∗ ∇f` away from the box edge.
    #[default]
    Divergence,
}

impl DriftForm {
    /// `ā` and, for the table form, `b̄`.
    pub fn coefficients(self, spectrum: &DensitySpectrum<'_>) -> (MatrixField, Option<VectorField>) {
        match self {
            DriftForm::Table => {
                let (a, b) = spectrum.drift_diffusion();
                (a, Some(b))
            }
            DriftForm::Divergence => (spectrum.abar(), None),
        }
    }
}

/// Difference used for the tangential derivatives `∂_j f`, `j ≠ i`, on faces
/// normal to `e_i`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossStencil {
    /// Average of the nodal central differences on both sides of the face.
    #[default]
    Central,
    /// One-sided differences picked by the sign of `ā_ij`; nonnegative
    /// off-diagonal weights wherever `ā` is diagonally dominant.
    Monotone,
}

/// Face-centred flux `F_i = Σ_j ā_ij ∂_j f − b̄_i f`.
///
/// `faces[i][p]` is the flux through the face between node `p` and
/// `p + e_i`; it is zero for nodes on the upper boundary along axis `i`.
#[derive(Clone, Debug)]
pub struct FluxField {
    grid: VelocityGrid,
    faces: [Vec<f64>; 3],
}

impl FluxField {
    /// Assembles face fluxes; without `bbar` the drift is the discrete
    /// divergence of `ā`.
    pub fn assemble(f: &ScalarField, abar: &MatrixField, bbar: Option<&VectorField>, stencil: CrossStencil) -> Self {
        let grid = *f.grid();
        let n = grid.n();
        let h = grid.dv();
        let fv = f.values();
        let grad = tangential_gradient(f);
        let derived;
        let bbar = match bbar {
            Some(b) => b,
            None => {
                derived = divergence_of(abar);
                &derived
            }
        };
        let strides = [n * n, n, 1];
        // neighbour value, mirrored at the box edge
        let shifted = |p: usize, j: usize, up: bool| -> f64 {
            let i = grid.ijk(p)[j];
            match (up, i) {
                (true, i) if i + 1 < n => fv[p + strides[j]],
                (false, i) if i > 0 => fv[p - strides[j]],
                _ => fv[p],
            }
        };
        let faces = std::array::from_fn(|axis| {
            let stride = strides[axis];
            (0..grid.len())
                .into_par_iter()
                .map(|p| {
                    if grid.ijk(p)[axis] == n - 1 {
                        return 0.0;
                    }
                    let q = p + stride;
                    let face_a = |j: usize| {
                        let s = slot(axis, j);
                        0.5 * (abar.component(s)[p] + abar.component(s)[q])
                    };
                    let b = 0.5 * (bbar.component(axis)[p] + bbar.component(axis)[q]);
                    let mut flux = face_a(axis) * (fv[q] - fv[p]) / h - b * 0.5 * (fv[p] + fv[q]);
                    for j in (0..3).filter(|&j| j != axis) {
                        let aj = face_a(j);
                        let g = match stencil {
                            CrossStencil::Central => 0.5 * (grad.component(j)[p] + grad.component(j)[q]),
                            CrossStencil::Monotone if aj > 0.0 => {
                                0.5 * ((shifted(q, j, true) - fv[q]) + (fv[p] - shifted(p, j, false))) / h
                            }
                            CrossStencil::Monotone => {
                                0.5 * ((fv[q] - shifted(q, j, false)) + (shifted(p, j, true) - fv[p])) / h
                            }
                        };
                        flux += aj * g;
                    }
                    flux
                })
                .collect()
        });
        Self { grid, faces }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    /// Flux through the face between `p` and `p + e_axis`.
    pub fn face(&self, axis: usize, p: usize) -> f64 {
        self.faces[axis][p]
    }

    /// Discrete divergence at every node.
    pub fn divergence(&self) -> ScalarField {
        let grid = self.grid;
        let n = grid.n();
        let h = grid.dv();
        let values = (0..grid.len())
            .into_par_iter()
            .map(|p| {
                let ijk = grid.ijk(p);
                let mut acc = 0.0;
                for (axis, stride) in [n * n, n, 1].into_iter().enumerate() {
                    let upper = self.faces[axis][p];
                    let lower = if ijk[axis] == 0 {
                        0.0
                    } else {
                        self.faces[axis][p - stride]
                    };
                    acc += (upper - lower) / h;
                }
                acc
            })
            .collect();
        ScalarField::from_values(grid, values).expect("grid-sized output")
    }
}

/// Node-wise `Σ_j ∂_j ā_ij`.
pub fn divergence_of(abar: &MatrixField) -> VectorField {
    let grid = *abar.grid();
    let grads: Vec<VectorField> = (0..6)
        .map(|s| gradient(&ScalarField::from_values(grid, abar.component(s).to_vec()).expect("grid-sized")))
        .collect();
    let comps = std::array::from_fn(|i| {
        (0..grid.len())
            .map(|p| (0..3).map(|j| grads[slot(i, j)].component(j)[p]).sum())
            .collect()
    });
    VectorField::from_components(grid, comps).expect("grid-sized output")
}

/// Central differences inside, first-order one-sided on the outermost layer.
///
/// Second-order one-sided stencils extrapolate badly across the steep tails
/// that reach the box edge and inject spurious cross-diffusion there.
fn tangential_gradient(f: &ScalarField) -> VectorField {
    let grid = *f.grid();
    let n = grid.n();
    let h = grid.dv();
    let v = f.values();
    let comps = std::array::from_fn(|axis| {
        let stride = [n * n, n, 1][axis];
        (0..grid.len())
            .into_par_iter()
            .map(|p| match grid.ijk(p)[axis] {
                0 => (v[p + stride] - v[p]) / h,
                i if i == n - 1 => (v[p] - v[p - stride]) / h,
                _ => (v[p + stride] - v[p - stride]) / (2.0 * h),
            })
            .collect()
    });
    VectorField::from_components(grid, comps).expect("grid-sized output")
}

/// Discretisation choices for the flux.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FluxScheme {
    pub drift: DriftForm,
    pub cross: CrossStencil,
}

/// `Q(f)` for precomputed coefficients.
pub fn collision_from_coefficients(
    f: &ScalarField,
    abar: &MatrixField,
    bbar: Option<&VectorField>,
    cross: CrossStencil,
) -> ScalarField {
    FluxField::assemble(f, abar, bbar, cross).divergence()
}

/// `Q(f, f)` together with the `ā` it was built from.
pub fn collision_with_diffusion(
    f: &ScalarField,
    tables: &KernelTables,
    scheme: FluxScheme,
) -> Result<(ScalarField, MatrixField)> {
    let spectrum = DensitySpectrum::new(f, tables)?;
    let (abar, bbar) = scheme.drift.coefficients(&spectrum);
    let q = collision_from_coefficients(f, &abar, bbar.as_ref(), scheme.cross);
    Ok((q, abar))
}

/// `Q(f, f)` in conservative flux form with the default scheme.
pub fn collision_operator(f: &ScalarField, tables: &KernelTables) -> Result<ScalarField> {
    Ok(collision_with_diffusion(f, tables, FluxScheme::default())?.0)
}

/// Value, gradient and Hessian of a test function at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TestFunctionJet {
    pub value: f64,
    pub grad: [f64; 3],
    pub hess: Sym3,
}

/// `a(z) : ∇²φ` with both indices summed.
fn contract(a: &Sym3, h: &Sym3) -> f64 {
    a.0[0] * h.0[0]
        + a.0[1] * h.0[1]
        + a.0[2] * h.0[2]
        + 2.0 * (a.0[3] * h.0[3] + a.0[4] * h.0[4] + a.0[5] * h.0[5])
}

/// `Lφ(v, v*) = ½ a(v−v*) : ∇²φ(v) + b(v−v*) · ∇φ(v)`.
pub fn weak_form_operator(phi: &TestFunctionJet, v: [f64; 3], v_star: [f64; 3], gamma: Gamma) -> Result<f64> {
    let z = [v[0] - v_star[0], v[1] - v_star[1], v[2] - v_star[2]];
    if z == [0.0; 3] {
        return Err(LandauError::SingularPoint);
    }
    let a = kernel_a(z, gamma)?;
    let b = kernel_b(z, gamma)?;
    Ok(0.5 * contract(&a, &phi.hess) + b[0] * phi.grad[0] + b[1] * phi.grad[1] + b[2] * phi.grad[2])
}

/// `∫∫ f(v) f(v*) Lφ(v, v*) dv dv*` as a double Riemann sum over node pairs,
/// skipping `v = v*`. Derivatives of `φ` come from finite differences of the
/// sampled field. Cost is `O(N²)`; intended for `n ≤ 16`.
///
/// With `Q = ∇·(ā∇f − b̄f)` this pairing is `½ ∫ Q φ`.
pub fn weak_form_rhs(f: &ScalarField, phi: &ScalarField, gamma: Gamma) -> Result<f64> {
    let grid = *f.grid();
    if phi.grid() != f.grid() {
        return Err(LandauError::GridMismatch);
    }
    let n = grid.n();
    let h = grid.dv();
    let m = 2 * n;
    // pointwise kernels on every nonzero lattice offset, padded layout
    let table: Vec<[f64; 9]> = (0..m * m * m)
        .into_par_iter()
        .map(|lin| {
            let k = padded_offset(lin, n);
            if k == [0; 3] {
                return [0.0; 9];
            }
            let z = [k[0] as f64 * h, k[1] as f64 * h, k[2] as f64 * h];
            let a = kernel_a(z, gamma).expect("z != 0");
            let b = kernel_b(z, gamma).expect("z != 0");
            [a.0[0], a.0[1], a.0[2], a.0[3], a.0[4], a.0[5], b[0], b[1], b[2]]
        })
        .collect();
    let grad = gradient(phi);
    let hess = hessian(phi);
    let fv = f.values();
    let total = tree_sum(0..grid.len(), &|p| {
        if fv[p] == 0.0 {
            return 0.0;
        }
        let jet_g = grad.at(p);
        let jet_h = hess.at(p);
        let [pi, pj, pk] = grid.ijk(p);
        let mut acc = 0.0;
        for q in 0..grid.len() {
            if q == p || fv[q] == 0.0 {
                continue;
            }
            let [qi, qj, qk] = grid.ijk(q);
            let k = [pi as i64 - qi as i64, pj as i64 - qj as i64, pk as i64 - qk as i64];
            let t = &table[crate::kernel::offset_index(k, n)];
            let a = Sym3([t[0], t[1], t[2], t[3], t[4], t[5]]);
            let l = 0.5 * contract(&a, &jet_h) + t[6] * jet_g[0] + t[7] * jet_g[1] + t[8] * jet_g[2];
            acc += fv[q] * l;
        }
        fv[p] * acc
    });
    let w = grid.cell_volume();
    Ok(total * w * w)
}
