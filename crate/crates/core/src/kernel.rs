//! Collision kernels `a_ij`, `b_i`, `c` for soft potentials and their
//! cell-averaged tables on the zero-padded difference lattice.
//!
//! For `γ ∈ [-2, 0)`:
//!
//! * `a(z) = |z|^{γ+2} (I - z⊗z/|z|²)`
//! * `b(z) = div a = -2 |z|^γ z`
//! * `c(z) = div b = -2 (γ+3) |z|^γ`
//!
//! `b` and `c` blow up at the origin, but every component is locally
//! integrable because `γ > -3`, so the tables store cell averages rather than
//! point samples. The interaction kernel `|z|^γ` is tabulated alongside.

use std::fmt;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{LandauError, Result};
use crate::fft::PaddedFft;
use crate::grid::VelocityGrid;
use crate::sym3::Sym3;

/// Interaction exponent `γ ∈ [-2, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Gamma(f64);

impl Gamma {
    pub fn new(gamma: f64) -> Result<Self> {
        if (-2.0..0.0).contains(&gamma) {
            Ok(Self(gamma))
        } else {
            Err(LandauError::OutOfRange {
                field: "gamma",
                value: gamma,
                interval: "[-2, 0)",
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `γ = -2`, the critical case.
    pub fn is_critical(self) -> bool {
        self.0 == -2.0
    }
}

impl TryFrom<f64> for Gamma {
    type Error = LandauError;
    fn try_from(v: f64) -> Result<Self> {
        Gamma::new(v)
    }
}

impl From<Gamma> for f64 {
    fn from(g: Gamma) -> f64 {
        g.0
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn norm(z: [f64; 3]) -> f64 {
    (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt()
}

fn nonzero(z: [f64; 3]) -> Result<f64> {
    let r = norm(z);
    if r > 0.0 && r.is_finite() {
        Ok(r)
    } else {
        Err(LandauError::SingularPoint)
    }
}

/// `P(z) = I - z⊗z / |z|²`.
pub fn projection_matrix(z: [f64; 3]) -> Result<Sym3> {
    let r = nonzero(z)?;
    let u = [z[0] / r, z[1] / r, z[2] / r];
    Ok(Sym3([
        1.0 - u[0] * u[0],
        1.0 - u[1] * u[1],
        1.0 - u[2] * u[2],
        -u[0] * u[1],
        -u[0] * u[2],
        -u[1] * u[2],
    ]))
}

pub fn kernel_a(z: [f64; 3], gamma: Gamma) -> Result<Sym3> {
    let r = nonzero(z)?;
    Ok(projection_matrix(z)?.scaled(r.powf(gamma.0 + 2.0)))
}

pub fn kernel_b(z: [f64; 3], gamma: Gamma) -> Result<[f64; 3]> {
    let r = nonzero(z)?;
    let s = -2.0 * r.powf(gamma.0);
    Ok([s * z[0], s * z[1], s * z[2]])
}

pub fn kernel_c(z: [f64; 3], gamma: Gamma) -> Result<f64> {
    let r = nonzero(z)?;
    Ok(-2.0 * (gamma.0 + 3.0) * r.powf(gamma.0))
}

/// `|z|^γ`.
pub fn kernel_power(z: [f64; 3], gamma: Gamma) -> Result<f64> {
    Ok(nonzero(z)?.powf(gamma.0))
}

/// Tabulated kernel components.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    /// `a_ij`, storage slot as in [`Sym3`].
    A(usize),
    B(usize),
    C,
    /// `|z|^γ`.
    Power,
}

impl Component {
    pub const COUNT: usize = 11;

    pub const ALL: [Component; 11] = [
        Component::A(0),
        Component::A(1),
        Component::A(2),
        Component::A(3),
        Component::A(4),
        Component::A(5),
        Component::B(0),
        Component::B(1),
        Component::B(2),
        Component::C,
        Component::Power,
    ];

    pub fn slot(self) -> usize {
        match self {
            Component::A(s) => s,
            Component::B(i) => 6 + i,
            Component::C => 9,
            Component::Power => 10,
        }
    }
}

/// All eleven components at `z ≠ 0`, plus a positive magnitude envelope
/// `|z|^γ + |z|^{γ+2}` used to scale quadrature tolerances.
fn components_with_envelope(z: [f64; 3], gamma: f64) -> [f64; 12] {
    let r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
    let pg = r2.powf(0.5 * gamma);
    let pa = pg * r2;
    [
        pa - pg * z[0] * z[0],
        pa - pg * z[1] * z[1],
        pa - pg * z[2] * z[2],
        -pg * z[0] * z[1],
        -pg * z[0] * z[2],
        -pg * z[1] * z[2],
        -2.0 * pg * z[0],
        -2.0 * pg * z[1],
        -2.0 * pg * z[2],
        -2.0 * (gamma + 3.0) * pg,
        pg,
        pg + pa,
    ]
}

const GAUSS4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GAUSS4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// Relative tolerance of the adaptive origin-cell quadrature.
pub const ADAPTIVE_REL_TOL: f64 = 1e-6;
/// Depth cap of the dyadic subdivision.
pub const ADAPTIVE_MAX_DEPTH: u32 = 40;
/// Bumped whenever the quadrature changes; part of the cache key.
pub const QUADRATURE_VERSION: u32 = 1;

/// 4×4×4 product Gauss rule over the cube `center ± h/2`. Returns integrals.
fn gauss_cube<const N: usize, F>(center: [f64; 3], h: f64, g: &F) -> [f64; N]
where
    F: Fn([f64; 3]) -> [f64; N],
{
    let half = 0.5 * h;
    let jac = half * half * half;
    let mut acc = [0.0; N];
    for (xi, wi) in GAUSS4_NODES.iter().zip(GAUSS4_WEIGHTS) {
        for (yj, wj) in GAUSS4_NODES.iter().zip(GAUSS4_WEIGHTS) {
            for (zk, wk) in GAUSS4_NODES.iter().zip(GAUSS4_WEIGHTS) {
                let p = [
                    center[0] + half * xi,
                    center[1] + half * yj,
                    center[2] + half * zk,
                ];
                let w = wi * wj * wk * jac;
                let vals = g(p);
                for (a, v) in acc.iter_mut().zip(vals) {
                    *a += w * v;
                }
            }
        }
    }
    acc
}

fn split_cube<const N: usize, F>(center: [f64; 3], h: f64, g: &F) -> ([[f64; 3]; 8], [[f64; N]; 8])
where
    F: Fn([f64; 3]) -> [f64; N],
{
    let q = 0.25 * h;
    let mut centers = [[0.0; 3]; 8];
    let mut parts = [[0.0; N]; 8];
    for (s, (c, part)) in centers.iter_mut().zip(parts.iter_mut()).enumerate() {
        *c = [
            center[0] + if s & 4 != 0 { q } else { -q },
            center[1] + if s & 2 != 0 { q } else { -q },
            center[2] + if s & 1 != 0 { q } else { -q },
        ];
        *part = gauss_cube(*c, 0.5 * h, g);
    }
    (centers, parts)
}

/// Adaptive dyadic refinement of a cube integral.
///
/// `coarse` is the Gauss estimate on the cube itself. The cube is accepted once
/// its eight children change every component by at most `abs_tol`; otherwise
/// each child is refined in turn. The last slot of the integrand is the
/// magnitude envelope, excluded from the error test.
fn adaptive_cube<const N: usize, F>(
    center: [f64; 3],
    h: f64,
    coarse: [f64; N],
    abs_tol: f64,
    depth: u32,
    g: &F,
) -> std::result::Result<[f64; N], u32>
where
    F: Fn([f64; 3]) -> [f64; N],
{
    let (centers, parts) = split_cube(center, h, g);
    let mut fine = [0.0; N];
    for part in &parts {
        for (f, p) in fine.iter_mut().zip(part) {
            *f += p;
        }
    }
    let change = fine[..N - 1]
        .iter()
        .zip(&coarse[..N - 1])
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    if change <= abs_tol {
        return Ok(fine);
    }
    if depth >= ADAPTIVE_MAX_DEPTH {
        return Err(depth);
    }
    let mut total = [0.0; N];
    for (c, part) in centers.iter().zip(parts) {
        let refined = adaptive_cube(*c, 0.5 * h, part, abs_tol, depth + 1, g)?;
        for (t, r) in total.iter_mut().zip(refined) {
            *t += r;
        }
    }
    Ok(total)
}

/// Cell average over the cube of side `h` centred at `center`, for all
/// eleven components. Cubes whose closure touches the origin (or lies within
/// one cell of it) use adaptive refinement; all others the fixed Gauss rule.
pub(crate) fn cell_average(center: [f64; 3], h: f64, gamma: Gamma, offset: [i64; 3]) -> Result<[f64; 11]> {
    let g = |z: [f64; 3]| components_with_envelope(z, gamma.0);
    let near_origin = center.iter().all(|c| c.abs() <= 1.5 * h * (1.0 + 1e-12));
    let integral = if near_origin {
        let coarse = gauss_cube(center, h, &g);
        let scale = coarse[11].abs();
        adaptive_cube(center, h, coarse, ADAPTIVE_REL_TOL * scale, 0, &g).map_err(|depth| {
            LandauError::QuadratureDiverged { depth, offset }
        })?
    } else {
        gauss_cube(center, h, &g)
    };
    let vol = h * h * h;
    Ok(std::array::from_fn(|c| integral[c] / vol))
}

/// Cell average of `|z|^γ` over the lattice cell of side `h` centred at
/// `center` (which may touch the singular point at a corner).
pub fn cell_average_power(center: [f64; 3], h: f64, gamma: Gamma) -> Result<f64> {
    let g = |z: [f64; 3]| {
        let p = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).powf(0.5 * gamma.0);
        [p, p]
    };
    let touches = center.iter().all(|c| c.abs() <= 1.5 * h * (1.0 + 1e-12));
    let integral = if touches {
        let coarse = gauss_cube(center, h, &g);
        let tol = ADAPTIVE_REL_TOL * coarse[1].abs();
        // error test runs on slot 0 only; slot 1 is the envelope copy
        adaptive_cube(center, h, coarse, tol, 0, &g).map_err(|depth| {
            LandauError::QuadratureDiverged { depth, offset: [0; 3] }
        })?
    } else {
        gauss_cube(center, h, &g)
    };
    Ok(integral[0] / (h * h * h))
}

/// Cell-averaged kernels on the `(2n)³` difference lattice and their
/// discrete Fourier transforms.
///
/// Lattice index `m` along an axis stands for the offset `k = m` when
/// `m < n` and `k = m - 2n` otherwise, i.e. `z = k dv` with
/// `k ∈ [-n, n-1]`. This is the wrap-around layout that turns a circular
/// convolution of length `2n` into the linear convolution on `n` nodes.
pub struct KernelTables {
    gamma: Gamma,
    grid: VelocityGrid,
    samples: Vec<Vec<f64>>,
    spectra: Vec<Vec<Complex<f64>>>,
    fft: Arc<PaddedFft>,
    point: OnceLock<Box<KernelTables>>,
}

impl fmt::Debug for KernelTables {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelTables")
            .field("gamma", &self.gamma)
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

impl KernelTables {
    /// Builds all cell-averaged tables and their transforms.
    pub fn build(grid: VelocityGrid, gamma: Gamma) -> Result<Self> {
        let m = 2 * grid.n();
        let h = grid.dv();
        let total = m * m * m;
        let cells: Vec<[f64; 11]> = (0..total)
            .into_par_iter()
            .map(|lin| {
                let k = padded_offset(lin, grid.n());
                let center = [k[0] as f64 * h, k[1] as f64 * h, k[2] as f64 * h];
                cell_average(center, h, gamma, k)
            })
            .collect::<Result<_>>()?;
        let samples: Vec<Vec<f64>> = (0..Component::COUNT)
            .map(|c| cells.iter().map(|cell| cell[c]).collect())
            .collect();
        Self::from_samples(grid, gamma, samples)
    }

    /// Rebuilds tables from raw component-major samples (e.g. a cache file).
    pub fn from_samples(grid: VelocityGrid, gamma: Gamma, samples: Vec<Vec<f64>>) -> Result<Self> {
        let m = 2 * grid.n();
        if samples.len() != Component::COUNT || samples.iter().any(|s| s.len() != m * m * m) {
            return Err(LandauError::LengthMismatch {
                expected: Component::COUNT * m * m * m,
                got: samples.iter().map(Vec::len).sum(),
            });
        }
        let fft = Arc::new(PaddedFft::new(grid.n()));
        let spectra = samples
            .iter()
            .map(|s| {
                let mut buf: Vec<Complex<f64>> = s.iter().map(|&x| Complex::new(x, 0.0)).collect();
                fft.forward_full(&mut buf);
                buf
            })
            .collect();
        Ok(Self {
            gamma,
            grid,
            samples,
            spectra,
            fft,
            point: OnceLock::new(),
        })
    }

    /// Point samples of every component at the nonzero offsets, zero at the
    /// origin. Built on first use.
    pub fn point_sampled(&self) -> &KernelTables {
        self.point.get_or_init(|| {
            let n = self.grid.n();
            let h = self.grid.dv();
            let total = self.padded_len().pow(3);
            let cells: Vec<[f64; 12]> = (0..total)
                .into_par_iter()
                .map(|lin| {
                    let k = padded_offset(lin, n);
                    if k == [0; 3] {
                        [0.0; 12]
                    } else {
                        components_with_envelope([k[0] as f64 * h, k[1] as f64 * h, k[2] as f64 * h], self.gamma.0)
                    }
                })
                .collect();
            let samples = (0..Component::COUNT).map(|c| cells.iter().map(|x| x[c]).collect()).collect();
            Box::new(Self::from_samples(self.grid, self.gamma, samples).expect("padded lattice"))
        })
    }

    pub fn gamma(&self) -> Gamma {
        self.gamma
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn padded_len(&self) -> usize {
        2 * self.grid.n()
    }

    /// Raw samples of one component on the padded lattice.
    pub fn samples(&self, c: Component) -> &[f64] {
        &self.samples[c.slot()]
    }

    pub fn all_samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn spectrum(&self, c: Component) -> &[Complex<f64>] {
        &self.spectra[c.slot()]
    }

    pub(crate) fn fft(&self) -> &PaddedFft {
        &self.fft
    }

    /// Linear padded index of the integer offset `k` (each entry in `[-n, n-1]`).
    pub fn offset_index(&self, k: [i64; 3]) -> usize {
        offset_index(k, self.grid.n())
    }

    /// Cell-averaged value of component `c` at offset `k dv`.
    pub fn at(&self, c: Component, k: [i64; 3]) -> f64 {
        self.samples[c.slot()][self.offset_index(k)]
    }

    /// Cell-averaged `a` at offset `k dv`.
    pub fn a_at(&self, k: [i64; 3]) -> Sym3 {
        let lin = self.offset_index(k);
        Sym3(std::array::from_fn(|s| self.samples[s][lin]))
    }

    pub fn matches(&self, grid: &VelocityGrid) -> bool {
        self.grid == *grid
    }
}

pub(crate) fn padded_offset(lin: usize, n: usize) -> [i64; 3] {
    let m = 2 * n;
    let wrap = |x: usize| if x < n { x as i64 } else { x as i64 - m as i64 };
    [wrap(lin / (m * m)), wrap((lin / m) % m), wrap(lin % m)]
}

pub(crate) fn offset_index(k: [i64; 3], n: usize) -> usize {
    let m = 2 * n as i64;
    let wrap = |x: i64| (if x < 0 { x + m } else { x }) as usize;
    let m = m as usize;
    (wrap(k[0]) * m + wrap(k[1])) * m + wrap(k[2])
}
