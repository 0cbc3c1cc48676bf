//! Nonlocal coefficients `ā = a∗f`, `b̄ = b∗f`, `c̄ = c∗f` by zero-padded FFT
//! convolution against the cell-averaged kernel tables.
//!
//! `out(v) = Σ_{v*} K_avg(v - v*) f(v*) dv³`, evaluated as a length-`2n`
//! circular convolution so that no wrap-around reaches the `n³` output block.
//! Two real outputs share one inverse transform (`x + iy` packing).

use rustfft::num_complex::Complex;

use crate::error::{LandauError, Result};
use crate::grid::{MatrixField, ScalarField, VectorField};
use crate::kernel::{Component, KernelTables};
use crate::sym3::slot;

/// Forward transform of a density, shared by every component convolution.
pub struct DensitySpectrum<'t> {
    tables: &'t KernelTables,
    data: Vec<Complex<f64>>,
}

impl<'t> DensitySpectrum<'t> {
    pub fn new(f: &ScalarField, tables: &'t KernelTables) -> Result<Self> {
        if !tables.matches(f.grid()) {
            return Err(LandauError::GridMismatch);
        }
        let min = f.min();
        if min < 0.0 {
            log::debug!("convolving a density with negative values (min {min:e})");
        }
        let data = forward_padded(f.values(), tables);
        Ok(Self { tables, data })
    }

    /// Convolves with one or two components at the cost of one inverse transform.
    fn convolve_pair(&self, first: Component, second: Option<Component>) -> (Vec<f64>, Option<Vec<f64>>) {
        let tables = self.tables;
        let k1 = tables.spectrum(first);
        let buf: Vec<Complex<f64>> = match second {
            Some(c2) => {
                let k2 = tables.spectrum(c2);
                self.data
                    .iter()
                    .zip(k1.iter().zip(k2))
                    .map(|(f, (a, b))| {
                        let fa: Complex<f64> = f * a;
                        let fb: Complex<f64> = f * b;
                        Complex::new(fa.re - fb.im, fa.im + fb.re)
                    })
                    .collect()
            }
            None => self.data.iter().zip(k1).map(|(f, a)| f * a).collect(),
        };
        extract_corner(buf, tables, second.is_some())
    }

    /// Convolves with a list of components, pairing them up.
    pub fn convolve_many(&self, comps: &[Component]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(comps.len());
        for chunk in comps.chunks(2) {
            let (a, b) = self.convolve_pair(chunk[0], chunk.get(1).copied());
            out.push(a);
            if let Some(b) = b {
                out.push(b);
            }
        }
        out
    }

    pub fn abar(&self) -> MatrixField {
        let comps: Vec<Component> = (0..6).map(Component::A).collect();
        let mut parts = self.convolve_many(&comps).into_iter();
        let arr = std::array::from_fn(|_| parts.next().expect("six components"));
        MatrixField::from_components(*self.tables.grid(), arr).expect("grid-sized output")
    }

    pub fn bbar(&self) -> VectorField {
        let comps: Vec<Component> = (0..3).map(Component::B).collect();
        let mut parts = self.convolve_many(&comps).into_iter();
        let arr = std::array::from_fn(|_| parts.next().expect("three components"));
        VectorField::from_components(*self.tables.grid(), arr).expect("grid-sized output")
    }

    pub fn cbar(&self) -> ScalarField {
        self.scalar(Component::C)
    }

    /// `(|·|^γ)_avg ∗ f`.
    pub fn power(&self) -> ScalarField {
        self.scalar(Component::Power)
    }

    fn scalar(&self, c: Component) -> ScalarField {
        let (v, _) = self.convolve_pair(c, None);
        ScalarField::from_values(*self.tables.grid(), v).expect("grid-sized output")
    }

    /// `ā` and `b̄` together, nine components in five inverse transforms.
    pub fn drift_diffusion(&self) -> (MatrixField, VectorField) {
        let comps: Vec<Component> = (0..6).map(Component::A).chain((0..3).map(Component::B)).collect();
        let mut parts = self.convolve_many(&comps).into_iter();
        let grid = *self.tables.grid();
        let a = std::array::from_fn(|_| parts.next().expect("component"));
        let b = std::array::from_fn(|_| parts.next().expect("component"));
        (
            MatrixField::from_components(grid, a).expect("grid-sized output"),
            VectorField::from_components(grid, b).expect("grid-sized output"),
        )
    }

    /// `c̄` and `(|·|^γ)∗f` in one inverse transform.
    pub fn cbar_and_power(&self) -> (ScalarField, ScalarField) {
        let (c, p) = self.convolve_pair(Component::C, Some(Component::Power));
        let grid = *self.tables.grid();
        (
            ScalarField::from_values(grid, c).expect("grid-sized output"),
            ScalarField::from_values(grid, p.expect("paired")).expect("grid-sized output"),
        )
    }
}

fn forward_padded(vals: &[f64], tables: &KernelTables) -> Vec<Complex<f64>> {
    let n = tables.grid().n();
    let fft = tables.fft();
    let m = fft.padded();
    let mut data = vec![Complex::new(0.0, 0.0); fft.volume()];
    for i in 0..n {
        for j in 0..n {
            let src = (i * n + j) * n;
            let dst = (i * m + j) * m;
            for k in 0..n {
                data[dst + k] = Complex::new(vals[src + k], 0.0);
            }
        }
    }
    fft.forward_corner(&mut data);
    data
}

/// Inverse transform, then the real (and optionally imaginary) part of the corner.
fn extract_corner(mut buf: Vec<Complex<f64>>, tables: &KernelTables, paired: bool) -> (Vec<f64>, Option<Vec<f64>>) {
    let fft = tables.fft();
    fft.inverse_corner(&mut buf);
    let grid = tables.grid();
    let n = grid.n();
    let m = fft.padded();
    let scale = grid.cell_volume() / fft.volume() as f64;
    let mut re = vec![0.0; grid.len()];
    let mut im = paired.then(|| vec![0.0; grid.len()]);
    for i in 0..n {
        for j in 0..n {
            let src = (i * m + j) * m;
            let dst = (i * n + j) * n;
            for k in 0..n {
                let z = buf[src + k];
                re[dst + k] = z.re * scale;
                if let Some(im) = im.as_mut() {
                    im[dst + k] = z.im * scale;
                }
            }
        }
    }
    (re, im)
}

/// `(a ∗ G)_i = Σ_j a_ij ∗ G_j` for a vector field `G` of either sign.
pub fn convolve_a_vector(g: &VectorField, tables: &KernelTables) -> Result<VectorField> {
    let grid = *g.grid();
    if !tables.matches(&grid) {
        return Err(LandauError::GridMismatch);
    }
    let spectra: Vec<Vec<Complex<f64>>> = (0..3).map(|j| forward_padded(g.component(j), tables)).collect();
    let row = |i: usize| -> Vec<Complex<f64>> {
        let ks: Vec<&[Complex<f64>]> = (0..3).map(|j| tables.spectrum(Component::A(slot(i, j)))).collect();
        (0..spectra[0].len())
            .map(|t| spectra[0][t] * ks[0][t] + spectra[1][t] * ks[1][t] + spectra[2][t] * ks[2][t])
            .collect()
    };
    let (r0, r1) = (row(0), row(1));
    let packed = r0
        .iter()
        .zip(&r1)
        .map(|(x, y)| Complex::new(x.re - y.im, x.im + y.re))
        .collect();
    let (c0, c1) = extract_corner(packed, tables, true);
    let (c2, _) = extract_corner(row(2), tables, false);
    VectorField::from_components(grid, [c0, c1.expect("paired"), c2])
}

pub fn convolve_a(f: &ScalarField, tables: &KernelTables) -> Result<MatrixField> {
    Ok(DensitySpectrum::new(f, tables)?.abar())
}

pub fn convolve_b(f: &ScalarField, tables: &KernelTables) -> Result<VectorField> {
    Ok(DensitySpectrum::new(f, tables)?.bbar())
}

pub fn convolve_c(f: &ScalarField, tables: &KernelTables) -> Result<ScalarField> {
    Ok(DensitySpectrum::new(f, tables)?.cbar())
}

/// Convolution with the cell-averaged interaction kernel `|z|^γ`.
pub fn convolve_power(f: &ScalarField, tables: &KernelTables) -> Result<ScalarField> {
    Ok(DensitySpectrum::new(f, tables)?.power())
}
