//! Numeric checks of the Hardy–Littlewood–Sobolev and Pitt inequalities.
//!
//! Fourier convention: `ĝ(ξ) = ∫ g(v) e^{-iξ·v} dv`, approximated by
//! `dv³ Σ_v g(v) e^{-iξ·v}` on the frequencies `ξ_m = π m / L`,
//! `m ∈ [-n/2, n/2)`. With the measure `(2π)^{-3} dξ`, Plancherel reads
//! `∫|g|² dv = (2π)^{-3} ∫|ĝ|² dξ`, and it holds exactly on the grid.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::convolution::convolve_power;
use crate::error::{LandauError, Result};
use crate::grid::{integrate, lp_norm, ScalarField, VelocityGrid};
use crate::kernel::{cell_average_power, Gamma, KernelTables};
use crate::reduce::tree_sum;

/// Exponent `6/(6+γ)` that balances the HLS inequality for `|z|^γ`.
pub fn hls_exponent(gamma: Gamma) -> f64 {
    6.0 / (6.0 + gamma.value())
}

/// `∫∫ |v−v*|^γ f(v) g(v*) / (‖f‖_r ‖g‖_r)` with `r = 6/(6+γ)`.
pub fn hls_ratio(f: &ScalarField, g: &ScalarField, tables: &KernelTables) -> Result<f64> {
    let gamma = tables.gamma();
    if gamma.is_critical() {
        return Err(LandauError::OutOfRange {
            field: "gamma",
            value: gamma.value(),
            interval: "(-2, 0)",
        });
    }
    if f.grid() != g.grid() {
        return Err(LandauError::GridMismatch);
    }
    let r = hls_exponent(gamma);
    let denom = lp_norm(f, r)? * lp_norm(g, r)?;
    if !(denom > 0.0) {
        return Err(LandauError::ZeroDenominator("hls_ratio"));
    }
    let conv = convolve_power(g, tables)?;
    Ok(integrate(&f.mul(&conv)) / denom)
}

/// Frequency `ξ_m` for an FFT-ordered index.
pub fn frequency(grid: &VelocityGrid, m: usize) -> f64 {
    let n = grid.n();
    let k = if m < n.div_ceil(2) { m as f64 } else { m as f64 - n as f64 };
    std::f64::consts::PI * k / grid.half_width()
}

/// Approximate continuous transform `ĝ(ξ_m)` in FFT index order.
pub fn fourier_transform(g: &ScalarField) -> Vec<Complex<f64>> {
    let grid = *g.grid();
    let n = grid.n();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut data: Vec<Complex<f64>> = g.values().iter().map(|&x| Complex::new(x, 0.0)).collect();
    let mut line = vec![Complex::new(0.0, 0.0); n];
    for (stride, outer) in [(1, [n * n, n]), (n, [n * n, 1]), (n * n, [n, 1])] {
        for a in 0..n {
            for b in 0..n {
                let base = a * outer[0] + b * outer[1];
                for (t, x) in line.iter_mut().enumerate() {
                    *x = data[base + t * stride];
                }
                fft.process(&mut line);
                for (t, x) in line.iter().enumerate() {
                    data[base + t * stride] = *x;
                }
            }
        }
    }
    // the samples start at v_0 = -L + dv/2, not at the origin
    let v0 = grid.coord(0);
    let w = grid.cell_volume();
    let phase: Vec<Complex<f64>> = (0..n)
        .map(|m| Complex::from_polar(1.0, -frequency(&grid, m) * v0))
        .collect();
    for (idx, z) in data.iter_mut().enumerate() {
        let [i, j, k] = grid.ijk(idx);
        *z *= phase[i] * phase[j] * phase[k] * w;
    }
    data
}

/// `∫ |v|^γ g² dv / ((2π)^{-3} ∫ |ξ|^{-γ} |ĝ|² dξ)`.
///
/// The weight `|v|^γ` is averaged over each cell.
pub fn pitt_ratio(g: &ScalarField, gamma: Gamma) -> Result<f64> {
    let grid = *g.grid();
    let h = grid.dv();
    let vals = g.values();
    let weights: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| cell_average_power(grid.node(i), h, gamma))
        .collect::<Result<_>>()?;
    let num = tree_sum(0..grid.len(), &|i| weights[i] * vals[i] * vals[i]) * grid.cell_volume();
    let spec = fourier_transform(g);
    let dxi = std::f64::consts::PI / grid.half_width();
    let measure = (dxi / (2.0 * std::f64::consts::PI)).powi(3);
    let freq: Vec<f64> = (0..grid.n()).map(|m| frequency(&grid, m)).collect();
    let den = tree_sum(0..spec.len(), &|i| {
        let [a, b, c] = grid.ijk(i);
        let xi2 = freq[a] * freq[a] + freq[b] * freq[b] + freq[c] * freq[c];
        if xi2 == 0.0 {
            0.0
        } else {
            xi2.powf(-0.5 * gamma.value()) * spec[i].norm_sqr()
        }
    }) * measure;
    if !(den > 0.0) {
        return Err(LandauError::ZeroDenominator("pitt_ratio"));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn transform_matches_gaussian() {
        let grid = VelocityGrid::new(32, 8.0).unwrap();
        let g = grid.sample(|v| (-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp());
        let spec = fourier_transform(&g);
        let peak = (2.0 * PI).powf(1.5);
        let mut worst = 0.0_f64;
        for (idx, z) in spec.iter().enumerate() {
            let [a, b, c] = grid.ijk(idx);
            let xi2: f64 = [a, b, c].iter().map(|&m| frequency(&grid, m).powi(2)).sum();
            let exact = peak * (-0.5 * xi2).exp();
            worst = worst.max((z - Complex::new(exact, 0.0)).norm() / peak);
        }
        assert!(worst < 1e-6, "{worst:e}");
    }

    #[test]
    fn plancherel_exact() {
        let grid = VelocityGrid::new(8, 3.0).unwrap();
        let g = grid.sample(|v| (v[0] - 0.3 * v[1]).sin() * (-v[2] * v[2]).exp());
        let spec = fourier_transform(&g);
        let dxi = PI / grid.half_width();
        let lhs = integrate(&g.mul(&g));
        let rhs: f64 = spec.iter().map(|z| z.norm_sqr()).sum::<f64>() * (dxi / (2.0 * PI)).powi(3);
        assert!((lhs - rhs).abs() < 1e-12 * lhs);
    }

    #[test]
    fn hls_exponent_values() {
        assert_eq!(hls_exponent(Gamma::new(-1.0).unwrap()), 1.2);
        assert_eq!(hls_exponent(Gamma::new(-1.5).unwrap()), 6.0 / 4.5);
    }
}
