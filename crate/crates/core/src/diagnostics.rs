//! Functionals tracked along a trajectory: conserved quantities, entropy and
//! its production, moments, norms, the interaction functional, `J_γ`, the
//! coercivity constant of `ā`, and the chain-rule residual.

use serde::{Deserialize, Serialize};

use crate::convolution::{convolve_a_vector, DensitySpectrum};
use crate::error::{LandauError, Result};
use crate::grid::{gradient, integrate, japanese_bracket, lp_norm, weighted_moment, MatrixField, ScalarField};
use crate::kernel::{Gamma, KernelTables};
use crate::reduce::{tree_max, tree_sum};

/// How the entropy production is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductionMode {
    /// Not evaluated.
    Off,
    /// `O(N²)` pair sum; each term is a PSD quadratic form, so `D ≥ 0` exactly.
    Pair,
    /// Algebraically equal expansion through three convolutions.
    Spectral,
    /// Pair sum for `n ≤ 16`, spectral otherwise.
    #[default]
    Auto,
}

/// Values of every tracked functional at time `t`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
    pub entropy: f64,
    /// `None` when production was not evaluated.
    pub entropy_production: Option<f64>,
    /// `(s, M_s)` pairs.
    pub moments: Vec<(f64, f64)>,
    /// `(p, ‖f‖_p)` pairs.
    pub lp_norms: Vec<(f64, f64)>,
    /// `M_q` with `q = -3(γ-s)(2-ε)/ε`.
    pub weighted_q: f64,
    pub interaction: f64,
    pub j_gamma: f64,
    pub coercivity: f64,
    /// Mass added by clipping negative values since `t = 0`.
    pub clipped_mass: f64,
    /// Mass outside the ball `|v| ≤ 0.9 L`.
    pub tail_mass: f64,
}

impl DiagnosticsRecord {
    pub fn moment(&self, s: f64) -> Option<f64> {
        self.moments.iter().find(|(o, _)| *o == s).map(|&(_, m)| m)
    }

    pub fn lp_norm(&self, p: f64) -> Option<f64> {
        self.lp_norms.iter().find(|(o, _)| *o == p).map(|&(_, m)| m)
    }
}

/// `(m, momentum, e)` with `e = ½ ∫ f |v|²`.
pub fn conserved_quantities(f: &ScalarField) -> (f64, [f64; 3], f64) {
    let grid = *f.grid();
    let vals = f.values();
    let w = grid.cell_volume();
    let mass = integrate(f);
    let momentum = std::array::from_fn(|a| tree_sum(0..vals.len(), &|i| vals[i] * grid.node(i)[a]) * w);
    let energy = 0.5
        * tree_sum(0..vals.len(), &|i| {
            let v = grid.node(i);
            vals[i] * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
        })
        * w;
    (mass, momentum, energy)
}

fn x_log_x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// `H(f) = Σ f log f dv³` with `0 log 0 = 0`; negative values count as zero.
pub fn entropy(f: &ScalarField) -> f64 {
    let vals = f.values();
    tree_sum(0..vals.len(), &|i| x_log_x(vals[i])) * f.grid().cell_volume()
}

/// Mass outside the ball of radius `0.9 L`.
pub fn tail_mass(f: &ScalarField) -> f64 {
    let grid = *f.grid();
    let r2 = (0.9 * grid.half_width()).powi(2);
    let vals = f.values();
    tree_sum(0..vals.len(), &|i| {
        let v = grid.node(i);
        if v[0] * v[0] + v[1] * v[1] + v[2] * v[2] > r2 {
            vals[i]
        } else {
            0.0
        }
    }) * grid.cell_volume()
}

/// `∇√f = ½√f ∇log f`, falling back to differences of `√f` where the
/// stencil touches `f = 0`. Exact on (shifted) Maxwellians.
fn sqrt_gradient(f: &ScalarField) -> (ScalarField, crate::grid::VectorField) {
    let root = f.map(|x| x.max(0.0).sqrt());
    let plain = gradient(&root);
    let logs = gradient(&f.map(|x| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY }));
    let rv = root.values();
    let comps = std::array::from_fn(|a| {
        plain
            .component(a)
            .iter()
            .zip(logs.component(a))
            .zip(rv)
            .map(|((&p, &l), &r)| {
                let g = 0.5 * r * l;
                if g.is_finite() {
                    g
                } else {
                    p
                }
            })
            .collect()
    });
    let g = crate::grid::VectorField::from_components(*f.grid(), comps).expect("same grid");
    (root, g)
}

/// Entropy production by the pair sum
/// `D = 2 Σ_{v≠v*} a(v−v*) w·w dv⁶`, `w = √f* ∇√f(v) − √f (∇√f)(v*)`,
/// with the point-sampled kernel. Vanishes on Maxwellians up to roundoff.
pub fn entropy_production(f: &ScalarField, tables: &KernelTables) -> Result<f64> {
    let grid = *f.grid();
    if !tables.matches(&grid) {
        return Err(LandauError::GridMismatch);
    }
    let tables = tables.point_sampled();
    let (root, g) = sqrt_gradient(f);
    let rv = root.values();
    let n = grid.n();
    let a_slots: Vec<&[f64]> = (0..6)
        .map(|s| tables.samples(crate::kernel::Component::A(s)))
        .collect();
    let total = tree_sum(0..grid.len(), &|p| {
        let gp = g.at(p);
        let sp = rv[p];
        let [pi, pj, pk] = grid.ijk(p);
        let mut acc = 0.0;
        for q in 0..grid.len() {
            if q == p {
                continue;
            }
            let sq = rv[q];
            let gq = g.at(q);
            let w = [sq * gp[0] - sp * gq[0], sq * gp[1] - sp * gq[1], sq * gp[2] - sp * gq[2]];
            if w == [0.0; 3] {
                continue;
            }
            let [qi, qj, qk] = grid.ijk(q);
            let k = [pi as i64 - qi as i64, pj as i64 - qj as i64, pk as i64 - qk as i64];
            let lin = crate::kernel::offset_index(k, n);
            let a = crate::sym3::Sym3(std::array::from_fn(|s| a_slots[s][lin]));
            acc += a.quad_form(w);
        }
        acc
    });
    let w = grid.cell_volume();
    Ok((2.0 * total * w * w).max(0.0))
}

/// Entropy production through the expansion
/// `D = 4 [∫ ∇√f·ā∇√f − ∫ G·(a∗G)]`, `G = √f ∇√f`.
///
/// Equal to [`entropy_production`] up to roundoff; the difference of two
/// nearly equal terms can dip below zero close to equilibrium, so the result
/// is clamped at zero.
pub fn entropy_production_spectral(f: &ScalarField, tables: &KernelTables) -> Result<f64> {
    let grid = *f.grid();
    if !tables.matches(&grid) {
        return Err(LandauError::GridMismatch);
    }
    let tables = tables.point_sampled();
    let abar = DensitySpectrum::new(f, tables)?.abar();
    let (root, g) = sqrt_gradient(f);
    let rv = root.values();
    let big_g = crate::grid::VectorField::from_components(
        grid,
        std::array::from_fn(|a| g.component(a).iter().zip(rv).map(|(x, r)| x * r).collect()),
    )?;
    let conv = convolve_a_vector(&big_g, tables)?;
    let w = grid.cell_volume();
    let first = tree_sum(0..grid.len(), &|p| abar.at(p).quad_form(g.at(p))) * w;
    let cross = tree_sum(0..grid.len(), &|p| {
        let gp = big_g.at(p);
        let cp = conv.at(p);
        gp[0] * cp[0] + gp[1] * cp[1] + gp[2] * cp[2]
    }) * w;
    Ok((4.0 * (first - cross)).max(0.0))
}

/// `∫∫ |v−v*|^γ f(v) f(v*)` through the cell-averaged `|z|^γ` convolution.
pub fn interaction_functional(f: &ScalarField, tables: &KernelTables) -> Result<f64> {
    let power = DensitySpectrum::new(f, tables)?.power();
    Ok(interaction_from_potential(f, &power))
}

fn interaction_from_potential(f: &ScalarField, potential: &ScalarField) -> f64 {
    let fv = f.values();
    let pv = potential.values();
    tree_sum(0..fv.len(), &|i| fv[i] * pv[i]) * f.grid().cell_volume()
}

/// `J_γ(f) = max_v (|·|^γ_avg ∗ f)(v)`.
pub fn j_gamma(f: &ScalarField, tables: &KernelTables) -> Result<f64> {
    let power = DensitySpectrum::new(f, tables)?.power();
    Ok(max_or_zero(&power))
}

fn max_or_zero(g: &ScalarField) -> f64 {
    let v = g.values();
    tree_max(0..v.len(), &|i| v[i]).max(0.0)
}

/// `min_v λ_min(ā(v)) / ⟨v⟩^γ`.
pub fn coercivity_constant(abar: &MatrixField, gamma: Gamma) -> f64 {
    let grid = *abar.grid();
    let g = gamma.value();
    -tree_max(0..grid.len(), &|p| {
        -abar.at(p).min_eigenvalue() / japanese_bracket(grid.node(p)).powf(g)
    })
}

/// Test nonlinearities for the chain rule
/// `d/dt ∫β(f) = −∫ ā∇f·∇f β''(f) − ∫ c̄ φ_β(f)`, `φ_β' = x β''`, `φ_β(0) = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Beta {
    /// `β = (x+1) log(x+1)`, `φ_β = x − log(x+1)`.
    XLogXShift,
    /// `β = x^p / p`, `φ_β = (p−1)/p · x^p`.
    Power(f64),
}

impl Beta {
    /// Parses `xlogx_shift` or `power_<p>`.
    pub fn parse(id: &str) -> Result<Self> {
        if id == "xlogx_shift" {
            return Ok(Beta::XLogXShift);
        }
        if let Some(p) = id.strip_prefix("power_") {
            if let Ok(p) = p.parse::<f64>() {
                if p > 1.0 {
                    return Ok(Beta::Power(p));
                }
            }
        }
        Err(LandauError::UnknownBeta(id.to_string()))
    }

    pub fn beta(self, x: f64) -> f64 {
        match self {
            Beta::XLogXShift => (x + 1.0) * x.ln_1p(),
            Beta::Power(p) => x.powf(p) / p,
        }
    }

    pub fn beta_second(self, x: f64) -> f64 {
        match self {
            Beta::XLogXShift => 1.0 / (1.0 + x),
            Beta::Power(p) => (p - 1.0) * x.powf(p - 2.0),
        }
    }

    pub fn phi(self, x: f64) -> f64 {
        match self {
            Beta::XLogXShift => x - x.ln_1p(),
            Beta::Power(p) => (p - 1.0) / p * x.powf(p),
        }
    }
}

/// Terms of the chain-rule identity at the middle of a three-snapshot window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainRuleTerms {
    /// Centred finite difference of `∫β(f)`.
    pub time_derivative: f64,
    /// `∫ ā∇f·∇f β''(f)`.
    pub dissipation: f64,
    /// `∫ c̄ φ_β(f)`.
    pub cbar_term: f64,
    /// `|sum of the three| / max |term|`.
    pub residual: f64,
}

/// Three-point derivative at the middle node of non-uniformly spaced samples.
pub fn centered_derivative(t: [f64; 3], y: [f64; 3]) -> f64 {
    let h1 = t[1] - t[0];
    let h2 = t[2] - t[1];
    -h2 / (h1 * (h1 + h2)) * y[0] + (h2 - h1) / (h1 * h2) * y[1] + h1 / (h2 * (h1 + h2)) * y[2]
}

/// Chain-rule residual on three consecutive snapshots `(t, f_t)`.
pub fn chain_rule_residual(window: [(f64, &ScalarField); 3], tables: &KernelTables, beta: Beta) -> Result<ChainRuleTerms> {
    if !(window[0].0 < window[1].0 && window[1].0 < window[2].0) {
        return Err(LandauError::NonMonotoneTime(1));
    }
    let integral = |f: &ScalarField| integrate(&f.map(|x| beta.beta(x.max(0.0))));
    let times = [window[0].0, window[1].0, window[2].0];
    let values = [integral(window[0].1), integral(window[1].1), integral(window[2].1)];
    let time_derivative = centered_derivative(times, values);

    let f = window[1].1;
    let grid = *f.grid();
    let spectrum = DensitySpectrum::new(f, tables)?;
    let abar = spectrum.abar();
    let cbar = spectrum.cbar();
    let g = gradient(f);
    let fv = f.values();
    let cv = cbar.values();
    let w = grid.cell_volume();
    let dissipation = tree_sum(0..grid.len(), &|p| {
        abar.at(p).quad_form(g.at(p)) * beta.beta_second(fv[p].max(0.0))
    }) * w;
    let cbar_term = tree_sum(0..grid.len(), &|p| cv[p] * beta.phi(fv[p].max(0.0))) * w;
    let sum = time_derivative + dissipation + cbar_term;
    let scale = time_derivative.abs().max(dissipation.abs()).max(cbar_term.abs());
    let residual = if scale > 0.0 { sum.abs() / scale } else { 0.0 };
    Ok(ChainRuleTerms {
        time_derivative,
        dissipation,
        cbar_term,
        residual,
    })
}

/// Settings shared by every record of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsPlan {
    pub gamma: Gamma,
    pub moment_orders: Vec<f64>,
    pub lp_exponents: Vec<f64>,
    pub q: f64,
    pub production: ProductionMode,
}

impl DiagnosticsPlan {
    /// Evaluates a full record for `f` given its spectrum and `ā`.
    pub fn evaluate(
        &self,
        t: f64,
        f: &ScalarField,
        spectrum: &DensitySpectrum<'_>,
        abar: &MatrixField,
        tables: &KernelTables,
        clipped_mass: f64,
    ) -> Result<DiagnosticsRecord> {
        let (mass, momentum, energy) = conserved_quantities(f);
        let (_, power) = spectrum.cbar_and_power();
        let production = match self.production {
            ProductionMode::Off => None,
            ProductionMode::Pair => Some(entropy_production(f, tables)?),
            ProductionMode::Spectral => Some(entropy_production_spectral(f, tables)?),
            ProductionMode::Auto => Some(if f.grid().n() <= 16 {
                entropy_production(f, tables)?
            } else {
                entropy_production_spectral(f, tables)?
            }),
        };
        let moments = self
            .moment_orders
            .iter()
            .map(|&s| Ok((s, weighted_moment(f, s)?)))
            .collect::<Result<Vec<_>>>()?;
        let lp_norms = self
            .lp_exponents
            .iter()
            .map(|&p| Ok((p, lp_norm(f, p)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DiagnosticsRecord {
            t,
            mass,
            momentum,
            energy,
            entropy: entropy(f),
            entropy_production: production,
            moments,
            lp_norms,
            weighted_q: weighted_moment(f, self.q)?,
            interaction: interaction_from_potential(f, &power),
            j_gamma: max_or_zero(&power),
            coercivity: coercivity_constant(abar, self.gamma),
            clipped_mass,
            tail_mass: tail_mass(f),
        })
    }
}
