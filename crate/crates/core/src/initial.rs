//! Initial densities.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LandauError, Result};
use crate::grid::{ScalarField, VelocityGrid};

/// Isotropic Maxwellian `m (2πT)^{-3/2} exp(-|v-u|²/(2T))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxwellianParams {
    pub mass: f64,
    pub mean: [f64; 3],
    pub temperature: f64,
}

impl MaxwellianParams {
    pub fn standard() -> Self {
        Self {
            mass: 1.0,
            mean: [0.0; 3],
            temperature: 1.0,
        }
    }

    pub fn density(&self, v: [f64; 3]) -> f64 {
        let d2: f64 = (0..3).map(|i| (v[i] - self.mean[i]).powi(2)).sum();
        self.mass * (2.0 * PI * self.temperature).powf(-1.5) * (-0.5 * d2 / self.temperature).exp()
    }

    fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(LandauError::InvalidInitialCondition(format!(
                "mass must be positive, got {}",
                self.mass
            )));
        }
        if !(self.temperature > 0.0) {
            return Err(LandauError::InvalidInitialCondition(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

/// Initial condition families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    Maxwellian(MaxwellianParams),
    Bimaxwellian {
        first: MaxwellianParams,
        second: MaxwellianParams,
    },
    /// Gaussian with diagonal covariance.
    AnisotropicGaussian {
        mass: f64,
        mean: [f64; 3],
        variances: [f64; 3],
    },
    /// `height · exp(1 − 1/(1 − r²/R²))` inside the ball of radius `R`.
    Bump {
        center: [f64; 3],
        radius: f64,
        height: f64,
    },
}

/// Fraction of the half width a compactly supported datum may reach.
pub const SUPPORT_MARGIN: f64 = 0.8;

impl InitialCondition {
    /// Shipped presets: `maxwellian`, `bimaxwellian`, `skewed_bimaxwellian`,
    /// `anisotropic`, `bump`.
    pub fn preset(name: &str) -> Option<Self> {
        let standard = MaxwellianParams::standard();
        Some(match name {
            "maxwellian" => InitialCondition::Maxwellian(standard),
            "bimaxwellian" => InitialCondition::Bimaxwellian {
                first: MaxwellianParams {
                    mass: 0.5,
                    mean: [1.0, 0.0, 0.0],
                    temperature: 1.0,
                },
                second: MaxwellianParams {
                    mass: 0.5,
                    mean: [-1.0, 0.0, 0.0],
                    temperature: 1.0,
                },
            },
            "skewed_bimaxwellian" => InitialCondition::Bimaxwellian {
                first: MaxwellianParams {
                    mass: 0.6,
                    mean: [1.0, 0.25, 0.0],
                    temperature: 0.9,
                },
                second: MaxwellianParams {
                    mass: 0.4,
                    mean: [-1.0, 0.0, 0.25],
                    temperature: 1.1,
                },
            },
            "anisotropic" => InitialCondition::AnisotropicGaussian {
                mass: 1.0,
                mean: [0.0; 3],
                variances: [1.6, 0.7, 0.7],
            },
            "bump" => InitialCondition::Bump {
                center: [0.0; 3],
                radius: 3.0,
                height: 0.06,
            },
            _ => return None,
        })
    }

    pub const PRESETS: [&'static str; 5] = [
        "maxwellian",
        "bimaxwellian",
        "skewed_bimaxwellian",
        "anisotropic",
        "bump",
    ];

    pub fn density(&self, v: [f64; 3]) -> f64 {
        match self {
            InitialCondition::Maxwellian(m) => m.density(v),
            InitialCondition::Bimaxwellian { first, second } => first.density(v) + second.density(v),
            InitialCondition::AnisotropicGaussian {
                mass,
                mean,
                variances,
            } => {
                let norm = (2.0 * PI).powf(-1.5) / (variances[0] * variances[1] * variances[2]).sqrt();
                let e: f64 = (0..3).map(|i| (v[i] - mean[i]).powi(2) / variances[i]).sum();
                mass * norm * (-0.5 * e).exp()
            }
            InitialCondition::Bump {
                center,
                radius,
                height,
            } => {
                let r2: f64 = (0..3).map(|i| (v[i] - center[i]).powi(2)).sum();
                let x = r2 / (radius * radius);
                if x < 1.0 {
                    height * (1.0 - 1.0 / (1.0 - x)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn validate(&self, grid: &VelocityGrid) -> Result<()> {
        match self {
            InitialCondition::Maxwellian(m) => m.validate(),
            InitialCondition::Bimaxwellian { first, second } => {
                first.validate()?;
                second.validate()
            }
            InitialCondition::AnisotropicGaussian { mass, variances, .. } => {
                MaxwellianParams {
                    mass: *mass,
                    mean: [0.0; 3],
                    temperature: variances.iter().copied().fold(f64::INFINITY, f64::min),
                }
                .validate()
            }
            InitialCondition::Bump {
                center,
                radius,
                height,
            } => {
                if !(*radius > 0.0) || !(*height > 0.0) {
                    return Err(LandauError::InvalidInitialCondition(
                        "bump radius and height must be positive".into(),
                    ));
                }
                let reach = center.iter().map(|c| c * c).sum::<f64>().sqrt() + radius;
                let limit = SUPPORT_MARGIN * grid.half_width();
                if reach > limit {
                    return Err(LandauError::InvalidInitialCondition(format!(
                        "bump support reaches |v| = {reach}, beyond {SUPPORT_MARGIN}·L = {limit}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Samples the density on `grid` after validating it.
    pub fn sample(&self, grid: &VelocityGrid) -> Result<ScalarField> {
        self.validate(grid)?;
        Ok(grid.sample(|v| self.density(v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::integrate;

    #[test]
    fn presets_are_valid_and_nonnegative() {
        let grid = VelocityGrid::new(16, 6.0).unwrap();
        for name in InitialCondition::PRESETS {
            let ic = InitialCondition::preset(name).unwrap();
            let f = ic.sample(&grid).unwrap();
            assert!(f.min() >= 0.0, "{name}");
            assert!(integrate(&f) > 0.0, "{name}");
        }
        assert!(InitialCondition::preset("nope").is_none());
    }

    #[test]
    fn bump_outside_margin_rejected() {
        let grid = VelocityGrid::new(16, 4.0).unwrap();
        let bump = InitialCondition::Bump {
            center: [1.0, 0.0, 0.0],
            radius: 2.5,
            height: 1.0,
        };
        assert!(matches!(bump.sample(&grid), Err(LandauError::InvalidInitialCondition(_))));
    }

    #[test]
    fn invalid_parameters_rejected() {
        let grid = VelocityGrid::new(8, 4.0).unwrap();
        let bad = InitialCondition::Maxwellian(MaxwellianParams {
            mass: -1.0,
            mean: [0.0; 3],
            temperature: 1.0,
        });
        assert!(bad.validate(&grid).is_err());
        let bad = InitialCondition::Maxwellian(MaxwellianParams {
            mass: 1.0,
            mean: [0.0; 3],
            temperature: 0.0,
        });
        assert!(bad.validate(&grid).is_err());
    }
}
