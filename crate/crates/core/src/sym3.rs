//! Symmetric 3x3 matrices and their closed-form eigenvalues.

use std::f64::consts::PI;
use std::ops::{Add, Mul};

/// Symmetric 3x3 matrix stored as `[xx, yy, zz, xy, xz, yz]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sym3(pub [f64; 6]);

/// Storage slot of entry `(i, j)`.
pub const fn slot(i: usize, j: usize) -> usize {
    match (i, j) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (0, 1) | (1, 0) => 3,
        (0, 2) | (2, 0) => 4,
        _ => 5,
    }
}

impl Sym3 {
    pub const ZERO: Sym3 = Sym3([0.0; 6]);
    pub const IDENTITY: Sym3 = Sym3([1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);

    pub fn diag(d: [f64; 3]) -> Self {
        Sym3([d[0], d[1], d[2], 0.0, 0.0, 0.0])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[slot(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn mul_vec(&self, x: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0] * x[0] + m[3] * x[1] + m[4] * x[2],
            m[3] * x[0] + m[1] * x[1] + m[5] * x[2],
            m[4] * x[0] + m[5] * x[1] + m[2] * x[2],
        ]
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: [f64; 3]) -> f64 {
        let m = &self.0;
        m[0] * x[0] * x[0]
            + m[1] * x[1] * x[1]
            + m[2] * x[2] * x[2]
            + 2.0 * (m[3] * x[0] * x[1] + m[4] * x[0] * x[2] + m[5] * x[1] * x[2])
    }

    pub fn det(&self) -> f64 {
        let [xx, yy, zz, xy, xz, yz] = self.0;
        xx * (yy * zz - yz * yz) - xy * (xy * zz - yz * xz) + xz * (xy * yz - yy * xz)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Sym3(self.0.map(|x| x * s))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Eigenvalues in ascending order by the trigonometric method.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let [xx, yy, zz, xy, xz, yz] = self.0;
        let off = xy * xy + xz * xz + yz * yz;
        let q = self.trace() / 3.0;
        let scale = self.max_abs();
        if off <= (f64::EPSILON * scale).powi(2) {
            let mut d = [xx, yy, zz];
            d.sort_by(f64::total_cmp);
            return d;
        }
        let p2 = (xx - q).powi(2) + (yy - q).powi(2) + (zz - q).powi(2) + 2.0 * off;
        let p = (p2 / 6.0).sqrt();
        let shifted = Sym3([(xx - q) / p, (yy - q) / p, (zz - q) / p, xy / p, xz / p, yz / p]);
        let r = (shifted.det() / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let largest = q + 2.0 * p * phi.cos();
        let smallest = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
        let middle = 3.0 * q - largest - smallest;
        [smallest, middle, largest]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues()[2]
    }
}

impl Add for Sym3 {
    type Output = Sym3;
    fn add(self, rhs: Sym3) -> Sym3 {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0) {
            *o += r;
        }
        Sym3(out)
    }
}

impl Mul<f64> for Sym3 {
    type Output = Sym3;
    fn mul(self, rhs: f64) -> Sym3 {
        self.scaled(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense(m: &Sym3) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = m.get(i, j);
            }
        }
        out
    }

    #[test]
    fn diagonal_eigenvalues_sorted() {
        assert_eq!(Sym3::diag([3.0, -1.0, 2.0]).eigenvalues(), [-1.0, 2.0, 3.0]);
    }

    #[test]
    fn projection_like_spectrum() {
        // I - e e^T with e = (1,1,0)/sqrt2
        let m = Sym3([0.5, 0.5, 1.0, -0.5, 0.0, 0.0]);
        let ev = m.eigenvalues();
        assert!(ev[0].abs() < 1e-14);
        assert!((ev[1] - 1.0).abs() < 1e-14);
        assert!((ev[2] - 1.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn eigenpairs_satisfy_characteristic_polynomial(
            a in prop::array::uniform6(-3.0f64..3.0)
        ) {
            let m = Sym3(a);
            let ev = m.eigenvalues();
            prop_assert!(ev[0] <= ev[1] + 1e-12 && ev[1] <= ev[2] + 1e-12);
            prop_assert!((ev.iter().sum::<f64>() - m.trace()).abs() < 1e-10);
            prop_assert!((ev[0] * ev[1] * ev[2] - m.det()).abs() < 1e-8);
            // det(M - λI) = 0 for every eigenvalue
            for &l in &ev {
                let d = dense(&m);
                let s = Sym3([d[0][0] - l, d[1][1] - l, d[2][2] - l, d[0][1], d[0][2], d[1][2]]);
                prop_assert!(s.det().abs() < 1e-7 * (1.0 + m.max_abs().powi(3)));
            }
        }
    }
}
