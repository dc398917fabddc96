//! Modal polynomial bases, orthonormal on the reference simplex.
//!
//! 1D: shifted Legendre polynomials on [0, 1].
//! 2D: Dubiner basis on the reference triangle, built from Jacobi polynomials
//! in collapsed coordinates. Orthonormality makes every element mass matrix a
//! multiple of the identity for affine elements, which is what lets the tent
//! mass operator factor into a 3x3 coupling matrix per element.

use crate::quad::{jacobi, jacobi_derivative, legendre};

/// Scalar modal basis of total degree `degree` on the reference simplex.
#[derive(Debug, Clone)]
pub struct ModalBasis {
    pub dim: usize,
    pub degree: usize,
    /// (i, j) mode pairs in 2D; (i, 0) in 1D.
    modes: Vec<(usize, usize)>,
}

impl ModalBasis {
    pub fn new(dim: usize, degree: usize) -> Self {
        assert!(dim == 1 || dim == 2);
        let mut modes = Vec::new();
        match dim {
            1 => {
                for i in 0..=degree {
                    modes.push((i, 0));
                }
            }
            _ => {
                for d in 0..=degree {
                    for i in 0..=d {
                        modes.push((i, d - i));
                    }
                }
            }
        }
        ModalBasis { dim, degree, modes }
    }

    pub fn ndof(&self) -> usize {
        self.modes.len()
    }

    /// Value of basis function `k` at reference point `xi`.
    pub fn value(&self, k: usize, xi: [f64; 2]) -> f64 {
        let (i, j) = self.modes[k];
        match self.dim {
            1 => {
                let (p, _) = legendre(i, 2.0 * xi[0] - 1.0);
                (2.0 * i as f64 + 1.0).sqrt() * p
            }
            _ => {
                let (x, y) = (xi[0], xi[1]);
                let om = 1.0 - y;
                let a = if om.abs() < 1e-14 {
                    -1.0
                } else {
                    2.0 * x / om - 1.0
                };
                let b = 2.0 * y - 1.0;
                let c = normalization(i, j);
                let (pa, _) = legendre(i, a);
                c * pa * om.powi(i as i32) * jacobi(j, 2.0 * i as f64 + 1.0, 0.0, b)
            }
        }
    }

    /// Reference gradient of basis function `k` at `xi`.
    pub fn gradient(&self, k: usize, xi: [f64; 2]) -> [f64; 2] {
        let (i, j) = self.modes[k];
        match self.dim {
            1 => {
                let (_, dp) = legendre(i, 2.0 * xi[0] - 1.0);
                [(2.0 * i as f64 + 1.0).sqrt() * 2.0 * dp, 0.0]
            }
            _ => {
                let (x, y) = (xi[0], xi[1]);
                let om = 1.0 - y;
                let a = if om.abs() < 1e-14 {
                    -1.0
                } else {
                    2.0 * x / om - 1.0
                };
                let b = 2.0 * y - 1.0;
                let alpha = 2.0 * i as f64 + 1.0;
                let c = normalization(i, j);
                let (pa, dpa) = legendre(i, a);
                let qb = jacobi(j, alpha, 0.0, b);
                let dqb = jacobi_derivative(j, alpha, 0.0, b);
                // powers of (1-y); i = 0 kills the singular-looking terms
                let om_im1 = if i == 0 { 0.0 } else { om.powi(i as i32 - 1) };
                let om_i = om.powi(i as i32);
                let dx = 2.0 * c * dpa * om_im1 * qb;
                let dy = c * (dpa * (a + 1.0) * om_im1 * qb - i as f64 * om_im1 * pa * qb
                    + 2.0 * om_i * pa * dqb);
                [dx, dy]
            }
        }
    }

    /// Tabulated values at a point set: `out[k][q]`.
    pub fn tabulate_values(&self, points: &[[f64; 2]]) -> Vec<Vec<f64>> {
        (0..self.ndof())
            .map(|k| points.iter().map(|&p| self.value(k, p)).collect())
            .collect()
    }

    /// Tabulated reference gradients at a point set: `out[k][q]`.
    pub fn tabulate_gradients(&self, points: &[[f64; 2]]) -> Vec<Vec<[f64; 2]>> {
        (0..self.ndof())
            .map(|k| points.iter().map(|&p| self.gradient(k, p)).collect())
            .collect()
    }
}

fn normalization(i: usize, j: usize) -> f64 {
    (2.0 * (2.0 * i as f64 + 1.0) * (i as f64 + j as f64 + 1.0)).sqrt()
}
