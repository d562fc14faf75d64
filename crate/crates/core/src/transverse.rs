//! Dirichlet eigenpairs of the unit cross-section: the interval `(-1, 1)` for planar
//! tubes and the unit disk for tubes in three dimensions.
//!
//! Disk modes are real, `J_m(j_{m,k} r) cos(m angle)` and `... sin(m angle)`, ordered by
//! `(kappa, m, cos before sin)`. Eigenfunctions are normalized on the unit ball; scaling
//! to radius `a` happens in the overlap integrals, never here.

use std::f64::consts::PI;

use crate::curvegeom::TransversePoint;
use crate::error::Result;
use crate::quadrature::GaussLegendre;
use crate::special::{bessel_j, bessel_j_derivative, bessel_j_zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransverseMode {
    /// `sin(j pi (u + 1) / 2)`, `j >= 1`.
    Interval { j: usize },
    /// `norm * J_m(zero * r) * {cos, sin}(m angle)`.
    Disk {
        m: usize,
        k: usize,
        parity: Parity,
        zero: f64,
        norm: f64,
    },
}

impl TransverseMode {
    pub fn value(&self, p: TransversePoint) -> f64 {
        match (*self, p) {
            (TransverseMode::Interval { j }, TransversePoint::Interval(u)) => {
                (j as f64 * PI * (u + 1.0) / 2.0).sin()
            }
            (
                TransverseMode::Disk {
                    m,
                    parity,
                    zero,
                    norm,
                    ..
                },
                TransversePoint::Disk { r, angle },
            ) => norm * bessel_j(m, zero * r) * angular(parity, m, angle),
            _ => panic!("transverse point does not match the mode geometry"),
        }
    }

    /// `|grad chi|^2` at `p`.
    pub fn gradient_sqr(&self, p: TransversePoint) -> f64 {
        match (*self, p) {
            (TransverseMode::Interval { j }, TransversePoint::Interval(u)) => {
                let k = j as f64 * PI / 2.0;
                let d = k * (k * (u + 1.0)).cos();
                d * d
            }
            (
                TransverseMode::Disk {
                    m,
                    parity,
                    zero,
                    norm,
                    ..
                },
                TransversePoint::Disk { r, angle },
            ) => {
                let radial = norm * zero * bessel_j_derivative(m, zero * r) * angular(parity, m, angle);
                let dangle = match parity {
                    Parity::Cos => -(m as f64) * (m as f64 * angle).sin(),
                    Parity::Sin => m as f64 * (m as f64 * angle).cos(),
                };
                let tangential = norm * bessel_j(m, zero * r) * dangle / r;
                radial * radial + tangential * tangential
            }
            _ => panic!("transverse point does not match the mode geometry"),
        }
    }
}

fn angular(parity: Parity, m: usize, angle: f64) -> f64 {
    match parity {
        Parity::Cos => (m as f64 * angle).cos(),
        Parity::Sin => (m as f64 * angle).sin(),
    }
}

/// Quadrature on the unit cross-section. Disk weights include the `r` of the area element.
#[derive(Debug, Clone)]
pub struct TransverseQuadrature {
    pub points: Vec<TransversePoint>,
    pub weights: Vec<f64>,
}

impl TransverseQuadrature {
    pub fn interval(order: usize) -> Self {
        let rule = GaussLegendre::new(order);
        Self {
            points: rule.nodes.iter().map(|&u| TransversePoint::Interval(u)).collect(),
            weights: rule.weights.clone(),
        }
    }

    /// Gauss-Legendre in `r` on `(0, 1)` times the uniform trapezoid rule in the angle.
    pub fn disk(radial: usize, angular: usize) -> Self {
        let rule = GaussLegendre::new(radial);
        let mut points = Vec::with_capacity(radial * angular);
        let mut weights = Vec::with_capacity(radial * angular);
        let dphi = 2.0 * PI / angular as f64;
        for (r, w) in rule.mapped(0.0, 1.0) {
            for p in 0..angular {
                points.push(TransversePoint::Disk {
                    r,
                    angle: p as f64 * dphi,
                });
                weights.push(w * r * dphi);
            }
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// The lowest `J` Dirichlet modes of the unit cross-section with a quadrature rule.
#[derive(Debug, Clone)]
pub struct TransverseBasis {
    dimension: usize,
    modes: Vec<TransverseMode>,
    eigenvalues: Vec<f64>,
    /// radial (or interval) Gauss-Legendre order
    order: usize,
    quadrature: TransverseQuadrature,
}

/// `J` lowest modes of `(-1, 1)`: `kappa_j = j pi / 2`.
pub fn interval_basis(count: usize) -> TransverseBasis {
    assert!(count >= 1, "transverse basis needs at least one mode");
    let modes: Vec<_> = (1..=count).map(|j| TransverseMode::Interval { j }).collect();
    let eigenvalues = (1..=count)
        .map(|j| (j as f64 * PI / 2.0).powi(2))
        .collect();
    let order = 2 * count + 24;
    TransverseBasis {
        dimension: 2,
        modes,
        eigenvalues,
        order,
        quadrature: TransverseQuadrature::interval(order),
    }
}

/// `J` lowest modes of the unit disk: `kappa = j_{m,k}`.
pub fn disk_basis(count: usize) -> Result<TransverseBasis> {
    assert!(count >= 1, "transverse basis needs at least one mode");
    let mut candidates = Vec::new();
    for m in 0..=count {
        for k in 1..=count {
            let zero = bessel_j_zero(m, k)?;
            let edge = bessel_j(m + 1, zero);
            let norm = if m == 0 {
                1.0 / (PI * edge * edge).sqrt()
            } else {
                (2.0 / (PI * edge * edge)).sqrt()
            };
            candidates.push(TransverseMode::Disk {
                m,
                k,
                parity: Parity::Cos,
                zero,
                norm,
            });
            if m > 0 {
                candidates.push(TransverseMode::Disk {
                    m,
                    k,
                    parity: Parity::Sin,
                    zero,
                    norm,
                });
            }
        }
    }
    let key = |mode: &TransverseMode| match *mode {
        TransverseMode::Disk { m, parity, zero, .. } => (zero, m, parity == Parity::Sin),
        TransverseMode::Interval { .. } => unreachable!(),
    };
    candidates.sort_by(|a, b| {
        let (za, ma, pa) = key(a);
        let (zb, mb, pb) = key(b);
        za.total_cmp(&zb).then(ma.cmp(&mb)).then(pa.cmp(&pb))
    });
    candidates.truncate(count);
    let eigenvalues = candidates.iter().map(|m| key(m).0.powi(2)).collect();
    let order = 2 * count + 24;
    let mut basis = TransverseBasis {
        dimension: 3,
        modes: candidates,
        eigenvalues,
        order,
        quadrature: TransverseQuadrature::disk(1, 1),
    };
    basis.quadrature = basis.disk_quadrature(order);
    Ok(basis)
}

impl TransverseBasis {
    fn max_angular(&self) -> usize {
        self.modes
            .iter()
            .map(|m| match m {
                TransverseMode::Disk { m, .. } => *m,
                TransverseMode::Interval { .. } => 0,
            })
            .max()
            .unwrap_or(0)
    }

    fn disk_quadrature(&self, order: usize) -> TransverseQuadrature {
        let angular = 4 * self.max_angular() + order + 8;
        TransverseQuadrature::disk(order, angular)
    }

    /// Same modes with a different (radial/interval) quadrature order.
    pub fn with_quadrature_order(&self, order: usize) -> Self {
        let mut out = self.clone();
        out.order = order;
        out.quadrature = if self.dimension == 2 {
            TransverseQuadrature::interval(order)
        } else {
            self.disk_quadrature(order)
        };
        out
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[TransverseMode] {
        &self.modes
    }

    /// `kappa_j^2`, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn quadrature_order(&self) -> usize {
        self.order
    }

    pub fn quadrature(&self) -> &TransverseQuadrature {
        &self.quadrature
    }

    /// `values[j][q] = chi_j(point_q)`.
    pub fn tabulate(&self) -> Vec<Vec<f64>> {
        self.modes
            .iter()
            .map(|mode| self.quadrature.points.iter().map(|&p| mode.value(p)).collect())
            .collect()
    }

    /// Gram matrix of the modes under the stored quadrature.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let table = self.tabulate();
        let w = &self.quadrature.weights;
        (0..self.len())
            .map(|i| {
                (0..self.len())
                    .map(|j| {
                        table[i]
                            .iter()
                            .zip(&table[j])
                            .zip(w)
                            .map(|((a, b), w)| a * b * w)
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// Rayleigh quotients `int |grad chi|^2 / int chi^2` under the stored quadrature.
    pub fn rayleigh_quotients(&self) -> Vec<f64> {
        self.modes
            .iter()
            .map(|mode| {
                let mut num = 0.0;
                let mut den = 0.0;
                for (&p, &w) in self.quadrature.points.iter().zip(&self.quadrature.weights) {
                    num += w * mode.gradient_sqr(p);
                    den += w * mode.value(p).powi(2);
                }
                num / den
            })
            .collect()
    }
}
