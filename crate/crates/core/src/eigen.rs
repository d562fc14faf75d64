//! Dense self-adjoint eigenvalue solver.
//!
//! Complex Hermitian matrices are reduced to real symmetric tridiagonal form
//! with Householder reflections; the tridiagonal eigenvalues are then found by
//! the implicit-shift QL iteration. Only eigenvalues are computed.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex self-adjoint matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    /// Builds the matrix from the lower triangle `f(i, j)`, `j <= i`, mirroring the upper one.
    /// Diagonal entries are forced real.
    pub fn from_lower<F: FnMut(usize, usize) -> Complex64>(n: usize, mut f: F) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..i {
                let z = f(i, j);
                m.data[i * n + j] = z;
                m.data[j * n + i] = z.conj();
            }
            m.data[i * n + i] = Complex64::new(f(i, i).re, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    /// Sets `(i, j)` and its mirror `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        if i == j {
            self.data[i * self.n + i] = Complex64::new(z.re, 0.0);
        } else {
            self.data[i * self.n + j] = z;
            self.data[j * self.n + i] = z.conj();
        }
    }

    /// Adds `z` to `(i, j)` and `conj(z)` to `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, z: Complex64) {
        if i == j {
            self.data[i * self.n + i].re += z.re;
        } else {
            self.data[i * self.n + j] += z;
            self.data[j * self.n + i] += z.conj();
        }
    }

    /// Largest entrywise deviation `|A_ij - conj(A_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..=i {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).re).sum()
    }

    /// Reduction to a real symmetric tridiagonal matrix `(diagonal, off-diagonal)`.
    /// The off-diagonal vector has length `n` with a trailing zero.
    pub fn tridiagonalize(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let mut a = self.data.clone();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n];
        let zero = Complex64::new(0.0, 0.0);
        let mut v = vec![zero; n];
        let mut p = vec![zero; n];

        for k in 0..n.saturating_sub(1) {
            let m = k + 1;
            let mut norm2 = 0.0;
            for i in m..n {
                norm2 += a[i * n + k].norm_sqr();
            }
            let x0 = a[m * n + k];
            let tail2 = norm2 - x0.norm_sqr();
            if tail2 <= f64::MIN_POSITIVE {
                // already tridiagonal in this column
                off[k] = x0.norm();
                continue;
            }
            let alpha = norm2.sqrt();
            let phase = if x0.norm() > 0.0 {
                x0 / x0.norm()
            } else {
                Complex64::new(1.0, 0.0)
            };
            let beta = -phase * alpha;
            for i in m..n {
                v[i] = a[i * n + k];
            }
            v[m] -= beta;
            let vnorm2: f64 = (m..n).map(|i| v[i].norm_sqr()).sum();
            let tau = 2.0 / vnorm2;
            off[k] = alpha;

            // p = tau * B v, B the trailing block (lower triangle only is current).
            for i in m..n {
                p[i] = zero;
            }
            for i in m..n {
                let row = &a[i * n..i * n + i];
                let vi = v[i];
                let mut acc = zero;
                for j in m..i {
                    let bij = row[j];
                    acc += bij * v[j];
                    p[j] += bij.conj() * vi;
                }
                p[i] += acc + a[i * n + i].re * vi;
            }
            let mut vhp = zero;
            for i in m..n {
                p[i] *= tau;
                vhp += v[i].conj() * p[i];
            }
            let kappa = 0.5 * tau * vhp.re;
            for i in m..n {
                p[i] -= kappa * v[i];
            }
            // B -= v w^H + w v^H   (w stored in p)
            for i in m..n {
                let vi = v[i];
                let wi = p[i];
                let row = &mut a[i * n..i * n + i + 1];
                for j in m..=i {
                    row[j] -= vi * p[j].conj() + wi * v[j].conj();
                }
            }
        }
        for i in 0..n {
            diag[i] = a[i * n + i].re;
        }
        if n > 0 {
            off[n - 1] = 0.0;
        }
        (diag, off)
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let (mut d, mut e) = self.tridiagonalize();
        tridiagonal_ql(&mut d, &mut e)?;
        d.sort_by(|a, b| a.total_cmp(b));
        Ok(d)
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix. On return `d` holds the
/// (unsorted) eigenvalues; `e[i]` couples rows `i` and `i + 1`.
pub fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Convergence {
                    what: "tridiagonal QL iteration".into(),
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
