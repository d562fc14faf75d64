//! Independent reference computations for the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Sine graph `y = A sin(k x)`, `k = 2 pi / P`, parametrized by `x`.
#[derive(Debug, Clone)]
pub struct SineGraph {
    pub amplitude: f64,
    pub period: f64,
    knots: Vec<f64>,
}

const KNOTS: usize = 1024;
const PANELS: usize = 32;

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = 2 * panels;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

impl SineGraph {
    pub fn new(amplitude: f64, period: f64) -> Self {
        let mut g = Self {
            amplitude,
            period,
            knots: vec![0.0],
        };
        let dx = period / KNOTS as f64;
        for m in 0..KNOTS {
            let x0 = m as f64 * dx;
            let next = g.knots[m] + simpson(|x| g.speed(x), x0, x0 + dx, PANELS);
            g.knots.push(next);
        }
        g
    }

    fn k(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn speed(&self, x: f64) -> f64 {
        let d = self.amplitude * self.k() * (self.k() * x).cos();
        (1.0 + d * d).sqrt()
    }

    /// Signed curvature `y'' / (1 + y'^2)^(3/2)`.
    pub fn curvature(&self, x: f64) -> f64 {
        let k = self.k();
        let d1 = self.amplitude * k * (k * x).cos();
        let d2 = -self.amplitude * k * k * (k * x).sin();
        d2 / (1.0 + d1 * d1).powf(1.5)
    }

    pub fn length(&self) -> f64 {
        self.knots[KNOTS]
    }

    /// Arclength from `x = 0`, for `x` in `[0, P]`.
    pub fn arclength(&self, x: f64) -> f64 {
        let dx = self.period / KNOTS as f64;
        let m = ((x / dx).floor() as usize).min(KNOTS - 1);
        let x0 = m as f64 * dx;
        self.knots[m] + simpson(|t| self.speed(t), x0, x, 16)
    }

    /// Inverse of [`Self::arclength`] by Newton's method.
    pub fn x_of_s(&self, s: f64) -> f64 {
        let mut x = s / self.length() * self.period;
        for _ in 0..50 {
            let step = (self.arclength(x) - s) / self.speed(x);
            x = (x - step).clamp(0.0, self.period);
            if step.abs() < 1e-15 * self.period {
                break;
            }
        }
        x
    }

    /// `-gamma(s)^2 / 4` at arclength `s`.
    pub fn hill_potential(&self, s: f64) -> f64 {
        let g = self.curvature(self.x_of_s(s.rem_euclid(self.length())));
        -0.25 * g * g
    }

    /// Mean of `-gamma^2/4` over one period in arclength.
    pub fn mean_potential(&self) -> f64 {
        let integral = simpson(
            |x| {
                let g = self.curvature(x);
                -0.25 * g * g * self.speed(x)
            },
            0.0,
            self.period,
            4096,
        );
        integral / self.length()
    }
}

/// Second-order finite differences for `-psi'' + V psi` on `n` uniform points of a period
/// `L`: eigenvalues at quasimomentum `theta` are the roots of `tr M(lambda) = 2 cos(theta L)`
/// where `M` is the monodromy of the three-term recurrence.
pub struct FdHill {
    potential: Vec<f64>,
    length: f64,
}

impl FdHill {
    pub fn new(v: impl Fn(f64) -> f64, length: f64, n: usize) -> Self {
        let h = length / n as f64;
        Self {
            potential: (0..n).map(|j| v(j as f64 * h)).collect(),
            length,
        }
    }

    pub fn discriminant(&self, lambda: f64) -> f64 {
        let n = self.potential.len();
        let h2 = (self.length / n as f64).powi(2);
        // columns for initial data (1, 0) and (0, 1) of (psi_j, psi_{j-1})
        let (mut a0, mut a1) = (1.0, 0.0);
        let (mut b0, mut b1) = (0.0, 1.0);
        for &v in &self.potential {
            let c = 2.0 + h2 * (v - lambda);
            let na = c * a0 - a1;
            a1 = a0;
            a0 = na;
            let nb = c * b0 - b1;
            b1 = b0;
            b0 = nb;
        }
        a0 + b1
    }

    /// Lowest `count` eigenvalues at `theta` by scanning from `lo` with step `step`, then
    /// bisection.
    pub fn eigenvalues(&self, theta: f64, count: usize, lo: f64, step: f64) -> Vec<f64> {
        let target = 2.0 * (theta * self.length).cos();
        let f = |l: f64| self.discriminant(l) - target;
        let mut roots = Vec::new();
        let mut x0 = lo;
        let mut f0 = f(x0);
        while roots.len() < count {
            let x1 = x0 + step;
            let f1 = f(x1);
            if f0 == 0.0 {
                roots.push(x0);
            } else if f0 * f1 < 0.0 {
                let (mut a, mut b, mut fa) = (x0, x1, f0);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    let fm = f(m);
                    if fa * fm <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                        fa = fm;
                    }
                    if b - a < 1e-14 * (1.0 + m.abs()) {
                        break;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            x0 = x1;
            f0 = f1;
            assert!(x0 < lo + 1e7 * step, "scan ran away");
        }
        roots
    }
}

/// `lambda_{1..count}(theta)` from finite differences on `n` and `2n` points combined by
/// Richardson extrapolation.
pub fn fd_hill_richardson(
    v: impl Fn(f64) -> f64 + Copy,
    length: f64,
    n: usize,
    theta: f64,
    count: usize,
    lo: f64,
) -> Vec<f64> {
    let coarse = FdHill::new(v, length, n).eigenvalues(theta, count, lo, 1e-3);
    let fine = FdHill::new(v, length, 2 * n).eigenvalues(theta, count, lo, 1e-3);
    coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect()
}

/// `J_m(x) = (1/pi) int_0^pi cos(m t - x sin t) dt` by the trapezoidal rule, which is
/// spectrally accurate for this periodic integrand.
pub fn bessel_j(m: usize, x: f64) -> f64 {
    let n = 400;
    let h = PI / n as f64;
    let mut s = 0.5 * (1.0 + ((m as f64) * PI).cos());
    for i in 1..n {
        let t = i as f64 * h;
        s += (m as f64 * t - x * t.sin()).cos();
    }
    s * h / PI
}

/// First `count` positive zeros of `J_m` by scanning and bisection.
pub fn bessel_zeros(m: usize, count: usize) -> Vec<f64> {
    let mut zeros = Vec::new();
    let mut x0 = 0.5 + m as f64;
    let mut f0 = bessel_j(m, x0);
    while zeros.len() < count {
        let x1 = x0 + 0.05;
        let f1 = bessel_j(m, x1);
        if f0 * f1 < 0.0 {
            let (mut a, mut b, mut fa) = (x0, x1, f0);
            while b - a > 1e-14 * b {
                let c = 0.5 * (a + b);
                let fc = bessel_j(m, c);
                if fa * fc <= 0.0 {
                    b = c;
                } else {
                    a = c;
                    fa = fc;
                }
            }
            zeros.push(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    zeros
}

/// Free bands `(theta + 2 pi k / L)^2 + offset` below `top`, ascending.
pub fn free_levels(theta: f64, length: f64, offsets: &[f64], top: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let lowest = offsets.iter().cloned().fold(f64::INFINITY, f64::min);
    let kmax = ((top - lowest).max(0.0).sqrt() * length / (2.0 * PI)).ceil() as i64 + 2;
    for &c in offsets {
        for k in -kmax..=kmax {
            let v = c + (theta + 2.0 * PI * k as f64 / length).powi(2);
            if v < top {
                out.push(v);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}
