//! Independent reference implementations used only by tests.
#![allow(dead_code)]

use dicke_rap::propagator::hamiltonian;
use dicke_rap::{Schedule, SpinState, SpinSystem, C64};
use nalgebra::{DMatrix, DVector};

/// Piecewise-constant midpoint propagation with exact eigen-decomposed
/// exponentials, aligned with the schedule breakpoints.
pub fn expm_propagate(
    system: &SpinSystem,
    schedule: &Schedule,
    initial: &SpinState,
    dt: f64,
) -> Vec<C64> {
    let mut y: Vec<C64> = initial.amplitudes().to_vec();
    let mut nodes = vec![schedule.t_start];
    nodes.extend(schedule.breakpoints());
    nodes.push(schedule.t_end);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let steps = ((b - a) / dt).ceil() as usize;
        let h = (b - a) / steps as f64;
        for k in 0..steps {
            let t = a + (k as f64 + 0.5) * h;
            let op = hamiltonian(system, schedule.beta_at(t), schedule.omega_at(t));
            y = expm_apply(op.diag(), op.off(), &y, h);
        }
    }
    y
}

/// `exp(-i H h) y` for a real symmetric tridiagonal `H`.
pub fn expm_apply(diag: &[f64], off: &[f64], y: &[C64], h: f64) -> Vec<C64> {
    let n = diag.len();
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            diag[i]
        } else if i + 1 == j {
            off[i]
        } else if j + 1 == i {
            off[j]
        } else {
            0.0
        }
    });
    let eig = m.symmetric_eigen();
    let v = &eig.eigenvectors;
    let proj: Vec<C64> = (0..n)
        .map(|k| {
            (0..n).map(|i| y[i] * v[(i, k)]).sum::<C64>()
                * C64::from_polar(1.0, -eig.eigenvalues[k] * h)
        })
        .collect();
    (0..n)
        .map(|i| (0..n).map(|k| proj[k] * v[(i, k)]).sum())
        .collect()
}

/// `min_theta |a - e^{i theta} b|` for unit vectors.
pub fn phase_invariant_distance(a: &[C64], b: &[C64]) -> f64 {
    let overlap: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let align = if overlap.norm() > 0.0 {
        overlap.conj() / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y * align).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Collective operators of `n` spin-1/2 particles in the full `2^n` space.
/// Bit value 1 marks spin up (`sigma_z = +1`).
pub struct ProductSpace {
    pub n: usize,
    pub sx: DMatrix<C64>,
    pub sy: DMatrix<C64>,
    pub sz: DMatrix<C64>,
}

impl ProductSpace {
    pub fn new(n: usize) -> Self {
        let dim = 1usize << n;
        let zero = DMatrix::<C64>::zeros(dim, dim);
        let (mut sx, mut sy, mut sz) = (zero.clone(), zero.clone(), zero);
        for col in 0..dim {
            for q in 0..n {
                let up = (col >> q) & 1 == 1;
                let flipped = col ^ (1 << q);
                sx[(flipped, col)] += C64::new(0.5, 0.0);
                // sigma_y |up> = i |down>, sigma_y |down> = -i |up>
                sy[(flipped, col)] += if up {
                    C64::new(0.0, 0.5)
                } else {
                    C64::new(0.0, -0.5)
                };
                sz[(col, col)] += C64::new(if up { 0.5 } else { -0.5 }, 0.0);
            }
        }
        Self { n, sx, sy, sz }
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// `|N/2, m>` as a symmetric combination of product states.
    pub fn dicke(&self, m: i32) -> DVector<C64> {
        let ups = (self.n as i32 / 2 + m) as u32;
        let members: Vec<usize> = (0..self.dim()).filter(|b| b.count_ones() == ups).collect();
        let amp = 1.0 / (members.len() as f64).sqrt();
        let mut v = DVector::<C64>::zeros(self.dim());
        for b in members {
            v[b] = C64::new(amp, 0.0);
        }
        v
    }

    /// Product of single-spin states `cos(theta/2)|up> + e^{-i phi} sin(theta/2)|down>`.
    pub fn product_state(&self, theta: f64, phi: f64) -> DVector<C64> {
        let up = C64::new((0.5 * theta).cos(), 0.0);
        let down = C64::from_polar((0.5 * theta).sin(), -phi);
        DVector::from_fn(self.dim(), |b, _| {
            let k = b.count_ones() as i32;
            up.powi(k) * down.powi(self.n as i32 - k)
        })
    }

    /// Matrix of `op` in the Dicke basis, ascending `m`.
    pub fn project(&self, op: &DMatrix<C64>) -> DMatrix<C64> {
        let s = self.n as i32 / 2;
        let basis: Vec<DVector<C64>> = (-s..=s).map(|m| self.dicke(m)).collect();
        let d = basis.len();
        DMatrix::from_fn(d, d, |i, j| basis[i].dotc(&(op * &basis[j])))
    }

    /// Amplitudes of a symmetric vector in the Dicke basis.
    pub fn to_dicke(&self, v: &DVector<C64>) -> Vec<C64> {
        let s = self.n as i32 / 2;
        (-s..=s).map(|m| self.dicke(m).dotc(v)).collect()
    }
}
