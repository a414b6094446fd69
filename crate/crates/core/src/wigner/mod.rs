//! Spin Wigner function on the generalized Bloch sphere.
//!
//! A pure state is expanded in spherical tensor operators,
//! `rho_kq = <psi| T_kq^dagger |psi>` with
//! `<S,m'| T_kq |S,m> = sqrt((2k+1)/(2S+1)) <S m; k q | S m'>`, and the field
//! is `W(theta, phi) = sum_kq rho_kq Y_kq(theta, phi)`, rescaled to unit
//! integral. The north pole is `|S, S>`.

mod clebsch;
mod harmonics;

pub use clebsch::clebsch_gordan;
pub use harmonics::{gauss_legendre, legendre_column};

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::spin::{SpinState, EXPECTATION_NORM_TOL};
use clebsch::{Doubled, LnFactorial};

/// Multipole moments `rho_kq`, `k = 0..=2S`, `q = -k..=k`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultipoleDecomposition {
    two_s: usize,
    components: Vec<Vec<C64>>,
}

impl MultipoleDecomposition {
    pub fn max_rank(&self) -> usize {
        self.two_s
    }

    pub fn get(&self, k: usize, q: i64) -> C64 {
        if k > self.two_s || q.unsigned_abs() as usize > k {
            return C64::new(0.0, 0.0);
        }
        self.components[k][(q + k as i64) as usize]
    }

    /// All `(k, q, rho_kq)` in rank-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, C64)> + '_ {
        self.components.iter().enumerate().flat_map(|(k, row)| {
            row.iter()
                .enumerate()
                .map(move |(i, v)| (k, i as i64 - k as i64, *v))
        })
    }
}

pub fn multipole_components(state: &SpinState) -> Result<MultipoleDecomposition> {
    state.check_normalized(EXPECTATION_NORM_TOL)?;
    let system = state.system();
    let two_s = system.n_atoms() as usize;
    let tj = two_s as i64;
    let spin = system.spin() as i64;
    let a = state.amplitudes();
    let table = LnFactorial::new(2 * two_s + 2);
    let components = (0..=two_s)
        .into_par_iter()
        .map(|k| {
            let reduced = ((2 * k + 1) as f64 / (two_s + 1) as f64).sqrt();
            (-(k as i64)..=k as i64)
                .map(|q| {
                    let mut acc = C64::new(0.0, 0.0);
                    for m in -spin..=spin {
                        let mp = m + q;
                        if mp.abs() > spin {
                            continue;
                        }
                        let cg = table.clebsch_gordan(Doubled {
                            j1: tj,
                            m1: 2 * m,
                            j2: 2 * k as i64,
                            m2: 2 * q,
                            j: tj,
                            m: 2 * mp,
                        });
                        let upper = a[(mp + spin) as usize];
                        let lower = a[(m + spin) as usize];
                        acc += upper * lower.conj() * (reduced * cg);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(MultipoleDecomposition { two_s, components })
}

/// Real field on a Gauss-Legendre (in `cos theta`) by uniform-`phi` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereField {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// Gauss-Legendre weights for each `theta` row.
    pub theta_weights: Vec<f64>,
    /// Row-major: `values[i * phis.len() + j]` sits at `(thetas[i], phis[j])`.
    pub values: Vec<f64>,
}

impl SphereField {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.phis.len() + j]
    }

    fn phi_weight(&self) -> f64 {
        2.0 * PI / self.phis.len() as f64
    }

    /// Quadrature estimate of the sphere integral.
    pub fn integral(&self) -> f64 {
        let n_phi = self.phis.len();
        self.theta_weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * self.values[i * n_phi..(i + 1) * n_phi].iter().sum::<f64>())
            .sum::<f64>()
            * self.phi_weight()
    }

    /// `int W conj(Y_kq) dOmega` by quadrature.
    pub fn project(&self, k: usize, q: i64) -> C64 {
        let n_phi = self.phis.len();
        let qa = q.unsigned_abs() as usize;
        let mut total = C64::new(0.0, 0.0);
        for (i, &theta) in self.thetas.iter().enumerate() {
            let p = legendre_column(qa, k, theta.cos())[k - qa];
            // Y_{k,-q} = (-1)^q conj(Y_kq)
            let sign = if q < 0 && qa % 2 == 1 { -1.0 } else { 1.0 };
            let mut row = C64::new(0.0, 0.0);
            for (j, &phi) in self.phis.iter().enumerate() {
                row += C64::from_polar(self.values[i * n_phi + j], -(q as f64) * phi);
            }
            total += row * (self.theta_weights[i] * p * sign);
        }
        total * self.phi_weight()
    }

    /// Grid index of the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        let n_phi = self.phis.len();
        let (idx, _) =
            self.values
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
                    if v > bv {
                        (i, v)
                    } else {
                        (bi, bv)
                    }
                });
        (idx / n_phi, idx % n_phi)
    }
}

/// Evaluates `sum_kq rho_kq Y_kq` on the grid without normalization.
pub fn synthesize(
    multipoles: &MultipoleDecomposition,
    n_theta: usize,
    n_phi: usize,
) -> SphereField {
    let k_max = multipoles.max_rank();
    let (nodes, weights) = gauss_legendre(n_theta);
    let thetas: Vec<f64> = nodes.iter().map(|x| x.clamp(-1.0, 1.0).acos()).collect();
    let phis: Vec<f64> = (0..n_phi)
        .map(|j| 2.0 * PI * j as f64 / n_phi as f64)
        .collect();
    let values: Vec<f64> = nodes
        .par_iter()
        .flat_map_iter(|&x| {
            // c_q = sum_k rho_kq P_kq(x), q >= 0
            let c: Vec<C64> = (0..=k_max)
                .map(|q| {
                    legendre_column(q, k_max, x)
                        .iter()
                        .enumerate()
                        .map(|(offset, p)| multipoles.get(q + offset, q as i64) * *p)
                        .sum()
                })
                .collect();
            phis.iter()
                .map(|&phi| {
                    let mut w = c[0].re;
                    for (q, cq) in c.iter().enumerate().skip(1) {
                        w += 2.0 * (cq * C64::from_polar(1.0, q as f64 * phi)).re;
                    }
                    w
                })
                .collect::<Vec<_>>()
        })
        .collect();
    SphereField {
        thetas,
        phis,
        theta_weights: weights,
        values,
    }
}

/// Wigner function of `state`, normalized to unit sphere integral.
///
/// Requires `n_theta >= 2S + 1` and `n_phi >= 4S + 1`, which makes the
/// quadrature exact for products of two band-limited fields.
pub fn wigner_grid(state: &SpinState, n_theta: usize, n_phi: usize) -> Result<SphereField> {
    let two_s = state.system().n_atoms() as usize;
    if n_theta < two_s + 1 || n_phi < 2 * two_s + 1 {
        return Err(domain(format!(
            "grid {n_theta} x {n_phi} too coarse for 2S = {two_s}: need at least {} x {}",
            two_s + 1,
            2 * two_s + 1
        )));
    }
    let multipoles = multipole_components(state)?;
    let mut field = synthesize(&multipoles, n_theta, n_phi);
    let total = field.integral();
    field.values.iter_mut().for_each(|v| *v /= total);
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{coherent_state, dicke_state, SpinSystem};

    fn sys(n: u32) -> SpinSystem {
        SpinSystem::new(n).unwrap()
    }

    #[test]
    fn trace_component_and_hermiticity() {
        let s = sys(6);
        let psi = coherent_state(s, 1.1, 0.7);
        let mp = multipole_components(&psi).unwrap();
        assert!((mp.get(0, 0) - C64::new(1.0 / 7f64.sqrt(), 0.0)).norm() < 1e-14);
        for (k, q, v) in mp.iter() {
            let sign = if q.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            assert!(
                (mp.get(k, -q) - v.conj() * sign).norm() < 1e-13,
                "k={k} q={q}"
            );
        }
    }

    #[test]
    fn dicke_multipoles_are_axial() {
        let s = sys(8);
        for m in [-4, 0, 3] {
            let mp = multipole_components(&dicke_state(s, m).unwrap()).unwrap();
            for (_, q, v) in mp.iter() {
                if q != 0 {
                    assert_eq!(v, C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn grid_is_normalized_and_rejects_coarse_grids() {
        let s = sys(10);
        let psi = coherent_state(s, 0.8, 2.0);
        let w = wigner_grid(&psi, 11, 21).unwrap();
        assert!((w.integral() - 1.0).abs() < 1e-12);
        assert!(wigner_grid(&psi, 10, 21).is_err());
        assert!(wigner_grid(&psi, 11, 20).is_err());
    }

    #[test]
    fn equatorial_css_peaks_at_plus_x() {
        let s = sys(10);
        let w = wigner_grid(&coherent_state(s, PI / 2.0, 0.0), 40, 64).unwrap();
        let (i, j) = w.argmax();
        assert_eq!(j, 0);
        assert!((w.thetas[i] - PI / 2.0).abs() < PI / 40.0);
    }

    #[test]
    fn north_pole_state_peaks_at_theta_zero() {
        let s = sys(4);
        let w = wigner_grid(&dicke_state(s, 2).unwrap(), 12, 9).unwrap();
        let (i, _) = w.argmax();
        assert_eq!(i, 0);
    }
}
