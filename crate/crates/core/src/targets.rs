//! Target states: extreme spin-squeezed (ESS) states as ground states of
//! `chi Sz^2 - Omega Sx`, and the contrast-matched member of that family.

use num_complex::Complex64 as C64;

use crate::error::{domain, Error, Result};
use crate::spin::{Observable, SpinState, SpinSystem};
use crate::tridiag::SymTridiagonal;

const MAX_OMEGA_RATIO: f64 = 1e6;
const CONTRAST_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct EssTarget {
    pub state: SpinState,
    pub lambda: f64,
    /// `Omega / chi`.
    pub omega_ratio: f64,
    /// `<Sx>`.
    pub contrast: f64,
}

impl EssTarget {
    /// Real amplitudes in ascending-`m` order.
    pub fn real_amplitudes(&self) -> Vec<f64> {
        self.state.amplitudes().iter().map(|a| a.re).collect()
    }

    /// Weight on `|S,0>` and `|S,+-1>`.
    pub fn three_state_weight(&self) -> f64 {
        let s = self.state.system();
        (-1..=1)
            .filter_map(|m| s.index_of(m).ok())
            .map(|i| self.state.amplitudes()[i].norm_sqr())
            .sum()
    }
}

/// `chi Sz^2 - omega_ratio * chi * Sx` as a tridiagonal matrix.
pub fn squeezing_operator(system: &SpinSystem, omega_ratio: f64) -> SymTridiagonal {
    let chi = system.chi();
    let diag = system.m_values().map(|m| chi * f64::from(m * m)).collect();
    let off = system
        .raising_elements()
        .iter()
        .map(|z| -0.5 * omega_ratio * chi * z)
        .collect();
    SymTridiagonal::new(diag, off).expect("ladder dimensions are consistent")
}

/// Ground state of the squeezing operator, with real amplitudes, exact
/// `a_m = a_{-m}` symmetry and `a_0 > 0`.
pub fn ess_ground_state(system: &SpinSystem, omega_ratio: f64) -> Result<EssTarget> {
    if !(omega_ratio.is_finite() && omega_ratio >= 0.0) {
        return Err(domain(format!(
            "omega ratio must be >= 0, got {omega_ratio}"
        )));
    }
    if omega_ratio == 0.0 {
        let state = crate::spin::dicke_state(*system, 0)?;
        return Ok(EssTarget {
            state,
            lambda: 0.0,
            omega_ratio,
            contrast: 0.0,
        });
    }
    let op = squeezing_operator(system, omega_ratio);
    let (_, mut v) = op.lowest_eigenpair(None)?;

    let dim = v.len();
    let centre = dim / 2;
    if v[centre] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    for i in 0..centre {
        let avg = 0.5 * (v[i] + v[dim - 1 - i]);
        v[i] = avg;
        v[dim - 1 - i] = avg;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);

    let hv = op.mul_vec(&v);
    let lambda: f64 = hv.iter().zip(&v).map(|(a, b)| a * b).sum();
    let residual = op.residual(lambda, &v);
    let (lo, hi) = op.gershgorin();
    if residual > 1e-10 * (1.0 + 1e-3 * (hi - lo)) {
        return Err(Error::Numerical(format!(
            "ESS eigen-residual {residual:e} too large at omega ratio {omega_ratio}"
        )));
    }

    let amplitudes = v.into_iter().map(|x| C64::new(x, 0.0)).collect();
    let state = SpinState::from_amplitudes(*system, amplitudes)?;
    let contrast = state.expectation(Observable::Sx)?;
    Ok(EssTarget {
        state,
        lambda,
        omega_ratio,
        contrast,
    })
}

/// ESS state whose contrast `<Sx>` equals `target_contrast`, found by a
/// safeguarded regula falsi on the (monotone) contrast curve.
pub fn ess_for_contrast(system: &SpinSystem, target_contrast: f64) -> Result<EssTarget> {
    let s = system.total_spin();
    if !(target_contrast > 0.0 && target_contrast < s) {
        return Err(domain(format!(
            "target contrast {target_contrast} must lie strictly between 0 and S = {s}"
        )));
    }
    let tol = CONTRAST_TOL * s;
    let residual = |w: f64| -> Result<(f64, EssTarget)> {
        let t = ess_ground_state(system, w)?;
        Ok((t.contrast - target_contrast, t))
    };

    let (mut lo, mut f_lo) = (0.0, -target_contrast);
    let mut hi = 1.0;
    let (mut f_hi, mut best) = residual(hi)?;
    while f_hi < 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        if hi > MAX_OMEGA_RATIO {
            return Err(Error::NotFound(format!(
                "no omega ratio up to {MAX_OMEGA_RATIO:e} reaches contrast {target_contrast}"
            )));
        }
        (f_hi, best) = residual(hi)?;
    }
    if f_hi.abs() < tol {
        return Ok(best);
    }

    // Illinois variant: halve the weight of a side that is retained twice.
    let mut side = 0i8;
    for _ in 0..200 {
        let mut w = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(w > lo && w < hi) {
            w = 0.5 * (lo + hi);
        }
        let (f, t) = residual(w)?;
        if f.abs() < tol {
            return Ok(t);
        }
        if f < 0.0 {
            lo = w;
            f_lo = f;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = w;
            f_hi = f;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(t);
        }
    }
    Err(Error::NotFound(format!(
        "contrast search did not converge for {target_contrast}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::wineland_xi2;
    use crate::spin::{coherent_state, dicke_state, fidelity};
    use std::f64::consts::PI;

    fn sys(n: u32) -> SpinSystem {
        SpinSystem::new(n).unwrap()
    }

    #[test]
    fn zero_coupling_gives_central_dicke_state() {
        let s = sys(10);
        let t = ess_ground_state(&s, 0.0).unwrap();
        assert_eq!(t.state, dicke_state(s, 0).unwrap());
        assert_eq!(t.lambda, 0.0);
        assert_eq!(t.contrast, 0.0);
    }

    #[test]
    fn two_atom_ground_energy() {
        // Even sector {(|1>+|-1>)/sqrt2, |0>}: [[chi, -Omega], [-Omega, 0]].
        let t = ess_ground_state(&sys(2), 1.0).unwrap();
        let exact = (1.0 - (1.0f64 + 4.0).sqrt()) / 2.0;
        assert!((t.lambda - exact).abs() < 1e-13);
    }

    #[test]
    fn strong_coupling_approaches_x_css() {
        let s = sys(10);
        let t = ess_ground_state(&s, 1e3).unwrap();
        let css = coherent_state(s, PI / 2.0, 0.0);
        assert!(fidelity(&t.state, &css).unwrap() > 0.999);
    }

    #[test]
    fn amplitudes_positive_and_even() {
        for n in [2u32, 10, 40, 100] {
            let t = ess_ground_state(&sys(n), 0.37).unwrap();
            let a = t.real_amplitudes();
            assert!(a.iter().all(|x| *x > 0.0), "N={n}");
            for i in 0..a.len() {
                assert_eq!(a[i], a[a.len() - 1 - i]);
            }
            let op = squeezing_operator(&sys(n), 0.37);
            assert!(op.residual(t.lambda, &a) < 1e-10);
        }
    }

    #[test]
    fn contrast_search_hits_half_spin() {
        let s = sys(10);
        let t = ess_for_contrast(&s, 2.5).unwrap();
        assert!((t.contrast - 2.5).abs() < 1e-8 * 5.0);
        assert!(wineland_xi2(&t.state).unwrap() < 1.0);
        assert!(t.three_state_weight() > 0.5);
    }

    #[test]
    fn contrast_near_full_spin_tends_to_css() {
        let s = sys(10);
        let t = ess_for_contrast(&s, 4.999).unwrap();
        let css = coherent_state(s, PI / 2.0, 0.0);
        assert!(t.omega_ratio > 10.0, "{}", t.omega_ratio);
        assert!(fidelity(&t.state, &css).unwrap() > 0.999);
        let xi2 = wineland_xi2(&t.state).unwrap();
        assert!(xi2 < 1.0 && xi2 > 0.9, "{xi2}");
    }

    #[test]
    fn contrast_out_of_range() {
        assert!(ess_for_contrast(&sys(10), 0.0).is_err());
        assert!(ess_for_contrast(&sys(10), 5.0).is_err());
        assert!(ess_ground_state(&sys(10), -1.0).is_err());
    }
}
