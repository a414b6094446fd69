//! Collective spin of `N` two-level atoms in the Dicke basis.
//!
//! States are stored as amplitude vectors over `m = -S, -S+1, ..., S`, so the
//! amplitude at index `i` belongs to `m = i - S`. All ladder operators are
//! banded in this basis: `Sz` is diagonal, `Sx` and `Sy` are tridiagonal.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Normalization slack accepted when a state is constructed.
pub const CONSTRUCTION_NORM_TOL: f64 = 1e-9;
/// Normalization slack accepted by expectation values and metrics.
pub const EXPECTATION_NORM_TOL: f64 = 1e-6;

/// `N` atoms with even `N`, total spin `S = N/2`, and shearing strength `chi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinSystem {
    n_atoms: u32,
    chi: f64,
}

impl SpinSystem {
    pub fn new(n_atoms: u32) -> Result<Self> {
        Self::with_chi(n_atoms, 1.0)
    }

    pub fn with_chi(n_atoms: u32, chi: f64) -> Result<Self> {
        if n_atoms < 2 || !n_atoms.is_multiple_of(2) {
            return Err(domain(format!(
                "atom number must be even and at least 2, got {n_atoms}"
            )));
        }
        if !(chi.is_finite() && chi > 0.0) {
            return Err(domain(format!(
                "shearing strength must be positive, got {chi}"
            )));
        }
        Ok(Self { n_atoms, chi })
    }

    pub fn n_atoms(&self) -> u32 {
        self.n_atoms
    }

    pub fn total_spin(&self) -> f64 {
        f64::from(self.n_atoms) / 2.0
    }

    /// Integer total spin; exact because `N` is even.
    pub fn spin(&self) -> i32 {
        (self.n_atoms / 2) as i32
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    /// Ladder dimension `N + 1`.
    pub fn dim(&self) -> usize {
        self.n_atoms as usize + 1
    }

    pub fn m_at(&self, index: usize) -> i32 {
        index as i32 - self.spin()
    }

    pub fn index_of(&self, m: i32) -> Result<usize> {
        let s = self.spin();
        if m < -s || m > s {
            return Err(domain(format!("m = {m} outside the ladder -{s}..={s}")));
        }
        Ok((m + s) as usize)
    }

    /// Magnetic quantum numbers in storage order.
    pub fn m_values(&self) -> impl Iterator<Item = i32> {
        let s = self.spin();
        -s..=s
    }

    /// `zeta_plus(S, m)` for every index but the last: the coupling between
    /// indices `i` and `i + 1`.
    pub fn raising_elements(&self) -> Vec<f64> {
        let s = self.total_spin();
        self.m_values()
            .take(self.dim() - 1)
            .map(|m| {
                let m = f64::from(m);
                ((s - m) * (s + m + 1.0)).sqrt()
            })
            .collect()
    }
}

fn is_half_integer(x: f64) -> bool {
    let twice = 2.0 * x;
    twice.is_finite() && twice == twice.round()
}

/// Transition elements `(zeta_plus, zeta_minus)` of the Dicke ladder.
///
/// `zeta_plus = sqrt((S - m)(S + m + 1))`, `zeta_minus = sqrt((S + m)(S - m + 1))`,
/// so that `<m+1|S+|m> = zeta_plus` and `<m-1|S-|m> = zeta_minus`.
pub fn ladder_coeffs(s: f64, m: f64) -> Result<(f64, f64)> {
    if !is_half_integer(s) || s < 0.0 {
        return Err(domain(format!(
            "total spin {s} is not a non-negative half-integer"
        )));
    }
    if !is_half_integer(m) || !is_half_integer(s - m) || (s - m).fract() != 0.0 {
        return Err(domain(format!("m = {m} is not on the spin-{s} ladder")));
    }
    if m.abs() > s {
        return Err(domain(format!("|m| = {} exceeds S = {s}", m.abs())));
    }
    let plus = ((s - m) * (s + m + 1.0)).sqrt();
    let minus = ((s + m) * (s - m + 1.0)).sqrt();
    Ok((plus, minus))
}

/// Collective spin observables with closed-form Dicke matrix elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observable {
    Sx,
    Sy,
    Sz,
    Sx2,
    Sy2,
    Sz2,
}

/// Pure state on the symmetric (Dicke) subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinState {
    system: SpinSystem,
    amplitudes: Vec<C64>,
}

impl SpinState {
    /// Wraps an amplitude vector in ascending-`m` order. The vector must have
    /// length `N + 1` and unit norm to within [`CONSTRUCTION_NORM_TOL`].
    pub fn from_amplitudes(system: SpinSystem, amplitudes: Vec<C64>) -> Result<Self> {
        let state = Self::from_raw(system, amplitudes)?;
        let deviation = (state.norm() - 1.0).abs();
        if deviation > CONSTRUCTION_NORM_TOL {
            return Err(Error::Contract(format!(
                "state norm deviates from 1 by {deviation:e}"
            )));
        }
        Ok(state)
    }

    /// Scales `amplitudes` to unit norm.
    pub fn normalized(system: SpinSystem, mut amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != system.dim() {
            return Err(domain(format!(
                "expected {} amplitudes, got {}",
                system.dim(),
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Contract(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { system, amplitudes })
    }

    /// Length-checked but not norm-checked; used for integrator output whose
    /// drift is monitored separately.
    pub(crate) fn from_raw(system: SpinSystem, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != system.dim() {
            return Err(domain(format!(
                "expected {} amplitudes, got {}",
                system.dim(),
                amplitudes.len()
            )));
        }
        Ok(Self { system, amplitudes })
    }

    pub fn system(&self) -> &SpinSystem {
        &self.system
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn amplitude(&self, m: i32) -> Result<C64> {
        Ok(self.amplitudes[self.system.index_of(m)?])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub(crate) fn check_normalized(&self, tol: f64) -> Result<()> {
        let deviation = (self.norm() - 1.0).abs();
        if deviation > tol {
            return Err(Error::Contract(format!(
                "state is not normalized (norm deviation {deviation:e})"
            )));
        }
        Ok(())
    }

    /// `<psi|O|psi>` for a normalized state.
    pub fn expectation(&self, observable: Observable) -> Result<f64> {
        self.check_normalized(EXPECTATION_NORM_TOL)?;
        let a = &self.amplitudes;
        let zeta = self.system.raising_elements();
        let value = match observable {
            Observable::Sz => self
                .system
                .m_values()
                .zip(a)
                .map(|(m, c)| f64::from(m) * c.norm_sqr())
                .sum(),
            Observable::Sz2 => self
                .system
                .m_values()
                .zip(a)
                .map(|(m, c)| f64::from(m * m) * c.norm_sqr())
                .sum(),
            Observable::Sx => zeta
                .iter()
                .enumerate()
                .map(|(i, z)| z * (a[i + 1].conj() * a[i]).re)
                .sum(),
            Observable::Sy => zeta
                .iter()
                .enumerate()
                .map(|(i, z)| z * (a[i + 1].conj() * a[i]).im)
                .sum(),
            Observable::Sx2 => norm_sqr(&apply_transverse(a, &zeta, Transverse::X)),
            Observable::Sy2 => norm_sqr(&apply_transverse(a, &zeta, Transverse::Y)),
        };
        Ok(value)
    }

    /// `Sx` applied to the state (not normalized).
    pub fn apply_sx(&self) -> Vec<C64> {
        apply_transverse(
            &self.amplitudes,
            &self.system.raising_elements(),
            Transverse::X,
        )
    }

    /// `Sy` applied to the state (not normalized).
    pub fn apply_sy(&self) -> Vec<C64> {
        apply_transverse(
            &self.amplitudes,
            &self.system.raising_elements(),
            Transverse::Y,
        )
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &SpinState) -> Result<C64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(domain(format!(
                "dimension mismatch: {} vs {}",
                self.amplitudes.len(),
                other.amplitudes.len()
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| x.conj() * y)
            .sum())
    }

    /// Multiplies every amplitude by `exp(-i * phase(m))`.
    pub fn with_phases(&self, phase: impl Fn(i32) -> f64) -> SpinState {
        let amplitudes = self
            .system
            .m_values()
            .zip(&self.amplitudes)
            .map(|(m, a)| a * C64::from_polar(1.0, -phase(m)))
            .collect();
        SpinState {
            system: self.system,
            amplitudes,
        }
    }
}

#[derive(Clone, Copy)]
enum Transverse {
    X,
    Y,
}

fn apply_transverse(a: &[C64], zeta: &[f64], axis: Transverse) -> Vec<C64> {
    let n = a.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    for i in 0..n - 1 {
        let c = 0.5 * zeta[i];
        match axis {
            // <i+1|Sx|i> = <i|Sx|i+1> = c
            Transverse::X => {
                out[i + 1] += a[i] * c;
                out[i] += a[i + 1] * c;
            }
            // <i+1|Sy|i> = -i c, <i|Sy|i+1> = +i c
            Transverse::Y => {
                out[i + 1] += a[i] * C64::new(0.0, -c);
                out[i] += a[i + 1] * C64::new(0.0, c);
            }
        }
    }
    out
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// The Dicke state `|S, m>`.
pub fn dicke_state(system: SpinSystem, m: i32) -> Result<SpinState> {
    let index = system.index_of(m)?;
    let mut amplitudes = vec![C64::new(0.0, 0.0); system.dim()];
    amplitudes[index] = C64::new(1.0, 0.0);
    Ok(SpinState { system, amplitudes })
}

/// Coherent spin state with polar angle `theta` from `+z` (so `theta = 0` is
/// `|S, S>`) and phase convention `exp(-i (S - m) phi)`.
///
/// Amplitudes are built in log space, so this is safe for large `N`.
pub fn coherent_state(system: SpinSystem, theta: f64, phi: f64) -> SpinState {
    let n = system.n_atoms() as usize;
    let s = system.spin();
    let (sin_half, cos_half) = (0.5 * theta).sin_cos();
    let ln_fact = ln_factorials(n);
    let amplitudes = (0..=n)
        .map(|k| {
            // k = S + m spins up
            let up = k;
            let down = n - k;
            let magnitude = if (up > 0 && cos_half == 0.0) || (down > 0 && sin_half == 0.0) {
                0.0
            } else {
                let ln_binom = ln_fact[n] - ln_fact[up] - ln_fact[down];
                let mut ln_mag = 0.5 * ln_binom;
                if up > 0 {
                    ln_mag += up as f64 * cos_half.abs().ln();
                }
                if down > 0 {
                    ln_mag += down as f64 * sin_half.abs().ln();
                }
                let sign_flips =
                    (if cos_half < 0.0 { up } else { 0 }) + (if sin_half < 0.0 { down } else { 0 });
                let sign = if sign_flips % 2 == 0 { 1.0 } else { -1.0 };
                sign * ln_mag.exp()
            };
            let m = k as i32 - s;
            C64::from_polar(magnitude, -f64::from(s - m) * phi)
        })
        .collect();
    SpinState::normalized(system, amplitudes).expect("coherent state has non-zero norm")
}

/// `ln(k!)` for `k = 0..=n`.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

/// `|<a|b>|^2`, invariant under global phases of either argument.
pub fn fidelity(a: &SpinState, b: &SpinState) -> Result<f64> {
    let overlap = a.inner(b)?.norm_sqr();
    Ok(overlap.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sys(n: u32) -> SpinSystem {
        SpinSystem::new(n).unwrap()
    }

    #[test]
    fn rejects_odd_or_tiny_systems() {
        assert!(SpinSystem::new(3).is_err());
        assert!(SpinSystem::new(0).is_err());
        assert!(SpinSystem::with_chi(4, -1.0).is_err());
        assert_eq!(sys(10).dim(), 11);
        assert_eq!(sys(10).total_spin(), 5.0);
    }

    #[test]
    fn ladder_top_and_middle() {
        let (p, m) = ladder_coeffs(5.0, 5.0).unwrap();
        assert_eq!(p, 0.0);
        assert!((m - 10f64.sqrt()).abs() < 1e-15);
        let (p, m) = ladder_coeffs(5.0, 0.0).unwrap();
        assert!((p - 30f64.sqrt()).abs() < 1e-14 && (m - 30f64.sqrt()).abs() < 1e-14);
        let (p, m) = ladder_coeffs(1.0, 0.0).unwrap();
        assert!((p - 2f64.sqrt()).abs() < 1e-15 && (m - 2f64.sqrt()).abs() < 1e-15);
        let (p, m) = ladder_coeffs(0.5, -0.5).unwrap();
        assert_eq!((p, m), (1.0, 0.0));
    }

    #[test]
    fn ladder_rejects_off_ladder() {
        assert!(ladder_coeffs(5.0, 6.0).is_err());
        assert!(ladder_coeffs(5.0, 0.5).is_err());
        assert!(ladder_coeffs(2.3, 0.3).is_err());
    }

    #[test]
    fn dicke_construction() {
        let s = sys(2);
        let d = dicke_state(s, -1).unwrap();
        assert_eq!(d.amplitudes()[0], C64::new(1.0, 0.0));
        assert_eq!(d.amplitudes()[1], C64::new(0.0, 0.0));
        assert!(dicke_state(s, 2).is_err());

        let d0 = dicke_state(sys(10), 0).unwrap();
        assert_eq!(d0.expectation(Observable::Sz).unwrap(), 0.0);
        assert_eq!(d0.expectation(Observable::Sz2).unwrap(), 0.0);
        let top = dicke_state(sys(10), 5).unwrap();
        assert!((top.expectation(Observable::Sx2).unwrap() - 2.5).abs() < 1e-12);
        assert!((top.expectation(Observable::Sz).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn coherent_poles_and_equator() {
        let s = sys(10);
        let north = coherent_state(s, 0.0, 0.0);
        assert!((fidelity(&north, &dicke_state(s, 5).unwrap()).unwrap() - 1.0).abs() < 1e-14);
        let south = coherent_state(s, PI, 0.0);
        assert!((fidelity(&south, &dicke_state(s, -5).unwrap()).unwrap() - 1.0).abs() < 1e-14);

        let eq = coherent_state(s, PI / 2.0, 0.0);
        // Binomial moments of (|up> + |down>)^{x10} / 2^5.
        assert!((eq.expectation(Observable::Sx).unwrap() - 5.0).abs() < 1e-12);
        let var_z = eq.expectation(Observable::Sz2).unwrap()
            - eq.expectation(Observable::Sz).unwrap().powi(2);
        assert!((var_z - 2.5).abs() < 1e-12);
    }

    #[test]
    fn coherent_two_atom_overlap() {
        let s = sys(2);
        let eq = coherent_state(s, PI / 2.0, 0.0);
        let f = fidelity(&eq, &dicke_state(s, 0).unwrap()).unwrap();
        assert!((f - 0.5).abs() < 1e-14);
    }

    #[test]
    fn coherent_large_n_is_finite() {
        let s = sys(10_000);
        let eq = coherent_state(s, PI / 2.0, 0.3);
        assert!((eq.norm() - 1.0).abs() < 1e-12);
        let sx = eq.expectation(Observable::Sx).unwrap();
        let sy = eq.expectation(Observable::Sy).unwrap();
        assert!(((sx * sx + sy * sy).sqrt() - 5000.0).abs() < 1e-6);
    }

    #[test]
    fn fidelity_basics() {
        let s = sys(10);
        let a = dicke_state(s, 0).unwrap();
        let b = dicke_state(s, 1).unwrap();
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
        assert_eq!(fidelity(&a, &a).unwrap(), 1.0);
        let c = dicke_state(sys(4), 0).unwrap();
        assert!(matches!(fidelity(&a, &c), Err(Error::Domain(_))));
    }

    #[test]
    fn expectation_requires_normalization() {
        let s = sys(2);
        let raw = SpinState::from_raw(s, vec![C64::new(1.0, 0.0); 3]).unwrap();
        assert!(matches!(
            raw.expectation(Observable::Sx),
            Err(Error::Contract(_))
        ));
        assert!(SpinState::from_amplitudes(s, vec![C64::new(1.0, 0.0); 3]).is_err());
    }
}
