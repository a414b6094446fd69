//! Metrology figures of merit for pure collective-spin states.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::spin::{Observable, SpinState, SpinSystem, EXPECTATION_NORM_TOL};

/// Contrast below `CONTRAST_THRESHOLD * S` leaves the Wineland parameter undefined.
pub const CONTRAST_THRESHOLD: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn observables(self) -> (Observable, Observable) {
        match self {
            Axis::X => (Observable::Sx, Observable::Sx2),
            Axis::Y => (Observable::Sy, Observable::Sy2),
            Axis::Z => (Observable::Sz, Observable::Sz2),
        }
    }
}

/// Neighbour used in a two-Dicke-state superposition: `|S, m + 1>` or `|S, m - 1>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QfiTriple {
    pub f_x: f64,
    pub f_y: f64,
    pub f_z: f64,
}

impl QfiTriple {
    pub fn of(state: &SpinState) -> Result<Self> {
        Ok(Self {
            f_x: qfi(state, Axis::X)?,
            f_y: qfi(state, Axis::Y)?,
            f_z: qfi(state, Axis::Z)?,
        })
    }
}

/// Pure-state quantum Fisher information `4 (<S_j^2> - <S_j>^2)`.
pub fn qfi(state: &SpinState, axis: Axis) -> Result<f64> {
    state.check_normalized(EXPECTATION_NORM_TOL)?;
    let (first, second) = axis.observables();
    let mean = state.expectation(first)?;
    let square = state.expectation(second)?;
    Ok((4.0 * (square - mean * mean)).max(0.0))
}

/// QFI of the Dicke state `|N/2, m>`: `N^2/2 - 2 m^2 + N` transverse, 0 along z.
pub fn dicke_qfi_analytic(n_atoms: u32, m: f64, axis: Axis) -> f64 {
    let n = f64::from(n_atoms);
    match axis {
        Axis::Z => 0.0,
        Axis::X | Axis::Y => n * n / 2.0 - 2.0 * m * m + n,
    }
}

/// Closed-form QFI of `cos(zeta/2) |S,m> + e^{i phi} sin(zeta/2) |S,m +- 1>`.
///
/// The population-weighted term is `-2 (1 +- 2m) sin^2(zeta/2)`, which is the
/// difference between the Dicke values at `m +- 1` and `m`.
pub fn superposition_qfi_analytic(
    n_atoms: u32,
    m: f64,
    branch: Branch,
    zeta: f64,
    phi: f64,
    axis: Axis,
) -> Result<f64> {
    let n = f64::from(n_atoms);
    let s = n / 2.0;
    let neighbour = m + branch.sign();
    if m.abs() > s || neighbour.abs() > s {
        return Err(domain(format!(
            "superposition of m = {m} and m = {neighbour} leaves the spin-{s} ladder"
        )));
    }
    let pm = branch.sign();
    let sin2_half = (0.5 * zeta).sin().powi(2);
    let sin2 = zeta.sin().powi(2);
    // zeta_{+-}(S, m)^2 = N^2/4 - m^2 + N/2 -+ m
    let coupling_sq = n * n / 4.0 - m * m + n / 2.0 - pm * m;
    let transverse = n * n / 2.0 + n - 2.0 * m * m - 2.0 * (1.0 + 2.0 * pm * m) * sin2_half;
    Ok(match axis {
        Axis::Z => sin2,
        Axis::X => transverse - sin2 * phi.cos().powi(2) * coupling_sq,
        Axis::Y => transverse - sin2 * phi.sin().powi(2) * coupling_sq,
    })
}

/// `cos(zeta/2) |S,m> + e^{i phi} sin(zeta/2) |S,m +- 1>`.
pub fn superposition_state(
    system: SpinSystem,
    m: i32,
    branch: Branch,
    zeta: f64,
    phi: f64,
) -> Result<SpinState> {
    let neighbour = match branch {
        Branch::Plus => m + 1,
        Branch::Minus => m - 1,
    };
    let (i, j) = (system.index_of(m)?, system.index_of(neighbour)?);
    let mut amps = vec![C64::new(0.0, 0.0); system.dim()];
    amps[i] = C64::new((0.5 * zeta).cos(), 0.0);
    amps[j] = C64::from_polar((0.5 * zeta).sin(), phi);
    SpinState::from_amplitudes(system, amps)
}

/// Wineland parameter `xi^2 = N Var(Sz) / <Sx>^2` (squeezing along z, mean spin along x).
pub fn wineland_xi2(state: &SpinState) -> Result<f64> {
    state.check_normalized(EXPECTATION_NORM_TOL)?;
    let s = state.system().total_spin();
    let n = f64::from(state.system().n_atoms());
    let sx = state.expectation(Observable::Sx)?;
    if sx.abs() <= CONTRAST_THRESHOLD * s {
        return Err(Error::ContrastUndefined { contrast: sx.abs() });
    }
    let sz = state.expectation(Observable::Sz)?;
    let var_z = (state.expectation(Observable::Sz2)? - sz * sz).max(0.0);
    Ok(n * var_z / (sx * sx))
}

/// Metrological gain over the coherent state, `-10 log10(xi^2)` dB.
pub fn gain_db(xi2: f64) -> Result<f64> {
    if !(xi2.is_finite() && xi2 > 0.0) {
        return Err(domain(format!(
            "squeezing parameter must be positive, got {xi2}"
        )));
    }
    Ok(-10.0 * xi2.log10())
}

/// `Var(Sz)`.
pub fn variance_sz(state: &SpinState) -> Result<f64> {
    let sz = state.expectation(Observable::Sz)?;
    Ok((state.expectation(Observable::Sz2)? - sz * sz).max(0.0))
}
