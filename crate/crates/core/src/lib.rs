//! Preparation of Dicke and extreme spin-squeezed states of a collective spin
//! by chirped rapid adiabatic passage under one-axis twisting.
//!
//! The model is `H = chi Sz^2 + beta(t) Sz + Omega(t) Sx` in `N + 1`
//! dimensional Dicke space, with `hbar = 1`. Times are in units of `1/chi`
//! whenever `chi = 1`.

pub mod error;
pub mod ess_rap;
pub mod metrics;
pub mod ode;
pub mod propagator;
pub mod schedule;
pub mod spin;
pub mod targets;
pub mod tridiag;
pub mod wigner;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use ess_rap::{
    best_oat_overlap, initial_state, run_ess_rap, tune_ess_switch_off, EssRapRun, OatScan,
};
pub use metrics::{gain_db, qfi, superposition_state, wineland_xi2, Axis, Branch, QfiTriple};
pub use propagator::{propagate, propagate_to_end, IntegratorSettings, Trace};
pub use schedule::{
    crossing_times, dicke_protocol, ess_protocol, ChirpSchedule, ChirpTail, CouplingSchedule,
    Crossing, Schedule,
};
pub use spin::{coherent_state, dicke_state, fidelity, Observable, SpinState, SpinSystem};
pub use targets::{ess_for_contrast, ess_ground_state, EssTarget};
pub use wigner::{wigner_grid, SphereField};
