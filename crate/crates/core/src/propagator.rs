//! Time evolution on the Dicke ladder under `H = chi Sz^2 + beta(t) Sz + Omega(t) Sx`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::ode::{Dop853, StepError, StepStats};
use crate::schedule::Schedule;
use crate::spin::{SpinState, SpinSystem, CONSTRUCTION_NORM_TOL};
use crate::tridiag::SymTridiagonal;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSettings {
    pub rtol: f64,
    pub atol: f64,
    /// Largest accepted `| ||psi|| - 1 |` at any segment boundary.
    pub norm_tolerance: f64,
    pub max_steps: u64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            norm_tolerance: 1e-9,
            max_steps: 2_000_000_000,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(self.rtol) && positive(self.atol) && positive(self.norm_tolerance)) {
            return Err(domain("integrator tolerances must be positive"));
        }
        if self.max_steps == 0 {
            return Err(domain("max_steps must be positive"));
        }
        Ok(())
    }
}

/// States and fields sampled along one trajectory.
#[derive(Clone, Debug)]
pub struct Trace {
    pub system: SpinSystem,
    pub times: Vec<f64>,
    pub states: Vec<SpinState>,
    pub beta: Vec<f64>,
    pub omega: Vec<f64>,
    pub stats: StepStats,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.states.iter().map(SpinState::norm).collect()
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.norms()
            .iter()
            .map(|n| (n - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn final_state(&self) -> Option<&SpinState> {
        self.states.last()
    }
}

/// Tridiagonal Hamiltonian for fixed field values.
pub fn hamiltonian(system: &SpinSystem, beta: f64, omega: f64) -> SymTridiagonal {
    let chi = system.chi();
    let diag = system
        .m_values()
        .map(|m| {
            let m = f64::from(m);
            chi * m * m + beta * m
        })
        .collect();
    let off = system
        .raising_elements()
        .iter()
        .map(|z| 0.5 * omega * z)
        .collect();
    SymTridiagonal::new(diag, off).expect("ladder dimensions are consistent")
}

/// Integrates the amplitude equations from `schedule.t_start`, recording the
/// state at each of `samples`.
///
/// Stretches where the coupling vanishes are diagonal and are evolved in
/// closed form; elsewhere DOP853 runs between field breakpoints in the
/// interaction picture of the diagonal part. No
/// renormalization is applied, and the norm is checked after every segment.
pub fn propagate(
    system: &SpinSystem,
    schedule: &Schedule,
    initial: &SpinState,
    samples: &[f64],
    settings: &IntegratorSettings,
) -> Result<Trace> {
    schedule.validate()?;
    settings.validate()?;
    if initial.system() != system {
        return Err(domain("initial state belongs to a different spin system"));
    }
    let initial_drift = (initial.norm() - 1.0).abs();
    if initial_drift > CONSTRUCTION_NORM_TOL {
        return Err(Error::Contract(format!(
            "initial state norm deviates by {initial_drift:e}"
        )));
    }
    if samples.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain("sample times must be ascending"));
    }
    if let (Some(first), Some(last)) = (samples.first(), samples.last()) {
        if *first < schedule.t_start || *last > schedule.t_end {
            return Err(domain(format!(
                "sample times [{first}, {last}] leave the window [{}, {}]",
                schedule.t_start, schedule.t_end
            )));
        }
    }

    let mut stepper = Stepper::new(system, schedule, settings);
    let mut y = initial.amplitudes().to_vec();
    let mut t = schedule.t_start;
    let breakpoints = schedule.breakpoints();
    let mut trace = Trace {
        system: *system,
        times: Vec::with_capacity(samples.len()),
        states: Vec::with_capacity(samples.len()),
        beta: Vec::with_capacity(samples.len()),
        omega: Vec::with_capacity(samples.len()),
        stats: StepStats::default(),
    };
    for &sample in samples {
        let from = t;
        for &b in breakpoints.iter().filter(|&&b| b > from && b < sample) {
            stepper.segment(t, &mut y, b)?;
            t = b;
        }
        stepper.segment(t, &mut y, sample)?;
        t = sample;
        trace.times.push(sample);
        trace.beta.push(schedule.beta_at(sample));
        trace.omega.push(schedule.omega_at(sample));
        trace.states.push(SpinState::from_raw(*system, y.clone())?);
    }
    trace.stats = stepper.solver.stats();
    Ok(trace)
}

/// Final state of [`propagate`] at `schedule.t_end`.
pub fn propagate_to_end(
    system: &SpinSystem,
    schedule: &Schedule,
    initial: &SpinState,
    settings: &IntegratorSettings,
) -> Result<SpinState> {
    let trace = propagate(system, schedule, initial, &[schedule.t_end], settings)?;
    Ok(trace
        .states
        .into_iter()
        .next()
        .expect("one sample requested"))
}

/// Evolves `state` from `t0` to `t1` under `schedule` (no window checks beyond
/// `t0 <= t1`). Used to continue a trajectory piecewise.
pub fn propagate_segment(
    schedule: &Schedule,
    state: &SpinState,
    t0: f64,
    t1: f64,
    settings: &IntegratorSettings,
) -> Result<SpinState> {
    if t1 < t0 {
        return Err(domain("segment end precedes its start"));
    }
    let system = *state.system();
    let mut stepper = Stepper::new(&system, schedule, settings);
    let mut y = state.amplitudes().to_vec();
    let mut t = t0;
    for b in schedule
        .breakpoints()
        .into_iter()
        .filter(|&b| b > t0 && b < t1)
    {
        stepper.segment(t, &mut y, b)?;
        t = b;
    }
    stepper.segment(t, &mut y, t1)?;
    SpinState::from_raw(system, y)
}

struct Stepper<'a> {
    schedule: &'a Schedule,
    settings: &'a IntegratorSettings,
    chi: f64,
    m: Vec<f64>,
    half_zeta: Vec<f64>,
    solver: Dop853,
}

impl<'a> Stepper<'a> {
    fn new(system: &SpinSystem, schedule: &'a Schedule, settings: &'a IntegratorSettings) -> Self {
        Self {
            schedule,
            settings,
            chi: system.chi(),
            m: system.m_values().map(f64::from).collect(),
            half_zeta: system.raising_elements().iter().map(|z| 0.5 * z).collect(),
            solver: Dop853::new(
                system.dim(),
                settings.rtol,
                settings.atol,
                settings.max_steps,
            ),
        }
    }

    fn coupling_vanishes(&self, a: f64, b: f64) -> bool {
        let c = &self.schedule.coupling;
        c.omega_max == 0.0 || b <= c.switch_on_start() || a >= c.switch_off_end()
    }

    fn segment(&mut self, a: f64, y: &mut [C64], b: f64) -> Result<()> {
        if b <= a {
            return Ok(());
        }
        let diagonal_phases = |y: &mut [C64], m: &[f64], t: f64| {
            let beta_integral = self.schedule.chirp.integral(a, t);
            let dt = t - a;
            for (amp, &m) in y.iter_mut().zip(m) {
                *amp *= C64::from_polar(1.0, -(self.chi * m * m * dt + m * beta_integral));
            }
        };
        if self.coupling_vanishes(a, b) {
            diagonal_phases(y, &self.m, b);
        } else {
            // Interaction picture with respect to the diagonal part, anchored
            // at `a`: a_m = exp(-i phi_m(t)) c_m, phi_m = chi m^2 (t - a) + m B(t).
            // Only the neighbour detunings chi (2m + 1) + beta remain.
            let schedule = self.schedule;
            let (chi, m, hz) = (self.chi, &self.m, &self.half_zeta);
            let n = m.len();
            let m_low = m[0];
            let mut couplings = vec![C64::new(0.0, 0.0); n.saturating_sub(1)];
            let mut rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
                let omega = schedule.omega_at(t);
                let dt = t - a;
                let b_int = schedule.chirp.integral(a, t);
                // exp(i (phi_i - phi_{i+1})) = exp(-i (chi (2 m_i + 1) dt + B))
                let mut phase = C64::from_polar(1.0, -(chi * (2.0 * m_low + 1.0) * dt + b_int));
                let step = C64::from_polar(1.0, -2.0 * chi * dt);
                for (c, &z) in couplings.iter_mut().zip(hz) {
                    *c = phase * (omega * z);
                    phase *= step;
                }
                for i in 0..n {
                    let mut h = C64::new(0.0, 0.0);
                    if i > 0 {
                        h += y[i - 1] * couplings[i - 1].conj();
                    }
                    if i + 1 < n {
                        h += y[i + 1] * couplings[i];
                    }
                    dy[i] = C64::new(h.im, -h.re);
                }
            };
            self.solver
                .integrate(&mut rhs, a, y, b)
                .map_err(|e| match e {
                    StepError::StepTooSmall { time } => Error::Integration {
                        time,
                        reason: "step size underflow".into(),
                    },
                    StepError::TooManySteps { time } => Error::Integration {
                        time,
                        reason: format!("exceeded {} steps", self.settings.max_steps),
                    },
                    StepError::NonFinite { time } => {
                        Error::Numerical(format!("non-finite amplitudes at t = {time}"))
                    }
                })?;
            diagonal_phases(y, &self.m, b);
        }
        if y.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Numerical(format!(
                "non-finite amplitudes at t = {b}"
            )));
        }
        let norm = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let drift = (norm - 1.0).abs();
        if drift > self.settings.norm_tolerance {
            return Err(Error::Integration {
                time: b,
                reason: format!(
                    "norm drift {drift:e} exceeds {:e}",
                    self.settings.norm_tolerance
                ),
            });
        }
        Ok(())
    }
}

/// Exact evolution under `chi Sz^2` alone: `a_m -> a_m exp(-i chi m^2 duration)`.
pub fn free_evolve_oat(state: &SpinState, duration: f64) -> Result<SpinState> {
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(domain(format!(
            "free-evolution duration must be >= 0, got {duration}"
        )));
    }
    let chi = state.system().chi();
    Ok(state.with_phases(|m| chi * f64::from(m * m) * duration))
}

/// Adiabatic (ascending eigenvalues) and diabatic (`E_m`, ascending `m`) levels.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub adiabatic: Vec<f64>,
    pub diabatic: Vec<f64>,
}

pub fn instantaneous_spectrum(
    system: &SpinSystem,
    schedule: &Schedule,
    t: f64,
) -> Result<Spectrum> {
    let h = hamiltonian(system, schedule.beta_at(t), schedule.omega_at(t));
    let diabatic = h.diag().to_vec();
    let adiabatic = h.eigenvalues()?;
    Ok(Spectrum {
        adiabatic,
        diabatic,
    })
}
