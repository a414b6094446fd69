//! Control fields: the linear chirp `beta(t)` and the Blackman-edged coupling
//! `Omega(t)`, together with the protocol builders for Dicke and ESS targets.
//!
//! Times are absolute (units of `1/chi` when `chi = 1`). Protocol builders take
//! the chirp rate `alpha` in the same absolute units, so `chi / alpha` is a time.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::spin::SpinSystem;

/// Plateau end of the ESS protocol, in units of `chi / alpha`.
pub const ESS_PLATEAU_END: f64 = 0.5;
/// Switch-off duration of the ESS protocol, in units of `chi / alpha`.
pub const ESS_SWITCH_OFF: f64 = 0.583;

/// Blackman half-window on `s in [0, 1]`, rising from 0 to 1 with zero slope at both ends.
pub fn blackman_edge(s: f64) -> f64 {
    use std::f64::consts::PI;
    0.42 - 0.5 * (PI * s).cos() + 0.08 * (2.0 * PI * s).cos()
}

/// Detuning after the chirp stops.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChirpTail {
    /// `beta = 0` from the cutoff on.
    #[default]
    Zero,
    /// `beta` keeps its cutoff value `alpha * cutoff_time`.
    Hold,
}

/// `beta(t) = alpha * t` before `cutoff_time`; afterwards set by `tail`.
/// Both tails agree when the cutoff is at `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChirpSchedule {
    pub alpha: f64,
    #[serde(default)]
    pub cutoff_time: f64,
    #[serde(default)]
    pub tail: ChirpTail,
}

impl ChirpSchedule {
    pub fn new(alpha: f64, cutoff_time: f64) -> Result<Self> {
        let chirp = Self {
            alpha,
            cutoff_time,
            tail: ChirpTail::Zero,
        };
        chirp.validate()?;
        Ok(chirp)
    }

    pub fn with_tail(self, tail: ChirpTail) -> Self {
        Self { tail, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(domain(format!(
                "chirp rate must be positive, got {}",
                self.alpha
            )));
        }
        if !self.cutoff_time.is_finite() {
            return Err(domain("chirp cutoff must be finite"));
        }
        Ok(())
    }

    pub fn beta_at(&self, t: f64) -> f64 {
        if t < self.cutoff_time {
            self.alpha * t
        } else {
            match self.tail {
                ChirpTail::Zero => 0.0,
                ChirpTail::Hold => self.alpha * self.cutoff_time,
            }
        }
    }

    /// `int_a^b beta(t) dt`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let c = self.cutoff_time;
        let ramp = 0.5 * self.alpha * (b.min(c).powi(2) - a.min(c).powi(2));
        match self.tail {
            ChirpTail::Zero => ramp,
            ChirpTail::Hold => ramp + self.alpha * c * (b.max(c) - a.max(c)),
        }
    }
}

/// Plateau of height `omega_max` on `[t1, t2]` with Blackman edges of
/// duration `t_on` (before `t1`) and `t_off` (after `t2`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSchedule {
    pub omega_max: f64,
    pub t1: f64,
    pub t2: f64,
    pub t_on: f64,
    pub t_off: f64,
}

impl CouplingSchedule {
    pub fn new(omega_max: f64, t1: f64, t2: f64, t_on: f64, t_off: f64) -> Result<Self> {
        let coupling = Self {
            omega_max,
            t1,
            t2,
            t_on,
            t_off,
        };
        coupling.validate()?;
        Ok(coupling)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.omega_max, self.t1, self.t2, self.t_on, self.t_off]
            .iter()
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(domain("coupling parameters must be finite"));
        }
        if self.omega_max < 0.0 {
            return Err(domain(format!(
                "omega_max must be non-negative, got {}",
                self.omega_max
            )));
        }
        if self.t_on <= 0.0 || self.t_off <= 0.0 {
            return Err(domain("edge durations t_on and t_off must be positive"));
        }
        if self.t1 > self.t2 {
            return Err(domain(format!(
                "plateau start {} after plateau end {}",
                self.t1, self.t2
            )));
        }
        Ok(())
    }

    pub fn switch_on_start(&self) -> f64 {
        self.t1 - self.t_on
    }

    pub fn switch_off_end(&self) -> f64 {
        self.t2 + self.t_off
    }

    pub fn omega_at(&self, t: f64) -> f64 {
        if t <= self.switch_on_start() || t >= self.switch_off_end() {
            0.0
        } else if t < self.t1 {
            self.omega_max * blackman_edge((t - self.switch_on_start()) / self.t_on)
        } else if t <= self.t2 {
            self.omega_max
        } else {
            self.omega_max * blackman_edge((self.switch_off_end() - t) / self.t_off)
        }
    }
}

/// Both control fields plus the simulation window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub chirp: ChirpSchedule,
    pub coupling: CouplingSchedule,
    pub t_start: f64,
    pub t_end: f64,
}

impl Schedule {
    pub fn new(
        chirp: ChirpSchedule,
        coupling: CouplingSchedule,
        t_start: f64,
        t_end: f64,
    ) -> Result<Self> {
        let schedule = Self {
            chirp,
            coupling,
            t_start,
            t_end,
        };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn validate(&self) -> Result<()> {
        self.chirp.validate()?;
        self.coupling.validate()?;
        if !(self.t_start.is_finite() && self.t_end.is_finite()) {
            return Err(domain("simulation window must be finite"));
        }
        if self.t_start > self.coupling.switch_on_start() {
            return Err(domain(format!(
                "t_start = {} is after the coupling switch-on at {}",
                self.t_start,
                self.coupling.switch_on_start()
            )));
        }
        if self.t_end < self.coupling.switch_off_end() {
            return Err(domain(format!(
                "t_end = {} is before the coupling switch-off end at {}",
                self.t_end,
                self.coupling.switch_off_end()
            )));
        }
        Ok(())
    }

    pub fn beta_at(&self, t: f64) -> f64 {
        self.chirp.beta_at(t)
    }

    pub fn omega_at(&self, t: f64) -> f64 {
        self.coupling.omega_at(t)
    }

    /// Points inside `[t_start, t_end]` where a field is not smooth, ascending
    /// and deduplicated, including both window endpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        let c = &self.coupling;
        let mut points = vec![
            self.t_start,
            c.switch_on_start(),
            c.t1,
            c.t2,
            c.switch_off_end(),
            self.chirp.cutoff_time,
            self.t_end,
        ];
        points.retain(|t| (self.t_start..=self.t_end).contains(t));
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }

    /// Replaces the coupling while stretching the window if needed, keeping the
    /// original padding after switch-off.
    pub fn with_coupling(&self, coupling: CouplingSchedule) -> Result<Self> {
        let pad_after = self.t_end - self.coupling.switch_off_end();
        let pad_before = self.coupling.switch_on_start() - self.t_start;
        Schedule::new(
            self.chirp,
            coupling,
            coupling.switch_on_start() - pad_before,
            coupling.switch_off_end() + pad_after,
        )
    }
}

/// Diabatic crossing between `|S, upper_m>` and `|S, upper_m - 1>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub upper_m: i32,
    pub time: f64,
}

/// Period between successive crossings, `2 chi / alpha`.
pub fn crossing_period(system: &SpinSystem, alpha: f64) -> f64 {
    2.0 * system.chi() / alpha
}

/// Crossing times `t_{m,m-1} = chi (1 - 2m) / alpha` for `m = S` down to `1`.
pub fn crossing_times(system: &SpinSystem, alpha: f64) -> Result<Vec<Crossing>> {
    check_positive("alpha", alpha)?;
    let chi = system.chi();
    Ok((1..=system.spin())
        .rev()
        .map(|m| Crossing {
            upper_m: m,
            time: chi * f64::from(1 - 2 * m) / alpha,
        })
        .collect())
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive, got {x}")))
    }
}

/// RAP from `|S, S>` to `|S, target_m>`.
///
/// The plateau starts at `-N chi / alpha` after a switch-on of `2 chi / alpha`
/// and ends half a period after the last required crossing, where the chirp
/// also stops. The detuning is held there, midway between two resonances,
/// while the coupling switches off. The window is padded by one period on
/// both sides.
pub fn dicke_protocol(
    system: &SpinSystem,
    alpha: f64,
    omega_max: f64,
    target_m: i32,
) -> Result<Schedule> {
    check_positive("alpha", alpha)?;
    check_positive("omega_max", omega_max)?;
    if target_m < 0 || target_m >= system.spin() {
        return Err(domain(format!(
            "target m = {target_m} must satisfy 0 <= m < S = {}",
            system.spin()
        )));
    }
    let chi = system.chi();
    let tau = crossing_period(system, alpha);
    let t1 = -f64::from(system.n_atoms()) * chi / alpha;
    let t2 = f64::from(-2 * target_m) * chi / alpha;
    let edge = 2.0 * chi / alpha;
    let chirp = ChirpSchedule::new(alpha, t2)?.with_tail(ChirpTail::Hold);
    let coupling = CouplingSchedule::new(omega_max, t1, t2, edge, edge)?;
    Schedule::new(chirp, coupling, t1 - edge - tau, t2 + edge + tau)
}

/// Dicke protocol toward `|S, 0>` with the early, faster switch-off that
/// leaves the state in a squeezed superposition around `m = 0`.
pub fn ess_protocol(system: &SpinSystem, alpha: f64, omega_max: f64) -> Result<Schedule> {
    let chi = system.chi();
    ess_protocol_with_switch_off(system, alpha, omega_max, ESS_SWITCH_OFF * chi / alpha)
}

/// [`ess_protocol`] with an explicit switch-off duration.
pub fn ess_protocol_with_switch_off(
    system: &SpinSystem,
    alpha: f64,
    omega_max: f64,
    t_off: f64,
) -> Result<Schedule> {
    let base = dicke_protocol(system, alpha, omega_max, 0)?;
    let chi = system.chi();
    let coupling = CouplingSchedule {
        t2: ESS_PLATEAU_END * chi / alpha,
        t_off,
        ..base.coupling
    };
    coupling.validate()?;
    let tau = crossing_period(system, alpha);
    Schedule::new(
        base.chirp,
        coupling,
        base.t_start,
        coupling.switch_off_end() + tau,
    )
}
