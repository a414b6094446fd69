//! ESS preparation by an early-terminated Dicke passage followed by a window
//! of free one-axis twisting, and tuning of the switch-off duration.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::metrics::{gain_db, wineland_xi2};
use crate::propagator::{free_evolve_oat, propagate_segment, propagate_to_end, IntegratorSettings};
use crate::schedule::{ess_protocol_with_switch_off, Schedule};
use crate::spin::{dicke_state, SpinState, SpinSystem};

/// Switch-off durations scanned by [`tune_ess_switch_off`], in units of `chi / alpha`.
pub const SWITCH_OFF_SCAN: (f64, f64, f64) = (0.1, 2.0, 0.025);

const GOLDEN_ITERS: usize = 40;

/// `|S, S>`, the state every passage starts from.
pub fn initial_state(system: &SpinSystem) -> SpinState {
    dicke_state(*system, system.spin()).expect("m = S is on the ladder")
}

/// Result of maximizing the overlap with a target under free OAT.
#[derive(Clone, Debug, PartialEq)]
pub struct OatScan {
    /// Free-evolution time of the best overlap.
    pub time: f64,
    pub fidelity: f64,
    /// The evolved state at `time`.
    pub state: SpinState,
}

/// `t -> |<target| exp(-i chi Sz^2 t) |state>|^2`, grouped by `m^2`.
#[derive(Clone, Debug)]
pub struct OatOverlap {
    chi: f64,
    terms: Vec<(f64, C64)>,
}

impl OatOverlap {
    pub fn new(state: &SpinState, target: &SpinState) -> Result<Self> {
        if state.system() != target.system() {
            return Err(domain("state and target belong to different spin systems"));
        }
        let mut grouped: BTreeMap<i64, C64> = BTreeMap::new();
        for ((m, a), b) in state
            .system()
            .m_values()
            .zip(state.amplitudes())
            .zip(target.amplitudes())
        {
            *grouped.entry(i64::from(m) * i64::from(m)).or_default() += b.conj() * a;
        }
        let terms = grouped.into_iter().map(|(k, c)| (k as f64, c)).collect();
        Ok(Self {
            chi: state.system().chi(),
            terms,
        })
    }

    pub fn fidelity(&self, t: f64) -> f64 {
        let overlap: C64 = self
            .terms
            .iter()
            .map(|(k, c)| c * C64::from_polar(1.0, -self.chi * k * t))
            .sum();
        overlap.norm_sqr().min(1.0)
    }

    /// Largest `m^2 chi`, the fastest frequency in the overlap.
    fn max_frequency(&self) -> f64 {
        self.terms.last().map_or(0.0, |(k, _)| k * self.chi)
    }
}

/// Maximizes the OAT overlap on `[0, window]`: a grid fine enough to resolve
/// the fastest phase, then golden-section refinement around the best node.
pub fn best_oat_overlap(state: &SpinState, target: &SpinState, window: f64) -> Result<OatScan> {
    if !(window.is_finite() && window >= 0.0) {
        return Err(domain(format!("OAT window must be >= 0, got {window}")));
    }
    let curve = OatOverlap::new(state, target)?;
    let (time, fidelity) = if window == 0.0 {
        (0.0, curve.fidelity(0.0))
    } else {
        let per_period = 32.0 * window * curve.max_frequency().max(1.0) / (2.0 * PI);
        let n = (per_period.ceil() as usize).clamp(64, 50_000_000);
        let h = window / n as f64;
        let (best_i, _) = (0..=n).map(|i| (i, curve.fidelity(i as f64 * h))).fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, f)| if f > acc.1 { (i, f) } else { acc },
        );
        let lo = (best_i as f64 - 1.0).max(0.0) * h;
        let hi = ((best_i + 1) as f64 * h).min(window);
        let (t, f) = golden_max(|t| curve.fidelity(t), lo, hi, GOLDEN_ITERS);
        let grid_f = curve.fidelity(best_i as f64 * h);
        if grid_f >= f {
            (best_i as f64 * h, grid_f)
        } else {
            (t, f)
        }
    };
    let state = free_evolve_oat(state, time)?;
    Ok(OatScan {
        time,
        fidelity,
        state,
    })
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
pub(crate) fn golden_max(
    mut f: impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    iters: usize,
) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Outcome of a passage followed by the OAT overlap scan.
#[derive(Clone, Debug, PartialEq)]
pub struct EssRapRun {
    pub schedule: Schedule,
    /// State at `schedule.t_end`.
    pub final_state: SpinState,
    pub oat: OatScan,
    /// Wineland parameter of `oat.state`.
    pub xi2: f64,
    pub gain_db: f64,
}

fn finish(
    schedule: Schedule,
    final_state: SpinState,
    target: &SpinState,
    window: f64,
) -> Result<EssRapRun> {
    let oat = best_oat_overlap(&final_state, target, window)?;
    let xi2 = wineland_xi2(&oat.state)?;
    Ok(EssRapRun {
        schedule,
        final_state,
        gain_db: gain_db(xi2)?,
        xi2,
        oat,
    })
}

/// Runs `schedule` from `|S, S>` and scans the OAT window against `target`.
pub fn run_ess_rap(
    system: &SpinSystem,
    schedule: &Schedule,
    target: &SpinState,
    settings: &IntegratorSettings,
    oat_window: f64,
) -> Result<EssRapRun> {
    let final_state = propagate_to_end(system, schedule, &initial_state(system), settings)?;
    finish(*schedule, final_state, target, oat_window)
}

/// ESS protocol whose switch-off duration maximizes the best OAT overlap
/// with `target`.
///
/// The trajectory up to the plateau end is shared by all candidates and is
/// computed once. Candidates are scanned on [`SWITCH_OFF_SCAN`] and the best
/// one is refined by golden section.
pub fn tune_ess_switch_off(
    system: &SpinSystem,
    alpha: f64,
    omega_max: f64,
    target: &SpinState,
    settings: &IntegratorSettings,
    oat_window: f64,
) -> Result<EssRapRun> {
    let unit = system.chi() / alpha;
    let (lo, hi, step) = SWITCH_OFF_SCAN;
    let base = ess_protocol_with_switch_off(system, alpha, omega_max, lo * unit)?;
    let t2 = base.coupling.t2;
    let plateau_end = propagate_segment(&base, &initial_state(system), base.t_start, t2, settings)?;

    let evaluate = |t_off: f64| -> Result<EssRapRun> {
        let schedule = ess_protocol_with_switch_off(system, alpha, omega_max, t_off)?;
        let final_state = propagate_segment(&schedule, &plateau_end, t2, schedule.t_end, settings)?;
        finish(schedule, final_state, target, oat_window)
    };

    let n = ((hi - lo) / step).round() as usize;
    let scanned: Vec<EssRapRun> = (0..=n)
        .into_par_iter()
        .map(|i| evaluate((lo + step * i as f64) * unit))
        .collect::<Result<_>>()?;
    let (best_i, _) = scanned
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, r)| {
            if r.oat.fidelity > acc.1 {
                (i, r.oat.fidelity)
            } else {
                acc
            }
        });
    let grid_t = (lo + step * best_i as f64) * unit;
    let a = (grid_t - step * unit).max(lo * unit);
    let b = (grid_t + step * unit).min(hi * unit);

    let mut failure: Option<Error> = None;
    let (t_best, _) = golden_max(
        |t| match evaluate(t) {
            Ok(r) => r.oat.fidelity,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        a,
        b,
        20,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let refined = evaluate(t_best)?;
    let grid = scanned
        .into_iter()
        .nth(best_i)
        .expect("index from enumerate");
    Ok(if refined.oat.fidelity > grid.oat.fidelity {
        refined
    } else {
        grid
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{coherent_state, fidelity};

    fn sys(n: u32) -> SpinSystem {
        SpinSystem::new(n).unwrap()
    }

    #[test]
    fn overlap_curve_matches_direct_evolution() {
        let s = sys(8);
        let a = coherent_state(s, 1.0, 0.3);
        let b = coherent_state(s, 1.4, -0.2);
        let curve = OatOverlap::new(&a, &b).unwrap();
        for t in [0.0, 0.13, 1.7, 5.0] {
            let direct = fidelity(&free_evolve_oat(&a, t).unwrap(), &b).unwrap();
            assert!((curve.fidelity(t) - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn scan_recovers_known_twisting_time() {
        let s = sys(10);
        let target = coherent_state(s, 1.2, 0.4);
        let start = free_evolve_oat(&target, 2.0 * PI - 0.8).unwrap();
        let scan = best_oat_overlap(&start, &target, 2.0 * PI).unwrap();
        assert!((scan.fidelity - 1.0).abs() < 1e-12, "{}", scan.fidelity);
        assert!((scan.time - 0.8).abs() < 1e-6, "{}", scan.time);
        assert!((fidelity(&scan.state, &target).unwrap() - scan.fidelity).abs() < 1e-12);
    }

    #[test]
    fn zero_window_is_identity() {
        let s = sys(4);
        let a = coherent_state(s, 0.7, 0.0);
        let scan = best_oat_overlap(&a, &a, 0.0).unwrap();
        assert_eq!(scan.time, 0.0);
        assert_eq!(scan.state, a);
        assert!(best_oat_overlap(&a, &a, -1.0).is_err());
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, f) = golden_max(|x| 1.0 - (x - 0.3) * (x - 0.3), 0.0, 1.0, 60);
        assert!((x - 0.3).abs() < 1e-8);
        assert!((f - 1.0).abs() < 1e-15);
    }
}
