//! Subcommand implementations. Each returns the files it would write as
//! named in-memory artifacts; nothing touches the disk until a run is done.

use dicke_rap::ess_rap::{
    best_oat_overlap, initial_state, run_ess_rap, tune_ess_switch_off, OatScan,
};
use dicke_rap::metrics::variance_sz;
use dicke_rap::ode::StepStats;
use dicke_rap::propagator::{instantaneous_spectrum, propagate};
use dicke_rap::{
    crossing_times, dicke_state, ess_for_contrast, fidelity, gain_db, wigner_grid, wineland_xi2,
    Error, EssTarget, Observable, QfiTriple, Schedule, SpinState, SpinSystem, Trace,
};
use log::info;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{
    EssTargetConfig, ResolvedTarget, RobustnessConfig, ScenarioConfig, SweepConfig,
};
use crate::error::Result;
use crate::export::{self, fmt};

/// A file produced by a run: name relative to the output directory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Metrics of one state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateMetrics {
    pub fidelity: f64,
    pub qfi: QfiTriple,
    pub sx: f64,
    pub var_sz: f64,
    /// `None` when the contrast is below threshold.
    pub xi2: Option<f64>,
    pub gain_db: Option<f64>,
    pub contrast_undefined: bool,
    pub norm: f64,
}

impl StateMetrics {
    pub fn of(state: &SpinState, target: &SpinState) -> Result<Self> {
        let (xi2, contrast_undefined) = match wineland_xi2(state) {
            Ok(x) => (Some(x), false),
            Err(Error::ContrastUndefined { .. }) => (None, true),
            Err(e) => return Err(e.into()),
        };
        Ok(Self {
            fidelity: fidelity(state, target)?,
            qfi: QfiTriple::of(state)?,
            sx: state.expectation(Observable::Sx)?,
            var_sz: variance_sz(state)?,
            gain_db: xi2.map(gain_db).transpose()?,
            xi2,
            contrast_undefined,
            norm: state.norm(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TargetSummary {
    Dicke {
        m: i32,
    },
    Ess {
        contrast: f64,
        omega_ratio: f64,
        lambda: f64,
        xi2: f64,
        gain_db: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OatSummary {
    pub window: f64,
    pub best_time: f64,
    pub state: StateMetrics,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub tool_version: &'static str,
    pub config: ScenarioConfig,
    pub schedule: Schedule,
    pub target: TargetSummary,
    pub final_time: f64,
    #[serde(rename = "final")]
    pub final_state: StateMetrics,
    pub oat: Option<OatSummary>,
    pub max_norm_drift: f64,
    pub integrator: StepStats,
}

/// Everything `simulate` computes.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub system: SpinSystem,
    pub target: SpinState,
    pub trace: Trace,
    pub oat: Option<OatScan>,
    pub summary: SimulationSummary,
}

fn target_state(system: &SpinSystem, target: ResolvedTarget) -> Result<(SpinState, TargetSummary)> {
    Ok(match target {
        ResolvedTarget::Dicke(m) => (dicke_state(*system, m)?, TargetSummary::Dicke { m }),
        ResolvedTarget::Ess(c) => {
            let t = ess_for_contrast(system, c)?;
            let xi2 = wineland_xi2(&t.state)?;
            let summary = TargetSummary::Ess {
                contrast: t.contrast,
                omega_ratio: t.omega_ratio,
                lambda: t.lambda,
                xi2,
                gain_db: gain_db(xi2)?,
            };
            (t.state, summary)
        }
    })
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

pub fn simulate(cfg: &ScenarioConfig) -> Result<Simulation> {
    cfg.validate()?;
    let resolved = cfg.resolved();
    let system = cfg.system()?;
    let (target, target_summary) = target_state(&system, cfg.target()?)?;
    let window = cfg.oat_window();
    let schedule = if cfg.tunes_switch_off() {
        info!("tuning ESS switch-off for N = {}", cfg.n_atoms);
        tune_ess_switch_off(
            &system,
            cfg.alpha,
            cfg.omega_max,
            &target,
            &cfg.integrator,
            window,
        )?
        .schedule
    } else {
        cfg.schedule()?
    };
    let samples = linspace(schedule.t_start, schedule.t_end, cfg.samples);
    info!(
        "propagating N = {} over [{}, {}]",
        cfg.n_atoms, schedule.t_start, schedule.t_end
    );
    let trace = propagate(
        &system,
        &schedule,
        &initial_state(&system),
        &samples,
        &cfg.integrator,
    )?;
    let final_state = trace.final_state().expect("at least two samples");
    let oat = if window > 0.0 {
        Some(best_oat_overlap(final_state, &target, window)?)
    } else {
        None
    };
    let summary = SimulationSummary {
        tool_version: TOOL_VERSION,
        config: resolved,
        schedule,
        target: target_summary,
        final_time: schedule.t_end,
        final_state: StateMetrics::of(final_state, &target)?,
        oat: oat
            .as_ref()
            .map(|o| -> Result<OatSummary> {
                Ok(OatSummary {
                    window,
                    best_time: o.time,
                    state: StateMetrics::of(&o.state, &target)?,
                })
            })
            .transpose()?,
        max_norm_drift: trace.max_norm_drift(),
        integrator: trace.stats,
    };
    Ok(Simulation {
        system,
        target,
        trace,
        oat,
        summary,
    })
}

pub fn run_simulate(cfg: &ScenarioConfig) -> Result<Vec<Artifact>> {
    let sim = simulate(cfg)?;
    Ok(vec![
        Artifact {
            name: cfg.outputs.trace.clone(),
            contents: export::trace_csv(&sim.trace, cfg.alpha, &sim.target)?,
        },
        Artifact {
            name: cfg.outputs.summary.clone(),
            contents: export::to_json_line(&sim.summary)?,
        },
    ])
}

/// Diabatic levels `m0 .. m0 + k - 1` starting at the target (shifted down
/// if the ladder ends first), sampled together with the adiabatic spectrum.
pub struct Levels {
    pub times: Vec<f64>,
    pub ms: Vec<i32>,
    pub diabatic: Vec<Vec<f64>>,
    pub adiabatic: Vec<Vec<f64>>,
}

pub fn levels(cfg: &ScenarioConfig) -> Result<Levels> {
    cfg.validate()?;
    let system = cfg.system()?;
    let schedule = cfg.schedule()?;
    let k = cfg.levels as i32;
    let m0 = match cfg.target()? {
        ResolvedTarget::Dicke(m) => m,
        ResolvedTarget::Ess(_) => 0,
    }
    .min(system.spin() - k + 1)
    .max(-system.spin());
    let ms: Vec<i32> = (m0..m0 + k).collect();
    let times = linspace(schedule.t_start, schedule.t_end, cfg.samples);
    let spectra: Vec<(Vec<f64>, Vec<f64>)> = times
        .par_iter()
        .map(|&t| -> Result<(Vec<f64>, Vec<f64>)> {
            let spec = instantaneous_spectrum(&system, &schedule, t)?;
            let diabatic = ms
                .iter()
                .map(|&m| spec.diabatic[(m + system.spin()) as usize])
                .collect();
            Ok((diabatic, spec.adiabatic[..k as usize].to_vec()))
        })
        .collect::<Result<_>>()?;
    let (diabatic, adiabatic) = spectra.into_iter().unzip();
    Ok(Levels {
        times,
        ms,
        diabatic,
        adiabatic,
    })
}

pub fn run_levels(cfg: &ScenarioConfig) -> Result<Vec<Artifact>> {
    let lv = levels(cfg)?;
    let system = cfg.system()?;
    let crossings = crossing_times(&system, cfg.alpha)?;
    Ok(vec![
        Artifact {
            name: cfg.outputs.levels.clone(),
            contents: export::levels_csv(&lv.times, &lv.ms, &lv.diabatic, &lv.adiabatic)?,
        },
        Artifact {
            name: cfg.outputs.crossings.clone(),
            contents: export::crossings_csv(&crossings, cfg.alpha, system.chi())?,
        },
    ])
}

pub fn run_wigner(cfg: &ScenarioConfig) -> Result<Vec<Artifact>> {
    cfg.validate()?;
    let resolved = cfg.resolved();
    let state = match cfg.wigner.time {
        Some(t) => {
            let system = cfg.system()?;
            let schedule = cfg.schedule()?;
            let trace = propagate(
                &system,
                &schedule,
                &initial_state(&system),
                &[t],
                &cfg.integrator,
            )?;
            trace.states.into_iter().next().expect("one sample")
        }
        None => {
            let sim = simulate(cfg)?;
            match sim.oat {
                Some(o) => o.state,
                None => sim.trace.final_state().expect("samples").clone(),
            }
        }
    };
    let field = wigner_grid(
        &state,
        resolved.wigner.n_theta.unwrap(),
        resolved.wigner.n_phi.unwrap(),
    )?;
    Ok(vec![Artifact {
        name: cfg.outputs.wigner.clone(),
        contents: export::wigner_csv(&field)?,
    }])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EssTargetReport {
    pub tool_version: &'static str,
    pub config: EssTargetConfig,
    pub n_atoms: u32,
    pub contrast: f64,
    pub omega_ratio: f64,
    pub lambda: f64,
    pub xi2: f64,
    pub gain_db: f64,
    /// Real amplitudes, ascending `m` from `-S`.
    pub amplitudes: Vec<f64>,
}

pub fn ess_target(cfg: &EssTargetConfig) -> Result<(EssTarget, EssTargetReport)> {
    cfg.validate()?;
    let system = SpinSystem::new(cfg.n_atoms)?;
    let t = ess_for_contrast(&system, cfg.contrast_fraction * system.total_spin())?;
    let xi2 = wineland_xi2(&t.state)?;
    let report = EssTargetReport {
        tool_version: TOOL_VERSION,
        config: cfg.clone(),
        n_atoms: cfg.n_atoms,
        contrast: t.contrast,
        omega_ratio: t.omega_ratio,
        lambda: t.lambda,
        xi2,
        gain_db: gain_db(xi2)?,
        amplitudes: t.real_amplitudes(),
    };
    Ok((t, report))
}

pub fn run_ess_target(cfg: &EssTargetConfig) -> Result<Vec<Artifact>> {
    let (_, report) = ess_target(cfg)?;
    Ok(vec![Artifact {
        name: cfg.output.clone(),
        contents: export::to_json_line(&report)?,
    }])
}

/// One row of the scaling study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n_atoms: u32,
    pub ideal_omega_ratio: f64,
    pub ideal_xi2: f64,
    pub ideal_gain_db: f64,
    pub rap_xi2: f64,
    pub rap_gain_db: f64,
    pub fidelity: f64,
    pub oat_time: f64,
    /// Switch-off duration in units of `chi / alpha`.
    pub switch_off: f64,
}

pub const SCALING_HEADER: [&str; 10] = [
    "n_atoms",
    "ideal_omega_ratio",
    "ideal_xi2",
    "ideal_gain_db",
    "rap_xi2",
    "rap_gain_db",
    "gain_gap_db",
    "fidelity",
    "oat_time",
    "switch_off",
];

fn ess_run(
    system: &SpinSystem,
    target: &SpinState,
    alpha: f64,
    omega_max: f64,
    tune: bool,
    settings: &dicke_rap::IntegratorSettings,
    window: f64,
) -> Result<dicke_rap::EssRapRun> {
    Ok(if tune {
        tune_ess_switch_off(system, alpha, omega_max, target, settings, window)?
    } else {
        run_ess_rap(
            system,
            &dicke_rap::ess_protocol(system, alpha, omega_max)?,
            target,
            settings,
            window,
        )?
    })
}

pub fn sweep_scaling(cfg: &SweepConfig) -> Result<Vec<ScalingRow>> {
    cfg.validate()?;
    cfg.n_list
        .par_iter()
        .map(|&n| -> Result<ScalingRow> {
            let system = SpinSystem::new(n)?;
            let ideal = ess_for_contrast(&system, cfg.contrast_fraction * system.total_spin())?;
            let ideal_xi2 = wineland_xi2(&ideal.state)?;
            info!("scaling point N = {n}");
            let run = ess_run(
                &system,
                &ideal.state,
                cfg.alpha,
                cfg.omega_max,
                cfg.tune_switch_off,
                &cfg.integrator,
                cfg.oat_window,
            )?;
            Ok(ScalingRow {
                n_atoms: n,
                ideal_omega_ratio: ideal.omega_ratio,
                ideal_xi2,
                ideal_gain_db: gain_db(ideal_xi2)?,
                rap_xi2: run.xi2,
                rap_gain_db: run.gain_db,
                fidelity: run.oat.fidelity,
                oat_time: run.oat.time,
                switch_off: run.schedule.coupling.t_off * cfg.alpha / system.chi(),
            })
        })
        .collect()
}

pub fn run_sweep_scaling(cfg: &SweepConfig) -> Result<Vec<Artifact>> {
    let rows: Vec<Vec<String>> = sweep_scaling(cfg)?
        .iter()
        .map(|r| {
            vec![
                r.n_atoms.to_string(),
                fmt(r.ideal_omega_ratio),
                fmt(r.ideal_xi2),
                fmt(r.ideal_gain_db),
                fmt(r.rap_xi2),
                fmt(r.rap_gain_db),
                fmt(r.ideal_gain_db - r.rap_gain_db),
                fmt(r.fidelity),
                fmt(r.oat_time),
                fmt(r.switch_off),
            ]
        })
        .collect();
    Ok(vec![Artifact {
        name: cfg.output.clone(),
        contents: export::table_csv(&SCALING_HEADER, &rows)?,
    }])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RobustnessCase {
    pub n_actual: u32,
    pub n_design: u32,
    pub matched_gain_db: f64,
    pub mismatched_gain_db: f64,
    /// `matched - mismatched`; negative when the foreign schedule does better.
    pub decrease_db: f64,
    pub matched_fidelity: f64,
    pub mismatched_fidelity: f64,
    /// Switch-off durations in units of `chi / alpha`.
    pub matched_switch_off: f64,
    pub design_switch_off: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RobustnessReport {
    pub tool_version: &'static str,
    pub config: RobustnessConfig,
    pub cases: Vec<RobustnessCase>,
    /// Case with the largest decrease.
    pub worst: RobustnessCase,
}

fn tuned_for(
    cfg: &RobustnessConfig,
    n: u32,
) -> Result<(SpinSystem, SpinState, dicke_rap::EssRapRun)> {
    let system = SpinSystem::new(n)?;
    let target = ess_for_contrast(&system, cfg.contrast_fraction * system.total_spin())?.state;
    let run = tune_ess_switch_off(
        &system,
        cfg.alpha,
        cfg.omega_max,
        &target,
        &cfg.integrator,
        cfg.oat_window,
    )?;
    Ok((system, target, run))
}

pub fn robustness(cfg: &RobustnessConfig) -> Result<RobustnessReport> {
    cfg.validate()?;
    let cases: Vec<RobustnessCase> = cfg
        .n_list
        .par_iter()
        .map(|&n| -> Result<RobustnessCase> {
            let n_design = cfg.design_atoms(n);
            info!("robustness N = {n}, designed for {n_design}");
            let (system, target, matched) = tuned_for(cfg, n)?;
            let design = if n_design == n {
                matched.clone()
            } else {
                tuned_for(cfg, n_design)?.2
            };
            let applied = if n_design == n {
                matched.clone()
            } else {
                run_ess_rap(
                    &system,
                    &design.schedule,
                    &target,
                    &cfg.integrator,
                    cfg.oat_window,
                )?
            };
            let unit = cfg.alpha / system.chi();
            Ok(RobustnessCase {
                n_actual: n,
                n_design,
                matched_gain_db: matched.gain_db,
                mismatched_gain_db: applied.gain_db,
                decrease_db: matched.gain_db - applied.gain_db,
                matched_fidelity: matched.oat.fidelity,
                mismatched_fidelity: applied.oat.fidelity,
                matched_switch_off: matched.schedule.coupling.t_off * unit,
                design_switch_off: design.schedule.coupling.t_off * unit,
            })
        })
        .collect::<Result<_>>()?;
    let worst = cases
        .iter()
        .fold(None::<&RobustnessCase>, |acc, c| match acc {
            Some(w) if w.decrease_db >= c.decrease_db => Some(w),
            _ => Some(c),
        })
        .expect("n_list is non-empty")
        .clone();
    Ok(RobustnessReport {
        tool_version: TOOL_VERSION,
        config: cfg.clone(),
        cases,
        worst,
    })
}

pub fn run_robustness(cfg: &RobustnessConfig) -> Result<Vec<Artifact>> {
    let report = robustness(cfg)?;
    Ok(vec![Artifact {
        name: cfg.output.clone(),
        contents: export::to_json_line(&report)?,
    }])
}
