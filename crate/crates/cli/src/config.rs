//! JSON scenario files. Every file carries `version`; unknown keys are
//! rejected and all values are checked before any computation starts.

use std::f64::consts::PI;
use std::path::Path;

use dicke_rap::schedule::{
    crossing_period, dicke_protocol, ess_protocol_with_switch_off, ESS_SWITCH_OFF,
};
use dicke_rap::{CouplingSchedule, IntegratorSettings, Schedule, SpinSystem};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{config, CliError, Result};

pub const CONFIG_VERSION: u32 = 1;

fn default_contrast_fraction() -> f64 {
    0.5
}

fn default_samples() -> usize {
    1001
}

fn default_levels() -> usize {
    5
}

fn default_oat_window() -> f64 {
    2.0 * PI
}

fn default_design_factor() -> f64 {
    1.1
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Protocol {
    /// Passage from `|S,S>` to `|S, target_m>`; `plateau_end` (units
    /// `chi/alpha`) moves the end of the plateau and keeps the chirp.
    Dicke {
        target_m: i32,
        #[serde(default)]
        plateau_end: Option<f64>,
    },
    /// Early switch-off toward an ESS state of contrast `fraction * S`.
    /// `switch_off` is in units of `chi/alpha`; with `tune_switch_off` it is
    /// chosen to maximize the overlap with the target.
    Ess {
        #[serde(default = "default_contrast_fraction")]
        contrast_fraction: f64,
        #[serde(default)]
        switch_off: Option<f64>,
        #[serde(default)]
        tune_switch_off: bool,
    },
    Custom {
        schedule: Schedule,
        target: TargetSpec,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TargetSpec {
    Dicke { m: i32 },
    Ess { contrast_fraction: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "Outputs::default_trace")]
    pub trace: String,
    #[serde(default = "Outputs::default_summary")]
    pub summary: String,
    #[serde(default = "Outputs::default_levels")]
    pub levels: String,
    #[serde(default = "Outputs::default_crossings")]
    pub crossings: String,
    #[serde(default = "Outputs::default_wigner")]
    pub wigner: String,
}

impl Outputs {
    fn default_trace() -> String {
        "trace.csv".into()
    }
    fn default_summary() -> String {
        "summary.json".into()
    }
    fn default_levels() -> String {
        "levels.csv".into()
    }
    fn default_crossings() -> String {
        "crossings.csv".into()
    }
    fn default_wigner() -> String {
        "wigner.csv".into()
    }
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            trace: Self::default_trace(),
            summary: Self::default_summary(),
            levels: Self::default_levels(),
            crossings: Self::default_crossings(),
            wigner: Self::default_wigner(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerSection {
    /// Trace time of the exported state; `None` takes the final state after
    /// the OAT scan.
    #[serde(default)]
    pub time: Option<f64>,
    #[serde(default)]
    pub n_theta: Option<usize>,
    #[serde(default)]
    pub n_phi: Option<usize>,
}

/// Input of `simulate`, `levels` and `wigner`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub n_atoms: u32,
    /// Chirp rate in units of `chi^2`.
    pub alpha: f64,
    /// Plateau coupling in units of `chi`.
    pub omega_max: f64,
    pub protocol: Protocol,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    /// Free OAT window scanned after the passage (units `1/chi`). Defaults
    /// to one period for ESS targets and to no scan for Dicke targets.
    #[serde(default)]
    pub oat_window: Option<f64>,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default)]
    pub wigner: WignerSection,
    #[serde(default)]
    pub outputs: Outputs,
}

/// Input of `sweep-scaling`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub version: u32,
    pub n_list: Vec<u32>,
    #[serde(default = "default_contrast_fraction")]
    pub contrast_fraction: f64,
    pub alpha: f64,
    pub omega_max: f64,
    #[serde(default = "default_true")]
    pub tune_switch_off: bool,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    #[serde(default = "default_oat_window")]
    pub oat_window: f64,
    #[serde(default = "SweepConfig::default_output")]
    pub output: String,
}

impl SweepConfig {
    fn default_output() -> String {
        "scaling.csv".into()
    }
}

/// Input of `robustness`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustnessConfig {
    pub version: u32,
    /// Atom numbers actually controlled.
    pub n_list: Vec<u32>,
    /// The schedule is designed for `round(n * design_factor)` atoms.
    #[serde(default = "default_design_factor")]
    pub design_factor: f64,
    #[serde(default = "default_contrast_fraction")]
    pub contrast_fraction: f64,
    pub alpha: f64,
    pub omega_max: f64,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    #[serde(default = "default_oat_window")]
    pub oat_window: f64,
    #[serde(default = "RobustnessConfig::default_output")]
    pub output: String,
}

impl RobustnessConfig {
    fn default_output() -> String {
        "robustness.json".into()
    }
}

/// Input of `ess-target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EssTargetConfig {
    pub version: u32,
    pub n_atoms: u32,
    #[serde(default = "default_contrast_fraction")]
    pub contrast_fraction: f64,
    #[serde(default = "EssTargetConfig::default_output")]
    pub output: String,
}

impl EssTargetConfig {
    fn default_output() -> String {
        "ess_target.json".into()
    }
}

/// Parses a config file of any kind, without validating values.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| config(e.to_string()))
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
    parse(&text)
}

/// Canonical pretty JSON of a config.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn check_version(v: u32) -> Result<()> {
    if v != CONFIG_VERSION {
        return Err(config(format!(
            "unsupported config version {v}, expected {CONFIG_VERSION}"
        )));
    }
    Ok(())
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(config(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

fn check_fraction(x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(config(format!(
            "contrast_fraction must lie in (0, 1), got {x}"
        )));
    }
    Ok(())
}

fn check_file_name(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(config("output file names must not be empty"));
    }
    Ok(())
}

fn system(n_atoms: u32) -> Result<SpinSystem> {
    SpinSystem::new(n_atoms).map_err(|e| config(e.to_string()))
}

fn as_config(e: dicke_rap::Error) -> CliError {
    config(e.to_string())
}

/// What the passage is aimed at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ResolvedTarget {
    Dicke(i32),
    /// Contrast `<Sx>` in absolute units.
    Ess(f64),
}

impl ScenarioConfig {
    pub fn system(&self) -> Result<SpinSystem> {
        system(self.n_atoms)
    }

    /// Copy with every optional value made explicit.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        if let Protocol::Ess {
            switch_off: s @ None,
            tune_switch_off: false,
            ..
        } = &mut out.protocol
        {
            *s = Some(ESS_SWITCH_OFF);
        }
        if let Protocol::Dicke {
            plateau_end: p @ None,
            target_m,
        } = &mut out.protocol
        {
            *p = Some(f64::from(-2 * *target_m));
        }
        if out.oat_window.is_none() {
            out.oat_window = Some(match self.target_spec() {
                TargetSpec::Ess { .. } => default_oat_window(),
                TargetSpec::Dicke { .. } => 0.0,
            });
        }
        let s = self.n_atoms as usize;
        out.wigner.n_theta.get_or_insert(s + 1);
        out.wigner.n_phi.get_or_insert(2 * s + 1);
        out
    }

    fn target_spec(&self) -> TargetSpec {
        match &self.protocol {
            Protocol::Dicke { target_m, .. } => TargetSpec::Dicke { m: *target_m },
            Protocol::Ess {
                contrast_fraction, ..
            } => TargetSpec::Ess {
                contrast_fraction: *contrast_fraction,
            },
            Protocol::Custom { target, .. } => *target,
        }
    }

    pub fn target(&self) -> Result<ResolvedTarget> {
        let sys = self.system()?;
        Ok(match self.target_spec() {
            TargetSpec::Dicke { m } => {
                sys.index_of(m).map_err(as_config)?;
                ResolvedTarget::Dicke(m)
            }
            TargetSpec::Ess { contrast_fraction } => {
                check_fraction(contrast_fraction)?;
                ResolvedTarget::Ess(contrast_fraction * sys.total_spin())
            }
        })
    }

    pub fn oat_window(&self) -> f64 {
        self.resolved().oat_window.expect("resolved")
    }

    /// Switch-off tuning requested by an ESS protocol.
    pub fn tunes_switch_off(&self) -> bool {
        matches!(
            self.protocol,
            Protocol::Ess {
                tune_switch_off: true,
                ..
            }
        )
    }

    /// Schedule for the configured protocol. With `tune_switch_off` this is
    /// the untuned starting point.
    pub fn schedule(&self) -> Result<Schedule> {
        let sys = self.system()?;
        let unit = sys.chi() / self.alpha;
        match &self.protocol {
            Protocol::Dicke {
                target_m,
                plateau_end,
            } => {
                let base = dicke_protocol(&sys, self.alpha, self.omega_max, *target_m)
                    .map_err(as_config)?;
                match plateau_end {
                    None => Ok(base),
                    Some(p) => {
                        let coupling = CouplingSchedule {
                            t2: p * unit,
                            ..base.coupling
                        };
                        coupling.validate().map_err(as_config)?;
                        let end = coupling.switch_off_end() + crossing_period(&sys, self.alpha);
                        Schedule::new(base.chirp, coupling, base.t_start, end).map_err(as_config)
                    }
                }
            }
            Protocol::Ess { switch_off, .. } => {
                let t_off = switch_off.unwrap_or(ESS_SWITCH_OFF) * unit;
                ess_protocol_with_switch_off(&sys, self.alpha, self.omega_max, t_off)
                    .map_err(as_config)
            }
            Protocol::Custom { schedule, .. } => {
                schedule.validate().map_err(as_config)?;
                Ok(*schedule)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_version(self.version)?;
        self.system()?;
        check_positive("alpha", self.alpha)?;
        check_positive("omega_max", self.omega_max)?;
        if self.samples < 2 {
            return Err(config(format!(
                "samples must be at least 2, got {}",
                self.samples
            )));
        }
        self.integrator.validate().map_err(as_config)?;
        if let Some(w) = self.oat_window {
            if !(w.is_finite() && w >= 0.0) {
                return Err(config(format!("oat_window must be >= 0, got {w}")));
            }
        }
        if let Protocol::Ess {
            switch_off: Some(s),
            tune_switch_off,
            ..
        } = &self.protocol
        {
            check_positive("switch_off", *s)?;
            if *tune_switch_off {
                return Err(config(
                    "switch_off and tune_switch_off are mutually exclusive",
                ));
            }
        }
        if let Protocol::Custom { schedule, .. } = &self.protocol {
            if schedule.chirp.alpha != self.alpha || schedule.coupling.omega_max != self.omega_max {
                return Err(config(
                    "custom schedule must use the top-level alpha and omega_max",
                ));
            }
        }
        if self.levels == 0 || self.levels > self.n_atoms as usize + 1 {
            return Err(config(format!(
                "levels must lie in 1..={}",
                self.n_atoms + 1
            )));
        }
        let resolved = self.resolved();
        let (n_theta, n_phi) = (
            resolved.wigner.n_theta.unwrap(),
            resolved.wigner.n_phi.unwrap(),
        );
        let two_s = self.n_atoms as usize;
        if n_theta < two_s + 1 || n_phi < 2 * two_s + 1 {
            return Err(config(format!(
                "wigner grid {n_theta} x {n_phi} is below the band limit {} x {}",
                two_s + 1,
                2 * two_s + 1
            )));
        }
        let o = &self.outputs;
        for name in [&o.trace, &o.summary, &o.levels, &o.crossings, &o.wigner] {
            check_file_name(name)?;
        }
        self.target()?;
        let schedule = self.schedule()?;
        if let Some(t) = self.wigner.time {
            if !(t >= schedule.t_start && t <= schedule.t_end) {
                return Err(config(format!(
                    "wigner time {t} lies outside the window [{}, {}]",
                    schedule.t_start, schedule.t_end
                )));
            }
        }
        Ok(())
    }
}

fn check_n_list(n_list: &[u32]) -> Result<()> {
    if n_list.is_empty() {
        return Err(config("n_list must not be empty"));
    }
    for &n in n_list {
        system(n)?;
    }
    Ok(())
}

fn check_window(w: f64) -> Result<()> {
    if !(w.is_finite() && w >= 0.0) {
        return Err(config(format!("oat_window must be >= 0, got {w}")));
    }
    Ok(())
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        check_version(self.version)?;
        check_n_list(&self.n_list)?;
        check_fraction(self.contrast_fraction)?;
        check_positive("alpha", self.alpha)?;
        check_positive("omega_max", self.omega_max)?;
        self.integrator.validate().map_err(as_config)?;
        check_window(self.oat_window)?;
        check_file_name(&self.output)
    }
}

impl RobustnessConfig {
    /// `round(n * design_factor)`.
    pub fn design_atoms(&self, n: u32) -> u32 {
        (f64::from(n) * self.design_factor).round() as u32
    }

    pub fn validate(&self) -> Result<()> {
        check_version(self.version)?;
        check_n_list(&self.n_list)?;
        check_positive("design_factor", self.design_factor)?;
        for &n in &self.n_list {
            let design = self.design_atoms(n);
            system(design).map_err(|_| {
                config(format!(
                    "design atom number round({n} * {}) = {design} must be even and >= 2",
                    self.design_factor
                ))
            })?;
        }
        check_fraction(self.contrast_fraction)?;
        check_positive("alpha", self.alpha)?;
        check_positive("omega_max", self.omega_max)?;
        self.integrator.validate().map_err(as_config)?;
        check_window(self.oat_window)?;
        check_file_name(&self.output)
    }
}

impl EssTargetConfig {
    pub fn validate(&self) -> Result<()> {
        check_version(self.version)?;
        system(self.n_atoms)?;
        check_fraction(self.contrast_fraction)?;
        check_file_name(&self.output)
    }
}

/// Loads and validates in one step.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let c: ScenarioConfig = load(path)?;
    c.validate()?;
    Ok(c)
}
