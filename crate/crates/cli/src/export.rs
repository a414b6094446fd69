//! CSV layouts read by the plotting scripts, and atomic file output.

use std::fs;
use std::io::Write;
use std::path::Path;

use dicke_rap::metrics::variance_sz;
use dicke_rap::schedule::Crossing;
use dicke_rap::{fidelity, Observable, QfiTriple, SphereField, SpinState, Trace};

use crate::error::{CliError, Result};

/// 17 significant digits.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

pub fn trace_header(spin: i32) -> Vec<String> {
    let mut cols: Vec<String> = ["t", "alpha_t_over_chi", "beta", "omega", "norm"]
        .map(String::from)
        .to_vec();
    cols.extend((-spin..=spin).map(|m| format!("p_m_{m}")));
    cols.extend(["f_x", "f_y", "f_z", "sx", "var_sz", "fidelity_to_target"].map(String::from));
    cols
}

pub fn trace_csv(trace: &Trace, alpha: f64, target: &SpinState) -> Result<String> {
    let system = trace.system;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(trace_header(system.spin()))?;
    for (i, state) in trace.states.iter().enumerate() {
        let t = trace.times[i];
        let q = QfiTriple::of(state)?;
        let mut row = vec![
            fmt(t),
            fmt(alpha * t / system.chi()),
            fmt(trace.beta[i]),
            fmt(trace.omega[i]),
            fmt(state.norm()),
        ];
        row.extend(state.populations().into_iter().map(fmt));
        row.extend([
            fmt(q.f_x),
            fmt(q.f_y),
            fmt(q.f_z),
            fmt(state.expectation(Observable::Sx)?),
            fmt(variance_sz(state)?),
            fmt(fidelity(state, target)?),
        ]);
        w.write_record(row)?;
    }
    finish(w)
}

/// `t`, diabatic `E_m` for the listed `m`, then the lowest `ms.len()`
/// adiabatic eigenvalues.
pub fn levels_csv(
    times: &[f64],
    ms: &[i32],
    diabatic: &[Vec<f64>],
    adiabatic: &[Vec<f64>],
) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(ms.iter().map(|m| format!("E_m_{m}")));
    header.extend((0..ms.len()).map(|k| format!("lambda_{k}")));
    w.write_record(&header)?;
    for (i, &t) in times.iter().enumerate() {
        let mut row = vec![fmt(t)];
        row.extend(diabatic[i].iter().copied().map(fmt));
        row.extend(adiabatic[i].iter().copied().map(fmt));
        w.write_record(row)?;
    }
    finish(w)
}

pub fn crossings_csv(crossings: &[Crossing], alpha: f64, chi: f64) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["upper_m", "lower_m", "t", "alpha_t_over_chi"])?;
    for c in crossings {
        w.write_record([
            c.upper_m.to_string(),
            (c.upper_m - 1).to_string(),
            fmt(c.time),
            fmt(alpha * c.time / chi),
        ])?;
    }
    finish(w)
}

pub fn wigner_csv(field: &SphereField) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["theta", "phi", "w"])?;
    for (i, &theta) in field.thetas.iter().enumerate() {
        for (j, &phi) in field.phis.iter().enumerate() {
            w.write_record([fmt(theta), fmt(phi), fmt(field.value(i, j))])?;
        }
    }
    finish(w)
}

/// Pretty JSON with a trailing newline.
pub fn to_json_line<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Header plus rows of already formatted cells.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    finish(w)
}

/// Writes `contents` to `dir/name` through a temporary file and a rename,
/// so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.partial"));
    let mut file = fs::File::create(&tmp).map_err(io(&tmp))?;
    file.write_all(contents.as_bytes()).map_err(io(&tmp))?;
    file.sync_all().map_err(io(&tmp))?;
    fs::rename(&tmp, &target).map_err(io(&target))
}
