//! CSV formatting shared by every writer.
//!
//! Numbers use 17 significant digits in scientific notation so that every
//! double round-trips exactly; rows end in `\n`.

use std::fmt::Write as _;
use std::path::Path;

use super::ExperimentError;
use crate::dynamics::{trajectory_csv_header, TrajectoryResult};
use crate::transmission::{TransmissionTrace, TRACE_CSV_HEADER};

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn push_row<I, S>(out: &mut String, cells: I)
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut first = true;
    for cell in cells {
        if !first {
            out.push(',');
        }
        out.push_str(cell.as_ref());
        first = false;
    }
    out.push('\n');
}

pub(crate) fn trace_csv(trace: &TransmissionTrace) -> String {
    let mut out = String::with_capacity(trace.len() * 100);
    out.push_str(TRACE_CSV_HEADER);
    out.push('\n');
    for k in 0..trace.len() {
        let s = trace.s21[k];
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            format_float(trace.omega_grid[k]),
            format_float(s.re),
            format_float(s.im),
            format_float(trace.power[k]),
            trace.branch,
            trace.near_singular[k]
        );
    }
    out
}

pub fn trajectory_csv(result: &TrajectoryResult) -> String {
    let n = result.amplitudes.first().map_or(0, Vec::len);
    let mut out = trajectory_csv_header(n);
    out.push('\n');
    for (t, amps) in result.times.iter().zip(&result.amplitudes) {
        let mut cells = vec![format_float(*t)];
        for z in amps {
            cells.push(format_float(z.re));
            cells.push(format_float(z.im));
        }
        push_row(&mut out, cells);
    }
    out
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), ExperimentError> {
    std::fs::write(path, text).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes a transmission trace with the fixed trace schema.
pub fn write_trace_csv(path: &Path, trace: &TransmissionTrace) -> Result<(), ExperimentError> {
    write_text(path, &trace_csv(trace))
}

/// Writes `t, re_a, im_a, ...` rows for a trajectory.
pub fn write_trajectory_csv(path: &Path, result: &TrajectoryResult) -> Result<(), ExperimentError> {
    write_text(path, &trajectory_csv(result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{QubitBranch, SystemParams};
    use crate::transmission::s21;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn trace_rows_follow_header() {
        let p = SystemParams {
            n_cavities: 1,
            ..SystemParams::default()
        };
        let t = s21(&p, QubitBranch::Absent, &[-1.0, 0.0, 1.0]).unwrap();
        let csv = trace_csv(&t);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "omega,re_s21,im_s21,power,branch,near_singular");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("0.0000000000000000e0,1.0000000000000000e0,"));
        assert!(lines[2].ends_with(",absent,false"));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn row_joining() {
        let mut s = String::new();
        push_row(&mut s, ["a", "b"]);
        push_row(&mut s, Vec::<String>::new());
        assert_eq!(s, "a,b\n\n");
    }
}
