//! Scenario execution.

use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use super::config::{ScenarioConfig, ScenarioKind};
use super::output::{format_float, push_row, trace_csv, write_text};
use super::ExperimentError;
use crate::dynamics::{crosscheck_s21, DynamicsError};
use crate::hamiltonian::{pt_symmetry_check, QubitBranch};
use crate::spectrum::{
    delta_omega, delta_omega_from, find_ep, spectrum, spectrum_sweep_with, splitting_exponent, ComplexSpectrum,
    DeltaOmegaSweep, ModeLabel, SpectrumError, SpectrumSweep,
};
use crate::transmission::{distinguishability, find_peaks, s21, TransmissionError, TransmissionTrace};
use crate::{BRANCH_CONVENTION, VERSION};

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub scenario: String,
    pub out_dir: PathBuf,
    /// Written files, relative to `out_dir`.
    pub files: Vec<String>,
    /// Contents of `summary.json`.
    pub summary: Value,
}

struct Ctx<'a> {
    cfg: &'a ScenarioConfig,
}

impl Ctx<'_> {
    fn spectrum_err(&self, source: SpectrumError) -> ExperimentError {
        ExperimentError::Spectrum {
            scenario: self.cfg.name.clone(),
            source,
        }
    }

    fn transmission_err(&self, source: TransmissionError) -> ExperimentError {
        ExperimentError::Transmission {
            scenario: self.cfg.name.clone(),
            source,
        }
    }

    fn dynamics_err(&self, source: DynamicsError) -> ExperimentError {
        ExperimentError::Dynamics {
            scenario: self.cfg.name.clone(),
            source,
        }
    }
}

/// Files to write, as `(name, contents)`.
type Outputs = Vec<(String, String)>;

fn spectrum_json(s: &ComplexSpectrum) -> Value {
    Value::Array(
        s.labels
            .iter()
            .zip(&s.eigenvalues)
            .map(|(l, z)| json!({ "label": l.as_str(), "re": z.re, "im": z.im }))
            .collect(),
    )
}

fn has_pair(branches: &[QubitBranch]) -> bool {
    branches.contains(&QubitBranch::Ground) && branches.contains(&QubitBranch::Excited)
}

/// Sweep CSV: the sweep variable, then `re_/im_<label>_<branch>` per
/// configured branch, then `delta_<label>` when both qubit states are swept.
pub fn sweep_table(axis_name: &str, sweeps: &[SpectrumSweep], delta: Option<&DeltaOmegaSweep>) -> String {
    let mut out = String::new();
    let Some(first) = sweeps.first() else {
        return out;
    };
    let labels = first
        .spectra
        .first()
        .map_or(&[][..], |s| ModeLabel::for_cavities(s.params.n_cavities));
    let mut header = vec![axis_name.to_string()];
    for sw in sweeps {
        let branch = sw.spectra.first().map_or("", |s| s.branch.as_str());
        for l in labels {
            header.push(format!("re_{l}_{branch}"));
            header.push(format!("im_{l}_{branch}"));
        }
    }
    if delta.is_some() {
        header.extend(labels.iter().map(|l| format!("delta_{l}")));
    }
    push_row(&mut out, header);
    for (k, x) in first.grid.iter().enumerate() {
        let mut row = vec![format_float(*x)];
        for sw in sweeps {
            let s = &sw.spectra[k];
            for &l in labels {
                let z = s.get(l).expect("labels are shared along a sweep");
                row.push(format_float(z.re));
                row.push(format_float(z.im));
            }
        }
        if let Some(d) = delta {
            for &l in labels {
                row.push(format_float(d.delta[k].get(l).expect("labels are shared")));
            }
        }
        push_row(&mut out, row);
    }
    out
}

fn run_sweep(ctx: &Ctx, results: &mut Map<String, Value>, files: &mut Outputs) -> Result<(), ExperimentError> {
    let cfg = ctx.cfg;
    let sweep = cfg.sweep.as_ref().expect("validated");
    let grid = sweep.values();
    let apply = |p: &_, v| sweep.apply(p, v);
    let mut sweeps = Vec::with_capacity(cfg.branches.len());
    for &branch in &cfg.branches {
        sweeps.push(spectrum_sweep_with(&cfg.params, apply, &grid, branch).map_err(|e| ctx.spectrum_err(e))?);
    }
    let delta = if has_pair(&cfg.branches) {
        let pick = |b| sweeps[cfg.branches.iter().position(|&x| x == b).expect("present")].clone();
        Some(delta_omega_from(pick(QubitBranch::Ground), pick(QubitBranch::Excited)).map_err(|e| ctx.spectrum_err(e))?)
    } else {
        None
    };
    files.push((
        "sweep.csv".into(),
        sweep_table(&sweep.axis_name(), &sweeps, delta.as_ref()),
    ));

    let warnings: Vec<Value> = cfg
        .branches
        .iter()
        .zip(&sweeps)
        .flat_map(|(b, sw)| {
            sw.warnings.iter().map(move |w| {
                json!({ "branch": b, "index": w.index, "value": sw.grid[w.index], "best": w.best, "runner_up": w.runner_up })
            })
        })
        .collect();
    results.insert("tracking_warnings".into(), Value::Array(warnings));
    results.insert("points".into(), json!(grid.len()));

    if let Some(d) = &delta {
        let mut per_label = Map::new();
        for &label in ModeLabel::for_cavities(cfg.params.n_cavities) {
            let (max_at, max) = d.max(label).expect("non-empty sweep");
            let (min_at, min) = d.min(label).expect("non-empty sweep");
            per_label.insert(
                label.as_str().into(),
                json!({
                    "max": { "at": max_at, "value": max },
                    "min": { "at": min_at, "value": min },
                    "first": d.delta.first().and_then(|v| v.get(label)),
                    "last": d.delta.last().and_then(|v| v.get(label)),
                }),
            );
        }
        results.insert("delta_omega".into(), Value::Object(per_label));
    }
    if sweep.parameter == "j1" && cfg.params.n_cavities >= 2 {
        let ep = match find_ep(&cfg.params) {
            Ok(r) => json!(r),
            Err(e) => json!({ "error": e.to_string() }),
        };
        results.insert("exceptional_point".into(), ep);
    }
    Ok(())
}

fn trace_summary(trace: &TransmissionTrace) -> Value {
    let max_power = trace.power.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let peaks = match find_peaks(trace) {
        Ok(p) => json!(p.peaks),
        Err(e) => json!({ "error": e.to_string() }),
    };
    json!({
        "max_power": max_power,
        "near_singular_points": trace.near_singular_count(),
        "peaks": peaks,
    })
}

fn run_transmission(ctx: &Ctx, results: &mut Map<String, Value>, files: &mut Outputs) -> Result<(), ExperimentError> {
    let cfg = ctx.cfg;
    let grid = cfg.probe.values();
    let mut traces = Vec::new();
    let mut per_branch = Map::new();
    for &branch in &cfg.branches {
        let trace = s21(&cfg.params, branch, &grid).map_err(|e| ctx.transmission_err(e))?;
        let spec = spectrum(&cfg.params, branch).map_err(|e| ctx.spectrum_err(e))?;
        let mut entry = trace_summary(&trace);
        entry["eigenvalues"] = spectrum_json(&spec);
        per_branch.insert(branch.as_str().into(), entry);
        files.push((format!("trace_{branch}.csv"), trace_csv(&trace)));
        traces.push((branch, trace, spec));
    }
    results.insert("branches".into(), Value::Object(per_branch));
    if has_pair(&cfg.branches) {
        let find = |b| traces.iter().find(|t| t.0 == b).expect("present");
        let (g, e) = (find(QubitBranch::Ground), find(QubitBranch::Excited));
        let d = distinguishability(&g.1, &e.1).map_err(|err| ctx.transmission_err(err))?;
        results.insert("distinguishability".into(), json!(d));
        let shifts = delta_omega(&g.2, &e.2).map_err(|err| ctx.spectrum_err(err))?;
        let shifts: Map<String, Value> = shifts
            .values
            .iter()
            .map(|(l, v)| (l.as_str().to_string(), json!(v)))
            .collect();
        results.insert("delta_omega".into(), Value::Object(shifts));
    }
    Ok(())
}

fn run_splitting(ctx: &Ctx, results: &mut Map<String, Value>, files: &mut Outputs) -> Result<(), ExperimentError> {
    let cfg = ctx.cfg;
    let fit = splitting_exponent(&cfg.params, &cfg.ladder.values()).map_err(|e| ctx.spectrum_err(e))?;
    let mut csv = String::from("epsilon,splitting\n");
    for (e, s) in &fit.points {
        push_row(&mut csv, [format_float(*e), format_float(*s)]);
    }
    files.push(("splitting.csv".into(), csv));
    results.insert("exponent".into(), json!(fit.exponent));
    results.insert(
        "expected_exponent".into(),
        json!(1.0 / f64::from(cfg.params.n_cavities)),
    );
    Ok(())
}

fn run_crosscheck(ctx: &Ctx, results: &mut Map<String, Value>, files: &mut Outputs) -> Result<(), ExperimentError> {
    let cfg = ctx.cfg;
    let mut csv = String::from("omega,branch,re_s21_time,im_s21_time,re_s21_freq,im_s21_freq,abs_error\n");
    let mut excluded = Vec::new();
    let mut max_error: f64 = 0.0;
    let mut compared = 0usize;
    for &branch in &cfg.branches {
        for omega in cfg.probe.values() {
            match crosscheck_s21(&cfg.params, branch, omega) {
                Ok(r) => {
                    compared += 1;
                    max_error = max_error.max(r.abs_error);
                    push_row(
                        &mut csv,
                        [
                            format_float(omega),
                            branch.as_str().to_string(),
                            format_float(r.s21_time_domain.re),
                            format_float(r.s21_time_domain.im),
                            format_float(r.s21_frequency_domain.re),
                            format_float(r.s21_frequency_domain.im),
                            format_float(r.abs_error),
                        ],
                    );
                }
                Err(e @ DynamicsError::NotStable { .. }) => {
                    excluded.push(json!({ "branch": branch, "reason": e.to_string() }));
                    break;
                }
                Err(e) => return Err(ctx.dynamics_err(e)),
            }
        }
    }
    files.push(("crosscheck.csv".into(), csv));
    results.insert("compared".into(), json!(compared));
    results.insert("max_abs_error".into(), json!(max_error));
    results.insert("excluded".into(), Value::Array(excluded));
    Ok(())
}

/// Runs a scenario and writes its CSV files and `summary.json` into `out_dir`.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunSummary, ExperimentError> {
    cfg.validate()?;
    let ctx = Ctx { cfg };
    let pt = pt_symmetry_check(&cfg.params)?;
    let mut results = Map::new();
    let mut files: Outputs = Vec::new();
    match cfg.kind {
        ScenarioKind::Sweep => run_sweep(&ctx, &mut results, &mut files)?,
        ScenarioKind::Transmission => run_transmission(&ctx, &mut results, &mut files)?,
        ScenarioKind::EpFind => {
            let ep = find_ep(&cfg.params).map_err(|e| ctx.spectrum_err(e))?;
            results.insert("exceptional_point".into(), json!(ep));
        }
        ScenarioKind::Splitting => run_splitting(&ctx, &mut results, &mut files)?,
        ScenarioKind::Crosscheck => run_crosscheck(&ctx, &mut results, &mut files)?,
    }

    let summary = json!({
        "scenario": cfg,
        "params": cfg.params,
        "checks": {
            "pt_symmetry": pt,
            "pt_expected": cfg.expect_pt,
            "pt_as_expected": pt.satisfied == cfg.expect_pt,
        },
        "results": results,
        "version": {
            "ptreadout": VERSION,
            "branch_convention": BRANCH_CONVENTION,
        },
    });

    std::fs::create_dir_all(out_dir).map_err(|source| ExperimentError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut text = serde_json::to_string_pretty(&summary).expect("summary is plain data");
    text.push('\n');
    files.push(("summary.json".into(), text));
    for (name, contents) in &files {
        write_text(&out_dir.join(name), contents)?;
    }
    Ok(RunSummary {
        scenario: cfg.name.clone(),
        out_dir: out_dir.to_path_buf(),
        files: files.into_iter().map(|(n, _)| n).collect(),
        summary,
    })
}
