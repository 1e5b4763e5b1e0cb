//! Probe transmission of the passive cavity.
//!
//! `S21(omega) = 2 sqrt(kappa_i kappa_o) / (kappa_a + i (delta_q - omega) + Sigma(omega))`
//! where the self-energy `Sigma` folds the auxiliary cavities into cavity
//! `a`. `kappa_a` is the total loss of cavity `a`, port contributions
//! included, so an empty resonant cavity with `kappa_i = kappa_o = kappa_a / 2`
//! transmits fully.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::hamiltonian::{build_hamiltonian, dispersive_shift, ParamError, QubitBranch, SystemParams};

/// Nested denominators below this magnitude are treated as singular.
pub const SINGULAR_DENOMINATOR: f64 = 1e-300;

/// Default near-singular floor on the `S21` denominator, in units of `kappa_a`.
pub const NEAR_SINGULAR_FLOOR: f64 = 1e-9;

/// Column order of trace CSV files.
pub const TRACE_CSV_HEADER: &str = "omega,re_s21,im_s21,power,branch,near_singular";

/// Minimum number of grid points above half height for a resolved peak.
pub const MIN_POINTS_PER_PEAK: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransmissionError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("self-energy denominator vanishes at omega = {omega}{}", if *nested { " (inner cavity)" } else { "" })]
    SingularSelfEnergy { omega: f64, nested: bool },
    #[error("steady-state system is singular at omega = {omega}")]
    SingularSystem { omega: f64 },
    #[error("probe grid must be non-empty, finite and strictly increasing")]
    BadGrid,
    #[error("peak near omega = {center} spans only {points} grid points (need {MIN_POINTS_PER_PEAK})")]
    GridTooCoarse { center: f64, points: usize },
    #[error("traces were computed on different grids")]
    GridMismatch,
    #[error("traces were computed for different parameters")]
    ParamsMismatch,
}

/// Self-energy of the auxiliary chain seen by cavity `a`.
///
/// Zero for a bare cavity or `J_1 = 0`. For three cavities the `c` cavity is
/// folded into `b` first (continued-fraction form).
pub fn self_energy(p: &SystemParams, omega: f64) -> Result<Complex64, TransmissionError> {
    if p.n_cavities < 2 || p.j1 == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut denominator = Complex64::new(-p.signed_gain_b(), p.delta_b - omega);
    if p.n_cavities == 3 && p.j2 != 0.0 {
        let inner = Complex64::new(-p.signed_gain_c(), p.delta_c - omega);
        if inner.norm() < SINGULAR_DENOMINATOR {
            return Err(TransmissionError::SingularSelfEnergy { omega, nested: true });
        }
        denominator += p.j2 * p.j2 / inner;
    }
    if denominator.norm() < SINGULAR_DENOMINATOR {
        return Err(TransmissionError::SingularSelfEnergy { omega, nested: false });
    }
    Ok(p.j1 * p.j1 / denominator)
}

/// One evaluated probe frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S21Point {
    pub value: Complex64,
    pub near_singular: bool,
}

/// Closed-form `S21` at one probe detuning with the default near-singular floor.
pub fn s21_at(p: &SystemParams, branch: QubitBranch, omega: f64) -> Result<S21Point, TransmissionError> {
    s21_at_with_floor(p, branch, omega, NEAR_SINGULAR_FLOOR)
}

/// Closed-form `S21` at one probe detuning.
///
/// A singular self-energy is replaced by its limit (an infinite `Sigma`
/// blocks transmission, an infinite inner term removes cavity `c`) and the
/// point is flagged. A denominator below `floor * kappa_a` is flagged too;
/// an exactly vanishing one yields an infinite value.
pub fn s21_at_with_floor(
    p: &SystemParams,
    branch: QubitBranch,
    omega: f64,
    floor: f64,
) -> Result<S21Point, TransmissionError> {
    p.validate()?;
    let shift = dispersive_shift(p, branch)?;
    let numerator = Complex64::new(2.0 * (p.kappa_i * p.kappa_o).sqrt(), 0.0);
    let sigma = match self_energy(p, omega) {
        Ok(s) => s,
        Err(TransmissionError::SingularSelfEnergy { nested: false, .. }) => {
            return Ok(S21Point {
                value: Complex64::new(0.0, 0.0),
                near_singular: true,
            });
        }
        Err(TransmissionError::SingularSelfEnergy { nested: true, .. }) => {
            let mut reduced = *p;
            reduced.n_cavities = 2;
            let s = self_energy(&reduced, omega)?;
            let denominator = Complex64::new(p.kappa_a, 0.0) + Complex64::i() * (shift - omega) + s;
            return Ok(S21Point {
                value: numerator / denominator,
                near_singular: true,
            });
        }
        Err(e) => return Err(e),
    };
    let denominator = Complex64::new(p.kappa_a, 0.0) + Complex64::i() * (shift - omega) + sigma;
    let near_singular = denominator.norm() < floor * p.kappa_a;
    let value = if denominator.norm() == 0.0 {
        Complex64::new(f64::INFINITY, 0.0)
    } else {
        numerator / denominator
    };
    Ok(S21Point { value, near_singular })
}

/// `S21` from the steady state of the coupled-mode equations, solved as a
/// linear system instead of through the self-energy.
///
/// With unit drive the amplitudes `x` satisfy `(H_eff - omega) x = -i sqrt(2 kappa_i) e_a`
/// and the transmitted field is `sqrt(2 kappa_o) x_a`.
pub fn s21_linear_solve(p: &SystemParams, branch: QubitBranch, omega: f64) -> Result<Complex64, TransmissionError> {
    let h = build_hamiltonian(p, branch)?;
    let m = h.matrix.shifted(Complex64::new(omega, 0.0));
    let mut rhs = vec![Complex64::new(0.0, 0.0); m.dim()];
    rhs[0] = Complex64::new(0.0, -(2.0 * p.kappa_i).sqrt());
    let x = m.solve(&rhs).ok_or(TransmissionError::SingularSystem { omega })?;
    Ok((2.0 * p.kappa_o).sqrt() * x[0])
}

/// `S21` sampled on a probe grid for one qubit branch.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionTrace {
    pub omega_grid: Vec<f64>,
    pub s21: Vec<Complex64>,
    pub power: Vec<f64>,
    pub near_singular: Vec<bool>,
    pub branch: QubitBranch,
    pub params: SystemParams,
}

impl TransmissionTrace {
    pub fn len(&self) -> usize {
        self.omega_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega_grid.is_empty()
    }

    pub fn near_singular_count(&self) -> usize {
        self.near_singular.iter().filter(|&&f| f).count()
    }
}

fn check_grid(grid: &[f64]) -> Result<(), TransmissionError> {
    if grid.is_empty() || grid.iter().any(|w| !w.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(TransmissionError::BadGrid);
    }
    Ok(())
}

pub fn s21(p: &SystemParams, branch: QubitBranch, grid: &[f64]) -> Result<TransmissionTrace, TransmissionError> {
    check_grid(grid)?;
    let points = grid
        .iter()
        .map(|&w| s21_at(p, branch, w))
        .collect::<Result<Vec<_>, _>>()?;
    let s21: Vec<Complex64> = points.iter().map(|pt| pt.value).collect();
    Ok(TransmissionTrace {
        omega_grid: grid.to_vec(),
        power: s21.iter().map(|z| z.norm_sqr()).collect(),
        near_singular: points.iter().map(|pt| pt.near_singular).collect(),
        s21,
        branch,
        params: *p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub center: f64,
    pub height: f64,
    /// Full width at half maximum; `None` when a half-height crossing lies
    /// outside the grid or behind a neighbouring peak.
    pub fwhm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let d0 = (y[1] - y[0]) / (x[1] - x[0]);
    let d1 = (y[2] - y[1]) / (x[2] - x[1]);
    let curvature = (d1 - d0) / (x[2] - x[0]);
    if curvature.is_nan() || curvature >= 0.0 {
        return None;
    }
    // y = y1 + slope (t - x1) + curvature (t - x1)^2 with slope at x1
    let slope = d0 + curvature * (x[1] - x[0]);
    let xv = x[1] - slope / (2.0 * curvature);
    let yv = y[1] - slope * slope / (4.0 * curvature);
    Some((xv.clamp(x[0], x[2]), yv))
}

/// Local maxima of `|S21|^2` with parabolic refinement and FWHM.
pub fn find_peaks(trace: &TransmissionTrace) -> Result<PeakSet, TransmissionError> {
    let x = &trace.omega_grid;
    let y = &trace.power;
    let n = y.len();
    let mut peaks = Vec::new();
    for k in 1..n.saturating_sub(1) {
        if !(y[k] > y[k - 1] && y[k] > y[k + 1]) {
            continue;
        }
        if !y[k].is_finite() {
            peaks.push(Peak {
                center: x[k],
                height: y[k],
                fwhm: None,
            });
            continue;
        }
        let (center, height) = if y[k - 1] > 0.0 && y[k + 1] > 0.0 && y[k + 1].is_finite() && y[k - 1].is_finite() {
            parabola_vertex([x[k - 1], x[k], x[k + 1]], [y[k - 1].ln(), y[k].ln(), y[k + 1].ln()])
                .map(|(c, h)| (c, h.exp()))
                .unwrap_or((x[k], y[k]))
        } else {
            (x[k], y[k])
        };
        let half = height / 2.0;

        // walk down each flank until the power drops below half height
        let mut left = None;
        let mut i = k;
        while i > 0 {
            if y[i - 1] < half {
                let t = (half - y[i - 1]) / (y[i] - y[i - 1]);
                left = Some((i, x[i - 1] + t * (x[i] - x[i - 1])));
                break;
            }
            if y[i - 1] > y[i] {
                break;
            }
            i -= 1;
        }
        let mut right = None;
        let mut j = k;
        while j + 1 < n {
            if y[j + 1] < half {
                let t = (y[j] - half) / (y[j] - y[j + 1]);
                right = Some((j, x[j] + t * (x[j + 1] - x[j])));
                break;
            }
            if y[j + 1] > y[j] {
                break;
            }
            j += 1;
        }
        let first_above = left.map_or(i, |(idx, _)| idx);
        let last_above = right.map_or(j, |(idx, _)| idx);
        let points = last_above - first_above + 1;
        if points < MIN_POINTS_PER_PEAK {
            return Err(TransmissionError::GridTooCoarse { center, points });
        }
        let fwhm = match (left, right) {
            (Some((_, l)), Some((_, r))) => Some(r - l),
            _ => None,
        };
        peaks.push(Peak { center, height, fwhm });
    }
    peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
    Ok(PeakSet { peaks })
}

/// How different the ground- and excited-state transmission spectra are.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distinguishability {
    /// `max |P_e - P_g|` over the grid, with `P = |S21|^2`.
    pub max_abs_diff: f64,
    /// Trapezoid integral of `(P_e - P_g)^2` over the grid.
    pub l2_diff: f64,
    /// Center differences `excited - ground` of peaks matched by order.
    pub peak_shift: Vec<f64>,
    pub unmatched_ground_peaks: usize,
    pub unmatched_excited_peaks: usize,
    /// Grid points skipped because either power is not finite.
    pub excluded_points: usize,
    /// Why peaks could not be compared, if they could not.
    pub peak_note: Option<String>,
}

pub fn distinguishability(
    ground: &TransmissionTrace,
    excited: &TransmissionTrace,
) -> Result<Distinguishability, TransmissionError> {
    if ground.omega_grid != excited.omega_grid {
        return Err(TransmissionError::GridMismatch);
    }
    if ground.params != excited.params {
        return Err(TransmissionError::ParamsMismatch);
    }
    let x = &ground.omega_grid;
    let diff: Vec<Option<f64>> = ground
        .power
        .iter()
        .zip(&excited.power)
        .map(|(g, e)| {
            let d = e - g;
            (g.is_finite() && e.is_finite()).then_some(d)
        })
        .collect();
    let excluded_points = diff.iter().filter(|d| d.is_none()).count();
    let max_abs_diff = diff.iter().flatten().map(|d| d.abs()).fold(0.0, f64::max);
    let l2_diff = (1..x.len())
        .filter_map(|k| match (diff[k - 1], diff[k]) {
            (Some(a), Some(b)) => Some(0.5 * (a * a + b * b) * (x[k] - x[k - 1])),
            _ => None,
        })
        .sum();

    let (mut peak_shift, mut unmatched_ground_peaks, mut unmatched_excited_peaks, mut peak_note) =
        (Vec::new(), 0, 0, None);
    match (find_peaks(ground), find_peaks(excited)) {
        (Ok(g), Ok(e)) => {
            peak_shift = g.peaks.iter().zip(&e.peaks).map(|(a, b)| b.center - a.center).collect();
            unmatched_ground_peaks = g.peaks.len().saturating_sub(e.peaks.len());
            unmatched_excited_peaks = e.peaks.len().saturating_sub(g.peaks.len());
            if unmatched_ground_peaks + unmatched_excited_peaks > 0 {
                peak_note = Some(format!(
                    "peak counts differ ({} ground, {} excited); matched by order",
                    g.peaks.len(),
                    e.peaks.len()
                ));
            }
        }
        (Err(err), _) | (_, Err(err)) => peak_note = Some(err.to_string()),
    }
    Ok(Distinguishability {
        max_abs_diff,
        l2_diff,
        peak_shift,
        unmatched_ground_peaks,
        unmatched_excited_peaks,
        excluded_points,
        peak_note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{self, linspace, ModeLabel};

    fn pair(j1: f64) -> SystemParams {
        SystemParams {
            j1,
            ..SystemParams::default()
        }
    }

    fn triple(j: f64) -> SystemParams {
        SystemParams {
            kappa_b: 0.0,
            kappa_c: 1.0,
            j1: j,
            j2: j,
            n_cavities: 3,
            ..SystemParams::default()
        }
    }

    fn probe() -> Vec<f64> {
        linspace(-3.0, 3.0, 4001)
    }

    #[test]
    fn self_energy_of_balanced_pair_at_resonance() {
        // J^2 / (-kappa_b) = -1
        assert_eq!(self_energy(&pair(1.0), 0.0).unwrap(), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn self_energy_vanishes_without_auxiliaries() {
        let bare = SystemParams {
            n_cavities: 1,
            j1: 0.8,
            ..SystemParams::default()
        };
        for w in [-2.0, 0.0, 0.3] {
            assert_eq!(self_energy(&bare, w).unwrap(), Complex64::new(0.0, 0.0));
            assert_eq!(self_energy(&pair(0.0), w).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn nested_self_energy_is_independent_of_coupling() {
        for j in [0.2, 0.707, 1.3] {
            let s = self_energy(&triple(j), 0.0).unwrap();
            assert!((s - Complex64::new(-1.0, 0.0)).norm() < 1e-14, "{s}");
        }
    }

    #[test]
    fn singular_self_energy_is_reported() {
        let p = SystemParams {
            kappa_b: 0.0,
            ..pair(1.0)
        };
        assert_eq!(
            self_energy(&p, 0.0),
            Err(TransmissionError::SingularSelfEnergy {
                omega: 0.0,
                nested: false
            })
        );
        let pt = s21_at(&p, QubitBranch::Absent, 0.0).unwrap();
        assert!(pt.near_singular);
        assert_eq!(pt.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn empty_cavity_transmits_fully() {
        let pt = s21_at(&pair(0.0), QubitBranch::Absent, 0.0).unwrap();
        assert_eq!(pt.value, Complex64::new(1.0, 0.0));
        assert!(!pt.near_singular);
    }

    #[test]
    fn ep2_resonance_is_set_by_the_shift() {
        let p = pair(1.0);
        let shift = crate::dispersive_shift(&p, QubitBranch::Excited).unwrap();
        let pt = s21_at(&p, QubitBranch::Excited, 0.0).unwrap();
        let expected = 1.0 / shift.norm_sqr();
        assert!((pt.value.norm_sqr() / expected - 1.0).abs() < 1e-9);
        assert!((expected - 3125.0).abs() < 1e-9);

        let absent = s21_at(&p, QubitBranch::Absent, 0.0).unwrap();
        assert!(absent.near_singular);
        assert!(absent.value.norm_sqr().is_infinite());
    }

    #[test]
    fn closed_form_matches_linear_solve() {
        for p in [pair(0.5), pair(1.5), triple(0.35), triple(1.05)] {
            for branch in QubitBranch::ALL {
                for w in [-1.7, -0.2, 0.4, 2.2] {
                    let a = s21_at(&p, branch, w).unwrap().value;
                    let b = s21_linear_solve(&p, branch, w).unwrap();
                    assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0), "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn port_rates_are_reciprocal() {
        let p = SystemParams {
            kappa_i: 0.2,
            kappa_o: 0.7,
            ..pair(0.8)
        };
        let q = SystemParams {
            kappa_i: 0.7,
            kappa_o: 0.2,
            ..p
        };
        for w in [-1.0, 0.1, 0.9] {
            let a = s21_at(&p, QubitBranch::Ground, w).unwrap().value.norm_sqr();
            let b = s21_at(&q, QubitBranch::Ground, w).unwrap().value.norm_sqr();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn pt_trace_is_even_in_frequency() {
        let grid = linspace(-3.0, 3.0, 601);
        let t = s21(&pair(1.3), QubitBranch::Absent, &grid).unwrap();
        let n = t.len();
        for k in 0..n {
            let (a, b) = (t.power[k], t.power[n - 1 - k]);
            assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn bad_grids() {
        assert_eq!(
            s21(&pair(1.0), QubitBranch::Ground, &[]),
            Err(TransmissionError::BadGrid)
        );
        assert_eq!(
            s21(&pair(1.0), QubitBranch::Ground, &[0.0, 0.0]),
            Err(TransmissionError::BadGrid)
        );
    }

    #[test]
    fn empty_cavity_lorentzian_peak() {
        let t = s21(&pair(0.0), QubitBranch::Absent, &probe()).unwrap();
        let peaks = find_peaks(&t).unwrap();
        assert_eq!(peaks.peaks.len(), 1);
        let pk = peaks.peaks[0];
        assert!(pk.center.abs() < 1e-9);
        assert!((pk.height - 1.0).abs() < 1e-9);
        assert!((pk.fwhm.unwrap() - 2.0).abs() < 1e-3, "{:?}", pk.fwhm);
    }

    #[test]
    fn split_peaks_sit_at_supermode_frequencies() {
        let p = pair(1.5);
        // the split peaks are narrow (FWHM ~ 0.008), finer than the default grid resolves
        let grid = linspace(-3.0, 3.0, 24001);
        let step = grid[1] - grid[0];
        for branch in [QubitBranch::Ground, QubitBranch::Excited] {
            let t = s21(&p, branch, &grid).unwrap();
            let peaks = find_peaks(&t).unwrap();
            assert_eq!(peaks.peaks.len(), 2, "{branch}");
            let s = spectrum::eigenvalues_2x2(&p, branch).unwrap();
            let minus = s.get(ModeLabel::Minus).unwrap();
            let plus = s.get(ModeLabel::Plus).unwrap();
            assert!((peaks.peaks[0].center - minus.re).abs() < 2.0 * step);
            assert!((peaks.peaks[1].center - plus.re).abs() < 2.0 * step);
            assert!((plus.re - 1.118).abs() < 0.02);
            // linewidth follows 2 |Im Omega| loosely
            for (pk, z) in peaks.peaks.iter().zip([minus, plus]) {
                if let Some(w) = pk.fwhm {
                    let expected = 2.0 * z.im.abs();
                    assert!(w > expected / 2.0 && w < expected * 2.0, "{w} vs {expected}");
                }
            }
        }
    }

    #[test]
    fn monotone_trace_has_no_peaks() {
        let grid = linspace(0.5, 3.0, 200);
        let t = s21(&pair(0.0), QubitBranch::Absent, &grid).unwrap();
        assert!(find_peaks(&t).unwrap().peaks.is_empty());
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let grid = linspace(-3.0, 3.0, 41);
        let t = s21(&pair(1.0), QubitBranch::Excited, &grid).unwrap();
        assert!(matches!(find_peaks(&t), Err(TransmissionError::GridTooCoarse { .. })));
    }

    #[test]
    fn decoupled_qubit_is_invisible() {
        let p = SystemParams { g: 0.0, ..pair(1.0) };
        let grid = probe();
        let g = s21(&p, QubitBranch::Ground, &grid).unwrap();
        let e = s21(&p, QubitBranch::Excited, &grid).unwrap();
        let d = distinguishability(&g, &e).unwrap();
        assert_eq!(d.max_abs_diff, 0.0);
        assert_eq!(d.l2_diff, 0.0);
        assert!(d.peak_shift.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn contrast_grows_at_the_ep() {
        let grid = probe();
        let metrics = |p: SystemParams| {
            let g = s21(&p, QubitBranch::Ground, &grid).unwrap();
            let e = s21(&p, QubitBranch::Excited, &grid).unwrap();
            distinguishability(&g, &e).unwrap()
        };
        let far = metrics(pair(0.0));
        let near = metrics(pair(1.0));
        assert!(near.max_abs_diff > far.max_abs_diff);
        assert!(near.l2_diff > far.l2_diff);
        let far_shift = far.peak_shift.iter().map(|s| s.abs()).fold(0.0, f64::max);
        let near_shift = near.peak_shift.iter().map(|s| s.abs()).fold(0.0, f64::max);
        assert!(near_shift > far_shift, "{near_shift} vs {far_shift}");
    }

    #[test]
    fn mismatched_traces() {
        let a = s21(&pair(1.0), QubitBranch::Ground, &probe()).unwrap();
        let b = s21(&pair(1.0), QubitBranch::Excited, &linspace(-3.0, 3.0, 11)).unwrap();
        assert_eq!(distinguishability(&a, &b), Err(TransmissionError::GridMismatch));
    }
}
