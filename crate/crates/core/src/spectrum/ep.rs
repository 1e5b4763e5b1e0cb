//! Exceptional-point location and the perturbation splitting law.

use num_complex::Complex64;
use serde::Serialize;

use super::{matrix_eigenvalues, pairwise, SpectrumError};
use crate::hamiltonian::{build_hamiltonian, pt_symmetry_check, CouplingAxis, QubitBranch, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpOptions {
    /// Scanned coupling interval, in units of `kappa_a`.
    pub start: f64,
    pub stop: f64,
    /// Bracketing grid step, in units of `kappa_a`.
    pub step: f64,
    /// Eigenvalues closer than this (units of `kappa_a`) count as coalesced.
    pub coalescence: f64,
}

impl Default for EpOptions {
    fn default() -> Self {
        EpOptions {
            start: 0.0,
            stop: 3.0,
            step: 1e-3,
            coalescence: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EpMethod {
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpReport {
    /// Location on the coupling axis, in the template's units.
    pub coupling: f64,
    pub axis: CouplingAxis,
    /// Number of coalescing eigenvalues.
    pub order: usize,
    /// Common eigenvalue at the exceptional point.
    pub value: Complex64,
    /// Smallest eigenvalue gap at `coupling`.
    pub gap: f64,
    pub method: EpMethod,
    pub pt_symmetric: bool,
}

fn absent_eigenvalues(p: &SystemParams) -> Result<Vec<Complex64>, SpectrumError> {
    let h = build_hamiltonian(p, QubitBranch::Absent)?;
    matrix_eigenvalues(&h.matrix)
}

fn gap_at(template: &SystemParams, axis: CouplingAxis, j: f64) -> Result<f64, SpectrumError> {
    let values = absent_eigenvalues(&axis.apply(template, j))?;
    Ok(pairwise(&values).fold(f64::INFINITY, f64::min))
}

/// Largest group of eigenvalues linked by distances below `threshold`, with its mean.
fn cluster_order(values: &[Complex64], threshold: f64) -> (usize, Complex64) {
    let mut group: Vec<usize> = (0..values.len()).collect();
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if (values[i] - values[j]).norm() < threshold {
                let (keep, merge) = (group[i], group[j]);
                group.iter_mut().filter(|g| **g == merge).for_each(|g| *g = keep);
            }
        }
    }
    (0..values.len())
        .map(|id| {
            let members: Vec<_> = (0..values.len())
                .filter(|&k| group[k] == id)
                .map(|k| values[k])
                .collect();
            let mean = members.iter().sum::<Complex64>() / members.len().max(1) as f64;
            (members.len(), mean)
        })
        .max_by_key(|(n, _)| *n)
        .expect("non-empty spectrum")
}

/// Locates the exceptional point of the qubit-free chain along `J_1`.
pub fn find_ep(template: &SystemParams) -> Result<EpReport, SpectrumError> {
    find_ep_with(template, &EpOptions::default())
}

/// Exceptional point along the coupling axis with explicit options.
///
/// A PT-symmetric pair has its EP at `J_1 = kappa_a` exactly. Every other
/// chain (including the PT-symmetric three-cavity chain, scanned with
/// `J_2 = J_1`) is handled numerically: the smallest eigenvalue gap is
/// scanned on a grid, the best grid cell is refined by golden-section
/// search, and the result is accepted only if the gap has closed below the
/// coalescence threshold.
pub fn find_ep_with(template: &SystemParams, opts: &EpOptions) -> Result<EpReport, SpectrumError> {
    template.validate()?;
    if template.n_cavities < 2 {
        return Err(SpectrumError::CavityCount {
            expected: "2 or 3",
            got: template.n_cavities,
        });
    }
    let pt = pt_symmetry_check(template)?.satisfied;
    let axis = CouplingAxis::for_template(template);
    let unit = template.kappa_a;

    if pt && template.n_cavities == 2 {
        let coupling = template.kappa_a;
        let h = build_hamiltonian(&axis.apply(template, coupling), QubitBranch::Absent)?;
        return Ok(EpReport {
            coupling,
            axis,
            order: 2,
            value: h.matrix.trace() / 2.0,
            gap: 0.0,
            method: EpMethod::Analytic,
            pt_symmetric: true,
        });
    }

    let (start, stop) = (opts.start * unit, opts.stop * unit);
    let cells = ((opts.stop - opts.start) / opts.step).round().max(1.0) as usize;
    let grid = super::linspace(start, stop, cells + 1);
    let gaps = grid
        .iter()
        .map(|&j| gap_at(template, axis, j))
        .collect::<Result<Vec<_>, _>>()?;
    let k = gaps
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("grid is non-empty");

    let mut lo = grid[k.saturating_sub(1)];
    let mut hi = grid[(k + 1).min(grid.len() - 1)];
    let (mut best_j, mut best_gap) = (grid[k], gaps[k]);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = gap_at(template, axis, x1)?;
    let mut f2 = gap_at(template, axis, x2)?;
    for _ in 0..200 {
        if hi - lo <= 1e-15 * unit.max(hi.abs()) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = gap_at(template, axis, x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = gap_at(template, axis, x2)?;
        }
        for (x, f) in [(x1, f1), (x2, f2)] {
            if f < best_gap {
                best_j = x;
                best_gap = f;
            }
        }
    }

    if best_gap >= opts.coalescence * unit {
        return Err(SpectrumError::NoExceptionalPoint {
            coupling: best_j,
            gap: best_gap,
        });
    }
    let values = absent_eigenvalues(&axis.apply(template, best_j))?;
    let (order, value) = cluster_order(&values, opts.coalescence * unit);
    Ok(EpReport {
        coupling: best_j,
        axis,
        order,
        value,
        gap: best_gap,
        method: EpMethod::Numeric,
        pt_symmetric: pt,
    })
}

/// Largest eigenvalue separation after adding `epsilon` to the passive-cavity
/// diagonal entry of the qubit-free Hamiltonian.
pub fn splitting(p: &SystemParams, epsilon: f64) -> Result<f64, SpectrumError> {
    let mut h = build_hamiltonian(p, QubitBranch::Absent)?;
    h.matrix[(0, 0)] += epsilon;
    let values = matrix_eigenvalues(&h.matrix)?;
    Ok(pairwise(&values).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplittingFit {
    /// Least-squares slope of `log(splitting)` against `log(epsilon)`.
    pub exponent: f64,
    /// `(epsilon, splitting)` pairs.
    pub points: Vec<(f64, f64)>,
}

/// Fits the power law of the spectral splitting around an exceptional point.
pub fn splitting_exponent(p: &SystemParams, ladder: &[f64]) -> Result<SplittingFit, SpectrumError> {
    if ladder.len() < 4 {
        return Err(SpectrumError::LadderTooCoarse(ladder.len()));
    }
    let mut points = Vec::with_capacity(ladder.len());
    for (i, &eps) in ladder.iter().enumerate() {
        if eps <= 0.0 || !eps.is_finite() {
            return Err(SpectrumError::InvalidLadder(i));
        }
        let s = splitting(p, eps)?;
        if s <= 0.0 {
            return Err(SpectrumError::InvalidLadder(i));
        }
        points.push((eps, s));
    }
    let n = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|(e, s)| (e.ln(), s.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(SplittingFit {
        exponent: sxy / sxx,
        points,
    })
}

/// `count` values spaced evenly in log from `low` to `high`.
pub fn geometric_ladder(low: f64, high: f64, count: usize) -> Vec<f64> {
    super::linspace(low.ln(), high.ln(), count)
        .into_iter()
        .map(f64::exp)
        .collect()
}
