//! Complex eigenfrequencies of the effective Hamiltonians and the readout
//! observables built from them.
//!
//! Two-cavity spectra use the closed form `tr/2 +- sqrt(((h_aa - h_bb)/2)^2 + J_1^2)`
//! with [`principal_sqrt`]; under the PT conditions this is exactly
//! `delta/2 +- sqrt(J_1^2 + (delta/2)^2 - kappa_a^2 - i kappa_a delta)`, and the
//! `plus`/`minus` labels follow the sign in front of the root. Three-cavity
//! spectra are roots of the characteristic cubic, labelled against the
//! qubit-free spectrum `{+sqrt(2 J_1^2 - kappa_a^2), -sqrt(..), 0}`.

mod ep;
pub mod roots;
mod tracking;

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hamiltonian::{build_hamiltonian, pt_symmetry_check, CouplingAxis, ParamError, QubitBranch, SystemParams};
use crate::linalg::CMatrix;

pub use ep::{
    find_ep, find_ep_with, geometric_ladder, splitting, splitting_exponent, EpMethod, EpOptions, EpReport, SplittingFit,
};
pub use roots::principal_sqrt;
pub use tracking::{track_modes, TrackedSweep, TrackingWarning, AMBIGUITY_THRESHOLD};

/// Residual bound on `|det(H - Omega I)|`, relative to the cubic's own scale.
pub const ROOT_RESIDUAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("operation needs {expected} cavities, got {got}")]
    CavityCount { expected: &'static str, got: u8 },
    #[error("root {root} failed to polish: scaled residual {residual:.3e}")]
    PolishFailed { root: Complex64, residual: f64 },
    #[error("spectra carry different mode labels ({left} vs {right})")]
    LabelMismatch { left: String, right: String },
    #[error("spectra were computed for different parameters")]
    ParamsMismatch,
    #[error("difference needs one ground and one excited spectrum, got {ground} and {excited}")]
    BranchMismatch { ground: QubitBranch, excited: QubitBranch },
    #[error("sweep entry {index} has a different size or branch than the first")]
    InconsistentSweep { index: usize },
    #[error("no exceptional point: smallest eigenvalue gap {gap:.3e} at coupling {coupling}")]
    NoExceptionalPoint { coupling: f64, gap: f64 },
    #[error("perturbation ladder needs at least 4 points, got {0}")]
    LadderTooCoarse(usize),
    #[error("perturbation ladder entries must be positive with nonzero splitting (entry {0})")]
    InvalidLadder(usize),
}

/// Identity of a supermode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeLabel {
    Plus,
    Minus,
    Zero,
    /// The single mode of a bare cavity.
    Bare,
}

impl ModeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeLabel::Plus => "plus",
            ModeLabel::Minus => "minus",
            ModeLabel::Zero => "zero",
            ModeLabel::Bare => "bare",
        }
    }

    /// Native label order for a chain of `n` cavities.
    pub fn for_cavities(n: u8) -> &'static [ModeLabel] {
        match n {
            1 => &[ModeLabel::Bare],
            2 => &[ModeLabel::Plus, ModeLabel::Minus],
            _ => &[ModeLabel::Plus, ModeLabel::Minus, ModeLabel::Zero],
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Labelled complex eigenfrequencies (units of `kappa_a`).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    pub eigenvalues: Vec<Complex64>,
    pub labels: Vec<ModeLabel>,
    pub branch: QubitBranch,
    pub params: SystemParams,
}

impl ComplexSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn get(&self, label: ModeLabel) -> Option<Complex64> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .map(|i| self.eigenvalues[i])
    }

    pub fn sum(&self) -> Complex64 {
        self.eigenvalues.iter().sum()
    }

    /// Largest imaginary part, i.e. the fastest amplitude growth rate.
    pub fn max_growth(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest distance between two eigenvalues (infinite for one mode).
    pub fn min_gap(&self) -> f64 {
        pairwise(&self.eigenvalues).fold(f64::INFINITY, f64::min)
    }

    /// Largest distance between two eigenvalues (zero for one mode).
    pub fn max_gap(&self) -> f64 {
        pairwise(&self.eigenvalues).fold(0.0, f64::max)
    }

    fn label_string(&self) -> String {
        let names: Vec<_> = self.labels.iter().map(|l| l.as_str()).collect();
        names.join(",")
    }
}

fn pairwise(values: &[Complex64]) -> impl Iterator<Item = f64> + '_ {
    values
        .iter()
        .enumerate()
        .flat_map(move |(i, a)| values[i + 1..].iter().map(move |b| (a - b).norm()))
}

/// Eigenvalues of a 1x1, 2x2 or 3x3 matrix in native order.
///
/// Two-by-two results are `[tr/2 + root, tr/2 - root]`; three-by-three
/// results are Newton-polished Cardano roots of the characteristic cubic.
pub fn matrix_eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>, SpectrumError> {
    match m.dim() {
        1 => Ok(vec![m[(0, 0)]]),
        2 => {
            let half_trace = (m[(0, 0)] + m[(1, 1)]) / 2.0;
            let half_diff = (m[(0, 0)] - m[(1, 1)]) / 2.0;
            let root = principal_sqrt(half_diff * half_diff + m[(0, 1)] * m[(1, 0)]);
            Ok(vec![half_trace + root, half_trace - root])
        }
        3 => {
            let cp = m.char_poly();
            let coeffs = [cp[0], cp[1], cp[2]];
            let scale = roots::cubic_scale(&coeffs).powi(3);
            roots::cardano(&coeffs)
                .into_iter()
                .map(|r| {
                    let root = roots::newton_polish(&coeffs, r);
                    let residual = roots::monic_cubic(&coeffs, root).0.norm() / scale;
                    if residual < ROOT_RESIDUAL_TOLERANCE {
                        Ok(root)
                    } else {
                        Err(SpectrumError::PolishFailed { root, residual })
                    }
                })
                .collect()
        }
        d => panic!("eigenvalues of a {d}x{d} matrix are not supported"),
    }
}

/// Two-cavity eigenfrequencies with `plus`/`minus` following the root sign.
pub fn eigenvalues_2x2(p: &SystemParams, branch: QubitBranch) -> Result<ComplexSpectrum, SpectrumError> {
    if p.n_cavities != 2 {
        return Err(SpectrumError::CavityCount {
            expected: "2",
            got: p.n_cavities,
        });
    }
    let h = build_hamiltonian(p, branch)?;
    Ok(ComplexSpectrum {
        eigenvalues: matrix_eigenvalues(&h.matrix)?,
        labels: ModeLabel::for_cavities(2).to_vec(),
        branch,
        params: *p,
    })
}

/// Qubit-free three-cavity spectrum carrying the reference labels.
///
/// Under the PT conditions the values are the closed form
/// `Omega_+- = +-sqrt(2 J_1^2 - kappa_a^2)`, `Omega_0 = 0`. Otherwise the
/// numerical roots are ordered by real then imaginary part and labelled
/// `minus`, `zero`, `plus`, which coincides with the closed form whenever it
/// applies.
fn reference_3x3(p: &SystemParams) -> Result<Vec<Complex64>, SpectrumError> {
    if pt_symmetry_check(p)?.satisfied {
        let r = principal_sqrt(Complex64::new(2.0 * p.j1 * p.j1 - p.kappa_a * p.kappa_a, 0.0));
        return Ok(vec![r, -r, Complex64::new(0.0, 0.0)]);
    }
    let h = build_hamiltonian(p, QubitBranch::Absent)?;
    let mut values = matrix_eigenvalues(&h.matrix)?;
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(vec![values[2], values[0], values[1]])
}

/// Three-cavity eigenfrequencies labelled by nearest match to the
/// qubit-free reference spectrum at the same parameters.
pub fn eigenvalues_3x3(p: &SystemParams, branch: QubitBranch) -> Result<ComplexSpectrum, SpectrumError> {
    if p.n_cavities != 3 {
        return Err(SpectrumError::CavityCount {
            expected: "3",
            got: p.n_cavities,
        });
    }
    let h = build_hamiltonian(p, branch)?;
    let found = matrix_eigenvalues(&h.matrix)?;
    let reference = reference_3x3(p)?;
    let a = tracking::best_assignment(&reference, &found);
    Ok(ComplexSpectrum {
        eigenvalues: a.perm.iter().map(|&j| found[j]).collect(),
        labels: ModeLabel::for_cavities(3).to_vec(),
        branch,
        params: *p,
    })
}

/// Labelled spectrum for any supported chain length.
pub fn spectrum(p: &SystemParams, branch: QubitBranch) -> Result<ComplexSpectrum, SpectrumError> {
    match p.n_cavities {
        2 => eigenvalues_2x2(p, branch),
        3 => eigenvalues_3x3(p, branch),
        _ => {
            let h = build_hamiltonian(p, branch)?;
            Ok(ComplexSpectrum {
                eigenvalues: vec![h.matrix[(0, 0)]],
                labels: vec![ModeLabel::Bare],
                branch,
                params: *p,
            })
        }
    }
}

/// Per-label differences `Re[Omega^(e)] - Re[Omega^(g)]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaOmega {
    pub values: Vec<(ModeLabel, f64)>,
}

impl DeltaOmega {
    pub fn get(&self, label: ModeLabel) -> Option<f64> {
        self.values.iter().find(|(l, _)| *l == label).map(|(_, v)| *v)
    }
}

pub fn delta_omega(ground: &ComplexSpectrum, excited: &ComplexSpectrum) -> Result<DeltaOmega, SpectrumError> {
    if ground.branch != QubitBranch::Ground || excited.branch != QubitBranch::Excited {
        return Err(SpectrumError::BranchMismatch {
            ground: ground.branch,
            excited: excited.branch,
        });
    }
    if ground.params != excited.params {
        return Err(SpectrumError::ParamsMismatch);
    }
    let mut gl = ground.labels.clone();
    let mut el = excited.labels.clone();
    gl.sort();
    el.sort();
    if gl != el {
        return Err(SpectrumError::LabelMismatch {
            left: ground.label_string(),
            right: excited.label_string(),
        });
    }
    let values = excited
        .labels
        .iter()
        .zip(&excited.eigenvalues)
        .map(|(&label, e)| {
            let g = ground.get(label).expect("label sets are equal");
            (label, e.re - g.re)
        })
        .collect();
    Ok(DeltaOmega { values })
}

/// Spectra of one branch over a coupling grid.
#[derive(Debug, Clone)]
pub struct SpectrumSweep {
    pub grid: Vec<f64>,
    pub spectra: Vec<ComplexSpectrum>,
    pub warnings: Vec<TrackingWarning>,
}

/// Evaluates the spectrum at every grid value (in parallel, ordered by index).
///
/// Two-cavity sweeps keep the native root-sign labels at every point.
/// Three-cavity sweeps take the labels of the first point and then follow
/// each mode by continuity.
pub fn spectrum_sweep(
    template: &SystemParams,
    axis: CouplingAxis,
    grid: &[f64],
    branch: QubitBranch,
) -> Result<SpectrumSweep, SpectrumError> {
    spectrum_sweep_with(template, |p, v| axis.apply(p, v), grid, branch)
}

/// [`spectrum_sweep`] along an arbitrary one-parameter family `apply(template, value)`.
pub fn spectrum_sweep_with<F>(
    template: &SystemParams,
    apply: F,
    grid: &[f64],
    branch: QubitBranch,
) -> Result<SpectrumSweep, SpectrumError>
where
    F: Fn(&SystemParams, f64) -> SystemParams + Sync,
{
    let spectra: Vec<ComplexSpectrum> = grid
        .par_iter()
        .map(|&value| spectrum(&apply(template, value), branch))
        .collect::<Result<_, _>>()?;
    if template.n_cavities == 3 {
        let tracked = track_modes(&spectra)?;
        Ok(SpectrumSweep {
            grid: grid.to_vec(),
            spectra: tracked.spectra,
            warnings: tracked.warnings,
        })
    } else {
        Ok(SpectrumSweep {
            grid: grid.to_vec(),
            spectra,
            warnings: Vec::new(),
        })
    }
}

/// Ground and excited sweeps with their per-point differences.
#[derive(Debug, Clone)]
pub struct DeltaOmegaSweep {
    pub grid: Vec<f64>,
    pub ground: SpectrumSweep,
    pub excited: SpectrumSweep,
    pub delta: Vec<DeltaOmega>,
}

impl DeltaOmegaSweep {
    /// `(argmax, max)` of one label's difference over the grid.
    pub fn max(&self, label: ModeLabel) -> Option<(f64, f64)> {
        self.extremum(label, |a, b| a > b)
    }

    pub fn min(&self, label: ModeLabel) -> Option<(f64, f64)> {
        self.extremum(label, |a, b| a < b)
    }

    fn extremum(&self, label: ModeLabel, better: impl Fn(f64, f64) -> bool) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for (x, d) in self.grid.iter().zip(&self.delta) {
            let v = d.get(label)?;
            if best.is_none_or(|(_, b)| better(v, b)) {
                best = Some((*x, v));
            }
        }
        best
    }
}

pub fn delta_omega_sweep(
    template: &SystemParams,
    axis: CouplingAxis,
    grid: &[f64],
) -> Result<DeltaOmegaSweep, SpectrumError> {
    let ground = spectrum_sweep(template, axis, grid, QubitBranch::Ground)?;
    let excited = spectrum_sweep(template, axis, grid, QubitBranch::Excited)?;
    delta_omega_from(ground, excited)
}

/// Pairs a ground and an excited sweep over the same grid.
pub fn delta_omega_from(ground: SpectrumSweep, excited: SpectrumSweep) -> Result<DeltaOmegaSweep, SpectrumError> {
    if ground.grid != excited.grid {
        return Err(SpectrumError::InconsistentSweep { index: 0 });
    }
    let delta = ground
        .spectra
        .iter()
        .zip(&excited.spectra)
        .map(|(g, e)| delta_omega(g, e))
        .collect::<Result<_, _>>()?;
    Ok(DeltaOmegaSweep {
        grid: ground.grid.clone(),
        ground,
        excited,
        delta,
    })
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    stop
                } else {
                    start + (stop - start) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}
