//! Continuity tracking of mode labels along a parameter sweep.

use num_complex::Complex64;
use serde::Serialize;

use super::{ComplexSpectrum, SpectrumError};

/// Two assignments whose total displacement differs by less than this are
/// reported as ambiguous.
pub const AMBIGUITY_THRESHOLD: f64 = 1e-12;

/// Minimal-displacement matching between two eigenvalue lists.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Assignment {
    /// `perm[i]` is the candidate index matched to reference `i`.
    pub perm: Vec<usize>,
    pub cost: f64,
    /// Cost of the second-best permutation (infinite for a single mode).
    pub runner_up: f64,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    match n {
        0 => vec![vec![]],
        _ => {
            let mut out = Vec::new();
            for p in permutations(n - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    out.push(q);
                }
            }
            out
        }
    }
}

/// Exhaustive search over all permutations (at most 3! here).
pub(crate) fn best_assignment(reference: &[Complex64], candidates: &[Complex64]) -> Assignment {
    assert_eq!(reference.len(), candidates.len());
    let mut scored: Vec<(f64, Vec<usize>)> = permutations(reference.len())
        .into_iter()
        .map(|perm| {
            let cost = perm
                .iter()
                .enumerate()
                .map(|(i, &j)| (reference[i] - candidates[j]).norm())
                .sum();
            (cost, perm)
        })
        .collect();
    // stable sort keeps the lexicographically first permutation on ties
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let runner_up = scored.get(1).map_or(f64::INFINITY, |s| s.0);
    let (cost, perm) = scored.swap_remove(0);
    Assignment { perm, cost, runner_up }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackingWarning {
    /// Sweep index at which the assignment was ambiguous.
    pub index: usize,
    pub best: f64,
    pub runner_up: f64,
}

#[derive(Debug, Clone)]
pub struct TrackedSweep {
    pub spectra: Vec<ComplexSpectrum>,
    pub warnings: Vec<TrackingWarning>,
}

/// Relabels a sweep so each label follows one continuous eigenvalue curve.
///
/// The first spectrum keeps its labels. Every later spectrum is matched to
/// its predecessor by the permutation of minimal total displacement in the
/// complex plane; near-ties are returned as warnings since they mark
/// degeneracies such as exceptional points.
pub fn track_modes(sweep: &[ComplexSpectrum]) -> Result<TrackedSweep, SpectrumError> {
    let Some(first) = sweep.first() else {
        return Ok(TrackedSweep {
            spectra: Vec::new(),
            warnings: Vec::new(),
        });
    };
    let mut spectra = Vec::with_capacity(sweep.len());
    let mut warnings = Vec::new();
    spectra.push(first.clone());
    for (index, current) in sweep.iter().enumerate().skip(1) {
        let previous = spectra.last().expect("non-empty");
        if current.len() != first.len() || current.branch != first.branch {
            return Err(SpectrumError::InconsistentSweep { index });
        }
        let a = best_assignment(&previous.eigenvalues, &current.eigenvalues);
        if a.runner_up - a.cost <= AMBIGUITY_THRESHOLD {
            log::warn!(
                "ambiguous mode assignment at sweep index {index} (costs {:.3e} vs {:.3e})",
                a.cost,
                a.runner_up
            );
            warnings.push(TrackingWarning {
                index,
                best: a.cost,
                runner_up: a.runner_up,
            });
        }
        let eigenvalues = a.perm.iter().map(|&j| current.eigenvalues[j]).collect();
        spectra.push(ComplexSpectrum {
            eigenvalues,
            labels: previous.labels.clone(),
            branch: current.branch,
            params: current.params,
        });
    }
    Ok(TrackedSweep { spectra, warnings })
}
