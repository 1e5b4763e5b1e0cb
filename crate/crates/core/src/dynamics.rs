//! Mean-field Langevin dynamics of the driven cavity chain.
//!
//! The qubit is eliminated adiabatically, `sigma^- = g / (Delta_q - i gamma) a sigma_z`,
//! with `sigma_z = +-1`, which leaves a linear system for the mode amplitudes.
//! Integration happens in the frame co-rotating with the probe, where the
//! drive `sqrt(2 kappa_i) a_in` is constant and the steady state is an
//! equilibrium.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::hamiltonian::{build_hamiltonian, ParamError, QubitBranch, SystemParams};
use crate::linalg::CMatrix;
use crate::spectrum::{matrix_eigenvalues, SpectrumError};
use crate::transmission::{s21_at, TransmissionError};

/// Growth rates within this band around zero are classified as marginal.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Amplitude magnitude treated as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Relative amplitude change per `1/kappa_a` below which a run may stop.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-10;

/// Steady-state residual bound relative to the drive norm.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Largest allowed `dt * max(kappa_a, |Omega|, |Omega - omega|)`.
pub const STEP_FACTOR: f64 = 0.01;

const MAX_RECORDED: usize = 10_000;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Transmission(#[from] TransmissionError),
    #[error("time step {dt} exceeds the stability limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("integration span and step must be positive and finite")]
    BadSpan,
    #[error("amplitudes diverged at t = {t} (growth rate {growth:.3e})")]
    Diverged { t: f64, growth: f64 },
    #[error("system is {class} (max growth rate {max_growth:.3e}); no steady state is reachable in time")]
    NotStable { class: Stability, max_growth: f64 },
    #[error("no steady state within t = {t_end}")]
    NotConverged { t_end: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::Marginal => "marginal",
            Stability::Unstable => "unstable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub class: Stability,
    pub max_growth: f64,
}

/// Mode amplitudes grow as `exp(Im[Omega] t)`.
pub fn stability_classify(p: &SystemParams, branch: QubitBranch) -> Result<StabilityReport, DynamicsError> {
    let h = build_hamiltonian(p, branch)?;
    let max_growth = matrix_eigenvalues(&h.matrix)?
        .iter()
        .map(|z| z.im)
        .fold(f64::NEG_INFINITY, f64::max);
    let class = if max_growth < -STABILITY_MARGIN {
        Stability::Stable
    } else if max_growth > STABILITY_MARGIN {
        Stability::Unstable
    } else {
        Stability::Marginal
    };
    Ok(StabilityReport { class, max_growth })
}

/// Drift matrix of the reduced Langevin equations, assembled term by term
/// from the equations of motion rather than from the Hamiltonian.
pub fn drift_matrix(p: &SystemParams, branch: QubitBranch) -> Result<CMatrix, DynamicsError> {
    p.validate()?;
    let i = Complex64::i();
    let n = p.n_cavities as usize;
    let mut m = CMatrix::zeros(n);
    // da/dt = -kappa_a a - i g sigma^- - i J1 b + drive
    m[(0, 0)] = Complex64::new(-p.kappa_a, 0.0);
    let sigma_z = branch.sigma_z();
    if sigma_z != 0.0 {
        if p.delta_q_detuning == 0.0 && p.gamma == 0.0 {
            return Err(ParamError::DegenerateDenominator.into());
        }
        let sigma_minus_per_a = p.g / Complex64::new(p.delta_q_detuning, -p.gamma) * sigma_z;
        m[(0, 0)] += -i * p.g * sigma_minus_per_a;
    }
    if n >= 2 {
        m[(0, 1)] = -i * p.j1;
        // db/dt = -i (Delta_b + i kappa_b) b - i J1 a - i J2 c
        m[(1, 1)] = -i * Complex64::new(p.delta_b, p.signed_gain_b());
        m[(1, 0)] = -i * p.j1;
    }
    if n == 3 {
        m[(1, 2)] = -i * p.j2;
        m[(2, 2)] = -i * Complex64::new(p.delta_c, p.signed_gain_c());
        m[(2, 1)] = -i * p.j2;
    }
    Ok(m)
}

/// Coherent probe entering cavity `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriveSpec {
    /// Input-field amplitude `a_in`.
    pub amplitude: Complex64,
    /// Probe detuning from the passive cavity, units of `kappa_a`.
    pub omega: f64,
}

impl DriveSpec {
    pub fn unit(omega: f64) -> Self {
        DriveSpec {
            amplitude: Complex64::new(1.0, 0.0),
            omega,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub times: Vec<f64>,
    /// Co-rotating amplitudes `(a, b[, c])` at each recorded time.
    pub amplitudes: Vec<Vec<Complex64>>,
    pub converged: bool,
    pub steady_state: Option<Vec<Complex64>>,
    /// `|| M x + d ||` at the final state.
    pub residual: f64,
}

/// Linear system in the co-rotating frame: `dx/dt = M x + d`.
struct System {
    n: usize,
    m: [[Complex64; 3]; 3],
    d: [Complex64; 3],
}

impl System {
    fn new(p: &SystemParams, branch: QubitBranch, drive: &DriveSpec) -> Result<Self, DynamicsError> {
        let a = drift_matrix(p, branch)?;
        let n = a.dim();
        let mut m = [[ZERO; 3]; 3];
        for (r, row) in m.iter_mut().enumerate().take(n) {
            for (c, entry) in row.iter_mut().enumerate().take(n) {
                *entry = a[(r, c)];
            }
            row[r] += Complex64::new(0.0, drive.omega);
        }
        let mut d = [ZERO; 3];
        d[0] = (2.0 * p.kappa_i).sqrt() * drive.amplitude;
        Ok(System { n, m, d })
    }

    fn rate(&self, x: &[Complex64; 3]) -> [Complex64; 3] {
        let mut out = self.d;
        for (r, o) in out.iter_mut().enumerate().take(self.n) {
            for (m, xc) in self.m[r].iter().zip(x).take(self.n) {
                *o += m * xc;
            }
        }
        out
    }

    fn rk4(&self, x: &[Complex64; 3], dt: f64) -> [Complex64; 3] {
        let axpy = |a: &[Complex64; 3], s: f64, b: &[Complex64; 3]| {
            let mut o = *a;
            for k in 0..3 {
                o[k] += s * b[k];
            }
            o
        };
        let k1 = self.rate(x);
        let k2 = self.rate(&axpy(x, dt / 2.0, &k1));
        let k3 = self.rate(&axpy(x, dt / 2.0, &k2));
        let k4 = self.rate(&axpy(x, dt, &k3));
        let mut o = *x;
        for k in 0..3 {
            o[k] += dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
        o
    }

    fn norm(v: &[Complex64; 3]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Largest stable RK4 step for these parameters and probe detuning.
pub fn max_step(p: &SystemParams, branch: QubitBranch, omega: f64) -> Result<f64, DynamicsError> {
    let h = build_hamiltonian(p, branch)?;
    let rate = matrix_eigenvalues(&h.matrix)?
        .iter()
        .flat_map(|z| [z.norm(), (z - omega).norm()])
        .fold(p.kappa_a, f64::max);
    Ok(STEP_FACTOR / rate)
}

/// Norm of `M x + d`, zero exactly at the steady state.
pub fn steady_state_residual(
    p: &SystemParams,
    branch: QubitBranch,
    drive: &DriveSpec,
    x: &[Complex64],
) -> Result<f64, DynamicsError> {
    let sys = System::new(p, branch, drive)?;
    let mut state = [ZERO; 3];
    state[..x.len()].copy_from_slice(x);
    Ok(System::norm(&sys.rate(&state)))
}

/// Fixed-step RK4 from the vacuum up to `t_end`, stopping early once the
/// steady state is reached.
///
/// Convergence is tested every `1/kappa_a`: the relative amplitude change
/// over that interval must be below [`CONVERGENCE_TOLERANCE`] and the
/// steady-state residual below [`RESIDUAL_TOLERANCE`] times the drive.
/// At most about ten thousand samples are recorded, plus the final state.
pub fn integrate(
    p: &SystemParams,
    branch: QubitBranch,
    drive: &DriveSpec,
    t_end: f64,
    dt: f64,
) -> Result<TrajectoryResult, DynamicsError> {
    if !(t_end > 0.0 && dt > 0.0 && t_end.is_finite() && dt.is_finite()) {
        return Err(DynamicsError::BadSpan);
    }
    let limit = max_step(p, branch, drive.omega)?;
    if dt > limit * (1.0 + 1e-12) {
        return Err(DynamicsError::StepTooLarge { dt, limit });
    }
    let sys = System::new(p, branch, drive)?;
    let n = sys.n;
    let steps = (t_end / dt).ceil() as usize;
    let stride = steps.div_ceil(MAX_RECORDED).max(1);
    let check_every = ((1.0 / (p.kappa_a * dt)).round() as usize).max(1);
    let drive_norm = System::norm(&sys.d);

    let mut x = [ZERO; 3];
    let mut last_check = x;
    let mut times = vec![0.0];
    let mut amplitudes = vec![x[..n].to_vec()];
    let mut converged = false;
    let mut step = 0;
    while step < steps {
        x = sys.rk4(&x, dt);
        step += 1;
        let t = step as f64 * dt;
        // NaN counts as divergence
        if x.iter().any(|z| z.norm().is_nan() || z.norm() > DIVERGENCE_LIMIT) {
            let growth = stability_classify(p, branch)?.max_growth;
            return Err(DynamicsError::Diverged { t, growth });
        }
        if step % check_every == 0 {
            let change = x
                .iter()
                .zip(&last_check)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let size = System::norm(&x);
            let residual = System::norm(&sys.rate(&x));
            if change <= CONVERGENCE_TOLERANCE * size && residual <= RESIDUAL_TOLERANCE * drive_norm {
                converged = true;
            }
            last_check = x;
        }
        if step % stride == 0 || converged || step == steps {
            times.push(t);
            amplitudes.push(x[..n].to_vec());
        }
        if converged {
            break;
        }
    }
    let residual = System::norm(&sys.rate(&x));
    Ok(TrajectoryResult {
        times,
        amplitudes,
        converged,
        steady_state: converged.then(|| x[..n].to_vec()),
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrosscheckReport {
    pub omega: f64,
    pub s21_time_domain: Complex64,
    pub s21_frequency_domain: Complex64,
    pub abs_error: f64,
    /// Time at which the steady state was reached.
    pub settle_time: f64,
}

/// Upper bound on integration time, in units of `1/kappa_a`.
pub const MAX_SETTLE_TIME: f64 = 1e5;

/// Compares `S21` from the integrated steady state with the closed form.
///
/// Only dynamically stable systems have a reachable steady state; marginal
/// and unstable ones (which include every exact PT operating point) are
/// refused.
pub fn crosscheck_s21(p: &SystemParams, branch: QubitBranch, omega: f64) -> Result<CrosscheckReport, DynamicsError> {
    let stability = stability_classify(p, branch)?;
    if stability.class != Stability::Stable {
        return Err(DynamicsError::NotStable {
            class: stability.class,
            max_growth: stability.max_growth,
        });
    }
    let drive = DriveSpec::unit(omega);
    let dt = max_step(p, branch, omega)?;
    let decay = -stability.max_growth;
    let t_end = (60.0 / decay + 20.0 / p.kappa_a).min(MAX_SETTLE_TIME / p.kappa_a);
    let run = integrate(p, branch, &drive, t_end, dt)?;
    let Some(steady) = run.steady_state else {
        return Err(DynamicsError::NotConverged { t_end });
    };
    let s21_time_domain = (2.0 * p.kappa_o).sqrt() * steady[0] / drive.amplitude;
    let s21_frequency_domain = s21_at(p, branch, omega)?.value;
    Ok(CrosscheckReport {
        omega,
        s21_time_domain,
        s21_frequency_domain,
        abs_error: (s21_time_domain - s21_frequency_domain).norm(),
        settle_time: *run.times.last().expect("at least one sample"),
    })
}

/// Header of trajectory CSV files for a chain of `n` cavities.
pub fn trajectory_csv_header(n: usize) -> String {
    let modes = ["a", "b", "c"];
    let mut cols = vec!["t".to_string()];
    for m in &modes[..n] {
        cols.push(format!("re_{m}"));
        cols.push(format!("im_{m}"));
    }
    cols.join(",")
}
