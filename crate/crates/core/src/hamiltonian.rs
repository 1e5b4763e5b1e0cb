//! System parameters, the qubit-induced frequency shift and the effective
//! non-Hermitian Hamiltonians of the cavity chain.
//!
//! The basis order is `(a, b)` for two cavities and `(a, b, c)` for three.
//! Diagonal entries are `delta_q - i kappa_a` for the passive cavity and
//! `Delta_x + i kappa_x` for the gain cavities; neighbouring cavities are
//! coupled by real `J_1` (a-b) and `J_2` (b-c).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::CMatrix;

/// Default absolute tolerance of [`pt_symmetry_check`], in units of `kappa_a`.
pub const PT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("kappa_a must be positive (got {0})")]
    NonPositiveLoss(f64),
    #[error("{field} must be non-negative (got {value})")]
    Negative { field: &'static str, value: f64 },
    #[error("{field} must be finite (got {value})")]
    NotFinite { field: &'static str, value: f64 },
    #[error("n_cavities must be 1, 2 or 3 (got {0})")]
    CavityCount(u8),
    #[error("dispersive shift undefined: qubit detuning and decay rate are both zero")]
    DegenerateDenominator,
    #[error("PT-symmetry check needs 2 or 3 cavities (got {0})")]
    PtUnsupported(u8),
}

/// Rates, detunings and couplings of the cavity chain and the qubit.
///
/// Gain rates `kappa_b` and `kappa_c` are magnitudes; they enter the
/// Hamiltonian as `+i kappa`. Setting `lossy_auxiliaries` flips that sign so
/// the auxiliary cavities lose photons instead, which gives a dynamically
/// stable reference system for time-domain validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub kappa_c: f64,
    pub gamma: f64,
    pub g: f64,
    pub delta_q_detuning: f64,
    pub delta_b: f64,
    pub delta_c: f64,
    pub j1: f64,
    pub j2: f64,
    pub kappa_i: f64,
    pub kappa_o: f64,
    pub n_cavities: u8,
    #[serde(default)]
    pub lossy_auxiliaries: bool,
}

impl Default for SystemParams {
    /// Balanced two-cavity chain with the weakly coupled qubit used
    /// throughout: `g = 0.2`, `gamma = 1`, `Delta_q = 10 g`, ports at `1/2`.
    fn default() -> Self {
        SystemParams {
            kappa_a: 1.0,
            kappa_b: 1.0,
            kappa_c: 0.0,
            gamma: 1.0,
            g: 0.2,
            delta_q_detuning: 2.0,
            delta_b: 0.0,
            delta_c: 0.0,
            j1: 0.0,
            j2: 0.0,
            kappa_i: 0.5,
            kappa_o: 0.5,
            n_cavities: 2,
            lossy_auxiliaries: false,
        }
    }
}

impl SystemParams {
    /// Numeric fields by name, in declaration order.
    pub const FIELDS: [&'static str; 12] = [
        "kappa_a",
        "kappa_b",
        "kappa_c",
        "gamma",
        "g",
        "delta_q_detuning",
        "delta_b",
        "delta_c",
        "j1",
        "j2",
        "kappa_i",
        "kappa_o",
    ];

    pub fn validate(&self) -> Result<(), ParamError> {
        for name in Self::FIELDS {
            let value = self.get(name).expect("listed field");
            if !value.is_finite() {
                return Err(ParamError::NotFinite { field: name, value });
            }
        }
        if self.kappa_a <= 0.0 {
            return Err(ParamError::NonPositiveLoss(self.kappa_a));
        }
        let non_negative = [
            ("kappa_b", self.kappa_b),
            ("kappa_c", self.kappa_c),
            ("gamma", self.gamma),
            ("g", self.g),
            ("j1", self.j1),
            ("j2", self.j2),
            ("kappa_i", self.kappa_i),
            ("kappa_o", self.kappa_o),
        ];
        for (field, value) in non_negative {
            if value < 0.0 {
                return Err(ParamError::Negative { field, value });
            }
        }
        if !(1..=3).contains(&self.n_cavities) {
            return Err(ParamError::CavityCount(self.n_cavities));
        }
        Ok(())
    }

    /// Reads a numeric field by name.
    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "kappa_a" => self.kappa_a,
            "kappa_b" => self.kappa_b,
            "kappa_c" => self.kappa_c,
            "gamma" => self.gamma,
            "g" => self.g,
            "delta_q_detuning" => self.delta_q_detuning,
            "delta_b" => self.delta_b,
            "delta_c" => self.delta_c,
            "j1" => self.j1,
            "j2" => self.j2,
            "kappa_i" => self.kappa_i,
            "kappa_o" => self.kappa_o,
            _ => return None,
        })
    }

    /// Writes a numeric field by name. Returns `false` for unknown names.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        let slot = match name {
            "kappa_a" => &mut self.kappa_a,
            "kappa_b" => &mut self.kappa_b,
            "kappa_c" => &mut self.kappa_c,
            "gamma" => &mut self.gamma,
            "g" => &mut self.g,
            "delta_q_detuning" => &mut self.delta_q_detuning,
            "delta_b" => &mut self.delta_b,
            "delta_c" => &mut self.delta_c,
            "j1" => &mut self.j1,
            "j2" => &mut self.j2,
            "kappa_i" => &mut self.kappa_i,
            "kappa_o" => &mut self.kappa_o,
            _ => return false,
        };
        *slot = value;
        true
    }

    /// Rescales every rate, detuning and coupling so that `kappa_a == 1`.
    pub fn normalized(&self) -> SystemParams {
        let mut out = *self;
        let scale = self.kappa_a;
        for name in Self::FIELDS {
            let v = self.get(name).expect("listed field");
            out.set(name, v / scale);
        }
        out.kappa_a = 1.0;
        out
    }

    /// Gain of cavity `b` with its sign: positive for gain, negative when
    /// the auxiliaries are lossy.
    pub fn signed_gain_b(&self) -> f64 {
        if self.lossy_auxiliaries {
            -self.kappa_b
        } else {
            self.kappa_b
        }
    }

    pub fn signed_gain_c(&self) -> f64 {
        if self.lossy_auxiliaries {
            -self.kappa_c
        } else {
            self.kappa_c
        }
    }

    /// Copy with fields that the chain length makes irrelevant reset to zero.
    pub fn canonical(&self) -> SystemParams {
        let mut out = *self;
        if self.n_cavities < 3 {
            out.kappa_c = 0.0;
            out.delta_c = 0.0;
            out.j2 = 0.0;
        }
        if self.n_cavities < 2 {
            out.kappa_b = 0.0;
            out.delta_b = 0.0;
            out.j1 = 0.0;
        }
        out
    }
}

/// State of the qubit selecting the dispersive shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QubitBranch {
    Absent,
    Ground,
    Excited,
}

impl QubitBranch {
    pub const ALL: [QubitBranch; 3] = [QubitBranch::Absent, QubitBranch::Ground, QubitBranch::Excited];

    pub fn as_str(self) -> &'static str {
        match self {
            QubitBranch::Absent => "absent",
            QubitBranch::Ground => "ground",
            QubitBranch::Excited => "excited",
        }
    }

    /// Eigenvalue of `sigma_z` substituted after elimination (0 when absent).
    pub fn sigma_z(self) -> f64 {
        match self {
            QubitBranch::Absent => 0.0,
            QubitBranch::Ground => -1.0,
            QubitBranch::Excited => 1.0,
        }
    }

    /// The other qubit state; `Absent` maps to itself.
    pub fn flipped(self) -> QubitBranch {
        match self {
            QubitBranch::Absent => QubitBranch::Absent,
            QubitBranch::Ground => QubitBranch::Excited,
            QubitBranch::Excited => QubitBranch::Ground,
        }
    }
}

impl fmt::Display for QubitBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QubitBranch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "absent" | "none" => Ok(QubitBranch::Absent),
            "ground" | "g" => Ok(QubitBranch::Ground),
            "excited" | "e" => Ok(QubitBranch::Excited),
            other => Err(format!(
                "unknown qubit branch `{other}` (expected absent, ground or excited)"
            )),
        }
    }
}

/// Complex frequency shift of the passive cavity, `+-g^2 / (Delta_q - i gamma)`.
///
/// Zero for [`QubitBranch::Absent`]; the ground-state shift is the exact
/// negative of the excited-state one.
pub fn dispersive_shift(p: &SystemParams, branch: QubitBranch) -> Result<Complex64, ParamError> {
    if branch == QubitBranch::Absent {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if p.delta_q_detuning == 0.0 && p.gamma == 0.0 {
        return Err(ParamError::DegenerateDenominator);
    }
    let excited = Complex64::new(p.g * p.g, 0.0) / Complex64::new(p.delta_q_detuning, -p.gamma);
    Ok(match branch {
        QubitBranch::Excited => excited,
        _ => -excited,
    })
}

/// Effective Hamiltonian matrix together with the inputs it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    pub matrix: CMatrix,
    pub params: SystemParams,
    pub branch: QubitBranch,
}

impl EffectiveHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

pub fn build_hamiltonian(p: &SystemParams, branch: QubitBranch) -> Result<EffectiveHamiltonian, ParamError> {
    p.validate()?;
    let shift = dispersive_shift(p, branch)?;
    let n = p.n_cavities as usize;
    let mut m = CMatrix::zeros(n);
    m[(0, 0)] = shift + Complex64::new(0.0, -p.kappa_a);
    if n >= 2 {
        m[(1, 1)] = Complex64::new(p.delta_b, p.signed_gain_b());
        m[(0, 1)] = Complex64::new(p.j1, 0.0);
        m[(1, 0)] = Complex64::new(p.j1, 0.0);
    }
    if n == 3 {
        m[(2, 2)] = Complex64::new(p.delta_c, p.signed_gain_c());
        m[(1, 2)] = Complex64::new(p.j2, 0.0);
        m[(2, 1)] = Complex64::new(p.j2, 0.0);
    }
    Ok(EffectiveHamiltonian {
        matrix: m,
        params: *p,
        branch,
    })
}

/// One failed PT condition and how far it is from holding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PtViolation {
    pub condition: &'static str,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PtReport {
    pub satisfied: bool,
    pub violations: Vec<PtViolation>,
    pub tolerance: f64,
}

/// Checks the exact balanced gain/loss conditions of the chain.
///
/// Two cavities: `Delta_b = 0` and `kappa_b = kappa_a`.
/// Three cavities: `Delta_b = Delta_c = 0`, `J_1 = J_2`, `kappa_b = 0`, `kappa_c = kappa_a`.
pub fn pt_symmetry_check(p: &SystemParams) -> Result<PtReport, ParamError> {
    pt_symmetry_check_with_tolerance(p, PT_TOLERANCE)
}

/// [`pt_symmetry_check`] with a custom tolerance (in units of `kappa_a`).
pub fn pt_symmetry_check_with_tolerance(p: &SystemParams, tolerance: f64) -> Result<PtReport, ParamError> {
    p.validate()?;
    let residuals: Vec<(&'static str, f64)> = match p.n_cavities {
        2 => vec![
            ("delta_b", p.delta_b.abs()),
            ("kappa_b", (p.signed_gain_b() - p.kappa_a).abs()),
        ],
        3 => vec![
            ("delta_b", p.delta_b.abs()),
            ("delta_c", p.delta_c.abs()),
            ("j1_equals_j2", (p.j1 - p.j2).abs()),
            ("kappa_b", p.signed_gain_b().abs()),
            ("kappa_c", (p.signed_gain_c() - p.kappa_a).abs()),
        ],
        n => return Err(ParamError::PtUnsupported(n)),
    };
    let threshold = tolerance * p.kappa_a;
    let violations: Vec<PtViolation> = residuals
        .into_iter()
        .filter(|&(_, r)| r > threshold)
        .map(|(condition, residual)| PtViolation { condition, residual })
        .collect();
    Ok(PtReport {
        satisfied: violations.is_empty(),
        violations,
        tolerance: threshold,
    })
}

/// Coupling parameter varied in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingAxis {
    /// `J_1` alone.
    J1,
    /// `J_1` with `J_2` held equal to it (the three-cavity PT family).
    J1TiedJ2,
}

impl CouplingAxis {
    pub fn apply(self, p: &SystemParams, value: f64) -> SystemParams {
        let mut out = *p;
        out.j1 = value;
        if self == CouplingAxis::J1TiedJ2 {
            out.j2 = value;
        }
        out
    }

    /// Natural axis for a template: tied when a three-cavity chain has `J_1 = J_2`.
    pub fn for_template(p: &SystemParams) -> CouplingAxis {
        if p.n_cavities == 3 && p.j1 == p.j2 {
            CouplingAxis::J1TiedJ2
        } else {
            CouplingAxis::J1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fig2a() -> SystemParams {
        SystemParams::default()
    }

    fn pt3(j: f64) -> SystemParams {
        SystemParams {
            kappa_b: 0.0,
            kappa_c: 1.0,
            j1: j,
            j2: j,
            n_cavities: 3,
            ..SystemParams::default()
        }
    }

    #[test]
    fn excited_shift_for_weak_coupling() {
        // 0.04 / (2 - i) = 0.04 (2 + i) / 5
        let d = dispersive_shift(&fig2a(), QubitBranch::Excited).unwrap();
        assert!((d - c(0.016, 0.008)).norm() < 1e-15);
        assert!(d.im > 0.0);
        let expected_im = 0.04 * 1.0 / (4.0 + 1.0);
        assert!((d.im - expected_im).abs() < 1e-16);
    }

    #[test]
    fn absent_shift_is_zero() {
        let mut p = fig2a();
        p.delta_q_detuning = 0.0;
        p.gamma = 0.0;
        assert_eq!(dispersive_shift(&p, QubitBranch::Absent).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn undamped_qubit_gives_real_shift() {
        let mut p = fig2a();
        p.gamma = 0.0;
        let d = dispersive_shift(&p, QubitBranch::Excited).unwrap();
        assert_eq!(d.im, 0.0);
        assert!((d.re - 0.02).abs() < 1e-17);
    }

    #[test]
    fn degenerate_denominator() {
        let mut p = fig2a();
        p.delta_q_detuning = 0.0;
        p.gamma = 0.0;
        assert_eq!(
            dispersive_shift(&p, QubitBranch::Ground),
            Err(ParamError::DegenerateDenominator)
        );
    }

    #[test]
    fn two_cavity_pt_matrix() {
        let mut p = fig2a();
        p.j1 = 1.0;
        let h = build_hamiltonian(&p, QubitBranch::Absent).unwrap();
        let expected = CMatrix::from_rows(&[vec![c(0.0, -1.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 1.0)]]);
        assert_eq!(h.matrix, expected);
        assert_eq!(h.matrix.trace(), c(0.0, 0.0));
    }

    #[test]
    fn three_cavity_pt_matrix() {
        let h = build_hamiltonian(&pt3(1.0), QubitBranch::Absent).unwrap();
        let expected = CMatrix::from_rows(&[
            vec![c(0.0, -1.0), c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)],
        ]);
        assert_eq!(h.matrix, expected);
        assert_eq!(h.matrix, h.matrix.transpose());
        assert_eq!(h.matrix.trace(), c(0.0, 0.0));
    }

    #[test]
    fn single_cavity_with_qubit() {
        let mut p = fig2a();
        p.n_cavities = 1;
        let h = build_hamiltonian(&p, QubitBranch::Excited).unwrap();
        assert_eq!(h.dim(), 1);
        assert!((h.matrix[(0, 0)] - c(0.016, 0.008 - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn irrelevant_fields_are_ignored() {
        let mut p = fig2a();
        p.j1 = 0.7;
        let mut q = p;
        q.kappa_c = 0.3;
        q.delta_c = 5.0;
        q.j2 = 2.0;
        for branch in QubitBranch::ALL {
            assert_eq!(
                build_hamiltonian(&p, branch).unwrap().matrix,
                build_hamiltonian(&q, branch).unwrap().matrix
            );
        }
    }

    #[test]
    fn negative_gain_is_rejected() {
        let mut p = fig2a();
        p.kappa_b = -1.0;
        assert_eq!(
            build_hamiltonian(&p, QubitBranch::Absent).unwrap_err(),
            ParamError::Negative {
                field: "kappa_b",
                value: -1.0
            }
        );
        p.kappa_b = 1.0;
        p.kappa_a = -1.0;
        assert_eq!(
            p.validate().unwrap_err().to_string(),
            "kappa_a must be positive (got -1)"
        );
    }

    #[test]
    fn pt_check_two_cavities() {
        let report = pt_symmetry_check(&fig2a()).unwrap();
        assert!(report.satisfied);

        let mut p = fig2a();
        p.delta_b = 0.1;
        let report = pt_symmetry_check(&p).unwrap();
        assert!(!report.satisfied);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].condition, "delta_b");
        assert!((report.violations[0].residual - 0.1).abs() < 1e-15);
    }

    #[test]
    fn pt_check_three_cavities() {
        assert!(pt_symmetry_check(&pt3(0.5)).unwrap().satisfied);
        let mut p = pt3(0.5);
        p.j2 = 0.6;
        p.kappa_b = 0.1;
        let names: Vec<_> = pt_symmetry_check(&p)
            .unwrap()
            .violations
            .iter()
            .map(|v| v.condition)
            .collect();
        assert_eq!(names, ["j1_equals_j2", "kappa_b"]);
    }

    #[test]
    fn pt_check_rejects_single_cavity() {
        let mut p = fig2a();
        p.n_cavities = 1;
        assert_eq!(pt_symmetry_check(&p), Err(ParamError::PtUnsupported(1)));
    }

    #[test]
    fn lossy_auxiliary_breaks_pt() {
        let mut p = fig2a();
        p.lossy_auxiliaries = true;
        let report = pt_symmetry_check(&p).unwrap();
        assert!(!report.satisfied);
        assert_eq!(report.violations[0].condition, "kappa_b");
        let h = build_hamiltonian(&p, QubitBranch::Absent).unwrap();
        assert_eq!(h.matrix[(1, 1)], c(0.0, -1.0));
    }

    #[test]
    fn normalization_divides_by_loss() {
        let p = SystemParams {
            kappa_a: 2.0,
            kappa_b: 2.0,
            g: 0.4,
            delta_q_detuning: 4.0,
            gamma: 2.0,
            j1: 2.0,
            kappa_i: 1.0,
            kappa_o: 1.0,
            ..SystemParams::default()
        };
        let n = p.normalized();
        assert_eq!(n.kappa_a, 1.0);
        assert_eq!(n.j1, 1.0);
        assert_eq!(n.g, 0.2);
        // the shift scales linearly with the unit
        let ds = dispersive_shift(&p, QubitBranch::Excited).unwrap();
        let dn = dispersive_shift(&n, QubitBranch::Excited).unwrap();
        assert!((ds / 2.0 - dn).norm() < 1e-16);
    }

    #[test]
    fn tied_axis_moves_both_couplings() {
        let p = pt3(0.0);
        assert_eq!(CouplingAxis::for_template(&p), CouplingAxis::J1TiedJ2);
        let q = CouplingAxis::J1TiedJ2.apply(&p, 0.3);
        assert_eq!((q.j1, q.j2), (0.3, 0.3));
        let r = CouplingAxis::J1.apply(&p, 0.3);
        assert_eq!((r.j1, r.j2), (0.3, 0.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn params() -> impl Strategy<Value = SystemParams> {
            (0.0..2.0f64, -5.0..5.0f64, 0.0..3.0f64).prop_map(|(g, dq, gamma)| SystemParams {
                g,
                delta_q_detuning: if dq == 0.0 { 1.0 } else { dq },
                gamma,
                ..SystemParams::default()
            })
        }

        proptest! {
            #[test]
            fn ground_and_excited_shifts_cancel(p in params()) {
                let e = dispersive_shift(&p, QubitBranch::Excited).unwrap();
                let g = dispersive_shift(&p, QubitBranch::Ground).unwrap();
                prop_assert_eq!(e + g, Complex64::new(0.0, 0.0));
                let magnitude = p.g * p.g / (p.delta_q_detuning.powi(2) + p.gamma.powi(2)).sqrt();
                prop_assert!((e.norm() - magnitude).abs() <= 1e-14 * (1.0 + magnitude));
            }

            #[test]
            fn matrix_is_complex_symmetric(p in params(), j1 in 0.0..3.0f64, j2 in 0.0..3.0f64, n in 1u8..=3) {
                let p = SystemParams { j1, j2, n_cavities: n, kappa_c: 0.4, ..p };
                for branch in QubitBranch::ALL {
                    let h = build_hamiltonian(&p, branch).unwrap();
                    prop_assert_eq!(&h.matrix, &h.matrix.transpose());
                }
            }
        }
    }
}
