//! Built-in scenarios for the two- and three-cavity readout figures.

use std::f64::consts::FRAC_1_SQRT_2;

use super::config::{GridSpec, ScenarioConfig, ScenarioKind, SweepSpec};
use super::ExperimentError;
use crate::hamiltonian::{QubitBranch, SystemParams};

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: ScenarioConfig,
}

/// Passive cavity with one gain cavity: `Delta_b = 0`, `kappa_b = gamma = kappa_a`,
/// `g = 0.2`, `Delta_q = 10 g`, `kappa_i = kappa_o = 1/2`.
fn pair(j1: f64) -> SystemParams {
    SystemParams {
        j1,
        ..SystemParams::default()
    }
}

/// Passive cavity, neutral middle cavity and gain cavity with `J_1 = J_2`.
fn triple(j: f64) -> SystemParams {
    SystemParams {
        kappa_b: 0.0,
        kappa_c: 1.0,
        delta_b: 0.0,
        delta_c: 0.0,
        j1: j,
        j2: j,
        n_cavities: 3,
        ..SystemParams::default()
    }
}

fn coupling_sweep(stop: f64, tie_j2: bool) -> SweepSpec {
    SweepSpec {
        parameter: "j1".into(),
        start: 0.0,
        stop,
        count: 2001,
        tie_j2,
    }
}

fn scenario(name: &'static str, kind: ScenarioKind, params: SystemParams, expect_pt: bool) -> ScenarioConfig {
    ScenarioConfig {
        expect_pt,
        ..ScenarioConfig::new(name, kind, params)
    }
}

const FIG3: [(&str, f64); 6] = [
    ("fig3a", 0.0),
    ("fig3b", 0.5),
    ("fig3c", 0.99),
    ("fig3d", 1.0),
    ("fig3e", 1.01),
    ("fig3f", 1.5),
];

const FIG4: [(&str, f64); 6] = [
    ("fig4a", 0.0),
    ("fig4b", 0.35),
    ("fig4c", 0.68),
    ("fig4d", 0.707),
    ("fig4e", 0.72),
    ("fig4f", 1.05),
];

/// Every built-in scenario, in a fixed order.
pub fn preset_catalog() -> Vec<Preset> {
    let mut out = vec![
        Preset {
            name: "fig2a",
            description: "two cavities: readout shifts vs J1 from 0 to 2",
            config: ScenarioConfig {
                sweep: Some(coupling_sweep(2.0, false)),
                ..scenario("fig2a", ScenarioKind::Sweep, pair(0.0), true)
            },
        },
        Preset {
            name: "fig2b",
            description: "three cavities: readout shifts vs J1 = J2 from 0 to 1.5",
            config: ScenarioConfig {
                sweep: Some(coupling_sweep(1.5, true)),
                ..scenario("fig2b", ScenarioKind::Sweep, triple(0.0), true)
            },
        },
    ];
    for (name, j) in FIG3 {
        out.push(Preset {
            name,
            description: "two cavities: ground/excited transmission",
            config: scenario(name, ScenarioKind::Transmission, pair(j), true),
        });
    }
    for (name, j) in FIG4 {
        out.push(Preset {
            name,
            description: "three cavities: ground/excited transmission",
            config: scenario(name, ScenarioKind::Transmission, triple(j), true),
        });
    }
    out.extend([
        Preset {
            name: "ep2-find",
            description: "locate the second-order exceptional point of the pair",
            config: scenario("ep2-find", ScenarioKind::EpFind, pair(1.0), true),
        },
        Preset {
            name: "ep3-find",
            description: "locate the third-order exceptional point of the triple",
            config: scenario("ep3-find", ScenarioKind::EpFind, triple(FRAC_1_SQRT_2), true),
        },
        Preset {
            name: "scaling-ep2",
            description: "eigenvalue splitting exponent at the pair's exceptional point",
            config: scenario("scaling-ep2", ScenarioKind::Splitting, pair(1.0), true),
        },
        Preset {
            name: "scaling-ep3",
            description: "eigenvalue splitting exponent at the triple's exceptional point",
            config: scenario("scaling-ep3", ScenarioKind::Splitting, triple(FRAC_1_SQRT_2), true),
        },
        Preset {
            name: "crosscheck-stable",
            description: "time-domain vs closed-form S21 for a passive pair (lossy auxiliary)",
            config: ScenarioConfig {
                branches: QubitBranch::ALL.to_vec(),
                probe: GridSpec {
                    start: -1.5,
                    stop: 1.5,
                    count: 7,
                },
                ..scenario(
                    "crosscheck-stable",
                    ScenarioKind::Crosscheck,
                    SystemParams {
                        kappa_b: 0.3,
                        j1: 0.4,
                        lossy_auxiliaries: true,
                        ..SystemParams::default()
                    },
                    false,
                )
            },
        },
    ]);
    out
}

pub fn preset(name: &str) -> Result<Preset, ExperimentError> {
    preset_catalog()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| ExperimentError::UnknownPreset(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::pt_symmetry_check;

    #[test]
    fn catalog_is_complete() {
        let names: Vec<&str> = preset_catalog().iter().map(|p| p.name).collect();
        assert_eq!(names.len(), 19);
        for expected in [
            "fig2a",
            "fig2b",
            "fig3a",
            "fig3f",
            "fig4a",
            "fig4f",
            "ep2-find",
            "ep3-find",
            "scaling-ep2",
            "scaling-ep3",
            "crosscheck-stable",
        ] {
            assert!(names.contains(&expected), "{expected}");
        }
    }

    #[test]
    fn caption_couplings() {
        assert_eq!(preset("fig3c").unwrap().config.params.j1, 0.99);
        let b = preset("fig4b").unwrap().config.params;
        assert_eq!((b.j1, b.j2), (0.35, 0.35));
        assert_eq!(preset("fig4d").unwrap().config.params.j1, 0.707);
    }

    #[test]
    fn presets_validate_and_respect_pt() {
        for p in preset_catalog() {
            p.config.validate().unwrap();
            assert_eq!(p.config.name, p.name);
            let pt = pt_symmetry_check(&p.config.params).unwrap();
            assert_eq!(pt.satisfied, p.config.expect_pt, "{}", p.name);
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(preset("fig9"), Err(ExperimentError::UnknownPreset(_))));
    }
}
