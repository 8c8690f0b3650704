//! Experiment configuration files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tma_core::funclass::EnsembleSpec;
use tma_core::jets::{Expr, ExpressionSpec, Flavor};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    DetLaw,
    WPsd,
    QSign,
    EvolutionIdentity,
    HeatIdentity,
    RealComplexify,
    FlowConvergence,
    OscillationDecay,
    Rigidity,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::DetLaw,
        Suite::WPsd,
        Suite::QSign,
        Suite::EvolutionIdentity,
        Suite::HeatIdentity,
        Suite::RealComplexify,
        Suite::FlowConvergence,
        Suite::OscillationDecay,
        Suite::Rigidity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::DetLaw => "det-law",
            Suite::WPsd => "w-psd",
            Suite::QSign => "q-sign",
            Suite::EvolutionIdentity => "evolution-identity",
            Suite::HeatIdentity => "heat-identity",
            Suite::RealComplexify => "real-complexify",
            Suite::FlowConvergence => "flow-convergence",
            Suite::OscillationDecay => "oscillation-decay",
            Suite::Rigidity => "rigidity",
        }
    }

    /// Suites that draw from a seeded ensemble.
    pub fn randomized(self) -> bool {
        matches!(
            self,
            Suite::DetLaw
                | Suite::WPsd
                | Suite::QSign
                | Suite::EvolutionIdentity
                | Suite::HeatIdentity
                | Suite::RealComplexify
        )
    }

    /// Default tolerances and thresholds, by name.
    pub fn default_tolerances(self) -> BTreeMap<String, f64> {
        let pairs: &[(&str, f64)] = match self {
            Suite::DetLaw => &[("residual", 1e-10)],
            Suite::WPsd => &[("lambda_min", 1e-10)],
            Suite::QSign => &[("lambda_max", 1e-8), ("group_lambda_max", 1e-8), ("hermitian_defect", 1e-10)],
            Suite::EvolutionIdentity => &[("residual", 1e-8)],
            Suite::HeatIdentity => &[("residual", 1e-10)],
            Suite::RealComplexify => &[("residual", 1e-10), ("lambda_max", 1e-8)],
            Suite::FlowConvergence => &[
                ("step_error", 1e-10),
                ("time_order_min", 3.5),
                ("space_order_min", 1.8),
                ("space_order_max", 2.2),
                ("runtime_seconds", 60.0),
            ],
            Suite::OscillationDecay => &[("ladder_slack", 1e-2), ("fit_residual", 0.1)],
            Suite::Rigidity => &[("det_deviation", 1e-9), ("w_variation", 1e-8), ("control_gap", 1e-6)],
        };
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }
}

/// Exact-solution and self-convergence study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    /// Convex-block strength of the exact quadratic solutions.
    pub a: f64,
    /// Concave-block strength of the exact quadratic solutions.
    pub b: f64,
    pub real_nodes: usize,
    pub complex_nodes: usize,
    pub exact_steps: usize,
    pub time_nodes: usize,
    pub time_steps: Vec<usize>,
    pub space_nodes: Vec<usize>,
    pub space_steps: usize,
    /// Perturbation amplitude of the time-convergence runs.
    pub time_amplitude: f64,
    /// Perturbation amplitude of the space-convergence runs.
    pub space_amplitude: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            a: std::f64::consts::E,
            b: 1.0,
            real_nodes: 129,
            complex_nodes: 17,
            exact_steps: 20,
            time_nodes: 8,
            time_steps: vec![40, 80, 160],
            space_nodes: vec![32, 64, 128],
            space_steps: 200,
            time_amplitude: 0.02,
            space_amplitude: 0.05,
        }
    }
}

/// Perturbed periodic flow whose oscillation ladder is measured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillationConfig {
    /// Nodes per axis on the period `[0, 2π)²`.
    pub nodes: usize,
    pub amplitude: f64,
    /// Integer frequency vectors with phases.
    pub modes: Vec<([f64; 2], f64)>,
    /// Outer radius in grid spacings.
    pub radius_cells: f64,
    pub levels: usize,
    /// Flow time before the outer cylinder starts, in units of `R²`.
    pub warmup: f64,
    pub record_every: usize,
    /// Cylinder centers as fractions of the period, snapped to nodes.
    pub centers: Vec<[f64; 2]>,
    pub class_bounds: (f64, f64),
}

impl Default for OscillationConfig {
    fn default() -> Self {
        OscillationConfig {
            nodes: 96,
            amplitude: 0.02,
            modes: vec![([1.0, 1.0], 0.3), ([1.0, 0.0], 1.1), ([0.0, 1.0], 0.4)],
            radius_cells: 8.0,
            levels: 4,
            warmup: 1.0,
            record_every: 2,
            centers: vec![[0.5, 0.5]],
            class_bounds: (0.5, 2.0),
        }
    }
}

/// Elliptic solve with a quadratic boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RigidityConfig {
    pub nodes: usize,
    /// Boundary data; a quadratic with balanced blocks by default.
    pub boundary: ExpressionSpec,
    /// Amplitude of the interior bump added to the initial guess.
    pub guess_bump: f64,
}

impl Default for RigidityConfig {
    fn default() -> Self {
        RigidityConfig {
            nodes: 21,
            boundary: ExpressionSpec::new(
                1,
                1,
                Flavor::Real,
                false,
                Expr::quad(vec![vec![2.0, 0.5], vec![0.5, -2.0]], vec![0.1, -0.2], 0.3),
            )
            .expect("default boundary is valid"),
            guess_bump: 0.02,
        }
    }
}

fn default_points() -> usize {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: Suite,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub ensemble: Option<EnsembleSpec>,
    /// `(k, l)` pairs swept with the ensemble; defaults to the ensemble's own.
    #[serde(default)]
    pub shapes: Option<Vec<[usize; 2]>>,
    #[serde(default = "default_points")]
    pub points_per_draw: usize,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
    #[serde(default)]
    pub oscillation: OscillationConfig,
    #[serde(default)]
    pub rigidity: RigidityConfig,
    /// Overrides of the suite's default tolerances.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(suite: Suite) -> Self {
        ExperimentConfig {
            suite,
            seed: None,
            ensemble: None,
            shapes: None,
            points_per_draw: default_points(),
            convergence: ConvergenceConfig::default(),
            oscillation: OscillationConfig::default(),
            rigidity: RigidityConfig::default(),
            tolerances: BTreeMap::new(),
            out: None,
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    /// Tolerances with overrides applied.
    pub fn effective_tolerances(&self) -> BTreeMap<String, f64> {
        let mut t = self.suite.default_tolerances();
        t.extend(self.tolerances.iter().map(|(k, v)| (k.clone(), *v)));
        t
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.effective_tolerances()[name]
    }

    /// Ensemble with the run seed applied.
    pub fn seeded_ensemble(&self) -> EnsembleSpec {
        let mut es = self.ensemble.clone().unwrap_or_default();
        if let Some(seed) = self.seed {
            es.seed = seed;
        }
        es
    }

    pub fn sweep_shapes(&self) -> Vec<(usize, usize)> {
        match &self.shapes {
            Some(s) => s.iter().map(|p| (p[0], p[1])).collect(),
            None => {
                let es = self.ensemble.clone().unwrap_or_default();
                vec![(es.k, es.l)]
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let defaults = self.suite.default_tolerances();
        for (name, v) in &self.tolerances {
            if !defaults.contains_key(name) {
                return bad(format!("tolerances.{name}: not a tolerance of suite {}", self.suite.name()));
            }
            if !(*v > 0.0 && v.is_finite()) {
                return bad(format!("tolerances.{name}: must be positive, got {v}"));
            }
        }
        if self.suite.randomized() {
            if self.seed.is_none() {
                return bad(format!("seed: required by randomized suite {}", self.suite.name()));
            }
            if self.ensemble.is_none() {
                return bad(format!("ensemble: required by suite {}", self.suite.name()));
            }
            if self.points_per_draw == 0 {
                return bad("points_per_draw: must be positive".into());
            }
            for (k, l) in self.sweep_shapes() {
                let es = EnsembleSpec { k, l, ..self.seeded_ensemble() };
                es.validate().map_err(|e| CliError::Config(format!("ensemble ({k}, {l}): {e}")))?;
            }
            let es = self.seeded_ensemble();
            let needs = match self.suite {
                Suite::QSign => Some(Flavor::Complex),
                Suite::DetLaw | Suite::RealComplexify => Some(Flavor::Real),
                _ => None,
            };
            if let Some(f) = needs {
                if es.flavor != f {
                    return bad(format!("ensemble.flavor: suite {} needs {f:?}", self.suite.name()));
                }
            }
        }
        match self.suite {
            Suite::FlowConvergence => {
                let c = &self.convergence;
                if c.time_steps.len() != 3 || c.space_nodes.len() != 3 {
                    return bad("convergence: time_steps and space_nodes need three levels each".into());
                }
                if !(c.a > 0.0 && c.b > 0.0) {
                    return bad("convergence.a, convergence.b: must be positive".into());
                }
                if c.time_steps.windows(2).any(|w| w[1] != 2 * w[0])
                    || c.space_nodes.windows(2).any(|w| w[1] != 2 * w[0])
                {
                    return bad("convergence: levels must double".into());
                }
                if c.real_nodes < 5 || c.complex_nodes < 5 || c.time_nodes < 4 {
                    return bad("convergence: grids need at least 5 nodes per axis".into());
                }
            }
            Suite::OscillationDecay => {
                let o = &self.oscillation;
                if o.nodes < 8 || o.levels < 3 || !(o.radius_cells > 0.0) || o.record_every == 0 {
                    return bad("oscillation: needs nodes ≥ 8, levels ≥ 3, radius_cells > 0, record_every ≥ 1".into());
                }
                if o.centers.is_empty() || o.modes.is_empty() {
                    return bad("oscillation: centers and modes must be nonempty".into());
                }
                let (lo, hi) = o.class_bounds;
                if !(lo > 0.0 && lo <= hi) {
                    return bad("oscillation.class_bounds: need 0 < λ ≤ Λ".into());
                }
            }
            Suite::Rigidity => {
                let r = &self.rigidity;
                if r.nodes < 5 {
                    return bad("rigidity.nodes: at least 5".into());
                }
                r.boundary
                    .validate()
                    .map_err(|e| CliError::Config(format!("rigidity.boundary: {e}")))?;
                if r.boundary.flavor != Flavor::Real || r.boundary.k != 1 || r.boundary.l != 1 {
                    return bad("rigidity.boundary: real (1, 1) specification required".into());
                }
            }
            _ => {}
        }
        Ok(())
    }
}
