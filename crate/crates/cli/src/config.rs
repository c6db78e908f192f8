//! Run configuration read from JSON. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sigma_vqls::decomposer::BoundarySpec;
use sigma_vqls::heat::HeatParams;
use sigma_vqls::verify::VerifyOptions;
use sigma_vqls::vqls::{CostKind, Entangler, Method, OptimizerConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Decompose,
    Compare,
    Verify,
    Solve,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Decompose => "decompose",
            Command::Compare => "compare",
            Command::Verify => "verify",
            Command::Solve => "solve",
        }
    }
}

/// Heat-equation parameters. Omitted fields take the library defaults and
/// `u0` defaults to all ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatSection {
    pub n_x: usize,
    pub n_t: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffusivity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conductivity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bc: Option<BoundarySpec>,
}

impl Default for HeatSection {
    fn default() -> Self {
        Self {
            n_x: 4,
            n_t: 4,
            dx: None,
            dt: None,
            diffusivity: None,
            conductivity: None,
            flux: None,
            u0: None,
            bc: None,
        }
    }
}

impl HeatSection {
    pub fn params(&self) -> HeatParams {
        self.params_for(self.n_x, self.n_t)
    }

    /// Same physics on a different grid; `u0` falls back to ones when its
    /// length does not fit.
    pub fn params_for(&self, n_x: usize, n_t: usize) -> HeatParams {
        let base = HeatParams::new(n_x, n_t);
        let u0 = match &self.u0 {
            Some(u) if u.len() == n_x || n_x == self.n_x => u.clone(),
            _ => base.u0.clone(),
        };
        HeatParams {
            dx: self.dx.unwrap_or(base.dx),
            dt: self.dt.unwrap_or(base.dt),
            diffusivity: self.diffusivity.unwrap_or(base.diffusivity),
            conductivity: self.conductivity.unwrap_or(base.conductivity),
            flux: self.flux.unwrap_or(base.flux),
            u0,
            bc: self.bc.unwrap_or(base.bc),
            ..base
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnsatzSection {
    pub layers: usize,
    pub entangler: Entangler,
}

impl Default for AnsatzSection {
    fn default() -> Self {
        Self {
            layers: 4,
            entangler: Entangler::ChainCnot,
        }
    }
}

/// Optimizer settings; the seed comes from the top-level `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub method: Method,
    pub max_iters: usize,
    pub cost_tolerance: f64,
    pub shots: u64,
    pub cost_kind: CostKind,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let d = OptimizerConfig::default();
        Self {
            method: d.method,
            max_iters: d.max_iters,
            cost_tolerance: d.cost_tolerance,
            shots: d.shots,
            cost_kind: d.cost_kind,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    /// `[n_x, n_t]` grids.
    pub sizes: Vec<[usize; 2]>,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            sizes: vec![[2, 2], [4, 4], [4, 8], [8, 8], [8, 16]],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub heat: HeatSection,
    #[serde(default)]
    pub ansatz: AnsatzSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub compare: CompareSection,
    /// The top-level seed replaces `verify.seed`.
    #[serde(default)]
    pub verify: VerifyOptions,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Overrides given on the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(shots) = o.shots {
            self.optimizer.shots = shots;
        }
        if let Some(out) = &o.out {
            self.output_dir = out.clone();
        }
        self.verify.seed = self.seed;
    }

    pub fn optimizer_config(&self) -> OptimizerConfig {
        OptimizerConfig {
            method: self.optimizer.method,
            max_iters: self.optimizer.max_iters,
            cost_tolerance: self.optimizer.cost_tolerance,
            seed: self.seed,
            shots: self.optimizer.shots,
            cost_kind: self.optimizer.cost_kind,
        }
    }

    /// Checks everything the selected command will use.
    pub fn validate(&self) -> Result<(), String> {
        let err = |e: sigma_vqls::Error| e.to_string();
        match self.command {
            Command::Decompose => self.heat.params().validate().map_err(err),
            Command::Compare => {
                if self.compare.sizes.is_empty() {
                    return Err("compare.sizes must not be empty".into());
                }
                self.compare
                    .sizes
                    .iter()
                    .try_for_each(|&[nx, nt]| self.heat.params_for(nx, nt).validate())
                    .map_err(err)
            }
            Command::Verify => Ok(()),
            Command::Solve => {
                self.heat.params().validate().map_err(err)?;
                if self.ansatz.layers == 0 {
                    return Err("ansatz.layers must be positive".into());
                }
                self.optimizer_config().validate().map_err(err)
            }
        }
    }
}
