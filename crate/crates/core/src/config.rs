//! TOML run configuration. Every field has a default; unknown keys are
//! rejected, and the resolved configuration is written next to the outputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::basis::BasisMethod;
use crate::integrator::TimeGrid;
use crate::models::{
    CantileverLattice, Constants, ExperimentDesign, ForcingKind, ForcingProfile, LatticeGeometry, ParameterDomain,
};
use crate::rom::{DRIFT_TOL, ERROR_CLAMP};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub design: DesignConfig,
    pub methods: Vec<BasisMethod>,
    pub output: PathBuf,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            design: DesignConfig::default(),
            methods: BasisMethod::ALL.to_vec(),
            output: PathBuf::from("out"),
            jobs: 0,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub geometry: LatticeGeometry,
    pub constants: Constants,
    pub domain: ParameterDomain,
    pub forcing: ForcingKind,
    /// Nondimensional load amplitude; defaults to the beam weight.
    pub amplitude: Option<f64>,
    /// Nondimensional frequency; defaults to one period over the time span.
    pub frequency: Option<f64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            geometry: LatticeGeometry::default(),
            constants: Constants::default(),
            domain: ParameterDomain::default(),
            forcing: ForcingKind::SinusoidalTip,
            amplitude: None,
            frequency: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignConfig {
    /// Training grid points per parameter direction.
    pub grid_points: usize,
    pub test_count: usize,
    pub seed: u64,
    /// Start and end time in seconds.
    pub t0: f64,
    pub t_end: f64,
    pub nt: usize,
    pub sweep: Vec<usize>,
}

impl Default for DesignConfig {
    fn default() -> Self {
        Self {
            grid_points: 3,
            test_count: 16,
            seed: 1,
            t0: 0.0,
            t_end: 0.072,
            nt: 151,
            sweep: (1..=9).map(|i| 10 * i).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative Hamiltonian drift below which a cell counts as preserved.
    pub drift: f64,
    /// Relative errors are clamped to this value in figure data.
    pub error_clamp: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            drift: DRIFT_TOL,
            error_clamp: ERROR_CLAMP,
        }
    }
}

/// Model, design and forcing built from a configuration.
pub struct Experiment {
    pub model: CantileverLattice,
    pub design: ExperimentDesign,
    pub profile: ForcingProfile,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    /// Small model and sweep for quick runs.
    pub fn smoke() -> Self {
        let mut cfg = Self::default();
        cfg.model.geometry = LatticeGeometry {
            nx: 8,
            ny: 2,
            length: 7.2,
            height: 0.96,
        };
        cfg.design.nt = 51;
        cfg.design.sweep = vec![4, 8, 12, 16];
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.design;
        if d.nt < 2 {
            return Err(Error::Config(format!("nt must be at least 2, got {}", d.nt)));
        }
        if d.grid_points == 0 {
            return Err(Error::Config("grid_points must be positive".into()));
        }
        if !(d.t_end > d.t0) {
            return Err(Error::Config(format!("t_end {} must exceed t0 {}", d.t_end, d.t0)));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no basis methods selected".into()));
        }
        let [l0, l1] = self.model.domain.lambda;
        let [m0, m1] = self.model.domain.mu;
        if !(l0 > 0.0 && l1 >= l0 && m0 > 0.0 && m1 >= m0) {
            return Err(Error::Config("parameter domain must be positive and ordered".into()));
        }
        let t = &self.tolerances;
        if !(t.drift > 0.0 && t.error_clamp > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        let full = self.full_dim();
        for &s in &d.sweep {
            if s == 0 || s % 2 != 0 || s > full {
                return Err(Error::Config(format!(
                    "sweep size {s} must be even, positive and at most {full}"
                )));
            }
        }
        Ok(())
    }

    /// `2n` of the configured lattice.
    pub fn full_dim(&self) -> usize {
        let g = &self.model.geometry;
        4 * g.nx * (g.ny + 1)
    }

    /// Nondimensional time grid.
    pub fn time_grid(&self) -> Result<TimeGrid> {
        let ts = self.model.constants.time_scale();
        TimeGrid::new(self.design.t0 / ts, self.design.t_end / ts, self.design.nt)
    }

    /// Copy with the derived forcing amplitude and frequency filled in.
    pub fn resolved(&self) -> Result<RunConfig> {
        let exp = self.experiment()?;
        let mut cfg = self.clone();
        cfg.model.amplitude = Some(exp.profile.amplitude);
        cfg.model.frequency = Some(exp.profile.frequency);
        Ok(cfg)
    }

    pub fn experiment(&self) -> Result<Experiment> {
        self.validate()?;
        let model = CantileverLattice::new(self.model.geometry, self.model.constants, self.model.domain)?;
        let grid = self.time_grid()?;
        let amplitude = self.model.amplitude.unwrap_or_else(|| model.weight());
        let frequency = self.model.frequency.unwrap_or(1.0 / (grid.t_end - grid.t0));
        let profile = ForcingProfile::new(self.model.forcing, amplitude, frequency)?;
        let design = ExperimentDesign::new(
            model.domain(),
            self.design.grid_points,
            self.design.test_count,
            self.design.seed,
            grid,
            self.design.sweep.clone(),
            2 * model.n(),
        )?;
        Ok(Experiment { model, design, profile })
    }
}
