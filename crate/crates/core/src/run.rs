//! JSON run configuration shared by the command-line suites.
//!
//! ```json
//! {"grid": {"n": 32, "order": 4}, "dt": 0.0196, "t_center": 0.2,
//!  "fixture": "smooth-default", "eos": {"kind": "polytropic", "gamma": 1.4}}
//! ```
//!
//! Every key is optional; unknown keys are rejected.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::eos::{EosConfig, EosModel};
use crate::error::{Error, Result};
use crate::evolve::{SmoothAmplitudes, constant_fixture, smooth_fixture};
use crate::grid::{Grid, StencilOrder};
use crate::reform::{ReportPolicy, ResidualReport, StackSettings, convergence_study};
use crate::shock1d::{ShockSettings, plane_wave_fixture};
use crate::state::FluidState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    SmoothDefault,
    PlaneWave,
    Constant,
}

impl FixtureKind {
    pub fn id(self) -> &'static str {
        match self {
            FixtureKind::SmoothDefault => "smooth-default",
            FixtureKind::PlaneWave => "plane-wave",
            FixtureKind::Constant => "constant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
    pub order: u8,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 32, order: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixtureParams {
    pub smooth: SmoothAmplitudes,
    /// `ε` of the plane wave `R₊⁰ = ε sin x¹`.
    pub plane_wave_amplitude: f64,
    pub constant_rho: f64,
    pub constant_v: [f64; 3],
    pub constant_s: f64,
}

impl Default for FixtureParams {
    fn default() -> Self {
        Self {
            smooth: SmoothAmplitudes::default(),
            plane_wave_amplitude: 0.3,
            constant_rho: 0.1,
            constant_v: [0.2, -0.1, 0.3],
            constant_s: 0.4,
        }
    }
}

/// Random-state sampling for the pointwise checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub trials: usize,
    pub c_range: [f64; 2],
    pub v_max: f64,
    pub rho_range: [f64; 2],
    pub s_range: [f64; 2],
    /// Central-difference step of the EOS derivative check.
    pub eos_step: f64,
    pub eos_tol: f64,
    pub metric_tol: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            c_range: [0.5, 3.0],
            v_max: 2.0,
            rho_range: [-1.0, 1.0],
            s_range: [-1.0, 1.0],
            eos_step: 1e-4,
            eos_tol: 1e-6,
            metric_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridConfig,
    /// Slice spacing at `grid.n`; other resolutions keep `dt/h` fixed.
    /// Defaults to `0.1·h`.
    pub dt: Option<f64>,
    pub t_center: f64,
    pub fixture: FixtureKind,
    pub fixture_params: FixtureParams,
    pub eos: EosConfig,
    /// Resolutions of `converge`.
    pub resolutions: Vec<usize>,
    pub policy: ReportPolicy,
    pub sampling: SamplingConfig,
    pub shock: ShockSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            dt: None,
            t_center: 0.2,
            fixture: FixtureKind::SmoothDefault,
            fixture_params: FixtureParams::default(),
            eos: EosConfig::default(),
            resolutions: vec![16, 32, 64],
            policy: ReportPolicy::default(),
            sampling: SamplingConfig::default(),
            shock: ShockSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid run config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.stencil_order()?;
        Grid::new(self.grid.n, self.stencil_order()?).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        let dt = self.stack_settings().dt_over_h * Grid::new(self.grid.n, self.stencil_order()?)?.h();
        if !(self.t_center.is_finite() && self.t_center >= 2.0 * dt) {
            return bad(format!("t_center must be at least 2·dt = {}, got {}", 2.0 * dt, self.t_center));
        }
        if self.resolutions.is_empty() {
            return bad("resolutions must not be empty".into());
        }
        for &n in &self.resolutions {
            Grid::new(n, StencilOrder::Fourth).map_err(|e| Error::Config(e.to_string()))?;
        }
        let p = &self.policy;
        if !(p.min_order_second > 0.0 && p.min_order_fourth > 0.0 && p.exact_tol >= 0.0) {
            return bad("policy thresholds must be positive".into());
        }
        let s = &self.sampling;
        if s.trials == 0
            || !(0.0 < s.c_range[0] && s.c_range[0] <= s.c_range[1])
            || !(s.v_max >= 0.0)
            || !(s.eos_step > 0.0 && s.eos_step <= 0.1)
        {
            return bad("sampling needs trials > 0, 0 < c_min <= c_max, v_max >= 0 and eos_step in (0, 0.1]".into());
        }
        self.build_eos()?;
        self.shock.validate()
    }

    pub fn stencil_order(&self) -> Result<StencilOrder> {
        StencilOrder::try_from(self.grid.order).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build_eos(&self) -> Result<Arc<EosModel>> {
        Ok(Arc::new(self.eos.build().map_err(|e| Error::Config(e.to_string()))?))
    }

    pub fn stack_settings(&self) -> StackSettings {
        let h = std::f64::consts::TAU / self.grid.n as f64;
        StackSettings {
            t_center: self.t_center,
            dt_over_h: self.dt.map_or(0.1, |dt| dt / h),
        }
    }

    /// The configured fixture on `grid`.
    pub fn fixture_state(&self, grid: Grid) -> Result<FluidState> {
        let eos = self.build_eos()?;
        let p = &self.fixture_params;
        match self.fixture {
            FixtureKind::SmoothDefault => Ok(smooth_fixture(grid, p.smooth, eos)),
            FixtureKind::PlaneWave => plane_wave_fixture(grid, p.plane_wave_amplitude, eos),
            FixtureKind::Constant => Ok(constant_fixture(grid, p.constant_rho, p.constant_v, p.constant_s, eos)),
        }
    }

    /// Residual report over `ns`.
    pub fn residual_report(&self, ns: &[usize]) -> Result<ResidualReport> {
        let order = self.stencil_order()?;
        convergence_study(|g| self.fixture_state(g), ns, order, &self.stack_settings(), &self.policy)
    }
}

/// `n/4, n/2, n`; the coarsest grid must itself be valid.
pub fn reform_verify(cfg: &RunConfig, n: usize) -> Result<ResidualReport> {
    if n % 8 != 0 || n < 32 {
        return Err(Error::Config(format!("reform-verify needs n divisible by 8 and at least 32, got {n}")));
    }
    cfg.residual_report(&[n / 4, n / 2, n])
}

/// Over `cfg.resolutions`.
pub fn converge(cfg: &RunConfig) -> Result<ResidualReport> {
    cfg.residual_report(&cfg.resolutions)
}
