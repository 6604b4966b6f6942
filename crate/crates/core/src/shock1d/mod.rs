//! Plane-symmetric simple waves: Riemann invariants, characteristic fans,
//! blowup times, the eikonal function and the inverse foliation density.

mod fan;
mod pde;
mod riemann;

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::eos::EosModel;
use crate::error::{Error, Result};
use crate::grid::{Grid, StencilOrder};
use crate::state::FluidState;

pub use fan::{
    BlowupTime, CharacteristicFan, EikonalPoint, FOOT_POINTS, FootSample, ProductSample, Profile, ProfileRow,
    SLOPE_NOISE, SimpleWavePoint, WaveState, blowup_product_check, blowup_time, eikonal_mu, embed_plane_wave_3d,
    mu_from_definition, simple_wave_solution,
};
pub use pde::{LinearFit, Pde1d, PdeSample, pde_blowup_time, run_pde};
pub use riemann::{QUADRATURE_TOL, RiemannMap, riemann_invariants};

/// `∂_x R₊` on a characteristic under `d/dt p = k p²`.
pub fn riccati(p0: f64, k: f64, t: f64) -> f64 {
    1.0 / (1.0 / p0 - k * t)
}

/// Fan of `R₊⁰ = ε sin x₀` at entropy `s`.
pub fn sine_fan(eos: Arc<EosModel>, amplitude: f64, entropy: f64) -> Result<CharacteristicFan> {
    CharacteristicFan::new(RiemannMap::new(eos, entropy)?, Profile::sine(amplitude))
}

/// The sine simple wave at `t = 0` embedded in 3D.
pub fn plane_wave_fixture(grid: Grid, amplitude: f64, eos: Arc<EosModel>) -> Result<FluidState> {
    embed_plane_wave_3d(&sine_fan(eos, amplitude, 0.0)?, 0.0, grid)
}

/// Parameters of a shock study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShockSettings {
    /// `ε` in `R₊⁰ = ε sin x₀`.
    pub amplitude: f64,
    pub entropy: f64,
    /// Rows of the time series.
    pub series_points: usize,
    /// Snapshot times as fractions of `T*` (of the horizon without blowup).
    pub snapshot_fractions: Vec<f64>,
    pub snapshot_points: usize,
    /// Window of the `μ⋆` line fit, as fractions of `T*`.
    pub mu_fit_window: [f64; 2],
    pub mu_fit_points: usize,
    pub pde_n: usize,
    pub pde_cfl: f64,
    /// Fractions of `T*` where the 1D solution is compared with the Riccati law.
    pub riccati_fractions: Vec<f64>,
    /// Without blowup, the horizon is this multiple of the polytropic `T*`.
    pub horizon_factor: f64,
    /// `γ` of the polytropic reference fan.
    pub reference_gamma: f64,
    pub tolerances: ShockTolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShockTolerances {
    pub mu_fit_r_squared: f64,
    pub mu_root_rel: f64,
    pub product_range: [f64; 2],
    pub min_growth: f64,
    pub riccati_rel: f64,
    pub pde_blowup_rel: f64,
    pub pde_sup_error: f64,
    pub min_mu_star: f64,
    pub max_gradient_variation: f64,
}

impl Default for ShockTolerances {
    fn default() -> Self {
        Self {
            mu_fit_r_squared: 0.999,
            mu_root_rel: 0.01,
            product_range: [0.1, 10.0],
            min_growth: 50.0,
            riccati_rel: 0.02,
            pde_blowup_rel: 0.02,
            pde_sup_error: 1e-4,
            min_mu_star: 0.5,
            max_gradient_variation: 0.01,
        }
    }
}

impl Default for ShockSettings {
    fn default() -> Self {
        Self {
            amplitude: 0.3,
            entropy: 0.0,
            series_points: 100,
            snapshot_fractions: vec![0.0, 0.5, 0.9],
            snapshot_points: 256,
            mu_fit_window: [0.8, 0.99],
            mu_fit_points: 40,
            pde_n: 1024,
            pde_cfl: 0.25,
            riccati_fractions: (1..=9).map(|k| 0.1 * k as f64).collect(),
            horizon_factor: 10.0,
            reference_gamma: 1.4,
            tolerances: ShockTolerances::default(),
        }
    }
}

impl ShockSettings {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.amplitude.is_finite() && self.amplitude != 0.0) {
            return bad(format!("amplitude must be finite and nonzero, got {}", self.amplitude));
        }
        let [a, b] = self.mu_fit_window;
        if !(0.0 <= a && a < b && b < 1.0) {
            return bad(format!("mu_fit_window must satisfy 0 <= a < b < 1, got {a}, {b}"));
        }
        if self.series_points < 2 || self.mu_fit_points < 3 || self.snapshot_points < 1 {
            return bad("series_points >= 2, mu_fit_points >= 3 and snapshot_points >= 1 are required".into());
        }
        if self.pde_n < 8 || !(self.pde_cfl > 0.0 && self.pde_cfl <= 1.0) {
            return bad(format!("pde_n >= 8 and 0 < pde_cfl <= 1 required, got {} and {}", self.pde_n, self.pde_cfl));
        }
        let fracs_ok = |v: &[f64]| v.iter().all(|f| (0.0..1.0).contains(f));
        if !fracs_ok(&self.riccati_fractions) || !fracs_ok(&self.snapshot_fractions) {
            return bad("time fractions must lie in [0, 1)".into());
        }
        if self.riccati_fractions.len() < 2 || self.riccati_fractions.windows(2).any(|w| w[0] >= w[1]) {
            return bad("riccati_fractions must hold at least two increasing values".into());
        }
        if !(self.horizon_factor > 0.0) {
            return bad(format!("horizon_factor must be positive, got {}", self.horizon_factor));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShockCheck {
    pub name: String,
    pub value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiccatiRow {
    pub t: f64,
    pub pde: f64,
    pub predicted: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub rows: Vec<ProfileRow>,
}

/// Everything a shock study measured.
#[derive(Debug, Clone, Serialize)]
pub struct ShockStudy {
    pub eos: String,
    pub t_star: Option<f64>,
    pub reference_t_star: f64,
    pub horizon: f64,
    pub series: Vec<ProductSample>,
    pub snapshots: Vec<Snapshot>,
    pub mu_fit: Option<LinearFit>,
    pub riccati: Vec<RiccatiRow>,
    pub pde_blowup: Option<LinearFit>,
    pub pde_sup_error: Option<f64>,
    pub checks: Vec<ShockCheck>,
}

impl ShockStudy {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// `t,mu_star,max_abs_dxv1,product_mu_dxv1`.
    pub fn series_csv(&self) -> String {
        let mut out = String::from("t,mu_star,max_abs_dxv1,product_mu_dxv1\n");
        for r in &self.series {
            let _ = writeln!(out, "{:e},{:e},{:e},{:e}", r.t, r.mu_star, r.max_abs_dxv1, r.product);
        }
        out
    }
}

/// `x,R_plus,v1,rho_log,u,mu`.
pub fn snapshot_csv(rows: &[ProfileRow]) -> String {
    let mut out = String::from("x,R_plus,v1,rho_log,u,mu\n");
    for r in rows {
        let _ = writeln!(out, "{:e},{:e},{:e},{:e},{:e},{:e}", r.x, r.r_plus, r.v1, r.rho_log, r.u, r.mu);
    }
    out
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// Runs the fan diagnostics and, when the fan blows up, the 1D solver
/// comparison.
pub fn shock_study(eos: Arc<EosModel>, settings: &ShockSettings) -> Result<ShockStudy> {
    settings.validate()?;
    let tol = &settings.tolerances;
    let fan = sine_fan(eos.clone(), settings.amplitude, settings.entropy)?;
    let reference = sine_fan(
        Arc::new(EosModel::polytropic(settings.reference_gamma, eos.background_density())?),
        settings.amplitude,
        settings.entropy,
    )?;
    let reference_t_star = reference.valid_until();
    let t_star = fan.valid_until();
    let finite = t_star.is_finite();
    let horizon = if finite {
        t_star
    } else if reference_t_star.is_finite() {
        settings.horizon_factor * reference_t_star
    } else {
        return Err(Error::Config("the polytropic reference does not blow up; no horizon".into()));
    };
    let last = if finite { settings.mu_fit_window[1] * t_star } else { horizon };
    let series: Vec<ProductSample> = linspace(0.0, last, settings.series_points)
        .into_iter()
        .map(|t| fan.product_sample(t))
        .collect::<Result<_>>()?;
    let snapshots = settings
        .snapshot_fractions
        .iter()
        .map(|&f| {
            let t = f * horizon;
            Ok(Snapshot {
                t,
                rows: fan.profile_snapshot(t, settings.snapshot_points)?,
            })
        })
        .collect::<Result<_>>()?;
    let mut checks = Vec::new();
    let mut check = |name: &str, value: f64, pass: bool| {
        checks.push(ShockCheck {
            name: name.into(),
            value,
            pass,
        })
    };
    let mut study = ShockStudy {
        eos: eos.name(),
        t_star: finite.then_some(t_star),
        reference_t_star,
        horizon,
        series: Vec::new(),
        snapshots,
        mu_fit: None,
        riccati: Vec::new(),
        pde_blowup: None,
        pde_sup_error: None,
        checks: Vec::new(),
    };
    if !finite {
        let min_mu = series.iter().map(|s| s.mu_star).fold(f64::INFINITY, f64::min);
        check("mu_star_lower_bound", min_mu, min_mu >= tol.min_mu_star);
        let g: Vec<f64> = series.iter().map(|s| s.max_abs_dx_rplus).collect();
        let (lo, hi) = g.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        let variation = (hi - lo) / g[0];
        check("gradient_variation", variation, variation <= tol.max_gradient_variation);
        study.series = series;
        study.checks = checks;
        return Ok(study);
    }
    // μ⋆ vanishes linearly
    let [a, b] = settings.mu_fit_window;
    let ts = linspace(a * t_star, b * t_star, settings.mu_fit_points);
    let mus: Vec<f64> = ts.iter().map(|&t| fan.mu_star(t)).collect::<Result<_>>()?;
    let fit = LinearFit::fit(&ts, &mus)?;
    check("mu_fit_r_squared", fit.r_squared, fit.r_squared >= tol.mu_fit_r_squared);
    let root_rel = (fit.root() - t_star).abs() / t_star;
    check("mu_root_rel_error", root_rel, root_rel <= tol.mu_root_rel);
    study.mu_fit = Some(fit);
    // μ|∂_x v¹| stays bounded while ∂_x v¹ blows up
    let (pmin, pmax) = series
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), s| (l.min(s.product), h.max(s.product)));
    let [lo, hi] = tol.product_range;
    check("product_min", pmin, pmin >= lo);
    check("product_max", pmax, pmax <= hi);
    let growth = series.last().map_or(0.0, |s| s.max_abs_dxv1) / series[0].max_abs_dxv1;
    check("dxv1_growth", growth, growth >= tol.min_growth);
    // 1D solver: Riccati law along the worst characteristic and T*
    let x_star = fan.blowup().foot_point.ok_or_else(|| Error::Numeric("blowup without a foot point".into()))?;
    let p0 = fan.profile().slope(x_star);
    let k = fan.riccati_constant(x_star)?;
    let mut pde = Pde1d::from_fan(&fan, settings.pde_n, StencilOrder::Fourth)?;
    let mut samples = Vec::new();
    let mut fracs = settings.riccati_fractions.clone();
    let half = !fracs.iter().any(|&f| f == 0.5);
    if half {
        fracs.push(0.5);
        fracs.sort_by(f64::total_cmp);
    }
    for f in fracs {
        pde.advance_to(&eos, f * t_star, settings.pde_cfl)?;
        if f == 0.5 {
            study.pde_sup_error = Some(pde.sup_error(&fan)?);
        }
        if !(half && f == 0.5) {
            samples.push(pde.sample(&eos));
        }
    }
    let sup_err = study.pde_sup_error.unwrap_or(f64::NAN);
    check("pde_sup_error_half_t_star", sup_err, sup_err <= tol.pde_sup_error);
    study.riccati = samples
        .iter()
        .map(|s| {
            let predicted = riccati(p0, k, s.t).abs();
            RiccatiRow {
                t: s.t,
                pde: s.max_abs_dx_rplus,
                predicted,
                rel_error: (s.max_abs_dx_rplus - predicted).abs() / predicted,
            }
        })
        .collect();
    let worst = study.riccati.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    check("riccati_rel_error", worst, worst <= tol.riccati_rel);
    let pfit = pde_blowup_time(&samples)?;
    let rel = (pfit.root() - t_star).abs() / t_star;
    check("pde_blowup_rel_error", rel, rel <= tol.pde_blowup_rel);
    study.pde_blowup = Some(pfit);
    study.series = series;
    study.checks = checks;
    Ok(study)
}
