//! Equations of state `p(ρ, s)` expressed in the logarithmic density
//! `ρ = ln(ϱ/ϱ̄)` and the entropy `s`.
//!
//! Every model supplies the pressure, the sound speed
//! `c = sqrt(exp(-ρ) p_;ρ / ϱ̄)` and the first/second state-space derivatives
//! that appear in the reformulated equations. The built-in models are closed
//! form; `Custom` differentiates a user closure numerically.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pressure as a function of `(ρ, s)`.
pub type PressureFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Step used for first derivatives of custom pressure laws.
pub const CUSTOM_FIRST_STEP: f64 = 1e-5;
/// Step used for the outer difference of nested (second) derivatives.
pub const CUSTOM_SECOND_STEP: f64 = 1e-4;

#[derive(Clone)]
pub enum EosKind {
    /// `p = κ ϱ̄ exp(γρ) exp(s) / γ`, i.e. `κ ϱ^γ e^s / γ` with `ϱ̄ = 1`.
    Polytropic { gamma: f64, entropy_scale: f64 },
    /// `p = C0 - C1 exp(-ρ) / ϱ̄`, i.e. `C0 - C1/ϱ`.
    Chaplygin { c0: f64, c1: f64 },
    /// User pressure law; derivatives by nested central differences
    /// (first derivatives ~1e-10 accurate, second ~1e-7).
    Custom { name: String, pressure: PressureFn },
}

impl fmt::Debug for EosKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EosKind::Polytropic {
                gamma,
                entropy_scale,
            } => f
                .debug_struct("Polytropic")
                .field("gamma", gamma)
                .field("entropy_scale", entropy_scale)
                .finish(),
            EosKind::Chaplygin { c0, c1 } => f
                .debug_struct("Chaplygin")
                .field("c0", c0)
                .field("c1", c1)
                .finish(),
            EosKind::Custom { name, .. } => f.debug_struct("Custom").field("name", name).finish(),
        }
    }
}

/// An equation of state together with its background density `ϱ̄`.
#[derive(Debug, Clone)]
pub struct EosModel {
    kind: EosKind,
    background_density: f64,
}

/// All pointwise EOS quantities used downstream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EosPoint {
    pub p: f64,
    pub p_rho: f64,
    pub c: f64,
    pub p_s: f64,
    pub p_s_rho: f64,
    pub p_s_s: f64,
    pub p_rho_s: f64,
    pub c_rho: f64,
    pub c_s: f64,
}

impl EosModel {
    pub fn polytropic(gamma: f64, background_density: f64) -> Result<Self> {
        Self::new(
            EosKind::Polytropic {
                gamma,
                entropy_scale: 1.0,
            },
            background_density,
        )
    }

    pub fn chaplygin(c0: f64, c1: f64, background_density: f64) -> Result<Self> {
        Self::new(EosKind::Chaplygin { c0, c1 }, background_density)
    }

    pub fn custom<F>(name: &str, background_density: f64, pressure: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(
            EosKind::Custom {
                name: name.to_string(),
                pressure: Arc::new(pressure),
            },
            background_density,
        )
    }

    pub fn new(kind: EosKind, background_density: f64) -> Result<Self> {
        if !(background_density.is_finite() && background_density > 0.0) {
            return Err(Error::Config(format!(
                "background_density must be finite and > 0, got {background_density}"
            )));
        }
        match &kind {
            EosKind::Polytropic {
                gamma,
                entropy_scale,
            } => {
                if !(gamma.is_finite() && *gamma > 1.0) {
                    return Err(Error::Config(format!("polytropic gamma must be > 1, got {gamma}")));
                }
                if !(entropy_scale.is_finite() && *entropy_scale > 0.0) {
                    return Err(Error::Config(format!(
                        "polytropic entropy_scale must be > 0, got {entropy_scale}"
                    )));
                }
            }
            EosKind::Chaplygin { c0, c1 } => {
                if !c0.is_finite() {
                    return Err(Error::Config(format!("chaplygin C0 must be finite, got {c0}")));
                }
                if !(c1.is_finite() && *c1 > 0.0) {
                    return Err(Error::Config(format!("chaplygin C1 must be > 0, got {c1}")));
                }
            }
            EosKind::Custom { .. } => {}
        }
        Ok(Self {
            kind,
            background_density,
        })
    }

    pub fn kind(&self) -> &EosKind {
        &self.kind
    }

    pub fn background_density(&self) -> f64 {
        self.background_density
    }

    /// True when the pressure does not depend on the entropy (`p_;s ≡ 0`).
    pub fn is_barotropic(&self) -> bool {
        matches!(self.kind, EosKind::Chaplygin { .. })
    }

    pub fn name(&self) -> String {
        match &self.kind {
            EosKind::Polytropic { .. } => "polytropic".into(),
            EosKind::Chaplygin { .. } => "chaplygin".into(),
            EosKind::Custom { name, .. } => format!("custom:{name}"),
        }
    }

    /// Named parameters, including the background density.
    pub fn params(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        match &self.kind {
            EosKind::Polytropic {
                gamma,
                entropy_scale,
            } => {
                m.insert("gamma".into(), *gamma);
                m.insert("entropy_scale".into(), *entropy_scale);
            }
            EosKind::Chaplygin { c0, c1 } => {
                m.insert("c0".into(), *c0);
                m.insert("c1".into(), *c1);
            }
            EosKind::Custom { .. } => {}
        }
        m.insert("background_density".into(), self.background_density);
        m
    }

    /// Pressure only.
    pub fn pressure(&self, rho_log: f64, s: f64) -> f64 {
        let rb = self.background_density;
        match &self.kind {
            EosKind::Polytropic {
                gamma,
                entropy_scale,
            } => entropy_scale * rb * (gamma * rho_log + s).exp() / gamma,
            EosKind::Chaplygin { c0, c1 } => c0 - c1 * (-rho_log).exp() / rb,
            EosKind::Custom { pressure, .. } => pressure(rho_log, s),
        }
    }

    /// Sound speed only. Returns NaN where `p_;ρ ≤ 0` for custom laws.
    pub fn sound_speed(&self, rho_log: f64, s: f64) -> f64 {
        let rb = self.background_density;
        match &self.kind {
            EosKind::Polytropic {
                gamma,
                entropy_scale,
            } => entropy_scale.sqrt() * (0.5 * ((gamma - 1.0) * rho_log + s)).exp(),
            EosKind::Chaplygin { c1, .. } => c1.sqrt() * (-rho_log).exp() / rb,
            EosKind::Custom { pressure, .. } => {
                let p_rho = central(|r| pressure(r, s), rho_log, CUSTOM_FIRST_STEP);
                ((-rho_log).exp() * p_rho / rb).sqrt()
            }
        }
    }

    /// Evaluate every EOS quantity at `(ρ, s)`.
    pub fn evaluate(&self, rho_log: f64, s: f64) -> Result<EosPoint> {
        if !rho_log.is_finite() || !s.is_finite() {
            return Err(Error::Domain(format!(
                "EOS evaluated at non-finite state (rho={rho_log}, s={s})"
            )));
        }
        let pt = self.evaluate_unchecked(rho_log, s);
        if !(pt.c.is_finite() && pt.c > 0.0) {
            return Err(Error::Domain(format!(
                "sound speed not positive at (rho={rho_log}, s={s}): c={}",
                pt.c
            )));
        }
        Ok(pt)
    }

    /// `evaluate` without input/positivity checks, for inner loops on fields
    /// that were validated upstream.
    pub fn evaluate_unchecked(&self, rho_log: f64, s: f64) -> EosPoint {
        let rb = self.background_density;
        match &self.kind {
            EosKind::Polytropic {
                gamma,
                entropy_scale,
            } => {
                let e = (gamma * rho_log + s).exp();
                let p_rho = entropy_scale * rb * e;
                let p = p_rho / gamma;
                let c = entropy_scale.sqrt() * (0.5 * ((gamma - 1.0) * rho_log + s)).exp();
                EosPoint {
                    p,
                    p_rho,
                    c,
                    p_s: p,
                    p_s_rho: p_rho,
                    p_s_s: p,
                    p_rho_s: p_rho,
                    c_rho: 0.5 * (gamma - 1.0) * c,
                    c_s: 0.5 * c,
                }
            }
            EosKind::Chaplygin { c0, c1 } => {
                let em = (-rho_log).exp();
                let c = c1.sqrt() * em / rb;
                EosPoint {
                    p: c0 - c1 * em / rb,
                    p_rho: c1 * em / rb,
                    c,
                    p_s: 0.0,
                    p_s_rho: 0.0,
                    p_s_s: 0.0,
                    p_rho_s: 0.0,
                    c_rho: -c,
                    c_s: 0.0,
                }
            }
            EosKind::Custom { pressure, .. } => {
                let p = |r: f64, s: f64| pressure(r, s);
                let h1 = CUSTOM_FIRST_STEP;
                let h2 = CUSTOM_SECOND_STEP;
                let p_rho_at = |r: f64, s: f64| central(|x| p(x, s), r, h1);
                let p_s_at = |r: f64, s: f64| central(|y| p(r, y), s, h1);
                let c_at = |r: f64, s: f64| ((-r).exp() * p_rho_at(r, s) / rb).sqrt();
                let p_rho = p_rho_at(rho_log, s);
                let p_s = p_s_at(rho_log, s);
                let p_s_rho = central(|r| p_s_at(r, s), rho_log, h2);
                EosPoint {
                    p: p(rho_log, s),
                    p_rho,
                    c: c_at(rho_log, s),
                    p_s,
                    p_s_rho,
                    p_s_s: central(|y| p_s_at(rho_log, y), s, h2),
                    p_rho_s: p_s_rho,
                    c_rho: central(|r| c_at(r, s), rho_log, h2),
                    c_s: central(|y| c_at(rho_log, y), s, h2),
                }
            }
        }
    }

    /// Compare every derivative in [`EosPoint`] with second-order central
    /// differences of `p` and `c` at step `h`.
    pub fn verify_derivatives(&self, rho_log: f64, s: f64, h: f64) -> Result<DerivativeReport> {
        if !(h > 0.0 && h <= 0.1) {
            return Err(Error::Usage(format!("finite-difference step must lie in (0, 0.1], got {h}")));
        }
        let pt = self.evaluate(rho_log, s)?;
        let p = |r: f64, y: f64| self.pressure(r, y);
        let c = |r: f64, y: f64| self.sound_speed(r, y);

        let fd_p_rho = (p(rho_log + h, s) - p(rho_log - h, s)) / (2.0 * h);
        let fd_p_s = (p(rho_log, s + h) - p(rho_log, s - h)) / (2.0 * h);
        let fd_p_s_s = (p(rho_log, s + h) - 2.0 * p(rho_log, s) + p(rho_log, s - h)) / (h * h);
        let fd_mixed = (p(rho_log + h, s + h) - p(rho_log + h, s - h) - p(rho_log - h, s + h)
            + p(rho_log - h, s - h))
            / (4.0 * h * h);
        let fd_c_rho = (c(rho_log + h, s) - c(rho_log - h, s)) / (2.0 * h);
        let fd_c_s = (c(rho_log, s + h) - c(rho_log, s - h)) / (2.0 * h);

        let entries = vec![
            ("p_rho", pt.p_rho, fd_p_rho),
            ("p_s", pt.p_s, fd_p_s),
            ("p_s_rho", pt.p_s_rho, fd_mixed),
            ("p_s_s", pt.p_s_s, fd_p_s_s),
            ("p_rho_s", pt.p_rho_s, fd_mixed),
            ("c_rho", pt.c_rho, fd_c_rho),
            ("c_s", pt.c_s, fd_c_s),
        ]
        .into_iter()
        .map(|(name, analytic, fd)| DerivativeCheck {
            name,
            analytic,
            finite_difference: fd,
            rel_error: relative_error(analytic, fd),
        })
        .collect::<Vec<_>>();
        let max_rel_error = entries.iter().map(|e| e.rel_error).fold(0.0, f64::max);
        Ok(DerivativeReport {
            h,
            entries,
            max_rel_error,
        })
    }
}

#[derive(Debug, Clone)]
pub struct DerivativeCheck {
    pub name: &'static str,
    pub analytic: f64,
    pub finite_difference: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone)]
pub struct DerivativeReport {
    pub h: f64,
    pub entries: Vec<DerivativeCheck>,
    pub max_rel_error: f64,
}

impl DerivativeReport {
    pub fn error_of(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.rel_error)
    }
}

/// `|a - b| / max(|a|, |b|)`, and 0 when both vanish.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn central<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// JSON form of an EOS selection:
/// `{"kind": "polytropic", "gamma": 1.4, "background_density": 1.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EosConfig {
    Polytropic {
        gamma: f64,
        #[serde(default = "one")]
        entropy_scale: f64,
        #[serde(default = "one")]
        background_density: f64,
    },
    Chaplygin {
        #[serde(default)]
        c0: f64,
        #[serde(default = "one")]
        c1: f64,
        #[serde(default = "one")]
        background_density: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for EosConfig {
    fn default() -> Self {
        EosConfig::Polytropic {
            gamma: 1.4,
            entropy_scale: 1.0,
            background_density: 1.0,
        }
    }
}

impl EosConfig {
    pub fn build(&self) -> Result<EosModel> {
        match *self {
            EosConfig::Polytropic {
                gamma,
                entropy_scale,
                background_density,
            } => EosModel::new(
                EosKind::Polytropic {
                    gamma,
                    entropy_scale,
                },
                background_density,
            ),
            EosConfig::Chaplygin {
                c0,
                c1,
                background_density,
            } => EosModel::new(EosKind::Chaplygin { c0, c1 }, background_density),
        }
    }

    /// Default parameters for a model selected by name on the command line.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "polytropic" => Ok(Self::default()),
            "chaplygin" => Ok(EosConfig::Chaplygin {
                c0: 0.0,
                c1: 1.0,
                background_density: 1.0,
            }),
            other => Err(Error::Config(format!("unknown EOS '{other}'"))),
        }
    }
}
