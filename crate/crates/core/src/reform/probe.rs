//! Frequency-scaling probe: how fast an equation's right-hand side responds to
//! a single-mode perturbation of `v` or `ρ` as the wavenumber doubles.
//!
//! The right-hand side is evaluated from one state with `Bρ`, `Bv`, `BS`
//! replaced by their first-order expressions. `Ω`, `S`, `C`, `D` are treated
//! as unknowns in their own right and held at their base values, so a
//! response growing like `k` means only first derivatives of the perturbed
//! variable enter.

use serde::Serialize;

use super::catalog::{Equation, equation_rhs, term_catalog};
use super::residuals::CellView;
use crate::error::{Error, Result};
use crate::grid::VectorField;
use crate::state::{FluidState, compute_derived};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeVariable {
    /// `v¹ += ε sin(k x¹)`
    Velocity,
    /// `ρ += ε sin(k x¹)`
    Density,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeResult {
    pub equation: Equation,
    pub variable: ProbeVariable,
    /// Whether `exp(−ρ)∂₁∂₁` of the perturbed variable (`v¹` or `ρ`) was
    /// added to the right-hand side.
    pub control: bool,
    pub k: usize,
    pub response_k: f64,
    pub response_2k: f64,
    /// `log₂(response_2k / response_k)`; `None` when the right-hand side does
    /// not depend on the perturbed variable at all.
    pub exponent: Option<f64>,
}

fn rhs(
    state: &FluidState,
    base: &crate::state::DerivedState,
    equation: Equation,
    control: Option<ProbeVariable>,
) -> VectorField {
    let catalog = term_catalog();
    let view = CellView::substituted(state, base.clone());
    let mut out = view.map_vec(|d| equation_rhs(&catalog, equation, d));
    if let Some(var) = control {
        let g = state.grid();
        let f = match var {
            ProbeVariable::Velocity => &state.v.comps[0],
            ProbeVariable::Density => &state.rho_log,
        };
        let d11 = g.partial(&g.partial(f, 0), 0);
        let inj = d11.zip_map(&state.rho_log, |x, r| (-r).exp() * x);
        out.comps[0].add_assign(&inj);
    }
    out
}

fn perturb(base: &FluidState, variable: ProbeVariable, k: usize, eps: f64) -> FluidState {
    let mut s = base.clone();
    let g = *base.grid();
    let bump = g.scalar_from_fn(|x| eps * (k as f64 * x[0]).sin());
    match variable {
        ProbeVariable::Velocity => s.v.comps[0].add_assign(&bump),
        ProbeVariable::Density => s.rho_log.add_assign(&bump),
    }
    s
}

/// Measures the response exponent of `equation`'s right-hand side between
/// wavenumbers `k` and `2k`.
pub fn frequency_scaling_probe(
    equation: Equation,
    base: &FluidState,
    variable: ProbeVariable,
    k: usize,
    eps: f64,
    control: bool,
) -> Result<ProbeResult> {
    let n = base.grid().n();
    if k == 0 || 8 * k > n {
        return Err(Error::Usage(format!("wavenumber {k} is not resolvable on n={n}; need 1 ≤ k ≤ n/8")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Usage(format!("probe amplitude must be positive, got {eps}")));
    }
    let derived = compute_derived(base);
    let inject = control.then_some(variable);
    let r0 = rhs(base, &derived, equation, inject);
    let response = |m: usize| rhs(&perturb(base, variable, m, eps), &derived, equation, inject).sub(&r0).sup_norm();
    let response_k = response(k);
    let response_2k = response(2 * k);
    let exponent = if response_k == 0.0 && response_2k == 0.0 {
        None
    } else {
        Some((response_2k / response_k).log2())
    };
    if exponent.is_some_and(|e| !e.is_finite()) {
        return Err(Error::Numeric(format!(
            "probe responses {response_k:e} and {response_2k:e} give no finite exponent"
        )));
    }
    Ok(ProbeResult {
        equation,
        variable,
        control,
        k,
        response_k,
        response_2k,
        exponent,
    })
}
