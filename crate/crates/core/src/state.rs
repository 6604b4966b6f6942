//! Fluid state on one time slice and the derived fluid variables.

use std::sync::Arc;

use rayon::prelude::*;

use crate::eos::{EosModel, EosPoint};
use crate::error::{Error, Result};
use crate::evolve::SliceStack;
use crate::grid::{Grid, ScalarField, VectorField};

/// `(ρ, v, s)` on one slice at time `t`.
#[derive(Debug, Clone)]
pub struct FluidState {
    pub t: f64,
    pub rho_log: ScalarField,
    pub v: VectorField,
    pub s: ScalarField,
    pub eos: Arc<EosModel>,
}

impl FluidState {
    pub fn new(
        t: f64,
        rho_log: ScalarField,
        v: VectorField,
        s: ScalarField,
        eos: Arc<EosModel>,
    ) -> Result<Self> {
        let g = *rho_log.grid();
        if *v.grid() != g || *s.grid() != g {
            return Err(Error::Usage("fluid state fields live on different grids".into()));
        }
        Ok(Self {
            t,
            rho_log,
            v,
            s,
            eos,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.rho_log.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.rho_log.is_finite() && self.v.is_finite() && self.s.is_finite()
    }

    /// EOS evaluated at every cell.
    pub fn eos_points(&self) -> Vec<EosPoint> {
        let rho = self.rho_log.values();
        let s = self.s.values();
        (0..rho.len())
            .into_par_iter()
            .map(|i| self.eos.evaluate_unchecked(rho[i], s[i]))
            .collect()
    }

    pub fn sound_speed(&self) -> ScalarField {
        self.rho_log.zip_map(&self.s, |r, s| self.eos.sound_speed(r, s))
    }

    /// Same fields on a grid with another stencil order.
    pub fn with_grid(&self, grid: Grid) -> Self {
        let re = |f: &ScalarField| ScalarField::from_values(grid, f.values().to_vec()).expect("same size");
        Self {
            t: self.t,
            rho_log: re(&self.rho_log),
            v: VectorField::from_components(std::array::from_fn(|i| re(&self.v.comps[i]))),
            s: re(&self.s),
            eos: self.eos.clone(),
        }
    }
}

/// Specific vorticity `Ω`, entropy gradient `S`, and the modified fluid
/// variables `C`, `D`.
#[derive(Debug, Clone)]
pub struct DerivedState {
    pub omega: VectorField,
    pub grad_ent: VectorField,
    pub curl_mod: VectorField,
    pub div_mod: ScalarField,
}

/// `Ω = exp(-ρ) ∇×v`, `S = ∇s`,
/// `C = exp(-ρ) ∇×Ω + exp(-3ρ) c⁻² (p_;s/ϱ̄) (S^a ∂_a v − (∇·v) S)`,
/// `D = exp(-2ρ) ∇·S − exp(-2ρ) S^a ∂_a ρ`.
pub fn compute_derived(state: &FluidState) -> DerivedState {
    let g = state.grid();
    let rho = &state.rho_log;
    let em = rho.map(|r| (-r).exp());
    let curl_v = g.flat_curl(&state.v);
    let omega = VectorField::from_components(std::array::from_fn(|i| curl_v.comps[i].zip_map(&em, |w, e| w * e)));
    let grad_ent = g.gradient(&state.s);
    let curl_omega = g.flat_curl(&omega);
    let jac = g.jacobian(&state.v);
    let div_v = g.flat_div(&state.v);
    let div_s = g.flat_div(&grad_ent);
    let grad_rho = g.gradient(rho);
    let pts = state.eos_points();
    let rb = state.eos.background_density();

    let n = g.len();
    let mut curl_mod = VectorField::zeros(*g);
    let mut div_mod = ScalarField::zeros(*g);
    let rows: Vec<([f64; 3], f64)> = (0..n)
        .into_par_iter()
        .map(|idx| {
            let r = rho.at(idx);
            let e1 = (-r).exp();
            let e2 = (-2.0 * r).exp();
            let e3 = (-3.0 * r).exp();
            let pt = &pts[idx];
            let ent = e3 * pt.p_s / (rb * pt.c * pt.c);
            let s_vec = grad_ent.at(idx);
            let dv = div_v.at(idx);
            let mut c = [0.0; 3];
            for (i, ci) in c.iter_mut().enumerate() {
                let s_dot_dvi: f64 = (0..3).map(|a| s_vec[a] * jac[i][a].at(idx)).sum();
                *ci = e1 * curl_omega.comps[i].at(idx) + ent * s_dot_dvi - ent * dv * s_vec[i];
            }
            let s_dot_grad_rho: f64 = (0..3).map(|a| s_vec[a] * grad_rho.comps[a].at(idx)).sum();
            let d = e2 * div_s.at(idx) - e2 * s_dot_grad_rho;
            (c, d)
        })
        .collect();
    for (idx, (c, d)) in rows.into_iter().enumerate() {
        for i in 0..3 {
            curl_mod.comps[i].values_mut()[idx] = c[i];
        }
        div_mod.values_mut()[idx] = d;
    }
    DerivedState {
        omega,
        grad_ent,
        curl_mod,
        div_mod,
    }
}

/// Five-point central time derivatives at the centre of `f[0..5]`.
pub mod time_stencil {
    /// `∂_t` with `O(Δt⁴)` error.
    #[inline]
    pub fn first(f: [f64; 5], dt: f64) -> f64 {
        (8.0 * (f[3] - f[1]) - (f[4] - f[0])) / (12.0 * dt)
    }

    /// `∂_t²` with `O(Δt⁴)` error.
    #[inline]
    pub fn second(f: [f64; 5], dt: f64) -> f64 {
        (16.0 * (f[1] + f[3]) - (f[0] + f[4]) - 30.0 * f[2]) / (12.0 * dt * dt)
    }
}

/// `∂_t f` at slice `center` of a per-slice sequence of scalar fields.
pub fn time_derivative(fields: &[&ScalarField], dt: f64, center: usize) -> Result<ScalarField> {
    window(fields, center)?;
    let g = *fields[center].grid();
    let vals = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let w = std::array::from_fn(|m| fields[center + m - 2].at(idx));
            time_stencil::first(w, dt)
        })
        .collect();
    ScalarField::from_values(g, vals)
}

/// `∂_t² f` at slice `center`.
pub fn second_time_derivative(fields: &[&ScalarField], dt: f64, center: usize) -> Result<ScalarField> {
    window(fields, center)?;
    let g = *fields[center].grid();
    let vals = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let w = std::array::from_fn(|m| fields[center + m - 2].at(idx));
            time_stencil::second(w, dt)
        })
        .collect();
    ScalarField::from_values(g, vals)
}

fn window(fields: &[&ScalarField], center: usize) -> Result<()> {
    if center < 2 || center + 2 >= fields.len() {
        return Err(Error::Usage(format!(
            "time stencil needs two slices on each side of index {center}, have {}",
            fields.len()
        )));
    }
    Ok(())
}

/// `Bf = ∂_t f + v^a ∂_a f` at the middle slice of `stack`, where `f` holds one
/// scalar field per slice.
pub fn material_derivative(stack: &SliceStack, f: &[ScalarField]) -> Result<ScalarField> {
    if f.len() != stack.len() {
        return Err(Error::Usage(format!(
            "material derivative needs one field per slice ({}), got {}",
            stack.len(),
            f.len()
        )));
    }
    let mid = stack.middle_index();
    let refs: Vec<&ScalarField> = f.iter().collect();
    let dt_f = time_derivative(&refs, stack.dt(), mid)?;
    let state = stack.middle();
    let g = state.grid();
    let mut out = dt_f;
    for a in 0..3 {
        let adv = g.partial(&f[mid], a).zip_map(&state.v.comps[a], |d, v| v * d);
        out.add_assign(&adv);
    }
    Ok(out)
}

/// Component-wise [`material_derivative`] of a per-slice vector field.
pub fn material_derivative_vec(stack: &SliceStack, f: &[VectorField]) -> Result<VectorField> {
    let comps: Result<Vec<ScalarField>> = (0..3)
        .map(|i| {
            let c: Vec<ScalarField> = f.iter().map(|v| v.comps[i].clone()).collect();
            material_derivative(stack, &c)
        })
        .collect();
    let comps = comps?;
    let [a, b, c]: [ScalarField; 3] = comps.try_into().expect("three components");
    Ok(VectorField::from_components([a, b, c]))
}
