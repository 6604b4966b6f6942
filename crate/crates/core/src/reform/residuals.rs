//! Residuals of the second-order system on a slice stack.

use rayon::prelude::*;
use serde::Serialize;

use super::catalog::{Equation, SourceGroup, TermSpec, equation_rhs, group_sum, term_catalog};
use super::terms::{CellData, Vec3};
use crate::eos::EosPoint;
use crate::error::{Error, Result};
use crate::evolve::SliceStack;
use crate::geometry::box_g;
use crate::grid::{Grid, ScalarField, VectorField};
use crate::state::{DerivedState, FluidState, compute_derived, material_derivative, material_derivative_vec};

/// Grid fields from which [`CellData`] is read cell by cell.
#[derive(Debug, Clone)]
pub struct CellView {
    grid: Grid,
    rho: ScalarField,
    v: VectorField,
    eos: Vec<EosPoint>,
    background_density: f64,
    grad_rho: VectorField,
    jac_v: [[ScalarField; 3]; 3],
    derived: DerivedState,
    jac_omega: [[ScalarField; 3]; 3],
    jac_ent_grad: [[ScalarField; 3]; 3],
    curl_omega: VectorField,
    b_rho: ScalarField,
    b_v: VectorField,
    b_ent_grad: VectorField,
}

impl CellView {
    /// Spatial data from `state` and `derived`; the three material derivatives
    /// are supplied by the caller.
    pub fn new(
        state: &FluidState,
        derived: DerivedState,
        b_rho: ScalarField,
        b_v: VectorField,
        b_ent_grad: VectorField,
    ) -> Self {
        let g = *state.grid();
        Self {
            grid: g,
            rho: state.rho_log.clone(),
            v: state.v.clone(),
            eos: state.eos_points(),
            background_density: state.eos.background_density(),
            grad_rho: g.gradient(&state.rho_log),
            jac_v: g.jacobian(&state.v),
            jac_omega: g.jacobian(&derived.omega),
            jac_ent_grad: g.jacobian(&derived.grad_ent),
            curl_omega: g.flat_curl(&derived.omega),
            derived,
            b_rho,
            b_v,
            b_ent_grad,
        }
    }

    /// Single-state view with `Bρ`, `Bv`, `BS` replaced by their first-order
    /// expressions. `Ω` and `S` are taken from `derived` as given.
    pub fn substituted(state: &FluidState, derived: DerivedState) -> Self {
        let g = *state.grid();
        let rb = state.eos.background_density();
        let pts = state.eos_points();
        let grad_rho = g.gradient(&state.rho_log);
        let b_rho = g.flat_div(&state.v).scale(-1.0);
        let b_v = VectorField::from_fn(g, |idx| {
            let p = &pts[idx];
            let e = (-state.rho_log.at(idx)).exp() * p.p_s / rb;
            let gr = grad_rho.at(idx);
            let gs = derived.grad_ent.at(idx);
            std::array::from_fn(|i| -p.c * p.c * gr[i] - e * gs[i])
        });
        let mut view = Self::new(
            state,
            derived,
            b_rho,
            b_v,
            VectorField::zeros(g),
        );
        let l_s: Vec<Vec3> = (0..g.len())
            .into_par_iter()
            .map(|idx| super::terms::l_ent_grad(&view.cell(idx)))
            .collect();
        view.b_ent_grad = VectorField::from_fn(g, |idx| l_s[idx]);
        view
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn derived(&self) -> &DerivedState {
        &self.derived
    }

    pub fn cell(&self, idx: usize) -> CellData {
        let d = &self.derived;
        let m = |j: &[[ScalarField; 3]; 3]| std::array::from_fn(|i| std::array::from_fn(|a| j[i][a].at(idx)));
        CellData {
            rho: self.rho.at(idx),
            v: self.v.at(idx),
            eos: self.eos[idx],
            background_density: self.background_density,
            grad_rho: self.grad_rho.at(idx),
            dv: m(&self.jac_v),
            omega: d.omega.at(idx),
            ent_grad: d.grad_ent.at(idx),
            d_omega: m(&self.jac_omega),
            d_ent_grad: m(&self.jac_ent_grad),
            curl_omega: self.curl_omega.at(idx),
            curl_mod: d.curl_mod.at(idx),
            div_mod: d.div_mod.at(idx),
            b_rho: self.b_rho.at(idx),
            b_v: self.b_v.at(idx),
            b_ent_grad: self.b_ent_grad.at(idx),
        }
    }

    /// Evaluates `f` at every cell.
    pub fn map_vec<F: Fn(&CellData) -> Vec3 + Sync>(&self, f: F) -> VectorField {
        let vals: Vec<Vec3> = (0..self.grid.len()).into_par_iter().map(|idx| f(&self.cell(idx))).collect();
        VectorField::from_fn(self.grid, |idx| vals[idx])
    }

    /// Slot 0 of `f` at every cell.
    pub fn map_scalar<F: Fn(&CellData) -> Vec3 + Sync>(&self, f: F) -> ScalarField {
        let vals: Vec<f64> = (0..self.grid.len()).into_par_iter().map(|idx| f(&self.cell(idx))[0]).collect();
        ScalarField::from_values(self.grid, vals).expect("length matches grid")
    }
}

/// Named source fields of the second-order system.
#[derive(Debug, Clone)]
pub struct SourceTerms {
    pub q_v: VectorField,
    pub q_rho: ScalarField,
    pub q_c: VectorField,
    pub q_d: ScalarField,
    pub l_v: VectorField,
    pub l_rho: ScalarField,
    pub l_omega: VectorField,
    pub l_ent_grad: VectorField,
    pub l_div_omega: ScalarField,
    pub l_c: VectorField,
}

impl SourceTerms {
    pub fn from_view(view: &CellView, catalog: &[TermSpec]) -> Self {
        let v = |g| view.map_vec(|d| group_sum(catalog, g, d));
        let s = |g| view.map_scalar(|d| group_sum(catalog, g, d));
        Self {
            q_v: v(SourceGroup::QV),
            q_rho: s(SourceGroup::QRho),
            q_c: v(SourceGroup::QC),
            q_d: s(SourceGroup::QD),
            l_v: v(SourceGroup::LV),
            l_rho: s(SourceGroup::LRho),
            l_omega: v(SourceGroup::LOmega),
            l_ent_grad: v(SourceGroup::LEntGrad),
            l_div_omega: s(SourceGroup::LDivOmega),
            l_c: v(SourceGroup::LC),
        }
    }

    pub fn max_abs(&self) -> f64 {
        [
            self.q_v.sup_norm(),
            self.q_rho.sup_norm(),
            self.q_c.sup_norm(),
            self.q_d.sup_norm(),
            self.l_v.sup_norm(),
            self.l_rho.sup_norm(),
            self.l_omega.sup_norm(),
            self.l_ent_grad.sup_norm(),
            self.l_div_omega.sup_norm(),
            self.l_c.sup_norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Source terms at the middle slice of `stack`, with `Bρ`, `Bv` and `BS` taken
/// from the stack.
pub fn source_terms(state: &FluidState, derived: &DerivedState, stack: &SliceStack) -> Result<SourceTerms> {
    let mid = stack.middle();
    if state.grid() != mid.grid() || state.t != mid.t {
        return Err(Error::Usage(format!(
            "state at t={} does not match the stack middle slice at t={}",
            state.t, mid.t
        )));
    }
    let ctx = ResidualContext::with_derived(stack, derived.clone())?;
    Ok(SourceTerms::from_view(&ctx.view, &ctx.catalog))
}

#[derive(Debug, Clone)]
pub enum ResidualField {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl ResidualField {
    pub fn sup_norm(&self) -> f64 {
        match self {
            ResidualField::Scalar(f) => f.sup_norm(),
            ResidualField::Vector(f) => f.sup_norm(),
        }
    }
    pub fn l2_norm(&self) -> f64 {
        match self {
            ResidualField::Scalar(f) => f.l2_norm(),
            ResidualField::Vector(f) => f.l2_norm(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EquationResidual {
    pub equation: Equation,
    pub field: ResidualField,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualNorms {
    pub equation: Equation,
    pub sup_norm: f64,
    pub l2_norm: f64,
}

impl EquationResidual {
    pub fn norms(&self) -> ResidualNorms {
        ResidualNorms {
            equation: self.equation,
            sup_norm: self.field.sup_norm(),
            l2_norm: self.field.l2_norm(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WaveResiduals {
    pub res_v: VectorField,
    pub res_rho: ScalarField,
}

#[derive(Debug, Clone)]
pub struct TransportResiduals {
    pub res_omega: VectorField,
    pub res_s: ScalarField,
    pub res_ent_grad: VectorField,
}

#[derive(Debug, Clone)]
pub struct DivCurlResiduals {
    pub res_div_omega: ScalarField,
    pub res_c: VectorField,
    pub res_d: ScalarField,
    pub res_curl_ent_grad: VectorField,
}

/// Everything the residuals share: derived fields on every slice and the
/// middle-slice cell view.
pub struct ResidualContext<'a> {
    stack: &'a SliceStack,
    derived: Vec<DerivedState>,
    view: CellView,
    catalog: Vec<TermSpec>,
}

impl<'a> ResidualContext<'a> {
    pub fn new(stack: &'a SliceStack) -> Result<Self> {
        let derived: Vec<DerivedState> = stack.slices().iter().map(compute_derived).collect();
        Self::build(stack, derived)
    }

    fn with_derived(stack: &'a SliceStack, mid_derived: DerivedState) -> Result<Self> {
        let mid = stack.middle_index();
        let derived: Vec<DerivedState> = stack
            .slices()
            .iter()
            .enumerate()
            .map(|(j, s)| if j == mid { mid_derived.clone() } else { compute_derived(s) })
            .collect();
        Self::build(stack, derived)
    }

    fn build(stack: &'a SliceStack, derived: Vec<DerivedState>) -> Result<Self> {
        let slices = stack.slices();
        let rho: Vec<ScalarField> = slices.iter().map(|s| s.rho_log.clone()).collect();
        let v: Vec<VectorField> = slices.iter().map(|s| s.v.clone()).collect();
        let ent: Vec<VectorField> = derived.iter().map(|d| d.grad_ent.clone()).collect();
        let b_rho = material_derivative(stack, &rho)?;
        let b_v = material_derivative_vec(stack, &v)?;
        let b_ent_grad = material_derivative_vec(stack, &ent)?;
        let view = CellView::new(
            stack.middle(),
            derived[stack.middle_index()].clone(),
            b_rho,
            b_v,
            b_ent_grad,
        );
        Ok(Self {
            stack,
            derived,
            view,
            catalog: term_catalog(),
        })
    }

    pub fn view(&self) -> &CellView {
        &self.view
    }

    fn rhs_vec(&self, eq: Equation) -> VectorField {
        self.view.map_vec(|d| equation_rhs(&self.catalog, eq, d))
    }

    fn rhs_scalar(&self, eq: Equation) -> ScalarField {
        self.view.map_scalar(|d| equation_rhs(&self.catalog, eq, d))
    }

    fn b_derived_vec(&self, pick: impl Fn(&DerivedState) -> &VectorField) -> Result<VectorField> {
        let f: Vec<VectorField> = self.derived.iter().map(|d| pick(d).clone()).collect();
        material_derivative_vec(self.stack, &f)
    }

    pub fn wave(&self) -> Result<WaveResiduals> {
        let slices = self.stack.slices();
        let box_v: Result<Vec<ScalarField>> = (0..3)
            .map(|i| {
                let f: Vec<ScalarField> = slices.iter().map(|s| s.v.comps[i].clone()).collect();
                box_g(self.stack, &f)
            })
            .collect();
        let [b0, b1, b2]: [ScalarField; 3] = box_v?.try_into().expect("three components");
        let box_v = VectorField::from_components([b0, b1, b2]);
        let rho: Vec<ScalarField> = slices.iter().map(|s| s.rho_log.clone()).collect();
        let box_rho = box_g(self.stack, &rho)?;
        Ok(WaveResiduals {
            res_v: box_v.sub(&self.rhs_vec(Equation::VelocityWave)),
            res_rho: box_rho.sub(&self.rhs_scalar(Equation::DensityWave)),
        })
    }

    pub fn transport(&self) -> Result<TransportResiduals> {
        let b_omega = self.b_derived_vec(|d| &d.omega)?;
        let s: Vec<ScalarField> = self.stack.slices().iter().map(|s| s.s.clone()).collect();
        let b_s = material_derivative(self.stack, &s)?;
        Ok(TransportResiduals {
            res_omega: b_omega.sub(&self.rhs_vec(Equation::VorticityTransport)),
            res_s: b_s,
            res_ent_grad: self.view.b_ent_grad.sub(&self.rhs_vec(Equation::EntropyGradientTransport)),
        })
    }

    pub fn divcurl(&self) -> Result<DivCurlResiduals> {
        let g = self.view.grid;
        let d = &self.view.derived;
        let b_c = self.b_derived_vec(|d| &d.curl_mod)?;
        let dm: Vec<ScalarField> = self.derived.iter().map(|d| d.div_mod.clone()).collect();
        let b_d = material_derivative(self.stack, &dm)?;
        Ok(DivCurlResiduals {
            res_div_omega: g.flat_div(&d.omega).sub(&self.rhs_scalar(Equation::VorticityDivergence)),
            res_c: b_c.sub(&self.rhs_vec(Equation::CurlModTransport)),
            res_d: b_d.sub(&self.rhs_scalar(Equation::DivModTransport)),
            res_curl_ent_grad: g.flat_curl(&d.grad_ent),
        })
    }

    /// All residuals in [`Equation::ALL`] order.
    pub fn all(&self) -> Result<Vec<EquationResidual>> {
        let w = self.wave()?;
        let t = self.transport()?;
        let dc = self.divcurl()?;
        use ResidualField::{Scalar, Vector};
        let fields = [
            Vector(w.res_v),
            Scalar(w.res_rho),
            Vector(t.res_omega),
            Scalar(t.res_s),
            Vector(t.res_ent_grad),
            Scalar(dc.res_div_omega),
            Vector(dc.res_c),
            Scalar(dc.res_d),
            Vector(dc.res_curl_ent_grad),
        ];
        Ok(Equation::ALL
            .into_iter()
            .zip(fields)
            .map(|(equation, field)| EquationResidual { equation, field })
            .collect())
    }
}

pub fn wave_residuals(stack: &SliceStack) -> Result<WaveResiduals> {
    ResidualContext::new(stack)?.wave()
}

pub fn transport_residuals(stack: &SliceStack) -> Result<TransportResiduals> {
    ResidualContext::new(stack)?.transport()
}

pub fn divcurl_residuals(stack: &SliceStack) -> Result<DivCurlResiduals> {
    ResidualContext::new(stack)?.divcurl()
}

/// Sup and L² norms of every residual.
pub fn residual_norms(stack: &SliceStack) -> Result<Vec<ResidualNorms>> {
    let ctx = ResidualContext::new(stack)?;
    Ok(ctx.all()?.iter().map(EquationResidual::norms).collect())
}
