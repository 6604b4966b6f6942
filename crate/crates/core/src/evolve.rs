//! First-order Euler evolution on the periodic grid, used to manufacture
//! solutions whose slices feed the residual checks.
//!
//! `Bρ = −∇·v`, `Bvⁱ = −c² ∂_iρ − exp(−ρ)(p_;s/ϱ̄) ∂_i s`, `Bs = 0`, with
//! `B = ∂_t + v^a ∂_a`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eos::EosModel;
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, VectorField};
use crate::state::{compute_derived, FluidState};

/// Time derivatives of the fundamental unknowns.
#[derive(Debug, Clone)]
pub struct EulerRhs {
    pub d_rho: ScalarField,
    pub d_v: VectorField,
    pub d_s: ScalarField,
}

/// `∂_t (ρ, v, s)` from the first-order system.
pub fn euler_rhs(state: &FluidState) -> EulerRhs {
    let g = state.grid();
    let grad_rho = g.gradient(&state.rho_log);
    let grad_s = g.gradient(&state.s);
    let jac = g.jacobian(&state.v);
    let div_v = g.flat_div(&state.v);
    let rb = state.eos.background_density();
    let eos = &state.eos;
    let n = g.len();

    let rows: Vec<(f64, [f64; 3], f64)> = (0..n)
        .into_par_iter()
        .map(|idx| {
            let r = state.rho_log.at(idx);
            let pt = eos.evaluate_unchecked(r, state.s.at(idx));
            let v = state.v.at(idx);
            let gr = grad_rho.at(idx);
            let gs = grad_s.at(idx);
            let adv = |grad: [f64; 3]| v[0] * grad[0] + v[1] * grad[1] + v[2] * grad[2];
            let d_rho = -adv(gr) - div_v.at(idx);
            let force = (-r).exp() * pt.p_s / rb;
            let c2 = pt.c * pt.c;
            let d_v = std::array::from_fn(|i| {
                let gvi = [jac[i][0].at(idx), jac[i][1].at(idx), jac[i][2].at(idx)];
                -adv(gvi) - c2 * gr[i] - force * gs[i]
            });
            let d_s = -adv(gs);
            (d_rho, d_v, d_s)
        })
        .collect();

    let mut d_rho = ScalarField::zeros(*g);
    let mut d_v = VectorField::zeros(*g);
    let mut d_s = ScalarField::zeros(*g);
    for (idx, (dr, dv, ds)) in rows.into_iter().enumerate() {
        d_rho.values_mut()[idx] = dr;
        for i in 0..3 {
            d_v.comps[i].values_mut()[idx] = dv[i];
        }
        d_s.values_mut()[idx] = ds;
    }
    EulerRhs { d_rho, d_v, d_s }
}

/// `0.25 h / max(|v| + c)`.
pub fn advisory_dt(state: &FluidState) -> f64 {
    let c = state.sound_speed();
    let mut max_speed = 0.0f64;
    for idx in 0..state.grid().len() {
        let v = state.v.at(idx);
        let speed = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() + c.at(idx);
        max_speed = max_speed.max(speed);
    }
    0.25 * state.grid().h() / max_speed
}

fn stage(state: &FluidState, k: &EulerRhs, w: f64) -> FluidState {
    FluidState {
        t: state.t,
        rho_log: state.rho_log.axpy(w, &k.d_rho),
        v: state.v.axpy(w, &k.d_v),
        s: state.s.axpy(w, &k.d_s),
        eos: state.eos.clone(),
    }
}

/// One classical RK4 step of size `dt` (negative `dt` integrates backwards).
pub fn rk4_step(state: &FluidState, dt: f64) -> Result<FluidState> {
    let k1 = euler_rhs(state);
    let k2 = euler_rhs(&stage(state, &k1, 0.5 * dt));
    let k3 = euler_rhs(&stage(state, &k2, 0.5 * dt));
    let k4 = euler_rhs(&stage(state, &k3, dt));
    let combine = |f: &ScalarField, a: &ScalarField, b: &ScalarField, c: &ScalarField, d: &ScalarField| {
        let vals = f
            .values()
            .par_iter()
            .enumerate()
            .map(|(i, &x)| x + dt / 6.0 * (a.at(i) + 2.0 * b.at(i) + 2.0 * c.at(i) + d.at(i)))
            .collect();
        ScalarField::from_values(*f.grid(), vals).expect("same grid")
    };
    let next = FluidState {
        t: state.t + dt,
        rho_log: combine(&state.rho_log, &k1.d_rho, &k2.d_rho, &k3.d_rho, &k4.d_rho),
        v: VectorField::from_components(std::array::from_fn(|i| {
            combine(&state.v.comps[i], &k1.d_v.comps[i], &k2.d_v.comps[i], &k3.d_v.comps[i], &k4.d_v.comps[i])
        })),
        s: combine(&state.s, &k1.d_s, &k2.d_s, &k3.d_s, &k4.d_s),
        eos: state.eos.clone(),
    };
    if !next.is_finite() {
        return Err(Error::Blowup {
            t: next.t,
            detail: "non-finite value after RK4 step".into(),
        });
    }
    Ok(next)
}

/// Eighth-order damping applied per axis: `f ← f − (σ/256) (δ²)⁴ f`, which
/// removes the fraction `σ` of the Nyquist mode and leaves smooth modes
/// untouched to `O(h⁸)`.
pub fn apply_filter(state: &FluidState, strength: f64) -> FluidState {
    let g = *state.grid();
    let f = |x: &ScalarField| filter_field(&g, x, strength);
    FluidState {
        t: state.t,
        rho_log: f(&state.rho_log),
        v: VectorField::from_components(std::array::from_fn(|i| f(&state.v.comps[i]))),
        s: f(&state.s),
        eos: state.eos.clone(),
    }
}

fn filter_field(g: &Grid, f: &ScalarField, strength: f64) -> ScalarField {
    let n = g.n();
    let mut out = f.clone();
    for axis in 0..3 {
        let mut d = out.clone();
        for _ in 0..4 {
            let src = d.values().to_vec();
            let vals = d.values_mut();
            for idx in 0..g.len() {
                let (i, j, k) = g.ijk(idx);
                let mut p = [i, j, k];
                let here = p[axis];
                p[axis] = (here + 1) % n;
                let up = src[g.index(p[0], p[1], p[2])];
                p[axis] = (here + n - 1) % n;
                let dn = src[g.index(p[0], p[1], p[2])];
                vals[idx] = up - 2.0 * src[idx] + dn;
            }
        }
        out = out.axpy(-strength / 256.0, &d);
    }
    out
}

/// Stepping options for [`evolve_to`].
#[derive(Debug, Clone, Copy, Default)]
pub struct EvolveOptions {
    /// Damping strength applied after every step; `None` (the default) leaves
    /// the discrete solution untouched.
    pub filter: Option<f64>,
}

/// Integrate from `state.t` to `t_end` with steps of at most `dt`; the last step
/// is shortened so the final time is hit exactly.
pub fn evolve_to(state: &FluidState, t_end: f64, dt: f64, opts: EvolveOptions) -> Result<FluidState> {
    if dt <= 0.0 {
        return Err(Error::Usage(format!("time step must be positive, got {dt}")));
    }
    let mut cur = state.clone();
    let start = state.t;
    let span = t_end - start;
    if span < 0.0 {
        return Err(Error::Usage(format!("cannot evolve backwards from {start} to {t_end}")));
    }
    let full = (span / dt * (1.0 + 1e-12)).floor() as usize;
    for step in 0..full {
        cur = rk4_step(&cur, dt)?;
        cur.t = start + (step + 1) as f64 * dt;
        if let Some(sigma) = opts.filter {
            cur = apply_filter(&cur, sigma);
        }
    }
    let rest = t_end - cur.t;
    if rest > 1e-12 * dt.max(1.0) {
        cur = rk4_step(&cur, rest)?;
        if let Some(sigma) = opts.filter {
            cur = apply_filter(&cur, sigma);
        }
    }
    cur.t = t_end;
    Ok(cur)
}

/// Consecutive slices at uniform spacing `dt`.
#[derive(Debug, Clone)]
pub struct SliceStack {
    slices: Vec<FluidState>,
    dt: f64,
}

impl SliceStack {
    pub fn from_slices(slices: Vec<FluidState>, dt: f64) -> Result<Self> {
        if slices.len() < 5 || slices.len() % 2 == 0 {
            return Err(Error::Usage(format!(
                "slice stack needs an odd number (>= 5) of slices, got {}",
                slices.len()
            )));
        }
        if dt <= 0.0 {
            return Err(Error::Usage(format!("slice spacing must be positive, got {dt}")));
        }
        let g = *slices[0].grid();
        let t0 = slices[0].t;
        for (m, s) in slices.iter().enumerate() {
            if *s.grid() != g {
                return Err(Error::Usage("slices live on different grids".into()));
            }
            let expect = t0 + m as f64 * dt;
            if (s.t - expect).abs() > 1e-9 * (1.0 + expect.abs()) {
                return Err(Error::Usage(format!("slice {m} at t={} but expected {expect}", s.t)));
            }
            if !Arc::ptr_eq(&s.eos, &slices[0].eos) && s.eos.params() != slices[0].eos.params() {
                return Err(Error::Usage("slices use different equations of state".into()));
            }
        }
        Ok(Self { slices, dt })
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }
    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn middle_index(&self) -> usize {
        self.slices.len() / 2
    }
    pub fn middle(&self) -> &FluidState {
        &self.slices[self.middle_index()]
    }
    pub fn slices(&self) -> &[FluidState] {
        &self.slices
    }
    pub fn grid(&self) -> &Grid {
        self.slices[0].grid()
    }
    pub fn t_center(&self) -> f64 {
        self.middle().t
    }

    /// The five slices centred on the middle one.
    pub fn inner5(&self) -> SliceStack {
        let m = self.middle_index();
        SliceStack {
            slices: self.slices[m - 2..=m + 2].to_vec(),
            dt: self.dt,
        }
    }
}

/// Evolve `initial` and record `count` slices at spacing `dt` centred on
/// `t_center`.
pub fn build_slice_stack_n(
    initial: &FluidState,
    t_center: f64,
    dt: f64,
    count: usize,
    opts: EvolveOptions,
) -> Result<SliceStack> {
    if count < 5 || count % 2 == 0 {
        return Err(Error::Usage(format!("slice count must be odd and >= 5, got {count}")));
    }
    let half = (count / 2) as f64;
    let t_first = t_center - half * dt;
    if t_first < initial.t - 1e-12 {
        return Err(Error::Usage(format!(
            "t_center = {t_center} must be at least {half}·dt after the initial time {}",
            initial.t
        )));
    }
    let mut cur = evolve_to(initial, t_first.max(initial.t), dt, opts)?;
    let mut slices = Vec::with_capacity(count);
    for m in 0..count {
        if m > 0 {
            cur = rk4_step(&cur, dt)?;
            if let Some(sigma) = opts.filter {
                cur = apply_filter(&cur, sigma);
            }
        }
        cur.t = t_first + m as f64 * dt;
        slices.push(cur.clone());
    }
    SliceStack::from_slices(slices, dt)
}

/// Five slices centred on `t_center`.
pub fn build_slice_stack(initial: &FluidState, t_center: f64, dt: f64) -> Result<SliceStack> {
    build_slice_stack_n(initial, t_center, dt, 5, EvolveOptions::default())
}

/// Fundamental data plus what the second-order system additionally needs.
#[derive(Debug, Clone)]
pub struct InitialDataSet {
    pub fundamental: FluidState,
    pub d_rho: ScalarField,
    pub d_v: VectorField,
    pub omega: VectorField,
    pub grad_ent: VectorField,
}

/// Complete `(ρ₀, v₀, s₀)` with `∂_tρ|₀`, `∂_tv|₀`, `Ω|₀`, `S|₀`.
pub fn complete_initial_data(fundamental: &FluidState) -> InitialDataSet {
    let rhs = euler_rhs(fundamental);
    let derived = compute_derived(fundamental);
    InitialDataSet {
        fundamental: fundamental.clone(),
        d_rho: rhs.d_rho,
        d_v: rhs.d_v,
        omega: derived.omega,
        grad_ent: derived.grad_ent,
    }
}

/// Amplitudes of the standard smooth fixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothAmplitudes {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

impl Default for SmoothAmplitudes {
    fn default() -> Self {
        Self {
            a: 0.05,
            b: 0.05,
            d: 0.05,
        }
    }
}

/// `ρ₀ = a sin x¹ cos x²`, `v₀ = b (sin x², sin x³, sin x¹)`, `s₀ = d cos x¹`.
pub fn smooth_fixture(grid: Grid, amp: SmoothAmplitudes, eos: Arc<EosModel>) -> FluidState {
    let SmoothAmplitudes { a, b, d } = amp;
    FluidState {
        t: 0.0,
        rho_log: grid.scalar_from_fn(|x| a * x[0].sin() * x[1].cos()),
        v: grid.vector_from_fn(|x| [b * x[1].sin(), b * x[2].sin(), b * x[0].sin()]),
        s: grid.scalar_from_fn(|x| d * x[0].cos()),
        eos,
    }
}

/// Spatially constant state.
pub fn constant_fixture(grid: Grid, rho: f64, v: [f64; 3], s: f64, eos: Arc<EosModel>) -> FluidState {
    FluidState {
        t: 0.0,
        rho_log: ScalarField::constant(grid, rho),
        v: VectorField::constant(grid, v),
        s: ScalarField::constant(grid, s),
        eos,
    }
}

/// Irrotational, isentropic data: `v = ∇φ` with the discrete gradient,
/// `φ = b (cos x¹ + sin x² cos x³)`, `ρ = a sin(x¹ + x³)`, `s ≡ s₀`.
pub fn irrotational_fixture(grid: Grid, a: f64, b: f64, s0: f64, eos: Arc<EosModel>) -> FluidState {
    let phi = grid.scalar_from_fn(|x| b * (x[0].cos() + x[1].sin() * x[2].cos()));
    FluidState {
        t: 0.0,
        rho_log: grid.scalar_from_fn(|x| a * (x[0] + x[2]).sin()),
        v: grid.gradient(&phi),
        s: ScalarField::constant(grid, s0),
        eos,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::StencilOrder;

    fn poly() -> Arc<EosModel> {
        Arc::new(EosModel::polytropic(1.4, 1.0).unwrap())
    }

    #[test]
    fn constant_state_is_stationary() {
        let g = Grid::new(8, StencilOrder::Fourth).unwrap();
        let st = constant_fixture(g, 0.1, [0.2, -0.1, 0.05], 0.3, poly());
        let rhs = euler_rhs(&st);
        assert_eq!(rhs.d_rho.sup_norm(), 0.0);
        assert_eq!(rhs.d_v.sup_norm(), 0.0);
        assert_eq!(rhs.d_s.sup_norm(), 0.0);
        let next = rk4_step(&st, 0.01).unwrap();
        assert_eq!(next.rho_log, st.rho_log);
        assert_eq!(next.v, st.v);
        assert_eq!(next.s, st.s);
    }

    #[test]
    fn linearized_density_mode() {
        // About ρ = v = s = 0 with ρ = ε cos x¹: ∂_t v¹ = −c₀² ∂₁ρ = ε c₀² sin x¹.
        let g = Grid::new(32, StencilOrder::Fourth).unwrap();
        let eps = 1e-3;
        let eos = poly();
        let c0 = eos.sound_speed(0.0, 0.0);
        let st = FluidState {
            t: 0.0,
            rho_log: g.scalar_from_fn(|x| eps * x[0].cos()),
            v: VectorField::zeros(g),
            s: g.zeros(),
            eos,
        };
        let rhs = euler_rhs(&st);
        let expect = g.scalar_from_fn(|x| eps * c0 * c0 * x[0].sin());
        // nonlinear part is O(ε²); stencil error O(ε h⁴)
        assert!(rhs.d_v.comps[0].sub(&expect).sup_norm() < 2e-6);
        assert_eq!(rhs.d_v.comps[1].sup_norm(), 0.0);
    }

    #[test]
    fn chaplygin_has_no_entropy_force() {
        let g = Grid::new(16, StencilOrder::Fourth).unwrap();
        let eos = Arc::new(EosModel::chaplygin(0.0, 1.0, 1.0).unwrap());
        let st = FluidState {
            t: 0.0,
            rho_log: g.zeros(),
            v: VectorField::constant(g, [0.3, 0.0, 0.0]),
            s: g.scalar_from_fn(|x| x[0].sin()),
            eos,
        };
        let rhs = euler_rhs(&st);
        assert_eq!(rhs.d_v.sup_norm(), 0.0);
        let expect = g.partial(&st.s, 0).scale(-0.3);
        assert!(rhs.d_s.sub(&expect).sup_norm() < 1e-15);
    }

    #[test]
    fn rk4_richardson_ratio() {
        let g = Grid::new(16, StencilOrder::Fourth).unwrap();
        let st = smooth_fixture(g, SmoothAmplitudes { a: 0.2, b: 0.2, d: 0.2 }, poly());
        let t_end = 0.4;
        let run = |dt: f64| evolve_to(&st, t_end, dt, EvolveOptions::default()).unwrap();
        let ref_ = run(0.0125);
        let e1 = run(0.1).rho_log.sub(&ref_.rho_log).sup_norm();
        let e2 = run(0.05).rho_log.sub(&ref_.rho_log).sup_norm();
        let ratio = e1 / e2;
        assert!(ratio > 13.0 && ratio < 19.0, "ratio {ratio}");
    }

    #[test]
    fn slice_stack_bookkeeping() {
        let g = Grid::new(8, StencilOrder::Fourth).unwrap();
        let st = smooth_fixture(g, SmoothAmplitudes::default(), poly());
        let stack = build_slice_stack(&st, 0.1, 1e-3).unwrap();
        assert_eq!(stack.len(), 5);
        assert!((stack.t_center() - 0.1).abs() < 1e-12);
        for (m, s) in stack.slices().iter().enumerate() {
            assert!((s.t - (0.098 + m as f64 * 1e-3)).abs() < 1e-12);
        }
        assert!(build_slice_stack(&st, 1e-3, 1e-3).is_err());
    }

    #[test]
    fn constant_stack_slices_identical() {
        let g = Grid::new(8, StencilOrder::Fourth).unwrap();
        let st = constant_fixture(g, 0.1, [0.2, -0.1, 0.05], 0.3, poly());
        let stack = build_slice_stack(&st, 0.05, 0.01).unwrap();
        for s in stack.slices() {
            assert_eq!(s.rho_log, st.rho_log);
            assert_eq!(s.v, st.v);
        }
    }

    #[test]
    fn stack_rejects_even_or_short() {
        let g = Grid::new(8, StencilOrder::Fourth).unwrap();
        let st = constant_fixture(g, 0.0, [0.0; 3], 0.0, poly());
        let four: Vec<_> = (0..4).map(|m| FluidState { t: m as f64, ..st.clone() }).collect();
        assert!(SliceStack::from_slices(four, 1.0).is_err());
        let bad_t: Vec<_> = (0..5).map(|m| FluidState { t: (m * m) as f64, ..st.clone() }).collect();
        assert!(SliceStack::from_slices(bad_t, 1.0).is_err());
    }

    #[test]
    fn complete_initial_data_matches_direct_formula() {
        let g = Grid::new(16, StencilOrder::Fourth).unwrap();
        let st = smooth_fixture(g, SmoothAmplitudes { a: 0.1, b: 0.2, d: 0.3 }, poly());
        let data = complete_initial_data(&st);
        // ∂_tρ = −v·∇ρ − ∇·v, evaluated independently here
        let mut expect = g.flat_div(&st.v).scale(-1.0);
        for a in 0..3 {
            expect = expect.sub(&g.partial(&st.rho_log, a).zip_map(&st.v.comps[a], |d, v| d * v));
        }
        assert!(data.d_rho.sub(&expect).sup_norm() < 1e-14);
        let s_exact = g.scalar_from_fn(|x| -0.3 * x[0].sin());
        assert!(data.grad_ent.comps[0].sub(&s_exact).sup_norm() < 1e-3);
    }

    #[test]
    fn irrotational_data_has_no_vorticity() {
        let g = Grid::new(16, StencilOrder::Fourth).unwrap();
        let data = complete_initial_data(&irrotational_fixture(g, 0.05, 0.05, 0.2, poly()));
        assert!(data.omega.sup_norm() <= 1e-15);
        assert_eq!(data.grad_ent.sup_norm(), 0.0);
        let constant = complete_initial_data(&constant_fixture(g, 0.1, [0.3, 0.0, 0.1], 0.0, poly()));
        assert_eq!(constant.d_rho.sup_norm(), 0.0);
        assert_eq!(constant.d_v.sup_norm(), 0.0);
    }

    #[test]
    fn entropy_extrema_are_transported() {
        let g = Grid::new(16, StencilOrder::Fourth).unwrap();
        let st = smooth_fixture(g, SmoothAmplitudes::default(), poly());
        let dt = 0.1 * g.h();
        let end = evolve_to(&st, 0.5, dt, EvolveOptions::default()).unwrap();
        // Grid extrema move off nodes, so compare with O(h²) interpolation slack.
        assert!(end.s.max() <= st.s.max() + 1e-4);
        assert!(end.s.min() >= st.s.min() - 1e-4);
    }

    #[test]
    fn time_reversal() {
        let g = Grid::new(16, StencilOrder::Fourth).unwrap();
        let st = smooth_fixture(g, SmoothAmplitudes { a: 0.2, b: 0.2, d: 0.2 }, poly());
        let err = |dt: f64| {
            let back = rk4_step(&rk4_step(&st, dt).unwrap(), -dt).unwrap();
            back.rho_log.sub(&st.rho_log).sup_norm()
        };
        let e1 = err(0.04);
        let e2 = err(0.02);
        // O(dt⁵) per step pair
        assert!(e1 / e2 > 24.0, "{e1} {e2}");
    }

    #[test]
    fn filter_leaves_smooth_data_nearly_unchanged() {
        let g = Grid::new(32, StencilOrder::Fourth).unwrap();
        let st = smooth_fixture(g, SmoothAmplitudes::default(), poly());
        let f = apply_filter(&st, 1.0);
        assert!(f.rho_log.sub(&st.rho_log).sup_norm() < 1e-9);
        let nyq = FluidState {
            rho_log: g.scalar_from_fn(|x| (16.0 * x[0]).cos()),
            ..st.clone()
        };
        assert!(apply_filter(&nyq, 1.0).rho_log.sup_norm() < 1e-10);
    }
}
