use std::sync::Arc;

use euler_geom::evolve::{SmoothAmplitudes, build_slice_stack, constant_fixture, irrotational_fixture, smooth_fixture};
use euler_geom::geometry::metric_at;
use euler_geom::null_frame::{build_null_frame, lattice_directions, null_form_qg, qg_frame_expansion};
use euler_geom::reform::terms::{self, CellData};
use euler_geom::reform::{
    CellView, Equation, ProbeVariable, ReportPolicy, ResidualContext, StackSettings, TermClass, convergence_study,
    frequency_scaling_probe, residual_norms, source_terms, term_catalog,
};
use euler_geom::{EosModel, Error, FluidState, Grid, StencilOrder, compute_derived};
use proptest::prelude::*;

fn poly() -> Arc<EosModel> {
    Arc::new(EosModel::polytropic(1.4, 1.0).unwrap())
}

/// `p = exp(1.4ρ + s + ρs)/1.4`: entropy and density do not separate, so
/// `2c⁻¹c_;s p_;s ≠ p_;s;s`.
fn nonseparable() -> Arc<EosModel> {
    Arc::new(EosModel::custom("nonseparable", 1.0, |r, s| (1.4 * r + s + r * s).exp() / 1.4).unwrap())
}

fn chaplygin() -> Arc<EosModel> {
    Arc::new(EosModel::chaplygin(2.0, 1.0, 1.0).unwrap())
}

fn smooth(n: usize, eos: Arc<EosModel>) -> FluidState {
    smooth_fixture(Grid::new(n, StencilOrder::Fourth).unwrap(), SmoothAmplitudes::default(), eos)
}

fn sup(eq: Equation, st: &FluidState) -> f64 {
    let g = st.grid();
    let stack = build_slice_stack(st, 0.2, 0.1 * g.h()).unwrap();
    residual_norms(&stack).unwrap().into_iter().find(|r| r.equation == eq).unwrap().sup_norm
}

#[test]
fn constant_state_residuals_and_sources_vanish() {
    let g = Grid::new(12, StencilOrder::Fourth).unwrap();
    let st = constant_fixture(g, 0.1, [0.2, -0.1, 0.3], 0.4, poly());
    let stack = build_slice_stack(&st, 0.2, 0.1 * g.h()).unwrap();
    for r in residual_norms(&stack).unwrap() {
        assert!(r.sup_norm <= 1e-12, "{:?} {}", r.equation, r.sup_norm);
    }
    let mid = stack.middle();
    let src = source_terms(mid, &compute_derived(mid), &stack).unwrap();
    assert_eq!(src.max_abs(), 0.0);
}

#[test]
fn source_terms_rejects_foreign_state() {
    let g = Grid::new(12, StencilOrder::Fourth).unwrap();
    let st = smooth_fixture(g, SmoothAmplitudes::default(), poly());
    let stack = build_slice_stack(&st, 0.2, 0.1 * g.h()).unwrap();
    let err = source_terms(&st, &compute_derived(&st), &stack).unwrap_err();
    assert!(matches!(err, Error::Usage(_)));
}

#[test]
fn fourth_order_convergence_on_smooth_data() {
    let rep = convergence_study(
        |g| Ok(smooth_fixture(g, SmoothAmplitudes::default(), poly())),
        &[16, 24, 32],
        StencilOrder::Fourth,
        &StackSettings::default(),
        &ReportPolicy::default(),
    )
    .unwrap();
    for v in &rep.verdicts {
        assert!(v.pass, "{v:?}");
    }
}

#[test]
fn second_order_convergence_on_smooth_data() {
    let rep = convergence_study(
        |g| Ok(smooth_fixture(g, SmoothAmplitudes::default(), poly())),
        &[16, 32, 48],
        StencilOrder::Second,
        &StackSettings::default(),
        &ReportPolicy::default(),
    )
    .unwrap();
    for v in &rep.verdicts {
        assert!(v.pass, "{v:?}");
    }
}

#[test]
fn nonseparable_law_converges_in_every_entropy_coupling() {
    // Ratio 2^3.5 ≈ 11.3 between n=16 and n=32.
    for eq in [Equation::VelocityWave, Equation::DensityWave, Equation::CurlModTransport, Equation::DivModTransport] {
        let coarse = sup(eq, &smooth(16, nonseparable()));
        let fine = sup(eq, &smooth(32, nonseparable()));
        assert!(coarse / fine > 11.0, "{eq:?}: {coarse:e} -> {fine:e}");
    }
}

/// Residual with one extra source product folded in, at n and 2n.
fn stalled_ratio(n: usize, eos: Arc<EosModel>, eq: Equation, extra: fn(&CellData) -> [f64; 3]) -> f64 {
    let go = |n: usize| {
        let st = smooth(n, eos.clone());
        let stack = build_slice_stack(&st, 0.2, 0.1 * st.grid().h()).unwrap();
        let ctx = ResidualContext::new(&stack).unwrap();
        let res = ctx.all().unwrap().into_iter().find(|r| r.equation == eq).unwrap();
        let add = ctx.view().map_vec(extra);
        match res.field {
            euler_geom::reform::ResidualField::Vector(f) => f.add(&add).sup_norm(),
            euler_geom::reform::ResidualField::Scalar(f) => f.add(&add.comps[0]).sup_norm(),
        }
    };
    go(n) / go(2 * n)
}

#[test]
fn alternative_coefficients_do_not_converge() {
    // The extra `−exp(−ρ)(p_;s/ϱ̄)Sᵃ∂_avⁱ` in the velocity equation.
    let r = stalled_ratio(16, poly(), Equation::VelocityWave, |d| {
        let f = d.exp(-1.0) * d.ps();
        std::array::from_fn(|i| f * d.s_grad_v(i))
    });
    assert!(r < 2.0, "{r}");
    // Coefficient −2 instead of −5/2 on `exp(−ρ)(p_;s;ρ/ϱ̄)Sᵃ∂_aρ`.
    let r = stalled_ratio(16, poly(), Equation::DensityWave, |d| {
        [-0.5 * d.exp(-1.0) * d.ps_rho() * d.s_grad_rho(), 0.0, 0.0]
    });
    assert!(r < 2.0, "{r}");
    // Opposite sign on the `p_;s;s` line of 𝔏_(C).
    let r = stalled_ratio(16, nonseparable(), Equation::CurlModTransport, |d| {
        let l = terms::l_c_line2(d);
        std::array::from_fn(|i| 2.0 * l[i])
    });
    assert!(r < 2.0, "{r}");
}

#[test]
fn chaplygin_zeroes_every_entropy_coupling_bitwise() {
    let st = smooth(12, chaplygin());
    let view = CellView::substituted(&st, compute_derived(&st));
    let catalog = term_catalog();
    for t in catalog.iter().filter(|t| t.entropy_coupled) {
        for idx in 0..st.grid().len() {
            assert_eq!((t.eval)(&view.cell(idx)), [0.0; 3], "{}", t.id);
        }
    }
    // Residual rows that carry p_;s still converge (barotropic forms).
    let coarse = sup(Equation::CurlModTransport, &smooth(16, chaplygin()));
    let fine = sup(Equation::CurlModTransport, &smooth(32, chaplygin()));
    assert!(coarse / fine > 11.0);
}

#[test]
fn isentropic_irrotational_data_kill_class_i_terms() {
    let g = Grid::new(16, StencilOrder::Fourth).unwrap();
    let st = irrotational_fixture(g, 0.05, 0.05, 0.3, poly());
    let d = compute_derived(&st);
    assert!(d.omega.sup_norm() <= 1e-12);
    assert!(d.grad_ent.sup_norm() <= 1e-12);
    assert!(d.curl_mod.sup_norm() <= 1e-12);
    assert!(d.div_mod.sup_norm() <= 1e-12);
    let view = CellView::substituted(&st, d);
    for t in term_catalog().iter().filter(|t| t.class == TermClass::I) {
        for idx in 0..g.len() {
            let x = (t.eval)(&view.cell(idx));
            assert!(x.iter().all(|c| c.abs() <= 1e-12), "{}", t.id);
        }
    }
}

#[test]
fn probe_exponents() {
    let st = smooth(64, poly());
    let probe = |eq, var, ctl| frequency_scaling_probe(eq, &st, var, 4, 1e-6, ctl).unwrap().exponent;
    for (eq, var) in [
        (Equation::CurlModTransport, ProbeVariable::Velocity),
        (Equation::CurlModTransport, ProbeVariable::Density),
        (Equation::VorticityDivergence, ProbeVariable::Density),
    ] {
        let e = probe(eq, var, false).unwrap();
        assert!((0.8..=1.2).contains(&e), "{eq:?} {var:?} {e}");
        let c = probe(eq, var, true).unwrap();
        assert!((1.8..=2.2).contains(&c), "control {eq:?} {var:?} {c}");
    }
    // ∇·Ω = −Ωᵃ∂_aρ with Ω held fixed does not see v at all.
    assert_eq!(probe(Equation::VorticityDivergence, ProbeVariable::Velocity, false), None);
}

#[test]
fn probe_rejects_unresolved_wavenumber() {
    let st = smooth(16, poly());
    for k in [0, 3] {
        let e = frequency_scaling_probe(Equation::CurlModTransport, &st, ProbeVariable::Velocity, k, 1e-6, false);
        assert!(matches!(e, Err(Error::Usage(_))), "k={k}");
    }
}

fn arb_cell() -> impl Strategy<Value = (CellData, [f64; 3])> {
    let v3 = || prop::array::uniform3(-1.0f64..1.0);
    let m3 = || prop::array::uniform3(prop::array::uniform3(-1.0f64..1.0));
    (
        (-0.5f64..0.5, -0.5f64..0.5, v3(), v3(), m3(), v3(), v3()),
        (m3(), m3(), v3(), v3(), -1.0f64..1.0, v3(), v3()),
    )
        .prop_map(|((rho, s, v, grad_rho, dv, omega, ent_grad), (d_omega, d_ent_grad, curl_omega, curl_mod, div_mod, b_v, b_ent_grad))| {
            let eos = EosModel::polytropic(1.4, 1.0).unwrap();
            let d = CellData {
                rho,
                v,
                eos: eos.evaluate(rho, s).unwrap(),
                background_density: 1.0,
                grad_rho,
                dv,
                omega,
                ent_grad,
                d_omega,
                d_ent_grad,
                curl_omega,
                curl_mod,
                div_mod,
                b_rho: -(dv[0][0] + dv[1][1] + dv[2][2]),
                b_v,
                b_ent_grad,
            };
            (d, grad_rho)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn class_i_terms_vanish_without_vorticity_and_entropy_gradient((mut d, _) in arb_cell()) {
        d.omega = [0.0; 3];
        d.ent_grad = [0.0; 3];
        for t in term_catalog().iter().filter(|t| t.class == TermClass::I) {
            prop_assert_eq!((t.eval)(&d), [0.0; 3]);
        }
        for f in [terms::l_omega, terms::l_ent_grad, terms::l_div_omega, terms::l_c, terms::q_c, terms::q_d] {
            prop_assert_eq!(f(&d), [0.0; 3]);
        }
    }

    #[test]
    fn velocity_null_form_matches_metric_and_frame_evaluation((d, _) in arb_cell(), dir in 0usize..26) {
        let metric = metric_at(&d.eos, d.v).unwrap();
        let frame = build_null_frame(&metric, lattice_directions()[dir]).unwrap();
        // ∂_t f = Bf − vᵃ∂_af
        let dt = |b: f64, grad: &[f64; 3]| b - (0..3).map(|a| d.v[a] * grad[a]).sum::<f64>();
        let drho = [dt(d.b_rho, &d.grad_rho), d.grad_rho[0], d.grad_rho[1], d.grad_rho[2]];
        let q = terms::q_v(&d);
        let f = -(1.0 + d.eos.c_rho / d.c());
        for i in 0..3 {
            let dvi = [dt(d.b_v[i], &d.dv[i]), d.dv[i][0], d.dv[i][1], d.dv[i][2]];
            let m = f * null_form_qg(&metric, &drho, &dvi);
            let e = f * qg_frame_expansion(&frame, &drho, &dvi);
            prop_assert!((q[i] - m).abs() <= 1e-10 * (1.0 + m.abs()));
            prop_assert!((q[i] - e).abs() <= 1e-10 * (1.0 + e.abs()));
        }
    }
}
