//! Acoustical metric, the material vectorfield `B`, and the covariant wave
//! operator `□_g` in Cartesian coordinates.

use nalgebra::{Matrix4, Vector4};
use rayon::prelude::*;
use serde::Serialize;

use crate::eos::EosPoint;
use crate::error::{Error, Result};
use crate::evolve::SliceStack;
use crate::grid::ScalarField;
use crate::state::{material_derivative, second_time_derivative, time_derivative};

/// `g_{αβ}` and `(g⁻¹)^{αβ}` at one point, index 0 being time.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricPoint {
    pub g: Matrix4<f64>,
    pub g_inv: Matrix4<f64>,
    pub c: f64,
    pub v: [f64; 3],
}

impl MetricPoint {
    /// `g = −dt⊗dt + c⁻² Σ (dxᵃ − vᵃdt)⊗(dxᵃ − vᵃdt)`,
    /// `g⁻¹ = −B⊗B + c² Σ ∂_a⊗∂_a`.
    pub fn new(c: f64, v: [f64; 3]) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!("sound speed must be positive, got {c}")));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite velocity".into()));
        }
        let c2 = c * c;
        let ic2 = 1.0 / c2;
        let v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        let mut g = Matrix4::zeros();
        let mut g_inv = Matrix4::zeros();
        g[(0, 0)] = -1.0 + ic2 * v2;
        g_inv[(0, 0)] = -1.0;
        for a in 0..3 {
            g[(0, a + 1)] = -ic2 * v[a];
            g[(a + 1, 0)] = -ic2 * v[a];
            g_inv[(0, a + 1)] = -v[a];
            g_inv[(a + 1, 0)] = -v[a];
            for b in 0..3 {
                let delta = if a == b { 1.0 } else { 0.0 };
                g[(a + 1, b + 1)] = ic2 * delta;
                g_inv[(a + 1, b + 1)] = c2 * delta - v[a] * v[b];
            }
        }
        Ok(Self { g, g_inv, c, v })
    }

    /// `B = ∂_t + vᵃ∂_a` as a 4-vector.
    pub fn transport(&self) -> Vector4<f64> {
        Vector4::new(1.0, self.v[0], self.v[1], self.v[2])
    }

    /// `g(X, Y)`.
    pub fn inner(&self, x: &Vector4<f64>, y: &Vector4<f64>) -> f64 {
        (x.transpose() * self.g * y)[(0, 0)]
    }

    /// `(g⁻¹)(ξ, η)` for covectors.
    pub fn inner_dual(&self, xi: &Vector4<f64>, eta: &Vector4<f64>) -> f64 {
        (xi.transpose() * self.g_inv * eta)[(0, 0)]
    }

    pub fn check(&self) -> MetricChecks {
        let prod = self.g_inv * self.g;
        let inverse_residual = (prod - Matrix4::identity()).abs().max();
        let det = self.g.determinant();
        let det_residual = (det + self.c.powi(-6)).abs();
        let by_elimination = self.g.try_inverse();
        let elimination_residual = match by_elimination {
            Some(inv) => (inv - self.g_inv).abs().max(),
            None => f64::INFINITY,
        };
        MetricChecks {
            inverse_residual,
            det,
            det_residual,
            g_inv_00: self.g_inv[(0, 0)],
            elimination_residual,
        }
    }
}

/// Metric at a cell from its EOS point and velocity.
pub fn metric_at(point: &EosPoint, v: [f64; 3]) -> Result<MetricPoint> {
    MetricPoint::new(point.c, v)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricChecks {
    /// `max |g⁻¹g − I|`.
    pub inverse_residual: f64,
    pub det: f64,
    /// `|det g + c⁻⁶|`.
    pub det_residual: f64,
    pub g_inv_00: f64,
    /// `max |g⁻¹ − inverse(g)|` with the inverse from LU elimination.
    pub elimination_residual: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransportReport {
    /// `g(B,B) + 1`.
    pub norm_defect: f64,
    /// `g(B, ∂_i)`.
    pub spatial_inner: [f64; 3],
    pub future_directed: bool,
}

impl TransportReport {
    pub fn max_defect(&self) -> f64 {
        self.spatial_inner
            .iter()
            .fold(self.norm_defect.abs(), |m, x| m.max(x.abs()))
    }
}

/// `B` is unit timelike, `g`-orthogonal to the constant-time slices, and
/// future-directed.
pub fn check_transport_vector(point: &MetricPoint) -> TransportReport {
    let b = point.transport();
    let norm_defect = point.inner(&b, &b) + 1.0;
    let spatial_inner = std::array::from_fn(|i| {
        let mut e = Vector4::zeros();
        e[i + 1] = 1.0;
        point.inner(&b, &e)
    });
    TransportReport {
        norm_defect,
        spatial_inner,
        future_directed: b[0] > 0.0,
    }
}

fn check_stack_field(stack: &SliceStack, f: &[ScalarField]) -> Result<()> {
    if f.len() != stack.len() {
        return Err(Error::Usage(format!(
            "need one field per slice ({}), got {}",
            stack.len(),
            f.len()
        )));
    }
    if f.iter().any(|x| x.grid().n() != stack.grid().n()) {
        return Err(Error::Usage("field grid does not match the slice stack".into()));
    }
    Ok(())
}

/// `BBφ = ∂_t²φ + (∂_t vᵃ)∂_aφ + 2vᵃ∂_a∂_tφ + vᵇ∂_b(vᵃ∂_aφ)` at the middle slice.
pub fn second_material_derivative(stack: &SliceStack, f: &[ScalarField]) -> Result<ScalarField> {
    check_stack_field(stack, f)?;
    let mid = stack.middle_index();
    let dt = stack.dt();
    let g = *stack.grid();
    let refs: Vec<&ScalarField> = f.iter().collect();
    let dtt = second_time_derivative(&refs, dt, mid)?;
    let dtf = time_derivative(&refs, dt, mid)?;
    let state = stack.middle();
    let dtv: Vec<ScalarField> = (0..3)
        .map(|i| {
            let vi: Vec<&ScalarField> = stack.slices().iter().map(|s| &s.v.comps[i]).collect();
            time_derivative(&vi, dt, mid)
        })
        .collect::<Result<_>>()?;
    let grad_f = g.gradient(&f[mid]);
    let grad_dtf = g.gradient(&dtf);
    let mut adv = g.zeros();
    for a in 0..3 {
        adv.add_assign(&grad_f.comps[a].zip_map(&state.v.comps[a], |d, v| d * v));
    }
    let grad_adv = g.gradient(&adv);
    let vals = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let v = state.v.at(idx);
            let mut acc = dtt.at(idx);
            for a in 0..3 {
                acc += dtv[a].at(idx) * grad_f.comps[a].at(idx);
                acc += 2.0 * v[a] * grad_dtf.comps[a].at(idx);
                acc += v[a] * grad_adv.comps[a].at(idx);
            }
            acc
        })
        .collect();
    ScalarField::from_values(g, vals)
}

/// `□_gφ` at the middle slice from the Cartesian expansion
/// `−BBφ + c²Δφ + 2c⁻¹c_;ρ(Bρ)Bφ − (∂_avᵃ)Bφ − c⁻¹c_;ρ(g⁻¹)^{αβ}∂_αρ∂_βφ
///  − c c_;s Sᵃ∂_aφ + 3c⁻¹c_;s(Bs)Bφ`.
pub fn box_g(stack: &SliceStack, f: &[ScalarField]) -> Result<ScalarField> {
    check_stack_field(stack, f)?;
    let mid = stack.middle_index();
    let g = *stack.grid();
    let state = stack.middle();
    let rho: Vec<ScalarField> = stack.slices().iter().map(|s| s.rho_log.clone()).collect();
    let ent: Vec<ScalarField> = stack.slices().iter().map(|s| s.s.clone()).collect();
    let b_rho = material_derivative(stack, &rho)?;
    let b_s = material_derivative(stack, &ent)?;
    let b_f = material_derivative(stack, f)?;
    let bb_f = second_material_derivative(stack, f)?;
    let lap = g.laplacian(&f[mid]);
    let grad_f = g.gradient(&f[mid]);
    let grad_rho = g.gradient(&state.rho_log);
    let grad_s = g.gradient(&state.s);
    let div_v = g.flat_div(&state.v);
    let pts = state.eos_points();
    let vals = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let p = &pts[idx];
            let c = p.c;
            let bf = b_f.at(idx);
            let br = b_rho.at(idx);
            let gr = grad_rho.at(idx);
            let gf = grad_f.at(idx);
            let gs = grad_s.at(idx);
            let qg = -br * bf + c * c * (gr[0] * gf[0] + gr[1] * gf[1] + gr[2] * gf[2]);
            -bb_f.at(idx) + c * c * lap.at(idx) + 2.0 / c * p.c_rho * br * bf - div_v.at(idx) * bf
                - p.c_rho / c * qg
                - c * p.c_s * (gs[0] * gf[0] + gs[1] * gf[1] + gs[2] * gf[2])
                + 3.0 / c * p.c_s * b_s.at(idx) * bf
        })
        .collect();
    ScalarField::from_values(g, vals)
}

/// `□_gφ = |det g|^{-1/2} ∂_α(|det g|^{1/2} (g⁻¹)^{αβ} ∂_βφ)` discretized directly,
/// with metric components and determinant taken from [`MetricPoint`] matrices.
/// Needs at least nine slices so that the outer time derivative can be
/// differenced from inner ones.
pub fn box_g_divergence_form(stack: &SliceStack, f: &[ScalarField]) -> Result<ScalarField> {
    check_stack_field(stack, f)?;
    if stack.len() < 9 {
        return Err(Error::Usage(format!(
            "divergence form needs at least 9 slices, got {}",
            stack.len()
        )));
    }
    let g = *stack.grid();
    let dt = stack.dt();
    let mid = stack.middle_index();
    let refs: Vec<&ScalarField> = f.iter().collect();

    // Flux W^α = √|g| (g⁻¹)^{αβ} ∂_βφ on slice m.
    let flux = |m: usize| -> Result<([ScalarField; 4], Vec<f64>)> {
        let st = &stack.slices()[m];
        let dtf = time_derivative(&refs, dt, m)?;
        let grad = g.gradient(&f[m]);
        let c = st.sound_speed();
        let rows: Vec<([f64; 4], f64)> = (0..g.len())
            .into_par_iter()
            .map(|idx| {
                let mp = MetricPoint::new(c.at(idx), st.v.at(idx)).expect("positive sound speed");
                let vol = mp.g.determinant().abs().sqrt();
                let d = [dtf.at(idx), grad.comps[0].at(idx), grad.comps[1].at(idx), grad.comps[2].at(idx)];
                let w = std::array::from_fn(|al| {
                    (0..4).map(|be| vol * mp.g_inv[(al, be)] * d[be]).sum::<f64>()
                });
                (w, vol)
            })
            .collect();
        let comps = std::array::from_fn(|al| {
            ScalarField::from_values(g, rows.iter().map(|r| r.0[al]).collect()).expect("grid size")
        });
        Ok((comps, rows.iter().map(|r| r.1).collect()))
    };

    let window: Vec<ScalarField> = (mid - 2..=mid + 2)
        .map(|m| flux(m).map(|(w, _)| w[0].clone()))
        .collect::<Result<_>>()?;
    let wrefs: Vec<&ScalarField> = window.iter().collect();
    let dt_w0 = time_derivative(&wrefs, dt, 2)?;
    let (w_mid, vol_mid) = flux(mid)?;
    let mut div = dt_w0;
    for a in 0..3 {
        div.add_assign(&g.partial(&w_mid[a + 1], a));
    }
    let vals = div.values().iter().zip(&vol_mid).map(|(d, v)| d / v).collect();
    ScalarField::from_values(g, vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::EosModel;
    use crate::evolve::{build_slice_stack_n, constant_fixture, smooth_fixture, EvolveOptions, SmoothAmplitudes};
    use crate::grid::{Grid, StencilOrder};
    use crate::state::FluidState;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    #[test]
    fn minkowski_at_unit_speed_rest() {
        let m = MetricPoint::new(1.0, [0.0; 3]).unwrap();
        assert_eq!(m.g, Matrix4::from_diagonal(&Vector4::new(-1.0, 1.0, 1.0, 1.0)));
        assert_eq!(m.g_inv, m.g);
        assert_eq!(check_transport_vector(&m).norm_defect, 0.0);
    }

    #[test]
    fn determinant_example() {
        let m = MetricPoint::new(2.0, [0.3, 0.0, 0.0]).unwrap();
        assert!((m.g.determinant() + 0.015625).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_positive_speed() {
        assert!(MetricPoint::new(0.0, [0.0; 3]).is_err());
        assert!(MetricPoint::new(-1.0, [0.0; 3]).is_err());
        assert!(MetricPoint::new(f64::NAN, [0.0; 3]).is_err());
    }

    #[test]
    fn random_points_satisfy_metric_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let c = rng.gen_range(0.5..3.0);
            let v = random_velocity(&mut rng, 2.0);
            let m = MetricPoint::new(c, v).unwrap();
            let chk = m.check();
            assert!(chk.inverse_residual <= 1e-12);
            assert!(chk.det_residual <= 1e-12);
            assert!(chk.elimination_residual <= 1e-12, "{}", chk.elimination_residual);
            assert_eq!(chk.g_inv_00, -1.0);
            let t = check_transport_vector(&m);
            assert!(t.max_defect() <= 1e-12);
            assert!(t.future_directed);
        }
    }

    fn random_velocity(rng: &mut ChaCha8Rng, max: f64) -> [f64; 3] {
        loop {
            let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-max..max));
            if (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() <= max {
                return v;
            }
        }
    }

    fn poly() -> Arc<EosModel> {
        Arc::new(EosModel::polytropic(1.4, 1.0).unwrap())
    }

    /// Stack of identical constant slices.
    fn constant_stack(g: Grid, v: [f64; 3], dt: f64, count: usize) -> SliceStack {
        let st = constant_fixture(g, 0.0, v, 0.0, poly());
        let slices = (0..count).map(|m| FluidState { t: m as f64 * dt, ..st.clone() }).collect();
        SliceStack::from_slices(slices, dt).unwrap()
    }

    #[test]
    fn constant_field_on_constant_state_is_zero() {
        let g = Grid::new(8, StencilOrder::Fourth).unwrap();
        let stack = constant_stack(g, [0.2, 0.1, -0.3], 0.01, 5);
        let f = vec![ScalarField::constant(g, 1.7); 5];
        assert_eq!(box_g(&stack, &f).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn plane_wave_is_annihilated() {
        let c0 = poly().sound_speed(0.0, 0.0);
        let err = |n: usize| {
            let g = Grid::new(n, StencilOrder::Fourth).unwrap();
            let dt = 0.1 * g.h();
            let stack = constant_stack(g, [0.0; 3], dt, 5);
            let f: Vec<ScalarField> = (0..5)
                .map(|m| {
                    let t = m as f64 * dt;
                    g.scalar_from_fn(|x| (x[0] - c0 * t).sin())
                })
                .collect();
            box_g(&stack, &f).unwrap().sup_norm()
        };
        let (e16, e32) = (err(16), err(32));
        assert!(e32 < 1e-3);
        assert!((e16 / e32).log2() > 3.5, "{e16} {e32}");
    }

    #[test]
    fn moving_plane_wave_is_annihilated() {
        // v = (u,0,0) constant: sin(x¹ − (u + c)t) is a solution.
        let c0 = poly().sound_speed(0.0, 0.0);
        let u = 0.4;
        let g = Grid::new(32, StencilOrder::Fourth).unwrap();
        let dt = 0.1 * g.h();
        let stack = constant_stack(g, [u, 0.0, 0.0], dt, 5);
        let f: Vec<ScalarField> = (0..5)
            .map(|m| {
                let t = m as f64 * dt;
                g.scalar_from_fn(|x| (x[0] - (u + c0) * t).sin())
            })
            .collect();
        assert!(box_g(&stack, &f).unwrap().sup_norm() < 1e-3);
    }

    #[test]
    fn expanded_form_agrees_with_divergence_form() {
        let diff = |n: usize| {
            let g = Grid::new(n, StencilOrder::Fourth).unwrap();
            let st = smooth_fixture(g, SmoothAmplitudes { a: 0.2, b: 0.2, d: 0.2 }, poly());
            let dt = 0.1 * g.h();
            let stack = build_slice_stack_n(&st, 0.5, dt, 9, EvolveOptions::default()).unwrap();
            let f: Vec<ScalarField> = stack
                .slices()
                .iter()
                .map(|s| s.rho_log.zip_map(&s.v.comps[1], |r, v| (r + 2.0 * v).sin()))
                .collect();
            let inner: Vec<ScalarField> = f[2..7].to_vec();
            let a = box_g(&stack.inner5(), &inner).unwrap();
            let b = box_g_divergence_form(&stack, &f).unwrap();
            (a.sub(&b).sup_norm(), a.sup_norm())
        };
        let (d16, scale) = diff(16);
        let (d32, _) = diff(32);
        assert!(d32 < 1e-3 * scale.max(1.0), "{d32}");
        assert!((d16 / d32).log2() > 3.0, "{d16} {d32}");
    }

    #[test]
    fn stack_field_mismatch_is_usage_error() {
        let g = Grid::new(8, StencilOrder::Fourth).unwrap();
        let stack = constant_stack(g, [0.0; 3], 0.1, 5);
        let f = vec![g.zeros(); 4];
        assert!(matches!(box_g(&stack, &f), Err(Error::Usage(_))));
        let f5 = vec![g.zeros(); 5];
        assert!(matches!(box_g_divergence_form(&stack, &f5), Err(Error::Usage(_))));
    }
}
