//! `g`-null frames `{e₁, e₂, uL, L}`, frame coefficients `M_α^A`, standard
//! null forms and the strong null condition for derivative-quadratic terms.

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::MetricPoint;
use crate::tensor::{cross3, dot3, norm3};

/// Number of entries in the unknown array `V = (ρ, v¹, v², v³, s, Ω¹, Ω², Ω³, S¹, S², S³)`.
pub const STATE_DIM: usize = 11;

/// Frame slot of `uL` in `M_α^A` (zero-based `e₃`).
pub const UL_SLOT: usize = 2;
/// Frame slot of `L` in `M_α^A` (zero-based `e₄`).
pub const L_SLOT: usize = 3;

/// Cartesian components of a null frame at one point.
#[derive(Debug, Clone)]
pub struct NullFrame {
    pub l: Vector4<f64>,
    pub ul: Vector4<f64>,
    pub e1: Vector4<f64>,
    pub e2: Vector4<f64>,
    pub n_hat: [f64; 3],
    pub metric: MetricPoint,
}

impl NullFrame {
    /// Frame vectors in the order `e₁, e₂, e₃ = uL, e₄ = L`.
    pub fn vectors(&self) -> [Vector4<f64>; 4] {
        [self.e1, self.e2, self.ul, self.l]
    }

    /// Largest defect among the defining inner products.
    pub fn relation_residual(&self) -> f64 {
        let m = &self.metric;
        let mut worst = 0.0f64;
        let mut push = |x: f64| worst = worst.max(x.abs());
        push(m.inner(&self.l, &self.l));
        push(m.inner(&self.ul, &self.ul));
        push(m.inner(&self.l, &self.ul) + 2.0);
        let es = [self.e1, self.e2];
        for (a, ea) in es.iter().enumerate() {
            push(m.inner(&self.l, ea));
            push(m.inner(&self.ul, ea));
            for (b, eb) in es.iter().enumerate() {
                let delta = if a == b { 1.0 } else { 0.0 };
                push(m.inner(ea, eb) - delta);
            }
        }
        worst
    }
}

/// Euclidean orthonormal pair completing `n̂`.
fn completion(n_hat: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    // Seed with the axis least aligned with n̂.
    let mut axis = 0;
    for i in 1..3 {
        if n_hat[i].abs() < n_hat[axis].abs() {
            axis = i;
        }
    }
    let mut seed = [0.0; 3];
    seed[axis] = 1.0;
    let proj = dot3(&seed, n_hat);
    let raw = [seed[0] - proj * n_hat[0], seed[1] - proj * n_hat[1], seed[2] - proj * n_hat[2]];
    let len = norm3(&raw);
    let m1 = [raw[0] / len, raw[1] / len, raw[2] / len];
    let m2 = cross3(n_hat, &m1);
    (m1, m2)
}

/// `N = c n̂ᵃ∂_a`, `L = B + N`, `uL = B − N`, `e_A = c m_Aᵃ∂_a`.
pub fn build_null_frame(point: &MetricPoint, n_hat: [f64; 3]) -> Result<NullFrame> {
    let len = norm3(&n_hat);
    if !len.is_finite() || (len - 1.0).abs() > 1e-10 {
        return Err(Error::Usage(format!("direction must be a unit vector, |n| = {len}")));
    }
    let c = point.c;
    let b = point.transport();
    let spatial = |w: [f64; 3]| Vector4::new(0.0, c * w[0], c * w[1], c * w[2]);
    let n = spatial(n_hat);
    let (m1, m2) = completion(&n_hat);
    Ok(NullFrame {
        l: b + n,
        ul: b - n,
        e1: spatial(m1),
        e2: spatial(m2),
        n_hat,
        metric: point.clone(),
    })
}

/// `M_α^A` with `∂_α = Σ_A M_α^A e_A`; row `α`, column `A`.
#[derive(Debug, Clone)]
pub struct FrameCoefficients {
    pub m: Matrix4<f64>,
    /// `max |Σ_A M_α^A e_A^β − δ_α^β|`.
    pub reconstruction_residual: f64,
}

/// Above this the frame matrix is treated as singular.
const MAX_CONDITION: f64 = 1e12;

pub fn frame_coefficients(frame: &NullFrame) -> Result<FrameCoefficients> {
    // E has row A equal to e_A, so M E = I.
    let vecs = frame.vectors();
    let e = Matrix4::from_fn(|a, beta| vecs[a][beta]);
    let sv = e.singular_values();
    let cond = sv.max() / sv.min();
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(Error::Numeric(format!("degenerate null frame, condition number {cond:e}")));
    }
    let m = e
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Numeric(format!("singular null frame, condition number {cond:e}")))?;
    let reconstruction_residual = (m * e - Matrix4::identity()).abs().max();
    Ok(FrameCoefficients {
        m,
        reconstruction_residual,
    })
}

/// `−½ L⊗uL − ½ uL⊗L + Σ_A e_A⊗e_A`.
pub fn decompose_inverse_metric(frame: &NullFrame) -> Matrix4<f64> {
    -0.5 * (frame.l * frame.ul.transpose() + frame.ul * frame.l.transpose())
        + frame.e1 * frame.e1.transpose()
        + frame.e2 * frame.e2.transpose()
}

/// `Q^g(∂φ, ∂ψ) = (g⁻¹)^{αβ}∂_αφ∂_βψ`.
pub fn null_form_qg(point: &MetricPoint, dphi: &[f64; 4], dpsi: &[f64; 4]) -> f64 {
    point.inner_dual(&Vector4::from(*dphi), &Vector4::from(*dpsi))
}

/// `Q_{(αβ)}(∂φ, ∂ψ) = ∂_αφ∂_βψ − ∂_αψ∂_βφ`.
pub fn null_form_qab(alpha: usize, beta: usize, dphi: &[f64; 4], dpsi: &[f64; 4]) -> f64 {
    dphi[alpha] * dpsi[beta] - dpsi[alpha] * dphi[beta]
}

/// `−½(Lφ)(uLψ) − ½(uLφ)(Lψ) + Σ_A (e_Aφ)(e_Aψ)`.
pub fn qg_frame_expansion(frame: &NullFrame, dphi: &[f64; 4], dpsi: &[f64; 4]) -> f64 {
    let p = Vector4::from(*dphi);
    let q = Vector4::from(*dpsi);
    let d = |x: &Vector4<f64>, w: &Vector4<f64>| x.dot(w);
    -0.5 * d(&frame.l, &p) * d(&frame.ul, &q) - 0.5 * d(&frame.ul, &p) * d(&frame.l, &q)
        + d(&frame.e1, &p) * d(&frame.e1, &q)
        + d(&frame.e2, &p) * d(&frame.e2, &q)
}

/// `f^{αβ}_{ΘΓ}` stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefTensor {
    data: Vec<f64>,
}

impl CoefTensor {
    pub fn zeros() -> Self {
        Self {
            data: vec![0.0; 16 * STATE_DIM * STATE_DIM],
        }
    }

    #[inline]
    fn offset(al: usize, be: usize, th: usize, ga: usize) -> usize {
        ((al * 4 + be) * STATE_DIM + th) * STATE_DIM + ga
    }

    pub fn get(&self, al: usize, be: usize, th: usize, ga: usize) -> f64 {
        self.data[Self::offset(al, be, th, ga)]
    }

    pub fn add(&mut self, al: usize, be: usize, th: usize, ga: usize, x: f64) {
        self.data[Self::offset(al, be, th, ga)] += x;
    }

    /// `max |f^{αβ}_{ΘΓ} − f^{βα}_{ΓΘ}|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for al in 0..4 {
            for be in 0..4 {
                for th in 0..STATE_DIM {
                    for ga in 0..STATE_DIM {
                        worst = worst.max((self.get(al, be, th, ga) - self.get(be, al, ga, th)).abs());
                    }
                }
            }
        }
        worst
    }

    /// `Σ f^{αβ}_{ΘΓ} ∂_αV^Θ ∂_βV^Γ` with `dv[α][Θ] = ∂_αV^Θ`.
    pub fn evaluate(&self, dv: &[[f64; STATE_DIM]; 4]) -> f64 {
        let mut acc = 0.0;
        for al in 0..4 {
            for be in 0..4 {
                for th in 0..STATE_DIM {
                    let x = dv[al][th];
                    if x == 0.0 {
                        continue;
                    }
                    for ga in 0..STATE_DIM {
                        acc += self.get(al, be, th, ga) * x * dv[be][ga];
                    }
                }
            }
        }
        acc
    }

    /// `max_{Θ,Γ} |f^{αβ}_{ΘΓ} M_α^A M_β^A|` for one frame slot `A`.
    pub fn frame_diagonal(&self, m: &Matrix4<f64>, slot: usize) -> f64 {
        let mut worst = 0.0f64;
        for th in 0..STATE_DIM {
            for ga in 0..STATE_DIM {
                let mut s = 0.0;
                for al in 0..4 {
                    for be in 0..4 {
                        s += self.get(al, be, th, ga) * m[(al, slot)] * m[(be, slot)];
                    }
                }
                worst = worst.max(s.abs());
            }
        }
        worst
    }

    /// `Σ f^{αβ}_{ΘΓ} M_α^A M_β^B (e_AV^Θ)(e_BV^Γ)`.
    pub fn evaluate_in_frame(&self, frame: &NullFrame, m: &Matrix4<f64>, dv: &[[f64; STATE_DIM]; 4]) -> f64 {
        let vecs = frame.vectors();
        // e_A V^Θ = e_A^β ∂_βV^Θ
        let ev: [[f64; STATE_DIM]; 4] =
            std::array::from_fn(|a| std::array::from_fn(|th| (0..4).map(|b| vecs[a][b] * dv[b][th]).sum()));
        let mut acc = 0.0;
        for al in 0..4 {
            for be in 0..4 {
                for th in 0..STATE_DIM {
                    for ga in 0..STATE_DIM {
                        let f = self.get(al, be, th, ga);
                        if f == 0.0 {
                            continue;
                        }
                        for a in 0..4 {
                            for b in 0..4 {
                                acc += f * m[(al, a)] * m[(be, b)] * ev[a][th] * ev[b][ga];
                            }
                        }
                    }
                }
            }
        }
        acc
    }
}

/// A derivative-quadratic term `f(V)^{αβ}_{ΘΓ} ∂_αV^Θ ∂_βV^Γ`.
pub trait QuadraticTerm: Sync {
    fn name(&self) -> String;
    /// Coefficients at state `v`; `metric` is `g` evaluated at the same state.
    fn coeff(&self, v: &[f64; STATE_DIM], metric: &MetricPoint) -> CoefTensor;
}

/// `Q^g(∂V^θ, ∂V^γ)`.
#[derive(Debug, Clone, Copy)]
pub struct QgTerm {
    pub theta: usize,
    pub gamma: usize,
}

impl QuadraticTerm for QgTerm {
    fn name(&self) -> String {
        format!("Qg[{},{}]", self.theta, self.gamma)
    }
    fn coeff(&self, _v: &[f64; STATE_DIM], metric: &MetricPoint) -> CoefTensor {
        let mut t = CoefTensor::zeros();
        for al in 0..4 {
            for be in 0..4 {
                let h = 0.5 * metric.g_inv[(al, be)];
                t.add(al, be, self.theta, self.gamma, h);
                t.add(al, be, self.gamma, self.theta, h);
            }
        }
        t
    }
}

/// `Q_{(αβ)}(∂V^θ, ∂V^γ)`.
#[derive(Debug, Clone, Copy)]
pub struct QabTerm {
    pub alpha: usize,
    pub beta: usize,
    pub theta: usize,
    pub gamma: usize,
}

impl QuadraticTerm for QabTerm {
    fn name(&self) -> String {
        format!("Q({}{})[{},{}]", self.alpha, self.beta, self.theta, self.gamma)
    }
    fn coeff(&self, _v: &[f64; STATE_DIM], _metric: &MetricPoint) -> CoefTensor {
        let mut t = CoefTensor::zeros();
        let (a, b) = (self.alpha, self.beta);
        t.add(a, b, self.theta, self.gamma, 0.5);
        t.add(b, a, self.theta, self.gamma, -0.5);
        t.add(b, a, self.gamma, self.theta, 0.5);
        t.add(a, b, self.gamma, self.theta, -0.5);
        t
    }
}

/// `(∂_tV^θ)²`, which is not a null form.
#[derive(Debug, Clone, Copy)]
pub struct TimeSquaredTerm {
    pub theta: usize,
}

impl QuadraticTerm for TimeSquaredTerm {
    fn name(&self) -> String {
        format!("(dt V{})^2", self.theta)
    }
    fn coeff(&self, _v: &[f64; STATE_DIM], _metric: &MetricPoint) -> CoefTensor {
        let mut t = CoefTensor::zeros();
        t.add(0, 0, self.theta, self.theta, 1.0);
        t
    }
}

/// The six `(α, β)` pairs with `α < β`.
pub const QAB_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub const NULL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct StrongNullReport {
    pub term: String,
    /// `max |f^{αβ}_{ΘΓ} M_α³ M_β³|`.
    pub diag_ul_ul: f64,
    /// `max |f^{αβ}_{ΘΓ} M_α⁴ M_β⁴|`.
    pub diag_ll: f64,
    /// `|frame expansion − Cartesian value|`.
    pub expansion_residual: f64,
    pub pass: bool,
}

/// Direct coefficient criterion for the strong null condition, plus the frame
/// expansion consistency check on the derivative sample `dv`.
pub fn strong_null_check(
    term: &dyn QuadraticTerm,
    frame: &NullFrame,
    v: &[f64; STATE_DIM],
    dv: &[[f64; STATE_DIM]; 4],
) -> Result<StrongNullReport> {
    let coeffs = frame_coefficients(frame)?;
    let f = term.coeff(v, &frame.metric);
    let diag_ul_ul = f.frame_diagonal(&coeffs.m, UL_SLOT);
    let diag_ll = f.frame_diagonal(&coeffs.m, L_SLOT);
    let cart = f.evaluate(dv);
    let framed = f.evaluate_in_frame(frame, &coeffs.m, dv);
    let expansion_residual = (cart - framed).abs();
    Ok(StrongNullReport {
        term: term.name(),
        diag_ul_ul,
        diag_ll,
        expansion_residual,
        pass: diag_ul_ul <= NULL_TOLERANCE && diag_ll <= NULL_TOLERANCE,
    })
}

/// The 26 normalized nonzero vectors of `{−1, 0, 1}³`.
pub fn lattice_directions() -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(26);
    for i in -1i32..=1 {
        for j in -1i32..=1 {
            for k in -1i32..=1 {
                if i == 0 && j == 0 && k == 0 {
                    continue;
                }
                let w = [i as f64, j as f64, k as f64];
                let len = norm3(&w);
                out.push([w[0] / len, w[1] / len, w[2] / len]);
            }
        }
    }
    out
}

/// Random `(c, v)` with `c ∈ [c_min, c_max]` and `|v| ≤ v_max` (rejection sampled).
pub fn random_metric_point(rng: &mut ChaCha8Rng, c_range: (f64, f64), v_max: f64) -> MetricPoint {
    let c = rng.gen_range(c_range.0..=c_range.1);
    let v = loop {
        let w: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-v_max..=v_max));
        if norm3(&w) <= v_max {
            break w;
        }
    };
    MetricPoint::new(c, v).expect("positive sound speed")
}

/// Per-trial summary over all sampled directions at one random state.
#[derive(Debug, Clone, Serialize)]
pub struct FrameTrial {
    pub trial: usize,
    pub c: f64,
    pub v: [f64; 3],
    /// Worst of frame relations, `g⁻¹` decomposition and reconstruction.
    pub max_frame_residual: f64,
    pub qg_diag_ul_ul: f64,
    pub qg_diag_ll: f64,
    pub qab_max_diag: f64,
    /// Smallest of `max(diag_uLuL, diag_LL)` for the `(∂_tφ)²` control.
    pub control_min_diag: f64,
    pub max_expansion_residual: f64,
    pub qg_expansion_residual: f64,
    pub pass: bool,
}

/// Settings for [`run_frame_trials`].
#[derive(Debug, Clone, Copy)]
pub struct FrameTrialConfig {
    pub trials: usize,
    pub c_range: (f64, f64),
    pub v_max: f64,
    /// Evaluate the quadratic-term checks (frame algebra is always checked).
    pub with_terms: bool,
}

impl Default for FrameTrialConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            c_range: (0.5, 3.0),
            v_max: 2.0,
            with_terms: true,
        }
    }
}

/// Random states × the 26 lattice directions. The random draws happen
/// sequentially so results do not depend on the thread count.
pub fn run_frame_trials(seed: u64, cfg: FrameTrialConfig) -> Result<Vec<FrameTrial>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs = lattice_directions();
    let inputs: Vec<(MetricPoint, [f64; STATE_DIM], [[f64; STATE_DIM]; 4])> = (0..cfg.trials)
        .map(|_| {
            let mp = random_metric_point(&mut rng, cfg.c_range, cfg.v_max);
            let v: [f64; STATE_DIM] = std::array::from_fn(|_| rng.gen_range(-1.0..=1.0));
            let dv: [[f64; STATE_DIM]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..=1.0)));
            (mp, v, dv)
        })
        .collect();

    inputs
        .into_par_iter()
        .enumerate()
        .map(|(trial, (mp, v, dv))| {
            let mut frame_res = 0.0f64;
            let mut qg_ulul = 0.0f64;
            let mut qg_ll = 0.0f64;
            let mut qab_max = 0.0f64;
            let mut control_min = f64::INFINITY;
            let mut exp_res = 0.0f64;
            let mut qg_exp = 0.0f64;
            let mut terms_ok = true;
            for n in &dirs {
                let frame = build_null_frame(&mp, *n)?;
                let coeffs = frame_coefficients(&frame)?;
                let decomp = (decompose_inverse_metric(&frame) - mp.g_inv).abs().max();
                frame_res = frame_res
                    .max(frame.relation_residual())
                    .max(decomp)
                    .max(coeffs.reconstruction_residual);
                let dphi = [dv[0][0], dv[1][0], dv[2][0], dv[3][0]];
                let dpsi = [dv[0][1], dv[1][1], dv[2][1], dv[3][1]];
                qg_exp = qg_exp.max((null_form_qg(&mp, &dphi, &dpsi) - qg_frame_expansion(&frame, &dphi, &dpsi)).abs());
                if !cfg.with_terms {
                    continue;
                }
                let qg = strong_null_check(&QgTerm { theta: 0, gamma: 1 }, &frame, &v, &dv)?;
                qg_ulul = qg_ulul.max(qg.diag_ul_ul);
                qg_ll = qg_ll.max(qg.diag_ll);
                exp_res = exp_res.max(qg.expansion_residual);
                terms_ok &= qg.pass;
                for (a, b) in QAB_PAIRS {
                    let r = strong_null_check(&QabTerm { alpha: a, beta: b, theta: 0, gamma: 1 }, &frame, &v, &dv)?;
                    qab_max = qab_max.max(r.diag_ul_ul).max(r.diag_ll);
                    exp_res = exp_res.max(r.expansion_residual);
                    terms_ok &= r.pass;
                }
                let ctl = strong_null_check(&TimeSquaredTerm { theta: 0 }, &frame, &v, &dv)?;
                control_min = control_min.min(ctl.diag_ul_ul.max(ctl.diag_ll));
                exp_res = exp_res.max(ctl.expansion_residual);
                terms_ok &= !ctl.pass;
            }
            let pass = frame_res <= NULL_TOLERANCE
                && qg_exp <= NULL_TOLERANCE
                && (!cfg.with_terms || (terms_ok && exp_res <= NULL_TOLERANCE));
            Ok(FrameTrial {
                trial,
                c: mp.c,
                v: mp.v,
                max_frame_residual: frame_res,
                qg_diag_ul_ul: qg_ulul,
                qg_diag_ll: qg_ll,
                qab_max_diag: qab_max,
                control_min_diag: if cfg.with_terms { control_min } else { f64::NAN },
                max_expansion_residual: exp_res,
                qg_expansion_residual: qg_exp,
                pass,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn minkowski() -> MetricPoint {
        MetricPoint::new(1.0, [0.0; 3]).unwrap()
    }

    #[test]
    fn minkowski_frame_closed_form() {
        let f = build_null_frame(&minkowski(), [1.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.l, Vector4::new(1.0, 1.0, 0.0, 0.0));
        assert_eq!(f.ul, Vector4::new(1.0, -1.0, 0.0, 0.0));
        for e in [f.e1, f.e2] {
            assert_eq!(e[0], 0.0);
            assert_eq!(e[1], 0.0);
            assert!((e[2] * e[2] + e[3] * e[3] - 1.0).abs() < 1e-15);
        }
        assert_eq!(f.relation_residual(), 0.0);
    }

    #[test]
    fn minkowski_time_coefficients_are_half() {
        let f = build_null_frame(&minkowski(), [1.0, 0.0, 0.0]).unwrap();
        let m = frame_coefficients(&f).unwrap().m;
        // Independent 4×4 solve of ∂_t = x₁e₁ + x₂e₂ + x₃uL + x₄L by Cramer's rule.
        let cols = f.vectors();
        let base = Matrix4::from_fn(|r, a| cols[a][r]);
        let rhs = Vector4::new(1.0, 0.0, 0.0, 0.0);
        let det = base.determinant();
        let x: Vec<f64> = (0..4)
            .map(|a| {
                let mut b = base;
                b.set_column(a, &rhs);
                b.determinant() / det
            })
            .collect();
        assert!((x[2] - 0.5).abs() < 1e-14 && (x[3] - 0.5).abs() < 1e-14);
        for a in 0..4 {
            assert!((m[(0, a)] - x[a]).abs() < 1e-14);
        }
    }

    #[test]
    fn spatial_coefficients_at_rest() {
        let c = 1.7;
        let mp = MetricPoint::new(c, [0.0; 3]).unwrap();
        let n = [0.0, 0.6, 0.8];
        let f = build_null_frame(&mp, n).unwrap();
        let m = frame_coefficients(&f).unwrap().m;
        let ms = [f.e1 / c, f.e2 / c];
        for a in 1..4 {
            for slot in 0..2 {
                assert!((m[(a, slot)] - ms[slot][a] / c).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn plane_symmetric_frame_matches_characteristic_speeds() {
        let (c, v1) = (1.3, 0.4);
        let mp = MetricPoint::new(c, [v1, 0.0, 0.0]).unwrap();
        let f = build_null_frame(&mp, [1.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.l, Vector4::new(1.0, v1 + c, 0.0, 0.0));
        assert_eq!(f.ul, Vector4::new(1.0, v1 - c, 0.0, 0.0));
    }

    #[test]
    fn non_unit_direction_rejected() {
        assert!(matches!(build_null_frame(&minkowski(), [1.0, 1.0, 0.0]), Err(Error::Usage(_))));
        assert!(build_null_frame(&minkowski(), [f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn degenerate_frame_reports_condition_number() {
        let mut f = build_null_frame(&minkowski(), [1.0, 0.0, 0.0]).unwrap();
        f.e2 = f.e1;
        match frame_coefficients(&f) {
            Err(Error::Numeric(msg)) => assert!(msg.contains("condition")),
            other => panic!("expected numeric error, got {other:?}"),
        }
    }

    #[test]
    fn decomposition_is_frame_independent() {
        let mp = MetricPoint::new(0.8, [0.5, -1.1, 0.3]).unwrap();
        let a = decompose_inverse_metric(&build_null_frame(&mp, [1.0, 0.0, 0.0]).unwrap());
        let s = 1.0 / 3f64.sqrt();
        let b = decompose_inverse_metric(&build_null_frame(&mp, [s, -s, s]).unwrap());
        assert!((a - b).abs().max() < 1e-12);
        assert!((a - mp.g_inv).abs().max() < 1e-12);
        let mink = decompose_inverse_metric(&build_null_frame(&minkowski(), [0.0, 0.0, 1.0]).unwrap());
        assert!((mink - Matrix4::from_diagonal(&Vector4::new(-1.0, 1.0, 1.0, 1.0))).abs().max() < 1e-15);
    }

    #[test]
    fn null_forms_basic_values() {
        let d = [0.3, -1.0, 2.0, 0.5];
        for (a, b) in QAB_PAIRS {
            assert_eq!(null_form_qab(a, b, &d, &d), 0.0);
        }
        let k = [1.0, 1.0, 0.0, 0.0];
        assert_eq!(null_form_qg(&minkowski(), &k, &k), 0.0);
    }

    #[test]
    fn coefficient_tensors_are_symmetric() {
        let mp = MetricPoint::new(1.4, [0.2, 0.1, -0.5]).unwrap();
        let v = [0.0; STATE_DIM];
        assert_eq!(QgTerm { theta: 2, gamma: 7 }.coeff(&v, &mp).symmetry_defect(), 0.0);
        for (a, b) in QAB_PAIRS {
            let t = QabTerm { alpha: a, beta: b, theta: 0, gamma: 4 }.coeff(&v, &mp);
            assert_eq!(t.symmetry_defect(), 0.0);
        }
        assert_eq!(TimeSquaredTerm { theta: 3 }.coeff(&v, &mp).symmetry_defect(), 0.0);
    }

    #[test]
    fn coefficient_tensors_reproduce_definitions() {
        let mp = MetricPoint::new(1.4, [0.2, 0.1, -0.5]).unwrap();
        let v = [0.0; STATE_DIM];
        let dv: [[f64; STATE_DIM]; 4] = std::array::from_fn(|a| std::array::from_fn(|t| ((a * 11 + t) as f64 * 0.37).sin()));
        let col = |t: usize| [dv[0][t], dv[1][t], dv[2][t], dv[3][t]];
        let qg = QgTerm { theta: 1, gamma: 5 }.coeff(&v, &mp).evaluate(&dv);
        assert!((qg - null_form_qg(&mp, &col(1), &col(5))).abs() < 1e-13);
        let qab = QabTerm { alpha: 0, beta: 2, theta: 1, gamma: 5 }.coeff(&v, &mp).evaluate(&dv);
        assert!((qab - null_form_qab(0, 2, &col(1), &col(5))).abs() < 1e-14);
    }

    #[test]
    fn control_fails_at_every_lattice_direction() {
        let mp = MetricPoint::new(2.5, [1.5, -0.9, 0.4]).unwrap();
        let v = [0.0; STATE_DIM];
        let dv = [[0.1; STATE_DIM]; 4];
        for n in lattice_directions() {
            let frame = build_null_frame(&mp, n).unwrap();
            let m = frame_coefficients(&frame).unwrap().m;
            // M₀³ + M₀⁴ = 1 from ∂_t = B − vᵃ∂_a and B = ½(L + uL).
            assert!((m[(0, UL_SLOT)] + m[(0, L_SLOT)] - 1.0).abs() < 1e-12);
            let r = strong_null_check(&TimeSquaredTerm { theta: 0 }, &frame, &v, &dv).unwrap();
            assert!(!r.pass);
            assert!(r.diag_ul_ul.max(r.diag_ll) >= 0.25 - 1e-12);
        }
    }

    #[test]
    fn lattice_has_26_unit_directions() {
        let d = lattice_directions();
        assert_eq!(d.len(), 26);
        for n in d {
            assert!((norm3(&n) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn trials_pass_and_are_reproducible() {
        let cfg = FrameTrialConfig {
            trials: 20,
            ..Default::default()
        };
        let a = run_frame_trials(42, cfg).unwrap();
        let b = run_frame_trials(42, cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.pass, "{x:?}");
            assert_eq!(x.c.to_bits(), y.c.to_bits());
            assert_eq!(x.max_frame_residual.to_bits(), y.max_frame_residual.to_bits());
        }
    }

    proptest! {
        #[test]
        fn frame_relations_hold(
            c in 0.5f64..3.0,
            v in prop::array::uniform3(-1.15f64..1.15),
            n in prop::array::uniform3(-1.0f64..1.0),
        ) {
            let len = norm3(&n);
            prop_assume!(len > 1e-3);
            let n_hat = [n[0] / len, n[1] / len, n[2] / len];
            let mp = MetricPoint::new(c, v).unwrap();
            let f = build_null_frame(&mp, n_hat).unwrap();
            prop_assert!(f.relation_residual() <= 1e-10);
            let coeffs = frame_coefficients(&f).unwrap();
            prop_assert!(coeffs.reconstruction_residual <= 1e-10);
            prop_assert!((decompose_inverse_metric(&f) - mp.g_inv).abs().max() <= 1e-10);
        }

        #[test]
        fn qg_frame_expansion_matches(
            c in 0.5f64..3.0,
            v in prop::array::uniform3(-1.15f64..1.15),
            dphi in prop::array::uniform4(-2.0f64..2.0),
            dpsi in prop::array::uniform4(-2.0f64..2.0),
        ) {
            let mp = MetricPoint::new(c, v).unwrap();
            let f = build_null_frame(&mp, [0.0, 0.0, 1.0]).unwrap();
            let a = null_form_qg(&mp, &dphi, &dpsi);
            let b = qg_frame_expansion(&f, &dphi, &dpsi);
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }
}
