//! Characteristic fan of a simple wave `R₋ ≡ 0`, its blowup time, the eikonal
//! function `u` and the inverse foliation density `μ`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::riemann::RiemannMap;
use crate::error::{Error, Result};
use crate::geometry::metric_at;
use crate::grid::{Grid, ScalarField, VectorField};
use crate::state::FluidState;

/// Foot points used for the blowup search and for sampled extrema.
pub const FOOT_POINTS: usize = 4096;

/// Stencil slopes above `-SLOPE_NOISE` count as non-compressive.
pub const SLOPE_NOISE: f64 = 1e-8;

type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Initial data `R₊⁰(x₀)` with its derivative.
#[derive(Clone)]
pub struct Profile {
    name: String,
    value: ProfileFn,
    slope: ProfileFn,
    window: (f64, f64),
    periodic: bool,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile")
            .field("name", &self.name)
            .field("window", &self.window)
            .field("periodic", &self.periodic)
            .finish()
    }
}

impl Profile {
    /// `R₊⁰ = ε sin x₀`.
    pub fn sine(amplitude: f64) -> Self {
        Self {
            name: format!("sine({amplitude})"),
            value: Arc::new(move |x| amplitude * x.sin()),
            slope: Arc::new(move |x| amplitude * x.cos()),
            window: (0.0, TAU),
            periodic: true,
        }
    }

    pub fn constant(value: f64) -> Self {
        Self {
            name: format!("constant({value})"),
            value: Arc::new(move |_| value),
            slope: Arc::new(|_| 0.0),
            window: (0.0, TAU),
            periodic: true,
        }
    }

    /// `window` is the set of foot points searched for blowup; for periodic
    /// data it must be one period.
    pub fn custom<V, S>(name: &str, value: V, slope: S, window: (f64, f64), periodic: bool) -> Result<Self>
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(window.0.is_finite() && window.1.is_finite() && window.0 < window.1) {
            return Err(Error::Usage(format!("invalid profile window {window:?}")));
        }
        Ok(Self {
            name: name.to_string(),
            value: Arc::new(value),
            slope: Arc::new(slope),
            window,
            periodic,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, x0: f64) -> f64 {
        (self.value)(x0)
    }

    pub fn slope(&self, x0: f64) -> f64 {
        (self.slope)(x0)
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }
}

/// State carried by a characteristic with invariant `R₊`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveState {
    pub r_plus: f64,
    pub v1: f64,
    pub rho_log: f64,
    pub c: f64,
    /// `λ = v¹ + c`.
    pub lambda: f64,
    /// `dλ/dR₊ = ½(1 + c_;ρ/c)`.
    pub dlambda: f64,
}

/// One foot point of the fan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FootSample {
    pub x0: f64,
    pub r_plus: f64,
    /// `dR₊⁰/dx₀`.
    pub slope: f64,
    pub c: f64,
    pub lambda: f64,
    /// `λ'(x₀)`, analytic.
    pub lambda_slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupTime {
    /// `+∞` when no characteristic is compressive.
    pub t_star: f64,
    /// Foot point of the first crossing.
    pub foot_point: Option<f64>,
    /// `min λ'` from the stencil search.
    pub min_lambda_slope: f64,
}

impl BlowupTime {
    pub fn is_finite(&self) -> bool {
        self.t_star.is_finite()
    }
}

/// Straight characteristics `x = x₀ + λ(x₀) t` of a simple wave.
#[derive(Debug, Clone)]
pub struct CharacteristicFan {
    map: RiemannMap,
    profile: Profile,
    feet: Vec<FootSample>,
    blowup: BlowupTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimpleWavePoint {
    pub x0: f64,
    pub r_plus: f64,
    pub v1: f64,
    pub rho_log: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EikonalPoint {
    pub u: f64,
    pub mu: f64,
    pub c: f64,
    /// `c·μ`, which equals 1 at `t = 0`.
    pub c_mu: f64,
}

/// Sup-norm diagnostics at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductSample {
    pub t: f64,
    pub mu_star: f64,
    pub max_abs_dxv1: f64,
    pub max_abs_dx_rplus: f64,
    /// `sup_x μ|∂_x v¹|`.
    pub product: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub x: f64,
    pub r_plus: f64,
    pub v1: f64,
    pub rho_log: f64,
    pub u: f64,
    pub mu: f64,
}

impl CharacteristicFan {
    pub fn new(map: RiemannMap, profile: Profile) -> Result<Self> {
        let (a, b) = profile.window;
        let h = (b - a) / FOOT_POINTS as f64;
        let count = if profile.periodic { FOOT_POINTS } else { FOOT_POINTS + 1 };
        let mut fan = Self {
            map,
            profile,
            feet: Vec::new(),
            blowup: BlowupTime {
                t_star: f64::INFINITY,
                foot_point: None,
                min_lambda_slope: 0.0,
            },
        };
        let feet = (0..count)
            .into_par_iter()
            .map(|i| fan.foot_sample(a + i as f64 * h))
            .collect::<Result<_>>()?;
        fan.feet = feet;
        fan.blowup = fan.search_blowup(h)?;
        Ok(fan)
    }

    pub fn map(&self) -> &RiemannMap {
        &self.map
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn feet(&self) -> &[FootSample] {
        &self.feet
    }

    pub fn blowup(&self) -> BlowupTime {
        self.blowup
    }

    /// `T*`.
    pub fn valid_until(&self) -> f64 {
        self.blowup.t_star
    }

    pub fn wave_state(&self, r_plus: f64) -> Result<WaveState> {
        let v1 = 0.5 * r_plus;
        let rho_log = self.map.f_inverse(v1)?;
        let pt = self.map.eos().evaluate(rho_log, self.map.entropy())?;
        Ok(WaveState {
            r_plus,
            v1,
            rho_log,
            c: pt.c,
            lambda: v1 + pt.c,
            dlambda: 0.5 * (1.0 + pt.c_rho / pt.c),
        })
    }

    pub fn foot_sample(&self, x0: f64) -> Result<FootSample> {
        let slope = self.profile.slope(x0);
        let w = self.wave_state(self.profile.value(x0))?;
        Ok(FootSample {
            x0,
            r_plus: w.r_plus,
            slope,
            c: w.c,
            lambda: w.lambda,
            lambda_slope: w.dlambda * slope,
        })
    }

    pub fn lambda(&self, x0: f64) -> Result<f64> {
        Ok(self.wave_state(self.profile.value(x0))?.lambda)
    }

    /// `k = −f'(R₊)` of the Riccati law `d/dt ∂₁R₊ = k(∂₁R₊)²` on the
    /// characteristic from `x₀`.
    pub fn riccati_constant(&self, x0: f64) -> Result<f64> {
        Ok(-self.wave_state(self.profile.value(x0))?.dlambda)
    }

    /// Five-point stencil of `λ` at spacing `h`.
    fn stencil_slope(&self, x: f64, h: f64) -> Result<f64> {
        let l = |k: f64| self.lambda(x + k * h);
        Ok((8.0 * (l(1.0)? - l(-1.0)?) - (l(2.0)? - l(-2.0)?)) / (12.0 * h))
    }

    fn search_blowup(&self, h: f64) -> Result<BlowupTime> {
        let (a, b) = self.profile.window;
        let n = self.feet.len();
        let lam = |j: isize| -> Result<f64> {
            if self.profile.periodic {
                Ok(self.feet[j.rem_euclid(n as isize) as usize].lambda)
            } else if j >= 0 && (j as usize) < n {
                Ok(self.feet[j as usize].lambda)
            } else {
                self.lambda(a + j as f64 * h)
            }
        };
        let mut best = (0usize, f64::INFINITY);
        for i in 0..n {
            let j = i as isize;
            let s = (8.0 * (lam(j + 1)? - lam(j - 1)?) - (lam(j + 2)? - lam(j - 2)?)) / (12.0 * h);
            if s < best.1 {
                best = (i, s);
            }
        }
        if best.1 >= -SLOPE_NOISE {
            return Ok(BlowupTime {
                t_star: f64::INFINITY,
                foot_point: None,
                min_lambda_slope: best.1,
            });
        }
        let x = self.feet[best.0].x0;
        let (lo, hi) = if self.profile.periodic { (x - h, x + h) } else { ((x - h).max(a), (x + h).min(b)) };
        let (xs, s) = golden_min(|y| self.stencil_slope(y, h), lo, hi)?;
        let (xs, s) = if s < best.1 { (xs, s) } else { (x, best.1) };
        Ok(BlowupTime {
            t_star: -1.0 / s,
            foot_point: Some(xs),
            min_lambda_slope: s,
        })
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Usage(format!("fan queried at t = {t}")));
        }
        if t >= self.blowup.t_star {
            return Err(Error::PostBlowup {
                t,
                t_star: self.blowup.t_star,
            });
        }
        Ok(())
    }

    /// Solves `x = x₀ + λ(x₀)t` for `x₀`.
    pub fn foot_point(&self, t: f64, x: f64) -> Result<f64> {
        self.check_time(t)?;
        self.solve_foot(t, x)
    }

    /// As [`foot_point`](Self::foot_point) without the time check; small
    /// negative `t` is used for centred time differences.
    fn solve_foot(&self, t: f64, x: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(x);
        }
        let g = |y: f64| self.lambda(y).map(|l| y + l * t - x);
        let y0 = x - self.lambda(x)? * t;
        let g0 = g(y0)?;
        if g0 == 0.0 {
            return Ok(y0);
        }
        let mut d = g0.abs().max(1e-12);
        let (mut lo, mut hi) = (y0, y0);
        for k in 0.. {
            if k > 60 {
                return Err(Error::Numeric(format!("no foot point bracket for x={x}, t={t}")));
            }
            if g0 > 0.0 {
                lo = y0 - d;
                if g(lo)? <= 0.0 {
                    break;
                }
            } else {
                hi = y0 + d;
                if g(hi)? >= 0.0 {
                    break;
                }
            }
            d *= 2.0;
        }
        let mut y = 0.5 * (lo + hi);
        for _ in 0..200 {
            let gy = g(y)?;
            if gy <= 0.0 {
                lo = y;
            }
            if gy >= 0.0 {
                hi = y;
            }
            // λ carries quadrature noise, amplified by t
            if gy.abs() <= 1e-13 * (1.0 + x.abs() + t.abs()) {
                return Ok(y);
            }
            let f = self.foot_sample(y)?;
            let mut next = y - gy / (1.0 + t * f.lambda_slope);
            if !(next >= lo && next <= hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - y).abs() <= 1e-14 * (1.0 + y.abs()) || hi - lo <= 1e-14 * (1.0 + y.abs()) {
                return Ok(next);
            }
            y = next;
        }
        Err(Error::Numeric(format!("foot point Newton did not converge for x={x}, t={t}")))
    }

    /// `μ` on the characteristic from `x₀`: `(1 + tλ'(x₀))/c(x₀)`.
    fn mu_at_foot(&self, t: f64, x0: f64) -> Result<f64> {
        let f = self.foot_sample(x0)?;
        Ok((1.0 + t * f.lambda_slope) / f.c)
    }

    /// `inf_x min(1, μ)`.
    pub fn mu_star(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let (i, m) = argmin(self.feet.iter().map(|f| (1.0 + t * f.lambda_slope) / f.c));
        let m = self.refine(i, m, |x0| self.mu_at_foot(t, x0))?;
        Ok(m.min(1.0))
    }

    /// Sup-norm diagnostics of the fan at `t`.
    pub fn product_sample(&self, t: f64) -> Result<ProductSample> {
        self.check_time(t)?;
        let dxv = |f: &FootSample| 0.5 * f.slope.abs() / (1.0 + t * f.lambda_slope);
        let (i, m) = argmin(self.feet.iter().map(|f| -dxv(f)));
        let max_abs_dxv1 = -self.refine(i, m, |x0| self.foot_sample(x0).map(|f| -dxv(&f)))?;
        let (i, m) = argmin(self.feet.iter().map(|f| -(1.0 + t * f.lambda_slope) / f.c * dxv(f)));
        let product = -self.refine(i, m, |x0| {
            self.foot_sample(x0).map(|f| -(1.0 + t * f.lambda_slope) / f.c * dxv(&f))
        })?;
        Ok(ProductSample {
            t,
            mu_star: self.mu_star(t)?,
            max_abs_dxv1,
            max_abs_dx_rplus: 2.0 * max_abs_dxv1,
            product,
        })
    }

    /// Golden-section refinement of a sampled minimum at foot index `i`.
    fn refine<F: Fn(f64) -> Result<f64>>(&self, i: usize, sampled: f64, f: F) -> Result<f64> {
        let n = self.feet.len();
        let x = self.feet[i].x0;
        let h = if n > 1 { self.feet[1].x0 - self.feet[0].x0 } else { 0.0 };
        let (a, b) = self.profile.window;
        let (lo, hi) = if self.profile.periodic { (x - h, x + h) } else { ((x - h).max(a), (x + h).min(b)) };
        if hi <= lo {
            return Ok(sampled);
        }
        Ok(golden_min(f, lo, hi)?.1.min(sampled))
    }

    /// Profile snapshot at `n` equispaced points of the window.
    pub fn profile_snapshot(&self, t: f64, n: usize) -> Result<Vec<ProfileRow>> {
        self.check_time(t)?;
        let (a, b) = self.profile.window;
        let h = (b - a) / n as f64;
        (0..n)
            .into_par_iter()
            .map(|j| {
                let x = a + j as f64 * h;
                let p = simple_wave_solution(self, t, x)?;
                let e = eikonal_mu(self, t, x)?;
                Ok(ProfileRow {
                    x,
                    r_plus: p.r_plus,
                    v1: p.v1,
                    rho_log: p.rho_log,
                    u: e.u,
                    mu: e.mu,
                })
            })
            .collect()
    }
}

/// `(R₊, v¹, ρ)` at `(t, x)` before the blowup time.
pub fn simple_wave_solution(fan: &CharacteristicFan, t: f64, x: f64) -> Result<SimpleWavePoint> {
    let x0 = fan.foot_point(t, x)?;
    let w = fan.wave_state(fan.profile.value(x0))?;
    Ok(SimpleWavePoint {
        x0,
        r_plus: w.r_plus,
        v1: w.v1,
        rho_log: w.rho_log,
    })
}

/// `T*` of the fan.
pub fn blowup_time(fan: &CharacteristicFan) -> f64 {
    fan.valid_until()
}

/// `u = 1 − x₀(t, x)` and `μ` from the characteristic Jacobian.
pub fn eikonal_mu(fan: &CharacteristicFan, t: f64, x: f64) -> Result<EikonalPoint> {
    let x0 = fan.foot_point(t, x)?;
    let f = fan.foot_sample(x0)?;
    let jac = 1.0 + t * f.lambda_slope;
    if jac <= 0.0 {
        return Err(Error::PostBlowup {
            t,
            t_star: fan.valid_until(),
        });
    }
    let mu = jac / f.c;
    Ok(EikonalPoint {
        u: 1.0 - x0,
        mu,
        c: f.c,
        c_mu: jac,
    })
}

/// `μ = −1/((g⁻¹)^{αβ}∂_αt ∂_βu)` with `∂u` by five-point differences of
/// step `h` in `t` and `x`.
pub fn mu_from_definition(fan: &CharacteristicFan, t: f64, x: f64, h: f64) -> Result<f64> {
    fan.check_time(t)?;
    if !(h > 0.0) || t + 2.0 * h >= fan.valid_until() {
        return Err(Error::Usage(format!("difference step {h} does not fit before T*")));
    }
    let u = |tt: f64, xx: f64| fan.solve_foot(tt, xx).map(|y| 1.0 - y);
    let d5 = |f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        Ok((8.0 * (f(h)? - f(-h)?) - (f(2.0 * h)? - f(-2.0 * h)?)) / (12.0 * h))
    };
    let du_t = d5(&|k| u(t + k, x))?;
    let du_x = d5(&|k| u(t, x + k))?;
    let p = simple_wave_solution(fan, t, x)?;
    let pt = fan.map.eos().evaluate(p.rho_log, fan.map.entropy())?;
    let m = metric_at(&pt, [p.v1, 0.0, 0.0])?;
    let q = m.g_inv[(0, 0)] * du_t + m.g_inv[(0, 1)] * du_x;
    Ok(-1.0 / q)
}

/// `sup_x μ|∂_x v¹|` at `t`.
pub fn blowup_product_check(fan: &CharacteristicFan, t: f64) -> Result<f64> {
    Ok(fan.product_sample(t)?.product)
}

/// Plane-symmetric 3D state of the fan at `t`: `v² = v³ = 0`, constant `s`.
pub fn embed_plane_wave_3d(fan: &CharacteristicFan, t: f64, grid: Grid) -> Result<FluidState> {
    let (a, b) = fan.profile.window;
    if !fan.profile.periodic || ((b - a) - TAU).abs() > 1e-12 {
        return Err(Error::Usage("embedding needs a 2π-periodic profile".into()));
    }
    let n = grid.n();
    let line: Vec<SimpleWavePoint> = (0..n)
        .into_par_iter()
        .map(|i| simple_wave_solution(fan, t, i as f64 * grid.h()))
        .collect::<Result<_>>()?;
    let at = |idx: usize| &line[grid.ijk(idx).0];
    let rho = ScalarField::from_values(grid, (0..grid.len()).map(|i| at(i).rho_log).collect())?;
    let v = VectorField::from_fn(grid, |i| [at(i).v1, 0.0, 0.0]);
    let s = ScalarField::constant(grid, fan.map.entropy());
    FluidState::new(t, rho, v, s, fan.map.eos().clone())
}

fn argmin<I: Iterator<Item = f64>>(it: I) -> (usize, f64) {
    it.enumerate()
        .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best })
}

/// Golden-section search for a minimum on `[lo, hi]`.
pub(crate) fn golden_min<F: Fn(f64) -> Result<f64>>(f: F, mut lo: f64, mut hi: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while hi - lo > 1e-11 * (1.0 + lo.abs()) {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 < f2 { (x1, f1) } else { (x2, f2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::EosModel;

    fn fan(eos: EosModel, profile: Profile) -> CharacteristicFan {
        CharacteristicFan::new(RiemannMap::new(Arc::new(eos), 0.0).unwrap(), profile).unwrap()
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let (x, y) = golden_min(|x| Ok((x - 0.3) * (x - 0.3) + 2.0), -1.0, 1.0).unwrap();
        assert!((x - 0.3).abs() < 1e-6 && (y - 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant_profile_never_blows_up() {
        let f = fan(EosModel::polytropic(1.4, 1.0).unwrap(), Profile::constant(0.2));
        assert!(f.valid_until().is_infinite());
        let p = simple_wave_solution(&f, 100.0, 1.0).unwrap();
        assert!((p.r_plus - 0.2).abs() < 1e-15);
    }

    #[test]
    fn queries_past_blowup_are_rejected() {
        let f = fan(EosModel::polytropic(1.4, 1.0).unwrap(), Profile::sine(0.3));
        let t = f.valid_until();
        assert!(matches!(simple_wave_solution(&f, t, 0.0), Err(Error::PostBlowup { .. })));
        assert!(matches!(eikonal_mu(&f, 1.01 * t, 0.0), Err(Error::PostBlowup { .. })));
        assert!(matches!(f.mu_star(-1.0), Err(Error::Usage(_))));
    }
}
