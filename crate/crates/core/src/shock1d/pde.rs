//! Isentropic 1D Euler flow on a periodic line, for cross-checking the fan.
//!
//! `∂_tρ = −v∂_xρ − ∂_xv`, `∂_tv = −v∂_xv − c²∂_xρ`, central differences and
//! classical RK4, no dissipation.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use super::fan::{CharacteristicFan, simple_wave_solution};
use crate::eos::EosModel;
use crate::error::{Error, Result};
use crate::grid::StencilOrder;

#[derive(Debug, Clone)]
pub struct Pde1d {
    pub t: f64,
    pub rho_log: Vec<f64>,
    pub v1: Vec<f64>,
    entropy: f64,
    order: StencilOrder,
    h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PdeSample {
    pub t: f64,
    /// `max|∂_x R₊|` with parabolic refinement of the grid peak.
    pub max_abs_dx_rplus: f64,
    pub peak_x: f64,
}

impl Pde1d {
    /// Samples the fan at `t = 0` on `n` points of `[0, 2π)`.
    pub fn from_fan(fan: &CharacteristicFan, n: usize, order: StencilOrder) -> Result<Self> {
        let (a, b) = fan.profile().window();
        if !fan.profile().is_periodic() || ((b - a) - TAU).abs() > 1e-12 {
            return Err(Error::Usage("the 1D solver needs a 2π-periodic profile".into()));
        }
        if n < 8 {
            return Err(Error::Usage(format!("1D grid needs n >= 8, got {n}")));
        }
        let h = TAU / n as f64;
        let pts: Vec<(f64, f64)> = (0..n)
            .into_par_iter()
            .map(|j| simple_wave_solution(fan, 0.0, j as f64 * h).map(|p| (p.rho_log, p.v1)))
            .collect::<Result<_>>()?;
        Ok(Self {
            t: 0.0,
            rho_log: pts.iter().map(|p| p.0).collect(),
            v1: pts.iter().map(|p| p.1).collect(),
            entropy: fan.map().entropy(),
            order,
            h,
        })
    }

    pub fn n(&self) -> usize {
        self.rho_log.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    fn dx(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let at = |j: usize, k: isize| f[(j as isize + k).rem_euclid(n as isize) as usize];
        (0..n)
            .map(|j| match self.order {
                StencilOrder::Second => (at(j, 1) - at(j, -1)) / (2.0 * self.h),
                StencilOrder::Fourth => (8.0 * (at(j, 1) - at(j, -1)) - (at(j, 2) - at(j, -2))) / (12.0 * self.h),
            })
            .collect()
    }

    fn rhs(&self, eos: &EosModel, rho: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (dr, dv) = (self.dx(rho), self.dx(v));
        let c2: Vec<f64> = rho.iter().map(|&r| eos.sound_speed(r, self.entropy).powi(2)).collect();
        let d_rho = (0..rho.len()).map(|j| -v[j] * dr[j] - dv[j]).collect();
        let d_v = (0..rho.len()).map(|j| -v[j] * dv[j] - c2[j] * dr[j]).collect();
        (d_rho, d_v)
    }

    /// `max(|v| + c)`.
    pub fn max_speed(&self, eos: &EosModel) -> f64 {
        self.rho_log
            .iter()
            .zip(&self.v1)
            .map(|(&r, &v)| v.abs() + eos.sound_speed(r, self.entropy))
            .fold(0.0, f64::max)
    }

    pub fn rk4_step(&mut self, eos: &EosModel, dt: f64) -> Result<()> {
        let axpy = |x: &[f64], a: f64, y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(x, y)| x + a * y).collect() };
        let (r0, v0) = (&self.rho_log, &self.v1);
        let (k1r, k1v) = self.rhs(eos, r0, v0);
        let (k2r, k2v) = self.rhs(eos, &axpy(r0, 0.5 * dt, &k1r), &axpy(v0, 0.5 * dt, &k1v));
        let (k3r, k3v) = self.rhs(eos, &axpy(r0, 0.5 * dt, &k2r), &axpy(v0, 0.5 * dt, &k2v));
        let (k4r, k4v) = self.rhs(eos, &axpy(r0, dt, &k3r), &axpy(v0, dt, &k3v));
        let comb = |x: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| -> Vec<f64> {
            (0..x.len())
                .map(|j| x[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
                .collect()
        };
        let rho = comb(r0, &k1r, &k2r, &k3r, &k4r);
        let v = comb(v0, &k1v, &k2v, &k3v, &k4v);
        if rho.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::Blowup {
                t: self.t + dt,
                detail: "non-finite value in the 1D solution".into(),
            });
        }
        self.rho_log = rho;
        self.v1 = v;
        self.t += dt;
        Ok(())
    }

    /// Steps to `t_end` with `dt = cfl·h/max(|v|+c)`, the last step shortened.
    pub fn advance_to(&mut self, eos: &EosModel, t_end: f64, cfl: f64) -> Result<()> {
        if !(cfl > 0.0) {
            return Err(Error::Config(format!("cfl must be positive, got {cfl}")));
        }
        while self.t < t_end {
            let dt = (cfl * self.h / self.max_speed(eos)).min(t_end - self.t);
            if dt <= 1e-14 * t_end.abs().max(1.0) {
                self.t = t_end;
                break;
            }
            self.rk4_step(eos, dt)?;
        }
        Ok(())
    }

    /// `∂_x R₊ = ∂_x v¹ + c ∂_x ρ`.
    pub fn dx_r_plus(&self, eos: &EosModel) -> Vec<f64> {
        let (dr, dv) = (self.dx(&self.rho_log), self.dx(&self.v1));
        (0..self.n())
            .map(|j| dv[j] + eos.sound_speed(self.rho_log[j], self.entropy) * dr[j])
            .collect()
    }

    pub fn sample(&self, eos: &EosModel) -> PdeSample {
        let d = self.dx_r_plus(eos);
        let n = d.len();
        let (j, _) = d
            .iter()
            .enumerate()
            .fold((0, -1.0), |b, (j, v)| if v.abs() > b.1 { (j, v.abs()) } else { b });
        let (ym, y0, yp) = (d[(j + n - 1) % n].abs(), d[j].abs(), d[(j + 1) % n].abs());
        let den = ym - 2.0 * y0 + yp;
        let shift = if den != 0.0 { (0.5 * (ym - yp) / den).clamp(-0.5, 0.5) } else { 0.0 };
        PdeSample {
            t: self.t,
            max_abs_dx_rplus: y0 - 0.25 * (ym - yp) * shift,
            peak_x: (j as f64 + shift) * self.h,
        }
    }

    /// `sup_x max(|ρ − ρ_fan|, |v¹ − v¹_fan|)` at the current time.
    pub fn sup_error(&self, fan: &CharacteristicFan) -> Result<f64> {
        let errs: Vec<f64> = (0..self.n())
            .into_par_iter()
            .map(|j| {
                let p = simple_wave_solution(fan, self.t, j as f64 * self.h)?;
                Ok((self.rho_log[j] - p.rho_log).abs().max((self.v1[j] - p.v1).abs()))
            })
            .collect::<Result<_>>()?;
        Ok(errs.into_iter().fold(0.0, f64::max))
    }
}

/// Evolves the fan's initial data and records [`PdeSample`]s at `times`.
pub fn run_pde(
    fan: &CharacteristicFan,
    n: usize,
    order: StencilOrder,
    times: &[f64],
    cfl: f64,
) -> Result<(Vec<PdeSample>, Pde1d)> {
    if times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Usage("sample times must be sorted".into()));
    }
    let eos = fan.map().eos().clone();
    let mut pde = Pde1d::from_fan(fan, n, order)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        pde.advance_to(&eos, t, cfl)?;
        out.push(pde.sample(&eos));
    }
    Ok((out, pde))
}

/// Least-squares line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LinearFit {
    pub fn fit(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::Usage("a line fit needs at least two paired points".into()));
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        if sxx == 0.0 {
            return Err(Error::Numeric("line fit over a single abscissa".into()));
        }
        let slope = sxy / sxx;
        let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
        Ok(Self {
            slope,
            intercept: my - slope * mx,
            r_squared,
        })
    }

    /// Abscissa where the line crosses zero.
    pub fn root(&self) -> f64 {
        -self.intercept / self.slope
    }
}

/// Blowup time from the zero of a line fit to `1/max|∂_xR₊|`.
pub fn pde_blowup_time(samples: &[PdeSample]) -> Result<LinearFit> {
    let ts: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let inv: Vec<f64> = samples.iter().map(|s| 1.0 / s.max_abs_dx_rplus).collect();
    LinearFit::fit(&ts, &inv)
}
