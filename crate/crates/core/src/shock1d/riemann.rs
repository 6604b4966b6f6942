//! Riemann invariants `R± = v¹ ± F(ρ)` at fixed entropy.

use std::sync::Arc;

use crate::eos::EosModel;
use crate::error::{Error, Result};

/// Absolute tolerance of the quadrature for `F`.
pub const QUADRATURE_TOL: f64 = 1e-12;

const NEWTON_MAX_ITER: usize = 100;

/// `exp(±ρ)` overflows beyond this.
const MAX_RHO: f64 = 700.0;

/// `F(ρ) = ∫₀^ρ c(r, s) dr` at fixed `s`, with its inverse.
#[derive(Debug, Clone)]
pub struct RiemannMap {
    eos: Arc<EosModel>,
    entropy: f64,
}

impl RiemannMap {
    pub fn new(eos: Arc<EosModel>, entropy: f64) -> Result<Self> {
        eos.evaluate(0.0, entropy)?;
        Ok(Self { eos, entropy })
    }

    pub fn eos(&self) -> &Arc<EosModel> {
        &self.eos
    }

    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    /// `c(ρ)` at the fixed entropy.
    pub fn speed(&self, rho_log: f64) -> Result<f64> {
        Ok(self.eos.evaluate(rho_log, self.entropy)?.c)
    }

    /// `F(ρ)` by adaptive double-exponential quadrature.
    pub fn f(&self, rho_log: f64) -> Result<f64> {
        if !rho_log.is_finite() {
            return Err(Error::Domain(format!("F evaluated at rho={rho_log}")));
        }
        if rho_log == 0.0 {
            return Ok(0.0);
        }
        let (a, b, sign) = if rho_log > 0.0 { (0.0, rho_log, 1.0) } else { (rho_log, 0.0, -1.0) };
        let out = quadrature::integrate(|r| self.eos.sound_speed(r, self.entropy), a, b, QUADRATURE_TOL);
        if !out.integral.is_finite() || out.error_estimate > 1e3 * QUADRATURE_TOL {
            return Err(Error::Numeric(format!(
                "quadrature of c on [{a}, {b}] failed (estimate {}, error {})",
                out.integral, out.error_estimate
            )));
        }
        Ok(sign * out.integral)
    }

    /// Solves `F(ρ) = value` by Newton's method with `F' = c`, inside a
    /// bracket that is widened until it contains the root.
    pub fn f_inverse(&self, value: f64) -> Result<f64> {
        if !value.is_finite() {
            return Err(Error::Domain(format!("F⁻¹ evaluated at {value}")));
        }
        if value == 0.0 {
            return Ok(0.0);
        }
        let g = |r: f64| self.f(r).map(|f| f - value);
        let c0 = self.speed(0.0)?;
        let mut step = (value / c0).abs().max(1e-3);
        let (mut lo, mut hi) = if value > 0.0 { (0.0, step) } else { (-step, 0.0) };
        let mut tries = 0;
        loop {
            let (glo, ghi) = (g(lo)?, g(hi)?);
            if glo <= 0.0 && ghi >= 0.0 {
                break;
            }
            tries += 1;
            if tries > 60 || lo < -MAX_RHO || hi > MAX_RHO {
                return Err(Error::Domain(format!("{value} is outside the range of F")));
            }
            step *= 2.0;
            if ghi < 0.0 {
                lo = hi;
                hi += step;
            } else {
                hi = lo;
                lo -= step;
            }
        }
        let mut r = 0.5 * (lo + hi);
        for _ in 0..NEWTON_MAX_ITER {
            let gr = g(r)?;
            if gr.abs() <= 1e-14 * (1.0 + value.abs()) {
                return Ok(r);
            }
            if gr < 0.0 {
                lo = r;
            } else {
                hi = r;
            }
            let mut next = r - gr / self.speed(r)?;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - r).abs() <= 1e-14 * (1.0 + r.abs()) || hi - lo <= 1e-15 * (1.0 + r.abs()) {
                return Ok(next);
            }
            r = next;
        }
        Err(Error::Numeric(format!("Newton inversion of F did not converge for {value}")))
    }

    /// `(R₊, R₋)`.
    pub fn invariants(&self, v1: f64, rho_log: f64) -> Result<(f64, f64)> {
        let f = self.f(rho_log)?;
        Ok((v1 + f, v1 - f))
    }

    /// `(v¹, ρ)` from `(R₊, R₋)`.
    pub fn invert(&self, r_plus: f64, r_minus: f64) -> Result<(f64, f64)> {
        Ok((0.5 * (r_plus + r_minus), self.f_inverse(0.5 * (r_plus - r_minus))?))
    }
}

/// `(R₊, R₋)` of a plane-symmetric state.
pub fn riemann_invariants(v1: f64, rho_log: f64, map: &RiemannMap) -> Result<(f64, f64)> {
    map.invariants(v1, rho_log)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(eos: EosModel) -> RiemannMap {
        RiemannMap::new(Arc::new(eos), 0.0).unwrap()
    }

    #[test]
    fn polytropic_closed_form() {
        // γ = 2: c = exp(ρ/2), F = 2(exp(ρ/2) − 1).
        let m = map(EosModel::polytropic(2.0, 1.0).unwrap());
        for rho in [-1.5f64, -0.3, 0.0, 0.2, 1.7] {
            let exact = 2.0 * ((0.5 * rho).exp() - 1.0);
            assert!((m.f(rho).unwrap() - exact).abs() < 1e-12, "{rho}");
        }
    }

    #[test]
    fn chaplygin_closed_form_and_range() {
        // c = exp(−ρ), F = 1 − exp(−ρ) < 1.
        let m = map(EosModel::chaplygin(0.0, 1.0, 1.0).unwrap());
        assert!((m.f(0.7).unwrap() - (1.0 - (-0.7f64).exp())).abs() < 1e-12);
        assert!((m.f_inverse(0.5).unwrap() - 2f64.ln()).abs() < 1e-10);
        let e = m.f_inverse(1.2);
        assert!(matches!(e, Err(Error::Domain(_))), "{e:?}");
    }

    #[test]
    fn round_trip() {
        let m = map(EosModel::polytropic(2.0, 1.0).unwrap());
        assert_eq!(m.invariants(0.0, 0.0).unwrap(), (0.0, 0.0));
        for &(v, rho) in &[(0.3, -0.4), (-1.0, 0.9), (0.0, 2.5)] {
            let (rp, rm) = riemann_invariants(v, rho, &m).unwrap();
            let (v2, rho2) = m.invert(rp, rm).unwrap();
            assert!((v2 - v).abs() < 1e-10 && (rho2 - rho).abs() < 1e-10);
        }
    }
}
