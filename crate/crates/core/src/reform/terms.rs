//! Pointwise inhomogeneous terms. Each function evaluates one displayed
//! line (or one product) at a single cell; scalars use slot 0.

use crate::eos::EosPoint;
use crate::tensor::{cross3, dot3, levi_civita};

/// Everything the right-hand sides need at one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellData {
    pub rho: f64,
    pub v: [f64; 3],
    pub eos: EosPoint,
    pub background_density: f64,
    pub grad_rho: [f64; 3],
    /// `dv[i][a] = ∂_a vⁱ`.
    pub dv: [[f64; 3]; 3],
    pub omega: [f64; 3],
    pub ent_grad: [f64; 3],
    /// `d_omega[k][a] = ∂_a Ωᵏ`.
    pub d_omega: [[f64; 3]; 3],
    /// `d_ent_grad[k][a] = ∂_a Sᵏ`.
    pub d_ent_grad: [[f64; 3]; 3],
    pub curl_omega: [f64; 3],
    pub curl_mod: [f64; 3],
    pub div_mod: f64,
    pub b_rho: f64,
    pub b_v: [f64; 3],
    pub b_ent_grad: [f64; 3],
}

pub type Vec3 = [f64; 3];

#[inline]
fn scalar(x: f64) -> Vec3 {
    [x, 0.0, 0.0]
}

#[inline]
fn scale(s: f64, a: Vec3) -> Vec3 {
    [s * a[0], s * a[1], s * a[2]]
}

impl CellData {
    #[inline]
    pub fn c(&self) -> f64 {
        self.eos.c
    }
    #[inline]
    pub fn exp(&self, k: f64) -> f64 {
        (k * self.rho).exp()
    }
    /// `p_;s / ϱ̄`.
    #[inline]
    pub fn ps(&self) -> f64 {
        self.eos.p_s / self.background_density
    }
    /// `p_;s;ρ / ϱ̄`.
    #[inline]
    pub fn ps_rho(&self) -> f64 {
        self.eos.p_s_rho / self.background_density
    }
    /// `p_;ρ;s / ϱ̄`.
    #[inline]
    pub fn prho_s(&self) -> f64 {
        self.eos.p_rho_s / self.background_density
    }
    /// `p_;s;s / ϱ̄`.
    #[inline]
    pub fn ps_s(&self) -> f64 {
        self.eos.p_s_s / self.background_density
    }
    #[inline]
    pub fn div_v(&self) -> f64 {
        self.dv[0][0] + self.dv[1][1] + self.dv[2][2]
    }
    #[inline]
    pub fn div_ent_grad(&self) -> f64 {
        self.d_ent_grad[0][0] + self.d_ent_grad[1][1] + self.d_ent_grad[2][2]
    }
    /// `(∂_a vᵇ)(∂_b vᵃ)`.
    #[inline]
    pub fn dv_dv(&self) -> f64 {
        let mut s = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                s += self.dv[b][a] * self.dv[a][b];
            }
        }
        s
    }
    /// `Sᵃ∂_a vⁱ`.
    #[inline]
    pub fn s_grad_v(&self, i: usize) -> f64 {
        dot3(&self.ent_grad, &self.dv[i])
    }
    #[inline]
    pub fn s_grad_rho(&self) -> f64 {
        dot3(&self.ent_grad, &self.grad_rho)
    }
    /// `(g⁻¹)^{αβ}∂_αρ∂_βvⁱ = −(Bρ)(Bvⁱ) + c²∂_aρ∂_avⁱ`.
    #[inline]
    pub fn qg_rho_v(&self, i: usize) -> f64 {
        let c = self.c();
        -self.b_rho * self.b_v[i] + c * c * dot3(&self.grad_rho, &self.dv[i])
    }
    #[inline]
    pub fn qg_rho_rho(&self) -> f64 {
        let c = self.c();
        -self.b_rho * self.b_rho + c * c * dot3(&self.grad_rho, &self.grad_rho)
    }
    /// `exp(−3ρ) c⁻² p_;s/ϱ̄`, the prefactor shared by the entropy couplings.
    #[inline]
    fn k_ent(&self) -> f64 {
        let c = self.c();
        self.exp(-3.0) / (c * c) * self.ps()
    }
}

// Velocity wave equation

/// `−c² exp(2ρ) Cⁱ`.
pub fn v_wave_curl_mod(d: &CellData) -> Vec3 {
    let c = d.c();
    scale(-c * c * d.exp(2.0), d.curl_mod)
}

/// `𝔔_(v)ⁱ = −{1 + c⁻¹c_;ρ} (g⁻¹)^{αβ}∂_αρ∂_βvⁱ`.
pub fn q_v(d: &CellData) -> Vec3 {
    let f = -(1.0 + d.eos.c_rho / d.c());
    std::array::from_fn(|i| f * d.qg_rho_v(i))
}

/// `2exp(ρ) ε_{iab}(Bvᵃ)Ωᵇ`.
pub fn l_v_vorticity(d: &CellData) -> Vec3 {
    scale(2.0 * d.exp(1.0), cross3(&d.b_v, &d.omega))
}

/// `−(p_;s/ϱ̄) ε_{iab} Ωᵃ Sᵇ`.
pub fn l_v_vorticity_entropy(d: &CellData) -> Vec3 {
    scale(-d.ps(), cross3(&d.omega, &d.ent_grad))
}

/// `−½ exp(−ρ)(p_;ρ;s/ϱ̄) Sᵃ∂_avⁱ`.
pub fn l_v_entropy_shear_mixed(d: &CellData) -> Vec3 {
    let f = -0.5 * d.exp(-1.0) * d.prho_s();
    std::array::from_fn(|i| f * d.s_grad_v(i))
}

/// `−2exp(−ρ) c⁻¹c_;ρ (p_;s/ϱ̄)(Bρ)Sⁱ`.
pub fn l_v_compression_speed(d: &CellData) -> Vec3 {
    scale(-2.0 * d.exp(-1.0) * d.eos.c_rho / d.c() * d.ps() * d.b_rho, d.ent_grad)
}

/// `exp(−ρ)(p_;s;ρ/ϱ̄)(Bρ)Sⁱ`.
pub fn l_v_compression_mixed(d: &CellData) -> Vec3 {
    scale(d.exp(-1.0) * d.ps_rho() * d.b_rho, d.ent_grad)
}

/// First displayed line of `𝔏_(v)`.
pub fn l_v_line1(d: &CellData) -> Vec3 {
    add(l_v_vorticity(d), l_v_vorticity_entropy(d))
}
/// Second line of `𝔏_(v)`. A companion `−exp(−ρ)(p_;s/ϱ̄)Sᵃ∂_avⁱ` product
/// cancels exactly against the `Sᵃ∂_avⁱ` part of `C` and does not appear.
pub fn l_v_line2(d: &CellData) -> Vec3 {
    l_v_entropy_shear_mixed(d)
}
/// Third displayed line of `𝔏_(v)`.
pub fn l_v_line3(d: &CellData) -> Vec3 {
    add(l_v_compression_speed(d), l_v_compression_mixed(d))
}

pub fn l_v(d: &CellData) -> Vec3 {
    add(add(l_v_line1(d), l_v_line2(d)), l_v_line3(d))
}

// Density wave equation

/// `−exp(ρ)(p_;s/ϱ̄) D`.
pub fn rho_wave_div_mod(d: &CellData) -> Vec3 {
    scalar(-d.exp(1.0) * d.ps() * d.div_mod)
}

/// `−3c⁻¹c_;ρ (g⁻¹)^{αβ}∂_αρ∂_βρ`.
pub fn q_rho_metric(d: &CellData) -> Vec3 {
    scalar(-3.0 * d.eos.c_rho / d.c() * d.qg_rho_rho())
}

/// `(∂_avᵃ)(∂_bvᵇ) − (∂_avᵇ)∂_bvᵃ`.
pub fn q_rho_velocity(d: &CellData) -> Vec3 {
    let dv = d.div_v();
    scalar(dv * dv - d.dv_dv())
}

pub fn q_rho(d: &CellData) -> Vec3 {
    add(q_rho_metric(d), q_rho_velocity(d))
}

/// `−(5/2)exp(−ρ)(p_;s;ρ/ϱ̄) Sᵃ∂_aρ`: twice from `BBρ`, one half from the
/// `−c c_;s Sᵃ∂_aρ` term of `□_g`.
pub fn l_rho_gradient(d: &CellData) -> Vec3 {
    scalar(-2.5 * d.exp(-1.0) * d.ps_rho() * d.s_grad_rho())
}

/// `−exp(−ρ)(p_;s;s/ϱ̄) δ_{ab}SᵃSᵇ`.
pub fn l_rho_entropy(d: &CellData) -> Vec3 {
    scalar(-d.exp(-1.0) * d.ps_s() * dot3(&d.ent_grad, &d.ent_grad))
}

pub fn l_rho(d: &CellData) -> Vec3 {
    add(l_rho_gradient(d), l_rho_entropy(d))
}

// Transport equations

/// `Ωᵃ∂_avⁱ`.
pub fn l_omega_stretch(d: &CellData) -> Vec3 {
    std::array::from_fn(|i| dot3(&d.omega, &d.dv[i]))
}

/// `−exp(−2ρ)c⁻²(p_;s/ϱ̄) ε_{iab}(Bvᵃ)Sᵇ`.
pub fn l_omega_baroclinic(d: &CellData) -> Vec3 {
    let c = d.c();
    scale(-d.exp(-2.0) / (c * c) * d.ps(), cross3(&d.b_v, &d.ent_grad))
}

pub fn l_omega(d: &CellData) -> Vec3 {
    add(l_omega_stretch(d), l_omega_baroclinic(d))
}

/// `−Sᵃ∂_avⁱ`.
pub fn l_ent_grad_shear(d: &CellData) -> Vec3 {
    std::array::from_fn(|i| -d.s_grad_v(i))
}

/// `ε_{iab} exp(ρ) Ωᵃ Sᵇ`.
pub fn l_ent_grad_vorticity(d: &CellData) -> Vec3 {
    scale(d.exp(1.0), cross3(&d.omega, &d.ent_grad))
}

pub fn l_ent_grad(d: &CellData) -> Vec3 {
    add(l_ent_grad_shear(d), l_ent_grad_vorticity(d))
}

/// `𝔏_(∇·Ω) = −Ωᵃ∂_aρ`.
pub fn l_div_omega(d: &CellData) -> Vec3 {
    scalar(-dot3(&d.omega, &d.grad_rho))
}

// Transport of C

/// `−2δ_{jk}ε_{iab} exp(−ρ)(∂_avʲ)∂_bΩᵏ`.
pub fn bc_line1_cross(d: &CellData) -> Vec3 {
    let e = d.exp(-1.0);
    std::array::from_fn(|i| {
        let mut s = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let eps = levi_civita(i, a, b);
                if eps == 0.0 {
                    continue;
                }
                for j in 0..3 {
                    s += eps * d.dv[j][a] * d.d_omega[j][b];
                }
            }
        }
        -2.0 * e * s
    })
}

/// `ε_{ajk} exp(−ρ)(∂_avⁱ)∂_jΩᵏ`.
pub fn bc_line1_curl(d: &CellData) -> Vec3 {
    let e = d.exp(-1.0);
    let mut curl = [0.0; 3];
    for (a, ca) in curl.iter_mut().enumerate() {
        for j in 0..3 {
            for k in 0..3 {
                *ca += levi_civita(a, j, k) * d.d_omega[k][j];
            }
        }
    }
    std::array::from_fn(|i| e * dot3(&d.dv[i], &curl))
}

/// First displayed line of the `BCⁱ` equation.
pub fn bc_line1(d: &CellData) -> Vec3 {
    add(bc_line1_cross(d), bc_line1_curl(d))
}

/// `exp(−3ρ)c⁻²(p_;s/ϱ̄){(BSᵃ)∂_avⁱ − (Bvⁱ)∂_aSᵃ}`.
pub fn bc_line2(d: &CellData) -> Vec3 {
    let k = d.k_ent();
    let div_s = d.div_ent_grad();
    std::array::from_fn(|i| k * (dot3(&d.b_ent_grad, &d.dv[i]) - d.b_v[i] * div_s))
}

/// `exp(−3ρ)c⁻²(p_;s/ϱ̄){(Bvᵃ)∂_aSⁱ − (∂_avᵃ)BSⁱ}`.
pub fn bc_line3(d: &CellData) -> Vec3 {
    let k = d.k_ent();
    let dv = d.div_v();
    std::array::from_fn(|i| k * (dot3(&d.b_v, &d.d_ent_grad[i]) - dv * d.b_ent_grad[i]))
}

/// `{(Sᵃ∂_aρ)Bvⁱ − (Bρ)Sᵃ∂_avⁱ}`, shared by several lines of `𝔔_(C)`.
fn brace_srho_bv(d: &CellData) -> Vec3 {
    let sr = d.s_grad_rho();
    std::array::from_fn(|i| sr * d.b_v[i] - d.b_rho * d.s_grad_v(i))
}

/// `{(∂_avᵃ)Bρ − (Bvᵃ)∂_aρ}`.
fn brace_div_brho(d: &CellData) -> f64 {
    d.div_v() * d.b_rho - dot3(&d.b_v, &d.grad_rho)
}

/// `𝔔_(C)` line 1: `exp(−3ρ)c⁻²(p_;s/ϱ̄)Sⁱ{(∂_avᵇ)∂_bvᵃ − (∂_avᵃ)∂_bvᵇ}`.
pub fn q_c_line1(d: &CellData) -> Vec3 {
    let dv = d.div_v();
    scale(d.k_ent() * (d.dv_dv() - dv * dv), d.ent_grad)
}

/// `𝔔_(C)` line 2: `exp(−3ρ)c⁻²(p_;s/ϱ̄){(∂_avᵃ)Sᵇ∂_bvⁱ − (Sᵃ∂_avᵇ)∂_bvⁱ}`.
pub fn q_c_line2(d: &CellData) -> Vec3 {
    let k = d.k_ent();
    let dv = d.div_v();
    let s_dv: Vec3 = std::array::from_fn(|b| d.s_grad_v(b));
    std::array::from_fn(|i| k * (dv * d.s_grad_v(i) - dot3(&s_dv, &d.dv[i])))
}

/// `𝔔_(C)` line 3: `2exp(−3ρ)c⁻²(p_;s/ϱ̄){(Sᵃ∂_aρ)Bvⁱ − (Bρ)Sᵃ∂_avⁱ}`.
pub fn q_c_line3(d: &CellData) -> Vec3 {
    scale(2.0 * d.k_ent(), brace_srho_bv(d))
}

/// `𝔔_(C)` line 4: `2exp(−3ρ)c⁻³c_;ρ(p_;s/ϱ̄){(Sᵃ∂_aρ)Bvⁱ − (Bρ)Sᵃ∂_avⁱ}`.
pub fn q_c_line4(d: &CellData) -> Vec3 {
    let c = d.c();
    scale(2.0 * d.exp(-3.0) / (c * c * c) * d.eos.c_rho * d.ps(), brace_srho_bv(d))
}

/// `𝔔_(C)` line 5: `exp(−3ρ)c⁻²(p_;s;ρ/ϱ̄){(Bρ)Sᵃ∂_avⁱ − (Sᵃ∂_aρ)Bvⁱ}`.
pub fn q_c_line5(d: &CellData) -> Vec3 {
    let c = d.c();
    scale(-d.exp(-3.0) / (c * c) * d.ps_rho(), brace_srho_bv(d))
}

/// `𝔔_(C)` line 6: `exp(−3ρ)c⁻²(p_;s;ρ/ϱ̄)Sⁱ{(Bvᵃ)∂_aρ − (∂_avᵃ)Bρ}`.
pub fn q_c_line6(d: &CellData) -> Vec3 {
    let c = d.c();
    scale(-d.exp(-3.0) / (c * c) * d.ps_rho() * brace_div_brho(d), d.ent_grad)
}

/// `𝔔_(C)` line 7: `2exp(−3ρ)c⁻²(p_;s/ϱ̄)Sⁱ{(∂_avᵃ)Bρ − (Bvᵃ)∂_aρ}`.
pub fn q_c_line7(d: &CellData) -> Vec3 {
    scale(2.0 * d.k_ent() * brace_div_brho(d), d.ent_grad)
}

/// `𝔔_(C)` line 8: `2exp(−3ρ)c⁻³c_;ρ(p_;s/ϱ̄)Sⁱ{(∂_avᵃ)Bρ − (Bvᵃ)∂_aρ}`.
pub fn q_c_line8(d: &CellData) -> Vec3 {
    let c = d.c();
    scale(
        2.0 * d.exp(-3.0) / (c * c * c) * d.eos.c_rho * d.ps() * brace_div_brho(d),
        d.ent_grad,
    )
}

pub fn q_c(d: &CellData) -> Vec3 {
    [
        q_c_line1, q_c_line2, q_c_line3, q_c_line4, q_c_line5, q_c_line6, q_c_line7, q_c_line8,
    ]
    .iter()
    .fold([0.0; 3], |acc, f| add(acc, f(d)))
}

/// `2exp(−3ρ)c⁻³c_;s(p_;s/ϱ̄)(Bvⁱ)δ_{ab}SᵃSᵇ`.
pub fn l_c_speed_a(d: &CellData) -> Vec3 {
    let c = d.c();
    let f = 2.0 * d.exp(-3.0) / (c * c * c) * d.eos.c_s * d.ps();
    scale(f * dot3(&d.ent_grad, &d.ent_grad), d.b_v)
}

/// `−2exp(−3ρ)c⁻³c_;s(p_;s/ϱ̄)δ_{ab}Sᵃ(Bvᵇ)Sⁱ`.
pub fn l_c_speed_b(d: &CellData) -> Vec3 {
    let c = d.c();
    let f = -2.0 * d.exp(-3.0) / (c * c * c) * d.eos.c_s * d.ps();
    scale(f * dot3(&d.ent_grad, &d.b_v), d.ent_grad)
}

/// `−exp(−3ρ)c⁻²(p_;s;s/ϱ̄)(Bvⁱ)δ_{ab}SᵃSᵇ`. Vanishes together with
/// `l_c_speed_a` for the polytropic law, where `2c⁻¹c_;s p_;s = p_;s;s`.
pub fn l_c_second_a(d: &CellData) -> Vec3 {
    let c = d.c();
    let f = -d.exp(-3.0) / (c * c) * d.ps_s();
    scale(f * dot3(&d.ent_grad, &d.ent_grad), d.b_v)
}

/// `exp(−3ρ)c⁻²(p_;s;s/ϱ̄)δ_{ab}(Bvᵃ)SᵇSⁱ`.
pub fn l_c_second_b(d: &CellData) -> Vec3 {
    let c = d.c();
    let f = d.exp(-3.0) / (c * c) * d.ps_s();
    scale(f * dot3(&d.b_v, &d.ent_grad), d.ent_grad)
}

pub fn l_c_line1(d: &CellData) -> Vec3 {
    add(l_c_speed_a(d), l_c_speed_b(d))
}
pub fn l_c_line2(d: &CellData) -> Vec3 {
    add(l_c_second_a(d), l_c_second_b(d))
}
pub fn l_c(d: &CellData) -> Vec3 {
    add(l_c_line1(d), l_c_line2(d))
}

// Transport of D

/// `2exp(−2ρ){(∂_avᵃ)∂_bSᵇ − (∂_avᵇ)∂_bSᵃ}`.
pub fn bd_velocity_entropy(d: &CellData) -> Vec3 {
    let mut cross = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            cross += d.dv[b][a] * d.d_ent_grad[a][b];
        }
    }
    scalar(2.0 * d.exp(-2.0) * (d.div_v() * d.div_ent_grad() - cross))
}

/// `exp(−ρ)δ_{ab}(∇×Ω)ᵃSᵇ`.
pub fn bd_curl_entropy(d: &CellData) -> Vec3 {
    scalar(d.exp(-1.0) * dot3(&d.curl_omega, &d.ent_grad))
}

/// `𝔔_(D) = 2exp(−2ρ){(Sᵃ∂_avᵇ)∂_bρ − (∂_avᵃ)Sᵇ∂_bρ}`.
pub fn q_d(d: &CellData) -> Vec3 {
    let mut sdv_grad = 0.0;
    for b in 0..3 {
        sdv_grad += d.s_grad_v(b) * d.grad_rho[b];
    }
    scalar(2.0 * d.exp(-2.0) * (sdv_grad - d.div_v() * d.s_grad_rho()))
}

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}
