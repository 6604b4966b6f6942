//! Every right-hand-side term of the reformulated system with its structural
//! class and the variables it differentiates.

use serde::Serialize;

use super::terms::{self, CellData, Vec3};

/// The nine equations of the reformulated system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    /// `□_g vⁱ`
    VelocityWave,
    /// `□_g ρ`
    DensityWave,
    /// `BΩⁱ`
    VorticityTransport,
    /// `Bs`
    EntropyTransport,
    /// `BSⁱ`
    EntropyGradientTransport,
    /// `∇·Ω`
    VorticityDivergence,
    /// `BCⁱ`
    CurlModTransport,
    /// `BD`
    DivModTransport,
    /// `(∇×S)ⁱ`
    EntropyGradientCurl,
}

impl Equation {
    pub const ALL: [Equation; 9] = [
        Equation::VelocityWave,
        Equation::DensityWave,
        Equation::VorticityTransport,
        Equation::EntropyTransport,
        Equation::EntropyGradientTransport,
        Equation::VorticityDivergence,
        Equation::CurlModTransport,
        Equation::DivModTransport,
        Equation::EntropyGradientCurl,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Equation::VelocityWave => "velocity_wave",
            Equation::DensityWave => "density_wave",
            Equation::VorticityTransport => "vorticity_transport",
            Equation::EntropyTransport => "entropy_transport",
            Equation::EntropyGradientTransport => "entropy_gradient_transport",
            Equation::VorticityDivergence => "vorticity_divergence",
            Equation::CurlModTransport => "curl_mod_transport",
            Equation::DivModTransport => "div_mod_transport",
            Equation::EntropyGradientCurl => "entropy_gradient_curl",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.id() == id)
    }

    pub fn is_vector(self) -> bool {
        matches!(
            self,
            Equation::VelocityWave
                | Equation::VorticityTransport
                | Equation::EntropyGradientTransport
                | Equation::CurlModTransport
                | Equation::EntropyGradientCurl
        )
    }

    /// Whether the equation involves the entropy (rows that vanish identically
    /// for isentropic flow).
    pub fn is_entropy_equation(self) -> bool {
        matches!(
            self,
            Equation::EntropyTransport
                | Equation::EntropyGradientTransport
                | Equation::DivModTransport
                | Equation::EntropyGradientCurl
        )
    }
}

/// Structural class of an inhomogeneous term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TermClass {
    /// `f(V)` vanishing when `S = Ω ≡ 0`.
    I,
    /// `f(V)·∂V`.
    Ii,
    /// `f(V)` times a standard null form.
    Iii,
}

/// Which named source field a term contributes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceGroup {
    /// Products written out directly in the equation (outside 𝔔 and 𝔏).
    Principal,
    QV,
    QRho,
    QC,
    QD,
    LV,
    LRho,
    LOmega,
    LEntGrad,
    LDivOmega,
    LC,
}

#[derive(Clone, Serialize)]
pub struct TermSpec {
    pub id: &'static str,
    pub equation: Equation,
    pub class: TermClass,
    pub group: SourceGroup,
    /// Unknowns appearing differentiated, comma separated.
    pub differentiates: &'static str,
    /// Expected growth exponent of the term's response to a wavenumber-`k`
    /// perturbation of `v` or `ρ`.
    pub frequency_exponent: u8,
    /// Whether the term carries a factor of `p_;s` or its derivatives.
    pub entropy_coupled: bool,
    #[serde(skip)]
    pub eval: fn(&CellData) -> Vec3,
}

impl std::fmt::Debug for TermSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TermSpec")
            .field("id", &self.id)
            .field("equation", &self.equation)
            .field("class", &self.class)
            .finish()
    }
}

macro_rules! term {
    ($id:literal, $eq:ident, $class:ident, $group:ident, $diff:literal, $ent:literal, $f:path) => {
        TermSpec {
            id: $id,
            equation: Equation::$eq,
            class: TermClass::$class,
            group: SourceGroup::$group,
            differentiates: $diff,
            frequency_exponent: if matches!(TermClass::$class, TermClass::I) { 0 } else { 1 },
            entropy_coupled: $ent,
            eval: $f,
        }
    };
}

/// The static catalog, in equation order.
pub fn term_catalog() -> Vec<TermSpec> {
    use terms::*;
    vec![
        term!("v_wave_curl_mod", VelocityWave, Ii, Principal, "omega,s", false, v_wave_curl_mod),
        term!("q_v", VelocityWave, Iii, QV, "rho,v", false, q_v),
        term!("l_v_vorticity", VelocityWave, Ii, LV, "v", false, l_v_vorticity),
        term!("l_v_vorticity_entropy", VelocityWave, I, LV, "", true, l_v_vorticity_entropy),
        term!("l_v_entropy_shear_mixed", VelocityWave, Ii, LV, "v", true, l_v_entropy_shear_mixed),
        term!("l_v_compression_speed", VelocityWave, Ii, LV, "rho", true, l_v_compression_speed),
        term!("l_v_compression_mixed", VelocityWave, Ii, LV, "rho", true, l_v_compression_mixed),
        term!("rho_wave_div_mod", DensityWave, Ii, Principal, "s,rho", true, rho_wave_div_mod),
        term!("q_rho_metric", DensityWave, Iii, QRho, "rho", false, q_rho_metric),
        term!("q_rho_velocity", DensityWave, Iii, QRho, "v", false, q_rho_velocity),
        term!("l_rho_gradient", DensityWave, Ii, LRho, "rho", true, l_rho_gradient),
        term!("l_rho_entropy", DensityWave, I, LRho, "", true, l_rho_entropy),
        term!("l_omega_stretch", VorticityTransport, Ii, LOmega, "v", false, l_omega_stretch),
        term!("l_omega_baroclinic", VorticityTransport, Ii, LOmega, "v", true, l_omega_baroclinic),
        term!("l_ent_grad_shear", EntropyGradientTransport, Ii, LEntGrad, "v", false, l_ent_grad_shear),
        term!("l_ent_grad_vorticity", EntropyGradientTransport, I, LEntGrad, "", false, l_ent_grad_vorticity),
        term!("l_div_omega", VorticityDivergence, Ii, LDivOmega, "rho", false, l_div_omega),
        term!("bc_line1_cross", CurlModTransport, Iii, Principal, "v,omega", false, bc_line1_cross),
        term!("bc_line1_curl", CurlModTransport, Iii, Principal, "v,omega", false, bc_line1_curl),
        term!("bc_line2", CurlModTransport, Iii, Principal, "v,S", true, bc_line2),
        term!("bc_line3", CurlModTransport, Iii, Principal, "v,S", true, bc_line3),
        term!("q_c_line1", CurlModTransport, Iii, QC, "v", true, q_c_line1),
        term!("q_c_line2", CurlModTransport, Iii, QC, "v", true, q_c_line2),
        term!("q_c_line3", CurlModTransport, Iii, QC, "rho,v", true, q_c_line3),
        term!("q_c_line4", CurlModTransport, Iii, QC, "rho,v", true, q_c_line4),
        term!("q_c_line5", CurlModTransport, Iii, QC, "rho,v", true, q_c_line5),
        term!("q_c_line6", CurlModTransport, Iii, QC, "rho,v", true, q_c_line6),
        term!("q_c_line7", CurlModTransport, Iii, QC, "rho,v", true, q_c_line7),
        term!("q_c_line8", CurlModTransport, Iii, QC, "rho,v", true, q_c_line8),
        term!("l_c_speed_a", CurlModTransport, Ii, LC, "v", true, l_c_speed_a),
        term!("l_c_speed_b", CurlModTransport, Ii, LC, "v", true, l_c_speed_b),
        term!("l_c_second_a", CurlModTransport, Ii, LC, "v", true, l_c_second_a),
        term!("l_c_second_b", CurlModTransport, Ii, LC, "v", true, l_c_second_b),
        term!("bd_velocity_entropy", DivModTransport, Iii, Principal, "v,S", false, bd_velocity_entropy),
        term!("bd_curl_entropy", DivModTransport, Ii, Principal, "omega", false, bd_curl_entropy),
        term!("q_d", DivModTransport, Iii, QD, "rho,v", false, q_d),
    ]
}

/// Sum of the catalog terms belonging to `equation`.
pub fn equation_rhs(catalog: &[TermSpec], equation: Equation, d: &CellData) -> Vec3 {
    catalog
        .iter()
        .filter(|t| t.equation == equation)
        .fold([0.0; 3], |acc, t| terms::add(acc, (t.eval)(d)))
}

/// Sum of the catalog terms in one source group.
pub fn group_sum(catalog: &[TermSpec], group: SourceGroup, d: &CellData) -> Vec3 {
    catalog
        .iter()
        .filter(|t| t.group == group)
        .fold([0.0; 3], |acc, t| terms::add(acc, (t.eval)(d)))
}
