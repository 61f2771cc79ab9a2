//! Numeric constants appearing in the closed-form expressions.
//!
//! Every formula that the validation battery checks reads its constants from
//! a [`Coefficients`] value instead of literals, so a single coefficient can
//! be perturbed and the battery shown to notice.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    /// δ₁ weight of r_s/r_a.
    pub delta1_sender: f64,
    /// δ₁ weight of r_s/r_b (enters with a minus sign).
    pub delta1_receiver: f64,
    /// δ₂ weight of (r_s/r_a)².
    pub delta2_sender_sq: f64,
    /// δ₂ weight of r_s²/(r_a r_b) (enters with a minus sign).
    pub delta2_mixed: f64,
    /// δ₂ weight of (r_s/r_b)² (enters with a minus sign).
    pub delta2_receiver_sq: f64,
    /// Close-separation δ₁ weight of r_s/r_a (enters with a minus sign).
    pub near_delta1: f64,
    /// Close-separation δ₂ weight of r_s L / r_a².
    pub near_separation: f64,
    /// Close-separation δ₂ weight of (r_s/r_a)² (enters with a minus sign).
    pub near_sender_sq: f64,
    /// The 2π inside the comb amplitude ((1+σ̃²)/(2π))^(1/4).
    pub comb_norm_two_pi: f64,
    /// The 2 inside the Gaussian prefactor √(2χ²/(1+χ⁴)).
    pub gauss_prefactor: f64,
    /// The 1/4 in the shift envelope exp[−z̄²/(4(χ⁴+1))].
    pub gauss_shift: f64,
    /// Weight of the linear-phase penalty (χ²−1)²φ̃²/(χ⁴+1).
    pub gauss_linear_phase: f64,
    /// The 16 in ξ = 1 + 16φ̃⁴(χ⁴−1)²/(χ⁴+1)².
    pub quad_xi: f64,
    /// Power of ξ in the quadratic-phase prefactor ξ^(−1/4).
    pub quad_xi_power: f64,
    /// The 4 in the z̄-independent exponent 4(χ²−1)²φ̃⁴z₀²/((χ⁴+1)ξ).
    pub quad_offset: f64,
    /// The 16 multiplying a₁ z̄ in the exponent.
    pub quad_a1: f64,
    /// The 16 in a₂ = (1+16φ̃⁴)/((χ⁴+1)ξ).
    pub quad_a2_phase: f64,
    /// The 1/4 multiplying a₂ z̄² in the exponent.
    pub quad_a2: f64,
    /// The 2 in the near-Earth linear-phase coefficient (1 + 2φ̃²).
    pub near_linear_phase: f64,
    /// The 16 in the near-Earth quadratic-phase coefficient.
    pub near_quad_phase: f64,
    /// The 8 in the near-Earth quadratic-phase offset term.
    pub near_quad_offset: f64,
    /// Rate in the coherent law exp[−(1−ReΛ)N].
    pub coherent_rate: f64,
    /// The 1/2 in the squeezed law (1 + (1−ReΛ)N/2).
    pub squeezed_real: f64,
    /// The 1/4 in the squeezed law (ImΛ)²N²/4.
    pub squeezed_imag: f64,
}

impl Coefficients {
    pub const EXACT: Coefficients = Coefficients {
        delta1_sender: 1.0 / 4.0,
        delta1_receiver: 3.0 / 8.0,
        delta2_sender_sq: 5.0 / 32.0,
        delta2_mixed: 3.0 / 32.0,
        delta2_receiver_sq: 27.0 / 128.0,
        near_delta1: 1.0 / 8.0,
        near_separation: 3.0 / 8.0,
        near_sender_sq: 19.0 / 128.0,
        comb_norm_two_pi: 2.0 * std::f64::consts::PI,
        gauss_prefactor: 2.0,
        gauss_shift: 1.0 / 4.0,
        gauss_linear_phase: 1.0,
        quad_xi: 16.0,
        quad_xi_power: 1.0 / 4.0,
        quad_offset: 4.0,
        quad_a1: 16.0,
        quad_a2_phase: 16.0,
        quad_a2: 1.0 / 4.0,
        near_linear_phase: 2.0,
        near_quad_phase: 16.0,
        near_quad_offset: 8.0,
        coherent_rate: 1.0,
        squeezed_real: 1.0 / 2.0,
        squeezed_imag: 1.0 / 4.0,
    };

    /// Names of every coefficient, in declaration order.
    pub const NAMES: [&'static str; 24] = [
        "delta1_sender",
        "delta1_receiver",
        "delta2_sender_sq",
        "delta2_mixed",
        "delta2_receiver_sq",
        "near_delta1",
        "near_separation",
        "near_sender_sq",
        "comb_norm_two_pi",
        "gauss_prefactor",
        "gauss_shift",
        "gauss_linear_phase",
        "quad_xi",
        "quad_xi_power",
        "quad_offset",
        "quad_a1",
        "quad_a2_phase",
        "quad_a2",
        "near_linear_phase",
        "near_quad_phase",
        "near_quad_offset",
        "coherent_rate",
        "squeezed_real",
        "squeezed_imag",
    ];

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "delta1_sender" => &mut self.delta1_sender,
            "delta1_receiver" => &mut self.delta1_receiver,
            "delta2_sender_sq" => &mut self.delta2_sender_sq,
            "delta2_mixed" => &mut self.delta2_mixed,
            "delta2_receiver_sq" => &mut self.delta2_receiver_sq,
            "near_delta1" => &mut self.near_delta1,
            "near_separation" => &mut self.near_separation,
            "near_sender_sq" => &mut self.near_sender_sq,
            "comb_norm_two_pi" => &mut self.comb_norm_two_pi,
            "gauss_prefactor" => &mut self.gauss_prefactor,
            "gauss_shift" => &mut self.gauss_shift,
            "gauss_linear_phase" => &mut self.gauss_linear_phase,
            "quad_xi" => &mut self.quad_xi,
            "quad_xi_power" => &mut self.quad_xi_power,
            "quad_offset" => &mut self.quad_offset,
            "quad_a1" => &mut self.quad_a1,
            "quad_a2_phase" => &mut self.quad_a2_phase,
            "quad_a2" => &mut self.quad_a2,
            "near_linear_phase" => &mut self.near_linear_phase,
            "near_quad_phase" => &mut self.near_quad_phase,
            "near_quad_offset" => &mut self.near_quad_offset,
            "coherent_rate" => &mut self.coherent_rate,
            "squeezed_real" => &mut self.squeezed_real,
            "squeezed_imag" => &mut self.squeezed_imag,
            _ => return None,
        })
    }

    /// Copy with one coefficient scaled by `1 + relative`. `None` for an unknown name.
    pub fn perturbed(&self, name: &str, relative: f64) -> Option<Coefficients> {
        let mut out = *self;
        let slot = out.slot(name)?;
        *slot *= 1.0 + relative;
        Some(out)
    }
}

impl Default for Coefficients {
    fn default() -> Self {
        Self::EXACT
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves_and_perturbs() {
        for name in Coefficients::NAMES {
            let p = Coefficients::EXACT.perturbed(name, 1e-3).expect(name);
            assert_ne!(p, Coefficients::EXACT, "{name}");
        }
        assert!(Coefficients::EXACT.perturbed("nope", 1e-3).is_none());
    }
}
