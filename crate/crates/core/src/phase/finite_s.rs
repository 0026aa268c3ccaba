//! Phase statistics in the (s+1)-dimensional truncated space, computed from
//! the explicit phase eigenbasis |φₘ⟩ = (s+1)^{−½} Σₙ e^{inφₘ}|n⟩ with
//! φₘ = φ₀ + 2πm/(s+1). Used to watch the s → ∞ limit converge.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::NumberBasisState;
use crate::error::{Error, Result};

pub const MAX_FINITE_S: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteSReport {
    pub s: usize,
    /// ⟨φ̂ − φ₀⟩
    pub mean: f64,
    /// Δφ²
    pub variance: f64,
    /// Σ_{n≤s} Pₙ before renormalizing the state to the truncated space.
    pub captured_mass: f64,
}

pub fn finite_s_operator_check(
    state: &NumberBasisState,
    offset_phi0: f64,
    s: usize,
) -> Result<FiniteSReport> {
    if s > MAX_FINITE_S {
        return Err(Error::DimensionTooLarge {
            s,
            max: MAX_FINITE_S,
        });
    }
    let dim = s + 1;
    let probs = state.photons().leading(dim);
    let captured_mass: f64 = probs.iter().sum();
    if captured_mass <= 0.0 {
        return Err(Error::InvalidInput(
            "state has no weight inside the truncated space".into(),
        ));
    }

    // e^{-2πi j/(s+1)} for j = 0..s; ⟨φₘ|n⟩ uses the entry (n·m) mod (s+1)
    let twiddle: Vec<Complex64> = (0..dim)
        .map(|j| Complex64::from_polar(1.0, -TAU * j as f64 / dim as f64))
        .collect();

    let probabilities: Vec<f64> = match state {
        NumberBasisState::Pure { phase, .. } => {
            let amps: Vec<Complex64> = probs
                .iter()
                .enumerate()
                .map(|(n, p)| {
                    let xi = phase.at(n).unwrap_or(0.0);
                    // fold e^{-inφ₀} into the amplitude
                    Complex64::from_polar((p / captured_mass).sqrt(), xi - n as f64 * offset_phi0)
                })
                .collect();
            (0..dim)
                .map(|m| {
                    let mut overlap = Complex64::new(0.0, 0.0);
                    for (n, a) in amps.iter().enumerate() {
                        overlap += twiddle[(n * m) % dim] * a;
                    }
                    overlap.norm_sqr() / dim as f64
                })
                .collect()
        }
        // a diagonal ρ gives ⟨φₘ|ρ|φₘ⟩ = Σ Pₙ/(s+1), the same for every m
        NumberBasisState::DiagonalMixed { .. } => vec![1.0 / dim as f64; dim],
    };

    let mut mean = 0.0;
    let mut second = 0.0;
    for (m, p) in probabilities.iter().enumerate() {
        let theta = TAU * m as f64 / dim as f64;
        mean += theta * p;
        second += theta * theta * p;
    }
    Ok(FiniteSReport {
        s,
        mean,
        variance: second - mean * mean,
        captured_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::state::CoherentSpec;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn two_dimensional_vacuum() {
        // |0⟩ projects equally onto φ = 0 and φ = π
        let r = finite_s_operator_check(&NumberBasisState::vacuum(), 0.0, 1).unwrap();
        assert_abs_diff_eq!(r.mean, PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.variance, PI * PI / 4.0, epsilon = 1e-14);
    }

    #[test]
    fn vacuum_approaches_uniform_variance() {
        let s = 200;
        let r = finite_s_operator_check(&NumberBasisState::vacuum(), 0.0, s).unwrap();
        // discrete uniform on s+1 points: (2π/(s+1))² ((s+1)² − 1)/12
        let d = (s + 1) as f64;
        let expected = (TAU / d).powi(2) * (d * d - 1.0) / 12.0;
        assert_abs_diff_eq!(r.variance, expected, epsilon = 1e-12);
        assert!((r.variance - PI * PI / 3.0).abs() < 1.0 / s as f64);
    }

    #[test]
    fn dimension_limit() {
        let err = finite_s_operator_check(&NumberBasisState::vacuum(), 0.0, 2001).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionTooLarge { s: 2001, max: 2000 }
        ));
    }

    #[test]
    fn offset_phase_only_enters_through_delta_xi() {
        let a = CoherentSpec::new(2.0, 1.5, 0.5).unwrap();
        let b = CoherentSpec::new(2.0, 1.0, 0.0).unwrap();
        let ra = finite_s_operator_check(&a.state(), a.offset_phi0(), 150).unwrap();
        let rb = finite_s_operator_check(&b.state(), b.offset_phi0(), 150).unwrap();
        assert_abs_diff_eq!(ra.mean, rb.mean, epsilon = 1e-12);
        assert_abs_diff_eq!(ra.variance, rb.variance, epsilon = 1e-12);
    }

    #[test]
    fn mixture_is_discrete_uniform() {
        let mixed = NumberBasisState::diagonal(vec![0.3, 0.7]).unwrap();
        let r = finite_s_operator_check(&mixed, 0.0, 1).unwrap();
        assert_abs_diff_eq!(r.variance, PI * PI / 4.0, epsilon = 1e-14);
    }
}
