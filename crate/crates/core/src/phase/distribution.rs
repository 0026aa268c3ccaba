use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::{reduce_angle, NumberBasisState, PhaseProfile, TruncationPolicy};
use crate::error::{Error, Result};
use crate::quadrature::romberg;

/// Values of the lag-series density in `[−NEGATIVE_FLOOR, 0)` are rounding
/// noise and are clamped to zero; anything lower is an error.
pub const NEGATIVE_FLOOR: f64 = 1e-12;

/// Absolute target for the Romberg moment integration.
pub const QUADRATURE_TOL: f64 = 1e-10;

const ROMBERG_MAX_LEVELS: usize = 14;

/// A computed series or integral together with a bound on what was left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue<T = f64> {
    pub value: T,
    /// Upper bound on the truncation remainder.
    pub tail_bound: f64,
    pub terms_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistributionKind {
    /// P(φ) = 1/2π; diagonal mixtures and the vacuum.
    Uniform,
    /// Built from a pure state's amplitudes.
    Pure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentMethod {
    /// Closed-form integrals of φᵏ against each Fourier mode.
    Fourier,
    /// Romberg-refined trapezoid on the density.
    Quadrature,
}

/// The phase distribution P(φ) on `[0, 2π)` of φ̂ − φ₀:
///
/// P(φ) = (1/2π) |Σₙ cₙ e^{in(φ − shift)}|².
#[derive(Debug, Clone)]
pub struct PhaseDistribution {
    kind: DistributionKind,
    coeffs: Vec<Complex64>,
    shift: f64,
    delta_xi: Option<f64>,
    tail_mass: f64,
    vacuum_probability: f64,
    lags: OnceLock<Vec<Complex64>>,
}

/// Build P(φ) for `state` measured from the off-set phase `offset_phi0`.
pub fn build_distribution(
    state: &NumberBasisState,
    offset_phi0: f64,
    policy: &TruncationPolicy,
) -> Result<PhaseDistribution> {
    if !offset_phi0.is_finite() {
        return Err(Error::InvalidInput("off-set phase must be finite".into()));
    }
    policy.validate()?;
    match state {
        NumberBasisState::DiagonalMixed { photons } => Ok(PhaseDistribution {
            kind: DistributionKind::Uniform,
            coeffs: vec![Complex64::new(1.0, 0.0)],
            shift: 0.0,
            delta_xi: None,
            tail_mass: 0.0,
            vacuum_probability: photons.vacuum_probability(),
            lags: OnceLock::new(),
        }),
        NumberBasisState::Pure { photons, phase } => {
            let truncated = photons.truncate(policy)?;
            let vacuum_probability = truncated.probs[0];
            let (coeffs, shift, delta_xi) = match phase {
                // ξ₀ drops out of |·|²; the slope becomes the shift δξ
                PhaseProfile::Linear { slope, .. } => {
                    let dxi = reduce_angle(slope - offset_phi0);
                    let c: Vec<Complex64> = truncated
                        .probs
                        .iter()
                        .map(|p| Complex64::new(p.sqrt(), 0.0))
                        .collect();
                    (c, dxi, Some(dxi))
                }
                PhaseProfile::PerLevel(xi) => {
                    if xi.len() < truncated.probs.len() {
                        return Err(Error::InvalidInput(format!(
                            "phase profile has {} entries, truncation needs {}",
                            xi.len(),
                            truncated.probs.len()
                        )));
                    }
                    let c: Vec<Complex64> = truncated
                        .probs
                        .iter()
                        .zip(xi)
                        .map(|(p, x)| Complex64::from_polar(p.sqrt(), -x))
                        .collect();
                    (c, reduce_angle(-offset_phi0), None)
                }
            };
            let kind = if coeffs.len() == 1 {
                DistributionKind::Uniform
            } else {
                DistributionKind::Pure
            };
            Ok(PhaseDistribution {
                kind,
                coeffs,
                shift,
                delta_xi,
                tail_mass: truncated.tail_mass,
                vacuum_probability,
                lags: OnceLock::new(),
            })
        }
    }
}

impl PhaseDistribution {
    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn is_uniform(&self) -> bool {
        self.kind == DistributionKind::Uniform
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// δξ for coherent-like states; `None` for per-level phase profiles and
    /// mixtures.
    pub fn delta_xi(&self) -> Option<f64> {
        self.delta_xi
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// P₀ of the underlying state.
    pub fn vacuum_probability(&self) -> f64 {
        self.vacuum_probability
    }

    /// Horner evaluation of P(φ).
    pub fn eval_density(&self, phi: f64) -> f64 {
        if self.is_uniform() {
            return 1.0 / TAU;
        }
        let z = Complex64::from_polar(1.0, phi - self.shift);
        let amp = self
            .coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
        amp.norm_sqr() / TAU
    }

    /// Fourier coefficients `L_k`, k = 0..=n_max, with
    /// P(φ) = (1/2π) Σ_{|k|≤n_max} L_k e^{ikφ} and L_{−k} = conj(L_k).
    pub fn lags(&self) -> &[Complex64] {
        self.lags.get_or_init(|| {
            let c = &self.coeffs;
            (0..c.len())
                .map(|k| {
                    let r: Complex64 = c[k..].iter().zip(c).map(|(a, b)| a * b.conj()).sum();
                    r * Complex64::from_polar(1.0, -(k as f64) * self.shift)
                })
                .collect()
        })
    }

    /// P(φ) summed from the lag series, with the negative-value floor applied.
    pub fn eval_density_from_lags(&self, phi: f64) -> Result<f64> {
        let lags = self.lags();
        let mut s = lags[0].re;
        for (k, l) in lags.iter().enumerate().skip(1) {
            s += 2.0 * (l * Complex64::from_polar(1.0, k as f64 * phi)).re;
        }
        let value = s / TAU;
        if value >= 0.0 {
            Ok(value)
        } else if value >= -NEGATIVE_FLOOR {
            Ok(0.0)
        } else {
            Err(Error::NegativeDensity { phi, value })
        }
    }

    /// ⟨e^{i(φ̂−φ₀)}⟩ = L_{−1}.
    pub fn mean_exp_phase(&self) -> Complex64 {
        self.lags()
            .get(1)
            .map_or(Complex64::new(0.0, 0.0), |l| l.conj())
    }

    /// Bound on how far the truncated distribution's moments of |φ|ᵏ ≤ (2π)ᵏ
    /// can move: the L¹ distance between the densities is at most twice the
    /// norm distance between the exact and truncated-renormalized states.
    fn truncation_bound(&self, k: u32) -> f64 {
        let tau = self.tail_mass;
        let dist = (2.0 * tau / (1.0 + (1.0 - tau).sqrt())).sqrt();
        TAU.powi(k as i32) * 2.0 * dist
    }

    /// ∫₀^{2π} φᵏ P(φ) dφ for k ∈ {1, 2}.
    pub fn moment(&self, k: u32, method: MomentMethod) -> Result<SeriesValue> {
        if !(k == 1 || k == 2) {
            return Err(Error::InvalidInput(format!(
                "moment order must be 1 or 2, got {k}"
            )));
        }
        match method {
            MomentMethod::Fourier => Ok(self.moment_fourier(k)),
            MomentMethod::Quadrature => self.moment_quadrature(k),
        }
    }

    fn moment_fourier(&self, k: u32) -> SeriesValue {
        let lags = self.lags();
        let l0 = lags[0].re;
        // ∫ φ e^{ijφ} = 2π/(ij);  ∫ φ² e^{ijφ} = 4π²/(ij) + 4π/j²  (j ≠ 0)
        let value = if k == 1 {
            let s: f64 = lags
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .map(|(j, l)| l.im / j as f64)
                .sum();
            PI * l0 + 2.0 * s
        } else {
            let s: f64 = lags
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .map(|(j, l)| {
                    let j = j as f64;
                    4.0 * PI * l.im / j + 4.0 * l.re / (j * j)
                })
                .sum();
            4.0 * PI * PI / 3.0 * l0 + s
        };
        SeriesValue {
            value,
            tail_bound: self.truncation_bound(k) + 64.0 * f64::EPSILON * lags.len() as f64,
            terms_used: lags.len(),
        }
    }

    fn moment_quadrature(&self, k: u32) -> Result<SeriesValue> {
        let power = k as i32;
        let q = romberg(
            |phi| phi.powi(power) * self.eval_density(phi),
            0.0,
            TAU,
            QUADRATURE_TOL,
            16 * (self.n_max() + 1),
            ROMBERG_MAX_LEVELS,
        )?;
        Ok(SeriesValue {
            value: q.value,
            tail_bound: self.truncation_bound(k) + q.error_estimate,
            terms_used: q.evaluations,
        })
    }

    /// ⟨φ̂ − φ₀⟩ and Δφ² from the Fourier route.
    pub fn mean_and_variance(&self) -> (f64, f64) {
        let m1 = self.moment_fourier(1).value;
        let m2 = self.moment_fourier(2).value;
        (m1, (m2 - m1 * m1).max(0.0))
    }
}

/// ⟨φ̂ − φ₀⟩ for a pure coherent-like state.
pub fn mean_relative_phase(
    state: &NumberBasisState,
    offset_phi0: f64,
    policy: &TruncationPolicy,
) -> Result<f64> {
    if !state.is_pure() {
        return Err(Error::InvalidInput(
            "mean relative phase is defined here for pure states".into(),
        ));
    }
    let dist = build_distribution(state, offset_phi0, policy)?;
    Ok(dist.moment(1, MomentMethod::Fourier)?.value)
}
