use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::poisson_pmf;

/// Tolerance on Σ Pₙ = 1 for explicitly supplied photon-number distributions.
pub const INPUT_NORM_TOL: f64 = 1e-8;

/// Reduce an angle into `[0, 2π)`.
pub fn reduce_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A coherent state |α⟩ with n̄ = |α|², α = |α|e^{iξ}, measured against a
/// phase window starting at the off-set phase φ₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentSpec {
    mean_photons: f64,
    phase_xi: f64,
    offset_phi0: f64,
}

impl CoherentSpec {
    pub fn new(mean_photons: f64, phase_xi: f64, offset_phi0: f64) -> Result<Self> {
        if !(mean_photons.is_finite() && mean_photons >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "mean photon number must be finite and >= 0, got {mean_photons}"
            )));
        }
        if !phase_xi.is_finite() || !offset_phi0.is_finite() {
            return Err(Error::InvalidInput("phases must be finite".into()));
        }
        Ok(Self {
            mean_photons,
            phase_xi,
            offset_phi0,
        })
    }

    /// Coherent state with off-set phase zero, so that ξ = δξ.
    pub fn with_delta_xi(mean_photons: f64, delta_xi: f64) -> Result<Self> {
        Self::new(mean_photons, delta_xi, 0.0)
    }

    pub fn mean_photons(&self) -> f64 {
        self.mean_photons
    }

    pub fn phase_xi(&self) -> f64 {
        self.phase_xi
    }

    pub fn offset_phi0(&self) -> f64 {
        self.offset_phi0
    }

    /// δξ = ξ − φ₀ reduced into `[0, 2π)`.
    pub fn delta_xi(&self) -> f64 {
        reduce_angle(self.phase_xi - self.offset_phi0)
    }

    /// The number-basis form: Poissonian weights with ξ(n) = nξ.
    pub fn state(&self) -> NumberBasisState {
        NumberBasisState::Pure {
            photons: PhotonNumbers::Poisson {
                mean: self.mean_photons,
            },
            phase: PhaseProfile::Linear {
                slope: self.phase_xi,
                offset: 0.0,
            },
        }
    }
}

/// Photon-number probabilities Pₙ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PhotonNumbers {
    Poisson { mean: f64 },
    Explicit(Vec<f64>),
}

impl PhotonNumbers {
    pub fn explicit(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidInput(
                "empty photon-number distribution".into(),
            ));
        }
        if let Some((n, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p >= 0.0))
        {
            return Err(Error::InvalidInput(format!(
                "P_{n} = {p} is not a nonnegative number"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > INPUT_NORM_TOL {
            return Err(Error::InvalidInput(format!(
                "photon-number probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self::Explicit(probs))
    }

    pub fn poisson(mean: f64) -> Result<Self> {
        if !(mean.is_finite() && mean >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "Poisson mean must be finite and >= 0, got {mean}"
            )));
        }
        Ok(Self::Poisson { mean })
    }

    /// Cut the distribution where the discarded amplitude sum Σ√Pₙ drops
    /// below `policy.tail_mass_tol`, then renormalize what is kept.
    pub fn truncate(&self, policy: &TruncationPolicy) -> Result<Truncated> {
        policy.validate()?;
        match self {
            PhotonNumbers::Poisson { mean } => truncate_poisson(*mean, policy),
            PhotonNumbers::Explicit(probs) => truncate_explicit(probs, policy),
        }
    }

    /// The first `count` probabilities without tail control or renormalization.
    pub fn leading(&self, count: usize) -> Vec<f64> {
        match self {
            PhotonNumbers::Poisson { mean } => {
                (0..count as u64).map(|n| poisson_pmf(n, *mean)).collect()
            }
            PhotonNumbers::Explicit(probs) => {
                let mut v: Vec<f64> = probs.iter().copied().take(count).collect();
                v.resize(count, 0.0);
                v
            }
        }
    }

    pub fn vacuum_probability(&self) -> f64 {
        match self {
            PhotonNumbers::Poisson { mean } => (-mean).exp(),
            PhotonNumbers::Explicit(probs) => probs[0],
        }
    }

    /// ⟨N̂⟩ and ΔN². Exact for Poisson; from the stored values otherwise.
    pub fn number_moments(&self) -> (f64, f64) {
        match self {
            PhotonNumbers::Poisson { mean } => (*mean, *mean),
            PhotonNumbers::Explicit(probs) => {
                let mean: f64 = probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
                let var: f64 = probs
                    .iter()
                    .enumerate()
                    .map(|(n, p)| (n as f64 - mean).powi(2) * p)
                    .sum();
                (mean, var)
            }
        }
    }
}

fn truncate_poisson(mean: f64, policy: &TruncationPolicy) -> Result<Truncated> {
    let mut probs = Vec::new();
    let mut n: u64 = 0;
    loop {
        probs.push(poisson_pmf(n, mean));
        // For j > n the ratio √(P_{j+1}/P_j) = √(mean/(j+1)) is at most
        // √(mean/(n+2)), so the amplitude tail is dominated by a geometric series.
        let ratio = (mean / (n as f64 + 2.0)).sqrt();
        let tail = if ratio < 1.0 {
            poisson_pmf(n + 1, mean).sqrt() / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        if tail < policy.tail_mass_tol {
            return Ok(Truncated::renormalized(probs, tail));
        }
        n += 1;
        if probs.len() >= policy.hard_max_terms {
            return Err(Error::Truncation {
                terms: probs.len(),
                tail_bound: tail,
                tolerance: policy.tail_mass_tol,
            });
        }
    }
}

fn truncate_explicit(probs: &[f64], policy: &TruncationPolicy) -> Result<Truncated> {
    // smallest cutoff whose suffix amplitude sum is below tolerance
    let mut suffix = 0.0;
    let mut keep = probs.len();
    for (i, p) in probs.iter().enumerate().rev() {
        if suffix + p.sqrt() >= policy.tail_mass_tol {
            break;
        }
        suffix += p.sqrt();
        keep = i;
    }
    let keep = keep.max(1);
    if keep > policy.hard_max_terms {
        let tail: f64 = probs[policy.hard_max_terms..]
            .iter()
            .map(|p| p.sqrt())
            .sum();
        return Err(Error::Truncation {
            terms: policy.hard_max_terms,
            tail_bound: tail,
            tolerance: policy.tail_mass_tol,
        });
    }
    let amplitude: f64 = probs[keep..].iter().map(|p| p.sqrt()).sum();
    Ok(Truncated::renormalized(probs[..keep].to_vec(), amplitude))
}

/// A truncated, renormalized photon-number distribution.
///
/// The cutoff is placed where the discarded amplitude sum Σ_{n>n_max} √Pₙ
/// falls below the policy tolerance. This bounds the pointwise error of the
/// phase density, and implies the discarded mass Σ_{n>n_max} Pₙ is below the
/// tolerance as well.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncated {
    pub probs: Vec<f64>,
    /// Upper bound on Σ_{n>n_max} √Pₙ.
    pub tail_amplitude: f64,
    /// Upper bound on the discarded probability mass.
    pub tail_mass: f64,
}

impl Truncated {
    fn renormalized(mut probs: Vec<f64>, tail_amplitude: f64) -> Self {
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        Self {
            probs,
            tail_amplitude,
            tail_mass: tail_amplitude * tail_amplitude,
        }
    }

    /// Highest retained photon number.
    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }
}

/// The phase function ξ(n) of a pure state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PhaseProfile {
    /// ξ(n) = n·slope + offset, the coherent-like family.
    Linear {
        slope: f64,
        offset: f64,
    },
    PerLevel(Vec<f64>),
}

impl PhaseProfile {
    pub fn at(&self, n: usize) -> Option<f64> {
        match self {
            PhaseProfile::Linear { slope, offset } => Some(n as f64 * slope + offset),
            PhaseProfile::PerLevel(v) => v.get(n).copied(),
        }
    }
}

/// A state diagonal in, or expanded over, the photon-number basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NumberBasisState {
    /// Σ √Pₙ e^{iξ(n)} |n⟩
    Pure {
        photons: PhotonNumbers,
        phase: PhaseProfile,
    },
    /// ρ = Σ Pₙ |n⟩⟨n|
    DiagonalMixed { photons: PhotonNumbers },
}

impl NumberBasisState {
    pub fn vacuum() -> Self {
        NumberBasisState::Pure {
            photons: PhotonNumbers::Poisson { mean: 0.0 },
            phase: PhaseProfile::Linear {
                slope: 0.0,
                offset: 0.0,
            },
        }
    }

    pub fn diagonal(probs: Vec<f64>) -> Result<Self> {
        Ok(NumberBasisState::DiagonalMixed {
            photons: PhotonNumbers::explicit(probs)?,
        })
    }

    pub fn photons(&self) -> &PhotonNumbers {
        match self {
            NumberBasisState::Pure { photons, .. } => photons,
            NumberBasisState::DiagonalMixed { photons } => photons,
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, NumberBasisState::Pure { .. })
    }

    /// Mean photon number of a coherent state, i.e. a pure Poissonian state
    /// with a linear phase profile.
    pub fn coherent_mean(&self) -> Option<f64> {
        match self {
            NumberBasisState::Pure {
                photons: PhotonNumbers::Poisson { mean },
                phase: PhaseProfile::Linear { .. },
            } => Some(*mean),
            _ => None,
        }
    }
}

/// Controls how the infinite number-basis sum is cut off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub tail_mass_tol: f64,
    pub hard_max_terms: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            tail_mass_tol: 1e-14,
            hard_max_terms: 1_000_000,
        }
    }
}

impl TruncationPolicy {
    pub fn with_tolerance(tail_mass_tol: f64) -> Self {
        Self {
            tail_mass_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tail_mass_tol.is_finite() && self.tail_mass_tol > 0.0 && self.tail_mass_tol < 1.0)
        {
            return Err(Error::InvalidInput(format!(
                "tail mass tolerance must lie in (0, 1), got {}",
                self.tail_mass_tol
            )));
        }
        if self.hard_max_terms == 0 {
            return Err(Error::InvalidInput(
                "hard_max_terms must be positive".into(),
            ));
        }
        Ok(())
    }
}
