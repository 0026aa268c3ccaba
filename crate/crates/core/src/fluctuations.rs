//! Single-beam phase-fluctuation measures.
//!
//! Two families live here. The variance Δφ² of the phase operator itself,
//! which depends on δξ = ξ − φ₀, and the cosine/sine measures
//! (Δcos)² + (Δsin)² in the PB and SG pictures, which do not.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{
    build_distribution, CoherentSpec, NumberBasisState, PhaseDistribution, SeriesValue,
    TruncationPolicy,
};
use crate::quadrature::periodic_trapezoid;
use crate::special::ln_poisson_pmf;

/// Slack on the Δφ² sandwich; the lower bound is attained exactly by the vacuum.
pub const BOUND_SLACK: f64 = 1e-9;

/// Lower bound 1/(4n̄ + 3/π²) on Δφ² for a coherent state.
pub fn variance_lower_bound(mean_photons: f64) -> f64 {
    1.0 / (4.0 * mean_photons + 3.0 / (PI * PI))
}

/// Lower bound on Δφ² implied by ΔN²Δφ² ≥ ¼(1 − 3Δφ²/π²)², i.e. the smaller
/// root 1/(c + 2v + 2√(v(c + v))) with c = 3/π² and v = ΔN².
///
/// Weaker than [`variance_lower_bound`], and unlike it valid for every n̄.
pub fn judge_lower_bound(number_variance: f64) -> f64 {
    let c = 3.0 / (PI * PI);
    let v = number_variance;
    1.0 / (c + 2.0 * v + 2.0 * (v * (c + v)).sqrt())
}

/// Below this n̄ the simplified bound 1/(4n̄ + 3/π²) exceeds the true Δφ² of
/// a coherent state near δξ = π, where Δφ² ≈ π²/3 − 4√n̄. The crossover sits
/// at n̄ ≈ 0.01065.
pub const SIMPLIFIED_BOUND_VALID_FROM: f64 = 0.011;

/// Upper bound π² on Δφ², reached by the idealized two-spike distribution.
pub const VARIANCE_UPPER_BOUND: f64 = PI * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    /// Δφ²
    pub variance: f64,
    /// ⟨φ̂ − φ₀⟩
    pub mean: f64,
    /// 1/(4n̄ + 3/π²) for coherent states, 0 otherwise.
    pub lower_bound: f64,
    /// [`judge_lower_bound`] of the state's ΔN².
    pub judge_bound: f64,
    pub upper_bound: f64,
    /// `lower_bound − BOUND_SLACK ≤ Δφ² ≤ π²`. Can be false for coherent
    /// states with n̄ < [`SIMPLIFIED_BOUND_VALID_FROM`].
    pub satisfies_bounds: bool,
}

/// Δφ² = ⟨(φ̂−φ₀)²⟩ − ⟨φ̂−φ₀⟩². Coherent states get the 1/(4n̄ + 3/π²)
/// lower bound; other states only the trivial bound 0.
pub fn variance_phase(
    state: &NumberBasisState,
    offset_phi0: f64,
    policy: &TruncationPolicy,
) -> Result<VarianceReport> {
    let dist = build_distribution(state, offset_phi0, policy)?;
    let (mean, variance) = dist.mean_and_variance();
    let lower_bound = state.coherent_mean().map_or(0.0, variance_lower_bound);
    let judge_bound = judge_lower_bound(state.photons().number_moments().1);
    let upper_bound = VARIANCE_UPPER_BOUND;
    Ok(VarianceReport {
        variance,
        mean,
        lower_bound,
        judge_bound,
        upper_bound,
        satisfies_bounds: variance >= lower_bound - BOUND_SLACK && variance <= upper_bound + 1e-10,
    })
}

pub fn variance_coherent(spec: &CoherentSpec, policy: &TruncationPolicy) -> Result<VarianceReport> {
    variance_phase(&spec.state(), spec.offset_phi0(), policy)
}

/// ⟨[N̂, φ̂]⟩ = i(1 − 2πP(0)) for a pure state.
pub fn commutator_expectation(
    state: &NumberBasisState,
    offset_phi0: f64,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    if !state.is_pure() {
        return Err(Error::InvalidInput(
            "the commutator relation is stated for pure states".into(),
        ));
    }
    let dist = build_distribution(state, offset_phi0, policy)?;
    Ok(commutator_from(&dist))
}

fn commutator_from(dist: &PhaseDistribution) -> Complex64 {
    Complex64::new(0.0, 1.0 - TAU * dist.eval_density(0.0))
}

/// Outcome of the number–phase inequalities for a coherent state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyCheck {
    pub variance: f64,
    /// ΔN², equal to n̄ for a coherent state.
    pub number_variance: f64,
    /// ΔN²Δφ² − ¼|1 − 2πP(0)|²
    pub commutator_margin: f64,
    /// ΔN²Δφ² − ¼(1 − 3Δφ²/π²)²; only evaluated where the bound applies
    /// (δξ = π, or the δξ-independent vacuum).
    pub judge_margin: Option<f64>,
    pub holds: bool,
}

/// Tolerance used to decide whether δξ sits at π.
pub const JUDGE_DELTA_XI_TOL: f64 = 1e-12;

pub fn check_uncertainty(
    spec: &CoherentSpec,
    policy: &TruncationPolicy,
) -> Result<UncertaintyCheck> {
    let dist = build_distribution(&spec.state(), spec.offset_phi0(), policy)?;
    let (_, variance) = dist.mean_and_variance();
    let number_variance = spec.mean_photons();
    let product = number_variance * variance;
    let comm = commutator_from(&dist);
    let commutator_margin = product - 0.25 * comm.norm_sqr();
    let judge_applies =
        (spec.delta_xi() - PI).abs() <= JUDGE_DELTA_XI_TOL || spec.mean_photons() == 0.0;
    let judge_margin = judge_applies.then(|| {
        let r = 1.0 - 3.0 * variance / (PI * PI);
        product - 0.25 * r * r
    });
    // rounding around saturated cases (the vacuum) is tolerated at 1e-12
    let holds = commutator_margin >= -1e-12 && judge_margin.unwrap_or(0.0) >= -1e-12;
    Ok(UncertaintyCheck {
        variance,
        number_variance,
        commutator_margin,
        judge_margin,
        holds,
    })
}

/// ψ_PB(n̄) = √n̄ e^{−n̄} Σ n̄ⁿ/√(n!(n+1)!) = Σ √(Pₙ Pₙ₊₁).
///
/// Terms come from log-space Poisson weights. Past the mode, successive
/// ratios n̄/√((n+1)(n+2)) decrease, so a geometric majorant bounds the tail;
/// summation stops once that bound is below `policy.tail_mass_tol`.
pub fn psi_pb(mean_photons: f64, policy: &TruncationPolicy) -> Result<SeriesValue> {
    check_mean(mean_photons)?;
    policy.validate()?;
    if mean_photons == 0.0 {
        return Ok(SeriesValue {
            value: 0.0,
            tail_bound: 0.0,
            terms_used: 1,
        });
    }
    let term = |n: u64| {
        (0.5 * (ln_poisson_pmf(n, mean_photons) + ln_poisson_pmf(n + 1, mean_photons))).exp()
    };
    let mut sum = 0.0;
    let mut n: u64 = 0;
    loop {
        sum += term(n);
        let nf = n as f64;
        let ratio = mean_photons / ((nf + 2.0) * (nf + 3.0)).sqrt();
        let tail = if ratio < 1.0 {
            term(n + 1) / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        if tail < policy.tail_mass_tol {
            return Ok(SeriesValue {
                value: sum,
                tail_bound: tail,
                terms_used: n as usize + 1,
            });
        }
        n += 1;
        if n as usize >= policy.hard_max_terms {
            return Err(Error::Truncation {
                terms: n as usize,
                tail_bound: tail,
                tolerance: policy.tail_mass_tol,
            });
        }
    }
}

fn check_mean(mean_photons: f64) -> Result<()> {
    if mean_photons.is_finite() && mean_photons >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "mean photon number must be finite and >= 0, got {mean_photons}"
        )))
    }
}

/// (Δφ)²_PB = 1 − ψ_PB(n̄)² for a coherent state.
pub fn trig_fluct_pb(mean_photons: f64, policy: &TruncationPolicy) -> Result<f64> {
    let psi = psi_pb(mean_photons, policy)?.value;
    Ok(1.0 - psi * psi)
}

/// (Δφ)²_PB for any diagonal mixture.
pub const TRIG_FLUCT_PB_MIXTURE: f64 = 1.0;

/// Bounds 1/(1+4n̄) ≤ (Δφ)²_PB ≤ 1.
pub fn trig_fluct_pb_bounds(mean_photons: f64) -> (f64, f64) {
    (1.0 / (1.0 + 4.0 * mean_photons), 1.0)
}

/// (Δφ)²_SG = (Δφ)²_PB − ½e^{−n̄} for a coherent state.
pub fn trig_fluct_sg(mean_photons: f64, policy: &TruncationPolicy) -> Result<f64> {
    Ok(trig_fluct_pb(mean_photons, policy)? - 0.5 * (-mean_photons).exp())
}

/// (Δφ)²_SG = 1 − ½P₀ for a diagonal mixture.
pub fn trig_fluct_sg_mixture(vacuum_probability: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&vacuum_probability) {
        return Err(Error::InvalidInput(format!(
            "P0 must lie in [0, 1], got {vacuum_probability}"
        )));
    }
    Ok(1.0 - 0.5 * vacuum_probability)
}

/// ⟨e^{i(φ̂−φ₀)}⟩ = e^{iδξ} ψ_PB(n̄).
pub fn exp_phase_expectation(
    mean_photons: f64,
    delta_xi: f64,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    let psi = psi_pb(mean_photons, policy)?.value;
    Ok(Complex64::from_polar(psi, delta_xi))
}

/// Cosine and sine moments of P(φ) by periodic quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigMoments {
    pub mean_cos: f64,
    pub mean_sin: f64,
    pub mean_cos2: f64,
    pub mean_sin2: f64,
    pub vacuum_probability: f64,
}

impl TrigMoments {
    /// (Δcos)² + (Δsin)²
    pub fn pb_fluctuation(&self) -> f64 {
        self.mean_cos2 - self.mean_cos * self.mean_cos + self.mean_sin2
            - self.mean_sin * self.mean_sin
    }

    /// ⟨Ĉ² + Ŝ²⟩ − ⟨Ĉ⟩² − ⟨Ŝ⟩²; the SG operators share ⟨Ĉ⟩, ⟨Ŝ⟩ with the
    /// PB cosine and sine but have ⟨Ĉ² + Ŝ²⟩ = 1 − ½P₀.
    pub fn sg_fluctuation(&self) -> f64 {
        self.pb_fluctuation() - 0.5 * self.vacuum_probability
    }
}

/// Trapezoid on a uniform grid integrates a trigonometric polynomial of
/// degree below the grid size exactly, so doubling stops as soon as the grid
/// resolves P(φ).
pub fn trig_moments(dist: &PhaseDistribution, tol: f64) -> Result<TrigMoments> {
    let q = periodic_trapezoid(
        |phi| {
            let p = dist.eval_density(phi);
            let (s, c) = phi.sin_cos();
            [c * p, s * p, c * c * p, s * s * p]
        },
        TAU,
        tol,
        8,
        1 << 22,
    )?;
    let [mean_cos, mean_sin, mean_cos2, mean_sin2] = q.value;
    Ok(TrigMoments {
        mean_cos,
        mean_sin,
        mean_cos2,
        mean_sin2,
        vacuum_probability: dist.vacuum_probability(),
    })
}
