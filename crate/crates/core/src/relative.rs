//! Fluctuations of the phase difference between two independent beams.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluctuations::{psi_pb, variance_coherent};
use crate::phase::{build_distribution, CoherentSpec, SeriesValue, TruncationPolicy};
use crate::special::ln_poisson_pmf;

/// Agreement required between the two series forms of ψ(n̄) = ψ_PB(n̄)².
pub const PSI_IDENTITY_TOL: f64 = 1e-12;

const ORACLE_MIN_GRID: usize = 64;
const ORACLE_MAX_GRID: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBeamSpec {
    pub beam1: CoherentSpec,
    pub beam2: CoherentSpec,
    pub equal_distributions: bool,
}

impl TwoBeamSpec {
    pub fn new(beam1: CoherentSpec, beam2: CoherentSpec) -> Result<Self> {
        if beam1.mean_photons() != beam2.mean_photons() {
            return Err(Error::InvalidInput(
                "equal-distribution beams must share the mean photon number".into(),
            ));
        }
        Ok(Self {
            beam1,
            beam2,
            equal_distributions: true,
        })
    }

    /// Two beams with independent parameters.
    pub fn unequal(beam1: CoherentSpec, beam2: CoherentSpec) -> Self {
        Self {
            beam1,
            beam2,
            equal_distributions: false,
        }
    }

    /// Equal beams differing only by an optical path phase.
    pub fn with_path_offset(mean_photons: f64, delta_xi: f64, path_offset: f64) -> Result<Self> {
        Self::new(
            CoherentSpec::with_delta_xi(mean_photons, delta_xi)?,
            CoherentSpec::with_delta_xi(mean_photons, delta_xi + path_offset)?,
        )
    }
}

/// ψ(n̄) = n̄ e^{−2n̄} [Σ n̄ⁿ/(n! (n+1)^{½})]², summed as written.
pub fn psi_squared_series(mean_photons: f64, policy: &TruncationPolicy) -> Result<SeriesValue> {
    if !(mean_photons.is_finite() && mean_photons >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "mean photon number must be finite and >= 0, got {mean_photons}"
        )));
    }
    policy.validate()?;
    if mean_photons == 0.0 {
        return Ok(SeriesValue {
            value: 0.0,
            tail_bound: 0.0,
            terms_used: 1,
        });
    }
    // √n̄ e^{−n̄} n̄ⁿ/(n! √(n+1)) = Pₙ √(n̄/(n+1))
    let term =
        |n: u64| ln_poisson_pmf(n, mean_photons).exp() * (mean_photons / (n as f64 + 1.0)).sqrt();
    let mut inner = 0.0;
    let mut n: u64 = 0;
    loop {
        inner += term(n);
        // later term ratios are at most n̄/(j+1) ≤ n̄/(n+2)
        let ratio = mean_photons / (n as f64 + 2.0);
        let tail = if ratio < 1.0 {
            term(n + 1) / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        if tail < policy.tail_mass_tol {
            return Ok(SeriesValue {
                value: inner * inner,
                tail_bound: 2.0 * inner * tail + tail * tail,
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

/// (Δφ)²_SGPD = 1 − e^{−n̄} − ψ(n̄)², with ψ(n̄) = ψ_PB(n̄)².
///
/// Fails if ψ(n̄) and ψ_PB(n̄)² disagree beyond [`PSI_IDENTITY_TOL`].
pub fn fluct_sgpd(mean_photons: f64, policy: &TruncationPolicy) -> Result<f64> {
    let psi = psi_squared_series(mean_photons, policy)?.value;
    let psi_pb = psi_pb(mean_photons, policy)?.value;
    let difference = (psi - psi_pb * psi_pb).abs();
    if difference > PSI_IDENTITY_TOL {
        return Err(Error::Consistency {
            what: "psi(n) = psi_PB(n)^2",
            difference,
            tolerance: PSI_IDENTITY_TOL,
        });
    }
    Ok(1.0 - (-mean_photons).exp() - psi * psi)
}

/// (Δφ)²_PBPD = 1 − ψ_PB(n̄)⁴.
pub fn fluct_pbpd(mean_photons: f64, policy: &TruncationPolicy) -> Result<f64> {
    let psi = psi_pb(mean_photons, policy)?.value;
    Ok(1.0 - psi.powi(4))
}

/// 2Δφ², the sum of two independent single-beam variances.
pub fn fluct_pb_doubled(
    mean_photons: f64,
    delta_xi: f64,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let spec = CoherentSpec::with_delta_xi(mean_photons, delta_xi)?;
    Ok(2.0 * variance_coherent(&spec, policy)?.variance)
}

/// Moments of φ₁ − φ₂ under the product distribution P(φ₁)P(φ₂).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeMoments {
    pub mean_cos: f64,
    pub mean_sin: f64,
    pub mean_cos2: f64,
    pub mean_sin2: f64,
    pub grid: usize,
}

impl RelativeMoments {
    /// (Δcos(φ̂₁−φ̂₂))² + (Δsin(φ̂₁−φ̂₂))²
    pub fn fluctuation(&self) -> f64 {
        self.mean_cos2 - self.mean_cos * self.mean_cos + self.mean_sin2
            - self.mean_sin * self.mean_sin
    }
}

/// Double trapezoid over `[0, 2π)²` of the product distribution, with the
/// grid doubled from 64 up to 4096 points per axis until every moment
/// settles to within `tol`.
pub fn relative_moments_quadrature(
    beams: &TwoBeamSpec,
    policy: &TruncationPolicy,
    tol: f64,
) -> Result<RelativeMoments> {
    let d1 = build_distribution(&beams.beam1.state(), beams.beam1.offset_phi0(), policy)?;
    let d2 = build_distribution(&beams.beam2.state(), beams.beam2.offset_phi0(), policy)?;

    let mut grid = ORACLE_MIN_GRID;
    let mut previous: Option<RelativeMoments> = None;
    loop {
        let h = TAU / grid as f64;
        let p1: Vec<f64> = (0..grid).map(|i| d1.eval_density(i as f64 * h)).collect();
        let p2: Vec<f64> = (0..grid).map(|j| d2.eval_density(j as f64 * h)).collect();
        // cos/sin of (i − j)h only depend on (i − j) mod grid
        let table: Vec<(f64, f64)> = (0..grid).map(|k| (k as f64 * h).sin_cos()).collect();

        let sums = (0..grid)
            .into_par_iter()
            .map(|i| {
                let mut acc = [0.0f64; 4];
                for (j, q) in p2.iter().enumerate() {
                    let (s, c) = table[(i + grid - j) % grid];
                    let w = p1[i] * q;
                    acc[0] += c * w;
                    acc[1] += s * w;
                    acc[2] += c * c * w;
                    acc[3] += s * s * w;
                }
                acc
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold([0.0f64; 4], |mut a, row| {
                for (x, y) in a.iter_mut().zip(row) {
                    *x += y;
                }
                a
            });
        let area = h * h;
        let current = RelativeMoments {
            mean_cos: sums[0] * area,
            mean_sin: sums[1] * area,
            mean_cos2: sums[2] * area,
            mean_sin2: sums[3] * area,
            grid,
        };
        if let Some(prev) = previous {
            let change = [
                current.mean_cos - prev.mean_cos,
                current.mean_sin - prev.mean_sin,
                current.mean_cos2 - prev.mean_cos2,
                current.mean_sin2 - prev.mean_sin2,
            ]
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()));
            if change <= tol {
                return Ok(current);
            }
            if grid >= ORACLE_MAX_GRID {
                return Err(Error::Convergence {
                    levels: grid.trailing_zeros() as usize,
                    last_change: change,
                    target: tol,
                });
            }
        }
        previous = Some(current);
        grid *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn policy() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn sgpd_zero_and_identity() {
        assert_eq!(fluct_sgpd(0.0, &policy()).unwrap(), 0.0);
        let psi4 = psi_pb(4.0, &policy()).unwrap().value;
        assert_abs_diff_eq!(
            fluct_sgpd(4.0, &policy()).unwrap(),
            1.0 - (-4.0f64).exp() - psi4.powi(4),
            epsilon = 1e-12
        );
    }

    #[test]
    fn psi_forms_agree() {
        for nbar in [0.1, 1.0, 4.0, 10.0, 50.0, 150.0] {
            let a = psi_squared_series(nbar, &policy()).unwrap().value;
            let b = psi_pb(nbar, &policy()).unwrap().value;
            assert_abs_diff_eq!(a, b * b, epsilon = 1e-13);
        }
    }

    #[test]
    fn pbpd_limits() {
        assert_eq!(fluct_pbpd(0.0, &policy()).unwrap(), 1.0);
        assert!(fluct_pbpd(100.0, &policy()).unwrap() < 0.01);
    }

    #[test]
    fn doubled_vacuum() {
        assert_abs_diff_eq!(
            fluct_pb_doubled(0.0, 1.0, &policy()).unwrap(),
            2.0 * PI * PI / 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn two_beam_constructor_checks_means() {
        let a = CoherentSpec::with_delta_xi(1.0, 0.0).unwrap();
        let b = CoherentSpec::with_delta_xi(2.0, 0.0).unwrap();
        assert!(TwoBeamSpec::new(a, b).is_err());
        assert!(!TwoBeamSpec::unequal(a, b).equal_distributions);
    }

    #[test]
    fn product_quadrature_matches_pbpd() {
        let beams = TwoBeamSpec::with_path_offset(4.0, 0.7, 0.0).unwrap();
        let m = relative_moments_quadrature(&beams, &policy(), 1e-13).unwrap();
        assert_abs_diff_eq!(
            m.fluctuation(),
            fluct_pbpd(4.0, &policy()).unwrap(),
            epsilon = 1e-7
        );
        assert_abs_diff_eq!(m.mean_cos2 + m.mean_sin2, 1.0, epsilon = 1e-12);
    }
}
