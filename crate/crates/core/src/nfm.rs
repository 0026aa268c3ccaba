//! Expectation values for the eight-port relative-phase setup with
//! post-selection: events with equal counts in the paired detectors are
//! discarded and the rest renormalized by N.
//!
//! The ⟨cos⁴⟩ series carry a printed base `(¼|α|)^{2k}`. Whether ¼ multiplies
//! |α| or |α|² is ambiguous in print, so both readings are available through
//! [`SeriesBase`]. `QuarterAmplitude` (base |α|²/16) is the default: it is the
//! reading whose leading term reproduces the |α|⁶ coefficient of the
//! analytic approximation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluctuations::psi_pb;
use crate::phase::{SeriesValue, TruncationPolicy};
use crate::special::ln_bessel_i0;

/// Port-2 intensity above which φ̂₂ is replaced by ξ₂; e^{−25} ≈ 1.4e−11.
pub const LARGE_PORT2_THRESHOLD: f64 = 25.0;

/// Default absolute band for |exact − analytic approximation| of ⟨cos⁴⟩.
pub const COS4_AGREEMENT_BAND: f64 = 1e-3;

/// Denominator of the |α|⁴ coefficient in the small-|α| form of ⟨cos⁴⟩, as
/// printed. 65536 = 2¹⁶ is what the expansion of the exact expression gives;
/// see [`COS4_SMALL_ALPHA_DENOMINATOR_EXPANSION`].
pub const COS4_SMALL_ALPHA_DENOMINATOR: f64 = 65546.0;
pub const COS4_SMALL_ALPHA_DENOMINATOR_EXPANSION: f64 = 65536.0;

/// Validity limit |α|² ≤ 1 of the small-|α| form.
pub const COS4_SMALL_ALPHA_LIMIT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NfmInputs {
    /// |α₁|², input port 1
    pub alpha1_sq: f64,
    /// |α₂|², input port 2
    pub alpha2_sq: f64,
    pub xi1: f64,
    pub xi2: f64,
}

impl NfmInputs {
    pub fn new(alpha1_sq: f64, alpha2_sq: f64, xi1: f64, xi2: f64) -> Result<Self> {
        for (name, v) in [("|alpha1|^2", alpha1_sq), ("|alpha2|^2", alpha2_sq)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if !xi1.is_finite() || !xi2.is_finite() {
            return Err(Error::InvalidInput("phases must be finite".into()));
        }
        Ok(Self {
            alpha1_sq,
            alpha2_sq,
            xi1,
            xi2,
        })
    }

    /// Vacuum in port 1, |α|² in port 2.
    pub fn vacuum_port1(alpha_sq: f64) -> Result<Self> {
        Self::new(0.0, alpha_sq, 0.0, 0.0)
    }
}

/// N = 1 − e^{−(|α₁|²+|α₂|²)} I₀(|α₁² − α₂²|/2) I₀(|α₁² + α₂²|/2), with
/// αₖ² = |αₖ|² e^{2iξₖ}.
///
/// Evaluated as −expm1(ln I₀ + ln I₀ − Σ|αₖ|²) so that neither overflow at
/// large intensity nor cancellation near zero costs precision.
pub fn normalization_n(inputs: &NfmInputs) -> f64 {
    let a1 = Complex64::from_polar(inputs.alpha1_sq, 2.0 * inputs.xi1);
    let a2 = Complex64::from_polar(inputs.alpha2_sq, 2.0 * inputs.xi2);
    let u = 0.5 * (a1 - a2).norm();
    let v = 0.5 * (a1 + a2).norm();
    let total = inputs.alpha1_sq + inputs.alpha2_sq;
    let exponent = ln_bessel_i0(u) + ln_bessel_i0(v) - total;
    (-exponent.exp_m1()).max(0.0)
}

/// Port-1 post-selected ⟨cos(φ̂₂−φ̂₁)⟩ / cos(ξ₂−ξ₁) with φ̂₂ replaced by ξ₂.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosRatio {
    /// ψ_PB(n̄₁)
    pub value: f64,
    pub approximation: &'static str,
    /// Set when n̄₂ is below [`LARGE_PORT2_THRESHOLD`].
    pub regime_warning: Option<String>,
}

pub fn mean_cos_ratio(
    n_bar_port1: f64,
    n_bar_port2: f64,
    policy: &TruncationPolicy,
) -> Result<CosRatio> {
    if !(n_bar_port2.is_finite() && n_bar_port2 >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "port-2 mean photon number must be finite and >= 0, got {n_bar_port2}"
        )));
    }
    let value = psi_pb(n_bar_port1, policy)?.value;
    let regime_warning = (n_bar_port2 < LARGE_PORT2_THRESHOLD).then(|| {
        format!(
            "port-2 mean {n_bar_port2} is below {LARGE_PORT2_THRESHOLD}; replacing the port-2 phase by its classical value is not justified"
        )
    });
    Ok(CosRatio {
        value,
        approximation: "port-2 phase operator replaced by xi2; post-selection neglected",
        regime_warning,
    })
}

/// ⟨cos²(φ̂₂−φ̂₁)⟩ with a vacuum port 1: the uniform P(φ₁) averages cos² to ½
/// whatever the port-2 state and normalization.
pub fn cos2_vacuum_port(n_bar_port2: f64) -> Result<f64> {
    if !(n_bar_port2.is_finite() && n_bar_port2 >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "port-2 mean photon number must be finite and >= 0, got {n_bar_port2}"
        )));
    }
    Ok(0.5)
}

/// ⟨Ĉ₁₂²⟩ = ¼(1 − e^{−n̄}) in the SG picture, vacuum port 1.
pub fn c12_squared_sg(mean_photons: f64) -> Result<f64> {
    if !(mean_photons.is_finite() && mean_photons >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "mean photon number must be finite and >= 0, got {mean_photons}"
        )));
    }
    Ok(-0.25 * (-mean_photons).exp_m1())
}

/// How the printed `(¼|α|)^{2k}` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesBase {
    /// (|α|/4)^{2k} = (|α|²/16)^k
    QuarterAmplitude,
    /// (|α|²/4)^k
    QuarterIntensity,
}

impl SeriesBase {
    pub fn base(self, alpha_sq: f64) -> f64 {
        match self {
            SeriesBase::QuarterAmplitude => alpha_sq / 16.0,
            SeriesBase::QuarterIntensity => alpha_sq / 4.0,
        }
    }
}

/// Rational factor of the m-th term of A.
fn a_factor(m: f64) -> f64 {
    (m * m + 2.0 * m - 2.0)
        / (6.0 * (2.0 * m + 3.0) * (m + 2.0).powi(3) * (2.0 * m + 5.0) * (m + 3.0).powi(3)).sqrt()
}

/// Majorant of |a_factor(m)|, decreasing in m.
fn a_factor_bound(m: f64) -> f64 {
    1.0 / (6.0f64.sqrt() * (2.0 * m + 3.0) * (m + 2.0))
}

/// Rational factor of the (m₃, m₅) term of B; bounded by ½ in magnitude.
fn b_factor(m3: f64, m5: f64) -> f64 {
    let d = m3 + m5;
    ((d + 4.0) * (d + 3.0) - 4.0 * (m3 + 2.0) * (m5 + 2.0))
        / (6.0 * (2.0 * d + 5.0) * (d + 3.0)).sqrt()
        / ((2.0 * d + 7.0) * (d + 4.0)).sqrt()
}

/// ¼ q^{m+3} / ((m+1)!)² · a_factor(m)
pub fn cos4_a_term(m5: u32, q: f64) -> f64 {
    let m = f64::from(m5);
    let mut g = q.powi(3);
    for j in 0..m5 {
        g *= q / f64::from(j + 2).powi(2);
    }
    0.25 * g * a_factor(m)
}

/// ⅛ q^{m₃+m₅+4} / ((m₃+2)!² (m₅+2)!²) · b_factor(m₃, m₅)
pub fn cos4_b_term(m3: u32, m5: u32, q: f64) -> f64 {
    let g = |p: u32| (1..=p).fold(1.0, |acc, k| acc * q / f64::from(k).powi(2));
    0.125 * g(m3 + 2) * g(m5 + 2) * b_factor(f64::from(m3), f64::from(m5))
}

/// Σ_{m₅≥0} of the A terms with base `q`.
pub fn cos4_series_a(q: f64, policy: &TruncationPolicy) -> Result<SeriesValue> {
    policy.validate()?;
    // g_m = q^{m+3}/((m+1)!)², g_{m+1} = g_m q/(m+2)²
    let mut g = q.powi(3);
    let mut sum = 0.0;
    for m in 0..policy.hard_max_terms {
        let mf = m as f64;
        sum += 0.25 * g * a_factor(mf);
        let g_next = g * q / ((mf + 2.0) * (mf + 2.0));
        let ratio = q / ((mf + 3.0) * (mf + 3.0));
        if ratio < 1.0 {
            let tail = 0.25 * g_next * a_factor_bound(mf + 1.0) / (1.0 - ratio);
            if tail <= policy.tail_mass_tol * sum.abs() || tail == 0.0 {
                return Ok(SeriesValue {
                    value: sum,
                    tail_bound: tail,
                    terms_used: m + 1,
                });
            }
        }
        g = g_next;
    }
    Err(Error::Truncation {
        terms: policy.hard_max_terms,
        tail_bound: f64::INFINITY,
        tolerance: policy.tail_mass_tol,
    })
}

/// Σ_{m₃,m₅≥0} of the B terms with base `q`, summed over anti-diagonals
/// d = m₃ + m₅.
///
/// Diagonal d is bounded by ½·⅛·(4q)^{d+4}/((d+4)!)², from
/// Σ_{p+p'=E} 1/(p!p'!)² ≤ (2^E/E!)², which gives a geometric tail majorant.
pub fn cos4_series_b(q: f64, policy: &TruncationPolicy) -> Result<SeriesValue> {
    policy.validate()?;
    // g[p] = q^p / (p!)²
    let mut g: Vec<f64> = vec![1.0];
    let mut sum = 0.0;
    let mut terms = 0usize;
    let mut h = 1.0; // (4q)^E/(E!)² at E = d + 4, advanced below
    for e in 1..=4u32 {
        h *= 4.0 * q / f64::from(e * e);
    }
    for d in 0..policy.hard_max_terms {
        while g.len() < d + 3 {
            let p = g.len() as f64;
            g.push(g[g.len() - 1] * q / (p * p));
        }
        let mut diag = 0.0;
        for m3 in 0..=d {
            let m5 = d - m3;
            diag += g[m3 + 2] * g[m5 + 2] * b_factor(m3 as f64, m5 as f64);
        }
        sum += 0.125 * diag;
        terms += d + 1;
        let e_next = (d + 5) as f64;
        let h_next = h * 4.0 * q / (e_next * e_next);
        let ratio = 4.0 * q / ((e_next + 1.0) * (e_next + 1.0));
        if ratio < 1.0 {
            let tail = 0.0625 * h_next / (1.0 - ratio);
            if tail <= policy.tail_mass_tol * sum.abs() || tail == 0.0 {
                return Ok(SeriesValue {
                    value: sum,
                    tail_bound: tail,
                    terms_used: terms,
                });
            }
        }
        h = h_next;
    }
    Err(Error::Truncation {
        terms,
        tail_bound: f64::INFINITY,
        tolerance: policy.tail_mass_tol,
    })
}

/// Analytic approximation
/// 3/8 + (3/2) e^{−|α|²} (|α|⁴/12288 + √15 |α|⁶/4423680) / N.
pub fn cos4_analytic_approx(alpha_sq: f64) -> f64 {
    if alpha_sq == 0.0 {
        return 0.375;
    }
    let n = normalization_n(&NfmInputs {
        alpha1_sq: 0.0,
        alpha2_sq: alpha_sq,
        xi1: 0.0,
        xi2: 0.0,
    });
    let a2 = alpha_sq * alpha_sq;
    0.375
        + 1.5 * (-alpha_sq).exp() * (a2 / 12288.0 + 15.0f64.sqrt() / 4_423_680.0 * a2 * alpha_sq)
            / n
}

/// Small-|α| form 3/8 + |α|²/8192 + (√15/45 − 3)|α|⁴/`denominator`.
pub fn cos4_small_alpha(alpha_sq: f64, denominator: f64) -> f64 {
    0.375 + alpha_sq / 8192.0 + (15.0f64.sqrt() / 45.0 - 3.0) * alpha_sq * alpha_sq / denominator
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cos4Options {
    pub base: SeriesBase,
    /// Largest |exact − analytic approximation| accepted without a warning.
    pub agreement_band: f64,
}

impl Default for Cos4Options {
    fn default() -> Self {
        Self {
            base: SeriesBase::QuarterAmplitude,
            agreement_band: COS4_AGREEMENT_BAND,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cos4Result {
    /// 3/8 − T/N from the A and B series.
    pub exact: SeriesValue,
    pub approx_analytic: f64,
    /// Present for |α|² ≤ 1.
    pub approx_small_alpha: Option<f64>,
    /// N
    pub normalization: f64,
    pub series_a: SeriesValue,
    pub series_b: SeriesValue,
    pub base: SeriesBase,
    /// Set when |exact − approx_analytic| exceeds the agreement band.
    pub consistency_warning: Option<String>,
}

impl Cos4Result {
    /// exact − approx_analytic
    pub fn analytic_gap(&self) -> f64 {
        self.exact.value - self.approx_analytic
    }
}

/// ⟨cos⁴(φ̂₂−φ̂₁)⟩ with vacuum in port 1 and |α|² in port 2.
pub fn cos4_vacuum_port(alpha_sq: f64, policy: &TruncationPolicy) -> Result<Cos4Result> {
    cos4_vacuum_port_with(alpha_sq, policy, &Cos4Options::default())
}

pub fn cos4_vacuum_port_with(
    alpha_sq: f64,
    policy: &TruncationPolicy,
    options: &Cos4Options,
) -> Result<Cos4Result> {
    let inputs = NfmInputs::vacuum_port1(alpha_sq)?;
    let q = options.base.base(alpha_sq);
    let series_a = cos4_series_a(q, policy)?;
    let series_b = cos4_series_b(q, policy)?;
    let normalization = normalization_n(&inputs);

    let exact = if alpha_sq == 0.0 || normalization == 0.0 {
        // T and N both vanish; the continuous extension is 3/8
        SeriesValue {
            value: 0.375,
            tail_bound: 0.0,
            terms_used: series_a.terms_used + series_b.terms_used,
        }
    } else {
        let weight = 1.5 * (-alpha_sq).exp();
        let t = weight * (-alpha_sq * alpha_sq / 12288.0 + series_a.value + series_b.value);
        SeriesValue {
            value: 0.375 - t / normalization,
            tail_bound: weight * (series_a.tail_bound + series_b.tail_bound) / normalization,
            terms_used: series_a.terms_used + series_b.terms_used,
        }
    };
    let approx_analytic = cos4_analytic_approx(alpha_sq);
    let approx_small_alpha = (alpha_sq <= COS4_SMALL_ALPHA_LIMIT)
        .then(|| cos4_small_alpha(alpha_sq, COS4_SMALL_ALPHA_DENOMINATOR));
    let gap = (exact.value - approx_analytic).abs();
    let consistency_warning = (gap > options.agreement_band).then(|| {
        format!(
            "|exact - analytic approximation| = {gap:e} exceeds band {:e}",
            options.agreement_band
        )
    });
    Ok(Cos4Result {
        exact,
        approx_analytic,
        approx_small_alpha,
        normalization,
        series_a,
        series_b,
        base: options.base,
        consistency_warning,
    })
}

/// Value ⟨cos⁴⟩ approaches as |α|² → ∞.
pub const COS4_LIMIT: f64 = 3.0 / 8.0;
