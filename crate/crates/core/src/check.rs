//! The invariant suite behind `pbphase check`.
//!
//! Every check reports a margin: how far inside its tolerance the worst case
//! landed. A negative margin is a violation.

use std::f64::consts::{PI, TAU};
use std::fs;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::experiment::{
    emit_figure, gbl_adjust, load_experiment, read_figure_csv, write_figure_csv, FigureId,
    FigureParams,
};
use crate::fluctuations::{
    check_uncertainty, psi_pb, trig_fluct_pb, trig_fluct_sg, trig_fluct_sg_mixture, trig_moments,
    variance_coherent, variance_lower_bound, variance_phase, BOUND_SLACK,
    SIMPLIFIED_BOUND_VALID_FROM, TRIG_FLUCT_PB_MIXTURE, VARIANCE_UPPER_BOUND,
};
use crate::nfm::{
    cos2_vacuum_port, cos4_a_term, cos4_b_term, cos4_vacuum_port, normalization_n, NfmInputs,
    COS4_LIMIT,
};
use crate::phase::{
    build_distribution, finite_s_operator_check, CoherentSpec, MomentMethod, NumberBasisState,
    TruncationPolicy,
};
use crate::relative::{
    fluct_pbpd, fluct_sgpd, psi_squared_series, relative_moments_quadrature, TwoBeamSpec,
};
use crate::special::bessel_i0;

/// δξ values that include the boundary spikes at 0 and 2π.
pub const EXTREMAL_DELTA_XI: [f64; 6] = [0.0, 1e-3, PI / 2.0, PI, 1.5 * PI, TAU - 1e-3];

/// Photon numbers used by the normalization and method checks.
pub const CHECK_N_BAR: [f64; 6] = [0.0, 0.1, 1.0, 4.0, 10.0, 50.0];

/// `count` points: zero followed by a logarithmic grid ending at `hi`.
pub fn log_grid_with_zero(hi: f64, count: usize) -> Vec<f64> {
    let lo = hi * 1e-4;
    let steps = (count - 2) as f64;
    std::iter::once(0.0)
        .chain((0..count - 1).map(|i| lo * (hi / lo).powf(i as f64 / steps)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// Violated exactly where a documented flaw of the stated property
    /// predicts, and nowhere else.
    KnownDeviation,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantOutcome {
    pub module: &'static str,
    pub name: &'static str,
    pub margin: f64,
    pub status: Status,
    pub detail: String,
}

impl InvariantOutcome {
    /// Pass or known deviation.
    pub fn acceptable(&self) -> bool {
        self.status != Status::Fail
    }
}

pub struct Verdict {
    margin: f64,
    detail: String,
    deviation: bool,
}

fn verdict((margin, detail): (f64, String)) -> Result<Verdict> {
    Ok(Verdict {
        margin,
        detail,
        deviation: false,
    })
}

type CheckFn = fn(&TruncationPolicy) -> Result<Verdict>;

const CHECKS: &[(&str, &str, CheckFn)] = &[
    ("phase-core", "normalization", normalization),
    ("phase-core", "density-symmetry", density_symmetry),
    (
        "phase-core",
        "moment-method-equivalence",
        method_equivalence,
    ),
    ("phase-core", "finite-s-convergence", finite_s_convergence),
    ("phase-core", "mixed-state-collapse", mixed_state_collapse),
    ("fluctuations", "vacuum-variance", vacuum_variance),
    ("fluctuations", "bound-sandwich", bound_sandwich),
    (
        "fluctuations",
        "delta-xi-independence",
        delta_xi_independence,
    ),
    ("fluctuations", "variance-symmetry", variance_symmetry),
    ("fluctuations", "trig-two-route", trig_two_route),
    ("fluctuations", "sg-pb-relation", sg_pb_relation),
    ("fluctuations", "mixture-closed-forms", mixture_closed_forms),
    (
        "fluctuations",
        "uncertainty-relations",
        uncertainty_relations,
    ),
    ("relative-phase", "psi-identity", psi_identity),
    ("relative-phase", "sgpd-pbpd-ordering", sgpd_pbpd_ordering),
    ("relative-phase", "pbpd-monotone", pbpd_monotone),
    (
        "relative-phase",
        "factorization-oracle",
        factorization_oracle,
    ),
    ("nfm", "normalization-range", nfm_normalization_range),
    ("nfm", "cos2-constant", cos2_constant),
    ("nfm", "cos4-limit", cos4_limit),
    ("nfm", "cos4-leading-terms", cos4_leading_terms),
    ("nfm", "bessel-i0-series", bessel_i0_series),
    ("experiment-io", "csv-round-trip", csv_round_trip),
    ("experiment-io", "overlay-safety", overlay_safety),
    ("cli", "determinism", determinism),
];

/// Run every invariant. Checks run in parallel; results keep suite order.
pub fn run_invariants(policy: &TruncationPolicy) -> Vec<InvariantOutcome> {
    CHECKS
        .par_iter()
        .map(|&(module, name, check)| match check(policy) {
            Ok(v) => InvariantOutcome {
                module,
                name,
                margin: v.margin,
                status: match (v.margin >= 0.0, v.deviation) {
                    (true, _) => Status::Pass,
                    (false, true) => Status::KnownDeviation,
                    (false, false) => Status::Fail,
                },
                detail: v.detail,
            },
            Err(e) => InvariantOutcome {
                module,
                name,
                margin: f64::NAN,
                status: Status::Fail,
                detail: e.to_string(),
            },
        })
        .collect()
}

pub fn invariant_names() -> impl Iterator<Item = (&'static str, &'static str)> {
    CHECKS.iter().map(|&(m, n, _)| (m, n))
}

fn worst<I: IntoIterator<Item = f64>>(errors: I) -> f64 {
    errors.into_iter().fold(0.0, f64::max)
}

fn coherent(n: f64, dxi: f64) -> Result<CoherentSpec> {
    CoherentSpec::with_delta_xi(n, dxi)
}

fn normalization(policy: &TruncationPolicy) -> Result<Verdict> {
    let mut err = 0.0f64;
    for n in CHECK_N_BAR {
        let d = build_distribution(&coherent(n, 1.0)?.state(), 0.0, policy)?;
        let q = crate::quadrature::periodic_trapezoid(
            |phi| [d.eval_density(phi)],
            TAU,
            1e-14,
            8,
            1 << 20,
        )?;
        err = err.max((q.value[0] - 1.0).abs());
    }
    verdict((1e-10 - err, format!("max |integral - 1| = {err:e}")))
}

fn density_symmetry(policy: &TruncationPolicy) -> Result<Verdict> {
    let mut err = 0.0f64;
    for n in [0.5, 4.0, 25.0] {
        for dxi in [0.3, PI, 5.0] {
            let d = build_distribution(&coherent(n, dxi)?.state(), 0.0, policy)?;
            for i in 1..64 {
                let x = i as f64 * PI / 64.0;
                err = err.max((d.eval_density(dxi + x) - d.eval_density(dxi - x)).abs());
            }
        }
    }
    verdict((1e-12 - err, format!("max |P(dxi+x) - P(dxi-x)| = {err:e}")))
}

fn method_equivalence(policy: &TruncationPolicy) -> Result<Verdict> {
    let mut err = 0.0f64;
    for n in CHECK_N_BAR {
        for dxi in [0.0, 1.0, PI] {
            let d = build_distribution(&coherent(n, dxi)?.state(), 0.0, policy)?;
            for k in [1, 2] {
                let f = d.moment(k, MomentMethod::Fourier)?.value;
                let q = d.moment(k, MomentMethod::Quadrature)?.value;
                err = err.max((f - q).abs());
            }
        }
    }
    verdict((1e-8 - err, format!("max |fourier - quadrature| = {err:e}")))
}

/// Errors of the finite-s variance at s = 100, 400, 1600 for n̄ = 4, δξ = π.
pub fn finite_s_errors(policy: &TruncationPolicy) -> Result<[f64; 3]> {
    let spec = coherent(4.0, PI)?;
    let limit = variance_coherent(&spec, policy)?.variance;
    let mut errs = [0.0; 3];
    for (e, s) in errs.iter_mut().zip([100, 400, 1600]) {
        let r = finite_s_operator_check(&spec.state(), 0.0, s)?;
        *e = (r.variance - limit).abs();
    }
    Ok(errs)
}

fn finite_s_convergence(policy: &TruncationPolicy) -> Result<Verdict> {
    let e = finite_s_errors(policy)?;
    let margin = (1e-3 - e[2]).min(e[0] - e[1]).min(e[1] - e[2]);
    verdict((
        margin,
        format!(
            "errors at s = 100, 400, 1600: {:e}, {:e}, {:e}",
            e[0], e[1], e[2]
        ),
    ))
}

fn mixed_state_collapse(policy: &TruncationPolicy) -> Result<Verdict> {
    let d = build_distribution(
        &NumberBasisState::diagonal(vec![0.2, 0.5, 0.3])?,
        0.7,
        policy,
    )?;
    let uniform = 1.0 / TAU;
    let err = worst((0..32).map(|i| (d.eval_density(i as f64 * 0.2) - uniform).abs()));
    let margin = if d.is_uniform() && err == 0.0 {
        0.0
    } else {
        -1.0
    };
    verdict((
        margin,
        format!("uniform: {}, max deviation {err:e}", d.is_uniform()),
    ))
}

fn vacuum_variance(policy: &TruncationPolicy) -> Result<Verdict> {
    let v = variance_coherent(&coherent(0.0, 1.0)?, policy)?.variance;
    let err = (v - PI * PI / 3.0)
        .abs()
        .max((v - variance_lower_bound(0.0)).abs());
    verdict((1e-10 - err, format!("variance {v}")))
}

/// Slack of the Δφ² sandwich over the 40-point n̄ grid and the extremal δξ
/// set, split into samples at or above [`SIMPLIFIED_BOUND_VALID_FROM`] and
/// below it; plus the smallest slack against the Judge bound anywhere.
pub fn bound_sandwich_slack(policy: &TruncationPolicy) -> Result<BoundSlack> {
    let rows: Vec<(f64, f64, f64)> = log_grid_with_zero(100.0, 40)
        .par_iter()
        .map(|&n| -> Result<(f64, f64, f64)> {
            let (mut simplified, mut upper, mut judge) =
                (f64::INFINITY, f64::INFINITY, f64::INFINITY);
            for dxi in EXTREMAL_DELTA_XI {
                let r = variance_coherent(&coherent(n, dxi)?, policy)?;
                simplified = simplified.min(r.variance - (r.lower_bound - BOUND_SLACK));
                upper = upper.min(VARIANCE_UPPER_BOUND + BOUND_SLACK - r.variance);
                judge = judge.min(r.variance - (r.judge_bound - BOUND_SLACK));
            }
            Ok((n, simplified, upper.min(judge)))
        })
        .collect::<Result<_>>()?;
    let mut out = BoundSlack {
        samples: rows.len() * EXTREMAL_DELTA_XI.len(),
        valid_region: f64::INFINITY,
        near_vacuum: f64::INFINITY,
        upper_and_judge: f64::INFINITY,
    };
    for (n, simplified, other) in rows {
        if n == 0.0 || n >= SIMPLIFIED_BOUND_VALID_FROM {
            out.valid_region = out.valid_region.min(simplified);
        } else {
            out.near_vacuum = out.near_vacuum.min(simplified);
        }
        out.upper_and_judge = out.upper_and_judge.min(other);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSlack {
    pub samples: usize,
    /// Simplified lower bound, n̄ = 0 or n̄ ≥ [`SIMPLIFIED_BOUND_VALID_FROM`].
    pub valid_region: f64,
    /// Simplified lower bound, 0 < n̄ < [`SIMPLIFIED_BOUND_VALID_FROM`].
    pub near_vacuum: f64,
    /// Upper bound π² and the Judge bound, every sample.
    pub upper_and_judge: f64,
}

fn bound_sandwich(policy: &TruncationPolicy) -> Result<Verdict> {
    let b = bound_sandwich_slack(policy)?;
    let margin = b.valid_region.min(b.near_vacuum).min(b.upper_and_judge);
    Ok(Verdict {
        margin,
        detail: format!(
            "{} samples; slack {:e} for n = 0 or n >= {SIMPLIFIED_BOUND_VALID_FROM}, {:e} below it; upper and Judge bounds {:e}",
            b.samples, b.valid_region, b.near_vacuum, b.upper_and_judge
        ),
        deviation: b.valid_region >= 0.0 && b.upper_and_judge >= 0.0,
    })
}

fn delta_xi_independence(policy: &TruncationPolicy) -> Result<Verdict> {
    let mut err = 0.0f64;
    for n in [0.5, 2.0, 8.0] {
        let mut first: Option<[f64; 3]> = None;
        for dxi in [0.0, PI / 3.0, PI, 5.0] {
            let d = build_distribution(&coherent(n, dxi)?.state(), 0.0, policy)?;
            let t = trig_moments(&d, 1e-13)?;
            let v = [
                t.pb_fluctuation(),
                t.sg_fluctuation(),
                d.mean_exp_phase().norm(),
            ];
            match first {
                None => first = Some(v),
                Some(f) => {
                    err = err.max(worst(f.iter().zip(v).map(|(a, b)| (a - b).abs())));
                }
            }
        }
    }
    verdict((1e-10 - err, format!("max spread over dxi = {err:e}")))
}

fn variance_symmetry(policy: &TruncationPolicy) -> Result<Verdict> {
    let mut err = 0.0f64;
    for n in [0.5, 4.0, 20.0] {
        for dxi in [0.1, 1.0, 2.0, 3.0] {
            let a = variance_coherent(&coherent(n, dxi)?, policy)?.variance;
            let b = variance_coherent(&coherent(n, TAU - dxi)?, policy)?.variance;
            err = err.max((a - b).abs());
        }
    }
    verdict((1e-9 - err, format!("max |V(dxi) - V(2pi - dxi)| = {err:e}")))
}

fn trig_two_route(policy: &TruncationPolicy) -> Result<Verdict> {
    let mut err = 0.0f64;
    for n in [0.1, 0.5, 2.0, 8.0, 30.0] {
        let d = build_distribution(&coherent(n, 0.4)?.state(), 0.0, policy)?;
        let q = trig_moments(&d, 1e-13)?.pb_fluctuation();
        err = err.max((q - trig_fluct_pb(n, policy)?).abs());
    }
    verdict((
        1e-8 - err,
        format!("max |closed form - quadrature| = {err:e}"),
    ))
}

fn sg_pb_relation(policy: &TruncationPolicy) -> Result<Verdict> {
    let mut err = 0.0f64;
    for n in log_grid_with_zero(100.0, 40) {
        let pb = trig_fluct_pb(n, policy)?;
        err = err.max((trig_fluct_sg(n, policy)? + 0.5 * (-n).exp() - pb).abs());
    }
    verdict((4.0 * f64::EPSILON - err, format!("max residual {err:e}")))
}

fn mixture_closed_forms(policy: &TruncationPolicy) -> Result<Verdict> {
    let mut err = 0.0f64;
    for probs in [vec![1.0], vec![0.3, 0.7], vec![0.1, 0.2, 0.3, 0.4]] {
        let p0 = probs[0];
        let state = NumberBasisState::diagonal(probs)?;
        let v = variance_phase(&state, 0.3, policy)?;
        let d = build_distribution(&state, 0.3, policy)?;
        let t = trig_moments(&d, 1e-13)?;
        err = err
            .max((v.mean - PI).abs())
            .max((v.variance - PI * PI / 3.0).abs())
            .max((t.pb_fluctuation() - TRIG_FLUCT_PB_MIXTURE).abs())
            .max((t.sg_fluctuation() - trig_fluct_sg_mixture(p0)?).abs());
    }
    verdict((1e-10 - err, format!("max deviation {err:e}")))
}

fn uncertainty_relations(policy: &TruncationPolicy) -> Result<Verdict> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    let mut margin = f64::INFINITY;
    for _ in 0..50 {
        let n = rng.gen_range(0.0..50.0);
        let dxi = rng.gen_range(0.0..TAU);
        let u = check_uncertainty(&coherent(n, dxi)?, policy)?;
        margin = margin.min(u.commutator_margin + 1e-12);
    }
    for n in [0.0, 0.5, 4.0, 25.0] {
        let u = check_uncertainty(&coherent(n, PI)?, policy)?;
        margin = margin.min(u.commutator_margin + 1e-12);
        margin = margin.min(u.judge_margin.unwrap_or(f64::NEG_INFINITY) + 1e-12);
    }
    verdict((margin, format!("smallest margin {margin:e}")))
}

fn psi_identity(policy: &TruncationPolicy) -> Result<Verdict> {
    let mut err = 0.0f64;
    for n in [0.1, 1.0, 4.0, 10.0, 50.0] {
        let a = psi_squared_series(n, policy)?.value;
        let b = psi_pb(n, policy)?.value;
        err = err.max((a - b * b).abs());
    }
    verdict((1e-12 - err, format!("max |psi - psi_PB^2| = {err:e}")))
}

/// 0 < SGPD < PBPD ≤ 1 with PBPD − SGPD = e^{−n̄}. Once e^{−n̄} drops below
/// the rounding of either value the strict order is not resolvable in f64,
/// so only the difference is checked there.
fn sgpd_pbpd_ordering(policy: &TruncationPolicy) -> Result<Verdict> {
    let mut margin = f64::INFINITY;
    for n in log_grid_with_zero(100.0, 40).into_iter().skip(1) {
        let s = fluct_sgpd(n, policy)?;
        let p = fluct_pbpd(n, policy)?;
        let gap = (-n).exp();
        margin = margin
            .min(1e-13 - (p - s - gap).abs())
            .min(1.0 - p)
            .min(if s > 0.0 { s } else { -1.0 });
        if gap > 1e-13 {
            margin = margin.min(if p > s { p - s } else { -1.0 });
        }
    }
    verdict((margin, format!("smallest slack {margin:e}")))
}

fn pbpd_monotone(policy: &TruncationPolicy) -> Result<Verdict> {
    let values: Vec<f64> = (0..=100)
        .map(|i| fluct_pbpd(i as f64, policy))
        .collect::<Result<_>>()?;
    let gap = values
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::INFINITY, f64::min);
    let margin = if gap > 0.0 { gap } else { -1.0 };
    verdict((margin, format!("smallest decrease {gap:e}")))
}

fn factorization_oracle(policy: &TruncationPolicy) -> Result<Verdict> {
    let mut err = 0.0f64;
    for n in [0.5, 2.0, 8.0] {
        let beams = TwoBeamSpec::with_path_offset(n, 0.9, 0.4)?;
        let m = relative_moments_quadrature(&beams, policy, 1e-12)?;
        err = err.max((m.fluctuation() - fluct_pbpd(n, policy)?).abs());
    }
    verdict((
        1e-7 - err,
        format!("max |closed form - product quadrature| = {err:e}"),
    ))
}

fn nfm_normalization_range(_: &TruncationPolicy) -> Result<Verdict> {
    let mut margin = f64::INFINITY;
    for a1 in [0.0, 0.5, 3.0, 20.0] {
        for a2 in [0.0, 0.1, 2.0, 50.0] {
            for (x1, x2) in [(0.0, 0.0), (0.3, 1.2), (PI / 2.0, 0.0)] {
                let n = normalization_n(&NfmInputs::new(a1, a2, x1, x2)?);
                margin = margin.min(n).min(1.0 - n);
            }
        }
    }
    let ray: Vec<f64> = (0..=60)
        .map(|i| NfmInputs::vacuum_port1(i as f64 * 0.25).map(|x| normalization_n(&x)))
        .collect::<Result<_>>()?;
    let rising = ray.windows(2).all(|w| w[1] >= w[0]);
    verdict((
        if rising { margin } else { -1.0 },
        format!(
            "N in [0, 1]: {}, increasing along alpha1 = 0: {rising}",
            margin >= 0.0
        ),
    ))
}

fn cos2_constant(_: &TruncationPolicy) -> Result<Verdict> {
    let err = worst(
        [0.0, 0.1, 1.0, 10.0, 100.0]
            .into_iter()
            .map(|n| cos2_vacuum_port(n).map(|v| (v - 0.5).abs()))
            .collect::<Result<Vec<_>>>()?,
    );
    verdict((
        if err == 0.0 { 0.0 } else { -err },
        format!("max |cos2 - 1/2| = {err:e}"),
    ))
}

fn cos4_limit(policy: &TruncationPolicy) -> Result<Verdict> {
    let v = cos4_vacuum_port(40.0, policy)?.exact.value;
    let err = (v - COS4_LIMIT).abs();
    verdict((1e-6 - err, format!("|cos4(40) - 3/8| = {err:e}")))
}

fn cos4_leading_terms(_: &TruncationPolicy) -> Result<Verdict> {
    let q: f64 = 0.7;
    let a0 = -q.powi(3) / (72.0 * 15f64.sqrt());
    let b00 = -q.powi(4) / (192.0 * 70f64.sqrt());
    let err =
        (cos4_a_term(0, q) - a0).abs() / a0.abs() + (cos4_b_term(0, 0, q) - b00).abs() / b00.abs();
    let finite = (0..40).all(|m| {
        cos4_a_term(m, 5.0).is_finite() && (0..40).all(|k| cos4_b_term(m, k, 5.0).is_finite())
    });
    verdict((
        if finite { 1e-14 - err } else { -1.0 },
        format!("relative error of A0, B00: {err:e}; all terms finite: {finite}"),
    ))
}

fn bessel_i0_series(_: &TruncationPolicy) -> Result<Verdict> {
    let mut err = 0.0f64;
    for i in 0..=240 {
        let x = i as f64 * 0.25;
        // Neumaier-compensated sum of (x/2)^{2k}/(k!)²
        let y = 0.25 * x * x;
        let (mut sum, mut comp, mut term, mut k) = (1.0f64, 0.0f64, 1.0f64, 0.0f64);
        loop {
            k += 1.0;
            term *= y / (k * k);
            let t = sum + term;
            comp += if sum.abs() >= term.abs() {
                (sum - t) + term
            } else {
                (term - t) + sum
            };
            sum = t;
            if term < 1e-18 * sum {
                break;
            }
        }
        let reference = sum + comp;
        err = err.max((bessel_i0(x) - reference).abs() / reference);
    }
    verdict((
        1e-13 - err,
        format!("max relative error on [0, 60] = {err:e}"),
    ))
}

fn small_figure(id: FigureId) -> Result<crate::experiment::FigureTable> {
    let params = FigureParams {
        grid: Some(9),
        ..FigureParams::default()
    };
    emit_figure(id, &params, vec![])
}

fn csv_round_trip(_: &TruncationPolicy) -> Result<Verdict> {
    for id in FigureId::ALL {
        let t = small_figure(id)?;
        let mut buf = Vec::new();
        write_figure_csv(&t, &mut buf)?;
        let back = read_figure_csv(buf.as_slice())?;
        let same = back.columns.len() == t.columns.len()
            && back.columns.iter().zip(&t.columns).all(|(a, b)| {
                a.name == b.name
                    && a.values.len() == b.values.len()
                    && a.values
                        .iter()
                        .zip(&b.values)
                        .all(|(x, y)| x.to_bits() == y.to_bits())
            });
        if !same {
            return verdict((-1.0, format!("{id} did not round-trip")));
        }
    }
    verdict((0.0, "all figures reproduced bit for bit".into()))
}

fn overlay_safety(_: &TruncationPolicy) -> Result<Verdict> {
    let body = "# label: GBL\nn_bar,value,value_err\n1,0.8,0.1\n4,0.6,0.1\n";
    let path = std::env::temp_dir().join(format!("pbphase-check-{}.csv", std::process::id()));
    fs::write(&path, body)?;
    let outcome = (|| -> Result<bool> {
        let table = load_experiment(&path, None)?;
        let adjusted = gbl_adjust(table.clone())?;
        let append_only = adjusted.adjustments.starts_with(&table.adjustments)
            && adjusted.adjustments.len() == table.adjustments.len() + 1;
        Ok(append_only && fs::read_to_string(&path)? == body)
    })();
    let _ = fs::remove_file(&path);
    let ok = outcome?;
    verdict((
        if ok { 0.0 } else { -1.0 },
        format!("source untouched and provenance appended: {ok}"),
    ))
}

fn determinism(_: &TruncationPolicy) -> Result<Verdict> {
    for id in FigureId::ALL {
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_figure_csv(&small_figure(id)?, &mut a)?;
        write_figure_csv(&small_figure(id)?, &mut b)?;
        if a != b {
            return verdict((-1.0, format!("{id} output differs between runs")));
        }
    }
    verdict((0.0, "identical bytes for every figure".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_shape() {
        let g = log_grid_with_zero(100.0, 40);
        assert_eq!(g.len(), 40);
        assert_eq!(g[0], 0.0);
        assert!((g[39] - 100.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<_> = invariant_names().map(|(_, n)| n).collect();
        names.sort_unstable();
        let len = names.len();
        names.dedup();
        assert_eq!(names.len(), len);
    }
}
