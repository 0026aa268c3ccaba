//! Special functions: Poisson weights and the modified Bessel function I₀.
//!
//! The Poisson pmf uses Loader's saddle-point form, which keeps full relative
//! precision for large means where `exp(n ln λ − λ − ln n!)` would lose
//! digits to cancellation inside the exponent.

use std::f64::consts::PI;

/// Below this argument I₀ is summed from its power series; above it the
/// scaled asymptotic expansion is used.
pub const I0_SERIES_LIMIT: f64 = 15.0;

/// `ln n! − [(n + ½) ln n − n + ½ ln 2π]` for n = 1..=15.
#[allow(clippy::excessive_precision)]
const STIRLERR_TABLE: [f64; 15] = [
    0.081_061_466_795_327_258,
    0.041_340_695_955_409_294,
    0.027_677_925_684_998_339,
    0.020_790_672_103_765_093,
    0.016_644_691_189_821_192,
    0.013_876_128_823_070_748,
    0.011_896_709_945_891_770,
    0.010_411_265_261_972_096,
    0.009_255_462_182_712_733,
    0.008_330_563_433_362_871,
    0.007_573_675_487_951_841,
    0.006_942_840_107_209_530,
    0.006_408_994_188_004_207,
    0.005_951_370_112_758_848,
    0.005_554_733_551_962_801,
];

/// Remainder of Stirling's approximation to `ln n!`, for n ≥ 1.
pub fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    debug_assert!(n >= 1);
    if n <= 15 {
        return STIRLERR_TABLE[(n - 1) as usize];
    }
    let x = n as f64;
    let xx = x * x;
    if n > 500 {
        (S0 - S1 / xx) / x
    } else if n > 80 {
        (S0 - (S1 - S2 / xx) / xx) / x
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
    }
}

/// Deviance term `x ln(x/m) + m − x`, accurate when x ≈ m.
pub fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / f64::from(2 * j + 1);
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// Natural log of the Poisson probability `e^{−λ} λⁿ / n!`.
pub fn ln_poisson_pmf(n: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if n == 0 {
        return -mean;
    }
    let x = n as f64;
    -stirlerr(n) - bd0(x, mean) - 0.5 * (2.0 * PI * x).ln()
}

pub fn poisson_pmf(n: u64, mean: f64) -> f64 {
    ln_poisson_pmf(n, mean).exp()
}

/// Power series Σ_{k≥1} (x²/4)^k / (k!)², i.e. I₀(x) − 1 without the
/// cancellation of subtracting one.
pub fn bessel_i0_minus_one(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..10_000u32 {
        let kf = f64::from(k);
        term *= q / (kf * kf);
        sum += term;
        if term <= sum * f64::EPSILON * 0.5 {
            break;
        }
    }
    sum
}

/// Scaled asymptotic expansion `e^{−x} I₀(x) ≈ (2πx)^{−½} Σ ((2k−1)!!)² / (k! (8x)^k)`,
/// truncated before the smallest term.
fn bessel_i0e_asymptotic(x: f64) -> f64 {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..200u32 {
        let odd = f64::from(2 * k - 1);
        let next = term * odd * odd / (8.0 * x * f64::from(k));
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= sum.abs() * f64::EPSILON * 0.5 {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(x: f64) -> f64 {
    let x = x.abs();
    if x < I0_SERIES_LIMIT {
        1.0 + bessel_i0_minus_one(x)
    } else {
        bessel_i0e_asymptotic(x) * x.exp()
    }
}

/// Exponentially scaled `e^{−|x|} I₀(x)`; finite for any finite x.
pub fn bessel_i0e(x: f64) -> f64 {
    let x = x.abs();
    if x < I0_SERIES_LIMIT {
        (1.0 + bessel_i0_minus_one(x)) * (-x).exp()
    } else {
        bessel_i0e_asymptotic(x)
    }
}

/// `ln I₀(x)`, computed without overflow and with full precision near zero.
pub fn ln_bessel_i0(x: f64) -> f64 {
    let x = x.abs();
    if x < I0_SERIES_LIMIT {
        bessel_i0_minus_one(x).ln_1p()
    } else {
        x + bessel_i0e_asymptotic(x).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn stirlerr_table_matches_series_at_boundary() {
        // series branch evaluated at 15 should agree with the table entry
        let x = 15.0f64;
        let xx = x * x;
        let series = (1.0 / 12.0
            - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - 1.0 / 1188.0 / xx) / xx) / xx) / xx)
            / x;
        assert_relative_eq!(series, stirlerr(15), max_relative = 1e-12);
    }

    #[test]
    fn poisson_small_values_exact() {
        assert_eq!(poisson_pmf(0, 0.0), 1.0);
        assert_eq!(poisson_pmf(3, 0.0), 0.0);
        assert_relative_eq!(poisson_pmf(0, 2.0), (-2.0f64).exp(), max_relative = 1e-15);
        // e^{-2} 2^3 / 6
        assert_relative_eq!(
            poisson_pmf(3, 2.0),
            (-2.0f64).exp() * 8.0 / 6.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn poisson_recurrence_consistent_for_large_mean() {
        // P_{n+1}/P_n = λ/(n+1)
        let mean = 350.0;
        for n in [10u64, 200, 349, 350, 351, 700] {
            let ratio = poisson_pmf(n + 1, mean) / poisson_pmf(n, mean);
            assert_relative_eq!(ratio, mean / (n as f64 + 1.0), max_relative = 1e-13);
        }
    }

    #[test]
    fn poisson_sums_to_one() {
        for mean in [0.1, 1.0, 4.0, 50.0, 200.0] {
            let s: f64 = (0..2000).map(|n| poisson_pmf(n, mean)).sum();
            assert!((s - 1.0).abs() < 1e-13, "mean {mean}: {s}");
        }
    }

    #[test]
    fn i0_known_values() {
        assert_eq!(bessel_i0(0.0), 1.0);
        // high-precision reference values
        assert_relative_eq!(
            bessel_i0(1.0),
            1.266_065_877_752_008_4,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            bessel_i0(2.0),
            2.279_585_302_336_067_3,
            max_relative = 1e-15
        );
        assert_relative_eq!(bessel_i0(-2.0), bessel_i0(2.0));
    }

    #[test]
    fn i0_branches_meet_continuously() {
        let below = 1.0 + bessel_i0_minus_one(I0_SERIES_LIMIT);
        let above = bessel_i0e_asymptotic(I0_SERIES_LIMIT) * I0_SERIES_LIMIT.exp();
        assert_relative_eq!(below, above, max_relative = 1e-14);
    }

    #[test]
    fn scaled_and_log_forms_agree() {
        for x in [0.0, 0.3, 7.0, 14.9, 15.0, 25.0, 60.0] {
            assert_relative_eq!(
                bessel_i0e(x),
                bessel_i0(x) * (-x).exp(),
                max_relative = 1e-14
            );
            assert_relative_eq!(
                ln_bessel_i0(x),
                bessel_i0(x).ln(),
                max_relative = 1e-14,
                epsilon = 1e-300
            );
        }
        assert!(bessel_i0e(800.0).is_finite());
        assert!(bessel_i0(800.0).is_infinite());
    }

    #[test]
    fn i0_minus_one_small_argument() {
        // x²/4 + x⁴/64
        let x = 1e-5;
        assert_relative_eq!(
            bessel_i0_minus_one(x),
            x * x / 4.0 + x.powi(4) / 64.0,
            max_relative = 1e-15
        );
    }
}
