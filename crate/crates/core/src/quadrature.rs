//! Trapezoid-based quadrature: Romberg extrapolation on a finite interval and
//! plain grid doubling for periodic integrands, where the uniform trapezoid
//! rule is already spectrally accurate.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    /// Difference between the last two refinement levels.
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Romberg integration of `f` over `[a, b]`.
///
/// Starts from `min_intervals` trapezoid panels (rounded up to a power of
/// two) and halves the step until two successive diagonal entries of the
/// Richardson table differ by less than `tol`.
pub fn romberg<F>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    min_intervals: usize,
    max_levels: usize,
) -> Result<Quadrature<f64>>
where
    F: Fn(f64) -> f64,
{
    let mut n = min_intervals.max(1).next_power_of_two();
    let width = b - a;
    let mut h = width / n as f64;
    let mut interior = 0.0;
    for i in 1..n {
        interior += f(a + i as f64 * h);
    }
    let ends = 0.5 * (f(a) + f(b));
    let mut evaluations = n + 1;
    let mut trapezoid = h * (ends + interior);
    let mut prev_row = vec![trapezoid];
    let mut last_change = f64::INFINITY;

    for level in 1..=max_levels {
        let mut odd = 0.0;
        for i in 0..n {
            odd += f(a + (i as f64 + 0.5) * h);
        }
        evaluations += n;
        interior += odd;
        n *= 2;
        h *= 0.5;
        trapezoid = h * (ends + interior);

        let mut row = Vec::with_capacity(level + 1);
        row.push(trapezoid);
        let mut factor = 1.0;
        for j in 1..=level {
            factor *= 4.0;
            let r = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (factor - 1.0);
            row.push(r);
        }
        last_change = (row[level] - prev_row[level - 1]).abs();
        let converged = last_change <= tol && level >= 2;
        prev_row = row;
        if converged {
            return Ok(Quadrature {
                value: prev_row[level],
                error_estimate: last_change,
                evaluations,
            });
        }
    }
    Err(Error::Convergence {
        levels: max_levels,
        last_change,
        target: tol,
    })
}

/// Trapezoid rule over one period for a vector of periodic integrands,
/// doubling the grid until every component changes by less than `tol`.
///
/// The result is the integral over the full period.
pub fn periodic_trapezoid<F, const K: usize>(
    f: F,
    period: f64,
    tol: f64,
    min_points: usize,
    max_points: usize,
) -> Result<Quadrature<[f64; K]>>
where
    F: Fn(f64) -> [f64; K],
{
    let mut n = min_points.max(2).next_power_of_two();
    let mut sums = [0.0; K];
    for i in 0..n {
        let v = f(period * i as f64 / n as f64);
        for (s, x) in sums.iter_mut().zip(v) {
            *s += x;
        }
    }
    let mut evaluations = n;
    let mut current = sums.map(|s| s * period / n as f64);
    let mut last_change = f64::INFINITY;

    while 2 * n <= max_points {
        for i in 0..n {
            let v = f(period * (i as f64 + 0.5) / n as f64);
            for (s, x) in sums.iter_mut().zip(v) {
                *s += x;
            }
        }
        evaluations += n;
        n *= 2;
        let next = sums.map(|s| s * period / n as f64);
        last_change = next
            .iter()
            .zip(current.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        current = next;
        if last_change <= tol {
            return Ok(Quadrature {
                value: current,
                error_estimate: last_change,
                evaluations,
            });
        }
    }
    Err(Error::Convergence {
        levels: n.trailing_zeros() as usize,
        last_change,
        target: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn romberg_polynomial_and_exponential() {
        let q = romberg(|x| x * x, 0.0, 2.0 * PI, 1e-12, 1, 20).unwrap();
        assert!((q.value - 8.0 * PI.powi(3) / 3.0).abs() < 1e-10);
        let q = romberg(f64::exp, 0.0, 1.0, 1e-13, 4, 20).unwrap();
        assert!((q.value - (1.0f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn romberg_reports_stall() {
        // sqrt has an endpoint singularity in its derivative; four levels are
        // not enough for 1e-15
        let err = romberg(f64::sqrt, 0.0, 1.0, 1e-15, 1, 4).unwrap_err();
        assert!(matches!(err, Error::Convergence { levels: 4, .. }));
    }

    #[test]
    fn periodic_trapezoid_exact_for_trig_polynomials() {
        let q = periodic_trapezoid(
            |x| [x.cos().powi(2), (3.0 * x).sin() + 1.0],
            2.0 * PI,
            1e-14,
            4,
            1 << 12,
        )
        .unwrap();
        assert!((q.value[0] - PI).abs() < 1e-13);
        assert!((q.value[1] - 2.0 * PI).abs() < 1e-13);
    }
}
