//! Integer-order Bessel functions of the first and second kind.
//!
//! `J_n` is evaluated for every order at once with Miller's backward
//! recurrence, normalized by `J_0 + 2 Σ J_2k = 1`. `Y_0` then follows from
//! the Neumann series
//!
//! ```text
//! Y_0(x) = (2/π)(ln(x/2) + γ) J_0(x) − (4/π) Σ_{k≥1} (−1)^k J_2k(x) / k
//! ```
//!
//! and `Y_1 = −Y_0'` from its term-wise derivative. Higher orders of `Y` use
//! forward recurrence, which is stable for the second kind.

use std::f64::consts::{FRAC_2_PI, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest order supported by the public evaluators.
pub const MAX_ORDER: u32 = 12;
/// Largest zero index tabulated by [`bessel_zero`].
pub const MAX_ZERO_INDEX: u32 = 20;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE_ABOVE: f64 = 1e250;

/// First-kind Bessel function `J_order(x)`.
///
/// Accurate to better than 1e-10 absolute for `order <= 12` and `|x| <= 100`.
pub fn bessel_j(order: u32, x: f64) -> f64 {
    debug_assert!(x.is_finite());
    let value = j_orders(order as usize, x.abs())[order as usize];
    if x < 0.0 && order % 2 == 1 {
        -value
    } else {
        value
    }
}

/// Second-kind Bessel function `Y_order(x)`, defined for `x > 0`.
pub fn bessel_y(order: u32, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Y_{order}(x) requires finite x > 0, got {x}")));
    }
    Ok(CylinderFunctions::new(order as usize, x).y[order as usize])
}

/// The `index`-th positive zero of `J_order`.
pub fn bessel_zero(order: u32, index: u32) -> f64 {
    assert!(order <= MAX_ORDER, "order {order} exceeds {MAX_ORDER}");
    assert!(
        (1..=MAX_ZERO_INDEX).contains(&index),
        "zero index {index} outside 1..={MAX_ZERO_INDEX}"
    );
    zeros_of(order)[index as usize - 1]
}

/// `J_0..=J_max_order` at `x >= 0`.
///
/// The returned vector may be longer than `max_order + 1`; the extra
/// entries are higher orders from the recurrence and remain valid values.
pub(crate) fn j_orders(max_order: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut out = vec![0.0; max_order + 2];
        out[0] = 1.0;
        return out;
    }
    let top = max_order.max(x.ceil() as usize);
    let start = 2 * ((top + 16 + (40.0 * top as f64).sqrt() as usize) / 2);
    let mut values = vec![0.0; start + 2];
    let two_over_x = 2.0 / x;
    let mut next = 0.0;
    let mut current = 1e-30;
    let mut even_sum = 0.0;
    values[start] = current;
    for k in (1..=start).rev() {
        let prev = k as f64 * two_over_x * current - next;
        next = current;
        current = prev;
        values[k - 1] = current;
        if (k - 1) % 2 == 0 && k > 1 {
            even_sum += current;
        }
        if current.abs() > RESCALE_ABOVE {
            let scale = 1.0 / RESCALE_ABOVE;
            for v in values[k - 1..].iter_mut() {
                *v *= scale;
            }
            next *= scale;
            current *= scale;
            even_sum *= scale;
        }
    }
    let norm = values[0] + 2.0 * even_sum;
    for v in values.iter_mut() {
        *v /= norm;
    }
    values
}

/// `J`, `J'`, `Y`, `Y'` for orders `0..=order` at a single argument.
pub(crate) struct CylinderFunctions {
    pub j: Vec<f64>,
    pub jp: Vec<f64>,
    pub y: Vec<f64>,
    pub yp: Vec<f64>,
}

impl CylinderFunctions {
    pub fn new(order: usize, x: f64) -> Self {
        debug_assert!(x > 0.0);
        let jall = j_orders(order + 1, x);
        let log_term = (x / 2.0).ln() + EULER_GAMMA;

        let mut series = 0.0;
        let mut series_deriv = 0.0;
        let mut k = 1;
        while 2 * k + 1 < jall.len() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let kf = k as f64;
            series += sign * jall[2 * k] / kf;
            series_deriv += sign * 0.5 * (jall[2 * k - 1] - jall[2 * k + 1]) / kf;
            k += 1;
        }
        let y0 = FRAC_2_PI * log_term * jall[0] - 2.0 * FRAC_2_PI * series;
        let y0p = FRAC_2_PI * (jall[0] / x - log_term * jall[1]) - 2.0 * FRAC_2_PI * series_deriv;

        let mut y = Vec::with_capacity(order + 2);
        y.push(y0);
        y.push(-y0p);
        for n in 1..=order {
            let yn = 2.0 * n as f64 / x * y[n] - y[n - 1];
            y.push(yn);
        }

        let mut jp = Vec::with_capacity(order + 1);
        let mut yp = Vec::with_capacity(order + 1);
        jp.push(-jall[1]);
        yp.push(-y[1]);
        for n in 1..=order {
            jp.push(0.5 * (jall[n - 1] - jall[n + 1]));
            yp.push(0.5 * (y[n - 1] - y[n + 1]));
        }
        let mut j = jall;
        j.truncate(order + 1);
        y.truncate(order + 1);
        Self { j, jp, y, yp }
    }
}

/// `J_order(x)` and `J_order'(x)` only; used where the second kind is not
/// needed (the regular innermost region).
pub(crate) fn j_and_derivative(order: usize, x: f64) -> (f64, f64) {
    let j = j_orders(order + 1, x);
    let jp = if order == 0 {
        -j[1]
    } else {
        0.5 * (j[order - 1] - j[order + 1])
    };
    (j[order], jp)
}

fn zeros_of(order: u32) -> &'static [f64] {
    static TABLE: [OnceLock<Vec<f64>>; MAX_ORDER as usize + 1] = [const { OnceLock::new() }; MAX_ORDER as usize + 1];
    TABLE[order as usize].get_or_init(|| compute_zeros(order, MAX_ZERO_INDEX as usize))
}

// Consecutive zeros of J_n are more than 3 apart, so a 0.5 step cannot
// skip one.
fn compute_zeros(order: u32, count: usize) -> Vec<f64> {
    let f = |x: f64| bessel_j(order, x);
    let mut zeros = Vec::with_capacity(count);
    let mut lo = (order as f64).max(0.5);
    let mut f_lo = f(lo);
    while zeros.len() < count {
        let hi = lo + 0.5;
        let f_hi = f(hi);
        if f_lo == 0.0 {
            zeros.push(lo);
        } else if f_lo.signum() != f_hi.signum() {
            zeros.push(bisect(&f, lo, hi, f_lo));
        }
        lo = hi;
        f_lo = f_hi;
    }
    zeros
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `2 / (π x)`, the Wronskian `J_n Y_n' − J_n' Y_n`.
pub fn wronskian(x: f64) -> f64 {
    2.0 / (PI * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from an independent library (SciPy), frozen here.
    const J_REF: &[(u32, f64, f64)] = &[
        (0, 1.0, 0.7651976865579666),
        (1, 1.0, 0.44005058574493355),
        (0, 10.0, -0.24593576445134832),
        (5, 10.0, -0.2340615281867936),
        (12, 3.0, 2.275725448320573e-07),
        (3, 50.0, 0.09273480406163442),
        (0, 100.0, 0.01998585030422312),
        (7, 99.5, 0.08008742566142414),
        (2, 0.01, 1.249989583365886e-05),
    ];

    const Y_REF: &[(u32, f64, f64)] = &[
        (0, 1.0, 0.088256964215677),
        (1, 1.0, -0.7812128213002889),
        (0, 0.001, -4.471416611375924),
        (1, 0.001, -636.6221672311394),
        (5, 10.0, 0.13540304768936218),
        (12, 3.0, -120415.149504388),
        (0, 100.0, -0.07724431336508318),
        (8, 0.05, -1.0514760160220196e+16),
        (3, 37.7, 0.10213886853667958),
    ];

    /// Plain power series for J_n, used as an independent check for small x.
    fn j_series(n: u32, x: f64) -> f64 {
        let half = x / 2.0;
        let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
        let mut sum = term;
        for k in 1..200 {
            term *= -half * half / (k as f64 * (k + n) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    }

    /// Ascending series Y_0 = (2/π)[(ln(x/2)+γ)J_0 + Σ (−1)^{k+1} H_k (x²/4)^k/(k!)²].
    fn y0_series(x: f64) -> f64 {
        let q = x * x / 4.0;
        let mut term = 1.0;
        let mut harmonic = 0.0;
        let mut sum = 0.0;
        for k in 1..200 {
            term *= -q / (k as f64 * k as f64);
            harmonic += 1.0 / k as f64;
            sum -= term * harmonic;
            if term.abs() < 1e-20 {
                break;
            }
        }
        FRAC_2_PI * (((x / 2.0).ln() + EULER_GAMMA) * j_series(0, x) + sum)
    }

    #[test]
    fn origin_values() {
        assert_eq!(bessel_j(0, 0.0), 1.0);
        assert_eq!(bessel_j(1, 0.0), 0.0);
        assert_eq!(bessel_j(7, 0.0), 0.0);
    }

    #[test]
    fn j_matches_reference() {
        for &(n, x, want) in J_REF {
            let got = bessel_j(n, x);
            assert!((got - want).abs() < 1e-12, "J_{n}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn j_matches_power_series_on_small_arguments() {
        for n in 0..=MAX_ORDER {
            for i in 0..=80 {
                let x = i as f64 * 0.1;
                let err = (bessel_j(n, x) - j_series(n, x)).abs();
                assert!(err < 1e-12, "J_{n}({x}) err {err}");
            }
        }
    }

    #[test]
    fn y_matches_reference() {
        for &(n, x, want) in Y_REF {
            let got = bessel_y(n, x).unwrap();
            let tol = 1e-10 * want.abs().max(1.0);
            assert!((got - want).abs() < tol, "Y_{n}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn y_rejects_nonpositive_argument() {
        assert!(matches!(bessel_y(0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_y(3, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn y0_decreases_without_bound_toward_origin() {
        let mut prev = bessel_y(0, 0.5).unwrap();
        for e in 1..12 {
            let y = bessel_y(0, 0.5 * 10f64.powi(-e)).unwrap();
            assert!(y < prev);
            prev = y;
        }
        assert!(prev < -15.0);
    }

    #[test]
    fn first_zero_of_y0_from_independent_series() {
        // bisect the ascending series, independently of the Neumann route
        let (mut lo, mut hi) = (0.5, 1.5);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if y0_series(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert!((root - 0.893577).abs() < 1e-5);
        assert!(bessel_y(0, 0.893577).unwrap().abs() < 1e-5);
        assert!(bessel_y(0, root).unwrap().abs() < 1e-12);
    }

    #[test]
    fn y0_agrees_with_ascending_series() {
        for i in 1..=60 {
            let x = i as f64 * 0.1;
            let err = (bessel_y(0, x).unwrap() - y0_series(x)).abs();
            assert!(err < 1e-11, "Y_0({x}) err {err}");
        }
    }

    #[test]
    fn wronskian_identity() {
        for &x in &[1e-3, 0.1, 1.0, 7.3, 42.0, 100.0] {
            for n in 0..=MAX_ORDER as usize {
                let c = CylinderFunctions::new(n, x);
                let w = c.j[n] * c.yp[n] - c.jp[n] * c.y[n];
                let rel = (w - wronskian(x)).abs() / wronskian(x);
                assert!(rel < 1e-9, "n={n} x={x} rel={rel}");
            }
        }
        let c = CylinderFunctions::new(0, 1.0);
        assert!((c.j[0] * c.yp[0] - c.jp[0] * c.y[0] - 2.0 / PI).abs() < 1e-8);
    }

    #[test]
    fn zeros_from_bracket_and_bisect() {
        // J_0 power series root, independent of the tabulated zeros
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if j_series(0, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!((bessel_zero(0, 1) - oracle).abs() < 1e-9);
        assert!((bessel_zero(0, 1) - 2.404826).abs() < 1e-6);
        assert!(bessel_j(0, 2.404826).abs() < 1e-6);

        assert!((bessel_zero(0, 3) - 8.65372791291101).abs() < 1e-9);
        assert!((bessel_zero(12, 20) - 79.99590643563725).abs() < 1e-9);
        assert!((bessel_zero(8, 8) - 36.02561506).abs() < 1e-7);
    }

    #[test]
    fn zeros_increase_with_index() {
        for m in 0..=MAX_ORDER {
            for n in 1..MAX_ZERO_INDEX {
                assert!(bessel_zero(m, n + 1) > bessel_zero(m, n));
            }
        }
    }

    #[test]
    fn uniform_drum_ratios() {
        let base = bessel_zero(0, 1);
        assert!((bessel_zero(1, 1) / base - 1.59).abs() < 0.005);
        assert!((bessel_zero(0, 2) / base - 2.30).abs() < 0.005);
    }
}
