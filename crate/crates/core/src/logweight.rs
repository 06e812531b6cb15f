//! Non-negative magnitudes carried as natural logarithms.

use std::cmp::Ordering;
use std::iter::Sum;
use std::ops::{Add, Div, Mul};

use serde::Serialize;

/// `ln` of a non-negative quantity. Exact zero is `-inf`.
///
/// Addition is log-sum-exp with max-shift, multiplication adds logarithms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct LogWeight(f64);

impl LogWeight {
    pub const ZERO: LogWeight = LogWeight(f64::NEG_INFINITY);
    pub const ONE: LogWeight = LogWeight(0.0);

    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan());
        LogWeight(ln)
    }

    pub fn from_value(value: f64) -> Self {
        debug_assert!(value >= 0.0);
        LogWeight(value.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    /// Linear-space value; overflows to `inf` for large magnitudes.
    pub fn value(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn powi(self, k: i32) -> Self {
        if k == 0 {
            return LogWeight::ONE;
        }
        LogWeight(self.0 * k as f64)
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// `ln Σ e^{x_i}` with a single max-shift.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max == f64::INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

impl Add for LogWeight {
    type Output = LogWeight;
    fn add(self, rhs: LogWeight) -> LogWeight {
        LogWeight(log_add_exp(self.0, rhs.0))
    }
}

impl Mul for LogWeight {
    type Output = LogWeight;
    fn mul(self, rhs: LogWeight) -> LogWeight {
        if self.is_zero() || rhs.is_zero() {
            return LogWeight::ZERO;
        }
        LogWeight(self.0 + rhs.0)
    }
}

impl Div for LogWeight {
    type Output = LogWeight;
    fn div(self, rhs: LogWeight) -> LogWeight {
        assert!(!rhs.is_zero(), "division by an exact zero weight");
        if self.is_zero() {
            return LogWeight::ZERO;
        }
        LogWeight(self.0 - rhs.0)
    }
}

impl Sum for LogWeight {
    fn sum<I: Iterator<Item = LogWeight>>(iter: I) -> LogWeight {
        let values: Vec<f64> = iter.map(LogWeight::ln).collect();
        LogWeight(log_sum_exp(&values))
    }
}

impl PartialOrd for LogWeight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}
