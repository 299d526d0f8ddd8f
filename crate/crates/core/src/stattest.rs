//! Exact paired sign test in log space.
//!
//! Binomial terms are formed from log-gamma values and accumulated with
//! log-sum-exp, so tails far below `f64::MIN_POSITIVE` are still reported
//! through `log10_p`.

use std::f64::consts::{LN_10, LN_2};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTestResult {
    /// A correct, B wrong.
    pub n_plus: usize,
    /// B correct, A wrong.
    pub n_minus: usize,
    pub n_tie: usize,
    pub p_two_sided: f64,
    pub log10_p: f64,
}

fn ln_choose(n: usize, k: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Natural log of `P(X <= k)` for `X ~ Binomial(n, 1/2)`.
pub fn log_binom_cdf(k: usize, n: usize) -> Result<f64> {
    if k > n {
        return Err(Error::InvalidArgument(format!("binomial cdf needs k <= n, got k={k} n={n}")));
    }
    if k == n {
        return Ok(0.0);
    }
    let terms: Vec<f64> = (0..=k).map(|i| ln_choose(n, i)).collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    // rounding can push the log a hair above zero near k = n
    Ok((max + sum.ln() - n as f64 * LN_2).min(0.0))
}

/// Two-sided exact sign test over positionally paired correctness flags.
pub fn sign_test(correct_a: &[bool], correct_b: &[bool]) -> Result<SignTestResult> {
    if correct_a.len() != correct_b.len() {
        return Err(Error::LengthMismatch {
            left: correct_a.len(),
            right: correct_b.len(),
        });
    }
    let (mut n_plus, mut n_minus, mut n_tie) = (0, 0, 0);
    for (&a, &b) in correct_a.iter().zip(correct_b) {
        match (a, b) {
            (true, false) => n_plus += 1,
            (false, true) => n_minus += 1,
            _ => n_tie += 1,
        }
    }
    Ok(from_counts(n_plus, n_minus, n_tie))
}

/// Sign test from discordant counts directly.
pub fn from_counts(n_plus: usize, n_minus: usize, n_tie: usize) -> SignTestResult {
    let n = n_plus + n_minus;
    let ln_p = if n == 0 {
        0.0
    } else {
        let tail = log_binom_cdf(n_plus.min(n_minus), n).expect("min(n+, n-) <= n");
        (LN_2 + tail).min(0.0)
    };
    SignTestResult {
        n_plus,
        n_minus,
        n_tie,
        p_two_sided: ln_p.exp(),
        // avoid -0.0 in reports
        log10_p: if ln_p == 0.0 { 0.0 } else { ln_p / LN_10 },
    }
}
