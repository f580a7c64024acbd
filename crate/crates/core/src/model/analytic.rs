//! Closed-form error curves for the univariate two-class contraction
//! model `Z_{k+1} = a Z_k + W`, `X = Z + V`: the Bayes error of the
//! optimal time-k threshold rule and the error of the time-0 rule frozen
//! and applied at later times.

use crate::error::{Error, Result};

/// Standard normal CDF via the complementary error function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Parameters of the univariate example: contraction `0 < a < 1`, initial
/// class means `mu0_0 < mu0_1`, initial state standard deviation `sigma`,
/// and noise standard deviations `sigma_q`, `sigma_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnivariateExample {
    pub a: f64,
    pub mu0_0: f64,
    pub mu0_1: f64,
    pub sigma: f64,
    pub sigma_q: f64,
    pub sigma_r: f64,
}

impl UnivariateExample {
    pub fn new(
        a: f64,
        mu0_0: f64,
        mu0_1: f64,
        sigma: f64,
        sigma_q: f64,
        sigma_r: f64,
    ) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "contraction a must lie in (0, 1), got {a}"
            )));
        }
        if sigma < 0.0 || sigma_q < 0.0 || sigma_r < 0.0 {
            return Err(Error::InvalidArgument(
                "standard deviations must be nonnegative".into(),
            ));
        }
        if mu0_1 <= mu0_0 {
            return Err(Error::InvalidArgument(format!(
                "mu0_1 must exceed mu0_0, got {mu0_0} >= {mu0_1}"
            )));
        }
        Ok(Self {
            a,
            mu0_0,
            mu0_1,
            sigma,
            sigma_q,
            sigma_r,
        })
    }

    /// Class mean at time `k`: `a^k mu0`.
    pub fn class_mean(&self, class: usize, k: usize) -> f64 {
        let mu0 = if class == 0 { self.mu0_0 } else { self.mu0_1 };
        self.a.powi(k as i32) * mu0
    }

    /// Common observation variance at time `k`:
    /// `a^{2k} sigma^2 + (1 - a^{2k})/(1 - a^2) sigma_q^2 + sigma_r^2`.
    pub fn variance(&self, k: usize) -> f64 {
        let a2k = self.a.powi(2 * k as i32);
        a2k * self.sigma * self.sigma
            + (1.0 - a2k) / (1.0 - self.a * self.a) * self.sigma_q * self.sigma_q
            + self.sigma_r * self.sigma_r
    }

    /// Optimal (Bayes) threshold at time `k` under equal priors.
    pub fn optimal_threshold(&self, k: usize) -> f64 {
        self.a.powi(k as i32) * (self.mu0_0 + self.mu0_1) / 2.0
    }

    /// Bayes error at time `k`.
    pub fn bayes_error(&self, k: usize) -> f64 {
        let sigma_k = self.variance(k).sqrt();
        let ak = self.a.powi(k as i32);
        std_normal_cdf(-(ak / 2.0) * (self.mu0_1 - self.mu0_0) / sigma_k)
    }

    /// Error at time `k` of the time-0 optimal rule applied unchanged.
    pub fn frozen_rule_error(&self, k: usize) -> f64 {
        let sigma_k = self.variance(k).sqrt();
        let ak = self.a.powi(k as i32);
        let term1 = std_normal_cdf(-((2.0 * ak - 1.0) * self.mu0_1 - self.mu0_0) / (2.0 * sigma_k));
        let term2 = std_normal_cdf(-(self.mu0_1 - (2.0 * ak - 1.0) * self.mu0_0) / (2.0 * sigma_k));
        0.5 * term1 + 0.5 * term2
    }
}

/// Bayes and frozen-rule errors at time `k`; the frozen rule can never
/// beat the optimal rule.
pub fn example_errors(
    a: f64,
    mu0_0: f64,
    mu0_1: f64,
    sigma: f64,
    sigma_q: f64,
    sigma_r: f64,
    k: usize,
) -> Result<(f64, f64)> {
    let ex = UnivariateExample::new(a, mu0_0, mu0_1, sigma, sigma_q, sigma_r)?;
    Ok((ex.bayes_error(k), ex.frozen_rule_error(k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig_example(sigma: f64) -> UnivariateExample {
        UnivariateExample::new(0.9, 5.0, 10.0, sigma, 1.0, 1.0).unwrap()
    }

    #[test]
    fn bayes_error_at_time_zero() {
        let ex = fig_example(1.0);
        // Phi(-2.5 / sqrt(2)) with sigma_0^2 = sigma^2 + sigma_r^2 = 2.
        let expect = std_normal_cdf(-2.5 / 2.0f64.sqrt());
        assert_relative_eq!(ex.bayes_error(0), expect, epsilon = 1e-15);
        assert_relative_eq!(ex.bayes_error(0), 0.0385499, epsilon = 1e-6);
        // Frozen rule coincides with the optimal rule at k = 0.
        assert_relative_eq!(ex.frozen_rule_error(0), ex.bayes_error(0), epsilon = 1e-15);
    }

    #[test]
    fn identical_class_means_give_coin_flip() {
        // mu0_1 -> mu0_0 limit: approach equal means from above.
        let ex = UnivariateExample::new(0.9, 5.0, 5.0 + 1e-13, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(ex.bayes_error(0), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn frozen_rule_never_beats_bayes_and_both_grow() {
        for &sigma in &[0.5, 1.0, 2.0] {
            let ex = fig_example(sigma);
            let mut prev_bayes = 0.0;
            let mut prev_frozen = 0.0;
            for k in 0..=40 {
                let b = ex.bayes_error(k);
                let f = ex.frozen_rule_error(k);
                assert!(f >= b - 1e-12, "sigma={sigma} k={k}: frozen {f} < bayes {b}");
                if k > 0 {
                    assert!(b + 1e-12 >= prev_bayes, "bayes error not nondecreasing at k={k}");
                    assert!(f + 1e-12 >= prev_frozen, "frozen error not nondecreasing at k={k}");
                }
                prev_bayes = b;
                prev_frozen = f;
            }
            // Both approach the coin-flip limit.
            assert!(ex.bayes_error(200) > 0.49);
        }
    }

    #[test]
    fn rejects_out_of_range_contraction() {
        assert!(UnivariateExample::new(1.0, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(UnivariateExample::new(0.0, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(UnivariateExample::new(-0.5, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }
}
