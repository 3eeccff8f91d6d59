//! Closed-form mathematics of the Ornstein-Uhlenbeck (Vasicek) real-rate
//! model `dr = -alpha (r - m) dt + k dW`, with a constant market price of
//! risk `q` entering through the risk-adjusted mean `m* = m + q k / alpha`.
//!
//! Everything here is a pure function of its arguments.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::erfc;

/// Instantaneous OU parameters in annual units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuParams {
    /// Stationary mean (fraction per year).
    pub m: f64,
    /// Noise intensity (fraction per year^(3/2)).
    pub k: f64,
    /// Reversion rate (1 / year).
    pub alpha: f64,
}

impl OuParams {
    /// `k = 0` is accepted and gives the deterministic relaxation limit.
    pub fn new(m: f64, k: f64, alpha: f64) -> Result<Self> {
        let p = OuParams { m, k, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.m.is_finite() || !self.k.is_finite() || !self.alpha.is_finite() {
            return Err(Error::domain("OU parameters must be finite"));
        }
        if self.k < 0.0 {
            return Err(Error::domain(format!("noise intensity k = {} is negative", self.k)));
        }
        if self.alpha <= 0.0 {
            return Err(Error::domain(format!(
                "reversion rate alpha = {} must be positive",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Stationary variance `k^2 / (2 alpha)`.
    pub fn stationary_variance(&self) -> f64 {
        self.k * self.k / (2.0 * self.alpha)
    }

    /// Stationary standard deviation.
    pub fn sigma(&self) -> f64 {
        self.stationary_variance().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskSpec {
    pub q: f64,
    pub m_star: f64,
}

pub fn risk_adjusted_mean(params: &OuParams, q: f64) -> RiskSpec {
    RiskSpec {
        q,
        m_star: params.m + q * params.k / params.alpha,
    }
}

// Series thresholds: below these the closed forms lose more than a few ulps
// to cancellation.
const E2_SERIES_BELOW: f64 = 0.5;
const E3_SERIES_BELOW: f64 = 1.0;

/// `(1 - e^{-x}) / x`.
fn relax1(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// `(x - 1 + e^{-x}) / x^2 = sum_n (-x)^n / (n + 2)!`.
fn relax2(x: f64) -> f64 {
    if x < E2_SERIES_BELOW {
        let mut term: f64 = 0.5;
        let mut sum = term;
        for n in 1..30 {
            term *= -x / (n as f64 + 2.0);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        (x + (-x).exp_m1()) / (x * x)
    }
}

/// `[x - 2(1 - e^{-x}) + (1 - e^{-2x})/2] / x^3`
/// `= sum_{n>=3} (-1)^n (2 - 2^{n-1}) x^{n-3} / n!`.
fn relax3(x: f64) -> f64 {
    if x < E3_SERIES_BELOW {
        let mut sum: f64 = 0.0;
        let mut xpow = 1.0; // x^{n-3}
        let mut fact = 6.0; // n!
        let mut pow2 = 4.0; // 2^{n-1}
        for n in 3..60 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let term = sign * (2.0 - pow2) * xpow / fact;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            xpow *= x;
            fact *= (n + 1) as f64;
            pow2 *= 2.0;
        }
        sum
    } else {
        let e1 = -(-x).exp_m1();
        let e2 = -(-2.0 * x).exp_m1();
        (x - 2.0 * e1 + 0.5 * e2) / (x * x * x)
    }
}

/// Yield `-ln D(tau) / tau` written as `intercept + slope * r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineYield {
    pub intercept: f64,
    pub slope: f64,
}

impl AffineYield {
    pub fn at(&self, r: f64) -> f64 {
        self.intercept + self.slope * r
    }
}

/// Coefficients of `ln D(tau) = -r tau e1 - m* alpha tau^2 e2 + k^2 tau^3 e3 / 2`.
fn log_discount_terms(params: &OuParams, q: f64, tau: f64) -> (f64, f64) {
    let x = params.alpha * tau;
    let m_star = risk_adjusted_mean(params, q).m_star;
    let slope = -tau * relax1(x);
    let constant =
        -m_star * params.alpha * tau * tau * relax2(x) + 0.5 * params.k * params.k * tau * tau * tau * relax3(x);
    (constant, slope)
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::domain(format!("maturity tau = {tau} must be finite and >= 0")));
    }
    Ok(())
}

/// Log of the discount function for maturity `tau` given current rate `r`.
pub fn log_discount(params: &OuParams, q: f64, r: f64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let (constant, slope) = log_discount_terms(params, q, tau);
    Ok(constant + slope * r)
}

/// Annualized rate `-ln D(tau) / tau`; at `tau = 0` returns the limit `r`.
pub fn annualized_rate(params: &OuParams, q: f64, r: f64, tau: f64) -> Result<f64> {
    Ok(yield_coefficients(params, q, tau)?.at(r))
}

/// The annualized rate as an affine function of the current rate.
pub fn yield_coefficients(params: &OuParams, q: f64, tau: f64) -> Result<AffineYield> {
    check_tau(tau)?;
    if tau == 0.0 {
        return Ok(AffineYield {
            intercept: 0.0,
            slope: 1.0,
        });
    }
    let x = params.alpha * tau;
    let m_star = risk_adjusted_mean(params, q).m_star;
    Ok(AffineYield {
        intercept: m_star * x * relax2(x) - 0.5 * params.k * params.k * tau * tau * relax3(x),
        slope: relax1(x),
    })
}

/// Long-run rate `m + q k / alpha - k^2 / (2 alpha^2)`.
pub fn long_run_rate(params: &OuParams, q: f64) -> f64 {
    let ratio = params.k / params.alpha;
    params.m + ratio * (q - 0.5 * ratio)
}

/// The two transform points at which the characteristic function is used:
/// `omega1 = 0` gives the marginal law of `r`, `omega1 = -i` the discount.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Omega1 {
    Zero,
    MinusI,
}

impl Omega1 {
    pub fn value(self) -> Complex64 {
        match self {
            Omega1::Zero => Complex64::new(0.0, 0.0),
            Omega1::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

/// Coefficients of the Gaussian joint characteristic function
/// `exp(-A w2^2 - B w2 - C)` of `(x(t), r(t))` started at `r0`, with the
/// real-world mean `m` (no risk adjustment).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharCoeffs {
    pub omega1: Omega1,
    pub t: f64,
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

pub fn char_coeffs(params: &OuParams, r0: f64, omega1: Omega1, t: f64) -> Result<CharCoeffs> {
    check_tau(t)?;
    let OuParams { m, k, alpha } = *params;
    let i = Complex64::i();
    let w = omega1.value();
    let e1 = (-alpha * t).exp();
    let e2 = (-2.0 * alpha * t).exp();
    let k2 = k * k;

    let a = Complex64::from(k2 / (4.0 * alpha) * (1.0 - e2));
    let b = i * r0 * e1 + w * (k2 / (2.0 * alpha * alpha)) * (1.0 - 2.0 * e1 + e2) + i * m * (1.0 - e1);
    let bracket = alpha * t - 2.0 * (1.0 - e1) + 0.5 * (1.0 - e2);
    let c = i * w * r0 * (1.0 - e1) / alpha
        + w * w * (k2 / (2.0 * alpha * alpha * alpha)) * bracket
        + i * m * w * (t - (1.0 - e1) / alpha);
    Ok(CharCoeffs { omega1, t, a, b, c })
}

/// Conditional mean and variance of `r(t)` given `r(0) = r0`.
pub fn transition_moments(params: &OuParams, r0: f64, t: f64) -> (f64, f64) {
    let decay = (-params.alpha * t).exp();
    let mean = r0 * decay + params.m * (1.0 - decay);
    let var = params.k * params.k * -(-2.0 * params.alpha * t).exp_m1() / (2.0 * params.alpha);
    (mean, var)
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("time t = {t} must be positive")));
    }
    Ok(())
}

fn gaussian_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let z = x - mean;
    (-(z * z) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Density of `r(t)` given `r(0) = r0`.
pub fn transition_density(params: &OuParams, r0: f64, t: f64, r: f64) -> Result<f64> {
    check_time(t)?;
    let (mean, var) = transition_moments(params, r0, t);
    Ok(gaussian_pdf(r, mean, var))
}

/// Stationary density, Normal(m, k^2 / 2 alpha).
pub fn stationary_density(params: &OuParams, r: f64) -> f64 {
    gaussian_pdf(r, params.m, params.stationary_variance())
}

/// `P(r(t) < 0 | r(0) = r0)`.
pub fn prob_negative(params: &OuParams, r0: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let decay = (-params.alpha * t).exp();
    let mean = r0 * decay + params.m * (1.0 - decay);
    let spread = -(-2.0 * params.alpha * t).exp_m1();
    let z = params.alpha.sqrt() / params.k * mean / spread.sqrt();
    Ok(0.5 * erfc(z))
}

/// Stationary probability of a negative rate, `Erfc(mu / kappa) / 2` with
/// `mu = m / alpha` and `kappa = k / alpha^{3/2}`.
pub fn prob_negative_stationary(params: &OuParams) -> f64 {
    let mu = params.m / params.alpha;
    let kappa = params.k / params.alpha.powf(1.5);
    0.5 * erfc(mu / kappa)
}

/// Stationary probability that the rate lies below the long-run rate.
pub fn prob_below_long_run(params: &OuParams, q: f64) -> f64 {
    let r_inf = long_run_rate(params, q);
    0.5 * erfc(params.alpha.sqrt() / params.k * (params.m - r_inf))
}

#[cfg(test)]
mod tests {
    use super::*;

    const UK: OuParams = OuParams {
        m: 0.0084,
        k: 0.089,
        alpha: 0.82,
    };
    const US: OuParams = OuParams {
        m: 0.0083,
        k: 0.058,
        alpha: 0.65,
    };

    #[test]
    fn risk_adjustment() {
        assert_eq!(risk_adjusted_mean(&UK, 0.0).m_star, UK.m);
        assert!((risk_adjusted_mean(&UK, 0.13).m_star - 0.022_509_756_097_560_976).abs() < 1e-15);
        assert!((risk_adjusted_mean(&US, 0.20).m_star - 0.026_146_153_846_153_846).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(OuParams::new(0.01, -0.1, 1.0).is_err());
        assert!(OuParams::new(0.01, 0.1, 0.0).is_err());
        assert!(OuParams::new(f64::NAN, 0.1, 1.0).is_err());
        assert!(OuParams::new(-0.05, 0.0, 1.0).is_ok());
        assert!((UK.sigma() - 0.089 / 1.64f64.sqrt()).abs() < 1e-16);
    }

    #[test]
    fn discount_edge_cases() {
        for p in [UK, US] {
            assert_eq!(log_discount(&p, 0.3, 0.05, 0.0).unwrap(), 0.0);
        }
        let flat = OuParams::new(0.02, 0.0, 0.7).unwrap();
        assert!((log_discount(&flat, 0.0, 0.02, 10.0).unwrap() + 0.2).abs() < 1e-15);
        for tau in [0.0, 0.01, 1.0, 30.0, 500.0] {
            assert!((annualized_rate(&flat, 0.0, 0.02, tau).unwrap() - 0.02).abs() < 1e-15);
        }
        assert!(log_discount(&UK, 0.0, 0.0, -1.0).is_err());
        assert_eq!(annualized_rate(&UK, 0.13, 0.037, 0.0).unwrap(), 0.037);
    }

    // Direct transcription of the closed form with plain exponentials.
    fn naive_log_discount(p: &OuParams, q: f64, r: f64, tau: f64) -> f64 {
        let a = p.alpha;
        let ms = p.m + q * p.k / a;
        let e1 = 1.0 - (-a * tau).exp();
        let e2 = 1.0 - (-2.0 * a * tau).exp();
        -r / a * e1 - ms * (tau - e1 / a) + p.k * p.k / (2.0 * a * a * a) * (a * tau - 2.0 * e1 + 0.5 * e2)
    }

    #[test]
    fn series_branches_agree_with_closed_form() {
        for &tau in &[0.2, 0.6, 1.0, 1.3, 2.0, 10.0, 100.0] {
            for p in [UK, US] {
                let got = log_discount(&p, 0.13, 0.01, tau).unwrap();
                let want = naive_log_discount(&p, 0.13, 0.01, tau);
                assert!(
                    (got - want).abs() < 1e-13 * want.abs().max(1e-3),
                    "tau {tau}: {got} vs {want}"
                );
            }
        }
        // tiny alpha, where the plain closed form cancels catastrophically;
        // reference from 40-digit arithmetic
        let p = OuParams::new(0.01, 0.05, 1e-10).unwrap();
        let got = log_discount(&p, 0.0, 0.02, 3.0).unwrap();
        let want = -0.048_749_999_998_026_101_487_108;
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
    }

    #[test]
    fn small_tau_leading_order() {
        // |ln D + r tau| <= C tau^2
        let r = 0.04;
        for &tau in &[1e-1, 1e-2, 1e-3, 1e-4] {
            let err = (log_discount(&UK, 0.13, r, tau).unwrap() + r * tau).abs();
            assert!(err <= 0.05 * tau * tau, "tau {tau} err {err}");
        }
    }

    #[test]
    fn long_run_limits() {
        assert!((long_run_rate(&UK, 0.13) - 0.016_619_660_916_121_356).abs() < 1e-12);
        assert!((long_run_rate(&US, 0.20) - 0.022_165_088_757_396_45).abs() < 1e-12);
        let flat = OuParams::new(0.03, 0.0, 0.5).unwrap();
        assert_eq!(long_run_rate(&flat, 0.4), 0.03);
        // the gap decays like (r - m* + 3k^2/(4 alpha^2)) / (alpha tau)
        for (p, q) in [(UK, 0.13), (US, 0.2)] {
            for (scale, tol) in [(1e4, 1e-5), (1e5, 1e-6)] {
                let tau = scale / p.alpha.min(1.0);
                let rate = annualized_rate(&p, q, p.m, tau).unwrap();
                assert!((rate - long_run_rate(&p, q)).abs() < tol);
            }
        }
        // tau = 100 is within 10% of the limit
        let r100 = annualized_rate(&UK, 0.13, UK.m, 100.0).unwrap();
        assert!((r100 / long_run_rate(&UK, 0.13) - 1.0).abs() < 0.1);
    }

    #[test]
    fn long_run_rate_decreases_in_k_below_risk_threshold() {
        for &alpha in &[0.2, 0.5, 1.0, 2.0] {
            for &q in &[0.0, 0.1, 0.3] {
                let mut prev = f64::INFINITY;
                for i in 0..50 {
                    let k = q * alpha + 0.001 * (i + 1) as f64; // q < k / alpha
                    let r = long_run_rate(&OuParams { m: 0.01, k, alpha }, q);
                    assert!(r < prev);
                    prev = r;
                }
            }
        }
    }

    #[test]
    fn long_run_rate_unbounded_below_at_fixed_sigma() {
        let sigma = 0.05;
        let mut prev = f64::INFINITY;
        for i in 0..40 {
            let alpha = 2f64.powi(-i);
            let k = sigma * (2.0 * alpha).sqrt();
            let r = long_run_rate(&OuParams { m: 0.02, k, alpha }, 0.0);
            assert!(r < prev);
            prev = r;
        }
        assert!(prev < -1e3);
    }

    #[test]
    fn char_coeffs_initial_and_limit() {
        for w in [Omega1::Zero, Omega1::MinusI] {
            let c0 = char_coeffs(&UK, 0.03, w, 0.0).unwrap();
            assert_eq!(c0.a, Complex64::new(0.0, 0.0));
            assert!((c0.b - Complex64::new(0.0, 0.03)).norm() < 1e-18);
            assert_eq!(c0.c.norm(), 0.0);
        }
        let far = char_coeffs(&UK, 0.03, Omega1::Zero, 200.0).unwrap();
        assert!((far.a.re - UK.k * UK.k / (4.0 * UK.alpha)).abs() < 1e-15);
    }

    #[test]
    fn char_coeffs_reproduce_discount_and_marginal() {
        for t in [0.1, 1.0, 5.0, 10.0, 100.0] {
            let c = char_coeffs(&UK, 0.021, Omega1::MinusI, t).unwrap();
            let ln_d = log_discount(&UK, 0.0, 0.021, t).unwrap();
            assert!(c.c.im.abs() < 1e-15);
            assert!(((-c.c.re).exp() / ln_d.exp() - 1.0).abs() < 1e-12);

            // omega1 = 0: B = i * mean, A = var / 2
            let z = char_coeffs(&UK, 0.021, Omega1::Zero, t).unwrap();
            let (mean, var) = transition_moments(&UK, 0.021, t);
            assert!((z.b.im - mean).abs() < 1e-15);
            assert!((z.a.re - var / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn transition_density_basics() {
        let (mean, var) = transition_moments(&UK, 0.05, 2.0);
        let at_mode = transition_density(&UK, 0.05, 2.0, mean).unwrap();
        assert!(at_mode > transition_density(&UK, 0.05, 2.0, mean + 1e-3).unwrap());
        assert!(at_mode > transition_density(&UK, 0.05, 2.0, mean - 1e-3).unwrap());
        assert!((at_mode - 1.0 / (2.0 * std::f64::consts::PI * var).sqrt()).abs() < 1e-9);
        let far = transition_density(&UK, 0.05, 500.0, 0.01).unwrap();
        assert!((far - stationary_density(&UK, 0.01)).abs() < 1e-12);
        assert!(transition_density(&UK, 0.05, 0.0, 0.0).is_err());
    }

    #[test]
    fn negative_probabilities() {
        let zero_mean = OuParams::new(0.0, 0.05, 0.8).unwrap();
        assert_eq!(prob_negative_stationary(&zero_mean), 0.5);
        assert!((prob_negative(&zero_mean, 0.3, 1e3).unwrap() - 0.5).abs() < 1e-15);
        for p in [UK, US] {
            let late = prob_negative(&p, 0.1, 60.0).unwrap();
            assert!((late - prob_negative_stationary(&p)).abs() < 1e-15);
        }
        assert!(prob_negative(&UK, 0.0, -1.0).is_err());

        // mu / kappa = 0.1  ->  erfc(0.1) / 2
        let p = OuParams::new(0.1, 1.0, 1.0).unwrap();
        assert!((prob_negative_stationary(&p) - 0.443_768_541_990_857_55).abs() < 1e-14);
        assert!((prob_negative_stationary(&p) - (0.5 - 0.1 / std::f64::consts::PI.sqrt())).abs() < 0.01);
    }

    #[test]
    fn negative_probability_asymptotic_decay() {
        // P ~ (kappa/mu) e^{-(mu/kappa)^2} / (2 sqrt(pi)) with relative error O(kappa^2/mu^2)
        for ratio in [5.0f64, 8.0, 12.0, 20.0] {
            let p = OuParams::new(ratio, 1.0, 1.0).unwrap();
            let asym = (-ratio * ratio).exp() / (2.0 * std::f64::consts::PI.sqrt() * ratio);
            let rel = prob_negative_stationary(&p) / asym - 1.0;
            assert!(rel.abs() < 1.0 / (ratio * ratio), "ratio {ratio}: {rel}");
        }
    }

    #[test]
    fn below_long_run() {
        // q k / alpha == k^2 / (2 alpha^2)  =>  r_inf == m
        let p = OuParams::new(0.01, 0.06, 0.5).unwrap();
        let q = p.k / (2.0 * p.alpha);
        assert!((long_run_rate(&p, q) - p.m).abs() < 1e-17);
        assert!((prob_below_long_run(&p, q) - 0.5).abs() < 1e-15);
        // m - r_inf large
        let tiny = prob_below_long_run(&OuParams::new(0.01, 0.06, 0.5).unwrap(), -40.0);
        assert!(tiny < 1e-100);
    }
}
