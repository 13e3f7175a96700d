//! Standard normal tail probabilities in log space, and quantiles.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use libm::{erf, erfc};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Beyond this standardized point `erfc` underflows; the asymptotic series
/// takes over.
const ASYMPTOTIC_CUTOFF: f64 = 37.0;

/// `log P(Z > x)` for a standard normal `Z`, accurate in both tails.
pub fn log_upper_tail(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    if x < ASYMPTOTIC_CUTOFF {
        return (0.5 * erfc(x * FRAC_1_SQRT_2)).ln();
    }
    // Mills ratio: Q(x) = phi(x)/x * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...)
    let inv2 = 1.0 / (x * x);
    let mut term = 1.0;
    let mut series = 1.0;
    for k in 1..8 {
        term *= -((2 * k - 1) as f64) * inv2;
        series += term;
    }
    -0.5 * x * x - x.ln() - LN_SQRT_2PI + series.ln()
}

/// `log P(Z < x)`.
pub fn log_lower_tail(x: f64) -> f64 {
    log_upper_tail(-x)
}

/// `log(1 - exp(d))` for `d <= 0`.
pub fn log1m_exp(d: f64) -> f64 {
    if d > -std::f64::consts::LN_2 {
        (-d.exp_m1()).ln()
    } else {
        (-d.exp()).ln_1p()
    }
}

/// `log(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log P(a < Z < b)` for standardized endpoints.
pub fn log_standard_mass(a: f64, b: f64) -> f64 {
    if !(a < b) {
        return f64::NEG_INFINITY;
    }
    if a >= 0.0 {
        let la = log_upper_tail(a);
        let lb = log_upper_tail(b);
        la + log1m_exp(lb - la)
    } else if b <= 0.0 {
        log_standard_mass(-b, -a)
    } else {
        // straddles zero: sum of two positive half masses, no cancellation
        let upper = if b == f64::INFINITY { 1.0 } else { erf(b * FRAC_1_SQRT_2) };
        let lower = if a == f64::NEG_INFINITY { 1.0 } else { erf(-a * FRAC_1_SQRT_2) };
        (0.5 * (upper + lower)).ln()
    }
}

/// Standard normal CDF.
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper `q` quantile of the standard normal, i.e. `z` with `P(Z > z) = q`.
pub fn upper_quantile(q: f64) -> f64 {
    if !(q > 0.0 && q < 1.0) {
        return if q == 0.0 {
            f64::INFINITY
        } else if q == 1.0 {
            f64::NEG_INFINITY
        } else {
            f64::NAN
        };
    }
    // Newton polish of the library inverse on the smaller tail
    let (tail, sign) = if q <= 0.5 { (q, 1.0) } else { (1.0 - q, -1.0) };
    let mut z = -Normal::standard().inverse_cdf(tail);
    for _ in 0..3 {
        let excess = 0.5 * erfc(z * FRAC_1_SQRT_2) - tail;
        let density = (-0.5 * z * z - LN_SQRT_2PI).exp();
        if density == 0.0 {
            break;
        }
        z += excess / density;
    }
    sign * z
}

/// Upper `q` quantile of Student's t with `df` degrees of freedom.
pub fn t_upper_quantile(q: f64, df: f64) -> f64 {
    let t = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    -t.inverse_cdf(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // log Q(x) from a 40-digit evaluation (mpmath log(ncdf(-x))).
    const LOG_Q: [(f64, f64); 10] = [
        (0.0, -std::f64::consts::LN_2),
        (1.0, -1.841_021_645_009_263_5),
        (5.0, -15.064_998_393_988_726),
        (10.0, -53.231_285_150_512_47),
        (20.0, -203.917_155_371_097_26),
        (30.0, -454.321_243_956_343_2),
        (37.0, -689.0305855768906),
        (38.0, -726.5572160188201),
        (50.0, -1_254.831_361_139_419_9),
        (100.0, -5_005.524_208_694_205),
    ];

    #[test]
    fn log_tail_matches_high_precision() {
        for (x, want) in LOG_Q {
            assert!(rel(log_upper_tail(x), want) < 1e-13, "x = {x}");
        }
        assert!(log_upper_tail(-40.0).abs() < 1e-300);
        assert_eq!(log_upper_tail(f64::INFINITY), f64::NEG_INFINITY);
    }

    #[test]
    fn asymptotic_branch_is_continuous() {
        // slope of log Q near the cutoff is about -x
        let h = 1e-9;
        let below = log_upper_tail(ASYMPTOTIC_CUTOFF - h);
        let above = log_upper_tail(ASYMPTOTIC_CUTOFF + h);
        let slope = (above - below) / (2.0 * h);
        assert!((slope + ASYMPTOTIC_CUTOFF).abs() < 0.05 * ASYMPTOTIC_CUTOFF);
    }

    #[test]
    fn masses() {
        assert_eq!(log_standard_mass(f64::NEG_INFINITY, f64::INFINITY), 0.0);
        assert!((log_standard_mass(0.0, f64::INFINITY).exp() - 0.5).abs() < 1e-16);
        assert_eq!(log_standard_mass(1.0, 1.0), f64::NEG_INFINITY);
        // symmetric in reflection
        let a = log_standard_mass(-12.0, -11.0);
        let b = log_standard_mass(11.0, 12.0);
        assert_eq!(a, b);
    }

    #[test]
    fn quantiles_match_reference() {
        assert!((upper_quantile(0.025) - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((upper_quantile(0.005) - 2.575_829_303_548_900_4).abs() < 1e-12);
        // mpmath root of ncdf(-z) = 1e-10
        assert!((upper_quantile(1e-10) - 6.361_340_902_404_056).abs() < 1e-13);
        let deep = upper_quantile(1e-300);
        assert!(rel(log_upper_tail(deep), -300.0 * std::f64::consts::LN_10) < 1e-12);
        assert!(upper_quantile(0.5).abs() < 1e-15);
        assert!((upper_quantile(0.975) + upper_quantile(0.025)).abs() < 1e-13);
        // scipy.stats.t.ppf
        for (q, df, want) in [
            (0.025, 193.0, 1.972_331_675_793_000_7),
            (0.025, 46.0, 2.012_895_598_919_428_6),
            (0.005, 5.0, 4.032_142_983_557_536),
            (0.1, 1.0, 3.077_683_537_207_806_6),
        ] {
            assert!((t_upper_quantile(q, df) - want).abs() < 1e-10, "df = {df}");
        }
    }

    #[test]
    fn log_add_exp_handles_infinities() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, -3.0), -3.0);
        assert!((log_add_exp(0.0, 0.0) - std::f64::consts::LN_2).abs() < 1e-16);
        assert!((log_add_exp(-1000.0, -1000.0) - (-1000.0 + std::f64::consts::LN_2)).abs() < 1e-12);
    }
}
