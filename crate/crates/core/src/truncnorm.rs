//! Normal distributions truncated to a finite union of intervals.
//!
//! Masses are carried in log space throughout. During mean inversion the
//! truncation region routinely sits tens of standard deviations away from
//! the trial mean, where plain CDF differences underflow or cancel.

use crate::error::{Error, Result};
use crate::intervals::IntervalUnion;
use crate::normal::{log_add_exp, log_standard_mass};

/// Convergence tolerance of [`invert_mean`] in CDF units.
pub const CDF_TOLERANCE: f64 = 1e-8;

const MAX_BISECTIONS: usize = 200;
const MAX_EXPANSIONS: usize = 1000;

/// `N(mu, sd^2)` conditioned on `region`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedNormal {
    pub mu: f64,
    pub sd: f64,
    pub region: IntervalUnion,
}

impl TruncatedNormal {
    pub fn new(mu: f64, sd: f64, region: IntervalUnion) -> Result<Self> {
        if !(sd > 0.0) || !sd.is_finite() {
            return Err(Error::InvalidInput(format!("standard deviation must be positive, got {sd}")));
        }
        if region.is_empty() {
            return Err(Error::InvalidInput("empty truncation region".into()));
        }
        Ok(TruncatedNormal { mu, sd, region })
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        truncated_cdf_parts(x, self.mu, self.sd, &self.region)
    }
}

/// `P(lo < X < hi)` for `X ~ N(mu, sd^2)`.
pub fn normal_measure(lo: f64, hi: f64, mu: f64, sd: f64) -> f64 {
    log_normal_measure(lo, hi, mu, sd).exp()
}

/// Natural log of [`normal_measure`].
pub fn log_normal_measure(lo: f64, hi: f64, mu: f64, sd: f64) -> f64 {
    if !(lo < hi) {
        return f64::NEG_INFINITY;
    }
    log_standard_mass((lo - mu) / sd, (hi - mu) / sd)
}

/// Log masses of `region` below and above `x`.
fn split_log_mass(x: f64, mu: f64, sd: f64, region: &IntervalUnion) -> (f64, f64) {
    let mut below = f64::NEG_INFINITY;
    let mut above = f64::NEG_INFINITY;
    for &(lo, hi) in region.intervals() {
        if lo < x {
            below = log_add_exp(below, log_normal_measure(lo, hi.min(x), mu, sd));
        }
        if hi > x {
            above = log_add_exp(above, log_normal_measure(lo.max(x), hi, mu, sd));
        }
    }
    (below, above)
}

fn truncated_cdf_parts(x: f64, mu: f64, sd: f64, region: &IntervalUnion) -> Result<f64> {
    let (below, above) = split_log_mass(x, mu, sd, region);
    if below == f64::NEG_INFINITY && above == f64::NEG_INFINITY {
        return Err(Error::RegionMassUnderflow);
    }
    if below == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if above == f64::NEG_INFINITY {
        return Ok(1.0);
    }
    // below / (below + above)
    let total = log_add_exp(below, above);
    Ok((below - total).exp())
}

/// `F(x) = P(X <= x | X in R)` for `X ~ N(mu, sd^2)`.
pub fn truncated_cdf(x: f64, spec: &TruncatedNormal) -> Result<f64> {
    spec.cdf(x)
}

/// Solves `F_{mu, sd, region}(x_obs) = target` for the mean `mu`.
///
/// The truncated CDF is strictly decreasing in `mu`, so the root is
/// bracketed by doubling steps away from `x_obs` and then bisected. If the
/// target cannot be straddled before the step overflows, the CDF is pinned
/// and the returned mean is `+inf` or `-inf`.
pub fn invert_mean(target: f64, x_obs: f64, sd: f64, region: &IntervalUnion) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidInput(format!("target probability {target} not in (0, 1)")));
    }
    if !(sd > 0.0) {
        return Err(Error::InvalidInput(format!("standard deviation must be positive, got {sd}")));
    }
    if !region.contains(x_obs) {
        return Err(Error::ObservationOutsideRegion { value: x_obs });
    }
    let f = |mu: f64| truncated_cdf_parts(x_obs, mu, sd, region);

    // lower end: need F(lo) > target
    let mut step = sd;
    let mut lo = x_obs - step;
    let mut expansions = 0;
    loop {
        match f(lo) {
            Ok(v) if v > target => break,
            Ok(_) | Err(Error::RegionMassUnderflow) => {}
            Err(e) => return Err(e),
        }
        step *= 2.0;
        lo = x_obs - step;
        expansions += 1;
        if expansions > MAX_EXPANSIONS || !lo.is_finite() {
            return Ok(f64::NEG_INFINITY);
        }
    }
    let mut step = sd;
    let mut hi = x_obs + step;
    let mut expansions = 0;
    loop {
        match f(hi) {
            Ok(v) if v < target => break,
            Ok(_) | Err(Error::RegionMassUnderflow) => {}
            Err(e) => return Err(e),
        }
        step *= 2.0;
        hi = x_obs + step;
        expansions += 1;
        if expansions > MAX_EXPANSIONS || !hi.is_finite() {
            return Ok(f64::INFINITY);
        }
    }

    let mut best = (f64::INFINITY, lo);
    for _ in 0..MAX_BISECTIONS {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid)?;
        let gap = (v - target).abs();
        if gap < best.0 {
            best = (gap, mid);
        }
        if v == target {
            break;
        }
        if v > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best.0 > CDF_TOLERANCE {
        return Err(Error::BracketFailure(format!(
            "closest CDF value misses target {target} by {:.3e}",
            best.0
        )));
    }
    Ok(best.1)
}
