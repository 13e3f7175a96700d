//! Targets, noise-level estimates, and classical and selection-corrected
//! confidence intervals.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Serialize, Serializer};

use crate::criteria::{CandidatePolicy, CriterionSpec};
use crate::error::{Error, Result};
use crate::geometry::{decompose, EtaDecomposition, ObservedSelection, SelectionEvent};
use crate::intervals::IntervalUnion;
use crate::model::{Dataset, Design, IndexSet};
use crate::normal::{t_upper_quantile, upper_quantile};
use crate::truncnorm::{invert_mean, TruncatedNormal};

/// A linear functional `eta' E[Y]` of the selected model's fit.
#[derive(Debug, Clone, PartialEq)]
pub enum InferenceTarget {
    /// Mean response at a new point `x` given over all `p` columns; only
    /// the selected entries are used.
    PredictionMean(Vec<f64>),
    /// Coefficient of design column `i`.
    Coefficient(usize),
    /// `c' beta_S` for `c` indexed by the selected columns.
    LinearCombo(Vec<f64>),
}

impl InferenceTarget {
    pub fn label(&self, design: &Design) -> String {
        match self {
            InferenceTarget::PredictionMean(x) => {
                let parts: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
                format!("point({})", parts.join(","))
            }
            InferenceTarget::Coefficient(i) => design
                .column_names()
                .get(*i)
                .cloned()
                .unwrap_or_else(|| format!("column {i}")),
            InferenceTarget::LinearCombo(c) => {
                let parts: Vec<String> = c.iter().map(|v| format!("{v}")).collect();
                format!("combo({})", parts.join(","))
            }
        }
    }
}

/// `eta = X_S (X_S' X_S)^{-1} c` for the target's weight vector `c` over `S`.
pub fn eta_for_target(design: &Design, selected: &IndexSet, target: &InferenceTarget) -> Result<DVector<f64>> {
    design.validate(selected)?;
    let weights = match target {
        InferenceTarget::PredictionMean(x) => {
            if x.len() != design.p() {
                return Err(Error::DimensionMismatch {
                    expected: design.p(),
                    found: x.len(),
                });
            }
            DVector::from_iterator(selected.len(), selected.indices().iter().map(|&j| x[j]))
        }
        InferenceTarget::Coefficient(i) => {
            if *i >= design.p() {
                return Err(Error::IndexOutOfRange {
                    index: *i,
                    p: design.p(),
                });
            }
            let k = selected.position(*i).ok_or_else(|| Error::IndexNotInModel {
                index: *i,
                model: selected.to_string(),
            })?;
            let mut e = DVector::zeros(selected.len());
            e[k] = 1.0;
            e
        }
        InferenceTarget::LinearCombo(c) => {
            if c.len() != selected.len() {
                return Err(Error::DimensionMismatch {
                    expected: selected.len(),
                    found: c.len(),
                });
            }
            DVector::from_column_slice(c)
        }
    };
    Ok(design.factor(selected)?.contrast(&weights))
}

/// How the noise level is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaSpec {
    Known(f64),
    /// Residual mean square of the selected model.
    MseAic,
    /// Residual mean square of the full model.
    MseFull,
    /// Supplied by an outside estimator.
    External(f64),
}

impl SigmaSpec {
    pub fn is_known(&self) -> bool {
        matches!(self, SigmaSpec::Known(_) | SigmaSpec::External(_))
    }
}

impl fmt::Display for SigmaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaSpec::Known(v) => write!(f, "known:{v}"),
            SigmaSpec::MseAic => write!(f, "mse-aic"),
            SigmaSpec::MseFull => write!(f, "mse-full"),
            SigmaSpec::External(v) => write!(f, "external:{v}"),
        }
    }
}

impl FromStr for SigmaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let value = |v: &str| -> Result<f64> {
            let x: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad sigma value '{v}'")))?;
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidInput(format!("sigma must be positive, got {x}")));
            }
            Ok(x)
        };
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "mse-aic" => Ok(SigmaSpec::MseAic),
            "mse-full" => Ok(SigmaSpec::MseFull),
            other => match other.split_once(':') {
                Some(("known", v)) => Ok(SigmaSpec::Known(value(v)?)),
                Some(("external", v)) => Ok(SigmaSpec::External(value(v)?)),
                _ => Err(Error::InvalidInput(format!(
                    "unknown sigma strategy '{s}' (expected known:<v>, mse-aic, mse-full or external:<v>)"
                ))),
            },
        }
    }
}

impl Serialize for SigmaSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for SigmaSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn residual_scale(data: &Dataset, model: &IndexSet) -> Result<(f64, i64)> {
    let design = data.design();
    let df = design.df_residual(model);
    if df <= 0 {
        return Err(Error::NonPositiveDf { df });
    }
    let rss = design.factor(model)?.residual(data.y()).norm_squared();
    if !(rss > 0.0) {
        return Err(Error::NonPositiveRss {
            model: model.to_string(),
        });
    }
    Ok(((rss / df as f64).sqrt(), df))
}

pub fn estimate_sigma(data: &Dataset, selected: &IndexSet, spec: &SigmaSpec) -> Result<f64> {
    match spec {
        SigmaSpec::Known(v) | SigmaSpec::External(v) => Ok(*v),
        SigmaSpec::MseAic => Ok(residual_scale(data, selected)?.0),
        SigmaSpec::MseFull => Ok(residual_scale(data, &data.design().full_model())?.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    ClassicalT,
    ClassicalKnownSigma,
    Corrected,
}

impl fmt::Display for CiMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CiMethod::ClassicalT => "classical_t",
            CiMethod::ClassicalKnownSigma => "classical_known_sigma",
            CiMethod::Corrected => "corrected",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CIResult {
    pub lower: f64,
    pub upper: f64,
    pub point_estimate: f64,
    /// Corrected intervals only: the truncated CDF at `eta' Y` under the
    /// null mean zero.
    pub pivot: Option<f64>,
    pub alpha: f64,
    pub method: CiMethod,
    pub sigma_used: f64,
    /// Standard deviation of `eta' Y`, `sigma |eta|`.
    pub sd: f64,
    /// True when an endpoint could not be bracketed and was set infinite.
    pub unbounded: bool,
    /// Truncation region of a corrected interval.
    pub region: Option<IntervalUnion>,
}

impl CIResult {
    pub fn contains(&self, value: f64) -> bool {
        self.lower < value && value < self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// The unconditional interval `eta'Y +- q * sigma |eta|`.
///
/// Known or external sigma uses the normal quantile. `mse-aic` uses the
/// selected model's residual scale with its residual degrees of freedom;
/// `mse-full` does the same with the full model.
pub fn classical_ci(
    data: &Dataset,
    selected: &IndexSet,
    target: &InferenceTarget,
    alpha: f64,
    sigma: &SigmaSpec,
) -> Result<CIResult> {
    check_alpha(alpha)?;
    let eta = eta_for_target(data.design(), selected, target)?;
    let point = eta.dot(data.y());
    let eta_norm = eta.norm();
    let (sigma_used, quantile, method) = match sigma {
        SigmaSpec::Known(v) | SigmaSpec::External(v) => (*v, upper_quantile(alpha / 2.0), CiMethod::ClassicalKnownSigma),
        SigmaSpec::MseAic | SigmaSpec::MseFull => {
            let model = if *sigma == SigmaSpec::MseAic {
                selected.clone()
            } else {
                data.design().full_model()
            };
            let (s, df) = residual_scale(data, &model)?;
            (s, t_upper_quantile(alpha / 2.0, df as f64), CiMethod::ClassicalT)
        }
    };
    let sd = sigma_used * eta_norm;
    Ok(CIResult {
        lower: point - quantile * sd,
        upper: point + quantile * sd,
        point_estimate: point,
        pivot: None,
        alpha,
        method,
        sigma_used,
        sd,
        unbounded: false,
        region: None,
    })
}

/// Settings shared by every corrected interval of one analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionSettings {
    pub criterion: CriterionSpec,
    pub policy: CandidatePolicy,
    pub skip_supersets: bool,
}

/// The law of `eta' Y` conditional on the selection event, up to `sigma`.
#[derive(Debug, Clone)]
pub struct ConditionalTarget {
    pub eta: DVector<f64>,
    pub decomposition: EtaDecomposition,
    pub event: SelectionEvent,
}

impl ConditionalTarget {
    pub fn new(
        data: &Dataset,
        observed: &ObservedSelection,
        target: &InferenceTarget,
        skip_supersets: bool,
    ) -> Result<Self> {
        let eta = eta_for_target(data.design(), observed.selected(), target)?;
        Self::from_eta(data, observed, eta, skip_supersets)
    }

    pub fn from_eta(
        data: &Dataset,
        observed: &ObservedSelection,
        eta: DVector<f64>,
        skip_supersets: bool,
    ) -> Result<Self> {
        let decomposition = decompose(data.y(), &eta)?;
        let event = observed.event(data.design(), &decomposition, skip_supersets)?;
        Ok(ConditionalTarget {
            eta,
            decomposition,
            event,
        })
    }

    pub fn observed(&self) -> f64 {
        self.decomposition.eta_dot_y
    }

    pub fn region(&self) -> &IntervalUnion {
        &self.event.region
    }

    pub fn sd(&self, sigma: f64) -> f64 {
        sigma * self.decomposition.eta_norm_sq.sqrt()
    }

    /// `F_{mu, sigma |eta|, R}(eta' Y)`.
    pub fn pivot(&self, mu: f64, sigma: f64) -> Result<f64> {
        TruncatedNormal::new(mu, self.sd(sigma), self.region().clone())?.cdf(self.observed())
    }

    /// Equal-tailed interval `(L, U)` with `F_L = 1 - alpha/2` and
    /// `F_U = alpha/2`.
    pub fn interval(&self, alpha: f64, sigma: f64) -> Result<CIResult> {
        check_alpha(alpha)?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidInput(format!("sigma must be positive, got {sigma}")));
        }
        let sd = self.sd(sigma);
        let x = self.observed();
        let endpoint = |target: f64, fallback: f64| match invert_mean(target, x, sd, self.region()) {
            Err(Error::RegionMassUnderflow) => Ok(fallback),
            other => other,
        };
        let lower = endpoint(1.0 - alpha / 2.0, f64::NEG_INFINITY)?;
        let upper = endpoint(alpha / 2.0, f64::INFINITY)?;
        let pivot = match self.pivot(0.0, sigma) {
            Ok(v) => Some(v),
            Err(Error::RegionMassUnderflow) => None,
            Err(e) => return Err(e),
        };
        Ok(CIResult {
            lower,
            upper,
            point_estimate: x,
            pivot,
            alpha,
            method: CiMethod::Corrected,
            sigma_used: sigma,
            sd,
            unbounded: !(lower.is_finite() && upper.is_finite()),
            region: Some(self.region().clone()),
        })
    }
}

fn conditional(
    data: &Dataset,
    selected: &IndexSet,
    target: &InferenceTarget,
    settings: &SelectionSettings,
) -> Result<ConditionalTarget> {
    let observed = ObservedSelection::new(data, &settings.criterion, &settings.policy)?;
    if observed.selected() != selected {
        return Err(Error::NotSelectedModel {
            model: selected.to_string(),
        });
    }
    ConditionalTarget::new(data, &observed, target, settings.skip_supersets)
}

/// Interval for the target that is valid conditional on `selected` having
/// been chosen; an estimated sigma is plugged in as if known.
pub fn corrected_ci(
    data: &Dataset,
    selected: &IndexSet,
    target: &InferenceTarget,
    alpha: f64,
    sigma: &SigmaSpec,
    settings: &SelectionSettings,
) -> Result<CIResult> {
    let cond = conditional(data, selected, target, settings)?;
    cond.interval(alpha, estimate_sigma(data, selected, sigma)?)
}

/// `F_{value, sigma |eta|, R}(eta' Y)`, uniform on (0, 1) at the true value
/// conditional on selection.
pub fn pivot_value(
    data: &Dataset,
    selected: &IndexSet,
    target: &InferenceTarget,
    value: f64,
    sigma: &SigmaSpec,
    settings: &SelectionSettings,
) -> Result<f64> {
    let cond = conditional(data, selected, target, settings)?;
    cond.pivot(value, estimate_sigma(data, selected, sigma)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::{best_subset, Criterion};
    use crate::model::{fit_submodel, InterceptPolicy};
    use crate::truncnorm::truncated_cdf;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;
    use std::sync::Arc;

    fn random_data(n: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal));
        let beta = DVector::from_fn(p, |j, _| if j < 2 { 1.0 } else { 0.0 });
        let y = &x * beta + DVector::from_fn(n, |_, _| rng.sample(StandardNormal));
        let names = (1..=p).map(|j| format!("x{j}")).collect();
        Dataset::new(Arc::new(Design::new(x, names, InterceptPolicy::None).unwrap()), y).unwrap()
    }

    fn settings(n: usize) -> SelectionSettings {
        SelectionSettings {
            criterion: CriterionSpec::new(Criterion::Aic, n).unwrap(),
            policy: CandidatePolicy::default(),
            skip_supersets: true,
        }
    }

    #[test]
    fn orthonormal_coefficient_eta_is_the_column() {
        let mut x = DMatrix::zeros(4, 2);
        x[(0, 0)] = 1.0;
        x[(1, 1)] = 1.0;
        let design = Design::new(x.clone(), vec!["a".into(), "b".into()], InterceptPolicy::None).unwrap();
        let eta = eta_for_target(&design, &IndexSet::new(vec![0, 1]), &InferenceTarget::Coefficient(1)).unwrap();
        assert!((eta - x.column(1)).norm() < 1e-14);
    }

    #[test]
    fn eta_reproduces_fitted_quantities() {
        let data = random_data(30, 4, 1);
        let model = IndexSet::new(vec![0, 2, 3]);
        let fit = fit_submodel(&data, &model).unwrap();
        let x = vec![0.3, -1.2, 0.7, 2.0];
        let eta = eta_for_target(data.design(), &model, &InferenceTarget::PredictionMean(x.clone())).unwrap();
        let want = 0.3 * fit.coefficients[0] + 0.7 * fit.coefficients[1] + 2.0 * fit.coefficients[2];
        assert!((eta.dot(data.y()) - want).abs() < 1e-10);

        let eta = eta_for_target(data.design(), &model, &InferenceTarget::Coefficient(2)).unwrap();
        let xs = data.design().x().select_columns(model.indices());
        let picked = eta.transpose() * xs;
        for (k, v) in picked.iter().enumerate() {
            assert!((v - if k == 1 { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
        let combo = eta_for_target(data.design(), &model, &InferenceTarget::LinearCombo(vec![0.0, 1.0, 0.0])).unwrap();
        assert!((combo - eta).norm() < 1e-14);
    }

    #[test]
    fn eta_errors() {
        let data = random_data(10, 3, 2);
        let model = IndexSet::new(vec![0, 2]);
        let d = data.design();
        assert!(matches!(
            eta_for_target(d, &model, &InferenceTarget::Coefficient(1)),
            Err(Error::IndexNotInModel { .. })
        ));
        assert!(matches!(
            eta_for_target(d, &model, &InferenceTarget::PredictionMean(vec![1.0, 2.0])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            eta_for_target(d, &model, &InferenceTarget::LinearCombo(vec![1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sigma_estimates_by_hand() {
        // y = b x + e with residuals computed explicitly
        let x = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 4.0]);
        let y = DVector::from_vec(vec![1.1, 1.9, 3.2, 3.9]);
        let design = Design::new(x, vec!["x".into()], InterceptPolicy::None).unwrap();
        let data = Dataset::new(Arc::new(design), y.clone()).unwrap();
        let sxy: f64 = (0..4).map(|i| (i + 1) as f64 * y[i]).sum();
        let b = sxy / 30.0;
        let rss: f64 = (0..4).map(|i| (y[i] - b * (i + 1) as f64).powi(2)).sum();
        let model = IndexSet::new(vec![0]);
        let s = estimate_sigma(&data, &model, &SigmaSpec::MseAic).unwrap();
        assert!((s - (rss / 2.0).sqrt()).abs() < 1e-14);
        assert_eq!(estimate_sigma(&data, &model, &SigmaSpec::Known(1.0)).unwrap(), 1.0);
        assert_eq!(estimate_sigma(&data, &model, &SigmaSpec::MseFull).unwrap(), s);
    }

    #[test]
    fn sigma_spec_parsing() {
        assert_eq!("known:1.5".parse::<SigmaSpec>().unwrap(), SigmaSpec::Known(1.5));
        assert_eq!("mse_aic".parse::<SigmaSpec>().unwrap(), SigmaSpec::MseAic);
        assert_eq!("MSE-FULL".parse::<SigmaSpec>().unwrap(), SigmaSpec::MseFull);
        assert_eq!("external:0.9".parse::<SigmaSpec>().unwrap(), SigmaSpec::External(0.9));
        assert!("known:-1".parse::<SigmaSpec>().is_err());
        assert!("olasso".parse::<SigmaSpec>().is_err());
        for s in [SigmaSpec::Known(2.0), SigmaSpec::MseAic, SigmaSpec::MseFull, SigmaSpec::External(0.5)] {
            assert_eq!(s.to_string().parse::<SigmaSpec>().unwrap(), s);
        }
    }

    #[test]
    fn classical_matches_textbook_formula() {
        let data = random_data(25, 3, 3);
        let model = IndexSet::new(vec![0, 1]);
        let target = InferenceTarget::Coefficient(1);
        let fit = fit_submodel(&data, &model).unwrap();
        let xs = data.design().x().select_columns(model.indices());
        let gram_inv = (xs.transpose() * &xs).try_inverse().unwrap();
        // df = n - |S| - 1
        let se = (fit.rss / 22.0).sqrt() * gram_inv[(1, 1)].sqrt();
        let ci = classical_ci(&data, &model, &target, 0.1, &SigmaSpec::MseAic).unwrap();
        let q = t_upper_quantile(0.05, 22.0);
        assert!((ci.lower - (fit.coefficients[1] - q * se)).abs() < 1e-10);
        assert!((ci.upper - (fit.coefficients[1] + q * se)).abs() < 1e-10);
        assert_eq!(ci.method, CiMethod::ClassicalT);

        let known = classical_ci(&data, &model, &target, 0.05, &SigmaSpec::Known(2.0)).unwrap();
        let half = 1.959_963_984_540_054 * 2.0 * gram_inv[(1, 1)].sqrt();
        assert!((known.upper - known.lower - 2.0 * half).abs() < 1e-10);

        let narrow = classical_ci(&data, &model, &target, 1.0 - 1e-9, &SigmaSpec::Known(2.0)).unwrap();
        assert!(narrow.width() < 1e-8);
    }

    #[test]
    fn corrected_interval_inverts_the_pivot() {
        let data = random_data(30, 4, 4);
        let st = settings(30);
        let sel = best_subset(&data, &st.criterion, &st.policy).unwrap().selected;
        let target = InferenceTarget::Coefficient(sel.indices()[0]);
        let sigma = SigmaSpec::Known(1.0);
        let ci = corrected_ci(&data, &sel, &target, 0.05, &sigma, &st).unwrap();
        assert!(ci.lower < ci.point_estimate && ci.point_estimate < ci.upper);
        let at_lower = pivot_value(&data, &sel, &target, ci.lower, &sigma, &st).unwrap();
        let at_upper = pivot_value(&data, &sel, &target, ci.upper, &sigma, &st).unwrap();
        assert!((at_lower - 0.975).abs() < 1e-6);
        assert!((at_upper - 0.025).abs() < 1e-6);
    }

    #[test]
    fn full_region_reduces_to_the_classical_interval() {
        let data = random_data(30, 2, 5);
        let st = settings(30);
        let observed = ObservedSelection::new(&data, &st.criterion, &st.policy).unwrap();
        let target = InferenceTarget::Coefficient(observed.selected().indices()[0]);
        let mut cond = ConditionalTarget::new(&data, &observed, &target, true).unwrap();
        cond.event.region = IntervalUnion::full();
        let ci = cond.interval(0.05, 1.3).unwrap();
        let classical = classical_ci(&data, observed.selected(), &target, 0.05, &SigmaSpec::Known(1.3)).unwrap();
        assert!((ci.lower - classical.lower).abs() < 1e-8);
        assert!((ci.upper - classical.upper).abs() < 1e-8);
    }

    #[test]
    fn smaller_region_gives_a_wider_interval() {
        let data = random_data(30, 2, 6);
        let st = settings(30);
        let observed = ObservedSelection::new(&data, &st.criterion, &st.policy).unwrap();
        let target = InferenceTarget::Coefficient(observed.selected().indices()[0]);
        let mut cond = ConditionalTarget::new(&data, &observed, &target, true).unwrap();
        let x = cond.observed();
        cond.event.region = IntervalUnion::full();
        let wide = cond.interval(0.05, 1.0).unwrap();
        cond.event.region = IntervalUnion::from_intervals(vec![(f64::NEG_INFINITY, x - 3.0), (x - 0.5, f64::INFINITY)]);
        let cut = cond.interval(0.05, 1.0).unwrap();
        cond.event.region = IntervalUnion::interval(x - 0.5, x + 0.5);
        let narrow_region = cond.interval(0.05, 1.0).unwrap();
        assert!(cut.width() >= wide.width() - 1e-9);
        assert!(narrow_region.width() >= cut.width() - 1e-9);
    }

    #[test]
    fn corrected_requires_the_selected_model() {
        let data = random_data(30, 3, 7);
        let st = settings(30);
        let sel = best_subset(&data, &st.criterion, &st.policy).unwrap().selected;
        let other = if sel.len() == 3 { IndexSet::new(vec![0]) } else { data.design().full_model() };
        let target = InferenceTarget::Coefficient(0);
        assert!(matches!(
            corrected_ci(&data, &other, &target, 0.05, &SigmaSpec::Known(1.0), &st),
            Err(Error::NotSelectedModel { .. })
        ));
    }

    #[test]
    fn pivot_field_is_the_cdf_at_zero() {
        let data = random_data(30, 3, 8);
        let st = settings(30);
        let sel = best_subset(&data, &st.criterion, &st.policy).unwrap().selected;
        let target = InferenceTarget::Coefficient(sel.indices()[0]);
        let ci = corrected_ci(&data, &sel, &target, 0.05, &SigmaSpec::Known(1.0), &st).unwrap();
        let spec = TruncatedNormal::new(0.0, ci.sd, ci.region.clone().unwrap()).unwrap();
        assert_eq!(ci.pivot.unwrap(), truncated_cdf(ci.point_estimate, &spec).unwrap());
    }
}
