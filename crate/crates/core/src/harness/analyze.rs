//! Selection followed by classical and corrected intervals on a data set.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::data::{dataset_from_table, read_csv};
use crate::criteria::{CandidatePolicy, Criterion, CriterionSpec};
use crate::error::{Error, Result};
use crate::geometry::{superset_lower_bound, ObservedSelection};
use crate::inference::{classical_ci, estimate_sigma, CIResult, ConditionalTarget, InferenceTarget, SigmaSpec};
use crate::intervals::IntervalUnion;
use crate::model::{Dataset, Design, IndexSet, InterceptPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub response: String,
    /// Predictor columns; every other column when absent.
    pub predictors: Option<Vec<String>>,
    pub criterion: Criterion,
    pub alpha: f64,
    pub sigma_strategies: Vec<SigmaSpec>,
    pub intercept: bool,
    pub skip_supersets: bool,
    /// Target specifications (`coef:NAME`, `point:v1,v2,...`,
    /// `combo:c1,c2,...`); every selected non-forced coefficient when
    /// absent.
    pub targets: Option<Vec<String>>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            response: String::new(),
            predictors: None,
            criterion: Criterion::Aic,
            alpha: 0.05,
            sigma_strategies: vec![SigmaSpec::MseFull],
            intercept: true,
            skip_supersets: true,
            targets: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub model: Vec<String>,
    pub size: usize,
    pub score: f64,
    pub rss: f64,
    /// Score minus the smallest score.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetInterval {
    pub target: String,
    pub method: String,
    pub ci: CIResult,
}

/// For a coefficient target, the threshold that `(eta' Y)^2` must exceed
/// for the coefficient to survive selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquaredLowerBound {
    pub target: String,
    pub bound: f64,
    pub observed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcludedRegion {
    pub target: String,
    pub intervals: IntervalUnion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub options: AnalysisOptions,
    pub n: usize,
    pub columns: Vec<String>,
    pub selected_model: Vec<String>,
    /// Every candidate, best first.
    pub scores: Vec<ScoreRow>,
    pub sigma: Vec<(String, f64)>,
    pub intervals: Vec<TargetInterval>,
    pub excluded_regions: Vec<ExcludedRegion>,
    pub lower_bounds: Vec<SquaredLowerBound>,
}

impl AnalysisReport {
    pub fn interval(&self, target: &str, method: &str) -> Option<&CIResult> {
        self.intervals
            .iter()
            .find(|t| t.target == target && t.method == method)
            .map(|t| &t.ci)
    }
}

fn parse_values(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("'{v}' is not a number")))
        })
        .collect()
}

/// Resolves a target specification against the design and selected model.
pub fn parse_target(spec: &str, design: &Design, selected: &IndexSet) -> Result<InferenceTarget> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::InvalidInput(format!("target '{spec}' must look like coef:NAME, point:... or combo:...")))?;
    match kind.trim() {
        "coef" => {
            let name = rest.trim();
            let j = design
                .column_index(name)
                .ok_or_else(|| Error::InvalidInput(format!("unknown column '{name}'")))?;
            if !selected.contains(j) {
                return Err(Error::IndexNotInModel {
                    index: j,
                    model: design.model_names(selected).join(","),
                });
            }
            Ok(InferenceTarget::Coefficient(j))
        }
        "point" => {
            let mut x = parse_values(rest)?;
            if design.intercept() == InterceptPolicy::ForcedFirstColumn && x.len() + 1 == design.p() {
                x.insert(0, 1.0);
            }
            Ok(InferenceTarget::PredictionMean(x))
        }
        "combo" => Ok(InferenceTarget::LinearCombo(parse_values(rest)?)),
        other => Err(Error::InvalidInput(format!("unknown target kind '{other}'"))),
    }
}

fn classical_label(strategy: &SigmaSpec) -> Option<String> {
    (*strategy != SigmaSpec::MseAic).then(|| format!("classical:{strategy}"))
}

pub fn analyze(data: &Dataset, options: &AnalysisOptions) -> Result<AnalysisReport> {
    let design = data.design();
    let spec = CriterionSpec::new(options.criterion, data.n())?;
    let policy = CandidatePolicy::default();
    let observed = ObservedSelection::new(data, &spec, &policy)?;
    let selected = observed.selected().clone();
    let best = observed.selected_score().score;
    let mut scores: Vec<ScoreRow> = observed
        .scores()
        .iter()
        .map(|s| ScoreRow {
            model: design.model_names(&s.model),
            size: s.size,
            score: s.score,
            rss: s.rss,
            delta: s.score - best,
        })
        .collect();
    scores.sort_by(|a, b| a.delta.total_cmp(&b.delta));

    let targets: Vec<(String, InferenceTarget)> = match &options.targets {
        Some(list) => list
            .iter()
            .map(|t| {
                let target = parse_target(t, design, &selected)?;
                Ok((target.label(design), target))
            })
            .collect::<Result<_>>()?,
        None => {
            let forced = design.forced_columns();
            selected
                .indices()
                .iter()
                .filter(|j| !forced.contains(**j))
                .map(|&j| (design.column_names()[j].clone(), InferenceTarget::Coefficient(j)))
                .collect()
        }
    };

    let sigma = options
        .sigma_strategies
        .iter()
        .map(|s| Ok((s.to_string(), estimate_sigma(data, &selected, s)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut intervals = Vec::new();
    let mut excluded_regions = Vec::new();
    let mut lower_bounds = Vec::new();
    for (label, target) in &targets {
        let mut push = |method: String, ci: CIResult| {
            intervals.push(TargetInterval {
                target: label.clone(),
                method,
                ci,
            })
        };
        push(
            "classical_t".into(),
            classical_ci(data, &selected, target, options.alpha, &SigmaSpec::MseAic)?,
        );
        for s in &options.sigma_strategies {
            if let Some(method) = classical_label(s) {
                push(method, classical_ci(data, &selected, target, options.alpha, s)?);
            }
        }
        let cond = ConditionalTarget::new(data, &observed, target, options.skip_supersets)?;
        for (s, (_, value)) in options.sigma_strategies.iter().zip(&sigma) {
            push(format!("corrected:{s}"), cond.interval(options.alpha, *value)?);
        }
        excluded_regions.push(ExcludedRegion {
            target: label.clone(),
            intervals: cond.event.excluded_region(),
        });
        if let InferenceTarget::Coefficient(j) = target {
            let bound = superset_lower_bound(&cond.decomposition, design, &selected, *j, &spec, &policy)?;
            lower_bounds.push(SquaredLowerBound {
                target: label.clone(),
                bound,
                observed: cond.observed().powi(2),
            });
        }
    }

    Ok(AnalysisReport {
        options: options.clone(),
        n: data.n(),
        columns: design.column_names().to_vec(),
        selected_model: design.model_names(&selected),
        scores,
        sigma,
        intervals,
        excluded_regions,
        lower_bounds,
    })
}

pub fn analyze_csv(path: &Path, options: &AnalysisOptions) -> Result<AnalysisReport> {
    let table = read_csv(path)?;
    let data = dataset_from_table(&table, &options.response, options.predictors.as_deref(), options.intercept)?;
    analyze(&data, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;
    use std::sync::Arc;

    fn strong_signal() -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = DMatrix::from_fn(80, 4, |_, _| rng.sample(StandardNormal));
        let beta = DVector::from_vec(vec![3.0, 0.0, -2.5, 0.0]);
        let y = &x * beta + DVector::from_fn(80, |_, _| rng.sample::<f64, _>(StandardNormal));
        let names = ["a", "b", "c", "d"].map(String::from).to_vec();
        Dataset::new(Arc::new(Design::with_intercept(x, names).unwrap()), y).unwrap()
    }

    #[test]
    fn true_support_is_selected_and_significant() {
        let data = strong_signal();
        let options = AnalysisOptions {
            sigma_strategies: vec![SigmaSpec::MseFull, SigmaSpec::Known(1.0)],
            ..Default::default()
        };
        let report = analyze(&data, &options).unwrap();
        assert!(report.selected_model.contains(&"a".to_string()));
        assert!(report.selected_model.contains(&"c".to_string()));
        for name in ["a", "c"] {
            for method in ["corrected:mse-full", "corrected:known:1"] {
                let ci = report.interval(name, method).unwrap();
                assert!(!ci.contains(0.0), "{name} {method}");
            }
        }
        assert_eq!(report.scores[0].delta, 0.0);
        assert_eq!(report.scores.len(), 15);
        for b in &report.lower_bounds {
            assert!(b.observed > b.bound);
        }
    }

    #[test]
    fn single_candidate_means_no_correction() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = DMatrix::from_fn(30, 1, |_, _| rng.sample(StandardNormal));
        let y = &x * 0.2 + DVector::from_fn(30, |_, _| rng.sample::<f64, _>(StandardNormal));
        let data = Dataset::new(Arc::new(Design::new(x, vec!["x".into()], InterceptPolicy::None).unwrap()), y).unwrap();
        let options = AnalysisOptions {
            intercept: false,
            sigma_strategies: vec![SigmaSpec::Known(1.0)],
            ..Default::default()
        };
        let report = analyze(&data, &options).unwrap();
        let classical = report.interval("x", "classical:known:1").unwrap();
        let corrected = report.interval("x", "corrected:known:1").unwrap();
        assert!(corrected.region.as_ref().unwrap().is_full());
        assert!((classical.lower - corrected.lower).abs() < 1e-8);
        assert!((classical.upper - corrected.upper).abs() < 1e-8);
    }

    #[test]
    fn target_specifications() {
        let data = strong_signal();
        let d = data.design();
        let full = d.full_model();
        assert_eq!(parse_target("coef:c", d, &full).unwrap(), InferenceTarget::Coefficient(3));
        assert_eq!(
            parse_target("point:1,2,3,4", d, &full).unwrap(),
            InferenceTarget::PredictionMean(vec![1.0, 1.0, 2.0, 3.0, 4.0])
        );
        assert_eq!(
            parse_target("combo: 1, -1", d, &full).unwrap(),
            InferenceTarget::LinearCombo(vec![1.0, -1.0])
        );
        assert!(parse_target("coef:z", d, &full).is_err());
        assert!(parse_target("coef:a", d, &IndexSet::new(vec![0, 2])).is_err());
        assert!(parse_target("mean:1", d, &full).is_err());
        assert!(parse_target("point:1,x", d, &full).is_err());
    }
}
