//! Information criteria and exhaustive best-subset selection.
//!
//! All three criteria share the form `penalty(|S|) + n log RSS(S)`, so the
//! comparison `score(A) < score(B)` is equivalent to
//! `RSS(B) / RSS(A) > omega(A, B)` with `omega = exp((pen(A) - pen(B)) / n)`.
//! Only those differences matter, which is why scores are reported up to an
//! additive constant.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, Design, IndexSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Aic,
    Bic,
    Aicc,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Aic => "aic",
            Criterion::Bic => "bic",
            Criterion::Aicc => "aicc",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(Criterion::Aic),
            "bic" => Ok(Criterion::Bic),
            "aicc" => Ok(Criterion::Aicc),
            other => Err(Error::InvalidInput(format!("unknown criterion {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CriterionSpec {
    pub kind: Criterion,
    pub n: usize,
}

impl CriterionSpec {
    pub fn new(kind: Criterion, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput(format!("criterion needs n >= 3, got {n}")));
        }
        Ok(CriterionSpec { kind, n })
    }

    /// Size-dependent part of the score.
    pub fn penalty(&self, size: usize) -> Result<f64> {
        let n = self.n as f64;
        let k = size as f64;
        match self.kind {
            Criterion::Aic => Ok(2.0 * k),
            Criterion::Bic => Ok(n.ln() * k),
            Criterion::Aicc => Ok(2.0 * n * aicc_ratio(size, self.n)?),
        }
    }
}

fn aicc_ratio(size: usize, n: usize) -> Result<f64> {
    if size + 1 >= n {
        return Err(Error::AiccDegenerate { size, n });
    }
    Ok(size as f64 / (n - size - 1) as f64)
}

/// Score of a model with `size` free columns and residual sum of squares
/// `rss`.
///
/// AIC is `2|S| + n log RSS`, BIC is `log(n)|S| + n log RSS` and AICc is
/// `2n|S|/(n-|S|-1) + n log RSS`.
pub fn criterion_score(size: usize, rss: f64, spec: &CriterionSpec) -> Result<f64> {
    if !(rss > 0.0) {
        return Err(Error::NonPositiveRss {
            model: format!("of size {size}"),
        });
    }
    Ok(spec.penalty(size)? + spec.n as f64 * rss.ln())
}

/// The threshold `omega(S~, S)`: `score(S~) < score(S)` holds exactly when
/// `RSS(S) / RSS(S~) > omega`.
pub fn penalty_ratio(size_tilde: usize, size: usize, spec: &CriterionSpec) -> Result<f64> {
    let n = spec.n as f64;
    let diff = size_tilde as f64 - size as f64;
    let exponent = match spec.kind {
        Criterion::Aic => 2.0 * diff / n,
        Criterion::Bic => n.ln() * diff / n,
        Criterion::Aicc => {
            2.0 * (aicc_ratio(size_tilde, spec.n)? - aicc_ratio(size, spec.n)?)
        }
    };
    Ok(exponent.exp())
}

/// Which submodels compete in best-subset selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CandidatePolicy {
    /// Admit the model made of forced columns only (the empty model when
    /// nothing is forced).
    pub include_empty: bool,
    /// Upper bound on the number of free columns.
    pub max_size: Option<usize>,
}

/// Largest number of free columns accepted for exhaustive enumeration.
pub const MAX_FREE_COLUMNS: usize = 24;

/// All candidate models ordered by size, then lexicographically.
pub fn candidates(design: &Design, policy: &CandidatePolicy) -> Result<Vec<IndexSet>> {
    let free = design.free_columns();
    if free.len() > MAX_FREE_COLUMNS {
        return Err(Error::InvalidInput(format!(
            "{} free columns exceed the exhaustive enumeration limit of {MAX_FREE_COLUMNS}",
            free.len()
        )));
    }
    let forced = design.forced_columns();
    let max_size = policy.max_size.unwrap_or(free.len()).min(free.len());
    let min_size = if policy.include_empty { 0 } else { 1 };
    let mut out: Vec<IndexSet> = (0u64..1 << free.len())
        .filter(|m| {
            let k = m.count_ones() as usize;
            k >= min_size && k <= max_size
        })
        .map(|m| {
            let mut cols: Vec<usize> = forced.indices().to_vec();
            cols.extend(
                free.iter()
                    .enumerate()
                    .filter(|(b, _)| m >> b & 1 == 1)
                    .map(|(_, &j)| j),
            );
            IndexSet::new(cols)
        })
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.indices().cmp(b.indices())));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredModel {
    pub model: IndexSet,
    pub size: usize,
    pub score: f64,
    pub rss: f64,
}

/// Result of exhaustive selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub selected: IndexSet,
    /// Every candidate, in enumeration order.
    pub scores: Vec<ScoredModel>,
}

impl Selection {
    pub fn selected_score(&self) -> &ScoredModel {
        self.scores
            .iter()
            .find(|s| s.model == self.selected)
            .expect("selected model is scored")
    }
}

/// Total order used to pick the winner: score, then fewer free columns, then
/// the lexicographically smaller index list.
pub fn compare_scored(a: &ScoredModel, b: &ScoredModel) -> Ordering {
    a.score
        .total_cmp(&b.score)
        .then(a.size.cmp(&b.size))
        .then_with(|| a.model.indices().cmp(b.model.indices()))
}

pub fn score_model(data: &Dataset, model: &IndexSet, spec: &CriterionSpec) -> Result<ScoredModel> {
    let design = data.design();
    let rss = design.factor(model)?.residual(data.y()).norm_squared();
    let size = design.model_size(model);
    let score = criterion_score(size, rss, spec).map_err(|e| match e {
        Error::NonPositiveRss { .. } => Error::NonPositiveRss {
            model: model.to_string(),
        },
        other => other,
    })?;
    Ok(ScoredModel {
        model: model.clone(),
        size,
        score,
        rss,
    })
}

/// Exhaustive best-subset selection.
pub fn best_subset(data: &Dataset, spec: &CriterionSpec, policy: &CandidatePolicy) -> Result<Selection> {
    let models = candidates(data.design(), policy)?;
    best_subset_among(data, spec, &models)
}

/// Best-subset selection over an explicit candidate list.
pub fn best_subset_among(data: &Dataset, spec: &CriterionSpec, models: &[IndexSet]) -> Result<Selection> {
    if models.is_empty() {
        return Err(Error::InvalidInput("no candidate models".into()));
    }
    let scores = models
        .iter()
        .map(|m| score_model(data, m, spec))
        .collect::<Result<Vec<_>>>()?;
    let selected = scores
        .iter()
        .min_by(|a, b| compare_scored(a, b))
        .map(|s| s.model.clone())
        .expect("non-empty candidate list");
    Ok(Selection { selected, scores })
}
