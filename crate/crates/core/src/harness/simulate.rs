//! Monte Carlo coverage of classical and corrected intervals.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SimulationConfig;
use crate::criteria::{CandidatePolicy, CriterionSpec};
use crate::error::{Error, Result};
use crate::geometry::{decompose, ObservedSelection, SelectionEvent};
use crate::inference::{classical_ci, estimate_sigma, eta_for_target, ConditionalTarget, InferenceTarget, SigmaSpec};
use crate::intervals::IntervalUnion;
use crate::model::{Dataset, Design, IndexSet, InterceptPolicy};

/// Stream reserved for the fixed design.
const DESIGN_STREAM: u64 = u64::MAX;
/// Stream reserved for the evaluation points.
const POINTS_STREAM: u64 = u64::MAX - 1;

pub const CLASSICAL_T: &str = "classical_t";
pub const CLASSICAL_KNOWN_SIGMA: &str = "classical_known_sigma";
/// Label of the pooled row averaging every evaluation point.
pub const AVERAGE: &str = "average";

pub fn corrected_label(strategy: &SigmaSpec) -> String {
    format!("corrected:{strategy}")
}

fn stream(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Lower Cholesky factor of the AR(1) correlation `rho^|j-k|`.
pub fn ar1_factor(p: usize, rho: f64) -> Result<DMatrix<f64>> {
    if !(rho > -1.0 && rho < 1.0) {
        return Err(Error::InvalidRho(rho));
    }
    let sigma = DMatrix::from_fn(p, p, |j, k| rho.powi((j as i32 - k as i32).abs()));
    let chol = sigma
        .cholesky()
        .ok_or_else(|| Error::Invariant("AR(1) correlation matrix is not positive definite".into()))?;
    Ok(chol.l())
}

/// `n` rows drawn i.i.d. from `N(0, L L')`.
pub fn sample_rows<R: Rng>(n: usize, factor: &DMatrix<f64>, rng: &mut R) -> DMatrix<f64> {
    let p = factor.nrows();
    let z = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    z * factor.transpose()
}

/// A design matrix and evaluation points drawn from the configured row
/// distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDesign {
    pub x: DMatrix<f64>,
    pub points: Vec<Vec<f64>>,
}

pub fn generate_design(config: &SimulationConfig) -> Result<GeneratedDesign> {
    let factor = ar1_factor(config.p, config.rho)?;
    let x = sample_rows(config.n, &factor, &mut stream(config.master_seed, DESIGN_STREAM));
    let points = match &config.points {
        Some(points) => points.clone(),
        None => {
            let draws = sample_rows(config.new_points, &factor, &mut stream(config.master_seed, POINTS_STREAM));
            draws.row_iter().map(|r| r.iter().copied().collect()).collect()
        }
    };
    Ok(GeneratedDesign { x, points })
}

fn build_design(x: DMatrix<f64>, intercept: bool) -> Result<Design> {
    let names = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
    if intercept {
        Design::with_intercept(x, names)
    } else {
        Design::new(x, names, InterceptPolicy::None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageEntry {
    pub target: String,
    pub strategy: String,
    pub coverage: f64,
    pub stderr: f64,
    pub relative_loss: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeCount {
    pub size: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeCoverage {
    pub size: usize,
    pub strategy: String,
    pub coverage: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotUniformity {
    pub target: String,
    /// Kolmogorov-Smirnov distance to Unif(0, 1).
    pub ks: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaMean {
    pub strategy: String,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub rep: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// The configuration with the evaluation points filled in.
    pub config: SimulationConfig,
    pub methods: Vec<String>,
    pub targets: Vec<String>,
    /// Per target and method, followed by the point average.
    pub coverage: Vec<CoverageEntry>,
    /// Share of the classical t under-coverage removed by using the true
    /// sigma, from the averaged coverages.
    pub sigma_contribution: Option<f64>,
    pub histogram: Vec<SizeCount>,
    /// Coverage pooled over evaluation points, by selected model size.
    pub size_coverage: Vec<SizeCoverage>,
    /// Pivots evaluated at the true `eta' E[Y]` with the true sigma.
    pub pivot_ks: Vec<PivotUniformity>,
    pub sigma_means: Vec<SigmaMean>,
    pub successful_reps: usize,
    pub failures: Vec<Failure>,
    pub unbounded_intervals: usize,
}

impl CoverageReport {
    pub fn entry(&self, target: &str, strategy: &str) -> Option<&CoverageEntry> {
        self.coverage.iter().find(|e| e.target == target && e.strategy == strategy)
    }

    pub fn average(&self, strategy: &str) -> Option<f64> {
        self.entry(AVERAGE, strategy).map(|e| e.coverage)
    }
}

/// `1 - coverage / (1 - alpha)`, floored at zero.
pub fn relative_loss(coverage: f64, alpha: f64) -> f64 {
    (1.0 - coverage / (1.0 - alpha)).max(0.0)
}

/// Share of the under-coverage of the t interval explained by estimating
/// sigma: `1 - shortfall(known sigma) / shortfall(t)`.
pub fn sigma_contribution(t_coverage: f64, known_coverage: f64, alpha: f64) -> Option<f64> {
    let level = 1.0 - alpha;
    let shortfall_t = level - level.min(t_coverage);
    let shortfall_known = level - level.min(known_coverage);
    (shortfall_t > 0.0).then(|| 1.0 - shortfall_known / shortfall_t)
}

/// Kolmogorov-Smirnov distance between a sample and Unif(0, 1).
pub fn ks_uniform(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter().enumerate().fold(0.0, |d, (i, &u)| {
        let u = u.clamp(0.0, 1.0);
        d.max((i + 1) as f64 / n - u).max(u - i as f64 / n)
    })
}

struct Target {
    label: String,
    kind: InferenceTarget,
    /// `x' beta*` for a point; `None` for coefficients, whose truth is the
    /// selected model's adjusted coefficient.
    truth: Option<f64>,
    is_point: bool,
}

struct TargetOutcome {
    covered: Vec<bool>,
    pivot: Option<f64>,
}

struct RepOutcome {
    size: usize,
    targets: Vec<Option<TargetOutcome>>,
    sigmas: Vec<f64>,
    unbounded: usize,
}

struct Plan<'a> {
    config: &'a SimulationConfig,
    fixed: Option<Arc<Design>>,
    factor: DMatrix<f64>,
    beta: DVector<f64>,
    targets: Vec<Target>,
    settings: (CriterionSpec, CandidatePolicy),
}

impl Plan<'_> {
    fn replicate(&self, rep: usize) -> Result<RepOutcome> {
        let config = self.config;
        let mut rng = stream(config.master_seed, rep as u64);
        let design = match &self.fixed {
            Some(d) => Arc::clone(d),
            None => Arc::new(build_design(sample_rows(config.n, &self.factor, &mut rng), config.intercept)?),
        };
        let mean = design.x() * &self.beta;
        let noise = DVector::from_fn(config.n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let data = Dataset::new(Arc::clone(&design), &mean + noise * config.sigma)?;

        let (criterion, policy) = &self.settings;
        let observed = if config.select {
            Some(ObservedSelection::new(&data, criterion, policy)?)
        } else {
            None
        };
        let selected = observed.as_ref().map_or_else(|| design.full_model(), |o| o.selected().clone());
        let sigmas = config
            .sigma_strategies
            .iter()
            .map(|s| estimate_sigma(&data, &selected, s))
            .collect::<Result<Vec<_>>>()?;

        let mut unbounded = 0;
        let mut outcomes = Vec::with_capacity(self.targets.len());
        for target in &self.targets {
            if let InferenceTarget::Coefficient(i) = target.kind {
                if !selected.contains(i) {
                    outcomes.push(None);
                    continue;
                }
            }
            let eta = eta_for_target(&design, &selected, &target.kind)?;
            let eta_mean = eta.dot(&mean);
            let truth = target.truth.unwrap_or(eta_mean);
            let cond = match &observed {
                Some(o) => ConditionalTarget::from_eta(&data, o, eta, config.skip_supersets)?,
                None => unconditional(&data, &selected, eta)?,
            };
            let mut covered = Vec::with_capacity(2 + sigmas.len());
            let t = classical_ci(&data, &selected, &target.kind, config.alpha, &SigmaSpec::MseAic)?;
            covered.push(t.contains(truth));
            let z = classical_ci(&data, &selected, &target.kind, config.alpha, &SigmaSpec::Known(config.sigma))?;
            covered.push(z.contains(truth));
            for &sigma in &sigmas {
                let ci = cond.interval(config.alpha, sigma)?;
                unbounded += usize::from(ci.unbounded);
                covered.push(ci.contains(truth));
            }
            let pivot = match cond.pivot(eta_mean, config.sigma) {
                Ok(v) => Some(v),
                Err(Error::RegionMassUnderflow) => None,
                Err(e) => return Err(e),
            };
            outcomes.push(Some(TargetOutcome { covered, pivot }));
        }
        Ok(RepOutcome {
            size: design.model_size(&selected),
            targets: outcomes,
            sigmas,
            unbounded,
        })
    }
}

fn unconditional(data: &Dataset, selected: &IndexSet, eta: DVector<f64>) -> Result<ConditionalTarget> {
    let decomposition = decompose(data.y(), &eta)?;
    Ok(ConditionalTarget {
        event: SelectionEvent {
            selected: selected.clone(),
            eta_dot_y: decomposition.eta_dot_y,
            region: IntervalUnion::full(),
            comparisons: Vec::new(),
        },
        eta,
        decomposition,
    })
}

/// Runs `config.reps` replications and aggregates coverage.
///
/// Replication `r` draws from its own ChaCha20 stream `r` of the master
/// seed, and outcomes are aggregated in replication order, so the report
/// is identical for any number of workers.
pub fn simulate_coverage(config: &SimulationConfig) -> Result<CoverageReport> {
    config.validate()?;
    let generated = generate_design(config)?;
    let factor = ar1_factor(config.p, config.rho)?;
    let offset = usize::from(config.intercept);
    let fixed = if config.fixed_design {
        Some(Arc::new(build_design(generated.x.clone(), config.intercept)?))
    } else {
        None
    };
    let mut beta = DVector::zeros(config.p + offset);
    beta.rows_mut(offset, config.p).copy_from(&DVector::from_column_slice(&config.beta));

    let mut targets = Vec::new();
    for (k, point) in generated.points.iter().enumerate() {
        let mut x = vec![1.0; offset];
        x.extend_from_slice(point);
        let truth = x.iter().zip(beta.iter()).map(|(a, b)| a * b).sum();
        targets.push(Target {
            label: format!("point{}", k + 1),
            kind: InferenceTarget::PredictionMean(x),
            truth: Some(truth),
            is_point: true,
        });
    }
    for name in &config.coefficients {
        let j: usize = name[1..].parse().expect("validated coefficient name");
        targets.push(Target {
            label: name.clone(),
            kind: InferenceTarget::Coefficient(j - 1 + offset),
            truth: None,
            is_point: false,
        });
    }

    let mut methods = vec![CLASSICAL_T.to_string(), CLASSICAL_KNOWN_SIGMA.to_string()];
    methods.extend(config.sigma_strategies.iter().map(corrected_label));
    let policy = CandidatePolicy {
        include_empty: false,
        max_size: config.max_size,
    };
    let plan = Plan {
        config,
        fixed,
        factor,
        beta,
        targets,
        settings: (CriterionSpec::new(config.criterion, config.n)?, policy),
    };

    let run = || -> Vec<Result<RepOutcome>> { (0..config.reps).into_par_iter().map(|r| plan.replicate(r)).collect() };
    let outcomes = match config.workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Invariant(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };

    let mut recorded = config.clone();
    recorded.points = Some(generated.points);
    Ok(aggregate(recorded, methods, &plan.targets, outcomes))
}

fn aggregate(
    config: SimulationConfig,
    methods: Vec<String>,
    targets: &[Target],
    outcomes: Vec<Result<RepOutcome>>,
) -> CoverageReport {
    let m = methods.len();
    let alpha = config.alpha;
    let mut hits = vec![vec![0usize; m]; targets.len()];
    let mut trials = vec![0usize; targets.len()];
    let mut pivots = vec![Vec::new(); targets.len()];
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    let mut by_size: BTreeMap<usize, (Vec<usize>, usize)> = BTreeMap::new();
    let mut sigma_sums = vec![0.0; config.sigma_strategies.len()];
    let mut failures = Vec::new();
    let mut successful = 0;
    let mut unbounded = 0;

    for (rep, outcome) in outcomes.into_iter().enumerate() {
        let outcome = match outcome {
            Ok(o) => o,
            Err(e) => {
                failures.push(Failure {
                    rep,
                    message: e.to_string(),
                });
                continue;
            }
        };
        successful += 1;
        unbounded += outcome.unbounded;
        *histogram.entry(outcome.size).or_default() += 1;
        for (sum, s) in sigma_sums.iter_mut().zip(&outcome.sigmas) {
            *sum += s;
        }
        let size_row = by_size.entry(outcome.size).or_insert_with(|| (vec![0; m], 0));
        for (k, result) in outcome.targets.iter().enumerate() {
            let Some(result) = result else { continue };
            trials[k] += 1;
            for (j, &c) in result.covered.iter().enumerate() {
                hits[k][j] += usize::from(c);
                if targets[k].is_point {
                    size_row.0[j] += usize::from(c);
                }
            }
            if targets[k].is_point {
                size_row.1 += 1;
            }
            if let Some(p) = result.pivot {
                pivots[k].push(p);
            }
        }
    }

    let entry = |target: &str, strategy: &str, coverage: f64, n: usize| CoverageEntry {
        target: target.to_string(),
        strategy: strategy.to_string(),
        coverage,
        stderr: if n > 0 { (coverage * (1.0 - coverage) / n as f64).sqrt() } else { f64::NAN },
        relative_loss: relative_loss(coverage, alpha),
        trials: n,
    };
    let rate = |h: usize, n: usize| if n > 0 { h as f64 / n as f64 } else { f64::NAN };

    let mut coverage = Vec::new();
    for (k, target) in targets.iter().enumerate().filter(|(k, _)| trials[*k] > 0) {
        for (j, method) in methods.iter().enumerate() {
            coverage.push(entry(&target.label, method, rate(hits[k][j], trials[k]), trials[k]));
        }
    }
    let points: Vec<usize> = (0..targets.len()).filter(|&k| targets[k].is_point).collect();
    if !points.is_empty() && successful > 0 {
        for (j, method) in methods.iter().enumerate() {
            let mean = points.iter().map(|&k| rate(hits[k][j], trials[k])).sum::<f64>() / points.len() as f64;
            coverage.push(entry(AVERAGE, method, mean, successful));
        }
    }
    let avg = |j: usize| coverage.iter().find(|e| e.target == AVERAGE && e.strategy == methods[j]).map(|e| e.coverage);
    let contribution = match (avg(0), avg(1)) {
        (Some(t), Some(z)) => sigma_contribution(t, z, alpha),
        _ => None,
    };

    let size_coverage = by_size
        .iter()
        .filter(|(_, (_, n))| *n > 0)
        .flat_map(|(&size, (h, n))| {
            methods.iter().enumerate().map(move |(j, method)| SizeCoverage {
                size,
                strategy: method.clone(),
                coverage: rate(h[j], *n),
                trials: *n,
            })
        })
        .collect();
    let pivot_ks = targets
        .iter()
        .zip(&pivots)
        .filter(|(_, p)| !p.is_empty())
        .map(|(t, p)| PivotUniformity {
            target: t.label.clone(),
            ks: ks_uniform(p),
            count: p.len(),
        })
        .collect();
    let sigma_means = config
        .sigma_strategies
        .iter()
        .zip(&sigma_sums)
        .map(|(s, sum)| SigmaMean {
            strategy: s.to_string(),
            mean: sum / successful.max(1) as f64,
        })
        .collect();

    CoverageReport {
        methods,
        targets: targets.iter().map(|t| t.label.clone()).collect(),
        coverage,
        sigma_contribution: contribution,
        histogram: histogram.into_iter().map(|(size, count)| SizeCount { size, count }).collect(),
        size_coverage,
        pivot_ks,
        sigma_means,
        successful_reps: successful,
        failures,
        unbounded_intervals: unbounded,
        config,
    }
}
