//! The selection event as a set of values of `eta' Y`.
//!
//! Write `Y = (eta' Y) eta~ + z` with `eta~ = eta / (eta' eta)` and `z`
//! orthogonal to `eta`. Holding `z` fixed and moving `t = eta' Y`, each
//! comparison "the selected model beats competitor S" is the quadratic
//! inequality
//!
//! ```text
//! RSS_S(t) - omega * RSS_sel(t) = a2 t^2 + a1 t + a0 > 0
//! ```
//!
//! whose solution set is at most two intervals. Intersecting over all
//! competitors gives the selection event, a finite union of intervals.
//!
//! When `eta` lies in the column span of the selected model the selected
//! residual maker annihilates `eta~`, so `a2 = |P_S eta~|^2 >= 0`, and every
//! competitor containing the selected model yields a constant inequality
//! that only involves `z`. Those comparisons can be dropped without changing
//! the conditional law of `eta' Y`.

use nalgebra::DVector;
use serde::Serialize;

use crate::criteria::{candidates, compare_scored, penalty_ratio, CandidatePolicy, CriterionSpec, ScoredModel};
use crate::error::{Error, Result};
use crate::intervals::IntervalUnion;
use crate::model::{Dataset, Design, IndexSet};

/// Relative threshold under which a quadratic or linear coefficient is
/// treated as zero.
pub const LEADING_TOLERANCE: f64 = 1e-10;

/// Relative size of `P_sel eta` under which `eta` counts as lying in the
/// selected model's column span.
pub const SPAN_TOLERANCE: f64 = 1e-8;

/// `Y = (eta' Y) eta~ + z`.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaDecomposition {
    pub eta: DVector<f64>,
    pub eta_tilde: DVector<f64>,
    pub eta_dot_y: f64,
    pub z: DVector<f64>,
    pub eta_norm_sq: f64,
}

impl EtaDecomposition {
    /// The response obtained by replacing `eta' Y` with `t`.
    pub fn response_at(&self, t: f64) -> DVector<f64> {
        &self.z + &self.eta_tilde * t
    }
}

pub fn decompose(y: &DVector<f64>, eta: &DVector<f64>) -> Result<EtaDecomposition> {
    if y.len() != eta.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: eta.len(),
        });
    }
    let eta_norm_sq = eta.norm_squared();
    if !(eta_norm_sq > 0.0) {
        return Err(Error::ZeroEta);
    }
    let eta_tilde = eta / eta_norm_sq;
    let eta_dot_y = eta.dot(y);
    let z = y - &eta_tilde * eta_dot_y;
    Ok(EtaDecomposition {
        eta: eta.clone(),
        eta_tilde,
        eta_dot_y,
        z,
        eta_norm_sq,
    })
}

/// Coefficients of `q(t) = a2 t^2 + a1 t + a0`; the comparison holds where
/// `q(t) > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonQuadratic {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
    pub omega: f64,
    pub competitor: IndexSet,
    /// Natural magnitudes of `a2` and `a1`, used for degeneracy tests.
    #[serde(skip)]
    scale: (f64, f64),
}

impl ComparisonQuadratic {
    pub fn evaluate(&self, t: f64) -> f64 {
        (self.a2 * t + self.a1) * t + self.a0
    }

    pub fn feasible_set(&self) -> IntervalUnion {
        let quadratic = self.a2.abs() > LEADING_TOLERANCE * self.scale.0;
        let linear = self.a1.abs() > LEADING_TOLERANCE * self.scale.1;
        if quadratic {
            solve_quadratic(self.a2, self.a1, self.a0)
        } else if linear {
            let root = -self.a0 / self.a1;
            if self.a1 > 0.0 {
                IntervalUnion::interval(root, f64::INFINITY)
            } else {
                IntervalUnion::interval(f64::NEG_INFINITY, root)
            }
        } else if self.a0 > 0.0 {
            IntervalUnion::full()
        } else {
            IntervalUnion::empty()
        }
    }
}

/// `{t : a2 t^2 + a1 t + a0 > 0}` for `a2 != 0`, with cancellation-free roots.
fn solve_quadratic(a2: f64, a1: f64, a0: f64) -> IntervalUnion {
    let disc = a1 * a1 - 4.0 * a2 * a0;
    if !(disc > 0.0) {
        return if a2 > 0.0 {
            IntervalUnion::full()
        } else {
            IntervalUnion::empty()
        };
    }
    let sign = if a1 >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (a1 + sign * disc.sqrt());
    let (mut r1, mut r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a2, a0 / q) };
    if r1 > r2 {
        std::mem::swap(&mut r1, &mut r2);
    }
    if a2 > 0.0 {
        IntervalUnion::from_intervals(vec![(f64::NEG_INFINITY, r1), (r2, f64::INFINITY)])
    } else {
        IntervalUnion::interval(r1, r2)
    }
}

struct Projections<'a> {
    /// `P_S eta~`
    s_eta: &'a DVector<f64>,
    /// `P_S z`
    s_z: &'a DVector<f64>,
    /// `P_sel eta~`
    sel_eta: &'a DVector<f64>,
    /// `P_sel z`
    sel_z: &'a DVector<f64>,
}

fn general_quadratic(
    p: &Projections<'_>,
    decomp: &EtaDecomposition,
    omega: f64,
    competitor: &IndexSet,
) -> ComparisonQuadratic {
    let a2 = p.s_eta.norm_squared() - omega * p.sel_eta.norm_squared();
    let a1 = 2.0 * (p.s_z.dot(p.s_eta) - omega * p.sel_z.dot(p.sel_eta));
    let a0 = p.s_z.norm_squared() - omega * p.sel_z.norm_squared();
    ComparisonQuadratic {
        a2,
        a1,
        a0,
        omega,
        competitor: competitor.clone(),
        scale: scales(decomp, omega),
    }
}

fn simplified_quadratic(
    s_eta: &DVector<f64>,
    s_z: &DVector<f64>,
    sel_z_norm_sq: f64,
    decomp: &EtaDecomposition,
    omega: f64,
    competitor: &IndexSet,
) -> ComparisonQuadratic {
    ComparisonQuadratic {
        a2: s_eta.norm_squared(),
        a1: 2.0 * s_z.dot(s_eta),
        a0: s_z.norm_squared() - omega * sel_z_norm_sq,
        omega,
        competitor: competitor.clone(),
        scale: scales(decomp, omega),
    }
}

fn scales(decomp: &EtaDecomposition, omega: f64) -> (f64, f64) {
    let tilde_sq = 1.0 / decomp.eta_norm_sq;
    let weight = 1.0 + omega;
    (
        weight * tilde_sq,
        2.0 * weight * tilde_sq.sqrt() * decomp.z.norm().max(f64::MIN_POSITIVE),
    )
}

fn omega_for(design: &Design, selected: &IndexSet, competitor: &IndexSet, spec: &CriterionSpec) -> Result<f64> {
    penalty_ratio(design.model_size(selected), design.model_size(competitor), spec)
}

/// Relative norm of `P_sel eta`; zero when `eta` is in the selected span.
pub fn span_residual(design: &Design, selected: &IndexSet, eta: &DVector<f64>) -> Result<f64> {
    Ok(design.residual_project(selected, eta)?.norm() / eta.norm())
}

/// Exact quadratic for one comparison, valid for any `eta`.
pub fn comparison_quadratic(
    decomp: &EtaDecomposition,
    design: &Design,
    selected: &IndexSet,
    competitor: &IndexSet,
    spec: &CriterionSpec,
) -> Result<ComparisonQuadratic> {
    let fs = design.factor(competitor)?;
    let fsel = design.factor(selected)?;
    let s_eta = fs.residual(&decomp.eta_tilde);
    let s_z = fs.residual(&decomp.z);
    let sel_eta = fsel.residual(&decomp.eta_tilde);
    let sel_z = fsel.residual(&decomp.z);
    let omega = omega_for(design, selected, competitor, spec)?;
    let p = Projections {
        s_eta: &s_eta,
        s_z: &s_z,
        sel_eta: &sel_eta,
        sel_z: &sel_z,
    };
    Ok(general_quadratic(&p, decomp, omega, competitor))
}

/// `{t : criterion(selected) < criterion(competitor)}` at `Y = t eta~ + z`,
/// for any `eta`.
pub fn comparison_feasible_set(
    decomp: &EtaDecomposition,
    design: &Design,
    selected: &IndexSet,
    competitor: &IndexSet,
    spec: &CriterionSpec,
) -> Result<IntervalUnion> {
    Ok(comparison_quadratic(decomp, design, selected, competitor, spec)?.feasible_set())
}

/// Same set as [`comparison_feasible_set`], using the closed form available
/// when `eta` lies in the selected model's span: `a2 = |P_S eta~|^2`,
/// `a1 = 2 z' P_S eta~`, `a0 = z' P_S z - omega z' P_sel z`.
pub fn simplified_comparison(
    decomp: &EtaDecomposition,
    design: &Design,
    selected: &IndexSet,
    competitor: &IndexSet,
    spec: &CriterionSpec,
) -> Result<IntervalUnion> {
    let residual = span_residual(design, selected, &decomp.eta)?;
    if residual > SPAN_TOLERANCE {
        return Err(Error::EtaNotInSpan { residual });
    }
    let fs = design.factor(competitor)?;
    let s_eta = fs.residual(&decomp.eta_tilde);
    let s_z = fs.residual(&decomp.z);
    let sel_z_norm_sq = design.factor(selected)?.residual(&decomp.z).norm_squared();
    let omega = omega_for(design, selected, competitor, spec)?;
    Ok(simplified_quadratic(&s_eta, &s_z, sel_z_norm_sq, decomp, omega, competitor).feasible_set())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    /// The competitor contains the selected model: the comparison depends on
    /// `z` only and is independent of `eta' Y`.
    SupersetOfSelected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRecord {
    pub competitor: IndexSet,
    /// `None` when skipped.
    pub feasible: Option<IntervalUnion>,
    pub quadratic: Option<ComparisonQuadratic>,
    pub skipped: Option<SkipReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionEvent {
    pub selected: IndexSet,
    pub eta_dot_y: f64,
    /// Intersection of every non-skipped comparison.
    pub region: IntervalUnion,
    pub comparisons: Vec<ComparisonRecord>,
}

impl SelectionEvent {
    pub fn skipped_count(&self) -> usize {
        self.comparisons.iter().filter(|c| c.skipped.is_some()).count()
    }

    /// Points of the line excluded by selection.
    pub fn excluded_region(&self) -> IntervalUnion {
        self.region.complement()
    }
}

/// Every candidate's residual vector and score at the observed response.
///
/// Built once per response and shared by all targets, so that each
/// additional target only costs one projection of `eta~` per candidate.
#[derive(Debug, Clone)]
pub struct ObservedSelection {
    models: Vec<IndexSet>,
    residuals: Vec<DVector<f64>>,
    scores: Vec<ScoredModel>,
    selected: usize,
    spec: CriterionSpec,
}

impl ObservedSelection {
    pub fn new(data: &Dataset, spec: &CriterionSpec, policy: &CandidatePolicy) -> Result<Self> {
        let design = data.design();
        let models = candidates(design, policy)?;
        if models.is_empty() {
            return Err(Error::InvalidInput("no candidate models".into()));
        }
        let mut residuals = Vec::with_capacity(models.len());
        let mut scores = Vec::with_capacity(models.len());
        for model in &models {
            let r = design.factor(model)?.residual(data.y());
            scores.push(scored(design, model, r.norm_squared(), spec)?);
            residuals.push(r);
        }
        let mut selected = 0;
        for k in 1..scores.len() {
            if compare_scored(&scores[k], &scores[selected]).is_lt() {
                selected = k;
            }
        }
        Ok(ObservedSelection {
            models,
            residuals,
            scores,
            selected,
            spec: *spec,
        })
    }

    pub fn selected(&self) -> &IndexSet {
        &self.models[self.selected]
    }

    pub fn selected_score(&self) -> &ScoredModel {
        &self.scores[self.selected]
    }

    pub fn scores(&self) -> &[ScoredModel] {
        &self.scores
    }

    pub fn spec(&self) -> &CriterionSpec {
        &self.spec
    }

    /// Selection event of the selected model along `decomp.eta`.
    ///
    /// When `eta` lies in the selected span the closed-form coefficients are
    /// used and, with `skip_supersets`, competitors that strictly contain
    /// the selected model are recorded as skipped. For an arbitrary `eta`
    /// every comparison is kept.
    pub fn event(&self, design: &Design, decomp: &EtaDecomposition, skip_supersets: bool) -> Result<SelectionEvent> {
        let selected = self.selected();
        let t0 = decomp.eta_dot_y;
        let sel_eta = design.factor(selected)?.residual(&decomp.eta_tilde);
        let sel_z = &self.residuals[self.selected] - &sel_eta * t0;
        let sel_z_norm_sq = sel_z.norm_squared();
        let in_span = sel_eta.norm() * decomp.eta_norm_sq.sqrt() <= SPAN_TOLERANCE;

        let mut region = IntervalUnion::full();
        let mut comparisons = Vec::with_capacity(self.models.len() - 1);
        for (k, competitor) in self.models.iter().enumerate() {
            if k == self.selected {
                continue;
            }
            if in_span && skip_supersets && competitor.is_strict_superset_of(selected) {
                comparisons.push(ComparisonRecord {
                    competitor: competitor.clone(),
                    feasible: None,
                    quadratic: None,
                    skipped: Some(SkipReason::SupersetOfSelected),
                });
                continue;
            }
            let s_eta = design.factor(competitor)?.residual(&decomp.eta_tilde);
            let s_z = &self.residuals[k] - &s_eta * t0;
            let omega = omega_for(design, selected, competitor, &self.spec)?;
            let quadratic = if in_span {
                simplified_quadratic(&s_eta, &s_z, sel_z_norm_sq, decomp, omega, competitor)
            } else {
                let p = Projections {
                    s_eta: &s_eta,
                    s_z: &s_z,
                    sel_eta: &sel_eta,
                    sel_z: &sel_z,
                };
                general_quadratic(&p, decomp, omega, competitor)
            };
            let feasible = quadratic.feasible_set();
            region = region.intersect(&feasible);
            comparisons.push(ComparisonRecord {
                competitor: competitor.clone(),
                feasible: Some(feasible),
                quadratic: Some(quadratic),
                skipped: None,
            });
        }
        if !region.contains(t0) {
            return Err(Error::Invariant(format!(
                "observed eta'Y = {t0} lies outside its own selection region {region}"
            )));
        }
        Ok(SelectionEvent {
            selected: selected.clone(),
            eta_dot_y: t0,
            region,
            comparisons,
        })
    }
}

/// Builds the selection event of `selected` along `decomp.eta`; the observed
/// response must select `selected` among the candidates of `policy`.
pub fn selection_event(
    data: &Dataset,
    decomp: &EtaDecomposition,
    selected: &IndexSet,
    spec: &CriterionSpec,
    policy: &CandidatePolicy,
    skip_supersets: bool,
) -> Result<SelectionEvent> {
    let observed = ObservedSelection::new(data, spec, policy)?;
    if observed.selected() != selected {
        return Err(Error::NotSelectedModel {
            model: selected.to_string(),
        });
    }
    observed.event(data.design(), decomp, skip_supersets)
}

fn scored(design: &Design, model: &IndexSet, rss: f64, spec: &CriterionSpec) -> Result<ScoredModel> {
    let size = design.model_size(model);
    let score = crate::criteria::criterion_score(size, rss, spec).map_err(|e| match e {
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

/// Lower bound on `(eta' Y)^2` implied by the comparisons against
/// candidates that drop coefficient `column`:
/// `|eta|^2 max_S {omega(S) z' P_sel z - z' P_S z}`, floored at zero.
///
/// Meaningful for the coefficient contrast `eta = X_sel (X_sel' X_sel)^{-1} e_i`,
/// for which each such comparison reduces to `(eta' Y)^2 / |eta|^2 > ...`.
pub fn superset_lower_bound(
    decomp: &EtaDecomposition,
    design: &Design,
    selected: &IndexSet,
    column: usize,
    spec: &CriterionSpec,
    policy: &CandidatePolicy,
) -> Result<f64> {
    if !selected.contains(column) {
        return Err(Error::IndexNotInModel {
            index: column,
            model: selected.to_string(),
        });
    }
    let sel_z_norm_sq = design.factor(selected)?.residual(&decomp.z).norm_squared();
    let mut best = 0.0_f64;
    for sub in candidates(design, policy)?
        .iter()
        .filter(|m| m.is_subset_of(selected) && !m.contains(column))
    {
        let omega = omega_for(design, selected, sub, spec)?;
        let s_z_norm_sq = design.factor(sub)?.residual(&decomp.z).norm_squared();
        best = best.max(omega * sel_z_norm_sq - s_z_norm_sq);
    }
    Ok(decomp.eta_norm_sq * best)
}
