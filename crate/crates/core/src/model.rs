//! Submodel least squares on a fixed design.
//!
//! Every candidate model is factorized with a thin Householder QR. Residual
//! projections `P_S v = v - X_S (X_S' X_S)^{-1} X_S' v` are applied as
//! `v - Q (Q' v)` so the n x n projector is never formed. Factorizations are
//! cached per column subset on the [`Design`], which makes repeated
//! projections (selection geometry, Monte Carlo replications on a fixed
//! design) cheap.

use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance on the QR diagonal below which a submodel is treated
/// as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Largest number of columns for which per-subset factorizations are cached.
const MAX_CACHED_COLUMNS: usize = 16;

/// How an intercept (or any leading column) enters candidate models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterceptPolicy {
    #[default]
    None,
    /// Column 0 is part of every candidate model and does not count toward
    /// the model size used by information criteria.
    ForcedFirstColumn,
}

/// A sorted, duplicate-free set of zero-based design column indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        IndexSet(indices)
    }

    pub fn from_mask(mask: u64) -> Self {
        IndexSet((0..64).filter(|j| mask >> j & 1 == 1).collect())
    }

    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &j| m | 1 << j)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    pub fn position(&self, j: usize) -> Option<usize> {
        self.0.binary_search(&j).ok()
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.0.iter().all(|&j| other.contains(j))
    }

    pub fn is_strict_superset_of(&self, other: &IndexSet) -> bool {
        self.len() > other.len() && other.is_subset_of(self)
    }

    pub fn without(&self, j: usize) -> IndexSet {
        IndexSet(self.0.iter().copied().filter(|&k| k != j).collect())
    }
}

impl serde::Serialize for IndexSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl fmt::Display for IndexSet {
    /// One-based, e.g. `{1,2,3}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, j) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", j + 1)?;
        }
        write!(f, "}}")
    }
}

/// Thin QR factorization of `X_S`.
#[derive(Debug, Clone)]
pub struct SubsetFactor {
    model: IndexSet,
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

impl SubsetFactor {
    fn new(x: &DMatrix<f64>, model: &IndexSet) -> Result<Self> {
        let n = x.nrows();
        if model.is_empty() {
            return Ok(SubsetFactor {
                model: model.clone(),
                q: DMatrix::zeros(n, 0),
                r: DMatrix::zeros(0, 0),
            });
        }
        let xs = x.select_columns(model.indices());
        let qr = xs.qr();
        let r = qr.r();
        let diag: Vec<f64> = r.diagonal().iter().map(|d| d.abs()).collect();
        let largest = diag.iter().copied().fold(0.0_f64, f64::max);
        let smallest = diag.iter().copied().fold(f64::INFINITY, f64::min);
        let ratio = if largest > 0.0 { smallest / largest } else { 0.0 };
        if !(ratio >= RANK_TOLERANCE) {
            return Err(Error::RankDeficient {
                model: model.to_string(),
                ratio,
            });
        }
        Ok(SubsetFactor {
            model: model.clone(),
            q: qr.q(),
            r,
        })
    }

    pub fn model(&self) -> &IndexSet {
        &self.model
    }

    /// `P_S v`.
    pub fn residual(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.model.is_empty() {
            return v.clone();
        }
        let qtv = self.q.tr_mul(v);
        v - &self.q * qtv
    }

    /// Least squares coefficients of `v` on `X_S`.
    pub fn coefficients(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.model.is_empty() {
            return DVector::zeros(0);
        }
        let qtv = self.q.tr_mul(v);
        self.r
            .solve_upper_triangular(&qtv)
            .expect("R diagonal checked at factorization")
    }

    /// `X_S (X_S' X_S)^{-1} c` for a vector `c` indexed by the model's columns.
    pub fn contrast(&self, c: &DVector<f64>) -> DVector<f64> {
        let w = self
            .r
            .tr_solve_upper_triangular(c)
            .expect("R diagonal checked at factorization");
        &self.q * w
    }

    /// `(X_S' X_S)^{-1} c`.
    pub fn gram_solve(&self, c: &DVector<f64>) -> DVector<f64> {
        let w = self
            .r
            .tr_solve_upper_triangular(c)
            .expect("R diagonal checked at factorization");
        self.r
            .solve_upper_triangular(&w)
            .expect("R diagonal checked at factorization")
    }
}

/// A fixed design matrix with column labels and an intercept policy.
pub struct Design {
    x: DMatrix<f64>,
    column_names: Vec<String>,
    intercept: InterceptPolicy,
    cache: Vec<OnceLock<Result<Arc<SubsetFactor>>>>,
}

impl fmt::Debug for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Design")
            .field("n", &self.n())
            .field("p", &self.p())
            .field("column_names", &self.column_names)
            .field("intercept", &self.intercept)
            .finish()
    }
}

impl Design {
    /// Validates `n > p >= 1`, unique names and full column rank.
    pub fn new(
        x: DMatrix<f64>,
        column_names: Vec<String>,
        intercept: InterceptPolicy,
    ) -> Result<Self> {
        let (n, p) = x.shape();
        if p == 0 || n <= p {
            return Err(Error::InvalidInput(format!(
                "design must satisfy n > p >= 1 (n = {n}, p = {p})"
            )));
        }
        if column_names.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: column_names.len(),
            });
        }
        for (k, name) in column_names.iter().enumerate() {
            if column_names[..k].contains(name) {
                return Err(Error::InvalidInput(format!("duplicate column name {name:?}")));
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("design contains non-finite values".into()));
        }
        let slots = if p <= MAX_CACHED_COLUMNS { 1usize << p } else { 0 };
        let design = Design {
            x,
            column_names,
            intercept,
            cache: (0..slots).map(|_| OnceLock::new()).collect(),
        };
        design.factor(&design.full_model())?;
        Ok(design)
    }

    /// Prepends a column of ones named `(Intercept)` and forces it into
    /// every model.
    pub fn with_intercept(x: DMatrix<f64>, column_names: Vec<String>) -> Result<Self> {
        let n = x.nrows();
        let x = x.insert_column(0, 1.0);
        debug_assert_eq!(x.nrows(), n);
        let mut names = Vec::with_capacity(column_names.len() + 1);
        names.push("(Intercept)".to_string());
        names.extend(column_names);
        Design::new(x, names, InterceptPolicy::ForcedFirstColumn)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn intercept(&self) -> InterceptPolicy {
        self.intercept
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Columns included in every candidate.
    pub fn forced_columns(&self) -> IndexSet {
        match self.intercept {
            InterceptPolicy::None => IndexSet::default(),
            InterceptPolicy::ForcedFirstColumn => IndexSet::new(vec![0]),
        }
    }

    /// Columns subject to selection.
    pub fn free_columns(&self) -> Vec<usize> {
        let forced = self.forced_columns();
        (0..self.p()).filter(|&j| !forced.contains(j)).collect()
    }

    pub fn full_model(&self) -> IndexSet {
        IndexSet::new((0..self.p()).collect())
    }

    /// Model size |S| as seen by information criteria: forced columns are
    /// not counted.
    pub fn model_size(&self, model: &IndexSet) -> usize {
        let forced = self.forced_columns();
        model.indices().iter().filter(|&&j| !forced.contains(j)).count()
    }

    /// Residual degrees of freedom `n - |S| - 1`.
    pub fn df_residual(&self, model: &IndexSet) -> i64 {
        self.n() as i64 - self.model_size(model) as i64 - 1
    }

    pub fn model_names(&self, model: &IndexSet) -> Vec<String> {
        model
            .indices()
            .iter()
            .map(|&j| self.column_names[j].clone())
            .collect()
    }

    pub fn validate(&self, model: &IndexSet) -> Result<()> {
        if let Some(&j) = model.indices().iter().find(|&&j| j >= self.p()) {
            return Err(Error::IndexOutOfRange { index: j, p: self.p() });
        }
        if !self.forced_columns().is_subset_of(model) {
            return Err(Error::InvalidInput(format!(
                "model {model} is missing forced column(s)"
            )));
        }
        Ok(())
    }

    /// Cached thin QR of `X_S`.
    pub fn factor(&self, model: &IndexSet) -> Result<Arc<SubsetFactor>> {
        if let Some(&j) = model.indices().iter().find(|&&j| j >= self.p()) {
            return Err(Error::IndexOutOfRange { index: j, p: self.p() });
        }
        match self.cache.get(model.mask() as usize) {
            Some(slot) => slot
                .get_or_init(|| SubsetFactor::new(&self.x, model).map(Arc::new))
                .clone(),
            None => SubsetFactor::new(&self.x, model).map(Arc::new),
        }
    }

    /// `P_S v` without materializing the projector.
    pub fn residual_project(&self, model: &IndexSet, v: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.n(), v.len())?;
        Ok(self.factor(model)?.residual(v))
    }

    /// Adjusted coefficients `(X_S' X_S)^{-1} X_S' m` of a mean vector `m`.
    pub fn adjusted_coefficients(
        &self,
        model: &IndexSet,
        mean_vector: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        check_len(self.n(), mean_vector.len())?;
        self.validate(model)?;
        Ok(self.factor(model)?.coefficients(mean_vector))
    }
}

/// A design paired with one response vector.
#[derive(Debug, Clone)]
pub struct Dataset {
    design: Arc<Design>,
    y: DVector<f64>,
}

impl Dataset {
    pub fn new(design: Arc<Design>, y: DVector<f64>) -> Result<Self> {
        check_len(design.n(), y.len())?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("response contains non-finite values".into()));
        }
        Ok(Dataset { design, y })
    }

    /// Same design, different response.
    pub fn with_response(&self, y: DVector<f64>) -> Result<Self> {
        Dataset::new(self.design.clone(), y)
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn shared_design(&self) -> Arc<Design> {
        self.design.clone()
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.design.n()
    }

    pub fn p(&self) -> usize {
        self.design.p()
    }
}

/// Ordinary least squares fit of a submodel.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresFit {
    pub model: IndexSet,
    pub coefficients: DVector<f64>,
    pub fitted: DVector<f64>,
    pub residuals: DVector<f64>,
    pub rss: f64,
    pub df_residual: i64,
}

pub fn fit_submodel(data: &Dataset, model: &IndexSet) -> Result<LeastSquaresFit> {
    let design = data.design();
    design.validate(model)?;
    let factor = design.factor(model)?;
    let residuals = factor.residual(data.y());
    let fitted = data.y() - &residuals;
    Ok(LeastSquaresFit {
        model: model.clone(),
        coefficients: factor.coefficients(data.y()),
        rss: residuals.norm_squared(),
        fitted,
        residuals,
        df_residual: design.df_residual(model),
    })
}

pub fn rss(data: &Dataset, model: &IndexSet) -> Result<f64> {
    data.design().validate(model)?;
    Ok(data.design().factor(model)?.residual(data.y()).norm_squared())
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
