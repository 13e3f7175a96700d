//! Simulation settings, read from a flat TOML file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::criteria::Criterion;
use crate::error::{Error, Result};
use crate::inference::SigmaSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub n: usize,
    pub p: usize,
    pub beta: Vec<f64>,
    /// AR(1) correlation between neighbouring columns.
    pub rho: f64,
    pub sigma: f64,
    pub reps: usize,
    pub alpha: f64,
    pub criterion: Criterion,
    pub sigma_strategies: Vec<SigmaSpec>,
    /// Number of evaluation points drawn from the row distribution when
    /// `points` is not given.
    pub new_points: usize,
    /// Explicit evaluation points, each of length `p`.
    pub points: Option<Vec<Vec<f64>>>,
    /// Design columns (`x1`, `x2`, ...) whose coefficients are also
    /// covered whenever they are selected.
    pub coefficients: Vec<String>,
    pub master_seed: u64,
    /// Draw `X` once and reuse it in every replication.
    pub fixed_design: bool,
    /// Prepend a forced intercept column.
    pub intercept: bool,
    /// With `false`, the full model is always used and nothing is
    /// conditioned on.
    pub select: bool,
    pub skip_supersets: bool,
    /// Largest candidate model size; all sizes when absent.
    pub max_size: Option<usize>,
    /// Worker threads; the global pool when absent. Results do not depend
    /// on it.
    pub workers: Option<usize>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        let p = 10;
        let mut beta = vec![0.0; p];
        beta[..3].copy_from_slice(&[1.0, 2.0, 3.0]);
        SimulationConfig {
            n: 50,
            p,
            beta,
            rho: 0.5,
            sigma: 1.0,
            reps: 5000,
            alpha: 0.05,
            criterion: Criterion::Aic,
            sigma_strategies: vec![SigmaSpec::Known(1.0), SigmaSpec::MseAic, SigmaSpec::MseFull],
            new_points: 10,
            points: None,
            coefficients: Vec::new(),
            master_seed: 2023,
            fixed_design: true,
            intercept: false,
            select: true,
            skip_supersets: true,
            max_size: None,
            workers: None,
        }
    }
}

impl SimulationConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: SimulationConfig =
            toml::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {}", e.message())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.p == 0 {
            return bad("p must be positive".into());
        }
        let fitted = self.p + usize::from(self.intercept);
        if self.n < fitted + 2 {
            return bad(format!("n = {} leaves no residual degrees of freedom", self.n));
        }
        if self.beta.len() != self.p {
            return bad(format!("beta has length {}, expected p = {}", self.beta.len(), self.p));
        }
        if !(self.rho > -1.0 && self.rho < 1.0) {
            return Err(Error::InvalidRho(self.rho));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if let Some(points) = &self.points {
            if let Some(pt) = points.iter().find(|pt| pt.len() != self.p) {
                return bad(format!("evaluation point has length {}, expected {}", pt.len(), self.p));
            }
        }
        for name in &self.coefficients {
            let ok = name
                .strip_prefix('x')
                .and_then(|k| k.parse::<usize>().ok())
                .is_some_and(|k| k >= 1 && k <= self.p);
            if !ok {
                return bad(format!("unknown coefficient '{name}' (expected x1..x{})", self.p));
            }
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_describe_the_reference_design() {
        let c = SimulationConfig::default();
        assert_eq!((c.n, c.p, c.rho, c.sigma), (50, 10, 0.5, 1.0));
        assert_eq!(&c.beta[..4], &[1.0, 2.0, 3.0, 0.0]);
        c.validate().unwrap();
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let c = SimulationConfig {
            reps: 17,
            points: Some(vec![vec![0.5; 10]]),
            ..Default::default()
        };
        assert_eq!(SimulationConfig::from_toml(&c.to_toml()).unwrap(), c);
        let partial = SimulationConfig::from_toml(
            "n = 15\np = 3\nbeta = [1.0, 0.0, 0.0]\ncriterion = \"bic\"\nsigma_strategies = [\"known:2\", \"mse-full\"]\n",
        )
        .unwrap();
        assert_eq!(partial.criterion, Criterion::Bic);
        assert_eq!(partial.sigma_strategies, vec![SigmaSpec::Known(2.0), SigmaSpec::MseFull]);
        assert_eq!(partial.reps, 5000);
    }

    #[test]
    fn rejects_inconsistent_settings() {
        assert!(SimulationConfig::from_toml("rho = 1.0").is_err_and(|e| e == Error::InvalidRho(1.0)));
        assert!(SimulationConfig::from_toml("p = 3").is_err());
        assert!(SimulationConfig::from_toml("reps = 0").is_err());
        assert!(SimulationConfig::from_toml("bogus = 1").is_err());
        assert!(SimulationConfig::from_toml("coefficients = [\"x11\"]").is_err());
        assert!(SimulationConfig::from_toml("n = 11").is_err());
    }
}
