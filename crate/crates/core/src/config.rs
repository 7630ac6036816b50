//! TOML run configuration.
//!
//! ```toml
//! n_sellers = 2
//! horizon = 5
//! reserve_price = 40.0
//! discount = 0.9
//!
//! [demand]
//! kind = "bernoulli"   # or "explicit", "poisson"
//! q = 0.5              # bernoulli arrival probability
//! # probs = [0.2, 0.5, 0.3]   # explicit pmf over 0, 1, 2, ...
//! # mean = 0.5                # poisson mean
//! # trunc_tol = 1e-12         # poisson tail truncation tolerance
//!
//! # optional run knobs, overridable from the command line
//! trials = 100000
//! seed = 1
//! grid = 200
//! eps = 1e-6
//! tmax = 400
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::demand::{DemandModel, DEFAULT_TRUNC_TOL};
use crate::valuation::MarketParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_sellers: usize,
    pub horizon: usize,
    pub reserve_price: f64,
    pub discount: f64,
    pub demand: DemandConfig,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub eps: Option<f64>,
    pub tmax: Option<usize>,
    pub out: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandConfig {
    pub kind: String,
    pub q: Option<f64>,
    pub probs: Option<Vec<f64>>,
    pub mean: Option<f64>,
    pub trunc_tol: Option<f64>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config parse: {e}")))
    }

    pub fn demand_model(&self) -> Result<DemandModel<f64>> {
        let d = &self.demand;
        match d.kind.as_str() {
            "bernoulli" => {
                let q = d
                    .q
                    .ok_or_else(|| Error::InvalidParameter("bernoulli demand needs `q`".into()))?;
                DemandModel::bernoulli(q)
            }
            "explicit" => {
                let probs = d.probs.as_deref().ok_or_else(|| {
                    Error::InvalidParameter("explicit demand needs `probs`".into())
                })?;
                DemandModel::explicit(probs)
            }
            "poisson" => {
                let mean = d
                    .mean
                    .ok_or_else(|| Error::InvalidParameter("poisson demand needs `mean`".into()))?;
                DemandModel::poisson(mean, d.trunc_tol.unwrap_or(DEFAULT_TRUNC_TOL))
            }
            other => Err(Error::InvalidParameter(format!(
                "unknown demand kind `{other}` (expected bernoulli, explicit, or poisson)"
            ))),
        }
    }

    pub fn market_params(&self) -> Result<MarketParams<f64>> {
        let params = MarketParams {
            n_sellers: self.n_sellers,
            horizon: self.horizon,
            reserve_price: self.reserve_price,
            discount: self.discount,
            demand: self.demand_model()?,
        };
        params.validate()?;
        Ok(params)
    }
}
