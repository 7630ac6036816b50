//! Discrete per-period demand distributions.
//!
//! A [`DemandModel`] stores the probabilities `q_i` of exactly `i` buyers
//! arriving in one period. Distributions with infinite support (Poisson) are
//! truncated at the smallest index whose tail mass drops below a tolerance;
//! the residual tail is folded into the last stored entry so the pmf always
//! sums to one exactly.

use crate::real::Real;
use crate::{Error, Result};

/// Default truncation tolerance for [`DemandModel::poisson`].
pub const DEFAULT_TRUNC_TOL: f64 = 1e-12;

const MASS_TOL: f64 = 1e-12;
const EXPLICIT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemandKind {
    Bernoulli,
    Explicit,
    PoissonTruncated,
}

/// Discrete demand distribution: `pmf[i]` is the probability of exactly `i`
/// buyers. Immutable after construction.
#[derive(Debug, Clone)]
pub struct DemandModel<S> {
    pmf: Vec<S>,
    tail_mass: S,
    kind: DemandKind,
}

impl<S: Real> DemandModel<S> {
    /// One buyer arrives with probability `1 - q`, none with probability `q`.
    pub fn bernoulli(q: S) -> Result<Self> {
        if !(q > S::zero() && q < S::one()) {
            return Err(Error::InvalidParameter(format!(
                "bernoulli q must lie in (0, 1), got {q}"
            )));
        }
        Ok(Self {
            pmf: vec![q, S::one() - q],
            tail_mass: S::zero(),
            kind: DemandKind::Bernoulli,
        })
    }

    /// Finite pmf given explicitly. Entries must be nonnegative and sum to
    /// one within `1e-9`; the stored pmf is rescaled to sum exactly to one.
    pub fn explicit(probs: &[S]) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("explicit pmf is empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| **p < S::zero()) {
            return Err(Error::InvalidParameter(format!(
                "explicit pmf has negative entry {p}"
            )));
        }
        let sum: S = probs.iter().copied().sum();
        if (sum - S::one()).abs() > S::of(EXPLICIT_SUM_TOL) {
            return Err(Error::InvalidParameter(format!(
                "explicit pmf sums to {sum}, expected 1 within {EXPLICIT_SUM_TOL}"
            )));
        }
        Ok(Self {
            pmf: probs.iter().map(|p| *p / sum).collect(),
            tail_mass: S::zero(),
            kind: DemandKind::Explicit,
        })
    }

    /// Poisson(`mean`) truncated at the smallest `M` with tail mass at most
    /// `trunc_tol`. The recorded tail is folded into `q_M`.
    pub fn poisson(mean: S, trunc_tol: S) -> Result<Self> {
        if mean <= S::zero() {
            return Err(Error::InvalidParameter(format!(
                "poisson mean must be positive, got {mean}"
            )));
        }
        if !(trunc_tol > S::zero() && trunc_tol <= S::of(1e-6)) {
            return Err(Error::InvalidParameter(format!(
                "poisson trunc_tol must lie in (0, 1e-6], got {trunc_tol}"
            )));
        }
        let mut pmf = Vec::new();
        let mut term = (-mean).exp(); // e^{-λ} λ^i / i!
        let mut cum = S::zero();
        let mut i = 0usize;
        loop {
            pmf.push(term);
            cum += term;
            if S::one() - cum <= trunc_tol {
                break;
            }
            i += 1;
            term = term * mean / S::of(i as f64);
            if i > 10_000 {
                return Err(Error::InternalConsistency(
                    "poisson truncation did not converge".into(),
                ));
            }
        }
        let tail = S::one() - cum;
        *pmf.last_mut().unwrap() += tail;
        Ok(Self {
            pmf,
            tail_mass: tail,
            kind: DemandKind::PoissonTruncated,
        })
    }

    pub fn kind(&self) -> DemandKind {
        self.kind
    }

    pub fn pmf(&self) -> &[S] {
        &self.pmf
    }

    /// Tail mass that was folded into the last entry at construction.
    pub fn tail_mass(&self) -> S {
        self.tail_mass
    }

    /// `P(demand = i)`; zero beyond the stored support.
    pub fn q(&self, i: usize) -> S {
        self.pmf.get(i).copied().unwrap_or_else(S::zero)
    }

    /// `P(demand = 0)`.
    pub fn q0(&self) -> S {
        self.pmf[0]
    }

    /// `P(demand >= k)` on the stored pmf.
    pub fn tail_from(&self, k: usize) -> S {
        if k == 0 {
            return S::one();
        }
        // Computed as 1 - head so tail_from(0) == 1 holds exactly.
        let head: S = self.pmf.iter().take(k).copied().sum();
        (S::one() - head).max(S::zero())
    }

    /// Largest demand level carrying positive stored mass.
    pub fn max_demand(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn is_bernoulli(&self) -> bool {
        self.kind == DemandKind::Bernoulli
    }

    /// Total-mass invariant; true for every constructed model.
    pub fn mass_is_normalized(&self) -> bool {
        let sum: S = self.pmf.iter().copied().sum();
        (sum - S::one()).abs() <= S::of(MASS_TOL)
    }

    /// Draws a demand level by inverting the cumulative pmf at `u in [0,1)`.
    pub fn sample(&self, u: S) -> usize {
        let mut cum = S::zero();
        for (i, q) in self.pmf.iter().enumerate() {
            cum += *q;
            if u < cum {
                return i;
            }
        }
        self.pmf.len() - 1
    }

    /// One-line descriptor used in CSV header comments.
    pub fn describe(&self) -> String {
        match self.kind {
            DemandKind::Bernoulli => format!("bernoulli(q={})", self.pmf[0]),
            DemandKind::Explicit => {
                let probs: Vec<String> = self.pmf.iter().map(|p| p.to_string()).collect();
                format!("explicit({})", probs.join(","))
            }
            DemandKind::PoissonTruncated => {
                format!(
                    "poisson(terms={},tail={:e})",
                    self.pmf.len(),
                    self.tail_mass.as_f64()
                )
            }
        }
    }
}
