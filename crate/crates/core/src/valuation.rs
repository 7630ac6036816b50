//! Option values and reservation prices by backward induction.
//!
//! The option value `V(p̄, n, t)` is the expected discounted profit of a
//! seller who posts the buyer reservation price until the horizon ends,
//! with `n` sellers and `t` periods left. It satisfies
//!
//! ```text
//! V(n, 0) = 0
//! V(n, t) = Σ_{i=0}^{n-1} q_i δ V(n-i, t-1)  +  P(demand ≥ n) · p̄
//! ```
//!
//! and anchors every pricing strategy: `P*_{n,t}` is the price at which an
//! immediate sale and deferral are payoff-equivalent.

use std::io::Write;

use crate::demand::DemandModel;
use crate::real::Real;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct MarketParams<S> {
    pub n_sellers: usize,
    pub horizon: usize,
    pub reserve_price: S,
    pub discount: S,
    pub demand: DemandModel<S>,
}

impl<S: Real> MarketParams<S> {
    pub fn validate(&self) -> Result<()> {
        if self.n_sellers < 1 {
            return Err(Error::InvalidParameter("n_sellers must be >= 1".into()));
        }
        if self.reserve_price <= S::zero() {
            return Err(Error::InvalidParameter(format!(
                "reserve_price must be positive, got {}",
                self.reserve_price
            )));
        }
        if !(self.discount > S::zero() && self.discount <= S::one()) {
            return Err(Error::InvalidParameter(format!(
                "discount must lie in (0, 1], got {}",
                self.discount
            )));
        }
        Ok(())
    }

    /// Closed form of the monopolist option value,
    /// `(1-q_0) p̄ (1-(q_0 δ)^t) / (1-q_0 δ)`.
    pub fn monopolist_value(&self, t: usize) -> S {
        let q0 = self.demand.q0();
        let qd = q0 * self.discount;
        if (S::one() - qd).abs() < S::epsilon() {
            // Only reachable with q0 = δ = 1: no buyer ever arrives.
            return S::zero();
        }
        (S::one() - q0) * self.reserve_price * (S::one() - qd.powi(t as i32)) / (S::one() - qd)
    }

    /// One-line descriptor for CSV header comments.
    pub fn describe(&self) -> String {
        format!(
            "n_sellers={} horizon={} reserve_price={} discount={} demand={}",
            self.n_sellers,
            self.horizon,
            self.reserve_price,
            self.discount,
            self.demand.describe()
        )
    }
}

/// Memoized `V(p̄, n, t)` over the full `(n, t)` grid, with reservation
/// prices `P*_{n,t}` for `n ≥ 2`, `t ≥ 1`. Built bottom-up in `t`;
/// immutable afterwards.
#[derive(Debug, Clone)]
pub struct ValueTable<S> {
    params: MarketParams<S>,
    /// Row-major `[n-1][t]`, `n in 1..=N`, `t in 0..=T`.
    values: Vec<S>,
}

impl<S: Real> ValueTable<S> {
    pub fn build(params: MarketParams<S>) -> Result<Self> {
        params.validate()?;
        let n_max = params.n_sellers;
        let t_max = params.horizon;
        let cols = t_max + 1;
        let mut values = vec![S::zero(); n_max * cols];
        let d = &params.demand;
        let delta = params.discount;
        for t in 1..=t_max {
            for n in 1..=n_max {
                let mut v = d.tail_from(n) * params.reserve_price;
                for i in 0..n.min(d.max_demand() + 1) {
                    v += d.q(i) * delta * values[(n - i - 1) * cols + (t - 1)];
                }
                values[(n - 1) * cols + t] = v;
            }
        }
        Ok(Self { params, values })
    }

    pub fn params(&self) -> &MarketParams<S> {
        &self.params
    }

    /// `V(p̄, n, t)`.
    pub fn value(&self, n: usize, t: usize) -> S {
        assert!(
            n >= 1 && n <= self.params.n_sellers && t <= self.params.horizon,
            "value({n}, {t}) outside the built grid"
        );
        self.values[(n - 1) * (self.params.horizon + 1) + t]
    }

    /// `P*_{n,t}`: the lowest price a seller will post.
    ///
    /// Under Bernoulli demand this reduces to `δ V(n-1, t-1)`; for general
    /// demand it is the expected continuation conditioned on positive demand.
    pub fn reservation_price(&self, n: usize, t: usize) -> Result<S> {
        if n < 2 || t < 1 {
            return Err(Error::InvalidParameter(format!(
                "reservation price needs n >= 2 and t >= 1, got ({n}, {t})"
            )));
        }
        let d = &self.params.demand;
        let q0 = d.q0();
        if q0 >= S::one() {
            return Err(Error::DegenerateDemand(
                "q_0 = 1: demand never arrives, reservation price undefined".into(),
            ));
        }
        let delta = self.params.discount;
        let mut num = d.tail_from(n) * self.params.reserve_price;
        for i in 1..n {
            num += d.q(i) * delta * self.value(n - i, t - 1);
        }
        Ok(num / (S::one() - q0))
    }

    /// Writes `n,t,value,reservation_price` rows (reservation empty when
    /// undefined), n ascending then t ascending, after a parameter comment.
    pub fn to_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "# {}", self.params.describe())?;
        writeln!(w, "n,t,value,reservation_price")?;
        for n in 1..=self.params.n_sellers {
            for t in 0..=self.params.horizon {
                let rp = if n >= 2 && t >= 1 {
                    self.reservation_price(n, t)
                        .map(|p| p.to_string())
                        .unwrap_or_default()
                } else {
                    String::new()
                };
                writeln!(w, "{},{},{},{}", n, t, self.value(n, t), rp)?;
            }
        }
        Ok(())
    }
}

/// Fixed point of the value recursion with the horizon index dropped, the
/// infinite-horizon comparator for convergence experiments.
#[derive(Debug, Clone)]
pub struct InfiniteHorizon<S> {
    values: Vec<S>,
    params: MarketParams<S>,
}

impl<S: Real> InfiniteHorizon<S> {
    /// Requires `δ < 1`; the recursion is a δ-contraction. Bernoulli demand
    /// uses the closed form, general demand value iteration.
    pub fn solve(params: MarketParams<S>) -> Result<Self> {
        params.validate()?;
        if params.discount >= S::one() {
            return Err(Error::NoFixedPoint(
                "infinite-horizon value diverges at discount = 1".into(),
            ));
        }
        let n_max = params.n_sellers;
        let d = &params.demand;
        let delta = params.discount;
        let values = if d.is_bernoulli() {
            let q = d.q0();
            let denom = S::one() - q * delta;
            let mut v = Vec::with_capacity(n_max);
            v.push((S::one() - q) * params.reserve_price / denom);
            for n in 2..=n_max {
                let prev = v[n - 2];
                v.push((S::one() - q) * delta * prev / denom);
            }
            v
        } else {
            let tol = S::of(1e-12).max(S::epsilon() * S::of(64.0));
            let mut v = vec![S::zero(); n_max];
            for _ in 0..200_000 {
                let mut next = vec![S::zero(); n_max];
                let mut change = S::zero();
                for n in 1..=n_max {
                    let mut x = d.tail_from(n) * params.reserve_price;
                    for i in 0..n.min(d.max_demand() + 1) {
                        x += d.q(i) * delta * v[n - i - 1];
                    }
                    change = change.max((x - v[n - 1]).abs());
                    next[n - 1] = x;
                }
                v = next;
                if change <= tol {
                    break;
                }
            }
            v
        };
        Ok(Self { values, params })
    }

    /// `V∞(n)`.
    pub fn value(&self, n: usize) -> S {
        assert!(n >= 1 && n <= self.values.len());
        self.values[n - 1]
    }

    /// `P*_{n,∞}`: the reservation-price formula with `V∞` substituted.
    pub fn reservation_price(&self, n: usize) -> Result<S> {
        if n < 2 {
            return Err(Error::InvalidParameter(
                "reservation price needs n >= 2".into(),
            ));
        }
        let d = &self.params.demand;
        let q0 = d.q0();
        if q0 >= S::one() {
            return Err(Error::DegenerateDemand("q_0 = 1".into()));
        }
        let mut num = d.tail_from(n) * self.params.reserve_price;
        for i in 1..n {
            num += d.q(i) * self.params.discount * self.value(n - i);
        }
        Ok(num / (S::one() - q0))
    }
}
