//! Seeded Monte Carlo simulation of the multi-period market.
//!
//! Each trial plays the full game: remaining sellers draw prices from the
//! subgame profile by inverse transform, a demand level is drawn, the lowest
//! priced sellers (uniform tie-breaking) sell at their posted prices and
//! exit, and profits discount per elapsed period.
//!
//! Reproducibility: every random draw comes from its own ChaCha8 substream
//! keyed by `(seed, trial, period, role)` through a splitmix64 chain, where
//! `role` is the seller index for price draws or a reserved sentinel for the
//! demand and tie-break draws. Identical inputs give bit-identical reports on
//! any platform.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equilibrium::ProfileFamily;
use crate::real::Real;
use crate::valuation::MarketParams;
use crate::{Error, Result};

const DEMAND_ROLE: u64 = u64::MAX;
const TIE_ROLE: u64 = u64::MAX - 1;

/// Number of histogram bins over `[0, p̄]`.
pub const HIST_BINS: usize = 64;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn substream(seed: u64, trial: u64, period: u64, role: u64) -> ChaCha8Rng {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ trial);
    h = splitmix64(h ^ period);
    h = splitmix64(h ^ role);
    ChaCha8Rng::seed_from_u64(h)
}

/// Per-period tallies, indexed by periods remaining (element 0 is the first
/// period played, `t = T`).
#[derive(Debug, Clone)]
pub struct PeriodStats<S> {
    pub periods_remaining: usize,
    pub posted_hist: Vec<u64>,
    pub transacted_hist: Vec<u64>,
    pub transactions: u64,
    pub transacted_sum: S,
    /// Pooled sum of squared deviations of simultaneous transacted prices
    /// from their within-trial mean; drives the dispersion statistic.
    pub within_trial_ss: S,
}

#[derive(Debug, Clone)]
pub struct SimulationReport<S> {
    pub per_seller_mean_profit: Vec<S>,
    pub per_seller_ci_halfwidth: Vec<S>,
    pub trials: u64,
    pub seed: u64,
    pub periods: Vec<PeriodStats<S>>,
    pub params_line: String,
}

impl<S: Real> SimulationReport<S> {
    /// `seller,mean,ci,trials,seed` rows preceded by a parameter comment.
    pub fn to_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(
            w,
            "# {} trials={} seed={}",
            self.params_line, self.trials, self.seed
        )?;
        writeln!(w, "seller,mean,ci,trials,seed")?;
        for (i, (mean, ci)) in self
            .per_seller_mean_profit
            .iter()
            .zip(&self.per_seller_ci_halfwidth)
            .enumerate()
        {
            writeln!(w, "{},{},{},{},{}", i, mean, ci, self.trials, self.seed)?;
        }
        Ok(())
    }
}

/// Runs `trials` independent plays of the market under the given subgame
/// profiles and reports per-seller mean discounted profit with 95%
/// normal-approximation confidence half-widths.
pub fn simulate_market<S: Real>(
    family: &ProfileFamily<S>,
    params: &MarketParams<S>,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport<S>> {
    params.validate()?;
    if trials < 1 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let n_sellers = params.n_sellers;
    let horizon = params.horizon;
    for n in 1..=n_sellers {
        for t in 1..=horizon {
            match family.get(n, t) {
                Some(p) if p.len() == n => {}
                Some(p) => {
                    return Err(Error::InvalidParameter(format!(
                        "profile for ({n}, {t}) has {} strategies, expected {n}",
                        p.len()
                    )))
                }
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "no profile supplied for subgame ({n}, {t})"
                    )))
                }
            }
        }
    }

    let p_bar = params.reserve_price;
    let bin_width = p_bar / S::of(HIST_BINS as f64);
    let bin_of = |p: S| -> usize {
        let b = (p / bin_width).to_usize().unwrap_or(0);
        b.min(HIST_BINS - 1)
    };

    let mut profit_sum = vec![S::zero(); n_sellers];
    let mut profit_sq = vec![S::zero(); n_sellers];
    let mut periods: Vec<PeriodStats<S>> = (1..=horizon)
        .rev()
        .map(|t| PeriodStats {
            periods_remaining: t,
            posted_hist: vec![0; HIST_BINS],
            transacted_hist: vec![0; HIST_BINS],
            transactions: 0,
            transacted_sum: S::zero(),
            within_trial_ss: S::zero(),
        })
        .collect();

    let mut trial_profit = vec![S::zero(); n_sellers];
    for trial in 0..trials {
        trial_profit.iter_mut().for_each(|p| *p = S::zero());
        let mut active: Vec<usize> = (0..n_sellers).collect();
        let mut discount = S::one();
        for t in (1..=horizon).rev() {
            if active.is_empty() {
                break;
            }
            let n_rem = active.len();
            let profile = family.get(n_rem, t).expect("validated above");
            let stats = &mut periods[horizon - t];

            // Posted prices: one substream per (trial, period, seller).
            let mut posted: Vec<(S, usize)> = active
                .iter()
                .enumerate()
                .map(|(k, &seller)| {
                    let u = substream(seed, trial, t as u64, seller as u64).gen::<f64>();
                    let price = profile.strategies[k].sample_price(S::of(u));
                    stats.posted_hist[bin_of(price.min(p_bar))] += 1;
                    (price, seller)
                })
                .collect();

            let demand = {
                let u = substream(seed, trial, t as u64, DEMAND_ROLE).gen::<f64>();
                params.demand.sample(S::of(u))
            };

            // Ascending price, uniform tie-breaking, never above p̄.
            let mut tie_rng = substream(seed, trial, t as u64, TIE_ROLE);
            let mut keyed: Vec<(S, f64, usize)> = posted
                .drain(..)
                .map(|(price, seller)| (price, tie_rng.gen::<f64>(), seller))
                .collect();
            keyed.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());

            let mut sold = Vec::new();
            let mut sale_prices = Vec::new();
            for &(price, _, seller) in keyed.iter().take(demand) {
                if price > p_bar {
                    break; // sorted ascending; nothing further sells
                }
                trial_profit[seller] += discount * price;
                sold.push(seller);
                sale_prices.push(price);
            }
            if !sale_prices.is_empty() {
                let k = S::of(sale_prices.len() as f64);
                let mean = sale_prices.iter().copied().sum::<S>() / k;
                for &p in &sale_prices {
                    stats.transacted_hist[bin_of(p)] += 1;
                    stats.transacted_sum += p;
                    stats.within_trial_ss += (p - mean) * (p - mean);
                }
                stats.transactions += sale_prices.len() as u64;
            }
            active.retain(|s| !sold.contains(s));
            discount = discount * params.discount;
        }
        for (i, p) in trial_profit.iter().enumerate() {
            profit_sum[i] += *p;
            profit_sq[i] += *p * *p;
        }
    }

    let nt = S::of(trials as f64);
    let mean: Vec<S> = profit_sum.iter().map(|s| *s / nt).collect();
    let ci = profit_sq
        .iter()
        .zip(&mean)
        .map(|(sq, m)| {
            if trials > 1 {
                let var = ((*sq - nt * *m * *m) / (nt - S::one())).max(S::zero());
                S::of(1.96) * (var / nt).sqrt()
            } else {
                S::zero()
            }
        })
        .collect();

    Ok(SimulationReport {
        per_seller_mean_profit: mean,
        per_seller_ci_halfwidth: ci,
        trials,
        seed,
        periods,
        params_line: params.describe(),
    })
}

/// Per-period dispersion of transacted prices: the pooled standard deviation
/// of prices transacted simultaneously within a trial-period, i.e. the
/// marginal-price measure under which at most one sale per period (binary
/// demand) shows zero dispersion. `None` when a period never transacts.
pub fn effective_price_dispersion<S: Real>(report: &SimulationReport<S>) -> Vec<Option<S>> {
    report
        .periods
        .iter()
        .map(|p| {
            if p.transactions == 0 {
                None
            } else {
                Some((p.within_trial_ss / S::of(p.transactions as f64)).sqrt())
            }
        })
        .collect()
}
