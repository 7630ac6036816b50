//! Independent verification of candidate equilibria.
//!
//! [`deviation_payoff`] evaluates, exactly, the expected discounted payoff of
//! one seller posting an arbitrary price while every opponent follows the
//! profile and play reverts to equilibrium from the next period on. It sums
//! over demand realizations and over each opponent's position relative to the
//! deviation price (strictly below / tied / above), so atom ties are split by
//! exact conditioning rather than by a tie-splitting constant.
//!
//! [`check_epsilon_equilibrium`] turns the oracle into a certificate: payoffs
//! must be flat at the equilibrium value on the strategy's support and never
//! better anywhere else.

use std::io::Write;

use crate::equilibrium::StrategyProfile;
use crate::real::Real;
use crate::valuation::ValueTable;
use crate::{Error, Result};

/// Default certification tolerance, as a fraction of the reserve price.
pub const DEFAULT_EPS_FRAC: f64 = 1e-8;

/// Deviation-payoff scan for one seller.
#[derive(Debug, Clone)]
pub struct DeviationReport<S> {
    pub seller_index: usize,
    pub grid: Vec<(S, S)>,
    pub equilibrium_value: S,
    pub max_gap_on_support: S,
    pub best_deviation_gain: S,
}

impl<S: Real> DeviationReport<S> {
    /// `price,payoff` rows preceded by a summary comment.
    pub fn to_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(
            w,
            "# seller={} equilibrium_value={} max_gap_on_support={} best_deviation_gain={}",
            self.seller_index,
            self.equilibrium_value,
            self.max_gap_on_support,
            self.best_deviation_gain
        )?;
        writeln!(w, "price,payoff")?;
        for (p, v) in &self.grid {
            writeln!(w, "{p},{v}")?;
        }
        Ok(())
    }
}

/// Expected payoff of seller `i` posting `p` in the `t`-periods-left subgame
/// while the other `profile.len() - 1` sellers play their profile strategies.
///
/// A seller sells when strictly fewer than `demand` opponents undercut it,
/// with uniform random allocation among ties; a seller who does not sell
/// keeps its option on the thinner market, `δ V(n - demand, t-1)`.
pub fn deviation_payoff<S: Real>(
    i: usize,
    p: S,
    profile: &StrategyProfile<S>,
    t: usize,
    table: &ValueTable<S>,
) -> Result<S> {
    let params = table.params();
    let p_bar = params.reserve_price;
    if !(p >= S::zero() && p <= p_bar) {
        return Err(Error::InvalidParameter(format!(
            "deviation price must lie in [0, {p_bar}], got {p}"
        )));
    }
    let n = profile.len();
    if i >= n {
        return Err(Error::InvalidParameter(format!(
            "seller index {i} out of range for {n} sellers"
        )));
    }
    if t < 1 {
        return Err(Error::InvalidParameter("t must be >= 1".into()));
    }
    let d = &params.demand;
    let delta = params.discount;

    // Per-opponent probabilities of pricing strictly below p, tying at p,
    // and pricing above p.
    let opponents: Vec<(S, S, S)> = profile
        .strategies
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, s)| {
            let below = s.cdf_left(p);
            let tie = (s.cdf(p) - below).max(S::zero());
            (below, tie, S::one() - below - tie)
        })
        .collect();

    // Exact enumeration over each opponent's category; atom ties contribute
    // the ratio of free slots to tied sellers.
    let mut payoff = S::zero();
    let mut stack: Vec<(usize, usize, usize, S)> = vec![(0, 0, 0, S::one())];
    while let Some((j, b, m, w)) = stack.pop() {
        if w == S::zero() {
            continue;
        }
        if j < opponents.len() {
            let (below, tie, above) = opponents[j];
            stack.push((j + 1, b + 1, m, w * below));
            stack.push((j + 1, b, m + 1, w * tie));
            stack.push((j + 1, b, m, w * above));
            continue;
        }
        // Demand below n: sell, split a tie, or hold the option.
        let mut contrib = S::zero();
        for demand in 0..n {
            let q = d.q(demand);
            if q == S::zero() {
                continue;
            }
            let outcome = if demand <= b {
                delta * table.value(n - demand, t - 1)
            } else if demand > b + m {
                p
            } else {
                let frac = S::of((demand - b) as f64) / S::of((m + 1) as f64);
                frac * p + (S::one() - frac) * delta * table.value(n - demand, t - 1)
            };
            contrib += q * outcome;
        }
        // Demand at or above n: everyone sells.
        contrib += d.tail_from(n) * p;
        payoff += w * contrib;
    }
    Ok(payoff)
}

/// Outcome of scanning every seller's deviations.
#[derive(Debug, Clone)]
pub struct Certification<S> {
    pub reports: Vec<DeviationReport<S>>,
    pub certified: bool,
    pub eps: S,
}

/// Scans deviation payoffs for each seller on a uniform grid over `[0, p̄]`
/// augmented with every atom, the support endpoints, and midpoints between
/// consecutive special points. The profile is certified iff no seller can
/// gain more than `eps` anywhere and payoffs are `eps`-flat on each support.
pub fn check_epsilon_equilibrium<S: Real>(
    profile: &StrategyProfile<S>,
    t: usize,
    table: &ValueTable<S>,
    grid_size: usize,
    eps: S,
) -> Result<Certification<S>> {
    if grid_size < 100 {
        return Err(Error::InvalidParameter(
            "deviation grid needs at least 100 points".into(),
        ));
    }
    let params = table.params();
    let p_bar = params.reserve_price;
    let n = profile.len();
    let equilibrium_value = table.value(n, t);

    // Deviations concentrate at bounds and atoms; make sure the grid hits
    // every special point and the gaps between them.
    let mut special: Vec<S> = vec![S::zero(), p_bar];
    for s in &profile.strategies {
        let (lo, hi) = s.support();
        special.push(lo);
        special.push(hi);
        for (a, _) in s.atoms() {
            special.push(*a);
        }
    }
    special.retain(|p| *p >= S::zero() && *p <= p_bar);
    special.sort_by(|a, b| a.partial_cmp(b).unwrap());
    special.dedup_by(|a, b| (*a - *b).abs() < S::epsilon());
    let mut grid: Vec<S> = (0..grid_size)
        .map(|k| p_bar * S::of(k as f64) / S::of((grid_size - 1) as f64))
        .collect();
    for pair in special.windows(2) {
        grid.push((pair[0] + pair[1]) / S::of(2.0));
    }
    grid.extend(special);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() < S::epsilon());

    let mut reports = Vec::with_capacity(n);
    let mut certified = true;
    for i in 0..n {
        let mut points = Vec::with_capacity(grid.len());
        let mut max_gap = S::zero();
        let mut best_gain = S::zero();
        for &p in &grid {
            let payoff = deviation_payoff(i, p, profile, t, table)?;
            points.push((p, payoff));
            if profile.strategies[i].in_support(p) {
                max_gap = max_gap.max((payoff - equilibrium_value).abs());
            }
            best_gain = best_gain.max(payoff - equilibrium_value);
        }
        if best_gain > eps || max_gap > eps {
            certified = false;
        }
        reports.push(DeviationReport {
            seller_index: i,
            grid: points,
            equilibrium_value,
            max_gap_on_support: max_gap,
            best_deviation_gain: best_gain,
        });
    }
    Ok(Certification {
        reports,
        certified,
        eps,
    })
}
