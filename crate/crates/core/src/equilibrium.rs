//! Equilibrium strategy construction for the four model variants.
//!
//! * Bernoulli demand, two sellers: pure price `P*_{2,t}` (Bertrand price 0
//!   at `t = 1`).
//! * Bernoulli demand, three or more sellers: a canonical candidate profile
//!   (two sellers at `P*_{N,t}`, the rest at `p̄`). The model pins down only
//!   bounds, the atom count at `P*`, and profits, so the candidate must be
//!   confirmed by the deviation oracle before use.
//! * General demand, two sellers: the closed-form mixed CDF `W_t`.
//! * General demand, three or more sellers: the symmetric mixed CDF obtained
//!   by inverting the monotone payoff-balance function `G` with bisection.
//!
//! Pure strategies are one-atom CDFs so the verifier and the simulator see a
//! uniform interface.

use std::collections::BTreeMap;
use std::io::Write;

use crate::real::Real;
use crate::valuation::ValueTable;
use crate::{Error, Result};

/// Default CDF-inversion tolerance, as a fraction of the reserve price.
pub const DEFAULT_INV_TOL_FRAC: f64 = 1e-10;

/// `Z_{k,n}(x) = Σ_{i=0}^{k} C(n-1, i) (1-x)^{n-1-i} x^i`: the probability
/// that at most `k` of `n-1` independent opponents, each below a threshold
/// with probability `x`, actually price below it.
pub fn z_function<S: Real>(k: usize, n: usize, x: S) -> Result<S> {
    if n < 1 || k > n - 1 {
        return Err(Error::InvalidParameter(format!(
            "z_function needs 0 <= k <= n-1, got k={k}, n={n}"
        )));
    }
    if !(x >= S::zero() && x <= S::one()) {
        return Err(Error::InvalidParameter(format!(
            "z_function needs x in [0,1], got {x}"
        )));
    }
    let mut sum = S::zero();
    let mut binom = S::one(); // C(n-1, i)
    for i in 0..=k {
        if i > 0 {
            binom = binom * S::of((n - i) as f64) / S::of(i as f64);
        }
        sum += binom * (S::one() - x).powi((n - 1 - i) as i32) * x.powi(i as i32);
    }
    Ok(sum)
}

/// The oligopoly payoff-balance function
/// `G(x) = [Σ_{i≥n} q_i p̄ + Σ_{i=1}^{n-1} q_i Z_{i-1,n}(x) δV(n-i, t-1)]
///        / [Σ_{i≥n} q_i + Σ_{i=1}^{n-1} q_i Z_{i-1,n}(x)]`,
/// strictly increasing with `G(0) = P*_{n,t}` and `G(1) = p̄`.
#[derive(Debug, Clone)]
pub struct GFunction<S> {
    n: usize,
    tail_pbar: S,
    tail: S,
    /// `(q_i, δ V(n-i, t-1))` for `i = 1..n-1`.
    terms: Vec<(S, S)>,
}

impl<S: Real> GFunction<S> {
    pub fn build(n: usize, t: usize, table: &ValueTable<S>) -> Result<Self> {
        let params = table.params();
        if n < 2 || t < 1 {
            return Err(Error::InvalidParameter(format!(
                "G is defined for n >= 2, t >= 1, got ({n}, {t})"
            )));
        }
        let d = &params.demand;
        if d.tail_from(2) <= S::zero() {
            return Err(Error::ConditionsViolated(
                "oligopoly mixed equilibrium needs P(demand >= 2) > 0".into(),
            ));
        }
        let tail = d.tail_from(n);
        if tail <= S::zero() {
            return Err(Error::ConditionsViolated(format!(
                "demand places no mass at or above {n} sellers; G(1) would divide by zero"
            )));
        }
        let terms = (1..n)
            .map(|i| (d.q(i), params.discount * table.value(n - i, t - 1)))
            .collect();
        Ok(Self {
            n,
            tail_pbar: tail * params.reserve_price,
            tail,
            terms,
        })
    }

    pub fn eval(&self, x: S) -> Result<S> {
        let mut num = self.tail_pbar;
        let mut den = self.tail;
        for (i, (q, v)) in self.terms.iter().enumerate() {
            let z = z_function(i, self.n, x)?;
            num += *q * z * *v;
            den += *q * z;
        }
        Ok(num / den)
    }

    /// Unique `x` with `G(x) = p`, by bisection on `[0,1]` to
    /// `|G(x) - p| <= inv_tol`.
    pub fn invert(&self, p: S, inv_tol: S) -> Result<S> {
        let (g0, g1) = (self.eval(S::zero())?, self.eval(S::one())?);
        if p < g0 - inv_tol || p > g1 + inv_tol {
            return Err(Error::InternalConsistency(format!(
                "G inversion not bracketed: p={p} outside [G(0)={g0}, G(1)={g1}]"
            )));
        }
        let (mut lo, mut hi) = (S::zero(), S::one());
        for _ in 0..128 {
            let mid = (lo + hi) / S::of(2.0);
            let g = self.eval(mid)?;
            if (g - p).abs() <= inv_tol && hi - lo <= S::of(1e-12).max(S::epsilon()) {
                return Ok(mid);
            }
            if g < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo + hi) / S::of(2.0))
    }
}

/// Evaluates `G(x)` for the `(n, t)` subgame directly.
pub fn oligopoly_g<S: Real>(x: S, n: usize, t: usize, table: &ValueTable<S>) -> Result<S> {
    if !(x >= S::zero() && x <= S::one()) {
        return Err(Error::InvalidParameter(format!(
            "G argument must lie in [0,1], got {x}"
        )));
    }
    GFunction::build(n, t, table)?.eval(x)
}

#[derive(Debug, Clone)]
enum Body<S> {
    /// Pure strategies and other purely atomic distributions.
    AtomsOnly,
    /// Closed-form duopoly CDF `(num0 - lin p) / (q1 (cont - p))`.
    DuopolyGeneral { num0: S, lin: S, cont: S, q1: S },
    /// Symmetric oligopoly CDF `G^{-1}(p)`.
    OligopolyInverse { g: GFunction<S>, inv_tol: S },
}

/// A seller's pricing strategy: right-continuous CDF over posted prices on
/// `[support_lo, support_hi]`, with an explicit atom list. Immutable.
#[derive(Debug, Clone)]
pub struct MixedStrategyCdf<S> {
    support_lo: S,
    support_hi: S,
    atoms: Vec<(S, S)>,
    body: Body<S>,
}

impl<S: Real> MixedStrategyCdf<S> {
    /// Single atom of mass one.
    pub fn pure(price: S) -> Self {
        Self {
            support_lo: price,
            support_hi: price,
            atoms: vec![(price, S::one())],
            body: Body::AtomsOnly,
        }
    }

    pub fn support(&self) -> (S, S) {
        (self.support_lo, self.support_hi)
    }

    pub fn atoms(&self) -> &[(S, S)] {
        &self.atoms
    }

    pub fn is_pure(&self) -> bool {
        self.atoms.len() == 1 && self.atoms[0].1 == S::one()
    }

    pub fn atom_price(&self) -> Option<S> {
        self.is_pure().then(|| self.atoms[0].0)
    }

    /// `P(price <= p)`.
    pub fn cdf(&self, p: S) -> S {
        match &self.body {
            Body::AtomsOnly => self
                .atoms
                .iter()
                .filter(|(a, _)| *a <= p)
                .map(|(_, m)| *m)
                .sum(),
            _ if p <= self.support_lo => S::zero(),
            _ if p >= self.support_hi => S::one(),
            Body::DuopolyGeneral {
                num0,
                lin,
                cont,
                q1,
            } => {
                let w = (*num0 - *lin * p) / (*q1 * (*cont - p));
                w.max(S::zero()).min(S::one())
            }
            Body::OligopolyInverse { g, inv_tol } => g
                .invert(p, *inv_tol)
                .expect("support interior prices always bracket G"),
        }
    }

    /// Left limit `P(price < p)`.
    pub fn cdf_left(&self, p: S) -> S {
        match &self.body {
            Body::AtomsOnly => self
                .atoms
                .iter()
                .filter(|(a, _)| *a < p)
                .map(|(_, m)| *m)
                .sum(),
            _ => self.cdf(p), // continuous strategies carry no atoms
        }
    }

    /// Generalized inverse: smallest price with `cdf(price) >= u`.
    pub fn quantile(&self, u: S) -> S {
        let u = u.max(S::zero()).min(S::one());
        match &self.body {
            Body::AtomsOnly => {
                let mut cum = S::zero();
                for (p, m) in &self.atoms {
                    cum += *m;
                    if u <= cum {
                        return *p;
                    }
                }
                self.atoms.last().expect("atoms nonempty").0
            }
            Body::DuopolyGeneral {
                num0,
                lin,
                cont,
                q1,
            } => {
                // Solve (num0 - lin p) = u q1 (cont - p) for p.
                let p = (u * *q1 * *cont - *num0) / (u * *q1 - *lin);
                p.max(self.support_lo).min(self.support_hi)
            }
            Body::OligopolyInverse { g, .. } => {
                let p = g.eval(u).expect("x in [0,1]");
                p.max(self.support_lo).min(self.support_hi)
            }
        }
    }

    /// Inverse-transform sampling; for a pure strategy the atom price.
    pub fn sample_price(&self, u: S) -> S {
        self.quantile(u)
    }

    /// Whether `p` carries equilibrium mass: an atom location, or a point of
    /// the continuous support interval.
    pub fn in_support(&self, p: S) -> bool {
        match &self.body {
            Body::AtomsOnly => {
                let eps = S::of(1e-9);
                self.atoms.iter().any(|(a, _)| (*a - p).abs() <= eps)
            }
            _ => p >= self.support_lo && p <= self.support_hi,
        }
    }

    /// `p,cdf` rows on a uniform grid over the support, preceded by a
    /// parameter comment.
    pub fn to_csv(
        &self,
        w: &mut impl Write,
        header: &str,
        grid_points: usize,
    ) -> std::io::Result<()> {
        writeln!(w, "# {header}")?;
        writeln!(w, "p,cdf")?;
        let n = grid_points.max(2);
        for i in 0..n {
            let frac = S::of(i as f64) / S::of((n - 1) as f64);
            let p = self.support_lo + frac * (self.support_hi - self.support_lo);
            writeln!(w, "{},{}", p, self.cdf(p))?;
        }
        Ok(())
    }
}

/// Per-seller strategies for one period's pricing game.
#[derive(Debug, Clone)]
pub struct StrategyProfile<S> {
    pub strategies: Vec<MixedStrategyCdf<S>>,
    pub symmetric: bool,
    /// True when the profile is a construction that must pass the deviation
    /// oracle before downstream use (the oligopoly-binary candidate).
    pub candidate: bool,
}

impl<S: Real> StrategyProfile<S> {
    pub fn symmetric(n: usize, strategy: MixedStrategyCdf<S>) -> Self {
        Self {
            strategies: vec![strategy; n],
            symmetric: true,
            candidate: false,
        }
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }
}

/// Both sellers post the pure price `P*_{2,t}`; at `t = 1` this is the
/// Bertrand price zero.
pub fn duopoly_binary_equilibrium<S: Real>(
    t: usize,
    table: &ValueTable<S>,
) -> Result<StrategyProfile<S>> {
    if !table.params().demand.is_bernoulli() {
        return Err(Error::WrongVariant(
            "duopoly_binary_equilibrium needs Bernoulli demand".into(),
        ));
    }
    if t < 1 {
        return Err(Error::InvalidParameter("t must be >= 1".into()));
    }
    let p = table.reservation_price(2, t)?;
    Ok(StrategyProfile::symmetric(2, MixedStrategyCdf::pure(p)))
}

/// Canonical oligopoly-binary candidate: two sellers at `P*_{n,t}`, the rest
/// at `p̄`. When `t < n` every continuation value is zero and competition
/// collapses to Bertrand, so the degenerate profile posts zero.
pub fn oligopoly_binary_candidate<S: Real>(
    n: usize,
    t: usize,
    table: &ValueTable<S>,
) -> Result<StrategyProfile<S>> {
    if !table.params().demand.is_bernoulli() {
        return Err(Error::WrongVariant(
            "oligopoly_binary_candidate needs Bernoulli demand".into(),
        ));
    }
    if n < 3 || t < 1 {
        return Err(Error::InvalidParameter(format!(
            "oligopoly_binary_candidate needs n >= 3 and t >= 1, got ({n}, {t})"
        )));
    }
    if t < n {
        let mut profile = StrategyProfile::symmetric(n, MixedStrategyCdf::pure(S::zero()));
        profile.candidate = true;
        return Ok(profile);
    }
    let p_star = table.reservation_price(n, t)?;
    let p_bar = table.params().reserve_price;
    let mut strategies = vec![MixedStrategyCdf::pure(p_star); 2];
    strategies.extend(vec![MixedStrategyCdf::pure(p_bar); n - 2]);
    Ok(StrategyProfile {
        strategies,
        symmetric: false,
        candidate: true,
    })
}

/// Closed-form duopoly mixed CDF `W_t` on `(P*_{2,t}, p̄)`.
pub fn duopoly_general_cdf<S: Real>(
    t: usize,
    table: &ValueTable<S>,
) -> Result<MixedStrategyCdf<S>> {
    let params = table.params();
    let d = &params.demand;
    if t < 1 {
        return Err(Error::InvalidParameter("t must be >= 1".into()));
    }
    if d.q(1) <= S::zero() {
        return Err(Error::ConditionsViolated(
            "duopoly mixed equilibrium needs q_1 > 0".into(),
        ));
    }
    if d.tail_from(2) <= S::zero() {
        return Err(Error::ConditionsViolated(
            "duopoly mixed equilibrium needs P(demand >= 2) > 0".into(),
        ));
    }
    let delta = params.discount;
    let num0 = table.value(2, t) - d.q0() * delta * table.value(2, t - 1);
    let lin = S::one() - d.q0();
    let cont = delta * table.value(1, t - 1);
    Ok(MixedStrategyCdf {
        support_lo: table.reservation_price(2, t)?,
        support_hi: params.reserve_price,
        atoms: Vec::new(),
        body: Body::DuopolyGeneral {
            num0,
            lin,
            cont,
            q1: d.q(1),
        },
    })
}

/// Symmetric oligopoly mixed CDF `W_{n,t} = G^{-1}` on `(P*_{n,t}, p̄)`.
pub fn oligopoly_general_cdf<S: Real>(
    n: usize,
    t: usize,
    table: &ValueTable<S>,
    inv_tol: S,
) -> Result<MixedStrategyCdf<S>> {
    let g = GFunction::build(n, t, table)?;
    Ok(MixedStrategyCdf {
        support_lo: table.reservation_price(n, t)?,
        support_hi: table.params().reserve_price,
        atoms: Vec::new(),
        body: Body::OligopolyInverse { g, inv_tol },
    })
}

/// Equilibrium strategies for every subgame `(n, t)` reachable from the full
/// market, keyed by remaining-seller count and remaining horizon. The market
/// simulator reads play from here as sellers exit.
#[derive(Debug, Clone)]
pub struct ProfileFamily<S> {
    profiles: BTreeMap<(usize, usize), StrategyProfile<S>>,
}

impl<S: Real> ProfileFamily<S> {
    /// Builds the variant-appropriate equilibrium for each `(n, t)`:
    /// a lone seller posts `p̄`, Bernoulli markets play the pure/candidate
    /// profiles, general-demand markets the mixed CDFs.
    pub fn equilibrium(table: &ValueTable<S>) -> Result<Self> {
        let params = table.params();
        let inv_tol = S::of(DEFAULT_INV_TOL_FRAC) * params.reserve_price;
        let mut profiles = BTreeMap::new();
        for n in 1..=params.n_sellers {
            for t in 1..=params.horizon {
                let profile = if n == 1 {
                    StrategyProfile::symmetric(1, MixedStrategyCdf::pure(params.reserve_price))
                } else if params.demand.is_bernoulli() {
                    if n == 2 {
                        duopoly_binary_equilibrium(t, table)?
                    } else {
                        oligopoly_binary_candidate(n, t, table)?
                    }
                } else if n == 2 {
                    StrategyProfile::symmetric(2, duopoly_general_cdf(t, table)?)
                } else {
                    StrategyProfile::symmetric(n, oligopoly_general_cdf(n, t, table, inv_tol)?)
                };
                profiles.insert((n, t), profile);
            }
        }
        Ok(Self { profiles })
    }

    /// Every subgame plays a fixed symmetric profile; used to plant
    /// non-equilibrium play (e.g. everyone at `p̄`).
    pub fn constant_price(n_sellers: usize, horizon: usize, price: S) -> Self {
        let mut profiles = BTreeMap::new();
        for n in 1..=n_sellers {
            for t in 1..=horizon {
                profiles.insert(
                    (n, t),
                    StrategyProfile::symmetric(n, MixedStrategyCdf::pure(price)),
                );
            }
        }
        Self { profiles }
    }

    pub fn get(&self, n: usize, t: usize) -> Option<&StrategyProfile<S>> {
        self.profiles.get(&(n, t))
    }

    pub fn insert(&mut self, n: usize, t: usize, profile: StrategyProfile<S>) {
        self.profiles.insert((n, t), profile);
    }
}
