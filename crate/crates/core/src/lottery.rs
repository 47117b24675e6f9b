//! Lotteries over feasible pure assignments, per-agent marginals over
//! bundles, and first-order stochastic dominance between marginals.
//!
//! Dominance is only ever evaluated on bundle marginals. There is no
//! expected-count view of a lottery: two lotteries with the same expected
//! copies per object can rank in opposite directions for the same agent.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::feasibility::PureAssignment;
use crate::problem::{PreferenceOrder, Problem};
use crate::rational::{self, Rational};

/// A finitely supported distribution over feasible pure assignments with
/// exact probabilities summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lottery {
    support: BTreeMap<PureAssignment, Rational>,
}

impl Lottery {
    /// Merges repeated assignments and checks every invariant against `p`.
    pub fn new(entries: impl IntoIterator<Item = (PureAssignment, Rational)>, p: &Problem) -> Result<Self> {
        let mut support: BTreeMap<PureAssignment, Rational> = BTreeMap::new();
        for (y, prob) in entries {
            if !prob.is_positive() {
                return Err(Error::InvalidLottery(format!(
                    "probability {} of {y} is not positive",
                    rational::format(&prob)
                )));
            }
            *support.entry(y).or_insert_with(Rational::zero) += prob;
        }
        let lottery = Lottery { support };
        lottery.validate(p)?;
        Ok(lottery)
    }

    pub fn point_mass(y: PureAssignment, p: &Problem) -> Result<Self> {
        Lottery::new([(y, Rational::one())], p)
    }

    /// Callers guarantee positivity, unit mass, and feasibility.
    pub(crate) fn from_support(support: BTreeMap<PureAssignment, Rational>) -> Self {
        debug_assert_eq!(
            support.values().fold(Rational::zero(), |acc, v| acc + v),
            Rational::one()
        );
        Lottery { support }
    }

    pub fn validate(&self, p: &Problem) -> Result<()> {
        if self.support.is_empty() {
            return Err(Error::InvalidLottery("empty support".into()));
        }
        let total = self.support.values().fold(Rational::zero(), |acc, v| acc + v);
        if !total.is_one() {
            return Err(Error::InvalidLottery(format!(
                "probabilities sum to {}, not 1",
                rational::format(&total)
            )));
        }
        for y in self.support.keys() {
            if !p.feasible().is_feasible(y)? {
                return Err(Error::InvalidLottery(format!("support member {y} is infeasible")));
            }
            for a in 0..y.agents() {
                if p.row_index(y, a).is_none() {
                    return Err(Error::InvalidLottery(format!(
                        "support member {y} gives {} a bundle outside the universe",
                        p.agent_label(a)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn support(&self) -> impl Iterator<Item = (&PureAssignment, &Rational)> {
        self.support.iter()
    }

    pub fn members(&self) -> impl Iterator<Item = &PureAssignment> {
        self.support.keys()
    }

    pub fn probability(&self, y: &PureAssignment) -> Rational {
        self.support.get(y).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn is_pure(&self) -> bool {
        self.support.len() == 1
    }
}

/// Distribution of one agent's bundle under a lottery, indexed like
/// [`Problem::universe`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marginal {
    pub agent: usize,
    dist: Vec<Rational>,
}

impl Marginal {
    pub fn from_dist(agent: usize, dist: Vec<Rational>) -> Self {
        Marginal { agent, dist }
    }

    pub fn probability(&self, bundle: usize) -> &Rational {
        &self.dist[bundle]
    }

    pub fn dist(&self) -> &[Rational] {
        &self.dist
    }

    pub fn total(&self) -> Rational {
        self.dist.iter().fold(Rational::zero(), |acc, v| acc + v)
    }

    /// Probability of a bundle weakly better than `bundle` under `order`.
    pub fn upper_cdf_under(&self, order: &PreferenceOrder, bundle: usize) -> Rational {
        let cut = order.rank(bundle);
        order.ranking()[..cut]
            .iter()
            .fold(Rational::zero(), |acc, &b| acc + &self.dist[b])
    }

    /// Upper CDF at every rank position `1..=|universe|` under `order`.
    pub fn upper_cdf_profile(&self, order: &PreferenceOrder) -> Vec<Rational> {
        let mut acc = Rational::zero();
        order
            .ranking()
            .iter()
            .map(|&b| {
                acc += &self.dist[b];
                acc.clone()
            })
            .collect()
    }
}

/// `Pr(x; x(σ)_a)` for every bundle `x` of the universe.
pub fn marginal(sigma: &Lottery, p: &Problem, agent: usize) -> Marginal {
    let mut dist = vec![Rational::zero(); p.universe().len()];
    for (y, prob) in sigma.support() {
        let b = p
            .row_index(y, agent)
            .expect("lottery rows are validated against the universe");
        dist[b] += prob;
    }
    Marginal { agent, dist }
}

pub fn marginals(sigma: &Lottery, p: &Problem) -> Vec<Marginal> {
    (0..p.agent_count()).map(|a| marginal(sigma, p, a)).collect()
}

/// Upper CDF of `m` at bundle `x`, under the order of the marginal's agent.
pub fn upper_cdf(p: &Problem, m: &Marginal, bundle: usize) -> Rational {
    m.upper_cdf_under(p.preference(m.agent), bundle)
}

/// How `first` compares with `second` under one agent's order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dominance {
    /// Identical distributions.
    Equal,
    /// `first` is strictly first-order stochastically dominated by `second`.
    DominatedStrict,
    /// `second` is strictly first-order stochastically dominated by `first`.
    DominatesStrict,
    Incomparable,
}

impl Dominance {
    /// `first` is weakly dominated by `second`.
    pub fn is_weakly_dominated(self) -> bool {
        matches!(self, Dominance::Equal | Dominance::DominatedStrict)
    }
}

/// Compares the upper CDFs of two marginals at every cut point of `order`.
/// The upper CDF determines the distribution, so weak dominance without
/// equality is always strict.
pub fn fosd_under(order: &PreferenceOrder, first: &Marginal, second: &Marginal) -> Dominance {
    let (mut below, mut above) = (false, false);
    let (mut f, mut s) = (Rational::zero(), Rational::zero());
    for &b in order.ranking() {
        f += first.probability(b);
        s += second.probability(b);
        if f < s {
            below = true;
        } else if f > s {
            above = true;
        }
    }
    match (below, above) {
        (false, false) => Dominance::Equal,
        (true, false) => Dominance::DominatedStrict,
        (false, true) => Dominance::DominatesStrict,
        (true, true) => Dominance::Incomparable,
    }
}

/// [`fosd_under`] with agent `agent`'s order from the problem.
pub fn fosd(p: &Problem, agent: usize, first: &Marginal, second: &Marginal) -> Dominance {
    fosd_under(p.preference(agent), first, second)
}
