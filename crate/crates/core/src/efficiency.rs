//! Ex-post, ordinal, and rank-minimizing efficiency.
//!
//! Every check works against an explicit list of feasible pure assignments
//! (usually from [`FeasibleSet::enumerate`](crate::feasibility::FeasibleSet::enumerate)).
//! Ordinal efficiency is decided by an exact linear program over lotteries on
//! that list; a positive gap yields a dominating lottery, which is re-checked
//! with [`fosd`] before it is returned.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::feasibility::{FeasibleSet, PureAssignment};
use crate::lottery::{fosd, marginals, Dominance, Lottery};
use crate::lp::{self, Constraint, LinearProgram, LpOutcome, Relation};
use crate::problem::{AgentId, Problem};
use crate::rational::Rational;

/// `r(x; a)` for every agent and bundle, 1 for the most preferred.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTable {
    ranks: Vec<Vec<usize>>,
}

impl RankTable {
    pub fn new(p: &Problem) -> Self {
        let ranks = p
            .preferences()
            .iter()
            .map(|order| (0..order.len()).map(|b| order.rank(b)).collect())
            .collect();
        RankTable { ranks }
    }

    pub fn rank(&self, agent: usize, bundle: usize) -> usize {
        self.ranks[agent][bundle]
    }

    /// Sum of every agent's rank for its row of `y`.
    pub fn total(&self, p: &Problem, y: &PureAssignment) -> usize {
        (0..p.agent_count())
            .map(|a| {
                let b = p.row_index(y, a).expect("row in universe");
                self.ranks[a][b]
            })
            .sum()
    }
}

/// `R(σ)`: the expected sum of rank positions.
pub fn rank_value(sigma: &Lottery, rt: &RankTable, p: &Problem) -> Rational {
    sigma.support().fold(Rational::zero(), |acc, (y, prob)| {
        acc + prob * Rational::from_integer(BigInt::from(rt.total(p, y)))
    })
}

fn bundle_rows(p: &Problem, y: &PureAssignment) -> Vec<usize> {
    (0..p.agent_count())
        .map(|a| p.row_index(y, a).expect("row in universe"))
        .collect()
}

/// A member of `ys` that Pareto dominates `y`, if any.
pub fn pareto_dominator<'a>(y: &PureAssignment, ys: &'a [PureAssignment], p: &Problem) -> Option<&'a PureAssignment> {
    let base = bundle_rows(p, y);
    ys.iter().find(|z| {
        let rows = bundle_rows(p, z);
        let mut strict = false;
        for (a, (&zb, &yb)) in rows.iter().zip(&base).enumerate() {
            if zb == yb {
                continue;
            }
            if p.preference(a).prefers(zb, yb) {
                strict = true;
            } else {
                return false;
            }
        }
        strict
    })
}

pub fn pareto_efficient(y: &PureAssignment, ys: &[PureAssignment], p: &Problem) -> bool {
    pareto_dominator(y, ys, p).is_none()
}

/// A support member together with an assignment that Pareto dominates it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EeViolation {
    pub member: PureAssignment,
    pub dominator: PureAssignment,
}

/// `None` when every support member is Pareto efficient within `ys`.
pub fn ee_violation(sigma: &Lottery, ys: &[PureAssignment], p: &Problem) -> Option<EeViolation> {
    sigma.members().find_map(|y| {
        pareto_dominator(y, ys, p).map(|d| EeViolation {
            member: y.clone(),
            dominator: d.clone(),
        })
    })
}

pub fn is_ee(sigma: &Lottery, ys: &[PureAssignment], p: &Problem) -> bool {
    ee_violation(sigma, ys, p).is_none()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OeVerdict {
    Efficient,
    /// A lottery on the same feasible set that every agent weakly prefers
    /// and some agent strictly prefers.
    Dominated(Lottery),
}

impl OeVerdict {
    pub fn is_efficient(&self) -> bool {
        matches!(self, OeVerdict::Efficient)
    }

    pub fn witness(&self) -> Option<&Lottery> {
        match self {
            OeVerdict::Efficient => None,
            OeVerdict::Dominated(w) => Some(w),
        }
    }
}

/// Decides ordinal efficiency of `sigma` among lotteries over `ys`.
///
/// Variables are weights on `ys`. For each agent and each cut `i` below the
/// bottom of its order, the weight on assignments giving the agent one of
/// its top `i` bundles must be at least the same probability under `sigma`.
/// Maximizing the summed slack finds a dominator exactly when one exists.
pub fn is_oe(sigma: &Lottery, ys: &[PureAssignment], p: &Problem) -> Result<OeVerdict> {
    let index: HashMap<&PureAssignment, usize> = ys.iter().enumerate().map(|(i, y)| (y, i)).collect();
    for y in sigma.members() {
        if !index.contains_key(y) {
            return Err(Error::InvalidLottery(format!(
                "support member {y} is not in the feasible list"
            )));
        }
    }
    let rt = RankTable::new(p);
    let u = p.universe().len();
    let agents = p.agent_count();
    let rows: Vec<Vec<usize>> = ys.iter().map(|y| bundle_rows(p, y)).collect();
    let ms = marginals(sigma, p);

    let mut constraints = Vec::new();
    let mut baseline = Rational::zero();
    for (a, m) in ms.iter().enumerate() {
        let profile = m.upper_cdf_profile(p.preference(a));
        for (i, rhs) in profile.iter().enumerate().take(u.saturating_sub(1)) {
            baseline += rhs;
            if rhs.is_zero() {
                continue;
            }
            let cut = i + 1;
            let coefs = rows
                .iter()
                .map(|r| {
                    if rt.rank(a, r[a]) <= cut {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            constraints.push(Constraint {
                coefs,
                relation: Relation::Ge,
                rhs: rhs.clone(),
            });
        }
    }
    constraints.push(Constraint {
        coefs: vec![Rational::one(); ys.len()],
        relation: Relation::Eq,
        rhs: Rational::one(),
    });
    let objective = rows
        .iter()
        .map(|r| {
            let s: usize = (0..agents).map(|a| u - rt.rank(a, r[a])).sum();
            Rational::from_integer(BigInt::from(s))
        })
        .collect();
    let program = LinearProgram {
        vars: ys.len(),
        objective,
        constraints,
    };
    let (value, solution) = match lp::maximize(&program) {
        LpOutcome::Optimal { value, solution } => (value, solution),
        other => unreachable!("sigma itself is feasible and weights are bounded: {other:?}"),
    };
    debug_assert!(value >= baseline);
    if value == baseline {
        return Ok(OeVerdict::Efficient);
    }
    let witness = Lottery::new(
        ys.iter()
            .zip(solution)
            .filter(|(_, w)| w.is_positive())
            .map(|(y, w)| (y.clone(), w)),
        p,
    )?;
    let wm = marginals(&witness, p);
    let mut strict = false;
    for a in 0..agents {
        match fosd(p, a, &ms[a], &wm[a]) {
            Dominance::Equal => {}
            Dominance::DominatedStrict => strict = true,
            d => panic!("optimizer witness fails dominance for agent {a}: {d:?}"),
        }
    }
    assert!(strict, "optimizer witness is not strictly better for any agent");
    Ok(OeVerdict::Dominated(witness))
}

/// Minimum total rank and the assignments attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReSolution {
    pub value: usize,
    /// All minimizers in input order for the exhaustive solver, one for the
    /// matching solver.
    pub optimal: Vec<PureAssignment>,
}

/// Exhaustive minimum of total rank over `ys`.
pub fn solve_re(ys: &[PureAssignment], p: &Problem) -> Result<ReSolution> {
    if ys.is_empty() {
        return Err(Error::InvalidProblem("empty feasible list".into()));
    }
    let rt = RankTable::new(p);
    let totals: Vec<usize> = ys.iter().map(|y| rt.total(p, y)).collect();
    let value = *totals.iter().min().expect("non-empty");
    let optimal = ys
        .iter()
        .zip(&totals)
        .filter(|(_, &t)| t == value)
        .map(|(y, _)| y.clone())
        .collect();
    Ok(ReSolution { value, optimal })
}

/// Minimum total rank under unit demand and simple capacities, by
/// min-cost assignment of agents to object copies.
pub fn solve_re_matching(p: &Problem) -> Result<ReSolution> {
    let FeasibleSet::UnitDemandSimpleCapacity(cap) = p.feasible() else {
        return Err(Error::Unsupported(
            "the matching solver needs unit demand with simple capacities".into(),
        ));
    };
    let objects = p.object_count();
    let unit_index: Vec<usize> = (0..objects)
        .map(|o| {
            p.bundle_index(&crate::problem::Bundle::unit(objects, o))
                .expect("unit bundles are validated into the universe")
        })
        .collect();
    let copies: Vec<usize> = cap
        .capacities()
        .iter()
        .enumerate()
        .flat_map(|(o, &q)| std::iter::repeat(o).take(q as usize))
        .collect();
    let rt = RankTable::new(p);
    let cost: Vec<Vec<i64>> = (0..p.agent_count())
        .map(|a| copies.iter().map(|&o| rt.rank(a, unit_index[o]) as i64).collect())
        .collect();
    let (value, matched) = min_cost_assignment(&cost);
    let mut y = PureAssignment::zeros(p.agent_count(), objects);
    for (a, &c) in matched.iter().enumerate() {
        y.set(a, copies[c], 1);
    }
    Ok(ReSolution {
        value: value as usize,
        optimal: vec![y],
    })
}

/// Hungarian method for `rows <= cols`; returns the cost and each row's column.
fn min_cost_assignment(cost: &[Vec<i64>]) -> (i64, Vec<usize>) {
    let n = cost.len();
    if n == 0 {
        return (0, Vec::new());
    }
    let m = cost[0].len();
    assert!(n <= m, "more agents than object copies");
    // 1-based arrays with a virtual column 0
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![i64::MAX; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut matched = vec![0usize; n];
    for j in 1..=m {
        if owner[j] != 0 {
            matched[owner[j] - 1] = j - 1;
        }
    }
    let total = matched.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    (total, matched)
}

/// `R(σ)` equals the minimum over pure assignments.
pub fn is_re(sigma: &Lottery, optimum: &ReSolution, p: &Problem) -> bool {
    rank_value(sigma, &RankTable::new(p), p) == Rational::from_integer(BigInt::from(optimum.value))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EfficiencyReport {
    pub ee: bool,
    pub oe: bool,
    pub re: bool,
    pub rank_value: Rational,
    pub optimal_rank: usize,
    pub ee_witness: Option<EeViolation>,
    pub oe_witness: Option<Lottery>,
    /// A rank-minimizing pure assignment, reported when `re` is false.
    pub re_witness: Option<PureAssignment>,
}

impl EfficiencyReport {
    pub fn evaluate(sigma: &Lottery, ys: &[PureAssignment], p: &Problem) -> Result<Self> {
        let ee_witness = ee_violation(sigma, ys, p);
        let oe = is_oe(sigma, ys, p)?;
        let optimum = solve_re(ys, p)?;
        let rank_value = rank_value(sigma, &RankTable::new(p), p);
        let re = is_re(sigma, &optimum, p);
        let report = EfficiencyReport {
            ee: ee_witness.is_none(),
            oe: oe.is_efficient(),
            re,
            rank_value,
            optimal_rank: optimum.value,
            ee_witness,
            oe_witness: oe.witness().cloned(),
            re_witness: if re { None } else { optimum.optimal.into_iter().next() },
        };
        assert!(
            !report.re || report.oe,
            "rank-minimizing lottery reported as not ordinally efficient"
        );
        assert!(
            !report.oe || report.ee,
            "ordinally efficient lottery reported as not ex-post efficient"
        );
        Ok(report)
    }
}

/// Agents who strictly gain under `witness` relative to `sigma`.
pub fn strict_gainers(sigma: &Lottery, witness: &Lottery, p: &Problem) -> Vec<AgentId> {
    let a = marginals(sigma, p);
    let b = marginals(witness, p);
    (0..p.agent_count())
        .filter(|&i| fosd(p, i, &a[i], &b[i]) == Dominance::DominatedStrict)
        .map(AgentId)
        .collect()
}
