//! Running the report-driven mechanism and searching for profitable
//! misreports.
//!
//! The mechanism takes reported orders, forms the equals partition, picks a
//! consecutive-equals priority list, runs serial dictatorship, and
//! reassigns. A misreport is profitable when the manipulator's resulting
//! marginal strictly first-order stochastically dominates its truthful one
//! under its true order.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ete::GeneratorMode;
use crate::feasibility::EnumerationBudget;
use crate::lottery::{fosd_under, marginal, Dominance, Lottery, Marginal};
use crate::mechanisms::{check_consecutive_equals, group_index_order, run_pipeline, PriorityList};
use crate::problem::{AgentId, EqualsPartition, PreferenceOrder, Problem};

/// How the equals partition is formed from a report profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PartitionRule {
    /// Agents reporting the same order are equals.
    #[default]
    ByPreference,
    /// The problem's own partition, whatever is reported.
    Fixed,
}

/// How the priority list is chosen for a profile's partition.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ListSelection {
    /// Groups in index order, agents in index order within.
    #[default]
    GroupIndexOrder,
    /// A list per partition (keyed by its groups), falling back to group
    /// index order for partitions not in the table.
    Table(BTreeMap<Vec<Vec<usize>>, PriorityList>),
}

impl ListSelection {
    pub fn select(&self, partition: &EqualsPartition) -> Result<PriorityList> {
        let alpha = match self {
            ListSelection::GroupIndexOrder => group_index_order(partition),
            ListSelection::Table(table) => table
                .get(partition.groups())
                .cloned()
                .unwrap_or_else(|| group_index_order(partition)),
        };
        if !check_consecutive_equals(&alpha, partition) {
            return Err(Error::NotConsecutiveEquals(format!(
                "selected list {:?} splits a group of {:?}",
                alpha.order(),
                partition.groups()
            )));
        }
        Ok(alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Mechanism {
    pub partition: PartitionRule,
    pub selection: ListSelection,
    pub mode: GeneratorMode,
    pub budget: EnumerationBudget,
}

impl Mechanism {
    /// The instance as seen under `reports`.
    pub fn reported_problem(&self, reports: &[PreferenceOrder], p: &Problem) -> Result<Problem> {
        let partition = match self.partition {
            PartitionRule::ByPreference => EqualsPartition::by_preference(reports),
            PartitionRule::Fixed => p.partition().clone(),
        };
        p.with_profile(reports.to_vec(), partition)
    }

    pub fn run(&self, reports: &[PreferenceOrder], p: &Problem) -> Result<Lottery> {
        let q = self.reported_problem(reports, p)?;
        let alpha = self.selection.select(q.partition())?;
        run_pipeline(&q, &alpha, self.mode, self.budget)
    }
}

/// `f(reports)`.
pub fn mechanism_f(reports: &[PreferenceOrder], p: &Problem, mechanism: &Mechanism) -> Result<Lottery> {
    mechanism.run(reports, p)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MisreportScope {
    /// These orders, in this sequence, for every agent.
    Candidates(Vec<PreferenceOrder>),
    /// Every strict order over the universe, lexicographically.
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManipulationFinding {
    pub manipulator: AgentId,
    pub misreport: PreferenceOrder,
    pub truthful: Marginal,
    pub manipulated: Marginal,
    pub verdict: Dominance,
}

fn all_orders(universe: usize, budget: EnumerationBudget) -> Result<Vec<PreferenceOrder>> {
    let count = (1..=universe).try_fold(1usize, |acc, k| acc.checked_mul(k));
    match count {
        Some(c) if c <= budget.max_tested => {}
        _ => return Err(Error::EnumerationBudgetExceeded(budget.max_tested)),
    }
    let mut perm: Vec<usize> = (0..universe).collect();
    let mut out = Vec::new();
    loop {
        out.push(PreferenceOrder::new(perm.clone(), universe)?);
        let Some(i) = (1..perm.len()).rev().find(|&i| perm[i - 1] < perm[i]) else {
            return Ok(out);
        };
        let j = (i..perm.len())
            .rev()
            .find(|&j| perm[j] > perm[i - 1])
            .expect("successor exists");
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
}

/// Scans agents in index order and misreports in scope order, returning
/// the first profitable misreport.
pub fn find_manipulation(
    truth: &[PreferenceOrder],
    p: &Problem,
    mechanism: &Mechanism,
    scope: &MisreportScope,
) -> Result<Option<ManipulationFinding>> {
    let truthful_problem = mechanism.reported_problem(truth, p)?;
    let truthful = mechanism.run(truth, p)?;
    let candidates = match scope {
        MisreportScope::Candidates(c) => c.clone(),
        MisreportScope::All => all_orders(p.universe().len(), mechanism.budget)?,
    };
    for a in 0..p.agent_count() {
        let before = marginal(&truthful, &truthful_problem, a);
        for report in &candidates {
            if *report == truth[a] {
                continue;
            }
            let mut profile = truth.to_vec();
            profile[a] = report.clone();
            let q = mechanism.reported_problem(&profile, p)?;
            let outcome = mechanism.run(&profile, p)?;
            let after = marginal(&outcome, &q, a);
            let verdict = fosd_under(&truth[a], &before, &after);
            if verdict == Dominance::DominatedStrict {
                return Ok(Some(ManipulationFinding {
                    manipulator: AgentId(a),
                    misreport: report.clone(),
                    truthful: before,
                    manipulated: after,
                    verdict,
                }));
            }
        }
    }
    Ok(None)
}
