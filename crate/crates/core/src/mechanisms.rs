//! Serial dictatorship, consecutive-equals priority lists, and the
//! SD-then-reassign pipeline.

use crate::error::{Error, Result};
use crate::ete::{ete_reassign, GeneratorMode};
use crate::feasibility::{EnumerationBudget, FeasibleSet, PureAssignment};
use crate::lottery::Lottery;
use crate::problem::{EqualsPartition, Problem};

/// A permutation of all agents, highest priority first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PriorityList {
    order: Vec<usize>,
}

impl PriorityList {
    pub fn new(order: Vec<usize>, agents: usize) -> Result<Self> {
        if order.len() != agents {
            return Err(Error::InvalidPriorityList(format!(
                "list has {} entries for {agents} agents",
                order.len()
            )));
        }
        let mut seen = vec![false; agents];
        for &a in &order {
            if a >= agents || std::mem::replace(&mut seen[a], true) {
                return Err(Error::InvalidPriorityList(format!(
                    "agent index {a} is out of range or repeated"
                )));
            }
        }
        Ok(PriorityList { order })
    }

    pub fn identity(agents: usize) -> Self {
        PriorityList {
            order: (0..agents).collect(),
        }
    }

    pub fn from_labels<S: AsRef<str>>(p: &Problem, labels: &[S]) -> Result<Self> {
        let order = labels
            .iter()
            .map(|l| {
                p.agent_by_label(l.as_ref())
                    .map(|a| a.0)
                    .ok_or_else(|| Error::InvalidPriorityList(format!("unknown agent {}", l.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        PriorityList::new(order, p.agent_count())
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

/// Every group of equals occupies a contiguous block of the list.
pub fn check_consecutive_equals(alpha: &PriorityList, partition: &EqualsPartition) -> bool {
    let mut closed = vec![false; partition.groups().len()];
    let mut current: Option<usize> = None;
    for &a in alpha.order() {
        let g = partition.group_of(a);
        if current == Some(g) {
            continue;
        }
        if closed[g] {
            return false;
        }
        if let Some(prev) = current {
            closed[prev] = true;
        }
        current = Some(g);
    }
    true
}

/// Concatenates the groups in `group_order`, each listed as in `within`
/// (one agent ordering per group, indexed by group).
pub fn make_consecutive_equals(
    partition: &EqualsPartition,
    group_order: &[usize],
    within: &[Vec<usize>],
) -> Result<PriorityList> {
    let n = partition.groups().len();
    let mut sorted = group_order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(Error::InvalidPriorityList(
            "group order is not a permutation of the groups".into(),
        ));
    }
    if within.len() != n {
        return Err(Error::InvalidPriorityList("need one agent ordering per group".into()));
    }
    let mut order = Vec::with_capacity(partition.agents());
    for &g in group_order {
        let mut members = within[g].clone();
        members.sort_unstable();
        if members != partition.group(g) {
            return Err(Error::InvalidPriorityList(format!(
                "ordering for group {g} is not a permutation of its members"
            )));
        }
        order.extend_from_slice(&within[g]);
    }
    PriorityList::new(order, partition.agents())
}

/// Groups in index order, agents in index order within each group.
pub fn group_index_order(partition: &EqualsPartition) -> PriorityList {
    PriorityList {
        order: partition.groups().iter().flatten().copied().collect(),
    }
}

/// Each agent in list order takes its most preferred bundle that keeps the
/// partial assignment (later agents at zero) feasible.
///
/// Under unit demand with simple capacities, partial feasibility means
/// enough spare copies remain for the agents still waiting.
pub fn serial_dictatorship(p: &Problem, alpha: &PriorityList, budget: EnumerationBudget) -> Result<PureAssignment> {
    let n = p.agent_count();
    if alpha.order().len() != n {
        return Err(Error::InvalidPriorityList(format!(
            "list has {} entries for {n} agents",
            alpha.order().len()
        )));
    }
    let feasible = p.feasible();
    let mut y = PureAssignment::zeros(n, p.object_count());
    if !feasible.admits_partial(&y, n)? {
        return Err(Error::InfeasibleStart);
    }
    if !matches!(feasible, FeasibleSet::UnitDemandSimpleCapacity(_)) {
        let report = feasible.check_general_upper_bounds(p, budget)?;
        if !report.holds {
            let detail = match report.witness {
                Some((member, lower)) => format!("{member} is feasible but {lower} is not"),
                None => "feasible set is not downward closed".into(),
            };
            return Err(Error::NotDownwardClosed(detail));
        }
    }
    for (t, &a) in alpha.order().iter().enumerate() {
        let remaining = n - t - 1;
        let mut chosen = false;
        for &b in p.preference(a).ranking() {
            y.set_row(a, p.bundle(b).counts());
            if feasible.admits_partial(&y, remaining)? {
                chosen = true;
                break;
            }
        }
        if !chosen {
            return Err(Error::InvalidProblem(format!(
                "no bundle in the universe extends the partial assignment for {}",
                p.agent_label(a)
            )));
        }
    }
    Ok(y)
}

/// Serial dictatorship followed by the ETE reassignment. The list must
/// keep equals consecutive.
pub fn run_pipeline(
    p: &Problem,
    alpha: &PriorityList,
    mode: GeneratorMode,
    budget: EnumerationBudget,
) -> Result<Lottery> {
    if !check_consecutive_equals(alpha, p.partition()) {
        return Err(Error::NotConsecutiveEquals(
            alpha
                .order()
                .iter()
                .map(|&a| p.agent_label(a))
                .collect::<Vec<_>>()
                .join(","),
        ));
    }
    run_pipeline_unchecked(p, alpha, mode, budget)
}

/// [`run_pipeline`] without the consecutive-equals requirement. The output
/// is still ETE but need not be ordinally efficient.
pub fn run_pipeline_unchecked(
    p: &Problem,
    alpha: &PriorityList,
    mode: GeneratorMode,
    budget: EnumerationBudget,
) -> Result<Lottery> {
    let y = serial_dictatorship(p, alpha, budget)?;
    let sigma = Lottery::point_mass(y, p)?;
    ete_reassign(&sigma, p, mode, budget)
}
