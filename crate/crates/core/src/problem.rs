//! Problem instances: agents, object types, the bundle universe, strict
//! preferences, the equals partition, and the two standing assumptions.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::feasibility::{EnumerationBudget, FeasibleSet, PureAssignment, Weight};

/// Dense agent index in `[0, |A|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub usize);

/// Dense object-type index in `[0, |O|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectId(pub usize);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// One agent's allocation: a count per object type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bundle(pub Vec<u32>);

impl Bundle {
    pub fn zero(objects: usize) -> Self {
        Bundle(vec![0; objects])
    }

    /// The bundle holding exactly one copy of `object`.
    pub fn unit(objects: usize, object: usize) -> Self {
        let mut counts = vec![0; objects];
        counts[object] = 1;
        Bundle(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&c| c as u64).sum()
    }
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A strict total order over the bundle universe, stored best first as
/// indices into [`Problem::universe`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PreferenceOrder {
    ranking: Vec<usize>,
    // position of each bundle index in `ranking`
    position: Vec<usize>,
}

impl PreferenceOrder {
    /// `ranking` must be a permutation of `0..universe_len`.
    pub fn new(ranking: Vec<usize>, universe_len: usize) -> Result<Self> {
        if ranking.len() != universe_len {
            return Err(Error::InvalidProblem(format!(
                "preference order ranks {} bundles, universe has {}",
                ranking.len(),
                universe_len
            )));
        }
        let mut position = vec![usize::MAX; universe_len];
        for (pos, &b) in ranking.iter().enumerate() {
            if b >= universe_len {
                return Err(Error::InvalidProblem(format!("bundle index {b} out of range")));
            }
            if position[b] != usize::MAX {
                return Err(Error::InvalidProblem(format!(
                    "bundle index {b} ranked twice (indifference is not allowed)"
                )));
            }
            position[b] = pos;
        }
        Ok(PreferenceOrder { ranking, position })
    }

    /// Bundle indices, best first.
    pub fn ranking(&self) -> &[usize] {
        &self.ranking
    }

    /// `r(x; a)`: one plus the number of bundles strictly preferred to `bundle`.
    pub fn rank(&self, bundle: usize) -> usize {
        self.position[bundle] + 1
    }

    /// Whether `x` is strictly preferred to `y`.
    pub fn prefers(&self, x: usize, y: usize) -> bool {
        self.position[x] < self.position[y]
    }

    pub fn len(&self) -> usize {
        self.ranking.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranking.is_empty()
    }
}

/// Partition of the agents into groups of equals. Groups are kept sorted
/// internally and ordered by their smallest member, so the group index of a
/// partition is canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EqualsPartition {
    groups: Vec<Vec<usize>>,
    group_of: Vec<usize>,
}

impl EqualsPartition {
    pub fn new(mut groups: Vec<Vec<usize>>, agents: usize) -> Result<Self> {
        let mut group_of = vec![usize::MAX; agents];
        for g in groups.iter_mut() {
            if g.is_empty() {
                return Err(Error::InvalidProblem("empty group in partition".into()));
            }
            g.sort_unstable();
        }
        groups.sort();
        for (n, g) in groups.iter().enumerate() {
            for &a in g {
                if a >= agents {
                    return Err(Error::InvalidProblem(format!(
                        "partition names agent index {a}, only {agents} agents"
                    )));
                }
                if group_of[a] != usize::MAX {
                    return Err(Error::InvalidProblem(format!("agent index {a} appears in two groups")));
                }
                group_of[a] = n;
            }
        }
        if let Some(a) = group_of.iter().position(|&g| g == usize::MAX) {
            return Err(Error::InvalidProblem(format!("agent index {a} is in no group")));
        }
        Ok(EqualsPartition { groups, group_of })
    }

    pub fn singletons(agents: usize) -> Self {
        EqualsPartition {
            groups: (0..agents).map(|a| vec![a]).collect(),
            group_of: (0..agents).collect(),
        }
    }

    /// Groups agents whose orders are identical.
    pub fn by_preference(orders: &[PreferenceOrder]) -> Self {
        let mut seen: Vec<(&PreferenceOrder, Vec<usize>)> = Vec::new();
        for (a, order) in orders.iter().enumerate() {
            match seen.iter_mut().find(|(o, _)| *o == order) {
                Some((_, members)) => members.push(a),
                None => seen.push((order, vec![a])),
            }
        }
        let groups = seen.into_iter().map(|(_, g)| g).collect();
        EqualsPartition::new(groups, orders.len()).expect("covering by construction")
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group(&self, n: usize) -> &[usize] {
        &self.groups[n]
    }

    pub fn group_of(&self, agent: usize) -> usize {
        self.group_of[agent]
    }

    pub fn agents(&self) -> usize {
        self.group_of.len()
    }

    pub fn are_equals(&self, a: usize, b: usize) -> bool {
        self.group_of[a] == self.group_of[b]
    }

    pub fn is_singletons(&self) -> bool {
        self.groups.iter().all(|g| g.len() == 1)
    }

    /// Pairs `(a, b)` with `a < b` in the same group.
    pub fn equal_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.groups.iter().flat_map(|g| {
            g.iter()
                .enumerate()
                .flat_map(move |(i, &a)| g[i + 1..].iter().map(move |&b| (a, b)))
        })
    }
}

/// A complete problem instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    agents: Vec<String>,
    objects: Vec<String>,
    universe: Vec<Bundle>,
    bundle_index: HashMap<Bundle, usize>,
    preferences: Vec<PreferenceOrder>,
    partition: EqualsPartition,
    feasible: FeasibleSet,
}

impl Problem {
    pub fn new(
        agents: Vec<String>,
        objects: Vec<String>,
        universe: Vec<Bundle>,
        preferences: Vec<PreferenceOrder>,
        partition: EqualsPartition,
        feasible: FeasibleSet,
    ) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidProblem(m));
        if agents.is_empty() || objects.is_empty() {
            return invalid("need at least one agent and one object".into());
        }
        check_unique(&agents, "agent")?;
        check_unique(&objects, "object")?;
        if universe.is_empty() {
            return invalid("bundle universe is empty".into());
        }
        let mut bundle_index = HashMap::with_capacity(universe.len());
        for (i, b) in universe.iter().enumerate() {
            if b.0.len() != objects.len() {
                return invalid(format!(
                    "bundle {b} has {} entries, expected {}",
                    b.0.len(),
                    objects.len()
                ));
            }
            if bundle_index.insert(b.clone(), i).is_some() {
                return invalid(format!("bundle {b} listed twice in the universe"));
            }
        }
        if preferences.len() != agents.len() {
            return invalid(format!(
                "{} preference orders for {} agents",
                preferences.len(),
                agents.len()
            ));
        }
        for p in &preferences {
            if p.len() != universe.len() {
                return invalid("preference order does not cover the bundle universe".into());
            }
        }
        if partition.agents() != agents.len() {
            return invalid("partition does not match the agent count".into());
        }
        let problem = Problem {
            agents,
            objects,
            universe,
            bundle_index,
            preferences,
            partition,
            feasible,
        };
        problem.check_feasible_set()?;
        Ok(problem)
    }

    fn check_feasible_set(&self) -> Result<()> {
        let (na, no) = (self.agents.len(), self.objects.len());
        let invalid = |m: String| Err(Error::InvalidProblem(m));
        match &self.feasible {
            FeasibleSet::Explicit(set) => {
                for y in set.members() {
                    if y.agents() != na || y.objects() != no {
                        return Err(Error::DimensionMismatch {
                            expected_agents: na,
                            expected_objects: no,
                            agents: y.agents(),
                            objects: y.objects(),
                        });
                    }
                    for a in 0..na {
                        let row = y.row_bundle(a);
                        if !self.bundle_index.contains_key(&row) {
                            return invalid(format!(
                                "feasible assignment gives agent {} the bundle {row}, which is not in the universe",
                                self.agents[a]
                            ));
                        }
                    }
                }
            }
            FeasibleSet::LinearCaps(caps) => {
                if caps.agents() != na || caps.objects() != no {
                    return Err(Error::DimensionMismatch {
                        expected_agents: na,
                        expected_objects: no,
                        agents: caps.agents(),
                        objects: caps.objects(),
                    });
                }
                if !self.bundle_index.contains_key(&Bundle::zero(no)) {
                    return invalid(
                        "linear caps always admit the empty bundle; add the zero bundle to the universe".into(),
                    );
                }
            }
            FeasibleSet::UnitDemandSimpleCapacity(cap) => {
                if cap.capacities().len() != no {
                    return invalid(format!("{} capacities for {} objects", cap.capacities().len(), no));
                }
                for o in 0..no {
                    if !self.bundle_index.contains_key(&Bundle::unit(no, o)) {
                        return invalid(format!(
                            "unit demand: the single-object bundle for {} is missing from the universe",
                            self.objects[o]
                        ));
                    }
                }
                let total: u64 = cap.capacities().iter().map(|&q| q as u64).sum();
                if total < na as u64 {
                    return invalid(format!(
                        "total capacity {total} cannot serve {na} agents under unit demand"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Same instance with a different preference profile and partition.
    pub fn with_profile(&self, preferences: Vec<PreferenceOrder>, partition: EqualsPartition) -> Result<Problem> {
        Problem::new(
            self.agents.clone(),
            self.objects.clone(),
            self.universe.clone(),
            preferences,
            partition,
            self.feasible.clone(),
        )
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn agent_labels(&self) -> &[String] {
        &self.agents
    }

    pub fn object_labels(&self) -> &[String] {
        &self.objects
    }

    pub fn agent_label(&self, a: usize) -> &str {
        &self.agents[a]
    }

    pub fn agent_by_label(&self, label: &str) -> Option<AgentId> {
        self.agents.iter().position(|l| l == label).map(AgentId)
    }

    pub fn object_by_label(&self, label: &str) -> Option<ObjectId> {
        self.objects.iter().position(|l| l == label).map(ObjectId)
    }

    pub fn universe(&self) -> &[Bundle] {
        &self.universe
    }

    pub fn bundle(&self, index: usize) -> &Bundle {
        &self.universe[index]
    }

    pub fn bundle_index(&self, bundle: &Bundle) -> Option<usize> {
        self.bundle_index.get(bundle).copied()
    }

    /// Index of the bundle that row `a` of `y` holds, if it is in the universe.
    pub fn row_index(&self, y: &PureAssignment, a: usize) -> Option<usize> {
        self.bundle_index.get(y.row(a)).copied()
    }

    pub fn preferences(&self) -> &[PreferenceOrder] {
        &self.preferences
    }

    pub fn preference(&self, a: usize) -> &PreferenceOrder {
        &self.preferences[a]
    }

    pub fn partition(&self) -> &EqualsPartition {
        &self.partition
    }

    pub fn feasible(&self) -> &FeasibleSet {
        &self.feasible
    }

    /// The universe sorted by agent `a`'s order, best first: entry `i - 1` is
    /// the bundle of rank `i`.
    pub fn ranked_bundles(&self, a: usize) -> Vec<&Bundle> {
        self.preferences[a]
            .ranking()
            .iter()
            .map(|&b| &self.universe[b])
            .collect()
    }
}

fn check_unique(labels: &[String], what: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::InvalidProblem(format!("duplicate {what} label {l:?}")));
        }
    }
    Ok(())
}

/// Per-agent bundle orders, best first (bundle `x^i` sits at position `i - 1`).
pub fn bundle_universe(p: &Problem) -> Vec<Vec<Bundle>> {
    (0..p.agent_count())
        .map(|a| p.ranked_bundles(a).into_iter().cloned().collect())
        .collect()
}

/// Outcome of checking that equals share a preference order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assumption1Report {
    /// `(group, a, b)`: two equals whose orders differ.
    pub violation: Option<(usize, AgentId, AgentId)>,
}

impl Assumption1Report {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

pub fn audit_assumption1(p: &Problem) -> Assumption1Report {
    for (n, group) in p.partition().groups().iter().enumerate() {
        let first = group[0];
        for &b in &group[1..] {
            if p.preference(first) != p.preference(b) {
                return Assumption1Report {
                    violation: Some((n, AgentId(first), AgentId(b))),
                };
            }
        }
    }
    Assumption1Report { violation: None }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Assumption2Report {
    /// Checked exhaustively over the enumerated feasible set.
    Pass,
    /// Implied by the constraint structure (identical coefficients across
    /// equals) without enumeration.
    StructuralPass,
    /// Swapping rows `a` and `b` of `assignment` leaves the feasible set.
    Fail {
        assignment: PureAssignment,
        a: AgentId,
        b: AgentId,
    },
}

impl Assumption2Report {
    pub fn passed(&self) -> bool {
        !matches!(self, Assumption2Report::Fail { .. })
    }
}

/// Checks that swapping the rows of any two equals preserves feasibility.
pub fn audit_assumption2(p: &Problem, budget: EnumerationBudget) -> Result<Assumption2Report> {
    let partition = p.partition();
    match p.feasible() {
        FeasibleSet::UnitDemandSimpleCapacity(_) => Ok(Assumption2Report::StructuralPass),
        FeasibleSet::LinearCaps(caps) if caps_symmetric(caps, partition) => Ok(Assumption2Report::StructuralPass),
        feasible => {
            let members = feasible.enumerate(p, budget)?;
            for y in &members {
                for (a, b) in partition.equal_pairs() {
                    if y.row(a) == y.row(b) {
                        continue;
                    }
                    let swapped = y.swap_rows(a, b);
                    if !feasible.is_feasible(&swapped)? {
                        return Ok(Assumption2Report::Fail {
                            assignment: y.clone(),
                            a: AgentId(a),
                            b: AgentId(b),
                        });
                    }
                }
            }
            Ok(Assumption2Report::Pass)
        }
    }
}

fn caps_symmetric(caps: &crate::feasibility::LinearCaps, partition: &EqualsPartition) -> bool {
    partition.equal_pairs().all(|(a, b)| {
        caps.caps().iter().all(|cap| {
            (0..caps.objects()).all(|o| {
                let (wa, wb): (&Weight, &Weight) = (cap.weight(a, o), cap.weight(b, o));
                wa == wb
            })
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::ExplicitSet;

    fn labels(prefix: &str, n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn unit_universe(objects: usize) -> Vec<Bundle> {
        (0..objects).map(|o| Bundle::unit(objects, o)).collect()
    }

    fn explicit_problem(orders: Vec<Vec<usize>>, groups: Vec<Vec<usize>>, members: Vec<Vec<Vec<u32>>>) -> Problem {
        let objects = members[0][0].len();
        let agents = orders.len();
        let universe = unit_universe(objects);
        let prefs = orders
            .into_iter()
            .map(|o| PreferenceOrder::new(o, universe.len()).unwrap())
            .collect();
        let set = ExplicitSet::new(members.into_iter().map(|m| PureAssignment::from_rows(m).unwrap())).unwrap();
        Problem::new(
            labels("a", agents),
            labels("o", objects),
            universe,
            prefs,
            EqualsPartition::new(groups, agents).unwrap(),
            FeasibleSet::Explicit(set),
        )
        .unwrap()
    }

    #[test]
    fn preference_rejects_indifference_and_gaps() {
        assert!(PreferenceOrder::new(vec![0, 0, 1], 3).is_err());
        assert!(PreferenceOrder::new(vec![0, 1], 3).is_err());
        assert!(PreferenceOrder::new(vec![0, 3, 1], 3).is_err());
        let p = PreferenceOrder::new(vec![2, 0, 1], 3).unwrap();
        assert_eq!(p.rank(2), 1);
        assert_eq!(p.rank(1), 3);
        assert!(p.prefers(0, 1));
    }

    #[test]
    fn partition_validation() {
        assert!(EqualsPartition::new(vec![vec![0, 1], vec![1, 2]], 3).is_err());
        assert!(EqualsPartition::new(vec![vec![0, 1]], 3).is_err());
        assert!(EqualsPartition::new(vec![vec![]], 0).is_err());
        let p = EqualsPartition::new(vec![vec![2], vec![1, 0]], 3).unwrap();
        assert_eq!(p.groups(), &[vec![0, 1], vec![2]]);
        assert_eq!(p.group_of(2), 1);
        assert_eq!(p.equal_pairs().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn by_preference_groups_identical_orders() {
        let t = PreferenceOrder::new(vec![0, 1, 2], 3).unwrap();
        let t2 = PreferenceOrder::new(vec![1, 0, 2], 3).unwrap();
        let p = EqualsPartition::by_preference(&[t.clone(), t2, t]);
        assert_eq!(p.groups(), &[vec![0, 2], vec![1]]);
    }

    #[test]
    fn assumption1_common_order_passes() {
        let id = vec![vec![1, 0, 0, 0]];
        let p = explicit_problem(vec![vec![0, 1, 2, 3]; 1], vec![vec![0]], vec![id]);
        assert!(audit_assumption1(&p).passed());
    }

    #[test]
    fn assumption1_singletons_pass_with_any_orders() {
        let p = explicit_problem(
            vec![vec![0, 1], vec![1, 0]],
            vec![vec![0], vec![1]],
            vec![vec![vec![1, 0], vec![0, 1]]],
        );
        assert!(audit_assumption1(&p).passed());
    }

    #[test]
    fn assumption1_reversed_equals_fail_with_pair() {
        let p = explicit_problem(
            vec![vec![0, 1], vec![1, 0]],
            vec![vec![0, 1]],
            vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 0]]],
        );
        let r = audit_assumption1(&p);
        assert_eq!(r.violation, Some((0, AgentId(0), AgentId(1))));
    }

    #[test]
    fn assumption2_lone_asymmetric_member_fails() {
        let p = explicit_problem(
            vec![vec![0, 1], vec![0, 1]],
            vec![vec![0, 1]],
            vec![vec![vec![1, 0], vec![0, 1]]],
        );
        match audit_assumption2(&p, EnumerationBudget::default()).unwrap() {
            Assumption2Report::Fail { a, b, .. } => assert_eq!((a, b), (AgentId(0), AgentId(1))),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn assumption2_permutation_closed_set_passes() {
        let p = explicit_problem(
            vec![vec![0, 1], vec![0, 1]],
            vec![vec![0, 1]],
            vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 0]]],
        );
        assert_eq!(
            audit_assumption2(&p, EnumerationBudget::default()).unwrap(),
            Assumption2Report::Pass
        );
    }

    #[test]
    fn ranked_bundles_follow_order() {
        let p = explicit_problem(vec![vec![1, 0]], vec![vec![0]], vec![vec![vec![1, 0]]]);
        let ranked = p.ranked_bundles(0);
        assert_eq!(ranked[0], &Bundle(vec![0, 1]));
        assert_eq!(ranked[1], &Bundle(vec![1, 0]));
    }

    #[test]
    fn universe_must_contain_feasible_rows() {
        let universe = vec![Bundle(vec![1, 0])];
        let set = ExplicitSet::new(vec![PureAssignment::from_rows(vec![vec![0, 1]]).unwrap()]).unwrap();
        let err = Problem::new(
            labels("a", 1),
            labels("o", 2),
            universe,
            vec![PreferenceOrder::new(vec![0], 1).unwrap()],
            EqualsPartition::singletons(1),
            FeasibleSet::Explicit(set),
        );
        assert!(matches!(err, Err(Error::InvalidProblem(_))));
    }
}
