//! Feasible sets of pure assignments and structural checks on them.
//!
//! Three representations are supported: an explicit finite list, a family of
//! weighted linear caps (every such family is downward closed), and unit
//! demand with simple per-object capacities. The explicit list is the ground
//! truth for all exhaustive checks; the other two lower to it through
//! [`FeasibleSet::enumerate`].

use std::borrow::Borrow;
use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::problem::{Bundle, Problem};
use crate::rational::{self, Rational};

/// An `|A| x |O|` matrix of copy counts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PureAssignment {
    agents: usize,
    objects: usize,
    // row-major
    cells: Vec<u32>,
}

impl PureAssignment {
    pub fn zeros(agents: usize, objects: usize) -> Self {
        PureAssignment {
            agents,
            objects,
            cells: vec![0; agents * objects],
        }
    }

    pub fn from_rows(rows: Vec<Vec<u32>>) -> Result<Self> {
        let agents = rows.len();
        let objects = rows.first().map_or(0, Vec::len);
        if agents == 0 || objects == 0 {
            return Err(Error::InvalidProblem("empty assignment matrix".into()));
        }
        if rows.iter().any(|r| r.len() != objects) {
            return Err(Error::InvalidProblem("ragged assignment matrix".into()));
        }
        Ok(PureAssignment {
            agents,
            objects,
            cells: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_bundles(rows: &[&Bundle]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|b| b.0.clone()).collect())
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn objects(&self) -> usize {
        self.objects
    }

    pub fn get(&self, a: usize, o: usize) -> u32 {
        self.cells[a * self.objects + o]
    }

    pub fn set(&mut self, a: usize, o: usize, value: u32) {
        self.cells[a * self.objects + o] = value;
    }

    pub fn row(&self, a: usize) -> &[u32] {
        &self.cells[a * self.objects..(a + 1) * self.objects]
    }

    pub fn row_bundle(&self, a: usize) -> Bundle {
        Bundle(self.row(a).to_vec())
    }

    pub fn set_row(&mut self, a: usize, counts: &[u32]) {
        self.cells[a * self.objects..(a + 1) * self.objects].copy_from_slice(counts);
    }

    pub fn column(&self, o: usize) -> Vec<u32> {
        (0..self.agents).map(|a| self.get(a, o)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        (0..self.agents).map(|a| self.row(a).to_vec()).collect()
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    pub fn is_zero(&self) -> bool {
        self.cells.iter().all(|&c| c == 0)
    }

    pub fn swap_rows(&self, a: usize, b: usize) -> Self {
        let mut out = self.clone();
        out.set_row(a, self.row(b));
        out.set_row(b, self.row(a));
        out
    }

    /// Moves row `a` to position `perm[a]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let mut out = self.clone();
        for (a, &target) in perm.iter().enumerate() {
            out.set_row(target, self.row(a));
        }
        out
    }

    fn column_sum(&self, o: usize) -> u64 {
        (0..self.agents).map(|a| self.get(a, o) as u64).sum()
    }

    fn row_sum(&self, a: usize) -> u64 {
        self.row(a).iter().map(|&c| c as u64).sum()
    }
}

impl fmt::Display for PureAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for a in 0..self.agents {
            if a > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(a).iter().map(u32::to_string).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Borrow<[u32]> for Bundle {
    fn borrow(&self) -> &[u32] {
        &self.0
    }
}

/// Limits for exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    /// Candidate matrices (search nodes) examined.
    pub max_tested: usize,
    /// Feasible matrices kept.
    pub max_retained: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_tested: 1_000_000,
            max_retained: 100_000,
        }
    }
}

/// A finite, non-empty set of feasible pure assignments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitSet {
    members: BTreeSet<PureAssignment>,
}

impl ExplicitSet {
    pub fn new(members: impl IntoIterator<Item = PureAssignment>) -> Result<Self> {
        let members: BTreeSet<_> = members.into_iter().collect();
        let first = members
            .iter()
            .next()
            .ok_or_else(|| Error::InvalidProblem("explicit feasible set is empty".into()))?;
        let (na, no) = (first.agents, first.objects);
        if let Some(bad) = members.iter().find(|y| y.agents != na || y.objects != no) {
            return Err(Error::DimensionMismatch {
                expected_agents: na,
                expected_objects: no,
                agents: bad.agents,
                objects: bad.objects,
            });
        }
        Ok(ExplicitSet { members })
    }

    pub fn members(&self) -> impl Iterator<Item = &PureAssignment> {
        self.members.iter()
    }

    pub fn contains(&self, y: &PureAssignment) -> bool {
        self.members.contains(y)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Coefficient of one `(agent, object)` cell in a cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Weight {
    Coef(Rational),
    /// The cell must stay zero.
    Ineligible,
}

impl Weight {
    pub fn int(n: i64) -> Self {
        Weight::Coef(rational::int(n))
    }
}

/// `sum over (a, o) of weight(a, o) * y[a][o] <= bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cap {
    agents: usize,
    objects: usize,
    weights: Vec<Weight>,
    bound: Rational,
}

impl Cap {
    pub fn new(weights: Vec<Vec<Weight>>, bound: Rational) -> Result<Self> {
        let agents = weights.len();
        let objects = weights.first().map_or(0, Vec::len);
        if agents == 0 || objects == 0 || weights.iter().any(|r| r.len() != objects) {
            return Err(Error::InvalidProblem("cap weights must be a non-empty matrix".into()));
        }
        if bound.is_negative() {
            return Err(Error::InvalidProblem("cap bound must be non-negative".into()));
        }
        let weights: Vec<Weight> = weights.into_iter().flatten().collect();
        if weights.iter().any(|w| matches!(w, Weight::Coef(c) if c.is_negative())) {
            return Err(Error::InvalidProblem("cap weights must be non-negative".into()));
        }
        Ok(Cap {
            agents,
            objects,
            weights,
            bound,
        })
    }

    /// Builds the weight matrix cell by cell.
    pub fn from_fn(
        agents: usize,
        objects: usize,
        bound: Rational,
        mut weight: impl FnMut(usize, usize) -> Weight,
    ) -> Result<Self> {
        let rows = (0..agents)
            .map(|a| (0..objects).map(|o| weight(a, o)).collect())
            .collect();
        Cap::new(rows, bound)
    }

    pub fn weight(&self, a: usize, o: usize) -> &Weight {
        &self.weights[a * self.objects + o]
    }

    pub fn bound(&self) -> &Rational {
        &self.bound
    }

    pub fn weights(&self) -> Vec<Vec<Weight>> {
        self.weights.chunks(self.objects).map(|r| r.to_vec()).collect()
    }

    fn satisfied_by(&self, y: &PureAssignment) -> bool {
        let mut total = Rational::zero();
        for (cell, w) in y.cells.iter().zip(&self.weights) {
            if *cell == 0 {
                continue;
            }
            match w {
                Weight::Ineligible => return false,
                Weight::Coef(c) => total += c * rational::int(*cell as i64),
            }
        }
        total <= self.bound
    }
}

/// A conjunction of caps, optionally with at-most-one-unit demand per agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCaps {
    agents: usize,
    objects: usize,
    caps: Vec<Cap>,
    unit_demand: bool,
    null_object: Option<usize>,
}

impl LinearCaps {
    /// `unit_demand` bounds every row sum by one; `null_object` names the
    /// outside option used by [`LinearCaps::transform_min_quota`].
    pub fn new(
        agents: usize,
        objects: usize,
        caps: Vec<Cap>,
        unit_demand: bool,
        null_object: Option<usize>,
    ) -> Result<Self> {
        if let Some(c) = caps.iter().find(|c| c.agents != agents || c.objects != objects) {
            return Err(Error::DimensionMismatch {
                expected_agents: agents,
                expected_objects: objects,
                agents: c.agents,
                objects: c.objects,
            });
        }
        if let Some(o) = null_object {
            if o >= objects {
                return Err(Error::InvalidProblem(format!("null object index {o} out of range")));
            }
        }
        Ok(LinearCaps {
            agents,
            objects,
            caps,
            unit_demand,
            null_object,
        })
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn objects(&self) -> usize {
        self.objects
    }

    pub fn caps(&self) -> &[Cap] {
        &self.caps
    }

    pub fn unit_demand(&self) -> bool {
        self.unit_demand
    }

    pub fn null_object(&self) -> Option<usize> {
        self.null_object
    }

    fn is_feasible(&self, y: &PureAssignment) -> bool {
        if self.unit_demand && (0..y.agents).any(|a| y.row_sum(a) > 1) {
            return false;
        }
        self.caps.iter().all(|c| c.satisfied_by(y))
    }

    /// Recasts "at least `n` agents are assigned inside `region`" as an upper
    /// bound: total assignment outside the region is at most `|A| - n`.
    ///
    /// Requires unit demand and a declared null object outside the region.
    pub fn transform_min_quota(&self, region: &[usize], n: usize) -> Result<LinearCaps> {
        if !self.unit_demand {
            return Err(Error::Unsupported(
                "minimum quota reformulation needs unit demand".into(),
            ));
        }
        let null = self
            .null_object
            .ok_or_else(|| Error::Unsupported("minimum quota reformulation needs a null object".into()))?;
        if region.iter().any(|&o| o >= self.objects) {
            return Err(Error::InvalidProblem("region names an unknown object".into()));
        }
        if region.contains(&null) {
            return Err(Error::InvalidProblem("the null object cannot be in the region".into()));
        }
        if n > self.agents {
            return Err(Error::InvalidProblem(format!(
                "minimum quota {n} exceeds the {} agents",
                self.agents
            )));
        }
        let bound = rational::int((self.agents - n) as i64);
        let cap = Cap::from_fn(self.agents, self.objects, bound, |_, o| {
            Weight::int(if region.contains(&o) { 0 } else { 1 })
        })?;
        let mut out = self.clone();
        out.caps.push(cap);
        Ok(out)
    }
}

/// Unit demand with per-object capacities: every row is a single unit and
/// column `o` sums to at most `q[o]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleCapacity {
    q: Vec<u32>,
}

impl SimpleCapacity {
    pub fn new(q: Vec<u32>) -> Result<Self> {
        if q.is_empty() || q.contains(&0) {
            return Err(Error::InvalidProblem("capacities must be positive".into()));
        }
        Ok(SimpleCapacity { q })
    }

    pub fn capacities(&self) -> &[u32] {
        &self.q
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibleSet {
    Explicit(ExplicitSet),
    LinearCaps(LinearCaps),
    UnitDemandSimpleCapacity(SimpleCapacity),
}

impl FeasibleSet {
    fn check_dims(&self, y: &PureAssignment) -> Result<()> {
        let expected = match self {
            FeasibleSet::Explicit(s) => {
                let m = s.members().next().expect("non-empty");
                (m.agents, m.objects)
            }
            FeasibleSet::LinearCaps(c) => (c.agents, c.objects),
            FeasibleSet::UnitDemandSimpleCapacity(c) => (y.agents, c.q.len()),
        };
        if expected != (y.agents, y.objects) {
            return Err(Error::DimensionMismatch {
                expected_agents: expected.0,
                expected_objects: expected.1,
                agents: y.agents,
                objects: y.objects,
            });
        }
        Ok(())
    }

    pub fn is_feasible(&self, y: &PureAssignment) -> Result<bool> {
        self.check_dims(y)?;
        Ok(match self {
            FeasibleSet::Explicit(s) => s.contains(y),
            FeasibleSet::LinearCaps(c) => c.is_feasible(y),
            FeasibleSet::UnitDemandSimpleCapacity(c) => {
                (0..y.agents).all(|a| y.row_sum(a) == 1) && (0..y.objects).all(|o| y.column_sum(o) <= c.q[o] as u64)
            }
        })
    }

    /// Whether a partial assignment, whose `unassigned` still-open rows are
    /// zero, extends to a feasible one.
    ///
    /// For downward-closed sets this is plain feasibility of `y`; callers must
    /// establish downward closure first for explicit sets. Under unit demand
    /// with simple capacity the open rows must still fit in the leftover
    /// capacity.
    pub fn admits_partial(&self, y: &PureAssignment, unassigned: usize) -> Result<bool> {
        match self {
            FeasibleSet::UnitDemandSimpleCapacity(c) => {
                self.check_dims(y)?;
                if (0..y.agents).any(|a| y.row_sum(a) > 1) {
                    return Ok(false);
                }
                let mut spare = 0u64;
                for o in 0..y.objects {
                    let used = y.column_sum(o);
                    if used > c.q[o] as u64 {
                        return Ok(false);
                    }
                    spare += c.q[o] as u64 - used;
                }
                Ok(spare >= unassigned as u64)
            }
            _ => self.is_feasible(y),
        }
    }

    /// All feasible assignments whose rows lie in the problem's bundle
    /// universe, in lexicographic cell order.
    pub fn enumerate(&self, p: &Problem, budget: EnumerationBudget) -> Result<Vec<PureAssignment>> {
        if let FeasibleSet::Explicit(s) = self {
            if s.len() > budget.max_retained {
                return Err(Error::EnumerationBudgetExceeded(budget.max_retained));
            }
            return Ok(s.members().cloned().collect());
        }
        let mut rows: Vec<&Bundle> = p.universe().iter().collect();
        rows.sort();
        let mut search = Search {
            set: self,
            rows: &rows,
            budget,
            tested: 0,
            out: Vec::new(),
        };
        let mut y = PureAssignment::zeros(p.agent_count(), p.object_count());
        search.descend(&mut y, 0)?;
        let mut out = search.out;
        out.sort();
        Ok(out)
    }

    /// Whether every componentwise decrease of a feasible assignment is
    /// feasible.
    pub fn check_general_upper_bounds(&self, p: &Problem, budget: EnumerationBudget) -> Result<UpperBoundsReport> {
        if let FeasibleSet::LinearCaps(_) = self {
            return Ok(UpperBoundsReport {
                holds: true,
                structural: true,
                witness: None,
            });
        }
        for y in self.enumerate(p, budget)? {
            for a in 0..y.agents {
                for o in 0..y.objects {
                    if y.get(a, o) == 0 {
                        continue;
                    }
                    let mut lower = y.clone();
                    lower.set(a, o, y.get(a, o) - 1);
                    if !self.is_feasible(&lower)? {
                        return Ok(UpperBoundsReport {
                            holds: false,
                            structural: false,
                            witness: Some((y, lower)),
                        });
                    }
                }
            }
        }
        Ok(UpperBoundsReport {
            holds: true,
            structural: false,
            witness: None,
        })
    }

    /// Checks the per-object version of the upper-bounds condition.
    ///
    /// Two things are reported: whether each object's set of feasible columns
    /// is downward closed, and whether the feasible set is the free product of
    /// those column sets (every combination of feasible columns is feasible).
    /// The per-object condition is read as requiring both.
    pub fn check_per_object_upper_bounds(&self, p: &Problem, budget: EnumerationBudget) -> Result<PerObjectReport> {
        let members = self.enumerate(p, budget)?;
        let columns: Vec<BTreeSet<Vec<u32>>> = (0..p.object_count())
            .map(|o| members.iter().map(|y| y.column(o)).collect())
            .collect();

        let mut column_witness = None;
        'outer: for (o, set) in columns.iter().enumerate() {
            for z in set {
                for a in 0..z.len() {
                    if z[a] == 0 {
                        continue;
                    }
                    let mut lower = z.clone();
                    lower[a] -= 1;
                    if !set.contains(&lower) {
                        column_witness = Some((o, z.clone(), lower));
                        break 'outer;
                    }
                }
            }
        }

        let combos: usize = columns
            .iter()
            .try_fold(1usize, |acc, s| acc.checked_mul(s.len()))
            .filter(|&n| n <= budget.max_tested)
            .ok_or(Error::EnumerationBudgetExceeded(budget.max_tested))?;
        let member_set: HashSet<&PureAssignment> = members.iter().collect();
        let column_lists: Vec<Vec<&Vec<u32>>> = columns.iter().map(|s| s.iter().collect()).collect();
        let mut combination_witness = None;
        let mut digits = vec![0usize; columns.len()];
        for _ in 0..combos {
            let mut y = PureAssignment::zeros(p.agent_count(), p.object_count());
            for (o, &d) in digits.iter().enumerate() {
                for (a, &v) in column_lists[o][d].iter().enumerate() {
                    y.set(a, o, v);
                }
            }
            if !member_set.contains(&y) {
                combination_witness = Some(y);
                break;
            }
            for (o, d) in digits.iter_mut().enumerate().rev() {
                *d += 1;
                if *d < column_lists[o].len() {
                    break;
                }
                *d = 0;
            }
        }

        Ok(PerObjectReport {
            columns_downward_closed: column_witness.is_none(),
            columns_combine_freely: combination_witness.is_none(),
            column_witness,
            combination_witness,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpperBoundsReport {
    pub holds: bool,
    /// Decided from the representation without enumeration.
    pub structural: bool,
    /// A feasible assignment and a componentwise-smaller infeasible one.
    pub witness: Option<(PureAssignment, PureAssignment)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerObjectReport {
    pub columns_downward_closed: bool,
    pub columns_combine_freely: bool,
    /// `(object, feasible column, missing smaller column)`.
    pub column_witness: Option<(usize, Vec<u32>, Vec<u32>)>,
    /// An assignment built from feasible columns that is itself infeasible.
    pub combination_witness: Option<PureAssignment>,
}

impl PerObjectReport {
    pub fn holds(&self) -> bool {
        self.columns_downward_closed && self.columns_combine_freely
    }
}

struct Search<'a> {
    set: &'a FeasibleSet,
    rows: &'a [&'a Bundle],
    budget: EnumerationBudget,
    tested: usize,
    out: Vec<PureAssignment>,
}

impl Search<'_> {
    fn descend(&mut self, y: &mut PureAssignment, agent: usize) -> Result<()> {
        let agents = y.agents;
        for row in self.rows {
            self.tested += 1;
            if self.tested > self.budget.max_tested {
                return Err(Error::EnumerationBudgetExceeded(self.budget.max_tested));
            }
            y.set_row(agent, &row.0);
            // every representation reaching here is downward closed or
            // capacity-based, so a failing prefix cannot be completed
            if self.set.admits_partial(y, agents - agent - 1)? {
                if agent + 1 == agents {
                    if self.set.is_feasible(y)? {
                        if self.out.len() == self.budget.max_retained {
                            return Err(Error::EnumerationBudgetExceeded(self.budget.max_retained));
                        }
                        self.out.push(y.clone());
                    }
                } else {
                    self.descend(y, agent + 1)?;
                }
            }
        }
        y.set_row(agent, &vec![0; y.objects]);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{EqualsPartition, PreferenceOrder};

    fn m(rows: &[&[u32]]) -> PureAssignment {
        PureAssignment::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn problem_over(agents: usize, objects: usize, universe: Vec<Bundle>, feasible: FeasibleSet) -> Problem {
        let n = universe.len();
        Problem::new(
            (0..agents).map(|i| format!("a{}", i + 1)).collect(),
            (0..objects).map(|i| format!("o{}", i + 1)).collect(),
            universe,
            (0..agents)
                .map(|_| PreferenceOrder::new((0..n).collect(), n).unwrap())
                .collect(),
            EqualsPartition::singletons(agents),
            feasible,
        )
        .unwrap()
    }

    fn regional_cap() -> LinearCaps {
        let cap = Cap::from_fn(2, 2, rational::int(1), |_, _| Weight::int(1)).unwrap();
        LinearCaps::new(2, 2, vec![cap], false, None).unwrap()
    }

    #[test]
    fn regional_cap_admits_y_and_y_prime_only() {
        let f = FeasibleSet::LinearCaps(regional_cap());
        assert!(f.is_feasible(&m(&[&[1, 0], &[0, 0]])).unwrap());
        assert!(f.is_feasible(&m(&[&[0, 0], &[0, 1]])).unwrap());
        assert!(!f.is_feasible(&m(&[&[1, 0], &[0, 1]])).unwrap());
    }

    #[test]
    fn zero_matrix_is_feasible_under_caps() {
        let f = FeasibleSet::LinearCaps(regional_cap());
        assert!(f.is_feasible(&PureAssignment::zeros(2, 2)).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let f = FeasibleSet::LinearCaps(regional_cap());
        assert!(matches!(
            f.is_feasible(&PureAssignment::zeros(3, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn scholarship(agents: usize) -> FeasibleSet {
        let seats = Cap::from_fn(agents, 3, rational::int(200), |_, _| Weight::int(1)).unwrap();
        let budget = Cap::from_fn(agents, 3, rational::int(100_000), |_, o| match o {
            0 => Weight::int(4000),
            1 => Weight::int(2000),
            _ => Weight::int(0),
        })
        .unwrap();
        FeasibleSet::LinearCaps(LinearCaps::new(agents, 3, vec![seats, budget], true, None).unwrap())
    }

    #[test]
    fn scholarship_budget_binds_at_twenty_five() {
        for (n, expected) in [(25, true), (26, false)] {
            let f = scholarship(n);
            let mut y = PureAssignment::zeros(n, 3);
            for a in 0..n {
                y.set(a, 0, 1);
            }
            assert_eq!(f.is_feasible(&y).unwrap(), expected, "{n} agents on o1");
        }
        // 20 on o1 and 10 on o2: 80,000 + 20,000
        let f = scholarship(40);
        let mut y = PureAssignment::zeros(40, 3);
        for a in 0..20 {
            y.set(a, 0, 1);
        }
        for a in 20..30 {
            y.set(a, 1, 1);
        }
        for a in 30..40 {
            y.set(a, 2, 1);
        }
        assert!(f.is_feasible(&y).unwrap());
        y.set(30, 2, 0);
        y.set(30, 1, 1);
        assert!(!f.is_feasible(&y).unwrap());
    }

    #[test]
    fn reserved_slot_rejects_ineligible_cells() {
        // agents 0 and 1 are in the reserved category for object 0
        let reserved = Cap::from_fn(3, 2, rational::int(30), |a, o| {
            if o == 0 && a == 2 {
                Weight::Ineligible
            } else if o == 0 {
                Weight::int(1)
            } else {
                Weight::int(0)
            }
        })
        .unwrap();
        let open = Cap::from_fn(3, 2, rational::int(101), |_, o| Weight::int((o == 1) as i64)).unwrap();
        let f = FeasibleSet::LinearCaps(LinearCaps::new(3, 2, vec![reserved, open], true, None).unwrap());
        assert!(f.is_feasible(&m(&[&[1, 0], &[1, 0], &[0, 1]])).unwrap());
        assert!(!f.is_feasible(&m(&[&[1, 0], &[0, 1], &[1, 0]])).unwrap());
    }

    fn unit_universe(objects: usize, with_zero: bool) -> Vec<Bundle> {
        let mut u: Vec<Bundle> = (0..objects).map(|o| Bundle::unit(objects, o)).collect();
        if with_zero {
            u.push(Bundle::zero(objects));
        }
        u
    }

    #[test]
    fn unit_demand_three_by_three_enumerates_permutations() {
        let f = FeasibleSet::UnitDemandSimpleCapacity(SimpleCapacity::new(vec![1, 1, 1]).unwrap());
        let p = problem_over(3, 3, unit_universe(3, false), f.clone());
        let all = f.enumerate(&p, EnumerationBudget::default()).unwrap();
        // oracle: all 3! injective maps
        let mut expected = Vec::new();
        for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let mut y = PureAssignment::zeros(3, 3);
            for (a, &o) in perm.iter().enumerate() {
                y.set(a, o, 1);
            }
            expected.push(y);
        }
        expected.sort();
        assert_eq!(all, expected);
    }

    #[test]
    fn enumeration_respects_budget() {
        let f = FeasibleSet::UnitDemandSimpleCapacity(SimpleCapacity::new(vec![1, 1, 1]).unwrap());
        let p = problem_over(3, 3, unit_universe(3, false), f.clone());
        let tight = EnumerationBudget {
            max_tested: 5,
            max_retained: 100,
        };
        assert_eq!(f.enumerate(&p, tight), Err(Error::EnumerationBudgetExceeded(5)));
        let few = EnumerationBudget {
            max_tested: 1000,
            max_retained: 2,
        };
        assert_eq!(f.enumerate(&p, few), Err(Error::EnumerationBudgetExceeded(2)));
    }

    #[test]
    fn explicit_enumeration_is_verbatim() {
        let members = vec![m(&[&[1, 0]]), m(&[&[0, 1]])];
        let f = FeasibleSet::Explicit(ExplicitSet::new(members.clone()).unwrap());
        let p = problem_over(1, 2, unit_universe(2, false), f.clone());
        let mut expected = members;
        expected.sort();
        assert_eq!(f.enumerate(&p, EnumerationBudget::default()).unwrap(), expected);
    }

    #[test]
    fn caps_are_structurally_downward_closed() {
        let f = FeasibleSet::LinearCaps(regional_cap());
        let p = problem_over(2, 2, unit_universe(2, true), f.clone());
        let r = f.check_general_upper_bounds(&p, EnumerationBudget::default()).unwrap();
        assert!(r.holds && r.structural);
    }

    #[test]
    fn strict_unit_demand_is_not_downward_closed() {
        let f = FeasibleSet::UnitDemandSimpleCapacity(SimpleCapacity::new(vec![1, 1]).unwrap());
        let p = problem_over(2, 2, unit_universe(2, true), f.clone());
        let r = f.check_general_upper_bounds(&p, EnumerationBudget::default()).unwrap();
        assert!(!r.holds);
        let (y, lower) = r.witness.unwrap();
        assert!(f.is_feasible(&y).unwrap() && !f.is_feasible(&lower).unwrap());
    }

    #[test]
    fn example4_joint_bounds_hold_but_columns_do_not_combine() {
        let y = m(&[&[1, 0], &[0, 0]]);
        let y1 = m(&[&[0, 0], &[0, 1]]);
        let zero = PureAssignment::zeros(2, 2);
        let f = FeasibleSet::Explicit(ExplicitSet::new(vec![y, y1, zero]).unwrap());
        let p = problem_over(2, 2, unit_universe(2, true), f.clone());
        let joint = f.check_general_upper_bounds(&p, EnumerationBudget::default()).unwrap();
        assert!(joint.holds);
        let per = f
            .check_per_object_upper_bounds(&p, EnumerationBudget::default())
            .unwrap();
        assert!(per.columns_downward_closed);
        assert!(!per.columns_combine_freely);
        assert_eq!(per.combination_witness, Some(m(&[&[1, 0], &[0, 1]])));
        assert!(!per.holds());
    }

    #[test]
    fn downward_closed_product_passes_per_object() {
        let members: Vec<_> = [[0, 0], [1, 0], [0, 1], [1, 1]].iter().map(|r| m(&[&r[..]])).collect();
        let f = FeasibleSet::Explicit(ExplicitSet::new(members).unwrap());
        let universe = vec![
            Bundle(vec![0, 0]),
            Bundle(vec![1, 0]),
            Bundle(vec![0, 1]),
            Bundle(vec![1, 1]),
        ];
        let p = problem_over(1, 2, universe, f.clone());
        let per = f
            .check_per_object_upper_bounds(&p, EnumerationBudget::default())
            .unwrap();
        assert!(per.holds());
    }

    fn null_object_caps(agents: usize) -> LinearCaps {
        // objects: o0 (null), o1, o2 (region), o3
        LinearCaps::new(agents, 4, vec![], true, Some(0)).unwrap()
    }

    #[test]
    fn min_quota_cap_matches_displayed_inequality() {
        let caps = null_object_caps(4).transform_min_quota(&[1, 2], 2).unwrap();
        let added = caps.caps().last().unwrap();
        assert_eq!(added.bound(), &rational::int(2));
        for a in 0..4 {
            assert_eq!(added.weight(a, 0), &Weight::int(1));
            assert_eq!(added.weight(a, 1), &Weight::int(0));
            assert_eq!(added.weight(a, 2), &Weight::int(0));
            assert_eq!(added.weight(a, 3), &Weight::int(1));
        }
        let vacuous = null_object_caps(4).transform_min_quota(&[1, 2], 0).unwrap();
        assert_eq!(vacuous.caps().last().unwrap().bound(), &rational::int(4));
        let tight = null_object_caps(4).transform_min_quota(&[1, 2], 4).unwrap();
        assert_eq!(tight.caps().last().unwrap().bound(), &rational::int(0));
    }

    #[test]
    fn min_quota_requires_unit_demand_and_null_object() {
        let no_null = LinearCaps::new(2, 3, vec![], true, None).unwrap();
        assert!(no_null.transform_min_quota(&[1], 1).is_err());
        let no_unit = LinearCaps::new(2, 3, vec![], false, Some(0)).unwrap();
        assert!(no_unit.transform_min_quota(&[1], 1).is_err());
        assert!(null_object_caps(2).transform_min_quota(&[0, 1], 1).is_err());
        assert!(null_object_caps(2).transform_min_quota(&[1], 3).is_err());
    }

    #[test]
    fn min_quota_equivalence_on_full_assignments() {
        // exhaustive over all full unit-demand assignments of 4 agents to 4 objects
        for n in 0..=4usize {
            let caps = null_object_caps(4).transform_min_quota(&[1, 2], n).unwrap();
            let added = caps.caps().last().unwrap().clone();
            for code in 0..4usize.pow(4) {
                let mut y = PureAssignment::zeros(4, 4);
                let mut c = code;
                for a in 0..4 {
                    y.set(a, c % 4, 1);
                    c /= 4;
                }
                let in_region: usize = (0..4).filter(|&a| y.get(a, 1) == 1 || y.get(a, 2) == 1).count();
                assert_eq!(in_region >= n, added.satisfied_by(&y), "n={n} y={y}");
            }
        }
    }

    #[test]
    fn example5_set_is_downward_closed_and_per_object() {
        let members: Vec<_> = (0u32..64)
            .map(|bits| {
                let col: Vec<u32> = (0..6).map(|a| (bits >> a) & 1).collect();
                col
            })
            .filter(|col| {
                let total: u32 = col.iter().sum();
                total <= 2 || col[..3].iter().all(|&v| v == 0) || col[3..].iter().all(|&v| v == 0)
            })
            .map(|col| PureAssignment::from_rows(col.into_iter().map(|v| vec![v]).collect()).unwrap())
            .collect();
        // at most two copies, plus all of one group
        assert_eq!(members.len(), 1 + 6 + 15 + 2);
        let f = FeasibleSet::Explicit(ExplicitSet::new(members).unwrap());
        let p = problem_over(6, 1, vec![Bundle(vec![1]), Bundle(vec![0])], f.clone());
        assert!(
            f.check_general_upper_bounds(&p, EnumerationBudget::default())
                .unwrap()
                .holds
        );
        assert!(f
            .check_per_object_upper_bounds(&p, EnumerationBudget::default())
            .unwrap()
            .holds());
    }
}
