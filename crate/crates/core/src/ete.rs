//! Equal treatment of equals: derived assignment sets, the ETE reassignment
//! of a lottery, and checks on the result.
//!
//! The reassignment mixes every support member uniformly over the
//! assignments obtained from it by equals-respecting bijections. Two
//! families of bijections are available: independent cyclic shifts inside
//! each group (`|A_1| x ... x |A_N|` of them) and all within-group
//! permutations (`|A_1|! x ... x |A_N|!`). Both give the same marginals;
//! every agent's marginal becomes the average of its group's marginals.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::feasibility::{EnumerationBudget, PureAssignment};
use crate::lottery::{fosd_under, marginal, marginals, Dominance, Lottery};
use crate::problem::{audit_assumption1, audit_assumption2, AgentId, Assumption2Report, EqualsPartition, Problem};
use crate::rational::Rational;

/// Which equals-respecting bijections generate a derived set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum GeneratorMode {
    /// Independent cyclic rotations inside each group.
    #[default]
    Cyclic,
    /// Every permutation inside each group.
    Full,
}

/// Assignments derived from `base`, each with the number of bijections that
/// produce it. Multiplicities sum to `bijections`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedSet {
    pub base: PureAssignment,
    pub mode: GeneratorMode,
    pub members: Vec<(PureAssignment, u128)>,
    pub bijections: u128,
}

impl DerivedSet {
    pub fn contains(&self, y: &PureAssignment) -> bool {
        self.members.iter().any(|(m, _)| m == y)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

// One group's row arrangements: (target row for each member slot, multiplicity).
type Arrangements = Vec<(Vec<usize>, u128)>;

fn cyclic_arrangements(group: &[usize]) -> Arrangements {
    let k = group.len();
    (0..k)
        .map(|shift| ((0..k).map(|i| group[(i + shift) % k]).collect(), 1))
        .collect()
}

/// Distinct rearrangements of the group's rows. Members with identical rows
/// are interchangeable, so each distinct outcome stands for
/// `prod(m_i!)` permutations, where `m_i` counts each repeated row.
fn full_arrangements(group: &[usize], y: &PureAssignment) -> Arrangements {
    // source agent for each destination slot, starting sorted by row content
    let mut sources: Vec<usize> = group.to_vec();
    sources.sort_by(|&a, &b| y.row(a).cmp(y.row(b)).then(a.cmp(&b)));
    let mut classes: Vec<u128> = Vec::new();
    let mut run = 1u128;
    for w in sources.windows(2) {
        if y.row(w[0]) == y.row(w[1]) {
            run += 1;
        } else {
            classes.push(run);
            run = 1;
        }
    }
    classes.push(run);
    let weight: u128 = classes.iter().map(|&m| factorial(m)).product();

    // iterate distinct permutations of the row multiset, tracking which
    // source agent feeds which destination slot
    let mut out = Vec::new();
    let mut perm = sources.clone();
    loop {
        // group[i] receives the row of perm[i]; express as target of each source
        let mut target = vec![0usize; group.len()];
        for (slot, &src) in perm.iter().enumerate() {
            let idx = group.iter().position(|&g| g == src).expect("member of group");
            target[idx] = group[slot];
        }
        out.push((target, weight));
        if !next_row_permutation(&mut perm, y) {
            break;
        }
    }
    out
}

fn factorial(n: u128) -> u128 {
    (1..=n).product()
}

// Lexicographic next permutation by row content; equal rows never swap, so
// each distinct arrangement appears once.
fn next_row_permutation(perm: &mut [usize], y: &PureAssignment) -> bool {
    let less = |a: usize, b: usize| y.row(a) < y.row(b);
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && !less(perm[i - 1], perm[i]) {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while !less(perm[i - 1], perm[j]) {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// `Y_D(y)`: the assignments derived from `y` by moving rows between equals.
pub fn derived_set(y: &PureAssignment, partition: &EqualsPartition, mode: GeneratorMode) -> DerivedSet {
    let per_group: Vec<(&[usize], Arrangements)> = partition
        .groups()
        .iter()
        .map(|g| {
            let arr = match mode {
                GeneratorMode::Cyclic => cyclic_arrangements(g),
                GeneratorMode::Full => full_arrangements(g, y),
            };
            (g.as_slice(), arr)
        })
        .collect();
    let bijections: u128 = partition
        .groups()
        .iter()
        .map(|g| match mode {
            GeneratorMode::Cyclic => g.len() as u128,
            GeneratorMode::Full => factorial(g.len() as u128),
        })
        .product();

    let mut merged: BTreeMap<PureAssignment, u128> = BTreeMap::new();
    let mut choice = vec![0usize; per_group.len()];
    let mut perm: Vec<usize> = (0..y.agents()).collect();
    loop {
        let mut weight = 1u128;
        for ((group, arr), &c) in per_group.iter().zip(&choice) {
            let (targets, w) = &arr[c];
            for (&src, &dst) in group.iter().zip(targets) {
                perm[src] = dst;
            }
            weight *= w;
        }
        *merged.entry(y.permute_rows(&perm)).or_insert(0) += weight;

        let mut g = per_group.len();
        loop {
            if g == 0 {
                let members: Vec<_> = merged.into_iter().collect();
                debug_assert_eq!(members.iter().map(|(_, m)| m).sum::<u128>(), bijections);
                return DerivedSet {
                    base: y.clone(),
                    mode,
                    members,
                    bijections,
                };
            }
            g -= 1;
            choice[g] += 1;
            if choice[g] < per_group[g].1.len() {
                break;
            }
            choice[g] = 0;
        }
    }
}

/// The ETE reassignment of `sigma` after auditing both standing assumptions.
pub fn ete_reassign(sigma: &Lottery, p: &Problem, mode: GeneratorMode, budget: EnumerationBudget) -> Result<Lottery> {
    let a1 = audit_assumption1(p);
    if let Some((n, a, b)) = a1.violation {
        return Err(Error::AssumptionViolated {
            number: 1,
            detail: format!(
                "{} and {} are in group {n} but rank bundles differently",
                p.agent_label(a.0),
                p.agent_label(b.0)
            ),
        });
    }
    if let Assumption2Report::Fail { assignment, a, b } = audit_assumption2(p, budget)? {
        return Err(Error::AssumptionViolated {
            number: 2,
            detail: format!(
                "swapping {} and {} in {assignment} leaves the feasible set",
                p.agent_label(a.0),
                p.agent_label(b.0)
            ),
        });
    }
    Ok(ete_reassign_unaudited(sigma, p.partition(), mode))
}

/// The ETE reassignment without the assumption audits. The output is only
/// guaranteed feasible when equals are interchangeable in the feasible set.
pub fn ete_reassign_unaudited(sigma: &Lottery, partition: &EqualsPartition, mode: GeneratorMode) -> Lottery {
    let mut out: BTreeMap<PureAssignment, Rational> = BTreeMap::new();
    for (y, prob) in sigma.support() {
        let derived = derived_set(y, partition, mode);
        let total = BigInt::from(derived.bijections);
        for (member, mult) in derived.members {
            let share = prob * Rational::new(BigInt::from(mult), total.clone());
            *out.entry(member).or_insert_with(Rational::zero) += share;
        }
    }
    Lottery::from_support(out)
}

/// Two equals whose marginals differ, and a bundle where they differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EteViolation {
    pub a: AgentId,
    pub b: AgentId,
    pub bundle: usize,
}

/// `None` when every group of equals shares one marginal.
pub fn check_ete(sigma: &Lottery, p: &Problem) -> Option<EteViolation> {
    let ms = marginals(sigma, p);
    for group in p.partition().groups() {
        let first = group[0];
        for &b in &group[1..] {
            if let Some(bundle) = (0..p.universe().len()).find(|&x| ms[first].probability(x) != ms[b].probability(x)) {
                return Some(EteViolation {
                    a: AgentId(first),
                    b: AgentId(b),
                    bundle,
                });
            }
        }
    }
    None
}

/// The probability that `agent` receives `bundle` after ETE reassignment,
/// computed as the group average of the original marginals.
pub fn lemma1_marginal(sigma: &Lottery, p: &Problem, agent: usize, bundle: usize) -> Rational {
    let group = p.partition().group(p.partition().group_of(agent));
    let sum = group
        .iter()
        .map(|&b| marginal(sigma, p, b).probability(bundle).clone())
        .fold(Rational::zero(), |acc, v| acc + v);
    sum / Rational::from_integer(BigInt::from(group.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreferentialTreatment {
    /// Every baseline marginal is weakly dominated by every advantaged one,
    /// strictly for at least one pair.
    pub hypothesis: bool,
    /// Every baseline marginal is strictly dominated by every advantaged one.
    pub conclusion: bool,
}

/// Compares group `advantaged` against group `baseline`, each pair under the
/// advantaged agent's order.
pub fn check_preferential_treatment(
    sigma: &Lottery,
    p: &Problem,
    advantaged: usize,
    baseline: usize,
) -> PreferentialTreatment {
    let ms = marginals(sigma, p);
    let mut all_weak = true;
    let mut some_strict = false;
    let mut all_strict = true;
    for &a in p.partition().group(advantaged) {
        for &b in p.partition().group(baseline) {
            let d = fosd_under(p.preference(a), &ms[b], &ms[a]);
            all_weak &= d.is_weakly_dominated();
            let strict = d == Dominance::DominatedStrict;
            some_strict |= strict;
            all_strict &= strict;
        }
    }
    PreferentialTreatment {
        hypothesis: all_weak && some_strict,
        conclusion: all_strict,
    }
}

/// Every derived assignment of every support member, for feasibility audits.
pub fn derived_members(sigma: &Lottery, partition: &EqualsPartition, mode: GeneratorMode) -> Vec<PureAssignment> {
    let mut out: Vec<PureAssignment> = sigma
        .members()
        .flat_map(|y| derived_set(y, partition, mode).members.into_iter().map(|(m, _)| m))
        .collect();
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[u32]]) -> PureAssignment {
        PureAssignment::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn identity(n: usize) -> PureAssignment {
        let mut y = PureAssignment::zeros(n, n);
        for i in 0..n {
            y.set(i, i, 1);
        }
        y
    }

    #[test]
    fn singleton_groups_derive_only_the_base() {
        let y = identity(3);
        for mode in [GeneratorMode::Cyclic, GeneratorMode::Full] {
            let d = derived_set(&y, &EqualsPartition::singletons(3), mode);
            assert_eq!(d.members, vec![(y.clone(), 1)]);
            assert_eq!(d.bijections, 1);
        }
    }

    #[test]
    fn one_group_of_four_counts() {
        let y = identity(4);
        let part = EqualsPartition::new(vec![vec![0, 1, 2, 3]], 4).unwrap();
        let full = derived_set(&y, &part, GeneratorMode::Full);
        assert_eq!(full.len(), 24);
        assert_eq!(full.bijections, 24);
        let cyc = derived_set(&y, &part, GeneratorMode::Cyclic);
        assert_eq!(cyc.len(), 4);
        assert_eq!(cyc.bijections, 4);
        assert!(full.contains(&y) && cyc.contains(&y));
    }

    #[test]
    fn repeated_rows_merge_with_multiplicity() {
        // rows (1,0),(1,0),(0,1) in one group of three
        let y = m(&[&[1, 0], &[1, 0], &[0, 1]]);
        let part = EqualsPartition::new(vec![vec![0, 1, 2]], 3).unwrap();
        let full = derived_set(&y, &part, GeneratorMode::Full);
        assert_eq!(full.len(), 3);
        assert!(full.members.iter().all(|(_, mult)| *mult == 2));
        let cyc = derived_set(&y, &part, GeneratorMode::Cyclic);
        assert_eq!(cyc.len(), 3);
        assert!(cyc.members.iter().all(|(_, mult)| *mult == 1));
    }

    #[test]
    fn full_mode_matches_brute_force_permutations() {
        // oracle: apply all 3! x 2! bijections directly
        let y = m(&[&[1, 0, 0], &[0, 1, 0], &[1, 0, 0], &[0, 0, 1], &[0, 0, 0]]);
        let part = EqualsPartition::new(vec![vec![0, 2, 4], vec![1, 3]], 5).unwrap();
        let mut expected: BTreeMap<PureAssignment, u128> = BTreeMap::new();
        let perms3 = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let g1 = [0, 2, 4];
        let g2 = [1, 3];
        for p3 in perms3 {
            for p2 in [[0, 1], [1, 0]] {
                let mut perm = vec![0; 5];
                for i in 0..3 {
                    perm[g1[i]] = g1[p3[i]];
                }
                for i in 0..2 {
                    perm[g2[i]] = g2[p2[i]];
                }
                *expected.entry(y.permute_rows(&perm)).or_insert(0) += 1;
            }
        }
        let d = derived_set(&y, &part, GeneratorMode::Full);
        assert_eq!(d.bijections, 12);
        assert_eq!(d.members, expected.into_iter().collect::<Vec<_>>());
    }
}
