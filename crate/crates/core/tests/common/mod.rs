//! Random instance generators and brute-force oracles shared by the
//! integration tests. Nothing here calls the library's own derived-set,
//! efficiency or LP code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use ete_assign::feasibility::{ExplicitSet, FeasibleSet, PureAssignment, SimpleCapacity};
use ete_assign::{Bundle, EqualsPartition, Lottery, PreferenceOrder, Problem, Rational};
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_Y: usize = 400;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> EqualsPartition {
    let k = rng.gen_range(1..=n);
    let mut agents: Vec<usize> = (0..n).collect();
    agents.shuffle(rng);
    let mut groups = vec![Vec::new(); k];
    for (i, &a) in agents.iter().enumerate() {
        let g = if i < k { i } else { rng.gen_range(0..k) };
        groups[g].push(a);
    }
    EqualsPartition::new(groups, n).unwrap()
}

/// One random order per group, shared by its members.
pub fn group_preferences(rng: &mut ChaCha8Rng, partition: &EqualsPartition, universe: usize) -> Vec<PreferenceOrder> {
    let mut prefs = vec![None; partition.agents()];
    for g in partition.groups() {
        let mut ranking: Vec<usize> = (0..universe).collect();
        ranking.shuffle(rng);
        for &a in g {
            prefs[a] = Some(PreferenceOrder::new(ranking.clone(), universe).unwrap());
        }
    }
    prefs.into_iter().map(Option::unwrap).collect()
}

pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Every agent permutation that maps each group onto itself.
pub fn group_permutations(partition: &EqualsPartition) -> Vec<Vec<usize>> {
    let n = partition.agents();
    let mut perms = vec![(0..n).collect::<Vec<_>>()];
    for g in partition.groups() {
        let local = permutations(g);
        let mut next = Vec::with_capacity(perms.len() * local.len());
        for p in &perms {
            for l in &local {
                let mut q = p.clone();
                for (i, &a) in g.iter().enumerate() {
                    q[a] = l[i];
                }
                next.push(q);
            }
        }
        perms = next;
    }
    perms
}

/// Row `a` of the result is row `perm[a]` of `y`.
pub fn apply(y: &PureAssignment, perm: &[usize]) -> PureAssignment {
    let mut z = y.clone();
    for (a, &src) in perm.iter().enumerate() {
        z.set_row(a, y.row(src));
    }
    z
}

pub fn orbit(y: &PureAssignment, partition: &EqualsPartition) -> BTreeSet<PureAssignment> {
    group_permutations(partition)
        .iter()
        .map(|perm| apply(y, perm))
        .collect()
}

fn random_row(rng: &mut ChaCha8Rng, universe: &[Bundle]) -> Vec<u32> {
    universe.choose(rng).unwrap().counts().to_vec()
}

fn random_assignment(rng: &mut ChaCha8Rng, n: usize, universe: &[Bundle]) -> PureAssignment {
    PureAssignment::from_rows((0..n).map(|_| random_row(rng, universe)).collect()).unwrap()
}

pub struct Instance {
    pub problem: Problem,
    pub ys: Vec<PureAssignment>,
}

fn explicit_problem(
    universe: Vec<Bundle>,
    prefs: Vec<PreferenceOrder>,
    partition: EqualsPartition,
    ys: Vec<PureAssignment>,
) -> Instance {
    let n = partition.agents();
    let m = universe[0].counts().len();
    let problem = Problem::new(
        labels("a", n),
        labels("o", m),
        universe,
        prefs,
        partition,
        FeasibleSet::Explicit(ExplicitSet::new(ys.iter().cloned()).unwrap()),
    )
    .unwrap();
    Instance { problem, ys }
}

/// Up to 6 agents and 4 objects; `Y` is a union of orbits of a few random
/// assignments under swaps of equals, with at most [`MAX_Y`] members.
pub fn general_instance(rng: &mut ChaCha8Rng) -> Instance {
    loop {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=4);
        let target = rng.gen_range(2..=5).min(3usize.pow(m as u32));
        let mut universe = BTreeSet::from([Bundle::zero(m)]);
        while universe.len() < target {
            let counts = (0..m)
                .map(|_| if rng.gen_bool(0.8) { rng.gen_range(0..=1) } else { 2 })
                .collect();
            universe.insert(Bundle(counts));
        }
        let mut universe: Vec<Bundle> = universe.into_iter().collect();
        universe.shuffle(rng);
        let partition = random_partition(rng, n);
        let prefs = group_preferences(rng, &partition, universe.len());
        let mut ys = BTreeSet::new();
        for _ in 0..rng.gen_range(1..=3) {
            ys.extend(orbit(&random_assignment(rng, n, &universe), &partition));
        }
        if ys.len() > MAX_Y {
            continue;
        }
        return explicit_problem(universe, prefs, partition, ys.into_iter().collect());
    }
}

/// Up to 4 agents and 3 objects; bundles hold at most two objects, one copy
/// each, and `Y` is every assignment within random column capacities and
/// one random per-group budget. Downward closed and swap closed.
pub fn downward_instance(rng: &mut ChaCha8Rng) -> Instance {
    loop {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=3);
        let mut universe = Vec::new();
        for mask in 0u32..(1 << m) {
            if mask.count_ones() <= 2 {
                universe.push(Bundle((0..m).map(|o| (mask >> o) & 1).collect()));
            }
        }
        universe.shuffle(rng);
        let partition = random_partition(rng, n);
        let prefs = group_preferences(rng, &partition, universe.len());
        let q: Vec<u32> = (0..m).map(|_| rng.gen_range(1..=2)).collect();
        let budget_group = rng.gen_range(0..partition.groups().len());
        let group_budget = rng.gen_range(1..=3u32);
        let members = partition.group(budget_group).to_vec();
        let mut ys = Vec::new();
        let mut idx = vec![0usize; n];
        'outer: loop {
            let rows: Vec<Vec<u32>> = idx.iter().map(|&i| universe[i].counts().to_vec()).collect();
            let y = PureAssignment::from_rows(rows).unwrap();
            let columns_ok = (0..m).all(|o| y.column(o).iter().sum::<u32>() <= q[o]);
            let group_ok = members.iter().map(|&a| y.row(a).iter().sum::<u32>()).sum::<u32>() <= group_budget;
            if columns_ok && group_ok {
                ys.push(y);
            }
            for d in idx.iter_mut() {
                *d += 1;
                if *d < universe.len() {
                    continue 'outer;
                }
                *d = 0;
            }
            break;
        }
        if ys.len() > MAX_Y {
            continue;
        }
        return explicit_problem(universe, prefs, partition, ys);
    }
}

/// Unit demand with simple capacities: at most `max_agents` agents and total
/// capacity at most `max_capacity` (at least the agent count).
pub fn udsc_instance(rng: &mut ChaCha8Rng, max_agents: usize, max_capacity: u32) -> Problem {
    let n = rng.gen_range(1..=max_agents);
    let total = rng.gen_range(n as u32..=max_capacity.max(n as u32));
    let m = rng.gen_range(1..=3usize.min(total as usize));
    let mut q = vec![1u32; m];
    for _ in m as u32..total {
        q[rng.gen_range(0..m)] += 1;
    }
    let universe: Vec<Bundle> = (0..m).map(|o| Bundle::unit(m, o)).collect();
    let partition = if rng.gen_bool(0.3) {
        EqualsPartition::singletons(n)
    } else {
        random_partition(rng, n)
    };
    let prefs = group_preferences(rng, &partition, m);
    Problem::new(
        labels("a", n),
        labels("o", m),
        universe,
        prefs,
        partition,
        FeasibleSet::UnitDemandSimpleCapacity(SimpleCapacity::new(q).unwrap()),
    )
    .unwrap()
}

/// A lottery on at most `max_support` distinct members with random integer
/// weights.
pub fn random_lottery(rng: &mut ChaCha8Rng, members: &[PureAssignment], p: &Problem, max_support: usize) -> Lottery {
    let k = rng.gen_range(1..=max_support.min(members.len()));
    let chosen: Vec<&PureAssignment> = members.choose_multiple(rng, k).collect();
    let weights: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=6)).collect();
    let total: i64 = weights.iter().sum();
    Lottery::new(
        chosen.into_iter().cloned().zip(weights.iter().map(|&w| frac(w, total))),
        p,
    )
    .unwrap()
}

pub fn bundle_of(p: &Problem, y: &PureAssignment, a: usize) -> usize {
    p.universe()
        .iter()
        .position(|b| b.counts() == y.row(a))
        .expect("row in universe")
}

/// Position of `bundle` in `a`'s order, 0 for the favourite.
pub fn rank_of(p: &Problem, a: usize, bundle: usize) -> usize {
    p.preference(a).ranking().iter().position(|&b| b == bundle).unwrap()
}

pub fn total_rank(p: &Problem, y: &PureAssignment) -> usize {
    (0..p.agent_count()).map(|a| rank_of(p, a, bundle_of(p, y, a))).sum()
}

pub fn oracle_marginal(sigma: &Lottery, p: &Problem, a: usize) -> Vec<Rational> {
    let mut dist = vec![Rational::zero(); p.universe().len()];
    for (y, pr) in sigma.support() {
        dist[bundle_of(p, y, a)] += pr;
    }
    dist
}

/// Average over every group-preserving permutation, built from scratch.
pub fn oracle_full_reassign(sigma: &Lottery, p: &Problem) -> BTreeMap<PureAssignment, Rational> {
    let perms = group_permutations(p.partition());
    let l = Rational::from_integer((perms.len() as i64).into());
    let mut out: BTreeMap<PureAssignment, Rational> = BTreeMap::new();
    for (y, pr) in sigma.support() {
        for perm in &perms {
            *out.entry(apply(y, perm)).or_insert_with(Rational::zero) += pr / &l;
        }
    }
    out
}

/// Group average of `sigma`'s marginals at `a`.
pub fn oracle_group_average(sigma: &Lottery, p: &Problem, a: usize) -> Vec<Rational> {
    let group = p.partition().group(p.partition().group_of(a));
    let mut acc = vec![Rational::zero(); p.universe().len()];
    for &b in group {
        for (x, v) in acc.iter_mut().zip(oracle_marginal(sigma, p, b)) {
            *x += v;
        }
    }
    let size = Rational::from_integer((group.len() as i64).into());
    acc.into_iter().map(|x| x / &size).collect()
}

pub fn oracle_pareto_dominated(y: &PureAssignment, ys: &[PureAssignment], p: &Problem) -> bool {
    let n = p.agent_count();
    let ranks = |z: &PureAssignment| (0..n).map(|a| rank_of(p, a, bundle_of(p, z, a))).collect::<Vec<_>>();
    let mine = ranks(y);
    ys.iter().any(|z| {
        let theirs = ranks(z);
        theirs.iter().zip(&mine).all(|(t, m)| t <= m) && theirs != mine
    })
}

pub fn oracle_is_ee(sigma: &Lottery, ys: &[PureAssignment], p: &Problem) -> bool {
    sigma.members().all(|y| !oracle_pareto_dominated(y, ys, p))
}

pub fn oracle_min_rank(ys: &[PureAssignment], p: &Problem) -> usize {
    ys.iter().map(|y| total_rank(p, y)).min().unwrap()
}

pub fn oracle_rank_value(sigma: &Lottery, p: &Problem) -> Rational {
    sigma
        .support()
        .map(|(y, pr)| pr * Rational::from_integer((total_rank(p, y) as i64).into()))
        .fold(Rational::zero(), |acc, v| acc + v)
}

pub fn oracle_is_re(sigma: &Lottery, ys: &[PureAssignment], p: &Problem) -> bool {
    oracle_rank_value(sigma, p) == Rational::from_integer((oracle_min_rank(ys, p) as i64).into())
}

/// `(a, i)` cut: probability that `a` gets one of its `i + 1` best bundles.
fn cut_members(p: &Problem, ys: &[PureAssignment], a: usize, i: usize) -> Vec<bool> {
    ys.iter().map(|y| rank_of(p, a, bundle_of(p, y, a)) <= i).collect()
}

/// Ordinal efficiency by floating-point LPs, one per cut: `sigma` is
/// dominated iff some lottery over `ys` matches every cut of `sigma` and
/// beats it on one.
pub fn oracle_is_oe(sigma: &Lottery, ys: &[PureAssignment], p: &Problem) -> bool {
    let u = p.universe().len();
    let mut cuts = Vec::new();
    for a in 0..p.agent_count() {
        for i in 0..u.saturating_sub(1) {
            let inside = cut_members(p, ys, a, i);
            let level: f64 = sigma
                .support()
                .filter(|(y, _)| rank_of(p, a, bundle_of(p, y, a)) <= i)
                .map(|(_, pr)| pr.to_f64().unwrap())
                .sum();
            cuts.push((inside, level));
        }
    }
    let mut rows: Vec<(Vec<f64>, Cmp, f64)> = cuts
        .iter()
        .map(|(inside, level)| {
            let coefs = inside.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
            (coefs, Cmp::Ge, level - 1e-9)
        })
        .collect();
    rows.push((vec![1.0; ys.len()], Cmp::Eq, 1.0));
    for (inside, level) in &cuts {
        let objective: Vec<f64> = inside.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        match float_maximize(&objective, &rows) {
            FloatLp::Optimal(v) if v > level + 1e-7 => return false,
            FloatLp::Optimal(_) => {}
            other => panic!("cut LP ended {other:?}"),
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FloatLp {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

const EPS: f64 = 1e-9;

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && row[c].abs() > EPS {
                let f = row[c];
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Bland's rule on the columns marked `allowed`; `false` when unbounded.
    fn optimize(&mut self, objective: &[f64], allowed: &[bool]) -> bool {
        let rhs = objective.len();
        loop {
            let reduced = |j: usize| {
                objective[j]
                    - self
                        .basis
                        .iter()
                        .zip(&self.rows)
                        .map(|(&b, row)| objective[b] * row[j])
                        .sum::<f64>()
            };
            let Some(c) = (0..rhs).find(|&j| allowed[j] && !self.basis.contains(&j) && reduced(j) > EPS) else {
                return true;
            };
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c] > EPS {
                    let ratio = row[rhs] / row[c];
                    let better = match best {
                        None => true,
                        Some((bi, br)) => ratio < br - EPS || (ratio < br + EPS && self.basis[i] < self.basis[bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    fn value(&self, objective: &[f64]) -> f64 {
        let rhs = objective.len();
        self.basis
            .iter()
            .zip(&self.rows)
            .map(|(&b, row)| objective[b] * row[rhs])
            .sum()
    }
}

/// Dense two-phase simplex over `x >= 0` in floating point.
pub fn float_maximize(c: &[f64], constraints: &[(Vec<f64>, Cmp, f64)]) -> FloatLp {
    let n = c.len();
    let m = constraints.len();
    let norm: Vec<(Vec<f64>, Cmp, f64)> = constraints
        .iter()
        .map(|(a, cmp, b)| {
            if *b < 0.0 {
                let flipped = match cmp {
                    Cmp::Le => Cmp::Ge,
                    Cmp::Ge => Cmp::Le,
                    Cmp::Eq => Cmp::Eq,
                };
                (a.iter().map(|v| -v).collect(), flipped, -b)
            } else {
                (a.clone(), *cmp, *b)
            }
        })
        .collect();
    let slacks = norm.iter().filter(|r| r.1 != Cmp::Eq).count();
    let artificials = norm.iter().filter(|r| r.1 != Cmp::Le).count();
    let width = n + slacks + artificials;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut s, mut t) = (n, n + slacks);
    for (a, cmp, b) in &norm {
        let mut row = vec![0.0; width + 1];
        row[..n].copy_from_slice(a);
        row[width] = *b;
        match cmp {
            Cmp::Le => {
                row[s] = 1.0;
                basis.push(s);
                s += 1;
            }
            Cmp::Ge => {
                row[s] = -1.0;
                s += 1;
                row[t] = 1.0;
                basis.push(t);
                t += 1;
            }
            Cmp::Eq => {
                row[t] = 1.0;
                basis.push(t);
                t += 1;
            }
        }
        rows.push(row);
    }
    let mut tab = Tableau { rows, basis };
    let is_artificial = |j: usize| j >= n + slacks && j < width;
    let phase1: Vec<f64> = (0..width).map(|j| if is_artificial(j) { -1.0 } else { 0.0 }).collect();
    tab.optimize(&phase1, &vec![true; width]);
    if tab.value(&phase1) < -1e-7 {
        return FloatLp::Infeasible;
    }
    let mut r = 0;
    while r < tab.rows.len() {
        if is_artificial(tab.basis[r]) {
            match (0..n + slacks).find(|&j| tab.rows[r][j].abs() > 1e-7) {
                Some(j) => tab.pivot(r, j),
                None => {
                    tab.rows.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    let mut phase2 = vec![0.0; width];
    phase2[..n].copy_from_slice(c);
    let allowed: Vec<bool> = (0..width).map(|j| !is_artificial(j)).collect();
    if !tab.optimize(&phase2, &allowed) {
        return FloatLp::Unbounded;
    }
    FloatLp::Optimal(tab.value(&phase2))
}
