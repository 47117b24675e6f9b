//! Exact two-phase simplex over rationals.
//!
//! Small dense tableaux only. Pivoting uses the largest reduced cost and
//! falls back to Bland's rule after a run of degenerate pivots, which
//! guarantees termination.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coefs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// Maximize `objective · x` subject to `constraints` and `x >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, solution: Vec<Rational> },
    Infeasible,
    Unbounded,
}

const DEGENERATE_RUN: usize = 32;

struct Tableau {
    rows: Vec<Vec<Rational>>,
    obj: Vec<Rational>,
    basis: Vec<usize>,
    // columns allowed to enter the basis
    active: Vec<bool>,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn width(&self) -> usize {
        self.obj.len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width();
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
        }
        let pivot_row = self.rows[r].clone();
        let nz: Vec<usize> = (0..=w).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &nz {
                row[j] -= &f * &pivot_row[j];
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for &j in &nz {
                self.obj[j] -= &f * &pivot_row[j];
            }
        }
        self.basis[r] = c;
    }

    fn run(&mut self) -> Phase {
        let w = self.width();
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter: Option<usize> = None;
            for j in 0..w {
                if !self.active[j] || !self.obj[j].is_negative() {
                    continue;
                }
                match enter {
                    None => enter = Some(j),
                    Some(e) if !bland && self.obj[j] < self.obj[e] => enter = Some(j),
                    _ => {}
                }
                if bland {
                    break;
                }
            }
            let Some(c) = enter else {
                return Phase::Optimal;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[w] / &row[c];
                let better = match &leave {
                    None => true,
                    Some((l, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else {
                return Phase::Unbounded;
            };
            if ratio.is_zero() {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
        }
    }

    fn set_objective(&mut self, costs: &[Rational]) {
        let w = self.width();
        self.obj = vec![Rational::zero(); w + 1];
        for (j, c) in costs.iter().enumerate() {
            self.obj[j] = -c.clone();
        }
        for (i, &b) in self.basis.iter().enumerate() {
            if self.obj[b].is_zero() {
                continue;
            }
            let f = self.obj[b].clone();
            for j in 0..=w {
                if !self.rows[i][j].is_zero() {
                    let d = &f * &self.rows[i][j];
                    self.obj[j] -= d;
                }
            }
        }
    }
}

pub fn maximize(lp: &LinearProgram) -> LpOutcome {
    let n = lp.vars;
    assert_eq!(lp.objective.len(), n, "objective length");
    let m = lp.constraints.len();

    // normalize to non-negative right-hand sides
    let mut norm: Vec<(Vec<Rational>, Relation, Rational)> = Vec::with_capacity(m);
    for c in &lp.constraints {
        assert_eq!(c.coefs.len(), n, "constraint length");
        if c.rhs.is_negative() {
            let flipped = match c.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
            norm.push((c.coefs.iter().map(|v| -v.clone()).collect(), flipped, -c.rhs.clone()));
        } else {
            norm.push((c.coefs.clone(), c.relation, c.rhs.clone()));
        }
    }

    let slacks = norm.iter().filter(|c| c.1 != Relation::Eq).count();
    let artificials = norm.iter().filter(|c| c.1 != Relation::Le).count();
    let w = n + slacks + artificials;
    let art_start = n + slacks;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut s, mut a) = (n, art_start);
    for (coefs, rel, rhs) in norm {
        let mut row = coefs;
        row.resize(w + 1, Rational::zero());
        row[w] = rhs;
        match rel {
            Relation::Le => {
                row[s] = Rational::one();
                basis.push(s);
                s += 1;
            }
            Relation::Ge => {
                row[s] = -Rational::one();
                row[a] = Rational::one();
                basis.push(a);
                s += 1;
                a += 1;
            }
            Relation::Eq => {
                row[a] = Rational::one();
                basis.push(a);
                a += 1;
            }
        }
        rows.push(row);
    }

    let mut t = Tableau {
        rows,
        obj: vec![Rational::zero(); w + 1],
        basis,
        active: vec![true; w],
    };

    if artificials > 0 {
        let mut phase1 = vec![Rational::zero(); w];
        for c in phase1.iter_mut().skip(art_start) {
            *c = -Rational::one();
        }
        t.set_objective(&phase1);
        match t.run() {
            Phase::Unbounded => unreachable!("phase one is bounded above by zero"),
            Phase::Optimal => {}
        }
        if t.obj[w].is_negative() {
            return LpOutcome::Infeasible;
        }
        // drive zero-level artificials out of the basis, dropping redundant rows
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art_start {
                match (0..art_start).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => {
                        t.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        for j in art_start..w {
            t.active[j] = false;
        }
    }

    let mut costs = lp.objective.clone();
    costs.resize(w, Rational::zero());
    t.set_objective(&costs);
    match t.run() {
        Phase::Unbounded => LpOutcome::Unbounded,
        Phase::Optimal => {
            let mut solution = vec![Rational::zero(); n];
            for (i, &b) in t.basis.iter().enumerate() {
                if b < n {
                    solution[b] = t.rows[i][w].clone();
                }
            }
            LpOutcome::Optimal {
                value: t.obj[w].clone(),
                solution,
            }
        }
    }
}
