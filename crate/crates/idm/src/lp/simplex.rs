//! Exact rational two-phase simplex with Bland's rule.
//!
//! Every variable is implicitly non-negative. The tableau is dense, which is
//! fine for the compacted instances this crate feeds it.

use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};

use crate::model::Money;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }

    fn holds(self, lhs: &Money, rhs: &Money) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Money)>,
    pub rel: Relation,
    pub rhs: Money,
}

/// Minimize `objective · x` subject to the constraints and `x >= 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearProgram {
    names: Vec<String>,
    constraints: Vec<Constraint>,
    objective: Vec<(usize, Money)>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, Money)>, rel: Relation, rhs: Money) {
        debug_assert!(coeffs.iter().all(|(j, _)| *j < self.names.len()));
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    pub fn set_objective(&mut self, objective: Vec<(usize, Money)>) {
        self.objective = objective;
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn var_name(&self, j: usize) -> &str {
        &self.names[j]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective_value(&self, x: &[Money]) -> Money {
        self.objective.iter().map(|(j, c)| c * &x[*j]).sum()
    }

    /// Index of the first violated constraint, or of a negative variable
    /// (reported as `constraints().len() + j`).
    pub fn first_violation(&self, x: &[Money]) -> Option<usize> {
        if x.len() != self.names.len() {
            return Some(usize::MAX);
        }
        for (i, c) in self.constraints.iter().enumerate() {
            let lhs: Money = c.coeffs.iter().map(|(j, a)| a * &x[*j]).sum();
            if !c.rel.holds(&lhs, &c.rhs) {
                return Some(i);
            }
        }
        x.iter()
            .position(|v| v.is_negative())
            .map(|j| self.constraints.len() + j)
    }

    /// Human-readable listing: objective, variables, then one row per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let term = |(j, c): &(usize, Money)| format!("{} {}", c, self.names[*j]);
        let obj: Vec<String> = self.objective.iter().map(term).collect();
        let _ = writeln!(out, "minimize {}", obj.join(" + "));
        let _ = writeln!(out, "vars {}", self.names.len());
        for (j, n) in self.names.iter().enumerate() {
            let _ = writeln!(out, "  x{j} {n} >= 0");
        }
        let _ = writeln!(out, "rows {}", self.constraints.len());
        for (i, c) in self.constraints.iter().enumerate() {
            let lhs: Vec<String> = c.coeffs.iter().map(term).collect();
            let _ = writeln!(out, "  r{i}: {} {} {}", lhs.join(" + "), c.rel.symbol(), c.rhs);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Values of the program's variables; empty unless optimal.
    pub assignment: Vec<Money>,
    pub objective: Money,
}

struct Tableau {
    rows: Vec<Vec<Money>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Money {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize, obj: &mut [Money]) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let nz: Vec<usize> = (0..=self.width).filter(|&j| !pivot_row[j].is_zero()).collect();
        let eliminate = |row: &mut [Money]| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nz {
                row[j] -= &f * &pivot_row[j];
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(obj);
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Bland's rule: lowest-index improving column enters, ties in the ratio
    /// test go to the lowest-index basic variable. Returns false when
    /// unbounded.
    fn optimize(&mut self, obj: &mut [Money], allowed: usize) -> bool {
        loop {
            let Some(enter) = (0..allowed).find(|&j| obj[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Money)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &leave {
                    None => true,
                    Some((k, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter, obj),
                None => return false,
            }
        }
    }
}

pub fn solve_lp(lp: &LinearProgram) -> LpSolution {
    let n = lp.num_vars();
    // Normalize to non-negative right-hand sides.
    let mut rows: Vec<(Vec<(usize, Money)>, Relation, Money)> = lp
        .constraints
        .iter()
        .map(|c| {
            if c.rhs.is_negative() {
                let rel = match c.rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                let coeffs = c.coeffs.iter().map(|(j, a)| (*j, -a)).collect();
                (coeffs, rel, -c.rhs.clone())
            } else {
                (c.coeffs.clone(), c.rel, c.rhs.clone())
            }
        })
        .collect();

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let first_art = n + n_slack;
    let width = first_art + n_art;

    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        width,
    };
    let (mut slack, mut art) = (n, first_art);
    for (coeffs, rel, rhs) in rows.drain(..) {
        let mut row = vec![Money::zero(); width + 1];
        for (j, a) in coeffs {
            row[j] += a;
        }
        row[width] = rhs;
        match rel {
            Relation::Le => {
                row[slack] = Money::one();
                tab.basis.push(slack);
                slack += 1;
            }
            Relation::Ge => {
                row[slack] = -Money::one();
                slack += 1;
                row[art] = Money::one();
                tab.basis.push(art);
                art += 1;
            }
            Relation::Eq => {
                row[art] = Money::one();
                tab.basis.push(art);
                art += 1;
            }
        }
        tab.rows.push(row);
    }

    // Phase 1: minimize the sum of artificials.
    let mut obj = vec![Money::zero(); width + 1];
    for j in first_art..width {
        obj[j] = Money::one();
    }
    for i in 0..m {
        if tab.basis[i] >= first_art {
            for j in 0..=width {
                let v = tab.rows[i][j].clone();
                obj[j] -= v;
            }
        }
    }
    tab.optimize(&mut obj, width);
    if !obj[width].is_zero() {
        return LpSolution {
            status: LpStatus::Infeasible,
            assignment: Vec::new(),
            objective: Money::zero(),
        };
    }
    // Drive zero-level artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= first_art {
            match (0..first_art).find(|&j| !tab.rows[i][j].is_zero()) {
                Some(j) => tab.pivot(i, j, &mut obj),
                None => {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // Phase 2 over the real and slack columns only.
    let mut obj = vec![Money::zero(); width + 1];
    for (j, c) in &lp.objective {
        obj[*j] += c;
    }
    for i in 0..tab.rows.len() {
        let b = tab.basis[i];
        if !obj[b].is_zero() {
            let f = obj[b].clone();
            for j in 0..=width {
                if !tab.rows[i][j].is_zero() {
                    obj[j] -= &f * &tab.rows[i][j];
                }
            }
        }
    }
    if !tab.optimize(&mut obj, first_art) {
        return LpSolution {
            status: LpStatus::Unbounded,
            assignment: Vec::new(),
            objective: Money::zero(),
        };
    }
    let mut x = vec![Money::zero(); n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs(i).clone();
        }
    }
    assert_eq!(
        lp.first_violation(&x),
        None,
        "simplex produced an assignment violating the program"
    );
    let objective = lp.objective_value(&x);
    LpSolution {
        status: LpStatus::Optimal,
        assignment: x,
        objective,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{money, ratio};
    use proptest::prelude::*;

    #[test]
    fn lower_bound() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x");
        lp.add_constraint(vec![(x, money(1))], Relation::Ge, money(3));
        lp.set_objective(vec![(x, money(1))]);
        let s = solve_lp(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.assignment, vec![money(3)]);
    }

    #[test]
    fn infeasible() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x");
        lp.add_constraint(vec![(x, money(1))], Relation::Le, money(-1));
        lp.add_constraint(vec![(x, money(1))], Relation::Ge, money(0));
        assert_eq!(solve_lp(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x");
        lp.add_constraint(vec![(x, money(1))], Relation::Ge, money(1));
        lp.set_objective(vec![(x, money(-1))]);
        assert_eq!(solve_lp(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn fractional_vertex() {
        // min -x - y  s.t. 2x + y <= 4, x + 3y <= 6  -> x = 6/5, y = 8/5
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x");
        let y = lp.add_var("y");
        lp.add_constraint(vec![(x, money(2)), (y, money(1))], Relation::Le, money(4));
        lp.add_constraint(vec![(x, money(1)), (y, money(3))], Relation::Le, money(6));
        lp.set_objective(vec![(x, money(-1)), (y, money(-1))]);
        let s = solve_lp(&lp);
        assert_eq!(s.assignment, vec![ratio(6, 5), ratio(8, 5)]);
        assert_eq!(s.objective, ratio(-14, 5));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x");
        let y = lp.add_var("y");
        lp.add_constraint(vec![(x, money(1)), (y, money(1))], Relation::Eq, money(2));
        lp.add_constraint(vec![(x, money(2)), (y, money(2))], Relation::Eq, money(4));
        lp.set_objective(vec![(x, money(1))]);
        let s = solve_lp(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.assignment, vec![money(0), money(2)]);
    }

    #[test]
    fn dump_is_stable() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x");
        lp.add_constraint(vec![(x, money(1))], Relation::Ge, money(3));
        lp.set_objective(vec![(x, money(1))]);
        assert_eq!(
            lp.dump(),
            "minimize 1 x\nvars 1\n  x0 x >= 0\nrows 1\n  r0: 1 x >= 3\n"
        );
    }

    /// Brute force over a small integer box; LPs whose vertices are integral
    /// by construction (single-variable bounds plus one coupling row).
    fn brute(lo: &[i64], cap: i64, cost: &[i64]) -> Option<i64> {
        let mut best: Option<i64> = None;
        let k = lo.len();
        let mut x = vec![0i64; k];
        loop {
            if x.iter().zip(lo).all(|(a, b)| a >= b) && x.iter().sum::<i64>() <= cap {
                let v: i64 = x.iter().zip(cost).map(|(a, c)| a * c).sum();
                best = Some(best.map_or(v, |b| b.min(v)));
            }
            let mut i = 0;
            loop {
                if i == k {
                    return best;
                }
                x[i] += 1;
                if x[i] <= cap {
                    break;
                }
                x[i] = 0;
                i += 1;
            }
        }
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            lo in proptest::collection::vec(0i64..3, 1..4),
            cap in 0i64..6,
            cost in proptest::collection::vec(-3i64..4, 3),
        ) {
            let mut lp = LinearProgram::new();
            let vars: Vec<usize> = (0..lo.len()).map(|i| lp.add_var(format!("x{i}"))).collect();
            for (j, l) in vars.iter().zip(&lo) {
                lp.add_constraint(vec![(*j, money(1))], Relation::Ge, money(*l));
            }
            lp.add_constraint(vars.iter().map(|j| (*j, money(1))).collect(), Relation::Le, money(cap));
            lp.set_objective(vars.iter().zip(&cost).map(|(j, c)| (*j, money(*c))).collect());
            let s = solve_lp(&lp);
            match brute(&lo, cap, &cost[..lo.len()]) {
                None => prop_assert_eq!(s.status, LpStatus::Infeasible),
                Some(v) => {
                    prop_assert_eq!(s.status, LpStatus::Optimal);
                    prop_assert_eq!(s.objective, money(v));
                }
            }
        }
    }
}
