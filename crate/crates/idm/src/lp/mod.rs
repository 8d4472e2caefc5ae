//! Fractional-payment bailout minimization as an exact linear program.

mod simplex;

pub use simplex::{solve_lp, Constraint, LinearProgram, LpSolution, LpStatus, Relation};

use num_traits::{One, Signed, Zero};

use crate::model::{BailoutVector, DebtId, IdmInstance, Money, NodeId, Schedule, Time};
use crate::validity::{validate, Variant};

/// The full bailout program together with its variable layout.
///
/// Variables, in order: `B[v]`; `p[e][t]` for `t in 1..=T`; then per node
/// `I[v][t]`, `O[v][t]` for `t in 1..=T` and `c[v][t]` for `t in 0..=T`.
#[derive(Clone, Debug)]
pub struct BailoutLp {
    pub program: LinearProgram,
    nodes: usize,
    debts: usize,
    horizon: usize,
}

impl BailoutLp {
    pub fn bailout_var(&self, v: NodeId) -> usize {
        v.0
    }

    pub fn payment_var(&self, e: DebtId, t: Time) -> usize {
        self.nodes + e.0 * self.horizon + (t as usize - 1)
    }

    fn node_base(&self, v: NodeId) -> usize {
        self.nodes + self.debts * self.horizon + v.0 * (3 * self.horizon + 1)
    }

    pub fn income_var(&self, v: NodeId, t: Time) -> usize {
        self.node_base(v) + (t as usize - 1)
    }

    pub fn outgoing_var(&self, v: NodeId, t: Time) -> usize {
        self.node_base(v) + self.horizon + (t as usize - 1)
    }

    pub fn cash_var(&self, v: NodeId, t: Time) -> usize {
        self.node_base(v) + 2 * self.horizon + t as usize
    }
}

fn one() -> Money {
    Money::one()
}

fn minus_one() -> Money {
    -Money::one()
}

/// Builds the bailout program for `x` as given (no compaction). With a
/// budget, a row `sum B <= budget` is added.
///
/// Payments are pinned to zero outside `[t1, t2]`. Leaving them free after
/// `t2` would let a debtor overpay late and subsidise its creditor.
pub fn build_bailout_lp(x: &IdmInstance, budget: Option<&Money>) -> BailoutLp {
    let horizon = x.lifetime() as usize;
    let mut program = LinearProgram::new();
    for v in x.nodes() {
        program.add_var(format!("B[{}]", x.node_name(v)));
    }
    for e in x.debt_ids() {
        let d = x.debt(e);
        for t in 1..=horizon {
            program.add_var(format!(
                "p[{}->{}#{}][{t}]",
                x.node_name(d.debtor),
                x.node_name(d.creditor),
                d.label
            ));
        }
    }
    for v in x.nodes() {
        let name = x.node_name(v);
        for t in 1..=horizon {
            program.add_var(format!("I[{name}][{t}]"));
        }
        for t in 1..=horizon {
            program.add_var(format!("O[{name}][{t}]"));
        }
        for t in 0..=horizon {
            program.add_var(format!("c[{name}][{t}]"));
        }
    }
    let lp = BailoutLp {
        program,
        nodes: x.node_count(),
        debts: x.debt_count(),
        horizon,
    };
    let mut program = lp.program.clone();

    if let Some(b) = budget {
        let row = x.nodes().map(|v| (lp.bailout_var(v), one())).collect();
        program.add_constraint(row, Relation::Le, b.clone());
    }
    for v in x.nodes() {
        program.add_constraint(
            vec![(lp.cash_var(v, 0), one()), (lp.bailout_var(v), minus_one())],
            Relation::Eq,
            x.assets(v).clone(),
        );
    }
    for e in x.debt_ids() {
        let terms = &x.debt(e).terms;
        for t in 1..=horizon as Time {
            if t < terms.t1 || t > terms.t2 {
                program.add_constraint(vec![(lp.payment_var(e, t), one())], Relation::Eq, Money::zero());
            }
        }
    }
    for v in x.nodes() {
        for t in 1..=horizon as Time {
            let mut inc = vec![(lp.income_var(v, t), one())];
            inc.extend(x.in_debts(v).iter().map(|&e| (lp.payment_var(e, t), minus_one())));
            program.add_constraint(inc, Relation::Eq, Money::zero());
            let mut out = vec![(lp.outgoing_var(v, t), one())];
            out.extend(x.out_debts(v).iter().map(|&e| (lp.payment_var(e, t), minus_one())));
            program.add_constraint(out, Relation::Eq, Money::zero());
            program.add_constraint(
                vec![
                    (lp.cash_var(v, t), one()),
                    (lp.cash_var(v, t - 1), minus_one()),
                    (lp.income_var(v, t), minus_one()),
                    (lp.outgoing_var(v, t), one()),
                ],
                Relation::Eq,
                Money::zero(),
            );
        }
    }
    for e in x.debt_ids() {
        let terms = &x.debt(e).terms;
        let row = (terms.t1..=terms.t2).map(|t| (lp.payment_var(e, t), one())).collect();
        program.add_constraint(row, Relation::Eq, terms.amount.clone());
    }
    program.set_objective(x.nodes().map(|v| (lp.bailout_var(v), one())).collect());
    BailoutLp { program, ..lp }
}

/// Solves the bailout program after substituting away income, outgoing and
/// cash variables. Returns the full assignment of `lp`, or `None` when
/// infeasible.
fn solve_reduced(x: &IdmInstance, lp: &BailoutLp, budget: Option<&Money>) -> Option<Vec<Money>> {
    let mut reduced = LinearProgram::new();
    let b_vars: Vec<usize> = x
        .nodes()
        .map(|v| reduced.add_var(format!("B[{}]", x.node_name(v))))
        .collect();
    // (debt, time) -> reduced index for payments inside the window
    let mut p_vars: Vec<Vec<(Time, usize)>> = Vec::with_capacity(x.debt_count());
    for e in x.debt_ids() {
        let terms = &x.debt(e).terms;
        p_vars.push(
            (terms.t1..=terms.t2)
                .map(|t| (t, reduced.add_var(format!("p{}@{t}", e.0))))
                .collect(),
        );
    }
    if let Some(b) = budget {
        reduced.add_constraint(b_vars.iter().map(|&j| (j, one())).collect(), Relation::Le, b.clone());
    }
    // Cash of v after time t: A0 + B + sum_{s<=t} (in - out) >= 0. Cash can
    // only drop at times where v has a payable debt, so only those rows.
    for v in x.nodes() {
        let mut times: Vec<Time> = x
            .out_debts(v)
            .iter()
            .flat_map(|&e| p_vars[e.0].iter().map(|&(t, _)| t))
            .collect();
        times.sort_unstable();
        times.dedup();
        for t in times {
            let mut row = vec![(b_vars[v.0], one())];
            for &e in x.in_debts(v) {
                row.extend(p_vars[e.0].iter().filter(|(s, _)| *s <= t).map(|&(_, j)| (j, one())));
            }
            for &e in x.out_debts(v) {
                row.extend(
                    p_vars[e.0]
                        .iter()
                        .filter(|(s, _)| *s <= t)
                        .map(|&(_, j)| (j, minus_one())),
                );
            }
            reduced.add_constraint(row, Relation::Ge, -x.assets(v).clone());
        }
    }
    for e in x.debt_ids() {
        let row = p_vars[e.0].iter().map(|&(_, j)| (j, one())).collect();
        reduced.add_constraint(row, Relation::Eq, x.debt(e).terms.amount.clone());
    }
    reduced.set_objective(b_vars.iter().map(|&j| (j, one())).collect());

    let sol = solve_lp(&reduced);
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return None,
        LpStatus::Unbounded => unreachable!("objective is bounded below by zero"),
    }

    // Expand to the full variable set.
    let mut full = vec![Money::zero(); lp.program.num_vars()];
    for v in x.nodes() {
        full[lp.bailout_var(v)] = sol.assignment[b_vars[v.0]].clone();
    }
    for e in x.debt_ids() {
        for &(t, j) in &p_vars[e.0] {
            full[lp.payment_var(e, t)] = sol.assignment[j].clone();
        }
    }
    for v in x.nodes() {
        let mut c = x.assets(v) + &full[lp.bailout_var(v)];
        full[lp.cash_var(v, 0)] = c.clone();
        for t in 1..=lp.horizon as Time {
            let inc: Money = x.in_debts(v).iter().map(|&e| full[lp.payment_var(e, t)].clone()).sum();
            let out: Money = x.out_debts(v).iter().map(|&e| full[lp.payment_var(e, t)].clone()).sum();
            c += &inc;
            c -= &out;
            full[lp.income_var(v, t)] = inc;
            full[lp.outgoing_var(v, t)] = out;
            full[lp.cash_var(v, t)] = c.clone();
        }
    }
    assert_eq!(
        lp.program.first_violation(&full),
        None,
        "expanded solution violates the bailout program"
    );
    Some(full)
}

fn extract(x: &IdmInstance, lp: &BailoutLp, full: &[Money]) -> (BailoutVector, Schedule) {
    let bailout = BailoutVector::from_entries(x.nodes().map(|v| full[lp.bailout_var(v)].clone()).collect());
    let mut s = Schedule::new();
    for e in x.debt_ids() {
        for t in 1..=lp.horizon as Time {
            s.set(e, t, full[lp.payment_var(e, t)].clone());
        }
    }
    (bailout, s)
}

fn solve_original(x: &IdmInstance, budget: Option<&Money>) -> Option<(BailoutVector, Schedule)> {
    let (compacted, map) = x.compact();
    let lp = build_bailout_lp(&compacted, budget);
    let full = solve_reduced(&compacted, &lp, budget)?;
    let (bailout, s) = extract(&compacted, &lp, &full);
    let s = map.backward_schedule(&s);
    let report = validate(x, &s, Variant::FP, Some(&bailout));
    assert!(
        report.valid && report.perfect,
        "LP schedule failed validation: {:?}",
        report.violations
    );
    Some((bailout, s))
}

/// Least total bailout admitting a perfect fractional schedule, with the
/// bailout vector and schedule attaining it.
pub fn fp_bailout_min(x: &IdmInstance) -> (Money, BailoutVector, Schedule) {
    let (b, s) = solve_original(x, None).expect("a large enough bailout always works");
    (b.total(), b, s)
}

/// Decision form: a bailout of total at most `budget` with a perfect
/// fractional schedule, if one exists.
pub fn fp_bailout_decide(x: &IdmInstance, budget: &Money) -> Option<(BailoutVector, Schedule)> {
    if budget.is_negative() {
        return None;
    }
    solve_original(x, Some(budget))
}

/// A perfect fractional schedule without any bailout, if one exists.
pub fn fp_perfect_scheduling(x: &IdmInstance) -> Option<Schedule> {
    fp_bailout_decide(x, &Money::zero()).map(|(_, s)| s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::{money, ratio, InstanceBuilder};
    use proptest::prelude::*;

    #[test]
    fn relay_program_shape() {
        let x = relay();
        let lp = build_bailout_lp(&x, Some(&Money::zero()));
        let (n, m, t) = (3, 2, 2);
        assert_eq!(lp.program.num_vars(), n + m * t + 3 * n * t + n);
        assert_eq!(lp.program.var_name(lp.payment_var(DebtId(1), 2)), "p[v->w#0][2]");
        assert!(solve_reduced(&x, &lp, Some(&Money::zero())).is_some());
    }

    #[test]
    fn debt_free_costs_nothing() {
        let x = InstanceBuilder::new().node("a", 0).build().unwrap();
        let (total, _, s) = fp_bailout_min(&x);
        assert!(total.is_zero() && s.is_empty());
    }

    #[test]
    fn three_banks_needs_five_at_u() {
        let x = three_banks();
        assert!(fp_perfect_scheduling(&x).is_none());
        let (total, b, s) = fp_bailout_min(&x);
        assert_eq!(total, money(5));
        assert_eq!(*b.get(NodeId(0)), money(5));
        let r = validate(&x, &s, Variant::FP, Some(&b));
        assert!(r.valid && r.perfect);
        // u's prefix deficit at t=5 is 35 - 30 = 5, so nothing smaller works.
        assert!(fp_bailout_decide(&x, &(money(5) - ratio(1, 1000))).is_none());
        assert!(fp_bailout_decide(&x, &money(5)).is_some());
    }

    #[test]
    fn perfect_schedules_exist() {
        assert!(fp_perfect_scheduling(&relay()).is_some());
        assert!(fp_perfect_scheduling(&cycle([0; 4])).is_some());
    }

    #[test]
    fn dump_lists_bailout_first() {
        let dump = build_bailout_lp(&relay(), None).program.dump();
        assert!(dump.starts_with("minimize 1 B[u] + 1 B[v] + 1 B[w]\n"));
        assert!(dump.contains("x3 p[u->v#0][1] >= 0"));
    }

    fn arb_instance() -> impl Strategy<Value = IdmInstance> {
        (
            2usize..5,
            proptest::collection::vec((0usize..5, 0usize..4, 1i64..4, 1u64..4, 0u64..3), 1..6),
            proptest::collection::vec(0i64..4, 5),
        )
            .prop_map(|(n, raw, assets)| {
                let mut b = InstanceBuilder::new();
                for (i, a) in assets.iter().take(n).enumerate() {
                    b.node(format!("n{i}"), *a);
                }
                for (d, c, a, t1, len) in raw {
                    let d = d % n;
                    let c = c % (n - 1);
                    let c = if c >= d { c + 1 } else { c };
                    b.debt(format!("n{d}"), format!("n{c}"), a, t1, t1 + len);
                }
                b.build().unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn optimum_is_tight(x in arb_instance()) {
            let (total, _, _) = fp_bailout_min(&x);
            prop_assert!(fp_bailout_decide(&x, &total).is_some());
            if total.is_positive() {
                prop_assert!(fp_bailout_decide(&x, &(&total - ratio(1, 1000))).is_none());
            }
            prop_assert_eq!(total.is_zero(), fp_perfect_scheduling(&x).is_some());
        }

        #[test]
        fn more_assets_never_hurt(x in arb_instance(), who in 0usize..5, extra in 1i64..4) {
            let (before, _, _) = fp_bailout_min(&x);
            let mut assets = x.initial_assets().to_vec();
            let k = who % assets.len();
            assets[k] += money(extra);
            let (after, _, _) = fp_bailout_min(&x.with_assets(assets).unwrap());
            prop_assert!(after <= before);
        }

        #[test]
        fn at_least_the_prefix_deficits(x in arb_instance()) {
            let (total, b, _) = fp_bailout_min(&x);
            let mut need = Money::zero();
            for v in x.nodes() {
                let d = x.prefix_deficits(v).unwrap().max;
                prop_assert!(*b.get(v) >= Money::zero());
                need += d;
            }
            prop_assert!(total >= need);
        }
    }
}
