//! Cash trajectories, schedule validity and bankruptcy.
//!
//! All payments made at the same time step are netted at once: cash and
//! withholding are judged after every time-`t` payment has executed, so
//! simultaneous payment cycles are valid even with zero cash.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::model::{BailoutVector, DebtId, IdmInstance, Money, NodeId, Schedule, Time};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// All-or-nothing: every payment is zero or the full amount.
    AoN,
    /// Partial integral payments.
    PP,
    /// Fractional (rational) payments.
    FP,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::AoN => "aon",
            Variant::PP => "pp",
            Variant::FP => "fp",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "aon" => Ok(Variant::AoN),
            "pp" => Ok(Variant::PP),
            "fp" => Ok(Variant::FP),
            _ => Err(format!("unknown variant {s:?}, expected aon, pp or fp")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidityError {
    #[error("payment on debt #{} at time {time} is outside the instance", debt.0)]
    IndexOutOfRange { debt: DebtId, time: Time },
}

/// Cash of every node at times `0..=T`, with per-step income and outgoings
/// for times `1..=T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CashTrajectory {
    cash: Vec<Vec<Money>>,
    income: Vec<Vec<Money>>,
    outgoing: Vec<Vec<Money>>,
}

impl CashTrajectory {
    pub fn cash(&self, v: NodeId, t: Time) -> &Money {
        &self.cash[v.0][t as usize]
    }

    /// Income at time `t >= 1`.
    pub fn income(&self, v: NodeId, t: Time) -> &Money {
        &self.income[v.0][t as usize - 1]
    }

    /// Outgoings at time `t >= 1`.
    pub fn outgoing(&self, v: NodeId, t: Time) -> &Money {
        &self.outgoing[v.0][t as usize - 1]
    }

    /// Smallest cash value ever held by `v`, including time 0.
    pub fn min_cash(&self, v: NodeId) -> &Money {
        self.cash[v.0].iter().min().expect("time 0 always present")
    }
}

fn in_range(x: &IdmInstance, e: DebtId, t: Time) -> bool {
    e.0 < x.debt_count() && t >= 1 && t <= x.lifetime()
}

pub fn derive_cash(
    x: &IdmInstance,
    s: &Schedule,
    bailout: Option<&BailoutVector>,
) -> Result<CashTrajectory, ValidityError> {
    let n = x.node_count();
    let horizon = x.lifetime() as usize;
    let mut income = vec![vec![Money::zero(); horizon]; n];
    let mut outgoing = vec![vec![Money::zero(); horizon]; n];
    for ((e, t), p) in s.iter() {
        if !in_range(x, e, t) {
            return Err(ValidityError::IndexOutOfRange { debt: e, time: t });
        }
        let d = x.debt(e);
        income[d.creditor.0][t as usize - 1] += p;
        outgoing[d.debtor.0][t as usize - 1] += p;
    }
    let mut cash = Vec::with_capacity(n);
    for v in x.nodes() {
        let mut row = Vec::with_capacity(horizon + 1);
        let mut c = x.assets(v).clone();
        if let Some(b) = bailout {
            c += b.get(v);
        }
        row.push(c.clone());
        for t in 0..horizon {
            c += &income[v.0][t];
            c -= &outgoing[v.0][t];
            row.push(c.clone());
        }
        cash.push(row);
    }
    Ok(CashTrajectory {
        cash,
        income,
        outgoing,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DebtStatus {
    /// Before the window opens.
    Inactive,
    /// Inside the window, not yet fully paid.
    Payable,
    /// At the deadline, fully paid by payments made exactly at the deadline.
    Due,
    /// At or past the deadline with an unpaid remainder.
    Overdue,
    /// Fully paid.
    Settled,
}

/// Status after all time-`t` payments have been applied.
pub fn debt_status(x: &IdmInstance, s: &Schedule, e: DebtId, t: Time) -> DebtStatus {
    let terms = &x.debt(e).terms;
    if t < terms.t1 {
        return DebtStatus::Inactive;
    }
    let mut before = Money::zero();
    let mut at = Money::zero();
    for ((d, when), p) in s.iter() {
        if d != e || when > t {
            continue;
        }
        if when < t {
            before += p;
        } else {
            at += p;
        }
    }
    let total = &before + &at;
    if total >= terms.amount {
        if t == terms.t2 && before < terms.amount {
            DebtStatus::Due
        } else {
            DebtStatus::Settled
        }
    } else if t < terms.t2 {
        DebtStatus::Payable
    } else {
        DebtStatus::Overdue
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Violation {
    NegativePayment { debt: usize, time: Time },
    WrongShape { debt: usize, time: Time },
    Overpaid { debt: usize },
    PaidEarly { debt: usize, time: Time },
    NegativeCash { node: usize, time: Time },
    Withholding { node: usize, time: Time },
    OutOfRange { debt: usize, time: Time },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
    /// Every debtor of a debt that is overdue at some time, with the first
    /// such time.
    pub bankrupt: BTreeMap<NodeId, Time>,
    pub perfect: bool,
}

pub fn count_bankruptcies(report: &ValidationReport) -> usize {
    report.bankrupt.len()
}

/// Per-node bookkeeping of overdue debts with a positive remainder.
#[derive(Default)]
struct OverdueSet {
    count: usize,
    // amount -> multiplicity, for the all-or-nothing threshold
    amounts: BTreeMap<Money, usize>,
}

impl OverdueSet {
    fn insert(&mut self, a: &Money) {
        self.count += 1;
        *self.amounts.entry(a.clone()).or_insert(0) += 1;
    }

    fn remove(&mut self, a: &Money) {
        self.count -= 1;
        let slot = self.amounts.get_mut(a).expect("present");
        *slot -= 1;
        if *slot == 0 {
            self.amounts.remove(a);
        }
    }
}

/// Checks a schedule against the validity rules of `variant`.
///
/// Runs in time near-linear in the number of stored payments plus debts:
/// state only changes at payment times and deadlines, so only those times
/// are inspected.
pub fn validate(
    x: &IdmInstance,
    s: &Schedule,
    variant: Variant,
    bailout: Option<&BailoutVector>,
) -> ValidationReport {
    let mut violations = Vec::new();
    let mut by_time: BTreeMap<Time, Vec<(DebtId, &Money)>> = BTreeMap::new();

    let mut current: Option<(DebtId, Money)> = None;
    let flush_total = |cur: &mut Option<(DebtId, Money)>, violations: &mut Vec<Violation>| {
        if let Some((e, total)) = cur.take() {
            if total > x.debt(e).terms.amount {
                violations.push(Violation::Overpaid { debt: e.0 });
            }
        }
    };
    for ((e, t), p) in s.iter() {
        if !in_range(x, e, t) {
            violations.push(Violation::OutOfRange { debt: e.0, time: t });
            continue;
        }
        let terms = &x.debt(e).terms;
        if p.is_negative() {
            violations.push(Violation::NegativePayment { debt: e.0, time: t });
        }
        let shape_ok = match variant {
            Variant::FP => true,
            Variant::PP => p.is_integer(),
            Variant::AoN => *p == terms.amount,
        };
        if !shape_ok {
            violations.push(Violation::WrongShape { debt: e.0, time: t });
        }
        if t < terms.t1 {
            violations.push(Violation::PaidEarly { debt: e.0, time: t });
        }
        match &mut current {
            Some((d, total)) if *d == e => *total += p,
            _ => {
                flush_total(&mut current, &mut violations);
                current = Some((e, p.clone()));
            }
        }
        by_time.entry(t).or_default().push((e, p));
    }
    flush_total(&mut current, &mut violations);

    let mut deadlines: BTreeMap<Time, Vec<DebtId>> = BTreeMap::new();
    for e in x.debt_ids() {
        deadlines.entry(x.debt(e).terms.t2).or_default().push(e);
    }
    let events: BTreeSet<Time> = by_time.keys().chain(deadlines.keys()).copied().collect();

    let mut cash: Vec<Money> = x
        .nodes()
        .map(|v| match bailout {
            Some(b) => x.assets(v) + b.get(v),
            None => x.assets(v).clone(),
        })
        .collect();
    for v in x.nodes() {
        if cash[v.0].is_negative() {
            violations.push(Violation::NegativeCash { node: v.0, time: 0 });
        }
    }
    let mut paid = vec![Money::zero(); x.debt_count()];
    let mut overdue_flag = vec![false; x.debt_count()];
    let mut overdue: Vec<OverdueSet> = x.nodes().map(|_| OverdueSet::default()).collect();
    let mut bankrupt: BTreeMap<NodeId, Time> = BTreeMap::new();
    let mut ever_overdue = false;

    let mut touched_debts: Vec<DebtId> = Vec::new();
    let mut touched_nodes: Vec<NodeId> = Vec::new();
    for t in events {
        touched_debts.clear();
        touched_nodes.clear();
        if let Some(ps) = by_time.get(&t) {
            for &(e, p) in ps {
                let d = x.debt(e);
                cash[d.debtor.0] -= p;
                cash[d.creditor.0] += p;
                paid[e.0] += p;
                touched_debts.push(e);
                touched_nodes.push(d.debtor);
                touched_nodes.push(d.creditor);
            }
        }
        if let Some(es) = deadlines.get(&t) {
            touched_debts.extend(es.iter().copied());
        }
        for &e in &touched_debts {
            let d = x.debt(e);
            let now = t >= d.terms.t2 && paid[e.0] < d.terms.amount;
            if now && !overdue_flag[e.0] {
                overdue[d.debtor.0].insert(&d.terms.amount);
                touched_nodes.push(d.debtor);
            } else if !now && overdue_flag[e.0] {
                overdue[d.debtor.0].remove(&d.terms.amount);
                touched_nodes.push(d.debtor);
            }
            overdue_flag[e.0] = now;
            if now {
                ever_overdue = true;
                bankrupt.entry(d.debtor).or_insert(t);
            }
        }
        touched_nodes.sort_unstable();
        touched_nodes.dedup();
        for &v in &touched_nodes {
            let c = &cash[v.0];
            if c.is_negative() {
                violations.push(Violation::NegativeCash { node: v.0, time: t });
                continue;
            }
            let set = &overdue[v.0];
            if set.count == 0 {
                continue;
            }
            let withholding = match variant {
                Variant::FP | Variant::PP => !c.is_zero(),
                Variant::AoN => {
                    let smallest = set.amounts.keys().next().expect("non-empty");
                    c >= smallest
                }
            };
            if withholding {
                violations.push(Violation::Withholding { node: v.0, time: t });
            }
        }
    }

    ValidationReport {
        valid: violations.is_empty(),
        violations,
        bankrupt,
        perfect: !ever_overdue,
    }
}

/// Builds a valid schedule by simulation. At each time, debts are visited in
/// id order and `choose(debt, t, max)` proposes a payment; it is clamped to
/// what the debtor can afford and to the variant's shape. Afterwards any
/// node that would be withholding pays down its overdue debts until no
/// withholding remains.
pub fn simulate(
    x: &IdmInstance,
    variant: Variant,
    bailout: Option<&BailoutVector>,
    mut choose: impl FnMut(DebtId, Time, &Money) -> Money,
) -> Schedule {
    let mut cash: Vec<Money> = x
        .nodes()
        .map(|v| match bailout {
            Some(b) => x.assets(v) + b.get(v),
            None => x.assets(v).clone(),
        })
        .collect();
    let mut remaining: Vec<Money> = x.debts().iter().map(|d| d.terms.amount.clone()).collect();
    let mut s = Schedule::new();
    let mut pay = |e: DebtId, t: Time, p: Money, cash: &mut Vec<Money>, remaining: &mut Vec<Money>| {
        let d = x.debt(e);
        cash[d.debtor.0] -= &p;
        cash[d.creditor.0] += &p;
        remaining[e.0] -= &p;
        s.add(e, t, &p);
    };
    for t in 1..=x.lifetime() {
        for e in x.debt_ids() {
            let d = x.debt(e);
            if t < d.terms.t1 || remaining[e.0].is_zero() {
                continue;
            }
            let cap = remaining[e.0].clone().min(cash[d.debtor.0].clone());
            let mut p = choose(e, t, &cap).max(Money::zero()).min(cap.clone());
            p = match variant {
                Variant::FP => p,
                Variant::PP => p.floor(),
                Variant::AoN => {
                    if !p.is_zero() && cap == d.terms.amount {
                        cap
                    } else {
                        Money::zero()
                    }
                }
            };
            if !p.is_zero() {
                pay(e, t, p, &mut cash, &mut remaining);
            }
        }
        loop {
            let mut changed = false;
            for e in x.debt_ids() {
                let d = x.debt(e);
                if t < d.terms.t2 || remaining[e.0].is_zero() {
                    continue;
                }
                let c = &cash[d.debtor.0];
                let p = match variant {
                    Variant::FP | Variant::PP => remaining[e.0].clone().min(c.clone()),
                    Variant::AoN if *c >= remaining[e.0] => remaining[e.0].clone(),
                    Variant::AoN => Money::zero(),
                };
                if p.is_positive() {
                    pay(e, t, p, &mut cash, &mut remaining);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }
    s
}
