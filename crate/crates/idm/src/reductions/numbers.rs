use num_bigint::BigInt;

use crate::model::{IdmInstance, InstanceBuilder, Money};

use super::{NumberMultiset, ReductionError};

fn big(v: u64) -> Money {
    Money::from_integer(BigInt::from(v))
}

fn built(b: &InstanceBuilder) -> IdmInstance {
    b.build().expect("generator produced a malformed instance")
}

/// Equal-cardinality partition encoded on a fixed 32-node network. Returns
/// the instance and the threshold 16.
pub fn gen_bankmin_fixed32_ecp(s: &NumberMultiset) -> Result<(IdmInstance, usize), ReductionError> {
    let n = s.values.len() as u64;
    if n % 2 == 1 {
        return Err(ReductionError::MalformedInput("needs an even number of values".into()));
    }
    if s.sum() % 2 == 1 {
        return Err(ReductionError::OddSum);
    }
    let k = s.sum() / 2;
    let inf = big(2 * k + n + 1);
    let big_t = 10 * n + 7;
    let a: Vec<(u64, Money)> = s.values.iter().enumerate().map(|(i, &v)| (10 * (i as u64 + 1), big(v))).collect();
    let one = big(1);

    let mut b = InstanceBuilder::new();
    b.node_money("s", big(2 * k)).node("m1", 0).node("m2", 0).node("m3", 0);
    for side in ["A", "B"] {
        for i in 4..=16 {
            let assets = if i == 12 { big(n / 2) } else { big(0) };
            b.node_money(format!("m{i}{side}"), assets);
        }
    }
    b.node("p", 0).node("d", 0);

    for (t, v) in &a {
        b.debt_money("s", "m1", v.clone(), *t, t + 5);
    }
    for (from, to) in [("m1", "m2"), ("m2", "m3")] {
        for (t, v) in &a {
            b.debt_money(from, to, v.clone(), *t, *t);
            b.debt_money(from, to, v.clone(), t + 5, t + 5);
        }
    }
    b.debt_money("m1", "p", inf.clone(), 1, 1)
        .debt_money("m3", "m1", inf.clone(), 1, 1)
        .debt_money("m3", "m4A", inf.clone(), 1, 1)
        .debt_money("m3", "m4B", inf.clone(), 1, 1);

    // each side is the same gadget shifted by 5
    for (side, shift) in [("A", 0u64), ("B", 5)] {
        let m = |i: u32| format!("m{i}{side}");
        let inf_debt = |b: &mut InstanceBuilder, from: String, to: String| {
            b.debt_money(from, to, inf.clone(), 1, 1);
        };
        inf_debt(&mut b, m(4), "p".into());
        for (t, v) in &a {
            b.debt_money(m(4), m(5), v.clone(), t + shift, t + shift);
            b.debt_money(m(5), m(6), v.clone(), t + shift, t + shift);
        }
        inf_debt(&mut b, m(6), m(4));
        inf_debt(&mut b, m(6), m(7));

        inf_debt(&mut b, m(8), "p".into());
        for (t, _) in &a {
            let t0 = t + shift;
            b.debt_money(m(7), m(8), one.clone(), t0, t0);
            for (from, to) in [(8, 9), (9, 10), (10, 11), (12, 7)] {
                b.debt_money(m(from), m(to), one.clone(), t0 + 1, t0 + 1);
            }
        }
        inf_debt(&mut b, m(11), m(8));
        inf_debt(&mut b, m(11), m(12));

        b.debt_money(m(7), m(13), big(k), 1, big_t);
        inf_debt(&mut b, m(13), "p".into());
        for (t, v) in &a {
            b.debt_money(m(13), m(14), v.clone(), t + shift + 2, t + shift + 2);
            b.debt_money(m(14), m(15), v.clone(), t + shift + 2, t + shift + 2);
        }
        inf_debt(&mut b, m(15), m(13));
        inf_debt(&mut b, m(15), m(16));
        b.debt_money(m(16), "d", big(k), big_t, big_t);
    }
    Ok((built(&b), 16))
}

fn check_values(s: &NumberMultiset) -> Result<(), ReductionError> {
    if s.values.is_empty() || s.values.contains(&0) {
        return Err(ReductionError::MalformedInput("values must be positive and non-empty".into()));
    }
    Ok(())
}

/// All-or-nothing perfect scheduling on a 4-node path, horizon 2.
pub fn gen_aon_perfsched_partition(s: &NumberMultiset) -> Result<IdmInstance, ReductionError> {
    check_values(s)?;
    if s.sum() % 2 == 1 {
        return Err(ReductionError::OddSum);
    }
    let k = big(s.sum() / 2);
    let mut b = InstanceBuilder::new();
    b.node_money("s", big(s.sum())).node("v", 0).node("w", 0).node("x", 0);
    for t in [1, 2] {
        b.debt_money("s", "v", k.clone(), t, t);
        b.debt_money("w", "x", k.clone(), t, t);
    }
    for &a in &s.values {
        b.debt_money("v", "w", big(a), 1, 2);
    }
    Ok(built(&b))
}

/// All-or-nothing perfect scheduling on a 4-node path for 3-partition.
/// Values (and the target, when given) are scaled by 4 first; without a
/// target the scaled sum must split evenly into `len/3` groups.
pub fn gen_aon_perfsched_3partition(s: &NumberMultiset) -> Result<IdmInstance, ReductionError> {
    check_values(s)?;
    if s.values.len() % 3 != 0 {
        return Err(ReductionError::MalformedInput("needs a multiple of three values".into()));
    }
    let m = s.values.len() as u64 / 3;
    let scaled: Vec<u64> = s.values.iter().map(|v| 4 * v).collect();
    let sum: u64 = scaled.iter().sum();
    let k = match s.target {
        Some(k) => 4 * k,
        None if sum % m == 0 => sum / m,
        None => return Err(ReductionError::MalformedInput(format!("sum {sum} does not split into {m} groups"))),
    };
    let mut b = InstanceBuilder::new();
    b.node_money("s", big(m * (k + 3))).node("v", 0).node("w", 0).node("x", 0);
    for t in 1..=m {
        b.debt_money("s", "v", big(k + 3), t, t);
        b.debt_money("w", "x", big(k + 3), t, t);
    }
    for a in scaled {
        b.debt_money("v", "w", big(a + 1), 1, m);
    }
    Ok(built(&b))
}

/// All-or-nothing bankruptcy maximisation for subset sum, horizon 2. Values
/// and `k` are doubled when any value is 1. Returns the instance and the
/// threshold 1.
pub fn gen_aon_bankmax_subset_sum(s: &NumberMultiset, k: u64) -> Result<(IdmInstance, usize), ReductionError> {
    check_values(s)?;
    let factor = if s.values.contains(&1) { 2 } else { 1 };
    let values: Vec<u64> = s.values.iter().map(|v| v * factor).collect();
    let k = k * factor;
    let total: u64 = values.iter().sum();
    let mut b = InstanceBuilder::new();
    b.node_money("u", big(total)).node_money("v", big(k)).node("w", 0);
    b.debt_money("u", "v", big(total), 2, 2);
    for a in values {
        b.debt_money("v", "w", big(a), 1, 2);
    }
    b.debt("v", "w", 1, 1, 1);
    Ok((built(&b), 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::money;
    use crate::oracle::{oracle_bankruptcy_max, oracle_perfect_scheduling, oracle_schedules, SearchBudget};
    use crate::validity::{validate, Variant};
    use std::ops::ControlFlow;

    fn ms(v: &[u64]) -> NumberMultiset {
        NumberMultiset::new(v.to_vec(), None).unwrap()
    }

    #[test]
    fn fixed32_structure() {
        let (x, k) = gen_bankmin_fixed32_ecp(&ms(&[1, 1])).unwrap();
        assert_eq!(k, 16);
        assert_eq!(x.node_count(), 32);
        assert_eq!(x.lifetime(), 27);
        let inf = money(5);
        let inf_debtors: std::collections::BTreeSet<_> = x
            .debts()
            .iter()
            .filter(|d| d.terms.amount == inf && d.terms.t1 == 1 && d.terms.t2 == 1)
            .map(|d| d.debtor)
            .collect();
        assert_eq!(inf_debtors.len(), 14);
        assert_eq!(x.assets(x.node_id("s").unwrap()), &money(2));
        assert_eq!(x.assets(x.node_id("m12B").unwrap()), &money(1));

        let (x, _) = gen_bankmin_fixed32_ecp(&ms(&[3, 1, 2, 4, 5, 1])).unwrap();
        assert_eq!(x.node_count(), 32);
        assert_eq!(x.lifetime(), 67);
        assert!(gen_bankmin_fixed32_ecp(&ms(&[1, 2, 3])).is_err());
        assert_eq!(gen_bankmin_fixed32_ecp(&ms(&[1, 2])).unwrap_err(), ReductionError::OddSum);
    }

    #[test]
    fn partition_path() {
        let x = gen_aon_perfsched_partition(&ms(&[1, 1])).unwrap();
        assert_eq!(x.node_count(), 4);
        for (v, w) in [("s", "v"), ("v", "w"), ("w", "x")] {
            let (v, w) = (x.node_id(v).unwrap(), x.node_id(w).unwrap());
            assert!(x.out_debts(v).iter().all(|&e| x.debt(e).creditor == w));
        }
        let budget = SearchBudget::default();
        assert!(oracle_perfect_scheduling(&x, Variant::AoN, &budget).unwrap().value);
        let x = gen_aon_perfsched_partition(&ms(&[1, 3])).unwrap();
        let ans = oracle_perfect_scheduling(&x, Variant::AoN, &budget).unwrap();
        assert!(ans.exhausted && !ans.value);
        assert_eq!(gen_aon_perfsched_partition(&ms(&[1, 2])).unwrap_err(), ReductionError::OddSum);
    }

    #[test]
    fn three_partition_path() {
        let x = gen_aon_perfsched_3partition(&ms(&[1, 1, 2])).unwrap();
        assert_eq!(x.assets(x.node_id("s").unwrap()), &money(19));
        let v = x.node_id("v").unwrap();
        let mut amounts: Vec<_> = x.out_debts(v).iter().map(|&e| x.debt(e).terms.amount.clone()).collect();
        amounts.sort();
        assert_eq!(amounts, vec![money(5), money(5), money(9)]);
        let budget = SearchBudget::default();
        assert!(oracle_perfect_scheduling(&x, Variant::AoN, &budget).unwrap().value);
        let bad = NumberMultiset::new(vec![1, 1, 2], Some(5)).unwrap();
        let x = gen_aon_perfsched_3partition(&bad).unwrap();
        let ans = oracle_perfect_scheduling(&x, Variant::AoN, &budget).unwrap();
        assert!(ans.exhausted && !ans.value);
        assert!(gen_aon_perfsched_3partition(&ms(&[1, 1])).is_err());
        assert!(gen_aon_perfsched_3partition(&ms(&[1, 1, 1, 1, 1, 1, 1, 1, 2])).is_err());
    }

    #[test]
    fn subset_sum_network() {
        let budget = SearchBudget::default();
        let (x, k) = gen_aon_bankmax_subset_sum(&ms(&[2, 4]), 2).unwrap();
        assert_eq!(k, 1);
        assert!(oracle_bankruptcy_max(&x, Variant::AoN, &budget).unwrap().value >= 1);
        let (x, _) = gen_aon_bankmax_subset_sum(&ms(&[2, 4]), 3).unwrap();
        let ans = oracle_bankruptcy_max(&x, Variant::AoN, &budget).unwrap();
        assert!(ans.exhausted);
        assert_eq!(ans.value, 0);
        let (x, _) = gen_aon_bankmax_subset_sum(&ms(&[1, 3]), 1).unwrap();
        assert_eq!(x.assets(x.node_id("v").unwrap()), &money(2));
    }

    #[test]
    fn subset_sum_outer_nodes_never_fail() {
        let (x, _) = gen_aon_bankmax_subset_sum(&ms(&[2, 3, 4]), 5).unwrap();
        let (u, w) = (x.node_id("u").unwrap(), x.node_id("w").unwrap());
        let mut seen = 0;
        oracle_schedules(&x, Variant::AoN, &SearchBudget::default(), |s| {
            let r = validate(&x, s, Variant::AoN, None);
            assert!(!r.bankrupt.contains_key(&u) && !r.bankrupt.contains_key(&w));
            seen += 1;
            ControlFlow::Continue(())
        })
        .unwrap();
        assert!(seen > 0);
    }
}
