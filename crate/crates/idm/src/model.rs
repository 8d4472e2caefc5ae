//! Instances of the interval debt model, schedules and bailout vectors.
//!
//! Instances are immutable once built. Nodes get dense indices in
//! declaration order; debts are stored sorted by (debtor, creditor, label),
//! which makes [`DebtId`]s deterministic for a given instance.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

/// Exact rational money amount, always kept in lowest terms.
pub type Money = BigRational;

/// Integer time step. Payments happen at times `1..=lifetime`.
pub type Time = u64;

pub fn money(n: i64) -> Money {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(numer: i64, denom: i64) -> Money {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn is_integral(m: &Money) -> bool {
    m.is_integer()
}

/// Parses `"5"`, `"-2"` or `"7/3"`. Rejects zero denominators and anything
/// with surrounding junk.
pub fn parse_money(s: &str) -> Option<Money> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let valid = |x: &str| {
        let digits = x.strip_prefix('-').unwrap_or(x);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(n) {
        return None;
    }
    let numer: BigInt = n.parse().ok()?;
    let denom: BigInt = match d {
        Some(d) if valid(d) && !d.starts_with('-') => d.parse().ok()?,
        Some(_) => return None,
        None => BigInt::from(1),
    };
    if denom.is_zero() {
        return None;
    }
    Some(BigRational::new(numer, denom))
}

/// Canonical string form: `"5"` or `"7/3"`.
pub fn format_money(m: &Money) -> String {
    m.to_string()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DebtId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DebtTerms {
    pub amount: Money,
    pub t1: Time,
    pub t2: Time,
}

impl DebtTerms {
    pub fn is_exact_due(&self) -> bool {
        self.t1 == self.t2
    }
}

impl fmt::Display for DebtTerms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.t1 == self.t2 {
            write!(f, "{}@{}", self.amount, self.t1)
        } else {
            write!(f, "{}@[{},{}]", self.amount, self.t1, self.t2)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Debt {
    pub debtor: NodeId,
    pub creditor: NodeId,
    pub label: u32,
    pub terms: DebtTerms,
}

/// A debt as supplied to [`build_instance`], endpoints given by name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DebtSpec {
    pub debtor: String,
    pub creditor: String,
    pub label: u32,
    pub amount: Money,
    pub t1: Time,
    pub t2: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("labels of debts from {debtor} to {creditor} do not form 0,1,2,...")]
    NonContiguousLabels { debtor: String, creditor: String },
    #[error("node {0} has negative initial assets")]
    NegativeAsset(String),
    #[error("node {0} has non-integral initial assets")]
    NonIntegralAsset(String),
    #[error("debt {debtor}->{creditor} #{label} has amount {amount}, expected a positive integer")]
    NonIntegralAmount {
        debtor: String,
        creditor: String,
        label: u32,
        amount: String,
    },
    #[error("debt endpoint {0} is not a declared node")]
    UnknownEndpoint(String),
    #[error("self-loop debt at node {0}")]
    SelfLoop(String),
    #[error("bad interval [{t1},{t2}]: need 1 <= t1 <= t2")]
    BadInterval { t1: Time, t2: Time },
    #[error("node {0} declared twice")]
    DuplicateNode(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
}

#[derive(Clone, Debug)]
pub struct IdmInstance {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
    assets: Vec<Money>,
    debts: Vec<Debt>,
    out_debts: Vec<Vec<DebtId>>,
    in_debts: Vec<Vec<DebtId>>,
    lifetime: Time,
}

impl PartialEq for IdmInstance {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.assets == other.assets && self.debts == other.debts
    }
}

impl Eq for IdmInstance {}

/// Builds and checks an instance. `nodes` gives names with initial assets in
/// declaration order; labels in `debts` must be contiguous per ordered pair.
pub fn build_instance(
    nodes: Vec<(String, Money)>,
    debts: Vec<DebtSpec>,
) -> Result<IdmInstance, ModelError> {
    let mut names = Vec::with_capacity(nodes.len());
    let mut index = HashMap::with_capacity(nodes.len());
    let mut assets = Vec::with_capacity(nodes.len());
    for (name, a) in nodes {
        if a.is_negative() {
            return Err(ModelError::NegativeAsset(name));
        }
        if !a.is_integer() {
            return Err(ModelError::NonIntegralAsset(name));
        }
        if index.insert(name.clone(), NodeId(names.len())).is_some() {
            return Err(ModelError::DuplicateNode(name));
        }
        names.push(name);
        assets.push(a);
    }

    let mut built = Vec::with_capacity(debts.len());
    for d in debts {
        let debtor = *index
            .get(&d.debtor)
            .ok_or_else(|| ModelError::UnknownEndpoint(d.debtor.clone()))?;
        let creditor = *index
            .get(&d.creditor)
            .ok_or_else(|| ModelError::UnknownEndpoint(d.creditor.clone()))?;
        if debtor == creditor {
            return Err(ModelError::SelfLoop(d.debtor));
        }
        if d.t1 < 1 || d.t1 > d.t2 {
            return Err(ModelError::BadInterval { t1: d.t1, t2: d.t2 });
        }
        if !d.amount.is_integer() || !d.amount.is_positive() {
            return Err(ModelError::NonIntegralAmount {
                debtor: d.debtor,
                creditor: d.creditor,
                label: d.label,
                amount: format_money(&d.amount),
            });
        }
        built.push(Debt {
            debtor,
            creditor,
            label: d.label,
            terms: DebtTerms {
                amount: d.amount,
                t1: d.t1,
                t2: d.t2,
            },
        });
    }
    built.sort_by_key(|d| (d.debtor, d.creditor, d.label));

    // Labels per ordered pair must read 0,1,2,... once sorted.
    let mut expected = 0u32;
    for i in 0..built.len() {
        let same_pair = i > 0
            && built[i - 1].debtor == built[i].debtor
            && built[i - 1].creditor == built[i].creditor;
        if !same_pair {
            expected = 0;
        }
        if built[i].label != expected {
            return Err(ModelError::NonContiguousLabels {
                debtor: names[built[i].debtor.0].clone(),
                creditor: names[built[i].creditor.0].clone(),
            });
        }
        expected += 1;
    }

    let n = names.len();
    let mut out_debts = vec![Vec::new(); n];
    let mut in_debts = vec![Vec::new(); n];
    for (i, d) in built.iter().enumerate() {
        out_debts[d.debtor.0].push(DebtId(i));
        in_debts[d.creditor.0].push(DebtId(i));
    }
    let lifetime = built.iter().map(|d| d.terms.t2).max().unwrap_or(0);
    Ok(IdmInstance {
        names,
        index,
        assets,
        debts: built,
        out_debts,
        in_debts,
        lifetime,
    })
}

/// Convenience builder that assigns labels automatically in insertion order.
#[derive(Clone, Debug, Default)]
pub struct InstanceBuilder {
    nodes: Vec<(String, Money)>,
    debts: Vec<DebtSpec>,
    next_label: HashMap<(String, String), u32>,
}

impl InstanceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, name: impl Into<String>, assets: i64) -> &mut Self {
        self.node_money(name, money(assets))
    }

    pub fn node_money(&mut self, name: impl Into<String>, assets: Money) -> &mut Self {
        self.nodes.push((name.into(), assets));
        self
    }

    pub fn debt(
        &mut self,
        debtor: impl Into<String>,
        creditor: impl Into<String>,
        amount: i64,
        t1: Time,
        t2: Time,
    ) -> &mut Self {
        self.debt_money(debtor, creditor, money(amount), t1, t2)
    }

    pub fn debt_money(
        &mut self,
        debtor: impl Into<String>,
        creditor: impl Into<String>,
        amount: Money,
        t1: Time,
        t2: Time,
    ) -> &mut Self {
        let (debtor, creditor) = (debtor.into(), creditor.into());
        let slot = self
            .next_label
            .entry((debtor.clone(), creditor.clone()))
            .or_insert(0);
        let label = *slot;
        *slot += 1;
        self.debts.push(DebtSpec {
            debtor,
            creditor,
            label,
            amount,
            t1,
            t2,
        });
        self
    }

    pub fn build(&self) -> Result<IdmInstance, ModelError> {
        build_instance(self.nodes.clone(), self.debts.clone())
    }
}

impl IdmInstance {
    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn debt_count(&self) -> usize {
        self.debts.len()
    }

    pub fn lifetime(&self) -> Time {
        self.lifetime
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.names.len()).map(NodeId)
    }

    pub fn node_name(&self, v: NodeId) -> &str {
        &self.names[v.0]
    }

    pub fn node_names(&self) -> &[String] {
        &self.names
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn assets(&self, v: NodeId) -> &Money {
        &self.assets[v.0]
    }

    pub fn initial_assets(&self) -> &[Money] {
        &self.assets
    }

    pub fn debts(&self) -> &[Debt] {
        &self.debts
    }

    pub fn debt(&self, e: DebtId) -> &Debt {
        &self.debts[e.0]
    }

    pub fn debt_ids(&self) -> impl Iterator<Item = DebtId> {
        (0..self.debts.len()).map(DebtId)
    }

    /// Looks a debt up by (debtor, creditor, label).
    pub fn find_debt(&self, debtor: NodeId, creditor: NodeId, label: u32) -> Option<DebtId> {
        self.debts
            .binary_search_by_key(&(debtor, creditor, label), |d| {
                (d.debtor, d.creditor, d.label)
            })
            .ok()
            .map(DebtId)
    }

    pub fn out_debts(&self, v: NodeId) -> &[DebtId] {
        &self.out_debts[v.0]
    }

    pub fn in_debts(&self, v: NodeId) -> &[DebtId] {
        &self.in_debts[v.0]
    }

    /// Rebuilds with the same nodes and debts but new initial assets.
    pub fn with_assets(&self, assets: Vec<Money>) -> Result<IdmInstance, ModelError> {
        assert_eq!(assets.len(), self.node_count());
        build_instance(
            self.names.iter().cloned().zip(assets).collect(),
            self.debt_specs(),
        )
    }

    /// Same instance with `bailout` added to the initial assets.
    pub fn with_bailout(&self, bailout: &BailoutVector) -> Result<IdmInstance, ModelError> {
        let assets = self
            .assets
            .iter()
            .zip(bailout.entries())
            .map(|(a, b)| a + b)
            .collect();
        self.with_assets(assets)
    }

    pub fn debt_specs(&self) -> Vec<DebtSpec> {
        self.debts
            .iter()
            .map(|d| DebtSpec {
                debtor: self.names[d.debtor.0].clone(),
                creditor: self.names[d.creditor.0].clone(),
                label: d.label,
                amount: d.terms.amount.clone(),
                t1: d.terms.t1,
                t2: d.terms.t2,
            })
            .collect()
    }

    pub fn node_specs(&self) -> Vec<(String, Money)> {
        self.names.iter().cloned().zip(self.assets.iter().cloned()).collect()
    }

    fn check_node(&self, v: NodeId) -> Result<(), ModelError> {
        if v.0 < self.names.len() {
            Ok(())
        } else {
            Err(ModelError::UnknownNode(format!("#{}", v.0)))
        }
    }

    /// Initial assets plus every incoming amount fall short of the outgoing
    /// total.
    pub fn is_insolvent(&self, v: NodeId) -> Result<bool, ModelError> {
        self.check_node(v)?;
        let incoming: Money = self.in_debts[v.0]
            .iter()
            .map(|e| &self.debts[e.0].terms.amount)
            .sum();
        let outgoing: Money = self.out_debts[v.0]
            .iter()
            .map(|e| &self.debts[e.0].terms.amount)
            .sum();
        Ok(&self.assets[v.0] + incoming < outgoing)
    }

    /// Deficits `out(t2 <= t) - in(t1 <= t) - assets` evaluated at every
    /// extremal time. The deficit is constant between extremal times.
    pub fn prefix_deficits(&self, v: NodeId) -> Result<PrefixDeficits, ModelError> {
        self.check_node(v)?;
        let mut delta: BTreeMap<Time, Money> = BTreeMap::new();
        for e in &self.out_debts[v.0] {
            let t = &self.debts[e.0].terms;
            *delta.entry(t.t2).or_insert_with(Money::zero) += &t.amount;
        }
        for e in &self.in_debts[v.0] {
            let t = &self.debts[e.0].terms;
            *delta.entry(t.t1).or_insert_with(Money::zero) -= &t.amount;
        }
        let mut running = -self.assets[v.0].clone();
        let mut per_time = Vec::new();
        let mut max = Money::zero();
        for t in self.extremal_timestamps() {
            if let Some(d) = delta.get(&t) {
                running += d;
            }
            if running > max {
                max = running.clone();
            }
            per_time.push((t, running.clone()));
        }
        Ok(PrefixDeficits { per_time, max })
    }

    pub fn is_prefix_insolvent(&self, v: NodeId) -> Result<bool, ModelError> {
        Ok(self.prefix_deficits(v)?.max.is_positive())
    }

    pub fn extremal_timestamps(&self) -> BTreeSet<Time> {
        self.debts
            .iter()
            .flat_map(|d| [d.terms.t1, d.terms.t2])
            .collect()
    }

    /// Drops non-extremal times and renumbers the rest to `1..=T'`.
    pub fn compact(&self) -> (IdmInstance, TimeMap) {
        let map = TimeMap {
            old: self.extremal_timestamps().into_iter().collect(),
        };
        let debts = self
            .debt_specs()
            .into_iter()
            .map(|mut d| {
                d.t1 = map.get(d.t1).expect("extremal");
                d.t2 = map.get(d.t2).expect("extremal");
                d
            })
            .collect();
        let inst = build_instance(self.node_specs(), debts).expect("compaction keeps invariants");
        (inst, map)
    }
}

/// Output of [`IdmInstance::prefix_deficits`]. `max` is clipped at zero: it
/// is the least extra initial asset that removes every prefix deficit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixDeficits {
    pub per_time: Vec<(Time, Money)>,
    pub max: Money,
}

/// Order-preserving relabelling of extremal times onto `1..=T'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeMap {
    old: Vec<Time>,
}

impl TimeMap {
    pub fn identity(lifetime: Time) -> Self {
        TimeMap {
            old: (1..=lifetime).collect(),
        }
    }

    /// New time of an extremal old time.
    pub fn get(&self, old: Time) -> Option<Time> {
        self.old.binary_search(&old).ok().map(|i| i as Time + 1)
    }

    /// Where a payment made at an arbitrary old time lands: the slot of the
    /// first extremal time at or after it. Payments strictly between two
    /// extremal times merge into the later one, which preserves validity
    /// and bankrupt sets.
    pub fn forward(&self, old: Time) -> Option<Time> {
        let i = self.old.partition_point(|&x| x < old);
        (i < self.old.len()).then_some(i as Time + 1)
    }

    pub fn backward(&self, new: Time) -> Option<Time> {
        if new == 0 {
            return None;
        }
        self.old.get(new as usize - 1).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Time, Time)> + '_ {
        self.old.iter().enumerate().map(|(i, &t)| (t, i as Time + 1))
    }

    pub fn len(&self) -> usize {
        self.old.len()
    }

    pub fn is_empty(&self) -> bool {
        self.old.is_empty()
    }

    pub fn forward_schedule(&self, s: &Schedule) -> Schedule {
        let mut out = Schedule::new();
        for ((e, t), p) in s.iter() {
            let nt = self.forward(t).expect("payment after the last extremal time");
            out.add(e, nt, p);
        }
        out
    }

    pub fn backward_schedule(&self, s: &Schedule) -> Schedule {
        let mut out = Schedule::new();
        for ((e, t), p) in s.iter() {
            out.add(e, self.backward(t).expect("time in range"), p);
        }
        out
    }
}

/// Sparse payment matrix. Zero entries are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schedule {
    payments: BTreeMap<(DebtId, Time), Money>,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, e: DebtId, t: Time, amount: Money) {
        if amount.is_zero() {
            self.payments.remove(&(e, t));
        } else {
            self.payments.insert((e, t), amount);
        }
    }

    pub fn add(&mut self, e: DebtId, t: Time, amount: &Money) {
        let cur = self.get(e, t) + amount;
        self.set(e, t, cur);
    }

    pub fn get(&self, e: DebtId, t: Time) -> Money {
        self.payments.get(&(e, t)).cloned().unwrap_or_else(Money::zero)
    }

    /// Entries in (debt, time) order.
    pub fn iter(&self) -> impl Iterator<Item = ((DebtId, Time), &Money)> {
        self.payments.iter().map(|(&k, v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.payments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payments.is_empty()
    }

    pub fn total_paid(&self, e: DebtId) -> Money {
        self.payments
            .range((e, 0)..=(e, Time::MAX))
            .map(|(_, p)| p)
            .sum()
    }
}

/// Per-node supplement added to the initial assets at time 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BailoutVector {
    entries: Vec<Money>,
}

impl BailoutVector {
    pub fn zeros(n: usize) -> Self {
        BailoutVector {
            entries: vec![Money::zero(); n],
        }
    }

    pub fn from_entries(entries: Vec<Money>) -> Self {
        BailoutVector { entries }
    }

    pub fn entries(&self) -> &[Money] {
        &self.entries
    }

    pub fn get(&self, v: NodeId) -> &Money {
        &self.entries[v.0]
    }

    pub fn add(&mut self, v: NodeId, amount: &Money) {
        self.entries[v.0] += amount;
    }

    pub fn total(&self) -> Money {
        self.entries.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    fn spec(d: &str, c: &str, label: u32, a: i64, t1: Time, t2: Time) -> DebtSpec {
        DebtSpec {
            debtor: d.into(),
            creditor: c.into(),
            label,
            amount: money(a),
            t1,
            t2,
        }
    }

    fn two_nodes() -> Vec<(String, Money)> {
        vec![("u".into(), money(0)), ("v".into(), money(0))]
    }

    #[test]
    fn three_banks_lifetime() {
        let x = three_banks();
        assert_eq!(x.lifetime(), 6);
        assert_eq!(x.node_count(), 3);
        assert_eq!(x.debt_count(), 4);
    }

    #[test]
    fn empty_instance() {
        let x = build_instance(vec![("a".into(), money(0))], vec![]).unwrap();
        assert_eq!(x.lifetime(), 0);
        assert!(x.extremal_timestamps().is_empty());
    }

    #[test]
    fn build_errors() {
        let gap = vec![spec("u", "v", 0, 1, 1, 1), spec("u", "v", 2, 1, 1, 1)];
        assert!(matches!(
            build_instance(two_nodes(), gap),
            Err(ModelError::NonContiguousLabels { .. })
        ));
        assert_eq!(
            build_instance(vec![("u".into(), money(-1))], vec![]),
            Err(ModelError::NegativeAsset("u".into()))
        );
        assert!(matches!(
            build_instance(two_nodes(), vec![spec("u", "z", 0, 1, 1, 1)]),
            Err(ModelError::UnknownEndpoint(_))
        ));
        assert!(matches!(
            build_instance(two_nodes(), vec![spec("u", "u", 0, 1, 1, 1)]),
            Err(ModelError::SelfLoop(_))
        ));
        assert!(matches!(
            build_instance(two_nodes(), vec![spec("u", "v", 0, 1, 3, 2)]),
            Err(ModelError::BadInterval { t1: 3, t2: 2 })
        ));
        assert!(matches!(
            build_instance(two_nodes(), vec![spec("u", "v", 0, 1, 0, 2)]),
            Err(ModelError::BadInterval { .. })
        ));
        let mut frac = spec("u", "v", 0, 1, 1, 1);
        frac.amount = ratio(1, 2);
        assert!(matches!(
            build_instance(two_nodes(), vec![frac]),
            Err(ModelError::NonIntegralAmount { .. })
        ));
        assert!(matches!(
            build_instance(two_nodes(), vec![spec("u", "v", 0, 0, 1, 1)]),
            Err(ModelError::NonIntegralAmount { .. })
        ));
    }

    #[test]
    fn labels_may_arrive_out_of_order() {
        let debts = vec![spec("u", "v", 1, 2, 1, 1), spec("u", "v", 0, 1, 1, 1)];
        let x = build_instance(two_nodes(), debts).unwrap();
        assert_eq!(x.debt(DebtId(0)).label, 0);
        assert_eq!(x.debt(DebtId(0)).terms.amount, money(1));
    }

    #[test]
    fn money_parsing() {
        assert_eq!(parse_money("5"), Some(money(5)));
        assert_eq!(parse_money("14/6"), Some(ratio(7, 3)));
        assert_eq!(parse_money("-2"), Some(money(-2)));
        assert_eq!(parse_money("1/0"), None);
        assert_eq!(parse_money("1/-2"), None);
        assert_eq!(parse_money("x"), None);
        assert_eq!(parse_money(""), None);
        assert_eq!(format_money(&ratio(14, 6)), "7/3");
        assert_eq!(format_money(&money(5)), "5");
        assert!(is_integral(&ratio(6, 3)));
    }

    #[test]
    fn extremal_times() {
        let want: BTreeSet<Time> = (1..=6).collect();
        assert_eq!(three_banks().extremal_timestamps(), want);
        assert_eq!(relay().extremal_timestamps(), [1, 2].into_iter().collect());
    }

    fn dilate(x: &IdmInstance, k: Time) -> IdmInstance {
        let debts = x
            .debt_specs()
            .into_iter()
            .map(|mut d| {
                d.t1 *= k;
                d.t2 *= k;
                d
            })
            .collect();
        build_instance(x.node_specs(), debts).unwrap()
    }

    #[test]
    fn compact_undoes_dilation() {
        let (c, map) = dilate(&three_banks(), 100).compact();
        assert_eq!(c, three_banks());
        for t in 1..=6 {
            assert_eq!(map.get(100 * t), Some(t));
            assert_eq!(map.backward(t), Some(100 * t));
        }
        let (same, id) = three_banks().compact();
        assert_eq!(same, three_banks());
        assert_eq!(id, TimeMap::identity(6));
    }

    #[test]
    fn compact_single_debt() {
        let x = build_instance(two_nodes(), vec![spec("u", "v", 0, 5, 7, 9)]).unwrap();
        let (c, map) = x.compact();
        assert_eq!(c.debt(DebtId(0)).terms.t1, 1);
        assert_eq!(c.debt(DebtId(0)).terms.t2, 2);
        assert_eq!(map.entries().collect::<Vec<_>>(), vec![(7, 1), (9, 2)]);
        // 8 is not extremal and merges into the slot of 9.
        assert_eq!(map.forward(8), Some(2));
        assert_eq!(map.forward(10), None);
    }

    #[test]
    fn insolvency_on_three_banks() {
        let x = three_banks();
        let [u, v, w] = [0, 1, 2].map(NodeId);
        assert!(x.is_insolvent(u).unwrap());
        assert!(!x.is_insolvent(w).unwrap());
        // 20 + 35 >= 25
        assert!(!x.is_insolvent(v).unwrap());
        assert!(!x.is_prefix_insolvent(v).unwrap());
        assert!(x.is_prefix_insolvent(u).unwrap());
        assert!(x.is_insolvent(NodeId(9)).is_err());
    }

    #[test]
    fn prefix_deficit_before_income() {
        let x = InstanceBuilder::new()
            .node("v", 0)
            .node("a", 10)
            .node("b", 0)
            .debt("v", "b", 5, 1, 1)
            .debt("a", "v", 10, 2, 2)
            .build()
            .unwrap();
        let d = x.prefix_deficits(NodeId(0)).unwrap();
        assert_eq!(d.per_time, vec![(1, money(5)), (2, money(-5))]);
        assert_eq!(d.max, money(5));
    }

    #[test]
    fn three_banks_prefix_deficits_by_hand() {
        // v: assets 20, owes 25 at 2, receives 20 from t=1, 15 from t=4, 25 from t=4.
        let d = three_banks().prefix_deficits(NodeId(1)).unwrap();
        let brute: Vec<(Time, Money)> = (1..=6)
            .map(|t| {
                let out = if t >= 2 { 25 } else { 0 };
                let inc = 20 + if t >= 4 { 40 } else { 0 };
                (t, money(out - inc - 20))
            })
            .collect();
        assert_eq!(d.per_time, brute);
    }

    #[test]
    fn schedule_sparse() {
        let mut s = Schedule::new();
        s.set(DebtId(0), 1, money(2));
        s.add(DebtId(0), 1, &money(-2));
        assert!(s.is_empty());
        s.add(DebtId(1), 2, &money(1));
        s.add(DebtId(1), 3, &ratio(1, 2));
        s.add(DebtId(2), 1, &money(7));
        assert_eq!(s.total_paid(DebtId(1)), ratio(3, 2));
        assert_eq!(s.len(), 3);
    }

    pub(crate) fn arb_instance() -> impl Strategy<Value = IdmInstance> {
        (2usize..6, proptest::collection::vec((0usize..6, 0usize..6, 1i64..5, 1u64..30, 0u64..20), 0..8), proptest::collection::vec(0i64..5, 6))
            .prop_map(|(n, raw, assets)| {
                let mut b = InstanceBuilder::new();
                for (i, a) in assets.iter().take(n).enumerate() {
                    b.node(format!("n{i}"), *a);
                }
                for (d, c, a, t1, len) in raw {
                    let (d, c) = (d % n, c % n);
                    if d != c {
                        b.debt(format!("n{d}"), format!("n{c}"), a, t1, t1 + len);
                    }
                }
                b.build().unwrap()
            })
    }

    proptest! {
        #[test]
        fn compact_is_idempotent(x in arb_instance()) {
            let (c, _) = x.compact();
            prop_assert_eq!(c.lifetime() as usize, x.extremal_timestamps().len());
            let (cc, map) = c.compact();
            prop_assert_eq!(&cc, &c);
            prop_assert_eq!(map, TimeMap::identity(c.lifetime()));
        }

        #[test]
        fn insolvent_implies_prefix_insolvent(x in arb_instance()) {
            for v in x.nodes() {
                if x.is_insolvent(v).unwrap() {
                    prop_assert!(x.is_prefix_insolvent(v).unwrap());
                }
            }
        }

        #[test]
        fn rebuild_is_identity(x in arb_instance()) {
            let y = build_instance(x.node_specs(), x.debt_specs()).unwrap();
            prop_assert_eq!(x, y);
        }
    }
}
