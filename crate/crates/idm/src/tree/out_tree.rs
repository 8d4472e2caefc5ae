//! Partial-payment bailout minimization on out-trees by local rewriting.
//!
//! Debts are held as bundles of unit debts with a multiplicity, so every
//! step runs on counts. Each rewrite that retires unit debts also records
//! when they are paid in the original instance; the union of those records
//! is the witness schedule.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{classify_shape, TreeError};
use crate::model::{BailoutVector, DebtId, IdmInstance, Money, NodeId, Schedule, Time};
use crate::validity::{validate, Variant};

/// Prefix for leaves created during rewriting.
pub const FRESH_PREFIX: &str = "~leaf";

/// `mult` parallel unit debts `1@[t1,t2]` from a node's parent to the node,
/// all originating from the same debt of the input.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Bundle {
    t1: Time,
    t2: Time,
    mult: BigInt,
    origin: DebtId,
}

#[derive(Clone, Debug)]
struct WorkNode {
    name: String,
    original: Option<NodeId>,
    parent: Option<usize>,
    children: Vec<usize>,
    assets: BigInt,
    /// Unit debts owed to this node by its parent.
    bundles: Vec<Bundle>,
    alive: bool,
}

/// One step of the rewriting procedure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rewrite {
    Split { debt: DebtId, units: BigInt },
    Repair { node: String, amount: BigInt },
    Snap { leaf: String, t1: Time, t2: Time, units: BigInt },
    Merge { into: String, from: String },
    Spend { node: String, due: Time, units: BigInt },
    Drop { leaf: String },
    Reroute { case: char, node: String, fresh: String, t1: Time, t2: Time, due: Time, units: BigInt },
    Shortfall { node: String, units: BigInt },
}

impl fmt::Display for Rewrite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rewrite::Split { debt, units } => write!(f, "split debt#{} into {units} units", debt.0),
            Rewrite::Repair { node, amount } => write!(f, "repair {node} +{amount}"),
            Rewrite::Snap { leaf, t1, t2, units } => {
                write!(f, "snap {units}x1@[{t1},{t2}] into {leaf} to 1@{t2}")
            }
            Rewrite::Merge { into, from } => write!(f, "merge leaf {from} into {into}"),
            Rewrite::Spend { node, due, units } => write!(f, "spend {node} pays {units} units due {due}"),
            Rewrite::Drop { leaf } => write!(f, "drop leaf {leaf}"),
            Rewrite::Reroute { case, node, fresh, t1, t2, due, units } => write!(
                f,
                "case-{case} reroute {units} parent units of {node} to {fresh} as 1@[{t1},{t2}], cancel units due {due}"
            ),
            Rewrite::Shortfall { node, units } => write!(f, "shortfall {node} +{units}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OutTreeSolution {
    pub total: Money,
    pub bailout: BailoutVector,
    pub schedule: Schedule,
    pub audit: Vec<Rewrite>,
}

impl OutTreeSolution {
    /// The audit trail, one rewrite per line.
    pub fn audit_log(&self) -> String {
        self.audit.iter().map(|r| format!("{r}\n")).collect()
    }
}

struct Solver {
    nodes: Vec<WorkNode>,
    charges: Vec<BigInt>,
    payments: Vec<(DebtId, Time, BigInt)>,
    audit: Vec<Rewrite>,
    fresh: usize,
}

fn to_int(m: &Money) -> BigInt {
    debug_assert!(m.is_integer());
    m.to_integer()
}

impl Solver {
    fn new(x: &IdmInstance) -> Self {
        let mut nodes: Vec<WorkNode> = x
            .nodes()
            .map(|v| WorkNode {
                name: x.node_name(v).to_string(),
                original: Some(v),
                parent: None,
                children: Vec::new(),
                assets: to_int(x.assets(v)),
                bundles: Vec::new(),
                alive: true,
            })
            .collect();
        let mut audit = Vec::new();
        for e in x.debt_ids() {
            let d = x.debt(e);
            let (u, v) = (d.debtor.0, d.creditor.0);
            if nodes[v].parent.is_none() {
                nodes[v].parent = Some(u);
                nodes[u].children.push(v);
            }
            let units = to_int(&d.terms.amount);
            audit.push(Rewrite::Split { debt: e, units: units.clone() });
            nodes[v].bundles.push(Bundle {
                t1: d.terms.t1,
                t2: d.terms.t2,
                mult: units,
                origin: e,
            });
        }
        Solver {
            nodes,
            charges: vec![BigInt::zero(); x.node_count()],
            payments: Vec::new(),
            audit,
            fresh: 0,
        }
    }

    fn charge(&mut self, v: usize, amount: &BigInt) {
        self.nodes[v].assets += amount;
        let orig = self.nodes[v].original.expect("only original nodes have out-debts");
        self.charges[orig.0] += amount;
    }

    fn pay(&mut self, origin: DebtId, t: Time, units: &BigInt) {
        self.payments.push((origin, t, units.clone()));
    }

    /// Largest `out(t2 <= t) - in(t1 <= t) - assets` over t, clipped at 0.
    fn prefix_deficit(&self, v: usize) -> BigInt {
        let mut delta: BTreeMap<Time, BigInt> = BTreeMap::new();
        for &c in &self.nodes[v].children {
            for b in &self.nodes[c].bundles {
                *delta.entry(b.t2).or_default() += &b.mult;
            }
        }
        for b in &self.nodes[v].bundles {
            *delta.entry(b.t1).or_default() -= &b.mult;
        }
        let mut running = -self.nodes[v].assets.clone();
        let mut worst = BigInt::zero();
        for d in delta.values() {
            running += d;
            if running > worst {
                worst = running.clone();
            }
        }
        worst
    }

    fn repair_all(&mut self) {
        for v in 0..self.nodes.len() {
            if !self.nodes[v].alive || self.nodes[v].children.is_empty() {
                continue;
            }
            let d = self.prefix_deficit(v);
            if d.is_positive() {
                self.charge(v, &d);
                self.audit.push(Rewrite::Repair {
                    node: self.nodes[v].name.clone(),
                    amount: d,
                });
            }
        }
    }

    fn is_leaf(&self, v: usize) -> bool {
        self.nodes[v].alive && self.nodes[v].children.is_empty()
    }

    fn snap_leaves(&mut self) {
        for w in 0..self.nodes.len() {
            if !self.is_leaf(w) {
                continue;
            }
            let name = self.nodes[w].name.clone();
            for i in 0..self.nodes[w].bundles.len() {
                let b = &mut self.nodes[w].bundles[i];
                if b.t1 != b.t2 {
                    let entry = Rewrite::Snap {
                        leaf: name.clone(),
                        t1: b.t1,
                        t2: b.t2,
                        units: b.mult.clone(),
                    };
                    b.t1 = b.t2;
                    self.audit.push(entry);
                }
            }
        }
    }

    fn remove_child(&mut self, parent: usize, child: usize) {
        self.nodes[parent].children.retain(|&c| c != child);
        self.nodes[child].alive = false;
    }

    /// Drops leaves that are owed nothing and merges sibling leaves.
    fn tidy_leaves(&mut self) {
        for w in 0..self.nodes.len() {
            if self.is_leaf(w) && self.nodes[w].bundles.is_empty() {
                if let Some(p) = self.nodes[w].parent {
                    self.audit.push(Rewrite::Drop {
                        leaf: self.nodes[w].name.clone(),
                    });
                    self.remove_child(p, w);
                }
            }
        }
        for v in 0..self.nodes.len() {
            if !self.nodes[v].alive {
                continue;
            }
            let leaves: Vec<usize> = self.nodes[v]
                .children
                .iter()
                .copied()
                .filter(|&c| self.is_leaf(c))
                .collect();
            if let Some((&keep, rest)) = leaves.split_first() {
                for &w in rest {
                    let moved = std::mem::take(&mut self.nodes[w].bundles);
                    self.nodes[keep].bundles.extend(moved);
                    self.audit.push(Rewrite::Merge {
                        into: self.nodes[keep].name.clone(),
                        from: self.nodes[w].name.clone(),
                    });
                    self.remove_child(v, w);
                }
            }
        }
    }

    fn root(&self) -> usize {
        (0..self.nodes.len())
            .find(|&v| self.nodes[v].alive && self.nodes[v].parent.is_none())
            .expect("tree has a root")
    }

    /// Deepest live leaf, ties broken by lowest index.
    fn deepest_leaf(&self) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        let mut stack = vec![(self.root(), 0usize)];
        while let Some((v, depth)) = stack.pop() {
            if self.nodes[v].children.is_empty() && self.nodes[v].parent.is_some() {
                let better = match best {
                    None => true,
                    Some((bd, bv)) => depth > bd || (depth == bd && v < bv),
                };
                if better {
                    best = Some((depth, v));
                }
            }
            for &c in &self.nodes[v].children {
                stack.push((c, depth + 1));
            }
        }
        best.map(|(_, v)| v)
    }

    fn fresh_leaf(&mut self, parent: usize, bundle: Bundle) -> String {
        self.fresh += 1;
        let name = format!("{FRESH_PREFIX}{}", self.fresh);
        self.nodes.push(WorkNode {
            name: name.clone(),
            original: None,
            parent: Some(parent),
            children: Vec::new(),
            assets: BigInt::zero(),
            bundles: vec![bundle],
            alive: true,
        });
        let id = self.nodes.len() - 1;
        self.nodes[parent].children.push(id);
        name
    }

    /// Index of the earliest-due bundle of leaf `w` (ties by origin).
    fn earliest(&self, w: usize) -> usize {
        let bs = &self.nodes[w].bundles;
        (0..bs.len())
            .min_by_key(|&i| (bs[i].t2, bs[i].origin))
            .expect("non-empty")
    }

    /// Retires `units` units of bundle `i` owed to `w`, paid at its due time.
    fn retire(&mut self, w: usize, i: usize, units: &BigInt) -> Time {
        let b = &mut self.nodes[w].bundles[i];
        b.mult -= units;
        let (origin, due) = (b.origin, b.t2);
        if b.mult.is_zero() {
            self.nodes[w].bundles.remove(i);
        }
        self.pay(origin, due, units);
        due
    }

    fn take_from_parent(&mut self, v: usize, i: usize, units: &BigInt) -> Bundle {
        let b = &mut self.nodes[v].bundles[i];
        b.mult -= units;
        let moved = Bundle {
            mult: units.clone(),
            ..b.clone()
        };
        if b.mult.is_zero() {
            self.nodes[v].bundles.remove(i);
        }
        moved
    }

    /// One pass of the chain step for leaf `w`. Returns false when done.
    fn step(&mut self) -> bool {
        self.repair_all();
        self.snap_leaves();
        self.tidy_leaves();
        let Some(w) = self.deepest_leaf() else {
            return false;
        };
        let v = self.nodes[w].parent.expect("leaf has a parent");
        assert_eq!(self.nodes[v].children, vec![w], "deepest leaf must be an only child after merging");

        // Spend v's own assets on the earliest-due units.
        while self.nodes[v].assets.is_positive() && !self.nodes[w].bundles.is_empty() {
            let i = self.earliest(w);
            let q = self.nodes[w].bundles[i].mult.clone().min(self.nodes[v].assets.clone());
            self.nodes[v].assets -= &q;
            let due = self.retire(w, i, &q);
            self.audit.push(Rewrite::Spend {
                node: self.nodes[v].name.clone(),
                due,
                units: q,
            });
        }
        if self.nodes[w].bundles.is_empty() {
            return true;
        }
        assert!(
            self.nodes[v].parent.is_some(),
            "repaired root must cover all of its debts"
        );
        let u = self.nodes[v].parent.expect("checked");
        let i_w = self.earliest(w);
        let t_due = self.nodes[w].bundles[i_w].t2;

        // Case (a): some parent unit is due no later than t'.
        let parent_bs = &self.nodes[v].bundles;
        let case_a = (0..parent_bs.len())
            .filter(|&i| parent_bs[i].t2 <= t_due)
            .min_by_key(|&i| (parent_bs[i].t2, parent_bs[i].t1, parent_bs[i].origin));
        if let Some(i_v) = case_a {
            let q = self.nodes[v].bundles[i_v].mult.clone().min(self.nodes[w].bundles[i_w].mult.clone());
            let moved = self.take_from_parent(v, i_v, &q);
            let (t1, t2) = (moved.t1, moved.t2);
            self.retire(w, i_w, &q);
            let fresh = self.fresh_leaf(u, moved);
            self.audit.push(Rewrite::Reroute {
                case: 'a',
                node: self.nodes[v].name.clone(),
                fresh,
                t1,
                t2,
                due: t_due,
                units: q,
            });
            return true;
        }

        // Case (b): every parent unit ends after t'. First the counting check.
        let mut due_counts: BTreeMap<Time, BigInt> = BTreeMap::new();
        for b in &self.nodes[w].bundles {
            *due_counts.entry(b.t2).or_default() += &b.mult;
        }
        let mut shortfall = BigInt::zero();
        let mut owed = BigInt::zero();
        for (&t, c) in &due_counts {
            owed += c;
            let available: BigInt = self.nodes[v]
                .bundles
                .iter()
                .filter(|b| b.t1 <= t)
                .map(|b| b.mult.clone())
                .sum();
            let gap = &owed - available;
            if gap > shortfall {
                shortfall = gap;
            }
        }
        if shortfall.is_positive() {
            self.charge(v, &shortfall);
            self.audit.push(Rewrite::Shortfall {
                node: self.nodes[v].name.clone(),
                units: shortfall,
            });
            // The extra assets retire the earliest units on the next pass.
            return true;
        }
        let parent_bs = &self.nodes[v].bundles;
        let straddle = (0..parent_bs.len())
            .filter(|&i| parent_bs[i].t1 <= t_due)
            .min_by_key(|&i| (parent_bs[i].t2, parent_bs[i].t1, parent_bs[i].origin));
        let i_v = straddle.expect("no parent debt can start by the earliest due time; prefix repair excludes this");
        let q = self.nodes[v].bundles[i_v].mult.clone().min(self.nodes[w].bundles[i_w].mult.clone());
        let mut moved = self.take_from_parent(v, i_v, &q);
        moved.t1 = t_due;
        moved.t2 = t_due;
        self.retire(w, i_w, &q);
        let fresh = self.fresh_leaf(u, moved);
        self.audit.push(Rewrite::Reroute {
            case: 'b',
            node: self.nodes[v].name.clone(),
            fresh,
            t1: t_due,
            t2: t_due,
            due: t_due,
            units: q,
        });
        true
    }
}

/// Minimum total bailout admitting a perfect partial-payment schedule on an
/// out-tree. Only the total is canonical; the returned vector is one
/// optimal allocation.
pub fn pp_bailout_min_out_tree(x: &IdmInstance) -> Result<OutTreeSolution, TreeError> {
    if !classify_shape(x).is_out_tree {
        return Err(TreeError::NotOutTree);
    }
    let mut solver = Solver::new(x);
    while solver.step() {}

    let mut schedule = Schedule::new();
    for (e, t, q) in &solver.payments {
        schedule.add(*e, *t, &BigRational::from_integer(q.clone()));
    }
    let bailout = BailoutVector::from_entries(
        solver
            .charges
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect(),
    );
    let report = validate(x, &schedule, Variant::PP, Some(&bailout));
    if !(report.valid && report.perfect) {
        return Err(TreeError::WitnessRejected(format!(
            "valid={} perfect={} {:?}",
            report.valid, report.perfect, report.violations
        )));
    }
    Ok(OutTreeSolution {
        total: bailout.total(),
        bailout,
        schedule,
        audit: solver.audit,
    })
}
