//! Shape classification and the two polynomial bailout algorithms: exact due
//! dates (any variant) and partial payments on out-trees.

mod out_tree;

pub use out_tree::{pp_bailout_min_out_tree, OutTreeSolution, Rewrite};

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::model::{BailoutVector, IdmInstance, Money, Schedule};
use crate::validity::{derive_cash, validate, Variant};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("some debt has t1 < t2; the exact-due algorithm needs t1 = t2 everywhere")]
    NotExactDue,
    #[error("instance is not an out-tree")]
    NotOutTree,
    #[error("reconstructed witness failed validation: {0}")]
    WitnessRejected(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ShapeClass {
    pub is_multiditree: bool,
    pub is_dag: bool,
    pub is_out_tree: bool,
    pub is_out_path: bool,
    pub all_exact_due: bool,
}

/// Computes shape flags. The footprint forgets orientation and collapses
/// parallel edges; an instance whose footprint is a tree (connected, one
/// edge fewer than nodes) is a multiditree.
pub fn classify_shape(x: &IdmInstance) -> ShapeClass {
    let n = x.node_count();
    let arcs: BTreeSet<(usize, usize)> = x.debts().iter().map(|d| (d.debtor.0, d.creditor.0)).collect();
    let footprint: BTreeSet<(usize, usize)> = arcs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    let mut components = n;
    for &(a, b) in &footprint {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            components -= 1;
        }
    }
    let is_multiditree = n >= 1 && components == 1 && footprint.len() == n - 1;

    // Kahn's algorithm on distinct arcs.
    let mut indeg = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for &(a, b) in &arcs {
        indeg[b] += 1;
        succ[a].push(b);
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    let mut deg = indeg.clone();
    while let Some(v) = stack.pop() {
        seen += 1;
        for &w in &succ[v] {
            deg[w] -= 1;
            if deg[w] == 0 {
                stack.push(w);
            }
        }
    }
    let is_dag = seen == n;

    let is_out_tree = is_multiditree && is_dag && indeg.iter().all(|&d| d <= 1);
    let mut fdeg = vec![0usize; n];
    for &(a, b) in &footprint {
        fdeg[a] += 1;
        fdeg[b] += 1;
    }
    let is_out_path = is_out_tree
        && fdeg.iter().all(|&d| d <= 2)
        && (0..n).filter(|&v| indeg[v] == 0).all(|r| fdeg[r] <= 1);
    let all_exact_due = x.debts().iter().all(|d| d.terms.is_exact_due());
    ShapeClass {
        is_multiditree,
        is_dag,
        is_out_tree,
        is_out_path,
        all_exact_due,
    }
}

/// Bailout minimization when every debt is due at a single time. Paying every
/// debt in full on its due date is forced, so each node needs exactly the
/// depth of its lowest cash point.
pub fn exact_due_bailout_min(
    x: &IdmInstance,
    variant: Variant,
) -> Result<(Money, BailoutVector, Schedule), TreeError> {
    if !classify_shape(x).all_exact_due {
        return Err(TreeError::NotExactDue);
    }
    let mut s = Schedule::new();
    for e in x.debt_ids() {
        let d = x.debt(e);
        s.set(e, d.terms.t1, d.terms.amount.clone());
    }
    let cash = derive_cash(x, &s, None).expect("schedule built in range");
    let bailout = BailoutVector::from_entries(
        x.nodes()
            .map(|v| {
                let low = cash.min_cash(v);
                if low.is_negative() {
                    -low.clone()
                } else {
                    Money::zero()
                }
            })
            .collect(),
    );
    let report = validate(x, &s, variant, Some(&bailout));
    if !(report.valid && report.perfect) {
        return Err(TreeError::WitnessRejected(format!("{:?}", report.violations)));
    }
    Ok((bailout.total(), bailout, s))
}
