//! Random instance generators and small fixtures shared by the
//! integration tests.
#![allow(dead_code)]

use idm::{IdmInstance, InstanceBuilder};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Three banks, four debts, lifetime 6.
pub fn three_banks() -> IdmInstance {
    InstanceBuilder::new()
        .node("u", 30)
        .node("v", 20)
        .node("w", 10)
        .debt("u", "v", 20, 1, 3)
        .debt("u", "v", 15, 4, 5)
        .debt("v", "w", 25, 2, 2)
        .debt("w", "v", 25, 4, 6)
        .build()
        .unwrap()
}

/// u pays v 1@[1,2], v pays w 1@1, only u holds cash.
pub fn relay() -> IdmInstance {
    InstanceBuilder::new()
        .node("u", 1)
        .node("v", 0)
        .node("w", 0)
        .debt("u", "v", 1, 1, 2)
        .debt("v", "w", 1, 1, 1)
        .build()
        .unwrap()
}

/// Four-node cycle u->v->w->x->u, every debt 1@[1,2].
pub fn cycle(assets: [i64; 4]) -> IdmInstance {
    let names = ["u", "v", "w", "x"];
    let mut b = InstanceBuilder::new();
    for (n, a) in names.iter().zip(assets) {
        b.node(*n, a);
    }
    for i in 0..4 {
        b.debt(names[i], names[(i + 1) % 4], 1, 1, 2);
    }
    b.build().unwrap()
}

pub struct Limits {
    pub nodes: usize,
    pub debts: usize,
    pub amount: i64,
    pub lifetime: u64,
    pub assets: i64,
    pub exact_due: bool,
}

/// Any digraph without self-loops; node and debt counts drawn from 2..=nodes
/// and 1..=debts.
pub fn random_instance(r: &mut StdRng, l: &Limits) -> IdmInstance {
    let n = r.gen_range(2..=l.nodes);
    let m = r.gen_range(1..=l.debts);
    let mut b = InstanceBuilder::new();
    for i in 0..n {
        b.node(format!("n{i}"), r.gen_range(0..=l.assets));
    }
    for _ in 0..m {
        let d = r.gen_range(0..n);
        let c = (d + r.gen_range(1..n)) % n;
        let t2 = r.gen_range(1..=l.lifetime);
        let t1 = if l.exact_due { t2 } else { r.gen_range(1..=t2) };
        b.debt(format!("n{d}"), format!("n{c}"), r.gen_range(1..=l.amount), t1, t2);
    }
    b.build().unwrap()
}

/// Out-tree rooted at n0: every node but the root has one parent, all debts
/// point from parent to child, parallel debts allowed.
pub fn random_out_tree(r: &mut StdRng, l: &Limits) -> IdmInstance {
    let m = r.gen_range(1..=l.debts);
    let n = r.gen_range(2..=l.nodes.min(m + 1));
    let mut b = InstanceBuilder::new();
    for i in 0..n {
        b.node(format!("n{i}"), r.gen_range(0..=l.assets));
    }
    let edges: Vec<(usize, usize)> = (1..n).map(|c| (r.gen_range(0..c), c)).collect();
    for k in 0..m {
        let (p, c) = if k < edges.len() { edges[k] } else { edges[r.gen_range(0..edges.len())] };
        let t2 = r.gen_range(1..=l.lifetime);
        let t1 = if l.exact_due { t2 } else { r.gen_range(1..=t2) };
        b.debt(format!("n{p}"), format!("n{c}"), r.gen_range(1..=l.amount), t1, t2);
    }
    b.build().unwrap()
}

/// Same debts with every timestamp sent through a strictly increasing map
/// whose gaps are drawn from 1..=max_gap.
pub fn dilate(x: &IdmInstance, r: &mut StdRng, max_gap: u64) -> IdmInstance {
    let mut map = vec![0u64];
    for _ in 0..x.lifetime() {
        let last = *map.last().unwrap();
        map.push(last + r.gen_range(1..=max_gap));
    }
    let specs = x
        .debt_specs()
        .into_iter()
        .map(|mut d| {
            d.t1 = map[d.t1 as usize];
            d.t2 = map[d.t2 as usize];
            d
        })
        .collect();
    idm::build_instance(x.node_specs(), specs).unwrap()
}
