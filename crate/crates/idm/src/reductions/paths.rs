use crate::model::{IdmInstance, InstanceBuilder};

use super::SourcedDigraph;

/// Perfect scheduling with a single euro of initial assets, horizon `2n+1`.
/// Every vertex becomes a three-node gadget the euro must visit once.
pub fn gen_perfsched_hampath(h: &SourcedDigraph) -> IdmInstance {
    let n = h.vertices.len() as u64;
    let big_t = 2 * n + 1;
    let name = |v: usize, part: &str| format!("{}_{part}", h.vertices[v]);
    let mut b = InstanceBuilder::new();
    for v in 0..h.vertices.len() {
        let assets = i64::from(v == h.source);
        b.node(name(v, "L"), assets).node(name(v, "C"), 0).node(name(v, "R"), 0);
    }
    for v in 0..h.vertices.len() {
        let (l, c, r) = (name(v, "L"), name(v, "C"), name(v, "R"));
        for i in 0..n {
            b.debt(&*l, &*c, 1, 2 * i + 1, 2 * i + 1);
            b.debt(&*c, &*r, 1, 2 * i + 2, 2 * i + 2);
        }
        for _ in 1..n {
            b.debt(&*c, &*l, 1, 1, big_t - 1);
            b.debt(&*r, &*c, 1, 1, big_t - 1);
        }
        b.debt(&*r, &*l, 1, big_t, big_t);
    }
    for &(i, j) in &h.edges {
        b.debt(name(i, "R"), name(j, "L"), 1, 1, big_t);
        b.debt(name(j, "L"), name(i, "R"), 1, big_t, big_t);
    }
    b.build().expect("generator produced a malformed instance")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::money;
    use crate::oracle::{oracle_perfect_scheduling, SearchBudget};
    use crate::validity::Variant;

    fn graph(n: usize, edges: &[(usize, usize)]) -> SourcedDigraph {
        let names = (0..n).map(|i| format!("h{i}")).collect();
        SourcedDigraph::new(names, edges.to_vec(), 0).unwrap()
    }

    #[test]
    fn structure() {
        let h = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        let x = gen_perfsched_hampath(&h);
        assert_eq!(x.node_count(), 9);
        assert_eq!(x.lifetime(), 7);
        let total: crate::model::Money = x.initial_assets().iter().sum();
        assert_eq!(total, money(1));
        // 4n-1 gadget debts per vertex plus two per edge
        assert_eq!(x.debt_count(), 3 * 11 + 2 * 3);
    }

    #[test]
    fn tiny_answers() {
        let budget = SearchBudget::default();
        for v in [Variant::PP, Variant::AoN] {
            let lone = gen_perfsched_hampath(&graph(1, &[]));
            assert!(oracle_perfect_scheduling(&lone, v, &budget).unwrap().value);
            let fwd = gen_perfsched_hampath(&graph(2, &[(0, 1)]));
            assert!(oracle_perfect_scheduling(&fwd, v, &budget).unwrap().value);
            let back = gen_perfsched_hampath(&graph(2, &[(1, 0)]));
            let ans = oracle_perfect_scheduling(&back, v, &budget).unwrap();
            assert!(ans.exhausted && !ans.value);
        }
    }
}
