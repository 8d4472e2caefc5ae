use crate::model::{IdmInstance, InstanceBuilder};

use super::Sat3Formula;

fn lit_name(l: i32) -> String {
    if l > 0 {
        format!("x{l}")
    } else {
        format!("nx{}", -l)
    }
}

fn built(b: &InstanceBuilder) -> IdmInstance {
    b.build().expect("generator produced a malformed instance")
}

/// Bankruptcy minimisation with every debt due at time 1. Returns the
/// instance and the threshold `2n`.
pub fn gen_bankmin_3sat3(phi: &Sat3Formula) -> (IdmInstance, usize) {
    let n = phi.vars();
    let mut b = InstanceBuilder::new();
    for i in 1..=n as i32 {
        b.node(format!("s{i}"), 3);
        b.node(lit_name(i), 0);
        b.node(lit_name(-i), 0);
    }
    for j in 1..=phi.num_clauses() {
        b.node(format!("q{j}"), 0);
    }
    b.node("d", 0);
    for i in 1..=n as i32 {
        b.debt(format!("s{i}"), lit_name(i), 3, 1, 1);
        b.debt(format!("s{i}"), lit_name(-i), 3, 1, 1);
        b.debt(lit_name(i), "d", phi.count(-i) as i64, 1, 1);
        b.debt(lit_name(-i), "d", phi.count(i) as i64, 1, 1);
    }
    for (j, c) in phi.clauses().iter().enumerate() {
        for &l in c {
            b.debt(lit_name(l), format!("q{}", j + 1), 1, 1, 1);
        }
        b.debt(format!("q{}", j + 1), "d", 1, 1, 1);
    }
    (built(&b), 2 * n)
}

/// Adds one doubling gadget named `tag` between `input` and `output`.
/// `input` owes 1@[1,3] into it and its m0 owes 2@[1,3] out.
pub fn multiplier_gadget(b: &mut InstanceBuilder, tag: &str, input: &str, output: &str) {
    let m = |k: &str| format!("{tag}_{k}");
    b.node(m("m0"), 2)
        .node(m("m1"), 0)
        .node(m("m2"), 0)
        .node(m("m3"), 0)
        .node(m("s"), 2);
    b.debt(input, m("m1"), 1, 1, 3)
        .debt(m("s"), m("m0"), 2, 3, 3)
        .debt(m("m0"), output, 2, 1, 3)
        .debt(m("m0"), m("m1"), 1, 2, 3)
        .debt(m("m0"), m("m2"), 1, 1, 3)
        .debt(m("m1"), m("m2"), 1, 1, 2)
        .debt(m("m2"), m("m3"), 1, 1, 1);
}

/// Perfect scheduling on a DAG with horizon 3.
pub fn gen_perfsched_dag_3sat3(phi: &Sat3Formula) -> IdmInstance {
    let mut b = InstanceBuilder::new();
    for i in 1..=phi.vars() as i32 {
        b.node(format!("s{i}"), 1)
            .node(format!("a{i}"), 1)
            .node(lit_name(i), 0)
            .node(lit_name(-i), 0);
        b.debt(format!("s{i}"), format!("a{i}"), 1, 3, 3);
        multiplier_gadget(&mut b, &format!("T{i}"), &format!("a{i}"), &lit_name(i));
        multiplier_gadget(&mut b, &format!("F{i}"), &format!("a{i}"), &lit_name(-i));
    }
    for (j, c) in phi.clauses().iter().enumerate() {
        let q = format!("q{}", j + 1);
        b.node(q.clone(), 0);
        for &l in c {
            b.debt(lit_name(l), q.clone(), 1, 1, 3);
        }
        b.debt(q, "d", 1, 1, 1);
    }
    b.node("d", 0);
    built(&b)
}

/// Perfect scheduling on a multiditree with unit debts and horizon `10n-1`.
pub fn gen_perfsched_multiditree_3sat3(phi: &Sat3Formula) -> IdmInstance {
    let n = phi.vars() as u64;
    let big_t = 10 * n - 1;
    let mut b = InstanceBuilder::new();
    b.node("r", 0);
    for i in 1..=n {
        let o = 10 * (i - 1);
        let (u, y, w) = (format!("u{i}"), format!("y{i}"), format!("w{i}"));
        b.node(u.clone(), 1).node(y.clone(), 0).node(w.clone(), 0);
        b.debt(&*u, &*y, 1, o + 1, o + 1)
            .debt(&*u, &*y, 1, o + 6, o + 6)
            .debt(&*y, &*u, 1, o + 4, o + 4)
            .debt(&*y, &*u, 1, o + 9, o + 9)
            .debt(&*y, &*w, 1, o + 1, o + 9)
            .debt(&*w, &*y, 1, o + 1, o + 9)
            .debt("r", &*w, 1, o + 1, o + 9)
            .debt(&*w, "r", 1, o + 1, o + 9);
    }
    for (j, c) in phi.clauses().iter().enumerate() {
        let j1 = j + 1;
        let (a, bb, d, e) = (format!("a{j1}"), format!("b{j1}"), format!("d{j1}"), format!("e{j1}"));
        b.node(a.clone(), 0).node(bb.clone(), 1).node(d.clone(), 0).node(e.clone(), 0);
        b.debt("r", &*e, 1, 1, big_t).debt(&*e, "r", 1, 1, big_t);
        for _ in 1..c.len() {
            b.debt(&*a, &*e, 1, 1, big_t).debt(&*e, &*a, 1, 1, big_t);
        }
        for &l in c {
            let i = l.unsigned_abs() as u64;
            let rank = phi.appearances(l).iter().position(|&k| k == j).expect("literal in clause") as u64;
            let base = 10 * (i - 1) + if l > 0 { 1 } else { 6 } + 2 * rank;
            b.debt(&*bb, &*a, 1, base, base)
                .debt(&*e, &*d, 1, base, base)
                .debt(&*a, &*bb, 1, base + 1, base + 1)
                .debt(&*d, &*e, 1, base + 1, base + 1);
        }
    }
    built(&b)
}

/// Bankruptcy maximisation with horizon 2. Each literal feeds its own chain
/// of `m+1` nodes. Returns the instance and the threshold `2n + n(m+1) + m`.
pub fn gen_bankmax_3sat3(phi: &Sat3Formula) -> (IdmInstance, usize) {
    let n = phi.vars();
    let m = phi.num_clauses();
    let mut b = InstanceBuilder::new();
    b.node("d", 0);
    for i in 1..=n as i32 {
        b.node(format!("s{i}"), 3);
        for l in [i, -i] {
            let lit = lit_name(l);
            b.node(lit.clone(), 0);
            b.debt(format!("s{i}"), lit.clone(), 3, 1, 1);
            let chain = |k: usize| format!("{lit}_c{k}");
            for k in 1..=m + 1 {
                b.node(chain(k), 0);
            }
            b.debt(lit.clone(), chain(1), 1, 1, 1);
            for k in 1..=m {
                b.debt(chain(k), chain(k + 1), 1, 1, 1);
            }
            b.debt(chain(m + 1), "d", 1, 1, 1);
        }
    }
    for (j, c) in phi.clauses().iter().enumerate() {
        let q = format!("q{}", j + 1);
        b.node(q.clone(), 0);
        for &l in c {
            b.debt(lit_name(-l), q.clone(), 1, 2, 2);
        }
        b.debt(q, "d", c.len() as i64, 2, 2);
    }
    (built(&b), 2 * n + n * (m + 1) + m)
}
