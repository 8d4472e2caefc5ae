//! Instance generators built from classic NP-complete problems, plus the
//! brute-force deciders used to check them at toy scale.

mod numbers;
mod paths;
mod sat;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use numbers::{
    gen_aon_bankmax_subset_sum, gen_aon_perfsched_3partition, gen_aon_perfsched_partition,
    gen_bankmin_fixed32_ecp,
};
pub use paths::gen_perfsched_hampath;
pub use sat::{
    gen_bankmax_3sat3, gen_bankmin_3sat3, gen_perfsched_dag_3sat3, gen_perfsched_multiditree_3sat3,
    multiplier_gadget,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("malformed formula: {0}")]
    MalformedFormula(String),
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("values sum to an odd number")]
    OddSum,
}

/// CNF formula where every variable occurs exactly three times, each
/// polarity at least once, clauses have at most three literals and no
/// clause mentions a variable twice. Literals are DIMACS-style integers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sat3Formula {
    vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl Sat3Formula {
    pub fn new(vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self, ReductionError> {
        let bad = |msg: String| Err(ReductionError::MalformedFormula(msg));
        if vars == 0 {
            return bad("no variables".into());
        }
        let mut pos = vec![0usize; vars + 1];
        let mut neg = vec![0usize; vars + 1];
        for (j, c) in clauses.iter().enumerate() {
            if c.is_empty() || c.len() > 3 {
                return bad(format!("clause {} has {} literals", j + 1, c.len()));
            }
            let mut seen = BTreeSet::new();
            for &l in c {
                let v = l.unsigned_abs() as usize;
                if l == 0 || v > vars {
                    return bad(format!("literal {l} out of range"));
                }
                if !seen.insert(v) {
                    return bad(format!("clause {} mentions variable {v} twice", j + 1));
                }
                if l > 0 {
                    pos[v] += 1;
                } else {
                    neg[v] += 1;
                }
            }
        }
        for v in 1..=vars {
            if pos[v] + neg[v] != 3 || pos[v] == 0 || neg[v] == 0 {
                return bad(format!(
                    "variable {v} occurs {} times positively and {} negatively",
                    pos[v], neg[v]
                ));
            }
        }
        Ok(Sat3Formula { vars, clauses })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Occurrences of literal `l` across all clauses.
    pub fn count(&self, l: i32) -> usize {
        self.clauses.iter().filter(|c| c.contains(&l)).count()
    }

    /// Clause indices containing `l`, in order: first appearance first.
    pub fn appearances(&self, l: i32) -> Vec<usize> {
        (0..self.clauses.len()).filter(|&j| self.clauses[j].contains(&l)).collect()
    }

    /// Literals sorted inside clauses, clauses sorted.
    pub fn canonical(&self) -> Self {
        let mut clauses: Vec<Vec<i32>> = self
            .clauses
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.sort_by_key(|&l| (l.abs(), l < 0));
                c
            })
            .collect();
        clauses.sort();
        Sat3Formula {
            vars: self.vars,
            clauses,
        }
    }

    /// `assignment[v-1]` is the value of variable v.
    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter()
                .any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0))
        })
    }

    /// Exhaustive search over all assignments.
    pub fn satisfying_assignment(&self) -> Option<Vec<bool>> {
        (0u64..1 << self.vars)
            .map(|bits| (0..self.vars).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
            .find(|a| self.is_satisfied_by(a))
    }

    pub fn is_satisfiable(&self) -> bool {
        self.satisfying_assignment().is_some()
    }

    /// Every valid formula over `vars` variables, one per clause multiset.
    pub fn enumerate(vars: usize) -> Vec<Self> {
        let mut candidates = Vec::new();
        let mut signs = vec![0i32; vars];
        loop {
            let clause: Vec<i32> = (0..vars)
                .filter(|&i| signs[i] != 0)
                .map(|i| signs[i] * (i as i32 + 1))
                .collect();
            if !clause.is_empty() && clause.len() <= 3 {
                candidates.push(clause);
            }
            // odometer over {0, 1, -1}^vars
            let mut i = 0;
            loop {
                if i == vars {
                    candidates.sort();
                    let mut out = Vec::new();
                    let mut pick = Vec::new();
                    pick_clauses(vars, &candidates, 0, &mut vec![(0, 0); vars], &mut pick, &mut out);
                    return out;
                }
                signs[i] = match signs[i] {
                    0 => 1,
                    1 => -1,
                    _ => 0,
                };
                if signs[i] != 0 {
                    break;
                }
                i += 1;
            }
        }
    }

    /// DIMACS text: `p cnf <vars> <clauses>` then one zero-terminated clause
    /// per line.
    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                s.push_str(&format!("{l} "));
            }
            s.push_str("0\n");
        }
        s
    }

    pub fn from_dimacs(text: &str) -> Result<Self, ReductionError> {
        let bad = |m: String| ReductionError::MalformedFormula(m);
        let mut vars = None;
        let mut clauses = Vec::new();
        let mut cur = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 || parts[0] != "cnf" {
                    return Err(bad(format!("bad header: {line}")));
                }
                vars = Some(parts[1].parse::<usize>().map_err(|e| bad(e.to_string()))?);
                continue;
            }
            for tok in line.split_whitespace() {
                let l: i32 = tok.parse().map_err(|_| bad(format!("bad literal {tok}")))?;
                if l == 0 {
                    clauses.push(std::mem::take(&mut cur));
                } else {
                    cur.push(l);
                }
            }
        }
        if !cur.is_empty() {
            return Err(bad("last clause is not terminated by 0".into()));
        }
        let vars = vars.ok_or_else(|| bad("missing `p cnf` header".into()))?;
        Sat3Formula::new(vars, clauses)
    }
}

fn pick_clauses(
    vars: usize,
    candidates: &[Vec<i32>],
    from: usize,
    counts: &mut Vec<(usize, usize)>,
    pick: &mut Vec<Vec<i32>>,
    out: &mut Vec<Sat3Formula>,
) {
    if counts.iter().all(|&(p, n)| p + n == 3) {
        if counts.iter().all(|&(p, n)| p > 0 && n > 0) {
            out.push(Sat3Formula {
                vars,
                clauses: pick.clone(),
            });
        }
        return;
    }
    for k in from..candidates.len() {
        let c = &candidates[k];
        let fits = c.iter().all(|&l| {
            let (p, n) = counts[l.unsigned_abs() as usize - 1];
            p + n < 3
        });
        if !fits {
            continue;
        }
        for &l in c {
            let slot = &mut counts[l.unsigned_abs() as usize - 1];
            if l > 0 {
                slot.0 += 1
            } else {
                slot.1 += 1
            }
        }
        pick.push(c.clone());
        pick_clauses(vars, candidates, k, counts, pick, out);
        pick.pop();
        for &l in c {
            let slot = &mut counts[l.unsigned_abs() as usize - 1];
            if l > 0 {
                slot.0 -= 1
            } else {
                slot.1 -= 1
            }
        }
    }
}

impl fmt::Display for Sat3Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            let lits: Vec<String> = c
                .iter()
                .map(|&l| if l > 0 { format!("v{l}") } else { format!("~v{}", -l) })
                .collect();
            write!(f, "({})", lits.join(" | "))?;
        }
        Ok(())
    }
}

/// Positive integers with an optional target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumberMultiset {
    pub values: Vec<u64>,
    pub target: Option<u64>,
}

impl NumberMultiset {
    pub fn new(values: Vec<u64>, target: Option<u64>) -> Result<Self, ReductionError> {
        if values.is_empty() || values.contains(&0) {
            return Err(ReductionError::MalformedInput("values must be positive and non-empty".into()));
        }
        Ok(NumberMultiset { values, target })
    }

    pub fn sum(&self) -> u64 {
        self.values.iter().sum()
    }

    /// Whitespace-separated values, optionally followed by `target <k>`.
    pub fn parse(text: &str) -> Result<Self, ReductionError> {
        let bad = |m: String| ReductionError::MalformedInput(m);
        let mut values = Vec::new();
        let mut target = None;
        let mut toks = text.split_whitespace();
        while let Some(tok) = toks.next() {
            if tok == "target" {
                let k = toks.next().ok_or_else(|| bad("target needs a value".into()))?;
                target = Some(k.parse().map_err(|_| bad(format!("bad target {k}")))?);
            } else {
                values.push(tok.parse().map_err(|_| bad(format!("bad value {tok}")))?);
            }
        }
        NumberMultiset::new(values, target)
    }
}

impl fmt::Display for NumberMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vals: Vec<String> = self.values.iter().map(u64::to_string).collect();
        write!(f, "{}", vals.join(" "))?;
        if let Some(k) = self.target {
            write!(f, " target {k}")?;
        }
        Ok(())
    }
}

/// Directed graph with a designated start vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourcedDigraph {
    pub vertices: Vec<String>,
    pub edges: Vec<(usize, usize)>,
    pub source: usize,
}

impl SourcedDigraph {
    pub fn new(vertices: Vec<String>, edges: Vec<(usize, usize)>, source: usize) -> Result<Self, ReductionError> {
        let bad = |m: String| Err(ReductionError::MalformedInput(m));
        let n = vertices.len();
        if source >= n {
            return bad("source is not a vertex".into());
        }
        if vertices.iter().collect::<BTreeSet<_>>().len() != n {
            return bad("duplicate vertex".into());
        }
        if let Some(v) = vertices.iter().find(|v| v.is_empty() || v.contains(char::is_whitespace)) {
            return bad(format!("bad vertex name {v:?}"));
        }
        let mut seen = BTreeSet::new();
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return bad(format!("edge ({a},{b}) out of range"));
            }
            if a == b {
                return bad(format!("self-loop at {}", vertices[a]));
            }
            if !seen.insert((a, b)) {
                return bad(format!("duplicate edge {} -> {}", vertices[a], vertices[b]));
            }
        }
        Ok(SourcedDigraph { vertices, edges, source })
    }

    /// Lines `vertex <name>`, `edge <from> <to>`, `source <name>`.
    pub fn parse(text: &str) -> Result<Self, ReductionError> {
        let bad = |m: String| ReductionError::MalformedInput(m);
        let mut vertices: Vec<String> = Vec::new();
        let mut edges = Vec::new();
        let mut source = None;
        let index = |vs: &[String], name: &str| {
            vs.iter()
                .position(|v| v == name)
                .ok_or_else(|| bad(format!("unknown vertex {name}")))
        };
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["vertex", name] => vertices.push(name.to_string()),
                ["edge", a, b] => edges.push((index(&vertices, a)?, index(&vertices, b)?)),
                ["source", name] => source = Some(index(&vertices, name)?),
                _ => return Err(bad(format!("unrecognised line: {line}"))),
            }
        }
        let source = source.ok_or_else(|| bad("missing source line".into()))?;
        SourcedDigraph::new(vertices, edges, source)
    }

    /// Whether a Hamiltonian path starts at the source; tries every order.
    pub fn has_sourced_hamiltonian_path(&self) -> bool {
        let n = self.vertices.len();
        let adj: BTreeSet<(usize, usize)> = self.edges.iter().copied().collect();
        fn extend(at: usize, used: &mut Vec<bool>, left: usize, adj: &BTreeSet<(usize, usize)>) -> bool {
            if left == 0 {
                return true;
            }
            for next in 0..used.len() {
                if !used[next] && adj.contains(&(at, next)) {
                    used[next] = true;
                    if extend(next, used, left - 1, adj) {
                        return true;
                    }
                    used[next] = false;
                }
            }
            false
        }
        let mut used = vec![false; n];
        used[self.source] = true;
        extend(self.source, &mut used, n - 1, &adj)
    }
}

/// Exhaustive deciders for the number problems.
pub mod brute {
    /// Some sub-multiset sums to `k`.
    pub fn subset_sum(values: &[u64], k: u64) -> bool {
        let mut reach = std::collections::BTreeSet::from([0u64]);
        for &a in values {
            let more: Vec<u64> = reach.iter().map(|r| r + a).filter(|&r| r <= k).collect();
            reach.extend(more);
        }
        reach.contains(&k)
    }

    /// Split into two halves of equal sum.
    pub fn partition(values: &[u64]) -> bool {
        let s: u64 = values.iter().sum();
        s % 2 == 0 && subset_sum(values, s / 2)
    }

    /// Split into two halves of equal size and equal sum.
    pub fn equal_cardinality_partition(values: &[u64]) -> bool {
        let n = values.len();
        let s: u64 = values.iter().sum();
        if n % 2 == 1 || s % 2 == 1 {
            return false;
        }
        (0u64..1 << n).any(|mask| {
            mask.count_ones() as usize == n / 2
                && (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| values[i]).sum::<u64>() == s / 2
        })
    }

    /// Split into triples that each sum to `k`.
    pub fn three_partition(values: &[u64], k: u64) -> bool {
        fn go(rest: &mut Vec<u64>, k: u64) -> bool {
            if rest.is_empty() {
                return true;
            }
            let a = rest.remove(0);
            for i in 0..rest.len() {
                for j in i + 1..rest.len() {
                    if a + rest[i] + rest[j] == k {
                        let (b, c) = (rest[i], rest[j]);
                        let mut next: Vec<u64> = rest
                            .iter()
                            .enumerate()
                            .filter(|&(x, _)| x != i && x != j)
                            .map(|(_, &v)| v)
                            .collect();
                        if go(&mut next, k) {
                            rest.insert(0, a);
                            return true;
                        }
                        let _ = (b, c);
                    }
                }
            }
            rest.insert(0, a);
            false
        }
        values.len() % 3 == 0 && go(&mut values.to_vec(), k)
    }
}
