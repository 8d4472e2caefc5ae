//! Exhaustive reference solvers for small instances.
//!
//! All searches run depth-first over time steps. Within a step the payment
//! of every active debt is chosen in debt-id order; a node is checked as soon
//! as its last debt at that step has been decided. The optimization searches
//! work on the compacted instance and map witnesses back.

use std::collections::HashSet;
use std::ops::ControlFlow;
use std::time::{Duration, Instant};

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::model::{money, BailoutVector, DebtId, IdmInstance, Money, Schedule, Time, TimeMap};
use crate::validity::{simulate, validate, Variant};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_states: u64,
    /// Per-debt, per-time cap on a partial payment. Below the largest debt
    /// amount the search is incomplete and answers are not certified.
    pub max_payment_granularity: u64,
    pub timeout: Duration,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_states: 50_000_000,
            max_payment_granularity: u64::MAX,
            timeout: Duration::from_secs(600),
        }
    }
}

impl SearchBudget {
    pub fn states(max_states: u64) -> Self {
        SearchBudget {
            max_states,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct OracleAnswer<V> {
    /// Best value found. Certified only when `exhausted` is set.
    pub value: V,
    pub witness: Option<Schedule>,
    pub bailout: Option<BailoutVector>,
    /// The search finished (or hit a provable optimum) within budget.
    pub exhausted: bool,
    pub states: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("the oracle handles all-or-nothing and partial payments only")]
    UnsupportedVariant,
    #[error("oracle needs integral assets and amounts below 2^40")]
    NotIntegral,
    #[error("oracle witness failed validation: {0}")]
    WitnessRejected(String),
}

/// Integer copy of an instance for the search loops.
struct Problem {
    n: usize,
    lifetime: Time,
    debtor: Vec<usize>,
    creditor: Vec<usize>,
    amount: Vec<i64>,
    t1: Vec<Time>,
    t2: Vec<Time>,
    assets: Vec<i64>,
    out: Vec<Vec<usize>>,
    /// Debts with equal endpoints and terms; their remainders are sorted in
    /// memo keys.
    twins: Vec<Vec<usize>>,
    /// Nodes bankrupt in every schedule.
    doomed: Vec<bool>,
}

const LIMIT: i64 = 1 << 40;

fn small_int(m: &Money) -> Result<i64, OracleError> {
    if !m.is_integer() {
        return Err(OracleError::NotIntegral);
    }
    match m.to_integer().to_i64() {
        Some(v) if v.abs() < LIMIT => Ok(v),
        _ => Err(OracleError::NotIntegral),
    }
}

impl Problem {
    fn new(x: &IdmInstance, extra: Option<&[i64]>) -> Result<Self, OracleError> {
        let n = x.node_count();
        let mut p = Problem {
            n,
            lifetime: x.lifetime(),
            debtor: Vec::new(),
            creditor: Vec::new(),
            amount: Vec::new(),
            t1: Vec::new(),
            t2: Vec::new(),
            assets: Vec::with_capacity(n),
            out: vec![Vec::new(); n],
            twins: Vec::new(),
            doomed: vec![false; n],
        };
        for v in x.nodes() {
            let base = small_int(x.assets(v))?;
            p.assets.push(base + extra.map_or(0, |b| b[v.0]));
        }
        let mut classes: std::collections::BTreeMap<(usize, usize, i64, Time, Time), Vec<usize>> =
            Default::default();
        for (i, d) in x.debts().iter().enumerate() {
            let a = small_int(&d.terms.amount)?;
            p.debtor.push(d.debtor.0);
            p.creditor.push(d.creditor.0);
            p.amount.push(a);
            p.t1.push(d.terms.t1);
            p.t2.push(d.terms.t2);
            p.out[d.debtor.0].push(i);
            classes
                .entry((d.debtor.0, d.creditor.0, a, d.terms.t1, d.terms.t2))
                .or_default()
                .push(i);
        }
        p.twins = classes.into_values().filter(|c| c.len() > 1).collect();
        let mut assets = x.initial_assets().to_vec();
        if let Some(b) = extra {
            for (a, e) in assets.iter_mut().zip(b) {
                *a += money(*e);
            }
        }
        let y = x.with_assets(assets).expect("extra assets are non-negative");
        for v in y.nodes() {
            p.doomed[v.0] = y.is_prefix_insolvent(v).expect("node exists");
        }
        Ok(p)
    }

    fn m(&self) -> usize {
        self.amount.len()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Mode {
    Enumerate,
    Perfect,
    BankMin,
    BankMax,
}

#[derive(Hash, PartialEq, Eq)]
struct Key {
    t: Time,
    rem: Box<[i64]>,
    mask: Box<[u64]>,
}

struct StepCtx {
    t: Time,
    active: Vec<usize>,
    pending_in: Vec<i64>,
    undecided: Vec<u32>,
    undecided_out: Vec<u32>,
}

struct Search<'a> {
    p: &'a Problem,
    variant: Variant,
    mode: Mode,
    budget: &'a SearchBudget,
    started: Instant,
    rem: Vec<i64>,
    cash: Vec<i64>,
    bankrupt: Vec<bool>,
    bankrupt_count: usize,
    path: Vec<(usize, Time, i64)>,
    memo: HashSet<Key>,
    states: u64,
    out_of_budget: bool,
    truncated: bool,
    best: usize,
    best_path: Option<Vec<(usize, Time, i64)>>,
    /// Bank-min stops once `best` reaches this; bank-max once it reaches `stop_high`.
    stop_low: usize,
    stop_high: usize,
    visitor: Option<&'a mut dyn FnMut(&[(usize, Time, i64)]) -> ControlFlow<()>>,
}

type Flow = ControlFlow<()>;

impl<'a> Search<'a> {
    fn new(p: &'a Problem, variant: Variant, mode: Mode, budget: &'a SearchBudget) -> Self {
        Search {
            p,
            variant,
            mode,
            budget,
            started: Instant::now(),
            rem: p.amount.clone(),
            cash: p.assets.clone(),
            bankrupt: vec![false; p.n],
            bankrupt_count: 0,
            path: Vec::new(),
            memo: HashSet::new(),
            states: 0,
            out_of_budget: false,
            truncated: false,
            best: 0,
            best_path: None,
            stop_low: 0,
            stop_high: usize::MAX,
            visitor: None,
        }
    }

    fn tick(&mut self) -> bool {
        self.states += 1;
        if self.states > self.budget.max_states
            || (self.states % 4096 == 0 && self.started.elapsed() > self.budget.timeout)
        {
            self.out_of_budget = true;
        }
        self.out_of_budget
    }

    fn key(&self, t: Time) -> Key {
        let mut rem = self.rem.clone();
        for class in &self.p.twins {
            let mut vals: Vec<i64> = class.iter().map(|&e| rem[e]).collect();
            vals.sort_unstable();
            for (&e, v) in class.iter().zip(vals) {
                rem[e] = v;
            }
        }
        let mut mask = vec![0u64; self.p.n.div_ceil(64)];
        if matches!(self.mode, Mode::BankMin | Mode::BankMax) {
            for (v, &b) in self.bankrupt.iter().enumerate() {
                if b {
                    mask[v / 64] |= 1 << (v % 64);
                }
            }
        }
        Key {
            t,
            rem: rem.into_boxed_slice(),
            mask: mask.into_boxed_slice(),
        }
    }

    fn settled(&self) -> bool {
        self.rem.iter().all(|&r| r == 0)
    }

    /// Bound test at the start of a step: true when the subtree cannot beat
    /// the incumbent.
    fn hopeless(&self) -> bool {
        match self.mode {
            Mode::BankMin => {
                let lb = (0..self.p.n).filter(|&v| self.bankrupt[v] || self.p.doomed[v]).count();
                self.best_path.is_some() && lb >= self.best
            }
            Mode::BankMax => {
                let ub = (0..self.p.n)
                    .filter(|&v| self.bankrupt[v] || self.p.out[v].iter().any(|&e| self.rem[e] > 0))
                    .count();
                self.best_path.is_some() && ub <= self.best
            }
            _ => false,
        }
    }

    fn step(&mut self, t: Time) -> Flow {
        if self.tick() {
            return ControlFlow::Break(());
        }
        if t > self.p.lifetime || self.settled() {
            return self.leaf();
        }
        if self.hopeless() {
            return ControlFlow::Continue(());
        }
        if self.mode != Mode::Enumerate && !self.memo.insert(self.key(t)) {
            return ControlFlow::Continue(());
        }
        let n = self.p.n;
        let active: Vec<usize> = (0..self.p.m())
            .filter(|&e| self.p.t1[e] <= t && self.rem[e] > 0)
            .collect();
        let mut ctx = StepCtx {
            t,
            active,
            pending_in: vec![0; n],
            undecided: vec![0; n],
            undecided_out: vec![0; n],
        };
        for &e in &ctx.active {
            let (u, w) = (self.p.debtor[e], self.p.creditor[e]);
            ctx.pending_in[w] += self.rem[e];
            ctx.undecided[u] += 1;
            ctx.undecided[w] += 1;
            ctx.undecided_out[u] += 1;
        }
        self.choose(&mut ctx, 0)
    }

    fn options(&mut self, e: usize, t: Time) -> Vec<i64> {
        let r = self.rem[e];
        if self.mode == Mode::Perfect && self.p.t2[e] <= t {
            return vec![r];
        }
        let mut opts: Vec<i64> = match self.variant {
            Variant::AoN => vec![0, r],
            _ => {
                let cap = r.min(self.budget.max_payment_granularity.min(i64::MAX as u64) as i64);
                if cap < r {
                    self.truncated = true;
                }
                (0..=cap).collect()
            }
        };
        if matches!(self.mode, Mode::Perfect | Mode::BankMin) {
            opts.reverse();
        }
        opts
    }

    fn node_ok(&self, ctx: &StepCtx, v: usize) -> bool {
        let c = self.cash[v];
        if c + ctx.pending_in[v] < 0 {
            return false;
        }
        if ctx.undecided_out[v] == 0 {
            let smallest = self.p.out[v]
                .iter()
                .filter(|&&e| self.p.t2[e] <= ctx.t && self.rem[e] > 0)
                .map(|&e| self.p.amount[e])
                .min();
            if let Some(a) = smallest {
                let blocked = match self.mode {
                    Mode::Perfect => true,
                    _ => match self.variant {
                        Variant::AoN => c >= a,
                        _ => c > 0,
                    },
                };
                if blocked {
                    return false;
                }
            }
        }
        true
    }

    fn choose(&mut self, ctx: &mut StepCtx, k: usize) -> Flow {
        if k == ctx.active.len() {
            return self.finish_step(ctx.t);
        }
        let e = ctx.active[k];
        let (u, w) = (self.p.debtor[e], self.p.creditor[e]);
        let r = self.rem[e];
        ctx.pending_in[w] -= r;
        ctx.undecided[u] -= 1;
        ctx.undecided[w] -= 1;
        ctx.undecided_out[u] -= 1;
        let mut flow = ControlFlow::Continue(());
        for q in self.options(e, ctx.t) {
            self.rem[e] -= q;
            self.cash[u] -= q;
            self.cash[w] += q;
            if q > 0 {
                self.path.push((e, ctx.t, q));
            }
            if self.node_ok(ctx, u) && self.node_ok(ctx, w) {
                flow = self.choose(ctx, k + 1);
            }
            if q > 0 {
                self.path.pop();
            }
            self.rem[e] += q;
            self.cash[u] += q;
            self.cash[w] -= q;
            if flow.is_break() {
                break;
            }
        }
        ctx.pending_in[w] += r;
        ctx.undecided[u] += 1;
        ctx.undecided[w] += 1;
        ctx.undecided_out[u] += 1;
        flow
    }

    fn finish_step(&mut self, t: Time) -> Flow {
        let mut marked = Vec::new();
        for e in 0..self.p.m() {
            let u = self.p.debtor[e];
            if self.p.t2[e] <= t && self.rem[e] > 0 && !self.bankrupt[u] {
                self.bankrupt[u] = true;
                self.bankrupt_count += 1;
                marked.push(u);
            }
        }
        let flow = self.step(t + 1);
        for u in marked {
            self.bankrupt[u] = false;
            self.bankrupt_count -= 1;
        }
        flow
    }

    fn leaf(&mut self) -> Flow {
        match self.mode {
            Mode::Enumerate => {
                let visit = self.visitor.as_mut().expect("visitor set");
                visit(&self.path)
            }
            Mode::Perfect => {
                self.best_path = Some(self.path.clone());
                ControlFlow::Break(())
            }
            Mode::BankMin => {
                if self.best_path.is_none() || self.bankrupt_count < self.best {
                    self.best = self.bankrupt_count;
                    self.best_path = Some(self.path.clone());
                }
                if self.best <= self.stop_low {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            }
            Mode::BankMax => {
                if self.best_path.is_none() || self.bankrupt_count > self.best {
                    self.best = self.bankrupt_count;
                    self.best_path = Some(self.path.clone());
                }
                if self.best >= self.stop_high {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            }
        }
    }
}

fn check_variant(variant: Variant) -> Result<(), OracleError> {
    match variant {
        Variant::FP => Err(OracleError::UnsupportedVariant),
        _ => Ok(()),
    }
}

fn to_schedule(path: &[(usize, Time, i64)]) -> Schedule {
    let mut s = Schedule::new();
    for &(e, t, q) in path {
        s.add(DebtId(e), t, &money(q));
    }
    s
}

/// Lifts a compacted-time witness and re-validates it on `x`.
fn lift(
    x: &IdmInstance,
    map: &TimeMap,
    path: &[(usize, Time, i64)],
    variant: Variant,
    bailout: Option<&BailoutVector>,
) -> Result<(Schedule, crate::validity::ValidationReport), OracleError> {
    let s = map.backward_schedule(&to_schedule(path));
    let report = validate(x, &s, variant, bailout);
    if !report.valid {
        return Err(OracleError::WitnessRejected(format!("{:?}", report.violations)));
    }
    Ok((s, report))
}

/// Visits every valid schedule of `x` with integral payments exactly once,
/// on the original time axis. The visitor may stop the walk early. Returns
/// whether the walk covered everything.
pub fn oracle_schedules(
    x: &IdmInstance,
    variant: Variant,
    budget: &SearchBudget,
    mut visitor: impl FnMut(&Schedule) -> ControlFlow<()>,
) -> Result<bool, OracleError> {
    check_variant(variant)?;
    let p = Problem::new(x, None)?;
    let mut adapter = |path: &[(usize, Time, i64)]| visitor(&to_schedule(path));
    let mut search = Search::new(&p, variant, Mode::Enumerate, budget);
    search.visitor = Some(&mut adapter);
    let flow = search.step(1);
    Ok(flow.is_continue() && !search.out_of_budget && !search.truncated)
}

fn bankruptcy_search(
    x: &IdmInstance,
    variant: Variant,
    budget: &SearchBudget,
    maximize: bool,
) -> Result<OracleAnswer<usize>, OracleError> {
    check_variant(variant)?;
    let (y, map) = x.compact();
    let p = Problem::new(&y, None)?;
    let mode = if maximize { Mode::BankMax } else { Mode::BankMin };
    let mut search = Search::new(&p, variant, mode, budget);

    // Seed the incumbent with a greedy schedule.
    let seed = simulate(&y, variant, None, |_, _, cap| if maximize { money(0) } else { cap.clone() });
    let seed_report = validate(&y, &seed, variant, None);
    debug_assert!(seed_report.valid);
    search.best = seed_report.bankrupt.len();
    search.best_path = Some(
        seed.iter()
            .map(|((e, t), q)| (e.0, t, q.to_integer().to_i64().expect("small")))
            .collect(),
    );
    search.stop_low = p.doomed.iter().filter(|&&d| d).count();
    search.stop_high = (0..p.n).filter(|&v| !p.out[v].is_empty()).count();
    let done_early = if maximize {
        search.best >= search.stop_high
    } else {
        search.best <= search.stop_low
    };
    if !done_early {
        let _ = search.step(1);
    }
    let path = search.best_path.take().expect("seeded");
    let (s, report) = lift(x, &map, &path, variant, None)?;
    if report.bankrupt.len() != search.best {
        return Err(OracleError::WitnessRejected(format!(
            "witness has {} bankruptcies, search claimed {}",
            report.bankrupt.len(),
            search.best
        )));
    }
    Ok(OracleAnswer {
        value: search.best,
        witness: Some(s),
        bailout: None,
        exhausted: !search.out_of_budget && !search.truncated,
        states: search.states,
    })
}

/// Fewest bankrupt nodes over all valid schedules.
pub fn oracle_bankruptcy_min(
    x: &IdmInstance,
    variant: Variant,
    budget: &SearchBudget,
) -> Result<OracleAnswer<usize>, OracleError> {
    bankruptcy_search(x, variant, budget, false)
}

/// Most bankrupt nodes over all valid schedules.
pub fn oracle_bankruptcy_max(
    x: &IdmInstance,
    variant: Variant,
    budget: &SearchBudget,
) -> Result<OracleAnswer<usize>, OracleError> {
    bankruptcy_search(x, variant, budget, true)
}

struct PerfectRun {
    found: Option<Vec<(usize, Time, i64)>>,
    states: u64,
    complete: bool,
}

fn perfect_run(
    y: &IdmInstance,
    extra: Option<&[i64]>,
    variant: Variant,
    budget: &SearchBudget,
) -> Result<PerfectRun, OracleError> {
    let p = Problem::new(y, extra)?;
    if p.doomed.iter().any(|&d| d) {
        return Ok(PerfectRun {
            found: None,
            states: 0,
            complete: true,
        });
    }
    let mut search = Search::new(&p, variant, Mode::Perfect, budget);
    let _ = search.step(1);
    Ok(PerfectRun {
        complete: search.best_path.is_some() || (!search.out_of_budget && !search.truncated),
        found: search.best_path,
        states: search.states,
    })
}

/// Whether some valid schedule leaves no debt overdue.
pub fn oracle_perfect_scheduling(
    x: &IdmInstance,
    variant: Variant,
    budget: &SearchBudget,
) -> Result<OracleAnswer<bool>, OracleError> {
    check_variant(variant)?;
    let (y, map) = x.compact();
    let run = perfect_run(&y, None, variant, budget)?;
    let witness = match &run.found {
        Some(path) => {
            let (s, report) = lift(x, &map, path, variant, None)?;
            if !report.perfect {
                return Err(OracleError::WitnessRejected("witness is not perfect".into()));
            }
            Some(s)
        }
        None => None,
    };
    Ok(OracleAnswer {
        value: witness.is_some(),
        witness,
        bailout: None,
        exhausted: run.complete,
        states: run.states,
    })
}

/// Calls `f` on every vector `b` with `lo <= b <= hi` and `sum(b) == total`,
/// in lexicographic order, until it breaks.
fn compositions(lo: &[i64], hi: &[i64], total: i64, f: &mut dyn FnMut(&[i64]) -> Flow) -> Flow {
    fn go(i: usize, left: i64, cur: &mut Vec<i64>, lo: &[i64], hi: &[i64], room: &[i64], f: &mut dyn FnMut(&[i64]) -> Flow) -> Flow {
        if i == lo.len() {
            return if left == 0 { f(cur) } else { ControlFlow::Continue(()) };
        }
        // room[i] is the slack available in positions i+1..
        for extra in 0..=(hi[i] - lo[i]).min(left) {
            if left - extra > room[i] {
                continue;
            }
            cur.push(lo[i] + extra);
            let flow = go(i + 1, left - extra, cur, lo, hi, room, f);
            cur.pop();
            flow?;
        }
        ControlFlow::Continue(())
    }
    let base: i64 = lo.iter().sum();
    if total < base {
        return ControlFlow::Continue(());
    }
    let mut room = vec![0; lo.len()];
    for i in (0..lo.len().saturating_sub(1)).rev() {
        room[i] = room[i + 1] + hi[i + 1] - lo[i + 1];
    }
    go(0, total - base, &mut Vec::new(), lo, hi, &room, f)
}

/// Least total integral bailout admitting a perfect schedule. Totals are
/// tried in increasing order from the sum of prefix deficits; per node the
/// bailout never needs to exceed its outgoing total minus its assets.
pub fn oracle_bailout_min(
    x: &IdmInstance,
    variant: Variant,
    budget: &SearchBudget,
) -> Result<OracleAnswer<Money>, OracleError> {
    check_variant(variant)?;
    let (y, map) = x.compact();
    let p = Problem::new(&y, None)?;
    let mut lo = Vec::with_capacity(p.n);
    let mut hi = Vec::with_capacity(p.n);
    for v in y.nodes() {
        lo.push(small_int(&y.prefix_deficits(v).expect("node").max)?);
        let out: i64 = p.out[v.0].iter().map(|&e| p.amount[e]).sum();
        hi.push((out - p.assets[v.0]).max(0));
    }
    let started = Instant::now();
    let mut states = 0u64;
    let mut complete = true;
    let mut found: Option<(Vec<i64>, Vec<(usize, Time, i64)>)> = None;
    let top: i64 = hi.iter().sum();
    let mut failure: Option<OracleError> = None;
    'totals: for total in lo.iter().sum::<i64>()..=top {
        let _ = compositions(&lo, &hi, total, &mut |b| {
            let left = SearchBudget {
                max_states: budget.max_states.saturating_sub(states),
                timeout: budget.timeout.saturating_sub(started.elapsed()),
                ..budget.clone()
            };
            match perfect_run(&y, Some(b), variant, &left) {
                Ok(run) => {
                    states += run.states;
                    complete &= run.complete;
                    if let Some(path) = run.found {
                        found = Some((b.to_vec(), path));
                        return ControlFlow::Break(());
                    }
                    if states >= budget.max_states || started.elapsed() > budget.timeout {
                        return ControlFlow::Break(());
                    }
                    ControlFlow::Continue(())
                }
                Err(e) => {
                    failure = Some(e);
                    ControlFlow::Break(())
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        if found.is_some() || states >= budget.max_states || started.elapsed() > budget.timeout {
            break 'totals;
        }
    }
    let exhausted = complete && found.is_some();
    let (b, path) = match found {
        Some(hit) => hit,
        None => {
            // Fall back to the always-feasible cap vector: pay everything at
            // its earliest time.
            let path = (0..p.m()).map(|e| (e, p.t1[e], p.amount[e])).collect();
            (hi.clone(), path)
        }
    };
    let bailout = BailoutVector::from_entries(b.iter().map(|&v| money(v)).collect());
    let (s, report) = lift(x, &map, &path, variant, Some(&bailout))?;
    if !report.perfect {
        return Err(OracleError::WitnessRejected("bailout witness is not perfect".into()));
    }
    Ok(OracleAnswer {
        value: bailout.total(),
        witness: Some(s),
        bailout: Some(bailout),
        exhausted,
        states,
    })
}

/// Number of nodes bankrupt in every schedule; a lower bound on the
/// bankruptcy minimum.
pub fn doomed_count(x: &IdmInstance) -> usize {
    x.nodes()
        .filter(|&v| x.is_prefix_insolvent(v).expect("node exists"))
        .count()
}
