//! Command-line front end.
//!
//! Exit codes: 0 success or positive answer, 1 invalid schedule or negative
//! answer, 2 usage error or refused route, 3 search budget exhausted,
//! 4 unreadable or malformed input, 5 a solver produced a witness that
//! failed validation.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::io;
use crate::lp::{fp_bailout_min, fp_perfect_scheduling};
use crate::model::{format_money, BailoutVector, IdmInstance, Schedule};
use crate::oracle::{self, OracleError, SearchBudget};
use crate::reductions::{self, NumberMultiset, Sat3Formula, SourcedDigraph};
use crate::tree::{classify_shape, exact_due_bailout_min, pp_bailout_min_out_tree, ShapeClass, TreeError};
use crate::validity::{validate, Variant};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_PARSE: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "idm", version, about = "Interval debt model toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check schedules against an instance.
    Validate(ValidateArgs),
    /// Solve with a polynomial-time method when one applies.
    Solve(SolveArgs),
    /// Exhaustive search on small integral instances.
    Oracle(OracleArgs),
    /// Build an instance from a combinatorial problem.
    Gen(GenArgs),
    /// Drop timestamps where nothing can change.
    Compact(CompactArgs),
    /// Print the shape flags of an instance.
    Classify(ClassifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Aon,
    Pp,
    Fp,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Aon => Variant::AoN,
            VariantArg::Pp => Variant::PP,
            VariantArg::Fp => Variant::FP,
        }
    }
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long, value_enum)]
    variant: VariantArg,
    instance: PathBuf,
    /// One or more schedule files for the same instance.
    #[arg(required = true)]
    schedules: Vec<PathBuf>,
    #[arg(long)]
    bailout: Option<PathBuf>,
    /// Print one JSON object per schedule instead of text.
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SolveProblem {
    BailoutMin,
    Perfect,
    BankMin,
    BankMax,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ShapeArg {
    OutTree,
    Multiditree,
    Dag,
    General,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long, value_enum)]
    problem: SolveProblem,
    #[arg(long, value_enum)]
    variant: VariantArg,
    /// Claimed shape; checked against the instance. Detected when omitted.
    #[arg(long, value_enum)]
    shape: Option<ShapeArg>,
    /// Require every debt to be due at a single time.
    #[arg(long)]
    exact_due: bool,
    instance: PathBuf,
    #[arg(long)]
    schedule_out: Option<PathBuf>,
    #[arg(long)]
    bailout_out: Option<PathBuf>,
    /// Print the rewrite log of the out-tree solver to stderr.
    #[arg(long)]
    audit: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OracleProblem {
    BankMin,
    BankMax,
    Perfect,
    BailoutMin,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, value_enum)]
    problem: OracleProblem,
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    #[arg(long, default_value_t = 50_000_000)]
    max_states: u64,
    #[arg(long, default_value_t = 600)]
    timeout_secs: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write the witness schedule here (single instance only).
    #[arg(long)]
    schedule_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Reduction {
    Bankmin3sat3,
    BankminFixed32,
    PerfschedDag,
    PerfschedMultiditree,
    PerfschedHampath,
    AonPerfschedPartition,
    AonPerfsched3partition,
    Bankmax3sat3,
    AonBankmaxSubsetSum,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    reduction: Reduction,
    /// DIMACS formula, number list (`target k` optional) or digraph file.
    #[arg(long)]
    input: PathBuf,
    /// Subset-sum target, overriding any `target` in the input.
    #[arg(long)]
    target: Option<u64>,
    /// Instance path; the note goes to `<out>.note`. Stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompactArgs {
    instance: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Time map path. Printed as comments after the instance when omitted.
    #[arg(long)]
    map: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    instance: PathBuf,
    #[arg(long)]
    json: bool,
}

/// Failure carrying its exit code.
struct Fail(i32, String);

type Res = Result<i32, Fail>;

fn parse_fail(path: &Path, e: impl std::fmt::Display) -> Fail {
    Fail(EXIT_PARSE, format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| parse_fail(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), Fail> {
    std::fs::write(path, text).map_err(|e| Fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<IdmInstance, Fail> {
    io::parse_instance(&read(path)?).map_err(|e| parse_fail(path, e))
}

pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let out = match cli.cmd {
        Cmd::Validate(a) => run_validate(a),
        Cmd::Solve(a) => run_solve(a),
        Cmd::Oracle(a) => run_oracle(a),
        Cmd::Gen(a) => run_gen(a),
        Cmd::Compact(a) => run_compact(a),
        Cmd::Classify(a) => run_classify(a),
    };
    match out {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

/// Runs `f` over `items` on up to `jobs` threads, keeping input order.
fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|r| r.expect("filled")).collect()
}

fn run_validate(a: ValidateArgs) -> Res {
    let x = load_instance(&a.instance)?;
    let variant = Variant::from(a.variant);
    let bailout = match &a.bailout {
        Some(p) => Some(io::parse_bailout(&read(p)?, &x).map_err(|e| parse_fail(p, e))?),
        None => None,
    };
    let texts = a.schedules.iter().map(|p| read(p)).collect::<Result<Vec<_>, _>>()?;
    let schedules = a
        .schedules
        .iter()
        .zip(&texts)
        .map(|(p, t)| io::parse_schedule(t, &x).map_err(|e| parse_fail(p, e)))
        .collect::<Result<Vec<_>, _>>()?;
    let reports = par_map(&schedules, a.jobs, |s| validate(&x, s, variant, bailout.as_ref()));
    let mut all_valid = true;
    for (path, r) in a.schedules.iter().zip(&reports) {
        all_valid &= r.valid;
        let bankrupt: serde_json::Map<String, serde_json::Value> = r
            .bankrupt
            .iter()
            .map(|(v, t)| (x.node_name(*v).to_string(), json!(t)))
            .collect();
        if a.json {
            let doc = json!({
                "schedule": path.display().to_string(),
                "variant": variant.to_string(),
                "valid": r.valid,
                "perfect": r.perfect,
                "bankrupt": bankrupt,
                "violations": r.violations,
            });
            println!("{doc}");
        } else {
            println!("schedule {}", path.display());
            println!("valid {}", r.valid);
            println!("perfect {}", r.perfect);
            for (v, t) in &r.bankrupt {
                println!("bankrupt {} {t}", x.node_name(*v));
            }
            for v in &r.violations {
                println!("violation {}", serde_json::to_string(v).expect("serializable"));
            }
        }
    }
    Ok(if all_valid { EXIT_OK } else { EXIT_NEGATIVE })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Route {
    Lp,
    ExactDue,
    OutTree,
    Refuse(&'static str),
}

fn shape_of(c: &ShapeClass) -> ShapeArg {
    if c.is_out_tree {
        ShapeArg::OutTree
    } else if c.is_multiditree {
        ShapeArg::Multiditree
    } else if c.is_dag {
        ShapeArg::Dag
    } else {
        ShapeArg::General
    }
}

fn shape_holds(claimed: ShapeArg, c: &ShapeClass) -> bool {
    match claimed {
        ShapeArg::OutTree => c.is_out_tree,
        ShapeArg::Multiditree => c.is_multiditree,
        ShapeArg::Dag => c.is_dag,
        ShapeArg::General => true,
    }
}

const HARD_BANKMIN: &str =
    "bankruptcy minimisation is NP-complete on DAGs with every debt due at one time (reduction from 3-SAT-3)";
const HARD_BANKMIN_AON_PATH: &str =
    "all-or-nothing bankruptcy minimisation is NP-complete already on directed paths of length 3";
const HARD_BANKMIN_PP_TREE: &str =
    "partial-payment bankruptcy minimisation is NP-complete on multiditrees (reduction from 3-SAT-3)";
const OPEN_BANKMIN_FP: &str =
    "the complexity of fractional bankruptcy minimisation on trees is open; no exact polynomial method is known";
const OPEN_BANKMIN_PP: &str =
    "the complexity of partial-payment bankruptcy minimisation on out-trees is open; no exact polynomial method is known";
const HARD_BANKMAX: &str =
    "bankruptcy maximisation is NP-complete on DAGs with horizon 2 (reduction from 3-SAT-3)";
const HARD_PP_TREE: &str =
    "partial-payment perfect scheduling is NP-complete on multiditrees with unit debts (reduction from 3-SAT-3)";
const HARD_PP_DAG: &str =
    "partial-payment perfect scheduling is NP-complete on DAGs with horizon 3 (reduction from 3-SAT-3)";
const HARD_AON_PATH: &str =
    "all-or-nothing perfect scheduling is NP-complete already on directed paths of length 3 (reduction from partition)";

/// The routing table. Exact-due instances take the dedicated algorithm for
/// the bailout and perfect-scheduling problems in every variant.
fn route(problem: SolveProblem, variant: Variant, shape: ShapeArg, exact_due: bool) -> Route {
    use ShapeArg::*;
    use SolveProblem::*;
    use Variant::*;
    match (problem, variant, shape) {
        (BankMin, AoN, _) => match shape {
            OutTree | Multiditree => Route::Refuse(HARD_BANKMIN_AON_PATH),
            _ => Route::Refuse(HARD_BANKMIN),
        },
        (BankMin, PP, OutTree) => Route::Refuse(OPEN_BANKMIN_PP),
        (BankMin, PP, Multiditree) => Route::Refuse(HARD_BANKMIN_PP_TREE),
        (BankMin, FP, OutTree | Multiditree) => Route::Refuse(OPEN_BANKMIN_FP),
        (BankMin, _, _) => Route::Refuse(HARD_BANKMIN),
        (BankMax, _, _) => Route::Refuse(HARD_BANKMAX),
        (BailoutMin | Perfect, _, _) if exact_due => Route::ExactDue,
        (BailoutMin | Perfect, FP, _) => Route::Lp,
        (BailoutMin | Perfect, PP, OutTree) => Route::OutTree,
        (BailoutMin | Perfect, PP, Multiditree) => Route::Refuse(HARD_PP_TREE),
        (BailoutMin | Perfect, PP, _) => Route::Refuse(HARD_PP_DAG),
        (BailoutMin | Perfect, AoN, _) => Route::Refuse(HARD_AON_PATH),
    }
}

fn witness_check(x: &IdmInstance, s: &Schedule, variant: Variant, b: &BailoutVector) -> Result<(), Fail> {
    let r = validate(x, s, variant, Some(b));
    if r.valid && r.perfect {
        Ok(())
    } else {
        Err(Fail(
            EXIT_INTERNAL,
            format!("solver witness failed validation: {:?}", r.violations),
        ))
    }
}

fn run_solve(a: SolveArgs) -> Res {
    let x = load_instance(&a.instance)?;
    let variant = Variant::from(a.variant);
    let class = classify_shape(&x);
    if a.exact_due && !class.all_exact_due {
        return Err(Fail(EXIT_USAGE, "--exact-due given but some debt has a window".into()));
    }
    let shape = match a.shape {
        Some(s) if !shape_holds(s, &class) => {
            return Err(Fail(EXIT_USAGE, format!("instance is not of shape {s:?}")));
        }
        Some(s) => s,
        None => shape_of(&class),
    };
    let exact_due = a.exact_due || class.all_exact_due;
    let (total, bailout, schedule, audit) = match route(a.problem, variant, shape, exact_due) {
        Route::Refuse(why) => {
            return Err(Fail(
                EXIT_USAGE,
                format!("refusing {:?} under {variant} on a {shape:?} instance: {why}; try `idm oracle` on small instances", a.problem),
            ))
        }
        Route::Lp if a.problem == SolveProblem::Perfect => {
            return match fp_perfect_scheduling(&x) {
                Some(s) => {
                    witness_check(&x, &s, variant, &BailoutVector::zeros(x.node_count()))?;
                    println!("yes");
                    if let Some(p) = &a.schedule_out {
                        write(p, &io::emit_schedule(&x, &s))?;
                    }
                    Ok(EXIT_OK)
                }
                None => {
                    println!("no");
                    Ok(EXIT_NEGATIVE)
                }
            };
        }
        Route::Lp => {
            let (t, b, s) = fp_bailout_min(&x);
            (t, b, s, None)
        }
        Route::ExactDue => {
            let (t, b, s) = exact_due_bailout_min(&x, variant).map_err(tree_fail)?;
            (t, b, s, None)
        }
        Route::OutTree => {
            let sol = pp_bailout_min_out_tree(&x).map_err(tree_fail)?;
            (sol.total.clone(), sol.bailout.clone(), sol.schedule.clone(), Some(sol.audit_log()))
        }
    };
    witness_check(&x, &schedule, variant, &bailout)?;
    if a.audit {
        if let Some(log) = audit {
            eprint!("{log}");
        }
    }
    let code = if a.problem == SolveProblem::Perfect {
        let yes = num_traits::Zero::is_zero(&total);
        println!("{}", if yes { "yes" } else { "no" });
        if yes { EXIT_OK } else { EXIT_NEGATIVE }
    } else {
        println!("{}", format_money(&total));
        EXIT_OK
    };
    if let Some(p) = &a.schedule_out {
        write(p, &io::emit_schedule(&x, &schedule))?;
    }
    if let Some(p) = &a.bailout_out {
        write(p, &io::emit_bailout(&x, &bailout))?;
    }
    Ok(code)
}

fn tree_fail(e: TreeError) -> Fail {
    match e {
        TreeError::WitnessRejected(m) => Fail(EXIT_INTERNAL, m),
        other => Fail(EXIT_USAGE, other.to_string()),
    }
}

struct OracleLine {
    value: String,
    positive: bool,
    exhausted: bool,
    states: u64,
    witness: Option<Schedule>,
}

fn oracle_one(x: &IdmInstance, p: OracleProblem, v: Variant, budget: &SearchBudget) -> Result<OracleLine, OracleError> {
    Ok(match p {
        OracleProblem::BankMin | OracleProblem::BankMax => {
            let ans = if p == OracleProblem::BankMin {
                oracle::oracle_bankruptcy_min(x, v, budget)?
            } else {
                oracle::oracle_bankruptcy_max(x, v, budget)?
            };
            OracleLine {
                value: ans.value.to_string(),
                positive: true,
                exhausted: ans.exhausted,
                states: ans.states,
                witness: ans.witness,
            }
        }
        OracleProblem::Perfect => {
            let ans = oracle::oracle_perfect_scheduling(x, v, budget)?;
            OracleLine {
                value: if ans.value { "yes" } else { "no" }.into(),
                positive: ans.value,
                exhausted: ans.exhausted,
                states: ans.states,
                witness: ans.witness,
            }
        }
        OracleProblem::BailoutMin => {
            let ans = oracle::oracle_bailout_min(x, v, budget)?;
            OracleLine {
                value: format_money(&ans.value),
                positive: true,
                exhausted: ans.exhausted,
                states: ans.states,
                witness: ans.witness,
            }
        }
    })
}

fn run_oracle(a: OracleArgs) -> Res {
    if a.schedule_out.is_some() && a.instances.len() != 1 {
        return Err(Fail(EXIT_USAGE, "--schedule-out needs exactly one instance".into()));
    }
    let variant = Variant::from(a.variant);
    let budget = SearchBudget {
        max_states: a.max_states,
        timeout: Duration::from_secs(a.timeout_secs),
        ..SearchBudget::default()
    };
    let xs = a.instances.iter().map(|p| load_instance(p)).collect::<Result<Vec<_>, _>>()?;
    let answers = par_map(&xs, a.jobs, |x| oracle_one(x, a.problem, variant, &budget));
    let mut code = EXIT_OK;
    for ((path, x), ans) in a.instances.iter().zip(&xs).zip(answers) {
        let line = match ans {
            Ok(l) => l,
            Err(OracleError::WitnessRejected(m)) => return Err(Fail(EXIT_INTERNAL, m)),
            Err(e) => return Err(Fail(EXIT_USAGE, format!("{}: {e}", path.display()))),
        };
        println!(
            "{} {} exhausted={} states={}",
            path.display(),
            line.value,
            line.exhausted,
            line.states
        );
        if !line.exhausted {
            code = EXIT_BUDGET;
        } else if !line.positive && code == EXIT_OK {
            code = EXIT_NEGATIVE;
        }
        if let (Some(p), Some(w)) = (&a.schedule_out, &line.witness) {
            write(p, &io::emit_schedule(x, w))?;
        }
    }
    Ok(code)
}

fn run_gen(a: GenArgs) -> Res {
    let text = read(&a.input)?;
    let bad = |e: reductions::ReductionError| parse_fail(&a.input, e);
    let formula = || Sat3Formula::from_dimacs(&text).map_err(bad);
    let numbers = || NumberMultiset::parse(&text).map_err(bad);
    let (x, threshold, source) = match a.reduction {
        Reduction::Bankmin3sat3 => {
            let f = formula()?;
            let (x, k) = reductions::gen_bankmin_3sat3(&f);
            (x, Some(format!("at most {k} bankruptcies")), f.to_string())
        }
        Reduction::Bankmax3sat3 => {
            let f = formula()?;
            let (x, k) = reductions::gen_bankmax_3sat3(&f);
            (x, Some(format!("at least {k} bankruptcies")), f.to_string())
        }
        Reduction::PerfschedDag => {
            let f = formula()?;
            (reductions::gen_perfsched_dag_3sat3(&f), None, f.to_string())
        }
        Reduction::PerfschedMultiditree => {
            let f = formula()?;
            (reductions::gen_perfsched_multiditree_3sat3(&f), None, f.to_string())
        }
        Reduction::BankminFixed32 => {
            let s = numbers()?;
            let (x, k) = reductions::gen_bankmin_fixed32_ecp(&s).map_err(bad)?;
            (x, Some(format!("at most {k} bankruptcies")), s.to_string())
        }
        Reduction::AonPerfschedPartition => {
            let s = numbers()?;
            (reductions::gen_aon_perfsched_partition(&s).map_err(bad)?, None, s.to_string())
        }
        Reduction::AonPerfsched3partition => {
            let s = numbers()?;
            (reductions::gen_aon_perfsched_3partition(&s).map_err(bad)?, None, s.to_string())
        }
        Reduction::AonBankmaxSubsetSum => {
            let mut s = numbers()?;
            if let Some(k) = a.target {
                s.target = Some(k);
            }
            let k = s
                .target
                .ok_or_else(|| Fail(EXIT_USAGE, "subset sum needs a target (`target k` or --target)".into()))?;
            let (x, t) = reductions::gen_aon_bankmax_subset_sum(&s, k).map_err(bad)?;
            (x, Some(format!("at least {t} bankruptcies")), s.to_string())
        }
        Reduction::PerfschedHampath => {
            let h = SourcedDigraph::parse(&text).map_err(bad)?;
            let edges: Vec<String> = h
                .edges
                .iter()
                .map(|&(i, j)| format!("{}->{}", h.vertices[i], h.vertices[j]))
                .collect();
            let src = format!("source {} edges {}", h.vertices[h.source], edges.join(" "));
            (reductions::gen_perfsched_hampath(&h), None, src)
        }
    };
    let name = a
        .reduction
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    let mut note = format!("reduction {name}\nsource {source}\n");
    match threshold {
        Some(t) => note.push_str(&format!("threshold {t}\n")),
        None => note.push_str("question perfect schedule exists\n"),
    }
    note.push_str(&format!("instance {}\n", io::instance_hash(&x)));
    let doc = io::emit_instance(&x);
    match &a.out {
        Some(p) => {
            write(p, &doc)?;
            let mut side = p.clone().into_os_string();
            side.push(".note");
            write(Path::new(&side), &note)?;
        }
        None => {
            print!("{doc}");
            for l in note.lines() {
                println!("# {l}");
            }
        }
    }
    Ok(EXIT_OK)
}

fn run_compact(a: CompactArgs) -> Res {
    let x = load_instance(&a.instance)?;
    let (y, map) = x.compact();
    let doc = io::emit_instance(&y);
    let map_doc = io::emit_timemap(&map);
    match &a.out {
        Some(p) => write(p, &doc)?,
        None => print!("{doc}"),
    }
    match &a.map {
        Some(p) => write(p, &map_doc)?,
        None if a.out.is_none() => {
            for l in map_doc.lines() {
                println!("# {l}");
            }
        }
        None => eprint!("{map_doc}"),
    }
    Ok(EXIT_OK)
}

fn run_classify(a: ClassifyArgs) -> Res {
    let x = load_instance(&a.instance)?;
    let c = classify_shape(&x);
    if a.json {
        println!("{}", serde_json::to_string(&c).expect("serializable"));
    } else {
        println!("multiditree {}", c.is_multiditree);
        println!("dag {}", c.is_dag);
        println!("out_tree {}", c.is_out_tree);
        println!("out_path {}", c.is_out_path);
        println!("exact_due {}", c.all_exact_due);
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn routing_table() {
        use ShapeArg::*;
        use SolveProblem::*;
        assert_eq!(route(BailoutMin, Variant::FP, General, false), Route::Lp);
        assert_eq!(route(Perfect, Variant::FP, Dag, false), Route::Lp);
        assert_eq!(route(BailoutMin, Variant::PP, OutTree, false), Route::OutTree);
        assert_eq!(route(BailoutMin, Variant::AoN, General, true), Route::ExactDue);
        assert!(matches!(route(Perfect, Variant::PP, Dag, false), Route::Refuse(_)));
        assert!(matches!(route(Perfect, Variant::AoN, OutTree, false), Route::Refuse(_)));
        assert!(matches!(route(BankMax, Variant::FP, OutTree, true), Route::Refuse(_)));
        // every refusal explains itself without citing a numbered result
        for p in [BailoutMin, Perfect, BankMin, BankMax] {
            for v in [Variant::AoN, Variant::PP, Variant::FP] {
                for s in [OutTree, Multiditree, Dag, General] {
                    if let Route::Refuse(why) = route(p, v, s, false) {
                        assert!(!why.to_lowercase().contains("theorem"));
                        assert!(why.contains("NP-complete") || why.contains("open"));
                    }
                }
            }
        }
    }

    #[test]
    fn par_map_keeps_order() {
        let xs: Vec<u32> = (0..50).collect();
        assert_eq!(par_map(&xs, 4, |v| v * 2), xs.iter().map(|v| v * 2).collect::<Vec<_>>());
        assert!(par_map(&Vec::<u32>::new(), 3, |v| *v).is_empty());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(cli_main(["idm", "frobnicate"]), EXIT_USAGE);
        assert_eq!(cli_main(["idm", "validate", "--variant", "xx", "a", "b"]), EXIT_USAGE);
    }

    #[test]
    fn missing_file_exits_4() {
        assert_eq!(cli_main(["idm", "classify", "/nonexistent/file.idm"]), EXIT_PARSE);
    }
}
