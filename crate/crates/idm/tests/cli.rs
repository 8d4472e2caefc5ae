use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const THREE_BANKS: &str = "idm-instance 1
node u 30
node v 20
node w 10
debt u v 0 20 1 3
debt u v 1 15 4 5
debt v w 0 25 2 2
debt w v 0 25 4 6
";

const CHAIN: &str = "idm-instance 1
# u owes v over [1,2], v owes w at 1
node u 1
node v 0
node w 0
debt u v 0 1 1 2
debt v w 0 1 1 1
";

fn idm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idm")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn schedule_for(dir: &TempDir, inst: &Path, name: &str, pays: &[&str]) -> PathBuf {
    let hash = idm::io::instance_hash(&idm::io::parse_instance(&fs::read_to_string(inst).unwrap()).unwrap());
    let mut body = format!("idm-schedule 1\ninstance {hash}\n");
    for p in pays {
        body.push_str(p);
        body.push('\n');
    }
    write(dir, name, &body)
}

#[test]
fn validate_reports_valid_and_withholding() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "chain.idm", CHAIN);
    let good = schedule_for(&dir, &inst, "good.sched", &["pay u v 0 1 1", "pay v w 0 1 1"]);
    let o = idm(&["validate", "--variant", "pp", s(&inst), s(&good)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("valid true"));
    assert!(stdout(&o).contains("perfect true"));

    let hold = schedule_for(&dir, &inst, "hold.sched", &["pay u v 0 1 1"]);
    let o = idm(&["validate", "--variant", "pp", "--json", s(&inst), s(&hold)]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(v["valid"], false);
    assert_eq!(v["violations"][0]["kind"], "Withholding");
}

#[test]
fn validate_several_schedules_in_parallel() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "chain.idm", CHAIN);
    let a = schedule_for(&dir, &inst, "a.sched", &["pay u v 0 1 1", "pay v w 0 1 1"]);
    let b = schedule_for(&dir, &inst, "b.sched", &["pay u v 0 2 1", "pay v w 0 2 1"]);
    let o = idm(&["validate", "--variant", "aon", "--jobs", "2", s(&inst), s(&a), s(&b)]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.find("a.sched").unwrap() < text.find("b.sched").unwrap());
    assert!(text.contains("bankrupt v 1"));
}

#[test]
fn schedule_for_another_instance_is_rejected() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "chain.idm", CHAIN);
    let other = write(&dir, "three.idm", THREE_BANKS);
    let sched = schedule_for(&dir, &other, "x.sched", &[]);
    let o = idm(&["validate", "--variant", "pp", s(&inst), s(&sched)]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn fractional_bailout_solve_writes_checkable_witness() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "three.idm", THREE_BANKS);
    let sched = dir.path().join("w.sched");
    let bail = dir.path().join("w.bail");
    let o = idm(&[
        "solve",
        "--problem",
        "bailout-min",
        "--variant",
        "fp",
        s(&inst),
        "--schedule-out",
        s(&sched),
        "--bailout-out",
        s(&bail),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "5");
    let o = idm(&["validate", "--variant", "fp", s(&inst), s(&sched), "--bailout", s(&bail)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("perfect true"));
}

#[test]
fn hard_problems_are_refused() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "chain.idm", CHAIN);
    let o = idm(&["solve", "--problem", "perfect", "--variant", "pp", "--shape", "dag", s(&inst)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("NP-complete"), "{err}");

    let o = idm(&["solve", "--problem", "bank-max", "--variant", "pp", s(&inst)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_tree_solve_and_oracle_agree() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "chain.idm", CHAIN);
    let o = idm(&["solve", "--problem", "bailout-min", "--variant", "pp", "--shape", "out-tree", s(&inst)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let tree = stdout(&o).trim().to_string();
    let o = idm(&["oracle", "--problem", "bailout-min", "--variant", "pp", s(&inst)]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    let fields: Vec<&str> = line.split_whitespace().collect();
    assert_eq!(fields[1], tree);
    assert_eq!(fields[2], "exhausted=true");
}

#[test]
fn oracle_budget_exhaustion_exits_3() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "three.idm", THREE_BANKS);
    let o = idm(&["oracle", "--problem", "bank-max", "--variant", "pp", "--max-states", "1", s(&inst)]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stdout(&o).contains("exhausted=false"));
}

#[test]
fn gen_writes_instance_and_note() {
    let dir = TempDir::new().unwrap();
    let cnf = write(&dir, "phi.cnf", "p cnf 2 3\n1 -2 0\n-1 2 0\n1 2 0\n");
    let out = dir.path().join("phi.idm");
    let o = idm(&["gen", "--reduction", "perfsched-dag", "--input", s(&cnf), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let inst = idm::io::parse_instance(&fs::read_to_string(&out).unwrap()).unwrap();
    let note = fs::read_to_string(dir.path().join("phi.idm.note")).unwrap();
    assert!(note.contains(&idm::io::instance_hash(&inst)));

    let nums = write(&dir, "nums.txt", "3 1 2\n");
    let o = idm(&["gen", "--reduction", "aon-bankmax-subset-sum", "--input", s(&nums), "--target", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(idm::io::parse_instance(&stdout(&o)).is_ok());
}

#[test]
fn compact_and_classify() {
    let dir = TempDir::new().unwrap();
    let wide = CHAIN.replace("debt u v 0 1 1 2", "debt u v 0 1 10 20").replace("debt v w 0 1 1 1", "debt v w 0 1 10 10");
    let inst = write(&dir, "wide.idm", &wide);
    let out = dir.path().join("tight.idm");
    let map = dir.path().join("tight.map");
    let o = idm(&["compact", s(&inst), "--out", s(&out), "--map", s(&map)]);
    assert_eq!(o.status.code(), Some(0));
    let tight = idm::io::parse_instance(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(tight.lifetime(), 2);
    assert!(fs::read_to_string(&map).unwrap().starts_with("idm-timemap 1"));

    let o = idm(&["classify", "--json", s(&inst)]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["is_dag"], true);
    assert_eq!(v["is_out_path"], true);
    assert_eq!(v["all_exact_due"], false);
}

#[test]
fn malformed_input_exits_4() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.idm", "idm-instance 1\nnode u x\n");
    let o = idm(&["classify", s(&bad)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(idm(&["classify", "/nonexistent/file"]).status.code(), Some(4));
    assert_eq!(idm(&["solve", "--problem", "nonsense"]).status.code(), Some(2));
}
