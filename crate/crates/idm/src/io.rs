//! Line-based text formats for instances, schedules, bailouts and time maps.
//!
//! Every document starts with a `<kind> <version>` header. Blank lines and
//! lines starting with `#` are ignored; anything else must be a known record
//! with exactly the expected fields. Amounts are exact: `5`, `7/3`.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{
    build_instance, format_money, parse_money, BailoutVector, DebtSpec, IdmInstance, ModelError,
    Money, Schedule, Time, TimeMap,
};

pub const INSTANCE_HEADER: &str = "idm-instance 1";
pub const SCHEDULE_HEADER: &str = "idm-schedule 1";
pub const BAILOUT_HEADER: &str = "idm-bailout 1";
pub const TIMEMAP_HEADER: &str = "idm-timemap 1";

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("schedule was written for instance {found}, not {expected}")]
    HashMismatch { expected: String, found: String },
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        msg: msg.into(),
    }
}

/// Non-comment lines with 1-based line numbers, header checked.
fn records<'a>(text: &'a str, header: &str) -> Result<Vec<(usize, Vec<&'a str>)>, ParseError> {
    let mut out = Vec::new();
    let mut seen_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !seen_header {
            if fields.join(" ") != header {
                return Err(syntax(i + 1, format!("expected header `{header}`, found `{line}`")));
            }
            seen_header = true;
            continue;
        }
        out.push((i + 1, fields));
    }
    if !seen_header {
        return Err(syntax(0, format!("missing header `{header}`")));
    }
    Ok(out)
}

fn field_count(line: usize, fields: &[&str], n: usize) -> Result<(), ParseError> {
    if fields.len() != n {
        return Err(syntax(
            line,
            format!("`{}` takes {} fields, got {}", fields[0], n - 1, fields.len() - 1),
        ));
    }
    Ok(())
}

fn money_field(line: usize, name: &str, s: &str) -> Result<Money, ParseError> {
    parse_money(s).ok_or_else(|| syntax(line, format!("{name}: `{s}` is not an exact number")))
}

fn int_field<T: std::str::FromStr>(line: usize, name: &str, s: &str) -> Result<T, ParseError> {
    s.parse()
        .map_err(|_| syntax(line, format!("{name}: `{s}` is not a non-negative integer")))
}

pub fn parse_instance(text: &str) -> Result<IdmInstance, ParseError> {
    let mut nodes = Vec::new();
    let mut debts = Vec::new();
    for (line, f) in records(text, INSTANCE_HEADER)? {
        match f[0] {
            "node" => {
                field_count(line, &f, 3)?;
                nodes.push((f[1].to_string(), money_field(line, "assets", f[2])?));
            }
            "debt" => {
                field_count(line, &f, 7)?;
                debts.push(DebtSpec {
                    debtor: f[1].to_string(),
                    creditor: f[2].to_string(),
                    label: int_field(line, "label", f[3])?,
                    amount: money_field(line, "amount", f[4])?,
                    t1: int_field(line, "t1", f[5])?,
                    t2: int_field(line, "t2", f[6])?,
                });
            }
            other => return Err(syntax(line, format!("unknown record `{other}`"))),
        }
    }
    Ok(build_instance(nodes, debts)?)
}

/// Canonical text: nodes in id order, debts in id order.
pub fn emit_instance(x: &IdmInstance) -> String {
    let mut s = format!("{INSTANCE_HEADER}\n");
    for v in x.nodes() {
        writeln!(s, "node {} {}", x.node_name(v), format_money(x.assets(v))).unwrap();
    }
    for d in x.debts() {
        writeln!(
            s,
            "debt {} {} {} {} {} {}",
            x.node_name(d.debtor),
            x.node_name(d.creditor),
            d.label,
            format_money(&d.terms.amount),
            d.terms.t1,
            d.terms.t2
        )
        .unwrap();
    }
    s
}

/// SHA-256 of the canonical text, hex encoded.
pub fn instance_hash(x: &IdmInstance) -> String {
    hex::encode(Sha256::digest(emit_instance(x).as_bytes()))
}

/// Parses a schedule for `x`. A schedule naming a different instance hash
/// is rejected.
pub fn parse_schedule(text: &str, x: &IdmInstance) -> Result<Schedule, ParseError> {
    let mut s = Schedule::new();
    let mut hash = None;
    for (line, f) in records(text, SCHEDULE_HEADER)? {
        match f[0] {
            "instance" => {
                field_count(line, &f, 2)?;
                if hash.is_some() {
                    return Err(syntax(line, "second `instance` record"));
                }
                hash = Some(f[1].to_string());
            }
            "pay" => {
                field_count(line, &f, 6)?;
                let node = |name: &str| {
                    x.node_id(name)
                        .ok_or_else(|| syntax(line, format!("unknown node `{name}`")))
                };
                let (a, c) = (node(f[1])?, node(f[2])?);
                let label: u32 = int_field(line, "label", f[3])?;
                let e = x
                    .find_debt(a, c, label)
                    .ok_or_else(|| syntax(line, format!("no debt {} -> {} #{label}", f[1], f[2])))?;
                let t: Time = int_field(line, "time", f[4])?;
                let amount = money_field(line, "amount", f[5])?;
                s.add(e, t, &amount);
            }
            other => return Err(syntax(line, format!("unknown record `{other}`"))),
        }
    }
    let expected = instance_hash(x);
    match hash {
        None => Err(syntax(0, "missing `instance` record")),
        Some(found) if found != expected => Err(ParseError::HashMismatch { expected, found }),
        Some(_) => Ok(s),
    }
}

/// Canonical text: payments sorted by (debt, time), zeros dropped.
pub fn emit_schedule(x: &IdmInstance, s: &Schedule) -> String {
    let mut out = format!("{SCHEDULE_HEADER}\ninstance {}\n", instance_hash(x));
    let mut rows: Vec<_> = s.iter().filter(|(_, a)| !num_traits::Zero::is_zero(*a)).collect();
    rows.sort_by_key(|&((e, t), _)| (e, t));
    for ((e, t), a) in rows {
        let d = x.debt(e);
        writeln!(
            out,
            "pay {} {} {} {} {}",
            x.node_name(d.debtor),
            x.node_name(d.creditor),
            d.label,
            t,
            format_money(a)
        )
        .unwrap();
    }
    out
}

pub fn parse_bailout(text: &str, x: &IdmInstance) -> Result<BailoutVector, ParseError> {
    let mut b = BailoutVector::zeros(x.node_count());
    for (line, f) in records(text, BAILOUT_HEADER)? {
        match f[0] {
            "bail" => {
                field_count(line, &f, 3)?;
                let v = x
                    .node_id(f[1])
                    .ok_or_else(|| syntax(line, format!("unknown node `{}`", f[1])))?;
                let amount = money_field(line, "amount", f[2])?;
                if num_traits::Signed::is_negative(&amount) {
                    return Err(syntax(line, "bailout amounts must be non-negative"));
                }
                b.add(v, &amount);
            }
            other => return Err(syntax(line, format!("unknown record `{other}`"))),
        }
    }
    Ok(b)
}

/// Canonical text: nodes in id order, zeros dropped.
pub fn emit_bailout(x: &IdmInstance, b: &BailoutVector) -> String {
    let mut out = format!("{BAILOUT_HEADER}\n");
    for v in x.nodes() {
        let a = b.get(v);
        if !num_traits::Zero::is_zero(a) {
            writeln!(out, "bail {} {}", x.node_name(v), format_money(a)).unwrap();
        }
    }
    out
}

/// `map <old> <new>` for every surviving timestamp.
pub fn emit_timemap(m: &TimeMap) -> String {
    let mut out = format!("{TIMEMAP_HEADER}\n");
    for (old, new) in m.entries() {
        writeln!(out, "map {old} {new}").unwrap();
    }
    out
}

/// Writes an instance and, when given, a schedule next to it, for
/// reproducing a failing property test. Returns the instance path.
pub fn dump_counterexample(
    dir: &Path,
    stem: &str,
    x: &IdmInstance,
    s: Option<&Schedule>,
) -> std::io::Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{stem}.idm"));
    std::fs::write(&path, emit_instance(x))?;
    if let Some(s) = s {
        std::fs::write(dir.join(format!("{stem}.sched")), emit_schedule(x, s))?;
    }
    Ok(path)
}
