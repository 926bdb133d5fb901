//! Example collections: `.gc` files with optional `.expect` sidecars.
//!
//! A sidecar holds `key = value` lines; `#` starts a comment. Keys:
//!
//! ```text
//! defined = true|false          well_branched = true|false
//! reason = <text>               active = A, B   passive = ...   neither = ...
//! deadlock_free = <verdict>     inclusion_fifo = <verdict>      strict_fifo = true|false
//! witness_fifo = <word>         inclusion_bag = <verdict>       equality_bag = true|false
//! min_states.<participant> = <n>
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::ast::{GChor, Participant};
use crate::cfsm::{minimize, project};
use crate::error::{Error, Result};
use crate::semantics::{analyze, Role, SemOptions};
use crate::syntax::parse;
use crate::system::BufferPolicy;
use crate::verify::{check_inclusion, verify, Report, Verdict, VerifyOptions};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Expectations {
    pub defined: Option<bool>,
    pub reason: Option<String>,
    pub well_branched: Option<bool>,
    pub roles: BTreeMap<Role, BTreeSet<Participant>>,
    pub deadlock_free: Option<Verdict>,
    pub inclusion_fifo: Option<Verdict>,
    pub strict_fifo: Option<bool>,
    pub witness_fifo: Option<String>,
    pub inclusion_bag: Option<Verdict>,
    pub equality_bag: Option<bool>,
    pub min_states: BTreeMap<Participant, usize>,
}

fn value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidSidecar(format!("bad value `{v}` for `{key}`")))
}

fn participant_list(v: &str) -> Result<BTreeSet<Participant>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Participant::new)
        .collect()
}

impl Expectations {
    pub fn parse(text: &str) -> Result<Self> {
        let mut ex = Expectations::default();
        let mut seen = BTreeSet::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidSidecar(format!("line {}: expected `key = value`", n + 1)))?;
            let (key, v) = (key.trim(), v.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::InvalidSidecar(format!("duplicate key `{key}`")));
            }
            match key {
                "defined" => ex.defined = Some(value(key, v)?),
                "reason" => ex.reason = Some(v.to_string()),
                "well_branched" => ex.well_branched = Some(value(key, v)?),
                "active" => drop(ex.roles.insert(Role::Active, participant_list(v)?)),
                "passive" => drop(ex.roles.insert(Role::Passive, participant_list(v)?)),
                "neither" => drop(ex.roles.insert(Role::Neither, participant_list(v)?)),
                "deadlock_free" => ex.deadlock_free = Some(value(key, v)?),
                "inclusion_fifo" => ex.inclusion_fifo = Some(value(key, v)?),
                "strict_fifo" => ex.strict_fifo = Some(value(key, v)?),
                "witness_fifo" => ex.witness_fifo = Some(v.to_string()),
                "inclusion_bag" => ex.inclusion_bag = Some(value(key, v)?),
                "equality_bag" => ex.equality_bag = Some(value(key, v)?),
                _ => match key.strip_prefix("min_states.") {
                    Some(p) => {
                        ex.min_states.insert(Participant::new(p)?, value(key, v)?);
                    }
                    None => return Err(Error::InvalidSidecar(format!("unknown key `{key}`"))),
                },
            }
        }
        Ok(ex)
    }
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub path: PathBuf,
    pub term: GChor,
    pub expect: Option<Expectations>,
}

impl CorpusEntry {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidSidecar(format!("{}: {e}", path.display())))?;
        let term = parse(&text)?;
        let sidecar = path.with_extension("expect");
        let expect = if sidecar.exists() {
            let s = fs::read_to_string(&sidecar)
                .map_err(|e| Error::InvalidSidecar(format!("{}: {e}", sidecar.display())))?;
            Some(Expectations::parse(&s)?)
        } else {
            None
        };
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(CorpusEntry {
            name,
            path: path.to_path_buf(),
            term,
            expect,
        })
    }
}

/// `.gc` files of a directory, sorted by name.
pub fn gc_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = fs::read_dir(dir).map_err(|e| Error::InvalidSidecar(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "gc"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn load_dir(dir: &Path) -> Result<Vec<CorpusEntry>> {
    gc_files(dir)?.iter().map(|p| CorpusEntry::load(p)).collect()
}

/// Outcome of checking an entry: the report under the requested policy and
/// every expectation that did not hold.
#[derive(Debug, Clone, Serialize)]
pub struct Checked {
    #[serde(flatten)]
    pub report: Report,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mismatches: Vec<String>,
}

fn cmp<T: PartialEq + std::fmt::Debug>(out: &mut Vec<String>, key: &str, want: &Option<T>, got: T) {
    if let Some(w) = want {
        if *w != got {
            out.push(format!("{key}: expected {w:?}, got {got:?}"));
        }
    }
}

/// Verifies `entry` and compares the results with its sidecar.
pub fn check_entry(entry: &CorpusEntry, opts: VerifyOptions) -> Result<Checked> {
    let g = &entry.term;
    let report = verify(&entry.name, g, opts)?;
    let mut m = Vec::new();
    let Some(ex) = &entry.expect else {
        return Ok(Checked { report, mismatches: m });
    };
    let analysis = analyze(g, SemOptions { reflections: opts.reflections });
    cmp(&mut m, "defined", &ex.defined, analysis.result.is_defined());
    cmp(
        &mut m,
        "reason",
        &ex.reason,
        analysis.result.reason().map(|r| r.to_string()).unwrap_or_default(),
    );
    cmp(
        &mut m,
        "well_branched",
        &ex.well_branched,
        analysis.choices.iter().all(|c| c.well_branched),
    );
    let roles = analysis.roles();
    for (role, want) in &ex.roles {
        let got: BTreeSet<Participant> = roles
            .iter()
            .filter(|(_, r)| *r == role)
            .map(|(p, _)| p.clone())
            .collect();
        cmp(&mut m, &role.to_string(), &Some(want.clone()), got);
    }

    let fifo = if opts.policy == BufferPolicy::Fifo {
        report.inclusion.clone()
    } else {
        check_inclusion(g, BufferPolicy::Fifo, opts.budget)?
    };
    let bag = if opts.policy == BufferPolicy::Bag {
        report.inclusion.clone()
    } else {
        check_inclusion(g, BufferPolicy::Bag, opts.budget)?
    };
    cmp(&mut m, "deadlock_free", &ex.deadlock_free, report.deadlock_free);
    cmp(&mut m, "inclusion_fifo", &ex.inclusion_fifo, fifo.verdict);
    cmp(&mut m, "strict_fifo", &ex.strict_fifo, fifo.strict);
    cmp(&mut m, "witness_fifo", &ex.witness_fifo, fifo.witness.unwrap_or_default());
    cmp(&mut m, "inclusion_bag", &ex.inclusion_bag, bag.verdict);
    cmp(&mut m, "equality_bag", &ex.equality_bag, bag.equality);
    for (p, n) in &ex.min_states {
        let states = minimize(&project(g, p)).states.len();
        cmp(&mut m, &format!("min_states.{p}"), &Some(*n), states);
    }
    Ok(Checked { report, mismatches: m })
}
