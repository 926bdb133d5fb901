#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use chorc::cfsm::{traces, Cfsm};
use chorc::corpus::{load_dir, CorpusEntry};
use chorc::language::{resolutions, resolve};
use chorc::lts::Word;
use chorc::{Event, GChor, HyperGraph};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus() -> Vec<CorpusEntry> {
    load_dir(&corpus_dir()).expect("corpus loads")
}

/// Fixed seeds with sizes cycling through 1..=6.
pub fn seeds() -> Vec<(u64, usize)> {
    (1..=200u64).map(|s| (s, 1 + (s as usize % 6))).collect()
}

/// Event-level transitive closure by Warshall's algorithm over the pairs
/// `(e, e')` with `e` in the source and `e'` in the target of an edge.
pub fn warshall(r: &HyperGraph) -> BTreeSet<(Event, Event)> {
    let events: Vec<Event> = r
        .edges
        .iter()
        .flat_map(|e| e.source.iter().chain(e.target.iter()).cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let ix: BTreeMap<&Event, usize> = events.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let n = events.len();
    let mut m = vec![vec![false; n]; n];
    for e in &r.edges {
        for s in &e.source {
            for t in &e.target {
                m[ix[s]][ix[t]] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                for j in 0..n {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if m[i][j] {
                out.insert((events[i].clone(), events[j].clone()));
            }
        }
    }
    out
}

fn sequences(pool: &[Event], cur: &mut Vec<Event>, out: &mut Vec<Vec<Event>>) {
    out.push(cur.clone());
    for e in pool {
        if !cur.contains(e) {
            cur.push(e.clone());
            sequences(pool, cur, out);
            cur.pop();
        }
    }
}

/// Whether an event word satisfies the four language conditions for the
/// resolved graph `r` with order `hb`.
fn psi(w: &[Event], events: &BTreeSet<Event>, hb: &BTreeSet<(Event, Event)>) -> bool {
    for (i, a) in w.iter().enumerate() {
        if !events.contains(a) {
            return false;
        }
        for (j, b) in w.iter().enumerate() {
            if i != j && (a == b || (hb.contains(&(a.clone(), b.clone())) && i > j)) {
                return false;
            }
        }
        for e in events {
            if hb.contains(&(e.clone(), a.clone())) && !w[..i].contains(e) {
                return false;
            }
        }
    }
    true
}

/// Language of `g` by filtering every sequence of distinct communication
/// events of every resolution; `None` when some resolution has more than
/// `limit` communication events.
pub fn psi_language(g: &GChor, limit: usize) -> Option<BTreeSet<Word>> {
    let mut out = BTreeSet::new();
    for sigma in resolutions(g).ok()? {
        let r = resolve(g, &sigma).ok()?;
        let hb = warshall(&r);
        let events: BTreeSet<Event> = r.comm_events();
        if events.len() > limit {
            return None;
        }
        let pool: Vec<Event> = events.iter().cloned().collect();
        let mut all = Vec::new();
        sequences(&pool, &mut Vec::new(), &mut all);
        for w in all {
            if psi(&w, &events, &hb) {
                out.insert(w.iter().map(|e| e.action_opt().unwrap()).collect());
            }
        }
    }
    Some(out)
}

/// Number of distinct residuals `{v | uv ∈ L}` over the words `u` of a
/// finite prefix-closed language: the state count of its minimal machine.
pub fn residual_count(lang: &BTreeSet<Word>) -> usize {
    let residual = |u: &Word| -> BTreeSet<Word> {
        lang.iter()
            .filter(|w| w.starts_with(u))
            .map(|w| w[u.len()..].to_vec())
            .collect()
    };
    lang.iter().map(residual).collect::<BTreeSet<_>>().len()
}

pub fn is_prefix_closed(lang: &BTreeSet<Word>) -> bool {
    lang.iter()
        .all(|w| w.is_empty() || lang.contains(&w[..w.len() - 1].to_vec()))
}

pub fn machine_traces(m: &Cfsm) -> BTreeSet<Word> {
    traces(m, None).expect("projections are acyclic")
}
