//! Trace languages of g-choreographies.
//!
//! A resolution picks one branch at every choice; its trimmed hypergraph
//! orders the communication events of one run. The language collects the
//! action images of all prefixes of linear extensions of those orders.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::ast::{participants, ControlPoint, GChor};
use crate::error::{Error, Result};
use crate::hypergraph::{Action, Event, EventSet, HyperEdge, HyperGraph, Precedence};
use crate::lts::{self, Lts, Word};
use crate::semantics::sem;

/// Selected fork hyperedge for each resolved choice.
pub type Resolution = BTreeMap<ControlPoint, HyperEdge>;

pub type ChoiceEdges = BTreeMap<ControlPoint, BTreeSet<HyperEdge>>;

/// Fork hyperedges of a semantics graph, grouped by their control point.
pub fn choice_edges_of(graph: &HyperGraph) -> ChoiceEdges {
    let mut out = ChoiceEdges::new();
    for e in &graph.edges {
        if e.source.len() != 1 {
            continue;
        }
        if let Some(Event::Ctl(k)) = e.source.first() {
            if !k.barred {
                out.entry(*k).or_default().insert(e.clone());
            }
        }
    }
    out
}

pub fn choice_edges(g: &GChor) -> Result<ChoiceEdges> {
    Ok(choice_edges_of(&sem(g).into_graph()?))
}

fn subtree_ids(g: &GChor) -> BTreeSet<u32> {
    g.control_points().into_iter().map(|k| k.id).collect()
}

fn product(left: Vec<Resolution>, right: &[Resolution]) -> Vec<Resolution> {
    let mut out = Vec::with_capacity(left.len() * right.len());
    for l in left {
        for r in right {
            let mut m = l.clone();
            m.extend(r.iter().map(|(k, e)| (*k, e.clone())));
            out.push(m);
        }
    }
    out
}

fn resolutions_rec(g: &GChor, forks: &ChoiceEdges) -> Vec<Resolution> {
    match g {
        GChor::Zero | GChor::Interaction { .. } => vec![Resolution::new()],
        GChor::Seq(l, r) | GChor::Par { left: l, right: r, .. } => {
            product(resolutions_rec(l, forks), &resolutions_rec(r, forks))
        }
        GChor::Cho { cp, left, right } => {
            let Some(edges) = forks.get(cp) else {
                return product(resolutions_rec(left, forks), &resolutions_rec(right, forks));
            };
            let mut out = Vec::new();
            for branch in [left, right] {
                let ids = subtree_ids(branch);
                let Some(edge) = edges
                    .iter()
                    .find(|e| e.target.iter().any(|ev| ids.contains(&ev.control_point().id)))
                else {
                    continue;
                };
                for mut res in resolutions_rec(branch, forks) {
                    res.insert(*cp, edge.clone());
                    out.push(res);
                }
            }
            out
        }
    }
}

/// Every resolution of `g`, ranging over choices reachable under it.
pub fn resolutions(g: &GChor) -> Result<Vec<Resolution>> {
    let graph = sem(g).into_graph()?;
    Ok(resolutions_rec(g, &choice_edges_of(&graph)))
}

fn strip(graph: &HyperGraph, drop: &EventSet) -> HyperGraph {
    let mut out = HyperGraph::new();
    for e in &graph.edges {
        out.insert(HyperEdge::new(
            e.source.difference(drop).cloned().collect(),
            e.target.difference(drop).cloned().collect(),
        ));
    }
    out
}

/// Applies a resolution to a semantics graph and trims what is no longer
/// reachable.
///
/// Beside its fork hyperedge, a discarded branch loses every event that
/// lies between its first events and the merge of its choice.
pub fn resolve_graph(graph: &HyperGraph, sigma: &Resolution) -> Result<HyperGraph> {
    let forks = choice_edges_of(graph);
    let prec = Precedence::new(graph);
    let mut dead = EventSet::new();
    let mut removed: BTreeSet<&HyperEdge> = BTreeSet::new();
    for (k, edges) in &forks {
        let Some(chosen) = sigma.get(k) else { continue };
        let merge = Event::Ctl(crate::ast::mu(*k));
        for e in edges.iter().filter(|e| *e != chosen) {
            removed.insert(e);
            for ev in prec.events() {
                let in_branch = e.target.contains(ev) || e.target.iter().any(|t| prec.precedes(t, ev));
                if in_branch && prec.precedes(ev, &merge) {
                    dead.insert(ev.clone());
                }
            }
        }
    }
    let kept: HyperGraph = graph
        .edges
        .iter()
        .filter(|e| !removed.contains(e))
        .cloned()
        .collect();
    let kept = strip(&kept, &dead);

    let mut reached: EventSet = graph.minima().difference(&dead).cloned().collect();
    loop {
        let before = reached.len();
        for e in &kept.edges {
            if !e.source.is_disjoint(&reached) {
                reached.extend(e.target.iter().cloned());
            }
        }
        if reached.len() == before {
            break;
        }
    }
    let unreached: EventSet = kept.universe().difference(&reached).cloned().collect();
    let trimmed = strip(&kept, &unreached);

    for (k, edges) in &forks {
        if edges.len() > 1 && !sigma.contains_key(k) && trimmed.universe().contains(&Event::Ctl(*k)) {
            return Err(Error::IncompleteResolution(k.to_string()));
        }
    }
    Ok(trimmed)
}

pub fn resolve(g: &GChor, sigma: &Resolution) -> Result<HyperGraph> {
    resolve_graph(&sem(g).into_graph()?, sigma)
}

/// Communication events of one resolved graph with their predecessors.
#[derive(Debug, Clone)]
struct Run {
    actions: Vec<Action>,
    preds: Vec<u128>,
}

const MAX_EVENTS: usize = 128;

impl Run {
    fn new(graph: &HyperGraph) -> Result<Self> {
        let prec = Precedence::new(graph);
        let events: Vec<Event> = graph.comm_events().into_iter().collect();
        if events.len() > MAX_EVENTS {
            return Err(Error::TooManyEvents { limit: MAX_EVENTS });
        }
        let preds = events
            .iter()
            .map(|e| {
                events
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| prec.precedes(p, e))
                    .fold(0u128, |m, (i, _)| m | (1 << i))
            })
            .collect();
        Ok(Run {
            actions: events.iter().map(|e| e.action_opt().unwrap()).collect(),
            preds,
        })
    }
}

/// The language of a choreography as a transition system whose states are
/// a resolution index and the set of events fired so far.
#[derive(Debug, Clone)]
pub struct LanguageAutomaton {
    runs: Vec<Run>,
}

impl LanguageAutomaton {
    pub fn new(g: &GChor) -> Result<Self> {
        let graph = sem(g).into_graph()?;
        let forks = choice_edges_of(&graph);
        let sigmas = resolutions_rec(g, &forks);
        let runs = sigmas
            .par_iter()
            .map(|s| resolve_graph(&graph, s).and_then(|r| Run::new(&r)))
            .collect::<Result<Vec<_>>>()?;
        Ok(LanguageAutomaton { runs })
    }

    pub fn resolution_count(&self) -> usize {
        self.runs.len()
    }
}

impl Lts for LanguageAutomaton {
    type State = (usize, u128);

    fn initial_states(&self) -> Vec<Self::State> {
        (0..self.runs.len()).map(|i| (i, 0)).collect()
    }

    fn successors(&self, &(i, fired): &Self::State) -> Vec<(Action, Self::State)> {
        let run = &self.runs[i];
        (0..run.actions.len())
            .filter(|&j| fired & (1 << j) == 0 && run.preds[j] & !fired == 0)
            .map(|j| (run.actions[j].clone(), (i, fired | (1 << j))))
            .collect()
    }
}

/// The language of `g`, truncated to words of length at most `max_len`.
pub fn words(g: &GChor, max_len: Option<usize>) -> Result<BTreeSet<Word>> {
    let automaton = LanguageAutomaton::new(g)?;
    let per_run: Vec<BTreeSet<Word>> = (0..automaton.runs.len())
        .into_par_iter()
        .map(|i| {
            let single = LanguageAutomaton {
                runs: vec![automaton.runs[i].clone()],
            };
            lts::words(&single, max_len)
        })
        .collect();
    Ok(per_run.into_iter().flatten().collect())
}

pub fn member(g: &GChor, w: &[Action]) -> Result<bool> {
    Ok(lts::accepts(&LanguageAutomaton::new(g)?, w))
}

/// Parses a word against the participants of `g`.
pub fn parse_word_for(g: &GChor, text: &str) -> Result<Word> {
    lts::parse_word(text, &participants(g))
}
