//! Events, hyperedges and the relational algebra over hypergraphs.
//!
//! A hypergraph is a finite set of hyperedges `(source, target)` relating
//! sets of events. Events are either communication events (a send `AB!m` or
//! a receive `AB?m` tagged with the control point of their interaction) or
//! control-point events marking forks and merges.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::ast::{mu, ControlPoint, Message, Participant};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    Out,
    In,
}

/// An ordered pair of distinct participants.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Channel {
    pub sender: Participant,
    pub receiver: Participant,
}

impl Channel {
    pub fn new(sender: Participant, receiver: Participant) -> Self {
        debug_assert_ne!(sender, receiver);
        Channel { sender, receiver }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.sender, self.receiver)
    }
}

/// A communication action: an event with its control point erased.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Action {
    pub channel: Channel,
    pub dir: Direction,
    pub msg: Message,
}

impl Action {
    pub fn new(channel: Channel, dir: Direction, msg: Message) -> Self {
        Action { channel, dir, msg }
    }

    pub fn subject(&self) -> &Participant {
        match self.dir {
            Direction::Out => &self.channel.sender,
            Direction::In => &self.channel.receiver,
        }
    }

    pub fn is_output(&self) -> bool {
        self.dir == Direction::Out
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = match self.dir {
            Direction::Out => '!',
            Direction::In => '?',
        };
        write!(f, "{}{}{}", self.channel, sym, self.msg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Event {
    Comm {
        channel: Channel,
        dir: Direction,
        cp: ControlPoint,
        msg: Message,
    },
    Ctl(ControlPoint),
}

impl Event {
    pub fn output(sender: Participant, receiver: Participant, msg: Message, cp: ControlPoint) -> Self {
        Event::Comm {
            channel: Channel::new(sender, receiver),
            dir: Direction::Out,
            cp,
            msg,
        }
    }

    pub fn input(sender: Participant, receiver: Participant, msg: Message, cp: ControlPoint) -> Self {
        Event::Comm {
            channel: Channel::new(sender, receiver),
            dir: Direction::In,
            cp,
            msg,
        }
    }

    pub fn is_control(&self) -> bool {
        matches!(self, Event::Ctl(_))
    }

    pub fn is_comm(&self) -> bool {
        !self.is_control()
    }

    pub fn is_output(&self) -> bool {
        matches!(self, Event::Comm { dir: Direction::Out, .. })
    }

    pub fn is_input(&self) -> bool {
        matches!(self, Event::Comm { dir: Direction::In, .. })
    }

    pub fn control_point(&self) -> ControlPoint {
        match self {
            Event::Comm { cp, .. } | Event::Ctl(cp) => *cp,
        }
    }

    /// Subject of a communication event, `None` on control points.
    pub fn subject_opt(&self) -> Option<&Participant> {
        match self {
            Event::Comm {
                channel,
                dir: Direction::Out,
                ..
            } => Some(&channel.sender),
            Event::Comm {
                channel,
                dir: Direction::In,
                ..
            } => Some(&channel.receiver),
            Event::Ctl(_) => None,
        }
    }

    pub fn has_subject(&self, a: &Participant) -> bool {
        self.subject_opt() == Some(a)
    }

    pub fn action_opt(&self) -> Option<Action> {
        match self {
            Event::Comm {
                channel, dir, msg, ..
            } => Some(Action::new(channel.clone(), *dir, msg.clone())),
            Event::Ctl(_) => None,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Comm { cp, .. } => write!(f, "{}@{}", self.action_opt().unwrap(), cp),
            Event::Ctl(cp) => write!(f, "{cp}"),
        }
    }
}

/// Sender of an output, receiver of an input.
pub fn subject(e: &Event) -> Result<&Participant> {
    e.subject_opt()
        .ok_or_else(|| Error::UndefinedOnControlPoint(e.to_string()))
}

/// The action of a communication event.
pub fn act(e: &Event) -> Result<Action> {
    e.action_opt()
        .ok_or_else(|| Error::UndefinedOnControlPoint(e.to_string()))
}

pub type EventSet = BTreeSet<Event>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HyperEdge {
    pub source: EventSet,
    pub target: EventSet,
}

impl HyperEdge {
    pub fn new(source: EventSet, target: EventSet) -> Self {
        HyperEdge { source, target }
    }

    pub fn simple(source: Event, target: Event) -> Self {
        HyperEdge {
            source: [source].into(),
            target: [target].into(),
        }
    }

    pub fn inverse(&self) -> Self {
        HyperEdge {
            source: self.target.clone(),
            target: self.source.clone(),
        }
    }
}

fn fmt_set(set: &EventSet, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if set.len() == 1 {
        return write!(f, "{}", set.iter().next().unwrap());
    }
    f.write_str("{")?;
    for (i, e) in set.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{e}")?;
    }
    f.write_str("}")
}

impl fmt::Display for HyperEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_set(&self.source, f)?;
        f.write_str(" -> ")?;
        fmt_set(&self.target, f)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HyperGraph {
    pub edges: BTreeSet<HyperEdge>,
}

impl FromIterator<HyperEdge> for HyperGraph {
    fn from_iter<I: IntoIterator<Item = HyperEdge>>(iter: I) -> Self {
        HyperGraph {
            edges: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for HyperGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.edges {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

impl HyperGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    /// Inserts an edge unless one of its sides is empty.
    pub fn insert(&mut self, edge: HyperEdge) -> bool {
        if edge.source.is_empty() || edge.target.is_empty() {
            return false;
        }
        self.edges.insert(edge)
    }

    pub fn union(&self, other: &HyperGraph) -> HyperGraph {
        self.edges.iter().chain(&other.edges).cloned().collect()
    }

    pub fn inverse(&self) -> HyperGraph {
        self.edges.iter().map(HyperEdge::inverse).collect()
    }

    /// All events occurring in some source or target.
    pub fn universe(&self) -> EventSet {
        self.edges
            .iter()
            .flat_map(|e| e.source.iter().chain(&e.target))
            .cloned()
            .collect()
    }

    pub fn comm_events(&self) -> EventSet {
        self.universe().into_iter().filter(Event::is_comm).collect()
    }

    /// Events occurring in no target set.
    pub fn minima(&self) -> EventSet {
        let targets: BTreeSet<&Event> = self.edges.iter().flat_map(|e| &e.target).collect();
        self.universe()
            .into_iter()
            .filter(|e| !targets.contains(e))
            .collect()
    }

    /// Events occurring in no source set.
    pub fn maxima(&self) -> EventSet {
        let sources: BTreeSet<&Event> = self.edges.iter().flat_map(|e| &e.source).collect();
        self.universe()
            .into_iter()
            .filter(|e| !sources.contains(e))
            .collect()
    }
}

/// `{(s, t') | (s, t) ∈ r, (s', t') ∈ r2, t ∩ s' ≠ ∅}`
pub fn compose(r: &HyperGraph, r2: &HyperGraph) -> HyperGraph {
    let mut out = HyperGraph::new();
    for a in &r.edges {
        for b in &r2.edges {
            if !a.target.is_disjoint(&b.source) {
                out.edges
                    .insert(HyperEdge::new(a.source.clone(), b.target.clone()));
            }
        }
    }
    out
}

/// Union of all n-fold self-compositions of `r`, n ≥ 1.
pub fn closure(r: &HyperGraph) -> HyperGraph {
    let mut acc = r.clone();
    let mut frontier = r.clone();
    loop {
        let next = compose(&frontier, r);
        let fresh: HyperGraph = next
            .edges
            .into_iter()
            .filter(|e| !acc.edges.contains(e))
            .collect();
        if fresh.is_empty() {
            return acc;
        }
        acc.edges.extend(fresh.edges.iter().cloned());
        frontier = fresh;
    }
}

/// Strict reachability between the events of a hypergraph.
///
/// `e` precedes `e'` when some chain of hyperedges leads from a source set
/// containing `e` to a target set containing `e'`.
#[derive(Debug, Clone)]
pub struct Precedence {
    events: Vec<Event>,
    index: BTreeMap<Event, usize>,
    reach: Vec<Vec<bool>>,
}

impl Precedence {
    pub fn new(r: &HyperGraph) -> Self {
        let events: Vec<Event> = r.universe().into_iter().collect();
        let index: BTreeMap<Event, usize> =
            events.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let n = events.len();
        let mut succ = vec![BTreeSet::new(); n];
        for edge in &r.edges {
            for s in &edge.source {
                for t in &edge.target {
                    succ[index[s]].insert(index[t]);
                }
            }
        }
        let mut reach = vec![vec![false; n]; n];
        for (start, row) in reach.iter_mut().enumerate() {
            let mut queue: VecDeque<usize> = succ[start].iter().copied().collect();
            while let Some(v) = queue.pop_front() {
                if !row[v] {
                    row[v] = true;
                    queue.extend(succ[v].iter().copied());
                }
            }
        }
        Precedence {
            events,
            index,
            reach,
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn contains(&self, e: &Event) -> bool {
        self.index.contains_key(e)
    }

    pub fn precedes(&self, a: &Event, b: &Event) -> bool {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) => self.reach[i][j],
            _ => false,
        }
    }

    /// Strict predecessors of `e`.
    pub fn predecessors<'a>(&'a self, e: &'a Event) -> impl Iterator<Item = &'a Event> + 'a {
        let j = self.index.get(e).copied();
        self.events
            .iter()
            .enumerate()
            .filter(move |(i, _)| j.is_some_and(|j| self.reach[*i][j]))
            .map(|(_, ev)| ev)
    }

    pub fn pairs(&self) -> BTreeSet<(Event, Event)> {
        let mut out = BTreeSet::new();
        for (i, row) in self.reach.iter().enumerate() {
            for (j, &r) in row.iter().enumerate() {
                if r {
                    out.insert((self.events[i].clone(), self.events[j].clone()));
                }
            }
        }
        out
    }

    pub fn is_acyclic(&self) -> bool {
        (0..self.events.len()).all(|i| !self.reach[i][i])
    }
}

/// `{(e, e') | (s, t) ∈ closure(r), e ∈ s, e' ∈ t}`
pub fn happens_before(r: &HyperGraph) -> BTreeSet<(Event, Event)> {
    Precedence::new(r).pairs()
}

fn all_control(set: &EventSet) -> bool {
    set.iter().all(Event::is_control)
}

/// Whether every closure edge leaving `from` has an all-control target.
/// Walks chains of overlapping edges.
fn chains_end_in_control(r: &HyperGraph, from: &EventSet) -> bool {
    let edges: Vec<&HyperEdge> = r.edges.iter().collect();
    let mut seen = vec![false; edges.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (i, e) in edges.iter().enumerate() {
        if !e.source.is_disjoint(from) {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        if !all_control(&edges[i].target) {
            return false;
        }
        for (j, e) in edges.iter().enumerate() {
            if !seen[j] && !e.source.is_disjoint(&edges[i].target) {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    true
}

/// Dual of [`chains_end_in_control`]: chains entering `to`.
fn chains_start_in_control(r: &HyperGraph, to: &EventSet) -> bool {
    let edges: Vec<&HyperEdge> = r.edges.iter().collect();
    let mut seen = vec![false; edges.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (i, e) in edges.iter().enumerate() {
        if !e.target.is_disjoint(to) {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        if !all_control(&edges[i].source) {
            return false;
        }
        for (j, e) in edges.iter().enumerate() {
            if !seen[j] && !e.target.is_disjoint(&edges[i].source) {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    true
}

/// Hyperedges carrying the last communication actions of `r`.
pub fn last_edges(r: &HyperGraph) -> BTreeSet<HyperEdge> {
    r.edges
        .iter()
        .filter(|e| e.target.iter().all(Event::is_comm) && chains_end_in_control(r, &e.target))
        .cloned()
        .collect()
}

/// Hyperedges carrying the first communication actions of `r`.
pub fn first_edges(r: &HyperGraph) -> BTreeSet<HyperEdge> {
    r.edges
        .iter()
        .filter(|e| e.source.iter().all(Event::is_comm) && chains_start_in_control(r, &e.source))
        .cloned()
        .collect()
}

fn comm_members(edges: &BTreeSet<HyperEdge>) -> EventSet {
    edges
        .iter()
        .flat_map(|e| e.source.iter().chain(&e.target))
        .filter(|e| e.is_comm())
        .cloned()
        .collect()
}

/// Sequential composition: `r ∪ r2` plus a simple edge from each last
/// communication event of `r` to each first communication event of `r2`
/// sharing its subject.
pub fn seq_compose(r: &HyperGraph, r2: &HyperGraph) -> Result<HyperGraph> {
    let u1 = r.universe();
    let u2 = r2.universe();
    if let Some(shared) = u1.intersection(&u2).next() {
        return Err(Error::UniverseOverlap(shared.to_string()));
    }
    let mut out = r.union(r2);
    let lasts = comm_members(&last_edges(r));
    let firsts = comm_members(&first_edges(r2));
    for e in &lasts {
        for e2 in &firsts {
            if e.subject_opt() == e2.subject_opt() {
                out.edges.insert(HyperEdge::simple(e.clone(), e2.clone()));
            }
        }
    }
    Ok(out)
}

/// The `a`-only part of an event set: foreign outputs become their control
/// point, foreign inputs the barred control point.
pub fn only_set(set: &EventSet, a: &Participant) -> EventSet {
    set.iter()
        .map(|e| match e {
            Event::Ctl(_) => e.clone(),
            Event::Comm { .. } if e.has_subject(a) => e.clone(),
            Event::Comm { cp, dir, .. } => match dir {
                Direction::Out => Event::Ctl(*cp),
                Direction::In => Event::Ctl(mu(*cp)),
            },
        })
        .collect()
}

pub fn only(r: &HyperGraph, a: &Participant) -> HyperGraph {
    r.edges
        .iter()
        .map(|e| HyperEdge::new(only_set(&e.source, a), only_set(&e.target, a)))
        .collect()
}

/// Intersection of two event sets up to control points.
pub fn sqcap(s: &EventSet, t: &EventSet) -> Result<BTreeSet<Action>> {
    let left = s.iter().map(act).collect::<Result<BTreeSet<_>>>()?;
    let right = t.iter().map(act).collect::<Result<BTreeSet<_>>>()?;
    Ok(left.intersection(&right).cloned().collect())
}

/// Graphviz rendering: one node per event, hyperedges with more than one
/// source or target go through a point-shaped auxiliary node.
pub fn to_dot(r: &HyperGraph, name: &str) -> String {
    let events: Vec<Event> = r.universe().into_iter().collect();
    let id: BTreeMap<&Event, usize> = events.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{name}\" {{");
    for (i, e) in events.iter().enumerate() {
        let shape = if e.is_control() { "circle" } else { "box" };
        let _ = writeln!(out, "  e{i} [label=\"{e}\", shape={shape}];");
    }
    for (k, edge) in r.edges.iter().enumerate() {
        if edge.source.len() == 1 && edge.target.len() == 1 {
            let s = id[edge.source.iter().next().unwrap()];
            let t = id[edge.target.iter().next().unwrap()];
            let _ = writeln!(out, "  e{s} -> e{t};");
        } else {
            let _ = writeln!(out, "  h{k} [shape=point];");
            for s in &edge.source {
                let _ = writeln!(out, "  e{} -> h{k} [arrowhead=none];", id[s]);
            }
            for t in &edge.target {
                let _ = writeln!(out, "  h{k} -> e{};", id[t]);
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Participant {
        Participant::new(s).unwrap()
    }
    fn out(a: &str, b: &str, m: &str, k: u32) -> Event {
        Event::output(p(a), p(b), Message::new(m).unwrap(), ControlPoint::new(k))
    }
    fn inp(a: &str, b: &str, m: &str, k: u32) -> Event {
        Event::input(p(a), p(b), Message::new(m).unwrap(), ControlPoint::new(k))
    }
    fn ctl(k: u32) -> Event {
        Event::Ctl(ControlPoint::new(k))
    }
    fn merge(k: u32) -> Event {
        Event::Ctl(mu(ControlPoint::new(k)))
    }
    fn set<const N: usize>(es: [Event; N]) -> EventSet {
        es.into_iter().collect()
    }
    fn edge<const N: usize, const M: usize>(s: [Event; N], t: [Event; M]) -> HyperEdge {
        HyperEdge::new(set(s), set(t))
    }
    fn interaction(a: &str, b: &str, m: &str, k: u32) -> HyperGraph {
        [HyperEdge::simple(out(a, b, m, k), inp(a, b, m, k))]
            .into_iter()
            .collect()
    }

    /// Total order AB!x < AB?x < BA!y < BA?y, drawn as a chain.
    fn chain() -> HyperGraph {
        [
            HyperEdge::simple(out("A", "B", "x", 1), inp("A", "B", "x", 1)),
            HyperEdge::simple(inp("A", "B", "x", 1), out("B", "A", "y", 2)),
            HyperEdge::simple(out("B", "A", "y", 2), inp("B", "A", "y", 2)),
        ]
        .into_iter()
        .collect()
    }

    /// Choice at k3 between AB!x@k1 and AB!y@k2.
    fn choice() -> HyperGraph {
        [
            edge([ctl(3)], [out("A", "B", "x", 1)]),
            edge([ctl(3)], [out("A", "B", "y", 2)]),
            edge([out("A", "B", "x", 1)], [inp("A", "B", "x", 1)]),
            edge([out("A", "B", "y", 2)], [inp("A", "B", "y", 2)]),
            edge([inp("A", "B", "x", 1)], [merge(3)]),
            edge([inp("A", "B", "y", 2)], [merge(3)]),
        ]
        .into_iter()
        .collect()
    }

    /// Parallel threads forked at k3 and joined at ~k3 through hyperedges.
    fn fork_join() -> HyperGraph {
        [
            edge([ctl(3)], [out("A", "B", "x", 1), out("A", "B", "y", 2)]),
            edge([out("A", "B", "x", 1)], [inp("A", "B", "x", 1)]),
            edge([out("A", "B", "y", 2)], [inp("A", "B", "y", 2)]),
            edge([inp("A", "B", "x", 1), inp("A", "B", "y", 2)], [merge(3)]),
        ]
        .into_iter()
        .collect()
    }

    #[test]
    fn subject_and_action() {
        assert_eq!(subject(&out("A", "B", "x", 1)).unwrap(), &p("A"));
        assert_eq!(subject(&inp("A", "B", "x", 1)).unwrap(), &p("B"));
        assert!(subject(&ctl(3)).is_err());
        assert_eq!(act(&out("A", "B", "x", 1)).unwrap().to_string(), "AB!x");
        assert_eq!(act(&inp("A", "B", "x", 9)).unwrap().to_string(), "AB?x");
        assert!(matches!(act(&ctl(1)), Err(Error::UndefinedOnControlPoint(_))));
    }

    #[test]
    fn composition() {
        let a = ctl(1);
        let b = ctl(2);
        let c = ctl(3);
        let d = ctl(4);
        let r: HyperGraph = [HyperEdge::simple(a.clone(), b.clone())].into_iter().collect();
        let s: HyperGraph = [HyperEdge::simple(b.clone(), c.clone())].into_iter().collect();
        let t: HyperGraph = [HyperEdge::simple(c.clone(), d.clone())].into_iter().collect();
        assert_eq!(
            compose(&r, &s),
            [HyperEdge::simple(a.clone(), c.clone())].into_iter().collect()
        );
        assert!(compose(&r, &t).is_empty());

        // composing through one shared member of a target set
        let wide: HyperGraph = [edge([a.clone()], [b.clone(), c.clone()])].into_iter().collect();
        let narrow: HyperGraph = [edge([c.clone()], [d.clone(), ctl(5)])].into_iter().collect();
        assert_eq!(
            compose(&wide, &narrow),
            [edge([a], [d, ctl(5)])].into_iter().collect()
        );
    }

    #[test]
    fn closure_properties() {
        let r = chain();
        let c = closure(&r);
        assert!(c.edges.contains(&HyperEdge::simple(out("A", "B", "x", 1), inp("B", "A", "y", 2))));
        assert!(r.edges.is_subset(&c.edges));
        assert_eq!(closure(&c), c);
        let single = interaction("A", "B", "x", 1);
        assert_eq!(closure(&single), single);
    }

    #[test]
    fn happens_before_chain() {
        let hb = happens_before(&chain());
        assert_eq!(hb.len(), 6);
        assert!(hb.contains(&(out("A", "B", "x", 1), inp("B", "A", "y", 2))));
        assert!(happens_before(&HyperGraph::new()).is_empty());
    }

    #[test]
    fn happens_before_through_hyperedges() {
        // every member of the source precedes every member of the composed target
        let r: HyperGraph = [
            edge([ctl(1), ctl(2)], [ctl(3), ctl(4)]),
            edge([ctl(4)], [ctl(5), ctl(6)]),
        ]
        .into_iter()
        .collect();
        let hb = happens_before(&r);
        for s in [1, 2] {
            for t in [3, 4, 5, 6] {
                assert!(hb.contains(&(ctl(s), ctl(t))), "{s} {t}");
            }
        }
        assert!(!hb.contains(&(ctl(3), ctl(5))));
    }

    #[test]
    fn extremal_events() {
        assert_eq!(choice().minima(), set([ctl(3)]));
        assert_eq!(choice().maxima(), set([merge(3)]));
        assert_eq!(fork_join().minima(), set([ctl(3)]));
        assert_eq!(fork_join().maxima(), set([merge(3)]));
        assert_eq!(chain().minima(), set([out("A", "B", "x", 1)]));
        assert_eq!(chain().maxima(), set([inp("B", "A", "y", 2)]));
        assert!(HyperGraph::new().minima().is_empty());
        assert!(HyperGraph::new().maxima().is_empty());
    }

    #[test]
    fn first_and_last_edges() {
        let r = chain();
        assert_eq!(
            last_edges(&r),
            [HyperEdge::simple(out("B", "A", "y", 2), inp("B", "A", "y", 2))].into()
        );
        assert_eq!(
            first_edges(&r),
            [HyperEdge::simple(out("A", "B", "x", 1), inp("A", "B", "x", 1))].into()
        );
        let both: BTreeSet<HyperEdge> = [
            HyperEdge::simple(out("A", "B", "x", 1), inp("A", "B", "x", 1)),
            HyperEdge::simple(out("A", "B", "y", 2), inp("A", "B", "y", 2)),
        ]
        .into();
        for g in [choice(), fork_join()] {
            assert_eq!(last_edges(&g), both);
            assert_eq!(first_edges(&g), both);
        }
        let single = interaction("A", "B", "x", 1);
        assert_eq!(last_edges(&single), single.edges);
        assert!(first_edges(&HyperGraph::new()).is_empty());
    }

    #[test]
    fn first_edges_are_last_edges_of_the_inverse() {
        for g in [chain(), choice(), fork_join(), interaction("A", "B", "x", 1)] {
            let via_inverse: BTreeSet<HyperEdge> =
                last_edges(&g.inverse()).iter().map(HyperEdge::inverse).collect();
            assert_eq!(first_edges(&g), via_inverse);
        }
    }

    #[test]
    fn sequential_composition_dependencies() {
        let ab = interaction("A", "B", "x", 1);
        let extra = |r2: &HyperGraph| -> BTreeSet<HyperEdge> {
            let s = seq_compose(&ab, r2).unwrap();
            s.edges
                .difference(&ab.union(r2).edges)
                .cloned()
                .collect()
        };
        assert_eq!(
            extra(&interaction("B", "C", "y", 2)),
            [HyperEdge::simple(inp("A", "B", "x", 1), out("B", "C", "y", 2))].into()
        );
        assert_eq!(
            extra(&interaction("A", "B", "y", 2)),
            [
                HyperEdge::simple(out("A", "B", "x", 1), out("A", "B", "y", 2)),
                HyperEdge::simple(inp("A", "B", "x", 1), inp("A", "B", "y", 2)),
            ]
            .into()
        );
        assert!(extra(&interaction("C", "D", "y", 2)).is_empty());
        assert!(matches!(
            seq_compose(&ab, &ab),
            Err(Error::UniverseOverlap(_))
        ));
    }

    #[test]
    fn participant_only_parts() {
        let ab = interaction("A", "B", "x", 1);
        assert_eq!(
            only(&ab, &p("A")),
            [edge([out("A", "B", "x", 1)], [merge(1)])].into_iter().collect()
        );
        assert_eq!(
            only(&ab, &p("C")),
            [edge([ctl(1)], [merge(1)])].into_iter().collect()
        );
        assert_eq!(
            only(&ab, &p("B")),
            [edge([ctl(1)], [inp("A", "B", "x", 1)])].into_iter().collect()
        );
    }

    #[test]
    fn intersection_up_to_control_points() {
        let x1 = set([out("A", "B", "x", 1)]);
        let x9 = set([out("A", "B", "x", 9)]);
        let y2 = set([out("A", "B", "y", 2)]);
        assert_eq!(sqcap(&x1, &x9).unwrap().len(), 1);
        assert!(sqcap(&x1, &y2).unwrap().is_empty());
        assert!(sqcap(&x1, &EventSet::new()).unwrap().is_empty());
        assert!(sqcap(&set([ctl(1)]), &x1).is_err());
    }

    #[test]
    fn dot_uses_point_nodes_for_hyperedges() {
        let dot = to_dot(&fork_join(), "g");
        assert_eq!(dot.matches("shape=point").count(), 2);
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot, to_dot(&fork_join(), "g"));
    }
}
