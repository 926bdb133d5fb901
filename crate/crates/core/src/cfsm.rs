//! Communicating finite-state machines and the projection of
//! choreographies onto them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::Serialize;
use serde_json::json;

use crate::ast::{GChor, Participant};
use crate::error::{Error, Result};
use crate::hypergraph::{Action, Channel, Direction};
use crate::lts::{self, Lts, Word};

/// Machine states. Names come from syntax paths; products and
/// determinisation build composite states from them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum State {
    Named(String),
    Pair(Box<State>, Box<State>),
    Set(BTreeSet<State>),
}

impl State {
    pub fn named(s: impl Into<String>) -> Self {
        State::Named(s.into())
    }

    pub fn pair(a: State, b: State) -> Self {
        State::Pair(Box::new(a), Box::new(b))
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Named(s) => f.write_str(s),
            State::Pair(a, b) => write!(f, "({a},{b})"),
            State::Set(s) => {
                f.write_str("{")?;
                for (i, q) in s.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{q}")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl Serialize for State {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: State,
    pub label: Action,
    pub to: State,
}

impl Transition {
    pub fn new(from: State, label: Action, to: State) -> Self {
        Transition { from, label, to }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfsm {
    pub participant: Participant,
    pub states: BTreeSet<State>,
    pub initial: State,
    pub transitions: BTreeSet<Transition>,
    /// Exit state of the projection; informative only.
    pub exit: Option<State>,
}

impl Cfsm {
    /// A machine with one state and no transitions.
    pub fn single(participant: Participant, q: State) -> Self {
        Cfsm {
            participant,
            states: [q.clone()].into(),
            initial: q.clone(),
            transitions: BTreeSet::new(),
            exit: Some(q),
        }
    }

    pub fn edge(participant: Participant, from: State, label: Action, to: State) -> Self {
        Cfsm {
            participant,
            states: [from.clone(), to.clone()].into(),
            initial: from.clone(),
            transitions: [Transition::new(from, label, to.clone())].into(),
            exit: Some(to),
        }
    }

    pub fn outgoing<'a>(&'a self, q: &'a State) -> impl Iterator<Item = &'a Transition> + 'a {
        self.transitions.iter().filter(move |t| &t.from == q)
    }

    /// Every label has the machine's participant as subject.
    pub fn is_local(&self) -> bool {
        self.transitions
            .iter()
            .all(|t| t.label.subject() == &self.participant)
    }

    pub fn is_deterministic(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.transitions
            .iter()
            .all(|t| seen.insert((&t.from, &t.label)))
    }

    pub fn is_acyclic(&self) -> bool {
        // Kahn's algorithm over the state graph
        let mut indeg: BTreeMap<&State, usize> = self.states.iter().map(|q| (q, 0)).collect();
        for t in &self.transitions {
            *indeg.entry(&t.to).or_default() += 1;
        }
        let mut ready: Vec<&State> = indeg.iter().filter(|(_, &d)| d == 0).map(|(q, _)| *q).collect();
        let mut removed = 0;
        while let Some(q) = ready.pop() {
            removed += 1;
            for t in self.outgoing(q) {
                let d = indeg.get_mut(&t.to).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(&t.to);
                }
            }
        }
        removed == indeg.len()
    }

    pub fn to_dot(&self) -> String {
        let ids: BTreeMap<&State, usize> = self.states.iter().enumerate().map(|(i, q)| (q, i)).collect();
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", self.participant);
        out.push_str("  rankdir=LR;\n  start [shape=point];\n");
        for (q, i) in &ids {
            let _ = writeln!(out, "  s{i} [label=\"{q}\", shape=circle];");
        }
        let _ = writeln!(out, "  start -> s{};", ids[&self.initial]);
        for t in &self.transitions {
            let _ = writeln!(out, "  s{} -> s{} [label=\"{}\"];", ids[&t.from], ids[&t.to], t.label);
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "participant": self.participant.as_str(),
            "states": self.states.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
            "initial": self.initial.to_string(),
            "transitions": self.transitions.iter().map(|t| json!({
                "from": t.from.to_string(),
                "label": t.label.to_string(),
                "to": t.to.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}

impl Lts for Cfsm {
    type State = State;

    fn initial_states(&self) -> Vec<State> {
        vec![self.initial.clone()]
    }

    fn successors(&self, s: &State) -> Vec<(Action, State)> {
        self.outgoing(s)
            .map(|t| (t.label.clone(), t.to.clone()))
            .collect()
    }
}

pub fn shared_states(m: &Cfsm, m2: &Cfsm) -> BTreeSet<State> {
    m.states.intersection(&m2.states).cloned().collect()
}

/// Merges two machines with the same initial state.
pub fn union(m: &Cfsm, m2: &Cfsm) -> Result<Cfsm> {
    if m.initial != m2.initial {
        return Err(Error::InitialMismatch(m.initial.to_string(), m2.initial.to_string()));
    }
    Ok(Cfsm {
        participant: m.participant.clone(),
        states: m.states.union(&m2.states).cloned().collect(),
        initial: m.initial.clone(),
        transitions: m.transitions.union(&m2.transitions).cloned().collect(),
        exit: m2.exit.clone().or_else(|| m.exit.clone()),
    })
}

/// Asynchronous product: each transition moves one component.
pub fn product(m: &Cfsm, m2: &Cfsm) -> Result<Cfsm> {
    if let Some(q) = shared_states(m, m2).into_iter().next() {
        return Err(Error::StateOverlap(q.to_string()));
    }
    let mut states = BTreeSet::new();
    let mut transitions = BTreeSet::new();
    for q in &m.states {
        for q2 in &m2.states {
            states.insert(State::pair(q.clone(), q2.clone()));
        }
    }
    for t in &m.transitions {
        for q2 in &m2.states {
            transitions.insert(Transition::new(
                State::pair(t.from.clone(), q2.clone()),
                t.label.clone(),
                State::pair(t.to.clone(), q2.clone()),
            ));
        }
    }
    for t in &m2.transitions {
        for q in &m.states {
            transitions.insert(Transition::new(
                State::pair(q.clone(), t.from.clone()),
                t.label.clone(),
                State::pair(q.clone(), t.to.clone()),
            ));
        }
    }
    let exit = match (&m.exit, &m2.exit) {
        (Some(a), Some(b)) => Some(State::pair(a.clone(), b.clone())),
        _ => None,
    };
    Ok(Cfsm {
        participant: m.participant.clone(),
        states,
        initial: State::pair(m.initial.clone(), m2.initial.clone()),
        transitions,
        exit,
    })
}

fn rename(m: Cfsm, map: &BTreeMap<State, State>) -> Cfsm {
    let r = |q: &State| map.get(q).cloned().unwrap_or_else(|| q.clone());
    Cfsm {
        participant: m.participant,
        states: m.states.iter().map(r).collect(),
        initial: r(&m.initial),
        transitions: m
            .transitions
            .iter()
            .map(|t| Transition::new(r(&t.from), t.label.clone(), r(&t.to)))
            .collect(),
        exit: m.exit.as_ref().map(r),
    }
}

fn local_action(g: &GChor, a: &Participant) -> Option<Action> {
    let GChor::Interaction {
        sender,
        receiver,
        msg,
        ..
    } = g
    else {
        return None;
    };
    let channel = Channel::new(sender.clone(), receiver.clone());
    if sender == a {
        Some(Action::new(channel, Direction::Out, msg.clone()))
    } else if receiver == a {
        Some(Action::new(channel, Direction::In, msg.clone()))
    } else {
        None
    }
}

fn proj(g: &GChor, a: &Participant, q0: State, qe: State, path: &str) -> Cfsm {
    debug_assert!(g.involves(a));
    let fresh = |suffix: &str| State::named(format!("q@{path}{suffix}"));
    match g {
        GChor::Zero => unreachable!("uninvolved"),
        GChor::Interaction { .. } => Cfsm::edge(a.clone(), q0, local_action(g, a).unwrap(), qe),
        GChor::Seq(l, r) => match (l.involves(a), r.involves(a)) {
            (true, true) => {
                let mid = fresh("");
                let ml = proj(l, a, q0, mid.clone(), &format!("{path}.0"));
                let mr = proj(r, a, mid, qe, &format!("{path}.1"));
                let mut m = ml;
                m.states.extend(mr.states);
                m.transitions.extend(mr.transitions);
                m.exit = mr.exit;
                m
            }
            (true, false) => proj(l, a, q0, qe, &format!("{path}.0")),
            _ => proj(r, a, q0, qe, &format!("{path}.1")),
        },
        GChor::Cho { left, right, .. } => {
            let parts: Vec<Cfsm> = [(left, ".0"), (right, ".1")]
                .into_iter()
                .filter(|(b, _)| b.involves(a))
                .map(|(b, s)| proj(b, a, q0.clone(), qe.clone(), &format!("{path}{s}")))
                .collect();
            parts
                .into_iter()
                .reduce(|m, m2| union(&m, &m2).expect("branches share their entry"))
                .unwrap()
        }
        GChor::Par { left, right, .. } => match (left.involves(a), right.involves(a)) {
            (true, true) => {
                let (l_in, l_out, r_in, r_out) = (fresh(".0.in"), fresh(".0.out"), fresh(".1.in"), fresh(".1.out"));
                let ml = proj(left, a, l_in.clone(), l_out.clone(), &format!("{path}.0"));
                let mr = proj(right, a, r_in.clone(), r_out.clone(), &format!("{path}.1"));
                let m = product(&ml, &mr).expect("fresh names are disjoint");
                let map: BTreeMap<State, State> = [
                    (State::pair(l_in, r_in), q0),
                    (State::pair(l_out, r_out), qe),
                ]
                .into();
                rename(m, &map)
            }
            (true, false) => proj(left, a, q0, qe, &format!("{path}.0")),
            _ => proj(right, a, q0, qe, &format!("{path}.1")),
        },
    }
}

/// Projection of `g` on `a` between the given entry and exit states.
/// A participant not occurring in `g` gets the one-state machine on `q0`.
pub fn project_between(g: &GChor, a: &Participant, q0: State, qe: State) -> Cfsm {
    if !g.involves(a) {
        return Cfsm::single(a.clone(), q0);
    }
    proj(g, a, q0, qe, "0")
}

pub fn project(g: &GChor, a: &Participant) -> Cfsm {
    project_between(g, a, State::named("q0"), State::named("qe"))
}

/// Subset construction; the resulting states are sets of original states.
pub fn determinize(m: &Cfsm) -> Cfsm {
    let start: BTreeSet<State> = [m.initial.clone()].into();
    let mut states = BTreeSet::new();
    let mut transitions = BTreeSet::new();
    let mut todo = vec![start.clone()];
    states.insert(State::Set(start.clone()));
    while let Some(set) = todo.pop() {
        let mut by_label: BTreeMap<&Action, BTreeSet<State>> = BTreeMap::new();
        for q in &set {
            for t in m.outgoing(q) {
                by_label.entry(&t.label).or_default().insert(t.to.clone());
            }
        }
        for (label, target) in by_label {
            let node = State::Set(target.clone());
            if states.insert(node.clone()) {
                todo.push(target);
            }
            transitions.insert(Transition::new(State::Set(set.clone()), label.clone(), node));
        }
    }
    let exit = m.exit.as_ref().and_then(|e| {
        states
            .iter()
            .find(|s| matches!(s, State::Set(set) if set.contains(e)))
            .cloned()
    });
    Cfsm {
        participant: m.participant.clone(),
        states,
        initial: State::Set(start),
        transitions,
        exit,
    }
}

/// Minimal deterministic machine with the same trace language: subset
/// construction followed by partition refinement, every state accepting.
pub fn minimize(m: &Cfsm) -> Cfsm {
    let d = determinize(m);
    let states: Vec<&State> = d.states.iter().collect();
    let index: BTreeMap<&State, usize> = states.iter().enumerate().map(|(i, q)| (*q, i)).collect();
    let mut delta: Vec<BTreeMap<&Action, usize>> = vec![BTreeMap::new(); states.len()];
    for t in &d.transitions {
        delta[index[&t.from]].insert(&t.label, index[&t.to]);
    }
    let mut block = vec![0usize; states.len()];
    loop {
        let mut sigs: BTreeMap<(usize, Vec<(&Action, usize)>), usize> = BTreeMap::new();
        let next: Vec<usize> = (0..states.len())
            .map(|i| {
                let sig = (
                    block[i],
                    delta[i].iter().map(|(a, &j)| (*a, block[j])).collect::<Vec<_>>(),
                );
                let n = sigs.len();
                *sigs.entry(sig).or_insert(n)
            })
            .collect();
        let stable = sigs.len() == block.iter().collect::<BTreeSet<_>>().len();
        block = next;
        if stable {
            break;
        }
    }
    // the least state of each block stands for it
    let mut rep: BTreeMap<usize, &State> = BTreeMap::new();
    for (i, q) in states.iter().enumerate() {
        rep.entry(block[i]).or_insert(q);
    }
    let r = |q: &State| rep[&block[index[q]]].clone();
    Cfsm {
        participant: d.participant.clone(),
        states: rep.values().map(|q| (*q).clone()).collect(),
        initial: r(&d.initial),
        transitions: d
            .transitions
            .iter()
            .map(|t| Transition::new(r(&t.from), t.label.clone(), r(&t.to)))
            .collect(),
        exit: d.exit.as_ref().map(r),
    }
}

/// Label sequences along paths from the initial state.
pub fn traces(m: &Cfsm, max_len: Option<usize>) -> Result<BTreeSet<Word>> {
    if max_len.is_none() && !m.is_acyclic() {
        return Err(Error::CycleWithoutBound);
    }
    Ok(lts::words(m, max_len))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn p(s: &str) -> Participant {
        Participant::new(s).unwrap()
    }

    fn act(s: &str) -> Action {
        crate::lts::parse_word(s, &[p("A"), p("B"), p("C")].into()).unwrap().remove(0)
    }

    fn q(s: &str) -> State {
        State::named(s)
    }

    #[test]
    fn projection_of_interaction() {
        let g = parse("A->B:x").unwrap();
        let ma = project(&g, &p("A"));
        assert_eq!(ma.states.len(), 2);
        assert_eq!(ma.transitions.len(), 1);
        assert_eq!(ma.transitions.first().unwrap().label, act("AB!x"));
        let mb = project(&g, &p("B"));
        assert_eq!(mb.transitions.first().unwrap().label, act("AB?x"));
        let mc = project(&g, &p("C"));
        assert_eq!(mc.states.len(), 1);
        assert!(mc.transitions.is_empty());
    }

    #[test]
    fn projection_of_parallel_is_a_diamond() {
        let g = parse("A->B:x | A->B:y").unwrap();
        let mb = project(&g, &p("B"));
        assert_eq!(mb.states.len(), 4);
        assert_eq!(mb.transitions.len(), 4);
        assert!(mb.states.contains(&q("q0")) && mb.states.contains(&q("qe")));
        assert_eq!(traces(&mb, None).unwrap().len(), 5);
        assert_eq!(minimize(&mb).states.len(), 4);
    }

    #[test]
    fn union_and_product() {
        let m = Cfsm::edge(p("A"), q("a"), act("AB!x"), q("b"));
        let m2 = Cfsm::edge(p("A"), q("c"), act("AB!y"), q("d"));
        let prod = product(&m, &m2).unwrap();
        assert_eq!(prod.states.len(), 4);
        assert_eq!(prod.transitions.len(), 4);
        assert!(matches!(product(&m, &m), Err(Error::StateOverlap(_))));
        assert!(matches!(union(&m, &m2), Err(Error::InitialMismatch(..))));
        let m3 = Cfsm::edge(p("A"), q("a"), act("AB!y"), q("b"));
        let u = union(&m, &m3).unwrap();
        assert_eq!(shared_states(&m, &m3), [q("a"), q("b")].into());
        assert_eq!(u.transitions.len(), 2);
    }

    #[test]
    fn choice_branches_share_entry_and_exit() {
        let g = parse("A->B:x + A->B:y").unwrap();
        let GChor::Cho { left, right, .. } = &g else { unreachable!() };
        let ml = project(left, &p("B"));
        let mr = project(right, &p("B"));
        assert_eq!(shared_states(&ml, &mr), [q("q0"), q("qe")].into());
    }

    #[test]
    fn minimization_merges_common_prefix() {
        let g = parse("(A->B:m;A->B:x)+(A->B:m;A->B:y)").unwrap();
        let mb = project(&g, &p("B"));
        assert_eq!(mb.states.len(), 4);
        assert!(!mb.is_deterministic());
        let min = minimize(&mb);
        assert_eq!(min.states.len(), 3);
        assert!(min.is_deterministic());
        let first: Vec<&Transition> = min.outgoing(&min.initial).collect();
        assert_eq!(first.len(), 1);
        assert_eq!(first[0].label, act("AB?m"));
        let next: Vec<&Transition> = min.outgoing(&first[0].to).collect();
        assert_eq!(next.len(), 2);
        assert_eq!(next[0].to, next[1].to);
        assert_eq!(traces(&min, None).unwrap(), traces(&mb, None).unwrap());
    }

    #[test]
    fn minimization_is_idempotent() {
        let g = parse("(A->B:x | A->C:y) ; (A->B:z + A->B:w)").unwrap();
        let m = minimize(&project(&g, &p("A")));
        let mm = minimize(&m);
        assert_eq!(m.states.len(), mm.states.len());
        assert_eq!(m.transitions.len(), mm.transitions.len());
        assert_eq!(traces(&m, None).unwrap(), traces(&mm, None).unwrap());
    }

    #[test]
    fn locality_and_determinism_of_naming() {
        let g = parse("(A->B:x ; B->C:y) | (C->A:z + C->A:w)").unwrap();
        for a in ["A", "B", "C"] {
            let m = project(&g, &p(a));
            assert!(m.is_local(), "{a}");
            assert!(m.is_acyclic());
            assert_eq!(m, project(&g, &p(a)));
        }
    }

    #[test]
    fn cyclic_machine_needs_bound() {
        let mut m = Cfsm::edge(p("A"), q("a"), act("AB!x"), q("b"));
        m.transitions.insert(Transition::new(q("b"), act("AB!x"), q("a")));
        assert!(matches!(traces(&m, None), Err(Error::CycleWithoutBound)));
        assert_eq!(traces(&m, Some(3)).unwrap().len(), 4);
    }

    #[test]
    fn exports() {
        let m = project(&parse("A->B:x").unwrap(), &p("A"));
        let dot = m.to_dot();
        assert!(dot.contains("start -> s"));
        assert!(dot.contains("label=\"AB!x\""));
        let js = m.to_json();
        assert_eq!(js["participant"], "A");
        assert_eq!(js["initial"], "q0");
        assert_eq!(js["transitions"][0]["label"], "AB!x");
    }
}
