//! The semantics map from g-choreographies to hypergraphs, together with
//! the well-formedness conditions it enforces: sound sequential
//! composition and well-branched choices.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::Serialize;

use crate::ast::{assign_control_points, mu, participants, ControlPoint, GChor, Participant};
use crate::error::{Error, Result};
use crate::hypergraph::{
    first_edges, happens_before, last_edges, only, seq_compose, sqcap, Event, EventSet,
    HyperEdge, HyperGraph, Precedence,
};

/// How far the search for reflections goes when classifying participants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReflectionStrategy {
    /// Only the empty reflection; the classical notion of active/passive.
    EmptyOnly,
    /// All reflections, optionally bounded in size.
    #[default]
    Full,
    Bounded(usize),
}

impl ReflectionStrategy {
    fn max_size(self) -> Option<usize> {
        match self {
            ReflectionStrategy::EmptyOnly => Some(0),
            ReflectionStrategy::Full => None,
            ReflectionStrategy::Bounded(n) => Some(n),
        }
    }
}

/// A bijection between `A`-events of two branches preserving actions and
/// causality, with both sides closed under `A`-predecessors.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Reflection {
    pub left: EventSet,
    pub right: EventSet,
    pub bijection: BTreeMap<Event, Event>,
}

impl Reflection {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.bijection.is_empty()
    }

    fn from_pairs(pairs: impl IntoIterator<Item = (Event, Event)>) -> Self {
        let bijection: BTreeMap<Event, Event> = pairs.into_iter().collect();
        Reflection {
            left: bijection.keys().cloned().collect(),
            right: bijection.values().cloned().collect(),
            bijection,
        }
    }

    /// Checks the reflection conditions against the two branch semantics.
    pub fn validate(&self, a: &Participant, left: &HyperGraph, right: &HyperGraph) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidReflection(m));
        let keys: EventSet = self.bijection.keys().cloned().collect();
        let values: EventSet = self.bijection.values().cloned().collect();
        if keys != self.left || values != self.right || values.len() != keys.len() {
            return bad("sides do not match a bijection".into());
        }
        let l = Side::new(left, a);
        let r = Side::new(right, a);
        for (e, f) in &self.bijection {
            if !l.events.contains(e) || !r.events.contains(f) {
                return bad(format!("{e} or {f} is not an event of {a} in its branch"));
            }
            if e.action_opt() != f.action_opt() {
                return bad(format!("{e} and {f} carry different actions"));
            }
        }
        for (side, set) in [(&l, &self.left), (&r, &self.right)] {
            for e in set {
                if let Some(p) = side.events.iter().find(|p| side.prec.precedes(p, e) && !set.contains(*p)) {
                    return bad(format!("{p} precedes {e} but is missing"));
                }
            }
        }
        for (e1, f1) in &self.bijection {
            for (e2, f2) in &self.bijection {
                if l.prec.precedes(e1, e2) != r.prec.precedes(f1, f2) {
                    return bad(format!("order between {e1} and {e2} is not preserved"));
                }
            }
        }
        Ok(())
    }
}

/// `A`-events of one branch with the causal order of the branch.
struct Side {
    events: Vec<Event>,
    prec: Precedence,
}

impl Side {
    fn new(g: &HyperGraph, a: &Participant) -> Self {
        let prec = Precedence::new(g);
        let events = prec
            .events()
            .iter()
            .filter(|e| e.has_subject(a))
            .cloned()
            .collect();
        Side { events, prec }
    }

    fn before(&self, i: usize, j: usize) -> bool {
        self.prec.precedes(&self.events[i], &self.events[j])
    }

    /// Downward-closed subsets of the events, grouped by size.
    fn ideals(&self, max_size: usize) -> Vec<Vec<Vec<usize>>> {
        let n = self.events.len();
        let mut levels = vec![vec![Vec::new()]];
        for size in 1..=max_size.min(n) {
            let mut next = BTreeSet::new();
            for ideal in &levels[size - 1] {
                for cand in 0..n {
                    if ideal.contains(&cand) {
                        continue;
                    }
                    let closed = (0..n).all(|p| !self.before(p, cand) || ideal.contains(&p));
                    if closed {
                        let mut grown = ideal.clone();
                        grown.push(cand);
                        grown.sort_unstable();
                        next.insert(grown);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next.into_iter().collect());
        }
        levels
    }
}

/// Visits reflections by increasing size, the empty one first.
///
/// With `one_per_pair` only the first bijection between each pair of event
/// sets is produced; branching pairs depend on the sets alone.
fn visit_reflections(
    a: &Participant,
    left: &HyperGraph,
    right: &HyperGraph,
    max_size: Option<usize>,
    one_per_pair: bool,
    f: &mut dyn FnMut(Reflection) -> ControlFlow<()>,
) {
    let l = Side::new(left, a);
    let r = Side::new(right, a);
    let cap = max_size.unwrap_or(usize::MAX);
    let li = l.ideals(cap);
    let ri = r.ideals(cap);
    for (ls, rs) in li.iter().zip(&ri) {
        for ideal_l in ls {
            for ideal_r in rs {
                let mut assignment: Vec<usize> = Vec::with_capacity(ideal_l.len());
                let mut used = vec![false; ideal_r.len()];
                let flow = iso_search(&l, &r, ideal_l, ideal_r, &mut assignment, &mut used, one_per_pair, f);
                if let ControlFlow::Break(stop) = flow {
                    if stop {
                        return;
                    }
                }
            }
        }
    }
}

/// Backtracking over order isomorphisms between two ideals.
/// `Break(true)` stops the whole search, `Break(false)` this pair only.
#[allow(clippy::too_many_arguments)]
fn iso_search(
    l: &Side,
    r: &Side,
    il: &[usize],
    ir: &[usize],
    assignment: &mut Vec<usize>,
    used: &mut [bool],
    one_per_pair: bool,
    f: &mut dyn FnMut(Reflection) -> ControlFlow<()>,
) -> ControlFlow<bool> {
    let k = assignment.len();
    if k == il.len() {
        let refl = Reflection::from_pairs(
            il.iter()
                .zip(assignment.iter())
                .map(|(&i, &j)| (l.events[i].clone(), r.events[ir[j]].clone())),
        );
        if f(refl).is_break() {
            return ControlFlow::Break(true);
        }
        return if one_per_pair {
            ControlFlow::Break(false)
        } else {
            ControlFlow::Continue(())
        };
    }
    let e = &l.events[il[k]];
    for j in 0..ir.len() {
        if used[j] || r.events[ir[j]].action_opt() != e.action_opt() {
            continue;
        }
        let consistent = (0..k).all(|p| {
            let (lp, rp) = (il[p], ir[assignment[p]]);
            l.before(lp, il[k]) == r.before(rp, ir[j]) && l.before(il[k], lp) == r.before(ir[j], rp)
        });
        if !consistent {
            continue;
        }
        used[j] = true;
        assignment.push(j);
        let flow = iso_search(l, r, il, ir, assignment, used, one_per_pair, f);
        assignment.pop();
        used[j] = false;
        flow?;
    }
    ControlFlow::Continue(())
}

/// All `a`-reflections between the two branch semantics, by increasing size.
pub fn find_reflections(left: &HyperGraph, right: &HyperGraph, a: &Participant) -> Vec<Reflection> {
    let mut out = Vec::new();
    visit_reflections(a, left, right, None, false, &mut |r| {
        out.push(r);
        ControlFlow::Continue(())
    });
    out
}

/// The points where the behaviour of a participant in two branches starts
/// to differ, once the reflected common part is discounted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BranchingPair {
    pub left: EventSet,
    pub right: EventSet,
}

fn first_remaining(side: &Side, skip: &EventSet) -> EventSet {
    let rest: Vec<&Event> = side.events.iter().filter(|e| !skip.contains(*e)).collect();
    rest.iter()
        .filter(|e| !rest.iter().any(|p| side.prec.precedes(p, e)))
        .map(|e| (*e).clone())
        .collect()
}

/// Branching pair of `a` in the choice between `left` and `right` with
/// respect to `refl`: the minimal `a`-events of each branch outside the
/// reflection, in the causal order of the branch restricted to `a`.
pub fn branching_pair(
    a: &Participant,
    left: &HyperGraph,
    right: &HyperGraph,
    refl: &Reflection,
) -> Result<BranchingPair> {
    refl.validate(a, left, right)?;
    let l = Side::new(&only(left, a), a);
    let r = Side::new(&only(right, a), a);
    Ok(BranchingPair {
        left: first_remaining(&l, &refl.left),
        right: first_remaining(&r, &refl.right),
    })
}

fn not_before_any(prec: &Precedence, events: &EventSet, bound: &EventSet) -> EventSet {
    events
        .iter()
        .filter(|e| !bound.iter().any(|b| prec.precedes(e, b)))
        .cloned()
        .collect()
}

fn passive_pair(pair: &BranchingPair, left: &Branch, right: &Branch) -> bool {
    if pair.left.is_empty() != pair.right.is_empty() {
        return false;
    }
    if !pair.left.iter().chain(&pair.right).all(Event::is_input) {
        return false;
    }
    let r_free = not_before_any(&right.prec, &right.comm, &pair.right);
    let l_free = not_before_any(&left.prec, &left.comm, &pair.left);
    sqcap(&pair.left, &r_free).is_ok_and(|s| s.is_empty())
        && sqcap(&pair.right, &l_free).is_ok_and(|s| s.is_empty())
}

fn active_pair(pair: &BranchingPair) -> bool {
    !pair.left.is_empty()
        && !pair.right.is_empty()
        && pair.left.iter().chain(&pair.right).all(Event::is_output)
        && sqcap(&pair.left, &pair.right).is_ok_and(|s| s.is_empty())
}

/// One branch of a choice: its semantics, order and communication events.
struct Branch<'a> {
    graph: &'a HyperGraph,
    prec: Precedence,
    comm: EventSet,
}

impl<'a> Branch<'a> {
    fn new(graph: &'a HyperGraph) -> Self {
        Branch {
            graph,
            prec: Precedence::new(graph),
            comm: graph.comm_events(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Active,
    Passive,
    Neither,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Active => "active",
            Role::Passive => "passive",
            Role::Neither => "neither",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub reflection: Reflection,
    pub pair: BranchingPair,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub participant: Participant,
    pub role: Role,
    pub witness: Option<Witness>,
}

fn classify(a: &Participant, left: &Branch, right: &Branch, strategy: ReflectionStrategy) -> Classification {
    let mut active: Option<Witness> = None;
    let mut passive: Option<Witness> = None;
    let l_only = Side::new(&only(left.graph, a), a);
    let r_only = Side::new(&only(right.graph, a), a);
    visit_reflections(a, left.graph, right.graph, strategy.max_size(), true, &mut |refl| {
        let pair = BranchingPair {
            left: first_remaining(&l_only, &refl.left),
            right: first_remaining(&r_only, &refl.right),
        };
        if passive_pair(&pair, left, right) {
            passive = Some(Witness { reflection: refl, pair });
            return ControlFlow::Break(());
        }
        if active.is_none() && active_pair(&pair) {
            active = Some(Witness { reflection: refl, pair });
        }
        ControlFlow::Continue(())
    });
    let (role, witness) = match (passive, active) {
        (Some(w), _) => (Role::Passive, Some(w)),
        (None, Some(w)) => (Role::Active, Some(w)),
        (None, None) => (Role::Neither, None),
    };
    Classification {
        participant: a.clone(),
        role,
        witness,
    }
}

/// Whether `a` is passive in the choice, with a witnessing reflection.
pub fn is_passive(a: &Participant, left: &HyperGraph, right: &HyperGraph, strategy: ReflectionStrategy) -> Option<Witness> {
    let (l, r) = (Branch::new(left), Branch::new(right));
    let c = classify(a, &l, &r, strategy);
    (c.role == Role::Passive).then(|| c.witness.unwrap())
}

/// Whether `a` is active in the choice, with a witnessing reflection.
pub fn is_active(a: &Participant, left: &HyperGraph, right: &HyperGraph, strategy: ReflectionStrategy) -> Option<Witness> {
    let (l, r) = (Branch::new(left), Branch::new(right));
    let l_only = Side::new(&only(left, a), a);
    let r_only = Side::new(&only(right, a), a);
    let mut found = None;
    visit_reflections(a, l.graph, r.graph, strategy.max_size(), true, &mut |refl| {
        let pair = BranchingPair {
            left: first_remaining(&l_only, &refl.left),
            right: first_remaining(&r_only, &refl.right),
        };
        if active_pair(&pair) {
            found = Some(Witness { reflection: refl, pair });
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    });
    found
}

/// Classification of every participant at one choice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BranchReport {
    pub choice: ControlPoint,
    pub participants: Vec<Classification>,
    pub well_branched: bool,
}

impl BranchReport {
    pub fn role(&self, a: &Participant) -> Option<Role> {
        self.participants
            .iter()
            .find(|c| &c.participant == a)
            .map(|c| c.role)
    }

    pub fn with_role(&self, role: Role) -> impl Iterator<Item = &Participant> {
        self.participants
            .iter()
            .filter(move |c| c.role == role)
            .map(|c| &c.participant)
    }

    /// The participant that breaks well-branchedness, if any.
    pub fn offender(&self) -> Option<&Participant> {
        if self.well_branched {
            return None;
        }
        self.with_role(Role::Neither)
            .next()
            .or_else(|| self.with_role(Role::Active).nth(1))
    }
}

/// Well-branchedness of the choice between `left` and `right`: at most one
/// participant is not passive, and that one is active.
pub fn well_branched(
    choice: ControlPoint,
    left: &HyperGraph,
    right: &HyperGraph,
    ptps: &BTreeSet<Participant>,
    strategy: ReflectionStrategy,
) -> BranchReport {
    let (l, r) = (Branch::new(left), Branch::new(right));
    let ptps: Vec<&Participant> = ptps.iter().collect();
    let participants: Vec<Classification> = ptps
        .par_iter()
        .map(|a| classify(a, &l, &r, strategy))
        .collect();
    let non_passive: Vec<&Classification> =
        participants.iter().filter(|c| c.role != Role::Passive).collect();
    let well_branched =
        non_passive.len() <= 1 && non_passive.iter().all(|c| c.role == Role::Active);
    BranchReport {
        choice,
        participants,
        well_branched,
    }
}

/// Why the semantics of a term is undefined.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reason {
    SeqUnsound { missing: (Event, Event) },
    NotWellBranched {
        choice: ControlPoint,
        participant: Participant,
        report: BranchReport,
    },
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::SeqUnsound { missing: (e, e2) } => {
                let show = |e: &Event| e.action_opt().map_or_else(|| e.to_string(), |a| a.to_string());
                write!(
                    f,
                    "sequential composition unsound: missing dependency {} ≺ {}",
                    show(e),
                    show(e2)
                )
            }
            Reason::NotWellBranched {
                choice,
                participant,
                report,
            } => {
                write!(f, "choice at {choice} is not well-branched: ")?;
                match report.role(participant) {
                    Some(Role::Active) => {
                        let actives: Vec<String> =
                            report.with_role(Role::Active).map(|p| p.to_string()).collect();
                        write!(f, "more than one active participant ({})", actives.join(", "))
                    }
                    _ => write!(f, "participant {participant} is neither active nor passive"),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemanticsResult {
    Defined(HyperGraph),
    Undefined(Reason),
}

impl SemanticsResult {
    pub fn is_defined(&self) -> bool {
        matches!(self, SemanticsResult::Defined(_))
    }

    pub fn graph(&self) -> Option<&HyperGraph> {
        match self {
            SemanticsResult::Defined(g) => Some(g),
            SemanticsResult::Undefined(_) => None,
        }
    }

    pub fn reason(&self) -> Option<&Reason> {
        match self {
            SemanticsResult::Defined(_) => None,
            SemanticsResult::Undefined(r) => Some(r),
        }
    }

    pub fn into_graph(self) -> Result<HyperGraph> {
        match self {
            SemanticsResult::Defined(g) => Ok(g),
            SemanticsResult::Undefined(r) => Err(Error::SemanticsUndefined(r.to_string())),
        }
    }
}

/// The semantics together with the branching report of every choice
/// examined on the way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    pub result: SemanticsResult,
    pub choices: Vec<BranchReport>,
}

impl Analysis {
    /// Role of each participant across the choices it takes part in:
    /// active if it selects some choice, passive if it follows all of them.
    pub fn roles(&self) -> BTreeMap<Participant, Role> {
        let mut roles: BTreeMap<Participant, Role> = BTreeMap::new();
        for report in &self.choices {
            for c in &report.participants {
                let entry = roles.entry(c.participant.clone()).or_insert(c.role);
                *entry = match (*entry, c.role) {
                    (Role::Active, _) | (_, Role::Active) => Role::Active,
                    (Role::Passive, Role::Passive) => Role::Passive,
                    _ => Role::Neither,
                };
            }
        }
        roles
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SemOptions {
    pub reflections: ReflectionStrategy,
}

/// Semantics of a term with the default reflection search.
pub fn sem(g: &GChor) -> SemanticsResult {
    analyze(g, SemOptions::default()).result
}

/// Semantics with branching diagnostics. Terms whose control points are
/// not yet assigned are numbered first.
pub fn analyze(g: &GChor, opts: SemOptions) -> Analysis {
    let numbered;
    let g = if g.check_invariants().is_ok() {
        g
    } else {
        numbered = assign_control_points(g).expect("interactions have distinct endpoints");
        &numbered
    };
    let mut choices = Vec::new();
    let result = match eval(g, opts, &mut choices) {
        Ok(graph) => SemanticsResult::Defined(graph),
        Err(reason) => SemanticsResult::Undefined(reason),
    };
    Analysis { result, choices }
}

fn eval(g: &GChor, opts: SemOptions, reports: &mut Vec<BranchReport>) -> std::result::Result<HyperGraph, Reason> {
    match g {
        GChor::Zero => Ok(HyperGraph::new()),
        GChor::Interaction {
            sender,
            receiver,
            msg,
            cp,
        } => Ok([HyperEdge::simple(
            Event::output(sender.clone(), receiver.clone(), msg.clone(), *cp),
            Event::input(sender.clone(), receiver.clone(), msg.clone(), *cp),
        )]
        .into_iter()
        .collect()),
        GChor::Par { left, right, .. } => {
            let l = eval(left, opts, reports)?;
            let r = eval(right, opts, reports)?;
            Ok(l.union(&r))
        }
        GChor::Seq(left, right) => {
            let l = eval(left, opts, reports)?;
            let r = eval(right, opts, reports)?;
            let composed = seq_compose(&l, &r).expect("control points are unique");
            let lasts: EventSet = last_edges(&l).into_iter().flat_map(|e| e.source).collect();
            let firsts: EventSet = first_edges(&r).into_iter().flat_map(|e| e.target).collect();
            if lasts.is_empty() || firsts.is_empty() {
                return Ok(composed);
            }
            let prec = Precedence::new(&composed);
            for e in &lasts {
                for e2 in &firsts {
                    if !prec.precedes(e, e2) {
                        return Err(Reason::SeqUnsound {
                            missing: (e.clone(), e2.clone()),
                        });
                    }
                }
            }
            Ok(composed)
        }
        GChor::Cho { cp, left, right } => {
            let l = eval(left, opts, reports)?;
            let r = eval(right, opts, reports)?;
            let ptps = participants(g);
            let report = well_branched(*cp, &l, &r, &ptps, opts.reflections);
            let ok = report.well_branched;
            let offender = report.offender().cloned();
            reports.push(report.clone());
            if !ok {
                return Err(Reason::NotWellBranched {
                    choice: *cp,
                    participant: offender.expect("ill-branched choice has an offender"),
                    report,
                });
            }
            let fork: EventSet = [Event::Ctl(*cp)].into();
            let merge: EventSet = [Event::Ctl(mu(*cp))].into();
            let mut out = l.union(&r);
            for branch in [&l, &r] {
                out.insert(HyperEdge::new(fork.clone(), branch.minima()));
                out.insert(HyperEdge::new(branch.maxima(), merge.clone()));
            }
            Ok(out)
        }
    }
}

/// Happens-before induced by a term; empty when its semantics is undefined.
pub fn hb(g: &GChor) -> BTreeSet<(Event, Event)> {
    sem(g).graph().map(happens_before).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn p(s: &str) -> Participant {
        Participant::new(s).unwrap()
    }

    fn graph(src: &str) -> HyperGraph {
        sem(&parse(src).unwrap()).into_graph().unwrap()
    }

    fn acts(set: &EventSet) -> Vec<String> {
        set.iter().map(|e| e.action_opt().unwrap().to_string()).collect()
    }

    #[test]
    fn interaction_and_zero() {
        assert!(graph("0").is_empty());
        let g = graph("A->B:x");
        assert_eq!(g.len(), 1);
        assert_eq!(g.to_string().trim(), "AB!x@k1 -> AB?x@k1");
    }

    #[test]
    fn sequential_chain_is_total() {
        let g = graph("A->B:x ; B->A:y");
        let hb = happens_before(&g);
        let comm: Vec<Event> = g.comm_events().into_iter().collect();
        assert_eq!(comm.len(), 4);
        assert_eq!(hb.len(), 6);
    }

    #[test]
    fn unsound_sequence() {
        let r = sem(&parse("A->B:x ; C->D:y").unwrap());
        match r.reason() {
            Some(Reason::SeqUnsound { missing: (e, e2) }) => {
                assert_eq!(e.action_opt().unwrap().to_string(), "AB!x");
                assert_eq!(e2.action_opt().unwrap().to_string(), "CD?y");
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            r.reason().unwrap().to_string(),
            "sequential composition unsound: missing dependency AB!x ≺ CD?y"
        );
    }

    #[test]
    fn choice_shape() {
        let g = graph("A->B:x + A->B:y");
        assert_eq!(g.len(), 6);
        assert_eq!(g.minima(), [Event::Ctl(ControlPoint::new(1))].into());
        assert_eq!(g.maxima(), [Event::Ctl(mu(ControlPoint::new(1)))].into());
    }

    #[test]
    fn roles_in_simple_choices() {
        let a = analyze(&parse("A->B:x + A->B:y").unwrap(), SemOptions::default());
        assert!(a.result.is_defined());
        let roles = a.roles();
        assert_eq!(roles[&p("A")], Role::Active);
        assert_eq!(roles[&p("B")], Role::Passive);

        let a = analyze(&parse("A->B:x + A->C:y").unwrap(), SemOptions::default());
        match a.result.reason() {
            Some(Reason::NotWellBranched { participant, .. }) => assert_eq!(participant, &p("B")),
            other => panic!("{other:?}"),
        }
        let roles = a.roles();
        assert_eq!(roles[&p("A")], Role::Active);
        assert_eq!(roles[&p("B")], Role::Neither);
        assert_eq!(roles[&p("C")], Role::Neither);
    }

    #[test]
    fn branching_pairs_with_empty_reflection() {
        let l = graph("A->B:x");
        let r = graph("A->B:y");
        let e = Reflection::empty();
        let bp = branching_pair(&p("A"), &l, &r, &e).unwrap();
        assert_eq!((acts(&bp.left), acts(&bp.right)), (vec!["AB!x".into()], vec!["AB!y".into()]));
        let bp = branching_pair(&p("B"), &l, &r, &e).unwrap();
        assert_eq!((acts(&bp.left), acts(&bp.right)), (vec!["AB?x".into()], vec!["AB?y".into()]));
        let bp = branching_pair(&p("C"), &l, &r, &e).unwrap();
        assert!(bp.left.is_empty() && bp.right.is_empty());
    }

    #[test]
    fn invalid_reflection_is_rejected() {
        let l = graph("A->B:x");
        let r = graph("A->B:y");
        let refl = Reflection::from_pairs([(
            l.comm_events().into_iter().find(Event::is_output).unwrap(),
            r.comm_events().into_iter().find(Event::is_output).unwrap(),
        )]);
        assert!(matches!(
            branching_pair(&p("A"), &l, &r, &refl),
            Err(Error::InvalidReflection(_))
        ));
    }

    #[test]
    fn reflections_of_uninvolved_participant() {
        let l = graph("A->B:x");
        let r = graph("A->B:y");
        assert_eq!(find_reflections(&l, &r, &p("C")), vec![Reflection::empty()]);
    }

    #[test]
    fn reflection_on_common_prefix() {
        let g = parse("(A->B:x;B->C:u) + (A->B:x;B->C:y)").unwrap();
        let (l, r) = match &g {
            GChor::Cho { left, right, .. } => (sem(left).into_graph().unwrap(), sem(right).into_graph().unwrap()),
            _ => unreachable!(),
        };
        let refls = find_reflections(&l, &r, &p("B"));
        assert_eq!(refls[0], Reflection::empty());
        assert!(refls.iter().any(|f| f.len_eq_one_with("AB?x")));
        for f in &refls {
            f.validate(&p("B"), &l, &r).unwrap();
        }
        let w = is_active(&p("B"), &l, &r, ReflectionStrategy::Full).unwrap();
        assert!(!w.reflection.is_empty());
        assert!(is_active(&p("B"), &l, &r, ReflectionStrategy::EmptyOnly).is_none());

        let a = analyze(&g, SemOptions::default());
        assert!(a.result.is_defined());
        let roles = a.roles();
        assert_eq!(roles[&p("B")], Role::Active);
        assert_eq!(roles[&p("A")], Role::Passive);
        assert_eq!(roles[&p("C")], Role::Passive);

        let strict = analyze(&g, SemOptions { reflections: ReflectionStrategy::EmptyOnly });
        assert!(!strict.result.is_defined());
    }

    impl Reflection {
        fn len_eq_one_with(&self, action: &str) -> bool {
            self.bijection.len() == 1
                && self
                    .bijection
                    .iter()
                    .all(|(e, f)| e.action_opt().unwrap().to_string() == action && e != f)
        }
    }

    #[test]
    fn identity_reflection_is_found() {
        let l = graph("(A->B:x | A->C:y) ; B->A:z ; A->C:w");
        for a in ["A", "B", "C"] {
            let refls = find_reflections(&l, &l, &p(a));
            let all: EventSet = l.comm_events().into_iter().filter(|e| e.has_subject(&p(a))).collect();
            assert!(
                refls.iter().any(|f| f.left == all && f.bijection.iter().all(|(e, f)| e == f)),
                "{a}"
            );
        }
    }

    #[test]
    fn no_active_participant_needed() {
        let a = analyze(&parse("A->B:x + A->B:x").unwrap(), SemOptions::default());
        assert!(a.result.is_defined());
        assert!(a.roles().values().all(|r| *r == Role::Passive));
    }

    #[test]
    fn choice_of_sequences() {
        let a = analyze(&parse("(A->B:x;B->C:y) + (A->C:z;C->B:w)").unwrap(), SemOptions::default());
        assert!(a.result.is_defined());
        let roles = a.roles();
        assert_eq!(roles[&p("A")], Role::Active);
        assert_eq!(roles[&p("B")], Role::Passive);
        assert_eq!(roles[&p("C")], Role::Passive);
    }

    #[test]
    fn nested_choices() {
        let src = "((A->B:x + A->B:y) + (A->B:x + A->B:y)) ; (A->C:z + A->C:w)";
        let a = analyze(&parse(src).unwrap(), SemOptions::default());
        assert!(a.result.is_defined(), "{:?}", a.result.reason());
        assert_eq!(a.choices.len(), 4);
        let roles = a.roles();
        assert_eq!(roles[&p("A")], Role::Active);
        assert_eq!(roles[&p("B")], Role::Passive);
        assert_eq!(roles[&p("C")], Role::Passive);
        // the outer choice is selected by nobody
        let outer = a.choices.iter().find(|r| r.choice == ControlPoint::new(1)).unwrap();
        assert_eq!(outer.role(&p("A")), Some(Role::Passive));
    }

    #[test]
    fn hb_of_undefined_is_empty() {
        assert!(hb(&parse("A->B:x ; C->D:y").unwrap()).is_empty());
        assert_eq!(hb(&parse("A->B:x").unwrap()).len(), 1);
    }

    #[test]
    fn zero_branch_choice() {
        assert!(!sem(&parse("A->B:x + 0").unwrap()).is_defined());
        assert!(sem(&parse("0 + 0").unwrap()).is_defined());
    }
}
