//! Finite labelled transition systems over communication actions.
//!
//! Choreography languages, machines and communicating systems all expose
//! their behaviour through [`Lts`]; every state is accepting, so the
//! languages handled here are prefix-closed.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::ast::Participant;
use crate::error::{Error, Result};
use crate::hypergraph::{Action, Channel, Direction};
use crate::Message;

pub type Word = Vec<Action>;

pub trait Lts {
    type State: Clone + Ord + fmt::Debug;

    fn initial_states(&self) -> Vec<Self::State>;

    /// Outgoing transitions; callers do not rely on their order.
    fn successors(&self, s: &Self::State) -> Vec<(Action, Self::State)>;
}

/// Set of states reached from `from` by `a`.
fn post<L: Lts>(lts: &L, from: &BTreeSet<L::State>) -> BTreeMap<Action, BTreeSet<L::State>> {
    let mut out: BTreeMap<Action, BTreeSet<L::State>> = BTreeMap::new();
    for s in from {
        for (a, t) in lts.successors(s) {
            out.entry(a).or_default().insert(t);
        }
    }
    out
}

fn initial_set<L: Lts>(lts: &L) -> BTreeSet<L::State> {
    lts.initial_states().into_iter().collect()
}

/// Whether `w` labels a path from some initial state.
pub fn accepts<L: Lts>(lts: &L, w: &[Action]) -> bool {
    let mut current = initial_set(lts);
    for a in w {
        if current.is_empty() {
            return false;
        }
        let mut next = BTreeSet::new();
        for s in &current {
            for (b, t) in lts.successors(s) {
                if &b == a {
                    next.insert(t);
                }
            }
        }
        current = next;
    }
    !current.is_empty()
}

/// Extends `w` to a maximal word, taking the least enabled action at each
/// step. Returns `w` unchanged when it is not a word of `lts`.
pub fn complete<L: Lts>(lts: &L, w: &[Action]) -> Word {
    let mut current = initial_set(lts);
    for a in w {
        current = post(lts, &current).remove(a).unwrap_or_default();
    }
    let mut out = w.to_vec();
    if current.is_empty() {
        return out;
    }
    while let Some((a, next)) = post(lts, &current).into_iter().next() {
        out.push(a);
        current = next;
    }
    out
}

/// All words of length at most `max_len` (every word when `None`).
///
/// Loops forever on systems with cycles when no bound is given.
pub fn words<L: Lts>(lts: &L, max_len: Option<usize>) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    let init = initial_set(lts);
    if init.is_empty() {
        return out;
    }
    let mut stack: Vec<(Word, BTreeSet<L::State>)> = vec![(Vec::new(), init)];
    while let Some((w, states)) = stack.pop() {
        if max_len.is_none_or(|n| w.len() < n) {
            for (a, next) in post(lts, &states) {
                let mut w2 = w.clone();
                w2.push(a);
                stack.push((w2, next));
            }
        }
        out.insert(w);
    }
    out
}

/// Number of distinct words of an acyclic system, saturating.
pub fn count_words<L: Lts>(lts: &L) -> u128 {
    fn go<L: Lts>(lts: &L, s: &BTreeSet<L::State>, memo: &mut BTreeMap<BTreeSet<L::State>, u128>) -> u128 {
        if let Some(&n) = memo.get(s) {
            return n;
        }
        let mut n: u128 = 1;
        for (_, next) in post(lts, s) {
            n = n.saturating_add(go(lts, &next, memo));
        }
        memo.insert(s.clone(), n);
        n
    }
    let init = initial_set(lts);
    if init.is_empty() {
        return 0;
    }
    go(lts, &init, &mut BTreeMap::new())
}

/// Outcome of a language inclusion check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inclusion {
    /// Shortest, then lexicographically least, word of the left language
    /// missing from the right one.
    pub witness: Option<Word>,
    /// Distinct pairs (left state, right state set) explored.
    pub explored: usize,
}

impl Inclusion {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

/// Decides `L(left) ⊆ L(right)` on the fly, pairing each left state with
/// the set of right states reachable by the same word.
pub fn check_inclusion<L: Lts, R: Lts>(left: &L, right: &R, budget: Option<usize>) -> Result<Inclusion> {
    type Node<A, B> = (A, BTreeSet<B>);
    let mut seen: BTreeMap<Node<L::State, R::State>, usize> = BTreeMap::new();
    let mut parent: Vec<Option<(usize, Action)>> = Vec::new();
    let mut queue: VecDeque<(usize, Node<L::State, R::State>)> = VecDeque::new();
    let right_init = initial_set(right);
    let mut left_init = left.initial_states();
    left_init.sort();
    left_init.dedup();
    if !left_init.is_empty() && right_init.is_empty() {
        return Ok(Inclusion {
            witness: Some(Vec::new()),
            explored: 0,
        });
    }
    for s in left_init {
        let node = (s, right_init.clone());
        if !seen.contains_key(&node) {
            seen.insert(node.clone(), parent.len());
            queue.push_back((parent.len(), node));
            parent.push(None);
        }
    }
    let rebuild = |parent: &Vec<Option<(usize, Action)>>, mut i: usize, last: Action| {
        let mut w = vec![last];
        while let Some((p, a)) = &parent[i] {
            w.push(a.clone());
            i = *p;
        }
        w.reverse();
        w
    };
    while let Some((id, (ls, rs))) = queue.pop_front() {
        if budget.is_some_and(|b| seen.len() > b) {
            return Err(Error::BudgetExceeded { explored: seen.len() });
        }
        let mut succ = left.successors(&ls);
        succ.sort();
        let right_post = post(right, &rs);
        for (a, lt) in succ {
            let Some(rt) = right_post.get(&a) else {
                return Ok(Inclusion {
                    witness: Some(rebuild(&parent, id, a)),
                    explored: seen.len(),
                });
            };
            let node = (lt, rt.clone());
            if !seen.contains_key(&node) {
                seen.insert(node.clone(), parent.len());
                queue.push_back((parent.len(), node));
                parent.push(Some((id, a)));
            }
        }
    }
    Ok(Inclusion {
        witness: None,
        explored: seen.len(),
    })
}

/// Explicit transition system over words given as a finite set; handy as
/// an oracle and for comparing enumerated languages.
#[derive(Debug, Clone, Default)]
pub struct WordSet(pub BTreeSet<Word>);

impl Lts for WordSet {
    type State = Word;

    fn initial_states(&self) -> Vec<Word> {
        if self.0.contains(&Vec::new()) {
            vec![Vec::new()]
        } else {
            Vec::new()
        }
    }

    fn successors(&self, s: &Word) -> Vec<(Action, Word)> {
        self.0
            .range(s.clone()..)
            .take_while(|w| w.starts_with(s))
            .filter(|w| w.len() == s.len() + 1)
            .map(|w| (w[s.len()].clone(), w.clone()))
            .collect()
    }
}

pub fn format_word(w: &[Action]) -> String {
    w.iter().map(Action::to_string).collect::<Vec<_>>().join(" ")
}

/// Parses a space-separated word such as `AB!x AB?x`. The channel prefix
/// is split against the known participant names.
pub fn parse_word(text: &str, participants: &BTreeSet<Participant>) -> Result<Word> {
    text.split_whitespace()
        .map(|tok| parse_action(tok, participants))
        .collect()
}

fn parse_action(tok: &str, participants: &BTreeSet<Participant>) -> Result<Action> {
    let bad = || Error::InvalidWord(tok.to_string());
    let (pos, dir) = tok
        .char_indices()
        .find_map(|(i, c)| match c {
            '!' => Some((i, Direction::Out)),
            '?' => Some((i, Direction::In)),
            _ => None,
        })
        .ok_or_else(bad)?;
    let (chan, msg) = (&tok[..pos], &tok[pos + 1..]);
    let msg = Message::new(msg).map_err(|_| bad())?;
    let mut splits = participants.iter().filter_map(|s| {
        let rest = chan.strip_prefix(s.as_str())?;
        let r = participants.iter().find(|r| r.as_str() == rest)?;
        (s != r).then(|| Channel::new(s.clone(), r.clone()))
    });
    let channel = splits.next().ok_or_else(bad)?;
    if splits.next().is_some() {
        return Err(Error::InvalidWord(format!("{tok} (ambiguous channel)")));
    }
    Ok(Action::new(channel, dir, msg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ptps(names: &[&str]) -> BTreeSet<Participant> {
        names.iter().map(|n| Participant::new(*n).unwrap()).collect()
    }

    fn w(text: &str) -> Word {
        parse_word(text, &ptps(&["A", "B", "C"])).unwrap()
    }

    fn set(ws: &[&str]) -> WordSet {
        WordSet(ws.iter().map(|t| w(t)).collect())
    }

    #[test]
    fn word_text_round_trip() {
        let word = w("AB!x AB?x BC!y");
        assert_eq!(format_word(&word), "AB!x AB?x BC!y");
        assert!(w("").is_empty());
        assert!(parse_word("AD!x", &ptps(&["A", "B"])).is_err());
        assert!(parse_word("AB x", &ptps(&["A", "B"])).is_err());
        assert!(parse_word("AA!x", &ptps(&["A"])).is_err());
        let long = ptps(&["Alice", "Bob"]);
        assert_eq!(format_word(&parse_word("AliceBob!hi", &long).unwrap()), "AliceBob!hi");
        assert!(matches!(
            parse_word("ABC!x", &ptps(&["A", "AB", "BC", "C"])),
            Err(Error::InvalidWord(_))
        ));
    }

    #[test]
    fn enumeration_and_counting() {
        let l = set(&["", "AB!x", "AB!x AB?x", "AB!y"]);
        assert_eq!(words(&l, None), l.0);
        assert_eq!(count_words(&l), 4);
        assert_eq!(words(&l, Some(1)).len(), 3);
        assert!(accepts(&l, &w("AB!x AB?x")));
        assert!(!accepts(&l, &w("AB?x")));
        assert_eq!(count_words(&WordSet::default()), 0);
    }

    #[test]
    fn inclusion_witness_is_shortest_then_least() {
        let small = set(&["", "AB!x", "AB!x AB?x"]);
        let big = set(&["", "AB!x", "AB!x AB?x", "AB!y", "AB!y AB?y", "AB!x BC!z"]);
        assert!(check_inclusion(&small, &big, None).unwrap().holds());
        let inc = check_inclusion(&big, &small, None).unwrap();
        assert_eq!(inc.witness, Some(w("AB!y")));
        let deeper = set(&["", "AB!x", "AB!x BC!z", "AB!x AB?x"]);
        let inc = check_inclusion(&deeper, &small, None).unwrap();
        assert_eq!(inc.witness, Some(w("AB!x BC!z")));
        assert_eq!(
            check_inclusion(&small, &WordSet::default(), None).unwrap().witness,
            Some(Vec::new())
        );
    }

    #[test]
    fn completion_to_maximal_word() {
        let l = set(&["", "AB!x", "AB!x AB?x", "AB!x BC!z", "AB!x BC!z BC?z"]);
        assert_eq!(format_word(&complete(&l, &w("AB!x"))), "AB!x AB?x");
        assert_eq!(format_word(&complete(&l, &w("AB!x BC!z"))), "AB!x BC!z BC?z");
        assert_eq!(complete(&l, &w("AB?x")), w("AB?x"));
    }

    #[test]
    fn inclusion_budget() {
        let big = set(&["", "AB!x", "AB!x AB?x"]);
        assert!(matches!(
            check_inclusion(&big, &big, Some(1)),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
