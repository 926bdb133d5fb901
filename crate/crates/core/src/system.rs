//! Communicating systems: one machine per participant composed over
//! unbounded point-to-point buffers.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::ast::{Message, Participant};
use crate::cfsm::{Cfsm, State};
use crate::error::{Error, Result};
use crate::hypergraph::{Action, Channel, Direction};
use crate::lts::{self, Lts, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BufferPolicy {
    #[default]
    Fifo,
    /// Buffers are multisets; any pending message may be consumed.
    Bag,
}

impl fmt::Display for BufferPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BufferPolicy::Fifo => "fifo",
            BufferPolicy::Bag => "bag",
        })
    }
}

impl std::str::FromStr for BufferPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fifo" => Ok(BufferPolicy::Fifo),
            "bag" => Ok(BufferPolicy::Bag),
            other => Err(format!("unknown buffer policy `{other}` (expected fifo or bag)")),
        }
    }
}

/// Machine states and buffer contents, both as indices into the system's
/// tables. Bag buffers are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub states: Vec<u32>,
    pub buffers: Vec<Vec<u32>>,
}

#[derive(Debug, Clone)]
struct Move {
    action: Action,
    channel: usize,
    dir: Direction,
    msg: u32,
    to: u32,
}

#[derive(Debug, Clone)]
struct Machine {
    states: Vec<State>,
    initial: u32,
    moves: Vec<Vec<Move>>,
}

#[derive(Debug, Clone)]
pub struct CommSystem {
    pub machines: BTreeMap<Participant, Cfsm>,
    pub policy: BufferPolicy,
    participants: Vec<Participant>,
    channels: Vec<Channel>,
    messages: Vec<Message>,
    compiled: Vec<Machine>,
}

/// Limits on exploration; loop-free systems terminate without them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExplorationBudget {
    pub max_configs: Option<usize>,
    pub max_trace_len: Option<usize>,
}

impl ExplorationBudget {
    pub fn configs(n: usize) -> Self {
        ExplorationBudget {
            max_configs: Some(n),
            max_trace_len: None,
        }
    }
}

impl CommSystem {
    /// Assembles a system; every machine must be local to its participant
    /// and only address participants of the system.
    pub fn new(machines: impl IntoIterator<Item = Cfsm>, policy: BufferPolicy) -> Result<Self> {
        let mut by_name = BTreeMap::new();
        for m in machines {
            if !m.is_local() {
                return Err(Error::InvalidSystem(format!("machine of {} is not local", m.participant)));
            }
            if let Some(prev) = by_name.insert(m.participant.clone(), m) {
                return Err(Error::InvalidSystem(format!("two machines for {}", prev.participant)));
            }
        }
        let participants: Vec<Participant> = by_name.keys().cloned().collect();
        let n = participants.len();
        let pidx: BTreeMap<&Participant, usize> = participants.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut channels = Vec::with_capacity(n * n.saturating_sub(1));
        for s in &participants {
            for r in &participants {
                if s != r {
                    channels.push(Channel::new(s.clone(), r.clone()));
                }
            }
        }
        let chan_index = |c: &Channel| -> Result<usize> {
            match (pidx.get(&c.sender), pidx.get(&c.receiver)) {
                (Some(&i), Some(&j)) => Ok(i * (n - 1) + if j > i { j - 1 } else { j }),
                _ => Err(Error::InvalidSystem(format!("channel {c} leaves the system"))),
            }
        };
        let messages: Vec<Message> = by_name
            .values()
            .flat_map(|m| m.transitions.iter().map(|t| t.label.msg.clone()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let midx: BTreeMap<&Message, u32> = messages.iter().enumerate().map(|(i, m)| (m, i as u32)).collect();
        let mut compiled = Vec::with_capacity(n);
        for m in by_name.values() {
            let states: Vec<State> = m.states.iter().cloned().collect();
            let sidx: BTreeMap<&State, u32> = states.iter().enumerate().map(|(i, q)| (q, i as u32)).collect();
            let mut moves = vec![Vec::new(); states.len()];
            for t in &m.transitions {
                moves[sidx[&t.from] as usize].push(Move {
                    action: t.label.clone(),
                    channel: chan_index(&t.label.channel)?,
                    dir: t.label.dir,
                    msg: midx[&t.label.msg],
                    to: sidx[&t.to],
                });
            }
            compiled.push(Machine {
                initial: sidx[&m.initial],
                states,
                moves,
            });
        }
        Ok(CommSystem {
            machines: by_name,
            policy,
            participants,
            channels,
            messages,
            compiled,
        })
    }

    pub fn with_policy(&self, policy: BufferPolicy) -> Self {
        CommSystem {
            policy,
            ..self.clone()
        }
    }

    pub fn participants(&self) -> &[Participant] {
        &self.participants
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn initial(&self) -> Configuration {
        Configuration {
            states: self.compiled.iter().map(|m| m.initial).collect(),
            buffers: vec![Vec::new(); self.channels.len()],
        }
    }

    /// Enabled transitions, ordered by action and then target.
    pub fn step(&self, c: &Configuration) -> Vec<(Action, Configuration)> {
        let mut out = Vec::new();
        for (i, m) in self.compiled.iter().enumerate() {
            for mv in &m.moves[c.states[i] as usize] {
                let buf = &c.buffers[mv.channel];
                let new_buf = match (mv.dir, self.policy) {
                    (Direction::Out, BufferPolicy::Fifo) => {
                        let mut b = buf.clone();
                        b.push(mv.msg);
                        b
                    }
                    (Direction::Out, BufferPolicy::Bag) => {
                        let mut b = buf.clone();
                        let at = b.partition_point(|&x| x <= mv.msg);
                        b.insert(at, mv.msg);
                        b
                    }
                    (Direction::In, BufferPolicy::Fifo) => {
                        if buf.first() != Some(&mv.msg) {
                            continue;
                        }
                        buf[1..].to_vec()
                    }
                    (Direction::In, BufferPolicy::Bag) => {
                        let Ok(at) = buf.binary_search(&mv.msg) else { continue };
                        let mut b = buf.clone();
                        b.remove(at);
                        b
                    }
                };
                let mut next = c.clone();
                next.states[i] = mv.to;
                next.buffers[mv.channel] = new_buf;
                out.push((mv.action.clone(), next));
            }
        }
        out.sort();
        out
    }

    pub fn is_stable(&self, c: &Configuration) -> bool {
        c.buffers.iter().all(Vec::is_empty)
    }

    /// Stuck while some machine waits for input or some message is pending.
    pub fn is_deadlock(&self, c: &Configuration) -> bool {
        if !self.step(c).is_empty() {
            return false;
        }
        let waiting = self.compiled.iter().enumerate().any(|(i, m)| {
            m.moves[c.states[i] as usize]
                .iter()
                .any(|mv| mv.dir == Direction::In)
        });
        waiting || !self.is_stable(c)
    }

    /// Configurations reached by firing `w` from the initial one.
    pub fn replay(&self, w: &[Action]) -> BTreeSet<Configuration> {
        let mut current: BTreeSet<Configuration> = [self.initial()].into();
        for a in w {
            current = current
                .iter()
                .flat_map(|c| self.step(c))
                .filter(|(b, _)| b == a)
                .map(|(_, c)| c)
                .collect();
        }
        current
    }

    /// Breadth-first exploration from the initial configuration.
    ///
    /// Levels are expanded in parallel when `parallel` is set; successors
    /// are merged in a fixed order so the result does not depend on the
    /// schedule.
    pub fn explore(&self, budget: ExplorationBudget, parallel: bool) -> Exploration {
        let mut ex = Exploration {
            configs: vec![self.initial()],
            parent: vec![None],
            depth: vec![0],
            index: HashMap::new(),
            truncated: false,
        };
        ex.index.insert(self.initial(), 0);
        let mut frontier = vec![0usize];
        while !frontier.is_empty() {
            let expand = |&i: &usize| {
                if budget.max_trace_len.is_some_and(|d| ex.depth[i] >= d) {
                    return (i, Vec::new());
                }
                (i, self.step(&ex.configs[i]))
            };
            let succs: Vec<(usize, Vec<(Action, Configuration)>)> = if parallel && frontier.len() > 1 {
                frontier.par_iter().map(expand).collect()
            } else {
                frontier.iter().map(expand).collect()
            };
            let mut next = Vec::new();
            for (i, list) in succs {
                for (a, c) in list {
                    if ex.index.contains_key(&c) {
                        continue;
                    }
                    if budget.max_configs.is_some_and(|m| ex.configs.len() >= m) {
                        ex.truncated = true;
                        return ex;
                    }
                    let id = ex.configs.len();
                    ex.index.insert(c.clone(), id);
                    ex.configs.push(c);
                    ex.parent.push(Some((i, a)));
                    ex.depth.push(ex.depth[i] + 1);
                    next.push(id);
                }
            }
            frontier = next;
        }
        ex
    }

    /// All reachable configurations; fails when the budget runs out.
    pub fn reachable(&self, budget: ExplorationBudget) -> Result<Exploration> {
        let ex = self.explore(budget, false);
        if ex.truncated {
            return Err(Error::BudgetExceeded {
                explored: ex.configs.len(),
            });
        }
        Ok(ex)
    }

    /// The system language; every firable action sequence.
    pub fn language(&self, budget: ExplorationBudget) -> Result<BTreeSet<Word>> {
        self.reachable(budget)?;
        Ok(lts::words(self, budget.max_trace_len))
    }

    pub fn state_name(&self, c: &Configuration, p: usize) -> &State {
        &self.compiled[p].states[c.states[p] as usize]
    }

    /// `{states: {A: "q0"}, buffers: {"A>B": ["x"]}}`
    pub fn config_json(&self, c: &Configuration) -> Value {
        let mut states = Map::new();
        for (i, p) in self.participants.iter().enumerate() {
            states.insert(p.to_string(), json!(self.state_name(c, i).to_string()));
        }
        let mut buffers = Map::new();
        for (k, ch) in self.channels.iter().enumerate() {
            let msgs: Vec<&str> = c.buffers[k].iter().map(|&m| self.messages[m as usize].as_str()).collect();
            buffers.insert(format!("{}>{}", ch.sender, ch.receiver), json!(msgs));
        }
        json!({ "states": states, "buffers": buffers })
    }
}

impl Lts for CommSystem {
    type State = Configuration;

    fn initial_states(&self) -> Vec<Configuration> {
        vec![self.initial()]
    }

    fn successors(&self, s: &Configuration) -> Vec<(Action, Configuration)> {
        self.step(s)
    }
}

/// Reachable configurations with breadth-first predecessor links.
#[derive(Debug, Clone)]
pub struct Exploration {
    pub configs: Vec<Configuration>,
    parent: Vec<Option<(usize, Action)>>,
    depth: Vec<usize>,
    index: HashMap<Configuration, usize>,
    pub truncated: bool,
}

impl Exploration {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn contains(&self, c: &Configuration) -> bool {
        self.index.contains_key(c)
    }

    pub fn as_set(&self) -> BTreeSet<Configuration> {
        self.configs.iter().cloned().collect()
    }

    /// The firing sequence by which `id` was first reached.
    pub fn path(&self, mut id: usize) -> Word {
        let mut w = Vec::new();
        while let Some((p, a)) = &self.parent[id] {
            w.push(a.clone());
            id = *p;
        }
        w.reverse();
        w
    }

    /// First deadlock in breadth-first order, with its firing sequence.
    pub fn first_deadlock(&self, sys: &CommSystem) -> Option<(usize, Word)> {
        (0..self.configs.len())
            .find(|&i| sys.is_deadlock(&self.configs[i]))
            .map(|i| (i, self.path(i)))
    }
}
