//! Abstract syntax of loop-free global choreographies.
//!
//! A [`GChor`] is built from the empty choreography, interactions
//! `A->B:m`, sequential composition, parallel composition and choice.
//! Interactions, forks and branches carry a [`ControlPoint`]; points are
//! always assigned by [`assign_control_points`] so that every position in a
//! term gets a distinct unbarred point.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

macro_rules! name_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(String);

        impl $name {
            pub fn new(name: impl Into<String>) -> Result<Self> {
                let name = name.into();
                if is_identifier(&name) {
                    Ok(Self(name))
                } else {
                    Err(Error::InvalidIdentifier(name))
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl TryFrom<String> for $name {
            type Error = Error;
            fn try_from(s: String) -> Result<Self> {
                Self::new(s)
            }
        }

        impl TryFrom<&str> for $name {
            type Error = Error;
            fn try_from(s: &str) -> Result<Self> {
                Self::new(s)
            }
        }

        impl From<$name> for String {
            fn from(n: $name) -> String {
                n.0
            }
        }

        impl std::str::FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                Self::new(s)
            }
        }
    };
}

name_type!(
    /// A participant name.
    Participant
);
name_type!(
    /// A message name.
    Message
);

/// A control point `k<id>`; the barred copy `~k<id>` is its image under [`mu`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ControlPoint {
    pub id: u32,
    pub barred: bool,
}

impl ControlPoint {
    pub const fn new(id: u32) -> Self {
        Self { id, barred: false }
    }

    /// Placeholder carried by terms that have not been annotated yet.
    pub const UNASSIGNED: ControlPoint = ControlPoint::new(0);
}

impl fmt::Display for ControlPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.barred {
            write!(f, "~k{}", self.id)
        } else {
            write!(f, "k{}", self.id)
        }
    }
}

/// The involution pairing a fork (or send) point with its merge (or receive) marker.
pub fn mu(k: ControlPoint) -> ControlPoint {
    ControlPoint {
        id: k.id,
        barred: !k.barred,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GChor {
    Zero,
    Interaction {
        sender: Participant,
        receiver: Participant,
        msg: Message,
        cp: ControlPoint,
    },
    Seq(Box<GChor>, Box<GChor>),
    Par {
        cp: ControlPoint,
        left: Box<GChor>,
        right: Box<GChor>,
    },
    Cho {
        cp: ControlPoint,
        left: Box<GChor>,
        right: Box<GChor>,
    },
}

impl GChor {
    /// An interaction without a control point; see [`assign_control_points`].
    pub fn interaction(sender: Participant, receiver: Participant, msg: Message) -> Self {
        GChor::Interaction {
            sender,
            receiver,
            msg,
            cp: ControlPoint::UNASSIGNED,
        }
    }

    pub fn seq(left: GChor, right: GChor) -> Self {
        GChor::Seq(Box::new(left), Box::new(right))
    }

    pub fn par(left: GChor, right: GChor) -> Self {
        GChor::Par {
            cp: ControlPoint::UNASSIGNED,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn cho(left: GChor, right: GChor) -> Self {
        GChor::Cho {
            cp: ControlPoint::UNASSIGNED,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Control point of the node itself, if it carries one.
    pub fn control_point(&self) -> Option<ControlPoint> {
        match self {
            GChor::Interaction { cp, .. } | GChor::Par { cp, .. } | GChor::Cho { cp, .. } => {
                Some(*cp)
            }
            GChor::Zero | GChor::Seq(..) => None,
        }
    }

    /// All control points in pre-order.
    pub fn control_points(&self) -> Vec<ControlPoint> {
        let mut out = Vec::new();
        self.walk(&mut |g| {
            if let Some(cp) = g.control_point() {
                out.push(cp);
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a GChor)) {
        f(self);
        match self {
            GChor::Zero | GChor::Interaction { .. } => {}
            GChor::Seq(l, r) => {
                l.walk(f);
                r.walk(f);
            }
            GChor::Par { left, right, .. } | GChor::Cho { left, right, .. } => {
                left.walk(f);
                right.walk(f);
            }
        }
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    pub fn interaction_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |g| {
            if matches!(g, GChor::Interaction { .. }) {
                n += 1
            }
        });
        n
    }

    pub fn involves(&self, p: &Participant) -> bool {
        let mut found = false;
        self.walk(&mut |g| {
            if let GChor::Interaction {
                sender, receiver, ..
            } = g
            {
                found |= sender == p || receiver == p;
            }
        });
        found
    }

    /// Checks the term invariants: no self-interaction, unique unbarred points.
    pub fn check_invariants(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        let mut result = Ok(());
        self.walk(&mut |g| {
            if result.is_err() {
                return;
            }
            if let GChor::Interaction {
                sender, receiver, ..
            } = g
            {
                if sender == receiver {
                    result = Err(Error::SelfInteraction(sender.clone()));
                    return;
                }
            }
            if let Some(cp) = g.control_point() {
                if cp.barred || cp == ControlPoint::UNASSIGNED || !seen.insert(cp) {
                    result = Err(Error::ControlPoints(format!(
                        "{cp} is barred, unassigned or repeated"
                    )));
                }
            }
        });
        result
    }
}

/// Annotates a term with control points by pre-order traversal starting at 1.
///
/// Interactions, parallel and choice nodes consume one id each.
pub fn assign_control_points(raw: &GChor) -> Result<GChor> {
    fn go(g: &GChor, next: &mut u32) -> Result<GChor> {
        let mut fresh = || {
            let cp = ControlPoint::new(*next);
            *next += 1;
            cp
        };
        Ok(match g {
            GChor::Zero => GChor::Zero,
            GChor::Interaction {
                sender,
                receiver,
                msg,
                ..
            } => {
                if sender == receiver {
                    return Err(Error::SelfInteraction(sender.clone()));
                }
                GChor::Interaction {
                    sender: sender.clone(),
                    receiver: receiver.clone(),
                    msg: msg.clone(),
                    cp: fresh(),
                }
            }
            GChor::Seq(l, r) => {
                let l = go(l, next)?;
                GChor::Seq(Box::new(l), Box::new(go(r, next)?))
            }
            GChor::Par { left, right, .. } => {
                let cp = fresh();
                let left = Box::new(go(left, next)?);
                GChor::Par {
                    cp,
                    left,
                    right: Box::new(go(right, next)?),
                }
            }
            GChor::Cho { left, right, .. } => {
                let cp = fresh();
                let left = Box::new(go(left, next)?);
                GChor::Cho {
                    cp,
                    left,
                    right: Box::new(go(right, next)?),
                }
            }
        })
    }
    go(raw, &mut 1)
}

/// Senders and receivers occurring in `g`.
pub fn participants(g: &GChor) -> BTreeSet<Participant> {
    let mut out = BTreeSet::new();
    g.walk(&mut |n| {
        if let GChor::Interaction {
            sender, receiver, ..
        } = n
        {
            out.insert(sender.clone());
            out.insert(receiver.clone());
        }
    });
    out
}

/// Normal form modulo structural congruence; control points are dropped.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Normal {
    Zero,
    Int(Participant, Participant, Message),
    Seq(Vec<Normal>),
    Par(Vec<Normal>),
    Cho(Vec<Normal>),
}

fn normalize(g: &GChor) -> Normal {
    // Children are normalised first, so units dropped below can expose
    // operators of the same kind that still need flattening.
    fn splice(n: Normal, out: &mut Vec<Normal>, same: fn(Normal) -> std::result::Result<Vec<Normal>, Normal>) {
        match same(n) {
            Ok(items) => out.extend(items),
            Err(Normal::Zero) => {}
            Err(n) => out.push(n),
        }
    }
    fn collapse(mut items: Vec<Normal>, build: fn(Vec<Normal>) -> Normal) -> Normal {
        match items.len() {
            0 => Normal::Zero,
            1 => items.pop().unwrap(),
            _ => build(items),
        }
    }
    fn binary(
        l: &GChor,
        r: &GChor,
        same: fn(Normal) -> std::result::Result<Vec<Normal>, Normal>,
        build: fn(Vec<Normal>) -> Normal,
        sort: bool,
    ) -> Normal {
        let mut items = Vec::new();
        splice(normalize(l), &mut items, same);
        splice(normalize(r), &mut items, same);
        if sort {
            items.sort();
        }
        collapse(items, build)
    }

    match g {
        GChor::Zero => Normal::Zero,
        GChor::Interaction {
            sender,
            receiver,
            msg,
            ..
        } => Normal::Int(sender.clone(), receiver.clone(), msg.clone()),
        GChor::Seq(l, r) => binary(
            l,
            r,
            |n| match n {
                Normal::Seq(v) => Ok(v),
                n => Err(n),
            },
            Normal::Seq,
            false,
        ),
        GChor::Par { left, right, .. } => binary(
            left,
            right,
            |n| match n {
                Normal::Par(v) => Ok(v),
                n => Err(n),
            },
            Normal::Par,
            true,
        ),
        GChor::Cho { left, right, .. } => binary(
            left,
            right,
            |n| match n {
                Normal::Cho(v) => Ok(v),
                n => Err(n),
            },
            Normal::Cho,
            true,
        ),
    }
}

/// Structural congruence: associativity of `;`, `|`, `+`, commutativity of
/// `|` and `+`, and `0` as unit of all three. Control points are ignored.
pub fn congruent(g: &GChor, h: &GChor) -> bool {
    normalize(g) == normalize(h)
}
