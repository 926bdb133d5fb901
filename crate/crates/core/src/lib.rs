//! Loop-free global choreographies: hypergraph semantics, well-formedness,
//! trace languages, projection onto communicating machines and empirical
//! verification of the resulting systems.

pub mod ast;
pub mod cfsm;
pub mod corpus;
pub mod error;
pub mod hypergraph;
pub mod language;
pub mod lts;
pub mod semantics;
pub mod syntax;
pub mod system;
pub mod verify;

pub use ast::{ControlPoint, GChor, Message, Participant};
pub use error::{Error, Result};
pub use hypergraph::{Action, Direction, Event, HyperEdge, HyperGraph};
