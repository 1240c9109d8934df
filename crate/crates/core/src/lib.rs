//! Declarative object specifications.
//!
//! A specification is an answer-set program extended with atoms that talk
//! about host objects: membership in parameter arrays, constructor calls,
//! method invocations and a returned object. Each stable model of the
//! grounded program describes one object graph, which is built by running
//! the constructor and method calls it contains.
//!
//! ```
//! use ospec::syntax::parse_spec;
//! use ospec::ground::ground;
//! use ospec::binding::FactBase;
//! use ospec::solve::{enumerate, SolveRequest};
//!
//! let spec = parse_spec("Toy() { a(o) :- not b(o). b(o) :- not a(o). c(o) :-. }").unwrap();
//! let program = ground(&spec, &FactBase::default()).unwrap();
//! let models = enumerate(&SolveRequest::all(&program));
//! assert_eq!(models.len(), 2);
//! ```

// stage errors carry the offending objects and answer sets
#![allow(clippy::result_large_err)]

pub mod backend;
pub mod binding;
pub mod cli;
pub mod error;
pub mod ground;
pub mod instantiate;
pub mod solve;
pub mod syntax;

pub use error::Error;
pub use instantiate::{evaluate, evaluate_with, has_solution, EvalOptions, Solution};
