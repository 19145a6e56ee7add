//! Exact calculus for compositions of self-gluings and mergers.
//!
//! The crate is organized around one chain of representations:
//!
//! * [`perm`] / [`symcore`] — symmetric-group arithmetic: the reindexing
//!   permutations `ρ_{i,j}`, shuffles, the coset decomposition against the
//!   `σ̂ · ρ` representatives, and the involution `ι` with quotient `φ` on
//!   pairs of gluings.
//! * [`trees`] — pure labeled trees, decorated trees and purification, and
//!   the three single-edge rewrite moves generating the equivalence.
//! * [`normalform`] — canonical representatives of rewrite classes: an output
//!   permutation plus a matching of glued leg pairs, with operadic
//!   composition and group actions, in even and odd (signed) modes.
//! * [`oracle`] — brute-force ground truth: exhaustive tree enumeration,
//!   parity-weighted union-find closure, closed-form class counts, and exact
//!   rational rank computation for relation spans.
//! * [`verify`] — executable checks: the ρ reindexing identity, shadow
//!   invariants, weight-3 class-count agreement, and relation ranks, each
//!   producing a machine-readable [`verify::Report`].
//! * [`expr`] — the surface expression language (parser and printer).

pub mod expr;
pub mod normalform;
pub mod oracle;
pub mod perm;
pub mod symcore;
pub mod trees;
pub mod verify;

pub use normalform::{Mode, NormalForm};
pub use perm::Perm;
pub use trees::{Element, PureTree, RawTree};
