//! Finite-model toolkit for typed systems of arbitrary objects.
//!
//! An *arbitrary object* is an entity that takes different particular objects
//! as values across *states*. Arbitrary objects come in correlated *systems*,
//! each abstracted from a blueprint: a [`ParticularObjectSystem`], a finite
//! set of equal-length rows of particular-object atoms. Columns of the
//! blueprint become arbitrary objects, rows become the states they can be in.
//!
//! The crate provides:
//!
//! - the domain types ([`system`], [`universe`]) and the valuation relation;
//! - abstraction into canonical systems, quotiented by the two
//!   extensionality principles ([`abstraction`]);
//! - dependence detection between arbitrary objects ([`dependence`]);
//! - machine checks of the governing axioms and derived laws over finite
//!   universes ([`verify`]);
//! - exhaustive enumeration and counting of systems up to identity
//!   ([`enumerate`]);
//! - a parser and evaluator for the three-sorted first-order language of
//!   valuation ([`logic`]);
//! - JSON/CSV interchange formats ([`io`]).
//!
//! All core values are immutable after construction; the only mutation is
//! registering new systems in a [`Universe`].

pub mod abstraction;
pub mod dependence;
pub mod enumerate;
pub mod io;
pub mod logic;
pub mod system;
pub mod universe;
pub mod verify;

pub use abstraction::{
    canonical_form, canonicalize, collapse, f_map, systems_equal, ArbitraryObjectSystem,
    CanonicalMatrix, StateMap, SystemId,
};
pub use system::{Atom, ParticularObjectSystem, Row, SystemError};
pub use universe::{Abstraction, ArbitraryObject, Bounds, State, Universe, UniverseError};
