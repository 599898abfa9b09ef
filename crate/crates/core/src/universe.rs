//! Universes: finite models pairing a particulars set with a family of
//! registered canonical systems, and the valuation relation over them.
//!
//! Arbitrary objects and states are addressed positionally into canonical
//! systems: an object is ⟨system id, column index⟩, a state is
//! ⟨system id, row⟩. Distinct systems therefore share no objects and no
//! states by construction, and the three categories (particulars, objects,
//! states) are disjoint at the type level.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{canonicalize, ArbitraryObjectSystem, CanonicalMatrix, StateMap, SystemId};
use crate::system::{Atom, ParticularObjectSystem, Row};

/// An arbitrary object: a column of a canonical system. `column_index` is
/// 1-based, matching the printable label `a<index>@<id prefix>`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArbitraryObject {
    system: SystemId,
    column_index: usize,
}

impl ArbitraryObject {
    pub fn new(system: SystemId, column_index: usize) -> Self {
        assert!(column_index >= 1, "column indices are 1-based");
        ArbitraryObject {
            system,
            column_index,
        }
    }

    pub fn system_id(&self) -> &SystemId {
        &self.system
    }

    pub fn column_index(&self) -> usize {
        self.column_index
    }

    pub fn label(&self) -> String {
        format!("a{}@{}", self.column_index, self.system.short())
    }
}

impl fmt::Display for ArbitraryObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A state: a row of a canonical system, tagged with the system it belongs
/// to. Two states are equal exactly when system id and row are equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State {
    system: SystemId,
    row: Row,
}

impl State {
    pub fn new(system: SystemId, row: Row) -> Self {
        State { system, row }
    }

    pub fn system_id(&self) -> &SystemId {
        &self.system
    }

    pub fn row(&self) -> &Row {
        &self.row
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{}, {}⟩", self.system.short(), self.row)
    }
}

/// Enumeration bounds: at most `max_objects` columns and `max_states` rows.
/// `(0, 0)` makes relativized comprehension a vacuous claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Bounds {
    pub max_objects: usize,
    pub max_states: usize,
}

impl Bounds {
    pub const NONE: Bounds = Bounds {
        max_objects: 0,
        max_states: 0,
    };

    pub fn new(max_objects: usize, max_states: usize) -> Self {
        Bounds {
            max_objects,
            max_states,
        }
    }

    pub fn is_vacuous(&self) -> bool {
        self.max_objects == 0 || self.max_states == 0
    }
}

impl From<(usize, usize)> for Bounds {
    fn from((max_objects, max_states): (usize, usize)) -> Self {
        Bounds::new(max_objects, max_states)
    }
}

impl From<Bounds> for (usize, usize) {
    fn from(b: Bounds) -> Self {
        (b.max_objects, b.max_states)
    }
}

/// The result of abstracting a blueprint in a universe: the id of the
/// (registered) canonical system, the state-assignment map for the
/// blueprint's rows, and the map from source columns to canonical columns.
#[derive(Debug, Clone)]
pub struct Abstraction {
    pub system_id: SystemId,
    pub state_map: StateMap,
    /// `column_map[α]` is the 0-based canonical column that source column
    /// `α` (pre-collapse, 0-based) abstracts to.
    pub column_map: Vec<usize>,
}

impl Abstraction {
    /// The object abstracted from a 0-based source column.
    pub fn object_for_column(&self, source_column: usize) -> ArbitraryObject {
        ArbitraryObject::new(self.system_id.clone(), self.column_map[source_column] + 1)
    }

    /// The abstracted sequence ⟨a₁, …⟩ in source column order; repeats an
    /// object where the source had duplicate columns.
    pub fn objects_in_source_order(&self) -> Vec<ArbitraryObject> {
        (0..self.column_map.len())
            .map(|c| self.object_for_column(c))
            .collect()
    }
}

/// A finite model: a nonempty particulars set, a family of registered
/// systems, and the bounds its comprehension claim is relativized to.
#[derive(Debug, Clone)]
pub struct Universe {
    particulars: BTreeSet<Atom>,
    systems: Vec<ArbitraryObjectSystem>,
    bounds: Bounds,
}

impl Universe {
    pub fn new(particulars: impl IntoIterator<Item = Atom>) -> Result<Self, UniverseError> {
        Self::with_bounds(particulars, Bounds::NONE)
    }

    pub fn with_bounds(
        particulars: impl IntoIterator<Item = Atom>,
        bounds: Bounds,
    ) -> Result<Self, UniverseError> {
        let particulars: BTreeSet<Atom> = particulars.into_iter().collect();
        if particulars.is_empty() {
            return Err(UniverseError::EmptyParticulars);
        }
        Ok(Universe {
            particulars,
            systems: Vec::new(),
            bounds,
        })
    }

    pub fn particulars(&self) -> &BTreeSet<Atom> {
        &self.particulars
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn set_bounds(&mut self, bounds: Bounds) {
        self.bounds = bounds;
    }

    pub fn systems(&self) -> &[ArbitraryObjectSystem] {
        &self.systems
    }

    /// The first registered system with the given id.
    pub fn system(&self, id: &SystemId) -> Option<&ArbitraryObjectSystem> {
        self.systems.iter().find(|s| s.canonical_id() == id)
    }

    /// The unique registered system whose id starts with `prefix`.
    pub fn system_by_prefix(&self, prefix: &str) -> Option<&ArbitraryObjectSystem> {
        let mut matches = self
            .systems
            .iter()
            .filter(|s| s.canonical_id().as_str().starts_with(prefix));
        match (matches.next(), matches.next()) {
            (Some(only), None) => Some(only),
            _ => None,
        }
    }

    /// Abstracts a blueprint: canonicalizes it, registers the canonical
    /// system if it is new, and returns the state and column maps. A second
    /// abstraction of an equivalent blueprint returns the identical system.
    pub fn abstract_system(
        &mut self,
        o: &ParticularObjectSystem,
    ) -> Result<Abstraction, UniverseError> {
        for atom in o.atoms() {
            if !self.particulars.contains(&atom) {
                return Err(UniverseError::UnknownValue { atom });
            }
        }
        let canonicalization = canonicalize(o);
        let system_id = self.register_canonical(canonicalization.matrix().clone());
        let assignment: BTreeMap<Row, State> = o
            .rows()
            .iter()
            .map(|x| (x.clone(), canonicalization.state_for(x)))
            .collect();
        Ok(Abstraction {
            system_id,
            state_map: StateMap::new(o.clone(), assignment),
            column_map: canonicalization.column_map().to_vec(),
        })
    }

    /// Registers a canonical matrix, deduplicating by id.
    pub fn register_canonical(&mut self, matrix: CanonicalMatrix) -> SystemId {
        let id = matrix.id();
        if self.system(&id).is_none() {
            self.systems
                .push(ArbitraryObjectSystem::from_parts(id.clone(), matrix));
        }
        id
    }

    /// Appends a system blindly, bypassing canonicalization and
    /// deduplication. Exists so the checks can be run against broken
    /// registries; the honest path is [`abstract_system`](Self::abstract_system).
    pub fn register_raw(&mut self, system: ArbitraryObjectSystem) {
        self.systems.push(system);
    }

    /// All arbitrary objects of all registered systems, in registration and
    /// column order.
    pub fn objects(&self) -> impl Iterator<Item = ArbitraryObject> + '_ {
        self.systems.iter().flat_map(|s| {
            let id = s.canonical_id().clone();
            (1..=s.object_count()).map(move |c| ArbitraryObject::new(id.clone(), c))
        })
    }

    /// All states of all registered systems, in registration and row order.
    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        self.systems.iter().flat_map(|s| {
            let id = s.canonical_id().clone();
            s.matrix()
                .rows()
                .iter()
                .map(move |row| State::new(id.clone(), row.clone()))
        })
    }

    pub fn contains_object(&self, a: &ArbitraryObject) -> bool {
        self.system(a.system_id())
            .is_some_and(|s| a.column_index() >= 1 && a.column_index() <= s.object_count())
    }

    pub fn contains_state(&self, s: &State) -> bool {
        self.system(s.system_id())
            .is_some_and(|sys| sys.matrix().contains_row(s.row()))
    }

    /// The valuation relation as a partial function: the value of `a` in
    /// state `s`, or `None` when `a` and `s` belong to different systems.
    pub fn val(&self, a: &ArbitraryObject, s: &State) -> Result<Option<Atom>, UniverseError> {
        if !self.contains_object(a) {
            return Err(UniverseError::UnknownObject {
                object: a.label(),
            });
        }
        if !self.contains_state(s) {
            return Err(UniverseError::UnknownState {
                state: s.to_string(),
            });
        }
        if a.system_id() != s.system_id() {
            return Ok(None);
        }
        Ok(s.row().get(a.column_index() - 1).cloned())
    }

    /// The set of states in which `a` takes a value: exactly the states of
    /// its own system.
    pub fn state_space(&self, a: &ArbitraryObject) -> Result<BTreeSet<State>, UniverseError> {
        let system = self.system(a.system_id()).filter(|s| {
            a.column_index() >= 1 && a.column_index() <= s.object_count()
        });
        let system = system.ok_or_else(|| UniverseError::UnknownObject {
            object: a.label(),
        })?;
        Ok(system
            .matrix()
            .rows()
            .iter()
            .map(|row| State::new(a.system_id().clone(), row.clone()))
            .collect())
    }

    /// The set of values `a` takes across its state space.
    pub fn value_range(&self, a: &ArbitraryObject) -> Result<BTreeSet<Atom>, UniverseError> {
        Ok(self
            .state_space(a)?
            .iter()
            .map(|s| s.row().entries()[a.column_index() - 1].clone())
            .collect())
    }

    /// Printable state label `s<index>@<id prefix>`, indexing the row in
    /// the canonical row order (1-based).
    pub fn state_label(&self, s: &State) -> Option<String> {
        let system = self.system(s.system_id())?;
        let index = system.matrix().row_index(s.row())?;
        Some(format!("s{}@{}", index + 1, s.system_id().short()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UniverseError {
    #[error("a universe needs at least one particular object")]
    EmptyParticulars,
    #[error("value {atom} does not occur among the universe's particulars")]
    UnknownValue { atom: Atom },
    #[error("unknown arbitrary object {object}")]
    UnknownObject { object: String },
    #[error("unknown state {state}")]
    UnknownState { state: String },
    #[error("no registered system with id {id}")]
    UnknownSystem { id: SystemId },
}


#[cfg(test)]
mod tests {
    use super::fixtures::{example1, example2};
    use super::*;
    use crate::system::{atoms, pos, row};

    fn object(u: &Universe, index: usize) -> ArbitraryObject {
        ArbitraryObject::new(u.systems()[0].canonical_id().clone(), index)
    }

    fn state(u: &Universe, index: usize) -> State {
        let system = &u.systems()[0];
        State::new(
            system.canonical_id().clone(),
            system.matrix().rows()[index - 1].clone(),
        )
    }

    #[test]
    fn example1_val_table() {
        let (u, _) = example1();
        let (a1, a2) = (object(&u, 1), object(&u, 2));
        let (s1, s2) = (state(&u, 1), state(&u, 2));
        assert_eq!(u.val(&a1, &s1).unwrap().unwrap().as_str(), "p1");
        assert_eq!(u.val(&a1, &s2).unwrap().unwrap().as_str(), "p2");
        assert_eq!(u.val(&a2, &s1).unwrap().unwrap().as_str(), "p2");
        assert_eq!(u.val(&a2, &s2).unwrap().unwrap().as_str(), "p3");
    }

    #[test]
    fn val_is_undefined_across_systems() {
        let (mut u, _) = example1();
        let other = u.abstract_system(&pos(&[&["p1"]])).unwrap();
        let a = ArbitraryObject::new(other.system_id.clone(), 1);
        let s = state(&u, 1);
        assert_eq!(u.val(&a, &s).unwrap(), None);
    }

    #[test]
    fn singleton_universe_val() {
        let mut u = Universe::new(atoms(&["p"])).unwrap();
        let abs = u.abstract_system(&pos(&[&["p"]])).unwrap();
        let a = ArbitraryObject::new(abs.system_id.clone(), 1);
        let s = abs.state_map.state_of(&row(&["p"])).unwrap().clone();
        assert_eq!(u.val(&a, &s).unwrap().unwrap().as_str(), "p");
    }

    #[test]
    fn val_rejects_unknown_objects_and_states() {
        let (u, _) = example1();
        let bogus_system = SystemId::from_raw("feedface");
        let ghost = ArbitraryObject::new(bogus_system.clone(), 1);
        let s1 = state(&u, 1);
        assert!(matches!(
            u.val(&ghost, &s1),
            Err(UniverseError::UnknownObject { .. })
        ));
        let ghost_state = State::new(bogus_system, row(&["p1"]));
        let a1 = object(&u, 1);
        assert!(matches!(
            u.val(&a1, &ghost_state),
            Err(UniverseError::UnknownState { .. })
        ));
        // column index out of range is an unknown object too
        let beyond = ArbitraryObject::new(u.systems()[0].canonical_id().clone(), 3);
        assert!(matches!(
            u.val(&beyond, &s1),
            Err(UniverseError::UnknownObject { .. })
        ));
    }

    #[test]
    fn state_space_lists_the_system_rows() {
        let (u, _) = example1();
        let a1 = object(&u, 1);
        let space = u.state_space(&a1).unwrap();
        assert_eq!(space.len(), 2);
        assert!(space.contains(&state(&u, 1)));
        assert!(space.contains(&state(&u, 2)));
        // all objects of one system share a state space
        assert_eq!(space, u.state_space(&object(&u, 2)).unwrap());
    }

    #[test]
    fn state_space_cardinality_matches_blueprint_rows() {
        let (mut u, _) = example1();
        let o = pos(&[&["p1", "p1"], &["p2", "p1"], &["p3", "p2"]]);
        let abs = u.abstract_system(&o).unwrap();
        let a = abs.object_for_column(0);
        assert_eq!(u.state_space(&a).unwrap().len(), o.row_count());
    }

    #[test]
    fn value_ranges() {
        let (u, _) = example1();
        assert_eq!(u.value_range(&object(&u, 1)).unwrap(), atoms(&["p1", "p2"]).into_iter().collect());

        // degenerate one-value object
        let mut v = Universe::new(atoms(&["p"])).unwrap();
        let abs = v.abstract_system(&pos(&[&["p"]])).unwrap();
        let a = abs.object_for_column(0);
        assert_eq!(v.value_range(&a).unwrap(), atoms(&["p"]).into_iter().collect());
    }

    #[test]
    fn value_range_over_ten_singleton_rows() {
        let tokens: Vec<String> = (0..10).map(|n| n.to_string()).collect();
        let toks: Vec<&str> = tokens.iter().map(|s| s.as_str()).collect();
        let mut u = Universe::new(atoms(&toks)).unwrap();
        let rows: Vec<Row> = toks.iter().map(|t| row(&[t])).collect();
        let abs = u
            .abstract_system(&ParticularObjectSystem::new(rows).unwrap())
            .unwrap();
        let a = abs.object_for_column(0);
        // oracle: evaluate val in every state and collect the values
        let mut seen = BTreeSet::new();
        for s in u.state_space(&a).unwrap() {
            seen.insert(u.val(&a, &s).unwrap().unwrap().clone());
        }
        assert_eq!(u.value_range(&a).unwrap(), seen);
        assert_eq!(seen.len(), 10);
    }

    #[test]
    fn abstracting_twice_reuses_the_system() {
        let (mut u, first) = example2();
        assert_eq!(u.systems().len(), 1);
        let second = u.abstract_system(&pos(&[&["1", "0"], &["0", "1"]])).unwrap();
        assert_eq!(first.system_id, second.system_id);
        assert_eq!(u.systems().len(), 1);
    }

    #[test]
    fn abstraction_rejects_foreign_values() {
        let mut u = Universe::new(atoms(&["0"])).unwrap();
        let err = u.abstract_system(&pos(&[&["1"]])).unwrap_err();
        assert!(matches!(err, UniverseError::UnknownValue { .. }));
    }

    #[test]
    fn example2_has_two_objects_and_two_states() {
        let (u, _) = example2();
        let system = &u.systems()[0];
        assert_eq!(system.object_count(), 2);
        assert_eq!(system.state_count(), 2);
    }

    #[test]
    fn degenerate_blueprint_yields_one_object_in_one_state() {
        let mut u = Universe::new(atoms(&["p"])).unwrap();
        let abs = u.abstract_system(&pos(&[&["p"]])).unwrap();
        let system = u.system(&abs.system_id).unwrap();
        assert_eq!(system.object_count(), 1);
        assert_eq!(system.state_count(), 1);
    }

    #[test]
    fn labels_are_positional() {
        let (u, abs) = example1();
        let a1 = abs.object_for_column(0);
        assert_eq!(a1.label(), format!("a1@{}", abs.system_id.short()));
        let s = abs.state_map.state_of(&row(&["p1", "p2"])).unwrap();
        assert_eq!(
            u.state_label(s).unwrap(),
            format!("s1@{}", abs.system_id.short())
        );
    }

    #[test]
    fn empty_particulars_are_rejected() {
        assert!(matches!(
            Universe::new([]),
            Err(UniverseError::EmptyParticulars)
        ));
    }
}
