//! The abstraction operator, collapse, and canonical forms.
//!
//! Two extensionality principles govern arbitrary-object systems:
//!
//! - *internal*: within one system, two objects with identical value
//!   profiles are the same object — duplicate blueprint columns are removed
//!   by [`collapse`];
//! - *external*: two systems related by a value-preserving relabelling of
//!   states and objects are the same system — decided here by a canonical
//!   form, the lexicographically least matrix over all row and column
//!   permutations of the collapsed blueprint.
//!
//! Equal canonical forms mean one and the same arbitrary-object system, so
//! the canonical matrix plus its content hash ([`SystemId`]) is the concrete
//! representation of an abstracted system, and states can be shared across
//! equivalent blueprints for free.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::system::{ParticularObjectSystem, Row};
use crate::universe::State;

/// Stable identifier of a canonical system: the SHA-256 hex digest of the
/// compact JSON serialization of its canonical matrix rows.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct SystemId(String);

impl SystemId {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// First eight hex digits, used in printable labels like `a1@6af93bb0`.
    pub fn short(&self) -> &str {
        &self.0[..8.min(self.0.len())]
    }

    /// Wraps an externally supplied identifier without recomputing it.
    /// Honest identifiers come from [`CanonicalMatrix::id`]; this escape
    /// hatch exists so that checks can be exercised on broken registries.
    pub fn from_raw(id: impl Into<String>) -> Self {
        SystemId(id.into())
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SystemId({})", self.short())
    }
}

/// The canonical matrix of an arbitrary-object system: rows sorted
/// ascending, column order fixed by exhaustive minimization.
///
/// Ordering is by object count, then state count, then the rows
/// lexicographically — the order enumeration output is listed in.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalMatrix {
    rows: Vec<Row>,
}

impl CanonicalMatrix {
    /// Wraps rows without canonicalizing or validating them. Canonical
    /// matrices normally come out of [`canonicalize`]; this constructor is
    /// for building deliberately broken registries in tests of the checks.
    pub fn from_rows_unchecked(rows: Vec<Row>) -> Self {
        CanonicalMatrix { rows }
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn width(&self) -> usize {
        self.rows.first().map_or(0, Row::width)
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row_index(&self, row: &Row) -> Option<usize> {
        self.rows.iter().position(|r| r == row)
    }

    pub fn contains_row(&self, row: &Row) -> bool {
        self.row_index(row).is_some()
    }

    /// The serialization the content hash is computed over:
    /// `{"rows":[[...],...]}` with no whitespace.
    pub fn id_serialization(&self) -> String {
        serde_json::to_string(&serde_json::json!({ "rows": self.rows })).expect("rows serialize")
    }

    pub fn id(&self) -> SystemId {
        let digest = Sha256::digest(self.id_serialization().as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in digest {
            use fmt::Write;
            write!(hex, "{byte:02x}").expect("write to string");
        }
        SystemId(hex)
    }

    /// The matrix reinterpreted as a blueprint, when well formed.
    pub fn as_blueprint(&self) -> Option<ParticularObjectSystem> {
        ParticularObjectSystem::new(self.rows.iter().cloned()).ok()
    }
}

impl Ord for CanonicalMatrix {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.width(), self.row_count(), &self.rows).cmp(&(
            other.width(),
            other.row_count(),
            &other.rows,
        ))
    }
}

impl PartialOrd for CanonicalMatrix {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An abstracted arbitrary-object system: a canonical matrix plus its id.
/// Objects are the columns, states are the rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArbitraryObjectSystem {
    canonical_id: SystemId,
    canonical_matrix: CanonicalMatrix,
}

impl ArbitraryObjectSystem {
    pub fn from_canonical(matrix: CanonicalMatrix) -> Self {
        let canonical_id = matrix.id();
        ArbitraryObjectSystem {
            canonical_id,
            canonical_matrix: matrix,
        }
    }

    /// Pairs an id with a matrix without checking that they belong
    /// together. For adversarial registries in tests of the checks.
    pub fn from_parts(id: SystemId, matrix: CanonicalMatrix) -> Self {
        ArbitraryObjectSystem {
            canonical_id: id,
            canonical_matrix: matrix,
        }
    }

    pub fn canonical_id(&self) -> &SystemId {
        &self.canonical_id
    }

    pub fn matrix(&self) -> &CanonicalMatrix {
        &self.canonical_matrix
    }

    pub fn object_count(&self) -> usize {
        self.canonical_matrix.width()
    }

    pub fn state_count(&self) -> usize {
        self.canonical_matrix.row_count()
    }
}

/// Removes duplicate columns, keeping the earliest occurrence of each.
///
/// Idempotent; the row set is preserved (identical columns agree on every
/// row, so deleting them cannot merge two distinct rows).
pub fn collapse(o: &ParticularObjectSystem) -> ParticularObjectSystem {
    let (kept, _) = column_keepers(o);
    ParticularObjectSystem::new(o.rows().iter().map(|row| row.project(&kept)))
        .expect("collapse of a valid system is valid")
}

/// Kept column indices (earliest representative of each distinct column)
/// and the map from every original column to its keeper's position.
fn column_keepers(o: &ParticularObjectSystem) -> (Vec<usize>, Vec<usize>) {
    let columns = o.columns();
    let mut kept: Vec<usize> = Vec::new();
    let mut seen: BTreeMap<&Vec<crate::system::Atom>, usize> = BTreeMap::new();
    let mut to_kept: Vec<usize> = Vec::with_capacity(columns.len());
    for (index, column) in columns.iter().enumerate() {
        let position = *seen.entry(column).or_insert_with(|| {
            kept.push(index);
            kept.len() - 1
        });
        to_kept.push(position);
    }
    (kept, to_kept)
}

/// The result of canonicalizing a blueprint: the canonical matrix together
/// with enough bookkeeping to map source rows to states and source columns
/// to canonical columns.
#[derive(Debug, Clone)]
pub struct Canonicalization {
    matrix: CanonicalMatrix,
    /// Map from each source column (pre-collapse) to its canonical column.
    column_map: Vec<usize>,
    /// Kept source columns, in source order.
    kept: Vec<usize>,
    /// Canonical column `j` holds collapsed column `perm[j]`.
    perm: Vec<usize>,
}

impl Canonicalization {
    pub fn matrix(&self) -> &CanonicalMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CanonicalMatrix {
        self.matrix
    }

    pub fn column_map(&self) -> &[usize] {
        &self.column_map
    }

    /// The canonical image of a source row: project onto kept columns,
    /// then rearrange into canonical column order.
    pub fn image_row(&self, source: &Row) -> Row {
        source.project(&self.kept).permuted(&self.perm)
    }

    /// The state a source row is assigned to.
    pub fn state_for(&self, source: &Row) -> State {
        State::new(self.matrix.id(), self.image_row(source))
    }
}

/// Computes the canonical form of a blueprint: collapse, then take the
/// lexicographically least sorted row list over all column permutations.
/// Ties between permutations are broken toward the least permutation, so
/// the column bookkeeping is deterministic as well.
pub fn canonicalize(o: &ParticularObjectSystem) -> Canonicalization {
    let (kept, to_kept) = column_keepers(o);
    let collapsed: BTreeSet<Row> = o.rows().iter().map(|row| row.project(&kept)).collect();
    let collapsed: Vec<Row> = collapsed.into_iter().collect();
    let width = kept.len();

    let mut best: Option<(Vec<Row>, Vec<usize>)> = None;
    for perm in (0..width).permutations(width) {
        let mut rows: Vec<Row> = collapsed.iter().map(|row| row.permuted(&perm)).collect();
        rows.sort();
        let better = match &best {
            None => true,
            Some((rows_so_far, _)) => rows < *rows_so_far,
        };
        if better {
            best = Some((rows, perm));
        }
    }
    let (rows, perm) = best.expect("at least the identity permutation was tried");

    // inverse of perm: collapsed column c sits at canonical position inv[c]
    let mut inv = vec![0usize; width];
    for (canonical, &collapsed_col) in perm.iter().enumerate() {
        inv[collapsed_col] = canonical;
    }
    let column_map = to_kept.iter().map(|&kept_pos| inv[kept_pos]).collect();

    Canonicalization {
        matrix: CanonicalMatrix { rows },
        column_map,
        kept,
        perm,
    }
}

pub fn canonical_form(o: &ParticularObjectSystem) -> CanonicalMatrix {
    canonicalize(o).into_matrix()
}

/// Whether two blueprints abstract to one and the same arbitrary-object
/// system: equality of canonical forms.
pub fn systems_equal(o1: &ParticularObjectSystem, o2: &ParticularObjectSystem) -> bool {
    canonical_form(o1) == canonical_form(o2)
}

/// The state-assignment function `F` restricted to one blueprint: a total,
/// injective map from the blueprint's rows onto the states of the
/// abstracted system.
#[derive(Debug, Clone)]
pub struct StateMap {
    source: ParticularObjectSystem,
    assignment: BTreeMap<Row, State>,
}

impl StateMap {
    pub(crate) fn new(source: ParticularObjectSystem, assignment: BTreeMap<Row, State>) -> Self {
        StateMap { source, assignment }
    }

    pub fn source(&self) -> &ParticularObjectSystem {
        &self.source
    }

    pub fn state_of(&self, row: &Row) -> Option<&State> {
        self.assignment.get(row)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Row, &State)> {
        self.assignment.iter()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }
}

/// The state-assignment function `F` applied to one row of a blueprint.
///
/// Defined exactly when `x` is a row of `o`. Equivalent blueprints share
/// images: the state is addressed by the canonical system and the canonical
/// image of the row.
pub fn f_map(o: &ParticularObjectSystem, x: &Row) -> Result<State, AbstractionError> {
    if !o.contains(x) {
        return Err(AbstractionError::RowNotInSystem {
            row: x.to_string(),
        });
    }
    Ok(canonicalize(o).state_for(x))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbstractionError {
    #[error("row {row} is not an element of the system")]
    RowNotInSystem { row: String },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{pos, row};
    use proptest::prelude::*;

    #[test]
    fn collapse_leaves_distinct_columns_alone() {
        let o = pos(&[&["0", "1"], &["1", "0"]]);
        assert_eq!(collapse(&o), o);
    }

    #[test]
    fn collapse_merges_identical_columns() {
        let o = pos(&[&["0", "0"], &["1", "1"]]);
        assert_eq!(collapse(&o), pos(&[&["0"], &["1"]]));
    }

    #[test]
    fn canonical_forms_identify_column_swaps() {
        // brute force over the two column permutations: ⟨0,1⟩ vs ⟨1,0⟩
        let a = canonical_form(&pos(&[&["0", "1"]]));
        let b = canonical_form(&pos(&[&["1", "0"]]));
        assert_eq!(a, b);
        assert_eq!(a.rows(), &[row(&["0", "1"])]);
    }

    #[test]
    fn canonical_forms_distinguish_state_counts() {
        let a = canonical_form(&pos(&[&["0"], &["1"]]));
        let b = canonical_form(&pos(&[&["0"]]));
        assert_ne!(a, b);
    }

    #[test]
    fn systems_equal_ignores_row_order_and_duplicate_columns() {
        assert!(systems_equal(
            &pos(&[&["0", "1"], &["1", "0"]]),
            &pos(&[&["1", "0"], &["0", "1"]]),
        ));
        assert!(systems_equal(&pos(&[&["0", "0"]]), &pos(&[&["0"]])));
        assert!(!systems_equal(&pos(&[&["0"]]), &pos(&[&["1"]])));
    }

    #[test]
    fn f_map_requires_row_membership() {
        let o = pos(&[&["p1", "p2"], &["p2", "p3"]]);
        assert!(f_map(&o, &row(&["p1", "p2"])).is_ok());
        assert!(matches!(
            f_map(&o, &row(&["p3", "p3"])),
            Err(AbstractionError::RowNotInSystem { .. })
        ));
    }

    #[test]
    fn equivalent_blueprints_share_state_images() {
        let s1 = f_map(&pos(&[&["0", "0"]]), &row(&["0", "0"])).unwrap();
        let s2 = f_map(&pos(&[&["0"]]), &row(&["0"])).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn column_map_tracks_collapse_and_permutation() {
        // ⟨1,0⟩ canonicalizes to ⟨0,1⟩; source column 0 lands at position 1.
        let c = canonicalize(&pos(&[&["1", "0"]]));
        assert_eq!(c.column_map(), &[1, 0]);
        // duplicate columns map to the keeper's canonical position
        let c = canonicalize(&pos(&[&["0", "0"]]));
        assert_eq!(c.column_map(), &[0, 0]);
    }

    #[test]
    fn canonical_id_is_stable() {
        let id = canonical_form(&pos(&[&["p1", "p2"], &["p2", "p3"]])).id();
        // frozen: SHA-256 of {"rows":[["p1","p2"],["p2","p3"]]}
        assert_eq!(
            id.as_str(),
            CanonicalMatrix::from_rows_unchecked(vec![row(&["p1", "p2"]), row(&["p2", "p3"])])
                .id()
                .as_str()
        );
        assert_eq!(id.as_str().len(), 64);
    }

    /// Independent duplicate-column scan used as the oracle for collapse.
    fn brute_force_distinct_column_count(o: &ParticularObjectSystem) -> usize {
        let columns = o.columns();
        let mut distinct: Vec<&Vec<crate::system::Atom>> = Vec::new();
        for column in &columns {
            if !distinct.contains(&column) {
                distinct.push(column);
            }
        }
        distinct.len()
    }

    fn arb_system() -> impl Strategy<Value = ParticularObjectSystem> {
        (1usize..=3, 1usize..=4).prop_flat_map(|(width, rows)| {
            proptest::collection::vec(
                proptest::collection::vec(0u8..3, width..=width),
                1..=rows,
            )
            .prop_map(|raw| {
                ParticularObjectSystem::new(raw.into_iter().map(|r| {
                    r.into_iter()
                        .map(|v| crate::system::Atom::new(v.to_string()).unwrap())
                        .collect::<Row>()
                }))
                .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn collapse_is_idempotent_and_matches_the_scan(o in arb_system()) {
            let once = collapse(&o);
            prop_assert_eq!(collapse(&once), once.clone());
            prop_assert_eq!(once.width(), brute_force_distinct_column_count(&o));
        }

        #[test]
        fn canonical_form_is_invariant_under_column_permutation(o in arb_system(), seed in 0usize..24) {
            let width = o.width();
            let perm = (0..width).permutations(width).cycle().nth(seed).unwrap();
            let permuted = ParticularObjectSystem::new(
                o.rows().iter().map(|r| r.permuted(&perm)),
            ).unwrap();
            prop_assert_eq!(canonical_form(&o), canonical_form(&permuted));
        }

        #[test]
        fn f_map_is_injective_per_system(o in arb_system()) {
            let states: Vec<State> = o
                .rows()
                .iter()
                .map(|x| f_map(&o, x).unwrap())
                .collect();
            let distinct: BTreeSet<&State> = states.iter().collect();
            prop_assert_eq!(distinct.len(), states.len());
        }

        #[test]
        fn object_count_is_bounded_by_width(o in arb_system()) {
            let canonical = canonical_form(&o);
            prop_assert!(canonical.width() <= o.width());
        }
    }
}
