//! Machine checks of the governing axioms and derived laws against a
//! finite universe.
//!
//! Every check is pure and deterministic over its inputs and returns a
//! [`CheckReport`]: a verdict plus, on failure, a structured witness naming
//! the systems, objects, states, or rows involved. The honest construction
//! path (validating blueprints, abstracting through a universe) satisfies
//! every check by design; the checks earn their keep on registries built
//! through the raw escape hatches.
//!
//! Comprehension is relativized: a universe's declared bounds state which
//! systems it claims to contain abstractions for. Vacuous bounds `(0, 0)`
//! make the existence half of the abstraction check trivially true.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::abstraction::{canonical_form, canonicalize, collapse, CanonicalMatrix, SystemId};
use crate::enumerate::{self, enumerate_systems, EnumerateOptions};
use crate::system::{ParticularObjectSystem, Row};
use crate::universe::{ArbitraryObject, Bounds, State, Universe};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// A structured counterexample. Only the populated fields are serialized.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub systems: Vec<SystemId>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub objects: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<Row>,
    pub detail: String,
}

impl Witness {
    pub fn detail(detail: impl Into<String>) -> Self {
        Witness {
            detail: detail.into(),
            ..Default::default()
        }
    }

    pub fn with_systems(mut self, systems: impl IntoIterator<Item = SystemId>) -> Self {
        self.systems.extend(systems);
        self
    }

    pub fn with_objects(mut self, objects: impl IntoIterator<Item = String>) -> Self {
        self.objects.extend(objects);
        self
    }

    pub fn with_states(mut self, states: impl IntoIterator<Item = String>) -> Self {
        self.states.extend(states);
        self
    }

    pub fn with_rows(mut self, rows: impl IntoIterator<Item = Row>) -> Self {
        self.rows.extend(rows);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check_name: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds_used: Option<Bounds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    fn pass(name: &str) -> Self {
        CheckReport {
            check_name: name.to_string(),
            verdict: Verdict::Pass,
            witness: None,
            bounds_used: None,
            note: None,
        }
    }

    fn fail(name: &str, witness: Witness) -> Self {
        CheckReport {
            check_name: name.to_string(),
            verdict: Verdict::Fail,
            witness: Some(witness),
            bounds_used: None,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn with_bounds(mut self, bounds: Bounds) -> Self {
        self.bounds_used = Some(bounds);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("the max-states check needs m ≥ 1")]
    ZeroObjects,
    #[error("n^m = {cells} rows is past the brute-force limit of {limit}")]
    InfeasibleBounds { cells: u128, limit: u128 },
    #[error("the two universes have different particulars")]
    ParticularsMismatch,
}

fn object_label(id: &SystemId, column: usize) -> String {
    ArbitraryObject::new(id.clone(), column).label()
}

fn state_text(id: &SystemId, row: &Row) -> String {
    State::new(id.clone(), row.clone()).to_string()
}

/// One report per axiom, in the order the axioms govern the model:
/// nonempty particulars, sort disjointness, partial functionality of the
/// valuation, finiteness of state spaces, the state-assignment function,
/// abstraction (uniqueness, the valuation clauses, and relativized
/// comprehension), closure, internal extensionality, and external
/// extensionality.
pub fn check_axioms(u: &Universe) -> Vec<CheckReport> {
    vec![
        check_particulars_nonempty(u),
        check_sort_disjointness(u),
        check_valuation_partial_function(u),
        check_finite_state_spaces(u),
        check_state_assignment(u),
        check_abstraction_comprehension(u),
        check_closure(u),
        check_internal_extensionality(u),
        check_external_extensionality(u),
    ]
}

/// Axiom checks plus the two lemma-level checks that apply to a single
/// universe.
pub fn run_standard_checks(u: &Universe) -> Vec<CheckReport> {
    let mut reports = check_axioms(u);
    reports.push(check_lemma_isolation(u));
    reports.push(check_identity_criterion(u));
    reports
}

fn check_particulars_nonempty(u: &Universe) -> CheckReport {
    let name = "particulars_nonempty";
    if u.particulars().is_empty() {
        CheckReport::fail(name, Witness::detail("the particulars set is empty"))
    } else {
        CheckReport::pass(name)
    }
}

fn check_sort_disjointness(u: &Universe) -> CheckReport {
    let name = "sort_disjointness";
    let particulars: BTreeSet<String> = u
        .particulars()
        .iter()
        .map(|a| a.as_str().to_string())
        .collect();
    let objects: BTreeSet<String> = u.objects().map(|a| a.label()).collect();
    let states: BTreeSet<String> = u
        .states()
        .filter_map(|s| u.state_label(&s))
        .collect();
    for (left, right, what) in [
        (&particulars, &objects, "particular/object"),
        (&particulars, &states, "particular/state"),
        (&objects, &states, "object/state"),
    ] {
        if let Some(shared) = left.intersection(right).next() {
            return CheckReport::fail(
                name,
                Witness::detail(format!(
                    "identifier {shared:?} occurs in two sorts ({what})"
                )),
            );
        }
    }
    CheckReport::pass(name).with_note(
        "the three sorts are distinct types; their printable identifier spaces are disjoint too",
    )
}

fn check_valuation_partial_function(u: &Universe) -> CheckReport {
    let name = "valuation_partial_function";
    let objects: Vec<ArbitraryObject> = u.objects().collect();
    let states: Vec<State> = u.states().collect();
    for a in &objects {
        for s in &states {
            match u.val(a, s) {
                Ok(value) => {
                    let same_system = a.system_id() == s.system_id();
                    if value.is_some() != same_system {
                        return CheckReport::fail(
                            name,
                            Witness::detail("valuation defined outside its system")
                                .with_objects([a.label()])
                                .with_states([s.to_string()]),
                        );
                    }
                }
                Err(err) => {
                    return CheckReport::fail(
                        name,
                        Witness::detail(format!(
                            "valuation not evaluable on a registered pair: {err}"
                        ))
                        .with_objects([a.label()])
                        .with_states([s.to_string()]),
                    );
                }
            }
        }
    }
    CheckReport::pass(name).with_note(format!(
        "at most one value at each of {} object-state pairs",
        objects.len() * states.len()
    ))
}

fn check_finite_state_spaces(u: &Universe) -> CheckReport {
    let states = u.states().count();
    CheckReport::pass("finite_state_spaces").with_note(format!(
        "trivially satisfied in a finite universe ({states} states in total)"
    ))
}

fn check_state_assignment(u: &Universe) -> CheckReport {
    let name = "state_assignment_function";
    for system in u.systems() {
        let id = system.canonical_id();
        let rows = system.matrix().rows();
        if rows.is_empty() {
            return CheckReport::fail(
                name,
                Witness::detail("registered system has no states")
                    .with_systems([id.clone()]),
            );
        }
        let width = rows[0].width();
        if width == 0 || rows.iter().any(|r| r.width() != width) {
            return CheckReport::fail(
                name,
                Witness::detail("registered matrix is not of uniform positive width")
                    .with_systems([id.clone()]),
            );
        }
        let distinct: BTreeSet<&Row> = rows.iter().collect();
        if distinct.len() != rows.len() {
            return CheckReport::fail(
                name,
                Witness::detail("state assignment is not injective: duplicate rows")
                    .with_systems([id.clone()]),
            );
        }
    }
    CheckReport::pass(name)
        .with_note("per system, rows map one-to-one onto states and every state is hit")
}

fn well_formed(matrix: &CanonicalMatrix) -> Option<ParticularObjectSystem> {
    matrix.as_blueprint()
}

fn check_abstraction_comprehension(u: &Universe) -> CheckReport {
    let name = "abstraction";

    // uniqueness and state isolation between entries sharing an id
    let systems = u.systems();
    for i in 0..systems.len() {
        for j in i + 1..systems.len() {
            let (a, b) = (&systems[i], &systems[j]);
            if a.canonical_id() != b.canonical_id() {
                continue;
            }
            if a.matrix() == b.matrix() {
                return CheckReport::fail(
                    name,
                    Witness::detail("one system is registered twice")
                        .with_systems([a.canonical_id().clone()]),
                );
            }
            let shared: Vec<Row> = a
                .matrix()
                .rows()
                .iter()
                .filter(|r| b.matrix().contains_row(r))
                .cloned()
                .collect();
            if let Some(row) = shared.first() {
                return CheckReport::fail(
                    name,
                    Witness::detail(
                        "a state is shared between two distinct systems, so objects outside \
                         one system take values in its states",
                    )
                    .with_systems([a.canonical_id().clone()])
                    .with_states([state_text(a.canonical_id(), row)])
                    .with_rows([row.clone()]),
                );
            }
            return CheckReport::fail(
                name,
                Witness::detail("two distinct systems share an id")
                    .with_systems([a.canonical_id().clone()]),
            );
        }
    }

    // determinism: each registered matrix must be its own canonical form,
    // under the id its content hashes to
    for system in u.systems() {
        let id = system.canonical_id();
        let Some(blueprint) = well_formed(system.matrix()) else {
            return CheckReport::fail(
                name,
                Witness::detail("registered matrix is malformed").with_systems([id.clone()]),
            );
        };
        if &canonical_form(&blueprint) != system.matrix() {
            return CheckReport::fail(
                name,
                Witness::detail("registered matrix is not in canonical form")
                    .with_systems([id.clone()]),
            );
        }
        if &system.matrix().id() != id {
            return CheckReport::fail(
                name,
                Witness::detail("registered id does not match the matrix content hash")
                    .with_systems([id.clone()]),
            );
        }
    }

    // relativized comprehension: within the declared bounds, every system
    // has its abstraction registered
    let bounds = u.bounds();
    if bounds.is_vacuous() {
        return CheckReport::pass(name)
            .with_bounds(bounds)
            .with_note("comprehension is vacuous at bounds (0, 0)");
    }
    let within = match enumerate_systems(
        u.particulars(),
        bounds.max_objects,
        bounds.max_states,
        &EnumerateOptions::default(),
    ) {
        Ok(found) => found,
        Err(err) => {
            return CheckReport::fail(
                name,
                Witness::detail(format!(
                    "cannot verify comprehension at the declared bounds: {err}"
                )),
            )
            .with_bounds(bounds);
        }
    };
    let registered: BTreeSet<&SystemId> = u.systems().iter().map(|s| s.canonical_id()).collect();
    for matrix in &within {
        let id = matrix.id();
        if !registered.contains(&id) {
            return CheckReport::fail(
                name,
                Witness::detail("a system within bounds has no registered abstraction")
                    .with_systems([id])
                    .with_rows(matrix.rows().iter().cloned()),
            )
            .with_bounds(bounds);
        }
    }
    CheckReport::pass(name)
        .with_bounds(bounds)
        .with_note(format!(
            "all {} systems within bounds are registered",
            within.len()
        ))
}

fn check_closure(u: &Universe) -> CheckReport {
    let name = "closure";
    for system in u.systems() {
        if well_formed(system.matrix()).is_none() {
            return CheckReport::fail(
                name,
                Witness::detail("objects of a malformed system have no abstracting blueprint")
                    .with_systems([system.canonical_id().clone()]),
            );
        }
    }
    CheckReport::pass(name)
        .with_note("every object is a column of a registered system's blueprint")
}

fn check_internal_extensionality(u: &Universe) -> CheckReport {
    let name = "internal_extensionality";
    for system in u.systems() {
        let Some(blueprint) = well_formed(system.matrix()) else {
            continue; // malformed matrices are reported by other checks
        };
        if let Some((first, second)) = blueprint.duplicate_columns() {
            let id = system.canonical_id();
            return CheckReport::fail(
                name,
                Witness::detail("two objects of one system have identical value profiles")
                    .with_systems([id.clone()])
                    .with_objects([object_label(id, first + 1), object_label(id, second + 1)]),
            );
        }
    }
    CheckReport::pass(name)
}

fn check_external_extensionality(u: &Universe) -> CheckReport {
    let name = "external_extensionality";
    let systems = u.systems();
    for i in 0..systems.len() {
        for j in i + 1..systems.len() {
            let (a, b) = (&systems[i], &systems[j]);
            if a.canonical_id() == b.canonical_id() && a.matrix() == b.matrix() {
                continue; // the same system listed twice; flagged by the abstraction check
            }
            let (Some(oa), Some(ob)) = (well_formed(a.matrix()), well_formed(b.matrix())) else {
                continue;
            };
            if canonical_form(&oa) == canonical_form(&ob) {
                return CheckReport::fail(
                    name,
                    Witness::detail(
                        "two distinct registered systems are related by a value-preserving \
                         relabelling and should be one",
                    )
                    .with_systems([a.canonical_id().clone(), b.canonical_id().clone()]),
                );
            }
        }
    }
    CheckReport::pass(name)
}

/// For every pair of registered systems: state spaces disjoint, or the
/// systems are one and the same.
pub fn check_lemma_isolation(u: &Universe) -> CheckReport {
    let name = "state_isolation";
    let systems = u.systems();
    for i in 0..systems.len() {
        for j in i + 1..systems.len() {
            let (a, b) = (&systems[i], &systems[j]);
            if a.canonical_id() != b.canonical_id() {
                continue; // states carry the system id, so spaces are disjoint
            }
            if a.matrix() == b.matrix() {
                continue; // identical systems
            }
            if let Some(row) = a
                .matrix()
                .rows()
                .iter()
                .find(|r| b.matrix().contains_row(r))
            {
                return CheckReport::fail(
                    name,
                    Witness::detail("two distinct systems share a state")
                        .with_systems([a.canonical_id().clone()])
                        .with_states([state_text(a.canonical_id(), row)])
                        .with_rows([row.clone()]),
                );
            }
        }
    }
    CheckReport::pass(name)
}

/// Exhaustive pairwise profile comparison: two objects are identical
/// exactly when their value profiles coincide, profiles being read through
/// the canonical identification of systems.
pub fn check_identity_criterion(u: &Universe) -> CheckReport {
    let name = "identity_criterion";
    type ProfileKey = (CanonicalMatrix, usize);
    type ObjectRef = (SystemId, usize);
    let mut by_ref: BTreeMap<ObjectRef, BTreeSet<ProfileKey>> = BTreeMap::new();
    let mut by_key: BTreeMap<ProfileKey, BTreeSet<ObjectRef>> = BTreeMap::new();

    for system in u.systems() {
        let Some(blueprint) = well_formed(system.matrix()) else {
            continue;
        };
        let canonicalization = canonicalize(&blueprint);
        for column in 1..=system.object_count() {
            let object: ObjectRef = (system.canonical_id().clone(), column);
            let key: ProfileKey = (
                canonicalization.matrix().clone(),
                canonicalization.column_map()[column - 1],
            );
            by_ref.entry(object.clone()).or_default().insert(key.clone());
            by_key.entry(key).or_default().insert(object);
        }
    }

    for (object, keys) in &by_ref {
        if keys.len() > 1 {
            return CheckReport::fail(
                name,
                Witness::detail("one object carries two different value profiles")
                    .with_objects([object_label(&object.0, object.1)]),
            );
        }
    }
    for refs in by_key.values() {
        if refs.len() > 1 {
            let labels: Vec<String> = refs
                .iter()
                .map(|(id, column)| object_label(id, *column))
                .collect();
            return CheckReport::fail(
                name,
                Witness::detail("distinct objects share one value profile").with_objects(labels),
            );
        }
    }
    CheckReport::pass(name).with_note(format!(
        "profiles compared across {} objects",
        by_ref.len()
    ))
}

/// The two readings of blueprint identity: canonical-form equality (state
/// and column relabelling allowed) versus literal equality of collapses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CollapseReadings {
    pub canonical_equal: bool,
    pub literal_equal: bool,
}

impl CollapseReadings {
    pub fn diverge(&self) -> bool {
        self.canonical_equal != self.literal_equal
    }
}

pub fn collapse_readings(
    o1: &ParticularObjectSystem,
    o2: &ParticularObjectSystem,
) -> CollapseReadings {
    CollapseReadings {
        canonical_equal: canonical_form(&collapse(o1)) == canonical_form(&collapse(o2)),
        literal_equal: collapse(o1) == collapse(o2),
    }
}

/// Verifies that blueprint identity agrees with canonical-form equality of
/// the collapses, and documents whether the literal collapse-equality
/// reading agrees or diverges on this pair.
pub fn check_collapse_lemma(
    o1: &ParticularObjectSystem,
    o2: &ParticularObjectSystem,
) -> CheckReport {
    let name = "collapse_lemma";
    let readings = collapse_readings(o1, o2);
    let equal = crate::abstraction::systems_equal(o1, o2);
    let report = if equal == readings.canonical_equal {
        CheckReport::pass(name)
    } else {
        CheckReport::fail(
            name,
            Witness::detail("system identity disagrees with canonical collapse equality"),
        )
    };
    let agreement = if readings.diverge() {
        format!(
            "literal collapse equality diverges: canonical {} vs literal {}",
            readings.canonical_equal, readings.literal_equal
        )
    } else {
        "literal collapse equality agrees".to_string()
    };
    report.with_note(agreement)
}

const MAX_STATES_CELL_LIMIT: u128 = 16;

/// Brute-force check that the largest system with exactly `m` objects over
/// the universe's particulars has `n^m` states: enumerate every row subset
/// of width `m`, keep the column-distinct ones, and take the maximum.
pub fn check_max_states(u: &Universe, m: usize) -> Result<CheckReport, VerifyError> {
    let name = "max_states";
    if m == 0 {
        return Err(VerifyError::ZeroObjects);
    }
    let n = u.particulars().len();
    let cells: u128 = (1..=m).fold(1u128, |acc, _| acc.saturating_mul(n as u128));
    if cells > MAX_STATES_CELL_LIMIT {
        return Err(VerifyError::InfeasibleBounds {
            cells,
            limit: MAX_STATES_CELL_LIMIT,
        });
    }
    let atoms: Vec<_> = u.particulars().iter().cloned().collect();
    let rows = enumerate::all_rows(&atoms, m);
    let mut max_rows: usize = 0;
    for mask in 1u32..(1u32 << rows.len()) {
        let subset: Vec<&Row> = rows
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, r)| r)
            .collect();
        if enumerate::columns_distinct(&subset, m) {
            max_rows = max_rows.max(subset.len());
        }
    }
    let expected = cells as usize;
    let bounds = Bounds::new(m, expected);
    let report = if max_rows == expected {
        CheckReport::pass(name).with_note(format!(
            "maximum of {max_rows} states over systems with exactly {m} objects"
        ))
    } else {
        CheckReport::fail(
            name,
            Witness::detail(format!(
                "expected a maximum of {expected} states, found {max_rows}"
            )),
        )
    };
    Ok(report.with_bounds(bounds))
}

/// Two universes over the same particulars agree on their families of
/// finite systems exactly when their canonical-id sets are equal.
pub fn check_categoricity(u1: &Universe, u2: &Universe) -> Result<CheckReport, VerifyError> {
    let name = "limited_categoricity";
    if u1.particulars() != u2.particulars() {
        return Err(VerifyError::ParticularsMismatch);
    }
    let ids1: BTreeSet<&SystemId> = u1.systems().iter().map(|s| s.canonical_id()).collect();
    let ids2: BTreeSet<&SystemId> = u2.systems().iter().map(|s| s.canonical_id()).collect();
    if ids1 == ids2 {
        return Ok(CheckReport::pass(name)
            .with_note(format!("both universes register {} systems", ids1.len())));
    }
    let extra: Vec<SystemId> = ids1
        .symmetric_difference(&ids2)
        .map(|id| (*id).clone())
        .collect();
    Ok(CheckReport::fail(
        name,
        Witness::detail("the universes register different system families").with_systems(extra),
    ))
}
