//! JSON and CSV interchange.
//!
//! Blueprint systems travel as `{"format":1, "values":[...], "rows":[[...]]}`
//! or as CSV with one comma-separated row per line. Serialization is
//! deterministic (sorted values, sorted rows), and parse → serialize →
//! parse is the identity on systems.
//!
//! Universe files are `{"format":1, "particulars":[...], "systems":[...]}`
//! with optional `"bounds":[m,r]`; the listed systems are row sets that are
//! re-abstracted on load, so a file cannot smuggle non-canonical state
//! into a universe.

use serde::Deserialize;
use serde_json::json;
use thiserror::Error;

use crate::abstraction::CanonicalMatrix;
use crate::system::{Atom, ParticularObjectSystem, Row, SystemError};
use crate::universe::{Abstraction, Bounds, Universe, UniverseError};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported format version {found} (this tool reads format {FORMAT_VERSION})")]
    UnsupportedFormat { found: u64 },
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Universe(#[from] UniverseError),
}

fn atoms_from(tokens: &[String]) -> Result<Vec<Atom>, IoError> {
    tokens.iter().map(|t| Ok(Atom::new(t.clone())?)).collect()
}

fn row_from(tokens: &[String]) -> Result<Row, IoError> {
    Ok(Row::new(atoms_from(tokens)?))
}

fn check_format(format: Option<u64>) -> Result<(), IoError> {
    match format {
        None | Some(FORMAT_VERSION) => Ok(()),
        Some(found) => Err(IoError::UnsupportedFormat { found }),
    }
}

#[derive(Deserialize)]
struct SystemFile {
    format: Option<u64>,
    values: Option<Vec<String>>,
    rows: Vec<Vec<String>>,
}

/// Parses a system from JSON. Returns the system and its declared value
/// set (the particulars the ambient universe should carry); without a
/// `values` field the atoms occurring in the rows serve as the values.
pub fn system_from_json(text: &str) -> Result<(ParticularObjectSystem, Vec<Atom>), IoError> {
    let file: SystemFile =
        serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?;
    check_format(file.format)?;
    let rows: Vec<Row> = file
        .rows
        .iter()
        .map(|r| row_from(r))
        .collect::<Result<_, _>>()?;
    let system = ParticularObjectSystem::new(rows)?;
    let values = match file.values {
        Some(tokens) => {
            let values = atoms_from(&tokens)?;
            for atom in system.atoms() {
                if !values.contains(&atom) {
                    return Err(IoError::Parse(format!(
                        "row value {atom} is not listed under \"values\""
                    )));
                }
            }
            values
        }
        None => system.atoms().into_iter().collect(),
    };
    Ok((system, values))
}

pub fn system_to_json(system: &ParticularObjectSystem, values: &[Atom]) -> serde_json::Value {
    let mut values: Vec<&str> = values.iter().map(Atom::as_str).collect();
    values.sort_unstable();
    json!({
        "format": FORMAT_VERSION,
        "values": values,
        "rows": system.rows().iter().collect::<Vec<_>>(),
    })
}

/// Parses a system from CSV: one row per line, comma-separated atoms.
/// Blank lines are skipped.
pub fn system_from_csv(text: &str) -> Result<(ParticularObjectSystem, Vec<Atom>), IoError> {
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let tokens: Vec<String> = line.split(',').map(|t| t.trim().to_string()).collect();
        rows.push(row_from(&tokens)?);
    }
    let system = ParticularObjectSystem::new(rows)?;
    let values = system.atoms().into_iter().collect();
    Ok((system, values))
}

pub fn system_to_csv(system: &ParticularObjectSystem) -> String {
    let mut out = String::new();
    for row in system.rows() {
        let tokens: Vec<&str> = row.entries().iter().map(Atom::as_str).collect();
        out.push_str(&tokens.join(","));
        out.push('\n');
    }
    out
}

/// Parses a system from either format, deciding by the first non-blank
/// character.
pub fn system_from_str(text: &str) -> Result<(ParticularObjectSystem, Vec<Atom>), IoError> {
    if text.trim_start().starts_with('{') {
        system_from_json(text)
    } else {
        system_from_csv(text)
    }
}

#[derive(Deserialize)]
struct UniverseFile {
    format: Option<u64>,
    particulars: Vec<String>,
    systems: Vec<Vec<Vec<String>>>,
    bounds: Option<(usize, usize)>,
}

/// Loads a universe: particulars, then every listed row set validated and
/// re-abstracted.
pub fn universe_from_json(text: &str) -> Result<Universe, IoError> {
    let file: UniverseFile =
        serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?;
    check_format(file.format)?;
    let bounds = file
        .bounds
        .map(|(m, r)| Bounds::new(m, r))
        .unwrap_or(Bounds::NONE);
    let mut universe = Universe::with_bounds(atoms_from(&file.particulars)?, bounds)?;
    for raw_rows in &file.systems {
        let rows: Vec<Row> = raw_rows
            .iter()
            .map(|r| row_from(r))
            .collect::<Result<_, _>>()?;
        let system = ParticularObjectSystem::new(rows)?;
        universe.abstract_system(&system)?;
    }
    Ok(universe)
}

/// Serializes a universe as particulars plus the canonical row sets of its
/// systems. Loading the result re-abstracts them to the same universe.
pub fn universe_to_json(u: &Universe) -> serde_json::Value {
    let systems: Vec<Vec<&Row>> = u
        .systems()
        .iter()
        .map(|s| s.matrix().rows().iter().collect())
        .collect();
    json!({
        "format": FORMAT_VERSION,
        "particulars": u.particulars().iter().collect::<Vec<_>>(),
        "systems": systems,
        "bounds": [u.bounds().max_objects, u.bounds().max_states],
    })
}

/// A canonical matrix with its column order: `column_order[j]` names the
/// source column that canonical column `j` came from (the identity when
/// the matrix stands alone).
pub fn canonical_matrix_to_json(
    matrix: &CanonicalMatrix,
    column_order: Option<Vec<usize>>,
) -> serde_json::Value {
    let order = column_order.unwrap_or_else(|| (0..matrix.width()).collect());
    json!({
        "rows": matrix.rows(),
        "column_order": order,
    })
}

/// The full result of abstracting a blueprint: the canonical system, the
/// state map, and the valuation table.
pub fn abstraction_to_json(u: &Universe, abstraction: &Abstraction) -> serde_json::Value {
    let system = u
        .system(&abstraction.system_id)
        .expect("abstraction registers its system");
    let matrix = system.matrix();

    // canonical column j came from the earliest source column mapping to it
    let mut column_order: Vec<usize> = vec![usize::MAX; matrix.width()];
    for (source, &canonical) in abstraction.column_map.iter().enumerate() {
        if column_order[canonical] == usize::MAX {
            column_order[canonical] = source;
        }
    }

    let state_map: Vec<serde_json::Value> = abstraction
        .state_map
        .iter()
        .map(|(source_row, state)| {
            json!({
                "row": source_row,
                "state": u.state_label(state),
            })
        })
        .collect();

    let objects: Vec<String> = (1..=system.object_count())
        .map(|c| format!("a{c}@{}", abstraction.system_id.short()))
        .collect();
    let states: Vec<serde_json::Value> = matrix
        .rows()
        .iter()
        .enumerate()
        .map(|(index, row)| {
            json!({
                "name": format!("s{}@{}", index + 1, abstraction.system_id.short()),
                "row": row,
            })
        })
        .collect();
    let mut entries: Vec<serde_json::Value> = Vec::new();
    for (column, object) in objects.iter().enumerate() {
        for (index, row) in matrix.rows().iter().enumerate() {
            entries.push(json!([
                object,
                format!("s{}@{}", index + 1, abstraction.system_id.short()),
                row.entries()[column],
            ]));
        }
    }

    json!({
        "format": FORMAT_VERSION,
        "system": {
            "canonical_id": abstraction.system_id.as_str(),
            "rows": matrix.rows(),
            "column_order": column_order,
            "object_count": system.object_count(),
            "state_count": system.state_count(),
        },
        "state_map": state_map,
        "val_table": {
            "objects": objects,
            "states": states,
            "entries": entries,
        },
    })
}
