//! Particular objects, rows, and the blueprint systems built from them.
//!
//! A [`ParticularObjectSystem`] is a finite nonempty set of equal-length
//! rows of atoms. It is the raw material from which an arbitrary-object
//! system is abstracted: columns turn into arbitrary objects, rows into
//! states.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// An opaque particular-object token.
///
/// Atoms have no internal structure; they are compared and totally ordered
/// by their token text alone. Tokens must be nonempty and must not contain
/// commas or line breaks (so the CSV interchange format stays unambiguous).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Atom(String);

impl Atom {
    pub fn new(token: impl Into<String>) -> Result<Self, SystemError> {
        let token = token.into();
        if token.is_empty() {
            return Err(SystemError::BadAtom {
                token,
                reason: "empty token",
            });
        }
        if token.contains(',') || token.contains('\n') || token.contains('\r') {
            return Err(SystemError::BadAtom {
                token,
                reason: "token contains a comma or line break",
            });
        }
        Ok(Atom(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One row of a blueprint: a finite tuple of atoms.
///
/// Rows are ordered lexicographically under the atom order; that order is
/// what canonical forms minimize over.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Row(Vec<Atom>);

impl Row {
    pub fn new(entries: Vec<Atom>) -> Self {
        Row(entries)
    }

    pub fn entries(&self) -> &[Atom] {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, index: usize) -> Option<&Atom> {
        self.0.get(index)
    }

    /// The row restricted to the given column indices, in the given order.
    pub(crate) fn project(&self, keep: &[usize]) -> Row {
        Row(keep.iter().map(|&c| self.0[c].clone()).collect())
    }

    /// The row rearranged so that entry `j` of the result is entry
    /// `perm[j]` of `self`.
    pub(crate) fn permuted(&self, perm: &[usize]) -> Row {
        Row(perm.iter().map(|&c| self.0[c].clone()).collect())
    }
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨")?;
        for (i, atom) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{atom}")?;
        }
        write!(f, "⟩")
    }
}

impl FromIterator<Atom> for Row {
    fn from_iter<T: IntoIterator<Item = Atom>>(iter: T) -> Self {
        Row(iter.into_iter().collect())
    }
}

/// A particular object system: a finite nonempty set of rows of uniform
/// width ≥ 1.
///
/// Ordinary construction ([`ParticularObjectSystem::new`]) admits duplicate
/// columns, which later disappear under [`collapse`](crate::collapse);
/// strict construction ([`ParticularObjectSystem::new_strict`]) rejects
/// them outright.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParticularObjectSystem {
    rows: BTreeSet<Row>,
    width: usize,
}

impl ParticularObjectSystem {
    pub fn new(rows: impl IntoIterator<Item = Row>) -> Result<Self, SystemError> {
        Self::build(rows, false)
    }

    /// Like [`new`](Self::new), but additionally rejects duplicate columns.
    pub fn new_strict(rows: impl IntoIterator<Item = Row>) -> Result<Self, SystemError> {
        Self::build(rows, true)
    }

    fn build(rows: impl IntoIterator<Item = Row>, strict: bool) -> Result<Self, SystemError> {
        let rows: BTreeSet<Row> = rows.into_iter().collect();
        let width = match rows.iter().next() {
            Some(first) => first.width(),
            None => return Err(SystemError::EmptySystem),
        };
        for row in &rows {
            if row.width() != width {
                return Err(SystemError::NonUniformWidth {
                    expected: width,
                    found: row.width(),
                });
            }
        }
        if width == 0 {
            return Err(SystemError::ZeroWidth);
        }
        let system = ParticularObjectSystem { rows, width };
        if strict {
            if let Some((first, second)) = system.duplicate_columns() {
                return Err(SystemError::DuplicateColumns { first, second });
            }
        }
        Ok(system)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> &BTreeSet<Row> {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn contains(&self, row: &Row) -> bool {
        self.rows.contains(row)
    }

    /// Column `index` read down the rows in their sorted order.
    pub fn column(&self, index: usize) -> Vec<Atom> {
        self.rows
            .iter()
            .map(|row| row.entries()[index].clone())
            .collect()
    }

    pub fn columns(&self) -> Vec<Vec<Atom>> {
        (0..self.width).map(|c| self.column(c)).collect()
    }

    /// All atoms occurring anywhere in the rows.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.rows
            .iter()
            .flat_map(|row| row.entries().iter().cloned())
            .collect()
    }

    /// The first pair of identical columns, if any.
    pub fn duplicate_columns(&self) -> Option<(usize, usize)> {
        let columns = self.columns();
        for second in 1..columns.len() {
            for first in 0..second {
                if columns[first] == columns[second] {
                    return Some((first, second));
                }
            }
        }
        None
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("a particular object system needs at least one row")]
    EmptySystem,
    #[error("rows have mixed widths: expected {expected}, found {found}")]
    NonUniformWidth { expected: usize, found: usize },
    #[error("rows must have width at least 1")]
    ZeroWidth,
    #[error("columns {first} and {second} are identical")]
    DuplicateColumns { first: usize, second: usize },
    #[error("invalid atom token {token:?}: {reason}")]
    BadAtom { token: String, reason: &'static str },
}

#[cfg(test)]
pub(crate) fn atoms(tokens: &[&str]) -> Vec<Atom> {
    tokens.iter().map(|t| Atom::new(*t).unwrap()).collect()
}

#[cfg(test)]
pub(crate) fn row(tokens: &[&str]) -> Row {
    Row::new(atoms(tokens))
}

#[cfg(test)]
pub(crate) fn pos(rows: &[&[&str]]) -> ParticularObjectSystem {
    ParticularObjectSystem::new(rows.iter().map(|r| row(r))).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_system_is_valid_with_width_two() {
        let o = ParticularObjectSystem::new([row(&["p1", "p2"]), row(&["p2", "p3"])]).unwrap();
        assert_eq!(o.width(), 2);
        assert_eq!(o.row_count(), 2);
    }

    #[test]
    fn empty_row_set_is_rejected() {
        assert_eq!(
            ParticularObjectSystem::new([]).unwrap_err(),
            SystemError::EmptySystem
        );
    }

    #[test]
    fn mixed_widths_are_rejected() {
        let err = ParticularObjectSystem::new([row(&["0", "1"]), row(&["1"])]).unwrap_err();
        assert!(matches!(err, SystemError::NonUniformWidth { .. }));
    }

    #[test]
    fn zero_width_rows_are_rejected() {
        assert_eq!(
            ParticularObjectSystem::new([Row::new(vec![])]).unwrap_err(),
            SystemError::ZeroWidth
        );
    }

    #[test]
    fn strict_mode_rejects_duplicate_columns() {
        let err =
            ParticularObjectSystem::new_strict([row(&["0", "0"]), row(&["1", "1"])]).unwrap_err();
        assert_eq!(err, SystemError::DuplicateColumns { first: 0, second: 1 });
        // the same rows are fine in ordinary mode
        ParticularObjectSystem::new([row(&["0", "0"]), row(&["1", "1"])]).unwrap();
    }

    #[test]
    fn duplicate_rows_collapse_into_the_set() {
        let o = ParticularObjectSystem::new([row(&["0"]), row(&["0"])]).unwrap();
        assert_eq!(o.row_count(), 1);
    }

    #[test]
    fn atom_tokens_are_validated() {
        assert!(Atom::new("p1").is_ok());
        assert!(Atom::new("").is_err());
        assert!(Atom::new("a,b").is_err());
        assert!(Atom::new("a\nb").is_err());
    }

    #[test]
    fn columns_read_down_sorted_rows() {
        let o = pos(&[&["p2", "p3"], &["p1", "p2"]]);
        assert_eq!(o.column(0), atoms(&["p1", "p2"]));
        assert_eq!(o.column(1), atoms(&["p2", "p3"]));
    }
}
