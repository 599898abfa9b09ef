//! Demonstrator for the failure of generic attribution.
//!
//! Generic attribution ties a predicate of "the arbitrary G" to the
//! predicate holding of every G: `φ(a_G) ⇔ ∀i: G(i) → φ(i)`. In a typed
//! setting the left side cannot even be written: substituting an
//! arbitrary-sort term into a particular-sort formula is a sort error.
//! What *can* be said — "the object's value satisfies φ in every state"
//! and "every value in the object's range satisfies φ" — are two readings
//! of the same fact, and they always agree. This module evaluates both
//! surrogates per object and reports the sort error of the naive
//! substitution.

use serde::Serialize;
use thiserror::Error;

use crate::abstraction::SystemId;
use crate::universe::{ArbitraryObject, State, Universe};

use super::eval::{eval, resolve_constant, Element, Env, EvalError};
use super::{well_sorted, Formula, Sort, Term};

#[derive(Debug, Clone, Serialize)]
pub struct PgaObjectReport {
    pub object: String,
    /// "In every state, the object's value satisfies φ."
    pub holds_in_every_state: bool,
    /// "Every particular in the object's value range satisfies φ."
    pub holds_of_value_range: bool,
    pub surrogates_agree: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PgaReport {
    pub phi: String,
    pub free_variable: String,
    /// The sort error produced by substituting an arbitrary object into φ.
    pub naive_substitution_error: String,
    pub objects: Vec<PgaObjectReport>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PgaError {
    #[error("φ must have exactly one free particular variable, found: {found}")]
    NotAParticularPredicate { found: String },
    #[error("no registered system with id {0}")]
    UnknownSystem(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Evaluates the two meaningful surrogates of generic attribution for each
/// object of a system, and demonstrates that the naive reading is a sort
/// error.
pub fn check_pga(
    u: &Universe,
    system: &SystemId,
    phi: &Formula,
) -> Result<PgaReport, PgaError> {
    let system = u
        .system(system)
        .ok_or_else(|| PgaError::UnknownSystem(system.to_string()))?;

    // the free variable: the one free name that is not a universe element
    let variables: Vec<(String, Sort)> = phi
        .free_terms()
        .into_iter()
        .filter(|(name, sort)| resolve_constant(u, name, *sort).is_none())
        .collect();
    let (variable, sort) = match variables.as_slice() {
        [only] => only.clone(),
        _ => {
            return Err(PgaError::NotAParticularPredicate {
                found: format!(
                    "{} free variables ({})",
                    variables.len(),
                    variables
                        .iter()
                        .map(|(n, _)| n.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            })
        }
    };
    if sort != Sort::Particular {
        return Err(PgaError::NotAParticularPredicate {
            found: format!("`{variable}` of sort {sort}"),
        });
    }

    let id = system.canonical_id().clone();
    let mut objects = Vec::new();
    for column in 1..=system.object_count() {
        let object = ArbitraryObject::new(id.clone(), column);

        let mut in_every_state = true;
        for row in system.matrix().rows() {
            let state = State::new(id.clone(), row.clone());
            let value = u
                .val(&object, &state)
                .expect("objects and states of a registered system")
                .expect("values are total within one system");
            let env: Env = [(variable.clone(), Element::Particular(value))].into();
            if !eval(u, phi, &env)? {
                in_every_state = false;
                break;
            }
        }

        let mut of_value_range = true;
        for value in u
            .value_range(&object)
            .expect("object of a registered system")
        {
            let env: Env = [(variable.clone(), Element::Particular(value))].into();
            if !eval(u, phi, &env)? {
                of_value_range = false;
                break;
            }
        }

        objects.push(PgaObjectReport {
            object: object.label(),
            holds_in_every_state: in_every_state,
            holds_of_value_range: of_value_range,
            surrogates_agree: in_every_state == of_value_range,
        });
    }

    // the naive reading: φ(a) with the object itself plugged in. Typed
    // substitution rejects it before a formula even comes into being.
    let first_object = ArbitraryObject::new(id.clone(), 1);
    let naive_substitution_error = match phi.substitute_free(
        &variable,
        &Term::new(first_object.label(), Sort::Arbitrary),
    ) {
        Err(substitution_error) => substitution_error,
        Ok(substituted) => well_sorted(&substituted)
            .expect_err("an arbitrary-sort term in a particular position cannot be well-sorted"),
    };

    Ok(PgaReport {
        phi: phi.to_string(),
        free_variable: variable,
        naive_substitution_error,
        objects,
    })
}
