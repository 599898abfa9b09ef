//! The three-sorted first-order language of valuation: abstract syntax,
//! concrete syntax, and evaluation over finite universes.
//!
//! Sorts are particular (`P`), arbitrary (`A`), and state (`S`). Atoms are
//! `Val(a,s,p)`, same-sort equality `x = y`, and the sort predicates
//! `P(x)`, `A(x)`, `S(x)`. Connectives bind in the order
//! `¬ > ∧ > ∨ > → > ↔` with `→` right-associative; sorted quantifiers are
//! written `forall x:A.` and `exists y:S.` and their body extends as far
//! right as possible.
//!
//! The printer emits a canonical rendering (Unicode connectives, minimal
//! parentheses); parsing a printed formula returns the identical tree, and
//! printing it again returns the identical text.

mod eval;
mod parser;
mod pga;

pub use eval::{eval, find_counterexample, Element, Env, EvalError};
pub use parser::{parse, ParseError};
pub use pga::{check_pga, PgaError, PgaObjectReport, PgaReport};

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Sort {
    Particular,
    Arbitrary,
    State,
}

impl Sort {
    pub fn letter(&self) -> char {
        match self {
            Sort::Particular => 'P',
            Sort::Arbitrary => 'A',
            Sort::State => 'S',
        }
    }

    pub fn from_letter(c: char) -> Option<Sort> {
        match c {
            'P' => Some(Sort::Particular),
            'A' => Some(Sort::Arbitrary),
            'S' => Some(Sort::State),
            _ => None,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A term with its resolved sort. Whether the name denotes a variable or a
/// constant is settled at evaluation time: bound names and environment
/// entries are variables, anything else must name a universe element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub name: String,
    pub sort: Sort,
}

impl Term {
    pub fn new(name: impl Into<String>, sort: Sort) -> Self {
        Term {
            name: name.into(),
            sort,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    /// `Val(a, s, p)`: the value of `a` in state `s` is `p`.
    Val(Term, Term, Term),
    /// Same-sort equality.
    Eq(Term, Term),
    /// Sort membership: `P(t)`, `A(t)`, `S(t)`. The argument may be of any
    /// sort; the atom is simply false on a sort mismatch.
    IsSort(Sort, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(String, Sort, Box<Formula>),
    Exists(String, Sort, Box<Formula>),
}

impl Formula {
    /// Free term occurrences (name, sort): every term whose name no
    /// enclosing quantifier binds. Constants are included; separating them
    /// from variables needs a universe.
    pub fn free_terms(&self) -> BTreeSet<(String, Sort)> {
        let mut free = BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut free);
        free
    }

    /// Replaces free occurrences of `name` by the given term. Substitution
    /// in a sorted language is sort-preserving: replacing an occurrence of
    /// one sort by a term of another is a sort error.
    pub fn substitute_free(&self, name: &str, replacement: &Term) -> Result<Formula, String> {
        for (free_name, sort) in self.free_terms() {
            if free_name == name && sort != replacement.sort {
                return Err(format!(
                    "cannot substitute `{}` of sort {} for `{name}` of sort {sort}",
                    replacement.name, replacement.sort
                ));
            }
        }
        Ok(self.substitute_unchecked(name, replacement))
    }

    fn substitute_unchecked(&self, name: &str, replacement: &Term) -> Formula {
        let subst = |t: &Term| -> Term {
            if t.name == name {
                replacement.clone()
            } else {
                t.clone()
            }
        };
        match self {
            Formula::Val(a, s, p) => Formula::Val(subst(a), subst(s), subst(p)),
            Formula::Eq(l, r) => Formula::Eq(subst(l), subst(r)),
            Formula::IsSort(sort, t) => Formula::IsSort(*sort, subst(t)),
            Formula::Not(inner) => {
                Formula::Not(Box::new(inner.substitute_unchecked(name, replacement)))
            }
            Formula::And(l, r) => Formula::And(
                Box::new(l.substitute_unchecked(name, replacement)),
                Box::new(r.substitute_unchecked(name, replacement)),
            ),
            Formula::Or(l, r) => Formula::Or(
                Box::new(l.substitute_unchecked(name, replacement)),
                Box::new(r.substitute_unchecked(name, replacement)),
            ),
            Formula::Implies(l, r) => Formula::Implies(
                Box::new(l.substitute_unchecked(name, replacement)),
                Box::new(r.substitute_unchecked(name, replacement)),
            ),
            Formula::Iff(l, r) => Formula::Iff(
                Box::new(l.substitute_unchecked(name, replacement)),
                Box::new(r.substitute_unchecked(name, replacement)),
            ),
            Formula::Forall(v, sort, body) if v != name => Formula::Forall(
                v.clone(),
                *sort,
                Box::new(body.substitute_unchecked(name, replacement)),
            ),
            Formula::Exists(v, sort, body) if v != name => Formula::Exists(
                v.clone(),
                *sort,
                Box::new(body.substitute_unchecked(name, replacement)),
            ),
            shadowing => shadowing.clone(),
        }
    }
}

fn collect_free(f: &Formula, bound: &mut Vec<String>, free: &mut BTreeSet<(String, Sort)>) {
    let term = |t: &Term, bound: &Vec<String>, free: &mut BTreeSet<(String, Sort)>| {
        if !bound.iter().any(|b| b == &t.name) {
            free.insert((t.name.clone(), t.sort));
        }
    };
    match f {
        Formula::Val(a, s, p) => {
            term(a, bound, free);
            term(s, bound, free);
            term(p, bound, free);
        }
        Formula::Eq(l, r) => {
            term(l, bound, free);
            term(r, bound, free);
        }
        Formula::IsSort(_, t) => term(t, bound, free),
        Formula::Not(inner) => collect_free(inner, bound, free),
        Formula::And(l, r)
        | Formula::Or(l, r)
        | Formula::Implies(l, r)
        | Formula::Iff(l, r) => {
            collect_free(l, bound, free);
            collect_free(r, bound, free);
        }
        Formula::Forall(v, _, body) | Formula::Exists(v, _, body) => {
            bound.push(v.clone());
            collect_free(body, bound, free);
            bound.pop();
        }
    }
}

/// Validates the sorting discipline structurally: `Val` takes arbitrary,
/// state, particular in that order, and equality relates same-sort terms.
pub fn well_sorted(f: &Formula) -> Result<(), String> {
    match f {
        Formula::Val(a, s, p) => {
            for (term, expected, slot) in [
                (a, Sort::Arbitrary, "first"),
                (s, Sort::State, "second"),
                (p, Sort::Particular, "third"),
            ] {
                if term.sort != expected {
                    return Err(format!(
                        "the {slot} argument of Val must have sort {expected}, \
                         but `{}` has sort {}",
                        term.name, term.sort
                    ));
                }
            }
            Ok(())
        }
        Formula::Eq(l, r) => {
            if l.sort != r.sort {
                return Err(format!(
                    "equality between different sorts: `{}` has sort {} and `{}` has sort {}",
                    l.name, l.sort, r.name, r.sort
                ));
            }
            Ok(())
        }
        Formula::IsSort(_, _) => Ok(()),
        Formula::Not(inner) => well_sorted(inner),
        Formula::And(l, r)
        | Formula::Or(l, r)
        | Formula::Implies(l, r)
        | Formula::Iff(l, r) => {
            well_sorted(l)?;
            well_sorted(r)
        }
        Formula::Forall(_, _, body) | Formula::Exists(_, _, body) => well_sorted(body),
    }
}

// precedence levels for printing: quantifiers 0, ↔ 1, → 2, ∨ 3, ∧ 4, ¬ 5
fn level(f: &Formula) -> u8 {
    match f {
        Formula::Forall(..) | Formula::Exists(..) => 0,
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(..) => 3,
        Formula::And(..) => 4,
        Formula::Not(..) => 5,
        _ => 6,
    }
}

fn fmt_prec(f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if level(f) < min {
        write!(out, "(")?;
        fmt_prec(f, 0, out)?;
        return write!(out, ")");
    }
    match f {
        Formula::Val(a, s, p) => write!(out, "Val({},{},{})", a.name, s.name, p.name),
        Formula::Eq(l, r) => write!(out, "{} = {}", l.name, r.name),
        Formula::IsSort(sort, t) => write!(out, "{}({})", sort.letter(), t.name),
        Formula::Not(inner) => {
            write!(out, "¬")?;
            fmt_prec(inner, 5, out)
        }
        Formula::And(l, r) => {
            fmt_prec(l, 4, out)?;
            write!(out, " ∧ ")?;
            fmt_prec(r, 5, out)
        }
        Formula::Or(l, r) => {
            fmt_prec(l, 3, out)?;
            write!(out, " ∨ ")?;
            fmt_prec(r, 4, out)
        }
        Formula::Implies(l, r) => {
            fmt_prec(l, 3, out)?;
            write!(out, " → ")?;
            fmt_prec(r, 2, out)
        }
        Formula::Iff(l, r) => {
            fmt_prec(l, 1, out)?;
            write!(out, " ↔ ")?;
            fmt_prec(r, 2, out)
        }
        Formula::Forall(v, sort, body) => {
            write!(out, "forall {v}:{}. ", sort.letter())?;
            fmt_prec(body, 0, out)
        }
        Formula::Exists(v, sort, body) => {
            write!(out, "exists {v}:{}. ", sort.letter())?;
            fmt_prec(body, 0, out)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, 0, f)
    }
}
