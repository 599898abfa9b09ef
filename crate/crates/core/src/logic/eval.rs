//! Classical evaluation of formulas over a finite universe.
//!
//! Quantifiers range over the finite sorts: the particulars, all objects of
//! all registered systems, and all their states. A term name denotes, in
//! order: the innermost quantifier binding it, the environment entry for
//! it, or a universe element — particulars by their token, objects and
//! states by their positional labels (`a2@6af93bb0`, `s1@6af93bb0`, with
//! any unambiguous id prefix).

use std::collections::BTreeMap;

use thiserror::Error;

use crate::system::Atom;
use crate::universe::{ArbitraryObject, State, Universe};

use super::{Formula, Sort, Term};

/// A universe element of one of the three sorts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Element {
    Particular(Atom),
    Object(ArbitraryObject),
    State(State),
}

impl Element {
    pub fn sort(&self) -> Sort {
        match self {
            Element::Particular(_) => Sort::Particular,
            Element::Object(_) => Sort::Arbitrary,
            Element::State(_) => Sort::State,
        }
    }

    /// The printable name the element is addressed by in formulas.
    pub fn label(&self, u: &Universe) -> String {
        match self {
            Element::Particular(atom) => atom.as_str().to_string(),
            Element::Object(object) => object.label(),
            Element::State(state) => u
                .state_label(state)
                .unwrap_or_else(|| state.to_string()),
        }
    }
}

/// Assignments of free variables.
pub type Env = BTreeMap<String, Element>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable `{0}` (and no universe element has that name)")]
    UnboundVariable(String),
    #[error("sort error: {0}")]
    Sort(String),
}

/// Resolves a universe-element constant of the given sort by name, if one
/// exists.
pub(crate) fn resolve_constant(u: &Universe, name: &str, sort: Sort) -> Option<Element> {
    match sort {
        Sort::Particular => {
            let atom = Atom::new(name).ok()?;
            u.particulars().contains(&atom).then_some(Element::Particular(atom))
        }
        Sort::Arbitrary => {
            let (index, prefix) = split_label(name, 'a')?;
            let system = u.system_by_prefix(prefix)?;
            (index >= 1 && index <= system.object_count()).then(|| {
                Element::Object(ArbitraryObject::new(system.canonical_id().clone(), index))
            })
        }
        Sort::State => {
            let (index, prefix) = split_label(name, 's')?;
            let system = u.system_by_prefix(prefix)?;
            let row = system.matrix().rows().get(index.checked_sub(1)?)?;
            Some(Element::State(State::new(
                system.canonical_id().clone(),
                row.clone(),
            )))
        }
    }
}

fn split_label(name: &str, lead: char) -> Option<(usize, &str)> {
    let rest = name.strip_prefix(lead)?;
    let (index, prefix) = rest.split_once('@')?;
    Some((index.parse().ok()?, prefix))
}

fn resolve_term(
    u: &Universe,
    term: &Term,
    env: &Env,
    locals: &[(String, Element)],
) -> Result<Element, EvalError> {
    if let Some((_, element)) = locals.iter().rev().find(|(name, _)| name == &term.name) {
        return check_sort(term, element.clone());
    }
    if let Some(element) = env.get(&term.name) {
        return check_sort(term, element.clone());
    }
    resolve_constant(u, &term.name, term.sort)
        .ok_or_else(|| EvalError::UnboundVariable(term.name.clone()))
}

fn check_sort(term: &Term, element: Element) -> Result<Element, EvalError> {
    if element.sort() != term.sort {
        return Err(EvalError::Sort(format!(
            "`{}` is used at sort {} but is assigned a {}-sort element",
            term.name,
            term.sort,
            element.sort()
        )));
    }
    Ok(element)
}

fn domain(u: &Universe, sort: Sort) -> Vec<Element> {
    match sort {
        Sort::Particular => u
            .particulars()
            .iter()
            .cloned()
            .map(Element::Particular)
            .collect(),
        Sort::Arbitrary => u.objects().map(Element::Object).collect(),
        Sort::State => u.states().map(Element::State).collect(),
    }
}

/// Evaluates a formula classically. The environment must cover all free
/// variables that do not name universe elements, with sort-correct values.
pub fn eval(u: &Universe, f: &Formula, env: &Env) -> Result<bool, EvalError> {
    let mut locals = Vec::new();
    eval_inner(u, f, env, &mut locals)
}

fn eval_inner(
    u: &Universe,
    f: &Formula,
    env: &Env,
    locals: &mut Vec<(String, Element)>,
) -> Result<bool, EvalError> {
    match f {
        Formula::Val(a, s, p) => {
            let a = resolve_term(u, a, env, locals)?;
            let s = resolve_term(u, s, env, locals)?;
            let p = resolve_term(u, p, env, locals)?;
            let (Element::Object(a), Element::State(s), Element::Particular(p)) = (&a, &s, &p)
            else {
                unreachable!("terms carry their sorts");
            };
            match u.val(a, s) {
                Ok(value) => Ok(value.as_ref() == Some(p)),
                Err(_) => Ok(false), // elements outside the universe take no values
            }
        }
        Formula::Eq(l, r) => {
            Ok(resolve_term(u, l, env, locals)? == resolve_term(u, r, env, locals)?)
        }
        Formula::IsSort(sort, t) => Ok(resolve_term(u, t, env, locals)?.sort() == *sort),
        Formula::Not(inner) => Ok(!eval_inner(u, inner, env, locals)?),
        Formula::And(l, r) => {
            Ok(eval_inner(u, l, env, locals)? && eval_inner(u, r, env, locals)?)
        }
        Formula::Or(l, r) => Ok(eval_inner(u, l, env, locals)? || eval_inner(u, r, env, locals)?),
        Formula::Implies(l, r) => {
            Ok(!eval_inner(u, l, env, locals)? || eval_inner(u, r, env, locals)?)
        }
        Formula::Iff(l, r) => {
            Ok(eval_inner(u, l, env, locals)? == eval_inner(u, r, env, locals)?)
        }
        Formula::Forall(v, sort, body) => {
            for element in domain(u, *sort) {
                locals.push((v.clone(), element));
                let holds = eval_inner(u, body, env, locals);
                locals.pop();
                if !holds? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Exists(v, sort, body) => {
            for element in domain(u, *sort) {
                locals.push((v.clone(), element));
                let holds = eval_inner(u, body, env, locals);
                locals.pop();
                if holds? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

/// For a false universally quantified formula, an assignment of the
/// outermost `forall` prefix under which the rest evaluates false.
pub fn find_counterexample(
    u: &Universe,
    f: &Formula,
    env: &Env,
) -> Result<Option<Vec<(String, Element)>>, EvalError> {
    let mut prefix: Vec<(&String, Sort)> = Vec::new();
    let mut body = f;
    while let Formula::Forall(v, sort, inner) = body {
        prefix.push((v, *sort));
        body = inner;
    }
    if prefix.is_empty() {
        return Ok(None);
    }
    let mut assignment: Vec<(String, Element)> = Vec::new();
    search(u, &prefix, body, env, &mut assignment)
}

fn search(
    u: &Universe,
    prefix: &[(&String, Sort)],
    body: &Formula,
    env: &Env,
    assignment: &mut Vec<(String, Element)>,
) -> Result<Option<Vec<(String, Element)>>, EvalError> {
    match prefix.split_first() {
        None => {
            let mut locals = assignment.clone();
            if !eval_inner(u, body, env, &mut locals)? {
                Ok(Some(assignment.clone()))
            } else {
                Ok(None)
            }
        }
        Some(((name, sort), rest)) => {
            for element in domain(u, *sort) {
                assignment.push(((*name).clone(), element));
                if let Some(found) = search(u, rest, body, env, assignment)? {
                    return Ok(Some(found));
                }
                assignment.pop();
            }
            Ok(None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;
    use crate::system::{atoms, pos};
    use crate::universe::fixtures::{example1, example2};
    use proptest::prelude::*;

    fn closed(u: &Universe, text: &str) -> bool {
        eval(u, &parse(text).unwrap(), &Env::new()).unwrap()
    }

    #[test]
    fn arbitraryhood_matrix_holds_of_every_object() {
        let (u, abs) = example1();
        let f = parse("exists y:S. exists z:P. Val(x,y,z)").unwrap();
        for column in 1..=2 {
            let env: Env = [(
                "x".to_string(),
                Element::Object(ArbitraryObject::new(abs.system_id.clone(), column)),
            )]
            .into();
            assert!(eval(&u, &f, &env).unwrap());
        }
    }

    #[test]
    fn partial_functionality_as_a_formula() {
        let text = "forall a:A. forall s:S. forall p:P. forall q:P. \
                    (Val(a,s,p) ∧ Val(a,s,q)) → p = q";
        let (u1, _) = example1();
        assert!(closed(&u1, text));
        let (u2, _) = example2();
        assert!(closed(&u2, text));
    }

    #[test]
    fn identity_criterion_as_a_formula_holds_on_example1() {
        let (u, _) = example1();
        assert!(closed(
            &u,
            "forall a:A. forall b:A. (a = b ↔ (forall s:S. forall p:P. \
             Val(a,s,p) ↔ Val(b,s,p)))"
        ));
    }

    #[test]
    fn constants_resolve_by_label() {
        let (u, abs) = example1();
        let short = abs.system_id.short();
        assert!(closed(&u, &format!("Val(a1@{short},s1@{short},p1)")));
        assert!(closed(&u, &format!("Val(a2@{short},s2@{short},p3)")));
        assert!(!closed(&u, &format!("Val(a1@{short},s1@{short},p2)")));
        // sort predicates are sort tests
        assert!(closed(&u, "P(p1)"));
        assert!(!closed(&u, "A(p1)"));
        assert!(closed(&u, &format!("A(a1@{short})")));
        assert!(closed(&u, &format!("S(s1@{short})")));
    }

    #[test]
    fn unknown_names_are_unbound() {
        let (u, _) = example1();
        let err = eval(&u, &parse("p9 = p9").unwrap(), &Env::new()).unwrap_err();
        assert!(matches!(err, EvalError::UnboundVariable(name) if name == "p9"));
    }

    #[test]
    fn environments_are_sort_checked() {
        let (u, abs) = example1();
        let f = parse("z = p1").unwrap();
        let env: Env = [(
            "z".to_string(),
            Element::Object(ArbitraryObject::new(abs.system_id.clone(), 1)),
        )]
        .into();
        assert!(matches!(eval(&u, &f, &env), Err(EvalError::Sort(_))));
    }

    #[test]
    fn counterexamples_are_found_for_false_universals() {
        let (u, _) = example1();
        let f = parse("forall p:P. p = p1").unwrap();
        let witness = find_counterexample(&u, &f, &Env::new()).unwrap().unwrap();
        assert_eq!(witness.len(), 1);
        assert_eq!(witness[0].0, "p");
        assert_eq!(witness[0].1, Element::Particular(Atom::new("p2").unwrap()));
        // true universals have none
        let t = parse("forall p:P. p = p").unwrap();
        assert!(find_counterexample(&u, &t, &Env::new()).unwrap().is_none());
    }

    #[test]
    fn excluded_middle_holds_pointwise() {
        let (mut u, _) = example2();
        u.abstract_system(&pos(&[&["0"]])).unwrap();
        for text in [
            "forall p:P. p = 0",
            "exists a:A. forall s:S. Val(a,s,0)",
            "forall a:A. exists s:S. exists p:P. Val(a,s,p)",
        ] {
            let f = parse(text).unwrap();
            let value = eval(&u, &f, &Env::new()).unwrap();
            let negated = eval(&u, &Formula::Not(Box::new(f)), &Env::new()).unwrap();
            assert_ne!(value, negated, "{text}");
        }
    }

    fn tiny_universes() -> Vec<Universe> {
        let mut out = Vec::new();
        let (u1, _) = example1();
        out.push(u1);
        let (mut u2, _) = example2();
        u2.abstract_system(&pos(&[&["0", "0"], &["0", "1"]])).unwrap();
        out.push(u2);
        let mut u3 = Universe::new(atoms(&["0", "1"])).unwrap();
        u3.abstract_system(&pos(&[&["0"]])).unwrap();
        out.push(u3);
        out
    }

    proptest! {
        // metamorphic law: ¬∀x.φ ⟺ ∃x.¬φ over a pool of closed bodies
        #[test]
        fn quantifier_duality(universe_index in 0usize..3, body_index in 0usize..4, sort_index in 0usize..3) {
            let u = &tiny_universes()[universe_index];
            let sort = [Sort::Particular, Sort::Arbitrary, Sort::State][sort_index];
            let bodies = [
                "exists q:P. exists b:A. exists t:S. Val(b,t,q) ∧ x = x",
                "forall b:A. exists t:S. exists q:P. Val(b,t,q) ∧ ¬(x = x)",
                "¬(exists t:S. S(t) ∧ ¬(x = x))",
                "forall t:S. exists b:A. Val(b,t,0) ∨ x = x",
            ];
            let forall = format!("forall x:{}. {}", sort.letter(), bodies[body_index]);
            let exists_not = format!("exists x:{}. ¬({})", sort.letter(), bodies[body_index]);
            let f1 = parse(&forall).unwrap();
            let f2 = parse(&exists_not).unwrap();
            let env = Env::new();
            // the pool only mentions the constant 0, present in universes 1 and 2
            let (Ok(v1), Ok(v2)) = (eval(u, &f1, &env), eval(u, &f2, &env)) else {
                return Ok(());
            };
            let not_forall = eval(u, &Formula::Not(Box::new(f1)), &env).unwrap();
            prop_assert_eq!(not_forall, v2);
            prop_assert_eq!(v1, !v2);
        }
    }
}
