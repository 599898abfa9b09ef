//! Dependence between arbitrary objects.
//!
//! `b` depends on `a` when a function on values sends `a`'s value in each
//! state to `b`'s value in that state. Dependence is witnessed by the
//! induced map on `a`'s value range; in strict mode the witness must also
//! satisfy the reverse direction of the defining biconditional, which
//! forces it to be injective wherever two of `a`'s values share an image
//! that `b` attains. Objects of distinct systems share no states, so
//! dependence across systems is rejected outright.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::abstraction::SystemId;
use crate::system::Atom;
use crate::universe::{ArbitraryObject, Universe, UniverseError};

/// A dependence of `to` on `from`: for every shared state `s`,
/// `map(val(from, s)) = val(to, s)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DependenceWitness {
    pub from: String,
    pub to: String,
    /// The induced function on `value_range(from)`.
    pub map: BTreeMap<Atom, Atom>,
    /// Whether the witness also satisfies the strict (biconditional) clause.
    pub strict: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DependenceError {
    #[error("objects {a} and {b} belong to different systems")]
    DifferentSystems { a: String, b: String },
    #[error(transparent)]
    Universe(#[from] UniverseError),
}

/// Looks for a witness that `b` depends on `a`. In weak mode the induced
/// value relation only has to be functional; `strict` additionally demands
/// the biconditional clause. The returned witness records whether the
/// strict clause holds either way.
pub fn depends(
    u: &Universe,
    a: &ArbitraryObject,
    b: &ArbitraryObject,
    strict: bool,
) -> Result<Option<DependenceWitness>, DependenceError> {
    for object in [a, b] {
        if !u.contains_object(object) {
            return Err(UniverseError::UnknownObject {
                object: object.label(),
            }
            .into());
        }
    }
    if a.system_id() != b.system_id() {
        return Err(DependenceError::DifferentSystems {
            a: a.label(),
            b: b.label(),
        });
    }

    let system = u.system(a.system_id()).expect("object containment checked");
    let mut map: BTreeMap<Atom, Atom> = BTreeMap::new();
    for row in system.matrix().rows() {
        let value_a = row.entries()[a.column_index() - 1].clone();
        let value_b = row.entries()[b.column_index() - 1].clone();
        match map.get(&value_a) {
            Some(existing) if *existing != value_b => return Ok(None),
            Some(_) => {}
            None => {
                map.insert(value_a, value_b);
            }
        }
    }

    // strict clause: whenever b takes map(p) in a state, a takes p there
    let mut biconditional = true;
    'outer: for row in system.matrix().rows() {
        let value_a = &row.entries()[a.column_index() - 1];
        let value_b = &row.entries()[b.column_index() - 1];
        for (p, fp) in &map {
            if fp == value_b && p != value_a {
                biconditional = false;
                break 'outer;
            }
        }
    }
    if strict && !biconditional {
        return Ok(None);
    }

    Ok(Some(DependenceWitness {
        from: a.label(),
        to: b.label(),
        map,
        strict: biconditional,
    }))
}

/// Whether `a` and `b` depend on each other, i.e. the induced value
/// relation is a bijection between attained values.
pub fn mutual_dependence(
    u: &Universe,
    a: &ArbitraryObject,
    b: &ArbitraryObject,
) -> Result<bool, DependenceError> {
    Ok(depends(u, a, b, false)?.is_some() && depends(u, b, a, false)?.is_some())
}

/// Whether `a` neither depends on nor is depended on by any other object
/// of its system.
pub fn is_ur_object(u: &Universe, a: &ArbitraryObject) -> Result<bool, DependenceError> {
    if !u.contains_object(a) {
        return Err(UniverseError::UnknownObject {
            object: a.label(),
        }
        .into());
    }
    let system = u.system(a.system_id()).expect("object containment checked");
    for column in 1..=system.object_count() {
        if column == a.column_index() {
            continue;
        }
        let b = ArbitraryObject::new(a.system_id().clone(), column);
        if depends(u, a, &b, false)?.is_some() || depends(u, &b, a, false)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The weak-dependence relation of one system as a directed graph.
/// Nodes are the system's objects in column order; an edge `a → b` means
/// `b` weakly depends on `a`. Self-loops are present by reflexivity.
#[derive(Debug, Clone, Serialize)]
pub struct DependenceGraph {
    pub system: SystemId,
    pub nodes: Vec<String>,
    /// Edges as pairs of node indices into `nodes`.
    pub edges: Vec<(usize, usize)>,
}

pub fn dependence_graph(u: &Universe, id: &SystemId) -> Result<DependenceGraph, DependenceError> {
    let system = u
        .system(id)
        .ok_or_else(|| UniverseError::UnknownSystem { id: id.clone() })?;
    let objects: Vec<ArbitraryObject> = (1..=system.object_count())
        .map(|c| ArbitraryObject::new(id.clone(), c))
        .collect();
    let mut edges = Vec::new();
    for (i, a) in objects.iter().enumerate() {
        for (j, b) in objects.iter().enumerate() {
            if depends(u, a, b, false)?.is_some() {
                edges.push((i, j));
            }
        }
    }
    Ok(DependenceGraph {
        system: id.clone(),
        nodes: objects.iter().map(ArbitraryObject::label).collect(),
        edges,
    })
}

impl DependenceGraph {
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dependence {\n");
        for node in &self.nodes {
            writeln!(out, "  \"{node}\";").expect("write to string");
        }
        for (from, to) in &self.edges {
            writeln!(out, "  \"{}\" -> \"{}\";", self.nodes[*from], self.nodes[*to])
                .expect("write to string");
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "format": 1,
            "system": self.system.as_str(),
            "nodes": self.nodes,
            "edges": self
                .edges
                .iter()
                .map(|(from, to)| vec![self.nodes[*from].clone(), self.nodes[*to].clone()])
                .collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{atoms, pos, row, ParticularObjectSystem};
    use crate::universe::fixtures::{example1, example2};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn obj(id: &SystemId, c: usize) -> ArbitraryObject {
        ArbitraryObject::new(id.clone(), c)
    }

    fn witness_map(pairs: &[(&str, &str)]) -> BTreeMap<Atom, Atom> {
        pairs
            .iter()
            .map(|(k, v)| (Atom::new(*k).unwrap(), Atom::new(*v).unwrap()))
            .collect()
    }

    #[test]
    fn example2_swap_witness_is_strict_and_mutual() {
        let (u, abs) = example2();
        let (a1, a2) = (obj(&abs.system_id, 1), obj(&abs.system_id, 2));
        let witness = depends(&u, &a1, &a2, true).unwrap().unwrap();
        assert_eq!(witness.map, witness_map(&[("0", "1"), ("1", "0")]));
        assert!(witness.strict);
        assert!(mutual_dependence(&u, &a1, &a2).unwrap());
    }

    #[test]
    fn dependence_is_reflexive_with_the_identity_map() {
        let (u, abs) = example1();
        let a1 = obj(&abs.system_id, 1);
        let witness = depends(&u, &a1, &a1, true).unwrap().unwrap();
        for (k, v) in &witness.map {
            assert_eq!(k, v);
        }
        assert!(mutual_dependence(&u, &a1, &a1).unwrap());
    }

    #[test]
    fn example1_objects_depend_functionally() {
        // two states: a1 takes p1,p2; a2 takes p2,p3
        let (u, abs) = example1();
        let witness = depends(&u, &obj(&abs.system_id, 1), &obj(&abs.system_id, 2), false)
            .unwrap()
            .unwrap();
        assert_eq!(witness.map, witness_map(&[("p1", "p2"), ("p2", "p3")]));
    }

    #[test]
    fn constant_object_breaks_reverse_functionality() {
        // a constant column next to a two-valued column on 2 states
        let mut u = Universe::new(atoms(&["0", "1"])).unwrap();
        let abs = u.abstract_system(&pos(&[&["0", "0"], &["0", "1"]])).unwrap();
        let constant = abs.object_for_column(0);
        let varying = abs.object_for_column(1);
        assert!(depends(&u, &constant, &varying, false).unwrap().is_none());
        assert!(depends(&u, &varying, &constant, false).unwrap().is_some());
        assert!(!mutual_dependence(&u, &constant, &varying).unwrap());
    }

    #[test]
    fn strict_mode_rejects_value_collisions() {
        // f maps both 0 and 1 to 0, and b attains 0: strict fails, weak holds
        let mut u = Universe::new(atoms(&["0", "1"])).unwrap();
        let abs = u.abstract_system(&pos(&[&["0", "0"], &["1", "0"]])).unwrap();
        let a = abs.object_for_column(0);
        let b = abs.object_for_column(1);
        let weak = depends(&u, &a, &b, false).unwrap().unwrap();
        assert!(!weak.strict);
        assert!(depends(&u, &a, &b, true).unwrap().is_none());
    }

    #[test]
    fn cross_system_dependence_is_rejected() {
        let (mut u, abs1) = example1();
        let abs2 = u.abstract_system(&pos(&[&["p1"]])).unwrap();
        let err = depends(&u, &obj(&abs1.system_id, 1), &obj(&abs2.system_id, 1), false)
            .unwrap_err();
        assert!(matches!(err, DependenceError::DifferentSystems { .. }));
    }

    #[test]
    fn example2_graph_has_all_four_edges() {
        let (u, abs) = example2();
        let graph = dependence_graph(&u, &abs.system_id).unwrap();
        assert_eq!(graph.nodes.len(), 2);
        let mut edges = graph.edges.clone();
        edges.sort();
        assert_eq!(edges, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
    }

    #[test]
    fn single_object_graph_is_a_self_loop() {
        let mut u = Universe::new(atoms(&["p"])).unwrap();
        let abs = u.abstract_system(&pos(&[&["p"]])).unwrap();
        let graph = dependence_graph(&u, &abs.system_id).unwrap();
        assert_eq!(graph.nodes.len(), 1);
        assert_eq!(graph.edges, vec![(0, 0)]);
    }

    #[test]
    fn ur_objects() {
        // the sole object of a single-column system is an ur-object
        let mut u = Universe::new(atoms(&["0", "1"])).unwrap();
        let abs = u
            .abstract_system(&ParticularObjectSystem::new([row(&["0"]), row(&["1"])]).unwrap())
            .unwrap();
        assert!(is_ur_object(&u, &abs.object_for_column(0)).unwrap());

        // the swap pair are not ur-objects
        let (v, abs2) = example2();
        assert!(!is_ur_object(&v, &obj(&abs2.system_id, 1)).unwrap());
        assert!(!is_ur_object(&v, &obj(&abs2.system_id, 2)).unwrap());
    }

    #[test]
    fn non_functional_both_ways_makes_both_objects_ur() {
        // brute check over {⟨0,0⟩,⟨0,1⟩,⟨1,0⟩}: neither column determines the other
        let mut u = Universe::new(atoms(&["0", "1"])).unwrap();
        let abs = u
            .abstract_system(&pos(&[&["0", "0"], &["0", "1"], &["1", "0"]]))
            .unwrap();
        assert!(is_ur_object(&u, &abs.object_for_column(0)).unwrap());
        assert!(is_ur_object(&u, &abs.object_for_column(1)).unwrap());
    }

    #[test]
    fn dot_output_is_deterministic() {
        let (u, abs) = example2();
        let graph = dependence_graph(&u, &abs.system_id).unwrap();
        let short = abs.system_id.short();
        let expected = format!(
            "digraph dependence {{\n  \"a1@{short}\";\n  \"a2@{short}\";\n  \"a1@{short}\" -> \"a1@{short}\";\n  \"a1@{short}\" -> \"a2@{short}\";\n  \"a2@{short}\" -> \"a1@{short}\";\n  \"a2@{short}\" -> \"a2@{short}\";\n}}\n"
        );
        assert_eq!(graph.to_dot(), expected);
    }

    fn arb_universe_system() -> impl Strategy<Value = (Universe, crate::universe::Abstraction)> {
        (2usize..=3, 2usize..=4).prop_flat_map(|(width, rows)| {
            proptest::collection::vec(
                proptest::collection::vec(0u8..3, width..=width),
                1..=rows,
            )
            .prop_map(|raw| {
                let mut u = Universe::new(atoms(&["0", "1", "2"])).unwrap();
                let o = ParticularObjectSystem::new(raw.into_iter().map(|r| {
                    r.into_iter()
                        .map(|v| Atom::new(v.to_string()).unwrap())
                        .collect()
                }))
                .unwrap();
                let abs = u.abstract_system(&o).unwrap();
                (u, abs)
            })
        })
    }

    proptest! {
        #[test]
        fn weak_dependence_is_transitive((u, abs) in arb_universe_system()) {
            let system = u.system(&abs.system_id).unwrap().clone();
            let objects: Vec<ArbitraryObject> = (1..=system.object_count())
                .map(|c| obj(&abs.system_id, c))
                .collect();
            for a in &objects {
                for b in &objects {
                    for c in &objects {
                        let ab = depends(&u, a, b, false).unwrap();
                        let bc = depends(&u, b, c, false).unwrap();
                        if let (Some(ab), Some(bc)) = (ab, bc) {
                            let ac = depends(&u, a, c, false).unwrap();
                            prop_assert!(ac.is_some(), "composition witness missing");
                            let composed: BTreeMap<Atom, Atom> = ab
                                .map
                                .iter()
                                .map(|(p, q)| (p.clone(), bc.map[q].clone()))
                                .collect();
                            prop_assert_eq!(ac.unwrap().map, composed);
                        }
                    }
                }
            }
        }

        #[test]
        fn bijective_witnesses_invert((u, abs) in arb_universe_system()) {
            let system = u.system(&abs.system_id).unwrap().clone();
            let objects: Vec<ArbitraryObject> = (1..=system.object_count())
                .map(|c| obj(&abs.system_id, c))
                .collect();
            for a in &objects {
                for b in &objects {
                    if let Some(witness) = depends(&u, a, b, false).unwrap() {
                        let values: BTreeSet<&Atom> = witness.map.values().collect();
                        let injective = values.len() == witness.map.len();
                        if injective {
                            let reverse = depends(&u, b, a, false).unwrap();
                            prop_assert!(reverse.is_some(), "inverse witness missing");
                            let reverse = reverse.unwrap();
                            for (p, q) in &witness.map {
                                prop_assert_eq!(&reverse.map[q], p);
                            }
                        }
                    }
                }
            }
        }
    }
}
