//! Exhaustive generation and counting of arbitrary-object systems up to
//! identity.
//!
//! Two independent strategies produce the same answer and cross-check each
//! other:
//!
//! - *generate-then-dedup*: walk every column-distinct row set within
//!   bounds, canonicalize each, and deduplicate;
//! - *orderly generation*: grow row sets one row at a time in ascending row
//!   order, keeping only sets that are their own canonical representative.
//!   A set is canonical when its sorted row list is the lexicographic
//!   minimum over all column permutations; removing the largest row of a
//!   canonical set leaves a canonical set, so the search tree visits every
//!   canonical form exactly once with no dedup pass.
//!
//! Output is deterministic: ascending object count, then state count, then
//! the canonical rows lexicographically.

use std::collections::BTreeSet;

use itertools::Itertools;
use rayon::prelude::*;
use thiserror::Error;

use crate::abstraction::{canonical_form, CanonicalMatrix};
use crate::system::{Atom, ParticularObjectSystem, Row};

/// How many candidate row sets the dedup strategy may visit before the
/// bounds count as infeasible.
pub const DEFAULT_SEARCH_LIMIT: u128 = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumerateError {
    #[error("particulars must be nonempty")]
    EmptyParticulars,
    #[error("bounds must allow at least one object and one state")]
    ZeroBounds,
    #[error("bounds are infeasible: about {estimate} candidate row sets exceeds the limit {limit}")]
    InfeasibleBounds { estimate: u128, limit: u128 },
    #[error("enumeration strategies disagree: orderly found {orderly}, dedup found {dedup}")]
    StrategyDisagreement { orderly: u64, dedup: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Orderly,
    GenerateDedup,
}

#[derive(Debug, Clone)]
pub struct EnumerateOptions {
    pub strategy: Strategy,
    /// Worker threads for the dedup strategy; `<= 1` runs sequentially.
    pub jobs: usize,
    pub limit: u128,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions {
            strategy: Strategy::Orderly,
            jobs: 1,
            limit: DEFAULT_SEARCH_LIMIT,
        }
    }
}

/// All canonical systems over `particulars` with at most `max_objects`
/// objects and at most `max_states` states, each exactly once, in
/// deterministic order.
pub fn enumerate_systems(
    particulars: &BTreeSet<Atom>,
    max_objects: usize,
    max_states: usize,
    options: &EnumerateOptions,
) -> Result<Vec<CanonicalMatrix>, EnumerateError> {
    if particulars.is_empty() {
        return Err(EnumerateError::EmptyParticulars);
    }
    if max_objects == 0 || max_states == 0 {
        return Err(EnumerateError::ZeroBounds);
    }
    check_feasible(particulars.len(), max_objects, max_states, options.limit)?;

    let atoms: Vec<Atom> = particulars.iter().cloned().collect();
    let mut found = match options.strategy {
        Strategy::Orderly => orderly(&atoms, max_objects, max_states),
        Strategy::GenerateDedup => generate_dedup(&atoms, max_objects, max_states, options.jobs),
    };
    found.sort();
    Ok(found)
}

/// |C_P(n)|: the number of canonical systems with at most `n` objects.
/// The state count is left to its natural bound |P|ⁿ per width. Both
/// strategies are run and must agree.
pub fn count_systems(
    particulars: &BTreeSet<Atom>,
    n: usize,
    options: &EnumerateOptions,
) -> Result<u64, EnumerateError> {
    let max_states = saturating_pow(particulars.len(), n);
    let max_states = usize::try_from(max_states.min(usize::MAX as u128)).unwrap_or(usize::MAX);

    let orderly_count = enumerate_systems(
        particulars,
        n,
        max_states,
        &EnumerateOptions {
            strategy: Strategy::Orderly,
            ..options.clone()
        },
    )?
    .len() as u64;
    let dedup_count = enumerate_systems(
        particulars,
        n,
        max_states,
        &EnumerateOptions {
            strategy: Strategy::GenerateDedup,
            ..options.clone()
        },
    )?
    .len() as u64;

    if orderly_count != dedup_count {
        return Err(EnumerateError::StrategyDisagreement {
            orderly: orderly_count,
            dedup: dedup_count,
        });
    }
    Ok(orderly_count)
}

/// The raw blueprint count: column-distinct row sets with at most `n`
/// columns, *not* quotiented by canonical-form identity. Exposed for
/// comparison against [`count_systems`].
pub fn count_raw_blueprints(
    particulars: &BTreeSet<Atom>,
    n: usize,
) -> Result<u64, EnumerateError> {
    if particulars.is_empty() {
        return Err(EnumerateError::EmptyParticulars);
    }
    if n == 0 {
        return Err(EnumerateError::ZeroBounds);
    }
    check_feasible(particulars.len(), n, usize::MAX, DEFAULT_SEARCH_LIMIT)?;
    let atoms: Vec<Atom> = particulars.iter().cloned().collect();
    let mut count = 0u64;
    for width in 1..=n {
        let rows = all_rows(&atoms, width);
        for size in 1..=rows.len() {
            for subset in rows.iter().combinations(size) {
                if columns_distinct(&subset, width) {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

/// Registers every canonical system within `bounds` and records the bounds
/// on the universe, so that its comprehension claim is non-vacuous.
/// Returns how many systems the bounds admit.
pub fn saturate(
    u: &mut crate::universe::Universe,
    bounds: crate::universe::Bounds,
    options: &EnumerateOptions,
) -> Result<usize, EnumerateError> {
    let particulars = u.particulars().clone();
    let found = enumerate_systems(&particulars, bounds.max_objects, bounds.max_states, options)?;
    let count = found.len();
    for matrix in found {
        u.register_canonical(matrix);
    }
    u.set_bounds(bounds);
    Ok(count)
}

/// The k×k identity-pattern blueprint over atoms 0 and 1: row `i` has 1 in
/// position `i` and 0 elsewhere. Its abstraction has exactly `k` objects
/// and `k` states.
pub fn diagonal_system(k: usize) -> ParticularObjectSystem {
    assert!(k >= 1, "diagonal systems need size at least 1");
    let zero = Atom::new("0").expect("valid token");
    let one = Atom::new("1").expect("valid token");
    let rows = (0..k).map(|i| {
        (0..k)
            .map(|j| if i == j { one.clone() } else { zero.clone() })
            .collect::<Row>()
    });
    ParticularObjectSystem::new(rows).expect("diagonal rows are uniform and nonempty")
}

fn saturating_pow(base: usize, exponent: usize) -> u128 {
    let mut result: u128 = 1;
    for _ in 0..exponent {
        result = result.saturating_mul(base as u128);
    }
    result
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result.saturating_mul(n - i) / (i + 1);
    }
    result
}

fn check_feasible(
    n_particulars: usize,
    max_objects: usize,
    max_states: usize,
    limit: u128,
) -> Result<(), EnumerateError> {
    let mut estimate: u128 = 0;
    for width in 1..=max_objects {
        let cells = saturating_pow(n_particulars, width);
        let max_size = (max_states as u128).min(cells);
        for size in 1..=max_size {
            estimate = estimate.saturating_add(binomial(cells, size));
            if estimate > limit {
                return Err(EnumerateError::InfeasibleBounds { estimate, limit });
            }
        }
    }
    Ok(())
}

/// All rows of the given width over the atoms, ascending.
pub(crate) fn all_rows(atoms: &[Atom], width: usize) -> Vec<Row> {
    std::iter::repeat_n(atoms.iter(), width)
        .multi_cartesian_product()
        .map(|entries| entries.into_iter().cloned().collect())
        .collect()
}

pub(crate) fn columns_distinct(rows: &[&Row], width: usize) -> bool {
    for second in 1..width {
        'pair: for first in 0..second {
            for row in rows {
                if row.entries()[first] != row.entries()[second] {
                    continue 'pair;
                }
            }
            return false;
        }
    }
    true
}

/// Whether the ascending row list is the lexicographic minimum over all
/// column permutations.
fn is_canonical_rowset(rows: &[&Row], width: usize) -> bool {
    for perm in (0..width).permutations(width) {
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            continue;
        }
        let mut permuted: Vec<Row> = rows.iter().map(|r| r.permuted(&perm)).collect();
        permuted.sort();
        if permuted.iter().lt(rows.iter().copied()) {
            return false;
        }
    }
    true
}

fn orderly(atoms: &[Atom], max_objects: usize, max_states: usize) -> Vec<CanonicalMatrix> {
    let mut found = Vec::new();
    for width in 1..=max_objects {
        let rows = all_rows(atoms, width);
        let mut frontier: Vec<Vec<usize>> = Vec::new();
        for index in 0..rows.len() {
            if is_canonical_rowset(&[&rows[index]], width) {
                frontier.push(vec![index]);
            }
        }
        let mut level = 1;
        while !frontier.is_empty() && level <= max_states {
            for indices in &frontier {
                let selected: Vec<&Row> = indices.iter().map(|&i| &rows[i]).collect();
                if columns_distinct(&selected, width) {
                    found.push(CanonicalMatrix::from_rows_unchecked(
                        selected.into_iter().cloned().collect(),
                    ));
                }
            }
            if level == max_states {
                break;
            }
            let mut next = Vec::new();
            for indices in &frontier {
                let last = *indices.last().expect("frontier sets are nonempty");
                for extension in last + 1..rows.len() {
                    let mut grown = indices.clone();
                    grown.push(extension);
                    let selected: Vec<&Row> = grown.iter().map(|&i| &rows[i]).collect();
                    if is_canonical_rowset(&selected, width) {
                        next.push(grown);
                    }
                }
            }
            frontier = next;
            level += 1;
        }
    }
    found
}

fn generate_dedup(
    atoms: &[Atom],
    max_objects: usize,
    max_states: usize,
    jobs: usize,
) -> Vec<CanonicalMatrix> {
    // partition by (width, least row); each partition enumerates the
    // subsets whose minimum is that row, and the merge dedups
    let partitions: Vec<(usize, usize)> = (1..=max_objects)
        .flat_map(|width| {
            let count = saturating_pow(atoms.len(), width) as usize;
            (0..count).map(move |first| (width, first))
        })
        .collect();

    let run = |(width, first): &(usize, usize)| -> BTreeSet<CanonicalMatrix> {
        let rows = all_rows(atoms, *width);
        let mut local = BTreeSet::new();
        let rest = &rows[first + 1..];
        let max_extra = max_states.saturating_sub(1).min(rest.len());
        for extra in 0..=max_extra {
            for tail in rest.iter().combinations(extra) {
                let mut subset: Vec<&Row> = Vec::with_capacity(extra + 1);
                subset.push(&rows[*first]);
                subset.extend(tail);
                if columns_distinct(&subset, *width) {
                    let system = ParticularObjectSystem::new(subset.into_iter().cloned())
                        .expect("subsets are uniform and nonempty");
                    local.insert(canonical_form(&system));
                }
            }
        }
        local
    };

    let merged: BTreeSet<CanonicalMatrix> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool");
        pool.install(|| {
            partitions
                .par_iter()
                .map(run)
                .reduce(BTreeSet::new, |mut acc, set| {
                    acc.extend(set);
                    acc
                })
        })
    } else {
        let mut acc = BTreeSet::new();
        for partition in &partitions {
            acc.extend(run(partition));
        }
        acc
    };
    merged.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::systems_equal;
    use crate::system::{atoms, row};

    fn particulars(tokens: &[&str]) -> BTreeSet<Atom> {
        atoms(tokens).into_iter().collect()
    }

    #[test]
    fn single_particular_yields_one_system() {
        let p = particulars(&["p"]);
        for (m, r) in [(1, 1), (2, 3), (3, 2)] {
            let found = enumerate_systems(&p, m, r, &EnumerateOptions::default()).unwrap();
            assert_eq!(found.len(), 1, "bounds ({m},{r})");
            assert_eq!(found[0].rows(), &[row(&["p"])]);
            assert_eq!(found[0].width(), 1);
        }
    }

    #[test]
    fn two_particulars_one_object_gives_three_systems() {
        let found =
            enumerate_systems(&particulars(&["0", "1"]), 1, 2, &EnumerateOptions::default())
                .unwrap();
        let rows: Vec<&[Row]> = found.iter().map(|m| m.rows()).collect();
        assert_eq!(
            rows,
            vec![
                &[row(&["0"])][..],
                &[row(&["1"])][..],
                &[row(&["0"]), row(&["1"])][..],
            ]
        );
    }

    #[test]
    fn outputs_have_pairwise_distinct_columns() {
        let found =
            enumerate_systems(&particulars(&["0", "1"]), 3, 4, &EnumerateOptions::default())
                .unwrap();
        for matrix in &found {
            let blueprint = matrix.as_blueprint().unwrap();
            assert_eq!(blueprint.duplicate_columns(), None);
        }
    }

    #[test]
    fn outputs_are_pairwise_nonequivalent() {
        let found =
            enumerate_systems(&particulars(&["0", "1"]), 2, 3, &EnumerateOptions::default())
                .unwrap();
        for (i, a) in found.iter().enumerate() {
            for b in &found[i + 1..] {
                assert!(!systems_equal(
                    &a.as_blueprint().unwrap(),
                    &b.as_blueprint().unwrap()
                ));
            }
        }
    }

    #[test]
    fn strategies_agree_on_small_bounds() {
        let p = particulars(&["0", "1"]);
        for m in 1..=3 {
            for r in 1..=4 {
                let orderly = enumerate_systems(
                    &p,
                    m,
                    r,
                    &EnumerateOptions {
                        strategy: Strategy::Orderly,
                        ..Default::default()
                    },
                )
                .unwrap();
                let dedup = enumerate_systems(
                    &p,
                    m,
                    r,
                    &EnumerateOptions {
                        strategy: Strategy::GenerateDedup,
                        ..Default::default()
                    },
                )
                .unwrap();
                assert_eq!(orderly, dedup, "bounds ({m},{r})");
            }
        }
    }

    #[test]
    fn counts_for_small_particulars() {
        assert_eq!(
            count_systems(&particulars(&["p"]), 1, &EnumerateOptions::default()).unwrap(),
            1
        );
        assert_eq!(
            count_systems(&particulars(&["0", "1"]), 1, &EnumerateOptions::default()).unwrap(),
            3
        );
    }

    #[test]
    fn counts_grow_monotonically() {
        let p = particulars(&["0", "1"]);
        let counts: Vec<u64> = (1..=3)
            .map(|n| count_systems(&p, n, &EnumerateOptions::default()).unwrap())
            .collect();
        assert!(counts[0] < counts[1]);
        assert!(counts[1] < counts[2]);
    }

    #[test]
    fn state_counts_respect_the_power_bound() {
        let found =
            enumerate_systems(&particulars(&["0", "1"]), 3, 8, &EnumerateOptions::default())
                .unwrap();
        for matrix in &found {
            assert!(matrix.row_count() as u128 <= saturating_pow(2, matrix.width()));
        }
    }

    #[test]
    fn jobs_do_not_change_the_output() {
        let p = particulars(&["0", "1"]);
        let sequential = enumerate_systems(
            &p,
            2,
            4,
            &EnumerateOptions {
                strategy: Strategy::GenerateDedup,
                jobs: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let parallel = enumerate_systems(
            &p,
            2,
            4,
            &EnumerateOptions {
                strategy: Strategy::GenerateDedup,
                jobs: 4,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(sequential, parallel);
    }

    #[test]
    fn infeasible_bounds_are_rejected() {
        let err = enumerate_systems(
            &particulars(&["0", "1", "2"]),
            5,
            100,
            &EnumerateOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, EnumerateError::InfeasibleBounds { .. }));
    }

    #[test]
    fn zero_bounds_are_rejected() {
        let err =
            enumerate_systems(&particulars(&["0"]), 0, 1, &EnumerateOptions::default())
                .unwrap_err();
        assert_eq!(err, EnumerateError::ZeroBounds);
    }

    #[test]
    fn diagonal_systems() {
        assert_eq!(
            diagonal_system(1).rows().iter().cloned().collect::<Vec<_>>(),
            vec![row(&["1"])]
        );
        let two = diagonal_system(2);
        assert!(two.contains(&row(&["1", "0"])));
        assert!(two.contains(&row(&["0", "1"])));
        assert_eq!(two.row_count(), 2);
    }

    #[test]
    fn diagonal_abstractions_keep_all_columns() {
        for k in 1..=6 {
            let canonical = canonical_form(&diagonal_system(k));
            assert_eq!(canonical.width(), k);
            assert_eq!(canonical.row_count(), k);
        }
    }

    #[test]
    fn raw_blueprint_count_dominates_the_quotient_count() {
        let p = particulars(&["0", "1"]);
        for n in 1..=2 {
            let raw = count_raw_blueprints(&p, n).unwrap();
            let quotient = count_systems(&p, n, &EnumerateOptions::default()).unwrap();
            assert!(raw >= quotient, "n={n}: raw {raw} < quotient {quotient}");
        }
        // width 1 has no column permutations, so the counts coincide
        assert_eq!(count_raw_blueprints(&p, 1).unwrap(), 3);
    }
}
