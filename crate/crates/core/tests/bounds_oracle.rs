//! Bounds checked against brute-force oracles that share no code with the
//! library: bit counting by repeated division, family membership by
//! enumerating exponent tuples, logarithms by repeated halving.

use std::collections::BTreeMap;

use varsample::bounds::*;
use varsample::linalg::Field;
use varsample::varieties::dim_sparse;

fn ones_by_division(mut n: u64) -> u32 {
    let mut c = 0;
    while n > 0 {
        c += (n % 2) as u32;
        n /= 2;
    }
    c
}

fn floor_log2(mut n: usize) -> i64 {
    let mut l = -1;
    while n > 0 {
        n /= 2;
        l += 1;
    }
    l
}

/// Every `d <= max` in one of the four complex families, with its value.
/// Earlier entries win, though the families turn out to be disjoint.
fn complex_families(max: usize) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    let p = |e: u32| 1usize << e;
    let mut put = |d: usize, v: usize| {
        if d <= max {
            assert!(out.insert(d, v).is_none_or(|old| old == v), "families disagree at d = {d}");
        }
    };
    for k in 2..14 {
        put(p(k) + 1, 4 * (p(k) + 1) - 4);
        put(p(k) + 2, 4 * (p(k) + 2) - 6);
    }
    for k in 1..14 {
        for j in 1..k {
            let d = p(k) + p(j) + 1;
            put(d, 4 * d - 5);
            for l in 1..j {
                let d = p(k) + p(j) + p(l) + 1;
                put(d, 4 * d - 6);
            }
        }
    }
    out
}

#[test]
fn alpha_matches_division_count() {
    for n in 0..=1_000_000u64 {
        assert_eq!(alpha(n), ones_by_division(n), "n = {n}");
    }
    assert_eq!(alpha(u64::MAX), 64);
    assert_eq!(BinaryProfile::new(0b1011).alpha, 3);
}

#[test]
fn complex_families_match_enumeration() {
    let oracle = complex_families(5000);
    for d in 2..=5000 {
        let got = complex_pr_family(d).map(|f| f.0);
        assert_eq!(got, oracle.get(&d).copied(), "d = {d}");
        if d >= 5 {
            let rep = complex_pr_bounds(d).unwrap();
            assert_eq!(rep.exact, oracle.get(&d).copied(), "d = {d}");
            assert!(rep.is_consistent(), "d = {d}: {rep:?}");
        }
    }
}

#[test]
fn complex_interval_matches_formula() {
    for d in 5..=2000usize {
        let a = ones_by_division((d - 1) as u64) as usize;
        let eps = if d % 2 == 1 && a % 4 == 3 {
            2
        } else if d % 2 == 1 && a % 4 == 2 {
            1
        } else {
            0
        };
        let delta = usize::from(d % 2 == 0);
        let rep = complex_pr_bounds(d).unwrap();
        assert_eq!((rep.lower, rep.upper), (4 * d - 2 - 2 * a + eps, 4 * d - 3 - a - delta), "d = {d}");
    }
}

#[test]
fn low_rank_counts_are_differences_of_squares() {
    for d in 2..=64 {
        for r in 1..=d / 2 {
            let expected = d * d - (d - 2 * r) * (d - 2 * r);
            let c = lowrank_minimal(d, r, Field::Complex).unwrap();
            assert_eq!(c.exact, Some(expected), "complex d = {d}, r = {r}");
            let re = lowrank_minimal(d, r, Field::Real).unwrap();
            assert_eq!(re.upper, expected);
            let power = (0..7).any(|k| d - r == 1 << k);
            assert_eq!(re.exact.is_some(), power || d == 2 * r + 1, "real d = {d}, r = {r}");
            assert!(re.is_consistent());
        }
    }
}

#[test]
fn sparse_exact_is_difference_dimension() {
    for d in 1..=40 {
        for k in 0..=d / 2 {
            let rep = sparse_minimal(d, k).unwrap();
            assert_eq!(rep.exact, Some(dim_sparse(d, 2 * k).unwrap()), "d = {d}, k = {k}");
            assert_eq!(rep.exact, Some(2 * k));
        }
        assert!(sparse_minimal(d, d / 2 + 1).is_err());
    }
}

#[test]
fn real_phase_retrieval_against_oracle() {
    for d in 2..=4098usize {
        let rep = real_pr_bounds(d).unwrap();
        let upper = if d % 2 == 1 { 2 * d - 1 } else { 2 * d - 2 };
        assert_eq!(rep.upper, upper, "d = {d}");
        if d >= 5 {
            let di = d as i64;
            let lower = if d % 2 == 1 {
                2 * di - 6 * floor_log2(d - 1) + 6
            } else {
                2 * di - 6 * floor_log2(d - 2) + 4
            };
            assert_eq!(rep.lower as i64, lower.max(1), "d = {d}");
        }
        let pow = |n: usize| (1..13).any(|k| n == 1 << k);
        let exact = if pow(d - 1) {
            Some(2 * d - 1)
        } else if d >= 3 && pow(d - 2) {
            Some(2 * d - 2)
        } else {
            None
        };
        assert_eq!(rep.exact, exact, "d = {d}");
        assert!(rep.is_consistent(), "d = {d}: {rep:?}");
    }
}

#[test]
fn standard_phase_retrieval_is_consistent() {
    for d in 2..=1000 {
        let rep = standard_pr_facts(d).unwrap();
        assert!(rep.is_consistent(), "d = {d}: {rep:?}");
        assert_eq!(rep.upper, 4 * d - 4);
    }
    assert_eq!(standard_pr_facts(4).unwrap().achievable, Some(11));
}

#[test]
fn generic_codimension() {
    for dim in 1..50 {
        for m in dim..dim + 10 {
            assert_eq!(codim_bad_set(m, dim).unwrap(), m - dim + 1);
        }
        assert!(codim_bad_set(dim - 1, dim).is_err());
    }
}
