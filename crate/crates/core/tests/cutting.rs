mod common;

use common::{cascade_oracle, family, sparse_oracle, SHIPPED};
use kneadlab::certify::identity_m;
use kneadlab::cutting::{cutting_times, cutting_times_beyond};
use kneadlab::KneadingMap;
use num_bigint::BigUint;
use proptest::prelude::*;

#[test]
fn offset_two_gives_fibonacci() {
    let s = cutting_times(&family("offset:2"), 90).unwrap();
    let (mut a, mut b) = (1u128, 2u128);
    for k in 0..=90 {
        assert_eq!(s.get(k), &BigUint::from(a), "S_{k}");
        (a, b) = (b, a + b);
    }
}

#[test]
fn doubling_and_constant_zero() {
    let s = cutting_times(&family("double"), 60).unwrap();
    let z = cutting_times(&family("const:0"), 60).unwrap();
    for k in 0..=60 {
        assert_eq!(s.get(k), &(BigUint::from(1u8) << k));
        assert_eq!(z.get(k), &BigUint::from(k as u64 + 1));
    }
}

#[test]
fn recursion_and_doubling_bound_on_shipped_families() {
    for name in SHIPPED {
        let q = family(name);
        let s = cutting_times(&q, 300).unwrap();
        for k in 1..=300 {
            assert_eq!(s.get(k), &(s.get(k - 1) + s.get(q.q(k))), "{name} k={k}");
            assert!(s.get(k) <= &(s.get(k - 1) * 2u8), "{name} k={k}");
        }
    }
}

#[test]
fn cascade_table_matches_rule() {
    for k1 in [3usize, 4, 5] {
        let q = family(&format!("section5:k1={k1}"));
        let oracle = cascade_oracle(k1, q.prefix(), 3000);
        for (k, &want) in oracle.iter().enumerate().skip(1) {
            assert_eq!(q.q(k), want, "k1={k1} k={k}");
        }
    }
}

#[test]
fn sparse_table_matches_rule() {
    let q = family("example1");
    let oracle = sparse_oracle(q.prefix(), 14, 11, 2000);
    for (k, &want) in oracle.iter().enumerate().skip(1) {
        assert_eq!(q.q(k), want, "k={k}");
    }
}

#[test]
fn identity_m_exact_up_to_eight() {
    for k1 in [3usize, 4, 5] {
        let q = family(&format!("section5:k1={k1}"));
        let s = cutting_times(&q, k1 + 60).unwrap();
        for i in 2..=8 {
            assert!(identity_m(&q, &s, i).unwrap(), "k1={k1} i={i}");
        }
    }
}

#[test]
fn beyond_covers_target() {
    let q = family("offset:3");
    let s = cutting_times_beyond(&q, 10_000).unwrap();
    assert!(s.values().last().unwrap() > &BigUint::from(10_000u32));
}

fn arb_map() -> impl Strategy<Value = KneadingMap> {
    (1usize..12, 1usize..5)
        .prop_flat_map(|(n0, d)| {
            let cells: Vec<_> = (0..n0).map(|i| 0..=i).collect();
            (cells, Just(d))
        })
        .prop_map(|(prefix, d)| {
            KneadingMap::new(prefix, kneadlab::Tail::LinearOffset(d)).unwrap()
        })
}

proptest! {
    #[test]
    fn cutting_laws_hold(q in arb_map()) {
        let s = cutting_times(&q, 120).unwrap();
        for k in 1..=120 {
            prop_assert_eq!(s.get(k), &(s.get(k - 1) + s.get(q.q(k))));
            prop_assert!(s.get(k) > s.get(k - 1));
            prop_assert!(s.get(k) <= &(s.get(k - 1) * 2u8));
        }
    }
}
