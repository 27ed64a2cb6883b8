mod common;

use common::family;
use kneadlab::checks::{
    check_admissible, check_renor_avoidance, check_stop_carry, check_strong_admissible,
    is_renormalizable_at,
};
use kneadlab::report::Verdict;
use kneadlab::KneadingMap;
use proptest::prelude::*;

/// Plain lexicographic comparison of long windows. Beyond the prefix both
/// sequences are constant, so a window of 64 decides every case.
fn brute_admissible(q: &KneadingMap, horizon: usize) -> Option<usize> {
    (1..=horizon).find(|&k| {
        let m = q.iterate(k, 2);
        let a: Vec<usize> = (1..=64).map(|j| q.q(k + j)).collect();
        let b: Vec<usize> = (1..=64).map(|j| q.q(m + j)).collect();
        a < b
    })
}

fn all_tables(n0: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for i in 0..n0 {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=i).map(move |v| {
                    let mut p = p.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

#[test]
fn admissible_matches_brute_force_on_small_tables() {
    let mut checked = 0;
    for n0 in 0..=6 {
        for prefix in all_tables(n0) {
            let q = KneadingMap::table(prefix.clone()).unwrap();
            let r = check_admissible(&q, 12);
            match brute_admissible(&q, 12) {
                Some(k) => {
                    assert_eq!(r.verdict, Verdict::Fails, "{prefix:?}");
                    assert_eq!(r.witness.unwrap().get("k"), Some(k as i64), "{prefix:?}");
                }
                None => assert_eq!(r.verdict, Verdict::Holds, "{prefix:?}"),
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 1 + 1 + 2 + 6 + 24 + 120 + 720);
}

#[test]
fn small_table_golden() {
    let q = family("table:[0,1,0,3]");
    assert_eq!(brute_admissible(&q, 10), Some(4));
    let r = check_admissible(&q, 10);
    assert_eq!(r.verdict, Verdict::Fails);
    let w = r.witness.unwrap();
    assert_eq!((w.get("k"), w.get("j")), (Some(4), Some(2)));
}

fn q_chain(q: &KneadingMap, x: usize) -> Vec<usize> {
    let mut v = vec![x];
    while *v.last().unwrap() != 0 {
        v.push(q.q(*v.last().unwrap()));
    }
    v
}

/// Exhaustive pair enumeration for the stop-carry condition, counting only
/// iterates that stay positive.
fn brute_stop_carry(q: &KneadingMap, horizon: usize) -> bool {
    for s in 1..=horizon {
        for t in (s + 1)..=horizon {
            if q.q(s + 1) != q.q(t + 1) {
                continue;
            }
            let (a, b) = (q_chain(q, s), q_chain(q, t));
            for n in 0..a.len() - 1 {
                for m in 0..b.len() - 1 {
                    if a[n + 1] >= 1 && a[n] != b[m] && a[n + 1] == b[m + 1] {
                        return false;
                    }
                }
            }
        }
    }
    true
}

#[test]
fn stop_carry_goldens() {
    let fib = family("offset:2");
    assert!(brute_stop_carry(&fib, 40));
    assert_eq!(check_stop_carry(&fib, 40).verdict, Verdict::Holds);

    let s5 = family("section5:k1=3");
    assert!(!brute_stop_carry(&s5, 17));
    let r = check_stop_carry(&s5, 17);
    assert_eq!(r.verdict, Verdict::Fails);
    let w = r.witness.unwrap();
    assert_eq!((w.get("s"), w.get("s_tilde")), (Some(4), Some(7)));

    let e1 = family("example1");
    assert!(brute_stop_carry(&e1, 200));
    assert_eq!(check_stop_carry(&e1, 200).verdict, Verdict::Holds);
}

#[test]
fn strong_admissibility_examples() {
    assert!(check_strong_admissible(&family("offset:2"), 100, 6).is_holds());
    let r = check_strong_admissible(&family("const:0"), 50, 1);
    assert_eq!(r.witness.unwrap().get("k"), Some(1));
    let e1 = family("example1");
    assert!(check_strong_admissible(&e1, 200, 12).is_holds());
    assert!(check_strong_admissible(&e1, 200, 11).is_fails());
    // the cascade family can never satisfy it at k = 1
    assert!(check_strong_admissible(&family("section5:k1=3"), 200, 1).is_fails());
}

#[test]
fn renormalization() {
    let dbl = family("double");
    for k in 1..40 {
        assert!(is_renormalizable_at(&dbl, k, 100).is_holds(), "k={k}");
    }
    let e1 = family("example1");
    for k in 12..=200 {
        assert!(is_renormalizable_at(&e1, k, 200).is_fails(), "k={k}");
    }
    assert!(check_renor_avoidance(&e1, 12, 200).is_holds());
    for k1 in [3, 4, 5] {
        let q = family(&format!("section5:k1={k1}"));
        assert!(check_renor_avoidance(&q, k1 + 1, 200).is_holds(), "k1={k1}");
    }
}

/// Direct reading of the definition on a long window.
fn brute_renormalizable(q: &KneadingMap, k: usize) -> bool {
    q.q(k + 1) == k && (1..=400).all(|j| q.q(k + j) >= k)
}

proptest! {
    #[test]
    fn renormalizable_matches_window(prefix in proptest::collection::vec(0usize..8, 0..8), d in 1usize..4, k in 1usize..30) {
        let prefix: Vec<usize> = prefix.iter().enumerate().map(|(i, &v)| v.min(i)).collect();
        let q = KneadingMap::new(prefix, kneadlab::Tail::LinearOffset(d)).unwrap();
        prop_assert_eq!(is_renormalizable_at(&q, k, 50).is_holds(), brute_renormalizable(&q, k));
    }

    #[test]
    fn admissible_verdict_is_stable_in_horizon(prefix in proptest::collection::vec(0usize..8, 0..8)) {
        let prefix: Vec<usize> = prefix.iter().enumerate().map(|(i, &v)| v.min(i)).collect();
        let q = KneadingMap::table(prefix).unwrap();
        let short = check_admissible(&q, 12);
        let long = check_admissible(&q, 40);
        if short.is_fails() {
            prop_assert!(long.is_fails());
        }
    }
}
