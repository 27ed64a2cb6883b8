//! Predicates on kneading maps, evaluated up to a finite horizon.

use crate::map::{KneadingMap, Tail};
use crate::report::{CheckReport, Witness};

enum LexOutcome {
    Greater,
    Less(usize),
    Tie,
}

/// Compares {Q(k+j)} against {Q(m+j)} for j = 1..=window.
fn compare_shifted(q: &KneadingMap, k: usize, m: usize, window: usize) -> LexOutcome {
    for j in 1..=window {
        let a = q.q(k + j);
        let b = q.q(m + j);
        if a > b {
            return LexOutcome::Greater;
        }
        if a < b {
            return LexOutcome::Less(j);
        }
    }
    LexOutcome::Tie
}

/// Whether two shifted sequences equal on a window stay equal forever.
fn tie_is_permanent(q: &KneadingMap, k: usize, m: usize, window: usize) -> bool {
    if k == m {
        return true;
    }
    match q.tail() {
        Tail::Constant(_) => {
            let n0 = q.prefix().len();
            k + window >= n0 && m + window >= n0
        }
        _ => false,
    }
}

/// The first j at which admissibility fails for this k, if it does within `window`.
pub fn admissibility_violation(q: &KneadingMap, k: usize, window: usize) -> Option<usize> {
    let m = q.iterate(k, 2);
    match compare_shifted(q, k, m, window) {
        LexOutcome::Less(j) => Some(j),
        _ => None,
    }
}

/// {Q(k+j)}_j ⪰ {Q(Q²(k)+j)}_j for every 1 <= k <= horizon, compared on windows
/// of length `horizon`.
pub fn check_admissible(q: &KneadingMap, horizon: usize) -> CheckReport {
    let name = "admis";
    let mut undecided = None;
    for k in 1..=horizon {
        let m = q.iterate(k, 2);
        match compare_shifted(q, k, m, horizon) {
            LexOutcome::Greater => {}
            LexOutcome::Less(j) => {
                return CheckReport::fails(name, horizon, Witness::new().with("k", k).with("j", j));
            }
            LexOutcome::Tie => {
                if !tie_is_permanent(q, k, m, horizon) && undecided.is_none() {
                    undecided = Some(k);
                }
            }
        }
    }
    match undecided {
        Some(k) => CheckReport::limited(
            name,
            horizon,
            format!("window exhausted with equality at k={k}"),
        ),
        None => CheckReport::holds(name, horizon),
    }
}

/// Q(k+1) > Q(Q²(k)+1) + 1 for from_k <= k <= horizon.
pub fn check_strong_admissible(q: &KneadingMap, horizon: usize, from_k: usize) -> CheckReport {
    let name = "strong_admis";
    for k in from_k.max(1)..=horizon {
        let lhs = q.q(k + 1);
        let rhs = q.q(q.iterate(k, 2) + 1) + 1;
        if lhs <= rhs {
            return CheckReport::fails(name, horizon, Witness::new().with("k", k));
        }
    }
    CheckReport::holds(name, horizon).with_detail(format!("from k={}", from_k.max(1)))
}

/// [x, Q(x), Q²(x), ...] down to the first 0.
fn q_orbit(q: &KneadingMap, x: usize) -> Vec<usize> {
    let mut v = vec![x];
    let mut cur = x;
    while cur != 0 {
        cur = q.q(cur);
        v.push(cur);
    }
    v
}

/// For s < s̃ <= horizon with Q(s+1) = Q(s̃+1): whenever Q^n(s) ≠ Q^ñ(s̃) also
/// Q^{n+1}(s) ≠ Q^{ñ+1}(s̃). Only iterates with Q^{n+1}(s) >= 1 are compared,
/// since every chain ends at the common value 0.
pub fn check_stop_carry(q: &KneadingMap, horizon: usize) -> CheckReport {
    let name = "stop_carry";
    let orbits: Vec<Vec<usize>> = (0..=horizon).map(|s| q_orbit(q, s)).collect();
    let mut pairs = 0usize;
    for s in 1..=horizon {
        for t in (s + 1)..=horizon {
            if q.q(s + 1) != q.q(t + 1) {
                continue;
            }
            pairs += 1;
            let a = &orbits[s];
            let b = &orbits[t];
            for n in 0..a.len() - 1 {
                let next = a[n + 1];
                if next == 0 {
                    break;
                }
                for m in 0..b.len() - 1 {
                    if b[m + 1] == next && a[n] != b[m] {
                        return CheckReport::fails(
                            name,
                            horizon,
                            Witness::new()
                                .with("s", s)
                                .with("s_tilde", t)
                                .with("n", n)
                                .with("n_tilde", m),
                        );
                    }
                }
            }
        }
    }
    CheckReport::holds(name, horizon).with_detail(format!("{pairs} colliding pairs examined"))
}

/// Whether Q(k+1) = k and Q(k+j) >= k for all j >= 1. The window j <= horizon
/// is scanned directly; beyond it the tail rule decides, and a violation found
/// past the window is reported with its index.
pub fn is_renormalizable_at(q: &KneadingMap, k: usize, horizon: usize) -> CheckReport {
    let name = "renor";
    let fail = |j: usize| CheckReport::fails(name, horizon, Witness::new().with("k", k).with("j", j));
    if k == 0 {
        return fail(0);
    }
    if q.q(k + 1) != k {
        return fail(1);
    }
    let n0 = q.prefix().len();
    // scan the window and whatever of the prefix lies beyond it
    let mut last = (k + horizon).max(n0 + 1);
    let extra = match q.tail() {
        Tail::Sparse { .. } => k + 4,
        Tail::LinearOffset(d) => k + d,
        Tail::Cascade { .. } => 0,
        Tail::Constant(_) => 0,
    };
    last = last.max(extra);
    for l in (k + 2)..=last {
        if q.q(l) < k {
            return fail(l - k);
        }
    }
    match *q.tail() {
        Tail::Constant(c) => {
            if c >= k {
                CheckReport::holds(name, horizon)
            } else {
                fail(last + 1 - k)
            }
        }
        // Q(l) >= l - C beyond the scanned range, which is past k + C
        Tail::LinearOffset(_) | Tail::Sparse { .. } => CheckReport::holds(name, horizon),
        Tail::Cascade { k1 } => {
            // each block takes the values Q(k_1), Q(k_2) and k_m - 1 for 3 <= m <= i
            let p = q.prefix();
            let floor = p[k1 - 1].min(p[k1]).min(crate::map::cascade_index(k1, 3) - 1);
            if floor >= k {
                return CheckReport::holds(name, horizon);
            }
            let mut l = last + 1;
            loop {
                if q.q(l) < k {
                    return fail(l - k);
                }
                l += 1;
            }
        }
    }
}

/// No k in [from_k, horizon] is renormalizable.
pub fn check_renor_avoidance(q: &KneadingMap, from_k: usize, horizon: usize) -> CheckReport {
    let name = "renor_avoidance";
    for k in from_k.max(1)..=horizon {
        if is_renormalizable_at(q, k, horizon).is_holds() {
            return CheckReport::fails(name, horizon, Witness::new().with("k", k));
        }
    }
    CheckReport::holds(name, horizon).with_detail(format!("from k={}", from_k.max(1)))
}
