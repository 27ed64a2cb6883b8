#![allow(dead_code)]

use kneadlab::config::Config;
use kneadlab::KneadingMap;

pub fn family(spec: &str) -> KneadingMap {
    KneadingMap::parse_with(spec, Config::builtin()).unwrap()
}

/// Every family the crate ships, by CLI name.
pub const SHIPPED: &[&str] = &[
    "const:0",
    "double",
    "offset:2",
    "offset:3",
    "offset:4",
    "example1",
    "section5:k1=3",
    "section5:k1=4",
    "section5:k1=5",
];

/// Families with a tent-map realization (everything but the slope-1 limit).
pub const REALIZABLE: &[&str] = &[
    "const:0",
    "offset:2",
    "offset:3",
    "example1",
    "section5:k1=3",
    "section5:k1=4",
];

/// Cascade rule written out directly: k_i - k_{i-1} = i - 1, Q(k_i) = k_i - 1
/// for i >= 3 and Q(k_i + j) = Q(k_{i-1} + j - 1) otherwise.
pub fn cascade_oracle(k1: usize, prefix: &[usize], upto: usize) -> Vec<usize> {
    let mut ks = vec![0, k1];
    while *ks.last().unwrap() <= upto {
        let i = ks.len() - 1;
        ks.push(ks[i] + i);
    }
    let mut q = vec![0usize; upto + 1];
    q[1..=prefix.len()].copy_from_slice(prefix);
    for k in (prefix.len() + 1)..=upto {
        let i = (1..ks.len()).rev().find(|&i| ks[i] <= k).unwrap();
        let j = k - ks[i];
        q[k] = if j == 0 { ks[i] - 1 } else { q[ks[i - 1] + j - 1] };
    }
    q
}

/// The sparse rule written out: k - 4 after a special index, k - 3 one step later,
/// k - 2 otherwise, for k beyond the prefix.
pub fn sparse_oracle(prefix: &[usize], start: usize, gap: usize, upto: usize) -> Vec<usize> {
    let special: Vec<usize> = (0..).map(|m| start + m * gap).take_while(|&k| k <= upto).collect();
    let mut q = vec![0usize; upto + 1];
    q[1..=prefix.len()].copy_from_slice(prefix);
    for (k, slot) in q.iter_mut().enumerate().skip(prefix.len() + 1) {
        *slot = if k >= 4 && special.contains(&(k - 4)) {
            k - 4
        } else if k >= 5 && special.contains(&(k - 5)) {
            k - 3
        } else {
            k - 2
        };
    }
    q
}
