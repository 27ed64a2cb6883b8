//! The cutting-time number system E with its add-and-carry map.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::cutting::CuttingTimes;
use crate::error::{Error, Result};
use crate::map::{KneadingMap, Tail};
use crate::report::{CheckReport, Witness};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeKind {
    /// Finitely many nonzero entries; an integer.
    Finite,
    /// Entries at indices >= depth are unspecified.
    Truncated { depth: usize },
}

/// Element of E given by the increasing positions of its nonzero entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ECode {
    indices: Vec<usize>,
    kind: CodeKind,
}

impl ECode {
    pub fn zero() -> Self {
        ECode {
            indices: Vec::new(),
            kind: CodeKind::Finite,
        }
    }

    pub fn finite(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        ECode {
            indices,
            kind: CodeKind::Finite,
        }
    }

    /// Keeps only the indices below `depth`.
    pub fn truncated(mut indices: Vec<usize>, depth: usize) -> Self {
        indices.sort_unstable();
        indices.dedup();
        indices.retain(|&i| i < depth);
        ECode {
            indices,
            kind: CodeKind::Truncated { depth },
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    pub fn depth(&self) -> Option<usize> {
        match self.kind {
            CodeKind::Finite => None,
            CodeKind::Truncated { depth } => Some(depth),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.kind == CodeKind::Finite
    }

    fn with_indices(&self, indices: Vec<usize>) -> ECode {
        ECode {
            indices,
            kind: self.kind,
        }
    }

    /// e_i = 1 forces e_j = 0 for Q(i+1) <= j < i, on the known window.
    pub fn satisfies_rule(&self, q: &KneadingMap) -> bool {
        self.indices
            .windows(2)
            .all(|w| w[0] < q.q(w[1] + 1))
    }

    /// Partial sums e_0 S_0 + ... + e_j S_j < S_{j+1} for every j in range.
    /// Between two nonzero entries the sum is constant and S_{j+1} grows, so
    /// checking at the nonzero positions suffices.
    pub fn satisfies_partial_sums(&self, s: &CuttingTimes) -> bool {
        let mut sum = BigUint::zero();
        for &i in &self.indices {
            if i + 1 >= s.len() {
                return false;
            }
            sum += s.get(i);
            if &sum >= s.get(i + 1) {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for ECode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.indices.is_empty() {
            write!(f, "-")?;
        } else {
            for (i, v) in self.indices.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
        }
        if let CodeKind::Truncated { depth } = self.kind {
            write!(f, "@{depth}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for ECode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (body, depth) = match s.split_once('@') {
            Some((b, d)) => (
                b,
                Some(
                    d.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad depth {d:?}")))?,
                ),
            ),
            None => (s, None),
        };
        let body = body.trim();
        let mut indices = Vec::new();
        if body != "-" && !body.is_empty() {
            for part in body.split(',') {
                indices.push(
                    part.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad index {part:?}")))?,
                );
            }
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse("indices must be strictly increasing".into()));
        }
        match depth {
            Some(d) => {
                if indices.iter().any(|&i| i >= d) {
                    return Err(Error::Parse(format!("index beyond depth {d}")));
                }
                Ok(ECode::truncated(indices, d))
            }
            None => Ok(ECode::finite(indices)),
        }
    }
}

/// Greedy coding of n by cutting times.
pub fn encode(n: &BigUint, s: &CuttingTimes) -> Result<ECode> {
    let last = s.len() - 1;
    if n >= s.get(last) {
        return Err(Error::InsufficientCuttingTimes(last));
    }
    let mut rem = n.clone();
    let mut indices = Vec::new();
    let mut j = last;
    while !rem.is_zero() {
        // S is strictly increasing, so the largest S_j <= rem is a binary search away
        j = s.values()[..=j].partition_point(|v| v <= &rem) - 1;
        rem -= s.get(j);
        indices.push(j);
    }
    indices.reverse();
    Ok(ECode::finite(indices))
}

pub fn encode_u64(n: u64, s: &CuttingTimes) -> Result<ECode> {
    encode(&BigUint::from(n), s)
}

pub fn decode(e: &ECode, s: &CuttingTimes) -> Result<BigUint> {
    if !e.is_finite() {
        return Err(Error::NotFinite);
    }
    let mut sum = BigUint::zero();
    for &i in &e.indices {
        if i >= s.len() {
            return Err(Error::InsufficientCuttingTimes(s.len() - 1));
        }
        sum += s.get(i);
    }
    Ok(sum)
}

/// α: add S_0 and carry. For truncated codes, CarryOverflow when the carry
/// might continue past the window.
pub fn add_one(e: &ECode, q: &KneadingMap) -> Result<ECode> {
    let mut pos = 0usize;
    let mut consumed = 0usize;
    while consumed < e.indices.len() && q.q(e.indices[consumed] + 1) == pos {
        pos = e.indices[consumed] + 1;
        consumed += 1;
    }
    if let CodeKind::Truncated { depth } = e.kind {
        if consumed == e.indices.len() {
            // the next nonzero entry is unknown; it must not combine with pos
            let safe = pos < depth
                && match q.max_preimage(pos) {
                    Some(b) => b <= depth,
                    None => false,
                };
            if !safe {
                return Err(Error::CarryOverflow { depth });
            }
        }
    }
    let mut out = Vec::with_capacity(e.indices.len() - consumed + 1);
    out.push(pos);
    out.extend_from_slice(&e.indices[consumed..]);
    Ok(e.with_indices(out))
}

/// Inverse of α away from ⟨0⟩.
pub fn predecessor(e: &ECode, q: &KneadingMap) -> Result<ECode> {
    let Some(&p) = e.indices.first() else {
        return match e.kind {
            CodeKind::Finite => Err(Error::NoPredecessor),
            CodeKind::Truncated { depth } => Err(Error::CarryOverflow { depth }),
        };
    };
    let mut low = Vec::new();
    if p > 0 {
        let mut x = p;
        loop {
            low.push(x - 1);
            let v = q.q(x);
            if v == 0 {
                break;
            }
            x = v;
        }
        low.reverse();
    }
    low.extend_from_slice(&e.indices[1..]);
    Ok(e.with_indices(low))
}

/// A backward Q-chain: Q(q_0+1) = 0 and Q(q_j+1) = q_{j-1}+1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreimageChain {
    pub q0: usize,
    /// The chain's indices below `depth_verified`.
    pub indices: Vec<usize>,
    pub depth_verified: usize,
}

impl PreimageChain {
    pub fn as_code(&self) -> ECode {
        ECode::truncated(self.indices.clone(), self.depth_verified)
    }
}

/// Chains q_0 < q_1 < ... that reach the window edge. Every branch of the
/// backward relation is followed; chains that agree below depth/2 are reported
/// once, since branches splitting later cannot be told apart yet.
pub fn zero_preimages(q: &KneadingMap, depth: usize) -> Vec<PreimageChain> {
    const PATH_LIMIT: usize = 1 << 16;
    // v_j = q_j + 1 with Q(v_j) = v_{j-1}, v_{-1} = 0
    let mut alive: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<(usize, Vec<usize>)> = Vec::new();
    for v in q.preimages_upto(0, depth) {
        stack.push((v, vec![v - 1]));
    }
    // a q_0 beyond the window would leave it empty; those are not chains in view
    while let Some((v, path)) = stack.pop() {
        if alive.len() > PATH_LIMIT {
            break;
        }
        let beyond = match q.max_preimage(v) {
            None => true,
            Some(b) => b > depth,
        };
        let children = q.preimages_upto(v, depth);
        if beyond {
            alive.push(path.clone());
        }
        for c in children {
            let mut p = path.clone();
            p.push(c - 1);
            stack.push((c, p));
        }
    }
    let half = depth / 2;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    alive.sort();
    for path in alive {
        let key: Vec<usize> = path.iter().copied().filter(|&i| i < half).collect();
        if seen.insert(key) {
            out.push(PreimageChain {
                q0: path[0],
                indices: path,
                depth_verified: depth,
            });
        }
    }
    out
}

/// Whether {l > k : Q^n(l) = k for some n} is finite; `None` if the search
/// runs past `cap` without a decision.
fn preimage_tree_finite(q: &KneadingMap, k: usize, cap: usize) -> Option<bool> {
    let mut queue = VecDeque::from([k]);
    while let Some(v) = queue.pop_front() {
        if reaches_infinite_chain(q, v) {
            return Some(false);
        }
        if v > cap {
            return None;
        }
        let top = q.max_preimage(v)?;
        for l in (v + 1)..=top {
            if q.q(l) == v {
                queue.push_back(l);
            }
        }
    }
    Some(true)
}

/// Nodes known to root an infinite backward chain under the tail rule.
fn reaches_infinite_chain(q: &KneadingMap, v: usize) -> bool {
    let n0 = q.prefix().len();
    match *q.tail() {
        // v, v+d, v+2d, ... once past the prefix
        Tail::LinearOffset(_) => v >= n0,
        // a special index s feeds s+4 and s+2 -> s+5, and one of these walks
        // by steps of two onto the next special index
        Tail::Sparse {
            threshold,
            start,
            gap,
        } => v >= start && (v - start).is_multiple_of(gap) && v >= threshold + 4,
        Tail::Constant(c) => v == c,
        Tail::Cascade { .. } => q.max_preimage(v).is_none(),
    }
}

/// Lemma-style invertibility test: Q(k) → ∞, and indices k_i such that every
/// k > k_i has Q(k) >= k_i or only finitely many l > k with Q^n(l) = k.
pub fn check_invertibility_hypotheses(q: &KneadingMap, horizon: usize) -> CheckReport {
    let name = "invertibility";
    if !q.tends_to_infinity() {
        // a tail value that recurs forever
        let n0 = q.prefix().len();
        let k = horizon.max(n0 + 1);
        let mut w = k;
        let floor = (n0 + 1..=k).map(|l| q.q(l)).min().unwrap_or(0);
        for l in (n0 + 1..=k).rev() {
            if q.q(l) == floor {
                w = l;
                break;
            }
        }
        return CheckReport::fails(name, horizon, Witness::new().with("k", w).with("q", q.q(w)))
            .with_detail("Q(k) does not tend to infinity");
    }
    let c = q.max_drop().unwrap_or(0);
    let n0 = q.prefix().len();
    let cap = 4 * horizon + 64;
    let candidate = |m: usize| -> std::result::Result<(), Option<usize>> {
        // past the prefix and past m + C, Q(k) >= k - C > m
        let top = horizon.min((m + c).max(n0));
        let mut undecided = false;
        for k in (m + 1)..=top {
            if q.q(k) >= m {
                continue;
            }
            match preimage_tree_finite(q, k, cap) {
                Some(true) => {}
                Some(false) => return Err(Some(k)),
                None => undecided = true,
            }
        }
        if undecided {
            Err(None)
        } else {
            Ok(())
        }
    };
    let lo = horizon / 2 + 1;
    let hi = horizon.saturating_sub(c);
    let mut valid = Vec::new();
    let mut last_bad = None;
    for m in lo..=hi {
        match candidate(m) {
            Ok(()) => valid.push(m),
            Err(Some(k)) => last_bad = Some((m, k)),
            Err(None) => {}
        }
    }
    if !valid.is_empty() {
        let mut found = Witness::new();
        for (i, m) in valid.iter().take(4).enumerate() {
            found = found.with(&format!("k_{i}"), *m);
        }
        return CheckReport::holds(name, horizon)
            .with_found(found)
            .with_detail(format!("{} valid indices in ({}, {}]", valid.len(), lo - 1, hi));
    }
    // uniform tails repeat the same obstruction at every candidate
    if let (Tail::LinearOffset(_), Some((m, k))) = (q.tail(), last_bad) {
        if m >= n0 {
            return CheckReport::fails(name, horizon, Witness::new().with("k_i", m).with("k", k))
                .with_detail("Q(k) < k_i with an infinite backward chain at every candidate");
        }
    }
    CheckReport::limited(name, horizon, "no valid index found in the upper half of the window")
}

/// β(n) = n - S_{k-1} for n in (S_{k-1}, S_k], with S_{-1} = 0.
pub fn beta(n: usize, s: &CuttingTimes) -> Result<usize> {
    if n == 0 {
        return Err(Error::IndexOutOfRange { index: 0, available: 1 });
    }
    if n == 1 {
        return Ok(1);
    }
    let k = s.index_below(n)?;
    Ok(n - s.at(k))
}

/// b(i) = sum of e_j S_j over j <= q_i, for i < count.
pub fn nest_indices(e: &ECode, count: usize, s: &CuttingTimes) -> Result<Vec<BigUint>> {
    if e.indices.len() < count {
        return Err(Error::NotEnoughIndices {
            available: e.indices.len(),
            requested: count,
        });
    }
    let mut out = Vec::with_capacity(count);
    let mut sum = BigUint::zero();
    for &i in &e.indices[..count] {
        if i >= s.len() {
            return Err(Error::InsufficientCuttingTimes(s.len() - 1));
        }
        sum += s.get(i);
        out.push(sum.clone());
    }
    Ok(out)
}
