//! Kneading maps: an explicit prefix Q(1..n0) followed by a tail rule.

use std::fmt;

use crate::config::Config;
use crate::error::{Error, Result};

/// Rule giving Q(k) for k beyond the explicit prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tail {
    /// Q(k) = c.
    Constant(usize),
    /// Q(k) = max(0, k - d).
    LinearOffset(usize),
    /// Q(k) = k-4 if k-4 is special, k-3 if k-5 is special, k-2 otherwise.
    /// Special indices are `start + m*gap`; the prefix covers k <= threshold.
    Sparse {
        threshold: usize,
        start: usize,
        gap: usize,
    },
    /// Indices k_1 = k1, k_{i+1} = k_i + i. Q(k_i) = k_i - 1 for i >= 3 and
    /// Q(k_i + j) = Q(k_{i-1} + j - 1) inside each block. The prefix covers k <= k1 + 1.
    Cascade { k1: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KneadingMap {
    prefix: Vec<usize>,
    tail: Tail,
}

impl KneadingMap {
    pub fn new(prefix: Vec<usize>, tail: Tail) -> Result<Self> {
        for (i, &v) in prefix.iter().enumerate() {
            if v > i {
                return Err(Error::InvalidKneadingMap(format!(
                    "Q({}) = {} violates Q(k) < k",
                    i + 1,
                    v
                )));
            }
        }
        let n0 = prefix.len();
        match tail {
            Tail::Constant(c) => {
                if c > n0 {
                    return Err(Error::InvalidKneadingMap(format!(
                        "Q({}) = {} violates Q(k) < k",
                        n0 + 1,
                        c
                    )));
                }
            }
            Tail::LinearOffset(d) => {
                if d == 0 {
                    return Err(Error::InvalidKneadingMap(
                        "offset 0 gives Q(k) = k, violating Q(k) < k".into(),
                    ));
                }
            }
            Tail::Sparse {
                threshold,
                start,
                gap,
            } => {
                if n0 != threshold {
                    return Err(Error::InvalidKneadingMap(format!(
                        "sparse tail needs a prefix of length K={threshold}, got {n0}"
                    )));
                }
                if threshold < 4 {
                    return Err(Error::InvalidKneadingMap("sparse tail needs K >= 4".into()));
                }
                if gap <= 10 {
                    return Err(Error::InvalidKneadingMap(format!(
                        "special indices need gaps > 10, got {gap}"
                    )));
                }
                if start == 0 {
                    return Err(Error::InvalidKneadingMap("special start must be positive".into()));
                }
            }
            Tail::Cascade { k1 } => {
                if k1 == 0 {
                    return Err(Error::InvalidKneadingMap("k1 must be positive".into()));
                }
                if n0 != k1 + 1 {
                    return Err(Error::InvalidKneadingMap(format!(
                        "cascade tail needs a prefix of length k1+1={}, got {n0}",
                        k1 + 1
                    )));
                }
            }
        }
        Ok(KneadingMap { prefix, tail })
    }

    /// Q ≡ c beyond an empty prefix (c must be 0).
    pub fn constant(c: usize) -> Result<Self> {
        Self::new(Vec::new(), Tail::Constant(c))
    }

    /// Q(k) = max(0, k - d).
    pub fn offset(d: usize) -> Result<Self> {
        Self::new(Vec::new(), Tail::LinearOffset(d))
    }

    /// Explicit table followed by Q ≡ 0.
    pub fn table(prefix: Vec<usize>) -> Result<Self> {
        Self::new(prefix, Tail::Constant(0))
    }

    pub fn sparse(prefix: Vec<usize>, start: usize, gap: usize) -> Result<Self> {
        let threshold = prefix.len();
        Self::new(
            prefix,
            Tail::Sparse {
                threshold,
                start,
                gap,
            },
        )
    }

    /// Cascade map with an explicit prefix Q(1..=k1+1). Rejects prefixes whose
    /// admissibility already fails at some k <= k1 + 3.
    pub fn cascade(k1: usize, prefix: Vec<usize>) -> Result<Self> {
        let map = Self::new(prefix, Tail::Cascade { k1 })?;
        let k2 = k1 + 1;
        for k in 1..=k2 + 2 {
            if crate::checks::admissibility_violation(&map, k, 4 * (k2 + 4)).is_some() {
                return Err(Error::InvalidPrefix {
                    predicate: "admis".into(),
                    index: k,
                });
            }
        }
        Ok(map)
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    /// Q(k), with the convention Q(0) = 0.
    pub fn q(&self, k: usize) -> usize {
        if k == 0 {
            return 0;
        }
        if k <= self.prefix.len() {
            return self.prefix[k - 1];
        }
        match self.tail {
            Tail::Constant(c) => c,
            Tail::LinearOffset(d) => k.saturating_sub(d),
            Tail::Sparse { start, gap, .. } => {
                let special = |x: usize| x >= start && (x - start).is_multiple_of(gap);
                if k >= 4 && special(k - 4) {
                    k - 4
                } else if k >= 5 && special(k - 5) {
                    k - 3
                } else {
                    k - 2
                }
            }
            Tail::Cascade { k1 } => {
                let (i, j) = cascade_block(k1, k);
                let base = i - j;
                let kb = cascade_index(k1, base);
                if base >= 3 {
                    kb - 1
                } else {
                    self.prefix[kb - 1]
                }
            }
        }
    }

    /// Q^n(k).
    pub fn iterate(&self, k: usize, n: usize) -> usize {
        let mut x = k;
        for _ in 0..n {
            if x == 0 {
                break;
            }
            x = self.q(x);
        }
        x
    }

    /// First k handled by the tail rule.
    pub fn tail_start(&self) -> usize {
        self.prefix.len() + 1
    }

    /// Whether Q(k) tends to infinity, decided from the tail rule.
    pub fn tends_to_infinity(&self) -> bool {
        matches!(self.tail, Tail::LinearOffset(_) | Tail::Sparse { .. })
    }

    /// C with Q(k) >= k - C for every tail index k, when one exists.
    pub fn max_drop(&self) -> Option<usize> {
        match self.tail {
            Tail::LinearOffset(d) => Some(d),
            Tail::Sparse { .. } => Some(4),
            _ => None,
        }
    }

    /// Largest l with Q(l) = v, `None` when infinitely many l map to v.
    /// Returns `Some(0)` when v has no preimage at all.
    pub fn max_preimage(&self, v: usize) -> Option<usize> {
        let n0 = self.prefix.len();
        let bound = match self.tail {
            Tail::Constant(c) => {
                if v == c {
                    return None;
                }
                n0
            }
            Tail::LinearOffset(d) => n0.max(v + d),
            Tail::Sparse { .. } => n0.max(v + 4),
            Tail::Cascade { k1 } => {
                if self.cascade_value_recurs(k1, v) {
                    return None;
                }
                n0
            }
        };
        let mut best = 0;
        for l in (v + 1)..=bound {
            if self.q(l) == v {
                best = l;
            }
        }
        Some(best)
    }

    /// Every l with Q(l) = v and l <= limit.
    pub fn preimages_upto(&self, v: usize, limit: usize) -> Vec<usize> {
        let top = match self.max_preimage(v) {
            Some(b) => b.min(limit),
            None => limit,
        };
        ((v + 1)..=top).filter(|&l| self.q(l) == v).collect()
    }

    fn cascade_value_recurs(&self, k1: usize, v: usize) -> bool {
        if v == self.prefix[k1 - 1] || v == self.prefix[k1] {
            return true;
        }
        let mut i = 3;
        loop {
            let ki = cascade_index(k1, i);
            if ki - 1 == v {
                return true;
            }
            if ki - 1 > v {
                return false;
            }
            i += 1;
        }
    }

    /// The special index sequence of the tail, if it has one.
    pub fn special_indices(&self, upto: usize) -> Vec<usize> {
        match self.tail {
            Tail::Cascade { k1 } => (1..)
                .map(|i| cascade_index(k1, i))
                .take_while(|&k| k <= upto)
                .collect(),
            Tail::Sparse { start, gap, .. } => {
                (0..).map(|m| start + m * gap).take_while(|&k| k <= upto).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Q(1..=n).
    pub fn table_upto(&self, n: usize) -> Vec<usize> {
        (1..=n).map(|k| self.q(k)).collect()
    }
}

/// k_i = k1 + (i-1)i/2 for i >= 1.
pub fn cascade_index(k1: usize, i: usize) -> usize {
    assert!(i >= 1);
    k1 + (i - 1) * i / 2
}

/// For k >= k1, the block i with k_i <= k < k_{i+1}, and j = k - k_i.
fn cascade_block(k1: usize, k: usize) -> (usize, usize) {
    let mut i = 1;
    while cascade_index(k1, i + 1) <= k {
        i += 1;
    }
    (i, k - cascade_index(k1, i))
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tail::Constant(c) => write!(f, "const:{c}"),
            Tail::LinearOffset(d) => write!(f, "offset:{d}"),
            Tail::Sparse {
                threshold,
                start,
                gap,
            } => write!(f, "example1:K={threshold},ks={start}+{gap}"),
            Tail::Cascade { k1 } => write!(f, "section5:k1={k1}"),
        }
    }
}

impl fmt::Display for KneadingMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "prefix=[")?;
        for (i, v) in self.prefix.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "];tail={}", self.tail)
    }
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| Error::Parse(format!("bad {what}: {s:?}")))
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    let inner = s
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("expected [..], got {s:?}")))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner.split(',').map(|x| parse_usize(x, "table entry")).collect()
}

/// Splits `a=1,b=[1,2],c=3` at top-level commas.
fn split_params(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut last = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(&s[last..i]);
                last = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[last..]);
    out.into_iter().filter(|p| !p.trim().is_empty()).collect()
}

fn parse_sparse_params(params: &str, cfg: &Config) -> Result<(usize, usize, usize, Option<Vec<usize>>)> {
    let d = &cfg.example1;
    let (mut k, mut start, mut gap, mut prefix) = (d.threshold, d.start, d.gap, None);
    for p in split_params(params) {
        let (key, val) = p
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got {p:?}")))?;
        match key.trim() {
            "K" => k = parse_usize(val, "K")?,
            "ks" => {
                let (a, b) = val
                    .split_once('+')
                    .ok_or_else(|| Error::Parse(format!("ks must be start+gap, got {val:?}")))?;
                start = parse_usize(a, "ks start")?;
                gap = parse_usize(b, "ks gap")?;
            }
            "prefix" => prefix = Some(parse_list(val)?),
            other => return Err(Error::Parse(format!("unknown example1 parameter {other:?}"))),
        }
    }
    Ok((k, start, gap, prefix))
}

fn parse_cascade_params(params: &str) -> Result<(usize, Option<Vec<usize>>)> {
    let mut k1 = None;
    let mut prefix = None;
    for p in split_params(params) {
        let (key, val) = p
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got {p:?}")))?;
        match key.trim() {
            "k1" => k1 = Some(parse_usize(val, "k1")?),
            "prefix" => prefix = Some(parse_list(val)?),
            other => return Err(Error::Parse(format!("unknown section5 parameter {other:?}"))),
        }
    }
    let k1 = k1.ok_or_else(|| Error::Parse("section5 needs k1=".into()))?;
    Ok((k1, prefix))
}

fn parse_tail(s: &str, cfg: &Config) -> Result<Tail> {
    let s = s.trim();
    if s == "double" {
        return Ok(Tail::LinearOffset(1));
    }
    let (kind, params) = s.split_once(':').unwrap_or((s, ""));
    match kind {
        "const" => Ok(Tail::Constant(parse_usize(params, "constant")?)),
        "offset" => Ok(Tail::LinearOffset(parse_usize(params, "offset")?)),
        "example1" => {
            let (threshold, start, gap, _) = parse_sparse_params(params, cfg)?;
            Ok(Tail::Sparse {
                threshold,
                start,
                gap,
            })
        }
        "section5" => {
            let (k1, _) = parse_cascade_params(params)?;
            Ok(Tail::Cascade { k1 })
        }
        _ => Err(Error::Parse(format!("unknown tail rule {s:?}"))),
    }
}

impl KneadingMap {
    /// Parses either the canonical form `prefix=[..];tail=..` or a family
    /// shorthand (`const:0`, `offset:2`, `double`, `table:[..]`,
    /// `example1[:K=..,ks=start+gap]`, `section5:k1=..[,prefix=[..]]`).
    pub fn parse_with(s: &str, cfg: &Config) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("prefix=") {
            let (list, tail) = rest
                .split_once(";tail=")
                .ok_or_else(|| Error::Parse("expected ;tail= after prefix".into()))?;
            let prefix = parse_list(list)?;
            let tail = parse_tail(tail, cfg)?;
            return match tail {
                Tail::Cascade { k1 } => Self::cascade(k1, prefix),
                t => Self::new(prefix, t),
            };
        }
        if s == "double" {
            return Self::offset(1);
        }
        let (kind, params) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "const" => Self::constant(parse_usize(params, "constant")?),
            "offset" => Self::offset(parse_usize(params, "offset")?),
            "table" => Self::table(parse_list(params)?),
            "example1" => {
                let (k, start, gap, prefix) = parse_sparse_params(params, cfg)?;
                let prefix = match prefix {
                    Some(p) => p,
                    None if k == cfg.example1.threshold => cfg.example1.prefix.clone(),
                    None => vec![0; k],
                };
                if prefix.len() != k {
                    return Err(Error::InvalidKneadingMap(format!(
                        "example1 prefix must have length K={k}"
                    )));
                }
                Self::new(
                    prefix,
                    Tail::Sparse {
                        threshold: k,
                        start,
                        gap,
                    },
                )
            }
            "section5" => {
                let (k1, prefix) = parse_cascade_params(params)?;
                let prefix = match prefix {
                    Some(p) => p,
                    None => cfg.cascade_prefix(k1).ok_or_else(|| {
                        Error::Config(format!(
                            "no default prefix for k1={k1}; pass prefix=[..] with {} entries",
                            k1 + 1
                        ))
                    })?,
                };
                Self::cascade(k1, prefix)
            }
            _ => Err(Error::Parse(format!("unknown family {s:?}"))),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::parse_with(s, Config::builtin())
    }
}

impl std::str::FromStr for KneadingMap {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}
