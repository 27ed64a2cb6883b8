//! Kneading sequences and the difference function tau.

use std::fmt;

use crate::error::{Error, Result};
use crate::map::KneadingMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KneadingSequence {
    symbols: Vec<u8>,
}

impl KneadingSequence {
    pub fn from_symbols(symbols: Vec<u8>) -> Result<Self> {
        if symbols.iter().any(|&s| s > 1) {
            return Err(Error::Parse("kneading symbols must be 0 or 1".into()));
        }
        Ok(KneadingSequence { symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// κ_n, 1-based.
    pub fn get(&self, n: usize) -> u8 {
        self.symbols[n - 1]
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn truncate(&self, n: usize) -> KneadingSequence {
        KneadingSequence {
            symbols: self.symbols[..n.min(self.symbols.len())].to_vec(),
        }
    }
}

impl fmt::Display for KneadingSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.symbols {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for KneadingSequence {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let symbols = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(format!("bad kneading symbol {c:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(KneadingSequence { symbols })
    }
}

/// κ_1..κ_length: the block of length S_k is the block of length S_{k-1}
/// followed by the block of length S_{Q(k)} with its last symbol flipped.
pub fn kneading_sequence(q: &KneadingMap, length: usize) -> KneadingSequence {
    let mut symbols = vec![1u8];
    // cutting times as machine integers; the last one may exceed `length`
    let mut s = vec![1usize];
    let mut k = 1;
    while symbols.len() < length {
        let qk = q.q(k);
        let add = s[qk];
        let start = symbols.len();
        for i in 0..add {
            symbols.push(symbols[i]);
        }
        let last = start + add - 1;
        symbols[last] ^= 1;
        s.push(s[k - 1] + add);
        k += 1;
    }
    symbols.truncate(length);
    KneadingSequence { symbols }
}

/// min{m > 0 : κ_m ≠ κ_{m+n}}.
pub fn tau(kappa: &KneadingSequence, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::Parse("tau needs n >= 1".into()));
    }
    let len = kappa.len();
    let mut m = 1;
    while m + n <= len {
        if kappa.get(m) != kappa.get(m + n) {
            return Ok(m);
        }
        m += 1;
    }
    Err(Error::HorizonLimited(len))
}
