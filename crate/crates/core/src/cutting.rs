//! Cutting times S_0 < S_1 < ... with S_k = S_{k-1} + S_{Q(k)}.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::map::KneadingMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuttingTimes {
    values: Vec<BigUint>,
}

/// S_0..=S_count.
pub fn cutting_times(q: &KneadingMap, count: usize) -> Result<CuttingTimes> {
    let mut values: Vec<BigUint> = Vec::with_capacity(count + 1);
    values.push(BigUint::one());
    for k in 1..=count {
        let qk = q.q(k);
        if qk >= k {
            return Err(Error::InvalidKneadingMap(format!("Q({k}) = {qk} >= {k}")));
        }
        let next = &values[k - 1] + &values[qk];
        values.push(next);
    }
    Ok(CuttingTimes { values })
}

impl CuttingTimes {
    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    /// Number of stored values (the largest index is `len() - 1`).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, k: usize) -> &BigUint {
        &self.values[k]
    }

    /// S_k as a machine integer, if it fits.
    pub fn small(&self, k: usize) -> Option<usize> {
        self.values.get(k).and_then(|v| v.to_usize())
    }

    /// S_k, panicking when it does not fit in usize. For orbit indices.
    pub fn at(&self, k: usize) -> usize {
        self.small(k).expect("cutting time exceeds usize")
    }

    /// max{i : S_i < n} for n >= 2.
    pub fn index_below(&self, n: usize) -> Result<usize> {
        if n < 2 {
            return Err(Error::IndexOutOfRange { index: n, available: 2 });
        }
        let target = BigUint::from(n);
        for (i, v) in self.values.iter().enumerate() {
            if v >= &target {
                return Ok(i - 1);
            }
        }
        Err(Error::InsufficientCuttingTimes(self.values.len() - 1))
    }

    /// Index k with S_k = n.
    pub fn position(&self, n: usize) -> Option<usize> {
        let target = BigUint::from(n);
        self.values.binary_search(&target).ok()
    }

    /// Cutting times that fit below `limit`, as machine integers.
    pub fn small_upto(&self, limit: usize) -> Vec<usize> {
        self.values
            .iter()
            .map_while(|v| v.to_usize())
            .take_while(|&s| s <= limit)
            .collect()
    }
}

/// Enough cutting times to exceed `n` (S_last > n).
pub fn cutting_times_beyond(q: &KneadingMap, n: usize) -> Result<CuttingTimes> {
    let mut count = 8;
    loop {
        let s = cutting_times(q, count)?;
        if s.values.last().map(|v| v > &BigUint::from(n)).unwrap_or(false) {
            return Ok(s);
        }
        count *= 2;
    }
}
