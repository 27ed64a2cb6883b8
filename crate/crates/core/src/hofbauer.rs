//! Tent-map numerics: slopes from kneading data, critical orbits, levels D_n,
//! closest precritical points and the projection from E.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::cutting::{cutting_times_beyond, CuttingTimes};
use crate::error::{Error, Result};
use crate::interval::{tent, tent_inverse, Dyadic, Interval, Side};
use crate::map::{KneadingMap, Tail};
use crate::odometer::{decode, nest_indices, ECode};
use crate::symbols::{kneading_sequence, KneadingSequence};

pub const INITIAL_BITS: u32 = 128;

/// Slopes [lo, hi] enclosing every slope whose kneading sequence starts with
/// the first `verified_symbols` target symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeEnclosure {
    pub lo: Dyadic,
    pub hi: Dyadic,
    pub verified_symbols: usize,
}

impl SlopeEnclosure {
    pub fn exact(a: Dyadic, verified_symbols: usize) -> Self {
        SlopeEnclosure {
            lo: a.clone(),
            hi: a,
            verified_symbols,
        }
    }

    pub fn width(&self) -> Dyadic {
        let e = self.lo.exp.max(self.hi.exp);
        Dyadic::new(self.hi.at_bits(e, false) - self.lo.at_bits(e, false), e)
    }

    pub fn contains(&self, a: &Dyadic) -> bool {
        &self.lo <= a && a <= &self.hi
    }

    pub fn interval(&self, bits: u32) -> Interval {
        Interval::from_dyadics(&self.lo, &self.hi, bits)
    }

    pub fn midpoint(&self) -> Dyadic {
        let e = self.lo.exp.max(self.hi.exp);
        Dyadic::new(self.lo.at_bits(e, false) + self.hi.at_bits(e, false), e + 1)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lo": self.lo.to_decimal(),
            "hi": self.hi.to_decimal(),
            "verified_symbols": self.verified_symbols,
        })
    }
}

/// Parity-lexicographic comparison of the itinerary of c_1 at slope `a`
/// against `kappa`. `None` when a symbol cannot be resolved at `bits`.
pub fn compare_itinerary(a: &Dyadic, kappa: &KneadingSequence, bits: u32) -> Option<Ordering> {
    let slope = Interval::from_dyadic(a, bits);
    let mut x = Interval::half(bits);
    let mut odd = false;
    for n in 1..=kappa.len() {
        x = tent(&x, &slope);
        let s = x.side()?.symbol();
        let k = kappa.get(n);
        if s != k {
            let smaller = (s < k) != odd;
            return Some(if smaller { Ordering::Less } else { Ordering::Greater });
        }
        if s == 1 {
            odd = !odd;
        }
    }
    Some(Ordering::Equal)
}

/// Itinerary comparison with precision doubling; tries neighbouring grid
/// points when the split point itself is ambiguous at `max_bits`.
fn compare_robust(
    a: &Dyadic,
    kappa: &KneadingSequence,
    grid: u32,
    max_bits: u32,
) -> Result<(Dyadic, Ordering)> {
    let mut candidates = vec![a.clone()];
    for k in 1..=4i64 {
        for sign in [1i64, -1] {
            let shift = Dyadic::new(BigInt::from(sign * k), grid);
            let e = a.exp.max(grid);
            candidates.push(Dyadic::new(a.at_bits(e, false) + shift.at_bits(e, false), e));
        }
    }
    for cand in candidates {
        let mut bits = INITIAL_BITS.min(max_bits).max(grid + 16);
        loop {
            if let Some(o) = compare_itinerary(&cand, kappa, bits) {
                return Ok((cand, o));
            }
            if bits >= max_bits {
                break;
            }
            bits = (bits * 2).min(max_bits);
        }
    }
    Err(Error::PrecisionExhausted {
        bits: max_bits,
        what: format!("itinerary comparison near slope {}", a.to_decimal()),
    })
}

fn mid(lo: &Dyadic, hi: &Dyadic) -> Dyadic {
    let e = lo.exp.max(hi.exp);
    Dyadic::new(lo.at_bits(e, false) + hi.at_bits(e, false), e + 1)
}

fn gap(lo: &Dyadic, hi: &Dyadic) -> Dyadic {
    let e = lo.exp.max(hi.exp);
    Dyadic::new(hi.at_bits(e, false) - lo.at_bits(e, false), e)
}

/// Hull of the cylinder of slopes in (1, 2] whose itinerary starts with
/// `kappa`, bracketed by points outside it to within `tol`.
pub fn solve_cylinder(kappa: &KneadingSequence, tol: &Dyadic, max_bits: u32) -> Result<SlopeEnclosure> {
    if kappa.is_empty() || kappa.get(1) != 1 {
        return Err(Error::NotRealizable);
    }
    // comparisons are made on a grid finer than the current bracket
    let base_grid = (kappa.len() as u32 + 48).max(tol.exp + 8);
    let grid = |m: &Dyadic| base_grid.max(m.exp + 16);
    let one = Dyadic::from_int(1);
    let two = Dyadic::from_int(2);
    // phase 1: a slope inside the cylinder
    let mut lo = one.clone();
    let mut hi = two.clone();
    let inside = match compare_robust(&two, kappa, base_grid, max_bits)? {
        (_, Ordering::Equal) => two.clone(),
        (_, Ordering::Less) => return Err(Error::NotRealizable),
        (_, Ordering::Greater) => loop {
            let m = mid(&lo, &hi);
            if m.exp + 16 > max_bits {
                return Err(Error::PrecisionExhausted {
                    bits: max_bits,
                    what: format!("cylinder of {} symbols narrower than 2^-{}", kappa.len(), m.exp),
                });
            }
            let (m, o) = compare_robust(&m, kappa, grid(&m), max_bits)?;
            match o {
                Ordering::Less => lo = m,
                Ordering::Greater => hi = m,
                Ordering::Equal => break m,
            }
        },
    };
    // phase 2: lower boundary
    let mut low_out = lo;
    let mut low_in = inside.clone();
    while gap(&low_out, &low_in) > *tol {
        let m = mid(&low_out, &low_in);
        let (m, o) = compare_robust(&m, kappa, grid(&m), max_bits)?;
        match o {
            Ordering::Less => low_out = m,
            Ordering::Equal => low_in = m,
            Ordering::Greater => return Err(Error::NotRealizable),
        }
    }
    // phase 3: upper boundary
    let high_out = if inside == two {
        two
    } else {
        let mut high_in = inside;
        let mut high_out = hi;
        while gap(&high_in, &high_out) > *tol {
            let m = mid(&high_in, &high_out);
            let (m, o) = compare_robust(&m, kappa, grid(&m), max_bits)?;
            match o {
                Ordering::Greater => high_out = m,
                Ordering::Equal => high_in = m,
                Ordering::Less => return Err(Error::NotRealizable),
            }
        }
        high_out
    };
    Ok(SlopeEnclosure {
        lo: low_out,
        hi: high_out,
        verified_symbols: kappa.len(),
    })
}

/// Slope enclosure of width at most `width`.
pub fn solve_slope(kappa: &KneadingSequence, width: &Dyadic, max_precision: u32) -> Result<SlopeEnclosure> {
    if width.mant <= BigInt::from(0) {
        return Err(Error::Parse("width must be positive".into()));
    }
    let tol = Dyadic::new(width.mant.clone(), width.exp + 3);
    let enc = solve_cylinder(kappa, &tol, max_precision)?;
    if enc.width() > *width {
        return Err(Error::InsufficientSymbols {
            symbols: kappa.len(),
        });
    }
    Ok(enc)
}

/// Enclosures of c_n = T^n(1/2), n = 0..=len-1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitTable {
    pub slope: SlopeEnclosure,
    pub bits: u32,
    points: Vec<Interval>,
}

impl OrbitTable {
    pub fn points(&self) -> &[Interval] {
        &self.points
    }

    pub fn point(&self, n: usize) -> &Interval {
        &self.points[n]
    }

    pub fn get(&self, n: usize) -> Result<&Interval> {
        self.points.get(n).ok_or(Error::IndexOutOfRange {
            index: n,
            available: self.points.len(),
        })
    }

    /// Number of points, c_0 included.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn side(&self, n: usize) -> Option<Side> {
        self.points[n].side()
    }

    pub fn slope_interval(&self) -> Interval {
        self.slope.interval(self.bits)
    }

    /// Replaces one point. Meant for building refutation fixtures.
    pub fn with_point(mut self, n: usize, x: Interval) -> Self {
        self.points[n] = x.with_bits(self.bits);
        self
    }

    /// Itinerary κ_1..κ_{len-1} read off the enclosures.
    pub fn itinerary(&self) -> Option<Vec<u8>> {
        self.points[1..].iter().map(|p| p.side().map(Side::symbol)).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "precision_bits": self.bits,
            "slope": self.slope.to_json(),
            "points": self.points.iter().map(|p| p.decimal_pair().to_vec()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<OrbitTable> {
        let bad = |w: &str| Error::Parse(format!("orbit json: {w}"));
        let bits = v["precision_bits"].as_u64().ok_or_else(|| bad("precision_bits"))? as u32;
        let slope = &v["slope"];
        let lo = slope["lo"].as_str().ok_or_else(|| bad("slope.lo"))?;
        let hi = slope["hi"].as_str().ok_or_else(|| bad("slope.hi"))?;
        let lo = parse_exact_dyadic(lo)?;
        let hi = parse_exact_dyadic(hi)?;
        let verified_symbols =
            slope["verified_symbols"].as_u64().ok_or_else(|| bad("verified_symbols"))? as usize;
        let mut points = Vec::new();
        for p in v["points"].as_array().ok_or_else(|| bad("points"))? {
            let a = p[0].as_str().ok_or_else(|| bad("point"))?;
            let b = p[1].as_str().ok_or_else(|| bad("point"))?;
            points.push(Interval::from_decimal_pair(a, b, bits)?);
        }
        Ok(OrbitTable {
            slope: SlopeEnclosure {
                lo,
                hi,
                verified_symbols,
            },
            bits,
            points,
        })
    }
}

/// A terminating decimal as an exact dyadic (its denominator must be a power of two).
fn parse_exact_dyadic(s: &str) -> Result<Dyadic> {
    let frac = s.split_once('.').map(|(_, f)| f.len()).unwrap_or(0) as u32;
    Dyadic::from_decimal(s, frac.max(1), true)
}

/// Interval iteration of the critical orbit over the slope enclosure. Every
/// c_i with 1 <= i <= n must lie strictly on one side of 1/2.
pub fn critical_orbit(slope: &SlopeEnclosure, n: usize, max_precision: u32) -> Result<OrbitTable> {
    critical_orbit_from(slope, n, INITIAL_BITS, max_precision)
}

fn critical_orbit_from(
    slope: &SlopeEnclosure,
    n: usize,
    start_bits: u32,
    max_precision: u32,
) -> Result<OrbitTable> {
    let mut bits = start_bits.min(max_precision);
    loop {
        match orbit_at(slope, n, bits) {
            Ok(t) => return Ok(t),
            Err(Error::CriticalHit(i)) => return Err(Error::CriticalHit(i)),
            Err(e) => {
                if bits >= max_precision {
                    return Err(e);
                }
                bits = (bits * 2).min(max_precision);
            }
        }
    }
}

fn orbit_at(slope: &SlopeEnclosure, n: usize, bits: u32) -> Result<OrbitTable> {
    let a = slope.interval(bits);
    let mut points = Vec::with_capacity(n + 1);
    let mut x = Interval::half(bits);
    points.push(x.clone());
    for i in 1..=n {
        x = tent(&x, &a);
        if x.is_exactly_half() {
            return Err(Error::CriticalHit(i));
        }
        if x.side().is_none() {
            return Err(Error::PrecisionExhausted {
                bits,
                what: format!("c_{i} straddles 1/2"),
            });
        }
        points.push(x.clone());
    }
    Ok(OrbitTable {
        slope: slope.clone(),
        bits,
        points,
    })
}

/// D_n = [c_n, c_{n-S_k}] with k = max{i : S_i < n}; D_1 is taken as [c_2, c_1].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    pub n: usize,
    /// Orbit indices of the two endpoints: c_n first, then c_{β(n)}.
    pub ends: [usize; 2],
    /// Enclosure of the whole level.
    pub interval: Interval,
    /// Endpoint indices ordered left to right, when the order is certified.
    pub ordered: Option<[usize; 2]>,
}

impl Level {
    pub fn has_end(&self, idx: usize) -> bool {
        self.ends.contains(&idx)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "ends": self.ends,
            "interval": self.interval.decimal_pair().to_vec(),
        })
    }
}

pub fn level(orbit: &OrbitTable, s: &CuttingTimes, n: usize) -> Result<Level> {
    let ends = if n == 1 {
        [2, 1]
    } else if n >= 2 {
        let k = s.index_below(n)?;
        [n, n - s.at(k)]
    } else {
        return Err(Error::IndexOutOfRange {
            index: n,
            available: orbit.len(),
        });
    };
    let a = orbit.get(ends[0])?;
    let b = orbit.get(ends[1])?;
    let ordered = if a.hi < b.lo {
        Some([ends[0], ends[1]])
    } else if b.hi < a.lo {
        Some([ends[1], ends[0]])
    } else {
        None
    };
    Ok(Level {
        n,
        ends,
        interval: a.hull(b),
        ordered,
    })
}

/// z_k < 1/2 < ẑ_k with T^{S_k}(z_k) = 1/2, nearest to 1/2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecriticalPair {
    pub k: isize,
    pub z: Interval,
    pub z_hat: Interval,
}

/// Pulls 1/2 back along the central branch of T^{S_k}: at step j the preimage
/// is taken on the side of c_j, and that side is certified for both.
/// k = -1 gives the pair (0, 1).
pub fn closest_precritical(orbit: &OrbitTable, s: &CuttingTimes, k: isize) -> Result<PrecriticalPair> {
    let bits = orbit.bits;
    if k < 0 {
        return Ok(PrecriticalPair {
            k,
            z: Interval::zero(bits),
            z_hat: Interval::one(bits),
        });
    }
    let sk = s.small(k as usize).ok_or(Error::InsufficientCuttingTimes(s.len() - 1))?;
    if sk >= orbit.len() {
        return Err(Error::IndexOutOfRange {
            index: sk,
            available: orbit.len(),
        });
    }
    let a = orbit.slope_interval();
    let mut x = Interval::half(bits);
    for j in (1..sk).rev() {
        let side = orbit.side(j).ok_or(Error::PrecisionExhausted {
            bits,
            what: format!("side of c_{j}"),
        })?;
        x = tent_inverse(&x, &a, side);
        if x.side() != Some(side) {
            return Err(Error::PrecisionExhausted {
                bits,
                what: format!("branch of T^{j} near z_{k}"),
            });
        }
    }
    let z = tent_inverse(&x, &a, Side::Left);
    if z.side() != Some(Side::Left) {
        return Err(Error::PrecisionExhausted {
            bits,
            what: format!("z_{k} not separated from 1/2"),
        });
    }
    let z_hat = z.one_minus();
    Ok(PrecriticalPair { k, z, z_hat })
}

/// π(e): c_n for ⟨n⟩, otherwise the intersection of the first `count` levels
/// of the nest D_{b(i)}.
pub fn project(e: &ECode, orbit: &OrbitTable, s: &CuttingTimes, count: usize) -> Result<Interval> {
    if e.is_finite() {
        let n = decode(e, s)?
            .to_usize()
            .ok_or(Error::HorizonLimited(orbit.len()))?;
        return orbit.get(n).cloned().map_err(|_| Error::HorizonLimited(orbit.len()));
    }
    let b = nest_indices(e, count, s)?;
    let mut acc: Option<Interval> = None;
    for (i, bi) in b.iter().enumerate() {
        let n = bi
            .to_usize()
            .filter(|&n| n < orbit.len())
            .ok_or(Error::HorizonLimited(orbit.len()))?;
        let lv = level(orbit, s, n).map_err(|_| Error::HorizonLimited(orbit.len()))?;
        acc = Some(match acc {
            None => lv.interval,
            Some(prev) => prev.intersect(&lv.interval).ok_or(Error::EmptyIntersection(i))?,
        });
    }
    acc.ok_or(Error::NotEnoughIndices {
        available: 0,
        requested: 1,
    })
}

/// Number of leading nest levels of `e` that fit in the orbit table.
pub fn nest_depth_within(e: &ECode, orbit: &OrbitTable, s: &CuttingTimes) -> usize {
    let limit = BigUint::from(orbit.len());
    let mut sum = BigUint::from(0u32);
    let mut count = 0;
    for &i in e.indices() {
        if i >= s.len() {
            break;
        }
        sum += s.get(i);
        if sum >= limit {
            break;
        }
        count += 1;
    }
    count
}

/// Kneading data, cutting times and a certified critical orbit for one map.
#[derive(Debug, Clone)]
pub struct Tower {
    pub map: KneadingMap,
    pub cutting: CuttingTimes,
    pub kappa: KneadingSequence,
    pub orbit: OrbitTable,
}

fn identically_zero(q: &KneadingMap) -> bool {
    matches!(q.tail(), Tail::Constant(0)) && q.prefix().iter().all(|&v| v == 0)
}

/// A tail Q(k) = k - 1 is renormalizable at every k past the prefix, so no
/// tent map has this kneading map (the slope would have to be 1).
pub fn has_tent_realization(q: &KneadingMap) -> bool {
    !matches!(q.tail(), Tail::LinearOffset(1))
}

impl Tower {
    /// Certifies c_1..c_n. The kneading prefix is lengthened until the slope
    /// enclosure is narrow enough that every c_i sits on its own side of 1/2.
    pub fn build(q: &KneadingMap, n: usize, max_precision: u32) -> Result<Tower> {
        Self::build_with_margin(q, n, 32, max_precision)
    }

    /// Working precision for a kneading prefix of length `len`.
    pub fn bits_for(len: usize) -> u32 {
        ((len as u32 + 64).next_power_of_two()).max(INITIAL_BITS)
    }

    /// As `build`, starting from `margin` extra kneading symbols.
    pub fn build_with_margin(q: &KneadingMap, n: usize, margin: usize, max_precision: u32) -> Result<Tower> {
        if !has_tent_realization(q) {
            return Err(Error::NotRealizable);
        }
        let cutting = cutting_times_beyond(q, n + 1)?;
        if identically_zero(q) {
            let kappa = kneading_sequence(q, n.max(1));
            let slope = SlopeEnclosure::exact(Dyadic::from_int(2), usize::MAX);
            let orbit = critical_orbit(&slope, n, max_precision)?;
            return Ok(Tower {
                map: q.clone(),
                cutting,
                kappa,
                orbit,
            });
        }
        // A prefix ending before the second closest return past n can leave
        // c_j for some j <= n on the edge of the cylinder, so prefix lengths
        // step through the cutting times from there.
        let ahead = cutting_times_beyond(q, 8 * (n + margin) + 64)?;
        let mut lens: Vec<usize> = ahead
            .small_upto(usize::MAX)
            .into_iter()
            .filter(|&t| t > n)
            .skip(1)
            .map(|t| (t + 8).max(n + margin.max(1)))
            .collect();
        lens.dedup();
        let mut last_err = None;
        for len in lens {
            for extra in [0u32, 64] {
                let tol_exp = len as u32 + 24 + extra;
                let bits = Self::bits_for(len.max(tol_exp as usize));
                if bits > max_precision {
                    return Err(last_err.unwrap_or(Error::PrecisionExhausted {
                        bits: max_precision,
                        what: format!("orbit of length {n} needs {bits} bits"),
                    }));
                }
                let kappa = kneading_sequence(q, len);
                let slope = solve_cylinder(&kappa, &Dyadic::pow2_neg(tol_exp), max_precision)?;
                match critical_orbit_from(&slope, n, bits, max_precision) {
                    Ok(orbit) => {
                        let it = orbit.itinerary().expect("orbit sides certified");
                        if it[..] != kappa.symbols()[..n] {
                            return Err(Error::NotRealizable);
                        }
                        return Ok(Tower {
                            map: q.clone(),
                            cutting,
                            kappa,
                            orbit,
                        });
                    }
                    Err(e @ Error::CriticalHit(_)) => return Err(e),
                    Err(e) => last_err = Some(e),
                }
            }
        }
        Err(last_err.unwrap_or(Error::PrecisionExhausted {
            bits: max_precision,
            what: format!("no prefix length certified an orbit of length {n}"),
        }))
    }

    pub fn level(&self, n: usize) -> Result<Level> {
        level(&self.orbit, &self.cutting, n)
    }

    pub fn precritical(&self, k: isize) -> Result<PrecriticalPair> {
        closest_precritical(&self.orbit, &self.cutting, k)
    }

    pub fn bits(&self) -> u32 {
        self.orbit.bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutting::cutting_times;

    #[test]
    fn orbit_at_two() {
        let slope = SlopeEnclosure::exact(Dyadic::from_int(2), 0);
        let t = critical_orbit(&slope, 4, 256).unwrap();
        let bits = t.bits;
        assert_eq!(t.point(0), &Interval::half(bits));
        assert_eq!(t.point(1), &Interval::one(bits));
        for n in 2..=4 {
            assert_eq!(t.point(n), &Interval::zero(bits));
        }
    }

    #[test]
    fn precritical_at_two() {
        let q = KneadingMap::constant(0).unwrap();
        let slope = SlopeEnclosure::exact(Dyadic::from_int(2), 0);
        let t = critical_orbit(&slope, 4, 256).unwrap();
        let s = cutting_times(&q, 4).unwrap();
        let p0 = closest_precritical(&t, &s, 0).unwrap();
        assert_eq!(p0.z.lo_dyadic(), Dyadic::pow2_neg(2));
        assert!(p0.z.is_point());
        assert_eq!(p0.z_hat.lo_dyadic(), Dyadic::new(BigInt::from(3), 2));
        let p1 = closest_precritical(&t, &s, 1).unwrap();
        assert_eq!(p1.z.lo_dyadic(), Dyadic::new(BigInt::from(3), 3));
        assert_eq!(p1.z_hat.lo_dyadic(), Dyadic::new(BigInt::from(5), 3));
    }

    #[test]
    fn levels_fibonacci_indices() {
        let q = KneadingMap::offset(2).unwrap();
        let tw = Tower::build(&q, 20, 1024).unwrap();
        assert_eq!(tw.level(5).unwrap().ends, [5, 2]);
        assert_eq!(tw.level(2).unwrap().ends, [2, 1]);
        assert_eq!(tw.level(7).unwrap().ends, [7, 2]);
    }
}
