//! Fixed-point dyadic intervals with outward rounding.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// mant / 2^exp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    pub mant: BigInt,
    pub exp: u32,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: u32) -> Self {
        Dyadic { mant, exp }.normalized()
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), 0)
    }

    /// 2^-k.
    pub fn pow2_neg(k: u32) -> Self {
        Dyadic::new(BigInt::one(), k)
    }

    fn normalized(mut self) -> Self {
        if self.mant.is_zero() {
            self.exp = 0;
            return self;
        }
        while self.exp > 0 && self.mant.is_even() {
            self.mant >>= 1;
            self.exp -= 1;
        }
        self
    }

    /// Mantissa at `bits` fractional bits, rounded down or up.
    pub fn at_bits(&self, bits: u32, round_up: bool) -> BigInt {
        if bits >= self.exp {
            &self.mant << (bits - self.exp)
        } else {
            shift_round(&self.mant, self.exp - bits, round_up)
        }
    }

    pub fn to_decimal(&self) -> String {
        mant_to_decimal(&self.mant, self.exp)
    }

    /// Parses a decimal (`0.25`, `1e-12`, `3`) and rounds down onto the grid
    /// 2^-bits; fails if `exact` and the value is not on that grid.
    pub fn from_decimal(s: &str, bits: u32, exact: bool) -> Result<Dyadic> {
        let (num, den) = parse_decimal(s)?;
        let scaled = num << bits;
        let (quo, rem) = scaled.div_mod_floor(&den);
        if exact && !rem.is_zero() {
            return Err(Error::Parse(format!("{s} is not a multiple of 2^-{bits}")));
        }
        Ok(Dyadic::new(quo, bits))
    }

    pub fn to_f64(&self) -> f64 {
        // keep 64 significant bits so huge exponents do not overflow
        let shift = self.mant.bits().saturating_sub(64);
        let m: f64 = (&self.mant >> shift).to_f64().unwrap_or(f64::NAN);
        let mut e = shift as i64 - self.exp as i64;
        let mut v = m;
        while e < -1000 {
            v *= 2f64.powi(-1000);
            e += 1000;
        }
        v * 2f64.powi(e as i32)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.max(other.exp);
        self.at_bits(e, false).cmp(&other.at_bits(e, false))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

/// Decimal string as a fraction num/den.
fn parse_decimal(s: &str) -> Result<(BigInt, BigInt)> {
    let bad = || Error::Parse(format!("bad decimal {s:?}"));
    let s = s.trim();
    let (body, exp10) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match body.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, body),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let mut num: BigInt = digits.parse().map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp10 - frac_part.len() as i32;
    let ten = BigInt::from(10);
    if scale >= 0 {
        Ok((num * num_traits::pow(ten, scale as usize), BigInt::one()))
    } else {
        Ok((num, num_traits::pow(ten, (-scale) as usize)))
    }
}

/// Exact decimal expansion of m / 2^p.
pub fn mant_to_decimal(m: &BigInt, p: u32) -> String {
    let neg = m.sign() == Sign::Minus;
    let a = m.abs();
    let scaled = a * num_traits::pow(BigInt::from(5), p as usize);
    let mut digits = scaled.to_string();
    let p = p as usize;
    if digits.len() <= p {
        digits = format!("{}{}", "0".repeat(p + 1 - digits.len()), digits);
    }
    let (int_part, frac) = digits.split_at(digits.len() - p);
    let frac = frac.trim_end_matches('0');
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(int_part);
    if !frac.is_empty() {
        out.push('.');
        out.push_str(frac);
    }
    out
}

fn shift_round(m: &BigInt, k: u32, round_up: bool) -> BigInt {
    let d = BigInt::one() << k;
    if round_up {
        m.div_ceil(&d)
    } else {
        m.div_floor(&d)
    }
}

/// [lo, hi] / 2^bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigInt,
    pub hi: BigInt,
    pub bits: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn symbol(self) -> u8 {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }
}

impl Interval {
    pub fn new(lo: BigInt, hi: BigInt, bits: u32) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi, bits }
    }

    pub fn point(m: BigInt, bits: u32) -> Self {
        Interval {
            lo: m.clone(),
            hi: m,
            bits,
        }
    }

    pub fn from_dyadic(d: &Dyadic, bits: u32) -> Self {
        Interval::new(d.at_bits(bits, false), d.at_bits(bits, true), bits)
    }

    pub fn from_dyadics(lo: &Dyadic, hi: &Dyadic, bits: u32) -> Self {
        Interval::new(lo.at_bits(bits, false), hi.at_bits(bits, true), bits)
    }

    pub fn one_unit(bits: u32) -> BigInt {
        BigInt::one() << bits
    }

    pub fn half_unit(bits: u32) -> BigInt {
        BigInt::one() << (bits - 1)
    }

    pub fn half(bits: u32) -> Self {
        Interval::point(Self::half_unit(bits), bits)
    }

    pub fn zero(bits: u32) -> Self {
        Interval::point(BigInt::zero(), bits)
    }

    pub fn one(bits: u32) -> Self {
        Interval::point(Self::one_unit(bits), bits)
    }

    pub fn width(&self) -> BigInt {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn lo_dyadic(&self) -> Dyadic {
        Dyadic::new(self.lo.clone(), self.bits)
    }

    pub fn hi_dyadic(&self) -> Dyadic {
        Dyadic::new(self.hi.clone(), self.bits)
    }

    /// Re-expresses at another precision, rounding outward.
    pub fn with_bits(&self, bits: u32) -> Interval {
        if bits >= self.bits {
            let k = bits - self.bits;
            Interval::new(&self.lo << k, &self.hi << k, bits)
        } else {
            let k = self.bits - bits;
            Interval::new(
                shift_round(&self.lo, k, false),
                shift_round(&self.hi, k, true),
                bits,
            )
        }
    }

    pub fn side(&self) -> Option<Side> {
        let h = Self::half_unit(self.bits);
        if self.hi < h {
            Some(Side::Left)
        } else if self.lo > h {
            Some(Side::Right)
        } else {
            None
        }
    }

    pub fn is_exactly_half(&self) -> bool {
        let h = Self::half_unit(self.bits);
        self.lo == h && self.hi == h
    }

    pub fn contains_half(&self) -> bool {
        let h = Self::half_unit(self.bits);
        self.lo <= h && h <= self.hi
    }

    /// Product of non-negative intervals.
    pub fn mul(&self, other: &Interval) -> Interval {
        debug_assert_eq!(self.bits, other.bits);
        debug_assert!(!self.lo.is_negative() && !other.lo.is_negative());
        let b = self.bits;
        Interval::new(
            shift_round(&(&self.lo * &other.lo), b, false),
            shift_round(&(&self.hi * &other.hi), b, true),
            b,
        )
    }

    /// Quotient of a non-negative interval by a positive one.
    pub fn div(&self, other: &Interval) -> Interval {
        debug_assert_eq!(self.bits, other.bits);
        let b = self.bits;
        let lo = (&self.lo << b).div_floor(&other.hi);
        let hi = (&self.hi << b).div_ceil(&other.lo);
        Interval::new(lo, hi, b)
    }

    /// 1 - x.
    pub fn one_minus(&self) -> Interval {
        let one = Self::one_unit(self.bits);
        Interval::new(&one - &self.hi, &one - &self.lo, self.bits)
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        debug_assert_eq!(self.bits, other.bits);
        Interval::new(
            self.lo.clone().min(other.lo.clone()),
            self.hi.clone().max(other.hi.clone()),
            self.bits,
        )
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        if lo <= hi {
            Some(Interval::new(lo, hi, self.bits))
        } else {
            None
        }
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// other ⊆ self.
    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Widens by `ulps` grid steps on each side.
    pub fn fattened(&self, ulps: &BigInt) -> Interval {
        Interval::new(&self.lo - ulps, &self.hi + ulps, self.bits)
    }

    /// Distance to c = 1/2, as an enclosure of |x - 1/2|.
    pub fn dist_to_half(&self) -> Interval {
        let h = Self::half_unit(self.bits);
        let a = &self.lo - &h;
        let b = &self.hi - &h;
        if !a.is_negative() {
            Interval::new(a, b, self.bits)
        } else if !b.is_positive() {
            Interval::new(-b, -a, self.bits)
        } else {
            Interval::new(BigInt::zero(), a.abs().max(b), self.bits)
        }
    }

    pub fn clamp_unit(&self) -> Interval {
        let one = Self::one_unit(self.bits);
        let z = BigInt::zero();
        let lo = self.lo.clone().max(z.clone()).min(one.clone());
        let hi = self.hi.clone().max(z).min(one);
        Interval::new(lo, hi, self.bits)
    }

    pub fn decimal_pair(&self) -> [String; 2] {
        [mant_to_decimal(&self.lo, self.bits), mant_to_decimal(&self.hi, self.bits)]
    }

    /// Inverse of [`Interval::decimal_pair`].
    pub fn from_decimal_pair(lo: &str, hi: &str, bits: u32) -> Result<Interval> {
        let l = Dyadic::from_decimal(lo, bits, true)?;
        let h = Dyadic::from_decimal(hi, bits, true)?;
        if l > h {
            return Err(Error::Parse("interval endpoints out of order".into()));
        }
        Ok(Interval::new(l.at_bits(bits, false), h.at_bits(bits, false), bits))
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.lo_dyadic().to_f64(), self.hi_dyadic().to_f64())
    }
}

/// Tent map T_a(x) = min(ax, a(1-x)) over a slope interval `a` (1 <= a <= 2).
pub fn tent(x: &Interval, a: &Interval) -> Interval {
    let h = Interval::half_unit(x.bits);
    let out = if x.hi <= h {
        a.mul(x)
    } else if x.lo >= h {
        a.mul(&x.one_minus())
    } else {
        let left = a.mul(&Interval::new(x.lo.clone(), h.clone(), x.bits));
        let right = a.mul(&Interval::new(h, x.hi.clone(), x.bits).one_minus());
        left.hull(&right)
    };
    out.clamp_unit()
}

/// Branch of T_a^{-1} landing on `side`.
pub fn tent_inverse(y: &Interval, a: &Interval, side: Side) -> Interval {
    let left = y.div(a);
    match side {
        Side::Left => left,
        Side::Right => left.one_minus(),
    }
}
