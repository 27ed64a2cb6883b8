//! Finite-depth certificates: cover claims on the tower, the hypothesis
//! bundle for the odometer route, and their aggregation.

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::checks::{
    check_admissible, check_renor_avoidance, check_stop_carry, check_strong_admissible,
};
use crate::config::Config;
use crate::cutting::CuttingTimes;
use crate::error::{Error, Result};
use crate::hofbauer::{level, closest_precritical, Level, OrbitTable, SlopeEnclosure, Tower};
use crate::interval::{mant_to_decimal, Interval};
use crate::map::{KneadingMap, Tail};
use crate::odometer::check_invertibility_hypotheses;
use crate::report::{CheckReport, Verdict, Witness};

/// Three-valued outcome of an enclosure comparison; `Yes` carries the
/// certified gap in grid units (zero for exact index coincidences).
#[derive(Debug, Clone, PartialEq, Eq)]
enum Cert {
    Yes(BigInt),
    No,
    Unknown,
}

/// Smallest positive gap seen so far.
#[derive(Debug, Clone)]
struct Margin {
    min: Option<BigInt>,
    bits: u32,
}

impl Margin {
    fn new(bits: u32) -> Self {
        Margin { min: None, bits }
    }

    fn record(&mut self, gap: &BigInt) {
        if gap.is_zero() {
            return;
        }
        match &self.min {
            Some(m) if m <= gap => {}
            _ => self.min = Some(gap.clone()),
        }
    }

    fn decimal(&self) -> Option<String> {
        self.min.as_ref().map(|m| mant_to_decimal(m, self.bits))
    }
}

/// Left and right endpoint enclosures of a level, if its orientation is certified.
fn ends<'a>(orbit: &'a OrbitTable, lv: &Level) -> Option<(&'a Interval, &'a Interval)> {
    lv.ordered.map(|[l, u]| (orbit.point(l), orbit.point(u)))
}

/// p ∈ D (closed). An endpoint index is inside exactly.
fn point_in_closed(orbit: &OrbitTable, lv: &Level, p: &Interval, idx: Option<usize>) -> Cert {
    if let Some(i) = idx {
        if lv.has_end(i) {
            return Cert::Yes(BigInt::zero());
        }
    }
    let Some((lo, hi)) = ends(orbit, lv) else {
        return Cert::Unknown;
    };
    if lo.hi < p.lo && p.hi < hi.lo {
        let g = (&p.lo - &lo.hi).min(&hi.lo - &p.hi);
        return Cert::Yes(g);
    }
    if p.hi < lo.lo || p.lo > hi.hi {
        return Cert::No;
    }
    Cert::Unknown
}

/// p ∉ int D. An endpoint index lies on the boundary.
fn point_outside_interior(orbit: &OrbitTable, lv: &Level, p: &Interval, idx: Option<usize>) -> Cert {
    if let Some(i) = idx {
        if lv.has_end(i) {
            return Cert::Yes(BigInt::zero());
        }
    }
    let Some((lo, hi)) = ends(orbit, lv) else {
        return Cert::Unknown;
    };
    if p.hi < lo.lo {
        return Cert::Yes(&lo.lo - &p.hi);
    }
    if p.lo > hi.hi {
        return Cert::Yes(&p.lo - &hi.hi);
    }
    if lo.hi < p.lo && p.hi < hi.lo {
        return Cert::No;
    }
    Cert::Unknown
}

/// p ∈ int D.
fn point_in_interior(orbit: &OrbitTable, lv: &Level, p: &Interval, idx: Option<usize>) -> Cert {
    match point_outside_interior(orbit, lv, p, idx) {
        Cert::Yes(_) => Cert::No,
        Cert::No => Cert::Yes(BigInt::zero()),
        Cert::Unknown => Cert::Unknown,
    }
}

/// inner ⊆ outer.
fn level_in_level(orbit: &OrbitTable, inner: &Level, outer: &Level) -> Cert {
    let mut gap: Option<BigInt> = None;
    for &e in &inner.ends {
        match point_in_closed(orbit, outer, orbit.point(e), Some(e)) {
            Cert::Yes(g) => {
                if !g.is_zero() {
                    gap = Some(match gap {
                        Some(x) => x.min(g),
                        None => g,
                    });
                }
            }
            Cert::No => return Cert::No,
            Cert::Unknown => return Cert::Unknown,
        }
    }
    Cert::Yes(gap.unwrap_or_default())
}

/// a ∩ b = ∅, with a positive gap.
fn levels_disjoint(orbit: &OrbitTable, a: &Level, b: &Level) -> Cert {
    if a.ends.iter().any(|e| b.has_end(*e)) {
        return Cert::No;
    }
    let (Some((alo, ahi)), Some((blo, bhi))) = (ends(orbit, a), ends(orbit, b)) else {
        return Cert::Unknown;
    };
    if ahi.hi < blo.lo {
        return Cert::Yes(&blo.lo - &ahi.hi);
    }
    if bhi.hi < alo.lo {
        return Cert::Yes(&alo.lo - &bhi.hi);
    }
    if ahi.lo > blo.hi && bhi.lo > alo.hi {
        return Cert::No;
    }
    Cert::Unknown
}

/// Δ_i: the levels D_n for S_{k_i - 1} < n <= S_{k_i}.
#[derive(Debug, Clone)]
pub struct DeltaCover {
    pub i: usize,
    pub pieces: Vec<Level>,
}

/// Everything the cover claims look at: the map, its special indices k_1 < k_2 < ...,
/// cutting times and a certified orbit.
#[derive(Debug, Clone)]
pub struct CoverContext {
    pub map: KneadingMap,
    pub cutting: CuttingTimes,
    pub orbit: OrbitTable,
    pub ks: Vec<usize>,
}

impl CoverContext {
    pub fn new(tower: &Tower) -> Self {
        let upto = tower.cutting.len().saturating_sub(1);
        CoverContext {
            map: tower.map.clone(),
            cutting: tower.cutting.clone(),
            orbit: tower.orbit.clone(),
            ks: tower.map.special_indices(upto),
        }
    }

    /// k_i, 1-based.
    pub fn k(&self, i: usize) -> Result<usize> {
        if i == 0 {
            return Err(Error::IndexOutOfRange { index: 0, available: self.ks.len() });
        }
        self.ks.get(i - 1).copied().ok_or(Error::IndexOutOfRange {
            index: i,
            available: self.ks.len(),
        })
    }

    /// S_k as an orbit index, if the orbit reaches it.
    fn s(&self, k: usize) -> Result<usize> {
        let v = self.cutting.small(k).ok_or(Error::InsufficientCuttingTimes(k))?;
        if v >= self.orbit.len() {
            return Err(Error::HorizonLimited(self.orbit.len()));
        }
        Ok(v)
    }

    fn level(&self, n: usize) -> Result<Level> {
        if n >= self.orbit.len() {
            return Err(Error::HorizonLimited(self.orbit.len()));
        }
        level(&self.orbit, &self.cutting, n)
    }

    pub fn cover(&self, i: usize) -> Result<DeltaCover> {
        let ki = self.k(i)?;
        let lo = self.s(ki - 1)?;
        let hi = self.s(ki)?;
        let pieces = ((lo + 1)..=hi).map(|n| self.level(n)).collect::<Result<Vec<_>>>()?;
        Ok(DeltaCover { i, pieces })
    }

    /// Orbit length needed for all claims at i (including claim 5 into i+1).
    pub fn orbit_needed(map: &KneadingMap, s: &CuttingTimes, i: usize) -> Option<usize> {
        let ks = map.special_indices(s.len().saturating_sub(1));
        let k_next = *ks.get(i)?;
        let top = s.small(k_next)?;
        Some(top + 2)
    }

    fn bits(&self) -> u32 {
        self.orbit.bits
    }
}

fn undecided(name: &str, horizon: usize, what: String, bits: u32) -> CheckReport {
    CheckReport::limited(name, horizon, format!("{what} undecided at {bits} bits"))
}

fn finish(name: &str, horizon: usize, margin: &Margin) -> CheckReport {
    CheckReport::holds(name, horizon).with_margin(margin.decimal(), margin.bits)
}

fn failed(name: &str, horizon: usize, w: Witness, bits: u32) -> CheckReport {
    CheckReport::fails(name, horizon, w).with_margin(None, bits)
}

/// Wraps numeric claims: a missing orbit becomes HorizonLimited.
fn guarded(name: &str, ctx: &CoverContext, f: impl FnOnce() -> Result<CheckReport>) -> Result<CheckReport> {
    match f() {
        Err(Error::HorizonLimited(len)) | Err(Error::IndexOutOfRange { available: len, .. }) => Ok(
            CheckReport::limited(name, len, "orbit table too short").with_margin(None, ctx.bits()),
        ),
        other => other,
    }
}

/// c_{S_{k_i - 1}} ∈ [c_{S_k}, 1 - c_{S_k}] for every k <= k_i.
pub fn verify_claim1(ctx: &CoverContext, i: usize) -> Result<CheckReport> {
    let name = "claim1";
    guarded(name, ctx, || {
        let ki = ctx.k(i)?;
        let t = ctx.s(ki - 1)?;
        let horizon = ctx.s(ki)?;
        let dt = ctx.orbit.point(t).dist_to_half();
        let mut margin = Margin::new(ctx.bits());
        for k in 0..=ki {
            let sk = ctx.s(k)?;
            if sk == t {
                continue;
            }
            let dk = ctx.orbit.point(sk).dist_to_half();
            if dt.hi < dk.lo {
                margin.record(&(&dk.lo - &dt.hi));
            } else if dt.lo > dk.hi {
                return Ok(failed(name, horizon, Witness::new().with("i", i).with("k", k), ctx.bits()));
            } else {
                return Ok(undecided(name, horizon, format!("k={k}"), ctx.bits()));
            }
        }
        Ok(finish(name, horizon, &margin))
    })
}

/// c_n ∉ int D_{S_{k_i}} for 0 < n <= S_{k_i}.
pub fn verify_claim2(ctx: &CoverContext, i: usize) -> Result<CheckReport> {
    let name = "claim2";
    guarded(name, ctx, || {
        let ki = ctx.k(i)?;
        let top = ctx.s(ki)?;
        let d = ctx.level(top)?;
        let mut margin = Margin::new(ctx.bits());
        for n in 1..=top {
            match point_outside_interior(&ctx.orbit, &d, ctx.orbit.point(n), Some(n)) {
                Cert::Yes(g) => margin.record(&g),
                Cert::No => {
                    return Ok(failed(name, top, Witness::new().with("i", i).with("n", n), ctx.bits()))
                }
                Cert::Unknown => return Ok(undecided(name, top, format!("n={n}"), ctx.bits())),
            }
        }
        Ok(finish(name, top, &margin))
    })
}

/// The pieces of the cover are pairwise disjoint.
pub fn verify_claim3(ctx: &CoverContext, cover: &DeltaCover) -> Result<CheckReport> {
    let name = "claim3";
    let horizon = cover.pieces.iter().map(|p| p.n).max().unwrap_or(0);
    let mut margin = Margin::new(ctx.bits());
    for (a, pa) in cover.pieces.iter().enumerate() {
        for pb in &cover.pieces[a + 1..] {
            match levels_disjoint(&ctx.orbit, pa, pb) {
                Cert::Yes(g) => margin.record(&g),
                Cert::No => {
                    return Ok(failed(
                        name,
                        horizon,
                        Witness::new().with("i", cover.i).with("m", pa.n).with("n", pb.n),
                        ctx.bits(),
                    ))
                }
                Cert::Unknown => {
                    return Ok(undecided(name, horizon, format!("pair ({}, {})", pa.n, pb.n), ctx.bits()))
                }
            }
        }
    }
    Ok(finish(name, horizon, &margin))
}

fn in_some_piece(ctx: &CoverContext, cover: &DeltaCover, n: usize) -> Cert {
    let mut unknown = false;
    for piece in &cover.pieces {
        match point_in_closed(&ctx.orbit, piece, ctx.orbit.point(n), Some(n)) {
            Cert::Yes(g) => return Cert::Yes(g),
            Cert::No => {}
            Cert::Unknown => unknown = true,
        }
    }
    if unknown {
        Cert::Unknown
    } else {
        Cert::No
    }
}

/// c_n ∈ Δ_i for S_{k_i - 1} <= n < S_{k_{i+1} - 1}, and for i >= 2 also
/// c_{S_{k_i}+1} ∈ D_{S_{k_i - 1} + S_{k_{i-1} - 1} + 1}.
pub fn verify_claim4(ctx: &CoverContext, i: usize) -> Result<CheckReport> {
    let name = "claim4";
    guarded(name, ctx, || {
        let cover = ctx.cover(i)?;
        let ki = ctx.k(i)?;
        let from = ctx.s(ki - 1)?;
        let to = ctx.s(ctx.k(i + 1)? - 1)?;
        let mut margin = Margin::new(ctx.bits());
        for n in from..to {
            match in_some_piece(ctx, &cover, n) {
                Cert::Yes(g) => margin.record(&g),
                Cert::No => {
                    return Ok(failed(name, to, Witness::new().with("i", i).with("n", n), ctx.bits()))
                }
                Cert::Unknown => return Ok(undecided(name, to, format!("n={n}"), ctx.bits())),
            }
        }
        if i >= 2 {
            let p = ctx.s(ki)? + 1;
            let target = ctx.s(ki - 1)? + ctx.s(ctx.k(i - 1)? - 1)? + 1;
            let lv = ctx.level(target)?;
            match point_in_closed(&ctx.orbit, &lv, ctx.orbit.get(p)?, Some(p)) {
                Cert::Yes(g) => margin.record(&g),
                Cert::No => {
                    return Ok(failed(
                        name,
                        to,
                        Witness::new().with("i", i).with("n", p).with("level", target),
                        ctx.bits(),
                    ))
                }
                Cert::Unknown => return Ok(undecided(name, to, format!("in_D n={p}"), ctx.bits())),
            }
        }
        Ok(finish(name, to, &margin))
    })
}

/// S_{k_{i+1}-1} - S_{k_i} = S_{k_i - 1} - S_{k_{i-1} - 1}, exactly (i >= 2).
pub fn identity_m(q: &KneadingMap, s: &CuttingTimes, i: usize) -> Result<bool> {
    if i < 2 {
        return Err(Error::IndexOutOfRange { index: i, available: 2 });
    }
    let ks = q.special_indices(s.len().saturating_sub(1));
    let k = |j: usize| ks.get(j - 1).copied().ok_or(Error::InsufficientCuttingTimes(s.len() - 1));
    let (k_prev, k_i, k_next) = (k(i - 1)?, k(i)?, k(i + 1)?);
    let lhs: BigUint = s.get(k_next - 1) - s.get(k_i);
    let rhs: BigUint = s.get(k_i - 1) - s.get(k_prev - 1);
    Ok(lhs == rhs)
}

pub fn check_identity_m(q: &KneadingMap, s: &CuttingTimes, i: usize) -> CheckReport {
    let name = "identity_m";
    match identity_m(q, s, i) {
        Ok(true) => CheckReport::holds(name, i),
        Ok(false) => CheckReport::fails(name, i, Witness::new().with("i", i)),
        Err(_) => CheckReport::limited(name, i, "not enough cutting times"),
    }
}

/// Δ_{i+1} ⊂ Δ_i, piece by piece.
pub fn verify_claim5(ctx: &CoverContext, cover: &DeltaCover, next: &DeltaCover) -> Result<CheckReport> {
    let name = "claim5";
    let horizon = next.pieces.iter().map(|p| p.n).max().unwrap_or(0);
    let mut margin = Margin::new(ctx.bits());
    for inner in &next.pieces {
        let mut found = None;
        let mut unknown = false;
        for outer in &cover.pieces {
            match level_in_level(&ctx.orbit, inner, outer) {
                Cert::Yes(g) => {
                    found = Some(g);
                    break;
                }
                Cert::No => {}
                Cert::Unknown => unknown = true,
            }
        }
        match found {
            Some(g) => margin.record(&g),
            None if unknown => {
                return Ok(undecided(name, horizon, format!("piece {}", inner.n), ctx.bits()))
            }
            None => {
                return Ok(failed(
                    name,
                    horizon,
                    Witness::new().with("i", cover.i).with("n", inner.n),
                    ctx.bits(),
                ))
            }
        }
    }
    Ok(finish(name, horizon, &margin))
}

/// T(D_m) ∩ T(D_n) = D_{m+1} ∩ D_{n+1} = ∅ for pieces D_m, D_n of the cover,
/// skipping pieces whose enclosure contains c.
pub fn verify_injectivity(ctx: &CoverContext, cover: &DeltaCover) -> Result<CheckReport> {
    let name = "injectivity";
    guarded(name, ctx, || {
        let horizon = cover.pieces.iter().map(|p| p.n + 1).max().unwrap_or(0);
        let kept: Vec<&Level> = cover.pieces.iter().filter(|p| !p.interval.contains_half()).collect();
        let exempt = cover.pieces.len() - kept.len();
        let images = kept
            .iter()
            .map(|p| ctx.level(p.n + 1))
            .collect::<Result<Vec<_>>>()?;
        let mut margin = Margin::new(ctx.bits());
        for a in 0..images.len() {
            for b in (a + 1)..images.len() {
                match levels_disjoint(&ctx.orbit, &images[a], &images[b]) {
                    Cert::Yes(g) => margin.record(&g),
                    Cert::No => {
                        return Ok(failed(
                            name,
                            horizon,
                            Witness::new().with("i", cover.i).with("m", kept[a].n).with("n", kept[b].n),
                            ctx.bits(),
                        ))
                    }
                    Cert::Unknown => {
                        return Ok(undecided(
                            name,
                            horizon,
                            format!("pair ({}, {})", kept[a].n, kept[b].n),
                            ctx.bits(),
                        ))
                    }
                }
            }
        }
        Ok(finish(name, horizon, &margin).with_detail(format!("{exempt} piece(s) containing c exempt")))
    })
}

/// Every c_n from S_{k_i - 1} to the end of the orbit lies in Δ_i.
pub fn verify_orbit_in_cover(ctx: &CoverContext, i: usize) -> Result<CheckReport> {
    let name = "orbit_in_cover";
    guarded(name, ctx, || {
        let cover = ctx.cover(i)?;
        let from = ctx.s(ctx.k(i)? - 1)?;
        let to = ctx.orbit.len();
        let mut margin = Margin::new(ctx.bits());
        for n in from..to {
            match in_some_piece(ctx, &cover, n) {
                Cert::Yes(g) => margin.record(&g),
                Cert::No => return Ok(failed(name, to, Witness::new().with("i", i).with("n", n), ctx.bits())),
                Cert::Unknown => return Ok(undecided(name, to, format!("n={n}"), ctx.bits())),
            }
        }
        Ok(finish(name, to - 1, &margin))
    })
}

/// Probe of the overlap lemma: for n = S_r + S_t <= horizon with r < t and
/// r < Q(t+1), and k with S_k <= horizon, int D_n must not contain both
/// c_{S_k} and one of z_{Q(k+1)-1}, ẑ_{Q(k+1)-1}. Reports the smallest K
/// beyond which no k violates this.
pub fn check_overlap_lemma(tower: &Tower, horizon: usize, from_k: usize) -> Result<CheckReport> {
    let name = "overlap_lemma";
    let q = &tower.map;
    if !check_strong_admissible(q, horizon, from_k).is_holds() {
        return Ok(CheckReport::limited(name, horizon, "strong_admis fails"));
    }
    if !q.tends_to_infinity() {
        return Ok(CheckReport::limited(name, horizon, "Q(k) does not tend to infinity"));
    }
    let s = &tower.cutting;
    let orbit = &tower.orbit;
    let limit = horizon.min(orbit.len() - 1);
    let times = s.small_upto(limit);
    let mut ns = Vec::new();
    for (t, &st) in times.iter().enumerate() {
        for (r, &sr) in times.iter().enumerate().take(t) {
            if r < q.q(t + 1) && sr + st <= limit && s.position(sr + st).is_none() {
                ns.push(sr + st);
            }
        }
    }
    ns.sort_unstable();
    ns.dedup();
    let levels = ns.iter().map(|&n| level(orbit, s, n)).collect::<Result<Vec<_>>>()?;
    let mut worst: Option<usize> = None;
    let ks: Vec<usize> = (0..times.len()).collect();
    for &k in &ks {
        let pk = times[k];
        let zi = q.q(k + 1) as isize - 1;
        let pair = closest_precritical(orbit, s, zi)?;
        let bad = levels.iter().any(|lv| {
            let c_in = point_in_interior(orbit, lv, orbit.point(pk), Some(pk));
            if c_in == Cert::No {
                return false;
            }
            let z_in = point_in_interior(orbit, lv, &pair.z, None);
            let zh_in = point_in_interior(orbit, lv, &pair.z_hat, None);
            z_in != Cert::No || zh_in != Cert::No
        });
        if bad {
            worst = Some(k);
        }
    }
    let kmax = *ks.last().unwrap_or(&0);
    let big_k = worst.map(|k| k + 1).unwrap_or(0);
    let report = if big_k > kmax {
        CheckReport::limited(name, horizon, format!("violations up to the last scanned k={kmax}"))
    } else {
        CheckReport::holds(name, horizon)
            .with_found(Witness::new().with("K", big_k))
            .with_detail(format!("{} levels, k <= {kmax}", levels.len()))
    };
    Ok(report.with_margin(None, orbit.bits))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Overall {
    CertifiedAtDepth,
    Refuted,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckRecord {
    #[serde(flatten)]
    pub report: CheckReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    pub required: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Cover claims on the tower (cascade maps).
    Covers,
    /// Odometer hypotheses plus the overlap probe.
    Hypotheses,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifyParams {
    pub depth: usize,
    pub i_max: usize,
    pub max_precision: u32,
    pub from_k: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub map: KneadingMap,
    pub params: CertifyParams,
    pub from_k: usize,
    pub route: Route,
    pub slope: Option<SlopeEnclosure>,
    pub orbit_len: usize,
    pub precision_bits: Option<u32>,
    pub checks: Vec<CheckRecord>,
    pub overall: Overall,
    pub refuted_by: Option<(String, Witness)>,
}

impl Certificate {
    pub fn to_json(&self) -> Value {
        let mut overall = json!({ "verdict": self.overall });
        if let Some((name, w)) = &self.refuted_by {
            overall["check"] = json!(name);
            overall["witness"] = serde_json::to_value(w).expect("witness serializes");
        }
        json!({
            "toolkit": "kneadlab",
            "version": env!("CARGO_PKG_VERSION"),
            "map": self.map.to_string(),
            "parameters": {
                "depth": self.params.depth,
                "i_max": self.params.i_max,
                "max_precision_bits": self.params.max_precision,
                "from_k": self.from_k,
            },
            "route": self.route,
            "slope": self.slope.as_ref().map(|s| s.to_json()),
            "orbit_length": self.orbit_len,
            "precision_bits": self.precision_bits,
            "checks": self.checks,
            "overall": overall,
        })
    }

    pub fn check(&self, name: &str, i: Option<usize>) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.report.name == name && c.i == i)
    }
}

fn record(report: CheckReport, i: Option<usize>, required: bool) -> CheckRecord {
    CheckRecord { report, i, required }
}

/// Smallest k from which strong admissibility is required for this family.
pub fn default_from_k(q: &KneadingMap, cfg: &Config) -> usize {
    let floor = match *q.tail() {
        Tail::Sparse { threshold, .. } => threshold,
        Tail::Cascade { k1 } => k1 + 2,
        _ => 1,
    };
    cfg.checks.from_k.max(floor)
}

fn renor_start(q: &KneadingMap) -> usize {
    match *q.tail() {
        Tail::Sparse { threshold, .. } => threshold,
        Tail::Cascade { k1 } => k1 + 1,
        _ => 1,
    }
}

fn claim_records(ctx: &CoverContext, i: usize, required: bool) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    out.push(record(verify_claim1(ctx, i)?, Some(i), required));
    out.push(record(verify_claim2(ctx, i)?, Some(i), required));
    let (c3, inj, c5) = match ctx.cover(i) {
        Ok(cover) => {
            let c3 = verify_claim3(ctx, &cover)?;
            let inj = verify_injectivity(ctx, &cover)?;
            let c5 = match ctx.cover(i + 1) {
                Ok(next) => verify_claim5(ctx, &cover, &next)?,
                Err(_) => CheckReport::limited("claim5", ctx.orbit.len(), "orbit table too short"),
            };
            (c3, inj, c5)
        }
        Err(_) => {
            let lim = |n: &str| CheckReport::limited(n, ctx.orbit.len(), "orbit table too short");
            (lim("claim3"), lim("injectivity"), lim("claim5"))
        }
    };
    out.push(record(c3, Some(i), required));
    out.push(record(verify_claim4(ctx, i)?, Some(i), required));
    out.push(record(c5, Some(i), required));
    out.push(record(inj, Some(i), required));
    Ok(out)
}

fn any_undecided(records: &[CheckRecord]) -> bool {
    records.iter().any(|r| {
        r.required
            && r.report.verdict == Verdict::HorizonLimited
            && r.report.detail.as_deref().is_some_and(|d| d.contains("undecided"))
    })
}

/// Runs the checks for `q` and aggregates them.
pub fn build_certificate(q: &KneadingMap, params: &CertifyParams, cfg: &Config) -> Result<Certificate> {
    let depth = params.depth;
    let from_k = params.from_k.unwrap_or_else(|| default_from_k(q, cfg));
    let cascade = matches!(q.tail(), Tail::Cascade { .. });
    if cascade && params.i_max < 2 {
        return Err(Error::Config("cascade certificates need imax >= 2".into()));
    }
    let admis = check_admissible(q, depth);
    let strong = check_strong_admissible(q, depth, from_k);
    let stop = check_stop_carry(q, depth);
    let inv = check_invertibility_hypotheses(q, depth);
    let renor = check_renor_avoidance(q, renor_start(q), depth);
    let mut checks = Vec::new();
    let mut slope = None;
    let mut orbit_len = 0;
    let mut bits = None;
    let route = if cascade { Route::Covers } else { Route::Hypotheses };
    match route {
        Route::Covers => {
            checks.push(record(admis, None, true));
            checks.push(record(renor, None, true));
            checks.push(record(strong, None, false));
            checks.push(record(stop, None, false));
            checks.push(record(inv, None, false));
            let s_probe = crate::cutting::cutting_times(q, 4 * params.i_max * params.i_max + 16)?;
            for i in 2..=params.i_max {
                checks.push(record(check_identity_m(q, &s_probe, i), Some(i), true));
            }
            let n = CoverContext::orbit_needed(q, &s_probe, params.i_max)
                .ok_or(Error::InsufficientCuttingTimes(s_probe.len() - 1))?;
            let mut margin = 32;
            let numeric = loop {
                let tower = Tower::build_with_margin(q, n, margin, params.max_precision)?;
                let ctx = CoverContext::new(&tower);
                let mut recs = Vec::new();
                recs.extend(claim_records(&ctx, 1, false)?);
                for i in 2..=params.i_max {
                    recs.extend(claim_records(&ctx, i, true)?);
                }
                recs.push(record(verify_orbit_in_cover(&ctx, 2)?, Some(2), true));
                let next_bits = Tower::bits_for(n + 2 * margin);
                if !any_undecided(&recs) || next_bits > params.max_precision {
                    break (tower, recs);
                }
                margin *= 2;
            };
            let (tower, recs) = numeric;
            slope = Some(tower.orbit.slope.clone());
            orbit_len = tower.orbit.len();
            bits = Some(tower.bits());
            checks.extend(recs);
        }
        Route::Hypotheses => {
            let strong_ok = strong.is_holds();
            let refuted = [&admis, &stop, &inv, &renor].into_iter().find(|r| r.is_fails()).map(|r| r.name.clone());
            let guard_ok = strong_ok && q.tends_to_infinity() && refuted.is_none();
            checks.push(record(admis, None, true));
            checks.push(record(strong, None, true));
            checks.push(record(stop, None, true));
            checks.push(record(inv, None, true));
            checks.push(record(renor, None, true));
            if guard_ok {
                let n = depth;
                let tower = Tower::build(q, n, params.max_precision)?;
                checks.push(record(check_overlap_lemma(&tower, depth, from_k)?, None, true));
                let ctx = CoverContext::new(&tower);
                for i in 1..=params.i_max {
                    if ctx.k(i + 1).is_err() && ctx.k(i).is_err() {
                        break;
                    }
                    checks.extend(claim_records(&ctx, i, false)?);
                }
                slope = Some(tower.orbit.slope.clone());
                orbit_len = tower.orbit.len();
                bits = Some(tower.bits());
            } else {
                let reason = if !strong_ok {
                    "strong_admis fails".to_string()
                } else if !q.tends_to_infinity() {
                    "Q(k) does not tend to infinity".to_string()
                } else {
                    format!("skipped, {} fails", refuted.unwrap_or_default())
                };
                checks.push(record(CheckReport::limited("overlap_lemma", depth, reason), None, true));
            }
        }
    }
    let required: Vec<&CheckRecord> = checks.iter().filter(|c| c.required).collect();
    let refuted_by = required
        .iter()
        .find(|c| c.report.verdict == Verdict::Fails)
        .map(|c| (c.report.name.clone(), c.report.witness.clone().unwrap_or_default()));
    let overall = if refuted_by.is_some() {
        Overall::Refuted
    } else if required.iter().all(|c| c.report.verdict == Verdict::Holds) {
        Overall::CertifiedAtDepth
    } else {
        Overall::Inconclusive
    };
    Ok(Certificate {
        map: q.clone(),
        params: params.clone(),
        from_k,
        route,
        slope,
        orbit_len,
        precision_bits: bits,
        checks,
        overall,
        refuted_by,
    })
}

/// Rebuilds a certificate from its own JSON description and compares verdicts.
pub fn reverify(cert_json: &Value, cfg: &Config) -> Result<bool> {
    let bad = |w: &str| Error::Parse(format!("certificate json: {w}"));
    let map = KneadingMap::parse_with(cert_json["map"].as_str().ok_or_else(|| bad("map"))?, cfg)?;
    let p = &cert_json["parameters"];
    let params = CertifyParams {
        depth: p["depth"].as_u64().ok_or_else(|| bad("depth"))? as usize,
        i_max: p["i_max"].as_u64().ok_or_else(|| bad("i_max"))? as usize,
        max_precision: p["max_precision_bits"].as_u64().ok_or_else(|| bad("precision"))? as u32,
        from_k: Some(p["from_k"].as_u64().ok_or_else(|| bad("from_k"))? as usize),
    };
    let again = build_certificate(&map, &params, cfg)?.to_json();
    Ok(again["checks"] == cert_json["checks"] && again["overall"] == cert_json["overall"])
}

/// Margin helper for callers outside this module: the certified distance of
/// an enclosure from 1/2, as a decimal.
pub fn distance_from_half(x: &Interval) -> String {
    let d = x.dist_to_half();
    let lo = if d.lo.is_negative() { BigInt::zero() } else { d.lo };
    mant_to_decimal(&lo, x.bits)
}
