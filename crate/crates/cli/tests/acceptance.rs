//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines come out in order.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use kneadlab::certify::identity_m;
use kneadlab::checks::{check_admissible, is_renormalizable_at};
use kneadlab::config::Config;
use kneadlab::cutting::{cutting_times, CuttingTimes};
use kneadlab::hofbauer::{nest_depth_within, project, solve_slope, Tower};
use kneadlab::interval::{tent, Dyadic};
use kneadlab::odometer::{add_one, beta, encode_u64, zero_preimages, ECode};
use kneadlab::report::Verdict;
use kneadlab::symbols::{kneading_sequence, KneadingSequence};
use kneadlab::KneadingMap;
use num_bigint::{BigInt, BigUint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const SHIPPED: &[&str] = &[
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

/// Shipped families with a tent map; `double` sits at slope 1.
const REALIZABLE: &[&str] = &[
    "const:0",
    "offset:2",
    "offset:3",
    "offset:4",
    "example1",
    "section5:k1=3",
    "section5:k1=4",
    "section5:k1=5",
];

fn family(spec: &str) -> KneadingMap {
    KneadingMap::parse_with(spec, Config::builtin()).unwrap()
}

fn times_past(q: &KneadingMap, n: u64) -> CuttingTimes {
    let mut count = 8;
    loop {
        let s = cutting_times(q, count).unwrap();
        if s.values().last().unwrap() > &BigUint::from(n) {
            return s;
        }
        count *= 2;
    }
}

fn odometer_law() -> Result<String, String> {
    let start = Instant::now();
    for name in ["const:0", "offset:2", "offset:3", "double", "section5:k1=3"] {
        let q = family(name);
        let s = times_past(&q, 100_001);
        let mut e = encode_u64(0, &s).unwrap();
        for n in 0..100_000u64 {
            let next = add_one(&e, &q).map_err(|err| format!("{name} n={n}: {err}"))?;
            if next != encode_u64(n + 1, &s).unwrap() {
                return Err(format!("{name} n={n}"));
            }
            e = next;
        }
    }
    let t = start.elapsed();
    if t >= Duration::from_secs(10) {
        return Err(format!("took {t:?}"));
    }
    Ok(format!("5 families, n < 10^5, {t:.2?}"))
}

fn preimage_counts() -> Result<String, String> {
    for d in 1..=4 {
        let got = zero_preimages(&family(&format!("offset:{d}")), 60).len();
        if got != d {
            return Err(format!("offset:{d} has {got} chains"));
        }
    }
    let got = zero_preimages(&family("example1"), 60).len();
    if got != 1 {
        return Err(format!("example1 has {got} chains"));
    }
    Ok("d chains for d = 1..4, one for example1".into())
}

fn cutting_laws() -> Result<String, String> {
    for name in SHIPPED {
        let q = family(name);
        let s = cutting_times(&q, 300).unwrap();
        for k in 1..=300 {
            let (sk, prev) = (s.get(k), s.get(k - 1));
            if *sk != prev + s.get(q.q(k)) || *sk > prev * 2u32 {
                return Err(format!("{name} k={k}"));
            }
        }
    }
    for k1 in [3, 4, 5] {
        let q = family(&format!("section5:k1={k1}"));
        let s = cutting_times(&q, 80).unwrap();
        for i in 2..=8 {
            if !identity_m(&q, &s, i).unwrap() {
                return Err(format!("identity fails for k1={k1} i={i}"));
            }
        }
    }
    Ok(format!("{} families to k = 300, identity for i <= 8", SHIPPED.len()))
}

fn kneading_consistency() -> Result<String, String> {
    for name in REALIZABLE {
        let q = family(name);
        let tower = Tower::build(&q, 64, 4096).map_err(|e| format!("{name}: {e}"))?;
        let it = tower.orbit.itinerary().ok_or(format!("{name}: undecided symbol"))?;
        if it[..64] != *kneading_sequence(&q, 64).symbols() {
            return Err(format!("{name}: itinerary differs"));
        }
    }
    let kappa: KneadingSequence = format!("1{}", "0".repeat(63)).parse().unwrap();
    let enc = solve_slope(&kappa, &Dyadic::pow2_neg(40), 512).map_err(|e| e.to_string())?;
    if !enc.contains(&Dyadic::from_int(2)) || enc.width() >= Dyadic::pow2_neg(40) {
        return Err("slope 2 not pinned".into());
    }
    Ok(format!("{} families at 64 symbols; slope 2 within 2^-40", REALIZABLE.len()))
}

fn hofbauer_nesting() -> Result<String, String> {
    for name in ["offset:3", "section5:k1=3", "example1"] {
        let q = family(name);
        let t = Tower::build(&q, 1001, 4096).map_err(|e| format!("{name}: {e}"))?;
        let slack: BigInt = t.orbit.points().iter().map(|p| p.width()).max().unwrap() * 4;
        for n in 2..=1000 {
            let b = beta(n, &t.cutting).unwrap();
            let d = t.level(n).unwrap();
            let db = t.level(b).unwrap();
            if !db.interval.fattened(&slack).contains(&d.interval) {
                return Err(format!("{name}: D_{n} not in D_{b}"));
            }
            if !(d.has_end(b) && db.has_end(b)) {
                return Err(format!("{name}: c_{b} not shared"));
            }
        }
    }
    Ok("n <= 1000 at three slopes".into())
}

fn semiconjugacy() -> Result<String, String> {
    let families = REALIZABLE;
    for name in families {
        let q = family(name);
        let t = Tower::build(&q, 300, 4096).map_err(|e| format!("{name}: {e}"))?;
        let s = cutting_times(&q, 60).unwrap();
        let a = t.orbit.slope_interval();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut done = 0;
        let mut tries = 0;
        while done < 500 && tries < 50_000 {
            tries += 1;
            let depth = rng.gen_range(8..40);
            let n = rng.gen_range(0..s.at(depth) as u64);
            let full = encode_u64(n, &s).unwrap();
            let e = ECode::truncated(full.indices().iter().copied().filter(|&i| i < depth).collect(), depth);
            let Ok(next) = add_one(&e, &q) else { continue };
            let c1 = nest_depth_within(&e, &t.orbit, &t.cutting);
            let c2 = nest_depth_within(&next, &t.orbit, &t.cutting);
            if c1 == 0 || c2 == 0 {
                continue;
            }
            let x = project(&e, &t.orbit, &t.cutting, c1).unwrap();
            let y = project(&next, &t.orbit, &t.cutting, c2).unwrap();
            if !tent(&x, &a).overlaps(&y) {
                return Err(format!("{name}: {e} -> {next}"));
            }
            done += 1;
        }
        if done < 500 {
            return Err(format!("{name}: only {done} usable codes"));
        }
    }
    Ok(format!("500 codes for each of {} families", families.len()))
}

fn run_certify(args: &[&str]) -> (Option<i32>, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_kneadlab"))
        .arg("certify")
        .args(args)
        .args(["--format", "json"])
        .output()
        .expect("binary runs");
    (out.status.code(), String::from_utf8(out.stdout).expect("utf-8"))
}

fn cascade_certificate() -> Result<String, String> {
    let start = Instant::now();
    let (code, out) = run_certify(&["--family", "section5:k1=3", "--imax", "3"]);
    let t = start.elapsed();
    let v: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    if code != Some(0) || v["overall"]["verdict"] != "certified_at_depth" {
        return Err(format!("exit {code:?}, verdict {}", v["overall"]["verdict"]));
    }
    let bits = v["precision_bits"].as_u64().unwrap_or(u64::MAX);
    if bits > 512 {
        return Err(format!("{bits} bits"));
    }
    for c in v["checks"].as_array().unwrap() {
        let name = c["name"].as_str().unwrap();
        let claim = name.starts_with("claim") || name == "injectivity";
        if !(claim && c["required"] == true) {
            continue;
        }
        let positive = c["margin"].as_str().and_then(|m| m.parse::<f64>().ok()).is_some_and(|m| m > 0.0);
        if c["verdict"] != "holds" || !positive {
            return Err(format!("{name} at i={}", c["i"]));
        }
    }
    if t >= Duration::from_secs(60) {
        return Err(format!("took {t:?}"));
    }
    Ok(format!("certified at {bits} bits in {t:.2?}"))
}

fn sparse_bundle() -> Result<String, String> {
    let q = family("example1");
    let cfg = Config::builtin();
    let from_k = kneadlab::certify::default_from_k(&q, cfg);
    let reports = [
        check_admissible(&q, 200),
        kneadlab::checks::check_strong_admissible(&q, 200, from_k),
        kneadlab::checks::check_stop_carry(&q, 200),
        kneadlab::odometer::check_invertibility_hypotheses(&q, 200),
    ];
    for r in &reports {
        if !r.is_holds() {
            return Err(r.to_string());
        }
    }
    let kneadlab::Tail::Sparse { threshold: big_k, .. } = *q.tail() else {
        return Err("example1 is not a sparse map".into());
    };
    for k in big_k..=200 {
        if is_renormalizable_at(&q, k, 200).verdict != Verdict::Fails {
            return Err(format!("renormalizable at k={k}"));
        }
    }
    Ok(format!("four checks hold to 200 (strong from k={from_k}); not renormalizable for {big_k} <= k <= 200"))
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

/// Plain comparison of 64-term windows; beyond the prefix the tables are zero.
fn brute_admissible(q: &KneadingMap, horizon: usize) -> Option<usize> {
    (1..=horizon).find(|&k| {
        let m = q.iterate(k, 2);
        let a: Vec<usize> = (1..=64).map(|j| q.q(k + j)).collect();
        let b: Vec<usize> = (1..=64).map(|j| q.q(m + j)).collect();
        a < b
    })
}

/// Count of index sets summing to n with consecutive members i < j obeying i < Q(j + 1).
fn representations(q: &KneadingMap, s: &[u64], n: u64) -> Vec<Vec<usize>> {
    fn go(q: &KneadingMap, s: &[u64], top: usize, rest: u64, above: Option<usize>, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(acc.iter().rev().copied().collect());
            return;
        }
        for i in (0..top).rev() {
            if s[i] > rest || above.is_some_and(|j| i >= q.q(j + 1)) {
                continue;
            }
            if s[..=i].iter().sum::<u64>() < rest {
                break;
            }
            acc.push(i);
            go(q, s, i, rest - s[i], Some(i), acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(q, s, s.len(), n, None, &mut Vec::new(), &mut out);
    out
}

fn oracle_equivalence() -> Result<String, String> {
    let mut tables = 0;
    for n0 in 0..=6 {
        for prefix in all_tables(n0) {
            let q = KneadingMap::table(prefix.clone()).unwrap();
            let r = check_admissible(&q, 12);
            let agree = match brute_admissible(&q, 12) {
                Some(k) => r.is_fails() && r.witness.as_ref().and_then(|w| w.get("k")) == Some(k as i64),
                None => r.is_holds(),
            };
            if !agree {
                return Err(format!("table {prefix:?}"));
            }
            tables += 1;
        }
    }
    for name in ["const:0", "offset:2", "offset:3", "double", "example1", "section5:k1=3"] {
        let q = family(name);
        let s = times_past(&q, 2001);
        let small: Vec<u64> = s.values().iter().map(|v| v.try_into().unwrap()).collect();
        for n in 0..=2000u64 {
            let reps = representations(&q, &small, n);
            if reps.len() != 1 || encode_u64(n, &s).unwrap().indices() != &reps[0][..] {
                return Err(format!("{name} n={n}"));
            }
        }
    }
    Ok(format!("{tables} tables; encode unique for n <= 2000 on 6 families"))
}

fn without_timestamp(out: &str) -> String {
    let mut v: Value = serde_json::from_str(out).expect("json");
    v.as_object_mut().unwrap().remove("generated_at");
    serde_json::to_string_pretty(&v).unwrap()
}

fn determinism() -> Result<String, String> {
    for fam in ["section5:k1=3", "example1", "const:0"] {
        let args = ["--family", fam, "--imax", "3", "--precision", "1024"];
        let (_, a) = run_certify(&args);
        let (_, b) = run_certify(&args);
        if !a.contains("generated_at") {
            return Err(format!("{fam}: no timestamp field"));
        }
        if without_timestamp(&a) != without_timestamp(&b) {
            return Err(format!("{fam}: reports differ"));
        }
    }
    Ok("three families, two runs each".into())
}

type Criterion = (&'static str, fn() -> Result<String, String>);

fn main() {
    let criteria: [Criterion; 10] = [
        ("odometer law", odometer_law),
        ("preimage counts of <0>", preimage_counts),
        ("cutting-time laws", cutting_laws),
        ("kneading consistency", kneading_consistency),
        ("Hofbauer nesting", hofbauer_nesting),
        ("semiconjugacy probe", semiconjugacy),
        ("cascade certificate", cascade_certificate),
        ("sparse-map hypothesis bundle", sparse_bundle),
        ("oracle equivalence", oracle_equivalence),
        ("determinism", determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(note) => println!("PASS {:>2} {name}: {note}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
