use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::SystemTime;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::{json, Value};

use kneadlab::certify::{build_certificate, CertifyParams, CoverContext, Overall};
use kneadlab::checks::{
    check_admissible, check_renor_avoidance, check_stop_carry, check_strong_admissible,
    is_renormalizable_at,
};
use kneadlab::config::Config;
use kneadlab::cutting::cutting_times;
use kneadlab::hofbauer::{has_tent_realization, solve_slope, Tower};
use kneadlab::interval::Dyadic;
use kneadlab::odometer::{add_one, decode, encode, predecessor, ECode};
use kneadlab::report::{CheckReport, Verdict};
use kneadlab::symbols::{kneading_sequence, KneadingSequence};
use kneadlab::{Error, KneadingMap};

const PRECISION_ENV: &str = "KNEADLAB_PRECISION_BITS";

#[derive(Parser)]
#[command(name = "kneadlab", version, about = "Kneading maps, odometers and tent-map certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct Common {
    /// Map description, e.g. offset:2, const:0, double, example1, section5:k1=3, table:[0,1,0]
    #[arg(long)]
    family: String,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Alternative defaults file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    Admis,
    Strong,
    Stopcarry,
    Renor,
    Invert,
}

#[derive(Subcommand)]
enum Command {
    /// Q table, cutting times and kneading prefix.
    Generate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Length of the kneading prefix shown.
        #[arg(long, default_value_t = 64)]
        length: usize,
    },
    /// Run one predicate up to a horizon.
    Check {
        #[arg(value_enum)]
        kind: CheckKind,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        horizon: Option<usize>,
        /// First k for strong admissibility and renormalization avoidance.
        #[arg(long = "from")]
        from_k: Option<usize>,
        /// Test renormalizability at this single k.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Kneading sequence of the map.
    Kneading {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 64)]
        length: usize,
    },
    /// Greedy cutting-time expansion of an integer.
    Encode {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: String,
    },
    /// Odometer step on a code such as 0,2,5 or 0,2,5@64.
    Add {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        code: String,
        #[arg(long, default_value_t = 1)]
        times: usize,
        /// Step backwards instead.
        #[arg(long)]
        back: bool,
    },
    /// Enclose the tent slope realizing a kneading sequence.
    Slope {
        /// Map description; alternatively give --kneading.
        #[arg(long)]
        family: Option<String>,
        /// Explicit kneading symbols, e.g. 1001.
        #[arg(long)]
        kneading: Option<String>,
        /// Target width, as a decimal or 2^-k.
        #[arg(long, default_value = "2^-40")]
        width: String,
        /// Number of kneading symbols to use with --family.
        #[arg(long, default_value_t = 80)]
        length: usize,
        #[arg(long)]
        precision: Option<u32>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Certified critical orbit and the levels D_n.
    Tower {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long)]
        precision: Option<u32>,
    },
    /// The cover Δ_i.
    Cover {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        i: usize,
        #[arg(long)]
        precision: Option<u32>,
    },
    /// Finite-depth certificate.
    Certify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        imax: usize,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        precision: Option<u32>,
        #[arg(long = "from")]
        from_k: Option<usize>,
    },
}

/// A failure carrying its exit status.
struct Exit(u8, String);

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::PrecisionExhausted { .. } => 4,
            Error::HorizonLimited(_) => 3,
            _ => 2,
        };
        Exit(code, e.to_string())
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<Config, Exit> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Exit(2, format!("{}: {e}", p.display())))?;
            Ok(Config::from_toml(&text)?)
        }
        None => Ok(Config::builtin().clone()),
    }
}

fn precision(flag: Option<u32>, cfg: &Config) -> Result<u32, Exit> {
    let bits = match flag {
        Some(b) => b,
        None => match std::env::var(PRECISION_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Exit(2, format!("{PRECISION_ENV}={v} is not a bit count")))?,
            Err(_) => cfg.precision.max_bits,
        },
    };
    if bits == 0 {
        return Err(Exit(2, "precision must be positive".into()));
    }
    Ok(bits)
}

fn positive(name: &str, v: usize) -> Result<usize, Exit> {
    if v == 0 {
        Err(Exit(2, format!("--{name} must be positive")))
    } else {
        Ok(v)
    }
}

/// Output payload: JSON document plus its text rendering.
struct Out {
    json: Value,
    text: String,
}

fn emit(out: &Out, format: Format, path: &Option<PathBuf>) -> Result<(), Exit> {
    let body = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).expect("json serializes");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = out.text.clone();
            if !s.ends_with('\n') {
                s.push('\n');
            }
            s
        }
    };
    match path {
        Some(p) => fs::write(p, body).map_err(|e| Exit(2, format!("{}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn report_out(r: &CheckReport, map: &KneadingMap) -> Out {
    let mut json = json!({ "map": map.to_string() });
    let body = serde_json::to_value(r).expect("report serializes");
    if let (Value::Object(dst), Value::Object(src)) = (&mut json, body) {
        dst.extend(src);
    }
    Out { json, text: format!("map: {map}\n{r}") }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Holds => 0,
        Verdict::Fails => 1,
        Verdict::HorizonLimited => 3,
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_width(s: &str) -> Result<Dyadic, Exit> {
    let bad = || Exit(2, format!("cannot read width {s:?}; use a decimal or 2^-k"));
    let w = if let Some(k) = s.strip_prefix("2^-") {
        Dyadic::pow2_neg(k.parse().map_err(|_| bad())?)
    } else {
        Dyadic::from_decimal(s, 256, false).map_err(|_| bad())?
    };
    if w <= Dyadic::from_int(0) {
        return Err(bad());
    }
    Ok(w)
}

fn timestamp() -> String {
    humantime::format_rfc3339_seconds(SystemTime::now()).to_string()
}

fn run(cli: Cli) -> Result<u8, Exit> {
    match cli.command {
        Command::Generate { common, count, length } => {
            let cfg = load_config(&common.config)?;
            let q = KneadingMap::parse_with(&common.family, &cfg)?;
            let count = positive("count", count)?;
            let s = cutting_times(&q, count - 1)?;
            let kappa = kneading_sequence(&q, length);
            let table = q.table_upto(count);
            let times: Vec<String> = s.values().iter().map(|v| v.to_string()).collect();
            let json = json!({
                "map": q.to_string(),
                "q": table,
                "cutting_times": times,
                "kneading": kappa.to_string(),
            });
            let text = format!(
                "map: {q}\nQ(1..={count}): {}\nS_0..S_{}: {}\nkneading: {kappa}",
                join(&table),
                count - 1,
                times.join(",")
            );
            emit(&Out { json, text }, common.format, &common.output)?;
            Ok(0)
        }
        Command::Check { kind, common, horizon, from_k, k } => {
            let cfg = load_config(&common.config)?;
            let q = KneadingMap::parse_with(&common.family, &cfg)?;
            let horizon = positive("horizon", horizon.unwrap_or(cfg.checks.horizon))?;
            let report = match kind {
                CheckKind::Admis => check_admissible(&q, horizon),
                CheckKind::Strong => {
                    check_strong_admissible(&q, horizon, from_k.unwrap_or(cfg.checks.from_k))
                }
                CheckKind::Stopcarry => check_stop_carry(&q, horizon),
                CheckKind::Renor => match k {
                    Some(k) => is_renormalizable_at(&q, positive("k", k)?, horizon),
                    None => check_renor_avoidance(&q, from_k.unwrap_or(1), horizon),
                },
                CheckKind::Invert => kneadlab::odometer::check_invertibility_hypotheses(&q, horizon),
            };
            emit(&report_out(&report, &q), common.format, &common.output)?;
            Ok(verdict_code(report.verdict))
        }
        Command::Kneading { common, length } => {
            let cfg = load_config(&common.config)?;
            let q = KneadingMap::parse_with(&common.family, &cfg)?;
            let kappa = kneading_sequence(&q, positive("length", length)?);
            let out = Out {
                json: json!({ "map": q.to_string(), "length": length, "kneading": kappa.to_string() }),
                text: format!("map: {q}\nkneading: {kappa}"),
            };
            emit(&out, common.format, &common.output)?;
            Ok(0)
        }
        Command::Encode { common, n } => {
            let cfg = load_config(&common.config)?;
            let q = KneadingMap::parse_with(&common.family, &cfg)?;
            let n: BigUint = n.trim().parse().map_err(|_| Exit(2, format!("--n {n:?} is not a natural number")))?;
            let mut count = 16;
            let s = loop {
                let t = cutting_times(&q, count)?;
                if t.values().last().is_some_and(|v| *v > n) {
                    break t;
                }
                count *= 2;
            };
            let e = encode(&n, &s)?;
            let out = Out {
                json: json!({ "map": q.to_string(), "n": n.to_string(), "code": e.to_string() }),
                text: format!("map: {q}\n<{n}> = {e}"),
            };
            emit(&out, common.format, &common.output)?;
            Ok(0)
        }
        Command::Add { common, code, times, back } => {
            let cfg = load_config(&common.config)?;
            let q = KneadingMap::parse_with(&common.family, &cfg)?;
            let mut e: ECode = code.parse()?;
            if !e.satisfies_rule(&q) {
                return Err(Exit(2, format!("{e} violates the admissibility rule for {q}")));
            }
            let start = e.clone();
            for _ in 0..times {
                e = if back { predecessor(&e, &q)? } else { add_one(&e, &q)? };
            }
            let value = if e.is_finite() {
                let top = e.indices().last().copied().unwrap_or(0);
                let s = cutting_times(&q, top + 2)?;
                Some(decode(&e, &s)?.to_string())
            } else {
                None
            };
            let step = if back { "predecessor" } else { "add_one" };
            let mut json = json!({ "map": q.to_string(), "code": start.to_string(), "operation": step, "times": times, "result": e.to_string() });
            if let Some(v) = &value {
                json["value"] = json!(v);
            }
            let text = match &value {
                Some(v) => format!("map: {q}\n{step}^{times}({start}) = {e} = <{v}>"),
                None => format!("map: {q}\n{step}^{times}({start}) = {e}"),
            };
            emit(&Out { json, text }, common.format, &common.output)?;
            Ok(0)
        }
        Command::Slope { family, kneading, width, length, precision: p, format, output } => {
            let cfg = Config::builtin().clone();
            let bits = precision(p, &cfg)?;
            let width = parse_width(&width)?;
            let (label, kappa) = match (family, kneading) {
                (Some(f), None) => {
                    let q = KneadingMap::parse_with(&f, &cfg)?;
                    if !has_tent_realization(&q) {
                        return Err(Error::NotRealizable.into());
                    }
                    (q.to_string(), kneading_sequence(&q, positive("length", length)?))
                }
                (None, Some(k)) => (k.clone(), k.parse::<KneadingSequence>()?),
                _ => return Err(Exit(2, "give exactly one of --family and --kneading".into())),
            };
            let enc = solve_slope(&kappa, &width, bits)?;
            let json = json!({ "input": label, "symbols": kappa.len(), "slope": enc.to_json(), "width": enc.width().to_decimal() });
            let text = format!(
                "input: {label}\nslope in [{}, {}]\nwidth: {}\nverified symbols: {}",
                enc.lo.to_decimal(),
                enc.hi.to_decimal(),
                kneadlab::report::short_decimal(&enc.width().to_decimal()),
                enc.verified_symbols
            );
            emit(&Out { json, text }, format, &output)?;
            Ok(0)
        }
        Command::Tower { common, n, precision: p } => {
            let cfg = load_config(&common.config)?;
            let q = KneadingMap::parse_with(&common.family, &cfg)?;
            let n = positive("n", n)?;
            let tower = Tower::build(&q, n, precision(p, &cfg)?)?;
            let levels = (1..=n).map(|m| tower.level(m)).collect::<Result<Vec<_>, _>>()?;
            let json = json!({
                "map": q.to_string(),
                "orbit": tower.orbit.to_json(),
                "levels": levels.iter().map(|l| l.to_json()).collect::<Vec<_>>(),
            });
            let mut text = format!(
                "map: {q}\nslope in [{}, {}]\nprecision bits: {}\n",
                kneadlab::report::short_decimal(&tower.orbit.slope.lo.to_decimal()),
                kneadlab::report::short_decimal(&tower.orbit.slope.hi.to_decimal()),
                tower.bits()
            );
            for (m, l) in levels.iter().enumerate() {
                let (lo, hi) = l.interval.to_f64_pair();
                let (c_lo, _) = tower.orbit.point(m + 1).to_f64_pair();
                text.push_str(&format!(
                    "c_{:<4} {:.12}   D_{:<4} = [c_{}, c_{}] ~ [{lo:.12}, {hi:.12}]\n",
                    m + 1,
                    c_lo,
                    m + 1,
                    l.ends[0],
                    l.ends[1]
                ));
            }
            emit(&Out { json, text }, common.format, &common.output)?;
            Ok(0)
        }
        Command::Cover { common, i, precision: p } => {
            let cfg = load_config(&common.config)?;
            let q = KneadingMap::parse_with(&common.family, &cfg)?;
            let i = positive("i", i)?;
            let probe = cutting_times(&q, 4 * i * i + 16)?;
            let ks = q.special_indices(probe.len() - 1);
            let ki = *ks.get(i - 1).ok_or(Error::IndexOutOfRange { index: i, available: ks.len() })?;
            let top = probe.small(ki).ok_or(Error::InsufficientCuttingTimes(ki))?;
            let tower = Tower::build(&q, top + 1, precision(p, &cfg)?)?;
            let ctx = CoverContext::new(&tower);
            let cover = ctx.cover(i)?;
            let json = json!({
                "map": q.to_string(),
                "i": i,
                "k_i": ki,
                "precision_bits": tower.bits(),
                "pieces": cover.pieces.iter().map(|l| l.to_json()).collect::<Vec<_>>(),
            });
            let mut text = format!("map: {q}\nDelta_{i} (k_{i} = {ki}), {} pieces\n", cover.pieces.len());
            for l in &cover.pieces {
                let (lo, hi) = l.interval.to_f64_pair();
                text.push_str(&format!("D_{:<5} [{lo:.12}, {hi:.12}]\n", l.n));
            }
            emit(&Out { json, text }, common.format, &common.output)?;
            Ok(0)
        }
        Command::Certify { common, imax, depth, precision: p, from_k } => {
            let cfg = load_config(&common.config)?;
            let q = KneadingMap::parse_with(&common.family, &cfg)?;
            let params = CertifyParams {
                depth: positive("depth", depth.unwrap_or(cfg.checks.horizon))?,
                i_max: positive("imax", imax)?,
                max_precision: precision(p, &cfg)?,
                from_k,
            };
            let cert = build_certificate(&q, &params, &cfg)?;
            let mut json = cert.to_json();
            json["generated_at"] = json!(timestamp());
            let mut text = format!("map: {q}\nroute: {:?}\n", cert.route);
            for c in &cert.checks {
                let tag = if c.required { "required" } else { "info" };
                match c.i {
                    Some(i) => text.push_str(&format!("[{tag}] i={i} {}\n", c.report)),
                    None => text.push_str(&format!("[{tag}] {}\n", c.report)),
                }
            }
            let verdict = json["overall"]["verdict"].as_str().unwrap_or_default().to_string();
            text.push_str(&format!("overall: {verdict}"));
            if let Some((name, w)) = &cert.refuted_by {
                text.push_str(&format!(" by {name} witness: {w}"));
            }
            text.push('\n');
            emit(&Out { json, text }, common.format, &common.output)?;
            Ok(match cert.overall {
                Overall::CertifiedAtDepth => 0,
                Overall::Refuted => 1,
                Overall::Inconclusive => 3,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
