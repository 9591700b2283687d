use std::path::{Path, PathBuf};

use depthlab_core::complexity::{solovay_probe, Engine, TimeBound, CSV_HEADER};
use depthlab_core::constructions::{build_deep_random, BuilderConfig, depth_profile};
use depthlab_core::pi01forcing::{force as run_force, join_check as run_join, FSource, ForceConfig, PruningSchedule};
use depthlab_core::randomness::{
    dyadic_family, measure_cheap_oracles, space_lemma_length, space_lemma_violations, MartingaleTable,
    PsiContext, UniversalMixture,
};
use depthlab_core::scalar::{format_rational, parse_rational};
use depthlab_core::semimeasure::{
    m_stage_all, oracle_average_closed_form, oracle_average_enumerated, oracle_average_monte_carlo,
    semimeasure_to_timebound, total_mass, ComputableSemimeasure,
};
use depthlab_core::toyvm::Oracle;
use depthlab_core::{BitString, Error, Rational, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::Settings;
use crate::Common;

pub const DEFAULT_CAP: usize = 14;

/// Writes `{command, config, result}` as pretty JSON.
pub fn emit(cfg: &Settings, command: &str, result: impl Serialize, out: Option<&Path>) -> Result<()> {
    let doc = json!({
        "command": command,
        "config": cfg.resolved(),
        "result": result,
    });
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    write_text(&text, out)
}

pub fn write_text(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// A file holding 0/1 characters, or the characters themselves.
pub fn read_bits(arg: &str) -> Result<BitString> {
    let path = Path::new(arg);
    if path.is_file() {
        return std::fs::read_to_string(path)?.trim().parse();
    }
    arg.trim().parse()
}

fn engine(cfg: &mut Settings, common: &Common) -> Result<Engine> {
    let cap = cfg.get("cap", common.cap, DEFAULT_CAP)?;
    if cap == 0 {
        return Err(Error::InvalidArgument("cap must be positive".into()));
    }
    Ok(Engine::new(cap))
}

fn oracle(cfg: &mut Settings, common: &Common) -> Result<Option<Oracle>> {
    let spec = cfg.get("oracle", common.oracle.clone(), "none".to_string())?;
    Oracle::parse(&spec)
}

fn time_bound(cfg: &mut Settings, key: &str, flag: Option<String>, default: &str) -> Result<TimeBound> {
    TimeBound::parse(&cfg.get(key, flag, default.to_string())?)
}

fn rational_arg(cfg: &mut Settings, key: &str, flag: Option<String>, default: &str) -> Result<Rational> {
    parse_rational(&cfg.get(key, flag, default.to_string())?)
}

pub fn k(cfg: &mut Settings, sigma: String, t: Option<String>, stage: Option<u64>, common: Common) -> Result<()> {
    let sigma: BitString = sigma.parse()?;
    cfg.opt("sigma", Some(sigma.to_string()))?;
    let e = engine(cfg, &common)?;
    let o = oracle(cfg, &common)?;
    let t = cfg.opt("t", t)?;
    let stage = cfg.opt("stage", stage)?;
    let (result, descriptor) = match (t, stage) {
        (Some(t), _) => {
            let tb = TimeBound::parse(&t)?;
            (e.k_time_bounded(&sigma, &tb, o.as_ref()), t)
        }
        (None, Some(s)) => (e.k_stage(&sigma, s, o.as_ref()), format!("stage:{s}")),
        (None, None) => return Err(Error::InvalidArgument("give --t or --stage".into())),
    };
    let text = format!("{CSV_HEADER}\n{}\n", result.csv_row(&sigma, &descriptor));
    write_text(&text, common.out.as_deref())
}

pub fn m(
    cfg: &mut Settings,
    sigma: Option<String>,
    max_len: Option<usize>,
    stage: Option<u64>,
    common: Common,
) -> Result<()> {
    let e = engine(cfg, &common)?;
    let o = oracle(cfg, &common)?;
    let s = cfg.need("stage", stage)?;
    let all = m_stage_all(&e, s, o.as_ref());
    let mass = total_mass(&all);
    let entries: Vec<_> = match cfg.opt("sigma", sigma)? {
        Some(raw) => {
            let sigma: BitString = raw.parse()?;
            let v = all.get(&sigma).cloned().unwrap_or_default();
            vec![(sigma, v)]
        }
        None => {
            let l = cfg.get("max_len", max_len, 4)?;
            all.into_iter().filter(|(s, _)| s.len() <= l).collect()
        }
    };
    let rows: Vec<_> = entries
        .iter()
        .map(|(s, v)| json!({"sigma": s, "m": format_rational(v)}))
        .collect();
    emit(
        cfg,
        "m",
        json!({"entries": rows, "total_mass": format_rational(&mass)}),
        common.out.as_deref(),
    )
}

pub fn convert_timebound(
    cfg: &mut Settings,
    table: PathBuf,
    c: Option<String>,
    n: Option<usize>,
    ceiling: Option<u64>,
    common: Common,
) -> Result<()> {
    cfg.opt("table", Some(table.display().to_string()))?;
    let m = ComputableSemimeasure::read(&table)?;
    let c = rational_arg(cfg, "c", c, "2")?;
    let n = cfg.need("n", n)?;
    let ceiling = cfg.get("ceiling", ceiling, 100_000)?;
    let e = engine(cfg, &common)?;
    let o = oracle(cfg, &common)?;
    let stage = semimeasure_to_timebound(&m, &c, n, &e, o.as_ref(), ceiling)?;
    emit(cfg, "convert-timebound", json!({"n": n, "stage": stage}), common.out.as_deref())
}

pub struct SpaceLemmaArgs {
    pub delta: Option<String>,
    pub k: Option<u64>,
    pub mode: Option<String>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub depth: Option<usize>,
    pub units: Option<u64>,
    pub table: Option<PathBuf>,
}

#[derive(Serialize)]
struct SpaceLemmaReport {
    l: u32,
    tables: usize,
    violations: usize,
    first_violation: Option<String>,
}

pub fn space_lemma(cfg: &mut Settings, a: SpaceLemmaArgs, out: Option<PathBuf>) -> Result<()> {
    let delta = rational_arg(cfg, "delta", a.delta, "2")?;
    let k = cfg.get("k", a.k, 2)?;
    let l = space_lemma_length(&delta, k)?;
    let tables: Vec<MartingaleTable<Rational>> = match cfg.opt("table", a.table.map(|p| p.display().to_string()))? {
        Some(p) => vec![MartingaleTable::read(Path::new(&p))?],
        None => match cfg.get("mode", a.mode, "exhaustive".to_string())?.as_str() {
            "exhaustive" => {
                let depth = cfg.get("depth", a.depth, 4)?;
                let units = cfg.get("units", a.units, 2)?;
                dyadic_family(depth, units)
            }
            "sample" => {
                let depth = cfg.get("depth", a.depth, 6)?;
                let n = cfg.get("n", a.n, 1000)?;
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.get("seed", a.seed, 0)?);
                (0..n).map(|_| MartingaleTable::random(depth, &mut rng)).collect()
            }
            other => return Err(Error::InvalidArgument(format!("unknown mode {other:?}"))),
        },
    };
    let mut violations = 0;
    let mut first = None;
    for d in &tables {
        let v = space_lemma_violations(d, &delta, &delta, k)?;
        if first.is_none() {
            first = v.first().map(|x| format!("{}: {} < {k}", x.sigma, x.count));
        }
        violations += v.len();
    }
    emit(
        cfg,
        "space-lemma",
        SpaceLemmaReport {
            l,
            tables: tables.len(),
            violations,
            first_violation: first,
        },
        out.as_deref(),
    )
}

#[allow(clippy::too_many_arguments)]
pub fn psi(
    cfg: &mut Settings,
    prefix: String,
    t: Option<String>,
    t_prime: Option<String>,
    c: Option<String>,
    max_len: Option<usize>,
    stage: Option<u64>,
    common: Common,
) -> Result<()> {
    let prefix = read_bits(&prefix)?;
    cfg.opt("prefix", Some(prefix.to_string()))?;
    let e = engine(cfg, &common)?;
    let t = time_bound(cfg, "t", t, "poly:10,1")?;
    let tp = time_bound(cfg, "t_prime", t_prime, "poly:10,1")?;
    let c = rational_arg(cfg, "c", c, "1")?;
    let l = cfg.get("max_len", max_len, 3)?;
    let s = cfg.get("stage", stage, 1000)?;
    let r = PsiContext::new(&e, t, tp, c, l, s)?.psi(&e, &prefix)?;
    emit(cfg, "psi", r, common.out.as_deref())
}

pub fn avg(
    cfg: &mut Settings,
    sigma: String,
    t: Option<String>,
    d: Option<usize>,
    samples: Option<usize>,
    seed: Option<u64>,
    common: Common,
) -> Result<()> {
    let sigma: BitString = sigma.parse()?;
    cfg.opt("sigma", Some(sigma.to_string()))?;
    let e = engine(cfg, &common)?;
    let t = time_bound(cfg, "t", t, "poly:10,1")?;
    let d = cfg.get("d", d, 2)?;
    let samples = cfg.get("samples", samples, 10_000)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.get("seed", seed, 0)?);
    let enumerated = oracle_average_enumerated(&e, &sigma, &t, d)?;
    let closed = oracle_average_closed_form(&e, &sigma, &t, d)?;
    let mc = oracle_average_monte_carlo(&e, &sigma, &t, d, samples, &mut rng)?;
    emit(
        cfg,
        "avg",
        json!({
            "enumerated": format_rational(&enumerated),
            "closed_form": format_rational(&closed),
            "exact_agree": enumerated == closed,
            "monte_carlo": mc,
            "within_3se": mc.agrees_with(&enumerated, 3.0),
        }),
        common.out.as_deref(),
    )
}

#[allow(clippy::too_many_arguments)]
pub fn measure_cheap(
    cfg: &mut Settings,
    x: String,
    n: Option<usize>,
    k: Option<u64>,
    t: Option<String>,
    stage: Option<u64>,
    d: Option<usize>,
    common: Common,
) -> Result<()> {
    let x = read_bits(&x)?;
    cfg.opt("x", Some(x.to_string()))?;
    let e = engine(cfg, &common)?;
    let n = cfg.get("n", n, x.len())?;
    let k = cfg.get("k", k, 2)?;
    let t = time_bound(cfg, "t", t, "poly:10,1")?;
    let s = cfg.get("stage", stage, 100)?;
    let d = cfg.get("d", d, 2)?;
    let r = measure_cheap_oracles(&e, &x, n, k, &t, s, d)?;
    let markov = r.markov_holds(k);
    emit(
        cfg,
        "measure-cheap",
        json!({"measure": format_rational(&r.measure), "record": r, "markov_holds": markov}),
        common.out.as_deref(),
    )
}

pub fn profile(
    cfg: &mut Settings,
    input: String,
    t: Option<String>,
    stage: Option<u64>,
    csv: Option<PathBuf>,
    common: Common,
) -> Result<()> {
    let x = read_bits(&input)?;
    let e = engine(cfg, &common)?;
    let o = oracle(cfg, &common)?;
    let t = time_bound(cfg, "t", t, "poly:10,1")?;
    let s = cfg.get("stage", stage, 10_000)?;
    let p = depth_profile(&e, &x, &t, s, o.as_ref());
    let text = p.to_csv();
    match csv.or(common.out) {
        Some(path) => {
            std::fs::write(&path, &text)?;
            emit(cfg, "profile", &p, None)
        }
        None => write_text(&text, None),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn build_deep(
    cfg: &mut Settings,
    rounds: Option<usize>,
    mart: Option<String>,
    time_bound_flag: Option<String>,
    stage: Option<u64>,
    components: Option<usize>,
    common: Common,
) -> Result<()> {
    let rounds = cfg.get("rounds", rounds, 4)?;
    let mart = cfg.get("mart", mart, "mixture".to_string())?;
    if mart != "mixture" {
        return Err(Error::InvalidArgument(format!("unknown martingale {mart:?}")));
    }
    let t = time_bound(cfg, "T", time_bound_flag, "poly:2,2")?;
    let stage = cfg.get("stage", stage, 10_000)?;
    let components = cfg.get("components", components, 8)?;
    let e = engine(cfg, &common)?;
    let oracle_spec = cfg.get("oracle", common.oracle.clone(), "halting:10000".to_string())?;
    let oracle = Oracle::parse(&oracle_spec)?
        .ok_or_else(|| Error::InvalidArgument("the builder needs an oracle".into()))?;
    let d = UniversalMixture::new(&e, components).freeze(stage);
    let trace = build_deep_random(
        &BuilderConfig {
            rounds,
            oracle,
            time_bound: t,
        },
        &d,
        &e,
    )?;
    emit(cfg, "build-deep", trace, common.out.as_deref())
}

fn f_source(spec: &str) -> Result<FSource> {
    if spec == "halting-dnc" {
        return Ok(FSource::HaltingDnc { stage: 10_000 });
    }
    if let Some(s) = spec.strip_prefix("halting-dnc:") {
        let stage = s.parse().map_err(|_| Error::Parse(format!("bad stage {s:?}")))?;
        return Ok(FSource::HaltingDnc { stage });
    }
    if let Some(p) = spec.strip_prefix("table:") {
        let bits = read_bits(p)?;
        return Ok(FSource::Table((0..bits.len()).map(|i| (i as u64, bits.bit(i))).collect()));
    }
    Err(Error::Parse(format!("unknown f source {spec:?}")))
}

pub fn force(
    cfg: &mut Settings,
    class: PathBuf,
    f: Option<String>,
    a: Option<String>,
    steps: Option<usize>,
    budget: Option<u64>,
    out: Option<PathBuf>,
) -> Result<()> {
    cfg.opt("class", Some(class.display().to_string()))?;
    let schedule = PruningSchedule::read(&class)?;
    let f = f_source(&cfg.get("f", f, "halting-dnc".to_string())?)?;
    let steps = cfg.get("steps", steps, 8)?;
    let budget = cfg.get("budget", budget, 100_000)?;
    let mut fc = ForceConfig::new(schedule, f, steps, budget);
    fc.a = cfg.opt("a", a)?.map(|s| read_bits(&s)).transpose()?;
    let trace = run_force(&fc)?;
    emit(cfg, "force", trace, out.as_deref())
}

pub fn join_check(
    cfg: &mut Settings,
    f: String,
    x: String,
    y: String,
    k: Option<i64>,
    stage: Option<u64>,
    common: Common,
) -> Result<()> {
    let (f, x, y) = (read_bits(&f)?, read_bits(&x)?, read_bits(&y)?);
    cfg.opt("F", Some(f.to_string()))?;
    cfg.opt("X", Some(x.to_string()))?;
    cfg.opt("Y", Some(y.to_string()))?;
    let k = cfg.get("k", k, 4)?;
    let s = cfg.get("stage", stage, 10_000)?;
    let common = Common {
        cap: common.cap.or(Some(18)),
        ..common
    };
    let e = engine(cfg, &common)?;
    let r = run_join(&e, &f, &x, &y, k, s)?;
    let passes = r.passes();
    emit(cfg, "join-check", json!({"report": r, "passes": passes}), common.out.as_deref())
}

pub fn solovay(
    cfg: &mut Settings,
    t: Option<String>,
    n: Option<u64>,
    c: Option<u64>,
    stage: Option<u64>,
    common: Common,
) -> Result<()> {
    let t = time_bound(cfg, "t", t, "poly:4,2")?;
    let n = cfg.get("n", n, 256)?;
    let c = cfg.get("c", c, 8)?;
    let s = cfg.get("stage", stage, 100_000)?;
    let e = engine(cfg, &common)?;
    let r = solovay_probe(&e, &t, n, c, s);
    if !r.violations.is_empty() && (0..n).all(|i| t.at(BitString::binary_expansion(i).len()) <= s) {
        return Err(Error::Invariant(format!("K_s exceeds K^t at {:?}", r.violations)));
    }
    emit(cfg, "solovay", r, common.out.as_deref())
}
