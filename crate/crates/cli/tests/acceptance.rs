//! Desk-scale acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::process::Command;
use std::time::Instant;

use depthlab_core::complexity::{lift_code, Engine, KValue, Reduction, TimeBound};
use depthlab_core::constructions::{build_deep_random, claim2_factor, delta, BuilderConfig};
use depthlab_core::pi01forcing::{
    find_join_triple, force, join_check, ClassView, FSource, ForceConfig, PruningSchedule,
};
use depthlab_core::randomness::{
    dyadic_family, measure_cheap_oracles, space_lemma_length, space_lemma_violations, MartingaleTable,
    PsiContext, UniversalMixture,
};
use depthlab_core::scalar::{format_rational, rational};
use depthlab_core::semimeasure::{
    m_stage, m_stage_all, oracle_average_closed_form, oracle_average_enumerated,
    oracle_average_monte_carlo, semimeasure_to_timebound, total_mass, ComputableSemimeasure,
    MachineSemimeasure,
};
use depthlab_core::toyvm::{
    constant_index, find_program_prefix_pair, fixed_point, phi, programs_up_to, FixedPointSearch,
    NoOracle, Oracle, RunOutcome,
};
use depthlab_core::{BitString, Rational};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn prefix_freeness() -> Outcome {
    let programs = programs_up_to(18);
    let pair = find_program_prefix_pair(&programs);
    outcome(pair.is_none(), format!("{} programs, pair {pair:?}", programs.len()))
}

fn kraft_and_mass() -> Outcome {
    let e = Engine::new(16);
    let kraft = e.kraft_sum(10_000, None);
    // independent sum straight from the program list
    let mut mass = Rational::zero();
    let table = e.table(None, 10_000);
    for (i, p) in e.programs().iter().enumerate() {
        if table.output_within(i, 10_000).is_some() {
            mass += Rational::new(1.into(), num_bigint::BigInt::one() << p.len());
        }
    }
    let staged = total_mass(&m_stage_all(&e, 10_000, None));
    let pass = kraft <= mass && mass <= Rational::one() && staged == mass;
    outcome(
        pass,
        format!("kraft {:.6} mass {:.6}", ratio_f64(&kraft), ratio_f64(&mass)),
    )
}

fn ratio_f64(r: &Rational) -> f64 {
    depthlab_core::Scalar::to_f64(r)
}

fn monotonicity() -> Outcome {
    let e = Engine::new(16);
    let stages = [10u64, 100, 1000, 10_000];
    let bounds = [TimeBound::poly(2, 1), TimeBound::poly(10, 1), TimeBound::poly(10, 2)];
    let mut bad = Vec::new();
    for sigma in BitString::all_up_to(6) {
        for w in stages.windows(2) {
            if e.k_stage(&sigma, w[1], None).value > e.k_stage(&sigma, w[0], None).value {
                bad.push(format!("K_s {sigma}"));
            }
            if m_stage(&e, &sigma, w[1], None) < m_stage(&e, &sigma, w[0], None) {
                bad.push(format!("m_s {sigma}"));
            }
        }
        for w in bounds.windows(2) {
            if e.k_time_bounded(&sigma, &w[1], None).value > e.k_time_bounded(&sigma, &w[0], None).value {
                bad.push(format!("K^t {sigma}"));
            }
        }
    }
    outcome(bad.is_empty(), format!("127 strings, {} failures {:?}", bad.len(), bad.first()))
}

fn space_lemma() -> Outcome {
    let deltas = [rational(3, 2), rational(2, 1), rational(3, 1)];
    let mut tables = 0usize;
    let mut violations = 0usize;
    for depth in 1..=4 {
        let units = if depth == 4 { 2 } else { 4 };
        for d in dyadic_family(depth, units) {
            tables += 1;
            for delta in &deltas {
                for k in 1..=8 {
                    violations += space_lemma_violations(&d, delta, delta, k).unwrap().len();
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..10_000 {
        let depth = rng.gen_range(1..=6);
        let d: MartingaleTable<Rational> = MartingaleTable::random(depth, &mut rng);
        let delta = &deltas[rng.gen_range(0..deltas.len())];
        let k = rng.gen_range(1..=8);
        violations += space_lemma_violations(&d, delta, delta, k).unwrap().len();
    }
    // the length itself against its defining inequality
    let lengths_ok = deltas.iter().all(|delta| {
        (1..=8u64).all(|k| {
            let l = space_lemma_length(delta, k).unwrap();
            let need = Rational::from_integer((k + 1).into()) * delta / (delta - Rational::one());
            let two_l = Rational::from_integer(num_bigint::BigInt::one() << l);
            two_l >= need && (l == 0 || two_l / Rational::from_integer(2.into()) < need)
        })
    });
    outcome(
        violations == 0 && lengths_ok,
        format!("{tables} family tables + 10000 random, {violations} violations"),
    )
}

fn conversion() -> Outcome {
    let e = Engine::new(14);
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let c = rational(2, 1);
    let mut checked = 0;
    let mut failures = Vec::new();
    for i in 0..20u64 {
        let stage = [300u64, 1000, 3000, 10_000][i as usize % 4];
        let factor = rational(1, 1 + i % 3);
        let max_len = 1 + (i as usize % 3);
        let base = ComputableSemimeasure::frozen(&MachineSemimeasure::new(&e, None), stage, &factor, max_len).unwrap();
        let m = ComputableSemimeasure::random_below(&base, &mut rng);
        let n = max_len;
        let s = match semimeasure_to_timebound(&m, &c, n, &e, None, 10_000) {
            Ok(s) => s,
            Err(err) => {
                failures.push(format!("#{i}: {err}"));
                continue;
            }
        };
        for sigma in BitString::all_of_length(n) {
            let v = m.get(&sigma);
            if v.is_zero() {
                continue;
            }
            checked += 1;
            if !(v < &c * m_stage(&e, &sigma, s, None)) {
                failures.push(format!("#{i} at {sigma}"));
            }
        }
    }
    outcome(failures.is_empty(), format!("{checked} strings checked, failures {failures:?}"))
}

fn builder() -> Outcome {
    let e = Engine::new(18);
    let d = UniversalMixture::new(&e, 8).freeze(10_000);
    let cfg = BuilderConfig {
        rounds: 8,
        oracle: Oracle::halting(10_000),
        time_bound: TimeBound::poly(2, 2),
    };
    let trace = match build_deep_random(&cfg, &d, &e) {
        Ok(t) => t,
        Err(err) => return outcome(false, err.to_string()),
    };
    // recheck both claims from the emitted sigmas
    let sigmas = trace.sigmas();
    let d_root = d.value(&BitString::new());
    let mut claim2 = true;
    let mut claim3 = true;
    for n in 1..sigmas.len() {
        claim2 &= d.value(&sigmas[n]) <= &d_root * claim2_factor(n);
        let l = space_lemma_length(&delta(n), 1 << n).unwrap() as usize;
        claim3 &= sigmas[n].len() - sigmas[n - 1].len() == l && sigmas[n - 1].is_prefix_of(&sigmas[n]);
    }
    let unflagged = trace.checks.unflagged_rounds;
    outcome(
        claim2 && claim3 && trace.checks.claim2 && trace.checks.claim3 && unflagged >= 6,
        format!("|sigma_8| = {}, unflagged {unflagged}/8", trace.output().len()),
    )
}

fn oracle_average() -> Outcome {
    let e = Engine::new(19);
    let t = TimeBound::poly(10, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sigmas: Vec<BitString> = BitString::all_up_to(3).take(10).collect();
    let mut bad = Vec::new();
    for sigma in &sigmas {
        let exact = oracle_average_enumerated(&e, sigma, &t, 2).unwrap();
        let closed = oracle_average_closed_form(&e, sigma, &t, 2).unwrap();
        let mc = oracle_average_monte_carlo(&e, sigma, &t, 2, 10_000, &mut rng).unwrap();
        if exact != closed || !mc.agrees_with(&exact, 3.0) {
            bad.push(format!("{sigma}: {} {} {:.3e}", format_rational(&exact), format_rational(&closed), mc.mean));
        }
    }
    outcome(bad.is_empty(), format!("10 strings at cap 19, d = 2, mismatches {bad:?}"))
}

fn psi_checks() -> Outcome {
    let e = Engine::new(16);
    let t = TimeBound::poly(10, 1);
    let prefix = BitString::from_u64(0b01, 2);
    let mut monotone = true;
    let mut last = Rational::zero();
    for l in 0..=4 {
        let v = PsiContext::new(&e, t.clone(), t.clone(), rational(2, 1), l, 1000)
            .unwrap()
            .psi(&e, &prefix)
            .unwrap()
            .value;
        monotone &= v >= last;
        last = v;
    }
    let mut last = Rational::zero();
    for s in [30u64, 300, 3000] {
        let v = PsiContext::new(&e, t.clone(), t.clone(), rational(2, 1), 3, s)
            .unwrap()
            .psi(&e, &prefix)
            .unwrap()
            .value;
        monotone &= v >= last;
        last = v;
    }
    let mut ctx = PsiContext::new(&e, t.clone(), t, rational(1, 1), 3, 1000).unwrap();
    ctx.c = ctx.domination_constant(&e, 2).unwrap();
    let avg = ctx.average(&e, 2).unwrap();
    outcome(
        monotone && avg <= Rational::one(),
        format!("c = {}, average {}", format_rational(&ctx.c), format_rational(&avg)),
    )
}

fn markov() -> Outcome {
    let e = Engine::new(16);
    let t = TimeBound::poly(10, 1);
    let strings = ["0", "1", "01", "10", "11"];
    let mut bad = Vec::new();
    for x in strings {
        let x: BitString = x.parse().unwrap();
        for k in [1u64, 2, 4, 8] {
            let r = measure_cheap_oracles(&e, &x, x.len(), k, &t, 300, 2).unwrap();
            if r.markov_holds(k) != Some(true) {
                bad.push(format!("{x} k={k}"));
            }
        }
    }
    outcome(bad.is_empty(), format!("5 strings x 4 values of k, failures {bad:?}"))
}

fn lifting() -> Outcome {
    let e = Engine::new(16);
    let a = Oracle::prefix(BitString::from_u64(0b1011_0010_1110_0101, 16));
    let identity = Reduction::identity();
    let t = TimeBound::poly(10, 1);
    let mut finite = 0;
    let mut bad = Vec::new();
    for sigma in BitString::all_up_to(6) {
        let r = e.k_time_bounded(&sigma, &t, Some(&a));
        let KValue::Bits(k) = r.value else { continue };
        finite += 1;
        let w = r.witness.unwrap();
        let lift = lift_code(&w, &identity, Some(&t));
        let run = lift.program.run(&a, t.at(sigma.len()), None);
        let out_ok = matches!(&run.outcome, RunOutcome::Halted { output, .. } if *output == sigma);
        let time_ok = run.total_steps <= lift.t_prime.as_ref().unwrap().at(sigma.len());
        if !(out_ok && time_ok && lift.program.len() <= k + lift.program.overhead()) {
            bad.push(sigma.to_string());
        }
    }
    outcome(
        bad.is_empty(),
        format!("{finite} strings with finite K^A, w0 = {}, failures {bad:?}", identity.program.len()),
    )
}

fn recursion_theorem() -> Outcome {
    let search = FixedPointSearch::default();
    let fp = fixed_point(|e| constant_index(e.to_u64().unwrap_or(0)), &search).unwrap();
    let own = fp.index.to_u64().unwrap();
    let ok = [0u64, 1, 2, 3, 7, 100, own]
        .iter()
        .all(|&x| phi(&fp.index, x, &NoOracle, search.budget).value == Some(own));
    outcome(ok, format!("fixed point {own}"))
}

fn forcing() -> Outcome {
    let schedules = [
        r#"{"stages":[{"s":0,"forbid":["0"]}],"depth":4}"#,
        r#"{"stages":[{"s":0,"forbid":["11"]},{"s":3,"forbid":["100","0111"]}],"depth":4}"#,
        r#"{"stages":[{"s":0,"forbid":["1","01"]},{"s":2,"forbid":["0011","0001"]}],"depth":5}"#,
    ];
    let mut bad = Vec::new();
    for (i, text) in schedules.iter().enumerate() {
        let sched = PruningSchedule::from_json(text).unwrap();
        let cfg = ForceConfig::new(sched.clone(), FSource::HaltingDnc { stage: 10_000 }, 6, 100_000);
        let trace = match force(&cfg) {
            Ok(t) => t,
            Err(err) => {
                bad.push(format!("#{i}: {err}"));
                continue;
            }
        };
        // membership at every stage, with the constraints of the last class
        let last = trace.steps.last().unwrap();
        let mut constraints = last.class.constraints.clone();
        constraints.push(depthlab_core::pi01forcing::Constraint {
            m: last.m.index,
            value: last.a_value,
        });
        for stage in [0u64, 1, 2, 3, 5, 100_000] {
            let view = ClassView::new(&sched, stage, &cfg.phi, cfg.stage_budget);
            for d in 0..=trace.b_prefix.len() {
                if !view.nonempty(&trace.b_prefix.prefix(d), &constraints).unwrap() {
                    bad.push(format!("#{i}: not a member at stage {stage}, depth {d}"));
                }
            }
        }
        let recovered = trace
            .reconstruction
            .iter()
            .zip(&trace.steps)
            .all(|(r, s)| r.f_recovered && r.probe_candidates == vec![s.probe.index.clone()] && r.f_value == s.f_value);
        if !(recovered && trace.reconstruction_ok && trace.b_member && trace.nested) {
            bad.push(format!("#{i}: replay"));
        }
    }
    outcome(bad.is_empty(), format!("3 schedules, 6 steps each, failures {bad:?}"))
}

fn join() -> Outcome {
    let e = Engine::new(18);
    let x: BitString = "0110100110010110".parse().unwrap();
    let y: BitString = "0011101000101101".parse().unwrap();
    let f = x.xor(&y).unwrap();
    let xor_ok = join_check(&e, &f, &x, &y, 4, 10_000).unwrap().xor;
    let mutated = f.xor(&BitString::from_u64(1 << 5, 16)).unwrap();
    let mutation_fails = !join_check(&e, &mutated, &x, &y, 4, 10_000).unwrap().xor;
    let Some((tf, tx, ty)) = find_join_triple(&e, 16, 4, 10_000) else {
        return outcome(false, "no triple found");
    };
    let report = join_check(&e, &tf, &tx, &ty, 4, 10_000).unwrap();
    outcome(
        xor_ok && mutation_fails && report.passes(),
        format!("triple F={tf} X={tx} Y={ty}"),
    )
}

fn reproducibility() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_depthlab"))
            .args(["selftest", "--seed", "7"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    outcome(
        a.status.success() && a.stdout == b.stdout && !a.stdout.is_empty(),
        format!("{} bytes", a.stdout.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("prefix-freeness up to 18 bits", prefix_freeness),
        ("Kraft sum and semimeasure mass", kraft_and_mass),
        ("monotonicity in stage and time bound", monotonicity),
        ("Space Lemma", space_lemma),
        ("semimeasure to time bound conversion", conversion),
        ("deep random builder", builder),
        ("oracle-average identity", oracle_average),
        ("truncated integral test", psi_checks),
        ("Markov bound on cheap oracles", markov),
        ("lifting with the identity reduction", lifting),
        ("recursion theorem self-index", recursion_theorem),
        ("forcing replay", forcing),
        ("join check", join),
        ("selftest reproducibility", reproducibility),
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (name, f) in criteria {
        if filter.as_ref().is_some_and(|p| !name.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let r = f();
        let status = if r.pass { "PASS" } else { "FAIL" };
        println!("{status} {name} ({:.1}s): {}", start.elapsed().as_secs_f64(), r.detail);
        failed += usize::from(!r.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
