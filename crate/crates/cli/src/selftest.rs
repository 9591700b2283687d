//! A quick pass over the invariants, small enough for every run.

use std::path::PathBuf;

use depthlab_core::complexity::{lift_code, run_unbounded, solovay_probe, Engine, Reduction, TimeBound};
use depthlab_core::pi01forcing::{force, join_check, FSource, ForceConfig, PruningSchedule};
use depthlab_core::randomness::{space_lemma_violations, MartingaleTable};
use depthlab_core::scalar::{format_rational, rational};
use depthlab_core::semimeasure::{
    m_stage_all, oracle_average_closed_form, oracle_average_enumerated, oracle_average_monte_carlo,
    semimeasure_to_timebound, total_mass, ComputableSemimeasure, MachineSemimeasure,
};
use depthlab_core::toyvm::{constant_index, find_program_prefix_pair, fixed_point, phi, programs_up_to};
use depthlab_core::toyvm::{FixedPointSearch, NoOracle, Oracle};
use depthlab_core::{BitString, Error, Rational, Result};
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::commands::emit;
use crate::config::Settings;

#[derive(Serialize)]
struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(name: &'static str, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        name,
        pass,
        detail: detail.into(),
    }
}

pub fn run(cfg: &mut Settings, seed: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let seed = cfg.get("seed", seed, 7)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = Engine::new(12);
    let mut checks = Vec::new();

    let pair = find_program_prefix_pair(&programs_up_to(14));
    checks.push(check("prefix_free", pair.is_none(), format!("{pair:?}")));

    let kraft = e.kraft_sum(1000, None);
    let mass = total_mass(&m_stage_all(&e, 1000, None));
    checks.push(check(
        "kraft_and_mass",
        kraft <= Rational::one() && mass <= Rational::one(),
        format!("kraft {} mass {}", format_rational(&kraft), format_rational(&mass)),
    ));

    let monotone = BitString::all_up_to(4).all(|s| e.k_stage(&s, 1000, None).value <= e.k_stage(&s, 50, None).value);
    checks.push(check("k_stage_monotone", monotone, "strings up to length 4"));

    let delta = rational(2, 1);
    let mut bad = 0;
    for _ in 0..200 {
        let d: MartingaleTable<Rational> = MartingaleTable::random(5, &mut rng);
        bad += space_lemma_violations(&d, &delta, &delta, 2)?.len();
    }
    checks.push(check("space_lemma_sample", bad == 0, format!("{bad} violations in 200 tables")));

    let t = TimeBound::poly(10, 1);
    let sigma = BitString::from_u64(0, 1);
    let enumerated = oracle_average_enumerated(&e, &sigma, &t, 2)?;
    let closed = oracle_average_closed_form(&e, &sigma, &t, 2)?;
    let mc = oracle_average_monte_carlo(&e, &sigma, &t, 2, 2000, &mut rng)?;
    checks.push(check(
        "oracle_average",
        enumerated == closed && mc.agrees_with(&enumerated, 3.0),
        format!("{} vs mean {:.6}", format_rational(&enumerated), mc.mean),
    ));

    let base = ComputableSemimeasure::frozen(&MachineSemimeasure::new(&e, None), 1000, &rational(1, 2), 3)?;
    let mut stages = Vec::new();
    for _ in 0..3 {
        let m = ComputableSemimeasure::random_below(&base, &mut rng);
        stages.push(semimeasure_to_timebound(&m, &rational(4, 1), 2, &e, None, 1000)?);
    }
    checks.push(check("conversion", true, format!("stages {stages:?}")));

    let a = Oracle::prefix(BitString::from_u64(0b1011_0110, 8));
    let mut lift_ok = true;
    for s in BitString::all_up_to(3) {
        let r = e.k_stage(&s, 1000, Some(&a));
        if let Some(w) = r.witness {
            let lifted = lift_code(&w, &Reduction::identity(), None).program;
            lift_ok &= run_unbounded(&lifted, &a, 1000).ok().as_ref() == Some(&s)
                && lifted.len() == w.len() + lifted.overhead();
        }
    }
    checks.push(check("lift_identity", lift_ok, "strings up to length 3"));

    let search = FixedPointSearch::default();
    let fp = fixed_point(|i| constant_index(i.to_u64().unwrap_or(0)), &search)?;
    let own = fp.index.to_u64().unwrap_or(0);
    let quine = [0, 1, own].iter().all(|&x| phi(&fp.index, x, &NoOracle, search.budget).value == Some(own));
    checks.push(check("self_index", quine, format!("index {own}")));

    let fc = ForceConfig::new(PruningSchedule::new(4), FSource::HaltingDnc { stage: 1000 }, 3, 100_000);
    let trace = force(&fc)?;
    checks.push(check(
        "forcing_replay",
        trace.reconstruction_ok && trace.b_member,
        format!("B = {}", trace.b_prefix),
    ));

    let (x, y) = (BitString::from_u64(0b0101, 4), BitString::from_u64(0b0011, 4));
    let f = x.xor(&y)?;
    let good = join_check(&e, &f, &x, &y, 4, 500)?.xor;
    let flipped = f.xor(&BitString::from_u64(1, 4))?;
    let bad_join = join_check(&e, &flipped, &x, &y, 4, 500)?.xor;
    checks.push(check("join_xor", good && !bad_join, "one-bit mutation"));

    let sol = solovay_probe(&e, &TimeBound::poly(4, 2), 32, 8, 10_000);
    checks.push(check("solovay_containment", sol.violations.is_empty(), format!("{} tight", sol.tight.len())));

    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    emit(cfg, "selftest", &checks, out.as_deref())?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Invariant(format!("failed: {}", failed.join(", "))))
    }
}
