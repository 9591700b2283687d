use depthlab_core::complexity::Engine;
use depthlab_core::constructions::symdiff;
use depthlab_core::pi01forcing::PruningSchedule;
use depthlab_core::randomness::{space_lemma_violations, UniversalMixture};
use depthlab_core::scalar::rational;
use depthlab_core::toyvm::Program;
use depthlab_core::{BitString, ExactMartingale, FloatMartingale, Rational};
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bits(max: usize) -> impl Strategy<Value = BitString> {
    proptest::collection::vec(any::<bool>(), 0..=max).prop_map(BitString::from_bits)
}

proptest! {
    #[test]
    fn program_survives_trailing_bits(body in bits(40), tail in bits(20)) {
        let p = Program::encode(&body);
        prop_assert_eq!(Program::decode(p.bits()).unwrap(), p.clone());
        let (q, used) = Program::decode_prefix(p.bits().concat(&tail).bits()).unwrap();
        prop_assert_eq!(used, p.len());
        prop_assert_eq!(q, p);
    }

    #[test]
    fn symdiff_is_an_involution(pair in (0usize..64).prop_flat_map(|n| (
        proptest::collection::vec(any::<bool>(), n),
        proptest::collection::vec(any::<bool>(), n),
    ))) {
        let (a, x) = (BitString::from_bits(pair.0), BitString::from_bits(pair.1));
        prop_assert_eq!(symdiff(&a, &symdiff(&a, &x).unwrap()).unwrap(), x);
    }

    #[test]
    fn random_tables_are_fair_and_obey_space_lemma(seed in any::<u64>(), depth in 1usize..7, k in 1u64..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = ExactMartingale::random(depth, &mut rng);
        prop_assert!(d.validate().is_ok());
        prop_assert!(space_lemma_violations(&d, &rational(2, 1), &rational(2, 1), k).unwrap().is_empty());
        let f = FloatMartingale::random(depth, &mut rng);
        prop_assert!(f.validate().is_ok());
    }

    #[test]
    fn forbidden_sets_only_grow(cuts in proptest::collection::vec((0u64..10, bits(4)), 0..6), x in bits(5)) {
        let mut sched = PruningSchedule::new(5);
        for (s, w) in cuts {
            sched = sched.forbid(s, [w]).unwrap();
        }
        for s in 0..10 {
            prop_assert!(sched.admits(&x, s + 1) <= sched.admits(&x, s));
        }
    }
}

#[test]
fn frozen_mixture_is_a_supermartingale() {
    let e = Engine::new(12);
    let d = UniversalMixture::new(&e, 6).freeze(2000);
    let two = rational(2, 1);
    for sigma in BitString::all_up_to(6) {
        let children = d.value(&sigma.with_bit(false)) + d.value(&sigma.with_bit(true));
        assert!(children <= &two * d.value(&sigma), "at {sigma}");
        assert!(d.value(&sigma) >= Rational::zero());
    }
}
