mod common;

use ospec::ground::GroundRule;
use ospec::solve::{brute_force_models, enumerate, is_stable_model, select, SolveRequest};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn program(seed: u64) -> ospec::ground::GroundProgram {
    common::random_program(&mut ChaCha8Rng::seed_from_u64(seed), 8, 12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn enumeration_matches_brute_force(seed in any::<u64>()) {
        let p = program(seed);
        let oracle = brute_force_models(&p).unwrap();
        let found = enumerate(&SolveRequest::all(&p));
        prop_assert_eq!(&found, &oracle, "program:\n{}", p);
        for m in &found {
            prop_assert!(is_stable_model(&p, m.truth()));
        }
    }

    #[test]
    fn count_gives_a_prefix(seed in any::<u64>(), k in 1usize..6) {
        let p = program(seed);
        let full = enumerate(&SolveRequest::all(&p));
        let some = enumerate(&SolveRequest { count: k, ..SolveRequest::all(&p) });
        prop_assert_eq!(&some[..], &full[..k.min(full.len())]);
    }

    #[test]
    fn optimize_returns_all_minimal_models(seed in any::<u64>()) {
        let p = program(seed);
        let expected = select(brute_force_models(&p).unwrap(), 0, true);
        let found = enumerate(&SolveRequest { optimize: true, ..SolveRequest::all(&p) });
        prop_assert_eq!(found, expected);
    }

    #[test]
    fn constraints_never_add_models(seed in any::<u64>(), extra in any::<u64>()) {
        let mut p = program(seed);
        let before = enumerate(&SolveRequest::all(&p));
        let n = p.atom_count();
        let a = (extra % n as u64) as usize;
        let b = ((extra >> 8) % n as u64) as usize;
        let rule = if extra >> 16 & 1 == 0 {
            GroundRule::normal(None, vec![a], vec![b])
        } else {
            GroundRule::normal(None, vec![a, b], vec![])
        };
        p.add_rule(rule);
        let after = enumerate(&SolveRequest::all(&p));
        for m in &after {
            prop_assert!(before.contains(m));
        }
    }
}
