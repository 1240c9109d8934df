#![allow(dead_code)]

pub mod network;

use ospec::ground::{
    AtomId, CardLiteral, GroundAtom, GroundCardinality, GroundHead, GroundProgram, GroundRule,
};
use rand::Rng;

/// A random ground program: at most `max_atoms` atoms and `max_rules`
/// rules, negation allowed, up to two cardinality literals per rule.
pub fn random_program(rng: &mut impl Rng, max_atoms: usize, max_rules: usize) -> GroundProgram {
    let mut p = GroundProgram::new();
    let n = rng.gen_range(1..=max_atoms);
    let atoms: Vec<AtomId> = (0..n)
        .map(|i| p.atom(GroundAtom::prop(&format!("a{i}"))))
        .collect();
    let pick = |rng: &mut dyn rand::RngCore, k: usize| -> Vec<AtomId> {
        (0..k)
            .map(|_| atoms[rng.gen_range(0..atoms.len())])
            .collect()
    };
    let bound = |rng: &mut dyn rand::RngCore, size: usize| -> (Option<i64>, Option<i64>) {
        let lower = rng.gen_bool(0.7).then(|| rng.gen_range(0..=size as i64));
        let upper = rng
            .gen_bool(0.5)
            .then(|| rng.gen_range(lower.unwrap_or(0)..=size as i64 + 1));
        (lower, upper)
    };
    let rules = rng.gen_range(0..=max_rules);
    for _ in 0..rules {
        let head = match rng.gen_range(0..10) {
            0 => None,
            1..=5 => Some(GroundHead::Atom(pick(rng, 1)[0])),
            _ => {
                let mut hs = {
                    let k = rng.gen_range(1..=3);
                    pick(rng, k)
                };
                hs.sort_unstable();
                hs.dedup();
                let (lower, upper) = if rng.gen_bool(0.6) {
                    (None, None)
                } else {
                    bound(rng, hs.len())
                };
                Some(GroundHead::Choice {
                    lower,
                    upper,
                    atoms: hs,
                })
            }
        };
        let generator = matches!(head, Some(GroundHead::Choice { .. })) && rng.gen_bool(0.6);
        let pos = if generator {
            vec![]
        } else {
            let k = rng
                .gen_range(0..=2usize)
                .saturating_sub(rng.gen_range(0..=1));
            pick(rng, k)
        };
        let neg = if generator {
            vec![]
        } else {
            let k = rng.gen_range(0..=2usize).saturating_sub(1);
            pick(rng, k)
        };
        let mut cards = Vec::new();
        for _ in 0..rng.gen_range(0..=2usize) {
            if rng.gen_bool(0.5) {
                continue;
            }
            let size = rng.gen_range(1..=4);
            let literals = (0..size)
                .map(|_| CardLiteral {
                    atom: pick(rng, 1)[0],
                    guards: if rng.gen_bool(0.2) {
                        pick(rng, 1)
                    } else {
                        vec![]
                    },
                })
                .collect();
            let (lower, upper) = bound(rng, size);
            cards.push(GroundCardinality {
                lower,
                upper,
                literals,
            });
        }
        let mut rule = GroundRule {
            head,
            pos,
            neg,
            cards,
        };
        rule.pos.sort_unstable();
        rule.pos.dedup();
        rule.neg.sort_unstable();
        rule.neg.dedup();
        p.add_rule(rule);
    }
    if rng.gen_bool(0.3) {
        p.minimize = {
            let k = rng.gen_range(1..=3);
            pick(rng, k)
        };
        p.minimize.sort_unstable();
        p.minimize.dedup();
    }
    p
}
