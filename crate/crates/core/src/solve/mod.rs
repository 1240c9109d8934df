//! Stable-model semantics over ground programs: the model check, a
//! brute-force oracle, and the search-based enumerator.

mod search;

use std::fmt;

use thiserror::Error;

use crate::ground::{AtomId, GroundCardinality, GroundHead, GroundProgram, GroundRule};

pub use search::enumerate;

/// Default atom limit for [`brute_force_models`].
pub const BRUTE_FORCE_CAP: usize = 22;

/// A stable model, stored as one truth value per program atom.
///
/// The derived order compares truth vectors lexicographically with
/// `false < true`, which is the order models are emitted in.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AnswerSet {
    truth: Vec<bool>,
    /// Number of true minimize atoms.
    pub cost: usize,
}

impl AnswerSet {
    pub fn from_truth(program: &GroundProgram, truth: Vec<bool>) -> Self {
        let cost = cost_of(program, &truth);
        AnswerSet { truth, cost }
    }

    pub fn from_atoms(program: &GroundProgram, atoms: impl IntoIterator<Item = AtomId>) -> Self {
        let mut truth = vec![false; program.atom_count()];
        for a in atoms {
            truth[a] = true;
        }
        Self::from_truth(program, truth)
    }

    pub fn contains(&self, atom: AtomId) -> bool {
        self.truth.get(atom).copied().unwrap_or(false)
    }

    pub fn truth(&self) -> &[bool] {
        &self.truth
    }

    pub fn atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.truth
            .iter()
            .enumerate()
            .filter(|(_, t)| **t)
            .map(|(i, _)| i)
    }

    pub fn len(&self) -> usize {
        self.atoms().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Renders the model as `{a, b, ...}` using the program's atom names.
    pub fn display<'a>(&'a self, program: &'a GroundProgram) -> impl fmt::Display + 'a {
        DisplayAnswer {
            answer: self,
            program,
        }
    }
}

struct DisplayAnswer<'a> {
    answer: &'a AnswerSet,
    program: &'a GroundProgram,
}

impl fmt::Display for DisplayAnswer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.answer.atoms().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", self.program.get(a))?;
        }
        f.write_str("}")
    }
}

/// Parameters of one enumeration.
#[derive(Debug, Clone, Copy)]
pub struct SolveRequest<'a> {
    pub program: &'a GroundProgram,
    /// Maximum number of models; 0 asks for all of them.
    pub count: usize,
    /// Keep only models of minimal cost.
    pub optimize: bool,
    /// Print the search tree to stderr.
    pub trace: bool,
}

impl<'a> SolveRequest<'a> {
    pub fn all(program: &'a GroundProgram) -> Self {
        SolveRequest {
            program,
            count: 0,
            optimize: false,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("program has {atoms} atoms, brute force is capped at {cap}")]
    CapExceeded { atoms: usize, cap: usize },
}

pub fn cost_of(program: &GroundProgram, truth: &[bool]) -> usize {
    program.minimize.iter().filter(|&&a| truth[a]).count()
}

fn count_true(card: &GroundCardinality, truth: &[bool]) -> i64 {
    card.literals
        .iter()
        .filter(|l| truth[l.atom] && l.guards.iter().all(|&g| truth[g]))
        .count() as i64
}

fn within(count: i64, lower: Option<i64>, upper: Option<i64>) -> bool {
    lower.is_none_or(|l| count >= l) && upper.is_none_or(|u| count <= u)
}

/// True iff the number of true literals lies within the bounds.
pub fn evaluate_cardinality(card: &GroundCardinality, truth: &[bool]) -> bool {
    within(count_true(card, truth), card.lower, card.upper)
}

fn body_holds(rule: &GroundRule, truth: &[bool]) -> bool {
    rule.pos.iter().all(|&a| truth[a])
        && rule.neg.iter().all(|&a| !truth[a])
        && rule.cards.iter().all(|c| evaluate_cardinality(c, truth))
}

/// Checks whether `truth` is a stable model of `program`.
///
/// The candidate must satisfy every rule, and it must equal the least
/// model of its reduct. The reduct drops rules blocked by a true negative
/// literal or by an exceeded cardinality upper bound, keeps only the lower
/// bound of each remaining cardinality, and lets a choice head derive those
/// of its atoms that the candidate makes true.
pub fn is_stable_model(program: &GroundProgram, truth: &[bool]) -> bool {
    if truth.len() != program.atom_count() {
        return false;
    }
    for rule in &program.rules {
        if !body_holds(rule, truth) {
            continue;
        }
        let ok = match &rule.head {
            None => false,
            Some(GroundHead::Atom(a)) => truth[*a],
            Some(GroundHead::Choice {
                lower,
                upper,
                atoms,
            }) => within(
                atoms.iter().filter(|&&a| truth[a]).count() as i64,
                *lower,
                *upper,
            ),
        };
        if !ok {
            return false;
        }
    }

    let reduct: Vec<&GroundRule> = program
        .rules
        .iter()
        .filter(|r| r.head.is_some())
        .filter(|r| r.neg.iter().all(|&a| !truth[a]))
        .filter(|r| {
            r.cards
                .iter()
                .all(|c| c.upper.is_none_or(|u| count_true(c, truth) <= u))
        })
        .collect();
    let mut derived = vec![false; truth.len()];
    let mut changed = true;
    while changed {
        changed = false;
        for r in &reduct {
            let fires = r.pos.iter().all(|&a| derived[a])
                && r.cards
                    .iter()
                    .all(|c| c.lower.is_none_or(|l| count_true(c, &derived) >= l));
            if !fires {
                continue;
            }
            let mut derive = |a: AtomId| {
                if !derived[a] {
                    derived[a] = true;
                    changed = true;
                }
            };
            match &r.head {
                Some(GroundHead::Atom(a)) => derive(*a),
                Some(GroundHead::Choice { atoms, .. }) => {
                    atoms.iter().filter(|&&a| truth[a]).for_each(|&a| derive(a))
                }
                None => unreachable!(),
            }
        }
    }
    derived == truth
}

/// Tests every subset of atoms; intended as a reference for small programs.
pub fn brute_force_models(program: &GroundProgram) -> Result<Vec<AnswerSet>, SolveError> {
    brute_force_models_capped(program, BRUTE_FORCE_CAP)
}

pub fn brute_force_models_capped(
    program: &GroundProgram,
    cap: usize,
) -> Result<Vec<AnswerSet>, SolveError> {
    let n = program.atom_count();
    if n > cap {
        return Err(SolveError::CapExceeded { atoms: n, cap });
    }
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << n) {
        // atom 0 is the most significant bit, so masks ascend in model order
        let truth: Vec<bool> = (0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect();
        if is_stable_model(program, &truth) {
            out.push(AnswerSet::from_truth(program, truth));
        }
    }
    Ok(out)
}

/// Keeps the cheapest models, then applies the count cap.
pub fn select(mut models: Vec<AnswerSet>, count: usize, optimize: bool) -> Vec<AnswerSet> {
    models.sort();
    models.dedup();
    if optimize {
        if let Some(best) = models.iter().map(|m| m.cost).min() {
            models.retain(|m| m.cost == best);
        }
    }
    if count > 0 {
        models.truncate(count);
    }
    models
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{CardLiteral, GroundAtom};

    pub(crate) fn toy() -> (GroundProgram, [AtomId; 3]) {
        let mut p = GroundProgram::new();
        let a = p.atom(GroundAtom::prop("a"));
        let b = p.atom(GroundAtom::prop("b"));
        let c = p.atom(GroundAtom::prop("c"));
        p.add_rule(GroundRule::normal(Some(a), vec![], vec![b]));
        p.add_rule(GroundRule::normal(Some(b), vec![], vec![a]));
        p.add_rule(GroundRule::fact(c));
        (p, [a, b, c])
    }

    fn truth(n: usize, atoms: &[AtomId]) -> Vec<bool> {
        let mut t = vec![false; n];
        for &a in atoms {
            t[a] = true;
        }
        t
    }

    #[test]
    fn toy_candidates() {
        let (p, [a, b, c]) = toy();
        assert!(is_stable_model(&p, &truth(3, &[a, c])));
        assert!(is_stable_model(&p, &truth(3, &[b, c])));
        assert!(!is_stable_model(&p, &truth(3, &[a, b, c])));
        assert!(!is_stable_model(&p, &truth(3, &[c])));
    }

    #[test]
    fn empty_program_has_empty_model() {
        let p = GroundProgram::new();
        assert!(is_stable_model(&p, &[]));
        assert_eq!(brute_force_models(&p).unwrap().len(), 1);
    }

    #[test]
    fn odd_loop_has_no_model() {
        let mut p = GroundProgram::new();
        let a = p.atom(GroundAtom::prop("p"));
        p.add_rule(GroundRule::normal(Some(a), vec![], vec![a]));
        assert!(!is_stable_model(&p, &[false]));
        assert!(!is_stable_model(&p, &[true]));
        assert!(brute_force_models(&p).unwrap().is_empty());
    }

    #[test]
    fn positive_loop_is_unfounded() {
        let mut p = GroundProgram::new();
        let a = p.atom(GroundAtom::prop("a"));
        let b = p.atom(GroundAtom::prop("b"));
        p.add_rule(GroundRule::normal(Some(a), vec![b], vec![]));
        p.add_rule(GroundRule::normal(Some(b), vec![a], vec![]));
        let models = brute_force_models(&p).unwrap();
        assert_eq!(models.len(), 1);
        assert!(models[0].is_empty());
    }

    #[test]
    fn brute_force_on_toy_variants() {
        let (mut p, [a, b, c]) = toy();
        let models = brute_force_models(&p).unwrap();
        assert_eq!(
            models
                .iter()
                .map(|m| m.atoms().collect())
                .collect::<Vec<Vec<_>>>(),
            vec![vec![b, c], vec![a, c]]
        );
        p.add_rule(GroundRule::normal(None, vec![a], vec![]));
        let models = brute_force_models(&p).unwrap();
        assert_eq!(models.len(), 1);
        assert_eq!(models[0].atoms().collect::<Vec<_>>(), vec![b, c]);

        let mut single = GroundProgram::new();
        let c = single.atom(GroundAtom::prop("c"));
        single.add_rule(GroundRule::fact(c));
        let models = brute_force_models(&single).unwrap();
        assert_eq!(models.len(), 1);
        assert!(models[0].contains(c));
    }

    #[test]
    fn cap_is_enforced() {
        let mut p = GroundProgram::new();
        for i in 0..5 {
            p.atom(GroundAtom::prop(&format!("a{i}")));
        }
        assert_eq!(
            brute_force_models_capped(&p, 4),
            Err(SolveError::CapExceeded { atoms: 5, cap: 4 })
        );
    }

    #[test]
    fn cardinality_bounds() {
        let card = |lower, upper| GroundCardinality {
            lower,
            upper,
            literals: (0..5).map(CardLiteral::plain).collect(),
        };
        let t = truth(5, &[0, 2, 4]);
        assert!(evaluate_cardinality(&card(Some(2), Some(4)), &t));
        assert!(!evaluate_cardinality(&card(Some(2), Some(4)), &[false; 5]));
        assert!(evaluate_cardinality(&card(None, None), &[false; 5]));
        assert!(evaluate_cardinality(&card(Some(0), None), &[true; 5]));
        assert!(!evaluate_cardinality(&card(Some(2), Some(4)), &[true; 5]));
    }

    #[test]
    fn guards_must_hold_for_a_literal_to_count() {
        let card = GroundCardinality {
            lower: Some(1),
            upper: None,
            literals: vec![CardLiteral {
                atom: 0,
                guards: vec![1],
            }],
        };
        assert!(!evaluate_cardinality(&card, &[true, false]));
        assert!(evaluate_cardinality(&card, &[true, true]));
    }

    #[test]
    fn choice_head_bounds() {
        // 1 {a; b} 1.
        let mut p = GroundProgram::new();
        let a = p.atom(GroundAtom::prop("a"));
        let b = p.atom(GroundAtom::prop("b"));
        p.add_rule(GroundRule {
            head: Some(GroundHead::Choice {
                lower: Some(1),
                upper: Some(1),
                atoms: vec![a, b],
            }),
            pos: vec![],
            neg: vec![],
            cards: vec![],
        });
        let models = brute_force_models(&p).unwrap();
        assert_eq!(models.len(), 2);
        assert!(!is_stable_model(&p, &[true, true]));
        assert!(!is_stable_model(&p, &[false, false]));
    }

    #[test]
    fn select_orders_filters_and_caps() {
        let mut p = GroundProgram::new();
        let a = p.atom(GroundAtom::prop("a"));
        let b = p.atom(GroundAtom::prop("b"));
        p.minimize = vec![a, b];
        let m = |ids: &[AtomId]| AnswerSet::from_atoms(&p, ids.iter().copied());
        let all = vec![m(&[a, b]), m(&[a]), m(&[b])];
        let best = select(all.clone(), 0, true);
        assert_eq!(best, vec![m(&[b]), m(&[a])]);
        assert_eq!(select(all, 1, false), vec![m(&[b])]);
    }
}
