//! Depth-first model search with unit propagation and an unfounded-set
//! bound.
//!
//! The search always branches on the lowest-numbered unassigned atom and
//! tries `false` first. Every atom below the branching atom is already
//! assigned, so models leave the search in ascending truth-vector order.
//! Leaves are re-checked with [`is_stable_model`] before they are emitted.

use crate::ground::{AtomId, GroundHead, GroundProgram};

use super::{cost_of, is_stable_model, AnswerSet, SolveRequest};

#[derive(Debug, Clone, Copy)]
enum Lit {
    Pos(AtomId),
    Neg(AtomId),
    Card(usize),
}

#[derive(Debug)]
struct Rule {
    head: Head,
    pos: Vec<AtomId>,
    neg: Vec<AtomId>,
    cards: Vec<usize>,
}

#[derive(Debug)]
enum Head {
    None,
    Atom(AtomId),
    Choice {
        lower: i64,
        upper: i64,
        atoms: Vec<AtomId>,
    },
}

#[derive(Debug)]
struct Card {
    rule: usize,
    lower: i64,
    upper: i64,
    lits: Vec<usize>,
}

#[derive(Debug)]
struct CardLit {
    card: usize,
    /// Distinct atoms the literal depends on.
    parts: Vec<AtomId>,
}

#[derive(Default, Clone)]
struct Occurrences {
    rules: Vec<usize>,
    pos_in: Vec<usize>,
    lits: Vec<usize>,
}

/// The ground program rearranged for propagation.
struct Compiled {
    n: usize,
    rules: Vec<Rule>,
    cards: Vec<Card>,
    lits: Vec<CardLit>,
    occ: Vec<Occurrences>,
    minimize: Vec<AtomId>,
}

impl Compiled {
    fn new(program: &GroundProgram) -> Self {
        let n = program.atom_count();
        let mut rules = Vec::new();
        let mut cards = Vec::new();
        let mut lits = Vec::new();
        let mut occ = vec![Occurrences::default(); n];
        for (ri, r) in program.rules.iter().enumerate() {
            let head = match &r.head {
                None => Head::None,
                Some(GroundHead::Atom(a)) => Head::Atom(*a),
                Some(GroundHead::Choice {
                    lower,
                    upper,
                    atoms,
                }) => Head::Choice {
                    lower: lower.unwrap_or(0),
                    upper: upper.unwrap_or(i64::MAX),
                    atoms: atoms.clone(),
                },
            };
            let mut touched: Vec<AtomId> = Vec::new();
            match &head {
                Head::Atom(a) => touched.push(*a),
                Head::Choice { atoms, .. } => touched.extend(atoms),
                Head::None => {}
            }
            touched.extend(&r.pos);
            touched.extend(&r.neg);
            for &a in &r.pos {
                occ[a].pos_in.push(ri);
            }
            let mut card_ids = Vec::new();
            for c in &r.cards {
                let ci = cards.len();
                let mut lit_ids = Vec::new();
                for l in &c.literals {
                    let li = lits.len();
                    let mut parts = vec![l.atom];
                    parts.extend(&l.guards);
                    parts.sort_unstable();
                    parts.dedup();
                    for &p in &parts {
                        occ[p].lits.push(li);
                        touched.push(p);
                    }
                    lits.push(CardLit { card: ci, parts });
                    lit_ids.push(li);
                }
                cards.push(Card {
                    rule: ri,
                    lower: c.lower.unwrap_or(0),
                    upper: c.upper.unwrap_or(i64::MAX),
                    lits: lit_ids,
                });
                card_ids.push(ci);
            }
            touched.sort_unstable();
            touched.dedup();
            for a in touched {
                occ[a].rules.push(ri);
            }
            rules.push(Rule {
                head,
                pos: r.pos.clone(),
                neg: r.neg.clone(),
                cards: card_ids,
            });
        }
        Compiled {
            n,
            rules,
            cards,
            lits,
            occ,
            minimize: program.minimize.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    True,
    False,
    Unknown,
}

struct Conflict;

struct State<'a> {
    c: &'a Compiled,
    val: Vec<Option<bool>>,
    trail: Vec<AtomId>,
    queue: Vec<AtomId>,
}

impl<'a> State<'a> {
    fn assign(&mut self, a: AtomId, v: bool) -> Result<(), Conflict> {
        match self.val[a] {
            Some(x) if x == v => Ok(()),
            Some(_) => Err(Conflict),
            None => {
                self.val[a] = Some(v);
                self.trail.push(a);
                self.queue.push(a);
                Ok(())
            }
        }
    }

    fn undo(&mut self, len: usize) {
        while self.trail.len() > len {
            let a = self.trail.pop().unwrap();
            self.val[a] = None;
        }
        self.queue.clear();
    }

    fn lit_status(&self, li: usize) -> Status {
        let mut unknown = false;
        for &p in &self.c.lits[li].parts {
            match self.val[p] {
                Some(false) => return Status::False,
                None => unknown = true,
                Some(true) => {}
            }
        }
        if unknown {
            Status::Unknown
        } else {
            Status::True
        }
    }

    fn card_counts(&self, ci: usize) -> (i64, i64) {
        let (mut t, mut u) = (0, 0);
        for &li in &self.c.cards[ci].lits {
            match self.lit_status(li) {
                Status::True => t += 1,
                Status::Unknown => u += 1,
                Status::False => {}
            }
        }
        (t, u)
    }

    fn card_status(&self, ci: usize) -> Status {
        let card = &self.c.cards[ci];
        let (t, u) = self.card_counts(ci);
        if t > card.upper || t + u < card.lower {
            Status::False
        } else if t >= card.lower && t + u <= card.upper {
            Status::True
        } else {
            Status::Unknown
        }
    }

    /// Forces a literal to the given value where that needs no case split.
    fn force_lit(&mut self, li: usize, value: bool) -> Result<(), Conflict> {
        let lit = &self.c.lits[li];
        // an earlier forcing may already have decided this literal
        if !value && self.lit_status(li) == Status::False {
            return Ok(());
        }
        if value {
            for &p in &lit.parts {
                self.assign(p, true)?;
            }
            return Ok(());
        }
        let unknown: Vec<AtomId> = lit
            .parts
            .iter()
            .copied()
            .filter(|&p| self.val[p].is_none())
            .collect();
        if let [only] = unknown.as_slice() {
            self.assign(*only, false)?;
        }
        Ok(())
    }

    /// Makes a cardinality literal false when its bounds leave one way to do it.
    fn force_card_false(&mut self, ci: usize) -> Result<(), Conflict> {
        let card = &self.c.cards[ci];
        let (t, u) = self.card_counts(ci);
        let unknown: Vec<usize> = card
            .lits
            .iter()
            .copied()
            .filter(|&li| self.lit_status(li) == Status::Unknown)
            .collect();
        // falsity means count < lower or count > upper
        let can_undershoot = card.lower > 0;
        let can_overshoot = card.upper < t + u;
        if can_undershoot && !can_overshoot && t == card.lower - 1 {
            for li in unknown {
                self.force_lit(li, false)?;
            }
        } else if can_overshoot && !can_undershoot && t + u == card.upper + 1 {
            for li in unknown {
                self.force_lit(li, true)?;
            }
        }
        Ok(())
    }

    fn force_false(&mut self, lit: Lit) -> Result<(), Conflict> {
        match lit {
            Lit::Pos(a) => self.assign(a, false),
            Lit::Neg(a) => self.assign(a, true),
            Lit::Card(ci) => self.force_card_false(ci),
        }
    }

    fn check_rule(&mut self, ri: usize) -> Result<(), Conflict> {
        let rule = &self.c.rules[ri];
        let mut open = 0;
        let mut last = None;
        for &a in &rule.pos {
            match self.val[a] {
                Some(false) => return Ok(()),
                None => {
                    open += 1;
                    last = Some(Lit::Pos(a));
                }
                Some(true) => {}
            }
        }
        for &a in &rule.neg {
            match self.val[a] {
                Some(true) => return Ok(()),
                None => {
                    open += 1;
                    last = Some(Lit::Neg(a));
                }
                Some(false) => {}
            }
        }
        for &ci in &rule.cards {
            match self.card_status(ci) {
                Status::False => return Ok(()),
                Status::Unknown => {
                    open += 1;
                    last = Some(Lit::Card(ci));
                }
                Status::True => {}
            }
        }
        let body_must_fail = match &rule.head {
            Head::None => true,
            Head::Atom(h) => {
                if open == 0 {
                    return self.assign(*h, true);
                }
                self.val[*h] == Some(false)
            }
            Head::Choice {
                lower,
                upper,
                atoms,
            } => {
                let t = atoms.iter().filter(|&&a| self.val[a] == Some(true)).count() as i64;
                let unknown: Vec<AtomId> = atoms
                    .iter()
                    .copied()
                    .filter(|&a| self.val[a].is_none())
                    .collect();
                let u = unknown.len() as i64;
                let violated = t > *upper || t + u < *lower;
                if open == 0 {
                    if violated {
                        return Err(Conflict);
                    }
                    if t == *upper {
                        for a in unknown {
                            self.assign(a, false)?;
                        }
                    } else if t + u == *lower {
                        for a in unknown {
                            self.assign(a, true)?;
                        }
                    }
                    return Ok(());
                }
                violated
            }
        };
        if body_must_fail {
            match (open, last) {
                (0, _) => return Err(Conflict),
                (1, Some(lit)) => self.force_false(lit)?,
                _ => {}
            }
        }
        Ok(())
    }

    fn rules_touching(&self, a: AtomId) -> Vec<usize> {
        let occ = &self.c.occ[a];
        let mut rules = occ.rules.clone();
        rules.extend(
            occ.lits
                .iter()
                .map(|&li| self.c.cards[self.c.lits[li].card].rule),
        );
        rules.sort_unstable();
        rules.dedup();
        rules
    }

    fn unit_propagate(&mut self) -> Result<(), Conflict> {
        while let Some(a) = self.queue.pop() {
            for ri in self.rules_touching(a) {
                self.check_rule(ri)?;
            }
        }
        Ok(())
    }

    /// Over-approximates the atoms that can still be derived; everything
    /// else must be false.
    fn derivable(&self) -> Vec<bool> {
        let c = self.c;
        let mut derivable = vec![false; c.n];
        // unmet positive atoms and unmet cardinality lower bounds per rule
        let mut waiting = vec![0usize; c.rules.len()];
        let mut enabled = vec![false; c.rules.len()];
        let mut lit_missing: Vec<usize> = c.lits.iter().map(|l| l.parts.len()).collect();
        let mut card_count = vec![0i64; c.cards.len()];
        let mut ready = Vec::new();
        for (ri, r) in c.rules.iter().enumerate() {
            if matches!(r.head, Head::None) {
                continue;
            }
            let blocked = r.pos.iter().any(|&a| self.val[a] == Some(false))
                || r.neg.iter().any(|&a| self.val[a] == Some(true))
                || r.cards
                    .iter()
                    .any(|&ci| self.card_status(ci) == Status::False);
            if blocked {
                continue;
            }
            enabled[ri] = true;
            waiting[ri] = r.pos.len() + r.cards.iter().filter(|&&ci| c.cards[ci].lower > 0).count();
            if waiting[ri] == 0 {
                ready.push(ri);
            }
        }
        let mut fresh = Vec::new();
        loop {
            while let Some(ri) = ready.pop() {
                match &c.rules[ri].head {
                    Head::Atom(a) => fresh.push(*a),
                    Head::Choice { atoms, .. } => fresh.extend(atoms.iter().copied()),
                    Head::None => {}
                }
            }
            let Some(a) = fresh.pop() else { break };
            if derivable[a] || self.val[a] == Some(false) {
                continue;
            }
            derivable[a] = true;
            for &ri in &c.occ[a].pos_in {
                if enabled[ri] {
                    waiting[ri] -= 1;
                    if waiting[ri] == 0 {
                        ready.push(ri);
                    }
                }
            }
            for &li in &c.occ[a].lits {
                lit_missing[li] -= 1;
                if lit_missing[li] > 0 {
                    continue;
                }
                let ci = c.lits[li].card;
                let ri = c.cards[ci].rule;
                card_count[ci] += 1;
                if enabled[ri] && card_count[ci] == c.cards[ci].lower {
                    waiting[ri] -= 1;
                    if waiting[ri] == 0 {
                        ready.push(ri);
                    }
                }
            }
        }
        derivable
    }

    fn propagate(&mut self) -> Result<(), Conflict> {
        loop {
            self.unit_propagate()?;
            let derivable = self.derivable();
            let mut changed = false;
            for (a, &d) in derivable.iter().enumerate() {
                if !d && self.val[a] != Some(false) {
                    self.assign(a, false)?;
                    changed = true;
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn true_cost(&self) -> usize {
        self.c
            .minimize
            .iter()
            .filter(|&&a| self.val[a] == Some(true))
            .count()
    }
}

struct Search<'a> {
    program: &'a GroundProgram,
    count: usize,
    optimize: bool,
    trace: bool,
    best: Option<usize>,
    found: Vec<AnswerSet>,
}

impl Search<'_> {
    fn done(&self) -> bool {
        !self.optimize && self.count > 0 && self.found.len() >= self.count
    }

    fn run(&mut self, state: &mut State, depth: usize) {
        if self.done() || state.propagate().is_err() {
            return;
        }
        if let Some(best) = self.best {
            if state.true_cost() > best {
                return;
            }
        }
        let Some(atom) = state.val.iter().position(Option::is_none) else {
            self.leaf(state);
            return;
        };
        for value in [false, true] {
            if self.trace {
                eprintln!(
                    "{:indent$}{} = {value}",
                    "",
                    self.program.get(atom),
                    indent = depth * 2
                );
            }
            let mark = state.trail.len();
            if state.assign(atom, value).is_ok() {
                self.run(state, depth + 1);
            }
            state.undo(mark);
            if self.done() {
                return;
            }
        }
    }

    fn leaf(&mut self, state: &State) {
        let truth: Vec<bool> = state.val.iter().map(|v| v == &Some(true)).collect();
        if !is_stable_model(self.program, &truth) {
            return;
        }
        let cost = cost_of(self.program, &truth);
        if self.optimize {
            match self.best {
                Some(b) if cost > b => return,
                Some(b) if cost < b => self.found.clear(),
                _ => {}
            }
            self.best = Some(cost);
        }
        self.found.push(AnswerSet { truth, cost });
    }
}

/// Enumerates stable models in ascending truth-vector order.
///
/// With `optimize` set only models of minimal cost are kept. At most
/// `count` models are returned unless `count` is 0.
pub fn enumerate(request: &SolveRequest) -> Vec<AnswerSet> {
    let compiled = Compiled::new(request.program);
    let mut state = State {
        c: &compiled,
        val: vec![None; compiled.n],
        trail: Vec::new(),
        queue: Vec::new(),
    };
    let mut search = Search {
        program: request.program,
        count: request.count,
        optimize: request.optimize && !request.program.minimize.is_empty(),
        trace: request.trace,
        best: None,
        found: Vec::new(),
    };
    let mut initial = Ok(());
    for ri in 0..compiled.rules.len() {
        initial = initial.and_then(|_| state.check_rule(ri));
    }
    if initial.is_ok() {
        search.run(&mut state, 0);
    }
    let mut found = search.found;
    if request.count > 0 {
        found.truncate(request.count);
    }
    found
}
