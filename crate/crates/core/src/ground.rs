//! Grounding: instantiate a validated specification over parameter objects,
//! created objects and derived integers.
//!
//! Grounding is a fixpoint over the set of atoms that may possibly become
//! true. Each round instantiates every rule against the current set; head
//! atoms of the produced instances are added, and the loop stops once the
//! set no longer grows. Since constructor atoms cannot depend on created
//! objects, the created-object domain is finite and settles along with the
//! rest. The instances of the last round form the ground program.
//!
//! Membership literals and comparisons are decided here and never reach the
//! solver. Negative literals over atoms that can never be derived are
//! dropped, as are cardinality literals that hold trivially.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::binding::{Fact, FactBase, ObjectId, Value};
use crate::syntax::{
    ArithOp, Atom, BodyLiteral, CardElement, Cardinality, CompareOp, Comparison, Condition,
    CreationRef, HeadAtom, Membership, NegatableLiteral, Rule, SpecProgram, Term,
};

pub type AtomId = usize;

/// Upper limit on the number of distinct atoms grounding may produce.
pub const DEFAULT_ATOM_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundAtom {
    Ordinary {
        pred: String,
        args: Vec<Value>,
    },
    New {
        class: String,
        args: Vec<Value>,
    },
    Exe {
        stage: u32,
        target: ObjectId,
        method: String,
        args: Vec<Value>,
    },
    Return(ObjectId),
    ParamMember {
        param: String,
        index: usize,
        object: ObjectId,
    },
}

impl GroundAtom {
    /// A propositional atom, handy for hand-built programs.
    pub fn prop(name: &str) -> Self {
        GroundAtom::Ordinary {
            pred: name.to_string(),
            args: Vec::new(),
        }
    }

    pub fn ordinary(pred: &str, args: Vec<Value>) -> Self {
        GroundAtom::Ordinary {
            pred: pred.to_string(),
            args,
        }
    }

    /// The object this atom's constructor call creates.
    pub fn created_object(&self) -> Option<ObjectId> {
        match self {
            GroundAtom::New { class, args } => Some(ObjectId::created(class, args.clone())),
            _ => None,
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Value]) -> fmt::Result {
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundAtom::Ordinary { pred, args } => {
                f.write_str(pred)?;
                if !args.is_empty() {
                    write_args(f, args)?;
                }
                Ok(())
            }
            GroundAtom::New { class, args } => {
                write!(f, "new {class}")?;
                write_args(f, args)
            }
            GroundAtom::Exe {
                stage,
                target,
                method,
                args,
            } => {
                write!(f, "exe[{stage}] {target}.{method}")?;
                write_args(f, args)
            }
            GroundAtom::Return(o) => write!(f, "return {o}"),
            GroundAtom::ParamMember {
                param,
                index,
                object,
            } => write!(f, "param_member({param},{index},{object})"),
        }
    }
}

/// A cardinality element: `atom` counts when it and all its guards are true.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CardLiteral {
    pub atom: AtomId,
    pub guards: Vec<AtomId>,
}

impl CardLiteral {
    pub fn plain(atom: AtomId) -> Self {
        CardLiteral {
            atom,
            guards: Vec::new(),
        }
    }
}

/// `lower { literals } upper`; a missing lower bound is 0, a missing upper
/// bound is unbounded.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundCardinality {
    pub lower: Option<i64>,
    pub upper: Option<i64>,
    pub literals: Vec<CardLiteral>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroundHead {
    Atom(AtomId),
    Choice {
        lower: Option<i64>,
        upper: Option<i64>,
        atoms: Vec<AtomId>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundRule {
    /// `None` for integrity constraints.
    pub head: Option<GroundHead>,
    pub pos: Vec<AtomId>,
    pub neg: Vec<AtomId>,
    pub cards: Vec<GroundCardinality>,
}

impl GroundRule {
    pub fn fact(atom: AtomId) -> Self {
        GroundRule {
            head: Some(GroundHead::Atom(atom)),
            pos: Vec::new(),
            neg: Vec::new(),
            cards: Vec::new(),
        }
    }

    pub fn normal(head: Option<AtomId>, pos: Vec<AtomId>, neg: Vec<AtomId>) -> Self {
        GroundRule {
            head: head.map(GroundHead::Atom),
            pos,
            neg,
            cards: Vec::new(),
        }
    }

    fn atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        let head: Vec<AtomId> = match &self.head {
            Some(GroundHead::Atom(a)) => vec![*a],
            Some(GroundHead::Choice { atoms, .. }) => atoms.clone(),
            None => Vec::new(),
        };
        head.into_iter()
            .chain(self.pos.iter().copied())
            .chain(self.neg.iter().copied())
            .chain(
                self.cards
                    .iter()
                    .flat_map(|c| c.literals.iter())
                    .flat_map(|l| std::iter::once(l.atom).chain(l.guards.iter().copied())),
            )
    }

    fn normalize(&mut self) {
        for v in [&mut self.pos, &mut self.neg] {
            v.sort_unstable();
            v.dedup();
        }
        if let Some(GroundHead::Choice { atoms, .. }) = &mut self.head {
            atoms.sort_unstable();
            atoms.dedup();
        }
        for c in &mut self.cards {
            for l in &mut c.literals {
                l.guards.sort_unstable();
                l.guards.dedup();
            }
            c.literals.sort();
            c.literals.dedup();
        }
    }
}

/// A variable-free program over dense atom ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundProgram {
    atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, AtomId>,
    pub rules: Vec<GroundRule>,
    pub minimize: Vec<AtomId>,
}

impl GroundProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns an atom, returning its id.
    pub fn atom(&mut self, atom: GroundAtom) -> AtomId {
        if let Some(&id) = self.index.get(&atom) {
            return id;
        }
        let id = self.atoms.len();
        self.index.insert(atom.clone(), id);
        self.atoms.push(atom);
        id
    }

    pub fn add_rule(&mut self, rule: GroundRule) {
        self.rules.push(rule);
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> &[GroundAtom] {
        &self.atoms
    }

    pub fn get(&self, id: AtomId) -> &GroundAtom {
        &self.atoms[id]
    }

    pub fn lookup(&self, atom: &GroundAtom) -> Option<AtomId> {
        self.index.get(atom).copied()
    }

    /// Objects named by constructor atoms, in object order.
    pub fn created_domain(&self) -> Vec<ObjectId> {
        let mut out: Vec<ObjectId> = self
            .atoms
            .iter()
            .filter_map(GroundAtom::created_object)
            .collect();
        out.sort();
        out
    }

    /// Renumbers atoms so ids follow the atoms' natural order, making ids
    /// independent of the order in which grounding discovered them.
    pub fn canonicalize(&mut self) {
        let mut order: Vec<AtomId> = (0..self.atoms.len()).collect();
        order.sort_by(|&a, &b| self.atoms[a].cmp(&self.atoms[b]));
        let mut remap = vec![0; self.atoms.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let atoms: Vec<GroundAtom> = order.iter().map(|&i| self.atoms[i].clone()).collect();
        self.index = atoms
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, a)| (a, i))
            .collect();
        self.atoms = atoms;
        let m = |a: &mut AtomId| *a = remap[*a];
        for r in &mut self.rules {
            match &mut r.head {
                Some(GroundHead::Atom(a)) => m(a),
                Some(GroundHead::Choice { atoms, .. }) => atoms.iter_mut().for_each(m),
                None => {}
            }
            r.pos.iter_mut().for_each(m);
            r.neg.iter_mut().for_each(m);
            for c in &mut r.cards {
                for l in &mut c.literals {
                    m(&mut l.atom);
                    l.guards.iter_mut().for_each(m);
                }
            }
            r.normalize();
        }
        self.minimize.iter_mut().for_each(m);
        self.minimize.sort_unstable();
        self.minimize.dedup();
    }

    /// Checks that every atom id used by a rule is interned.
    pub fn is_closed(&self) -> bool {
        let n = self.atoms.len();
        self.rules.iter().all(|r| r.atoms().all(|a| a < n)) && self.minimize.iter().all(|&a| a < n)
    }

    fn write_card(&self, f: &mut fmt::Formatter<'_>, c: &GroundCardinality) -> fmt::Result {
        if let Some(l) = c.lower {
            write!(f, "{l} ")?;
        }
        f.write_str("{")?;
        for (i, lit) in c.literals.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}", self.atoms[lit.atom])?;
            for g in &lit.guards {
                write!(f, " : {}", self.atoms[*g])?;
            }
        }
        f.write_str("}")?;
        if let Some(u) = c.upper {
            write!(f, " {u}")?;
        }
        Ok(())
    }

    pub fn write_rule(&self, f: &mut fmt::Formatter<'_>, r: &GroundRule) -> fmt::Result {
        match &r.head {
            Some(GroundHead::Atom(a)) => write!(f, "{}", self.atoms[*a])?,
            Some(GroundHead::Choice {
                lower,
                upper,
                atoms,
            }) => {
                let card = GroundCardinality {
                    lower: *lower,
                    upper: *upper,
                    literals: atoms.iter().map(|&a| CardLiteral::plain(a)).collect(),
                };
                self.write_card(f, &card)?;
            }
            None => {}
        }
        let mut parts = Vec::new();
        for &a in &r.pos {
            parts.push(self.atoms[a].to_string());
        }
        for &a in &r.neg {
            parts.push(format!("not {}", self.atoms[a]));
        }
        if !parts.is_empty() || !r.cards.is_empty() || r.head.is_none() {
            if r.head.is_some() {
                f.write_str(" ")?;
            }
            f.write_str(":-")?;
            let mut first = true;
            for p in &parts {
                write!(f, "{} {p}", if first { "" } else { "," })?;
                first = false;
            }
            for c in &r.cards {
                write!(f, "{} ", if first { "" } else { "," })?;
                self.write_card(f, c)?;
                first = false;
            }
        }
        f.write_str(".")
    }
}

impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            self.write_rule(f, r)?;
            writeln!(f)?;
        }
        if !self.minimize.is_empty() {
            f.write_str("#minimize {")?;
            for (i, a) in self.minimize.iter().enumerate() {
                if i > 0 {
                    f.write_str("; ")?;
                }
                write!(f, "{}", self.atoms[*a])?;
            }
            writeln!(f, "}}.")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("no precomputed value for {object}.{method}()")]
    MissingMethodValue { object: ObjectId, method: String },
    #[error("integer overflow evaluating `{0}`")]
    Overflow(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("rule {rule}: variables cannot be bound (run validation first)")]
    Unsafe { rule: usize },
    #[error("unknown scalar parameter `{0}`")]
    UnknownScalar(String),
    #[error("grounding exceeded {0} atoms")]
    TooLarge(usize),
}

type Subst = BTreeMap<String, Value>;

/// Instantiates `spec` over the given facts.
pub fn ground(spec: &SpecProgram, facts: &FactBase) -> Result<GroundProgram, GroundError> {
    ground_with_limit(spec, facts, DEFAULT_ATOM_LIMIT)
}

pub fn ground_with_limit(
    spec: &SpecProgram,
    facts: &FactBase,
    atom_limit: usize,
) -> Result<GroundProgram, GroundError> {
    let ctx = Context::new(spec, facts);
    let plans: Vec<RulePlan> = spec
        .rules
        .iter()
        .enumerate()
        .map(|(i, r)| RulePlan::new(i, r))
        .collect::<Result<_, _>>()?;

    let mut possible = Possible::default();
    loop {
        let mut out = Output::default();
        for plan in &plans {
            ctx.ground_rule(plan, &possible, &mut out)?;
        }
        let mut grew = false;
        for atom in &out.heads {
            grew |= possible.insert(atom);
        }
        if possible.len() > atom_limit {
            return Err(GroundError::TooLarge(atom_limit));
        }
        if !grew {
            let mut program = out.program;
            for fact in &facts.facts {
                if let Fact::ParamMember {
                    param,
                    index,
                    object,
                } = fact
                {
                    let id = program.atom(GroundAtom::ParamMember {
                        param: param.clone(),
                        index: *index,
                        object: object.clone(),
                    });
                    program.add_rule(GroundRule::fact(id));
                }
            }
            if let Some(min) = &spec.minimize {
                for e in &min.elements {
                    for atom in ctx.minimize_atoms(e, &possible)? {
                        let id = program.atom(atom);
                        program.minimize.push(id);
                    }
                }
            }
            program.canonicalize();
            dedup_rules(&mut program);
            return Ok(program);
        }
    }
}

fn dedup_rules(program: &mut GroundProgram) {
    let mut seen = HashSet::new();
    program.rules.retain(|r| seen.insert(r.clone()));
}

/// Atoms that may become true, indexed by predicate and by class.
#[derive(Default)]
struct Possible {
    ordinary: HashMap<String, BTreeSet<Vec<Value>>>,
    created: HashMap<String, BTreeSet<Vec<Value>>>,
    other: HashSet<GroundAtom>,
    size: usize,
}

impl Possible {
    fn insert(&mut self, atom: &GroundAtom) -> bool {
        let fresh = match atom {
            GroundAtom::Ordinary { pred, args } => self
                .ordinary
                .entry(pred.clone())
                .or_default()
                .insert(args.clone()),
            GroundAtom::New { class, args } => self
                .created
                .entry(class.clone())
                .or_default()
                .insert(args.clone()),
            other => self.other.insert(other.clone()),
        };
        if fresh {
            self.size += 1;
        }
        fresh
    }

    fn len(&self) -> usize {
        self.size
    }

    fn contains(&self, atom: &GroundAtom) -> bool {
        match atom {
            GroundAtom::Ordinary { pred, args } => {
                self.ordinary.get(pred).is_some_and(|s| s.contains(args))
            }
            GroundAtom::New { class, args } => {
                self.created.get(class).is_some_and(|s| s.contains(args))
            }
            other => self.other.contains(other),
        }
    }

    fn tuples<'a>(&'a self, pred: &str) -> impl Iterator<Item = &'a Vec<Value>> {
        self.ordinary.get(pred).into_iter().flatten()
    }

    fn created_tuples<'a>(&'a self, class: &str) -> impl Iterator<Item = &'a Vec<Value>> {
        self.created.get(class).into_iter().flatten()
    }
}

#[derive(Default)]
struct Output {
    program: GroundProgram,
    heads: Vec<GroundAtom>,
}

/// One body step of a rule, in evaluation order.
#[derive(Debug, Clone, Copy)]
enum Step<'a> {
    Pos(&'a Atom),
    Neg(&'a NegatableLiteral),
    Member(&'a Membership),
    Created(&'a CreationRef),
    Cmp(&'a Comparison),
    Card(&'a Cardinality),
    Count(&'a str, &'a [CardElement]),
}

struct RulePlan<'a> {
    rule: &'a Rule,
    steps: Vec<Step<'a>>,
    /// Variables bound outside cardinality elements.
    global: BTreeSet<String>,
}

fn simple_vars(terms: &[Term], out: &mut BTreeSet<String>) {
    for t in terms {
        if let Term::Var(v) = t {
            out.insert(v.clone());
        }
    }
}

fn complex_vars(terms: &[&Term]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for t in terms {
        if !matches!(t, Term::Var(_) | Term::Anonymous) {
            t.collect_vars(&mut out);
        }
    }
    out
}

fn element_vars(elements: &[CardElement]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for e in elements {
        e.collect_vars(&mut out);
    }
    out
}

impl<'a> Step<'a> {
    /// Variables that must be bound before the step can run.
    fn needs(&self, global: &BTreeSet<String>) -> BTreeSet<String> {
        match self {
            Step::Pos(a) => complex_vars(&a.terms.iter().collect::<Vec<_>>()),
            Step::Member(m) => complex_vars(&[&m.index]),
            Step::Created(c) => complex_vars(&c.terms.iter().collect::<Vec<_>>()),
            Step::Neg(n) => {
                let mut out = BTreeSet::new();
                match n {
                    NegatableLiteral::Atom(a) => a.collect_vars(&mut out),
                    NegatableLiteral::Membership(m) => m.collect_vars(&mut out),
                    NegatableLiteral::CreationRef(c) => c.collect_vars(&mut out),
                }
                out
            }
            Step::Cmp(c) => {
                let mut out = BTreeSet::new();
                c.collect_vars(&mut out);
                out
            }
            Step::Card(c) => {
                let mut out: BTreeSet<String> = element_vars(&c.elements)
                    .intersection(global)
                    .cloned()
                    .collect();
                for b in c.lower.iter().chain(c.upper.iter()) {
                    b.collect_vars(&mut out);
                }
                out
            }
            Step::Count(_, elements) => element_vars(elements)
                .intersection(global)
                .cloned()
                .collect(),
        }
    }

    fn binds(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        match self {
            Step::Pos(a) => simple_vars(&a.terms, &mut out),
            Step::Member(m) => {
                out.insert(m.var.clone());
                simple_vars(std::slice::from_ref(&m.index), &mut out);
            }
            Step::Created(c) => {
                out.insert(c.var.clone());
                simple_vars(&c.terms, &mut out);
            }
            Step::Count(v, _) => {
                out.insert(v.to_string());
            }
            _ => {}
        }
        out
    }

    fn is_check(&self) -> bool {
        matches!(self, Step::Neg(_) | Step::Cmp(_) | Step::Card(_))
    }
}

fn condition_step(c: &Condition) -> Step<'_> {
    match c {
        Condition::Atom(a) => Step::Pos(a),
        Condition::Membership(m) => Step::Member(m),
        Condition::CreationRef(r) => Step::Created(r),
        Condition::Comparison(cmp) => Step::Cmp(cmp),
    }
}

/// Orders steps so each runs once its inputs are bound, running checks as
/// early as possible.
fn order_steps<'a>(
    mut pending: Vec<Step<'a>>,
    mut bound: BTreeSet<String>,
    global: &BTreeSet<String>,
) -> Option<Vec<Step<'a>>> {
    let mut ordered = Vec::with_capacity(pending.len());
    while !pending.is_empty() {
        let ready = |s: &Step| s.needs(global).is_subset(&bound);
        let pick = pending
            .iter()
            .position(|s| s.is_check() && ready(s))
            .or_else(|| pending.iter().position(|s| !s.is_check() && ready(s)))?;
        let step = pending.remove(pick);
        bound.extend(step.binds());
        ordered.push(step);
    }
    Some(ordered)
}

impl<'a> RulePlan<'a> {
    fn new(index: usize, rule: &'a Rule) -> Result<Self, GroundError> {
        let mut steps = Vec::new();
        for lit in &rule.body {
            steps.push(match lit {
                BodyLiteral::Positive(a) => Step::Pos(a),
                BodyLiteral::Negated(n) => Step::Neg(n),
                BodyLiteral::Membership(m) => Step::Member(m),
                BodyLiteral::CreationRef(c) => Step::Created(c),
                BodyLiteral::Comparison(c) => Step::Cmp(c),
                BodyLiteral::Cardinality(c) => Step::Card(c),
                BodyLiteral::Count { var, elements } => Step::Count(var, elements),
            });
        }
        if let Some(HeadAtom::Choice(card)) = &rule.head {
            for e in &card.elements {
                steps.extend(e.conditions.iter().map(condition_step));
            }
        }
        let mut global = BTreeSet::new();
        for s in &steps {
            if !s.is_check() {
                global.extend(s.binds());
            }
        }
        let steps = order_steps(steps, BTreeSet::new(), &global)
            .ok_or(GroundError::Unsafe { rule: index })?;
        Ok(RulePlan {
            rule,
            steps,
            global,
        })
    }
}

/// Bounds and (element, guards) pairs of a cardinality being grounded.
type PartialCard = (Option<i64>, Option<i64>, Vec<(GroundAtom, Vec<GroundAtom>)>);

/// A rule instance under construction.
#[derive(Clone, Default)]
struct Partial {
    subst: Subst,
    pos: Vec<GroundAtom>,
    neg: Vec<GroundAtom>,
    cards: Vec<PartialCard>,
}

struct Context<'a> {
    members: HashMap<&'a str, Vec<(usize, ObjectId)>>,
    method_vals: HashMap<(&'a ObjectId, &'a str), i64>,
    scalars: &'a BTreeMap<String, i64>,
}

fn compare(op: CompareOp, l: &Value, r: &Value) -> bool {
    match op {
        CompareOp::Eq => l == r,
        CompareOp::Ne => l != r,
        CompareOp::Lt => l < r,
        CompareOp::Gt => l > r,
        CompareOp::Le => l <= r,
        CompareOp::Ge => l >= r,
    }
}

impl<'a> Context<'a> {
    fn new(_spec: &'a SpecProgram, facts: &'a FactBase) -> Self {
        let mut members: HashMap<&str, Vec<(usize, ObjectId)>> = HashMap::new();
        let mut method_vals = HashMap::new();
        for f in &facts.facts {
            match f {
                Fact::ParamMember {
                    param,
                    index,
                    object,
                } => members
                    .entry(param.as_str())
                    .or_default()
                    .push((*index, object.clone())),
                Fact::MethodVal {
                    object,
                    method,
                    value,
                } => {
                    method_vals.insert((object, method.as_str()), *value);
                }
            }
        }
        Context {
            members,
            method_vals,
            scalars: &facts.scalars,
        }
    }

    fn eval(&self, term: &Term, subst: &Subst) -> Result<Value, GroundError> {
        Ok(match term {
            Term::Int(n) => Value::Int(*n),
            Term::Symbol(s) => Value::Symbol(s.clone()),
            Term::Var(v) => subst
                .get(v)
                .cloned()
                .ok_or_else(|| GroundError::Type(format!("unbound variable `{v}?`")))?,
            Term::Anonymous => return Err(GroundError::Type("`_` has no value".into())),
            Term::ParamRef(p) => Value::Int(
                *self
                    .scalars
                    .get(p)
                    .ok_or_else(|| GroundError::UnknownScalar(p.clone()))?,
            ),
            Term::MethodValue { var, method } => {
                let base = subst
                    .get(var)
                    .ok_or_else(|| GroundError::Type(format!("unbound variable `{var}?`")))?;
                let Value::Object(obj) = base else {
                    return Err(GroundError::Type(format!(
                        "`{var}?.{method}()` applied to non-object {base}"
                    )));
                };
                Value::Int(
                    *self
                        .method_vals
                        .get(&(obj, method.as_str()))
                        .ok_or_else(|| GroundError::MissingMethodValue {
                            object: obj.clone(),
                            method: method.clone(),
                        })?,
                )
            }
            Term::Arith(l, op, r) => {
                let (lv, rv) = (self.eval(l, subst)?, self.eval(r, subst)?);
                let (Value::Int(a), Value::Int(b)) = (&lv, &rv) else {
                    return Err(GroundError::Type(format!(
                        "arithmetic on non-integers in `{term}`"
                    )));
                };
                let res = match op {
                    ArithOp::Add => a.checked_add(*b),
                    ArithOp::Sub => a.checked_sub(*b),
                };
                Value::Int(res.ok_or_else(|| GroundError::Overflow(term.to_string()))?)
            }
        })
    }

    fn eval_int(&self, term: &Term, subst: &Subst) -> Result<i64, GroundError> {
        match self.eval(term, subst)? {
            Value::Int(n) => Ok(n),
            other => Err(GroundError::Type(format!(
                "bound `{term}` evaluates to non-integer {other}"
            ))),
        }
    }

    fn eval_all(&self, terms: &[Term], subst: &Subst) -> Result<Vec<Value>, GroundError> {
        terms.iter().map(|t| self.eval(t, subst)).collect()
    }

    /// Matches `pattern` against `values`, extending `subst`.
    fn unify(
        &self,
        pattern: &[Term],
        values: &[Value],
        subst: &mut Subst,
    ) -> Result<bool, GroundError> {
        if pattern.len() != values.len() {
            return Ok(false);
        }
        for (t, v) in pattern.iter().zip(values) {
            if !self.unify_one(t, v, subst)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn unify_one(&self, t: &Term, v: &Value, subst: &mut Subst) -> Result<bool, GroundError> {
        match t {
            Term::Anonymous => Ok(true),
            Term::Var(x) => match subst.get(x) {
                Some(bound) => Ok(bound == v),
                None => {
                    subst.insert(x.clone(), v.clone());
                    Ok(true)
                }
            },
            other => Ok(&self.eval(other, subst)? == v),
        }
    }

    fn ground_rule(
        &self,
        plan: &RulePlan,
        possible: &Possible,
        out: &mut Output,
    ) -> Result<(), GroundError> {
        let mut instances = Vec::new();
        self.join(
            plan,
            &plan.steps,
            Partial::default(),
            possible,
            &mut instances,
        )?;
        for inst in instances {
            self.emit(plan.rule, inst, out)?;
        }
        Ok(())
    }

    fn join(
        &self,
        plan: &RulePlan,
        steps: &[Step],
        partial: Partial,
        possible: &Possible,
        acc: &mut Vec<Partial>,
    ) -> Result<(), GroundError> {
        let Some((step, rest)) = steps.split_first() else {
            acc.push(partial);
            return Ok(());
        };
        match *step {
            Step::Pos(atom) => {
                for tuple in possible.tuples(&atom.pred) {
                    let mut next = partial.clone();
                    if self.unify(&atom.terms, tuple, &mut next.subst)? {
                        next.pos.push(GroundAtom::Ordinary {
                            pred: atom.pred.clone(),
                            args: tuple.clone(),
                        });
                        self.join(plan, rest, next, possible, acc)?;
                    }
                }
            }
            Step::Member(m) => {
                for (index, obj) in self.members.get(m.param.as_str()).into_iter().flatten() {
                    let mut next = partial.clone();
                    if self.unify_one(
                        &Term::var(&m.var),
                        &Value::Object(obj.clone()),
                        &mut next.subst,
                    )? && self.unify_one(
                        &m.index,
                        &Value::Int(*index as i64),
                        &mut next.subst,
                    )? {
                        self.join(plan, rest, next, possible, acc)?;
                    }
                }
            }
            Step::Created(c) => {
                for tuple in possible.created_tuples(&c.class) {
                    let mut next = partial.clone();
                    let obj = Value::Object(ObjectId::created(&c.class, tuple.clone()));
                    if self.unify(&c.terms, tuple, &mut next.subst)?
                        && self.unify_one(&Term::var(&c.var), &obj, &mut next.subst)?
                    {
                        next.pos.push(GroundAtom::New {
                            class: c.class.clone(),
                            args: tuple.clone(),
                        });
                        self.join(plan, rest, next, possible, acc)?;
                    }
                }
            }
            Step::Cmp(c) => {
                let l = self.eval(&c.lhs, &partial.subst)?;
                let r = self.eval(&c.rhs, &partial.subst)?;
                if compare(c.op, &l, &r) {
                    self.join(plan, rest, partial, possible, acc)?;
                }
            }
            Step::Neg(n) => {
                let mut next = partial;
                if self.negation(n, &mut next, possible)? {
                    self.join(plan, rest, next, possible, acc)?;
                }
            }
            Step::Card(card) => {
                let lower = card
                    .lower
                    .as_ref()
                    .map(|t| self.eval_int(t, &partial.subst))
                    .transpose()?;
                let upper = card
                    .upper
                    .as_ref()
                    .map(|t| self.eval_int(t, &partial.subst))
                    .transpose()?;
                let literals =
                    self.expand(&card.elements, &partial.subst, &plan.global, possible)?;
                let n = literals.len() as i64;
                if lower.unwrap_or(0) > n || upper.is_some_and(|u| u < 0) {
                    return Ok(());
                }
                let mut next = partial;
                let trivially_true = lower.unwrap_or(0) <= 0 && upper.is_none_or(|u| u >= n);
                if !trivially_true {
                    next.cards.push((lower, upper, literals));
                }
                self.join(plan, rest, next, possible, acc)?;
            }
            Step::Count(var, elements) => {
                let literals = self.expand(elements, &partial.subst, &plan.global, possible)?;
                let n = literals.len() as i64;
                for k in 0..=n {
                    let mut next = partial.clone();
                    if !self.unify_one(&Term::var(var), &Value::Int(k), &mut next.subst)? {
                        continue;
                    }
                    if n > 0 {
                        next.cards.push((Some(k), Some(k), literals.clone()));
                    }
                    self.join(plan, rest, next, possible, acc)?;
                }
            }
        }
        Ok(())
    }

    /// Decides a negative literal; returns false when it is certainly false.
    fn negation(
        &self,
        n: &NegatableLiteral,
        partial: &mut Partial,
        possible: &Possible,
    ) -> Result<bool, GroundError> {
        match n {
            NegatableLiteral::Atom(a) => {
                let atom = GroundAtom::Ordinary {
                    pred: a.pred.clone(),
                    args: self.eval_all(&a.terms, &partial.subst)?,
                };
                if possible.contains(&atom) {
                    partial.neg.push(atom);
                }
                Ok(true)
            }
            NegatableLiteral::Membership(m) => {
                let value = self.eval(&Term::var(&m.var), &partial.subst)?;
                for (index, obj) in self.members.get(m.param.as_str()).into_iter().flatten() {
                    let mut scratch = partial.subst.clone();
                    if value == Value::Object(obj.clone())
                        && self.unify_one(&m.index, &Value::Int(*index as i64), &mut scratch)?
                    {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            NegatableLiteral::CreationRef(c) => {
                let value = self.eval(&Term::var(&c.var), &partial.subst)?;
                let Value::Object(ObjectId::Created { class, args }) = value else {
                    return Ok(true);
                };
                let mut scratch = partial.subst.clone();
                if class != c.class || !self.unify(&c.terms, &args, &mut scratch)? {
                    return Ok(true);
                }
                let atom = GroundAtom::New { class, args };
                if possible.contains(&atom) {
                    partial.neg.push(atom);
                }
                Ok(true)
            }
        }
    }

    /// Expands cardinality elements under `subst`, binding element-local
    /// variables through the conditions. Template atoms that can never be
    /// true are left out.
    fn expand(
        &self,
        elements: &[CardElement],
        subst: &Subst,
        global: &BTreeSet<String>,
        possible: &Possible,
    ) -> Result<Vec<(GroundAtom, Vec<GroundAtom>)>, GroundError> {
        let mut out = Vec::new();
        let bound: BTreeSet<String> = subst.keys().cloned().collect();
        for e in elements {
            let steps: Vec<Step> = e.conditions.iter().map(condition_step).collect();
            let steps = order_steps(steps, bound.clone(), global).ok_or_else(|| {
                GroundError::Type(format!("cannot bind variables of element `{e}`"))
            })?;
            let plan = RulePlan {
                rule: &EMPTY_RULE,
                steps: Vec::new(),
                global: global.clone(),
            };
            let mut bindings = Vec::new();
            let start = Partial {
                subst: subst.clone(),
                ..Partial::default()
            };
            self.join(&plan, &steps, start, possible, &mut bindings)?;
            for b in bindings {
                let atom = GroundAtom::Ordinary {
                    pred: e.template.pred.clone(),
                    args: self.eval_all(&e.template.terms, &b.subst)?,
                };
                if !possible.contains(&atom) {
                    continue;
                }
                let mut guards = b.pos;
                guards.sort();
                guards.dedup();
                let lit = (atom, guards);
                if !out.contains(&lit) {
                    out.push(lit);
                }
            }
        }
        Ok(out)
    }

    fn emit(&self, rule: &Rule, inst: Partial, out: &mut Output) -> Result<(), GroundError> {
        let program = &mut out.program;
        let head = match &rule.head {
            None => None,
            Some(h) => {
                let atoms = self.head_atoms(h, &inst.subst)?;
                out.heads.extend(atoms.iter().cloned());
                let ids: Vec<AtomId> = atoms.into_iter().map(|a| program.atom(a)).collect();
                Some(match h {
                    HeadAtom::Choice(card) => GroundHead::Choice {
                        lower: card
                            .lower
                            .as_ref()
                            .map(|t| self.eval_int(t, &inst.subst))
                            .transpose()?,
                        upper: card
                            .upper
                            .as_ref()
                            .map(|t| self.eval_int(t, &inst.subst))
                            .transpose()?,
                        atoms: ids,
                    },
                    _ => GroundHead::Atom(ids[0]),
                })
            }
        };
        let pos = inst.pos.into_iter().map(|a| program.atom(a)).collect();
        let neg = inst.neg.into_iter().map(|a| program.atom(a)).collect();
        let cards = inst
            .cards
            .into_iter()
            .map(|(lower, upper, lits)| GroundCardinality {
                lower,
                upper,
                literals: lits
                    .into_iter()
                    .map(|(atom, guards)| CardLiteral {
                        atom: program.atom(atom),
                        guards: guards.into_iter().map(|g| program.atom(g)).collect(),
                    })
                    .collect(),
            })
            .collect();
        let mut rule = GroundRule {
            head,
            pos,
            neg,
            cards,
        };
        rule.normalize();
        program.add_rule(rule);
        Ok(())
    }

    fn head_atoms(&self, head: &HeadAtom, subst: &Subst) -> Result<Vec<GroundAtom>, GroundError> {
        let object = |var: &str| -> Result<ObjectId, GroundError> {
            match self.eval(&Term::var(var), subst)? {
                Value::Object(o) => Ok(o),
                other => Err(GroundError::Type(format!(
                    "`{var}?` must denote an object, found {other}"
                ))),
            }
        };
        Ok(match head {
            HeadAtom::Ordinary(a) => vec![GroundAtom::Ordinary {
                pred: a.pred.clone(),
                args: self.eval_all(&a.terms, subst)?,
            }],
            HeadAtom::New { class, terms } => vec![GroundAtom::New {
                class: class.clone(),
                args: self.eval_all(terms, subst)?,
            }],
            HeadAtom::Exe {
                stage,
                target,
                method,
                terms,
            } => vec![GroundAtom::Exe {
                stage: stage.unwrap_or(0),
                target: object(target)?,
                method: method.clone(),
                args: self.eval_all(terms, subst)?,
            }],
            HeadAtom::Return { target } => vec![GroundAtom::Return(object(target)?)],
            HeadAtom::Choice(card) => {
                let mut atoms = Vec::new();
                for e in &card.elements {
                    let atom = GroundAtom::Ordinary {
                        pred: e.template.pred.clone(),
                        args: self.eval_all(&e.template.terms, subst)?,
                    };
                    if !atoms.contains(&atom) {
                        atoms.push(atom);
                    }
                }
                atoms
            }
        })
    }

    fn minimize_atoms(
        &self,
        e: &CardElement,
        possible: &Possible,
    ) -> Result<Vec<GroundAtom>, GroundError> {
        let mut out = Vec::new();
        for tuple in possible.tuples(&e.template.pred) {
            let mut subst = Subst::new();
            if !self.unify(&e.template.terms, tuple, &mut subst)? {
                continue;
            }
            let steps: Vec<Step> = e.conditions.iter().map(condition_step).collect();
            let bound = subst.keys().cloned().collect();
            let steps = order_steps(steps, bound, &BTreeSet::new()).ok_or_else(|| {
                GroundError::Type(format!(
                    "cannot bind variables of `#minimize` element `{e}`"
                ))
            })?;
            let plan = RulePlan {
                rule: &EMPTY_RULE,
                steps: Vec::new(),
                global: BTreeSet::new(),
            };
            let mut bindings = Vec::new();
            let start = Partial {
                subst,
                ..Partial::default()
            };
            self.join(&plan, &steps, start, possible, &mut bindings)?;
            if !bindings.is_empty() {
                out.push(GroundAtom::Ordinary {
                    pred: e.template.pred.clone(),
                    args: tuple.clone(),
                });
            }
        }
        Ok(out)
    }
}

static EMPTY_RULE: Rule = Rule {
    head: None,
    body: Vec::new(),
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binding::{encode_facts, ObjectUniverse};
    use crate::syntax::parse_spec;

    fn universe(n: u32, socks: &[i64]) -> ObjectUniverse {
        let mut u = ObjectUniverse::default();
        let ids: Vec<ObjectId> = (0..n).map(ObjectId::Param).collect();
        for (i, id) in ids.iter().enumerate() {
            u.object_classes.push("Component".into());
            if let Some(s) = socks.get(i) {
                u.method_table.insert((id.clone(), "getNrSock".into()), *s);
            }
        }
        u.param_objects.push(("comps".into(), ids));
        u
    }

    fn ground_src(src: &str, u: &ObjectUniverse) -> GroundProgram {
        let spec = parse_spec(src).unwrap();
        assert!(crate::syntax::validate(&spec).is_empty());
        ground(&spec, &encode_facts(u)).unwrap()
    }

    #[test]
    fn toy_program_is_already_ground() {
        let p = ground_src(
            "Toy(){ a(o) :- not b(o). b(o) :- not a(o). c(o) :-. }",
            &ObjectUniverse::default(),
        );
        assert_eq!(p.atom_count(), 3);
        assert_eq!(p.rules.len(), 3);
        assert_eq!(
            p.to_string(),
            "a(o) :- not b(o).\nb(o) :- not a(o).\nc(o).\n"
        );
    }

    #[test]
    fn strict_order_cardinality_over_three_objects() {
        let p = ground_src(
            "S(Component[] comps){ 0 {edge(X?,Y?) : X? != Y? : X?comps(_) : Y?comps(_)} 1. \
             :- 2 {edge(X?,Y?) : X? < Y? : X?comps(_) : Y?comps(_)}. }",
            &universe(3, &[]),
        );
        let constraint = p.rules.iter().find(|r| r.head.is_none()).unwrap();
        let lits: Vec<String> = constraint.cards[0]
            .literals
            .iter()
            .map(|l| p.get(l.atom).to_string())
            .collect();
        assert_eq!(lits, ["edge(p0,p1)", "edge(p0,p2)", "edge(p1,p2)"]);
    }

    #[test]
    fn choice_heads_ground_per_binding() {
        let p = ground_src(
            "S(Component[] comps){ 0 {edge(X?,Y?) : X? != Y? : X?comps(_) : Y?comps(_)} 1. }",
            &universe(3, &[]),
        );
        // one choice rule per ordered pair plus three membership facts
        let choices = p
            .rules
            .iter()
            .filter(|r| matches!(r.head, Some(GroundHead::Choice { .. })))
            .count();
        assert_eq!(choices, 6);
        assert_eq!(p.rules.len(), 9);
    }

    #[test]
    fn created_domain_one_skolem_per_component() {
        let p = ground_src(
            "S(Component[] comps){ new Node(C?) :- C?comps(_). }",
            &universe(6, &[]),
        );
        let domain: Vec<String> = p.created_domain().iter().map(|o| o.to_string()).collect();
        assert_eq!(
            domain,
            (0..6)
                .map(|i| format!("new(Node,p{i})"))
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn method_values_and_arithmetic_fold() {
        let p = ground_src(
            "S(Component[] comps, int n){ big(C?) :- C?comps(_), C?.getNrSock()+1 >= n. }",
            &{
                let mut u = universe(3, &[1, 2, 3]);
                u.scalar_params.insert("n".into(), 3);
                u
            },
        );
        let heads: Vec<String> = p
            .rules
            .iter()
            .filter_map(|r| match r.head {
                Some(GroundHead::Atom(a)) => Some(p.get(a).to_string()),
                _ => None,
            })
            .filter(|s| s.starts_with("big"))
            .collect();
        assert_eq!(heads, ["big(p1)", "big(p2)"]);
    }

    #[test]
    fn count_assignment_grounds_one_instance_per_count() {
        let p = ground_src(
            "S(Component[] comps){ {e(X?,Y?) : X?comps(_) : Y?comps(_) : X? != Y?}. \
             deg(X?,K?) :- K? = {e(X?,Y?) : Y?comps(_)}, X?comps(_). }",
            &universe(3, &[]),
        );
        let degs = p
            .atoms()
            .iter()
            .filter(|a| matches!(a, GroundAtom::Ordinary { pred, .. } if pred == "deg"))
            .count();
        // each of 3 objects has 2 candidate edges, so counts 0..=2
        assert_eq!(degs, 9);
    }

    #[test]
    fn missing_method_value_is_reported() {
        let spec =
            parse_spec("S(Component[] comps){ p(C?) :- C?comps(_), C?.getNrSock() > 1. }").unwrap();
        let err = ground(&spec, &encode_facts(&universe(2, &[4]))).unwrap_err();
        assert_eq!(
            err,
            GroundError::MissingMethodValue {
                object: ObjectId::Param(1),
                method: "getNrSock".into()
            }
        );
    }

    #[test]
    fn overflow_is_reported() {
        let spec = parse_spec(&format!("S(){{ p(X?) :- q(X?). q({}+1). }}", i64::MAX)).unwrap();
        assert!(matches!(
            ground(&spec, &FactBase::default()),
            Err(GroundError::Overflow(_))
        ));
    }

    #[test]
    fn unbounded_recursion_hits_the_limit() {
        let spec = parse_spec("S(){ p(0). p(X?+1) :- p(X?). }").unwrap();
        assert_eq!(
            ground_with_limit(&spec, &FactBase::default(), 50),
            Err(GroundError::TooLarge(50))
        );
    }

    #[test]
    fn underivable_negations_are_dropped() {
        let p = ground_src("S(){ a :- not b. }", &ObjectUniverse::default());
        assert_eq!(p.to_string(), "a.\n");
    }

    #[test]
    fn anonymous_membership_index_is_existential() {
        let p = ground_src(
            "S(Component[] comps){ in(C?) :- C?comps(_). at(C?,I?) :- C?comps(I?). }",
            &universe(2, &[]),
        );
        let shown = p.to_string();
        assert!(shown.contains("in(p1)."));
        assert!(shown.contains("at(p1,1)."));
    }

    #[test]
    fn ids_are_canonical() {
        let p = ground_src("S(){ z. a. m. }", &ObjectUniverse::default());
        let names: Vec<String> = p.atoms().iter().map(|a| a.to_string()).collect();
        assert_eq!(names, ["a", "m", "z"]);
    }
}
