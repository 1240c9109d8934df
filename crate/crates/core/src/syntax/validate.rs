//! Static checks run before grounding: variable safety, binder restrictions
//! on the special atoms, and reserved names.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ast::*;

/// Predicate names used by the solver text encoding.
pub const RESERVED_PREDICATES: &[&str] = &["param_member", "method_val", "created", "exe", "ret"];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    /// Index of the offending rule; `None` for the minimize statement.
    pub rule: Option<usize>,
    pub kind: DiagnosticKind,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum DiagnosticKind {
    UnsafeVariable(String),
    MethodBaseNotParameter { var: String, method: String },
    UnboundExeTarget(String),
    UnboundReturnTarget(String),
    ReservedPredicate(String),
    NestedConstruction,
    MisplacedAnonymous,
    UnsupportedMinimizeCondition,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rule {
            Some(i) => write!(f, "rule {}: ", i + 1)?,
            None => write!(f, "#minimize: ")?,
        }
        match &self.kind {
            DiagnosticKind::UnsafeVariable(v) => {
                write!(f, "variable `{v}?` is not bound by any positive literal")
            }
            DiagnosticKind::MethodBaseNotParameter { var, method } => write!(
                f,
                "`{var}?.{method}()` needs `{var}?` bound to a parameter array element"
            ),
            DiagnosticKind::UnboundExeTarget(v) => write!(
                f,
                "exe target `{v}?` must be bound by a creation reference or array membership"
            ),
            DiagnosticKind::UnboundReturnTarget(v) => write!(
                f,
                "return target `{v}?` must be bound by a creation reference or array membership"
            ),
            DiagnosticKind::ReservedPredicate(p) => write!(f, "predicate name `{p}` is reserved"),
            DiagnosticKind::NestedConstruction => write!(
                f,
                "constructor atoms may not depend on created objects or method values"
            ),
            DiagnosticKind::MisplacedAnonymous => write!(
                f,
                "`_` is only allowed in positive atoms, memberships and creation references"
            ),
            DiagnosticKind::UnsupportedMinimizeCondition => write!(
                f,
                "#minimize conditions must be array memberships or comparisons"
            ),
        }
    }
}

/// Variables bound by positive literals, tagged by what bound them.
#[derive(Default)]
struct Binders {
    any: BTreeSet<String>,
    /// Variables bound to a parameter array element, with the array name.
    members: BTreeMap<String, BTreeSet<String>>,
    /// Variables bound to a created object, with its class.
    created: BTreeMap<String, BTreeSet<String>>,
}

impl Binders {
    fn atom(&mut self, atom: &Atom) {
        for t in &atom.terms {
            if let Term::Var(v) = t {
                self.any.insert(v.clone());
            }
        }
    }

    fn membership(&mut self, m: &Membership) {
        self.any.insert(m.var.clone());
        self.members
            .entry(m.var.clone())
            .or_default()
            .insert(m.param.clone());
        if let Term::Var(v) = &m.index {
            self.any.insert(v.clone());
        }
    }

    fn creation(&mut self, c: &CreationRef) {
        self.any.insert(c.var.clone());
        self.created
            .entry(c.var.clone())
            .or_default()
            .insert(c.class.clone());
        for t in &c.terms {
            if let Term::Var(v) = t {
                self.any.insert(v.clone());
            }
        }
    }

    fn condition(&mut self, c: &Condition) {
        match c {
            Condition::Atom(a) => self.atom(a),
            Condition::Membership(m) => self.membership(m),
            Condition::CreationRef(r) => self.creation(r),
            Condition::Comparison(_) => {}
        }
    }

    fn body(rule: &Rule) -> Binders {
        let mut b = Binders::default();
        for lit in &rule.body {
            match lit {
                BodyLiteral::Positive(a) => b.atom(a),
                BodyLiteral::Membership(m) => b.membership(m),
                BodyLiteral::CreationRef(c) => b.creation(c),
                BodyLiteral::Count { var, .. } => {
                    b.any.insert(var.clone());
                }
                _ => {}
            }
        }
        // Choice-head conditions act as part of the rule body.
        if let Some(HeadAtom::Choice(card)) = &rule.head {
            for e in &card.elements {
                for c in &e.conditions {
                    b.condition(c);
                }
            }
        }
        b
    }

    fn with_element(&self, e: &CardElement) -> Binders {
        let mut b = Binders {
            any: self.any.clone(),
            members: self.members.clone(),
            created: self.created.clone(),
        };
        for c in &e.conditions {
            b.condition(c);
        }
        b
    }
}

struct Checker<'a> {
    out: Vec<Diagnostic>,
    rule: Option<usize>,
    _spec: &'a SpecProgram,
}

impl Checker<'_> {
    fn report(&mut self, kind: DiagnosticKind) {
        let d = Diagnostic {
            rule: self.rule,
            kind,
        };
        if !self.out.contains(&d) {
            self.out.push(d);
        }
    }

    fn require_bound(&mut self, vars: &BTreeSet<String>, binders: &Binders) {
        for v in vars {
            if !binders.any.contains(v) {
                self.report(DiagnosticKind::UnsafeVariable(v.clone()));
            }
        }
    }

    fn check_method_bases(&mut self, term: &Term, binders: &Binders) {
        let mut bad = Vec::new();
        term.visit_method_values(&mut |var, method| {
            if !binders.members.contains_key(var) {
                bad.push((var.to_string(), method.to_string()));
            }
        });
        for (var, method) in bad {
            if binders.any.contains(&var) {
                self.report(DiagnosticKind::MethodBaseNotParameter { var, method });
            }
        }
    }

    fn check_term(&mut self, term: &Term, binders: &Binders, allow_anonymous: bool) {
        let mut vars = BTreeSet::new();
        term.collect_vars(&mut vars);
        self.require_bound(&vars, binders);
        self.check_method_bases(term, binders);
        if !allow_anonymous && contains_anonymous(term) {
            self.report(DiagnosticKind::MisplacedAnonymous);
        }
    }

    fn check_terms(&mut self, terms: &[Term], binders: &Binders, allow_anonymous: bool) {
        for t in terms {
            self.check_term(t, binders, allow_anonymous);
        }
    }

    fn check_pred(&mut self, pred: &str) {
        if RESERVED_PREDICATES.contains(&pred) {
            self.report(DiagnosticKind::ReservedPredicate(pred.to_string()));
        }
    }

    fn check_condition(&mut self, c: &Condition, binders: &Binders) {
        match c {
            Condition::Atom(a) => {
                self.check_pred(&a.pred);
                self.check_terms(&a.terms, binders, true);
            }
            Condition::Membership(m) => self.check_term(&m.index, binders, true),
            Condition::CreationRef(r) => self.check_terms(&r.terms, binders, true),
            Condition::Comparison(cmp) => {
                self.check_term(&cmp.lhs, binders, false);
                self.check_term(&cmp.rhs, binders, false);
            }
        }
    }

    fn check_element(&mut self, e: &CardElement, outer: &Binders) {
        let local = outer.with_element(e);
        self.check_pred(&e.template.pred);
        self.check_terms(&e.template.terms, &local, false);
        for c in &e.conditions {
            self.check_condition(c, &local);
        }
    }

    fn check_cardinality(&mut self, card: &Cardinality, binders: &Binders) {
        for bound in card.lower.iter().chain(card.upper.iter()) {
            self.check_term(bound, binders, false);
        }
        for e in &card.elements {
            self.check_element(e, binders);
        }
    }

    fn check_rule(&mut self, rule: &Rule) {
        let binders = Binders::body(rule);

        match &rule.head {
            None => {}
            Some(HeadAtom::Ordinary(a)) => {
                self.check_pred(&a.pred);
                self.check_terms(&a.terms, &binders, false);
            }
            Some(HeadAtom::Choice(card)) => self.check_cardinality(card, &binders),
            Some(HeadAtom::New { terms, .. }) => {
                self.check_terms(terms, &binders, false);
                let nested = terms.iter().any(has_method_value)
                    || rule.body.iter().any(|l| match l {
                        BodyLiteral::CreationRef(_)
                        | BodyLiteral::Negated(NegatableLiteral::CreationRef(_)) => true,
                        BodyLiteral::Cardinality(c) => elements_reference_creations(&c.elements),
                        BodyLiteral::Count { elements, .. } => {
                            elements_reference_creations(elements)
                        }
                        _ => false,
                    });
                if nested {
                    self.report(DiagnosticKind::NestedConstruction);
                }
            }
            Some(HeadAtom::Exe { target, terms, .. }) => {
                if !binders.members.contains_key(target) && !binders.created.contains_key(target) {
                    self.report(DiagnosticKind::UnboundExeTarget(target.clone()));
                }
                self.check_terms(terms, &binders, false);
            }
            Some(HeadAtom::Return { target })
                if !binders.members.contains_key(target)
                    && !binders.created.contains_key(target) =>
            {
                self.report(DiagnosticKind::UnboundReturnTarget(target.clone()));
            }
            Some(HeadAtom::Return { .. }) => {}
        }

        for lit in &rule.body {
            match lit {
                BodyLiteral::Positive(a) => {
                    self.check_pred(&a.pred);
                    self.check_terms(&a.terms, &binders, true);
                }
                BodyLiteral::Negated(NegatableLiteral::Atom(a)) => {
                    self.check_pred(&a.pred);
                    self.check_terms(&a.terms, &binders, false);
                }
                BodyLiteral::Negated(NegatableLiteral::Membership(m)) => {
                    self.require_bound(&BTreeSet::from([m.var.clone()]), &binders);
                    self.check_term(&m.index, &binders, true);
                }
                BodyLiteral::Negated(NegatableLiteral::CreationRef(c)) => {
                    self.require_bound(&BTreeSet::from([c.var.clone()]), &binders);
                    self.check_terms(&c.terms, &binders, true);
                }
                BodyLiteral::Membership(m) => self.check_term(&m.index, &binders, true),
                BodyLiteral::CreationRef(c) => self.check_terms(&c.terms, &binders, true),
                BodyLiteral::Comparison(c) => {
                    self.check_term(&c.lhs, &binders, false);
                    self.check_term(&c.rhs, &binders, false);
                }
                BodyLiteral::Cardinality(c) => self.check_cardinality(c, &binders),
                BodyLiteral::Count { elements, .. } => {
                    for e in elements {
                        self.check_element(e, &binders);
                    }
                }
            }
        }
    }

    fn check_minimize(&mut self, m: &MinimizeStatement) {
        for e in &m.elements {
            self.check_pred(&e.template.pred);
            let mut binders = Binders::default();
            binders.atom(&e.template);
            for c in &e.conditions {
                if let Condition::Membership(mem) = c {
                    binders.membership(mem);
                }
            }
            for c in &e.conditions {
                match c {
                    Condition::Membership(_) | Condition::Comparison(_) => {
                        self.check_condition(c, &binders)
                    }
                    _ => self.report(DiagnosticKind::UnsupportedMinimizeCondition),
                }
            }
            self.check_terms(&e.template.terms, &binders, true);
        }
    }
}

fn contains_anonymous(t: &Term) -> bool {
    match t {
        Term::Anonymous => true,
        Term::Arith(l, _, r) => contains_anonymous(l) || contains_anonymous(r),
        _ => false,
    }
}

fn has_method_value(t: &Term) -> bool {
    let mut found = false;
    t.visit_method_values(&mut |_, _| found = true);
    found
}

fn elements_reference_creations(elements: &[CardElement]) -> bool {
    elements.iter().any(|e| {
        e.conditions
            .iter()
            .any(|c| matches!(c, Condition::CreationRef(_)))
    })
}

/// Returns every safety and well-formedness problem; empty means the
/// specification can be grounded.
pub fn validate(spec: &SpecProgram) -> Vec<Diagnostic> {
    let mut checker = Checker {
        out: Vec::new(),
        rule: None,
        _spec: spec,
    };
    for (i, rule) in spec.rules.iter().enumerate() {
        checker.rule = Some(i);
        checker.check_rule(rule);
    }
    if let Some(m) = &spec.minimize {
        checker.rule = None;
        checker.check_minimize(m);
    }
    checker.out
}

/// Host-side entry points a class registry must provide for a specification.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Requirements {
    pub constructors: BTreeSet<String>,
    /// (class, method) pairs invoked by exe atoms.
    pub methods: BTreeSet<(String, String)>,
    /// (class, method) pairs read as method values.
    pub accessors: BTreeSet<(String, String)>,
}

/// Derives the classes and methods the specification refers to. The class
/// of a variable comes from the literal that binds it.
pub fn requirements(spec: &SpecProgram) -> Requirements {
    let array_class = |param: &str| match spec.param(param) {
        Some(ParamDecl {
            kind: ParamKind::ObjectArray(c),
            ..
        }) => Some(c.clone()),
        _ => None,
    };
    let mut req = Requirements::default();
    let record_accessors = |term: &Term, binders: &Binders, req: &mut Requirements| {
        term.visit_method_values(&mut |var, method| {
            if let Some(params) = binders.members.get(var) {
                for p in params {
                    if let Some(c) = array_class(p) {
                        req.accessors.insert((c, method.to_string()));
                    }
                }
            }
        });
    };

    for rule in &spec.rules {
        let binders = Binders::body(rule);
        match &rule.head {
            Some(HeadAtom::New { class, .. }) => {
                req.constructors.insert(class.clone());
            }
            Some(HeadAtom::Exe { target, method, .. }) => {
                for c in binders.created.get(target).into_iter().flatten() {
                    req.methods.insert((c.clone(), method.clone()));
                }
                for p in binders.members.get(target).into_iter().flatten() {
                    if let Some(c) = array_class(p) {
                        req.methods.insert((c, method.clone()));
                    }
                }
            }
            _ => {}
        }
        for classes in binders.created.values() {
            req.constructors.extend(classes.iter().cloned());
        }
        let mut all = Binders::body(rule);
        for lit in &rule.body {
            let elements: &[CardElement] = match lit {
                BodyLiteral::Cardinality(c) => &c.elements,
                BodyLiteral::Count { elements, .. } => elements,
                _ => &[],
            };
            for e in elements {
                for c in &e.conditions {
                    all.condition(c);
                    if let Condition::CreationRef(r) = c {
                        req.constructors.insert(r.class.clone());
                    }
                }
            }
        }
        for t in rule.terms() {
            record_accessors(t, &all, &mut req);
        }
    }
    if let Some(m) = &spec.minimize {
        for e in &m.elements {
            let mut b = Binders::default();
            for c in &e.conditions {
                b.condition(c);
            }
            for c in &e.conditions {
                if let Condition::Comparison(cmp) = c {
                    record_accessors(&cmp.lhs, &b, &mut req);
                    record_accessors(&cmp.rhs, &b, &mut req);
                }
            }
        }
    }
    req
}
