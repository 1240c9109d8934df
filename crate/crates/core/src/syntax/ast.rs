//! Abstract syntax of object specifications.

use std::collections::BTreeSet;

/// A parsed specification: header plus rules in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecProgram {
    pub package_name: Option<String>,
    pub imports: Vec<Import>,
    pub spec_name: String,
    pub params: Vec<ParamDecl>,
    pub rules: Vec<Rule>,
    pub minimize: Option<MinimizeStatement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Import {
    /// Dotted path without the trailing `*`.
    pub path: String,
    pub wildcard: bool,
}

impl Import {
    /// The simple class name brought into scope by a non-wildcard import.
    pub fn class_name(&self) -> Option<&str> {
        if self.wildcard {
            None
        } else {
            self.path.rsplit('.').next()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDecl {
    pub name: String,
    pub kind: ParamKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamKind {
    Int,
    ObjectArray(String),
}

/// `head :- body.`; a missing head makes an integrity constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub head: Option<HeadAtom>,
    pub body: Vec<BodyLiteral>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub pred: String,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HeadAtom {
    Ordinary(Atom),
    Choice(Cardinality),
    New {
        class: String,
        terms: Vec<Term>,
    },
    Exe {
        stage: Option<u32>,
        target: String,
        method: String,
        terms: Vec<Term>,
    },
    Return {
        target: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BodyLiteral {
    Positive(Atom),
    Negated(NegatableLiteral),
    Membership(Membership),
    CreationRef(CreationRef),
    Comparison(Comparison),
    Cardinality(Cardinality),
    Count {
        var: String,
        elements: Vec<CardElement>,
    },
}

/// The literal forms that may appear under `not`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NegatableLiteral {
    Atom(Atom),
    Membership(Membership),
    CreationRef(CreationRef),
}

/// `V?param(I)`: `V` holds the object at index `I` of array parameter `param`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    pub var: String,
    pub param: String,
    pub index: Term,
}

/// `V?Class(args)`: `V` is the object created by `new Class(args)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CreationRef {
    pub var: String,
    pub class: String,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub lhs: Term,
    pub op: CompareOp,
    pub rhs: Term,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "==",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Gt => ">",
            CompareOp::Le => "<=",
            CompareOp::Ge => ">=",
        }
    }
}

/// `lower { elements } upper`, either bound may be absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cardinality {
    pub lower: Option<Term>,
    pub elements: Vec<CardElement>,
    pub upper: Option<Term>,
}

/// `template : cond : cond ...`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardElement {
    pub template: Atom,
    pub conditions: Vec<Condition>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    Atom(Atom),
    Membership(Membership),
    CreationRef(CreationRef),
    Comparison(Comparison),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimizeStatement {
    pub elements: Vec<CardElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Int(i64),
    Symbol(String),
    Var(String),
    Anonymous,
    ParamRef(String),
    MethodValue { var: String, method: String },
    Arith(Box<Term>, ArithOp, Box<Term>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    /// Collects every variable occurring in the term, method-value bases included.
    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::MethodValue { var, .. } => {
                out.insert(var.clone());
            }
            Term::Arith(l, _, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Term::Int(_) | Term::Symbol(_) | Term::Anonymous | Term::ParamRef(_) => {}
        }
    }

    pub fn visit_method_values<'a>(&'a self, f: &mut impl FnMut(&'a str, &'a str)) {
        match self {
            Term::MethodValue { var, method } => f(var, method),
            Term::Arith(l, _, r) => {
                l.visit_method_values(f);
                r.visit_method_values(f);
            }
            _ => {}
        }
    }
}

impl Atom {
    pub fn new(pred: &str, terms: Vec<Term>) -> Self {
        Atom {
            pred: pred.to_string(),
            terms,
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        for t in &self.terms {
            t.collect_vars(out);
        }
    }
}

impl Membership {
    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        out.insert(self.var.clone());
        self.index.collect_vars(out);
    }
}

impl CreationRef {
    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        out.insert(self.var.clone());
        for t in &self.terms {
            t.collect_vars(out);
        }
    }
}

impl Comparison {
    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        self.lhs.collect_vars(out);
        self.rhs.collect_vars(out);
    }
}

impl Condition {
    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Condition::Atom(a) => a.collect_vars(out),
            Condition::Membership(m) => m.collect_vars(out),
            Condition::CreationRef(c) => c.collect_vars(out),
            Condition::Comparison(c) => c.collect_vars(out),
        }
    }
}

impl CardElement {
    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        self.template.collect_vars(out);
        for c in &self.conditions {
            c.collect_vars(out);
        }
    }
}

impl SpecProgram {
    pub fn param(&self, name: &str) -> Option<&ParamDecl> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn is_array_param(&self, name: &str) -> bool {
        matches!(
            self.param(name),
            Some(ParamDecl {
                kind: ParamKind::ObjectArray(_),
                ..
            })
        )
    }

    pub fn is_scalar_param(&self, name: &str) -> bool {
        matches!(
            self.param(name),
            Some(ParamDecl {
                kind: ParamKind::Int,
                ..
            })
        )
    }

    /// Every term in the program, in source order.
    pub fn terms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        for rule in &self.rules {
            out.extend(rule.terms());
        }
        if let Some(min) = &self.minimize {
            for e in &min.elements {
                element_terms(e, &mut out);
            }
        }
        out
    }

    /// Names of all methods used as method-value terms.
    pub fn method_value_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for t in self.terms() {
            t.visit_method_values(&mut |_, m| {
                out.insert(m.to_string());
            });
        }
        out
    }
}

impl Rule {
    /// Every term in the rule, head first.
    pub fn terms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        if let Some(head) = &self.head {
            head_terms(head, &mut out);
        }
        for lit in &self.body {
            body_terms(lit, &mut out);
        }
        out
    }
}

fn head_terms<'a>(head: &'a HeadAtom, out: &mut Vec<&'a Term>) {
    match head {
        HeadAtom::Ordinary(a) => out.extend(a.terms.iter()),
        HeadAtom::Choice(c) => card_terms(c, out),
        HeadAtom::New { terms, .. } | HeadAtom::Exe { terms, .. } => out.extend(terms.iter()),
        HeadAtom::Return { .. } => {}
    }
}

fn body_terms<'a>(lit: &'a BodyLiteral, out: &mut Vec<&'a Term>) {
    match lit {
        BodyLiteral::Positive(a) | BodyLiteral::Negated(NegatableLiteral::Atom(a)) => {
            out.extend(a.terms.iter())
        }
        BodyLiteral::Membership(m) | BodyLiteral::Negated(NegatableLiteral::Membership(m)) => {
            out.push(&m.index)
        }
        BodyLiteral::CreationRef(c) | BodyLiteral::Negated(NegatableLiteral::CreationRef(c)) => {
            out.extend(c.terms.iter())
        }
        BodyLiteral::Comparison(c) => {
            out.push(&c.lhs);
            out.push(&c.rhs);
        }
        BodyLiteral::Cardinality(c) => card_terms(c, out),
        BodyLiteral::Count { elements, .. } => {
            for e in elements {
                element_terms(e, out);
            }
        }
    }
}

fn card_terms<'a>(card: &'a Cardinality, out: &mut Vec<&'a Term>) {
    out.extend(card.lower.iter());
    out.extend(card.upper.iter());
    for e in &card.elements {
        element_terms(e, out);
    }
}

fn element_terms<'a>(e: &'a CardElement, out: &mut Vec<&'a Term>) {
    out.extend(e.template.terms.iter());
    for c in &e.conditions {
        match c {
            Condition::Atom(a) => out.extend(a.terms.iter()),
            Condition::Membership(m) => out.push(&m.index),
            Condition::CreationRef(r) => out.extend(r.terms.iter()),
            Condition::Comparison(cmp) => {
                out.push(&cmp.lhs);
                out.push(&cmp.rhs);
            }
        }
    }
}
