//! Ground programs as plain solver text.
//!
//! Parameter objects print as `obj(N)` and created objects as
//! `new("Class",args..)`. Special atoms use the reserved predicates
//! `created`, `exe`, `ret` and `param_member`; class, method and parameter
//! names are quoted so their case survives. User names starting with an
//! uppercase letter get a `_u_` prefix. Cardinalities become `#count`
//! aggregates with one tuple per literal, so repeated atoms are counted the
//! same way the embedded solver counts them.

use std::collections::HashMap;
use std::fmt::Write;

use crate::binding::{ObjectId, Value};
use crate::ground::{AtomId, GroundAtom, GroundCardinality, GroundHead, GroundProgram};

/// Solver text plus the table mapping printed atom names back to ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreText {
    pub text: String,
    names: Vec<String>,
    ids: HashMap<String, AtomId>,
}

impl CoreText {
    pub fn name(&self, atom: AtomId) -> &str {
        &self.names[atom]
    }

    pub fn lookup(&self, name: &str) -> Option<AtomId> {
        self.ids.get(name).copied()
    }

    /// One `% id name` comment line per atom.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for (i, n) in self.names.iter().enumerate() {
            writeln!(out, "% {i} {n}").unwrap();
        }
        out
    }
}

fn ident(name: &str) -> String {
    if name.starts_with(|c: char| c.is_ascii_uppercase()) {
        format!("_u_{name}")
    } else {
        name.to_string()
    }
}

fn quoted(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn object(o: &ObjectId) -> String {
    match o {
        ObjectId::Param(n) => format!("obj({n})"),
        ObjectId::Created { class, args } => {
            let mut s = format!("new({}", quoted(class));
            for a in args {
                s.push(',');
                s.push_str(&value(a));
            }
            s.push(')');
            s
        }
    }
}

fn value(v: &Value) -> String {
    match v {
        Value::Int(n) => n.to_string(),
        Value::Symbol(s) => ident(s),
        Value::Object(o) => object(o),
    }
}

fn apply(name: &str, args: impl IntoIterator<Item = String>) -> String {
    let args: Vec<String> = args.into_iter().collect();
    if args.is_empty() {
        name.to_string()
    } else {
        format!("{name}({})", args.join(","))
    }
}

/// The text form of one ground atom.
pub fn atom_name(atom: &GroundAtom) -> String {
    match atom {
        GroundAtom::Ordinary { pred, args } => apply(&ident(pred), args.iter().map(value)),
        GroundAtom::New { class, args } => apply(
            "created",
            std::iter::once(quoted(class)).chain(args.iter().map(value)),
        ),
        GroundAtom::Exe {
            stage,
            target,
            method,
            args,
        } => apply(
            "exe",
            [stage.to_string(), object(target), quoted(method)]
                .into_iter()
                .chain(args.iter().map(value)),
        ),
        GroundAtom::Return(o) => apply("ret", [object(o)]),
        GroundAtom::ParamMember {
            param,
            index,
            object: o,
        } => apply(
            "param_member",
            [quoted(param), index.to_string(), object(o)],
        ),
    }
}

fn bounds(out: &mut String, lower: Option<i64>, body: &str, upper: Option<i64>) {
    if let Some(l) = lower {
        write!(out, "{l} ").unwrap();
    }
    out.push_str(body);
    if let Some(u) = upper {
        write!(out, " {u}").unwrap();
    }
}

fn count(names: &[String], card: &GroundCardinality) -> String {
    let mut elems = Vec::new();
    for (i, l) in card.literals.iter().enumerate() {
        let mut cond = names[l.atom].clone();
        for g in &l.guards {
            cond.push_str(", ");
            cond.push_str(&names[*g]);
        }
        elems.push(format!("{i} : {cond}"));
    }
    let mut out = String::new();
    bounds(
        &mut out,
        card.lower,
        &format!("#count {{ {} }}", elems.join("; ")),
        card.upper,
    );
    out
}

/// Renders `program` for a conventional ASP solver.
pub fn emit_core_text(program: &GroundProgram) -> CoreText {
    let names: Vec<String> = program.atoms().iter().map(atom_name).collect();
    let mut text = String::new();
    for rule in &program.rules {
        let mut body: Vec<String> = Vec::new();
        body.extend(rule.pos.iter().map(|&a| names[a].clone()));
        body.extend(rule.neg.iter().map(|&a| format!("not {}", names[a])));
        body.extend(rule.cards.iter().map(|c| count(&names, c)));
        match &rule.head {
            Some(GroundHead::Atom(a)) => text.push_str(&names[*a]),
            Some(GroundHead::Choice {
                lower,
                upper,
                atoms,
            }) => {
                let inner: Vec<&str> = atoms.iter().map(|&a| names[a].as_str()).collect();
                bounds(
                    &mut text,
                    *lower,
                    &format!("{{ {} }}", inner.join("; ")),
                    *upper,
                );
            }
            None => {
                if body.is_empty() {
                    body.push("#true".into());
                }
            }
        }
        if !body.is_empty() {
            if rule.head.is_some() {
                text.push(' ');
            }
            text.push_str(":- ");
            text.push_str(&body.join(", "));
        }
        text.push_str(".\n");
    }
    if !program.minimize.is_empty() {
        let elems: Vec<String> = program
            .minimize
            .iter()
            .enumerate()
            .map(|(i, &a)| format!("1,{i} : {}", names[a]))
            .collect();
        writeln!(text, "#minimize {{ {} }}.", elems.join("; ")).unwrap();
    }
    let ids = names
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, n)| (n, i))
        .collect();
    CoreText { text, names, ids }
}
