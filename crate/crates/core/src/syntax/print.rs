//! Source rendering of the AST. Output re-parses to an identical tree.

use std::fmt::{self, Display, Formatter, Write};

use super::ast::*;

fn comma_list<T: Display>(f: &mut Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(n) => write!(f, "{n}"),
            Term::Symbol(s) | Term::ParamRef(s) => f.write_str(s),
            Term::Var(v) => write!(f, "{v}?"),
            Term::Anonymous => f.write_str("_"),
            Term::MethodValue { var, method } => write!(f, "{var}?.{method}()"),
            Term::Arith(l, op, r) => {
                let op = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                };
                if matches!(**r, Term::Arith(..)) {
                    write!(f, "{l}{op}({r})")
                } else {
                    write!(f, "{l}{op}{r}")
                }
            }
        }
    }
}

impl Display for Atom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.terms.is_empty() {
            f.write_str("(")?;
            comma_list(f, &self.terms)?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl Display for Membership {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}?{}({})", self.var, self.param, self.index)
    }
}

impl Display for CreationRef {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}?{}(", self.var, self.class)?;
        comma_list(f, &self.terms)?;
        f.write_str(")")
    }
}

impl Display for Comparison {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

impl Display for Condition {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Atom(a) => write!(f, "{a}"),
            Condition::Membership(m) => write!(f, "{m}"),
            Condition::CreationRef(c) => write!(f, "{c}"),
            Condition::Comparison(c) => write!(f, "{c}"),
        }
    }
}

impl Display for CardElement {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.template)?;
        for c in &self.conditions {
            write!(f, " : {c}")?;
        }
        Ok(())
    }
}

fn elements(f: &mut Formatter<'_>, elements: &[CardElement]) -> fmt::Result {
    f.write_str("{")?;
    for (i, e) in elements.iter().enumerate() {
        if i > 0 {
            f.write_str("; ")?;
        }
        write!(f, "{e}")?;
    }
    f.write_str("}")
}

impl Display for Cardinality {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if let Some(l) = &self.lower {
            write!(f, "{l} ")?;
        }
        elements(f, &self.elements)?;
        if let Some(u) = &self.upper {
            write!(f, " {u}")?;
        }
        Ok(())
    }
}

impl Display for HeadAtom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            HeadAtom::Ordinary(a) => write!(f, "{a}"),
            HeadAtom::Choice(c) => write!(f, "{c}"),
            HeadAtom::New { class, terms } => {
                write!(f, "new {class}(")?;
                comma_list(f, terms)?;
                f.write_str(")")
            }
            HeadAtom::Exe {
                stage,
                target,
                method,
                terms,
            } => {
                f.write_str("exe")?;
                if let Some(k) = stage {
                    write!(f, "[{k}]")?;
                }
                write!(f, " {target}?.{method}(")?;
                comma_list(f, terms)?;
                f.write_str(")")
            }
            HeadAtom::Return { target } => write!(f, "return {target}?"),
        }
    }
}

impl Display for BodyLiteral {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            BodyLiteral::Positive(a) => write!(f, "{a}"),
            BodyLiteral::Negated(NegatableLiteral::Atom(a)) => write!(f, "not {a}"),
            BodyLiteral::Negated(NegatableLiteral::Membership(m)) => write!(f, "not {m}"),
            BodyLiteral::Negated(NegatableLiteral::CreationRef(c)) => write!(f, "not {c}"),
            BodyLiteral::Membership(m) => write!(f, "{m}"),
            BodyLiteral::CreationRef(c) => write!(f, "{c}"),
            BodyLiteral::Comparison(c) => write!(f, "{c}"),
            BodyLiteral::Cardinality(c) => write!(f, "{c}"),
            BodyLiteral::Count { var, elements: es } => {
                write!(f, "{var}? = ")?;
                elements(f, es)
            }
        }
    }
}

impl Display for Rule {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if let Some(h) = &self.head {
            write!(f, "{h}")?;
            if !self.body.is_empty() {
                f.write_str(" ")?;
            }
        }
        if !self.body.is_empty() {
            f.write_str(":- ")?;
            comma_list_spaced(f, &self.body)?;
        }
        f.write_str(".")
    }
}

fn comma_list_spaced<T: Display>(f: &mut Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

impl Display for SpecProgram {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if let Some(p) = &self.package_name {
            writeln!(f, "package {p};")?;
        }
        for i in &self.imports {
            if i.wildcard {
                writeln!(f, "import {}.*;", i.path)?;
            } else {
                writeln!(f, "import {};", i.path)?;
            }
        }
        let mut params = String::new();
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                params.push_str(", ");
            }
            match &p.kind {
                ParamKind::Int => write!(params, "int {}", p.name)?,
                ParamKind::ObjectArray(c) => write!(params, "{c}[] {}", p.name)?,
            }
        }
        writeln!(f, "{}({params}) {{", self.spec_name)?;
        for r in &self.rules {
            writeln!(f, "    {r}")?;
        }
        if let Some(m) = &self.minimize {
            f.write_str("    #minimize ")?;
            elements(f, &m.elements)?;
            writeln!(f, ".")?;
        }
        writeln!(f, "}}")
    }
}
