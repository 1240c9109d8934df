//! Recursive-descent parser producing a [`SpecProgram`].

use thiserror::Error;

use super::ast::*;
use super::lexer::{tokenize, LexError, Pos, Spanned, Token};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("`{name}` is both a parameter and an imported class")]
    Ambiguous { name: String },
}

/// Parses a complete specification: header, then rules inside braces.
pub fn parse_spec(source: &str) -> Result<SpecProgram, ParseError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser {
        tokens,
        at: 0,
        params: Vec::new(),
    };
    parser.spec()
}

struct Parser {
    tokens: Vec<Spanned>,
    at: usize,
    params: Vec<ParamDecl>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.peek_at(0)
    }

    fn peek_at(&self, offset: usize) -> Option<&Token> {
        self.tokens.get(self.at + offset).map(|s| &s.token)
    }

    fn pos(&self) -> Pos {
        match self.tokens.get(self.at) {
            Some(s) => s.pos,
            None => self
                .tokens
                .last()
                .map(|s| Pos {
                    line: s.pos.line,
                    column: s.pos.column + 1,
                })
                .unwrap_or(Pos { line: 1, column: 1 }),
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        match self.peek() {
            Some(t) => self.error(format!("expected {expected}, found {t}")),
            None => self.error(format!("expected {expected}, found end of input")),
        }
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.at).map(|s| s.token.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, token: &Token) -> bool {
        if self.peek() == Some(token) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: Token) -> PResult<()> {
        if self.eat(&token) {
            Ok(())
        } else {
            self.unexpected(&token.to_string())
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Token::Ident(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn variable(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Token::Var(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => self.unexpected("variable"),
        }
    }

    fn dotted(&mut self, allow_wildcard: bool) -> PResult<(String, bool)> {
        let mut parts = vec![self.ident()?];
        while self.eat(&Token::Dot) {
            if allow_wildcard && self.eat(&Token::Star) {
                return Ok((parts.join("."), true));
            }
            parts.push(self.ident()?);
        }
        Ok((parts.join("."), false))
    }

    fn spec(&mut self) -> PResult<SpecProgram> {
        let mut package_name = None;
        if self.eat(&Token::Package) {
            package_name = Some(self.dotted(false)?.0);
            self.expect(Token::Semicolon)?;
        }
        let mut imports = Vec::new();
        while self.eat(&Token::Import) {
            let (path, wildcard) = self.dotted(true)?;
            self.expect(Token::Semicolon)?;
            imports.push(Import { path, wildcard });
        }
        let spec_name = self.ident()?;
        self.expect(Token::LParen)?;
        let mut params: Vec<ParamDecl> = Vec::new();
        if !self.eat(&Token::RParen) {
            loop {
                let param_pos = self.pos();
                let decl = self.param_decl()?;
                if params.iter().any(|p| p.name == decl.name) {
                    return Err(ParseError::Syntax {
                        pos: param_pos,
                        message: format!("duplicate parameter `{}`", decl.name),
                    });
                }
                params.push(decl);
                if self.eat(&Token::RParen) {
                    break;
                }
                self.expect(Token::Comma)?;
            }
        }
        for p in &params {
            if imports
                .iter()
                .any(|i| i.class_name() == Some(p.name.as_str()))
            {
                return Err(ParseError::Ambiguous {
                    name: p.name.clone(),
                });
            }
        }
        self.params = params.clone();

        self.expect(Token::LBrace)?;
        let mut rules = Vec::new();
        let mut minimize = None;
        loop {
            match self.peek() {
                Some(Token::RBrace) => {
                    self.at += 1;
                    break;
                }
                None => return self.unexpected("`}`"),
                Some(Token::Minimize) => {
                    if minimize.is_some() {
                        return self.error("only one #minimize statement is allowed");
                    }
                    self.at += 1;
                    self.expect(Token::LBrace)?;
                    let elements = self.elements()?;
                    self.expect(Token::RBrace)?;
                    self.eat(&Token::Dot);
                    minimize = Some(MinimizeStatement { elements });
                }
                Some(_) => rules.push(self.rule()?),
            }
        }
        if let Some(t) = self.peek() {
            return self.error(format!("unexpected {t} after specification body"));
        }
        Ok(SpecProgram {
            package_name,
            imports,
            spec_name,
            params,
            rules,
            minimize,
        })
    }

    fn param_decl(&mut self) -> PResult<ParamDecl> {
        let ty = self.ident()?;
        if self.eat(&Token::LBracket) {
            self.expect(Token::RBracket)?;
            let name = self.ident()?;
            return Ok(ParamDecl {
                name,
                kind: ParamKind::ObjectArray(ty),
            });
        }
        if ty != "int" {
            return self.error(format!(
                "parameter type must be `int` or an array type, found `{ty}`"
            ));
        }
        let name = self.ident()?;
        Ok(ParamDecl {
            name,
            kind: ParamKind::Int,
        })
    }

    fn rule(&mut self) -> PResult<Rule> {
        if self.eat(&Token::If) {
            if self.peek() == Some(&Token::Dot) {
                return self.error("integrity constraint needs a nonempty body");
            }
            let body = self.body()?;
            self.expect(Token::Dot)?;
            return Ok(Rule { head: None, body });
        }
        let head = self.head()?;
        let mut body = Vec::new();
        if self.eat(&Token::If) && self.peek() != Some(&Token::Dot) {
            body = self.body()?;
        }
        self.expect(Token::Dot)?;
        Ok(Rule {
            head: Some(head),
            body,
        })
    }

    fn head(&mut self) -> PResult<HeadAtom> {
        match self.peek() {
            Some(Token::New) => {
                self.at += 1;
                let class = self.ident()?;
                let terms = self.paren_terms()?;
                Ok(HeadAtom::New { class, terms })
            }
            Some(Token::Exe) => {
                self.at += 1;
                let mut stage = None;
                if self.eat(&Token::LBracket) {
                    match self.bump() {
                        Some(Token::Int(k)) if k >= 0 && k <= u32::MAX as i64 => {
                            stage = Some(k as u32)
                        }
                        _ => {
                            self.at -= 1;
                            return self.unexpected("nonnegative stage number");
                        }
                    }
                    self.expect(Token::RBracket)?;
                }
                let target = self.variable()?;
                self.expect(Token::Dot)?;
                let method = self.ident()?;
                let terms = self.paren_terms()?;
                Ok(HeadAtom::Exe {
                    stage,
                    target,
                    method,
                    terms,
                })
            }
            Some(Token::Return) => {
                self.at += 1;
                let target = self.variable()?;
                Ok(HeadAtom::Return { target })
            }
            Some(Token::LBrace) => Ok(HeadAtom::Choice(self.cardinality(None)?)),
            Some(Token::Ident(_))
                if !matches!(
                    self.peek_at(1),
                    Some(Token::LBrace | Token::Plus | Token::Minus)
                ) =>
            {
                Ok(HeadAtom::Ordinary(self.atom()?))
            }
            Some(
                Token::Ident(_) | Token::Int(_) | Token::Var(_) | Token::Minus | Token::LParen,
            ) => {
                let lower = self.term()?;
                if self.peek() != Some(&Token::LBrace) {
                    return self.unexpected("`{`");
                }
                Ok(HeadAtom::Choice(self.cardinality(Some(lower))?))
            }
            _ => self.unexpected("rule head"),
        }
    }

    fn body(&mut self) -> PResult<Vec<BodyLiteral>> {
        let mut lits = vec![self.body_literal()?];
        while self.eat(&Token::Comma) {
            lits.push(self.body_literal()?);
        }
        Ok(lits)
    }

    fn body_literal(&mut self) -> PResult<BodyLiteral> {
        match self.peek() {
            Some(Token::Not) => {
                self.at += 1;
                match self.peek() {
                    Some(Token::Var(_)) => match self.object_literal()? {
                        ObjectLiteral::Membership(m) => {
                            Ok(BodyLiteral::Negated(NegatableLiteral::Membership(m)))
                        }
                        ObjectLiteral::CreationRef(c) => {
                            Ok(BodyLiteral::Negated(NegatableLiteral::CreationRef(c)))
                        }
                    },
                    Some(Token::Ident(_)) => {
                        Ok(BodyLiteral::Negated(NegatableLiteral::Atom(self.atom()?)))
                    }
                    _ => self.unexpected("atom after `not`"),
                }
            }
            Some(Token::LBrace) => Ok(BodyLiteral::Cardinality(self.cardinality(None)?)),
            Some(Token::Var(_)) if matches!(self.peek_at(1), Some(Token::Ident(_))) => {
                Ok(match self.object_literal()? {
                    ObjectLiteral::Membership(m) => BodyLiteral::Membership(m),
                    ObjectLiteral::CreationRef(c) => BodyLiteral::CreationRef(c),
                })
            }
            Some(Token::Var(v)) if self.peek_at(1) == Some(&Token::Assign) => {
                let var = v.clone();
                self.at += 2;
                self.expect(Token::LBrace)?;
                let elements = self.elements()?;
                self.expect(Token::RBrace)?;
                Ok(BodyLiteral::Count { var, elements })
            }
            Some(Token::Ident(_)) if self.ident_starts_atom() => {
                Ok(BodyLiteral::Positive(self.atom()?))
            }
            Some(_) => {
                let lhs = self.term()?;
                if self.peek() == Some(&Token::LBrace) {
                    return Ok(BodyLiteral::Cardinality(self.cardinality(Some(lhs))?));
                }
                Ok(BodyLiteral::Comparison(self.comparison_rest(lhs)?))
            }
            None => self.unexpected("body literal"),
        }
    }

    /// An identifier starts an atom unless it is followed by something only
    /// a term could be followed by.
    fn ident_starts_atom(&self) -> bool {
        !matches!(
            self.peek_at(1),
            Some(
                Token::EqEq
                    | Token::Ne
                    | Token::Lt
                    | Token::Gt
                    | Token::Le
                    | Token::Ge
                    | Token::Plus
                    | Token::Minus
                    | Token::LBrace
            )
        )
    }

    fn comparison_rest(&mut self, lhs: Term) -> PResult<Comparison> {
        let op = match self.peek() {
            Some(Token::EqEq) => CompareOp::Eq,
            Some(Token::Ne) => CompareOp::Ne,
            Some(Token::Lt) => CompareOp::Lt,
            Some(Token::Gt) => CompareOp::Gt,
            Some(Token::Le) => CompareOp::Le,
            Some(Token::Ge) => CompareOp::Ge,
            _ => return self.unexpected("comparison operator"),
        };
        self.at += 1;
        let rhs = self.term()?;
        Ok(Comparison { lhs, op, rhs })
    }

    /// `V?name(...)`: membership when `name` is an array parameter, creation
    /// reference otherwise.
    fn object_literal(&mut self) -> PResult<ObjectLiteral> {
        let var = self.variable()?;
        let name_pos = self.pos();
        let name = self.ident()?;
        let terms = self.paren_terms()?;
        if self.params.iter().any(|p| p.name == name) {
            if !matches!(self.param_kind(&name), Some(ParamKind::ObjectArray(_))) {
                return Err(ParseError::Syntax {
                    pos: name_pos,
                    message: format!("scalar parameter `{name}` used as an array"),
                });
            }
            let mut terms = terms;
            if terms.len() != 1 {
                return Err(ParseError::Syntax {
                    pos: name_pos,
                    message: format!("array membership `{var}?{name}(..)` takes exactly one index"),
                });
            }
            return Ok(ObjectLiteral::Membership(Membership {
                var,
                param: name,
                index: terms.remove(0),
            }));
        }
        Ok(ObjectLiteral::CreationRef(CreationRef {
            var,
            class: name,
            terms,
        }))
    }

    fn param_kind(&self, name: &str) -> Option<&ParamKind> {
        self.params.iter().find(|p| p.name == name).map(|p| &p.kind)
    }

    fn atom(&mut self) -> PResult<Atom> {
        let pred = self.ident()?;
        if self.params.iter().any(|p| p.name == pred) {
            return self.error(format!("parameter `{pred}` used as a predicate"));
        }
        let terms = if self.peek() == Some(&Token::LParen) {
            self.paren_terms()?
        } else {
            Vec::new()
        };
        Ok(Atom { pred, terms })
    }

    fn paren_terms(&mut self) -> PResult<Vec<Term>> {
        self.expect(Token::LParen)?;
        let mut terms = Vec::new();
        if self.eat(&Token::RParen) {
            return Ok(terms);
        }
        loop {
            terms.push(self.term()?);
            if self.eat(&Token::RParen) {
                return Ok(terms);
            }
            self.expect(Token::Comma)?;
        }
    }

    fn cardinality(&mut self, lower: Option<Term>) -> PResult<Cardinality> {
        self.expect(Token::LBrace)?;
        let elements = self.elements()?;
        self.expect(Token::RBrace)?;
        let upper = match self.peek() {
            Some(
                Token::Int(_) | Token::Var(_) | Token::Ident(_) | Token::Minus | Token::LParen,
            ) => Some(self.term()?),
            _ => None,
        };
        Ok(Cardinality {
            lower,
            elements,
            upper,
        })
    }

    fn elements(&mut self) -> PResult<Vec<CardElement>> {
        let mut out = Vec::new();
        if self.peek() == Some(&Token::RBrace) {
            return Ok(out);
        }
        loop {
            let template = self.atom()?;
            let mut conditions = Vec::new();
            while self.eat(&Token::Colon) {
                conditions.push(self.condition()?);
            }
            out.push(CardElement {
                template,
                conditions,
            });
            if !self.eat(&Token::Semicolon) {
                return Ok(out);
            }
        }
    }

    fn condition(&mut self) -> PResult<Condition> {
        match self.peek() {
            Some(Token::Var(_)) if matches!(self.peek_at(1), Some(Token::Ident(_))) => {
                Ok(match self.object_literal()? {
                    ObjectLiteral::Membership(m) => Condition::Membership(m),
                    ObjectLiteral::CreationRef(c) => Condition::CreationRef(c),
                })
            }
            Some(Token::Ident(_)) if self.ident_starts_atom() => Ok(Condition::Atom(self.atom()?)),
            Some(_) => {
                let lhs = self.term()?;
                Ok(Condition::Comparison(self.comparison_rest(lhs)?))
            }
            None => self.unexpected("condition"),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let mut lhs = self.primary()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => ArithOp::Add,
                Some(Token::Minus) => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.at += 1;
            let rhs = self.primary()?;
            lhs = Term::Arith(Box::new(lhs), op, Box::new(rhs));
        }
    }

    fn primary(&mut self) -> PResult<Term> {
        match self.peek().cloned() {
            Some(Token::Int(n)) => {
                self.at += 1;
                Ok(Term::Int(n))
            }
            Some(Token::Minus) if matches!(self.peek_at(1), Some(Token::Int(_))) => {
                self.at += 1;
                match self.bump() {
                    Some(Token::Int(n)) => Ok(Term::Int(-n)),
                    _ => unreachable!(),
                }
            }
            Some(Token::Anonymous) => {
                self.at += 1;
                Ok(Term::Anonymous)
            }
            Some(Token::LParen) => {
                self.at += 1;
                let t = self.term()?;
                self.expect(Token::RParen)?;
                Ok(t)
            }
            Some(Token::Var(v)) => {
                self.at += 1;
                let is_method = self.peek() == Some(&Token::Dot)
                    && matches!(self.peek_at(1), Some(Token::Ident(_)))
                    && self.peek_at(2) == Some(&Token::LParen)
                    && self.peek_at(3) == Some(&Token::RParen);
                if is_method {
                    self.at += 1;
                    let method = self.ident()?;
                    self.at += 2;
                    return Ok(Term::MethodValue { var: v, method });
                }
                Ok(Term::Var(v))
            }
            Some(Token::Ident(name)) => {
                self.at += 1;
                if self.peek() == Some(&Token::LParen) {
                    self.at -= 1;
                    return self.error(format!("function terms are not supported (`{name}(..)`)"));
                }
                match self.param_kind(&name) {
                    Some(ParamKind::Int) => Ok(Term::ParamRef(name)),
                    Some(ParamKind::ObjectArray(_)) => {
                        self.at -= 1;
                        self.error(format!("array parameter `{name}` used as a term"))
                    }
                    None => Ok(Term::Symbol(name)),
                }
            }
            _ => self.unexpected("term"),
        }
    }
}

enum ObjectLiteral {
    Membership(Membership),
    CreationRef(CreationRef),
}
