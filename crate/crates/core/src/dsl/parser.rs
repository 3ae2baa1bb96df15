use super::ast::{BinOp, Clause, CmpOp, CoefPat, Expr, Guard, Output, Pattern};
use super::lexer::{tokenize, Pos, Tok};
use super::DslError;

const RESERVED: &[&str] = &["x", "w", "d", "if", "and", "not", "prime", "mod"];

pub(crate) fn parse_clauses(src: &str) -> Result<Vec<Clause>, DslError> {
    let tokens = tokenize(src)?;
    let mut p = Parser {
        tokens,
        at: 0,
        scope: Vec::new(),
    };
    let mut clauses = Vec::new();
    loop {
        while p.eat(&Tok::Semi) {}
        if p.peek() == &Tok::Eof {
            break;
        }
        clauses.push(p.clause()?);
        match p.peek() {
            Tok::Semi | Tok::Eof => {}
            _ => return Err(p.error("expected `;` between clauses")),
        }
    }
    if clauses.is_empty() {
        return Err(DslError::Syntax {
            line: 1,
            col: 1,
            message: "a map needs at least one clause".into(),
        });
    }
    Ok(clauses)
}

struct Parser {
    tokens: Vec<(Tok, Pos)>,
    at: usize,
    scope: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].0
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.at + offset).min(self.tokens.len() - 1);
        &self.tokens[i].0
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.at].0.clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(s) if s == kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, message: impl Into<String>) -> DslError {
        let pos = self.pos();
        DslError::Syntax {
            line: pos.line,
            col: pos.col,
            message: format!("{} (found {:?})", message.into(), self.peek()),
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), DslError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn clause(&mut self) -> Result<Clause, DslError> {
        self.scope.clear();
        let pattern = self.pattern()?;
        self.expect(Tok::Arrow, "`->`")?;
        let output = self.output()?;
        let guard = if self.eat_keyword("if") {
            Some(self.guard()?)
        } else {
            None
        };
        Ok(Clause {
            pattern,
            output,
            guard,
            slots: self.scope.len(),
        })
    }

    fn bind(&mut self, name: String) -> CoefPat {
        let slot = match self.scope.iter().position(|s| s == &name) {
            Some(i) => i,
            None => {
                self.scope.push(name.clone());
                self.scope.len() - 1
            }
        };
        CoefPat::Var { name, slot }
    }

    fn coef_pat(&mut self) -> Result<CoefPat, DslError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(CoefPat::Lit(v))
            }
            Tok::Ident(name) if !RESERVED.contains(&name.as_str()) => {
                self.bump();
                Ok(self.bind(name))
            }
            _ => Err(self.error("expected a literal or a variable")),
        }
    }

    fn pattern(&mut self) -> Result<Pattern, DslError> {
        if self.eat_keyword("x") {
            return Ok(Pattern::Any);
        }
        if self.eat_keyword("d") {
            if self.eat(&Tok::Caret) {
                let m = self.coef_pat()?;
                self.expect(Tok::Underscore, "`_` in `d^m_n`")?;
                let n = self.coef_pat()?;
                return Ok(Pattern::Isolated(m, n));
            }
            if self.eat(&Tok::Underscore) {
                return Ok(Pattern::Limit(self.coef_pat()?));
            }
            return Ok(Pattern::Top);
        }
        let start = self.pos();
        let mut terms = vec![self.pattern_term()?];
        while self.eat(&Tok::Plus) {
            terms.push(self.pattern_term()?);
        }
        check_decreasing(terms.iter().map(|(e, _)| *e), start)?;
        Ok(Pattern::Ordinal(terms))
    }

    /// `w^E*c`, `w^E`, `w*c`, `w`, or a bare finite coefficient.
    fn pattern_term(&mut self) -> Result<(u32, CoefPat), DslError> {
        if !self.eat_keyword("w") {
            return Ok((0, self.coef_pat()?));
        }
        let exp = self.exponent()?;
        if self.eat(&Tok::Star) {
            Ok((exp, self.coef_pat()?))
        } else {
            Ok((exp, CoefPat::Lit(1)))
        }
    }

    fn exponent(&mut self) -> Result<u32, DslError> {
        if !self.eat(&Tok::Caret) {
            return Ok(1);
        }
        match self.bump() {
            Tok::Int(e) if e >= 1 && e <= u32::MAX as u64 => Ok(e as u32),
            _ => Err(self.error("expected a positive exponent after `^`")),
        }
    }

    fn output(&mut self) -> Result<Output, DslError> {
        if self.eat_keyword("x") {
            return Ok(Output::Input);
        }
        if self.eat_keyword("d") {
            if self.eat(&Tok::Caret) {
                let m = self.coef_expr()?;
                self.expect(Tok::Underscore, "`_` in `d^m_n`")?;
                let n = self.coef_expr()?;
                return Ok(Output::Isolated(m, n));
            }
            if self.eat(&Tok::Underscore) {
                return Ok(Output::Limit(self.coef_expr()?));
            }
            return Ok(Output::Top);
        }
        let start = self.pos();
        let mut terms = vec![self.output_term()?];
        while self.eat(&Tok::Plus) {
            terms.push(self.output_term()?);
        }
        check_decreasing(terms.iter().map(|(e, _)| *e), start)?;
        Ok(Output::Ordinal(terms))
    }

    fn output_term(&mut self) -> Result<(u32, Expr), DslError> {
        if !self.eat_keyword("w") {
            return Ok((0, self.coef_expr()?));
        }
        let exp = self.exponent()?;
        if self.eat(&Tok::Star) {
            Ok((exp, self.coef_expr()?))
        } else {
            Ok((exp, Expr::Int(1)))
        }
    }

    /// Coefficient position: literal, variable, or parenthesized expression.
    fn coef_expr(&mut self) -> Result<Expr, DslError> {
        match self.peek() {
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Int(_) | Tok::Ident(_) => self.atom(),
            _ => Err(self.error("expected a coefficient")),
        }
    }

    fn guard(&mut self) -> Result<Guard, DslError> {
        let mut parts = vec![self.conjunct()?];
        while self.eat_keyword("and") {
            parts.push(self.conjunct()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().expect("one element")
        } else {
            Guard::And(parts)
        })
    }

    fn conjunct(&mut self) -> Result<Guard, DslError> {
        if self.eat_keyword("not") {
            return Ok(Guard::Not(Box::new(self.conjunct()?)));
        }
        if matches!(self.peek(), Tok::Ident(s) if s == "prime") && self.peek_at(1) == &Tok::LParen {
            self.bump();
            self.bump();
            let e = self.expr()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Guard::Prime(e));
        }
        let first = self.expr()?;
        let mut rest = Vec::new();
        while let Some(op) = self.cmp_op() {
            rest.push((op, self.expr()?));
        }
        if rest.is_empty() {
            return Err(self.error("expected a comparison"));
        }
        Ok(Guard::Cmp(first, rest))
    }

    fn cmp_op(&mut self) -> Option<CmpOp> {
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            _ => return None,
        };
        self.bump();
        Some(op)
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Expr::Bin(Box::new(lhs), op, Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Ident(s) if s == "mod" => BinOp::Mod,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(Box::new(lhs), op, Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        if self.eat(&Tok::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, DslError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                i64::try_from(v)
                    .map(Expr::Int)
                    .map_err(|_| self.error("integer literal out of range"))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) if !RESERVED.contains(&name.as_str()) => {
                self.bump();
                match self.scope.iter().position(|s| s == &name) {
                    Some(slot) => Ok(Expr::Var { name, slot }),
                    None => Err(DslError::UnboundVariable {
                        line: pos.line,
                        col: pos.col,
                        name,
                    }),
                }
            }
            _ => Err(self.error("expected an expression")),
        }
    }
}

fn check_decreasing(exps: impl Iterator<Item = u32>, at: Pos) -> Result<(), DslError> {
    let exps: Vec<u32> = exps.collect();
    if exps.windows(2).all(|w| w[0] > w[1]) {
        Ok(())
    } else {
        Err(DslError::Syntax {
            line: at.line,
            col: at.col,
            message: "template exponents must be strictly decreasing".into(),
        })
    }
}

/// Parses a standalone integer expression over the given variable names;
/// variable `vars[i]` gets slot `i`.
pub(crate) fn parse_expression(src: &str, vars: &[&str]) -> Result<Expr, DslError> {
    let tokens = tokenize(src)?;
    let mut p = Parser {
        tokens,
        at: 0,
        scope: vars.iter().map(|s| s.to_string()).collect(),
    };
    let e = p.expr()?;
    if p.peek() != &Tok::Eof {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}
