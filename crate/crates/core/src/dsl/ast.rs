use std::fmt;

use crate::ordinal::{Omega2Coord, Point};

use super::MapError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => " mod ",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 2,
        }
    }
}

/// Integer expression over clause variables. `slot` indexes the clause's
/// binding table and is filled in by scope resolution.
#[derive(Debug, Clone)]
pub enum Expr {
    Int(i64),
    Var { name: String, slot: usize },
    Neg(Box<Expr>),
    Bin(Box<Expr>, BinOp, Box<Expr>),
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Expr::Int(a), Expr::Int(b)) => a == b,
            (Expr::Var { name: a, .. }, Expr::Var { name: b, .. }) => a == b,
            (Expr::Neg(a), Expr::Neg(b)) => a == b,
            (Expr::Bin(a1, o1, b1), Expr::Bin(a2, o2, b2)) => o1 == o2 && a1 == a2 && b1 == b2,
            _ => false,
        }
    }
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var {
            name: name.to_string(),
            slot: usize::MAX,
        }
    }

    pub fn eval(&self, env: &[i64]) -> Result<i64, MapError> {
        let overflow = || MapError::Arithmetic(format!("overflow in `{self}`"));
        match self {
            Expr::Int(v) => Ok(*v),
            Expr::Var { slot, name } => env
                .get(*slot)
                .copied()
                .ok_or_else(|| MapError::Arithmetic(format!("unbound variable `{name}`"))),
            Expr::Neg(e) => e.eval(env)?.checked_neg().ok_or_else(overflow),
            Expr::Bin(a, op, b) => {
                let (a, b) = (a.eval(env)?, b.eval(env)?);
                match op {
                    BinOp::Add => a.checked_add(b).ok_or_else(overflow),
                    BinOp::Sub => a.checked_sub(b).ok_or_else(overflow),
                    BinOp::Mul => a.checked_mul(b).ok_or_else(overflow),
                    BinOp::Div | BinOp::Mod if b == 0 => Err(MapError::Arithmetic(format!(
                        "division by zero in `{self}`"
                    ))),
                    BinOp::Div => a.checked_div_euclid(b).ok_or_else(overflow),
                    BinOp::Mod => a.checked_rem_euclid(b).ok_or_else(overflow),
                }
            }
        }
    }

    /// Whether printing as a term coefficient needs parentheses.
    fn is_atomic(&self) -> bool {
        matches!(self, Expr::Int(v) if *v >= 0) || matches!(self, Expr::Var { .. })
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        match self {
            Expr::Int(v) if *v < 0 => write!(f, "(-{})", v.unsigned_abs()),
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Var { name, .. } => f.write_str(name),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.fmt_prec(f, 3)
            }
            Expr::Bin(a, op, b) => {
                let p = op.precedence();
                if p < parent {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, p)?;
                f.write_str(op.symbol())?;
                // Left-associative: the right operand binds tighter.
                b.fmt_prec(f, p + 1)?;
                if p < parent {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Writes an expression in coefficient position (`w*<c>`, `d_<c>`).
struct Coef<'a>(&'a Expr);

impl fmt::Display for Coef<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_atomic() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }

    fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Guard {
    /// `e0 op1 e1 op2 e2 ...`, a chained comparison.
    Cmp(Expr, Vec<(CmpOp, Expr)>),
    Prime(Expr),
    Not(Box<Guard>),
    And(Vec<Guard>),
}

impl Guard {
    pub fn holds(&self, env: &[i64]) -> Result<bool, MapError> {
        match self {
            Guard::Cmp(first, rest) => {
                let mut lhs = first.eval(env)?;
                for (op, e) in rest {
                    let rhs = e.eval(env)?;
                    if !op.holds(lhs, rhs) {
                        return Ok(false);
                    }
                    lhs = rhs;
                }
                Ok(true)
            }
            Guard::Prime(e) => Ok(u64::try_from(e.eval(env)?).is_ok_and(crate::arith::is_prime)),
            Guard::Not(g) => Ok(!g.holds(env)?),
            Guard::And(gs) => {
                for g in gs {
                    if !g.holds(env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::Cmp(first, rest) => {
                write!(f, "{first}")?;
                for (op, e) in rest {
                    write!(f, " {} {e}", op.symbol())?;
                }
                Ok(())
            }
            Guard::Prime(e) => write!(f, "prime({e})"),
            Guard::Not(g) => write!(f, "not {g}"),
            Guard::And(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" and ")?;
                    }
                    write!(f, "{g}")?;
                }
                Ok(())
            }
        }
    }
}

/// Coefficient slot in a pattern: a literal or a variable to bind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoefPat {
    Lit(u64),
    Var { name: String, slot: usize },
}

impl CoefPat {
    fn bind(&self, value: u64, env: &mut [i64]) -> bool {
        match self {
            CoefPat::Lit(c) => *c == value,
            CoefPat::Var { slot, .. } => {
                let Ok(v) = i64::try_from(value) else {
                    return false;
                };
                // Repeated variables must agree; unset slots hold i64::MIN.
                let cell = &mut env[*slot];
                if *cell == i64::MIN || *cell == v {
                    *cell = v;
                    true
                } else {
                    false
                }
            }
        }
    }
}

impl fmt::Display for CoefPat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefPat::Lit(c) => write!(f, "{c}"),
            CoefPat::Var { name, .. } => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    /// `x`: every point.
    Any,
    /// CNF template: the listed exponents with their coefficient slots.
    /// Points with a nonzero coefficient at an unlisted exponent do not
    /// match.
    Ordinal(Vec<(u32, CoefPat)>),
    /// `d`
    Top,
    /// `d_m`
    Limit(CoefPat),
    /// `d^m_n`
    Isolated(CoefPat, CoefPat),
}

impl Pattern {
    /// Matches `x`, writing bindings into `env`. `env` must be reset to
    /// `i64::MIN` beforehand.
    pub fn matches(&self, x: &Point, env: &mut [i64]) -> bool {
        match self {
            Pattern::Any => true,
            Pattern::Ordinal(terms) => {
                if x.terms()
                    .iter()
                    .any(|t| !terms.iter().any(|(e, _)| *e == t.exp))
                {
                    return false;
                }
                terms.iter().all(|(e, c)| c.bind(x.coeff(*e), env))
            }
            Pattern::Top => Omega2Coord::from_point(x) == Some(Omega2Coord::Top),
            Pattern::Limit(m) => match Omega2Coord::from_point(x) {
                Some(Omega2Coord::Limit { m: mv }) => m.bind(mv, env),
                _ => false,
            },
            Pattern::Isolated(m, n) => match Omega2Coord::from_point(x) {
                Some(Omega2Coord::Isolated { m: mv, n: nv }) => m.bind(mv, env) && n.bind(nv, env),
                _ => false,
            },
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Any => f.write_str("x"),
            Pattern::Ordinal(terms) => {
                write_template(f, terms.iter().map(|(e, c)| (*e, c.to_string())))
            }
            Pattern::Top => f.write_str("d"),
            Pattern::Limit(m) => write!(f, "d_{m}"),
            Pattern::Isolated(m, n) => write!(f, "d^{m}_{n}"),
        }
    }
}

fn write_template(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (u32, String)>,
) -> fmt::Result {
    for (i, (e, c)) in terms.enumerate() {
        if i > 0 {
            f.write_str(" + ")?;
        }
        match e {
            0 => f.write_str(&c)?,
            1 => write!(f, "w*{c}")?,
            e => write!(f, "w^{e}*{c}")?,
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    /// `x`: the input point.
    Input,
    Ordinal(Vec<(u32, Expr)>),
    Top,
    Limit(Expr),
    Isolated(Expr, Expr),
}

impl Output {
    pub fn eval(&self, x: &Point, env: &[i64]) -> Result<Point, MapError> {
        let natural = |e: &Expr, min: i64| -> Result<u64, MapError> {
            let v = e.eval(env)?;
            if v < min {
                Err(MapError::NegativeCoefficient {
                    expr: e.to_string(),
                    value: v,
                })
            } else {
                Ok(v as u64)
            }
        };
        match self {
            Output::Input => Ok(x.clone()),
            Output::Ordinal(terms) => {
                let coeffs = terms
                    .iter()
                    .map(|(exp, e)| Ok((*exp, natural(e, 0)?)))
                    .collect::<Result<Vec<_>, MapError>>()?;
                Point::from_coefficients(coeffs).map_err(|e| MapError::Arithmetic(e.to_string()))
            }
            Output::Top => Ok(Omega2Coord::Top.to_point()),
            Output::Limit(m) => Ok(Omega2Coord::Limit { m: natural(m, 1)? }.to_point()),
            Output::Isolated(m, n) => Ok(Omega2Coord::Isolated {
                m: natural(m, 1)?,
                n: natural(n, 1)?,
            }
            .to_point()),
        }
    }
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Output::Input => f.write_str("x"),
            Output::Ordinal(terms) => {
                write_template(f, terms.iter().map(|(e, c)| (*e, Coef(c).to_string())))
            }
            Output::Top => f.write_str("d"),
            Output::Limit(m) => write!(f, "d_{}", Coef(m)),
            Output::Isolated(m, n) => write!(f, "d^{}_{}", Coef(m), Coef(n)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub pattern: Pattern,
    pub output: Output,
    pub guard: Option<Guard>,
    /// Number of variable slots bound by the pattern.
    pub slots: usize,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.pattern, self.output)?;
        if let Some(g) = &self.guard {
            write!(f, " if {g}")?;
        }
        Ok(())
    }
}
