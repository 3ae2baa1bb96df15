//! Free ultrafilters through their congruence traces.
//!
//! A [`ResidueSystem`] is a coherent family `r_n ∈ [0, n)` (a profinite
//! integer). Most presentations are stored per prime as an integer
//! component `a_p`, so that `r_n` is the CRT combination of `a_p mod p^k`
//! over `p^k ∥ n`; such systems are coherent by construction. Rules
//! written `on all` are evaluated modulus by modulus and checked for
//! coherence against every previously queried modulus.
//!
//! Textual syntax (items separated by `;`, optional `residues:` prefix):
//!
//! ```text
//! residues: n-1 on primes; default 0
//! residues: (n+1)/2 on odd primes; 2:1
//! residues: table (3:2)(5:4)(7:6)
//! residues: const 1
//! residues: n-1 on all
//! residues: sum(n-1 on primes | const 1)
//! residues: scale(2 | n-1 on primes)
//! ```

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{factorize, lcm, merge_congruences};
use crate::dsl::{parse_expression, BinOp, Expr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UltrafilterError {
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error("incoherent residues: r_{d} = {rd} but r_{n} = {rn}")]
    Incoherent { d: u64, rd: u64, n: u64, rn: u64 },
    #[error("table entries {first} and {second} have no common solution")]
    InconsistentTable {
        first: Congruence,
        second: Congruence,
    },
    #[error("table entry {entry} disagrees with the prime rule")]
    RuleConflict { entry: Congruence },
    #[error("bad residue presentation `{text}`: {reason}")]
    Presentation { text: String, reason: String },
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("rule evaluation failed at {n}: {reason}")]
    Evaluation { n: u64, reason: String },
}

/// `x ≡ residue (mod modulus)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Congruence {
    pub modulus: u64,
    pub residue: u64,
}

impl Congruence {
    pub fn new(modulus: u64, residue: u64) -> Result<Self, UltrafilterError> {
        if modulus == 0 {
            return Err(UltrafilterError::ZeroModulus);
        }
        if residue >= modulus {
            return Err(UltrafilterError::Presentation {
                text: format!("{modulus}:{residue}"),
                reason: "residue must be below the modulus".into(),
            });
        }
        Ok(Congruence { modulus, residue })
    }

    pub fn holds(&self, x: u128) -> bool {
        x % self.modulus as u128 == self.residue as u128
    }
}

impl fmt::Display for Congruence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.modulus, self.residue)
    }
}

impl FromStr for Congruence {
    type Err = UltrafilterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |reason: &str| UltrafilterError::Presentation {
            text: s.to_string(),
            reason: reason.to_string(),
        };
        let (m, r) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| bad("expected `modulus:residue`"))?;
        let m = m
            .trim()
            .parse()
            .map_err(|_| bad("modulus is not a natural number"))?;
        let r = r
            .trim()
            .parse()
            .map_err(|_| bad("residue is not a natural number"))?;
        Congruence::new(m, r)
    }
}

/// A finite list of congruences, parsed from `3:2,5:4,7:6`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CongruenceConstraintSet {
    pub constraints: Vec<Congruence>,
}

impl CongruenceConstraintSet {
    pub fn new(pairs: impl IntoIterator<Item = (u64, u64)>) -> Result<Self, UltrafilterError> {
        let constraints = pairs
            .into_iter()
            .map(|(m, r)| Congruence::new(m, r))
            .collect::<Result<_, _>>()?;
        Ok(CongruenceConstraintSet { constraints })
    }
}

impl FromStr for CongruenceConstraintSet {
    type Err = UltrafilterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let constraints = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect::<Result<_, _>>()?;
        Ok(CongruenceConstraintSet { constraints })
    }
}

/// The progression `modulus·N + residue`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progression {
    pub modulus: u128,
    pub residue: u128,
}

impl Progression {
    pub fn member(&self, k: u128) -> Option<u128> {
        self.modulus.checked_mul(k)?.checked_add(self.residue)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CrtOutcome {
    Progression {
        modulus: u128,
        residue: u128,
    },
    Inconsistent {
        first: Congruence,
        second: Congruence,
    },
}

/// Solves a system of congruences. Inconsistency is reported as the first
/// conflicting pair (in input order); only `lcm` overflow is an error.
pub fn crt_solve(c: &CongruenceConstraintSet) -> Result<CrtOutcome, UltrafilterError> {
    let cs = &c.constraints;
    for (i, a) in cs.iter().enumerate() {
        for b in &cs[i + 1..] {
            let pair = merge_congruences(
                a.residue as u128,
                a.modulus as u128,
                b.residue as u128,
                b.modulus as u128,
            )
            .map_err(|_| UltrafilterError::Overflow(format!("{a} with {b}")))?;
            if pair.is_none() {
                return Ok(CrtOutcome::Inconsistent {
                    first: *a,
                    second: *b,
                });
            }
        }
    }
    let p = solve_all(cs)?.expect("pairwise consistent congruences are jointly consistent");
    Ok(CrtOutcome::Progression {
        modulus: p.modulus,
        residue: p.residue,
    })
}

fn solve_all(cs: &[Congruence]) -> Result<Option<Progression>, UltrafilterError> {
    let (mut r, mut m) = (0u128, 1u128);
    for c in cs {
        match merge_congruences(r, m, c.residue as u128, c.modulus as u128)
            .map_err(|_| UltrafilterError::Overflow(format!("lcm with modulus {}", c.modulus)))?
        {
            Some((r2, m2)) => (r, m) = (r2, m2),
            None => return Ok(None),
        }
    }
    Ok(Some(Progression {
        modulus: m,
        residue: r,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimeSet {
    All,
    Odd,
}

impl PrimeSet {
    fn admits(self, p: u64) -> bool {
        match self {
            PrimeSet::All => true,
            PrimeSet::Odd => p != 2,
        }
    }
}

/// `r_q = ⌊(a·q + b) / c⌋` for all sufficiently large primes `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AffineRule {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl AffineRule {
    pub fn eval(&self, q: u64) -> i64 {
        (self.a * q as i64 + self.b).div_euclid(self.c)
    }

    /// Brings a raw rule into the range `[0, q)` for large `q`, so that it
    /// describes the residue itself rather than a representative.
    fn normalize(a: i64, b: i64, c: i64) -> Option<AffineRule> {
        if c <= 0 || a < 0 || a > c {
            return None;
        }
        if a == 0 || a == c {
            let k = b.div_euclid(c);
            return Some(if k >= 0 {
                AffineRule { a: 0, b: k, c: 1 }
            } else {
                AffineRule { a: 1, b: k, c: 1 }
            });
        }
        Some(AffineRule { a, b, c })
    }
}

#[derive(Debug, Clone)]
struct Adic {
    rule: Option<(Expr, PrimeSet)>,
    entries: Vec<Congruence>,
    table: Progression,
    default: i64,
}

#[derive(Debug, Clone)]
enum Repr {
    Adic(Adic),
    Modular(Expr),
    Sum(Box<ResidueSystem>, Box<ResidueSystem>),
    Scale(u64, Box<ResidueSystem>),
}

/// A coherent residue trace standing in for a free ultrafilter.
#[derive(Debug)]
pub struct ResidueSystem {
    repr: Repr,
    memo: Mutex<HashMap<u64, u64>>,
}

impl Clone for ResidueSystem {
    fn clone(&self) -> Self {
        ResidueSystem {
            repr: self.repr.clone(),
            memo: Mutex::new(self.memo.lock().expect("memo lock").clone()),
        }
    }
}

impl ResidueSystem {
    fn from_repr(repr: Repr) -> Self {
        ResidueSystem {
            repr,
            memo: Mutex::new(HashMap::new()),
        }
    }

    fn adic(
        rule: Option<(Expr, PrimeSet)>,
        entries: Vec<Congruence>,
        default: i64,
    ) -> Result<Self, UltrafilterError> {
        let table = table_progression(&entries)?;
        let adic = Adic {
            rule,
            entries,
            table,
            default,
        };
        // Entries at primes covered by the rule must agree with it.
        if let Some((expr, set)) = &adic.rule {
            for (p, e) in factorize_u128(table.modulus) {
                if !set.admits(p) {
                    continue;
                }
                let pe = (p as u128).pow(e);
                let v = eval_at(expr, p)?.rem_euclid(pe as i128) as u128;
                if v != table.residue % pe {
                    let entry = adic
                        .entries
                        .iter()
                        .find(|c| c.modulus % p == 0)
                        .copied()
                        .expect("prime comes from an entry");
                    return Err(UltrafilterError::RuleConflict { entry });
                }
            }
        }
        Ok(Self::from_repr(Repr::Adic(adic)))
    }

    /// The residue trace of the integer `k`: `r_n = k mod n`.
    pub fn constant(k: i64) -> Self {
        Self::adic(None, Vec::new(), k).expect("no table")
    }

    pub fn zero() -> Self {
        Self::constant(0)
    }

    /// `r_n = expr(n)` at the primes in `set` (and their powers), `default`
    /// elsewhere.
    pub fn prime_rule(expr: &str, set: PrimeSet, default: i64) -> Result<Self, UltrafilterError> {
        let e = parse_rule_expr(expr)?;
        Self::adic(Some((e, set)), Vec::new(), default)
    }

    /// The minimal coherent completion of a finite table.
    pub fn from_table(entries: &[(u64, u64)]) -> Result<Self, UltrafilterError> {
        let entries = entries
            .iter()
            .map(|&(m, r)| Congruence::new(m, r))
            .collect::<Result<Vec<_>, _>>()?;
        Self::adic(None, entries, 0)
    }

    /// Every `p` in `(modulus·N + residue)*`, completed minimally.
    pub fn from_progression(modulus: u64, residue: u64) -> Result<Self, UltrafilterError> {
        Self::from_table(&[(modulus, residue)])
    }

    /// The sum `p + q`: `r_n = (r_n(p) + r_n(q)) mod n`.
    pub fn add(&self, other: &ResidueSystem) -> ResidueSystem {
        Self::from_repr(Repr::Sum(Box::new(self.clone()), Box::new(other.clone())))
    }

    /// The product `k·p`: `r_n = k·r_n(p) mod n`.
    pub fn scale(&self, k: u64) -> ResidueSystem {
        Self::from_repr(Repr::Scale(k, Box::new(self.clone())))
    }

    pub fn residue(&self, n: u64) -> Result<u64, UltrafilterError> {
        if n == 0 {
            return Err(UltrafilterError::ZeroModulus);
        }
        if n == 1 {
            return Ok(0);
        }
        if let Some(r) = self.memo.lock().expect("memo lock").get(&n) {
            return Ok(*r);
        }
        let r = match &self.repr {
            Repr::Adic(a) => a.residue(n)?,
            Repr::Sum(p, q) => ((p.residue(n)? as u128 + q.residue(n)? as u128) % n as u128) as u64,
            Repr::Scale(k, p) => ((*k as u128 * p.residue(n)? as u128) % n as u128) as u64,
            Repr::Modular(e) => eval_at(e, n)?.rem_euclid(n as i128) as u64,
        };
        let mut memo = self.memo.lock().expect("memo lock");
        if matches!(self.repr, Repr::Modular(_)) {
            for (&d, &rd) in memo.iter() {
                let (small, rs, big, rb) = if d < n { (d, rd, n, r) } else { (n, r, d, rd) };
                if big % small == 0 && rb % small != rs {
                    return Err(UltrafilterError::Incoherent {
                        d: small,
                        rd: rs,
                        n: big,
                        rn: rb,
                    });
                }
            }
        }
        memo.insert(n, r);
        Ok(r)
    }

    /// The asymptotic residue rule at large primes, when it is affine.
    pub fn affine_on_primes(&self) -> Option<AffineRule> {
        match &self.repr {
            Repr::Adic(a) => match &a.rule {
                Some((e, _)) => affine_form(e).and_then(|(x, y, z)| AffineRule::normalize(x, y, z)),
                None => AffineRule::normalize(0, a.default, 1),
            },
            Repr::Modular(e) => affine_form(e).and_then(|(x, y, z)| AffineRule::normalize(x, y, z)),
            Repr::Scale(k, p) => {
                let r = p.affine_on_primes()?;
                let k = i64::try_from(*k).ok()?;
                if r.a == 0 {
                    AffineRule::normalize(0, r.b.checked_mul(k)?, 1)
                } else {
                    None
                }
            }
            Repr::Sum(p, q) => {
                let (p, q) = (p.affine_on_primes()?, q.affine_on_primes()?);
                let (r, k) = match (p.a, q.a) {
                    (_, 0) => (p, q.b),
                    (0, _) => (q, p.b),
                    _ => return None,
                };
                AffineRule::normalize(r.a, r.b + k * r.c, r.c)
            }
        }
    }
}

impl Adic {
    /// `a_p mod p^k`.
    fn component(&self, p: u64, k: u32) -> Result<u128, UltrafilterError> {
        let pk = (p as u128)
            .checked_pow(k)
            .ok_or_else(|| UltrafilterError::Overflow(format!("{p}^{k}")))?;
        if self.table.modulus.is_multiple_of(p as u128) {
            let mut pe = 1u128;
            while self.table.modulus.is_multiple_of(pe * p as u128) && pe < pk {
                pe *= p as u128;
            }
            return Ok(self.table.residue % pe);
        }
        let a = match &self.rule {
            Some((e, set)) if set.admits(p) => eval_at(e, p)?,
            _ => self.default as i128,
        };
        Ok(a.rem_euclid(pk as i128) as u128)
    }

    fn residue(&self, n: u64) -> Result<u64, UltrafilterError> {
        let (mut r, mut m) = (0u128, 1u128);
        for (p, k) in factorize(n) {
            let pk = (p as u128).pow(k);
            let a = self.component(p, k)?;
            (r, m) = merge_congruences(r, m, a, pk)
                .ok()
                .flatten()
                .expect("coprime moduli below 2^64 always merge");
        }
        debug_assert_eq!(m, n as u128);
        Ok(r as u64)
    }
}

fn table_progression(entries: &[Congruence]) -> Result<Progression, UltrafilterError> {
    let set = CongruenceConstraintSet {
        constraints: entries.to_vec(),
    };
    match crt_solve(&set)? {
        CrtOutcome::Progression { modulus, residue } => Ok(Progression { modulus, residue }),
        CrtOutcome::Inconsistent { first, second } => {
            Err(UltrafilterError::InconsistentTable { first, second })
        }
    }
}

fn factorize_u128(n: u128) -> Vec<(u64, u32)> {
    // Table moduli are lcms of u64 moduli; factor each prime out directly.
    let mut out = Vec::new();
    let mut n = n;
    let mut p = 2u64;
    while n > 1 {
        if (p as u128) * (p as u128) > n {
            out.push((u64::try_from(n).expect("remaining factor fits"), 1));
            break;
        }
        let mut e = 0;
        while n.is_multiple_of(p as u128) {
            n /= p as u128;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    out
}

fn eval_at(e: &Expr, n: u64) -> Result<i128, UltrafilterError> {
    let v = i64::try_from(n).map_err(|_| UltrafilterError::Overflow(format!("modulus {n}")))?;
    e.eval(&[v])
        .map(i128::from)
        .map_err(|err| UltrafilterError::Evaluation {
            n,
            reason: err.to_string(),
        })
}

fn parse_rule_expr(src: &str) -> Result<Expr, UltrafilterError> {
    parse_expression(src, &["n"]).map_err(|e| UltrafilterError::Presentation {
        text: src.to_string(),
        reason: e.to_string(),
    })
}

/// `(a, b, c)` with `e(n) = ⌊(a·n + b)/c⌋`, for integer-affine `e` possibly
/// wrapped in one division by a positive constant.
fn affine_form(e: &Expr) -> Option<(i64, i64, i64)> {
    if let Expr::Bin(x, BinOp::Div, c) = e {
        if let Expr::Int(c) = **c {
            if c > 0 {
                let (a, b) = linear(x)?;
                return Some((a, b, c));
            }
        }
        return None;
    }
    let (a, b) = linear(e)?;
    Some((a, b, 1))
}

fn linear(e: &Expr) -> Option<(i64, i64)> {
    match e {
        Expr::Int(v) => Some((0, *v)),
        Expr::Var { .. } => Some((1, 0)),
        Expr::Neg(x) => {
            let (a, b) = linear(x)?;
            Some((a.checked_neg()?, b.checked_neg()?))
        }
        Expr::Bin(x, op, y) => {
            let (a1, b1) = linear(x)?;
            let (a2, b2) = linear(y)?;
            match op {
                BinOp::Add => Some((a1.checked_add(a2)?, b1.checked_add(b2)?)),
                BinOp::Sub => Some((a1.checked_sub(a2)?, b1.checked_sub(b2)?)),
                BinOp::Mul if a1 == 0 => Some((b1.checked_mul(a2)?, b1.checked_mul(b2)?)),
                BinOp::Mul if a2 == 0 => Some((a1.checked_mul(b2)?, b1.checked_mul(b2)?)),
                _ => None,
            }
        }
    }
}

impl fmt::Display for ResidueSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Modular(e) => write!(f, "{e} on all"),
            Repr::Sum(p, q) => write!(f, "sum({p} | {q})"),
            Repr::Scale(k, p) => write!(f, "scale({k} | {p})"),
            Repr::Adic(a) => {
                let mut parts = Vec::new();
                if let Some((e, set)) = &a.rule {
                    parts.push(match set {
                        PrimeSet::All => format!("{e} on primes"),
                        PrimeSet::Odd => format!("{e} on odd primes"),
                    });
                }
                if !a.entries.is_empty() {
                    let cells: String = a.entries.iter().map(|c| format!("({c})")).collect();
                    parts.push(format!("table {cells}"));
                }
                if a.rule.is_none() && a.entries.is_empty() {
                    parts.push(format!("const {}", a.default));
                } else if a.default != 0 {
                    parts.push(format!("default {}", a.default));
                }
                f.write_str(&parts.join("; "))
            }
        }
    }
}

impl FromStr for ResidueSystem {
    type Err = UltrafilterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        let text = text.strip_prefix("residues:").unwrap_or(text).trim();
        let bad = |reason: &str| UltrafilterError::Presentation {
            text: s.to_string(),
            reason: reason.to_string(),
        };
        if let Some(inner) = text.strip_prefix("sum(").and_then(|t| t.strip_suffix(')')) {
            let (a, b) = split_top_level(inner, '|').ok_or_else(|| bad("expected `sum(A | B)`"))?;
            return Ok(a.parse::<ResidueSystem>()?.add(&b.parse()?));
        }
        if let Some(inner) = text
            .strip_prefix("scale(")
            .and_then(|t| t.strip_suffix(')'))
        {
            let (k, p) =
                split_top_level(inner, '|').ok_or_else(|| bad("expected `scale(k | A)`"))?;
            let k = k
                .trim()
                .parse::<u64>()
                .map_err(|_| bad("expected a natural factor"))?;
            return Ok(p.parse::<ResidueSystem>()?.scale(k));
        }
        let mut rule = None;
        let mut all_rule = None;
        let mut entries = Vec::new();
        let mut default = None;
        for item in text.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            if let Some(rest) = item.strip_prefix("table") {
                entries.extend(parse_cells(rest.trim()).map_err(|r| bad(&r))?);
            } else if let Some(k) = item
                .strip_prefix("default")
                .or_else(|| item.strip_prefix("const"))
            {
                let k = k
                    .trim()
                    .parse::<i64>()
                    .map_err(|_| bad("expected an integer"))?;
                if default.replace(k).is_some() {
                    return Err(bad("more than one default"));
                }
            } else if let Some(e) = item.strip_suffix("on odd primes") {
                set_once(&mut rule, (parse_rule_expr(e)?, PrimeSet::Odd)).map_err(|r| bad(&r))?;
            } else if let Some(e) = item.strip_suffix("on primes") {
                set_once(&mut rule, (parse_rule_expr(e)?, PrimeSet::All)).map_err(|r| bad(&r))?;
            } else if let Some(e) = item.strip_suffix("on all") {
                set_once(&mut all_rule, parse_rule_expr(e)?).map_err(|r| bad(&r))?;
            } else if item.contains(':') {
                for cell in item.split(',') {
                    entries.push(cell.parse()?);
                }
            } else {
                return Err(bad(&format!("unrecognized item `{item}`")));
            }
        }
        if let Some(e) = all_rule {
            if rule.is_some() || !entries.is_empty() || default.is_some() {
                return Err(bad("an `on all` rule cannot be combined with other items"));
            }
            return Ok(Self::from_repr(Repr::Modular(e)));
        }
        if rule.is_none() && entries.is_empty() && default.is_none() {
            return Err(bad("empty presentation"));
        }
        Self::adic(rule, entries, default.unwrap_or(0))
    }
}

impl Serialize for ResidueSystem {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn set_once<T>(slot: &mut Option<T>, value: T) -> Result<(), String> {
    if slot.replace(value).is_some() {
        Err("rule given twice".into())
    } else {
        Ok(())
    }
}

fn parse_cells(s: &str) -> Result<Vec<Congruence>, String> {
    let mut out = Vec::new();
    let mut rest = s;
    while !rest.is_empty() {
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.split_once(')'))
            .ok_or_else(|| format!("expected `(m:r)` at `{rest}`"))?;
        out.push(
            inner
                .0
                .parse()
                .map_err(|e: UltrafilterError| e.to_string())?,
        );
        rest = inner.1.trim_start();
    }
    Ok(out)
}

fn split_top_level(s: &str, sep: char) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

/// `lcm` over a list of moduli, `None` on overflow.
pub fn lcm_all(moduli: impl IntoIterator<Item = u64>) -> Option<u128> {
    moduli
        .into_iter()
        .try_fold(1u128, |acc, m| lcm(acc, m as u128))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::primes_up_to;
    use proptest::prelude::*;

    fn rs(s: &str) -> ResidueSystem {
        s.parse().unwrap()
    }

    #[test]
    fn residue_examples() {
        let p = rs("residues: n-1 on primes; default 0");
        assert_eq!(p.residue(5).unwrap(), 4);
        assert_eq!(p.residue(1).unwrap(), 0);
        assert_eq!(p.residue(25).unwrap(), 4);
        // CRT of 4 mod 5 and 6 mod 7.
        assert_eq!(p.residue(35).unwrap(), 34);
        assert_eq!(rs("const 3").residue(1).unwrap(), 0);

        let t = ResidueSystem::from_table(&[(6, 5)]).unwrap();
        assert_eq!(t.residue(3).unwrap(), 2);
        assert_eq!(t.residue(2).unwrap(), 1);
        assert_eq!(t.residue(6).unwrap(), 5);
        // Minimal completion: 5 mod 3 is the whole 3-adic component.
        assert_eq!(t.residue(9).unwrap(), 2);
        assert_eq!(t.residue(5).unwrap(), 0);
    }

    #[test]
    fn odd_prime_rule_with_override() {
        let q = rs("residues: (n+1)/2 on odd primes; 2:1");
        assert_eq!(q.residue(2).unwrap(), 1);
        assert_eq!(q.residue(7).unwrap(), 4);
        assert_eq!(q.residue(11).unwrap(), 6);
        assert_eq!(q.residue(14).unwrap(), 11);
        assert_eq!(q.affine_on_primes(), Some(AffineRule { a: 1, b: 1, c: 2 }));
    }

    #[test]
    fn presentations_round_trip() {
        for s in [
            "n-1 on primes",
            "(n+1)/2 on odd primes; table (2:1)",
            "table (3:2)(5:4)(7:6)",
            "const 1",
            "n-1 on all",
            "sum(n-1 on primes | const 1)",
            "scale(3 | n-1 on primes)",
        ] {
            let p = rs(s);
            assert_eq!(p.to_string(), s);
            let q = rs(&p.to_string());
            for n in 1..60 {
                assert_eq!(p.residue(n).unwrap(), q.residue(n).unwrap());
            }
        }
    }

    #[test]
    fn presentation_errors() {
        assert!(matches!(
            "table (2:0)(4:1)".parse::<ResidueSystem>(),
            Err(UltrafilterError::InconsistentTable { .. })
        ));
        assert!(matches!(
            "n-1 on primes; 5:3".parse::<ResidueSystem>(),
            Err(UltrafilterError::RuleConflict { .. })
        ));
        assert!("n-1 on primes; n on primes"
            .parse::<ResidueSystem>()
            .is_err());
        assert!("blah".parse::<ResidueSystem>().is_err());
        assert!("table (3:5)".parse::<ResidueSystem>().is_err());
        assert_eq!(rs("const 2").residue(0), Err(UltrafilterError::ZeroModulus));
    }

    #[test]
    fn incoherent_symbolic_rule_is_caught() {
        // r_2 = 1 but r_4 = 2.
        let p = rs("n/2 on all");
        assert_eq!(p.residue(2).unwrap(), 1);
        match p.residue(4) {
            Err(UltrafilterError::Incoherent { d: 2, n: 4, .. }) => {}
            other => panic!("{other:?}"),
        }
        // Coherent rule: never complains.
        let q = rs("n-1 on all");
        for n in 1..200 {
            assert_eq!(q.residue(n).unwrap(), n - 1);
        }
    }

    #[test]
    fn crt_examples() {
        let c: CongruenceConstraintSet = "3:2,5:4,7:6".parse().unwrap();
        assert_eq!(
            crt_solve(&c).unwrap(),
            CrtOutcome::Progression {
                modulus: 105,
                residue: 104
            }
        );
        // Exhaustive scan oracle: 104 is the least solution below 105.
        let sols: Vec<u128> = (0..105)
            .filter(|&x| c.constraints.iter().all(|k| k.holds(x)))
            .collect();
        assert_eq!(sols, vec![104]);

        let single = CongruenceConstraintSet::new([(9, 0)]).unwrap();
        assert_eq!(
            crt_solve(&single).unwrap(),
            CrtOutcome::Progression {
                modulus: 9,
                residue: 0
            }
        );

        let bad = CongruenceConstraintSet::new([(2, 0), (4, 1)]).unwrap();
        assert_eq!(
            crt_solve(&bad).unwrap(),
            CrtOutcome::Inconsistent {
                first: Congruence {
                    modulus: 2,
                    residue: 0
                },
                second: Congruence {
                    modulus: 4,
                    residue: 1
                },
            }
        );
        assert!((0..8).all(|x| !bad.constraints.iter().all(|k| k.holds(x))));
        assert_eq!(
            crt_solve(&CongruenceConstraintSet::default()).unwrap(),
            CrtOutcome::Progression {
                modulus: 1,
                residue: 0
            }
        );
    }

    #[test]
    fn add_examples() {
        let p = rs("n-1 on primes");
        let one = rs("const 1");
        let s = p.add(&one);
        for q in primes_up_to(100) {
            assert_eq!(s.residue(q).unwrap(), 0);
        }
        let z = p.add(&ResidueSystem::zero());
        for n in 1..100 {
            assert_eq!(z.residue(n).unwrap(), p.residue(n).unwrap());
        }
        assert_eq!(s.affine_on_primes(), Some(AffineRule { a: 0, b: 0, c: 1 }));
    }

    fn arb_system() -> impl Strategy<Value = ResidueSystem> {
        prop_oneof![
            (-5i64..5).prop_map(ResidueSystem::constant),
            (1u64..60, 0u64..60)
                .prop_map(|(m, r)| ResidueSystem::from_progression(m, r % m).unwrap()),
            Just(rs("n-1 on primes")),
            Just(rs("(n+1)/2 on odd primes; 2:1")),
            (2i64..5).prop_map(
                |k| ResidueSystem::prime_rule(&format!("n/{k}"), PrimeSet::All, 3).unwrap()
            ),
        ]
    }

    proptest! {
        #[test]
        fn coherence_closure(p in arb_system(), d in 1u64..40, k in 1u64..20) {
            let n = d * k;
            prop_assert_eq!(p.residue(n).unwrap() % d, p.residue(d).unwrap());
        }

        #[test]
        fn add_is_pointwise(p in arb_system(), q in arb_system(), n in 1u64..200) {
            let s = p.add(&q);
            prop_assert_eq!(s.residue(n).unwrap(), (p.residue(n).unwrap() + q.residue(n).unwrap()) % n);
            prop_assert_eq!(s.residue(n).unwrap(), q.add(&p).residue(n).unwrap());
        }

        #[test]
        fn scale_is_repeated_addition(p in arb_system(), k in 0u64..5, n in 1u64..200) {
            let mut sum = ResidueSystem::zero();
            for _ in 0..k {
                sum = sum.add(&p);
            }
            prop_assert_eq!(p.scale(k).residue(n).unwrap(), sum.residue(n).unwrap());
        }

        #[test]
        fn add_is_associative(p in arb_system(), q in arb_system(), r in arb_system(), n in 1u64..200) {
            let a = p.add(&q).add(&r);
            let b = p.add(&q.add(&r));
            prop_assert_eq!(a.residue(n).unwrap(), b.residue(n).unwrap());
        }

        #[test]
        fn crt_soundness(pairs in proptest::collection::vec((1u64..40, 0u64..40), 1..5)) {
            let set = CongruenceConstraintSet::new(pairs.iter().map(|&(m, r)| (m, r % m))).unwrap();
            match crt_solve(&set).unwrap() {
                CrtOutcome::Progression { modulus, residue } => {
                    let prog = Progression { modulus, residue };
                    for k in 0..10 {
                        let x = prog.member(k).unwrap();
                        prop_assert!(set.constraints.iter().all(|c| c.holds(x)));
                    }
                    prop_assert_eq!(Some(modulus), lcm_all(set.constraints.iter().map(|c| c.modulus)));
                }
                CrtOutcome::Inconsistent { first, second } => {
                    let l = lcm(first.modulus as u128, second.modulus as u128).unwrap();
                    prop_assert!((0..l).all(|x| !(first.holds(x) && second.holds(x))));
                }
            }
        }

        #[test]
        fn crt_complete_on_primes(residues in proptest::collection::vec(0u64..1000, 10)) {
            let ps = primes_up_to(30);
            let set = CongruenceConstraintSet::new(ps.iter().zip(&residues).map(|(&p, &r)| (p, r % p))).unwrap();
            let consistent = matches!(crt_solve(&set).unwrap(), CrtOutcome::Progression { .. });
            prop_assert!(consistent);
        }
    }
}
