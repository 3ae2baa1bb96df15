//! Countable compact ordinal spaces `[0, α]` with `α < ω^ω`.
//!
//! Points are ordinals in Cantor normal form. The order topology on `[0, α]`
//! has a canonical countable neighborhood base at every limit point: the
//! clopen tails `(x_k, x]` cut out by the fundamental sequence `x_k ↑ x`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// One Cantor normal form term `ω^exp · coeff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Term {
    pub exp: u32,
    pub coeff: u64,
}

/// An ordinal below `ω^ω`, stored as strictly decreasing CNF terms with
/// positive coefficients. The empty term list is `0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Point {
    terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("point {point} lies outside space {space} = [0, {top}]")]
    OutsideSpace {
        point: Point,
        space: String,
        top: Point,
    },
    #[error("point {0} is isolated and has no fundamental sequence")]
    Isolated(Point),
    #[error("invalid Cantor normal form: {0}")]
    InvalidForm(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse point `{input}`: {reason}")]
pub struct ParsePointError {
    pub input: String,
    pub reason: String,
}

impl Point {
    pub fn zero() -> Self {
        Point { terms: Vec::new() }
    }

    pub fn finite(n: u64) -> Self {
        Point::monomial(0, n)
    }

    /// `ω^exp · coeff`; zero coefficient yields `0`.
    pub fn monomial(exp: u32, coeff: u64) -> Self {
        if coeff == 0 {
            Point::zero()
        } else {
            Point {
                terms: vec![Term { exp, coeff }],
            }
        }
    }

    /// Builds a point from `(exponent, coefficient)` pairs in any order.
    /// Zero coefficients are dropped; repeated exponents are rejected.
    pub fn from_coefficients(
        coeffs: impl IntoIterator<Item = (u32, u64)>,
    ) -> Result<Self, SpaceError> {
        let mut terms: Vec<Term> = coeffs
            .into_iter()
            .filter(|&(_, c)| c > 0)
            .map(|(exp, coeff)| Term { exp, coeff })
            .collect();
        terms.sort_by_key(|t| std::cmp::Reverse(t.exp));
        if terms.windows(2).any(|w| w[0].exp == w[1].exp) {
            return Err(SpaceError::InvalidForm(
                "repeated exponent in coefficient list".into(),
            ));
        }
        Ok(Point { terms })
    }

    pub fn from_terms(terms: Vec<Term>) -> Result<Self, SpaceError> {
        if terms.iter().any(|t| t.coeff == 0) {
            return Err(SpaceError::InvalidForm("zero coefficient".into()));
        }
        if terms.windows(2).any(|w| w[0].exp <= w[1].exp) {
            return Err(SpaceError::InvalidForm(
                "exponents must be strictly decreasing".into(),
            ));
        }
        Ok(Point { terms })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `ω^exp` (zero when absent).
    pub fn coeff(&self, exp: u32) -> u64 {
        self.terms
            .iter()
            .find(|t| t.exp == exp)
            .map_or(0, |t| t.coeff)
    }

    pub fn leading_exp(&self) -> Option<u32> {
        self.terms.first().map(|t| t.exp)
    }

    /// Exponent of the last CNF term; this is the Cantor–Bendixson rank of
    /// the point in any `[0, α]` containing it.
    pub fn rank(&self) -> u32 {
        self.terms.last().map_or(0, |t| t.exp)
    }

    pub fn is_isolated(&self) -> bool {
        self.rank() == 0
    }

    /// Largest coefficient appearing in the normal form.
    pub fn max_coeff(&self) -> u64 {
        self.terms.iter().map(|t| t.coeff).max().unwrap_or(0)
    }

    /// Immediate predecessor of a successor ordinal.
    pub fn predecessor(&self) -> Option<Point> {
        match self.terms.last() {
            Some(t) if t.exp == 0 => {
                let mut terms = self.terms.clone();
                let last = terms.last_mut().expect("non-empty");
                last.coeff -= 1;
                if last.coeff == 0 {
                    terms.pop();
                }
                Some(Point { terms })
            }
            _ => None,
        }
    }

    /// `self + ω^exp · coeff` under the rule that lower terms are absorbed.
    pub fn add_monomial(&self, exp: u32, coeff: u64) -> Point {
        if coeff == 0 {
            return self.clone();
        }
        let mut terms: Vec<Term> = self
            .terms
            .iter()
            .copied()
            .take_while(|t| t.exp >= exp)
            .collect();
        match terms.last_mut() {
            Some(t) if t.exp == exp => t.coeff += coeff,
            _ => terms.push(Term { exp, coeff }),
        }
        Point { terms }
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            match a.exp.cmp(&b.exp) {
                Ordering::Equal => {}
                ord => return ord,
            }
            match a.coeff.cmp(&b.coeff) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            match (t.exp, t.coeff) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => f.write_str("w")?,
                (1, c) => write!(f, "w*{c}")?,
                (e, 1) => write!(f, "w^{e}")?,
                (e, c) => write!(f, "w^{e}*{c}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for Point {
    type Err = ParsePointError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fail = |reason: &str| ParsePointError {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(fail("empty input"));
        }
        let mut terms = Vec::new();
        for raw in compact.split('+') {
            let term = parse_term(raw).map_err(|r| fail(&r))?;
            terms.push(term);
        }
        // `0` is only allowed as the whole point.
        if terms.len() > 1 && terms.iter().any(|t| t.coeff == 0) {
            return Err(fail("zero term inside a sum"));
        }
        terms.retain(|t| t.coeff > 0);
        Point::from_terms(terms).map_err(|e| fail(&e.to_string()))
    }
}

fn parse_term(raw: &str) -> Result<Term, String> {
    let number = |s: &str| -> Result<u64, String> {
        s.parse::<u64>()
            .map_err(|_| format!("expected a natural number, found `{s}`"))
    };
    if raw.is_empty() {
        return Err("empty term".into());
    }
    let Some(rest) = raw.strip_prefix('w') else {
        return Ok(Term {
            exp: 0,
            coeff: number(raw)?,
        });
    };
    let (exp_part, coeff_part) = match rest.split_once('*') {
        Some((e, c)) => (e, Some(c)),
        None => (rest, None),
    };
    let exp = match exp_part.strip_prefix('^') {
        Some(e) => u32::try_from(number(e)?).map_err(|_| "exponent too large".to_string())?,
        None if exp_part.is_empty() => 1,
        None => return Err(format!("unexpected `{exp_part}` after `w`")),
    };
    if exp == 0 {
        return Err("use a plain number for finite terms".into());
    }
    let coeff = match coeff_part {
        Some(c) => number(c)?,
        None => 1,
    };
    if coeff == 0 {
        return Err("zero coefficient".into());
    }
    Ok(Term { exp, coeff })
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The space `[0, top]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub name: String,
    pub top: Point,
}

impl SpaceSpec {
    pub fn new(name: impl Into<String>, top: Point) -> Self {
        SpaceSpec {
            name: name.into(),
            top,
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        x <= &self.top
    }

    pub fn check(&self, x: &Point) -> Result<(), SpaceError> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(SpaceError::OutsideSpace {
                point: x.clone(),
                space: self.name.clone(),
                top: self.top.clone(),
            })
        }
    }

    /// Points of the space whose coefficients are all at most
    /// `max(depth, coefficient of top)`, in increasing order.
    pub fn truncation(&self, depth: u64) -> Vec<Point> {
        let top_exp = self.top.leading_exp().unwrap_or(0);
        let bounds: Vec<u64> = (0..=top_exp)
            .rev()
            .map(|e| depth.max(self.top.coeff(e)))
            .collect();
        let mut out = Vec::new();
        let mut coeffs = vec![0u64; bounds.len()];
        enumerate_coeffs(&bounds, 0, &mut coeffs, top_exp, &self.top, &mut out);
        out.sort();
        out
    }

    /// Limit points (rank ≥ 1) of [`SpaceSpec::truncation`].
    pub fn limit_points(&self, depth: u64) -> Vec<Point> {
        self.truncation(depth)
            .into_iter()
            .filter(|p| !p.is_isolated())
            .collect()
    }
}

fn enumerate_coeffs(
    bounds: &[u64],
    idx: usize,
    coeffs: &mut Vec<u64>,
    top_exp: u32,
    top: &Point,
    out: &mut Vec<Point>,
) {
    if idx == bounds.len() {
        let point = Point::from_coefficients(
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| (top_exp - i as u32, c)),
        )
        .expect("distinct exponents");
        if &point <= top {
            out.push(point);
        }
        return;
    }
    for c in 0..=bounds[idx] {
        coeffs[idx] = c;
        enumerate_coeffs(bounds, idx + 1, coeffs, top_exp, top, out);
    }
    coeffs[idx] = 0;
}

/// Cantor–Bendixson rank of `x` in `space`.
pub fn cb_rank(x: &Point, space: &SpaceSpec) -> Result<u32, SpaceError> {
    space.check(x)?;
    Ok(x.rank())
}

/// The fundamental sequence of a limit point: for `x = δ + ω^e·c`,
/// `x_k = δ + ω^e·(c−1) + ω^(e−1)·k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundamentalSequence {
    anchor: Point,
    base: Point,
    step_exp: u32,
}

impl FundamentalSequence {
    pub fn anchor(&self) -> &Point {
        &self.anchor
    }

    pub fn term(&self, k: u64) -> Point {
        self.base.add_monomial(self.step_exp, k)
    }
}

pub fn canonical_sequence(x: &Point, space: &SpaceSpec) -> Result<FundamentalSequence, SpaceError> {
    space.check(x)?;
    fundamental_sequence(x)
}

/// Space-free version of [`canonical_sequence`].
pub fn fundamental_sequence(x: &Point) -> Result<FundamentalSequence, SpaceError> {
    let Some(last) = x.terms.last().copied() else {
        return Err(SpaceError::Isolated(x.clone()));
    };
    if last.exp == 0 {
        return Err(SpaceError::Isolated(x.clone()));
    }
    let mut terms = x.terms.clone();
    let tail = terms.last_mut().expect("non-empty");
    tail.coeff -= 1;
    if tail.coeff == 0 {
        terms.pop();
    }
    Ok(FundamentalSequence {
        anchor: x.clone(),
        base: Point { terms },
        step_exp: last.exp - 1,
    })
}

/// A basic clopen neighborhood `(lower, anchor]`; `lower = None` means the
/// interval is unbounded below.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Neighborhood {
    pub anchor: Point,
    pub lower: Option<Point>,
}

impl Neighborhood {
    /// The `k`-th basic neighborhood of `x`: the tail `T_k` for limit points
    /// and `{x}` for isolated ones.
    pub fn basic(x: &Point, k: u64) -> Neighborhood {
        match fundamental_sequence(x) {
            Ok(seq) => Neighborhood {
                anchor: x.clone(),
                lower: Some(seq.term(k)),
            },
            Err(_) => Neighborhood {
                anchor: x.clone(),
                lower: x.predecessor(),
            },
        }
    }

    pub fn contains(&self, y: &Point) -> bool {
        y <= &self.anchor && self.lower.as_ref().is_none_or(|l| l < y)
    }
}

impl fmt::Display for Neighborhood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.lower {
            Some(l) => write!(f, "({l}, {}]", self.anchor),
            None => write!(f, "[0, {}]", self.anchor),
        }
    }
}

/// `T_k = { y : canonical_sequence(x)(k) < y ≤ x }`.
pub fn tail_set(x: &Point, k: u64, space: &SpaceSpec) -> Result<Neighborhood, SpaceError> {
    let seq = canonical_sequence(x, space)?;
    Ok(Neighborhood {
        anchor: x.clone(),
        lower: Some(seq.term(k)),
    })
}

/// Number of family indices examined at a given depth.
pub fn horizon(depth: u64) -> u64 {
    4 * (depth + 1)
}

/// Outcome of a depth-bounded convergence test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Convergence {
    YesAtDepth { depth: u64 },
    No { tail: u64, violations: Vec<u64> },
}

impl Convergence {
    pub fn is_yes(&self) -> bool {
        matches!(self, Convergence::YesAtDepth { .. })
    }
}

/// Semi-decides `family(k) → x`.
///
/// Tails `T_0..=T_depth` of `x` are tested against the upper window
/// `[H/2, H]` of family indices, `H = horizon(depth)`. The first tail with a
/// term outside it is reported together with all violating indices.
pub fn converges_to(family: impl Fn(u64) -> Point, x: &Point, depth: u64) -> Convergence {
    let h = horizon(depth);
    let window: Vec<(u64, Point)> = (h / 2..=h).map(|k| (k, family(k))).collect();
    converges_window(&window, x, depth)
}

/// [`converges_to`] over precomputed `(index, term)` samples.
pub fn converges_window(window: &[(u64, Point)], x: &Point, depth: u64) -> Convergence {
    for j in 0..=depth {
        let tail = Neighborhood::basic(x, j);
        let violations: Vec<u64> = window
            .iter()
            .filter(|(_, y)| !tail.contains(y))
            .map(|(k, _)| *k)
            .collect();
        if !violations.is_empty() {
            return Convergence::No {
                tail: j,
                violations,
            };
        }
    }
    Convergence::YesAtDepth { depth }
}

/// Coordinates on `[0, ω²]` in the notation `d`, `d_m`, `d^m_n`
/// (`m, n ≥ 1`): column `m` is the increasing sequence `d^m_n → d_m`.
///
/// Encoding: `d = ω²`, `d_m = ω·m`, `d^1_n = n − 1`, `d^m_n = ω·(m−1) + n`
/// for `m ≥ 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Omega2Coord {
    Top,
    Limit { m: u64 },
    Isolated { m: u64, n: u64 },
}

impl Omega2Coord {
    pub fn to_point(self) -> Point {
        match self {
            Omega2Coord::Top => Point::monomial(2, 1),
            Omega2Coord::Limit { m } => Point::monomial(1, m),
            Omega2Coord::Isolated { m: 1, n } => Point::finite(n - 1),
            Omega2Coord::Isolated { m, n } => {
                Point::from_coefficients([(1, m - 1), (0, n)]).expect("distinct exponents")
            }
        }
    }

    pub fn from_point(x: &Point) -> Option<Omega2Coord> {
        if x.leading_exp().is_some_and(|e| e > 2) {
            return None;
        }
        let (a, b, c) = (x.coeff(2), x.coeff(1), x.coeff(0));
        match (a, b, c) {
            (1, 0, 0) => Some(Omega2Coord::Top),
            (0, 0, c) => Some(Omega2Coord::Isolated { m: 1, n: c + 1 }),
            (0, b, 0) => Some(Omega2Coord::Limit { m: b }),
            (0, b, c) => Some(Omega2Coord::Isolated { m: b + 1, n: c }),
            _ => None,
        }
    }
}

impl fmt::Display for Omega2Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Omega2Coord::Top => f.write_str("d"),
            Omega2Coord::Limit { m } => write!(f, "d_{m}"),
            Omega2Coord::Isolated { m, n } => write!(f, "d^{m}_{n}"),
        }
    }
}

/// Shorthand constructors for the `ω²+1` notation.
pub mod omega2 {
    use super::{Omega2Coord, Point};

    pub fn d() -> Point {
        Omega2Coord::Top.to_point()
    }

    pub fn d_(m: u64) -> Point {
        Omega2Coord::Limit { m }.to_point()
    }

    pub fn dmn(m: u64, n: u64) -> Point {
        Omega2Coord::Isolated { m, n }.to_point()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(s: &str) -> Point {
        s.parse().unwrap()
    }

    fn omega2() -> SpaceSpec {
        SpaceSpec::new("omega2", pt("w^2"))
    }

    /// Brute-force Cantor–Bendixson rank: iterate the derived set on a
    /// finite truncation, where `y` is a limit point of `S` iff every tail
    /// of `y` at the sampled depth meets `S \ {y}`.
    fn derivative_rank(x: &Point, universe: &[Point], depth: u64) -> u32 {
        let mut current: Vec<Point> = universe.to_vec();
        let mut rank = 0;
        loop {
            if !current.contains(x) {
                return rank - 1;
            }
            let next: Vec<Point> = current
                .iter()
                .filter(|y| {
                    (0..depth).all(|k| {
                        let tail = Neighborhood::basic(y, k);
                        current.iter().any(|z| z != *y && tail.contains(z))
                    })
                })
                .cloned()
                .collect();
            current = next;
            rank += 1;
        }
    }

    #[test]
    fn parse_and_print() {
        assert_eq!(pt("w^2*1+w*2+7").to_string(), "w^2+w*2+7");
        assert_eq!(
            pt("w*3+5"),
            Point::from_coefficients([(1, 3), (0, 5)]).unwrap()
        );
        assert_eq!(pt("0"), Point::zero());
        assert_eq!(pt(" w ^ 2 "), Point::monomial(2, 1));
        assert!("w*3+w^2".parse::<Point>().is_err());
        assert!("w*0".parse::<Point>().is_err());
        assert!("x".parse::<Point>().is_err());
        assert!("".parse::<Point>().is_err());
    }

    #[test]
    fn ordering_follows_cnf() {
        let mut v = [pt("w^2"), pt("w*3+5"), pt("7"), pt("w"), pt("w*3"), pt("0")];
        v.sort();
        let s: Vec<String> = v.iter().map(|p| p.to_string()).collect();
        assert_eq!(s, ["0", "7", "w", "w*3", "w*3+5", "w^2"]);
    }

    #[test]
    fn cb_rank_examples() {
        let sp = omega2();
        assert_eq!(cb_rank(&pt("7"), &sp).unwrap(), 0);
        assert_eq!(cb_rank(&pt("w*3"), &sp).unwrap(), 1);
        assert_eq!(cb_rank(&pt("w^2"), &sp).unwrap(), 2);
        assert!(matches!(
            cb_rank(&pt("w^2+1"), &sp),
            Err(SpaceError::OutsideSpace { .. })
        ));
    }

    #[test]
    fn cb_rank_matches_iterated_derivative() {
        // Truncation {β ≤ ω²: β ≤ ω·4} plus ω², sampled densely enough
        // that the finite derived-set iteration sees every limit.
        let sp = SpaceSpec::new("t", pt("w^2"));
        let universe: Vec<Point> = sp
            .truncation(12)
            .into_iter()
            .filter(|p| p <= &pt("w*4") || p == &pt("w^2"))
            .collect();
        let depth = 3;
        for probe in ["w*3", "w", "w*2+1", "5"] {
            let x = pt(probe);
            assert_eq!(derivative_rank(&x, &universe, depth), x.rank(), "{probe}");
        }
        // ω² sits above columns 1..=12 only through ω·12; use the full
        // truncation for the rank-2 check.
        let full = sp.truncation(12);
        assert_eq!(derivative_rank(&pt("w^2"), &full, depth), 2);
    }

    #[test]
    fn canonical_sequence_examples() {
        let sp = omega2();
        let s = canonical_sequence(&pt("w*2"), &sp).unwrap();
        assert_eq!(s.term(5), pt("w+5"));
        let s = canonical_sequence(&pt("w^2"), &sp).unwrap();
        assert_eq!(s.term(4), pt("w*4"));
        assert_eq!(s.term(0), Point::zero());
        let s = canonical_sequence(&pt("w"), &sp).unwrap();
        assert_eq!(s.term(9), pt("9"));
        assert!(matches!(
            canonical_sequence(&pt("3"), &sp),
            Err(SpaceError::Isolated(_))
        ));
    }

    #[test]
    fn tail_set_examples() {
        let sp = omega2();
        let t = tail_set(&pt("w^2"), 3, &sp).unwrap();
        assert!(t.contains(&pt("w*3+5")));
        assert!(!t.contains(&pt("w*2")));
        let t = tail_set(&pt("w"), 0, &sp).unwrap();
        assert!((1..200).all(|k| t.contains(&Point::finite(k))));
        assert!(t.contains(&pt("w")));
        let t = tail_set(&pt("w"), 5, &sp).unwrap();
        let members: Vec<u64> = (0..20).filter(|&k| t.contains(&Point::finite(k))).collect();
        assert_eq!(members, (6..20).collect::<Vec<_>>());
        assert!(t.contains(&pt("w")));
        assert!(!t.contains(&pt("w+1")));
        assert!(tail_set(&pt("4"), 1, &sp).is_err());
    }

    #[test]
    fn converges_to_examples() {
        let x = pt("w*2");
        assert!(converges_to(|k| pt("w").add_monomial(0, k), &x, 10).is_yes());
        match converges_to(Point::finite, &pt("w^2"), 10) {
            Convergence::No { tail, violations } => {
                assert_eq!(tail, 1);
                assert!(!violations.is_empty());
            }
            other => panic!("expected no, got {other:?}"),
        }
        let c = pt("w*3+1");
        assert!(converges_to(|_| c.clone(), &c, 7).is_yes());
    }

    #[test]
    fn omega2_encoding_is_bijective_on_truncation() {
        let sp = omega2();
        let pts = sp.truncation(15);
        let mut seen = std::collections::HashSet::new();
        for p in &pts {
            let c = Omega2Coord::from_point(p).expect("every point has coordinates");
            assert_eq!(&c.to_point(), p);
            assert!(seen.insert(c));
        }
        assert_eq!(omega2::dmn(1, 1), Point::zero());
        assert_eq!(omega2::dmn(3, 2), pt("w*2+2"));
        assert_eq!(omega2::d_(3), pt("w*3"));
    }

    fn arb_point() -> impl Strategy<Value = Point> {
        proptest::collection::vec(0u64..6, 3)
            .prop_map(|c| Point::from_coefficients([(2, c[0]), (1, c[1]), (0, c[2])]).unwrap())
    }

    fn arb_limit() -> impl Strategy<Value = Point> {
        (0u64..6, 0u64..6, 1u32..3).prop_map(|(a, b, e)| {
            let p = Point::from_coefficients([(2, a), (1, b)]).unwrap();
            p.add_monomial(e, 1)
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(p in arb_point()) {
            let s = p.to_string();
            let q: Point = s.parse().unwrap();
            prop_assert_eq!(&q, &p);
            prop_assert_eq!(q.to_string(), s);
        }

        #[test]
        fn basis_nesting(x in arb_limit(), k in 0u64..20, y in arb_point()) {
            let t0 = Neighborhood::basic(&x, k);
            let t1 = Neighborhood::basic(&x, k + 1);
            prop_assert!(t0.contains(&x));
            prop_assert!(!t1.contains(&y) || t0.contains(&y));
        }

        #[test]
        fn separation(x in arb_limit(), y in arb_point()) {
            prop_assume!(x != y);
            let bound = y.max_coeff() + 1;
            prop_assert!((0..=bound).any(|k| !Neighborhood::basic(&x, k).contains(&y)));
        }

        #[test]
        fn canonical_sequence_converges(x in arb_limit(), depth in 0u64..25) {
            let seq = fundamental_sequence(&x).unwrap();
            prop_assert!(converges_to(|k| seq.term(k), &x, depth).is_yes());
        }
    }
}
