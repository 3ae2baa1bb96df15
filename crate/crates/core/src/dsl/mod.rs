//! Piecewise map definitions.
//!
//! A map is a `;`-separated list of clauses `pattern -> output [if guard]`,
//! evaluated first-match. Patterns are either `x` (any point), a CNF
//! template such as `w^2*1 + w*b + c`, or the `ω²+1` shorthands `d`, `d_m`
//! and `d^m_n`. Guards are conjunctions of (chained) comparisons,
//! `prime(e)` and `not`; expressions use `+ - * / mod` over the pattern's
//! variables.
//!
//! ```text
//! d -> d;
//! d_1 -> d;
//! d_m -> d_(m-1) if m > 1;
//! d^1_n -> d^n_n if prime(n);
//! ```

mod ast;
mod lexer;
mod parser;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use ast::{BinOp, Clause, CmpOp, CoefPat, Expr, Guard, Output, Pattern};

use crate::ordinal::{
    converges_window, fundamental_sequence, horizon, Convergence, Point, SpaceSpec,
};

/// Depth of the exhaustiveness scan run by [`parse_map`].
pub const DEFAULT_VALIDATION_DEPTH: u64 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unbound variable `{name}` at {line}:{col}")]
    UnboundVariable {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("map is not total: no clause matches {point}")]
    Totality { point: Point },
    #[error("clause {clause} sends {point} outside the space: {reason}")]
    BadOutput {
        clause: usize,
        point: Point,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("no clause matches {0}")]
    NoClause(Point),
    #[error("point {point} is outside [0, {top}]")]
    OutsideSpace { point: Point, top: Point },
    #[error("arithmetic error: {0}")]
    Arithmetic(String),
    #[error("coefficient `{expr}` evaluates to {value}")]
    NegativeCoefficient { expr: String, value: i64 },
}

/// A continuous self-map of a [`SpaceSpec`], evaluated pointwise.
pub trait DynamicalMap: Sync {
    fn space(&self) -> &SpaceSpec;

    fn apply(&self, x: &Point) -> Result<Point, MapError>;

    /// `f^n(x)` by literal iteration.
    fn iterate(&self, x: &Point, n: u64) -> Result<Point, MapError> {
        let mut y = x.clone();
        for _ in 0..n {
            y = self.apply(&y)?;
        }
        Ok(y)
    }
}

impl<M: DynamicalMap + ?Sized> DynamicalMap for &M {
    fn space(&self) -> &SpaceSpec {
        (**self).space()
    }

    fn apply(&self, x: &Point) -> Result<Point, MapError> {
        (**self).apply(x)
    }
}

/// A parsed, validated piecewise map.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    space: SpaceSpec,
    clauses: Vec<Clause>,
}

impl MapSpec {
    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Index of the first clause matching `x`, with its bindings.
    pub fn matching_clause(&self, x: &Point) -> Result<Option<(usize, Vec<i64>)>, MapError> {
        for (i, clause) in self.clauses.iter().enumerate() {
            let mut env = vec![i64::MIN; clause.slots];
            if !clause.pattern.matches(x, &mut env) {
                continue;
            }
            let admitted = match &clause.guard {
                Some(g) => g.holds(&env)?,
                None => true,
            };
            if admitted {
                return Ok(Some((i, env)));
            }
        }
        Ok(None)
    }

    /// Scans the truncation at `depth`: every point must match a clause and
    /// be sent inside the space.
    pub fn validate_total(&self, depth: u64) -> Result<(), DslError> {
        for x in self.space.truncation(depth) {
            let Some((i, env)) = self.matching_clause(&x).map_err(|e| DslError::BadOutput {
                clause: 0,
                point: x.clone(),
                reason: e.to_string(),
            })?
            else {
                return Err(DslError::Totality { point: x });
            };
            let bad = |reason: String| DslError::BadOutput {
                clause: i + 1,
                point: x.clone(),
                reason,
            };
            let y = self.clauses[i]
                .output
                .eval(&x, &env)
                .map_err(|e| bad(e.to_string()))?;
            if !self.space.contains(&y) {
                return Err(bad(format!("{y} exceeds top {}", self.space.top)));
            }
        }
        Ok(())
    }
}

impl DynamicalMap for MapSpec {
    fn space(&self) -> &SpaceSpec {
        &self.space
    }

    fn apply(&self, x: &Point) -> Result<Point, MapError> {
        if !self.space.contains(x) {
            return Err(MapError::OutsideSpace {
                point: x.clone(),
                top: self.space.top.clone(),
            });
        }
        let (i, env) = self
            .matching_clause(x)?
            .ok_or_else(|| MapError::NoClause(x.clone()))?;
        let y = self.clauses[i].output.eval(x, &env)?;
        if !self.space.contains(&y) {
            return Err(MapError::OutsideSpace {
                point: y,
                top: self.space.top.clone(),
            });
        }
        Ok(y)
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(";\n")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Parses `source` as a map on `space` and runs the exhaustiveness scan at
/// [`DEFAULT_VALIDATION_DEPTH`].
pub fn parse_map(source: &str, space: &SpaceSpec) -> Result<MapSpec, DslError> {
    let map = parse_unvalidated(source, space)?;
    map.validate_total(DEFAULT_VALIDATION_DEPTH)?;
    Ok(map)
}

/// Parses without the totality scan.
pub fn parse_unvalidated(source: &str, space: &SpaceSpec) -> Result<MapSpec, DslError> {
    Ok(MapSpec {
        space: space.clone(),
        clauses: parser::parse_clauses(source)?,
    })
}

/// Parses an integer expression such as `(n+1)/2` over `vars`.
pub fn parse_expression(source: &str, vars: &[&str]) -> Result<Expr, DslError> {
    parser::parse_expression(source, vars)
}

/// `f^n` as a map in its own right.
#[derive(Debug, Clone, Copy)]
pub struct PowerMap<M> {
    inner: M,
    power: u64,
}

impl<M: DynamicalMap> PowerMap<M> {
    pub fn new(inner: M, power: u64) -> Self {
        PowerMap { inner, power }
    }

    pub fn power(&self) -> u64 {
        self.power
    }
}

impl<M: DynamicalMap> DynamicalMap for PowerMap<M> {
    fn space(&self) -> &SpaceSpec {
        self.inner.space()
    }

    fn apply(&self, x: &Point) -> Result<Point, MapError> {
        self.inner.iterate(x, self.power)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ContinuityCheck {
    OkAtDepth {
        depth: u64,
    },
    Violation {
        point: Point,
        image: Point,
        tail: u64,
        /// `(k, f(x_k))` for the violating indices of the canonical family.
        witness: Vec<(u64, Point)>,
    },
}

/// Depth-bounded continuity check of `f` itself: at every limit point `x`
/// of the truncation, `f(x_k) → f(x)` along the canonical sequence.
pub fn validate_continuous<M: DynamicalMap + ?Sized>(
    f: &M,
    depth: u64,
) -> Result<ContinuityCheck, MapError> {
    let h = horizon(depth);
    for x in f.space().limit_points(depth) {
        let seq = fundamental_sequence(&x).expect("limit point");
        let image = f.apply(&x)?;
        let window = (h / 2..=h)
            .map(|k| Ok((k, f.apply(&seq.term(k))?)))
            .collect::<Result<Vec<_>, MapError>>()?;
        if let Convergence::No { tail, violations } = converges_window(&window, &image, depth) {
            let witness = window
                .into_iter()
                .filter(|(k, _)| violations.contains(k))
                .collect();
            return Ok(ContinuityCheck::Violation {
                point: x,
                image,
                tail,
                witness,
            });
        }
    }
    Ok(ContinuityCheck::OkAtDepth { depth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordinal::omega2::{d, d_, dmn};

    fn omega2() -> SpaceSpec {
        SpaceSpec::new("omega2", "w^2".parse().unwrap())
    }

    fn omega1() -> SpaceSpec {
        SpaceSpec::new("omega1", "w".parse().unwrap())
    }

    const EXAMPLE: &str = "
        d -> d;
        d_1 -> d;
        d_m -> d_(m-1) if m > 1;
        d^1_n -> d^n_n if prime(n);
        d^1_n -> d if not prime(n);
        d^m_n -> d^(m-1)_n if m > 1 and not prime(n);
        d^m_n -> d^(m-1)_n if 1 < m <= n and prime(n);
        d^m_n -> d^(m-1)_(n-1) if m > n and prime(n)
    ";

    #[test]
    fn parses_piecewise_example() {
        let f = parse_map(EXAMPLE, &omega2()).unwrap();
        assert_eq!(f.clauses().len(), 8);
        assert_eq!(f.apply(&dmn(1, 5)).unwrap(), dmn(5, 5));
        assert_eq!(f.apply(&dmn(4, 3)).unwrap(), dmn(3, 2));
        assert_eq!(f.apply(&d()).unwrap(), d());
        assert_eq!(f.apply(&d_(4)).unwrap(), d_(3));
    }

    #[test]
    fn identity_clause() {
        let f = parse_map("x -> x", &omega2()).unwrap();
        assert_eq!(f.clauses().len(), 1);
        assert_eq!(f.apply(&dmn(3, 7)).unwrap(), dmn(3, 7));
        assert_eq!(
            validate_continuous(&f, 10).unwrap(),
            ContinuityCheck::OkAtDepth { depth: 10 }
        );
    }

    #[test]
    fn missing_base_clause_is_not_total() {
        let src = "d -> d; d_m -> d_m; d^m_n -> d^m_n if m > n+1";
        match parse_map(src, &omega2()) {
            Err(DslError::Totality { point }) => {
                // Oracle: first truncation point (in order) not covered.
                let first = omega2()
                    .truncation(DEFAULT_VALIDATION_DEPTH)
                    .into_iter()
                    .find(|p| {
                        !matches!(
                            crate::ordinal::Omega2Coord::from_point(p),
                            Some(crate::ordinal::Omega2Coord::Top)
                                | Some(crate::ordinal::Omega2Coord::Limit { .. })
                        ) && !matches!(
                            crate::ordinal::Omega2Coord::from_point(p),
                            Some(crate::ordinal::Omega2Coord::Isolated { m, n }) if m > n + 1
                        )
                    })
                    .unwrap();
                assert_eq!(point, first);
            }
            other => panic!("expected totality error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_and_scope_errors() {
        assert!(matches!(
            parse_map("d_m -> d_(k-1)", &omega2()),
            Err(DslError::UnboundVariable { ref name, line: 1, col: 11 }) if name == "k"
        ));
        assert!(matches!(
            parse_map("x -> \n x x", &omega2()),
            Err(DslError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_map("x -> w^3", &omega2()),
            Err(DslError::BadOutput { .. })
        ));
        assert!(matches!(
            parse_map("n -> n + 1; w -> w", &omega2()),
            Err(DslError::Syntax { .. })
        ));
    }

    #[test]
    fn discontinuous_map_is_caught() {
        // Finite points collapse to 0 and w+k -> k, so images of the
        // canonical sequence of w stay at 0, outside every tail of f(w) = w.
        let src = "w^2 -> w^2; w*m -> w*m if m >= 1; w*m + k -> k if m >= 1; k -> 0";
        let f = parse_map(src, &omega2()).unwrap();
        match validate_continuous(&f, 10).unwrap() {
            ContinuityCheck::Violation { point, witness, .. } => {
                assert_eq!(point, "w".parse().unwrap());
                assert!(witness.iter().all(|(_, y)| y.is_zero()));
            }
            other => panic!("expected a violation, got {other:?}"),
        }
    }

    #[test]
    fn ordinal_templates() {
        let sp = SpaceSpec::new("s", "w^2*3".parse().unwrap());
        let src = "
            0 -> 0;
            w^2*a -> w^2*a;
            w^2*a + w*b -> w^2*a + w*(b+1) if b mod 2 = 1;
            w^2*a + w*b -> w^2*a + w*(b-1) if b >= 1;
            w^2*a + w*b + c -> w^2*a + w*b + (c+1)
        ";
        let f = parse_map(src, &sp).unwrap();
        assert_eq!(
            f.apply(&"w^2*2+w*3".parse().unwrap()).unwrap(),
            "w^2*2+w*4".parse().unwrap()
        );
        assert_eq!(
            f.apply(&"w^2+w*4".parse().unwrap()).unwrap(),
            "w^2+w*3".parse().unwrap()
        );
        assert_eq!(
            f.apply(&"w*4+7".parse().unwrap()).unwrap(),
            "w*4+8".parse().unwrap()
        );
        assert_eq!(
            f.apply(&"w^2*3".parse().unwrap()).unwrap(),
            "w^2*3".parse().unwrap()
        );
    }

    #[test]
    fn shift_on_omega() {
        let f = parse_map("w -> w; 0 -> 0; n -> n - 1", &omega1());
        // `n - 1` in term position needs parentheses.
        assert!(f.is_err());
        let f = parse_map("w -> w; 0 -> 0; n -> (n - 1)", &omega1()).unwrap();
        assert_eq!(f.apply(&Point::finite(4)).unwrap(), Point::finite(3));
        assert_eq!(f.apply(&Point::zero()).unwrap(), Point::zero());
    }

    #[test]
    fn permuting_disjoint_clauses_keeps_the_function() {
        let a =
            "d -> d; d_m -> d_m; d^m_n -> d^m_(n+1) if n mod 2 = 0; d^m_n -> d^m_n if n mod 2 = 1";
        let b =
            "d^m_n -> d^m_n if n mod 2 = 1; d_m -> d_m; d^m_n -> d^m_(n+1) if n mod 2 = 0; d -> d";
        let (fa, fb) = (
            parse_map(a, &omega2()).unwrap(),
            parse_map(b, &omega2()).unwrap(),
        );
        for p in omega2().truncation(12) {
            assert_eq!(fa.apply(&p).unwrap(), fb.apply(&p).unwrap());
        }
    }

    #[test]
    fn power_map_iterates() {
        let f = parse_map(EXAMPLE, &omega2()).unwrap();
        let g = PowerMap::new(&f, 3);
        assert_eq!(g.apply(&d_(5)).unwrap(), d_(2));
        assert_eq!(g.apply(&dmn(5, 5)).unwrap(), dmn(2, 5));
    }

    mod round_trip {
        use super::*;
        use proptest::prelude::*;

        fn arb_expr() -> impl Strategy<Value = String> {
            let leaf = prop_oneof![
                (0i64..20).prop_map(|v| v.to_string()),
                Just("m".to_string()),
                Just("n".to_string()),
            ];
            leaf.prop_recursive(3, 16, 2, |inner| {
                (
                    inner.clone(),
                    prop_oneof![Just("+"), Just("-"), Just("*"), Just(" mod ")],
                    inner,
                )
                    .prop_map(|(a, op, b)| format!("({a}{op}{b})"))
            })
        }

        proptest! {
            #[test]
            fn print_then_parse_is_identity(m in arb_expr(), n in arb_expr(), g in arb_expr()) {
                let src = format!("d^m_n -> d^({m})_({n}) if {g} >= 0 and not prime(m); x -> x");
                let sp = omega2();
                let a = parse_unvalidated(&src, &sp).unwrap();
                let printed = a.to_string();
                let b = parse_unvalidated(&printed, &sp).unwrap();
                prop_assert_eq!(&a, &b);
                prop_assert_eq!(b.to_string(), printed);
            }
        }
    }
}
