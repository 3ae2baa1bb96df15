//! Built-in dynamical systems with known behavior.
//!
//! * `example-omega2`: a map on `ω²+1` whose accumulation points are all
//!   eventually periodic but not periodic, so that continuity of `f^p` at a
//!   point can depend on `p`.
//! * `shift-down`: `[0, ω]` with `f(0) = 0`, `f(k) = k − 1`, `f(ω) = ω`.
//! * `shift-up`: `[0, ω]` with `f(k) = k + 1`, `f(ω) = ω`.
//! * `identity`: the identity on `ω²+1`.
//! * `random-<seed>`: generated maps on `[0, ω·C]` or `[0, ω²·C]` (`C ≤ 3`)
//!   whose accumulation points are all periodic.

use std::fmt::Write as _;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use thiserror::Error;

use crate::arith::is_prime;
use crate::dsl::{parse_map, DslError, MapSpec};
use crate::dynamics::{orbit_analyze, DynamicsError, OrbitRecord};
use crate::ordinal::{omega2, Omega2Coord, Point, SpaceSpec};
use crate::ultrafilter::{ResidueSystem, UltrafilterError};

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("unknown fixture `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Ultrafilter(#[from] UltrafilterError),
    #[error("{point} is not a point of the fixture")]
    NotInFixture { point: Point },
    #[error("metadata claim `{claim}` fails at {point}")]
    Metadata { claim: &'static str, point: Point },
    #[error("bad .dynmap file: {0}")]
    Format(String),
}

/// Which closed forms are available for a fixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    ExampleOmega2,
    ShiftDown,
    ShiftUp,
    Identity,
    Generated,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixtureMeta {
    pub accumulation_points_periodic: bool,
    pub all_points_eventually_periodic: bool,
    /// `X′` is finite (rank-1 spaces `[0, ω·C]`).
    pub finite_derived_set: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub kind: FixtureKind,
    pub map: MapSpec,
    pub source: String,
    pub meta: FixtureMeta,
}

impl Fixture {
    fn build(
        name: &str,
        kind: FixtureKind,
        top: &str,
        source: String,
        meta: FixtureMeta,
    ) -> Result<Fixture, FixtureError> {
        let space = SpaceSpec::new(name, top.parse().expect("valid top"));
        let map = parse_map(&source, &space)?;
        Ok(Fixture {
            name: name.to_string(),
            kind,
            map,
            source,
            meta,
        })
    }

    pub fn space(&self) -> &SpaceSpec {
        self.map.space()
    }

    /// The `.dynmap` text: a `space <top>` header followed by the clauses.
    pub fn to_dynmap(&self) -> String {
        let mut out = format!("# {}\nspace {}\n", self.name, self.space().top);
        for line in self.source.lines().map(str::trim).filter(|l| !l.is_empty()) {
            out.push_str(line);
            out.push('\n');
        }
        out
    }

    /// A finite window of the space; for the example map the invariant
    /// [`omega2_truncation`] rather than the coefficient box.
    pub fn truncation(&self, n: u64) -> Vec<Point> {
        match self.kind {
            FixtureKind::ExampleOmega2 => omega2_truncation(n),
            _ => self.space().truncation(n),
        }
    }

    /// Checks the metadata claims on the truncation at `depth`.
    pub fn validate_metadata(&self, depth: u64, budget: u64) -> Result<(), FixtureError> {
        for x in self.space().truncation(depth) {
            let rec = orbit_analyze(&self.map, &x, budget)?;
            if self.meta.accumulation_points_periodic && !x.is_isolated() && !rec.is_periodic() {
                return Err(FixtureError::Metadata {
                    claim: "accumulation points periodic",
                    point: x,
                });
            }
            if self.meta.all_points_eventually_periodic
                && !matches!(rec, OrbitRecord::EventuallyPeriodic { .. })
            {
                return Err(FixtureError::Metadata {
                    claim: "all points eventually periodic",
                    point: x,
                });
            }
        }
        Ok(())
    }

    /// `f^p(x)` from the fixture's closed form, when it has one.
    pub fn closed_form_p_iterate(
        &self,
        p: &ResidueSystem,
        x: &Point,
    ) -> Option<Result<Point, FixtureError>> {
        match self.kind {
            FixtureKind::ExampleOmega2 => Some(closed_form_p_iterate(p, x)),
            FixtureKind::Identity => Some(Ok(x.clone())),
            FixtureKind::ShiftUp => Some(Ok(Point::monomial(1, 1))),
            FixtureKind::ShiftDown => Some(Ok(if x.is_isolated() {
                Point::zero()
            } else {
                x.clone()
            })),
            FixtureKind::Generated | FixtureKind::Custom => None,
        }
    }
}

/// Parses a `.dynmap` file.
pub fn load_dynmap(text: &str, name: &str) -> Result<Fixture, FixtureError> {
    let mut top = None;
    let mut body = String::new();
    for line in text.lines() {
        let t = line.trim();
        if top.is_none() && !t.is_empty() && !t.starts_with('#') {
            let rest = t
                .strip_prefix("space")
                .ok_or_else(|| FixtureError::Format("expected a `space <top>` header".into()))?;
            let p: Point = rest
                .trim()
                .trim_end_matches(';')
                .parse()
                .map_err(|e| FixtureError::Format(format!("{e}")))?;
            top = Some(p);
            // Keep line numbers aligned for DSL errors.
            body.push('\n');
            continue;
        }
        body.push_str(line);
        body.push('\n');
    }
    let top = top.ok_or_else(|| FixtureError::Format("missing `space` header".into()))?;
    let space = SpaceSpec::new(name, top);
    let map = parse_map(&body, &space)?;
    Ok(Fixture {
        name: name.to_string(),
        kind: FixtureKind::Custom,
        map,
        source: body.trim().to_string(),
        meta: FixtureMeta {
            accumulation_points_periodic: false,
            all_points_eventually_periodic: false,
            finite_derived_set: false,
            notes: vec!["loaded from a .dynmap file; no metadata claims".into()],
        },
    })
}

pub const EXAMPLE_SOURCE: &str = "\
d -> d;                                              # (i)
d_1 -> d;                                            # (i)
d_m -> d_(m-1) if m > 1;                             # (i)
d^1_n -> d^n_n if prime(n);                          # (ii)
d^1_n -> d if not prime(n);                          # (iii)
d^m_n -> d^(m-1)_n if m > 1 and not prime(n);        # (iv)
d^m_n -> d^(m-1)_n if 1 < m <= n and prime(n);       # (vi)
d^m_n -> d^(m-1)_(n-1) if m > n and prime(n);        # (vii)
";

/// Labels of the clauses of [`EXAMPLE_SOURCE`], in order.
pub const EXAMPLE_CLAUSE_LABELS: [&str; 8] = [
    "(i)", "(i)", "(i)", "(ii)", "(iii)", "(iv)", "(vi)", "(vii)",
];

pub fn example_omega2() -> Fixture {
    Fixture::build(
        "example-omega2",
        FixtureKind::ExampleOmega2,
        "w^2",
        EXAMPLE_SOURCE.to_string(),
        FixtureMeta {
            accumulation_points_periodic: false,
            all_points_eventually_periodic: true,
            finite_derived_set: false,
            notes: vec![
                "clause labels run (i)-(iv), (vi), (vii): there is no clause (v)".into(),
                "each d_m is strictly pre-periodic, absorbed by the fixed point d".into(),
                "encoding: d = w^2, d_m = w*m, d^1_n = n-1, d^m_n = w*(m-1)+n for m >= 2".into(),
            ],
        },
    )
    .expect("built-in fixture parses")
}

pub fn shift_down() -> Fixture {
    Fixture::build(
        "shift-down",
        FixtureKind::ShiftDown,
        "w",
        "w -> w;\n0 -> 0;\nk -> (k - 1);\n".into(),
        FixtureMeta {
            accumulation_points_periodic: true,
            all_points_eventually_periodic: true,
            finite_derived_set: true,
            notes: vec!["two fixed endpoints: w and 0; every k drifts down to 0".into()],
        },
    )
    .expect("built-in fixture parses")
}

pub fn shift_up() -> Fixture {
    Fixture::build(
        "shift-up",
        FixtureKind::ShiftUp,
        "w",
        "w -> w;\nk -> (k + 1);\n".into(),
        FixtureMeta {
            accumulation_points_periodic: true,
            all_points_eventually_periodic: false,
            finite_derived_set: true,
            notes: vec!["every finite point climbs to the fixed point w".into()],
        },
    )
    .expect("built-in fixture parses")
}

pub fn identity() -> Fixture {
    Fixture::build(
        "identity",
        FixtureKind::Identity,
        "w^2",
        "x -> x;\n".into(),
        FixtureMeta {
            accumulation_points_periodic: true,
            all_points_eventually_periodic: true,
            finite_derived_set: false,
            notes: vec![],
        },
    )
    .expect("built-in fixture parses")
}

/// The three hand-written counterexample systems plus one generated one.
pub fn build_counterexamples(seed: u64) -> Vec<Fixture> {
    vec![shift_down(), shift_up(), identity(), random_periodic(seed)]
}

pub const FIXTURE_NAMES: [&str; 5] = [
    "example-omega2",
    "shift-down",
    "shift-up",
    "identity",
    "random-<seed>",
];

pub fn fixture_by_name(name: &str) -> Result<Fixture, FixtureError> {
    match name {
        "example-omega2" => Ok(example_omega2()),
        "shift-down" => Ok(shift_down()),
        "shift-up" => Ok(shift_up()),
        "identity" => Ok(identity()),
        other => other
            .strip_prefix("random-")
            .and_then(|s| s.parse().ok())
            .map(random_periodic)
            .ok_or_else(|| FixtureError::Unknown(other.to_string())),
    }
}

/// `{d} ∪ {d_m : m ≤ n} ∪ {d^a_b : a, b ≤ n}`, increasing; invariant
/// under the example map.
pub fn omega2_truncation(n: u64) -> Vec<Point> {
    let mut pts = vec![omega2::d()];
    for m in 1..=n {
        pts.push(omega2::d_(m));
        for k in 1..=n {
            pts.push(omega2::dmn(m, k));
        }
    }
    pts.sort();
    pts
}

/// `f^p` on the example, from the orbit structure:
/// prime columns are cycles `d^n_n → … → d^1_n → d^n_n`, so
/// `f^p(d^m_n) = d^((m−1−r_n) mod n + 1)_n` for `m ≤ n ∈ ℙ`; every other
/// point is eventually fixed at `d`.
pub fn closed_form_p_iterate(p: &ResidueSystem, x: &Point) -> Result<Point, FixtureError> {
    let coord = Omega2Coord::from_point(x)
        .ok_or_else(|| FixtureError::NotInFixture { point: x.clone() })?;
    Ok(match coord {
        Omega2Coord::Isolated { m, n } if is_prime(n) && m <= n => {
            let r = p.residue(n)?;
            omega2::dmn((m - 1 + n - r) % n + 1, n)
        }
        _ => omega2::d(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum ColumnPerm {
    Identity,
    PairSwap,
    /// A permutation of columns `1..=K`, identity beyond.
    Finite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum LevelMap {
    Identity,
    Up,
    Down,
    Collapse,
}

/// A random map whose accumulation points are all periodic.
///
/// Blocks `A < C` are permuted by `σ`; on rank-2 spaces each block also
/// permutes its columns (identity, adjacent swaps, or a finite
/// permutation), and isolated points move within their image column by a
/// level map (identity, up, down to level 1, or collapse onto the column's
/// limit). A few low isolated points are redirected arbitrarily.
pub fn random_periodic(seed: u64) -> Fixture {
    let mut rng = StdRng::seed_from_u64(seed);
    let rank2 = rng.gen_bool(0.5);
    let blocks: u64 = rng.gen_range(1..=3);
    let mut sigma: Vec<u64> = (0..blocks).collect();
    sigma.shuffle(&mut rng);
    let levels = [
        LevelMap::Identity,
        LevelMap::Up,
        LevelMap::Down,
        LevelMap::Collapse,
    ];
    let perms = [
        ColumnPerm::Identity,
        ColumnPerm::PairSwap,
        ColumnPerm::Finite,
    ];

    let mut src = String::from("0 -> 0;\n");
    let top = if rank2 {
        format!("w^2*{blocks}")
    } else {
        format!("w*{blocks}")
    };
    let mut notes = vec![format!("seed {seed}"), format!("sigma {sigma:?}")];
    let mut exceptions = Vec::new();
    let n_exc = rng.gen_range(0..=2);
    for _ in 0..n_exc {
        let from = random_low_point(&mut rng, rank2, blocks);
        let to = random_low_point(&mut rng, rank2, blocks);
        if from != to && !exceptions.iter().any(|(f, _): &(Point, Point)| f == &from) {
            exceptions.push((from, to));
        }
    }
    for (from, to) in &exceptions {
        let _ = writeln!(src, "{} -> {};", from, to);
    }
    let mut has_up = false;
    for a in 0..blocks {
        let b = sigma[a as usize];
        let level = *levels.choose(&mut rng).expect("non-empty");
        has_up |= level == LevelMap::Up;
        if rank2 {
            let perm = *perms.choose(&mut rng).expect("non-empty");
            let k = 2 * rng.gen_range(1..=2u64);
            let mut cols: Vec<u64> = (1..=k).collect();
            cols.shuffle(&mut rng);
            notes.push(format!(
                "block {a}: columns {perm:?} {cols:?}, levels {level:?}"
            ));
            rank2_block(&mut src, a, b, perm, &cols, level);
        } else {
            notes.push(format!("block {a}: levels {level:?}"));
            rank1_block(&mut src, a, b, level);
        }
    }
    let name = format!("random-{seed}");
    Fixture::build(
        &name,
        FixtureKind::Generated,
        &top,
        src,
        FixtureMeta {
            accumulation_points_periodic: true,
            all_points_eventually_periodic: !has_up,
            finite_derived_set: !rank2,
            notes,
        },
    )
    .expect("generated fixture parses")
}

fn random_low_point(rng: &mut StdRng, rank2: bool, blocks: u64) -> Point {
    let a = rng.gen_range(0..blocks);
    let b = rng.gen_range(1..=2);
    if rank2 {
        let c = rng.gen_range(0..=1);
        Point::from_coefficients([(2, a), (1, c), (0, b)]).expect("distinct exponents")
    } else {
        Point::from_coefficients([(1, a), (0, b)]).expect("distinct exponents")
    }
}

fn prefix(exp: u32, a: u64) -> String {
    match (exp, a) {
        (_, 0) => String::new(),
        (1, a) => format!("w*{a} + "),
        (e, a) => format!("w^{e}*{a} + "),
    }
}

fn rank1_block(src: &mut String, a: u64, b: u64, level: LevelMap) {
    let (pa, pb) = (prefix(1, a), prefix(1, b));
    let _ = writeln!(src, "w*{} -> w*{};", a + 1, b + 1);
    let out = match level {
        LevelMap::Identity => format!("{pb}n"),
        LevelMap::Up => format!("{pb}(n + 1)"),
        LevelMap::Collapse => format!("w*{}", b + 1),
        LevelMap::Down => {
            let _ = writeln!(src, "{pa}n -> {pb}(n - 1) if n >= 2;");
            format!("{pb}1")
        }
    };
    let _ = writeln!(src, "{pa}n -> {out} if n >= 1;");
}

fn rank2_block(src: &mut String, a: u64, b: u64, perm: ColumnPerm, cols: &[u64], level: LevelMap) {
    let (pa, pb) = (prefix(2, a), prefix(2, b));
    let _ = writeln!(src, "w^2*{} -> w^2*{};", a + 1, b + 1);
    // Column limits w^2*a + w*j, j ≥ 1.
    match perm {
        ColumnPerm::Identity => {}
        ColumnPerm::PairSwap => {
            let _ = writeln!(src, "{pa}w*j -> {pb}w*(j + 1) if j >= 1 and j mod 2 = 1;");
            let _ = writeln!(src, "{pa}w*j -> {pb}w*(j - 1) if j >= 2 and j mod 2 = 0;");
        }
        ColumnPerm::Finite => {
            for (i, &to) in cols.iter().enumerate() {
                let _ = writeln!(src, "{pa}w*{} -> {pb}w*{to};", i + 1);
            }
        }
    }
    let _ = writeln!(src, "{pa}w*j -> {pb}w*j if j >= 1;");
    // Isolated points w^2*a + w*c + n (n ≥ 1) lie in column j = c + 1.
    let mut column_cases: Vec<(String, String)> = Vec::new();
    match perm {
        ColumnPerm::Identity => {}
        ColumnPerm::PairSwap => {
            column_cases.push(("c mod 2 = 0".into(), "(c + 1)".into()));
            column_cases.push(("c mod 2 = 1".into(), "(c - 1)".into()));
        }
        ColumnPerm::Finite => {
            for (i, &to) in cols.iter().enumerate() {
                column_cases.push((format!("c = {i}"), format!("{}", to - 1)));
            }
        }
    }
    column_cases.push(("c >= 0".into(), "c".into()));
    for (guard, col) in column_cases {
        let with = |lvl: &str, extra: &str| {
            format!("{pa}w*c + n -> {pb}w*{col} + {lvl} if {guard} and n {extra};")
        };
        let lines = match level {
            LevelMap::Identity => vec![with("n", ">= 1")],
            LevelMap::Up => vec![with("(n + 1)", ">= 1")],
            LevelMap::Down => vec![with("(n - 1)", ">= 2"), with("1", "= 1")],
            LevelMap::Collapse => vec![format!(
                "{pa}w*c + n -> {pb}w*({col} + 1) if {guard} and n >= 1;"
            )],
        };
        for l in lines {
            src.push_str(&l);
            src.push('\n');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::DynamicalMap;
    use crate::ordinal::omega2::{d, d_, dmn};

    #[test]
    fn example_clauses() {
        let fx = example_omega2();
        let f = &fx.map;
        assert_eq!(f.clauses().len(), EXAMPLE_CLAUSE_LABELS.len());
        assert_eq!(f.apply(&dmn(1, 5)).unwrap(), dmn(5, 5));
        assert_eq!(f.apply(&d()).unwrap(), d());
        assert_eq!(f.apply(&dmn(4, 3)).unwrap(), dmn(3, 2));
        assert_eq!(f.apply(&d_(1)).unwrap(), d());
        assert_eq!(f.apply(&dmn(1, 4)).unwrap(), d());
        assert_eq!(f.apply(&dmn(3, 4)).unwrap(), dmn(2, 4));
        let (i, _) = f.matching_clause(&dmn(4, 3)).unwrap().unwrap();
        assert_eq!(EXAMPLE_CLAUSE_LABELS[i], "(vii)");
        assert!(fx.meta.notes.iter().any(|n| n.contains("no clause (v)")));
        fx.validate_metadata(10, 10_000).unwrap();
    }

    #[test]
    fn closed_form_examples() {
        let p = ResidueSystem::from_table(&[(11, 6)]).unwrap();
        assert_eq!(closed_form_p_iterate(&p, &dmn(9, 7)).unwrap(), d());
        assert_eq!(closed_form_p_iterate(&p, &dmn(3, 8)).unwrap(), d());
        assert_eq!(closed_form_p_iterate(&p, &dmn(2, 11)).unwrap(), dmn(7, 11));
        let q: ResidueSystem = "n-1 on primes".parse().unwrap();
        assert_eq!(closed_form_p_iterate(&q, &dmn(5, 5)).unwrap(), dmn(1, 5));
        let q: ResidueSystem = "table (7:4)".parse().unwrap();
        assert_eq!(closed_form_p_iterate(&q, &dmn(2, 7)).unwrap(), dmn(5, 7));
        assert!(closed_form_p_iterate(&q, &"w^2+1".parse().unwrap()).is_err());
    }

    #[test]
    fn truncation_is_invariant() {
        let fx = example_omega2();
        let t = omega2_truncation(9);
        assert_eq!(t.len(), 1 + 9 + 81);
        for x in &t {
            assert!(t.binary_search(&fx.map.apply(x).unwrap()).is_ok());
        }
    }

    #[test]
    fn dynmap_round_trip() {
        for fx in [
            example_omega2(),
            shift_down(),
            shift_up(),
            identity(),
            random_periodic(7),
        ] {
            let text = fx.to_dynmap();
            let back = load_dynmap(&text, &fx.name).unwrap();
            assert_eq!(back.space().top, fx.space().top);
            for x in fx.space().truncation(6) {
                assert_eq!(
                    back.map.apply(&x).unwrap(),
                    fx.map.apply(&x).unwrap(),
                    "{x}"
                );
            }
        }
        assert!(load_dynmap("d -> d;", "x").is_err());
    }

    #[test]
    fn generated_fixtures_satisfy_their_metadata() {
        for seed in 0..40 {
            let fx = random_periodic(seed);
            fx.validate_metadata(5, 20_000)
                .unwrap_or_else(|e| panic!("seed {seed}: {e}\n{}", fx.source));
            assert!(
                crate::dsl::validate_continuous(&fx.map, 6).unwrap()
                    == crate::dsl::ContinuityCheck::OkAtDepth { depth: 6 },
                "seed {seed} not continuous:\n{}",
                fx.source
            );
        }
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(
            fixture_by_name("shift-up").unwrap().kind,
            FixtureKind::ShiftUp
        );
        assert_eq!(fixture_by_name("random-3").unwrap().name, "random-3");
        assert!(fixture_by_name("nope").is_err());
    }
}
