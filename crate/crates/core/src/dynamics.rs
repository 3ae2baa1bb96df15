//! Orbits: eventual periodicity, convergence to cycles, ω-limit sets.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::dsl::{DynamicalMap, MapError};
use crate::ordinal::{converges_to, horizon, Neighborhood, Point, SpaceError};

pub const DEFAULT_BUDGET: u64 = 100_000;

/// Smallest evidence depth accepted for a cycle-convergence record.
const MIN_EVIDENCE_DEPTH: u64 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("orbit of {point} unresolved within {budget} steps")]
    Unresolved { point: Point, budget: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrbitRecord {
    /// `listing = [x, f(x), …, f^(m+n−1)(x)]`, all distinct, and
    /// `f^(m+n)(x) = f^m(x)`.
    EventuallyPeriodic {
        transient: u64,
        period: u64,
        listing: Vec<Point>,
    },
    /// `f^(l·k)(x) → f^i(y)` with `y` the least point of its cycle, which
    /// has period `l`; `cycle = [y, f(y), …, f^(l−1)(y)]`.
    ConvergesToCycle {
        y: Point,
        period: u64,
        phase: u64,
        evidence_depth: u64,
        cycle: Vec<Point>,
    },
    Unresolved {
        budget: u64,
    },
}

impl OrbitRecord {
    /// `f^j(x)` read off an eventually periodic record.
    pub fn iterate(&self, j: u64) -> Option<&Point> {
        match self {
            OrbitRecord::EventuallyPeriodic {
                transient,
                period,
                listing,
            } => {
                let idx = if j < transient + period {
                    j
                } else {
                    transient + (j - transient) % period
                };
                listing.get(idx as usize)
            }
            _ => None,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, OrbitRecord::EventuallyPeriodic { transient: 0, .. })
    }

    pub fn is_resolved(&self) -> bool {
        !matches!(self, OrbitRecord::Unresolved { .. })
    }

    /// The periods whose residues determine `f^p(x)`.
    pub fn period(&self) -> Option<u64> {
        match self {
            OrbitRecord::EventuallyPeriodic { period, .. }
            | OrbitRecord::ConvergesToCycle { period, .. } => Some(*period),
            OrbitRecord::Unresolved { .. } => None,
        }
    }
}

/// Cycle detection by hashing, with cycle-convergence detection attempted
/// at geometric checkpoints when no point repeats.
pub fn orbit_analyze<M: DynamicalMap + ?Sized>(
    f: &M,
    x: &Point,
    budget: u64,
) -> Result<OrbitRecord, DynamicsError> {
    f.space().check(x)?;
    let mut seen: HashMap<Point, u64> = HashMap::new();
    let mut listing = Vec::new();
    let mut cur = x.clone();
    let mut checkpoint = 64u64;
    for step in 0..budget.max(1) {
        if let Some(&first) = seen.get(&cur) {
            return Ok(OrbitRecord::EventuallyPeriodic {
                transient: first,
                period: step - first,
                listing,
            });
        }
        seen.insert(cur.clone(), step);
        let next = f.apply(&cur)?;
        listing.push(cur);
        cur = next;
        if step + 1 == checkpoint || step + 1 == budget {
            if let Some(rec) = detect_cycle_convergence(f, &listing)? {
                return Ok(rec);
            }
            checkpoint = checkpoint.saturating_mul(4);
        }
    }
    Ok(OrbitRecord::Unresolved { budget })
}

/// Looks for a periodic `y` of period `l` with `f^(l·k + c)(x) → y` along
/// the residue class `c` of the last computed index.
fn detect_cycle_convergence<M: DynamicalMap + ?Sized>(
    f: &M,
    orbit: &[Point],
) -> Result<Option<OrbitRecord>, DynamicsError> {
    let n = orbit.len() as u64;
    let last = &orbit[orbit.len() - 1];
    let max_exp = f.space().top.leading_exp().unwrap_or(0);
    let max_l = (n / (4 * (MIN_EVIDENCE_DEPTH + 1))).max(1);
    for l in 1..=max_l {
        let c = (n - 1) % l;
        // Deepest d with l·horizon(d) + c < n.
        let depth = ((n - 1 - c) / l / 4).saturating_sub(1);
        if depth < MIN_EVIDENCE_DEPTH {
            break;
        }
        for e in 1..=max_exp {
            let y = last.add_monomial(e, 1);
            if !f.space().contains(&y) {
                continue;
            }
            let Some(cycle) = exact_cycle(f, &y, l)? else {
                continue;
            };
            let family = |k: u64| orbit[(l * k + c) as usize].clone();
            if !converges_to(family, &y, depth).is_yes() {
                continue;
            }
            // The window test alone cannot tell an orbit drifting away from
            // `y` inside a deep tail from one approaching it.
            let levels: Vec<u64> = (0..=(n - 1 - c) / l)
                .map(|k| closeness(&family(k), &y))
                .collect();
            // Require the second half to approach monotonically and to end
            // closer than anything in the first quarter.
            let q = (levels.len() / 4).max(1);
            let early = levels[..q].iter().max().copied().unwrap_or(0);
            let late = &levels[levels.len() / 2..];
            let monotone = late.windows(2).all(|w| w[0] <= w[1]);
            if !monotone || late.first() >= late.last() || late[0] <= early {
                continue;
            }
            // f^(lk)(x) → f^(−c)(y); rotate so the cycle starts at its least point.
            let t = cycle
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.cmp(b.1))
                .map(|(i, _)| i as u64)
                .expect("non-empty cycle");
            let phase = ((l - c % l) % l + l - t) % l;
            let mut rotated = cycle[t as usize..].to_vec();
            rotated.extend_from_slice(&cycle[..t as usize]);
            return Ok(Some(OrbitRecord::ConvergesToCycle {
                y: rotated[0].clone(),
                period: l,
                phase,
                evidence_depth: depth,
                cycle: rotated,
            }));
        }
    }
    Ok(None)
}

/// Largest `j` with `z ∈ T_j(y)`, or 0 when `z ∉ T_0(y)`.
fn closeness(z: &Point, y: &Point) -> u64 {
    let inside = |j: u64| Neighborhood::basic(y, j).contains(z);
    if !inside(0) {
        return 0;
    }
    let mut hi = 1u64;
    while inside(hi) {
        if hi >= 1 << 62 {
            return hi;
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    // inside(lo), !inside(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// The orbit of `y` if `y` is periodic with least period exactly `l`.
fn exact_cycle<M: DynamicalMap + ?Sized>(
    f: &M,
    y: &Point,
    l: u64,
) -> Result<Option<Vec<Point>>, DynamicsError> {
    let mut cycle = vec![y.clone()];
    let mut cur = f.apply(y)?;
    while &cur != y {
        if cycle.len() as u64 >= l {
            return Ok(None);
        }
        cycle.push(cur.clone());
        cur = f.apply(&cur)?;
    }
    Ok((cycle.len() as u64 == l).then_some(cycle))
}

/// `ω_f(x)`: the terminal cycle, or the orbit of the limit cycle.
pub fn omega_limit<M: DynamicalMap + ?Sized>(
    f: &M,
    x: &Point,
    budget: u64,
) -> Result<BTreeSet<Point>, DynamicsError> {
    match orbit_analyze(f, x, budget)? {
        OrbitRecord::EventuallyPeriodic {
            transient, listing, ..
        } => Ok(listing[transient as usize..].iter().cloned().collect()),
        OrbitRecord::ConvergesToCycle { cycle, .. } => Ok(cycle.into_iter().collect()),
        OrbitRecord::Unresolved { budget } => Err(DynamicsError::Unresolved {
            point: x.clone(),
            budget,
        }),
    }
}

/// The full (finite) orbit of an eventually periodic point.
pub fn orbit_points<M: DynamicalMap + ?Sized>(
    f: &M,
    x: &Point,
    budget: u64,
) -> Result<Vec<Point>, DynamicsError> {
    match orbit_analyze(f, x, budget)? {
        OrbitRecord::EventuallyPeriodic { listing, .. } => Ok(listing),
        _ => Err(DynamicsError::Unresolved {
            point: x.clone(),
            budget,
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SetConvergence {
    YesAtDepth {
        depth: u64,
    },
    /// Orbit point `point` of `x_k` lies outside the `tail`-th basic
    /// neighborhood of the target set.
    No {
        k: u64,
        point: Point,
        tail: u64,
    },
}

impl SetConvergence {
    pub fn is_yes(&self) -> bool {
        matches!(self, SetConvergence::YesAtDepth { .. })
    }
}

/// Semi-decides `O_f(x_k) → A`: for each `j ≤ depth`, every orbit point of
/// every `x_k` in the index window `[H/2, H]` must lie in
/// `V_j = ⋃_{a ∈ A} T_j(a)`.
pub fn orbit_set_converges<M: DynamicalMap + ?Sized>(
    f: &M,
    family: impl Fn(u64) -> Point,
    target: &[Point],
    depth: u64,
    budget: u64,
) -> Result<SetConvergence, DynamicsError> {
    let h = horizon(depth);
    let orbits = (h / 2..=h)
        .map(|k| Ok((k, orbit_points(f, &family(k), budget)?)))
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    for j in 0..=depth {
        let nbhds: Vec<Neighborhood> = target.iter().map(|a| Neighborhood::basic(a, j)).collect();
        for (k, orbit) in &orbits {
            if let Some(y) = orbit.iter().find(|y| !nbhds.iter().any(|v| v.contains(y))) {
                return Ok(SetConvergence::No {
                    k: *k,
                    point: y.clone(),
                    tail: j,
                });
            }
        }
    }
    Ok(SetConvergence::YesAtDepth { depth })
}
