//! `f^p` for free ultrafilters `p`, pointwise and as restricted tables, and
//! the Ellis semigroup on a finite truncation.
//!
//! On an eventually periodic point with transient `m` and period `n`,
//! `f^p(x) = f^(m + ((r_n − m) mod n))(x)`; on a point whose orbit converges
//! to the cycle of `y` (period `l`, phase `i`), `f^p(x) = f^((i + r_l) mod l)(y)`.

use std::collections::HashMap;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::dsl::DynamicalMap;
use crate::dynamics::{orbit_analyze, DynamicsError, OrbitRecord};
use crate::ordinal::Point;
use crate::ultrafilter::{lcm_all, ResidueSystem, UltrafilterError};

/// Largest modulus `semigroup_table` will enumerate.
pub const MAX_ENUMERATED_MODULUS: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum IterateError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Ultrafilter(#[from] UltrafilterError),
    #[error("orbit of {point} is unresolved")]
    Unresolved { point: Point },
    #[error("{point} is not eventually periodic; the literal-iteration oracle does not apply")]
    NotEventuallyPeriodic { point: Point },
    #[error("oracle mismatch at {point}: f^{k1} gives {v1}, f^{k2} gives {v2}")]
    OracleDisagreement {
        point: Point,
        k1: u64,
        v1: Point,
        k2: u64,
        v2: Point,
    },
    #[error("unresolved points: {}", list(.points))]
    Partial { points: Vec<Point> },
    #[error("{point} is a value of the inner table but not in the outer domain")]
    NotClosed { point: Point },
    #[error("tables have different domains")]
    DomainMismatch,
    #[error("period {period} at {point} exceeds the bound {bound}")]
    PeriodBound {
        point: Point,
        period: u64,
        bound: u64,
    },
    #[error("modulus {0} is too large to enumerate")]
    ModulusTooLarge(u128),
}

fn list(points: &[Point]) -> String {
    points
        .iter()
        .map(Point::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// `f^p(x)` read off an orbit record.
pub fn p_iterate_from_record(
    rec: &OrbitRecord,
    p: &ResidueSystem,
    x: &Point,
) -> Result<Point, IterateError> {
    match rec {
        OrbitRecord::EventuallyPeriodic {
            transient,
            period,
            listing,
        } => {
            let r = p.residue(*period)?;
            let j = transient + (r + period - transient % period) % period;
            Ok(listing[j as usize].clone())
        }
        OrbitRecord::ConvergesToCycle {
            period,
            phase,
            cycle,
            ..
        } => {
            let r = p.residue(*period)?;
            Ok(cycle[((phase + r) % period) as usize].clone())
        }
        OrbitRecord::Unresolved { .. } => Err(IterateError::Unresolved { point: x.clone() }),
    }
}

pub fn p_iterate_point<M: DynamicalMap + ?Sized>(
    f: &M,
    p: &ResidueSystem,
    x: &Point,
    budget: u64,
) -> Result<Point, IterateError> {
    let rec = orbit_analyze(f, x, budget)?;
    p_iterate_from_record(&rec, p, x)
}

/// Literal iteration: `f^k(x)` for some `k ≥ max(k_min, m)` with
/// `k ≡ r_n (mod n)`, cross-checked against a second such `k`.
pub fn brute_force_p_iterate<M: DynamicalMap + ?Sized>(
    f: &M,
    p: &ResidueSystem,
    x: &Point,
    k_min: u64,
    budget: u64,
) -> Result<Point, IterateError> {
    let OrbitRecord::EventuallyPeriodic {
        transient, period, ..
    } = orbit_analyze(f, x, budget)?
    else {
        return Err(IterateError::NotEventuallyPeriodic { point: x.clone() });
    };
    let r = p.residue(period)?;
    let start = k_min.max(transient);
    let k1 = start + (r + period - start % period) % period;
    let k2 = k1 + period * (1 + k1 % 5);
    let v1 = f.iterate(x, k1).map_err(DynamicsError::from)?;
    let v2 = f.iterate(x, k2).map_err(DynamicsError::from)?;
    if v1 != v2 {
        return Err(IterateError::OracleDisagreement {
            point: x.clone(),
            k1,
            v1,
            k2,
            v2,
        });
    }
    Ok(v1)
}

/// A restricted element of `E(X, f)`: `values[i] = g(domain[i])`, with
/// `domain` strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterateTable {
    pub provenance: String,
    domain: Vec<Point>,
    values: Vec<Point>,
}

impl IterateTable {
    pub fn new(provenance: impl Into<String>, mut pairs: Vec<(Point, Point)>) -> Self {
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        pairs.dedup_by(|a, b| a.0 == b.0);
        let (domain, values) = pairs.into_iter().unzip();
        IterateTable {
            provenance: provenance.into(),
            domain,
            values,
        }
    }

    pub fn domain(&self) -> &[Point] {
        &self.domain
    }

    pub fn values(&self) -> &[Point] {
        &self.values
    }

    pub fn get(&self, x: &Point) -> Option<&Point> {
        self.domain.binary_search(x).ok().map(|i| &self.values[i])
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Point, &Point)> {
        self.domain.iter().zip(&self.values)
    }

    /// Same function on the same domain (provenance ignored).
    pub fn same_function(&self, other: &IterateTable) -> bool {
        self.domain == other.domain && self.values == other.values
    }

    /// Points where the two tables differ.
    pub fn differences(&self, other: &IterateTable) -> Vec<(Point, Point, Point)> {
        self.entries()
            .filter_map(|(x, v)| {
                let w = other.get(x)?;
                (v != w).then(|| (x.clone(), v.clone(), w.clone()))
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("point,value\n");
        for (x, v) in self.entries() {
            out.push_str(&format!("{x},{v}\n"));
        }
        out
    }
}

#[derive(Serialize)]
struct Record<'a> {
    point: &'a Point,
    value: &'a Point,
}

impl Serialize for IterateTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<Record<'_>> = self
            .entries()
            .map(|(point, value)| Record { point, value })
            .collect();
        let mut s = serializer.serialize_struct("IterateTable", 2)?;
        s.serialize_field("provenance", &self.provenance)?;
        s.serialize_field("entries", &entries)?;
        s.end()
    }
}

/// `outer ∘ inner` on `inner`'s domain.
pub fn compose(outer: &IterateTable, inner: &IterateTable) -> Result<IterateTable, IterateError> {
    let pairs = inner
        .entries()
        .map(|(x, v)| {
            outer
                .get(v)
                .map(|w| (x.clone(), w.clone()))
                .ok_or_else(|| IterateError::NotClosed { point: v.clone() })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IterateTable::new(
        format!("({}) o ({})", outer.provenance, inner.provenance),
        pairs,
    ))
}

/// Orbit records for a fixed domain, so that many `f^p` can be tabulated
/// without re-running orbit analysis.
#[derive(Debug, Clone)]
pub struct OrbitAtlas {
    domain: Vec<Point>,
    records: Vec<OrbitRecord>,
}

impl OrbitAtlas {
    pub fn new<M: DynamicalMap + ?Sized>(
        f: &M,
        domain: &[Point],
        budget: u64,
    ) -> Result<Self, IterateError> {
        let mut domain = domain.to_vec();
        domain.sort();
        domain.dedup();
        let records = domain
            .iter()
            .map(|x| orbit_analyze(f, x, budget))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(OrbitAtlas { domain, records })
    }

    pub fn domain(&self) -> &[Point] {
        &self.domain
    }

    pub fn records(&self) -> &[OrbitRecord] {
        &self.records
    }

    pub fn unresolved(&self) -> Vec<Point> {
        self.domain
            .iter()
            .zip(&self.records)
            .filter(|(_, r)| !r.is_resolved())
            .map(|(x, _)| x.clone())
            .collect()
    }

    /// Distinct periods over the domain.
    pub fn periods(&self) -> Result<Vec<u64>, IterateError> {
        let unresolved = self.unresolved();
        if !unresolved.is_empty() {
            return Err(IterateError::Partial { points: unresolved });
        }
        let mut ps: Vec<u64> = self
            .records
            .iter()
            .filter_map(OrbitRecord::period)
            .collect();
        ps.sort_unstable();
        ps.dedup();
        Ok(ps)
    }

    pub fn table(&self, p: &ResidueSystem) -> Result<IterateTable, IterateError> {
        let unresolved = self.unresolved();
        if !unresolved.is_empty() {
            return Err(IterateError::Partial { points: unresolved });
        }
        let pairs = self
            .domain
            .iter()
            .zip(&self.records)
            .map(|(x, rec)| Ok((x.clone(), p_iterate_from_record(rec, p, x)?)))
            .collect::<Result<Vec<_>, IterateError>>()?;
        Ok(IterateTable::new(format!("p = {p}"), pairs))
    }

    /// `f^n` on the domain, read off the records where possible.
    pub fn natural_table<M: DynamicalMap + ?Sized>(
        &self,
        f: &M,
        n: u64,
    ) -> Result<IterateTable, IterateError> {
        let pairs = self
            .domain
            .iter()
            .zip(&self.records)
            .map(|(x, rec)| {
                let v = match rec.iterate(n) {
                    Some(v) => v.clone(),
                    None => f.iterate(x, n).map_err(DynamicsError::from)?,
                };
                Ok((x.clone(), v))
            })
            .collect::<Result<Vec<_>, IterateError>>()?;
        Ok(IterateTable::new(format!("f^{n}"), pairs))
    }

    /// For each `r < modulus`, the table of `f^p` for `p ∈ (modulus·N + r)*`
    /// as indices into the domain. Requires the domain to be closed under
    /// every such `f^p`.
    pub fn residue_index_tables(&self, modulus: u64) -> Result<Vec<Vec<u32>>, IterateError> {
        let unresolved = self.unresolved();
        if !unresolved.is_empty() {
            return Err(IterateError::Partial { points: unresolved });
        }
        let index: HashMap<&Point, u32> = self
            .domain
            .iter()
            .enumerate()
            .map(|(i, x)| (x, i as u32))
            .collect();
        (0..modulus)
            .map(|r| {
                let p = ResidueSystem::from_progression(modulus, r)?;
                self.domain
                    .iter()
                    .zip(&self.records)
                    .map(|(x, rec)| {
                        let v = p_iterate_from_record(rec, &p, x)?;
                        index
                            .get(&v)
                            .copied()
                            .ok_or(IterateError::NotClosed { point: v })
                    })
                    .collect()
            })
            .collect()
    }
}

pub fn p_iterate_table<M: DynamicalMap + ?Sized>(
    f: &M,
    p: &ResidueSystem,
    truncation: &[Point],
    budget: u64,
) -> Result<IterateTable, IterateError> {
    OrbitAtlas::new(f, truncation, budget)?.table(p)
}

pub fn natural_iterate_table<M: DynamicalMap + ?Sized>(
    f: &M,
    n: u64,
    truncation: &[Point],
) -> Result<IterateTable, IterateError> {
    let pairs = truncation
        .iter()
        .map(|x| Ok((x.clone(), f.iterate(x, n).map_err(DynamicsError::from)?)))
        .collect::<Result<Vec<_>, IterateError>>()?;
    Ok(IterateTable::new(format!("f^{n}"), pairs))
}

#[derive(Debug, Clone, Serialize)]
pub struct SemigroupElement {
    pub index: usize,
    /// Residues `r < modulus` whose progressions give this element.
    pub residues: Vec<u64>,
    pub table: IterateTable,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiniteIterate {
    pub n: u64,
    /// Index of the free element equal to `f^n` on the truncation, if any.
    pub equals_element: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SemigroupReport {
    pub modulus: u64,
    pub periods: Vec<u64>,
    pub elements: Vec<SemigroupElement>,
    pub finite_iterates: Vec<FiniteIterate>,
    /// `composition[i][j]` is the index of `E_i ∘ E_j`; emitted for small
    /// semigroups only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub composition: Option<Vec<Vec<usize>>>,
    pub closed: bool,
    /// `E_i ∘ E_j` is the element of residue `r_i + r_j` for all `i, j`.
    pub additive: bool,
}

/// Largest element count whose composition table is included in reports.
pub const REPORTED_COMPOSITION_LIMIT: usize = 64;

/// Enumerates the restrictions of `E(X, f)*` to `truncation`: every free
/// `p` acts through its residues modulo `L = lcm(periods)`, so the
/// progressions `L·N + r` (`r < L`) exhaust them.
pub fn semigroup_table<M: DynamicalMap + ?Sized>(
    f: &M,
    truncation: &[Point],
    moduli_bound: u64,
    budget: u64,
) -> Result<SemigroupReport, IterateError> {
    let atlas = OrbitAtlas::new(f, truncation, budget)?;
    let periods = atlas.periods()?;
    for (x, rec) in atlas.domain.iter().zip(&atlas.records) {
        if let Some(period) = rec.period().filter(|&l| l > moduli_bound) {
            return Err(IterateError::PeriodBound {
                point: x.clone(),
                period,
                bound: moduli_bound,
            });
        }
    }
    let modulus =
        lcm_all(periods.iter().copied()).ok_or(IterateError::ModulusTooLarge(u128::MAX))?;
    if modulus > MAX_ENUMERATED_MODULUS as u128 {
        return Err(IterateError::ModulusTooLarge(modulus));
    }
    let modulus = modulus as u64;
    let tables = atlas.residue_index_tables(modulus)?;

    let mut by_table: HashMap<&[u32], usize> = HashMap::new();
    let mut residue_to_element = Vec::with_capacity(tables.len());
    let mut reps: Vec<(u64, Vec<u64>)> = Vec::new();
    for (r, t) in tables.iter().enumerate() {
        let idx = *by_table.entry(t.as_slice()).or_insert_with(|| {
            reps.push((r as u64, Vec::new()));
            reps.len() - 1
        });
        reps[idx].1.push(r as u64);
        residue_to_element.push(idx);
    }

    let n_el = reps.len();
    let mut composition = vec![vec![0usize; n_el]; n_el];
    let mut closed = true;
    let mut additive = true;
    let mut scratch = vec![0u32; atlas.domain.len()];
    for (i, (ri, _)) in reps.iter().enumerate() {
        let outer = &tables[*ri as usize];
        for (j, (rj, _)) in reps.iter().enumerate() {
            let inner = &tables[*rj as usize];
            for (s, &v) in scratch.iter_mut().zip(inner) {
                *s = outer[v as usize];
            }
            match by_table.get(scratch.as_slice()) {
                Some(&k) => {
                    composition[i][j] = k;
                    additive &= k == residue_to_element[((ri + rj) % modulus) as usize];
                }
                None => {
                    closed = false;
                    additive = false;
                }
            }
        }
    }

    let elements = reps
        .iter()
        .enumerate()
        .map(|(index, (r, residues))| {
            let p = ResidueSystem::from_progression(modulus, *r)?;
            let mut table = atlas.table(&p)?;
            table.provenance = format!("p in ({modulus}N + {r})*");
            Ok(SemigroupElement {
                index,
                residues: residues.clone(),
                table,
            })
        })
        .collect::<Result<Vec<_>, IterateError>>()?;

    let horizon = atlas
        .records
        .iter()
        .filter_map(|r| match r {
            OrbitRecord::EventuallyPeriodic { transient, .. } => Some(*transient),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let finite_iterates = (0..=horizon)
        .map(|n| {
            let t = atlas.natural_table(f, n)?;
            Ok(FiniteIterate {
                n,
                equals_element: elements.iter().position(|e| e.table.same_function(&t)),
            })
        })
        .collect::<Result<Vec<_>, IterateError>>()?;

    Ok(SemigroupReport {
        modulus,
        periods,
        composition: (n_el <= REPORTED_COMPOSITION_LIMIT).then_some(composition),
        elements,
        finite_iterates,
        closed,
        additive,
    })
}
