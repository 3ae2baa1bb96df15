//! Continuity of `f^p` at a point: certified discontinuity from finite
//! witness families, certified continuity from closed forms or an isolated
//! point in the orbit, and depth-bounded continuity otherwise.
//!
//! Continuity at `x` is tested through the neighborhood-base criterion:
//! `g` is continuous at `x` iff every tail `T_j(g(x))` contains
//! `g[T_k(x)]` for some `k`. A discontinuity certificate is a family
//! `x_k → x` together with one tail of `g(x)` that every sampled image
//! avoids; it can be replayed independently of how it was found.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use thiserror::Error;

use crate::arith::next_prime;
use crate::dsl::{DynamicalMap, MapSpec};
use crate::dynamics::{orbit_analyze, DynamicsError, OrbitRecord, DEFAULT_BUDGET};
use crate::fixtures::{Fixture, FixtureKind, FixtureMeta};
use crate::iterates::{p_iterate_from_record, IterateError};
use crate::ordinal::{
    converges_window, fundamental_sequence, horizon, omega2, Convergence, Neighborhood,
    Omega2Coord, Point, SpaceError,
};
use crate::ultrafilter::{AffineRule, ResidueSystem, UltrafilterError};

#[derive(Debug, Error)]
pub enum ContinuityError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Ultrafilter(#[from] UltrafilterError),
    #[error(transparent)]
    Iterate(#[from] IterateError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessSample {
    pub index: u64,
    pub point: Point,
    pub image: Point,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiscontinuityCertificate {
    /// How the witness family was generated.
    pub family: String,
    /// Depth at which the sampled family converges to the point.
    pub depth: u64,
    /// `g(x)`.
    pub target: Point,
    /// Index `j` of the tail `T_j(g(x))` that every sampled image avoids.
    pub tail: u64,
    pub separating: Neighborhood,
    pub samples: Vec<WitnessSample>,
    /// Claim about the whole family, from a closed form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbolic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum VerdictStatus {
    DiscontinuousCertified(DiscontinuityCertificate),
    ContinuousCertified {
        method: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        claim: Option<String>,
    },
    ContinuousAtDepth {
        depth: u64,
        families: Vec<String>,
    },
    Unresolved {
        points: Vec<Point>,
    },
}

impl VerdictStatus {
    pub fn kind(&self) -> &'static str {
        match self {
            VerdictStatus::DiscontinuousCertified(_) => "discontinuous-certified",
            VerdictStatus::ContinuousCertified { .. } => "continuous-certified",
            VerdictStatus::ContinuousAtDepth { .. } => "continuous-at-depth",
            VerdictStatus::Unresolved { .. } => "unresolved",
        }
    }

    /// `Some(true)` for continuity (certified or at depth), `Some(false)`
    /// for certified discontinuity.
    pub fn is_continuous(&self) -> Option<bool> {
        match self {
            VerdictStatus::DiscontinuousCertified(_) => Some(false),
            VerdictStatus::ContinuousCertified { .. } | VerdictStatus::ContinuousAtDepth { .. } => {
                Some(true)
            }
            VerdictStatus::Unresolved { .. } => None,
        }
    }

    pub fn certificate(&self) -> Option<&DiscontinuityCertificate> {
        match self {
            VerdictStatus::DiscontinuousCertified(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContinuityVerdict {
    pub point: Point,
    pub function: String,
    #[serde(flatten)]
    pub status: VerdictStatus,
}

/// If some `f^n(x)` is isolated, every `f^p` is continuous at `x`.
pub fn isolated_orbit_shortcut<M: DynamicalMap + ?Sized>(
    f: &M,
    x: &Point,
    budget: u64,
) -> Result<Option<VerdictStatus>, ContinuityError> {
    let mut seen = HashSet::new();
    let mut y = x.clone();
    for n in 0..budget {
        if y.is_isolated() {
            return Ok(Some(VerdictStatus::ContinuousCertified {
                method: "isolated-orbit".into(),
                claim: Some(format!("f^{n}(x) = {y} is isolated")),
            }));
        }
        if !seen.insert(y.clone()) {
            break;
        }
        y = f.apply(&y).map_err(DynamicsError::from)?;
    }
    Ok(None)
}

/// Shared state for many continuity questions about one map: orbit records
/// are cached so that different `p` reuse them.
pub struct ContinuityContext {
    map: MapSpec,
    kind: FixtureKind,
    budget: u64,
    seed: u64,
    records: Mutex<HashMap<Point, Arc<OrbitRecord>>>,
}

impl ContinuityContext {
    pub fn new(map: MapSpec, kind: FixtureKind, budget: u64) -> Self {
        ContinuityContext {
            map,
            kind,
            budget,
            seed: 0,
            records: Mutex::new(HashMap::new()),
        }
    }

    pub fn for_fixture(fx: &Fixture, budget: u64) -> Self {
        Self::new(fx.map.clone(), fx.kind, budget)
    }

    /// Seed for the random monotone witness families.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn map(&self) -> &MapSpec {
        &self.map
    }

    pub fn record(&self, y: &Point) -> Result<Arc<OrbitRecord>, ContinuityError> {
        if let Some(r) = self.records.lock().expect("cache lock").get(y) {
            return Ok(r.clone());
        }
        let r = Arc::new(orbit_analyze(&self.map, y, self.budget)?);
        self.records
            .lock()
            .expect("cache lock")
            .insert(y.clone(), r.clone());
        Ok(r)
    }

    /// `f^p(y)`, or `None` when the orbit of `y` is unresolved.
    pub fn p_iterate(
        &self,
        p: &ResidueSystem,
        y: &Point,
    ) -> Result<Option<Point>, ContinuityError> {
        let rec = self.record(y)?;
        if !rec.is_resolved() {
            return Ok(None);
        }
        Ok(Some(p_iterate_from_record(&rec, p, y)?))
    }

    pub fn continuity_at(
        &self,
        p: &ResidueSystem,
        x: &Point,
        depth: u64,
    ) -> Result<ContinuityVerdict, ContinuityError> {
        self.map.space().check(x)?;
        let status = self.status_at(p, x, depth)?;
        Ok(ContinuityVerdict {
            point: x.clone(),
            function: format!("f^p, p = {p}"),
            status,
        })
    }

    fn status_at(
        &self,
        p: &ResidueSystem,
        x: &Point,
        depth: u64,
    ) -> Result<VerdictStatus, ContinuityError> {
        if x.is_isolated() {
            return Ok(VerdictStatus::ContinuousCertified {
                method: "isolated-point".into(),
                claim: None,
            });
        }
        if let Some(v) = isolated_orbit_shortcut(&self.map, x, self.budget)? {
            return Ok(v);
        }
        let Some(gx) = self.p_iterate(p, x)? else {
            return Ok(VerdictStatus::Unresolved {
                points: vec![x.clone()],
            });
        };
        if let Some(v) = self.closed_form_status(p, x, &gx, depth)? {
            return Ok(v);
        }
        self.search_status(p, x, &gx, depth)
    }

    /// Builds a certificate from sampled witnesses if it replays.
    #[allow(clippy::too_many_arguments)]
    fn certify(
        &self,
        p: &ResidueSystem,
        x: &Point,
        gx: &Point,
        depth: u64,
        family: &str,
        points: Vec<(u64, Point)>,
        tail: u64,
        symbolic: Option<String>,
    ) -> Result<Option<DiscontinuityCertificate>, ContinuityError> {
        let mut samples = Vec::with_capacity(points.len());
        for (index, point) in points {
            let Some(image) = self.p_iterate(p, &point)? else {
                return Ok(None);
            };
            samples.push(WitnessSample {
                index,
                point,
                image,
            });
        }
        let cert = DiscontinuityCertificate {
            family: family.to_string(),
            depth,
            target: gx.clone(),
            tail,
            separating: Neighborhood::basic(gx, tail),
            samples,
            symbolic,
        };
        Ok(self.replay(p, x, &cert).is_ok().then_some(cert))
    }

    /// Independent check of a certificate: the family converges to `x` at
    /// the stated depth and every recomputed image avoids the stated tail
    /// of the recomputed `g(x)`.
    pub fn replay(
        &self,
        p: &ResidueSystem,
        x: &Point,
        cert: &DiscontinuityCertificate,
    ) -> Result<(), String> {
        if cert.samples.is_empty() {
            return Err("no samples".into());
        }
        let window: Vec<(u64, Point)> = cert
            .samples
            .iter()
            .map(|s| (s.index, s.point.clone()))
            .collect();
        if let Convergence::No { tail, violations } = converges_window(&window, x, cert.depth) {
            return Err(format!(
                "family leaves tail {tail} of {x} at indices {violations:?}"
            ));
        }
        let gx = self
            .p_iterate(p, x)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("orbit of {x} unresolved"))?;
        if gx != cert.target {
            return Err(format!("g({x}) = {gx}, certificate says {}", cert.target));
        }
        let tail = Neighborhood::basic(&gx, cert.tail);
        if tail != cert.separating {
            return Err(format!(
                "tail {} of {gx} is {tail}, not {}",
                cert.tail, cert.separating
            ));
        }
        for s in &cert.samples {
            let image = self
                .p_iterate(p, &s.point)
                .map_err(|e| e.to_string())?
                .ok_or_else(|| format!("orbit of {} unresolved", s.point))?;
            if image != s.image {
                return Err(format!(
                    "g({}) = {image}, certificate says {}",
                    s.point, s.image
                ));
            }
            if tail.contains(&image) {
                return Err(format!("g({}) = {image} lies in {tail}", s.point));
            }
        }
        Ok(())
    }

    fn closed_form_status(
        &self,
        p: &ResidueSystem,
        x: &Point,
        gx: &Point,
        depth: u64,
    ) -> Result<Option<VerdictStatus>, ContinuityError> {
        let continuous = |method: &str, claim: String| {
            Ok(Some(VerdictStatus::ContinuousCertified {
                method: method.into(),
                claim: Some(claim),
            }))
        };
        match self.kind {
            FixtureKind::Identity => continuous("closed-form", "f^p is the identity".into()),
            FixtureKind::ShiftUp => continuous("closed-form", "f^p is constant w".into()),
            FixtureKind::ShiftDown => {
                // f^p sends every finite point to 0 and fixes w.
                let h = horizon(depth);
                let pts = (h / 2..=h).map(|k| (k, Point::finite(k))).collect();
                let sym = Some("f^p(k) = 0 for all finite k, f^p(w) = w".to_string());
                let cert = self.certify(p, x, gx, depth, "k", pts, 0, sym)?;
                Ok(cert.map(VerdictStatus::DiscontinuousCertified))
            }
            FixtureKind::ExampleOmega2 => match p.affine_on_primes() {
                Some(rule) => self.example_status(p, x, gx, depth, rule),
                None => Ok(None),
            },
            FixtureKind::Generated | FixtureKind::Custom => Ok(None),
        }
    }

    /// Closed forms on the `ω²+1` example for residue rules that are affine
    /// at large primes, `R(q) = ⌊(a·q + b)/c⌋` with `0 ≤ a ≤ c`.
    ///
    /// For `m ≤ q ∈ ℙ`, `f^p(d^m_q)` lies in column `((m − 1 − R(q)) mod q) + 1`
    /// and every other point near `d_m` or `d` maps to `d`.
    fn example_status(
        &self,
        p: &ResidueSystem,
        x: &Point,
        gx: &Point,
        depth: u64,
        rule: AffineRule,
    ) -> Result<Option<VerdictStatus>, ContinuityError> {
        let AffineRule { a, b, c } = rule;
        let h = horizon(depth);
        let rule_text = format!("R(q) = floor(({a}q + {b})/{c})");
        match Omega2Coord::from_point(x) {
            Some(Omega2Coord::Limit { m }) => {
                let eventually_constant = (a == 0 && b < m as i64) || a == c;
                if eventually_constant {
                    // The image column settles at m − b.
                    let col = (m as i64 - b) as u64;
                    let q0 = col + 2;
                    let pts = (h / 2..=h)
                        .map(|k| (k, omega2::dmn(m, next_prime(k.max(q0)))))
                        .collect();
                    let sym = format!(
                        "{rule_text}; for primes q > {q0}, f^p(d^{m}_q) = d^{col}_q, outside tail {col} of d"
                    );
                    let cert = self.certify(
                        p,
                        x,
                        gx,
                        depth,
                        &format!("d^{m}_q, q prime"),
                        pts,
                        col,
                        Some(sym),
                    )?;
                    return Ok(cert.map(VerdictStatus::DiscontinuousCertified));
                }
                let claim = format!(
                    "{rule_text}; for large primes q, f^p(d^{m}_q) = d^(q+{m}-R(q))_q and q - R(q) -> infinity; \
                     other points near d_{m} map to d"
                );
                if !self.example_formula_holds(p, m, rule)? {
                    return Ok(None);
                }
                Ok(Some(VerdictStatus::ContinuousCertified {
                    method: "closed-form".into(),
                    claim: Some(claim),
                }))
            }
            Some(Omega2Coord::Top) => {
                if a == 0 {
                    let claim = format!(
                        "{rule_text} = {b} for large primes; f^p(d^m_q) = d^(m-{b})_q for {b} < m <= q prime, \
                         so f^p maps T_(k+{b})(d) into T_k(d)"
                    );
                    if !self.example_formula_holds(p, b.max(0) as u64 + 1, rule)? {
                        return Ok(None);
                    }
                    return Ok(Some(VerdictStatus::ContinuousCertified {
                        method: "closed-form".into(),
                        claim: Some(claim),
                    }));
                }
                // x_k = d^(R(q)+1)_q with column R(q) + 1 > k; image d^1_q.
                let mut pts = Vec::new();
                for k in h / 2..=h {
                    let mut q = next_prime(k);
                    while !(rule.eval(q) >= k as i64 && rule.eval(q) < q as i64) {
                        q = next_prime(q);
                    }
                    pts.push((k, omega2::dmn(rule.eval(q) as u64 + 1, q)));
                }
                let sym = format!(
                    "{rule_text}; f^p(d^(R(q)+1)_q) = d^1_q for large primes q, and d^1_q -> d_1, outside tail 1 of d"
                );
                let cert =
                    self.certify(p, x, gx, depth, "d^(R(q)+1)_q, q prime", pts, 1, Some(sym))?;
                Ok(cert.map(VerdictStatus::DiscontinuousCertified))
            }
            _ => Ok(None),
        }
    }

    /// Spot-checks the column formula against orbit-based iterates.
    fn example_formula_holds(
        &self,
        p: &ResidueSystem,
        m: u64,
        rule: AffineRule,
    ) -> Result<bool, ContinuityError> {
        let mut q = next_prime(m.max(64));
        for _ in 0..4 {
            let r = p.residue(q)?;
            if r as i64 != rule.eval(q) {
                return Ok(false);
            }
            let col = (m - 1 + q - r) % q + 1;
            if self.p_iterate(p, &omega2::dmn(m, q))? != Some(omega2::dmn(col, q)) {
                return Ok(false);
            }
            q = next_prime(q);
        }
        Ok(true)
    }

    fn search_status(
        &self,
        p: &ResidueSystem,
        x: &Point,
        gx: &Point,
        depth: u64,
    ) -> Result<VerdictStatus, ContinuityError> {
        let h = horizon(depth);
        let seq = fundamental_sequence(x)?;
        let e = x.rank();
        let mut rng = StdRng::seed_from_u64(self.seed ^ h);
        let mut families: Vec<(String, Vec<(u64, Point)>)> = vec![(
            "fundamental".into(),
            (h / 2..=h).map(|k| (k, seq.term(k))).collect(),
        )];
        if e >= 2 {
            let below = |col: u64, row: u64| seq.term(col).add_monomial(e - 2, row);
            families.push((
                "prime diagonal".into(),
                (h / 2..=h)
                    .map(|k| {
                        let q = next_prime(k);
                        (k, below(q - 1, q))
                    })
                    .collect(),
            ));
            families.push((
                "prime rows".into(),
                (h / 2..=h).map(|k| (k, below(k, next_prime(k)))).collect(),
            ));
            let mut row = 0;
            families.push((
                "random monotone".into(),
                (h / 2..=h)
                    .map(|k| {
                        row = (row + 1).max(k) + rng.gen_range(0..=k);
                        (k, below(k, row))
                    })
                    .collect(),
            ));
        }

        let mut unresolved = Vec::new();
        let mut names = Vec::new();
        for (name, pts) in families {
            let mut images = Vec::with_capacity(pts.len());
            for (k, y) in &pts {
                match self.p_iterate(p, y)? {
                    Some(v) => images.push((*k, v)),
                    None => unresolved.push(y.clone()),
                }
            }
            if images.len() < pts.len() {
                continue;
            }
            if let Convergence::No { tail, violations } = converges_window(&images, gx, depth) {
                let witnesses = pts
                    .into_iter()
                    .filter(|(k, _)| violations.contains(k))
                    .collect();
                if let Some(cert) = self.certify(p, x, gx, depth, &name, witnesses, tail, None)? {
                    return Ok(VerdictStatus::DiscontinuousCertified(cert));
                }
            }
            names.push(name);
        }
        if !unresolved.is_empty() {
            unresolved.sort();
            unresolved.dedup();
            return Ok(VerdictStatus::Unresolved { points: unresolved });
        }
        Ok(VerdictStatus::ContinuousAtDepth {
            depth,
            families: names,
        })
    }
}

/// One-shot [`ContinuityContext::continuity_at`] for a bare map.
pub fn continuity_at(
    f: &MapSpec,
    p: &ResidueSystem,
    x: &Point,
    depth: u64,
) -> Result<ContinuityVerdict, ContinuityError> {
    ContinuityContext::new(f.clone(), FixtureKind::Custom, DEFAULT_BUDGET)
        .continuity_at(p, x, depth)
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleStatus {
    pub ultrafilter: String,
    pub status: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointScan {
    pub point: Point,
    pub statuses: Vec<SampleStatus>,
    /// `continuous`, `discontinuous`, `mixed` or `unresolved`.
    pub classification: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct GlobalScan {
    pub ultrafilter: String,
    /// `None` when some verdict was unresolved.
    pub continuous_on_truncation: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Falsification {
    pub property: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Point>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DichotomyReport {
    pub fixture: String,
    pub accumulation_points_periodic: bool,
    pub finite_derived_set: bool,
    pub truncation_depth: u64,
    pub depth: u64,
    pub samples: Vec<String>,
    pub points: Vec<PointScan>,
    pub global: Vec<GlobalScan>,
    pub falsifications: Vec<Falsification>,
    pub verdicts: Vec<ContinuityVerdict>,
}

/// Verdicts for every accumulation point of the truncation and every
/// sampled `p`. When every accumulation point is periodic, statuses at each
/// point must agree across samples; when `X′` is also finite, so must
/// global continuity. Disagreements and non-replaying certificates are
/// reported as falsifications.
pub fn dichotomy_scan(
    ctx: &ContinuityContext,
    meta: &FixtureMeta,
    name: &str,
    samples: &[ResidueSystem],
    truncation_depth: u64,
    depth: u64,
) -> Result<DichotomyReport, ContinuityError> {
    let limits = ctx.map.space().limit_points(truncation_depth);
    let mut points = Vec::new();
    let mut verdicts = Vec::new();
    let mut falsifications = Vec::new();
    let mut global: Vec<Option<bool>> = vec![Some(true); samples.len()];
    for x in &limits {
        let mut statuses = Vec::new();
        let mut classes = Vec::new();
        for (i, p) in samples.iter().enumerate() {
            let v = ctx.continuity_at(p, x, depth)?;
            if let Some(cert) = v.status.certificate() {
                if let Err(why) = ctx.replay(p, x, cert) {
                    falsifications.push(Falsification {
                        property: "certificate-replay",
                        point: Some(x.clone()),
                        detail: format!("p = {p}: {why}"),
                    });
                }
            }
            let class = v.status.is_continuous();
            global[i] = match (global[i], class) {
                (Some(g), Some(c)) => Some(g && c),
                (Some(false), None) => Some(false),
                _ => None,
            };
            classes.push(class);
            statuses.push(SampleStatus {
                ultrafilter: p.to_string(),
                status: v.status.kind(),
            });
            verdicts.push(v);
        }
        let resolved: Vec<bool> = classes.iter().flatten().copied().collect();
        let classification = if resolved.is_empty() {
            "unresolved"
        } else if resolved.iter().all(|&c| c) {
            "continuous"
        } else if resolved.iter().all(|&c| !c) {
            "discontinuous"
        } else {
            "mixed"
        };
        if classification == "mixed" && meta.accumulation_points_periodic {
            falsifications.push(Falsification {
                property: "pointwise-dichotomy",
                point: Some(x.clone()),
                detail: statuses
                    .iter()
                    .map(|s| format!("{}: {}", s.ultrafilter, s.status))
                    .collect::<Vec<_>>()
                    .join("; "),
            });
        }
        points.push(PointScan {
            point: x.clone(),
            statuses,
            classification,
        });
    }
    let global: Vec<GlobalScan> = samples
        .iter()
        .zip(global)
        .map(|(p, g)| GlobalScan {
            ultrafilter: p.to_string(),
            continuous_on_truncation: g,
        })
        .collect();
    if meta.accumulation_points_periodic && meta.finite_derived_set {
        let known: Vec<bool> = global
            .iter()
            .filter_map(|g| g.continuous_on_truncation)
            .collect();
        if known.iter().any(|&c| c) && known.iter().any(|&c| !c) {
            falsifications.push(Falsification {
                property: "global-dichotomy",
                point: None,
                detail: global
                    .iter()
                    .map(|g| format!("{}: {:?}", g.ultrafilter, g.continuous_on_truncation))
                    .collect::<Vec<_>>()
                    .join("; "),
            });
        }
    }
    Ok(DichotomyReport {
        fixture: name.to_string(),
        accumulation_points_periodic: meta.accumulation_points_periodic,
        finite_derived_set: meta.finite_derived_set,
        truncation_depth,
        depth,
        samples: samples.iter().map(ToString::to_string).collect(),
        points,
        global,
        falsifications,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, example_omega2, random_periodic};
    use crate::ordinal::omega2::{d, d_, dmn};
    use proptest::prelude::*;

    fn rs(s: &str) -> ResidueSystem {
        s.parse().unwrap()
    }

    fn example_ctx() -> ContinuityContext {
        ContinuityContext::for_fixture(&example_omega2(), DEFAULT_BUDGET)
    }

    #[test]
    fn discontinuity_at_top_is_certified() {
        let ctx = example_ctx();
        let p = rs("n-1 on primes");
        let v = ctx.continuity_at(&p, &d(), 50).unwrap();
        let cert = v.status.certificate().expect("discontinuous");
        assert_eq!(cert.tail, 1);
        for s in &cert.samples {
            let Some(Omega2Coord::Isolated { m, n }) = Omega2Coord::from_point(&s.point) else {
                panic!("{}", s.point)
            };
            assert_eq!(m, n);
            assert_eq!(s.image, dmn(1, n));
        }
        ctx.replay(&p, &d(), cert).unwrap();

        let mut forged = cert.clone();
        forged.samples[0].image = d();
        assert!(ctx.replay(&p, &d(), &forged).is_err());
        let mut forged = cert.clone();
        forged.samples[0].point = dmn(1, 3);
        assert!(ctx.replay(&p, &d(), &forged).is_err());
    }

    #[test]
    fn half_rule_is_continuous_on_columns_but_not_at_top() {
        let ctx = example_ctx();
        let q = rs("(n+1)/2 on odd primes; table (2:1)");
        for m in 1..=6 {
            let v = ctx.continuity_at(&q, &d_(m), 8).unwrap();
            assert!(
                matches!(v.status, VerdictStatus::ContinuousCertified { .. }),
                "{m}: {v:?}"
            );
        }
        // x_k = d^((n+3)/2)_n → d, but f^p(x_k) = d^1_n → d_1.
        let v = ctx.continuity_at(&q, &d(), 8).unwrap();
        let cert = v.status.certificate().expect("discontinuous at d");
        assert!(cert
            .samples
            .iter()
            .all(|s| s.image.rank() == 0 && s.image.coeff(1) == 0));
    }

    #[test]
    fn search_agrees_with_closed_forms() {
        let fx = example_omega2();
        let generic = ContinuityContext::new(fx.map.clone(), FixtureKind::Custom, DEFAULT_BUDGET);
        let closed = example_ctx();
        for p in [
            "n-1 on primes",
            "(n+1)/2 on odd primes; table (2:1)",
            "const 3",
            "table (2:1)(3:2)(5:0)(7:3)",
        ] {
            let p = rs(p);
            for x in [d_(1), d_(2), d_(4)] {
                let a = generic
                    .continuity_at(&p, &x, 6)
                    .unwrap()
                    .status
                    .is_continuous();
                let b = closed
                    .continuity_at(&p, &x, 6)
                    .unwrap()
                    .status
                    .is_continuous();
                assert_eq!(a, b, "p = {p}, x = {x}");
            }
        }
        let p = rs("n-1 on primes");
        assert_eq!(
            generic
                .continuity_at(&p, &d(), 6)
                .unwrap()
                .status
                .is_continuous(),
            Some(false)
        );
    }

    #[test]
    fn simple_fixtures() {
        let p = rs("n-1 on primes");
        let id = ContinuityContext::for_fixture(&fixtures::identity(), DEFAULT_BUDGET);
        for x in [d(), d_(3), dmn(2, 2)] {
            assert!(matches!(
                id.continuity_at(&p, &x, 4).unwrap().status,
                VerdictStatus::ContinuousCertified { .. }
            ));
        }
        let w: Point = "w".parse().unwrap();
        let down = ContinuityContext::for_fixture(&fixtures::shift_down(), DEFAULT_BUDGET);
        let v = down.continuity_at(&p, &w, 10).unwrap();
        let cert = v.status.certificate().unwrap();
        assert!(cert.samples.iter().all(|s| s.image == Point::zero()));
        assert_eq!(cert.tail, 0);
        let up = ContinuityContext::for_fixture(&fixtures::shift_up(), DEFAULT_BUDGET);
        assert_eq!(
            up.continuity_at(&p, &w, 4).unwrap().status.is_continuous(),
            Some(true)
        );
        // The generic search reaches the same conclusions.
        let f = fixtures::shift_down().map;
        assert_eq!(
            continuity_at(&f, &p, &w, 6).unwrap().status.is_continuous(),
            Some(false)
        );
        let f = fixtures::shift_up().map;
        assert_eq!(
            continuity_at(&f, &p, &w, 6).unwrap().status.is_continuous(),
            Some(true)
        );
    }

    #[test]
    fn isolated_orbit_examples() {
        let f = example_omega2().map;
        assert!(isolated_orbit_shortcut(&f, &dmn(3, 9), 100)
            .unwrap()
            .is_some());
        assert!(isolated_orbit_shortcut(&f, &d(), 100).unwrap().is_none());
        assert!(isolated_orbit_shortcut(&f, &d_(4), 100).unwrap().is_none());
        let g = fixtures::shift_down().map;
        assert!(isolated_orbit_shortcut(&g, &Point::finite(5), 100)
            .unwrap()
            .is_some());
        // A limit point collapsed onto an isolated point.
        let space = crate::ordinal::SpaceSpec::new("w", "w".parse().unwrap());
        let h = crate::dsl::parse_map("w -> 3; k -> k;", &space).unwrap();
        let v = continuity_at(&h, &rs("const 0"), &"w".parse().unwrap(), 4).unwrap();
        assert!(
            matches!(v.status, VerdictStatus::ContinuousCertified { ref method, .. } if method == "isolated-orbit")
        );
    }

    #[test]
    fn dichotomy_examples() {
        let samples = [
            rs("n-1 on primes"),
            rs("(n+1)/2 on odd primes; table (2:1)"),
        ];
        let fx = example_omega2();
        let rep = dichotomy_scan(&example_ctx(), &fx.meta, &fx.name, &samples, 4, 6).unwrap();
        assert!(rep.falsifications.is_empty(), "{:?}", rep.falsifications);
        let at = |x: &Point| {
            rep.points
                .iter()
                .find(|s| &s.point == x)
                .unwrap()
                .classification
        };
        assert_eq!(at(&d()), "discontinuous");
        for m in 1..=4 {
            assert_eq!(at(&d_(m)), "mixed");
        }

        let many: Vec<ResidueSystem> = (0..6)
            .map(|r| ResidueSystem::from_progression(30, r * 7 % 30).unwrap())
            .collect();
        let fx = fixtures::shift_down();
        let ctx = ContinuityContext::for_fixture(&fx, DEFAULT_BUDGET);
        let rep = dichotomy_scan(&ctx, &fx.meta, &fx.name, &many, 3, 6).unwrap();
        assert_eq!(rep.points.len(), 1);
        assert_eq!(rep.points[0].classification, "discontinuous");

        let fx = fixtures::identity();
        let ctx = ContinuityContext::for_fixture(&fx, DEFAULT_BUDGET);
        let rep = dichotomy_scan(&ctx, &fx.meta, &fx.name, &many, 3, 4).unwrap();
        assert!(rep.points.iter().all(|s| s.classification == "continuous"));
        assert!(rep
            .global
            .iter()
            .all(|g| g.continuous_on_truncation == Some(true)));
        serde_json::to_string(&rep).unwrap();
    }

    #[test]
    fn generated_fixtures_are_homogeneous() {
        let samples: Vec<ResidueSystem> = (0..8)
            .map(|r| ResidueSystem::from_progression(12, r * 5 % 12).unwrap())
            .collect();
        let mut seen_discontinuous = false;
        for seed in 0..12 {
            let fx = random_periodic(seed);
            let ctx = ContinuityContext::for_fixture(&fx, 20_000).with_seed(seed);
            let rep = dichotomy_scan(&ctx, &fx.meta, &fx.name, &samples, 2, 2).unwrap();
            assert!(
                rep.falsifications.is_empty(),
                "seed {seed}: {:?}\n{}",
                rep.falsifications,
                fx.source
            );
            seen_discontinuous |= rep
                .points
                .iter()
                .any(|s| s.classification == "discontinuous");
        }
        assert!(seen_discontinuous);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn continuity_replicates_along_periodic_orbits(seed in 0u64..200, r in 0u64..60) {
            let fx = random_periodic(seed);
            let ctx = ContinuityContext::for_fixture(&fx, 20_000);
            let p = ResidueSystem::from_progression(60, r).unwrap();
            for x in fx.space().limit_points(2) {
                let here = ctx.continuity_at(&p, &x, 2).unwrap().status.is_continuous();
                if here != Some(true) {
                    continue;
                }
                let mut y = ctx.map().apply(&x).unwrap();
                while y != x {
                    let there = ctx.continuity_at(&p, &y, 2).unwrap().status.is_continuous();
                    prop_assert!(there != Some(false), "continuous at {} but not at {}", x, y);
                    y = ctx.map().apply(&y).unwrap();
                }
            }
        }

        #[test]
        fn shifting_by_a_finite_iterate_keeps_continuity(seed in 0u64..200, r in 0u64..60, n in 1i64..5) {
            let fx = random_periodic(seed);
            let ctx = ContinuityContext::for_fixture(&fx, 20_000);
            let p = ResidueSystem::from_progression(60, r).unwrap();
            let pn = p.add(&ResidueSystem::constant(n));
            for x in fx.space().limit_points(2) {
                if ctx.continuity_at(&p, &x, 2).unwrap().status.is_continuous() == Some(true) {
                    prop_assert_ne!(ctx.continuity_at(&pn, &x, 2).unwrap().status.is_continuous(), Some(false));
                }
            }
        }

        #[test]
        fn example_shift_keeps_continuity(m in 1u64..8, n in 1i64..6) {
            let ctx = example_ctx();
            let p = rs("(n+1)/2 on odd primes; table (2:1)");
            let pn = p.add(&ResidueSystem::constant(n));
            prop_assert_eq!(ctx.continuity_at(&pn, &d_(m), 6).unwrap().status.is_continuous(), Some(true));
        }
    }
}
