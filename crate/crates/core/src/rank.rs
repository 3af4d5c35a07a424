//! Rank of divisors on finite models and on metric graphs.
//!
//! Both routes share one search: starting from an effective representative
//! of `D`, remove one chip at a witness point at a time, reducing at that
//! point whenever the chip is not already present. `r(D) ≥ k` holds iff
//! every removal sequence of length `k` over a rank-determining witness set
//! succeeds.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::io::{format_divisor, parse_divisor};
use crate::jacobian::are_equivalent;
use crate::metric_graph::{
    rank_determining_set, refine_with_points, subdivide_to_grid, Model, PointRef, RankDeterminingSet,
    DEFAULT_MAX_SUBDIVISION,
};
use crate::reduction::finite::ChipGraph;
use crate::reduction::metric::{Chips, MetricEngine, Pos};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMethod {
    /// Unit subdivision and chip-firing on the finite graph.
    Subdivide,
    /// Witnesses restricted to a rank-determining set.
    Rds,
    /// Run both and insist on agreement.
    Both,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankOptions {
    pub method: RankMethod,
    /// Answer `deg − g` directly when `deg > 2g − 2`.
    pub fast_path: bool,
    pub max_subdiv: u64,
    /// Keep the full lower-bound table for a replayable certificate.
    pub certificate: bool,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            method: RankMethod::Rds,
            fast_path: true,
            max_subdiv: DEFAULT_MAX_SUBDIVISION,
            certificate: false,
        }
    }
}

impl RankOptions {
    pub fn with_method(mut self, method: RankMethod) -> Self {
        self.method = method;
        self
    }

    pub fn exhaustive(mut self) -> Self {
        self.fast_path = false;
        self
    }

    pub fn certified(mut self) -> Self {
        self.certificate = true;
        self
    }
}

/// Evidence that `|D − F| = ∅`: the divisor reduced at `sink` is negative there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpperBound {
    pub f: Divisor,
    pub sink: PointRef,
    pub reduced: Divisor,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankCertificate {
    pub rank: i64,
    /// Set when the rank follows from the degree alone.
    pub by_degree: bool,
    pub witnesses: Vec<PointRef>,
    /// Every effective `E` of degree `rank` on the witnesses, with an
    /// effective divisor equivalent to `D − E`.
    pub lower: Vec<(Divisor, Divisor)>,
    pub upper: Option<UpperBound>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankOutcome {
    pub rank: i64,
    pub method: RankMethod,
    pub certificate: Option<RankCertificate>,
}

/// Configurations the witness search works with.
pub(crate) trait RankEngine {
    type Conf: Clone + Eq + Hash;
    fn witness_count(&self) -> usize;
    fn coeff(&self, x: &Self::Conf, w: usize) -> i64;
    fn add_chip(&self, x: &mut Self::Conf, w: usize, c: i64);
    /// Reduced form at witness `w`; `x` may be arbitrary.
    fn reduce_at(&self, x: &Self::Conf, w: usize) -> Self::Conf;
    fn effective_rep(&self, x: &Self::Conf) -> Option<Self::Conf>;

    fn canonical(&self, x: &Self::Conf) -> Self::Conf {
        self.reduce_at(x, 0)
    }

    /// Effective representative of `x − w` for effective `x`, or the
    /// reduced form at `w` proving there is none.
    fn take(&self, x: &Self::Conf, w: usize) -> std::result::Result<Self::Conf, Self::Conf> {
        let mut y = if self.coeff(x, w) >= 1 {
            x.clone()
        } else {
            self.reduce_at(x, w)
        };
        let ok = self.coeff(&y, w) >= 1;
        self.add_chip(&mut y, w, -1);
        if ok {
            Ok(y)
        } else {
            Err(y)
        }
    }
}

pub(crate) struct Failure<C> {
    pub f: Vec<usize>,
    pub sink: usize,
    pub reduced: C,
}

pub(crate) struct SearchResult<C> {
    pub rank: i64,
    pub failure: Option<Failure<C>>,
    pub table: Option<Vec<(Vec<usize>, C)>>,
}

/// Level-by-level search. Classes are deduplicated unless a table is wanted,
/// in which case every non-decreasing witness sequence is visited.
pub(crate) fn search<E: RankEngine>(e: &E, d: &E::Conf, max_level: i64, table: bool) -> SearchResult<E::Conf> {
    let Some(start) = e.effective_rep(d) else {
        return SearchResult {
            rank: -1,
            failure: Some(Failure {
                f: Vec::new(),
                sink: 0,
                reduced: e.reduce_at(d, 0),
            }),
            table: None,
        };
    };
    let n = e.witness_count();
    let mut level: Vec<(Vec<usize>, E::Conf)> = vec![(Vec::new(), e.canonical(&start))];
    for k in 0..max_level.max(0) {
        let mut next: Vec<(Vec<usize>, E::Conf)> = Vec::new();
        let mut seen: HashSet<E::Conf> = HashSet::new();
        for (prefix, x) in &level {
            let from = if table { prefix.last().copied().unwrap_or(0) } else { 0 };
            for w in from..n {
                match e.take(x, w) {
                    Ok(y) => {
                        let mut p = prefix.clone();
                        p.push(w);
                        if table {
                            next.push((p, y));
                        } else {
                            let c = e.canonical(&y);
                            if seen.insert(c.clone()) {
                                next.push((p, c));
                            }
                        }
                    }
                    Err(reduced) => {
                        let mut f = prefix.clone();
                        f.push(w);
                        return SearchResult {
                            rank: k,
                            failure: Some(Failure { f, sink: w, reduced }),
                            table: table.then_some(level),
                        };
                    }
                }
            }
        }
        level = next;
    }
    SearchResult {
        rank: max_level.max(0),
        failure: None,
        table: table.then_some(level),
    }
}

/// Depth-first search for a witness sequence of length at most `k` whose
/// removal leaves an empty linear system.
pub(crate) fn breaker<E: RankEngine>(e: &E, d: &E::Conf, k: usize) -> Option<Failure<E::Conf>> {
    let Some(start) = e.effective_rep(d) else {
        return Some(Failure {
            f: Vec::new(),
            sink: 0,
            reduced: e.reduce_at(d, 0),
        });
    };
    let mut seen: HashMap<E::Conf, usize> = HashMap::new();
    let mut path = Vec::new();
    fn go<E: RankEngine>(
        e: &E,
        x: &E::Conf,
        left: usize,
        path: &mut Vec<usize>,
        seen: &mut HashMap<E::Conf, usize>,
    ) -> Option<Failure<E::Conf>> {
        if left == 0 {
            return None;
        }
        let key = e.canonical(x);
        if seen.get(&key).is_some_and(|&l| l >= left) {
            return None;
        }
        seen.insert(key, left);
        let mut ok = Vec::new();
        for w in 0..e.witness_count() {
            match e.take(x, w) {
                Ok(y) => ok.push((w, y)),
                Err(reduced) => {
                    let mut f = path.clone();
                    f.push(w);
                    return Some(Failure { f, sink: w, reduced });
                }
            }
        }
        for (w, y) in ok {
            path.push(w);
            if let Some(found) = go(e, &y, left - 1, path, seen) {
                return Some(found);
            }
            path.pop();
        }
        None
    }
    go(e, &start, k, &mut path, &mut seen)
}

/// Chip-firing on a finite graph with the given vertices as witnesses.
pub(crate) struct DiscreteEngine {
    graph: ChipGraph,
    witnesses: Vec<usize>,
}

impl DiscreteEngine {
    pub fn new(m: &Model, witnesses: Vec<usize>) -> Self {
        DiscreteEngine {
            graph: ChipGraph::new(m),
            witnesses,
        }
    }
}

impl RankEngine for DiscreteEngine {
    type Conf = Vec<i64>;

    fn witness_count(&self) -> usize {
        self.witnesses.len()
    }

    fn coeff(&self, x: &Vec<i64>, w: usize) -> i64 {
        x[self.witnesses[w]]
    }

    fn add_chip(&self, x: &mut Vec<i64>, w: usize, c: i64) {
        x[self.witnesses[w]] += c;
    }

    fn reduce_at(&self, x: &Vec<i64>, w: usize) -> Vec<i64> {
        let mut y = x.clone();
        self.graph.reduce(&mut y, self.witnesses[w]);
        y
    }

    fn effective_rep(&self, x: &Vec<i64>) -> Option<Vec<i64>> {
        let y = self.reduce_at(x, 0);
        (y[self.witnesses[0]] >= 0).then_some(y)
    }
}

/// Reduction on the metric graph with arbitrary witness points.
pub(crate) struct MetricRankEngine {
    pub engine: MetricEngine,
    witnesses: Vec<Pos>,
}

impl MetricRankEngine {
    pub fn new(m: &Model, witnesses: &[PointRef], extra: &Divisor) -> Result<Self> {
        let engine = MetricEngine::new(m, witnesses.iter().chain(extra.support()))?;
        let witnesses = witnesses.iter().map(|p| engine.pos(p)).collect::<Result<_>>()?;
        Ok(MetricRankEngine { engine, witnesses })
    }
}

impl RankEngine for MetricRankEngine {
    type Conf = Chips;

    fn witness_count(&self) -> usize {
        self.witnesses.len()
    }

    fn coeff(&self, x: &Chips, w: usize) -> i64 {
        x.get(&self.witnesses[w]).copied().unwrap_or(0)
    }

    fn add_chip(&self, x: &mut Chips, w: usize, c: i64) {
        let p = self.witnesses[w];
        let v = x.entry(p).or_insert(0);
        *v += c;
        if *v == 0 {
            x.remove(&p);
        }
    }

    fn reduce_at(&self, x: &Chips, w: usize) -> Chips {
        self.engine.reduce_general(x, self.witnesses[w])
    }

    fn effective_rep(&self, x: &Chips) -> Option<Chips> {
        self.engine.effective_rep(x)
    }
}

fn max_level(d: &Divisor) -> i64 {
    d.degree()
}

fn by_degree(m: &Model, d: &Divisor, opts: &RankOptions) -> Option<RankOutcome> {
    let g = m.genus() as i64;
    let deg = d.degree();
    if deg < 0 {
        return Some(RankOutcome {
            rank: -1,
            method: opts.method,
            certificate: opts.certificate.then(|| RankCertificate {
                rank: -1,
                by_degree: true,
                witnesses: Vec::new(),
                lower: Vec::new(),
                upper: None,
            }),
        });
    }
    if opts.fast_path && deg > 2 * g - 2 {
        return Some(RankOutcome {
            rank: deg - g,
            method: opts.method,
            certificate: opts.certificate.then(|| RankCertificate {
                rank: deg - g,
                by_degree: true,
                witnesses: Vec::new(),
                lower: Vec::new(),
                upper: None,
            }),
        });
    }
    None
}

fn multiset_divisor(points: &[PointRef], idx: &[usize]) -> Divisor {
    Divisor::from_chips(idx.iter().map(|&i| (points[i].clone(), 1)))
}

/// Exact rank on a finite model, every vertex a witness.
pub fn rank_finite(m: &Model, d: &Divisor, opts: &RankOptions) -> Result<RankOutcome> {
    if !d.is_vertex_supported() {
        return Err(Error::NotVertexSupported);
    }
    d.check_on(m)?;
    if let Some(out) = by_degree(m, d, opts) {
        return Ok(RankOutcome {
            method: RankMethod::Subdivide,
            ..out
        });
    }
    let n = m.vertex_count();
    let engine = DiscreteEngine::new(m, (0..n).collect());
    let res = search(&engine, &d.to_vertex_vec(n), max_level(d), opts.certificate);
    let points: Vec<PointRef> = (0..n).map(PointRef::Vertex).collect();
    let certificate = opts.certificate.then(|| RankCertificate {
        rank: res.rank,
        by_degree: false,
        witnesses: points.clone(),
        lower: res
            .table
            .iter()
            .flatten()
            .map(|(idx, x)| (multiset_divisor(&points, idx), Divisor::from_vertex_vec(x)))
            .collect(),
        upper: res.failure.map(|f| UpperBound {
            f: multiset_divisor(&points, &f.f),
            sink: points[f.sink].clone(),
            reduced: Divisor::from_vertex_vec(&f.reduced),
        }),
    });
    Ok(RankOutcome {
        rank: res.rank,
        method: RankMethod::Subdivide,
        certificate,
    })
}

fn rank_by_subdivision(m: &Model, d: &Divisor, opts: &RankOptions) -> Result<RankOutcome> {
    let r = subdivide_to_grid(m, d.support(), true, opts.max_subdiv)?;
    let out = rank_finite(&r.model, &r.divisor_to_child(d), opts)?;
    let back = |x: &Divisor| r.divisor_to_parent(x);
    let certificate = out.certificate.map(|c| RankCertificate {
        rank: c.rank,
        by_degree: c.by_degree,
        witnesses: c.witnesses.iter().map(|p| r.to_parent(p)).collect(),
        lower: c.lower.iter().map(|(e, x)| (back(e), back(x))).collect(),
        upper: c.upper.map(|u| UpperBound {
            f: back(&u.f),
            sink: r.to_parent(&u.sink),
            reduced: back(&u.reduced),
        }),
    });
    Ok(RankOutcome {
        rank: out.rank,
        method: RankMethod::Subdivide,
        certificate,
    })
}

/// Witness points for the restricted search: a rank-determining set and
/// the support of `d`. Trees use a single vertex; when every cycle is a
/// loop the vertices of the loopless refinement are used.
pub fn witness_points(m: &Model, d: &Divisor) -> Result<Vec<PointRef>> {
    let mut pts: Vec<PointRef> = if m.genus() == 0 {
        vec![PointRef::Vertex(0)]
    } else {
        match rank_determining_set(m)? {
            RankDeterminingSet::Points { points, .. } => points,
            RankDeterminingSet::TreeWithLoops { loops } => (0..m.vertex_count())
                .map(PointRef::Vertex)
                .chain(loops.iter().map(|&e| m.midpoint(e)))
                .collect(),
        }
    };
    for p in d.support() {
        if !pts.contains(p) {
            pts.push(p.clone());
        }
    }
    Ok(pts)
}

fn rank_by_rds(m: &Model, d: &Divisor, opts: &RankOptions) -> Result<RankOutcome> {
    let points = witness_points(m, d)?;
    let engine = MetricRankEngine::new(m, &points, d)?;
    let conf = engine.engine.chips(d)?;
    let res = search(&engine, &conf, max_level(d), opts.certificate);
    let eng = &engine.engine;
    let certificate = opts.certificate.then(|| RankCertificate {
        rank: res.rank,
        by_degree: false,
        witnesses: points.clone(),
        lower: res
            .table
            .iter()
            .flatten()
            .map(|(idx, x)| (multiset_divisor(&points, idx), eng.divisor(x)))
            .collect(),
        upper: res.failure.map(|f| UpperBound {
            f: multiset_divisor(&points, &f.f),
            sink: points[f.sink].clone(),
            reduced: eng.divisor(&f.reduced),
        }),
    });
    Ok(RankOutcome {
        rank: res.rank,
        method: RankMethod::Rds,
        certificate,
    })
}

/// Rank of a divisor on the metric graph.
pub fn rank_metric(m: &Model, d: &Divisor, opts: &RankOptions) -> Result<RankOutcome> {
    d.check_on(m)?;
    if let Some(out) = by_degree(m, d, opts) {
        return Ok(out);
    }
    match opts.method {
        RankMethod::Subdivide => rank_by_subdivision(m, d, opts),
        RankMethod::Rds => rank_by_rds(m, d, opts),
        RankMethod::Both => {
            let a = rank_by_subdivision(m, d, opts)?;
            let b = rank_by_rds(m, d, opts)?;
            if a.rank != b.rank {
                return Err(Error::MethodsDisagree {
                    subdivide: a.rank,
                    rds: b.rank,
                });
            }
            Ok(RankOutcome {
                method: RankMethod::Both,
                ..b
            })
        }
    }
}

pub fn rank(m: &Model, d: &Divisor) -> Result<i64> {
    Ok(rank_metric(m, d, &RankOptions::default())?.rank)
}

/// An effective `F` of degree `k` on the witness points with `|D − F| = ∅`,
/// which shows `r(D) < k`. `None` means `r(D) ≥ k`.
pub fn find_rank_breaker(m: &Model, d: &Divisor, k: usize) -> Result<Option<UpperBound>> {
    d.check_on(m)?;
    let points = witness_points(m, d)?;
    let engine = MetricRankEngine::new(m, &points, d)?;
    let conf = engine.engine.chips(d)?;
    Ok(breaker(&engine, &conf, k).map(|f| {
        // pad with chips at the sink; the result stays reduced there
        let mut idx = f.f;
        let mut reduced = engine.engine.divisor(&f.reduced);
        let sink = points[f.sink].clone();
        while idx.len() < k {
            idx.push(f.sink);
            reduced.add_chip(sink.clone(), -1);
        }
        UpperBound {
            f: multiset_divisor(&points, &idx),
            sink,
            reduced,
        }
    }))
}

/// `min(r(D), k)` without exploring beyond level `k`.
pub fn rank_capped(m: &Model, d: &Divisor, k: usize) -> Result<i64> {
    d.check_on(m)?;
    if d.degree() < 0 {
        return Ok(-1);
    }
    let points = witness_points(m, d)?;
    let engine = MetricRankEngine::new(m, &points, d)?;
    let conf = engine.engine.chips(d)?;
    Ok(search(&engine, &conf, k as i64, false).rank)
}

fn reject(msg: impl Into<String>) -> Error {
    Error::CertificateRejected(msg.into())
}

fn for_each_multiset(n: usize, k: usize, f: &mut impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    fn rec(n: usize, k: usize, from: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
        if cur.len() == k {
            return f(cur);
        }
        for w in from..n {
            cur.push(w);
            rec(n, k, w, cur, f)?;
            cur.pop();
        }
        Ok(())
    }
    rec(n, k, 0, &mut Vec::new(), f)
}

/// Whether the witnesses contain a set known to determine ranks.
fn witnesses_determine_rank(m: &Model, witnesses: &[PointRef]) -> Result<bool> {
    if witnesses.is_empty() {
        return Ok(false);
    }
    if m.genus() == 0 {
        return Ok(true);
    }
    let has = |p: &PointRef| witnesses.contains(p);
    if let RankDeterminingSet::Points { points, .. } = rank_determining_set(m)? {
        if points.iter().all(has) {
            return Ok(true);
        }
    }
    // the vertex set of a loopless model determines ranks
    let loops: Vec<usize> = (0..m.edge_count()).filter(|&e| m.edge(e).is_loop()).collect();
    let cuts: Vec<PointRef> = loops.iter().map(|&e| m.midpoint(e)).collect();
    let r = refine_with_points(m, &cuts)?;
    Ok((0..r.model.vertex_count()).all(|v| has(&r.to_parent(&PointRef::Vertex(v)))))
}

/// Replays a certificate against `d`.
pub fn verify_certificate(m: &Model, d: &Divisor, cert: &RankCertificate) -> Result<()> {
    d.check_on(m)?;
    let g = m.genus() as i64;
    let deg = d.degree();
    if cert.by_degree {
        let expected = if deg < 0 {
            -1
        } else if deg > 2 * g - 2 {
            deg - g
        } else {
            return Err(reject("degree alone does not determine the rank"));
        };
        return if cert.rank == expected {
            Ok(())
        } else {
            Err(reject(format!("rank {} but the degree forces {expected}", cert.rank)))
        };
    }
    if cert.rank > deg {
        return Err(reject("rank exceeds degree"));
    }
    if cert.rank >= 0 {
        if !witnesses_determine_rank(m, &cert.witnesses)? {
            return Err(reject("witness set is not known to determine ranks"));
        }
        let table: HashMap<&Divisor, &Divisor> = cert.lower.iter().map(|(e, x)| (e, x)).collect();
        for_each_multiset(cert.witnesses.len(), cert.rank as usize, &mut |idx| {
            let e = multiset_divisor(&cert.witnesses, idx);
            let x = table
                .get(&e)
                .ok_or_else(|| reject(format!("no entry for E = {}", format_divisor(m, &e))))?;
            if !x.is_effective() && !x.is_zero() {
                return Err(reject("table entry is not effective"));
            }
            if !are_equivalent(m, x, &(d - &e))? {
                return Err(reject(format!("entry for {} is not equivalent", format_divisor(m, &e))));
            }
            Ok(())
        })?;
    }
    if cert.rank < deg {
        let u = cert.upper.as_ref().ok_or_else(|| reject("missing upper bound"))?;
        if u.f.degree() != cert.rank + 1 || !(u.f.is_effective() || u.f.is_zero()) {
            return Err(reject("upper-bound divisor has the wrong degree"));
        }
        if !are_equivalent(m, &u.reduced, &(d - &u.f))? {
            return Err(reject("reduced divisor is not equivalent to D − F"));
        }
        if u.reduced.coeff(&u.sink) >= 0 {
            return Err(reject("reduced divisor is not negative at the sink"));
        }
        let engine = MetricEngine::new(m, u.reduced.support().chain(std::iter::once(&u.sink)))?;
        let chips = engine.chips(&u.reduced)?;
        if !engine.is_reduced(&chips, engine.pos(&u.sink)?) {
            return Err(reject("upper-bound divisor is not reduced at its sink"));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpperWire {
    pub f: String,
    pub sink: String,
    pub reduced: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerWire {
    pub e: String,
    pub rep: String,
}

/// Serialisable certificate with divisors and points in text form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateWire {
    pub divisor: String,
    pub rank: i64,
    pub by_degree: bool,
    pub witnesses: Vec<String>,
    pub lower: Vec<LowerWire>,
    pub upper: Option<UpperWire>,
}

impl CertificateWire {
    pub fn new(m: &Model, d: &Divisor, c: &RankCertificate) -> Self {
        CertificateWire {
            divisor: format_divisor(m, d),
            rank: c.rank,
            by_degree: c.by_degree,
            witnesses: c.witnesses.iter().map(|p| m.format_point(p)).collect(),
            lower: c
                .lower
                .iter()
                .map(|(e, x)| LowerWire {
                    e: format_divisor(m, e),
                    rep: format_divisor(m, x),
                })
                .collect(),
            upper: c.upper.as_ref().map(|u| UpperWire {
                f: format_divisor(m, &u.f),
                sink: m.format_point(&u.sink),
                reduced: format_divisor(m, &u.reduced),
            }),
        }
    }

    pub fn decode(&self, m: &Model) -> Result<(Divisor, RankCertificate)> {
        let d = parse_divisor(m, &self.divisor)?;
        let cert = RankCertificate {
            rank: self.rank,
            by_degree: self.by_degree,
            witnesses: self.witnesses.iter().map(|p| m.parse_point(p)).collect::<Result<_>>()?,
            lower: self
                .lower
                .iter()
                .map(|l| Ok((parse_divisor(m, &l.e)?, parse_divisor(m, &l.rep)?)))
                .collect::<Result<_>>()?,
            upper: self
                .upper
                .as_ref()
                .map(|u| {
                    Ok::<_, Error>(UpperBound {
                        f: parse_divisor(m, &u.f)?,
                        sink: m.parse_point(&u.sink)?,
                        reduced: parse_divisor(m, &u.reduced)?,
                    })
                })
                .transpose()?,
        };
        Ok((d, cert))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiemannRochReport {
    pub degree: i64,
    pub genus: i64,
    pub rank: i64,
    pub dual_rank: i64,
    pub holds: bool,
}

pub fn riemann_roch_report(m: &Model, d: &Divisor, opts: &RankOptions) -> Result<RiemannRochReport> {
    let k = m.canonical_divisor();
    let r = rank_metric(m, d, opts)?.rank;
    let dual = rank_metric(m, &(&k - d), opts)?.rank;
    let g = m.genus() as i64;
    let deg = d.degree();
    Ok(RiemannRochReport {
        degree: deg,
        genus: g,
        rank: r,
        dual_rank: dual,
        holds: r - dual == deg - g + 1,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordReport {
    pub degree: i64,
    pub rank: i64,
    pub special: bool,
    pub effective: bool,
    /// `deg ≥ 2r`, required of special effective divisors.
    pub holds: bool,
}

pub fn clifford_check(m: &Model, d: &Divisor, opts: &RankOptions) -> Result<CliffordReport> {
    let k = m.canonical_divisor();
    let r = rank_metric(m, d, opts)?.rank;
    let special = rank_metric(m, &(&k - d), opts)?.rank >= 0;
    let effective = r >= 0;
    let deg = d.degree();
    Ok(CliffordReport {
        degree: deg,
        rank: r,
        special,
        effective,
        holds: !(special && effective) || deg >= 2 * r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::families;
    use crate::rational::{int, q};

    fn all_methods() -> [RankOptions; 2] {
        [
            RankOptions::default().with_method(RankMethod::Subdivide).exhaustive(),
            RankOptions::default().with_method(RankMethod::Rds).exhaustive(),
        ]
    }

    #[test]
    fn zero_and_negative() {
        let k4 = families::complete_graph(4);
        for o in all_methods() {
            assert_eq!(rank_metric(&k4, &Divisor::zero(), &o).unwrap().rank, 0);
            let neg = Divisor::from_chips([(PointRef::Vertex(0), -1)]);
            assert_eq!(rank_metric(&k4, &neg, &o).unwrap().rank, -1);
        }
    }

    #[test]
    fn canonical_ranks() {
        let b3 = families::banana(&[int(1), int(1), int(1)]);
        let k4 = families::complete_graph(4);
        let o = RankOptions::default().exhaustive();
        assert_eq!(rank_finite(&b3, &b3.canonical_divisor(), &o).unwrap().rank, 1);
        assert_eq!(rank_finite(&k4, &k4.canonical_divisor(), &o).unwrap().rank, 2);
    }

    #[test]
    fn circle_point() {
        let c = families::circle(int(1));
        let d = Divisor::point(PointRef::Interior(0, q(1, 3)));
        for o in all_methods() {
            assert_eq!(rank_metric(&c, &d, &o).unwrap().rank, 0);
        }
        let diff = Divisor::from_chips([
            (PointRef::Interior(0, q(1, 3)), 1),
            (PointRef::Interior(0, q(2, 3)), -1),
        ]);
        for o in all_methods() {
            assert_eq!(rank_metric(&c, &diff, &o).unwrap().rank, -1);
        }
    }

    #[test]
    fn banana_vertex_plus_midpoint() {
        let b3 = families::banana(&[int(1), int(1), int(1)]);
        let d = Divisor::from_chips([(PointRef::Vertex(0), 1), (PointRef::Interior(1, q(1, 2)), 1)]);
        let opts = RankOptions::default().with_method(RankMethod::Both).exhaustive();
        assert_eq!(rank_metric(&b3, &d, &opts).unwrap().rank, 0);
        let g12 = Divisor::from_chips([(PointRef::Vertex(0), 1), (PointRef::Vertex(1), 1)]);
        assert_eq!(rank_metric(&b3, &g12, &opts).unwrap().rank, 1);
    }

    #[test]
    fn fast_path_matches_search() {
        let k4 = families::complete_graph(4);
        let d = Divisor::from_chips([(PointRef::Vertex(0), 3), (PointRef::Interior(2, q(1, 2)), 2)]);
        let fast = rank_metric(&k4, &d, &RankOptions::default()).unwrap().rank;
        let slow = rank_metric(&k4, &d, &RankOptions::default().exhaustive()).unwrap().rank;
        assert_eq!(fast, 2);
        assert_eq!(fast, slow);
    }

    #[test]
    fn certificates_replay() {
        let b3 = families::banana(&[int(1), int(2), int(1)]);
        for d in [
            b3.canonical_divisor(),
            Divisor::from_chips([(PointRef::Interior(1, q(1, 2)), 1)]),
            Divisor::from_chips([(PointRef::Vertex(0), 2), (PointRef::Vertex(1), -1)]),
            Divisor::from_chips([(PointRef::Interior(0, q(1, 2)), 1), (PointRef::Vertex(1), -1)]),
        ] {
            for o in all_methods() {
                let out = rank_metric(&b3, &d, &o.certified()).unwrap();
                let cert = out.certificate.unwrap();
                verify_certificate(&b3, &d, &cert).unwrap();
                let wire = CertificateWire::new(&b3, &d, &cert);
                let json = serde_json::to_string(&wire).unwrap();
                let back: CertificateWire = serde_json::from_str(&json).unwrap();
                let (d2, c2) = back.decode(&b3).unwrap();
                assert_eq!(d2, d);
                verify_certificate(&b3, &d2, &c2).unwrap();
            }
        }
    }

    #[test]
    fn tampered_certificate_rejected() {
        let b3 = families::banana(&[int(1), int(1), int(1)]);
        let d = b3.canonical_divisor();
        let mut cert = rank_metric(&b3, &d, &RankOptions::default().exhaustive().certified())
            .unwrap()
            .certificate
            .unwrap();
        cert.rank = 2;
        assert!(matches!(
            verify_certificate(&b3, &d, &cert),
            Err(Error::CertificateRejected(_))
        ));
    }

    #[test]
    fn breaker_bounds() {
        let k4 = families::complete_graph(4);
        let k = k4.canonical_divisor();
        assert!(find_rank_breaker(&k4, &k, 2).unwrap().is_none());
        let f = find_rank_breaker(&k4, &k, 3).unwrap().unwrap();
        assert_eq!(f.f.degree(), 3);
        assert_eq!(rank_capped(&k4, &k, 1).unwrap(), 1);
        assert_eq!(rank_capped(&k4, &k, 5).unwrap(), 2);
    }

    #[test]
    fn riemann_roch_small() {
        let c = families::circle(int(1));
        let rep = riemann_roch_report(&c, &Divisor::point(PointRef::Vertex(0)), &RankOptions::default().exhaustive())
            .unwrap();
        assert_eq!((rep.rank, rep.dual_rank), (0, -1));
        assert!(rep.holds);
        let k4 = families::complete_graph(4);
        let rep = riemann_roch_report(&k4, &Divisor::zero(), &RankOptions::default().exhaustive()).unwrap();
        assert_eq!((rep.rank, rep.dual_rank), (0, 2));
        assert!(rep.holds);
    }

    #[test]
    fn clifford_cases() {
        let k4 = families::complete_graph(4);
        let rep = clifford_check(&k4, &k4.canonical_divisor(), &RankOptions::default()).unwrap();
        assert!(rep.special && rep.holds);
        assert_eq!((rep.degree, rep.rank), (4, 2));
        let b3 = families::banana(&[int(1), int(1), int(1)]);
        let g12 = Divisor::from_chips([(PointRef::Vertex(0), 1), (PointRef::Vertex(1), 1)]);
        let rep = clifford_check(&b3, &g12, &RankOptions::default()).unwrap();
        assert!(rep.special && rep.holds);
        assert_eq!(rep.rank, 1);
        let rep = clifford_check(&k4, &Divisor::zero(), &RankOptions::default()).unwrap();
        assert!(rep.special && rep.holds);
    }
}
