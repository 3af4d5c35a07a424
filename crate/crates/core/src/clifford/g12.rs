//! Degree-2 rank-1 divisors: construction, certification and multiples.

use serde::{Deserialize, Serialize};

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::metric_graph::{rank_determining_set, Model, PointRef, RankDeterminingSet};
use crate::rank::{find_rank_breaker, rank_metric, verify_certificate, witness_points, CertificateWire, RankCertificate, RankMethod, RankOptions};

use super::involution::{find_involutions, quotient_is_tree, Involution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum G12Source {
    TreeWithLoops,
    Involution,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct G12Certificate {
    pub divisor: Divisor,
    pub rank: RankCertificate,
    pub source: G12Source,
    /// The involution producing the divisor, acting on the canonical model.
    pub involution: Option<Involution>,
}

impl G12Certificate {
    /// Replays the rank certificate.
    pub fn verify(&self, m: &Model) -> Result<()> {
        if self.divisor.degree() != 2 || !self.divisor.is_effective() {
            return Err(Error::CertificateRejected("divisor is not effective of degree 2".into()));
        }
        if self.rank.rank != 1 {
            return Err(Error::CertificateRejected(format!("claimed rank {} instead of 1", self.rank.rank)));
        }
        verify_certificate(m, &self.divisor, &self.rank)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct G12Wire {
    pub source: G12Source,
    pub certificate: CertificateWire,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub involution: Option<Involution>,
}

impl G12Wire {
    pub fn new(m: &Model, c: &G12Certificate) -> Self {
        G12Wire {
            source: c.source,
            certificate: CertificateWire::new(m, &c.divisor, &c.rank),
            involution: c.involution.clone(),
        }
    }

    pub fn decode(&self, m: &Model) -> Result<G12Certificate> {
        let (divisor, rank) = self.certificate.decode(m)?;
        Ok(G12Certificate {
            divisor,
            rank,
            source: self.source,
            involution: self.involution.clone(),
        })
    }
}

/// `2·P₁` for the attachment point `P₁` of the first loop, when every
/// cycle of the graph is a loop.
///
/// On such a graph, `2P ∼ 2P′` for any two points of the tree, and a point
/// `Q` on a loop satisfies `Q + Q′ ∼ 2P` for its mirror image `Q′` across
/// the loop and the loop's attachment point `P`. Every witness is a vertex
/// or a loop midpoint, its own mirror image, so `D − w ∼ w`.
pub fn tree_with_loops_g12(m: &Model) -> Result<G12Certificate> {
    let loops = match rank_determining_set(m) {
        Ok(RankDeterminingSet::TreeWithLoops { loops }) => loops,
        _ => return Err(Error::NotTreeWithLoops),
    };
    let p1 = PointRef::Vertex(m.edge(loops[0]).tail);
    let divisor = Divisor::from_chips([(p1, 2)]);
    let witnesses = witness_points(m, &divisor)?;
    let lower = witnesses
        .iter()
        .map(|w| (Divisor::point(w.clone()), Divisor::point(w.clone())))
        .collect();
    let upper = find_rank_breaker(m, &divisor, 2)?.ok_or(Error::RankMismatch { expected: 1, found: 2 })?;
    let rank = RankCertificate {
        rank: 1,
        by_degree: false,
        witnesses,
        lower,
        upper: Some(upper),
    };
    let cert = G12Certificate {
        divisor,
        rank,
        source: G12Source::TreeWithLoops,
        involution: None,
    };
    cert.verify(m)?;
    Ok(cert)
}

fn certify(m: &Model, d: &Divisor) -> Result<Option<RankCertificate>> {
    let opts = RankOptions::default().with_method(RankMethod::Rds).exhaustive().certified();
    let out = rank_metric(m, d, &opts)?;
    Ok((out.rank == 1).then(|| out.certificate.expect("certificate requested")))
}

/// A certified g¹₂, or `None` when neither the tree-with-loops construction
/// nor any involution with a tree quotient yields one.
pub fn find_g12(m: &Model) -> Result<Option<G12Certificate>> {
    let g = m.genus();
    if g < 2 {
        return Err(Error::GenusTooSmall(g));
    }
    if let Ok(RankDeterminingSet::TreeWithLoops { .. }) = rank_determining_set(m) {
        return tree_with_loops_g12(m).map(Some);
    }
    let set = find_involutions(m)?;
    let c = set.canonical.model();
    for iota in &set.involutions {
        if iota.is_identity() || !quotient_is_tree(c, iota)? {
            continue;
        }
        let folded = (0..c.edge_count())
            .filter(|&e| iota.edges[e] == e && iota.flipped[e])
            .map(|e| [c.midpoint(e), c.midpoint(e)]);
        let orbits = (0..c.vertex_count()).map(|v| [PointRef::Vertex(v), iota.apply(c, &PointRef::Vertex(v))]);
        let mut tried: Vec<Divisor> = Vec::new();
        for pair in folded.chain(orbits) {
            let d = Divisor::from_chips(pair.iter().map(|p| (set.canonical.to_original(m, p), 1)));
            if tried.contains(&d) {
                continue;
            }
            if let Some(rank) = certify(m, &d)? {
                return Ok(Some(G12Certificate {
                    divisor: d,
                    rank,
                    source: G12Source::Involution,
                    involution: Some(iota.clone()),
                }));
            }
            tried.push(d);
        }
    }
    Ok(None)
}

/// `r` times the certified g¹₂, with its rank checked to be exactly `r`.
pub fn compose_rg12(m: &Model, cert: &G12Certificate, r: usize) -> Result<Divisor> {
    let g = m.genus();
    if r < 1 || r + 1 > g {
        return Err(Error::InvalidSpec(format!("r = {r} is outside 1..={}", g.saturating_sub(1))));
    }
    let d = r as i64 * &cert.divisor;
    let found = rank_metric(m, &d, &RankOptions::default())?.rank;
    if found != r as i64 {
        return Err(Error::RankMismatch {
            expected: r as i64,
            found,
        });
    }
    Ok(d)
}
