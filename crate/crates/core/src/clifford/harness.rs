//! Seeded verification campaigns for the Clifford-type theorem: a divisor
//! of degree `2r` and rank `r` with `2 ≤ r ≤ g − 2` forces a g¹₂.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::random_effective;
use crate::io::format_divisor;
use crate::metric_graph::Model;
use crate::rank::find_rank_breaker;

use super::g12::{compose_rg12, find_g12, G12Wire};

/// Sample offsets are multiples of `1/GRID` of an edge.
pub const GRID: i64 = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForwardCheck {
    pub r: usize,
    pub degree: i64,
    pub rank: i64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Campaign {
    pub r: usize,
    pub trials: usize,
    /// Samples shown to have rank below `r`.
    pub bounded: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Counterexample {
    pub r: usize,
    pub divisor: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub model: String,
    pub genus: usize,
    pub seed: u64,
    pub trials: usize,
    pub g12: Option<G12Wire>,
    pub forward: Vec<ForwardCheck>,
    pub campaigns: Vec<Campaign>,
    pub counterexamples: Vec<Counterexample>,
    pub passed: bool,
}

/// With a g¹₂ at hand, checks that `r·g¹₂` has rank exactly `r` for
/// `2 ≤ r ≤ g − 2`. Without one, samples `trials` effective divisors of
/// degree `2r` for each such `r` and proves each has rank below `r`.
pub fn clifford_theorem_harness(m: &Model, trials: usize, seed: u64) -> Result<HarnessReport> {
    let g = m.genus();
    if g < 4 {
        return Err(Error::GenusTooSmall(g));
    }
    let mut report = HarnessReport {
        model: m.name().to_string(),
        genus: g,
        seed,
        trials,
        g12: None,
        forward: Vec::new(),
        campaigns: Vec::new(),
        counterexamples: Vec::new(),
        passed: true,
    };
    if let Some(cert) = find_g12(m)? {
        for r in 2..=g - 2 {
            let check = match compose_rg12(m, &cert, r) {
                Ok(d) => ForwardCheck {
                    r,
                    degree: d.degree(),
                    rank: r as i64,
                    ok: true,
                },
                Err(Error::RankMismatch { found, .. }) => ForwardCheck {
                    r,
                    degree: 2 * r as i64,
                    rank: found,
                    ok: false,
                },
                Err(e) => return Err(e),
            };
            report.passed &= check.ok;
            report.forward.push(check);
        }
        report.g12 = Some(G12Wire::new(m, &cert));
        return Ok(report);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in 2..=g - 2 {
        let mut bounded = 0;
        for _ in 0..trials {
            let d = random_effective(&mut rng, m, 2 * r, GRID);
            if find_rank_breaker(m, &d, r)?.is_some() {
                bounded += 1;
            } else {
                report.counterexamples.push(Counterexample {
                    r,
                    divisor: format_divisor(m, &d),
                });
            }
        }
        report.campaigns.push(Campaign { r, trials, bounded });
    }
    report.counterexamples.sort();
    report.passed = report.counterexamples.is_empty();
    Ok(report)
}
