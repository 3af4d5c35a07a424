//! Tropical Jacobian in coordinates given by a fundamental-cycle basis.
//!
//! A point of the graph is sent to the vector of pairings of a path from
//! the root with the basis cycles, where an edge traversed for length `x`
//! pairs with a cycle through that edge as `±x`. The period lattice is then
//! the column lattice of the Gram matrix of the basis, so two divisors of
//! equal degree are equivalent exactly when their difference maps into it.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::divisor::{Divisor, PlFunction};
use crate::error::{Error, Result};
use crate::metric_graph::{subdivide_to_grid, Model, PointRef, SpanningTree};
use crate::rational::{fmt_q, Q};
use crate::reduction::finite::ChipGraph;

/// Cap on the unit subdivision used to build equivalence witnesses.
pub const WITNESS_SUBDIVISION_CAP: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodLattice {
    tree: SpanningTree,
    /// Edge-coefficient vectors of the basis cycles.
    pub basis: Vec<Vec<i64>>,
    pub gram: Vec<Vec<Q>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AjVector {
    #[serde(with = "q_vec")]
    pub coords: Vec<Q>,
    pub base: String,
    pub degree: i64,
}

mod q_vec {
    use super::Q;
    use crate::rational::{fmt_q, parse_q};
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(fmt_q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| parse_q(s).map_err(D::Error::custom))
            .collect()
    }
}

impl PeriodLattice {
    /// Lattice for an explicit cycle basis; the spanning tree used for
    /// Abel–Jacobi paths is still the breadth-first one.
    pub fn from_basis(m: &Model, basis: Vec<Vec<i64>>) -> Self {
        let gram = basis
            .iter()
            .map(|a| {
                basis
                    .iter()
                    .map(|b| {
                        m.edges()
                            .iter()
                            .enumerate()
                            .map(|(e, edge)| &edge.length * Q::from_integer((a[e] * b[e]).into()))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        PeriodLattice {
            tree: SpanningTree::bfs(m),
            basis,
            gram,
        }
    }

    pub fn genus(&self) -> usize {
        self.basis.len()
    }

    pub fn tree(&self) -> &SpanningTree {
        &self.tree
    }

    /// Leading principal minors, all positive for a valid lattice.
    pub fn leading_minors(&self) -> Vec<Q> {
        (1..=self.genus())
            .map(|k| {
                let sub: Vec<Vec<Q>> = self.gram[..k].iter().map(|r| r[..k].to_vec()).collect();
                determinant(sub)
            })
            .collect()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.leading_minors().iter().all(|d| d > &Q::zero())
    }

    /// Signed length of each edge on a path from the root to `p`.
    fn path_lengths(&self, m: &Model, p: &PointRef) -> Vec<Q> {
        let mut c = vec![Q::zero(); m.edge_count()];
        let (start, partial) = match p {
            PointRef::Vertex(v) => (*v, None),
            PointRef::Interior(e, t) => (m.edge(*e).tail, Some((*e, t))),
        };
        for (e, s) in self.tree.chain_to_root(m, start) {
            // the chain runs towards the root; the path runs away from it
            c[e] -= &m.edge(e).length * Q::from_integer(s.into());
        }
        if let Some((e, t)) = partial {
            c[e] += t;
        }
        c
    }

    fn point_vector(&self, m: &Model, p: &PointRef) -> Vec<Q> {
        let c = self.path_lengths(m, p);
        self.basis
            .iter()
            .map(|g| {
                g.iter()
                    .zip(&c)
                    .filter(|(&k, _)| k != 0)
                    .map(|(&k, x)| x * Q::from_integer(k.into()))
                    .sum()
            })
            .collect()
    }
}

pub fn period_basis(m: &Model) -> Result<PeriodLattice> {
    if m.genus() == 0 {
        return Err(Error::TreeInput);
    }
    let tree = SpanningTree::bfs(m);
    let basis = tree
        .non_tree_edges()
        .into_iter()
        .map(|e| tree.fundamental_cycle(m, e))
        .collect();
    Ok(PeriodLattice::from_basis(m, basis))
}

fn determinant(mut a: Vec<Vec<Q>>) -> Q {
    let n = a.len();
    let mut det = Q::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Q::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= &a[col][col];
        for r in col + 1..n {
            let f = &a[r][col] / &a[col][col];
            if f.is_zero() {
                continue;
            }
            for k in col..n {
                let sub = &f * &a[col][k];
                a[r][k] -= sub;
            }
        }
    }
    det
}

/// Solves `a x = b` exactly for invertible `a`.
fn solve(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, x)| row.iter().cloned().chain(std::iter::once(x.clone())).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(piv, col);
        let p = m[col][col].clone();
        for k in col..=n {
            m[col][k] = &m[col][k] / &p;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for k in col..=n {
                let sub = &f * &m[col][k];
                m[r][k] -= sub;
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

pub fn abel_jacobi(m: &Model, lattice: &PeriodLattice, d: &Divisor, base: &PointRef) -> Result<AjVector> {
    d.check_on(m)?;
    m.check_point(base)?;
    let b = lattice.point_vector(m, base);
    let mut coords = vec![Q::zero(); lattice.genus()];
    for (p, c) in d.iter() {
        let v = lattice.point_vector(m, p);
        let c = Q::from_integer(c.into());
        for i in 0..coords.len() {
            coords[i] += (&v[i] - &b[i]) * &c;
        }
    }
    Ok(AjVector {
        coords,
        base: m.format_point(base),
        degree: d.degree(),
    })
}

/// Whether `v` is an integer combination of the Gram matrix columns.
pub fn is_lattice_member(lattice: &PeriodLattice, v: &[Q]) -> bool {
    if v.iter().all(Zero::is_zero) {
        return true;
    }
    solve(&lattice.gram, v).is_some_and(|x| x.iter().all(|c| c.is_integer()))
}

pub fn are_equivalent(m: &Model, d1: &Divisor, d2: &Divisor) -> Result<bool> {
    d1.check_on(m)?;
    d2.check_on(m)?;
    if d1.degree() != d2.degree() {
        return Ok(false);
    }
    if m.genus() == 0 {
        return Ok(true);
    }
    let lattice = period_basis(m)?;
    let diff = d1 - d2;
    let aj = abel_jacobi(m, &lattice, &diff, &PointRef::Vertex(0))?;
    Ok(is_lattice_member(&lattice, &aj.coords))
}

/// A piecewise-linear `f` with `div(f) = D₂ − D₁`.
pub fn equivalence_witness(m: &Model, d1: &Divisor, d2: &Divisor) -> Result<PlFunction> {
    if !are_equivalent(m, d1, d2)? {
        return Err(Error::NotEquivalent);
    }
    let r = subdivide_to_grid(m, d1.support().chain(d2.support()), true, WITNESS_SUBDIVISION_CAP)?;
    let n = r.model.vertex_count();
    let g = ChipGraph::new(&r.model);
    let mut v1 = r.divisor_to_child(d1).to_vertex_vec(n);
    let mut v2 = r.divisor_to_child(d2).to_vertex_vec(n);
    let s1 = g.reduce(&mut v1, 0);
    let s2 = g.reduce(&mut v2, 0);
    debug_assert_eq!(v1, v2);
    let scale = r.scale().clone();
    let phi: Vec<Q> = (0..n)
        .map(|v| Q::from_integer((s1[v] - s2[v]).into()) / &scale)
        .collect();
    let pieces = (0..m.edge_count())
        .map(|e| {
            let mut pts = Vec::new();
            for (k, &c) in r.pieces(e).iter().enumerate() {
                let (_, a, b) = r.parent_edge(c);
                let edge = r.model.edge(c);
                if k == 0 {
                    pts.push((a.clone(), phi[edge.tail].clone()));
                }
                pts.push((b.clone(), phi[edge.head].clone()));
            }
            pts
        })
        .collect();
    Ok(PlFunction { pieces }.simplified())
}

/// Human-readable coordinates, e.g. `[1/2, -1/3]`.
pub fn format_coords(v: &[Q]) -> String {
    let parts: Vec<String> = v.iter().map(fmt_q).collect();
    format!("[{}]", parts.join(", "))
}
