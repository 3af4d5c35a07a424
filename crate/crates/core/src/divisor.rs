//! Divisors and piecewise-linear rational functions.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::metric_graph::{Model, PointRef, Refinement};
use crate::rational::{to_i64, Q};

/// Finite integer combination of points. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Divisor {
    chips: BTreeMap<PointRef, i64>,
}

impl Divisor {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn point(p: PointRef) -> Self {
        Self::from_chips([(p, 1)])
    }

    pub fn from_chips(chips: impl IntoIterator<Item = (PointRef, i64)>) -> Self {
        let mut d = Self::zero();
        for (p, c) in chips {
            d.add_chip(p, c);
        }
        d
    }

    /// Vertex-supported divisor from a coefficient vector indexed by vertex.
    pub fn from_vertex_vec(coeffs: &[i64]) -> Self {
        Self::from_chips(
            coeffs
                .iter()
                .enumerate()
                .map(|(v, &c)| (PointRef::Vertex(v), c)),
        )
    }

    pub fn add_chip(&mut self, p: PointRef, c: i64) {
        if c == 0 {
            return;
        }
        match self.chips.entry(p) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if *slot.get() == 0 {
                    slot.remove();
                }
            }
        }
    }

    pub fn coeff(&self, p: &PointRef) -> i64 {
        self.chips.get(p).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> i64 {
        self.chips.values().sum()
    }

    pub fn support(&self) -> impl Iterator<Item = &PointRef> {
        self.chips.keys()
    }

    pub fn support_len(&self) -> usize {
        self.chips.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PointRef, i64)> {
        self.chips.iter().map(|(p, &c)| (p, c))
    }

    pub fn is_zero(&self) -> bool {
        self.chips.is_empty()
    }

    pub fn is_effective(&self) -> bool {
        self.chips.values().all(|&c| c > 0)
    }

    pub fn is_vertex_supported(&self) -> bool {
        self.chips.keys().all(PointRef::is_vertex)
    }

    pub fn positive_part(&self) -> Divisor {
        Divisor {
            chips: self
                .chips
                .iter()
                .filter(|(_, &c)| c > 0)
                .map(|(p, &c)| (p.clone(), c))
                .collect(),
        }
    }

    /// The effective divisor `max(-D, 0)`.
    pub fn negative_part(&self) -> Divisor {
        Divisor {
            chips: self
                .chips
                .iter()
                .filter(|(_, &c)| c < 0)
                .map(|(p, &c)| (p.clone(), -c))
                .collect(),
        }
    }

    /// Coefficients on vertices `0..n`; panics on interior support.
    pub fn to_vertex_vec(&self, n: usize) -> Vec<i64> {
        let mut out = vec![0; n];
        for (p, c) in self.iter() {
            match p {
                PointRef::Vertex(v) => out[*v] = c,
                PointRef::Interior(..) => panic!("divisor has interior support"),
            }
        }
        out
    }

    pub fn check_on(&self, m: &Model) -> Result<()> {
        self.support().try_for_each(|p| m.check_point(p))
    }
}

impl AddAssign<&Divisor> for Divisor {
    fn add_assign(&mut self, rhs: &Divisor) {
        for (p, c) in rhs.iter() {
            self.add_chip(p.clone(), c);
        }
    }
}

impl SubAssign<&Divisor> for Divisor {
    fn sub_assign(&mut self, rhs: &Divisor) {
        for (p, c) in rhs.iter() {
            self.add_chip(p.clone(), -c);
        }
    }
}

impl Add<&Divisor> for &Divisor {
    type Output = Divisor;
    fn add(self, rhs: &Divisor) -> Divisor {
        let mut d = self.clone();
        d += rhs;
        d
    }
}

impl Sub<&Divisor> for &Divisor {
    type Output = Divisor;
    fn sub(self, rhs: &Divisor) -> Divisor {
        let mut d = self.clone();
        d -= rhs;
        d
    }
}

impl Add for Divisor {
    type Output = Divisor;
    fn add(mut self, rhs: Divisor) -> Divisor {
        self += &rhs;
        self
    }
}

impl Sub for Divisor {
    type Output = Divisor;
    fn sub(mut self, rhs: Divisor) -> Divisor {
        self -= &rhs;
        self
    }
}

impl Neg for &Divisor {
    type Output = Divisor;
    fn neg(self) -> Divisor {
        Divisor {
            chips: self.chips.iter().map(|(p, &c)| (p.clone(), -c)).collect(),
        }
    }
}

impl Mul<&Divisor> for i64 {
    type Output = Divisor;
    fn mul(self, rhs: &Divisor) -> Divisor {
        if self == 0 {
            return Divisor::zero();
        }
        Divisor {
            chips: rhs.chips.iter().map(|(p, &c)| (p.clone(), self * c)).collect(),
        }
    }
}

/// Continuous piecewise-linear function stored edge by edge. Each edge
/// carries its breakpoints `(offset, value)` in increasing offset order,
/// starting at offset 0 and ending at the edge length; the function is
/// affine in between.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlFunction {
    pub pieces: Vec<Vec<(Q, Q)>>,
}

impl PlFunction {
    pub fn constant(m: &Model, c: Q) -> Self {
        PlFunction {
            pieces: m
                .edges()
                .iter()
                .map(|e| vec![(Q::zero(), c.clone()), (e.length.clone(), c.clone())])
                .collect(),
        }
    }

    /// Function affine on every edge, given by its values at vertices.
    pub fn from_vertex_values(m: &Model, values: &[Q]) -> Self {
        PlFunction {
            pieces: m
                .edges()
                .iter()
                .map(|e| {
                    vec![
                        (Q::zero(), values[e.tail].clone()),
                        (e.length.clone(), values[e.head].clone()),
                    ]
                })
                .collect(),
        }
    }

    pub fn value_on_edge(&self, e: usize, t: &Q) -> Q {
        let pts = &self.pieces[e];
        for w in pts.windows(2) {
            let (a, fa) = &w[0];
            let (b, fb) = &w[1];
            if t >= a && t <= b {
                return fa + (fb - fa) * (t - a) / (b - a);
            }
        }
        panic!("offset outside edge")
    }

    pub fn value_at(&self, m: &Model, p: &PointRef) -> Q {
        match p {
            PointRef::Vertex(v) => {
                let e = m.incident(*v)[0];
                let pts = &self.pieces[e];
                if m.edge(e).tail == *v {
                    pts[0].1.clone()
                } else {
                    pts[pts.len() - 1].1.clone()
                }
            }
            PointRef::Interior(e, t) => self.value_on_edge(*e, t),
        }
    }

    fn merged_offsets(a: &[(Q, Q)], b: &[(Q, Q)]) -> Vec<Q> {
        let mut ts: Vec<Q> = a.iter().chain(b).map(|(t, _)| t.clone()).collect();
        ts.sort();
        ts.dedup();
        ts
    }

    pub fn add(&self, other: &PlFunction) -> PlFunction {
        self.combine(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &PlFunction) -> PlFunction {
        self.combine(other, |x, y| x - y)
    }

    fn combine(&self, other: &PlFunction, op: impl Fn(Q, Q) -> Q) -> PlFunction {
        let pieces = (0..self.pieces.len())
            .map(|e| {
                Self::merged_offsets(&self.pieces[e], &other.pieces[e])
                    .into_iter()
                    .map(|t| {
                        let v = op(self.value_on_edge(e, &t), other.value_on_edge(e, &t));
                        (t, v)
                    })
                    .collect()
            })
            .collect();
        PlFunction { pieces }.simplified()
    }

    /// Drops breakpoints where the slope does not change.
    pub fn simplified(mut self) -> PlFunction {
        for pts in &mut self.pieces {
            let mut out: Vec<(Q, Q)> = Vec::with_capacity(pts.len());
            for p in pts.drain(..) {
                if out.len() >= 2 {
                    let (t0, v0) = &out[out.len() - 2];
                    let (t1, v1) = &out[out.len() - 1];
                    if (v1 - v0) * (&p.0 - t1) == (&p.1 - v1) * (t1 - t0) {
                        out.pop();
                    }
                }
                out.push(p);
            }
            *pts = out;
        }
        self
    }

    /// The same function on a refined (and possibly rescaled) model, with
    /// values multiplied by the refinement's scale so slopes are preserved.
    pub fn to_refinement(&self, r: &Refinement) -> PlFunction {
        let s = r.scale();
        let pieces = (0..r.model.edge_count())
            .map(|c| {
                let (e, a, b) = r.parent_edge(c);
                let mut ts: Vec<Q> = self.pieces[e]
                    .iter()
                    .map(|(t, _)| t.clone())
                    .filter(|t| t > a && t < b)
                    .collect();
                ts.insert(0, a.clone());
                ts.push(b.clone());
                ts.into_iter()
                    .map(|t| {
                        let v = self.value_on_edge(e, &t) * s;
                        ((t - a) * s, v)
                    })
                    .collect()
            })
            .collect();
        PlFunction { pieces }
    }
}

pub fn validate_pl(f: &PlFunction, m: &Model) -> Result<()> {
    if f.pieces.len() != m.edge_count() {
        return Err(Error::MalformedFunction(format!(
            "{} edge entries for a model with {} edges",
            f.pieces.len(),
            m.edge_count()
        )));
    }
    let mut at_vertex: Vec<Option<&Q>> = vec![None; m.vertex_count()];
    for (e, pts) in f.pieces.iter().enumerate() {
        let edge = m.edge(e);
        if pts.len() < 2 || !pts[0].0.is_zero() || pts[pts.len() - 1].0 != edge.length {
            return Err(Error::MalformedFunction(format!(
                "edge `{}` must list breakpoints from 0 to its length",
                edge.id
            )));
        }
        for (k, w) in pts.windows(2).enumerate() {
            let dt = &w[1].0 - &w[0].0;
            if dt <= Q::zero() {
                return Err(Error::MalformedFunction(format!(
                    "breakpoints on edge `{}` are not increasing",
                    edge.id
                )));
            }
            if !((&w[1].1 - &w[0].1) / dt).is_integer() {
                return Err(Error::NonIntegerSlope {
                    edge: edge.id.clone(),
                    segment: k,
                });
            }
        }
        for (v, val) in [(edge.tail, &pts[0].1), (edge.head, &pts[pts.len() - 1].1)] {
            match at_vertex[v] {
                Some(prev) if prev != val => {
                    return Err(Error::DiscontinuousAtVertex(m.vertex_id(v).to_string()))
                }
                _ => at_vertex[v] = Some(val),
            }
        }
    }
    Ok(())
}

/// Principal divisor of `f`: at every point, the sum of the slopes of `f`
/// leaving that point.
pub fn div_of_function(f: &PlFunction, m: &Model) -> Result<Divisor> {
    validate_pl(f, m)?;
    let slope = |a: &(Q, Q), b: &(Q, Q)| -> i64 {
        to_i64(&((&b.1 - &a.1) / (&b.0 - &a.0))).expect("slope fits in i64")
    };
    let mut d = Divisor::zero();
    for (e, pts) in f.pieces.iter().enumerate() {
        let edge = m.edge(e);
        let n = pts.len();
        d.add_chip(PointRef::Vertex(edge.tail), slope(&pts[0], &pts[1]));
        d.add_chip(PointRef::Vertex(edge.head), -slope(&pts[n - 2], &pts[n - 1]));
        for k in 1..n - 1 {
            let c = slope(&pts[k], &pts[k + 1]) - slope(&pts[k - 1], &pts[k]);
            d.add_chip(PointRef::Interior(e, pts[k].0.clone()), c);
        }
    }
    Ok(d)
}
