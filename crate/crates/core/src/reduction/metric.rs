//! Reduction on the metric graph itself.
//!
//! All lengths and chip positions are scaled to a common integer grid. One
//! step burns from the sink on the graph whose nodes are the model vertices
//! and the occupied points; an unburnt closed set is then fired by the
//! largest distance that keeps every chip inside its segment.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::metric_graph::{subdivide_to_grid, Model, PointRef};
use crate::rational::{lcm_of_denominators, Q};
use crate::reduction::finite::ChipGraph;

/// A point of the metric graph in grid coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pos {
    V(usize),
    E(usize, i64),
}

pub type Chips = BTreeMap<Pos, i64>;

fn add(chips: &mut Chips, p: Pos, c: i64) {
    let slot = chips.entry(p).or_insert(0);
    *slot += c;
    if *slot == 0 {
        chips.remove(&p);
    }
}

#[derive(Clone, Debug)]
struct Segment {
    a: usize,
    b: usize,
    edge: usize,
    oa: i64,
    ob: i64,
}

#[derive(Clone, Debug)]
pub struct MetricEngine {
    model: Model,
    scale: BigInt,
    len: Vec<i64>,
    genus: i64,
}

impl MetricEngine {
    /// Engine whose grid contains the model's vertices and the given points.
    pub fn new<'a>(m: &Model, pts: impl IntoIterator<Item = &'a PointRef>) -> Result<Self> {
        let pts: Vec<&PointRef> = pts.into_iter().collect();
        for p in &pts {
            m.check_point(p)?;
        }
        let offsets = pts.iter().filter_map(|p| match p {
            PointRef::Interior(_, t) => Some(t),
            PointRef::Vertex(_) => None,
        });
        let scale = lcm_of_denominators(m.edges().iter().map(|e| &e.length).chain(offsets));
        let sq = Q::from_integer(scale.clone());
        let len = m
            .edges()
            .iter()
            .map(|e| {
                (&e.length * &sq)
                    .to_integer()
                    .to_i64()
                    .filter(|&x| x < 1 << 40)
                    .ok_or(Error::ScaleOverflow)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MetricEngine {
            model: m.clone(),
            scale,
            len,
            genus: m.genus() as i64,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    pub fn pos(&self, p: &PointRef) -> Result<Pos> {
        match p {
            PointRef::Vertex(v) => Ok(Pos::V(*v)),
            PointRef::Interior(e, t) => {
                let x = t * Q::from_integer(self.scale.clone());
                if !x.is_integer() {
                    return Err(Error::InvalidPoint(format!(
                        "{} is not on the engine grid",
                        self.model.format_point(p)
                    )));
                }
                Ok(Pos::E(*e, x.to_integer().to_i64().ok_or(Error::ScaleOverflow)?))
            }
        }
    }

    pub fn point(&self, p: Pos) -> PointRef {
        match p {
            Pos::V(v) => PointRef::Vertex(v),
            Pos::E(e, x) => PointRef::Interior(e, Q::new(BigInt::from(x), self.scale.clone())),
        }
    }

    pub fn chips(&self, d: &Divisor) -> Result<Chips> {
        let mut out = Chips::new();
        for (p, c) in d.iter() {
            add(&mut out, self.pos(p)?, c);
        }
        Ok(out)
    }

    pub fn divisor(&self, c: &Chips) -> Divisor {
        Divisor::from_chips(c.iter().map(|(&p, &k)| (self.point(p), k)))
    }

    fn at_offset(&self, e: usize, x: i64) -> Pos {
        let edge = self.model.edge(e);
        if x == 0 {
            Pos::V(edge.tail)
        } else if x == self.len[e] {
            Pos::V(edge.head)
        } else {
            Pos::E(e, x)
        }
    }

    /// Reduces an effective-off-the-sink configuration at `sink`.
    pub fn reduce(&self, chips: &Chips, sink: Pos) -> Chips {
        let mut cur = chips.clone();
        while let Some(next) = self.step(&cur, sink) {
            cur = next;
        }
        cur
    }

    /// Nonnegative off the sink and burnt entirely by a fire started there.
    pub fn is_reduced(&self, chips: &Chips, sink: Pos) -> bool {
        chips.iter().all(|(&p, &c)| p == sink || c >= 0) && self.step(chips, sink).is_none()
    }

    /// One burn-and-fire step, or `None` when everything burns.
    fn step(&self, chips: &Chips, sink: Pos) -> Option<Chips> {
        let n = self.model.vertex_count();
        let mut count: Vec<i64> = vec![0; n];
        let mut on_edge: Vec<Vec<(i64, usize)>> = vec![Vec::new(); self.len.len()];
        let mut pos_of: Vec<Pos> = (0..n).map(Pos::V).collect();
        let mut touch = |p: Pos, c: i64, count: &mut Vec<i64>, pos_of: &mut Vec<Pos>| -> usize {
            match p {
                Pos::V(v) => {
                    count[v] += c;
                    v
                }
                Pos::E(e, x) => {
                    if let Some(&(_, id)) = on_edge[e].iter().find(|(y, _)| *y == x) {
                        count[id] += c;
                        return id;
                    }
                    let id = count.len();
                    count.push(c);
                    pos_of.push(p);
                    on_edge[e].push((x, id));
                    id
                }
            }
        };
        for (&p, &c) in chips {
            touch(p, c, &mut count, &mut pos_of);
        }
        let sink_node = touch(sink, 0, &mut count, &mut pos_of);
        let total = count.len();
        let mut segs: Vec<Segment> = Vec::new();
        for (e, list) in on_edge.iter_mut().enumerate() {
            list.sort_unstable();
            let edge = self.model.edge(e);
            let mut prev = (0i64, edge.tail);
            for &(x, id) in list.iter().chain(std::iter::once(&(self.len[e], edge.head))) {
                if prev.1 != id {
                    segs.push(Segment {
                        a: prev.1,
                        b: id,
                        edge: e,
                        oa: prev.0,
                        ob: x,
                    });
                }
                prev = (x, id);
            }
        }
        let mut inc: Vec<Vec<usize>> = vec![Vec::new(); total];
        for (i, s) in segs.iter().enumerate() {
            inc[s.a].push(i);
            inc[s.b].push(i);
        }
        let mut burnt = vec![false; total];
        let mut hits = vec![0i64; total];
        let mut stack = vec![sink_node];
        burnt[sink_node] = true;
        while let Some(v) = stack.pop() {
            for &si in &inc[v] {
                let s = &segs[si];
                let u = if s.a == v { s.b } else { s.a };
                if !burnt[u] {
                    hits[u] += 1;
                    if hits[u] > count[u] {
                        burnt[u] = true;
                        stack.push(u);
                    }
                }
            }
        }
        if burnt.iter().all(|&b| b) {
            return None;
        }
        let mut delta = i64::MAX;
        for s in &segs {
            if burnt[s.a] != burnt[s.b] {
                delta = delta.min(s.ob - s.oa);
            }
        }
        let mut next = chips.clone();
        for s in &segs {
            if burnt[s.a] == burnt[s.b] {
                continue;
            }
            let (from, to) = if burnt[s.a] {
                (s.b, self.at_offset(s.edge, s.ob - delta))
            } else {
                (s.a, self.at_offset(s.edge, s.oa + delta))
            };
            add(&mut next, pos_of[from], -1);
            add(&mut next, to, 1);
        }
        Some(next)
    }

    /// Effective configuration equivalent to `d`, if any.
    pub fn effective_rep(&self, d: &Chips) -> Option<Chips> {
        let mut x: Chips = d.iter().filter(|(_, &c)| c > 0).map(|(&p, &c)| (p, c)).collect();
        for (&p, &c) in d.iter().filter(|(_, &c)| c < 0) {
            x = self.reduce(&x, p);
            let have = x.get(&p).copied().unwrap_or(0);
            if have < -c {
                return None;
            }
            add(&mut x, p, c);
        }
        Some(x)
    }

    /// Reduced form of an arbitrary configuration at `sink`.
    pub fn reduce_general(&self, d: &Chips, sink: Pos) -> Chips {
        let off_sink_debt: i64 = d
            .iter()
            .filter(|(&p, &c)| p != sink && c < 0)
            .map(|(_, &c)| -c)
            .sum();
        if off_sink_debt == 0 {
            return self.reduce(d, sink);
        }
        let debt: i64 = d.values().filter(|&&c| c < 0).map(|c| -c).sum();
        let extra = self.genus + debt;
        let mut lifted = d.clone();
        add(&mut lifted, sink, extra);
        let rep = self
            .effective_rep(&lifted)
            .expect("a divisor of degree at least the genus is effective up to equivalence");
        let mut out = self.reduce(&rep, sink);
        add(&mut out, sink, -extra);
        out
    }

    pub fn reduce_divisor(&self, d: &Divisor, sink: &PointRef) -> Result<Divisor> {
        let c = self.chips(d)?;
        Ok(self.divisor(&self.reduce_general(&c, self.pos(sink)?)))
    }
}

/// The reduced divisor equivalent to `d` with respect to `p`.
pub fn p_reduce_metric(m: &Model, d: &Divisor, p: &PointRef) -> Result<Divisor> {
    let engine = MetricEngine::new(m, d.support().chain(std::iter::once(p)))?;
    engine.reduce_divisor(d, p)
}

/// Same result by the literal route: subdivide to a unit grid containing
/// the support and `p`, reduce on the finite graph, map back.
pub fn p_reduce_by_subdivision(m: &Model, d: &Divisor, p: &PointRef, cap: u64) -> Result<Divisor> {
    d.check_on(m)?;
    let r = subdivide_to_grid(m, d.support().chain(std::iter::once(p)), true, cap)?;
    let child = r.divisor_to_child(d);
    let PointRef::Vertex(q) = r.to_child(p) else {
        unreachable!("grid contains p")
    };
    let mut v = child.to_vertex_vec(r.model.vertex_count());
    ChipGraph::new(&r.model).reduce(&mut v, q);
    Ok(r.divisor_to_parent(&Divisor::from_vertex_vec(&v)))
}

/// Whether `d` is linearly equivalent to an effective divisor.
pub fn has_effective_rep(m: &Model, d: &Divisor) -> Result<Option<Divisor>> {
    if d.degree() < 0 {
        return Ok(None);
    }
    let engine = MetricEngine::new(m, d.support())?;
    let c = engine.chips(d)?;
    Ok(engine.effective_rep(&c).map(|x| engine.divisor(&x)))
}

impl Pos {
    pub fn is_vertex(&self) -> bool {
        matches!(self, Pos::V(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::families;
    use crate::rational::{int, q};

    #[test]
    fn circle_point_is_reduced_elsewhere() {
        let c = families::circle(int(1));
        let qpt = PointRef::Interior(0, q(1, 3));
        let d = Divisor::point(qpt.clone());
        assert_eq!(p_reduce_metric(&c, &d, &PointRef::Vertex(0)).unwrap(), d);
    }

    #[test]
    fn tree_collapses_to_sink() {
        let seg = families::segment(int(2));
        let d = Divisor::from_chips([
            (PointRef::Interior(0, q(1, 2)), 2),
            (PointRef::Vertex(1), 1),
        ]);
        let p = PointRef::Interior(0, q(3, 2));
        assert_eq!(
            p_reduce_metric(&seg, &d, &p).unwrap(),
            Divisor::from_chips([(p.clone(), 3)])
        );
    }

    #[test]
    fn banana_double_midpoint_moves() {
        let b3 = families::banana(&[int(1), int(1), int(1)]);
        let d = Divisor::from_chips([(PointRef::Interior(1, q(1, 2)), 2)]);
        let r = p_reduce_metric(&b3, &d, &PointRef::Vertex(0)).unwrap();
        assert_eq!(r, Divisor::from_chips([(PointRef::Vertex(0), 1), (PointRef::Vertex(1), 1)]));
    }

    #[test]
    fn agrees_with_subdivision_route() {
        let b3 = families::banana(&[int(1), q(1, 2), q(3, 2)]);
        let d = Divisor::from_chips([
            (PointRef::Interior(2, q(1, 4)), 2),
            (PointRef::Interior(0, q(3, 4)), -1),
            (PointRef::Vertex(1), 1),
        ]);
        for p in [PointRef::Vertex(0), PointRef::Interior(1, q(1, 4))] {
            assert_eq!(
                p_reduce_metric(&b3, &d, &p).unwrap(),
                p_reduce_by_subdivision(&b3, &d, &p, 10_000).unwrap()
            );
        }
    }

    #[test]
    fn effective_rep_on_circle() {
        let c = families::circle(int(1));
        let a = PointRef::Interior(0, q(1, 4));
        let b = PointRef::Interior(0, q(3, 4));
        let d = Divisor::from_chips([(a.clone(), 1), (b.clone(), -1)]);
        assert!(has_effective_rep(&c, &d).unwrap().is_none());
        let d2 = Divisor::from_chips([(a, 2), (b, -1)]);
        assert!(has_effective_rep(&c, &d2).unwrap().is_some());
    }
}
