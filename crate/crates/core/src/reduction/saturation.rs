//! Reducedness through the subset characterisation, and two uses of it:
//! deciding when a linear system is a single divisor, and moving a
//! non-reduced divisor onto a vertex.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_traits::Zero;

use crate::divisor::{div_of_function, Divisor, PlFunction};
use crate::error::{Error, Result};
use crate::metric_graph::{refine_with_points, Model, PointRef, Refinement};
use crate::rational::{int, min_q, Q};

/// Supports larger than this are refused by the subset enumerations.
pub const MAX_SUBSET_SUPPORT: usize = 20;

/// Connected components of `Γ ∖ S` where `S` is a set of model vertices.
/// Nodes `0..n` are vertices, `n + e` is the interior of edge `e`; removed
/// vertices get no component.
struct Components {
    comp: Vec<usize>,
    n: usize,
}

impl Components {
    fn new(m: &Model, removed: &[bool]) -> Self {
        let n = m.vertex_count();
        let mut parent: Vec<usize> = (0..n + m.edge_count()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for (i, e) in m.edges().iter().enumerate() {
            for v in [e.tail, e.head] {
                if !removed[v] {
                    let (a, b) = (find(&mut parent, n + i), find(&mut parent, v));
                    parent[a] = b;
                }
            }
        }
        let comp = (0..parent.len())
            .map(|x| {
                if x < n && removed[x] {
                    usize::MAX
                } else {
                    find(&mut parent, x)
                }
            })
            .collect();
        Components { comp, n }
    }

    fn of_vertex(&self, v: usize) -> usize {
        self.comp[v]
    }

    fn of_edge(&self, e: usize) -> usize {
        self.comp[self.n + e]
    }

    fn labels(&self) -> Vec<usize> {
        let mut l: Vec<usize> = self.comp.iter().copied().filter(|&c| c != usize::MAX).collect();
        l.sort_unstable();
        l.dedup();
        l
    }

    /// Segments leaving the complement of component `c` at vertex `q`.
    fn outdeg(&self, m: &Model, q: usize, c: usize) -> i64 {
        m.incident(q).iter().filter(|&&e| self.of_edge(e) == c).count() as i64
    }
}

/// The refined model together with the support (and base point) as vertices.
struct Cut {
    r: Refinement,
    chips: Vec<(usize, i64)>,
}

impl Cut {
    fn new<'a>(m: &Model, d: &'a Divisor, extra: impl IntoIterator<Item = &'a PointRef>) -> Result<Self> {
        let pts: Vec<&PointRef> = d.support().chain(extra).collect();
        let r = refine_with_points(m, pts)?;
        let chips = d
            .iter()
            .map(|(p, c)| (r.to_child(p).vertex().expect("support refined to vertices"), c))
            .collect();
        Ok(Cut { r, chips })
    }

    fn removed(&self, mask: u64, from: &[(usize, i64)]) -> Vec<bool> {
        let mut removed = vec![false; self.r.model.vertex_count()];
        for (i, &(v, _)) in from.iter().enumerate() {
            if mask >> i & 1 == 1 {
                removed[v] = true;
            }
        }
        removed
    }

    /// Whether some point of `S` is a non-saturated boundary point of the
    /// complement of component `c`.
    fn has_unsaturated(&self, comps: &Components, s: &[(usize, i64)], mask: u64, c: usize) -> bool {
        s.iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .any(|(_, &(q, k))| k < comps.outdeg(&self.r.model, q, c))
    }
}

fn check_effective(d: &Divisor) -> Result<()> {
    if d.is_effective() {
        Ok(())
    } else {
        Err(Error::NotEffective)
    }
}

fn check_support_size(k: usize) -> Result<()> {
    if k > MAX_SUBSET_SUPPORT {
        Err(Error::SupportTooLarge(k))
    } else {
        Ok(())
    }
}

/// Finds `S ⊆ Supp(D) ∖ {P}` all of whose boundary points are saturated,
/// as refined-model data.
fn saturated_subset(cut: &Cut, p: usize) -> Result<Option<(u64, Vec<(usize, i64)>)>> {
    let s: Vec<(usize, i64)> = cut.chips.iter().copied().filter(|&(v, _)| v != p).collect();
    check_support_size(s.len())?;
    for mask in 1u64..(1 << s.len()) {
        let comps = Components::new(&cut.r.model, &cut.removed(mask, &s));
        if !cut.has_unsaturated(&comps, &s, mask, comps.of_vertex(p)) {
            return Ok(Some((mask, s)));
        }
    }
    Ok(None)
}

pub fn is_p_reduced(m: &Model, d: &Divisor, p: &PointRef) -> Result<bool> {
    check_effective(d)?;
    m.check_point(p)?;
    let cut = Cut::new(m, d, [p])?;
    let pv = cut.r.to_child(p).vertex().expect("base point refined to a vertex");
    Ok(saturated_subset(&cut, pv)?.is_none())
}

/// A subset of the support witnessing that `d` is not reduced at `p`.
pub fn saturated_set(m: &Model, d: &Divisor, p: &PointRef) -> Result<Option<Vec<PointRef>>> {
    check_effective(d)?;
    m.check_point(p)?;
    let cut = Cut::new(m, d, [p])?;
    let pv = cut.r.to_child(p).vertex().expect("base point refined to a vertex");
    Ok(saturated_subset(&cut, pv)?.map(|(mask, s)| {
        s.iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &(v, _))| cut.r.to_parent(&PointRef::Vertex(v)))
            .collect()
    }))
}

/// True iff `d` is reduced with respect to every point of the graph. The
/// condition only depends on the component of `Γ ∖ S` containing the point,
/// so finitely many checks suffice.
pub fn is_singleton_system(m: &Model, d: &Divisor) -> Result<bool> {
    check_effective(d)?;
    let cut = Cut::new(m, d, [])?;
    let s = cut.chips.clone();
    check_support_size(s.len())?;
    for mask in 1u64..(1 << s.len()) {
        let comps = Components::new(&cut.r.model, &cut.removed(mask, &s));
        for c in comps.labels() {
            if !cut.has_unsaturated(&comps, &s, mask, c) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Shortest distances from the vertices flagged in `sources`.
fn distances(m: &Model, sources: &[bool]) -> Vec<Option<Q>> {
    let mut dist: Vec<Option<Q>> = vec![None; m.vertex_count()];
    let mut heap = BinaryHeap::new();
    for (v, &s) in sources.iter().enumerate() {
        if s {
            dist[v] = Some(Q::zero());
            heap.push(Reverse((Q::zero(), v)));
        }
    }
    while let Some(Reverse((d, v))) = heap.pop() {
        if dist[v].as_ref().is_some_and(|x| x < &d) {
            continue;
        }
        for &e in m.incident(v) {
            let edge = m.edge(e);
            let u = edge.other(v);
            let nd = &d + &edge.length;
            if dist[u].as_ref().is_none_or(|x| &nd < x) {
                dist[u] = Some(nd.clone());
                heap.push(Reverse((nd, u)));
            }
        }
    }
    dist
}

/// `h = −min(t, dist(·, A))` for the closed set `A` made of the flagged
/// vertices and the closed flagged edges. Adding `div(h)` to a divisor
/// moves one chip per outgoing segment of `A` a distance `t` outward.
pub fn fire_closed_set(m: &Model, in_a_vertex: &[bool], in_a_edge: &[bool], t: &Q) -> PlFunction {
    let dist = distances(m, in_a_vertex);
    let far = |x: &Option<Q>| x.clone().map_or_else(|| t.clone(), |d| min_q(&d, t));
    let pieces = m
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let l = &e.length;
            if in_a_edge[i] {
                return vec![(Q::zero(), Q::zero()), (l.clone(), Q::zero())];
            }
            let da = far(&dist[e.tail]);
            let db = far(&dist[e.head]);
            let h = |s: &Q| -> Q {
                let via_tail = &da + s;
                let via_head = &db + (l - s);
                -min_q(t, &min_q(&via_tail, &via_head))
            };
            let mut ts = vec![
                Q::zero(),
                l.clone(),
                t - &da,
                l - t + &db,
                (&db + l - &da) / int(2),
            ];
            ts.retain(|s| s >= &Q::zero() && s <= l);
            ts.sort();
            ts.dedup();
            ts.into_iter()
                .map(|s| {
                    let v = h(&s);
                    (s, v)
                })
                .collect()
        })
        .collect();
    PlFunction { pieces }.simplified()
}

/// Vertices of the underlying metric graph, or the model vertices of a cycle.
fn targets(m: &Model) -> Vec<usize> {
    let t = m.intrinsic_vertices();
    if t.is_empty() {
        (0..m.vertex_count()).collect()
    } else {
        t
    }
}

/// Walks from `p` along `first_edge` through valence-2 vertices until a
/// target vertex. Returns the visited vertices with their distance from `p`
/// and the edges crossed.
fn walk_chain(m: &Model, is_target: &[bool], p: usize, first_edge: usize) -> (Vec<(usize, Q)>, Vec<usize>) {
    let mut verts = Vec::new();
    let mut edges = Vec::new();
    let mut at = p;
    let mut via = first_edge;
    let mut d = Q::zero();
    loop {
        let edge = m.edge(via);
        edges.push(via);
        d += &edge.length;
        at = edge.other(at);
        verts.push((at, d.clone()));
        if is_target[at] {
            return (verts, edges);
        }
        via = *m
            .incident(at)
            .iter()
            .find(|&&f| f != via)
            .expect("valence-2 vertex has a second edge");
    }
}

/// An equivalent effective divisor containing a vertex of the metric graph
/// in its support, obtained by sliding the chips of a saturated set.
pub fn move_to_vertex(m: &Model, d: &Divisor, p: &PointRef) -> Result<Divisor> {
    check_effective(d)?;
    m.check_point(p)?;
    let tg = targets(m);
    if tg.iter().any(|&v| d.coeff(&PointRef::Vertex(v)) > 0) {
        return Ok(d.clone());
    }
    let cut = Cut::new(m, d, [p])?;
    let pv = cut.r.to_child(p).vertex().expect("base point refined to a vertex");
    let Some((mask, s)) = saturated_subset(&cut, pv)? else {
        return Err(Error::AlreadyReduced);
    };
    let child = &cut.r.model;
    let mut is_target = vec![false; child.vertex_count()];
    for &v in &tg {
        is_target[v] = true;
    }
    let comps = Components::new(child, &cut.removed(mask, &s));
    let u = comps.of_vertex(pv);
    let child_d = cut.r.divisor_to_child(d);
    let (in_a_vertex, in_a_edge, t) = if (0..child.vertex_count()).any(|v| is_target[v] && comps.of_vertex(v) == u) {
        let in_a_vertex: Vec<bool> = (0..child.vertex_count()).map(|v| comps.of_vertex(v) != u).collect();
        let in_a_edge: Vec<bool> = (0..child.edge_count()).map(|e| comps.of_edge(e) != u).collect();
        let dist = distances(child, &in_a_vertex);
        let t = (0..child.vertex_count())
            .filter(|&v| is_target[v] && !in_a_vertex[v])
            .filter_map(|v| dist[v].clone())
            .min()
            .expect("target vertex in the component");
        (in_a_vertex, in_a_edge, t)
    } else {
        let inc = child.incident(pv);
        debug_assert_eq!(inc.len(), 2);
        let mut in_a_vertex = vec![false; child.vertex_count()];
        let mut in_a_edge = vec![false; child.edge_count()];
        in_a_vertex[pv] = true;
        let mut t: Option<Q> = None;
        for &first in inc {
            let (verts, edges) = walk_chain(child, &is_target, pv, first);
            let (end, total) = verts.last().cloned().expect("chain reaches a target");
            debug_assert!(is_target[end]);
            let k = verts
                .iter()
                .rposition(|(v, _)| child_d.coeff(&PointRef::Vertex(*v)) > 0)
                .expect("support on both sides of the base point");
            for &(v, _) in &verts[..=k] {
                in_a_vertex[v] = true;
            }
            for &e in &edges[..=k] {
                in_a_edge[e] = true;
            }
            let gap = total - &verts[k].1;
            t = Some(t.map_or(gap.clone(), |x| min_q(&x, &gap)));
        }
        (in_a_vertex, in_a_edge, t.expect("two directions"))
    };
    let h = fire_closed_set(child, &in_a_vertex, &in_a_edge, &t);
    let moved = &child_d + &div_of_function(&h, child)?;
    debug_assert!(moved.is_effective());
    Ok(cut.r.divisor_to_parent(&moved))
}
