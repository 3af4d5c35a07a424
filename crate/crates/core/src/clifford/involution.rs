//! Involutions of metric graphs and their quotients.
//!
//! Isometries are searched on a canonical model: valence-2 vertices are
//! smoothed away and loops are cut at their midpoints, so every isometry of
//! the metric graph is a length-preserving automorphism of this model.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_graph::{refine_with_points, Edge, Model, PointRef, Refinement};
use crate::rational::Q;

/// The model with valence-2 vertices smoothed away.
#[derive(Clone, Debug)]
struct Skeleton {
    model: Model,
    /// skeleton vertex -> model vertex
    vertex_origin: Vec<usize>,
    /// skeleton edge -> model edges in order, each with its direction
    chains: Vec<Vec<(usize, bool)>>,
}

impl Skeleton {
    fn build(m: &Model) -> Skeleton {
        let mut keep: Vec<usize> = (0..m.vertex_count()).filter(|&v| m.valence(v) != 2).collect();
        if keep.is_empty() {
            keep.push(0);
        }
        let mut index = vec![usize::MAX; m.vertex_count()];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let mut used = vec![false; m.edge_count()];
        let mut edges = Vec::new();
        let mut chains = Vec::new();
        for &start in &keep {
            for &first in m.incident(start) {
                if used[first] {
                    continue;
                }
                let mut chain = Vec::new();
                let mut length = Q::zero();
                let mut at = start;
                let mut via = first;
                loop {
                    used[via] = true;
                    let e = m.edge(via);
                    chain.push((via, e.tail == at));
                    length += &e.length;
                    at = e.other(at);
                    if index[at] != usize::MAX {
                        break;
                    }
                    via = *m
                        .incident(at)
                        .iter()
                        .find(|&&f| !used[f])
                        .expect("valence-2 vertex continues the chain");
                }
                let id = chain.iter().map(|&(e, _)| m.edge(e).id.as_str()).collect::<Vec<_>>().join("~");
                edges.push(Edge {
                    id,
                    tail: index[start],
                    head: index[at],
                    length,
                });
                chains.push(chain);
            }
        }
        let vertices = keep.iter().map(|&v| m.vertex_id(v).to_string()).collect();
        Skeleton {
            model: Model::assemble(m.name().to_string(), vertices, edges),
            vertex_origin: keep,
            chains,
        }
    }

    fn to_original(&self, m: &Model, p: &PointRef) -> PointRef {
        match p {
            PointRef::Vertex(v) => PointRef::Vertex(self.vertex_origin[*v]),
            PointRef::Interior(se, t) => {
                let mut rest = t.clone();
                for &(e, forward) in &self.chains[*se] {
                    let edge = m.edge(e);
                    if rest < edge.length {
                        if rest.is_zero() {
                            return PointRef::Vertex(if forward { edge.tail } else { edge.head });
                        }
                        let off = if forward { rest } else { &edge.length - rest };
                        return PointRef::Interior(e, off);
                    }
                    rest -= &edge.length;
                }
                unreachable!("offset beyond skeleton edge")
            }
        }
    }
}

/// Loopless model of the underlying metric graph on which isometries are
/// searched, with a map back to the original model.
#[derive(Clone, Debug)]
pub struct CanonicalModel {
    skeleton: Skeleton,
    refinement: Refinement,
}

impl CanonicalModel {
    pub fn new(m: &Model) -> Result<CanonicalModel> {
        let skeleton = Skeleton::build(m);
        let s = &skeleton.model;
        let mids: Vec<PointRef> = (0..s.edge_count()).filter(|&e| s.edge(e).is_loop()).map(|e| s.midpoint(e)).collect();
        let refinement = refine_with_points(s, &mids)?;
        Ok(CanonicalModel { skeleton, refinement })
    }

    pub fn model(&self) -> &Model {
        &self.refinement.model
    }

    /// The point of the original model `m` that `p` stands for.
    pub fn to_original(&self, m: &Model, p: &PointRef) -> PointRef {
        self.skeleton.to_original(m, &self.refinement.to_parent(p))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Involution {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    /// `flipped[e]` when the tail of `e` goes to the head of its image.
    pub flipped: Vec<bool>,
}

impl Involution {
    pub fn identity(m: &Model) -> Involution {
        Involution {
            vertices: (0..m.vertex_count()).collect(),
            edges: (0..m.edge_count()).collect(),
            flipped: vec![false; m.edge_count()],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.vertices.iter().enumerate().all(|(i, &v)| i == v)
            && self.edges.iter().enumerate().all(|(i, &e)| i == e)
            && !self.flipped.iter().any(|&f| f)
    }

    /// Image of a point of the model the involution acts on.
    pub fn apply(&self, m: &Model, p: &PointRef) -> PointRef {
        match p {
            PointRef::Vertex(v) => PointRef::Vertex(self.vertices[*v]),
            PointRef::Interior(e, t) => {
                let img = self.edges[*e];
                if self.flipped[*e] {
                    PointRef::Interior(img, &m.edge(img).length - t)
                } else {
                    PointRef::Interior(img, t.clone())
                }
            }
        }
    }

    pub fn validate(&self, m: &Model) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInvolution(msg));
        if self.vertices.len() != m.vertex_count() || self.edges.len() != m.edge_count() || self.flipped.len() != m.edge_count() {
            return bad("size does not match the model".into());
        }
        if self.vertices.iter().any(|&v| v >= m.vertex_count()) || self.edges.iter().any(|&e| e >= m.edge_count()) {
            return bad("index out of range".into());
        }
        for (v, &w) in self.vertices.iter().enumerate() {
            if self.vertices[w] != v {
                return bad(format!("vertex map is not an involution at `{}`", m.vertex_id(v)));
            }
        }
        for (e, &f) in self.edges.iter().enumerate() {
            let (a, b) = (m.edge(e), m.edge(f));
            if self.edges[f] != e || self.flipped[f] != self.flipped[e] {
                return bad(format!("edge map is not an involution at `{}`", a.id));
            }
            if a.length != b.length {
                return bad(format!("`{}` and `{}` differ in length", a.id, b.id));
            }
            let (t, h) = if self.flipped[e] { (b.head, b.tail) } else { (b.tail, b.head) };
            if self.vertices[a.tail] != t || self.vertices[a.head] != h {
                return bad(format!("edge `{}` is not mapped compatibly with its ends", a.id));
            }
        }
        Ok(())
    }
}

/// Length multisets between vertex pairs of a loopless model.
fn pair_profile(m: &Model) -> Profile {
    let mut p = Profile::new();
    for e in m.edges() {
        p.entry((e.tail.min(e.head), e.tail.max(e.head))).or_default().push(e.length.clone());
    }
    for v in p.values_mut() {
        v.sort();
    }
    p
}

fn local_profile(m: &Model, v: usize) -> Vec<Q> {
    let mut l: Vec<Q> = m.incident(v).iter().map(|&e| m.edge(e).length.clone()).collect();
    l.sort();
    l
}

type Profile = HashMap<(usize, usize), Vec<Q>>;

fn between<'a>(prof: &'a Profile, a: usize, b: usize) -> &'a [Q] {
    prof.get(&(a.min(b), a.max(b))).map_or(&[], |v| v.as_slice())
}

/// Vertex involutions preserving the length multisets between all pairs.
/// The callback returns `true` to stop the search.
fn vertex_involutions(m: &Model, stop: &mut dyn FnMut(&[usize]) -> bool) {
    struct Search<'a> {
        n: usize,
        prof: Profile,
        local: Vec<Vec<Q>>,
        sigma: Vec<usize>,
        stop: &'a mut dyn FnMut(&[usize]) -> bool,
    }

    impl Search<'_> {
        fn rec(&mut self, v: usize) -> bool {
            if v == self.n {
                return (self.stop)(&self.sigma);
            }
            if self.sigma[v] != usize::MAX {
                return self.rec(v + 1);
            }
            for w in v..self.n {
                if self.sigma[w] != usize::MAX || self.local[w] != self.local[v] {
                    continue;
                }
                self.sigma[v] = w;
                self.sigma[w] = v;
                let s = &self.sigma;
                let p = &self.prof;
                let ok = (0..self.n)
                    .filter(|&x| s[x] != usize::MAX)
                    .all(|x| between(p, v, x) == between(p, w, s[x]) && between(p, w, x) == between(p, v, s[x]));
                if ok && self.rec(v + 1) {
                    return true;
                }
                self.sigma[v] = usize::MAX;
                self.sigma[w] = usize::MAX;
            }
            false
        }
    }

    let n = m.vertex_count();
    Search {
        n,
        prof: pair_profile(m),
        local: (0..n).map(|v| local_profile(m, v)).collect(),
        sigma: vec![usize::MAX; n],
        stop,
    }
    .rec(0);
}

/// All edge maps over a vertex involution, up to relabelling parallel
/// edges of equal length.
fn edge_maps(m: &Model, sigma: &[usize]) -> Vec<Involution> {
    let mut groups: BTreeMap<(usize, usize, Q), Vec<usize>> = BTreeMap::new();
    for (i, e) in m.edges().iter().enumerate() {
        groups
            .entry((e.tail.min(e.head), e.tail.max(e.head), e.length.clone()))
            .or_default()
            .push(i);
    }
    let mut base = vec![usize::MAX; m.edge_count()];
    let mut own: Vec<&Vec<usize>> = Vec::new();
    for ((a, b, len), list) in &groups {
        let (x, y) = (sigma[*a], sigma[*b]);
        let image = &groups[&(x.min(y), x.max(y), len.clone())];
        if image == list {
            own.push(list);
        } else {
            for (&e, &f) in list.iter().zip(image) {
                base[e] = f;
            }
        }
    }
    let mut out = Vec::new();
    let mut choice = vec![0usize; own.len()];
    loop {
        let mut edges = base.clone();
        for (list, &k) in own.iter().zip(&choice) {
            for (i, &e) in list.iter().enumerate() {
                edges[e] = if i < 2 * k { list[i ^ 1] } else { e };
            }
        }
        let flipped = (0..m.edge_count()).map(|e| sigma[m.edge(e).tail] != m.edge(edges[e]).tail).collect();
        out.push(Involution {
            vertices: sigma.to_vec(),
            edges,
            flipped,
        });
        let mut i = 0;
        loop {
            if i == own.len() {
                return out;
            }
            choice[i] += 1;
            if choice[i] <= own[i].len() / 2 {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Involutions of a metric graph together with the canonical model they
/// act on. The identity comes first.
#[derive(Clone, Debug)]
pub struct InvolutionSet {
    pub canonical: CanonicalModel,
    pub involutions: Vec<Involution>,
}

pub fn find_involutions(m: &Model) -> Result<InvolutionSet> {
    let canonical = CanonicalModel::new(m)?;
    let c = canonical.model();
    let mut involutions = Vec::new();
    vertex_involutions(c, &mut |sigma| {
        involutions.extend(edge_maps(c, sigma));
        false
    });
    Ok(InvolutionSet { canonical, involutions })
}

/// Genus of the quotient multigraph; a fixed edge that is flipped folds
/// onto half of itself.
pub fn quotient_genus(m: &Model, iota: &Involution) -> Result<usize> {
    iota.validate(m)?;
    let vertex_orbits = (0..m.vertex_count()).filter(|&v| iota.vertices[v] >= v).count();
    let edge_orbits = (0..m.edge_count()).filter(|&e| iota.edges[e] >= e).count();
    let folded = (0..m.edge_count()).filter(|&e| iota.edges[e] == e && iota.flipped[e]).count();
    Ok(edge_orbits + 1 - vertex_orbits - folded)
}

pub fn quotient_is_tree(m: &Model, iota: &Involution) -> Result<bool> {
    Ok(quotient_genus(m, iota)? == 0)
}

/// Whether some involution has a tree as quotient.
pub fn has_hyperelliptic_involution(m: &Model) -> Result<bool> {
    let canonical = CanonicalModel::new(m)?;
    let c = canonical.model();
    let mut found = false;
    vertex_involutions(c, &mut |sigma| {
        found = edge_maps(c, sigma)
            .iter()
            .any(|i| quotient_is_tree(c, i).expect("enumerated involutions are valid"));
        found
    });
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{families, gen_hyperelliptic, Gluing};
    use crate::metric_graph::ModelSpec;
    use crate::rational::{int, q};

    fn swaps_vertices(i: &Involution) -> bool {
        i.vertices.iter().enumerate().any(|(a, &b)| a != b)
    }

    #[test]
    fn banana_swap() {
        let b3 = families::banana(&[int(1), int(1), int(1)]);
        let set = find_involutions(&b3).unwrap();
        let c = set.canonical.model();
        assert_eq!(c.vertex_count(), 2);
        assert!(set.involutions[0].is_identity());
        let swap: Vec<&Involution> = set.involutions.iter().filter(|i| swaps_vertices(i)).collect();
        assert!(!swap.is_empty());
        let plain = swap.iter().find(|i| i.edges == vec![0, 1, 2]).unwrap();
        assert!(plain.flipped.iter().all(|&f| f));
        assert!(quotient_is_tree(c, plain).unwrap());
        assert!(!quotient_is_tree(c, &set.involutions[0]).unwrap());
        for i in &set.involutions {
            i.validate(c).unwrap();
        }
    }

    #[test]
    fn asymmetric_triangle() {
        let m = ModelSpec::new("tri")
            .edge("a", "x", "y", int(1))
            .edge("b", "y", "z", int(2))
            .edge("c", "z", "x", int(3))
            .build()
            .unwrap();
        let set = find_involutions(&m).unwrap();
        // the skeleton of a cycle is one vertex with a loop, cut at the
        // antipode: two reflections and a half turn
        assert_eq!(set.involutions.len(), 4);
        let c = set.canonical.model();
        let trees = set.involutions.iter().filter(|i| quotient_is_tree(c, i).unwrap()).count();
        assert_eq!(trees, 2);
    }

    #[test]
    fn k4_double_transpositions() {
        let k4 = families::complete_graph(4);
        let set = find_involutions(&k4).unwrap();
        let c = set.canonical.model();
        let double: Vec<&Involution> = set
            .involutions
            .iter()
            .filter(|i| i.vertices.iter().enumerate().all(|(a, &b)| a != b))
            .collect();
        assert_eq!(double.len(), 3);
        // a double transposition fixes two edges and swaps the other four
        // in pairs: 4 edge orbits, 2 folded edges, 2 vertex orbits
        for i in double {
            assert_eq!(quotient_genus(c, i).unwrap(), 1);
        }
        assert_eq!(set.involutions.len(), 1 + 6 + 3);
        assert!(!has_hyperelliptic_involution(&k4).unwrap());
    }

    #[test]
    fn smoothing_valence_two() {
        let b3 = families::banana(&[int(1), int(1), int(1)]);
        let refined = refine_with_points(&b3, &[PointRef::Interior(0, q(1, 3))]).unwrap().model;
        let set = find_involutions(&refined).unwrap();
        assert_eq!(set.canonical.model().vertex_count(), 2);
        assert!(has_hyperelliptic_involution(&refined).unwrap());
        let c = set.canonical.model();
        let e = (0..c.edge_count()).find(|&e| c.edge(e).id.contains('~')).unwrap();
        let p = set.canonical.to_original(&refined, &PointRef::Interior(e, q(1, 2)));
        assert_eq!(refined.format_point(&p), "e:e0.1@1/6");
    }

    #[test]
    fn covers_are_hyperelliptic() {
        let star = ModelSpec::new("star")
            .edge("a", "c", "x", int(1))
            .edge("b", "c", "y", int(2))
            .edge("d", "c", "z", int(3));
        let g = Gluing {
            doubled: vec!["a".into(), "b".into(), "d".into()],
            ..Gluing::default()
        };
        let cover = gen_hyperelliptic(&star, &g).unwrap();
        assert_eq!(cover.model.genus(), 2);
        assert!(has_hyperelliptic_involution(&cover.model).unwrap());
        let sheet = Involution {
            vertices: cover.vertex_swap.clone(),
            edges: cover.edge_swap.clone(),
            flipped: vec![false; cover.model.edge_count()],
        };
        assert!(quotient_is_tree(&cover.model, &sheet).unwrap());
    }

    #[test]
    fn invalid_involution_rejected() {
        let b3 = families::banana(&[int(1), int(2), int(3)]);
        let bad = Involution {
            vertices: vec![1, 0],
            edges: vec![1, 0, 2],
            flipped: vec![true; 3],
        };
        assert!(matches!(quotient_is_tree(&b3, &bad), Err(Error::InvalidInvolution(_))));
    }
}
