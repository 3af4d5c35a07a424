//! Metric graphs presented by finite models with rational edge lengths.
//!
//! A [`Model`] is a connected multigraph (loops and parallel edges allowed)
//! whose edges carry positive rational lengths. Points of the metric graph
//! are addressed either as model vertices or as `(edge, offset)` pairs with
//! the offset measured from the edge's tail.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::rational::{fmt_q, int, lcm_of_denominators, parse_q, q, Q};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PointRef {
    Vertex(usize),
    /// Strictly interior point of an edge, offset measured from the tail.
    Interior(usize, Q),
}

impl PointRef {
    pub fn is_vertex(&self) -> bool {
        matches!(self, PointRef::Vertex(_))
    }

    pub fn vertex(&self) -> Option<usize> {
        match self {
            PointRef::Vertex(v) => Some(*v),
            PointRef::Interior(..) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub length: Q,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }

    pub fn other(&self, v: usize) -> usize {
        if v == self.tail {
            self.head
        } else {
            self.tail
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub id: String,
    pub u: String,
    pub v: String,
    #[serde(with = "crate::rational::serde_str")]
    pub length: Q,
}

/// Unvalidated description of a model, as read from a graph file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>) -> Self {
        ModelSpec {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn vertex(mut self, id: impl Into<String>) -> Self {
        self.vertices.push(id.into());
        self
    }

    pub fn edge(
        mut self,
        id: impl Into<String>,
        u: impl Into<String>,
        v: impl Into<String>,
        length: Q,
    ) -> Self {
        self.edges.push(EdgeSpec {
            id: id.into(),
            u: u.into(),
            v: v.into(),
            length,
        });
        self
    }

    pub fn build(&self) -> Result<Model> {
        build_model(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    name: String,
    vertices: Vec<String>,
    edges: Vec<Edge>,
    incidence: Vec<Vec<usize>>,
    vertex_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
}

pub fn build_model(spec: &ModelSpec) -> Result<Model> {
    let mut vertices: Vec<String> = Vec::new();
    let mut vertex_index: HashMap<String, usize> = HashMap::new();
    let declared = !spec.vertices.is_empty();
    for v in &spec.vertices {
        if vertex_index.insert(v.clone(), vertices.len()).is_some() {
            return Err(Error::DuplicateId(v.clone()));
        }
        vertices.push(v.clone());
    }
    let mut edges = Vec::with_capacity(spec.edges.len());
    let mut edge_index = HashMap::new();
    for e in &spec.edges {
        if edge_index.insert(e.id.clone(), edges.len()).is_some() {
            return Err(Error::DuplicateId(e.id.clone()));
        }
        if !e.length.is_positive() {
            return Err(Error::NonpositiveLength(e.id.clone()));
        }
        let mut endpoint = |name: &String| -> Result<usize> {
            if let Some(&i) = vertex_index.get(name) {
                return Ok(i);
            }
            if declared {
                return Err(Error::DanglingEndpoint {
                    edge: e.id.clone(),
                    vertex: name.clone(),
                });
            }
            vertex_index.insert(name.clone(), vertices.len());
            vertices.push(name.clone());
            Ok(vertices.len() - 1)
        };
        let tail = endpoint(&e.u)?;
        let head = endpoint(&e.v)?;
        edges.push(Edge {
            id: e.id.clone(),
            tail,
            head,
            length: e.length.clone(),
        });
    }
    if vertices.is_empty() {
        return Err(Error::EmptyModel);
    }
    let model = Model::assemble(spec.name.clone(), vertices, edges);
    if let Some(v) = model.first_unreachable() {
        return Err(Error::DisconnectedGraph(model.vertices[v].clone()));
    }
    Ok(model)
}

impl Model {
    /// Builds the index structures without validation; callers guarantee
    /// connectivity, positive lengths and unique names.
    pub(crate) fn assemble(name: String, vertices: Vec<String>, edges: Vec<Edge>) -> Model {
        let mut incidence = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            incidence[e.tail].push(i);
            incidence[e.head].push(i);
        }
        let vertex_index = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        let edge_index = edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.clone(), i))
            .collect();
        Model {
            name,
            vertices,
            edges,
            incidence,
            vertex_index,
            edge_index,
        }
    }

    fn first_unreachable(&self) -> Option<usize> {
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &e in &self.incidence[v] {
                let w = self.edges[e].other(v);
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertices
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertex_index.get(id).copied()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    /// Edge indices incident to `v`, ascending; a loop appears twice.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn valence(&self, v: usize) -> usize {
        self.incidence[v].len()
    }

    /// Vertices of the underlying metric graph, i.e. points of valence other
    /// than two. A cycle has none.
    pub fn intrinsic_vertices(&self) -> Vec<usize> {
        (0..self.vertex_count())
            .filter(|&v| self.valence(v) != 2)
            .collect()
    }

    pub fn genus(&self) -> usize {
        self.edges.len() + 1 - self.vertices.len()
    }

    pub fn total_length(&self) -> Q {
        self.edges.iter().map(|e| e.length.clone()).sum()
    }

    pub fn canonical_divisor(&self) -> Divisor {
        let mut k = Divisor::zero();
        for v in 0..self.vertex_count() {
            k.add_chip(PointRef::Vertex(v), self.valence(v) as i64 - 2);
        }
        k
    }

    pub fn check_point(&self, p: &PointRef) -> Result<()> {
        match p {
            PointRef::Vertex(v) if *v < self.vertex_count() => Ok(()),
            PointRef::Vertex(v) => Err(Error::InvalidPoint(format!("vertex index {v}"))),
            PointRef::Interior(e, t) => {
                let Some(edge) = self.edges.get(*e) else {
                    return Err(Error::InvalidPoint(format!("edge index {e}")));
                };
                if t.is_positive() && t < &edge.length {
                    Ok(())
                } else {
                    Err(Error::InvalidPoint(format!(
                        "offset {} outside the open edge `{}`",
                        fmt_q(t),
                        edge.id
                    )))
                }
            }
        }
    }

    /// Point at offset `t` along edge `e`, with the endpoints mapped to vertices.
    pub fn point_on_edge(&self, e: usize, t: Q) -> Result<PointRef> {
        let edge = self
            .edges
            .get(e)
            .ok_or_else(|| Error::InvalidPoint(format!("edge index {e}")))?;
        if t.is_zero() {
            Ok(PointRef::Vertex(edge.tail))
        } else if t == edge.length {
            Ok(PointRef::Vertex(edge.head))
        } else if t.is_positive() && t < edge.length {
            Ok(PointRef::Interior(e, t))
        } else {
            Err(Error::InvalidPoint(format!(
                "offset {} outside edge `{}`",
                fmt_q(&t),
                edge.id
            )))
        }
    }

    pub fn midpoint(&self, e: usize) -> PointRef {
        PointRef::Interior(e, self.edges[e].length.clone() / int(2))
    }

    /// Parses `v:<id>` or `e:<id>@<num>/<den>`.
    pub fn parse_point(&self, s: &str) -> Result<PointRef> {
        let s = s.trim();
        if let Some(id) = s.strip_prefix("v:") {
            return self
                .vertex_index(id)
                .map(PointRef::Vertex)
                .ok_or_else(|| Error::InvalidPoint(format!("unknown vertex `{id}`")));
        }
        if let Some(rest) = s.strip_prefix("e:") {
            let (id, off) = rest
                .split_once('@')
                .ok_or_else(|| Error::InvalidPoint(format!("missing `@` in `{s}`")))?;
            let e = self
                .edge_index(id)
                .ok_or_else(|| Error::InvalidPoint(format!("unknown edge `{id}`")))?;
            let t = parse_q(off).map_err(Error::InvalidPoint)?;
            let p = PointRef::Interior(e, t);
            self.check_point(&p)?;
            return Ok(p);
        }
        Err(Error::InvalidPoint(format!("`{s}` is neither v:<id> nor e:<id>@<offset>")))
    }

    pub fn format_point(&self, p: &PointRef) -> String {
        match p {
            PointRef::Vertex(v) => format!("v:{}", self.vertices[*v]),
            PointRef::Interior(e, t) => format!("e:{}@{}", self.edges[*e].id, fmt_q(t)),
        }
    }

    pub fn to_spec(&self) -> ModelSpec {
        ModelSpec {
            name: self.name.clone(),
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    id: e.id.clone(),
                    u: self.vertices[e.tail].clone(),
                    v: self.vertices[e.head].clone(),
                    length: e.length.clone(),
                })
                .collect(),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Model {
        self.name = name.into();
        self
    }
}

pub fn genus(m: &Model) -> usize {
    m.genus()
}

pub fn canonical_divisor(m: &Model) -> Divisor {
    m.canonical_divisor()
}

/// Breadth-first spanning tree. Ties are broken by edge order so the result
/// is reproducible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    root: usize,
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
    order: Vec<usize>,
    in_tree: Vec<bool>,
}

impl SpanningTree {
    pub fn bfs(m: &Model) -> SpanningTree {
        Self::bfs_from(m, 0, None)
    }

    /// `edge_rank[e]` orders the edges scanned at each vertex; defaults to
    /// the edge index.
    pub fn bfs_from(m: &Model, root: usize, edge_rank: Option<&[usize]>) -> SpanningTree {
        let n = m.vertex_count();
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut in_tree = vec![false; m.edge_count()];
        let mut seen = vec![false; n];
        let mut order = vec![root];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(v) = queue.pop_front() {
            let mut inc: Vec<usize> = m.incident(v).to_vec();
            if let Some(rank) = edge_rank {
                inc.sort_by_key(|&e| rank[e]);
            }
            for e in inc {
                let w = m.edge(e).other(v);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((e, v));
                    depth[w] = depth[v] + 1;
                    in_tree[e] = true;
                    order.push(w);
                    queue.push_back(w);
                }
            }
        }
        SpanningTree {
            root,
            parent,
            depth,
            order,
            in_tree,
        }
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// `(edge to parent, parent vertex)`; `None` at the root.
    pub fn parent(&self, v: usize) -> Option<(usize, usize)> {
        self.parent[v]
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    /// Vertices in breadth-first order, root first.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn is_tree_edge(&self, e: usize) -> bool {
        self.in_tree[e]
    }

    pub fn tree_edges(&self) -> Vec<usize> {
        (0..self.in_tree.len()).filter(|&e| self.in_tree[e]).collect()
    }

    pub fn non_tree_edges(&self) -> Vec<usize> {
        (0..self.in_tree.len()).filter(|&e| !self.in_tree[e]).collect()
    }

    /// Signed edge chain of the tree path from `v` up to the root; an edge
    /// traversed from tail to head counts +1.
    pub fn chain_to_root(&self, m: &Model, v: usize) -> Vec<(usize, i64)> {
        let mut out = Vec::new();
        let mut x = v;
        while let Some((e, p)) = self.parent[x] {
            let sign = if m.edge(e).tail == x { 1 } else { -1 };
            out.push((e, sign));
            x = p;
        }
        out
    }

    /// Edge-coefficient vector of the fundamental cycle of a non-tree edge,
    /// oriented along that edge.
    pub fn fundamental_cycle(&self, m: &Model, e: usize) -> Vec<i64> {
        let mut c = vec![0i64; m.edge_count()];
        c[e] += 1;
        let edge = m.edge(e);
        if !edge.is_loop() {
            for (f, s) in self.chain_to_root(m, edge.head) {
                c[f] += s;
            }
            for (f, s) in self.chain_to_root(m, edge.tail) {
                c[f] -= s;
            }
        }
        c
    }
}

/// Outcome of the two-spanning-tree construction of a rank-determining set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RankDeterminingSet {
    /// `points[i]` lies on `edges[i]`; the first `g` edges are the non-tree
    /// edges `e_1..e_g` (with `e_g` not a loop) and the last one is the tree
    /// edge `e_{g+1}` exchanged for `e_g` in the second spanning tree.
    Points { points: Vec<PointRef>, edges: Vec<usize> },
    /// Every non-tree edge is a loop; the graph is a tree with loops attached.
    TreeWithLoops { loops: Vec<usize> },
}

impl RankDeterminingSet {
    pub fn points(&self) -> Option<&[PointRef]> {
        match self {
            RankDeterminingSet::Points { points, .. } => Some(points),
            RankDeterminingSet::TreeWithLoops { .. } => None,
        }
    }
}

pub fn rank_determining_set(m: &Model) -> Result<RankDeterminingSet> {
    rank_determining_set_at(m, &q(1, 2))
}

/// Same construction with each point placed at `fraction` of its edge's
/// length, `0 < fraction < 1`.
pub fn rank_determining_set_at(m: &Model, fraction: &Q) -> Result<RankDeterminingSet> {
    if !(fraction.is_positive() && fraction < &Q::one()) {
        return Err(Error::InvalidPoint(format!(
            "fraction {} not in (0, 1)",
            fmt_q(fraction)
        )));
    }
    if m.genus() == 0 {
        return Err(Error::TreeInput);
    }
    let tree = SpanningTree::bfs(m);
    let mut cycle_edges = tree.non_tree_edges();
    let Some(pos) = cycle_edges.iter().rposition(|&e| !m.edge(e).is_loop()) else {
        return Ok(RankDeterminingSet::TreeWithLoops { loops: cycle_edges });
    };
    let last = cycle_edges.remove(pos);
    cycle_edges.push(last);
    let cycle = tree.fundamental_cycle(m, last);
    let swap = (0..m.edge_count())
        .find(|&f| f != last && cycle[f] != 0)
        .expect("fundamental cycle of a non-loop edge contains a tree edge");
    let mut edges = cycle_edges;
    edges.push(swap);
    let points = edges
        .iter()
        .map(|&e| PointRef::Interior(e, m.edge(e).length.clone() * fraction))
        .collect();
    Ok(RankDeterminingSet::Points { points, edges })
}

/// A model obtained from a parent model by cutting edges at interior points
/// and rescaling all lengths by a common factor. Keeps enough bookkeeping
/// to move points and divisors in both directions.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub model: Model,
    scale: Q,
    /// child edge -> (parent edge, start offset, end offset) in parent units
    edge_origin: Vec<(usize, Q, Q)>,
    vertex_origin: Vec<PointRef>,
    /// parent edge -> child edges from tail to head
    pieces: Vec<Vec<usize>>,
}

impl Refinement {
    fn build(m: &Model, cuts: &[BTreeSet<Q>], scale: Q, name: String) -> Refinement {
        let mut vertices: Vec<String> = m.vertex_ids().to_vec();
        let mut vertex_origin: Vec<PointRef> = (0..m.vertex_count()).map(PointRef::Vertex).collect();
        let mut edges = Vec::new();
        let mut edge_origin = Vec::new();
        let mut pieces = Vec::with_capacity(m.edge_count());
        for (ei, e) in m.edges().iter().enumerate() {
            let mut list = Vec::new();
            let mut prev_v = e.tail;
            let mut prev_t = Q::zero();
            let cut = &cuts[ei];
            for (k, t) in cut.iter().enumerate() {
                let v = vertices.len();
                vertices.push(format!("{}@{}", e.id, fmt_q(t)));
                vertex_origin.push(PointRef::Interior(ei, t.clone()));
                list.push(edges.len());
                edges.push(Edge {
                    id: format!("{}.{}", e.id, k),
                    tail: prev_v,
                    head: v,
                    length: (t - &prev_t) * &scale,
                });
                edge_origin.push((ei, prev_t.clone(), t.clone()));
                prev_v = v;
                prev_t = t.clone();
            }
            list.push(edges.len());
            edges.push(Edge {
                id: if cut.is_empty() {
                    e.id.clone()
                } else {
                    format!("{}.{}", e.id, cut.len())
                },
                tail: prev_v,
                head: e.head,
                length: (&e.length - &prev_t) * &scale,
            });
            edge_origin.push((ei, prev_t, e.length.clone()));
            pieces.push(list);
        }
        Refinement {
            model: Model::assemble(name, vertices, edges),
            scale,
            edge_origin,
            vertex_origin,
            pieces,
        }
    }

    /// Child length = parent length × scale.
    pub fn scale(&self) -> &Q {
        &self.scale
    }

    pub fn parent_edge(&self, child_edge: usize) -> (usize, &Q, &Q) {
        let (e, a, b) = &self.edge_origin[child_edge];
        (*e, a, b)
    }

    pub fn pieces(&self, parent_edge: usize) -> &[usize] {
        &self.pieces[parent_edge]
    }

    pub fn to_child(&self, p: &PointRef) -> PointRef {
        match p {
            PointRef::Vertex(v) => PointRef::Vertex(*v),
            PointRef::Interior(e, t) => {
                for &c in &self.pieces[*e] {
                    let (_, a, b) = &self.edge_origin[c];
                    if t == b {
                        return PointRef::Vertex(self.model.edge(c).head);
                    }
                    if t < b {
                        return PointRef::Interior(c, (t - a) * &self.scale);
                    }
                }
                unreachable!("offset beyond edge length")
            }
        }
    }

    pub fn to_parent(&self, p: &PointRef) -> PointRef {
        match p {
            PointRef::Vertex(v) => self.vertex_origin[*v].clone(),
            PointRef::Interior(c, s) => {
                let (e, a, _) = &self.edge_origin[*c];
                PointRef::Interior(*e, a + s / &self.scale)
            }
        }
    }

    pub fn divisor_to_child(&self, d: &Divisor) -> Divisor {
        Divisor::from_chips(d.iter().map(|(p, c)| (self.to_child(p), c)))
    }

    pub fn divisor_to_parent(&self, d: &Divisor) -> Divisor {
        Divisor::from_chips(d.iter().map(|(p, c)| (self.to_parent(p), c)))
    }
}

/// Cuts the model at the given points so that each becomes a vertex.
/// Lengths are unchanged and so is the metric space.
pub fn refine_with_points<'a>(
    m: &Model,
    pts: impl IntoIterator<Item = &'a PointRef>,
) -> Result<Refinement> {
    let mut cuts = vec![BTreeSet::new(); m.edge_count()];
    for p in pts {
        m.check_point(p)?;
        if let PointRef::Interior(e, t) = p {
            cuts[*e].insert(t.clone());
        }
    }
    Ok(Refinement::build(m, &cuts, Q::one(), m.name().to_string()))
}

/// Default cap on the number of unit edges produced by subdivision.
pub const DEFAULT_MAX_SUBDIVISION: u64 = 4096;

/// Rescales by the lcm of the length denominators and splits every edge of
/// integer length `k` into `k` unit edges. A unit loop stays a loop.
pub fn unit_subdivision(m: &Model) -> Result<Refinement> {
    subdivide_to_grid(m, std::iter::empty(), false, DEFAULT_MAX_SUBDIVISION)
}

/// Unit subdivision on the grid fine enough to contain every given point
/// as a vertex. With `loopless`, the grid is halved when a loop would
/// otherwise remain, so the result is a loopless multigraph.
pub fn subdivide_to_grid<'a>(
    m: &Model,
    pts: impl IntoIterator<Item = &'a PointRef>,
    loopless: bool,
    cap: u64,
) -> Result<Refinement> {
    let pts: Vec<&PointRef> = pts.into_iter().collect();
    for p in &pts {
        m.check_point(p)?;
    }
    let offsets = pts.iter().filter_map(|p| match p {
        PointRef::Interior(_, t) => Some(t),
        PointRef::Vertex(_) => None,
    });
    let mut scale = lcm_of_denominators(m.edges().iter().map(|e| &e.length).chain(offsets));
    if loopless
        && m
            .edges()
            .iter()
            .any(|e| e.is_loop() && (&e.length * Q::from_integer(scale.clone())).is_one())
    {
        scale *= 2;
    }
    let scale_q = Q::from_integer(scale.clone());
    let mut total = BigInt::zero();
    for e in m.edges() {
        total += (&e.length * &scale_q).to_integer();
    }
    let size = total.to_u64().unwrap_or(u64::MAX);
    if size > cap {
        return Err(Error::SubdivisionTooLarge { size, cap });
    }
    let cuts: Vec<BTreeSet<Q>> = m
        .edges()
        .iter()
        .map(|e| {
            let k = (&e.length * &scale_q).to_integer().to_i64().unwrap_or(0);
            (1..k).map(|j| Q::new(BigInt::from(j), scale.clone())).collect()
        })
        .collect();
    Ok(Refinement::build(m, &cuts, scale_q, format!("{}-unit", m.name())))
}
