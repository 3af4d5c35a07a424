//! Standard model families and seeded random generators.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::involution::has_hyperelliptic_involution;
use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::metric_graph::{build_model, Model, ModelSpec, PointRef};
use crate::rational::{int, q, Q};

/// Attempts made by [`gen_nonhyperelliptic`] before giving up.
pub const MAX_ATTEMPTS: usize = 200;

pub mod families {
    use super::*;

    /// Complete graph on `n` vertices with unit edges `e0, e1, …` in
    /// lexicographic pair order.
    pub fn complete_graph(n: usize) -> Model {
        let mut spec = ModelSpec::new(format!("k{n}"));
        for i in 0..n {
            spec = spec.vertex(format!("v{i}"));
        }
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                spec = spec.edge(format!("e{k}"), format!("v{i}"), format!("v{j}"), int(1));
                k += 1;
            }
        }
        spec.build().expect("complete graph is valid")
    }

    /// One vertex with a loop.
    pub fn circle(length: Q) -> Model {
        ModelSpec::new("circle")
            .edge("e0", "v0", "v0", length)
            .build()
            .expect("circle is valid")
    }

    /// Two vertices `u`, `v` joined by parallel edges of the given lengths.
    pub fn banana(lengths: &[Q]) -> Model {
        let mut spec = ModelSpec::new(format!("banana{}", lengths.len())).vertex("u").vertex("v");
        for (i, l) in lengths.iter().enumerate() {
            spec = spec.edge(format!("e{i}"), "u", "v", l.clone());
        }
        spec.build().expect("banana is valid")
    }

    pub fn segment(length: Q) -> Model {
        ModelSpec::new("segment")
            .edge("e0", "v0", "v1", length)
            .build()
            .expect("segment is valid")
    }

    /// Two loops joined by a bridge.
    pub fn dumbbell(left: Q, bridge: Q, right: Q) -> Model {
        ModelSpec::new("dumbbell")
            .edge("l", "a", "a", left)
            .edge("m", "a", "b", bridge)
            .edge("r", "b", "b", right)
            .build()
            .expect("dumbbell is valid")
    }

    /// A path of `n` vertices with a loop at each of them.
    pub fn chain_of_loops(n: usize) -> Model {
        let mut spec = ModelSpec::new(format!("loops{n}"));
        for i in 0..n {
            spec = spec.edge(format!("l{i}"), format!("v{i}"), format!("v{i}"), int(1));
            if i + 1 < n {
                spec = spec.edge(format!("b{i}"), format!("v{i}"), format!("v{}", i + 1), int(1));
            }
        }
        spec.build().expect("chain of loops is valid")
    }

    /// `n` bananas of two edges each, glued in a row: the standard
    /// hyperelliptic graph of genus `n`.
    pub fn banana_chain(n: usize) -> Model {
        let mut spec = ModelSpec::new(format!("bananas{n}"));
        for i in 0..n {
            let (a, b) = (format!("v{i}"), format!("v{}", i + 1));
            spec = spec.edge(format!("a{i}"), a.clone(), b.clone(), int(1));
            spec = spec.edge(format!("b{i}"), a, b, int(1));
        }
        spec.build().expect("banana chain is valid")
    }
}

/// Shape of random models.
#[derive(Clone, Debug)]
pub struct ModelParams {
    pub vertices: RangeInclusive<usize>,
    pub genus: RangeInclusive<usize>,
    /// Edge lengths are `k / den` with `den` drawn from this list.
    pub denominators: Vec<i64>,
    pub max_numerator: i64,
    pub loops: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            vertices: 1..=4,
            genus: 0..=3,
            denominators: vec![1, 2],
            max_numerator: 3,
            loops: true,
        }
    }
}

fn random_length(rng: &mut impl Rng, p: &ModelParams) -> Q {
    let den = *p.denominators.choose(rng).expect("at least one denominator");
    q(rng.gen_range(1..=p.max_numerator), den)
}

/// A random tree with extra edges; loops and parallel edges may occur.
pub fn random_model(rng: &mut impl Rng, p: &ModelParams) -> Model {
    let n = rng.gen_range(p.vertices.clone()).max(1);
    let g = rng.gen_range(p.genus.clone());
    let mut spec = ModelSpec::new("random");
    for i in 0..n {
        spec = spec.vertex(format!("v{i}"));
    }
    let mut k = 0;
    for i in 1..n {
        let j = rng.gen_range(0..i);
        spec = spec.edge(format!("e{k}"), format!("v{j}"), format!("v{i}"), random_length(rng, p));
        k += 1;
    }
    for _ in 0..g {
        let (a, b) = loop {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b || p.loops || n == 1 {
                break (a, b);
            }
        };
        spec = spec.edge(format!("e{k}"), format!("v{a}"), format!("v{b}"), random_length(rng, p));
        k += 1;
    }
    spec.build().expect("random model is connected")
}

/// A vertex or a point `k / grid` of the way along a random edge.
pub fn random_point(rng: &mut impl Rng, m: &Model, grid: i64) -> PointRef {
    if m.edge_count() == 0 {
        return PointRef::Vertex(rng.gen_range(0..m.vertex_count()));
    }
    let e = rng.gen_range(0..m.edge_count());
    let edge = m.edge(e);
    match rng.gen_range(0..grid) {
        0 => PointRef::Vertex(edge.tail),
        k => PointRef::Interior(e, &edge.length * q(k, grid)),
    }
}

pub fn random_effective(rng: &mut impl Rng, m: &Model, degree: usize, grid: i64) -> Divisor {
    Divisor::from_chips((0..degree).map(|_| (random_point(rng, m, grid), 1)))
}

/// `chips` random points with coefficients drawn from `coeffs`.
pub fn random_divisor(rng: &mut impl Rng, m: &Model, chips: usize, coeffs: RangeInclusive<i64>, grid: i64) -> Divisor {
    Divisor::from_chips((0..chips).map(|_| (random_point(rng, m, grid), rng.gen_range(coeffs.clone()))))
}

pub fn random_vertex_divisor(rng: &mut impl Rng, m: &Model, coeffs: RangeInclusive<i64>) -> Divisor {
    let v: Vec<i64> = (0..m.vertex_count()).map(|_| rng.gen_range(coeffs.clone())).collect();
    Divisor::from_vertex_vec(&v)
}

/// Which tree edges are doubled in a double cover and which extra vertices
/// are branch points. Leaves and endpoints of undoubled edges always are.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gluing {
    pub doubled: Vec<String>,
    pub branch_vertices: Vec<String>,
}

/// A double cover of a tree together with its sheet swap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleCover {
    pub model: Model,
    pub vertex_swap: Vec<usize>,
    pub edge_swap: Vec<usize>,
}

/// Two copies of the tree, with undoubled edges and branch vertices
/// identified. The genus is `#branch vertices − #undoubled edges − 1`.
pub fn gen_hyperelliptic(tree: &ModelSpec, gluing: &Gluing) -> Result<DoubleCover> {
    let t = build_model(tree).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    if t.genus() != 0 {
        return Err(Error::InvalidSpec(format!("`{}` is not a tree", t.name())));
    }
    if t.edge_count() == 0 {
        return Err(Error::InvalidSpec("tree has no edges".into()));
    }
    let mut doubled = vec![false; t.edge_count()];
    for id in &gluing.doubled {
        let e = t
            .edge_index(id)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown tree edge `{id}`")))?;
        doubled[e] = true;
    }
    let mut branch = vec![false; t.vertex_count()];
    for id in &gluing.branch_vertices {
        let v = t
            .vertex_index(id)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown tree vertex `{id}`")))?;
        branch[v] = true;
    }
    for (v, b) in branch.iter_mut().enumerate() {
        if t.valence(v) == 1 {
            *b = true;
        }
    }
    for (e, edge) in t.edges().iter().enumerate() {
        if !doubled[e] {
            branch[edge.tail] = true;
            branch[edge.head] = true;
        }
    }
    let name = |v: usize, sheet: &str| {
        if branch[v] {
            t.vertex_id(v).to_string()
        } else {
            format!("{}{sheet}", t.vertex_id(v))
        }
    };
    let mut spec = ModelSpec::new(format!("{}-cover", t.name()));
    for sheet in ["+", "-"] {
        for v in 0..t.vertex_count() {
            if sheet == "+" || !branch[v] {
                spec = spec.vertex(name(v, sheet));
            }
        }
    }
    for sheet in ["+", "-"] {
        for (e, edge) in t.edges().iter().enumerate() {
            if doubled[e] {
                spec = spec.edge(
                    format!("{}{sheet}", edge.id),
                    name(edge.tail, sheet),
                    name(edge.head, sheet),
                    edge.length.clone(),
                );
            } else if sheet == "+" {
                spec = spec.edge(edge.id.clone(), name(edge.tail, sheet), name(edge.head, sheet), edge.length.clone());
            }
        }
    }
    let model = spec.build()?;
    let partner = |id: &str| -> String {
        if let Some(s) = id.strip_suffix('+') {
            format!("{s}-")
        } else if let Some(s) = id.strip_suffix('-') {
            format!("{s}+")
        } else {
            id.to_string()
        }
    };
    let vertex_swap = (0..model.vertex_count())
        .map(|v| model.vertex_index(&partner(model.vertex_id(v))).expect("partner vertex"))
        .collect();
    let edge_swap = model
        .edges()
        .iter()
        .map(|e| model.edge_index(&partner(&e.id)).expect("partner edge"))
        .collect();
    Ok(DoubleCover {
        model,
        vertex_swap,
        edge_swap,
    })
}

/// A random tree spec on `n` vertices with lengths in halves.
fn random_tree(rng: &mut impl Rng, n: usize) -> ModelSpec {
    let mut spec = ModelSpec::new("tree");
    for i in 0..n {
        spec = spec.vertex(format!("t{i}"));
    }
    for i in 1..n {
        let j = rng.gen_range(0..i);
        spec = spec.edge(format!("f{i}"), format!("t{j}"), format!("t{i}"), q(rng.gen_range(1..=4), 2));
    }
    spec
}

/// A random double cover of a tree of the requested genus, every tree
/// edge doubled.
pub fn random_hyperelliptic(genus: usize, seed: u64) -> Result<DoubleCover> {
    if genus < 1 {
        return Err(Error::InvalidSpec("genus must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let n = rng.gen_range(genus + 1..=genus + 2);
        let tree = random_tree(&mut rng, n);
        let t = build_model(&tree)?;
        let leaves: Vec<usize> = (0..n).filter(|&v| t.valence(v) == 1).collect();
        if leaves.len() > genus + 1 {
            continue;
        }
        let mut inner: Vec<usize> = (0..n).filter(|&v| t.valence(v) != 1).collect();
        inner.shuffle(&mut rng);
        let gluing = Gluing {
            doubled: t.edges().iter().map(|e| e.id.clone()).collect(),
            branch_vertices: inner[..genus + 1 - leaves.len()]
                .iter()
                .map(|&v| t.vertex_id(v).to_string())
                .collect(),
        };
        let cover = gen_hyperelliptic(&tree, &gluing)?;
        debug_assert_eq!(cover.model.genus(), genus);
        return Ok(DoubleCover {
            model: cover.model.with_name(format!("hyp-g{genus}-s{seed}")),
            ..cover
        });
    }
    Err(Error::RetriesExhausted(MAX_ATTEMPTS))
}

fn two_edge_connected(m: &Model) -> bool {
    (0..m.edge_count()).all(|skip| {
        let mut seen = vec![false; m.vertex_count()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &e in m.incident(v) {
                if e == skip {
                    continue;
                }
                let w = m.edge(e).other(v);
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    })
}

/// A random loopless, bridgeless cubic multigraph of the given genus with
/// pairwise distinct edge lengths in quarters, resampled until it has no
/// involution with a tree quotient. Every graph of genus 2 is
/// hyperelliptic, so genus 2 always ends in `RetriesExhausted`.
pub fn gen_nonhyperelliptic(genus: usize, seed: u64) -> Result<Model> {
    if genus < 2 {
        return Err(Error::InvalidSpec(format!("genus {genus} is below 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 * (genus - 1);
    let ne = 3 * (genus - 1);
    for _ in 0..MAX_ATTEMPTS {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| [v, v, v]).collect();
        stubs.shuffle(&mut rng);
        if stubs.chunks(2).any(|p| p[0] == p[1]) {
            continue;
        }
        let mut numerators: Vec<i64> = (1..=(ne as i64 + 4)).collect();
        numerators.shuffle(&mut rng);
        let mut spec = ModelSpec::new(format!("nonhyp-g{genus}-s{seed}"));
        for i in 0..n {
            spec = spec.vertex(format!("v{i}"));
        }
        for (k, p) in stubs.chunks(2).enumerate() {
            spec = spec.edge(format!("e{k}"), format!("v{}", p[0]), format!("v{}", p[1]), q(numerators[k], 4));
        }
        let Ok(m) = spec.build() else {
            continue;
        };
        if !two_edge_connected(&m) || has_hyperelliptic_involution(&m)? {
            continue;
        }
        return Ok(m);
    }
    Err(Error::RetriesExhausted(MAX_ATTEMPTS))
}

/// Distinct lengths of a model's edges, useful for quick symmetry checks.
pub fn length_spectrum(m: &Model) -> BTreeSet<Q> {
    m.edges().iter().map(|e| e.length.clone()).collect()
}
