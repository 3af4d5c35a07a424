//! Chip-firing on the finite model: Dhar burning and q-reduction.
//!
//! Edge lengths play no role here; loops never move chips and are ignored.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::metric_graph::Model;

/// Adjacency with multiplicities, loops dropped.
#[derive(Clone, Debug)]
pub struct ChipGraph {
    adj: Vec<Vec<(usize, i64)>>,
}

impl ChipGraph {
    pub fn new(m: &Model) -> Self {
        let n = m.vertex_count();
        let mut mult: Vec<BTreeMap<usize, i64>> = vec![BTreeMap::new(); n];
        for e in m.edges() {
            if e.is_loop() {
                continue;
            }
            *mult[e.tail].entry(e.head).or_insert(0) += 1;
            *mult[e.head].entry(e.tail).or_insert(0) += 1;
        }
        let adj: Vec<Vec<(usize, i64)>> = mult.into_iter().map(|m| m.into_iter().collect()).collect();
        ChipGraph { adj }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, i64)] {
        &self.adj[v]
    }

    /// `(Δs)(v) = Σ_u mult(u, v) · (s(v) − s(u))`.
    pub fn laplacian(&self, s: &[i64]) -> Vec<i64> {
        (0..self.len())
            .map(|v| {
                self.adj[v]
                    .iter()
                    .map(|&(u, k)| k * (s[v] - s[u]))
                    .sum()
            })
            .collect()
    }

    /// Burnt vertices when a fire starts at `q`. Assumes `d ≥ 0` off `q`.
    pub fn burn(&self, d: &[i64], q: usize) -> Vec<bool> {
        let n = self.len();
        let mut burnt = vec![false; n];
        let mut hits = vec![0i64; n];
        let mut queue = VecDeque::from([q]);
        burnt[q] = true;
        while let Some(v) = queue.pop_front() {
            for &(u, k) in &self.adj[v] {
                if burnt[u] {
                    continue;
                }
                hits[u] += k;
                if hits[u] > d[u] {
                    burnt[u] = true;
                    queue.push_back(u);
                }
            }
        }
        burnt
    }

    pub fn is_reduced(&self, d: &[i64], q: usize) -> bool {
        d.iter().enumerate().all(|(v, &c)| v == q || c >= 0) && self.burn(d, q).iter().all(|&b| b)
    }

    /// Reduces `d` in place at `q` and returns the script `s` with
    /// `reduced = input − Δs` and `s(q) = 0`.
    pub fn reduce(&self, d: &mut [i64], q: usize) -> Vec<i64> {
        let mut s = self.make_nonnegative(d, q);
        self.burn_and_fire(d, q, &mut s);
        let sq = s[q];
        for x in &mut s {
            *x -= sq;
        }
        s
    }

    /// Fires the balls around `q` layer by layer, far layers first in the
    /// bookkeeping, so that every vertex other than `q` ends nonnegative.
    fn make_nonnegative(&self, d: &mut [i64], q: usize) -> Vec<i64> {
        let n = self.len();
        let mut s = vec![0i64; n];
        if d.iter().enumerate().all(|(v, &c)| v == q || c >= 0) {
            return s;
        }
        let mut dist = vec![usize::MAX; n];
        let mut layers: Vec<Vec<usize>> = vec![vec![q]];
        dist[q] = 0;
        let mut queue = VecDeque::from([q]);
        while let Some(v) = queue.pop_front() {
            for &(u, _) in &self.adj[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    if layers.len() <= dist[u] {
                        layers.push(Vec::new());
                    }
                    layers[dist[u]].push(u);
                    queue.push_back(u);
                }
            }
        }
        let depth = layers.len() - 1;
        // k[j] = number of times the ball of radius j is fired
        let mut k = vec![0i64; depth + 1];
        for j in (1..=depth).rev() {
            let mut need = 0i64;
            for &v in &layers[j] {
                let (mut down, mut up) = (0i64, 0i64);
                for &(u, m) in &self.adj[v] {
                    if dist[u] + 1 == j {
                        down += m;
                    } else if dist[u] == j + 1 {
                        up += m;
                    }
                }
                let deficit = up * k[j] - d[v];
                if deficit > 0 {
                    need = need.max((deficit + down - 1) / down);
                }
            }
            k[j - 1] = need;
        }
        let mut acc = 0i64;
        let mut level = vec![0i64; depth + 1];
        for j in (0..=depth).rev() {
            acc += k[j];
            level[j] = acc;
        }
        for v in 0..n {
            s[v] = level[dist[v]];
        }
        let lap = self.laplacian(&s);
        for v in 0..n {
            d[v] -= lap[v];
        }
        s
    }

    fn burn_and_fire(&self, d: &mut [i64], q: usize, s: &mut [i64]) {
        loop {
            let burnt = self.burn(d, q);
            if burnt.iter().all(|&b| b) {
                return;
            }
            let mut times = i64::MAX;
            let mut out = vec![0i64; self.len()];
            for v in (0..self.len()).filter(|&v| !burnt[v]) {
                out[v] = self.adj[v]
                    .iter()
                    .filter(|&&(u, _)| burnt[u])
                    .map(|&(_, m)| m)
                    .sum();
                if out[v] > 0 {
                    times = times.min(d[v] / out[v]);
                }
            }
            debug_assert!(times >= 1 && times < i64::MAX);
            for v in 0..self.len() {
                if burnt[v] {
                    let inflow: i64 = self.adj[v]
                        .iter()
                        .filter(|&&(u, _)| !burnt[u])
                        .map(|&(_, m)| m)
                        .sum();
                    d[v] += times * inflow;
                } else {
                    d[v] -= times * out[v];
                    s[v] += times;
                }
            }
        }
    }
}

/// Net firings per vertex, anchored at zero on the sink.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiringScript(pub Vec<i64>);

impl FiringScript {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// JSON-friendly map from vertex id to firing count.
    pub fn to_named(&self, m: &Model) -> BTreeMap<String, i64> {
        self.0
            .iter()
            .enumerate()
            .map(|(v, &c)| (m.vertex_id(v).to_string(), c))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionResult {
    pub reduced: Divisor,
    pub script: FiringScript,
    pub sink: usize,
}

fn vertex_vector(m: &Model, d: &Divisor) -> Result<Vec<i64>> {
    if !d.is_vertex_supported() {
        return Err(Error::NotVertexSupported);
    }
    d.check_on(m)?;
    Ok(d.to_vertex_vec(m.vertex_count()))
}

pub fn dhar_burnt_set(m: &Model, d: &Divisor, q: usize) -> Result<Vec<usize>> {
    let v = vertex_vector(m, d)?;
    if let Some(bad) = (0..v.len()).find(|&x| x != q && v[x] < 0) {
        return Err(Error::NegativeOffSink(m.vertex_id(bad).to_string()));
    }
    let burnt = ChipGraph::new(m).burn(&v, q);
    Ok((0..burnt.len()).filter(|&x| burnt[x]).collect())
}

pub fn q_reduce(m: &Model, d: &Divisor, q: usize) -> Result<ReductionResult> {
    let mut v = vertex_vector(m, d)?;
    let s = ChipGraph::new(m).reduce(&mut v, q);
    Ok(ReductionResult {
        reduced: Divisor::from_vertex_vec(&v),
        script: FiringScript(s),
        sink: q,
    })
}

pub fn is_q_reduced(m: &Model, d: &Divisor, q: usize) -> Result<bool> {
    let v = vertex_vector(m, d)?;
    Ok(ChipGraph::new(m).is_reduced(&v, q))
}

/// `D − Δs`.
pub fn apply_script(m: &Model, d: &Divisor, s: &FiringScript) -> Result<Divisor> {
    let mut v = vertex_vector(m, d)?;
    let lap = ChipGraph::new(m).laplacian(&s.0);
    for (x, l) in v.iter_mut().zip(lap) {
        *x -= l;
    }
    Ok(Divisor::from_vertex_vec(&v))
}
