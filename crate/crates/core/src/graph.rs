//! Characteristic graphs and the entropies of their colorings.
//!
//! The characteristic graph of `U1` with respect to `U2` and `f` joins two
//! source symbols whenever the decoder could be forced to tell them apart:
//! some `u2` of positive probability with both makes the function values
//! differ. Proper colorings of this graph are exactly the encoder maps that
//! lose nothing the decoder needs, so the interesting numbers here are
//! minimum entropies over colorings (plain, conditional on the peer source,
//! and per-symbol on OR-products), plus the conditional graph entropy that
//! the colorings approach as the block length grows.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::{DistortionTable, FunctionTable};
use crate::info::{entropy_of, plogp};
use crate::prob::{for_each_index, Alphabet, JointPmf, SUPPORT_EPS};

/// Vertex cap for the exact coloring search and the stable-set enumeration.
pub const EXACT_VERTEX_CAP: usize = 12;

/// Default vertex cap for OR-products.
pub const OR_PRODUCT_CAP: usize = 4096;

/// Restarts, tolerance and iteration cap for the conditional graph entropy
/// solver.
pub const GRAPH_ENTROPY_RESTARTS: usize = 16;
pub const GRAPH_ENTROPY_TOL: f64 = 1e-8;
pub const GRAPH_ENTROPY_MAX_ITER: usize = 10_000;

/// Undirected simple graph over the symbols of a source alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct CharGraph {
    vertices: Alphabet,
    adj: Vec<Vec<bool>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphRepr {
    #[serde(default = "default_vertex_axis")]
    name: String,
    vertices: Vec<String>,
    edges: Vec<(String, String)>,
}

fn default_vertex_axis() -> String {
    "u1".to_string()
}

impl TryFrom<GraphRepr> for CharGraph {
    type Error = Error;

    fn try_from(r: GraphRepr) -> Result<Self> {
        let vertices = Alphabet::new(r.name, r.vertices)?;
        let mut edges = Vec::with_capacity(r.edges.len());
        for (a, b) in &r.edges {
            let find = |s: &str| {
                vertices
                    .index_of(s)
                    .ok_or_else(|| Error::InvalidGraph(format!("edge endpoint `{s}` is not a vertex")))
            };
            edges.push((find(a)?, find(b)?));
        }
        CharGraph::new(vertices, edges)
    }
}

impl From<CharGraph> for GraphRepr {
    fn from(g: CharGraph) -> Self {
        GraphRepr {
            name: g.vertices.name().to_string(),
            vertices: g.vertices.symbols().to_vec(),
            edges: g.edge_labels(),
        }
    }
}

impl CharGraph {
    pub fn new(vertices: Alphabet, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let n = vertices.len();
        let mut adj = vec![vec![false; n]; n];
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!(
                    "self-loop on `{}`",
                    vertices.symbol(a)
                )));
            }
            adj[a][b] = true;
            adj[b][a] = true;
        }
        Ok(CharGraph { vertices, adj })
    }

    pub fn edgeless(vertices: Alphabet) -> Self {
        let n = vertices.len();
        CharGraph {
            vertices,
            adj: vec![vec![false; n]; n],
        }
    }

    pub fn complete(vertices: Alphabet) -> Self {
        let n = vertices.len();
        let adj = (0..n).map(|i| (0..n).map(|j| i != j).collect()).collect();
        CharGraph { vertices, adj }
    }

    pub fn vertices(&self) -> &Alphabet {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a][b]
    }

    /// Edges as index pairs `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if self.adj[a][b] {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn edge_labels(&self) -> Vec<(String, String)> {
        self.edges()
            .into_iter()
            .map(|(a, b)| {
                (
                    self.vertices.symbol(a).to_string(),
                    self.vertices.symbol(b).to_string(),
                )
            })
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    pub fn is_stable(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(i, &a)| set[i + 1..].iter().all(|&b| !self.adj[a][b]))
    }

    /// Every maximal stable set, members ascending, sets in lexicographic
    /// order.
    pub fn maximal_stable_sets(&self) -> Result<Vec<Vec<usize>>> {
        let n = self.len();
        if n > EXACT_VERTEX_CAP {
            return Err(Error::CapExceeded {
                what: "stable-set enumeration",
                needed: n,
                cap: EXACT_VERTEX_CAP,
            });
        }
        let nbr: Vec<u32> = (0..n)
            .map(|a| (0..n).filter(|&b| self.adj[a][b]).fold(0, |m, b| m | (1 << b)))
            .collect();
        let mut out = Vec::new();
        for mask in 1u32..(1 << n) {
            let stable = (0..n).all(|v| mask & (1 << v) == 0 || nbr[v] & mask == 0);
            if !stable {
                continue;
            }
            let maximal = (0..n).all(|v| mask & (1 << v) != 0 || nbr[v] & mask != 0);
            if maximal {
                out.push((0..n).filter(|&v| mask & (1 << v) != 0).collect::<Vec<_>>());
            }
        }
        out.sort();
        Ok(out)
    }
}

/// How strictly function values must be reproduced.
#[derive(Debug, Clone, PartialEq)]
pub enum Fidelity {
    /// Any difference in function value forces an edge.
    Exact,
    /// Only differences larger than `delta` under `measure` force an edge.
    Threshold {
        measure: DistortionTable,
        delta: f64,
    },
}

fn two_axes(joint: &JointPmf) -> Result<()> {
    if joint.axes().len() != 2 {
        return Err(Error::ShapeMismatch {
            expected: 2,
            found: joint.axes().len(),
        });
    }
    Ok(())
}

/// Characteristic graph on the first axis of `joint` with respect to the
/// second axis and `f`.
pub fn characteristic_graph(joint: &JointPmf, f: &FunctionTable, fidelity: &Fidelity) -> Result<CharGraph> {
    two_axes(joint)?;
    f.check_domain(&[&joint.axes()[0], &joint.axes()[1]])?;
    if let Fidelity::Threshold { delta, .. } = fidelity {
        if !(*delta >= 0.0) {
            return Err(crate::error::invalid_param("delta", format!("{delta} < 0")));
        }
    }
    let (n1, n2) = (joint.axes()[0].len(), joint.axes()[1].len());
    let mut edges = Vec::new();
    for a in 0..n1 {
        for b in a + 1..n1 {
            let mut distinguishes = false;
            for u2 in 0..n2 {
                if joint.get(&[a, u2]) <= SUPPORT_EPS || joint.get(&[b, u2]) <= SUPPORT_EPS {
                    continue;
                }
                let (fa, fb) = (f.value(&[a, u2]), f.value(&[b, u2]));
                distinguishes = match fidelity {
                    Fidelity::Exact => fa != fb,
                    Fidelity::Threshold { measure, delta } => {
                        let d = measure.lookup(fa, fb)?.max(measure.lookup(fb, fa)?);
                        d > *delta
                    }
                };
                if distinguishes {
                    break;
                }
            }
            if distinguishes {
                edges.push((a, b));
            }
        }
    }
    CharGraph::new(joint.axes()[0].clone(), edges)
}

/// Characteristic graph on the second axis of `joint` with respect to the
/// first.
pub fn peer_characteristic_graph(
    joint: &JointPmf,
    f: &FunctionTable,
    fidelity: &Fidelity,
) -> Result<CharGraph> {
    two_axes(joint)?;
    let names = joint.axis_names();
    let swapped = joint.permute(&[names[1], names[0]])?;
    characteristic_graph(&swapped, &f.transpose()?, fidelity)
}

fn tuple_alphabet(base: &Alphabet, n: usize) -> Result<Alphabet> {
    if n == 1 {
        return Ok(base.clone());
    }
    let mut symbols = Vec::new();
    for_each_index(&vec![base.len(); n], |_, idx| {
        symbols.push(
            idx.iter()
                .map(|&i| base.symbol(i))
                .collect::<Vec<_>>()
                .join(","),
        );
    });
    Alphabet::new(format!("{}^{n}", base.name()), symbols)
}

/// OR-product `G^n` under the default vertex cap.
pub fn or_product(g: &CharGraph, n: usize) -> Result<CharGraph> {
    or_product_capped(g, n, OR_PRODUCT_CAP)
}

/// OR-product: `n`-tuples of vertices, adjacent iff adjacent in at least one
/// coordinate.
pub fn or_product_capped(g: &CharGraph, n: usize, cap: usize) -> Result<CharGraph> {
    if n == 0 {
        return Err(crate::error::invalid_param("n", "block length must be at least 1"));
    }
    let k = g.len();
    let size = k
        .checked_pow(n as u32)
        .filter(|&s| s <= cap)
        .ok_or(Error::CapExceeded {
            what: "OR-product",
            needed: k.saturating_pow(n as u32),
            cap,
        })?;
    let vertices = tuple_alphabet(&g.vertices, n)?;
    let mut tuples = Vec::with_capacity(size);
    for_each_index(&vec![k; n], |_, idx| tuples.push(idx.to_vec()));
    let mut adj = vec![vec![false; size]; size];
    for a in 0..size {
        for b in a + 1..size {
            if tuples[a].iter().zip(&tuples[b]).any(|(&x, &y)| g.adj[x][y]) {
                adj[a][b] = true;
                adj[b][a] = true;
            }
        }
    }
    Ok(CharGraph { vertices, adj })
}

/// The `n`-fold iid extension of a two-axis joint, with tuple-labelled axes
/// matching [`or_product`] vertex labels.
pub fn iid_power(joint: &JointPmf, n: usize) -> Result<JointPmf> {
    two_axes(joint)?;
    if n == 0 {
        return Err(crate::error::invalid_param("n", "block length must be at least 1"));
    }
    let a = tuple_alphabet(&joint.axes()[0], n)?;
    let b = tuple_alphabet(&joint.axes()[1], n)?;
    let (ka, kb) = (joint.axes()[0].len(), joint.axes()[1].len());
    JointPmf::from_fn(vec![a, b], |idx| {
        let (mut x, mut y) = (idx[0], idx[1]);
        let mut p = 1.0;
        for _ in 0..n {
            p *= joint.get(&[x % ka, y % kb]);
            x /= ka;
            y /= kb;
        }
        p
    })
}

/// A proper, total vertex coloring. Colors are `0..num_colors`, numbered by
/// first appearance in vertex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    colors: Vec<usize>,
}

impl Coloring {
    /// Validates propriety and totality against `g`, then canonicalizes the
    /// color numbering.
    pub fn new(g: &CharGraph, colors: Vec<usize>) -> Result<Self> {
        if colors.len() != g.len() {
            return Err(Error::InvalidGraph(format!(
                "coloring covers {} of {} vertices",
                colors.len(),
                g.len()
            )));
        }
        for (a, b) in g.edges() {
            if colors[a] == colors[b] {
                return Err(Error::InvalidGraph(format!(
                    "improper coloring: `{}` and `{}` share color",
                    g.vertices.symbol(a),
                    g.vertices.symbol(b)
                )));
            }
        }
        Ok(Coloring {
            colors: canonical(&colors),
        })
    }

    /// Reads a `{"vertex": "color"}` map.
    pub fn from_map(g: &CharGraph, map: &BTreeMap<String, String>) -> Result<Self> {
        let mut labels: Vec<&str> = Vec::new();
        let mut colors = Vec::with_capacity(g.len());
        for v in g.vertices.symbols() {
            let c = map
                .get(v)
                .ok_or_else(|| Error::InvalidGraph(format!("vertex `{v}` is uncolored")))?;
            let k = labels.iter().position(|l| l == c).unwrap_or_else(|| {
                labels.push(c);
                labels.len() - 1
            });
            colors.push(k);
        }
        Coloring::new(g, colors)
    }

    pub fn color_of(&self, v: usize) -> usize {
        self.colors[v]
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn num_colors(&self) -> usize {
        self.colors.iter().max().map_or(0, |m| m + 1)
    }

    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_colors()];
        for (v, &c) in self.colors.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    pub fn is_proper(&self, g: &CharGraph) -> bool {
        g.edges().iter().all(|&(a, b)| self.colors[a] != self.colors[b])
    }

    /// `{"vertex": "color"}` with colors rendered as decimal labels.
    pub fn to_map(&self, g: &CharGraph) -> BTreeMap<String, String> {
        g.vertices
            .symbols()
            .iter()
            .zip(&self.colors)
            .map(|(v, c)| (v.clone(), c.to_string()))
            .collect()
    }

    /// Color alphabet named `name` with symbols `"0".."k-1"`.
    pub fn alphabet(&self, name: &str) -> Result<Alphabet> {
        Alphabet::indexed(name, self.num_colors())
    }
}

fn canonical(colors: &[usize]) -> Vec<usize> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    colors
        .iter()
        .map(|&c| match map.iter().find(|(from, _)| *from == c) {
            Some(&(_, to)) => to,
            None => {
                map.push((c, map.len()));
                map.len() - 1
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColoringMode {
    /// Exhaustive branch-and-bound over set partitions.
    Exact,
    /// First-fit in order of decreasing vertex probability.
    Greedy,
}

/// Minimum-entropy search over proper colorings.
///
/// The objective is `H(C | S)` where `weights[v][s]` is the joint mass of
/// vertex `v` with slice `s` (a single slice gives the plain color entropy).
/// Vertices are placed in index order, each into an existing compatible
/// class or a fresh one, which enumerates partitions as restricted growth
/// strings in lexicographic order; the first optimum found is therefore the
/// lexicographically smallest.
struct PartitionSearch<'a> {
    nbr: Vec<u32>,
    weights: &'a [Vec<f64>],
    slice_entropy: f64,
    /// `remaining[d][s]`: mass of vertices `d..` in slice `s`.
    remaining: Vec<Vec<f64>>,
    best: f64,
    best_rgs: Vec<usize>,
}

impl<'a> PartitionSearch<'a> {
    fn run(g: &CharGraph, weights: &'a [Vec<f64>]) -> Result<(Vec<usize>, f64)> {
        let n = g.len();
        if n > EXACT_VERTEX_CAP {
            return Err(Error::CapExceeded {
                what: "exact coloring search",
                needed: n,
                cap: EXACT_VERTEX_CAP,
            });
        }
        let slices = weights.first().map_or(0, Vec::len);
        let mut remaining = vec![vec![0.0; slices]; n + 1];
        for d in (0..n).rev() {
            for s in 0..slices {
                remaining[d][s] = remaining[d + 1][s] + weights[d][s];
            }
        }
        let slice_entropy = remaining[0].iter().map(|&p| plogp(p)).sum();
        let nbr = (0..n)
            .map(|a| (0..n).filter(|&b| g.adj[a][b]).fold(0, |m, b| m | (1 << b)))
            .collect();
        let mut search = PartitionSearch {
            nbr,
            weights,
            slice_entropy,
            remaining,
            best: f64::INFINITY,
            best_rgs: Vec::new(),
        };
        let mut rgs = Vec::with_capacity(n);
        let mut members: Vec<u32> = Vec::new();
        let mut mass: Vec<Vec<f64>> = Vec::new();
        search.dfs(0, &mut rgs, &mut members, &mut mass);
        let value = (search.best).max(0.0);
        Ok((search.best_rgs, value))
    }

    /// Lower bound on the objective of any completion: per slice, pour the
    /// unplaced mass into the heaviest class. That vector majorizes every
    /// completion's class masses, so by Schur-concavity its entropy is no
    /// larger.
    fn bound(&self, depth: usize, mass: &[Vec<f64>]) -> f64 {
        let slices = self.remaining[depth].len();
        let mut total = 0.0;
        for s in 0..slices {
            let r = self.remaining[depth][s];
            let mut heaviest = None;
            let mut sum = 0.0;
            for (k, m) in mass.iter().enumerate() {
                sum += plogp(m[s]);
                if heaviest.is_none_or(|h: usize| m[s] > mass[h][s]) {
                    heaviest = Some(k);
                }
            }
            total += match heaviest {
                Some(h) => sum - plogp(mass[h][s]) + plogp(mass[h][s] + r),
                None => plogp(r),
            };
        }
        total - self.slice_entropy
    }

    fn dfs(&mut self, v: usize, rgs: &mut Vec<usize>, members: &mut Vec<u32>, mass: &mut Vec<Vec<f64>>) {
        if v == self.nbr.len() {
            let value = mass.iter().flatten().map(|&m| plogp(m)).sum::<f64>() - self.slice_entropy;
            if value < self.best - 1e-12 {
                self.best = value;
                self.best_rgs = rgs.clone();
            }
            return;
        }
        if self.bound(v, mass) >= self.best - 1e-12 {
            return;
        }
        let k = members.len();
        for c in 0..=k {
            if c == k {
                members.push(0);
                mass.push(vec![0.0; self.weights[v].len()]);
            } else if self.nbr[v] & members[c] != 0 {
                continue;
            }
            members[c] |= 1 << v;
            for (m, w) in mass[c].iter_mut().zip(&self.weights[v]) {
                *m += w;
            }
            rgs.push(c);
            self.dfs(v + 1, rgs, members, mass);
            rgs.pop();
            members[c] &= !(1 << v);
            for (m, w) in mass[c].iter_mut().zip(&self.weights[v]) {
                *m -= w;
            }
            if c == k {
                members.pop();
                mass.pop();
            }
        }
    }
}

fn greedy_colors(g: &CharGraph, prob: &[f64]) -> Vec<usize> {
    let n = g.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| prob[b].total_cmp(&prob[a]).then(a.cmp(&b)));
    let mut colors = vec![usize::MAX; n];
    for &v in &order {
        let mut c = 0;
        while (0..n).any(|u| g.adj[v][u] && colors[u] == c) {
            c += 1;
        }
        colors[v] = c;
    }
    colors
}

fn check_vertex_marginal(g: &CharGraph, marginal: &JointPmf) -> Result<()> {
    if marginal.axes().len() != 1 {
        return Err(Error::ShapeMismatch {
            expected: 1,
            found: marginal.axes().len(),
        });
    }
    g.vertices.check_same_symbols(&marginal.axes()[0])
}

fn color_entropy(coloring: &Coloring, prob: &[f64]) -> f64 {
    let mut mass = vec![0.0; coloring.num_colors()];
    for (v, &c) in coloring.colors.iter().enumerate() {
        mass[c] += prob[v];
    }
    entropy_of(&mass)
}

/// Proper coloring of `g` minimizing the entropy of the color of a vertex
/// drawn from `marginal`, with that entropy in bits.
pub fn min_entropy_coloring(
    g: &CharGraph,
    marginal: &JointPmf,
    mode: ColoringMode,
) -> Result<(Coloring, f64)> {
    check_vertex_marginal(g, marginal)?;
    let prob = marginal.mass();
    let coloring = match mode {
        ColoringMode::Exact => {
            let weights: Vec<Vec<f64>> = prob.iter().map(|&p| vec![p]).collect();
            Coloring::new(g, PartitionSearch::run(g, &weights)?.0)?
        }
        ColoringMode::Greedy => Coloring::new(g, greedy_colors(g, prob))?,
    };
    let h = color_entropy(&coloring, prob);
    Ok((coloring, h))
}

/// Result of a conditional chromatic entropy computation.
#[derive(Debug, Clone)]
pub struct ConditionalColoring {
    /// The OR-product the coloring lives on (equal to `g` when `n = 1`).
    pub graph: CharGraph,
    pub coloring: Coloring,
    /// `H(c(U1^n) | U2^n)` in bits.
    pub block_bits: f64,
    /// `block_bits / n`.
    pub bits_per_symbol: f64,
}

/// Per-symbol minimum of `H(c(U1^n) | U2^n)` over proper colorings of the
/// OR-product `G^n`, under the `n`-fold iid extension of `joint`.
pub fn conditional_chromatic_entropy(g: &CharGraph, joint: &JointPmf, n: usize) -> Result<ConditionalColoring> {
    two_axes(joint)?;
    g.vertices.check_same_symbols(&joint.axes()[0])?;
    let gn = or_product(g, n)?;
    if gn.len() > EXACT_VERTEX_CAP {
        return Err(Error::CapExceeded {
            what: "exact coloring search",
            needed: gn.len(),
            cap: EXACT_VERTEX_CAP,
        });
    }
    let jn = iid_power(joint, n)?;
    let slices = jn.axes()[1].len();
    let weights: Vec<Vec<f64>> = (0..gn.len())
        .map(|v| (0..slices).map(|s| jn.get(&[v, s])).collect())
        .collect();
    let (rgs, block_bits) = PartitionSearch::run(&gn, &weights)?;
    let coloring = Coloring::new(&gn, rgs)?;
    Ok(ConditionalColoring {
        graph: gn,
        coloring,
        block_bits,
        bits_per_symbol: block_bits / n as f64,
    })
}

/// Outcome of the conditional graph entropy solver.
#[derive(Debug, Clone)]
pub struct GraphEntropy {
    /// Best `I(W; U1 | U2)` found, in bits.
    pub bits: f64,
    /// Maximal stable sets indexing the auxiliary `W`.
    pub stable_sets: Vec<Vec<usize>>,
    /// `kernel[u1][j] = p(W = stable_sets[j] | u1)` at the optimum.
    pub kernel: Vec<Vec<f64>>,
    pub iterations: usize,
    /// False when the best run hit the iteration cap before the objective
    /// settled.
    pub converged: bool,
}

struct EntropyProblem {
    joint: Vec<Vec<f64>>,
    p1: Vec<f64>,
    p2: Vec<f64>,
    allowed: Vec<Vec<bool>>,
    m: usize,
}

impl EntropyProblem {
    fn q(&self, k: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n2 = self.p2.len();
        let mut q = vec![vec![0.0; self.m]; n2];
        for (u2, qrow) in q.iter_mut().enumerate() {
            if self.p2[u2] <= 0.0 {
                continue;
            }
            for (u1, krow) in k.iter().enumerate() {
                let w = self.joint[u1][u2] / self.p2[u2];
                if w > 0.0 {
                    for (qj, kj) in qrow.iter_mut().zip(krow) {
                        *qj += w * kj;
                    }
                }
            }
        }
        q
    }

    /// `I(W; U1 | U2) = sum p(u1,u2) k(w|u1) log k(w|u1) / q(w|u2)`.
    fn objective(&self, k: &[Vec<f64>], q: &[Vec<f64>]) -> f64 {
        let mut total = 0.0;
        for (u1, krow) in k.iter().enumerate() {
            for (u2, qrow) in q.iter().enumerate() {
                let p = self.joint[u1][u2];
                if p <= 0.0 {
                    continue;
                }
                for (kj, qj) in krow.iter().zip(qrow) {
                    if *kj > 0.0 {
                        total += p * kj * (kj / qj).log2();
                    }
                }
            }
        }
        total
    }

    fn update(&self, k: &mut [Vec<f64>], q: &[Vec<f64>]) {
        for (u1, krow) in k.iter_mut().enumerate() {
            if self.p1[u1] <= 0.0 {
                continue;
            }
            let mut logw = vec![f64::NEG_INFINITY; self.m];
            for (j, lw) in logw.iter_mut().enumerate() {
                if !self.allowed[u1][j] {
                    continue;
                }
                let mut acc = 0.0;
                for (u2, qrow) in q.iter().enumerate() {
                    let c = self.joint[u1][u2] / self.p1[u1];
                    if c > 0.0 {
                        acc += c * qrow[j].log2();
                    }
                }
                *lw = acc;
            }
            let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for (kj, lw) in krow.iter_mut().zip(&logw) {
                *kj = if lw.is_finite() { (lw - top).exp2() } else { 0.0 };
                z += *kj;
            }
            for kj in krow.iter_mut() {
                *kj /= z;
            }
        }
    }

    fn solve(&self, mut k: Vec<Vec<f64>>) -> (f64, Vec<Vec<f64>>, usize, bool) {
        let mut q = self.q(&k);
        let mut value = self.objective(&k, &q);
        for it in 1..=GRAPH_ENTROPY_MAX_ITER {
            self.update(&mut k, &q);
            q = self.q(&k);
            let next = self.objective(&k, &q);
            let improvement = value - next;
            value = next.min(value);
            if improvement < GRAPH_ENTROPY_TOL {
                return (value, k, it, true);
            }
        }
        (value, k, GRAPH_ENTROPY_MAX_ITER, false)
    }
}

/// Conditional graph entropy `H_G(U1 | U2)`: the minimum of `I(W; U1 | U2)`
/// over auxiliaries `W` ranging over stable sets that contain `U1`, with
/// `W - U1 - U2`.
///
/// Solved by alternating minimization over the kernel `p(w | u1)` supported
/// on maximal stable sets, from one start at the exact minimum conditional
/// entropy coloring plus [`GRAPH_ENTROPY_RESTARTS`] seeded random starts.
/// The coloring start keeps the result at or below the `n = 1` conditional
/// chromatic entropy.
pub fn conditional_graph_entropy(g: &CharGraph, joint: &JointPmf) -> Result<GraphEntropy> {
    two_axes(joint)?;
    g.vertices.check_same_symbols(&joint.axes()[0])?;
    let stable_sets = g.maximal_stable_sets()?;
    let (n1, n2) = (joint.axes()[0].len(), joint.axes()[1].len());
    let m = stable_sets.len();
    let table: Vec<Vec<f64>> = (0..n1)
        .map(|a| (0..n2).map(|b| joint.get(&[a, b]).max(0.0)).collect())
        .collect();
    let p1: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let p2: Vec<f64> = (0..n2).map(|b| table.iter().map(|r| r[b]).sum()).collect();
    let allowed: Vec<Vec<bool>> = (0..n1)
        .map(|v| stable_sets.iter().map(|s| s.contains(&v)).collect())
        .collect();
    let problem = EntropyProblem {
        joint: table,
        p1,
        p2,
        allowed,
        m,
    };

    let chromatic = conditional_chromatic_entropy(g, joint, 1)?;
    let coloring_start: Vec<Vec<f64>> = {
        let classes = chromatic.coloring.classes();
        let home: Vec<usize> = classes
            .iter()
            .map(|c| {
                stable_sets
                    .iter()
                    .position(|s| c.iter().all(|v| s.contains(v)))
                    .expect("every stable set extends to a maximal one")
            })
            .collect();
        (0..n1)
            .map(|v| {
                let j = home[chromatic.coloring.color_of(v)];
                (0..m).map(|i| if i == j { 1.0 } else { 0.0 }).collect()
            })
            .collect()
    };
    let mut starts = vec![coloring_start];
    let mut rng = ChaCha8Rng::seed_from_u64(0x6772_6170_6865_6e74);
    for _ in 0..GRAPH_ENTROPY_RESTARTS {
        let k: Vec<Vec<f64>> = (0..n1)
            .map(|v| {
                let raw: Vec<f64> = (0..m)
                    .map(|j| if problem.allowed[v][j] { rng.random::<f64>() + 1e-3 } else { 0.0 })
                    .collect();
                let z: f64 = raw.iter().sum();
                raw.iter().map(|x| x / z).collect()
            })
            .collect();
        starts.push(k);
    }

    let runs: Vec<(f64, Vec<Vec<f64>>, usize, bool)> =
        starts.into_par_iter().map(|k| problem.solve(k)).collect();
    let (bits, kernel, iterations, converged) = runs
        .into_iter()
        .reduce(|best, r| if r.0 < best.0 - 1e-15 { r } else { best })
        .expect("at least one start");
    let bits = bits.clamp(0.0, chromatic.block_bits);
    Ok(GraphEntropy {
        bits,
        stable_sets,
        kernel,
        iterations,
        converged,
    })
}

/// Two support points whose cross terms are both outside the support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZigzagWitness {
    pub first: (String, String),
    pub second: (String, String),
}

/// Checks that `p(x1,y1) > 0` and `p(x2,y2) > 0` imply `p(x1,y2) > 0` or
/// `p(x2,y1) > 0`. Returns the first violating pair of support points in
/// row-major order, or `None` when the condition holds.
pub fn zigzag_check(joint: &JointPmf) -> Result<Option<ZigzagWitness>> {
    two_axes(joint)?;
    let (a, b) = (&joint.axes()[0], &joint.axes()[1]);
    let pos = |x: usize, y: usize| joint.get(&[x, y]) > SUPPORT_EPS;
    let support: Vec<(usize, usize)> = (0..a.len())
        .flat_map(|x| (0..b.len()).map(move |y| (x, y)))
        .filter(|&(x, y)| pos(x, y))
        .collect();
    for (i, &(x1, y1)) in support.iter().enumerate() {
        for &(x2, y2) in &support[i + 1..] {
            if !pos(x1, y2) && !pos(x2, y1) {
                return Ok(Some(ZigzagWitness {
                    first: (a.symbol(x1).to_string(), b.symbol(y1).to_string()),
                    second: (a.symbol(x2).to_string(), b.symbol(y2).to_string()),
                }));
            }
        }
    }
    Ok(None)
}
