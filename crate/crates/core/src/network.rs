//! Static social topology the agents live on.
//!
//! The default generator is a Watts–Strogatz small world: a ring lattice
//! where every node links to its `k/2` nearest neighbours on each side,
//! after which each lattice edge has its far endpoint rewired with
//! probability `beta`. An Erdős–Rényi generator is kept for sensitivity
//! checks on the topology assumption.

use std::collections::VecDeque;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected simple graph over dense node ids `0..node_count`.
///
/// Adjacency lists are kept sorted, which makes two graphs with equal
/// edge sets compare (and serialise) identically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    adjacency: Vec<Vec<u32>>,
}

impl Network {
    /// `n` isolated nodes.
    pub fn empty(n: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from an undirected edge list. Self-loops and
    /// duplicate edges are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut net = Self::empty(n);
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::param("edge", format!("({a}, {b}) out of range for {n} nodes")));
            }
            if a == b {
                return Err(Error::param("edge", format!("self-loop at node {a}")));
            }
            if net.has_edge(a, b) {
                return Err(Error::param("edge", format!("duplicate edge ({a}, {b})")));
            }
            net.adjacency[a].push(b as u32);
            net.adjacency[b].push(a as u32);
        }
        net.normalize();
        Ok(net)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, node: usize) -> &[u32] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(&(b as u32))
    }

    /// Edges as `(i, j)` with `i < j`, sorted lexicographically.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, adj)| {
            adj.iter()
                .map(|&j| j as usize)
                .filter(move |&j| i < j)
                .map(move |j| (i, j))
        })
    }

    fn normalize(&mut self) {
        for adj in &mut self.adjacency {
            adj.sort_unstable();
        }
    }

    /// Writes the `i j` edge list (one pair per line, `i < j`, sorted).
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for (i, j) in self.edges() {
            writeln!(out, "{i} {j}")?;
        }
        Ok(())
    }

    pub fn save_edge_list(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut out = std::io::BufWriter::new(file);
        self.write_edge_list(&mut out)?;
        out.flush()?;
        Ok(())
    }

    /// Reads an edge list written by [`Network::write_edge_list`]. Nodes
    /// that appear in no edge are only representable through `n`.
    pub fn read_edge_list<R: BufRead>(n: usize, input: R, origin: &Path) -> Result<Self> {
        let mut edges = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let line_no = idx as u64 + 1;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |reason: &str| Error::Parse {
                path: origin.to_path_buf(),
                line: line_no,
                reason: reason.to_string(),
            };
            let mut parts = line.split_whitespace();
            let a = parts.next().and_then(|s| s.parse::<usize>().ok());
            let b = parts.next().and_then(|s| s.parse::<usize>().ok());
            match (a, b, parts.next()) {
                (Some(a), Some(b), None) => edges.push((a, b)),
                _ => return Err(bad("expected two node ids")),
            }
        }
        Self::from_edges(n, edges)
    }
}

/// Which random-graph family to draw the topology from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GraphModel {
    #[default]
    SmallWorld,
    ErdosRenyi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallWorldSpec {
    pub n: usize,
    /// Ring-lattice degree; must be even.
    pub k: usize,
    /// Per-edge rewiring probability.
    pub beta: f64,
}

impl SmallWorldSpec {
    pub fn new(n: usize, k: usize, beta: f64) -> Result<Self> {
        let spec = Self { n, k, beta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.k.is_multiple_of(2) {
            return Err(Error::param("k", format!("mean degree must be even, got {}", self.k)));
        }
        if self.k < 2 || self.k >= self.n {
            return Err(Error::param(
                "k",
                format!("need 2 <= k < n, got k = {} with n = {}", self.k, self.n),
            ));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::param("beta", format!("{} is not a probability", self.beta)));
        }
        Ok(())
    }
}

/// Watts–Strogatz small-world graph.
pub fn generate_small_world<R: Rng + ?Sized>(spec: &SmallWorldSpec, rng: &mut R) -> Result<Network> {
    generate_small_world_counted(spec, rng).map(|(net, _)| net)
}

/// Same as [`generate_small_world`], also returning how many lattice edges
/// were actually rewired.
pub fn generate_small_world_counted<R: Rng + ?Sized>(spec: &SmallWorldSpec, rng: &mut R) -> Result<(Network, usize)> {
    spec.validate()?;
    let n = spec.n;
    let half = spec.k / 2;

    let mut adj: Vec<Vec<u32>> = vec![Vec::with_capacity(spec.k + 4); n];
    for i in 0..n {
        for step in 1..=half {
            let j = (i + step) % n;
            adj[i].push(j as u32);
            adj[j].push(i as u32);
        }
    }

    let mut rewired = 0;
    // Lattice edges are visited ring by ring (all step-1 edges first), as in
    // the original construction. An edge that was already moved away by an
    // earlier rewiring is skipped.
    for step in 1..=half {
        for i in 0..n {
            let j = (i + step) % n;
            if !rng.random_bool(spec.beta) {
                continue;
            }
            if !adj[i].contains(&(j as u32)) {
                continue;
            }
            let mut target = None;
            for _ in 0..n {
                let cand = rng.random_range(0..n);
                if cand != i && !adj[i].contains(&(cand as u32)) {
                    target = Some(cand);
                    break;
                }
            }
            let Some(t) = target else { continue };
            remove_value(&mut adj[i], j as u32);
            remove_value(&mut adj[j], i as u32);
            adj[i].push(t as u32);
            adj[t].push(i as u32);
            rewired += 1;
        }
    }

    let mut net = Network { adjacency: adj };
    net.normalize();
    Ok((net, rewired))
}

fn remove_value(list: &mut Vec<u32>, value: u32) {
    if let Some(pos) = list.iter().position(|&x| x == value) {
        list.swap_remove(pos);
    }
}

/// G(n, p): every unordered pair linked independently with probability `p`.
pub fn generate_erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Network> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param("beta", format!("{p} is not a probability")));
    }
    let mut net = Network::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(p) {
                net.adjacency[i].push(j as u32);
                net.adjacency[j].push(i as u32);
            }
        }
    }
    net.normalize();
    Ok(net)
}

/// Mean local clustering coefficient; nodes with degree below 2 count as 0.
pub fn clustering_coefficient(net: &Network) -> f64 {
    let n = net.node_count();
    if n == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..n {
        let adj = net.neighbors(i);
        let deg = adj.len();
        if deg < 2 {
            continue;
        }
        let mut closed = 0usize;
        for (a_idx, &a) in adj.iter().enumerate() {
            let a_adj = net.neighbors(a as usize);
            for &b in &adj[a_idx + 1..] {
                if a_adj.binary_search(&b).is_ok() {
                    closed += 1;
                }
            }
        }
        total += closed as f64 / (deg * (deg - 1) / 2) as f64;
    }
    total / n as f64
}

/// Connected components, each as a sorted node list, largest first
/// (ties broken by smallest member).
pub fn connected_components(net: &Network) -> Vec<Vec<usize>> {
    let n = net.node_count();
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in net.neighbors(u) {
                let v = v as usize;
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    queue.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    comps
}

/// Average shortest-path length over all node pairs in the largest
/// connected component.
pub fn mean_path_length(net: &Network) -> Result<f64> {
    let n = net.node_count();
    if n == 0 {
        return Err(Error::param("network", "graph has no nodes"));
    }
    let comps = connected_components(net);
    let comp = &comps[0];
    if comp.len() < 2 {
        return Ok(0.0);
    }
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    let mut sum: u64 = 0;
    for &src in comp {
        for &v in comp {
            dist[v] = u32::MAX;
        }
        dist[src] = 0;
        queue.clear();
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            for &v in net.neighbors(u) {
                let v = v as usize;
                if dist[v] == u32::MAX {
                    dist[v] = du + 1;
                    sum += u64::from(du + 1);
                    queue.push_back(v);
                }
            }
        }
    }
    let m = comp.len() as f64;
    Ok(sum as f64 / (m * (m - 1.0)))
}
