//! Undirected, connected communication graphs and the wake-up law.

use std::collections::VecDeque;
use std::path::Path;

use rand::Rng;
use serde::Serialize;

use crate::error::{GossipError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Graph {
    n: usize,
    adjacency: Vec<Vec<usize>>,
    degrees: Vec<usize>,
    diameter: usize,
    max_degree: usize,
}

impl Graph {
    /// The complete graph `K_n`.
    pub fn complete(n: usize) -> Result<Graph> {
        check_size(n)?;
        let adjacency = (0..n).map(|v| (0..n).filter(|&w| w != v).collect()).collect();
        Graph::from_adjacency(adjacency)
    }

    /// The path graph `P_n`: `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Graph> {
        check_size(n)?;
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Graph::from_edges(n, &edges)
    }

    /// Builds a simple connected graph from an undirected edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        check_size(n)?;
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GossipError::InvalidEdge {
                    u,
                    v,
                    reason: format!("vertex out of range for {n} agents"),
                });
            }
            if u == v {
                return Err(GossipError::InvalidEdge { u, v, reason: "self-loop".into() });
            }
            if adjacency[u].contains(&v) {
                return Err(GossipError::InvalidEdge { u, v, reason: "duplicate edge".into() });
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Graph::from_adjacency(adjacency)
    }

    /// Parses an edge-list file: one `u v` pair per line, 0-indexed, `#`
    /// starts a comment.
    pub fn parse_edge_list(n: usize, text: &str) -> Result<Graph> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| {
                    GossipError::Parse(format!("line {}: `{s}` is not a vertex index", lineno + 1))
                })
            };
            match fields.as_slice() {
                [u, v] => edges.push((parse(u)?, parse(v)?)),
                _ => {
                    return Err(GossipError::Parse(format!(
                        "line {}: expected `u v`, got `{line}`",
                        lineno + 1
                    )))
                }
            }
        }
        Graph::from_edges(n, &edges)
    }

    pub fn from_edge_list_file(n: usize, path: &Path) -> Result<Graph> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GossipError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Graph::parse_edge_list(n, &text)
    }

    fn from_adjacency(adjacency: Vec<Vec<usize>>) -> Result<Graph> {
        let n = adjacency.len();
        let degrees: Vec<usize> = adjacency.iter().map(Vec::len).collect();
        let max_degree = degrees.iter().copied().max().unwrap_or(0);
        let mut g = Graph { n, adjacency, degrees, diameter: 0, max_degree };
        let components = g.components();
        if components > 1 {
            return Err(GossipError::DisconnectedGraph { components });
        }
        g.diameter = (0..n).map(|v| g.eccentricity(v)).max().unwrap_or(0);
        Ok(g)
    }

    fn bfs(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].expect("queued vertices are labelled");
            for &w in &self.adjacency[v] {
                if dist[w].is_none() {
                    dist[w] = Some(dv + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    fn components(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut count = 0;
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            count += 1;
            for (v, d) in self.bfs(s).into_iter().enumerate() {
                if d.is_some() {
                    seen[v] = true;
                }
            }
        }
        count
    }

    fn eccentricity(&self, v: usize) -> usize {
        self.bfs(v).into_iter().flatten().max().unwrap_or(0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn diameter(&self) -> usize {
        self.diameter
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn is_edge(&self, v: usize, w: usize) -> bool {
        v < self.n && self.adjacency[v].binary_search(&w).is_ok()
    }

    /// Each undirected edge once, as `(v, w)` with `v < w`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(v, list)| list.iter().filter(move |&&w| w > v).map(move |&w| (v, w)))
    }

    pub fn edge_count(&self) -> usize {
        self.degrees.iter().sum::<usize>() / 2
    }

    /// Probability that the unordered pair `{v, w}` is selected at a tick:
    /// `(1/N)(1/deg v + 1/deg w)` on edges, 0 otherwise.
    pub fn edge_probability(&self, v: usize, w: usize) -> f64 {
        if !self.is_edge(v, w) {
            return 0.0;
        }
        (1.0 / self.degrees[v] as f64 + 1.0 / self.degrees[w] as f64) / self.n as f64
    }

    /// Wakes a uniform agent `v` and lets it pick a uniform neighbour `w`.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let v = rng.random_range(0..self.n);
        let list = &self.adjacency[v];
        let w = list[rng.random_range(0..list.len())];
        (v, w)
    }

    /// `(N - 1) * max_degree * diameter`, the constant bounding the variance
    /// by the disagreement.
    pub fn c_g_constant(&self) -> f64 {
        ((self.n - 1) * self.max_degree * self.diameter) as f64
    }
}

fn check_size(n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(GossipError::domain(format!("a graph needs at least 2 agents, got {n}")))
    }
}
