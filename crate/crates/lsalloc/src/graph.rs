//! Undirected graphs in sorted compressed adjacency form, generators for the
//! standard families, and neighborhood queries (distances, balls, diameter).
//!
//! Vertices are `0..n-1` as `u32`. Graphs are immutable after construction
//! and safe to share across concurrent simulation trials.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: u64, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(u64),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(u32, u32),
    #[error("edge list parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("random regular generation failed after {0} restarts")]
    GenerationFailed(usize),
}

/// Immutable undirected graph. No self-loops, no duplicate edges.
///
/// Adjacency is stored as one flat sorted neighbor array plus per-vertex
/// offsets, so `neighbors(v)` is a contiguous sorted slice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    max_degree: usize,
}

impl Graph {
    /// Builds a graph from undirected edges. Each unordered pair may appear
    /// at most once (in either orientation); duplicates are an error rather
    /// than silently merged.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::InvalidParameter(
                "vertex count must be positive".into(),
            ));
        }
        if n > u32::MAX as usize {
            return Err(GraphError::InvalidParameter(format!(
                "vertex count {n} exceeds the u32 id space"
            )));
        }
        let mut directed: Vec<(u32, u32)> = Vec::new();
        for (u, v) in edges {
            if u as usize >= n {
                return Err(GraphError::VertexOutOfRange { vertex: u as u64, n });
            }
            if v as usize >= n {
                return Err(GraphError::VertexOutOfRange { vertex: v as u64, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u as u64));
            }
            directed.push((u, v));
            directed.push((v, u));
        }
        directed.sort_unstable();
        for w in directed.windows(2) {
            if w[0] == w[1] {
                let (u, v) = w[0];
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
        }
        let mut offsets = vec![0usize; n + 1];
        for &(u, _) in &directed {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let neighbors = directed.into_iter().map(|(_, v)| v).collect();
        let mut g = Graph {
            offsets,
            neighbors,
            max_degree: 0,
        };
        g.max_degree = (0..n).map(|v| g.degree(v as u32)).max().unwrap_or(0);
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degree(&self, v: u32) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Sorted neighbor slice of `v`.
    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.neighbors[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn contains_edge(&self, u: u32, v: u32) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Undirected edges as `(u, v)` with `u < v`, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.vertex_count() as u32).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    fn check_vertex(&self, v: u32) -> Result<(), GraphError> {
        if (v as usize) < self.vertex_count() {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange {
                vertex: v as u64,
                n: self.vertex_count(),
            })
        }
    }

    /// BFS distances from `u`; `u32::MAX` marks unreachable vertices.
    pub fn bfs_distances(&self, u: u32) -> Result<Vec<u32>, GraphError> {
        self.check_vertex(u)?;
        let n = self.vertex_count();
        let mut dist = vec![u32::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        dist[u as usize] = 0;
        queue.push_back(u);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x as usize];
            for &w in self.neighbors(x) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dx + 1;
                    queue.push_back(w);
                }
            }
        }
        Ok(dist)
    }

    /// Shortest-path distance, `None` if `v` is unreachable from `u`.
    pub fn distance(&self, u: u32, v: u32) -> Result<Option<usize>, GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Ok(Some(0));
        }
        let dist = self.bfs_distances(u)?;
        Ok(match dist[v as usize] {
            u32::MAX => None,
            d => Some(d as usize),
        })
    }

    /// Sizes of the distance balls around `u`: entry `r` is the number of
    /// vertices within distance `r`, for `r = 0..=r_max`. Non-decreasing,
    /// starts at 1, caps at the component size.
    pub fn ball_sizes(&self, u: u32, r_max: usize) -> Result<Vec<usize>, GraphError> {
        self.check_vertex(u)?;
        let dist = self.bfs_distances(u)?;
        let mut sizes = vec![0usize; r_max + 1];
        for &d in &dist {
            if d != u32::MAX && (d as usize) <= r_max {
                sizes[d as usize] += 1;
            }
        }
        let mut acc = 0;
        for s in sizes.iter_mut() {
            acc += *s;
            *s = acc;
        }
        Ok(sizes)
    }

    /// Exact diameter by all-pairs BFS; `None` when the graph is
    /// disconnected. O(n(n+m)) — intended for small to mid-size graphs.
    pub fn diameter(&self) -> Option<usize> {
        let n = self.vertex_count();
        let mut diam = 0usize;
        // Reused scratch with per-source stamps instead of a fresh visited
        // array per BFS.
        let mut stamp = vec![u32::MAX; n];
        let mut dist = vec![0u32; n];
        let mut queue = std::collections::VecDeque::new();
        for s in 0..n as u32 {
            let mut reached = 1usize;
            stamp[s as usize] = s;
            dist[s as usize] = 0;
            queue.clear();
            queue.push_back(s);
            while let Some(x) = queue.pop_front() {
                let dx = dist[x as usize];
                diam = diam.max(dx as usize);
                for &w in self.neighbors(x) {
                    if stamp[w as usize] != s {
                        stamp[w as usize] = s;
                        dist[w as usize] = dx + 1;
                        reached += 1;
                        queue.push_back(w);
                    }
                }
            }
            if reached < n {
                return None;
            }
        }
        Some(diam)
    }

    /// Copy of this graph with one extra isolated vertex (id `n`).
    pub fn with_isolated_vertex(&self) -> Graph {
        Graph::from_edges(self.vertex_count() + 1, self.edges())
            .expect("adding an isolated vertex preserves validity")
    }
}

/// Cycle on `n >= 3` vertices.
pub fn gen_cycle(n: usize) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(GraphError::InvalidParameter(format!(
            "cycle needs n >= 3, got {n}"
        )));
    }
    let edges = (0..n as u32).map(|i| (i, ((i as usize + 1) % n) as u32));
    Graph::from_edges(n, edges)
}

/// Path on `n >= 1` vertices (a single vertex for `n = 1`).
pub fn gen_path(n: usize) -> Result<Graph, GraphError> {
    let edges = (1..n as u32).map(|i| (i - 1, i));
    Graph::from_edges(n, edges)
}

/// Complete graph on `n >= 1` vertices.
pub fn gen_complete(n: usize) -> Result<Graph, GraphError> {
    let edges = (0..n as u32).flat_map(|u| (u + 1..n as u32).map(move |v| (u, v)));
    Graph::from_edges(n, edges)
}

/// Graph on `n` vertices with no edges.
pub fn gen_edgeless(n: usize) -> Result<Graph, GraphError> {
    Graph::from_edges(n, std::iter::empty())
}

/// Hypercube of the given dimension: `2^dim` vertices, ids adjacent iff they
/// differ in exactly one bit.
pub fn gen_hypercube(dim: usize) -> Result<Graph, GraphError> {
    if dim > 25 {
        return Err(GraphError::InvalidParameter(format!(
            "hypercube dimension {dim} too large"
        )));
    }
    let n = 1usize << dim;
    let edges = (0..n as u32)
        .flat_map(move |u| (0..dim).map(move |b| (u, u ^ (1u32 << b))))
        .filter(|(u, v)| u < v);
    Graph::from_edges(n, edges)
}

/// Multi-dimensional torus with the given side lengths. Vertex ids use
/// row-major order over the coordinates. Sides of length 1 contribute no
/// edge in that dimension, length 2 a single edge.
pub fn gen_torus(dims: &[usize]) -> Result<Graph, GraphError> {
    if dims.is_empty() {
        return Err(GraphError::InvalidParameter("torus needs >= 1 dimension".into()));
    }
    if dims.iter().any(|&s| s == 0) {
        return Err(GraphError::InvalidParameter("torus side lengths must be positive".into()));
    }
    let n: usize = dims.iter().try_fold(1usize, |acc, &s| {
        acc.checked_mul(s).filter(|&p| p <= u32::MAX as usize)
    })
    .ok_or_else(|| GraphError::InvalidParameter("torus too large".into()))?;

    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let mut edges = Vec::new();
    let mut coord = vec![0usize; dims.len()];
    for id in 0..n {
        for (k, &side) in dims.iter().enumerate() {
            if side < 2 {
                continue;
            }
            let next = (coord[k] + 1) % side;
            if side == 2 && coord[k] == 1 {
                continue; // the single edge of a 2-side was added from coord 0
            }
            let nid = ((id as isize)
                + ((next as isize) - (coord[k] as isize)) * (strides[k] as isize))
                as usize;
            edges.push((id as u32, nid as u32));
        }
        // advance row-major coordinates
        for k in (0..dims.len()).rev() {
            coord[k] += 1;
            if coord[k] < dims[k] {
                break;
            }
            coord[k] = 0;
        }
    }
    Graph::from_edges(n, edges)
}

/// Random d-regular graph via the pairing model, deterministic per seed.
///
/// Half-edge stubs are shuffled and paired; pairs that would create a
/// self-loop or duplicate edge keep their stubs for the next round. If the
/// remaining stubs cannot be completed the whole attempt restarts.
pub fn gen_random_regular(n: usize, d: usize, seed: u64) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidParameter("n must be positive".into()));
    }
    if d >= n {
        return Err(GraphError::InvalidParameter(format!(
            "degree {d} must be smaller than n = {n}"
        )));
    }
    if n * d % 2 != 0 {
        return Err(GraphError::InvalidParameter(format!(
            "n * d must be even, got n = {n}, d = {d}"
        )));
    }
    if d == 0 {
        return gen_edgeless(n);
    }

    const MAX_RESTARTS: usize = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'attempt: for _ in 0..MAX_RESTARTS {
        let mut edges: HashSet<(u32, u32)> = HashSet::with_capacity(n * d / 2);
        let mut stubs: Vec<u32> = (0..n as u32).flat_map(|v| std::iter::repeat(v).take(d)).collect();
        while !stubs.is_empty() {
            stubs.shuffle(&mut rng);
            let mut kept = Vec::new();
            for pair in stubs.chunks(2) {
                let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                if a == b || edges.contains(&(a, b)) {
                    kept.push(pair[0]);
                    kept.push(pair[1]);
                } else {
                    edges.insert((a, b));
                }
            }
            if kept.len() == stubs.len() && !pairing_can_progress(&kept, &edges) {
                continue 'attempt;
            }
            stubs = kept;
        }
        let mut list: Vec<(u32, u32)> = edges.into_iter().collect();
        list.sort_unstable();
        return Graph::from_edges(n, list);
    }
    Err(GraphError::GenerationFailed(MAX_RESTARTS))
}

/// True if some pair of leftover stubs can still form a new edge.
fn pairing_can_progress(stubs: &[u32], edges: &HashSet<(u32, u32)>) -> bool {
    let mut distinct: Vec<u32> = stubs.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    for (i, &a) in distinct.iter().enumerate() {
        for &b in &distinct[i + 1..] {
            if !edges.contains(&(a, b)) {
                return true;
            }
        }
    }
    false
}

/// Cartesian product of two graphs. Vertex `(a, b)` has id `a * n2 + b`,
/// so traces are comparable across runs.
pub fn gen_cartesian_product(g1: &Graph, g2: &Graph) -> Result<Graph, GraphError> {
    let (n1, n2) = (g1.vertex_count(), g2.vertex_count());
    let n = n1
        .checked_mul(n2)
        .filter(|&p| p <= u32::MAX as usize)
        .ok_or_else(|| GraphError::InvalidParameter("product graph too large".into()))?;
    let mut edges = Vec::with_capacity(g1.edge_count() * n2 + g2.edge_count() * n1);
    for (a, a2) in g1.edges() {
        for b in 0..n2 as u32 {
            edges.push((a * n2 as u32 + b, a2 * n2 as u32 + b));
        }
    }
    for (b, b2) in g2.edges() {
        for a in 0..n1 as u32 {
            edges.push((a * n2 as u32 + b, a * n2 as u32 + b2));
        }
    }
    Graph::from_edges(n, edges)
}

/// Parses the edge-list text format:
///
/// ```text
/// # comment
/// n 3
/// 0 1
/// 1 2
/// 2 0
/// ```
///
/// The header `n <count>` precedes one `u v` edge per line. Edges are
/// undirected; listing a pair twice (in either orientation) is an error.
pub fn load_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut n: Option<usize> = None;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        match n {
            None => {
                if tokens.next() != Some("n") {
                    return Err(GraphError::Parse {
                        line,
                        message: "expected header \"n <count>\"".into(),
                    });
                }
                let count = tokens
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .filter(|&c| c > 0)
                    .ok_or(GraphError::Parse {
                        line,
                        message: "header needs a positive vertex count".into(),
                    })?;
                if tokens.next().is_some() {
                    return Err(GraphError::Parse {
                        line,
                        message: "trailing tokens after header".into(),
                    });
                }
                n = Some(count);
            }
            Some(_) => {
                let u = tokens.next().and_then(|t| t.parse::<u32>().ok());
                let v = tokens.next().and_then(|t| t.parse::<u32>().ok());
                match (u, v, tokens.next()) {
                    (Some(u), Some(v), None) => edges.push((u, v)),
                    _ => {
                        return Err(GraphError::Parse {
                            line,
                            message: format!("expected \"u v\", got {content:?}"),
                        })
                    }
                }
            }
        }
    }
    let n = n.ok_or(GraphError::Parse {
        line: 0,
        message: "missing header \"n <count>\"".into(),
    })?;
    Graph::from_edges(n, edges)
}

/// Canonical edge-list text: header, then each edge once as `u v` with
/// `u < v`, sorted. `load_edge_list(save_edge_list(g))` reproduces `g`.
pub fn save_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n {}", g.vertex_count());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_is_2_regular() {
        let g = gen_cycle(3).unwrap();
        assert_eq!(g.vertex_count(), 3);
        for v in 0..3 {
            assert_eq!(g.degree(v), 2);
        }
    }

    #[test]
    fn cycle_rejects_small_n() {
        assert!(gen_cycle(2).is_err());
    }

    #[test]
    fn six_cycle_is_2_regular() {
        let g = gen_cycle(6).unwrap();
        assert!((0..6).all(|v| g.degree(v) == 2));
        assert!(g.contains_edge(0, 5));
    }

    #[test]
    fn cycle_distance_to_antipode() {
        let g = gen_cycle(8).unwrap();
        assert_eq!(g.distance(0, 4).unwrap(), Some(4));
        assert_eq!(g.diameter(), Some(4));
    }

    #[test]
    fn path_distances() {
        let g = gen_path(6).unwrap();
        assert_eq!(g.distance(1, 4).unwrap(), Some(3));
    }

    #[test]
    fn hypercube_structure() {
        let g = gen_hypercube(3).unwrap();
        assert_eq!(g.vertex_count(), 8);
        assert!((0..8).all(|v| g.degree(v) == 3));
        assert_eq!(g.diameter(), Some(3));
    }

    #[test]
    fn torus_ball_sizes() {
        let g = gen_torus(&[4, 4]).unwrap();
        for u in 0..16 {
            assert_eq!(g.ball_sizes(u, 1).unwrap(), vec![1, 5]);
        }
    }

    #[test]
    fn complete_ball_saturates() {
        let g = gen_complete(5).unwrap();
        for u in 0..5 {
            assert_eq!(g.ball_sizes(u, 2).unwrap(), vec![1, 5, 5]);
        }
    }

    #[test]
    fn cycle_ball_growth() {
        let g = gen_cycle(10).unwrap();
        assert_eq!(g.ball_sizes(0, 3).unwrap(), vec![1, 3, 5, 7]);
    }

    #[test]
    fn isolated_vertex_ball_sizes() {
        let g = gen_edgeless(1).unwrap();
        assert_eq!(g.ball_sizes(0, 4).unwrap(), vec![1, 1, 1, 1, 1]);
    }

    #[test]
    fn disjoint_edges_have_no_diameter() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(g.diameter(), None);
        assert_eq!(g.distance(0, 2).unwrap(), None);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = load_edge_list("n 3\n0 1\n1 2\n2 0").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 3);
        let text = save_edge_list(&g);
        let g2 = load_edge_list(&text).unwrap();
        assert_eq!(g, g2);
        assert_eq!(save_edge_list(&g2), text);
    }

    #[test]
    fn edge_list_rejects_self_loop() {
        assert!(matches!(
            load_edge_list("n 2\n0 0"),
            Err(GraphError::SelfLoop(0))
        ));
    }

    #[test]
    fn edge_list_rejects_duplicates() {
        assert!(matches!(
            load_edge_list("n 3\n0 1\n1 0"),
            Err(GraphError::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            Graph::from_edges(3, [(0, 1), (0, 1)]),
            Err(GraphError::DuplicateEdge(0, 1))
        ));
    }

    #[test]
    fn edge_list_comments_and_errors() {
        let g = load_edge_list("# triangle\nn 3\n0 1 # first\n\n1 2\n2 0").unwrap();
        assert_eq!(g.edge_count(), 3);
        assert!(load_edge_list("0 1\nn 2").is_err());
        assert!(load_edge_list("n 2\n0 5").is_err());
        assert!(load_edge_list("n 2\n0 x").is_err());
    }

    #[test]
    fn random_regular_is_regular_and_deterministic() {
        let g = gen_random_regular(64, 3, 7).unwrap();
        assert!((0..64).all(|v| g.degree(v) == 3));
        let h = gen_random_regular(64, 3, 7).unwrap();
        assert_eq!(g, h);
        let other = gen_random_regular(64, 3, 8).unwrap();
        assert_ne!(g, other);
    }

    #[test]
    fn random_regular_handles_dense_degrees() {
        // Degrees this large would essentially never survive a full-restart
        // pairing; the per-round stub retention has to cope.
        let g = gen_random_regular(256, 18, 3).unwrap();
        assert!((0..256).all(|v| g.degree(v) == 18));
    }

    #[test]
    fn random_regular_rejects_bad_parameters() {
        assert!(gen_random_regular(5, 3, 0).is_err()); // odd n*d
        assert!(gen_random_regular(4, 4, 0).is_err()); // d >= n
    }

    #[test]
    fn cartesian_product_layout() {
        let p2 = gen_path(2).unwrap();
        let p3 = gen_path(3).unwrap();
        let g = gen_cartesian_product(&p2, &p3).unwrap();
        // id(a, b) = a * 3 + b
        assert_eq!(g.vertex_count(), 6);
        assert!(g.contains_edge(0, 3)); // (0,0)-(1,0)
        assert!(g.contains_edge(0, 1)); // (0,0)-(0,1)
        assert!(!g.contains_edge(0, 4));
        assert_eq!(g.edge_count(), 3 * 1 + 2 * 2);
    }

    #[test]
    fn torus_of_two_sides_each_two() {
        // 2x2 torus is a 4-cycle: each side contributes one edge per fiber.
        let g = gen_torus(&[2, 2]).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert!((0..4).all(|v| g.degree(v) == 2));
    }

    #[test]
    fn ball_growth_is_monotone_and_bounded() {
        for g in [
            gen_cycle(17).unwrap(),
            gen_torus(&[3, 5]).unwrap(),
            gen_random_regular(24, 3, 1).unwrap(),
        ] {
            let delta = g.max_degree();
            for u in 0..g.vertex_count() as u32 {
                let sizes = g.ball_sizes(u, 6).unwrap();
                assert_eq!(sizes[0], 1);
                for w in sizes.windows(2) {
                    assert!(w[1] >= w[0]);
                    assert!(w[1] <= w[0] * (1 + delta));
                }
            }
        }
    }
}
