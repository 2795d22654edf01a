use serde::{Deserialize, Serialize};

use crate::market::{BidProfile, MarketInstance};

/// Bids at or below this are treated as absent from the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-8;

/// Bipartite buyer/good graph with an edge for every bid above a threshold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportGraph {
    pub n: usize,
    pub m: usize,
    /// `(buyer, good)` pairs in row-major order.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Vertex {
    Buyer(usize),
    Good(usize),
}

impl SupportGraph {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn buyer_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, _) in &self.edges {
            deg[i] += 1;
        }
        deg
    }

    pub fn average_buyer_degree(&self) -> f64 {
        self.edges.len() as f64 / self.n as f64
    }

    pub fn is_forest(&self) -> bool {
        find_cycle(self).is_none()
    }

    fn vertex(&self, v: usize) -> Vertex {
        if v < self.n {
            Vertex::Buyer(v)
        } else {
            Vertex::Good(v - self.n)
        }
    }
}

pub fn support_graph(b: &BidProfile, threshold: f64) -> SupportGraph {
    let mut edges = Vec::new();
    for i in 0..b.n() {
        for (j, &bij) in b.row(i).iter().enumerate() {
            if bij > threshold {
                edges.push((i, j));
            }
        }
    }
    SupportGraph {
        n: b.n(),
        m: b.m(),
        edges,
    }
}

/// Returns one cycle, starting at a buyer and alternating buyer, good,
/// buyer, ...; the closing edge back to the first vertex is implied.
///
/// Iterative depth-first search over vertices in index order, so the result
/// is deterministic for a given edge list.
pub fn find_cycle(g: &SupportGraph) -> Option<Vec<Vertex>> {
    let total = g.n + g.m;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    for &(i, j) in &g.edges {
        adj[i].push(g.n + j);
        adj[g.n + j].push(i);
    }
    // Parent and depth in the DFS forest; usize::MAX marks unvisited.
    let mut parent = vec![usize::MAX; total];
    let mut depth = vec![usize::MAX; total];
    for root in 0..total {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        parent[root] = root;
        let mut stack = vec![(root, 0usize)];
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next == adj[v].len() {
                stack.pop();
                continue;
            }
            let w = adj[v][*next];
            *next += 1;
            if depth[w] == usize::MAX {
                depth[w] = depth[v] + 1;
                parent[w] = v;
                stack.push((w, 0));
            } else if w != parent[v] && depth[w] < depth[v] {
                // Back edge v -> ancestor w: the tree path w..v closes a cycle.
                let mut path = vec![v];
                let mut u = v;
                while u != w {
                    u = parent[u];
                    path.push(u);
                }
                path.reverse();
                return Some(rotate_to_buyer(path.into_iter().map(|x| g.vertex(x)).collect()));
            }
        }
    }
    None
}

fn rotate_to_buyer(mut cycle: Vec<Vertex>) -> Vec<Vertex> {
    if let Some(k) = cycle.iter().position(|v| matches!(v, Vertex::Buyer(_))) {
        cycle.rotate_left(k);
    }
    cycle
}

/// `sum_k ln a(i_k, j_k) - ln a(i_{k+1}, j_k)` around a cycle
/// `i_1, j_1, i_2, j_2, ...`. At an equilibrium every buyer's bang-per-buck
/// is constant on its support, so prices cancel and the sum is zero.
pub fn cycle_log_balance(cycle: &[Vertex], market: &MarketInstance) -> f64 {
    let len = cycle.len();
    let mut acc = 0.0;
    for k in (0..len).step_by(2) {
        let (Vertex::Buyer(i), Vertex::Good(j), Vertex::Buyer(next)) =
            (cycle[k], cycle[(k + 1) % len], cycle[(k + 2) % len])
        else {
            panic!("cycle must alternate buyer, good, buyer");
        };
        acc += market.valuation(i, j).ln() - market.valuation(next, j).ln();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, m: usize, edges: &[(usize, usize)]) -> SupportGraph {
        SupportGraph {
            n,
            m,
            edges: edges.to_vec(),
        }
    }

    #[test]
    fn support_graph_examples() {
        let diag = BidProfile::from_rows(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let g = support_graph(&diag, SUPPORT_THRESHOLD);
        assert_eq!(g.edges, vec![(0, 0), (1, 1)]);
        assert!(find_cycle(&g).is_none());

        let uni = BidProfile::from_rows(vec![vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        let g = support_graph(&uni, SUPPORT_THRESHOLD);
        assert_eq!(g.edge_count(), 4);
        let cycle = find_cycle(&g).unwrap();
        assert_eq!(cycle.len(), 4);
        assert!(matches!(cycle[0], Vertex::Buyer(_)));

        let tiny = BidProfile::from_rows(vec![vec![0.5, 1e-9], vec![1e-9, 0.5]]).unwrap();
        assert_eq!(support_graph(&tiny, SUPPORT_THRESHOLD).edge_count(), 2);

        let empty = BidProfile::zeros(3, 2);
        assert!(support_graph(&empty, SUPPORT_THRESHOLD).edges.is_empty());
    }

    #[test]
    fn forests_have_no_cycle() {
        let star = graph(3, 3, &[(0, 0), (1, 0), (2, 0), (2, 1), (2, 2)]);
        assert!(star.is_forest());
        assert_eq!(star.buyer_degrees(), vec![1, 1, 3]);
        assert!(graph(0, 0, &[]).is_forest());
    }

    #[test]
    fn cycle_is_a_closed_alternating_walk() {
        let g = graph(3, 3, &[(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 0)]);
        let cycle = find_cycle(&g).unwrap();
        assert_eq!(cycle.len(), 6);
        for k in 0..cycle.len() {
            let (a, b) = (cycle[k], cycle[(k + 1) % cycle.len()]);
            let edge = match (a, b) {
                (Vertex::Buyer(i), Vertex::Good(j)) | (Vertex::Good(j), Vertex::Buyer(i)) => (i, j),
                _ => panic!("not alternating"),
            };
            assert!(g.edges.contains(&edge));
        }
    }

    #[test]
    fn too_many_edges_force_a_cycle() {
        // Every graph on n + m vertices with more than n + m - 1 edges.
        for mask in 0u32..(1 << 9) {
            let edges: Vec<(usize, usize)> =
                (0..9).filter(|k| mask & (1 << k) != 0).map(|k| (k / 3, k % 3)).collect();
            let g = graph(3, 3, &edges);
            if edges.len() > 5 {
                assert!(find_cycle(&g).is_some(), "{edges:?}");
            }
        }
    }

    #[test]
    fn cycle_balance_on_proportional_valuations() {
        // Rows are identical, so every 4-cycle balances exactly.
        let m = MarketInstance::new(vec![0.5, 0.5], vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        let cycle = [Vertex::Buyer(0), Vertex::Good(0), Vertex::Buyer(1), Vertex::Good(1)];
        assert!(cycle_log_balance(&cycle, &m).abs() < 1e-15);
        let skew = MarketInstance::new(vec![0.5, 0.5], vec![vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
        assert!((cycle_log_balance(&cycle, &skew) - 2.0 * 4f64.ln()).abs() < 1e-12);
    }
}
