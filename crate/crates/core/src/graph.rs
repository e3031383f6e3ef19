//! Weighted undirected graphs and the structural statistics used on
//! coordinated subgraphs.

use std::collections::{BTreeMap, VecDeque};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct UndirectedGraph {
    nodes: Vec<String>,
    /// Neighbor lists sorted by index, no self loops.
    adj: Vec<Vec<(usize, f64)>>,
}

impl UndirectedGraph {
    /// Builds from `(a, b, weight)` triples; duplicate pairs sum, self
    /// loops are dropped.
    pub fn from_edges(
        nodes: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Self {
        let mut maps: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); nodes.len()];
        for (a, b, w) in edges {
            if a == b {
                continue;
            }
            *maps[a].entry(b).or_insert(0.0) += w;
            *maps[b].entry(a).or_insert(0.0) += w;
        }
        let adj = maps.into_iter().map(|m| m.into_iter().collect()).collect();
        UndirectedGraph { nodes, adj }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == id)
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.adj[a]
            .binary_search_by_key(&b, |x| x.0)
            .map(|k| self.adj[a][k].1)
            .unwrap_or(0.0)
    }

    /// Edges with `a < b`, in lexicographic index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj.iter().enumerate().flat_map(|(a, list)| {
            list.iter()
                .filter(move |(b, _)| *b > a)
                .map(move |&(b, w)| (a, b, w))
        })
    }

    pub fn max_weight(&self) -> f64 {
        self.edges().map(|e| e.2).fold(0.0, f64::max)
    }

    /// Subgraph induced by `keep` (indices into this graph). Node order
    /// follows `keep`.
    pub fn induced(&self, keep: &[usize]) -> UndirectedGraph {
        let mut pos = vec![usize::MAX; self.nodes.len()];
        for (k, &i) in keep.iter().enumerate() {
            pos[i] = k;
        }
        let nodes = keep.iter().map(|&i| self.nodes[i].clone()).collect();
        let edges = self
            .edges()
            .filter(|(a, b, _)| pos[*a] != usize::MAX && pos[*b] != usize::MAX)
            .map(|(a, b, w)| (pos[a], pos[b], w))
            .collect::<Vec<_>>();
        UndirectedGraph::from_edges(nodes, edges)
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.nodes.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &(v, _) in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        q.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Unweighted hop distances from `src`.
    pub fn bfs_hops(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.nodes.len()];
        dist[src] = Some(0);
        let mut q = VecDeque::from([src]);
        while let Some(u) = q.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &(v, _) in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    q.push_back(v);
                }
            }
        }
        dist
    }

    /// Unweighted local clustering coefficient (0 for degree < 2).
    pub fn local_clustering(&self, i: usize) -> f64 {
        let nb = &self.adj[i];
        let k = nb.len();
        if k < 2 {
            return 0.0;
        }
        let mut links = 0usize;
        for (x, &(a, _)) in nb.iter().enumerate() {
            for &(b, _) in &nb[x + 1..] {
                if self.adj[a].binary_search_by_key(&b, |e| e.0).is_ok() {
                    links += 1;
                }
            }
        }
        2.0 * links as f64 / (k * (k - 1)) as f64
    }

    fn edge_weight(&self, w: f64, weighted: bool) -> f64 {
        if weighted {
            w
        } else {
            1.0
        }
    }

    /// Newman modularity of a partition.
    pub fn modularity(&self, partition: &[Vec<usize>], weighted: bool) -> f64 {
        let m: f64 = self.edges().map(|e| self.edge_weight(e.2, weighted)).sum();
        if m == 0.0 {
            return 0.0;
        }
        let mut label = vec![0usize; self.nodes.len()];
        for (c, members) in partition.iter().enumerate() {
            for &i in members {
                label[i] = c;
            }
        }
        let mut internal = vec![0.0; partition.len()];
        let mut degree = vec![0.0; partition.len()];
        for (a, b, w) in self.edges() {
            let w = self.edge_weight(w, weighted);
            degree[label[a]] += w;
            degree[label[b]] += w;
            if label[a] == label[b] {
                internal[label[a]] += w;
            }
        }
        internal
            .iter()
            .zip(&degree)
            .map(|(l, d)| l / m - (d / (2.0 * m)).powi(2))
            .sum()
    }

    /// Clauset–Newman–Moore greedy agglomeration. Merges the pair with the
    /// largest modularity gain (ties: smallest community ids) until no merge
    /// improves modularity. Communities are sorted and ordered by smallest
    /// member.
    pub fn greedy_modularity(&self, weighted: bool) -> Vec<Vec<usize>> {
        let n = self.nodes.len();
        let m: f64 = self.edges().map(|e| self.edge_weight(e.2, weighted)).sum();
        if m == 0.0 {
            return (0..n).map(|i| vec![i]).collect();
        }
        let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
        let mut degree: Vec<f64> = (0..n)
            .map(|i| {
                self.adj[i]
                    .iter()
                    .map(|&(_, w)| self.edge_weight(w, weighted))
                    .sum()
            })
            .collect();
        let mut between: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (a, b, w) in self.edges() {
            *between.entry((a, b)).or_insert(0.0) += self.edge_weight(w, weighted);
        }
        loop {
            let mut best: Option<((usize, usize), f64)> = None;
            for (&(a, b), &l) in &between {
                let dq = l / m - degree[a] * degree[b] / (2.0 * m * m);
                if best.is_none_or(|(_, d)| dq > d) {
                    best = Some(((a, b), dq));
                }
            }
            let Some(((keep, gone), dq)) = best else {
                break;
            };
            if dq <= 0.0 {
                break;
            }
            let moved = members[gone].take().unwrap_or_default();
            if let Some(k) = members[keep].as_mut() {
                k.extend(moved);
            }
            degree[keep] += degree[gone];
            degree[gone] = 0.0;
            let old = std::mem::take(&mut between);
            for ((a, b), l) in old {
                let a2 = if a == gone { keep } else { a };
                let b2 = if b == gone { keep } else { b };
                if a2 == b2 {
                    continue;
                }
                let key = (a2.min(b2), a2.max(b2));
                *between.entry(key).or_insert(0.0) += l;
            }
        }
        let mut out: Vec<Vec<usize>> = members
            .into_iter()
            .flatten()
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        out.sort_by_key(|c| c[0]);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("n{i}")).collect()
    }

    pub(crate) fn two_triangles() -> UndirectedGraph {
        UndirectedGraph::from_edges(
            named(6),
            [
                (0, 1, 1.0),
                (1, 2, 1.0),
                (0, 2, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (3, 5, 1.0),
            ],
        )
    }

    #[test]
    fn components_and_modularity_of_two_triangles() {
        let g = two_triangles();
        assert_eq!(g.connected_components(), vec![vec![0, 1, 2], vec![3, 4, 5]]);
        let part = g.greedy_modularity(false);
        assert_eq!(part, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert!((g.modularity(&part, false) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn clustering_of_triangle_and_star() {
        let g = two_triangles();
        assert_eq!(g.local_clustering(0), 1.0);
        let star = UndirectedGraph::from_edges(named(5), (1..5).map(|i| (0, i, 1.0)));
        assert_eq!(star.local_clustering(0), 0.0);
        assert_eq!(star.bfs_hops(1)[2], Some(2));
    }

    #[test]
    fn induced_keeps_only_internal_edges() {
        let g = two_triangles();
        let sub = g.induced(&[0, 1, 3]);
        assert_eq!(sub.edge_count(), 1);
        assert_eq!(sub.nodes(), &["n0", "n1", "n3"]);
        assert_eq!(sub.weight(0, 1), 1.0);
    }

    #[test]
    fn greedy_modularity_prefers_heavy_bridges_when_weighted() {
        // path 0-1-2-3 with a heavy middle edge
        let g = UndirectedGraph::from_edges(named(4), [(0, 1, 1.0), (1, 2, 10.0), (2, 3, 1.0)]);
        let weighted = g.greedy_modularity(true);
        assert!(weighted.iter().any(|c| c.contains(&1) && c.contains(&2)));
        let q = g.modularity(&weighted, true);
        let singletons: Vec<Vec<usize>> = (0..4).map(|i| vec![i]).collect();
        assert!(q > g.modularity(&singletons, true));
    }
}
