//! Graph routines over the pipe network: the reservoir shortest-path tree,
//! the protected path list, BFS distance levels and cycle bases.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};

use crate::error::ModelError;
use crate::network::{Network, NodeId, PipeId};

/// Shortest-path tree rooted at all reservoirs at once, weighted by pipe
/// length.
#[derive(Debug, Clone, PartialEq)]
pub struct SptResult {
    pub dist: Vec<f64>,
    pub parent_pipe: Vec<Option<PipeId>>,
}

impl SptResult {
    pub fn dist(&self, node: NodeId) -> f64 {
        self.dist[node.0]
    }

    pub fn parent(&self, node: NodeId) -> Option<PipeId> {
        self.parent_pipe[node.0]
    }

    /// Pipes on the tree path from `node` to its reservoir, starting at
    /// `node`.
    pub fn path_to_source<'a>(&'a self, net: &'a Network, node: NodeId) -> impl Iterator<Item = PipeId> + 'a {
        let mut cur = node;
        std::iter::from_fn(move || {
            let p = self.parent_pipe[cur.0]?;
            cur = net.pipe(p).other_end(cur);
            Some(p)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, node)
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multi-source Dijkstra from every reservoir. Among equal-length
/// alternatives the parent pipe with the smaller id wins.
pub fn shortest_path_tree(net: &Network) -> Result<SptResult, ModelError> {
    let n = net.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<PipeId>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for r in net.reservoirs() {
        dist[r.0] = 0.0;
        heap.push(HeapEntry { dist: 0.0, node: r.0 });
    }
    while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(pipe, v) in net.incident(NodeId(u)) {
            let v = v.0;
            if done[v] {
                continue;
            }
            let nd = d + net.pipe(pipe).length;
            if nd < dist[v] {
                dist[v] = nd;
                parent[v] = Some(pipe);
                heap.push(HeapEntry { dist: nd, node: v });
            } else if nd == dist[v] && parent[v].is_some_and(|p| pipe < p) {
                parent[v] = Some(pipe);
            }
        }
    }
    if done.iter().any(|d| !d) {
        return Err(ModelError::Disconnected);
    }
    Ok(SptResult {
        dist,
        parent_pipe: parent,
    })
}

/// Pipes on the shortest paths from the highest-demand junctions to their
/// nearest reservoir. A junction qualifies when its base demand lies in
/// `[d_max - alpha (d_max - d_min), d_max]`, with the extremes taken over
/// all junctions.
pub fn path_list(net: &Network, spt: &SptResult, alpha: f64) -> Result<BTreeSet<PipeId>, ModelError> {
    let mut demands = Vec::new();
    for j in net.junctions() {
        demands.push((j, net.base_demand(j)?));
    }
    let mut out = BTreeSet::new();
    if demands.is_empty() {
        return Ok(out);
    }
    let d_max = demands.iter().map(|d| d.1).fold(f64::NEG_INFINITY, f64::max);
    let d_min = demands.iter().map(|d| d.1).fold(f64::INFINITY, f64::min);
    let threshold = d_max - alpha * (d_max - d_min);
    for (j, d) in demands {
        if d >= threshold {
            out.extend(spt.path_to_source(net, j));
        }
    }
    Ok(out)
}

/// Distance level of every pipe from a pair of seed nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelMap {
    levels: Vec<usize>,
    max_level: usize,
}

impl LevelMap {
    pub fn level(&self, pipe: PipeId) -> usize {
        self.levels[pipe.0]
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn from_levels(levels: Vec<usize>) -> Self {
        let max_level = levels.iter().copied().max().unwrap_or(0);
        Self { levels, max_level }
    }
}

/// Breadth-first layers from `seeds`. Seed nodes have depth 0 and a pipe's
/// level is one more than the smaller depth of its endpoints, so every pipe
/// touching a seed is at level 1.
pub fn bfs_levels(net: &Network, seeds: &[NodeId]) -> LevelMap {
    let mut depth = vec![usize::MAX; net.node_count()];
    let mut queue = VecDeque::new();
    for &s in seeds {
        if depth[s.0] != 0 {
            depth[s.0] = 0;
            queue.push_back(s.0);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &(_, v) in net.incident(NodeId(u)) {
            if depth[v.0] == usize::MAX {
                depth[v.0] = depth[u] + 1;
                queue.push_back(v.0);
            }
        }
    }
    let levels = net
        .pipes()
        .iter()
        .map(|p| depth[p.from.0].min(depth[p.to.0]).saturating_add(1))
        .collect();
    LevelMap::from_levels(levels)
}

/// Dimension of the cycle space: `|E| - |V| + components`.
pub fn cycle_space_dim(net: &Network) -> usize {
    (net.pipe_count() + net.component_count()).saturating_sub(net.node_count())
}

/// A pipe traversed in (`forward == true`) or against its reference
/// orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrientedPipe {
    pub pipe: PipeId,
    pub forward: bool,
}

/// Fundamental cycles with respect to a BFS spanning forest; one cycle per
/// non-tree pipe, each a closed walk.
pub fn fundamental_cycles(net: &Network) -> Vec<Vec<OrientedPipe>> {
    let n = net.node_count();
    let mut parent: Vec<Option<(PipeId, NodeId)>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    let mut tree = vec![false; net.pipe_count()];
    let mut queue = VecDeque::new();
    for root in 0..n {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for &(p, v) in net.incident(NodeId(u)) {
                if depth[v.0] == usize::MAX {
                    depth[v.0] = depth[u] + 1;
                    parent[v.0] = Some((p, NodeId(u)));
                    tree[p.0] = true;
                    queue.push_back(v.0);
                }
            }
        }
    }

    let step = |node: NodeId| -> (OrientedPipe, NodeId) {
        let (p, up) = parent[node.0].expect("non-root node has a parent");
        // walking node -> up
        let forward = net.pipe(p).from == node;
        (OrientedPipe { pipe: p, forward }, up)
    };

    let mut cycles = Vec::new();
    for (i, pipe) in net.pipes().iter().enumerate() {
        if tree[i] {
            continue;
        }
        // walk from -> to along the pipe, then to -> ... -> from through the tree
        let mut head = vec![OrientedPipe {
            pipe: PipeId(i),
            forward: true,
        }];
        let mut a = pipe.to;
        let mut b = pipe.from;
        let mut tail = Vec::new();
        while a != b {
            if depth[a.0] >= depth[b.0] {
                let (op, up) = step(a);
                head.push(op);
                a = up;
            } else {
                let (op, up) = step(b);
                // reversed later: this segment is walked from the LCA down to `from`
                tail.push(OrientedPipe {
                    pipe: op.pipe,
                    forward: !op.forward,
                });
                b = up;
            }
        }
        tail.reverse();
        head.extend(tail);
        cycles.push(head);
    }
    cycles
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{DemandCategory, DemandModel, Node, Pipe};

    fn junction(label: &str, demand: f64) -> Node {
        Node::junction(
            label,
            0.0,
            vec![DemandCategory {
                base_load: demand,
                pattern: None,
            }],
        )
    }

    fn pipe(label: &str, a: usize, b: usize, length: f64) -> Pipe {
        Pipe {
            label: label.into(),
            from: NodeId(a),
            to: NodeId(b),
            length,
        }
    }

    fn network(nodes: Vec<Node>, pipes: Vec<Pipe>) -> Network {
        Network::new(nodes, pipes, DemandModel::constant(24)).unwrap()
    }

    #[test]
    fn spt_on_a_path() {
        let net = network(
            vec![Node::reservoir("R", 10.0), junction("a", 0.0), junction("b", 0.0)],
            vec![pipe("p1", 0, 1, 100.0), pipe("p2", 1, 2, 50.0)],
        );
        let spt = shortest_path_tree(&net).unwrap();
        assert_eq!(spt.dist(NodeId(2)), 150.0);
        assert_eq!(spt.parent(NodeId(2)), Some(PipeId(1)));
        assert_eq!(spt.dist(NodeId(0)), 0.0);
        assert_eq!(spt.parent(NodeId(0)), None);
        let path: Vec<_> = spt.path_to_source(&net, NodeId(2)).collect();
        assert_eq!(path, vec![PipeId(1), PipeId(0)]);
    }

    #[test]
    fn spt_attaches_to_nearest_of_two_reservoirs() {
        // R1 -100- a -30- m -50- b -10- R2: m is 130 from R1 and 60 from R2
        let net = network(
            vec![
                Node::reservoir("R1", 10.0),
                junction("a", 0.0),
                junction("m", 0.0),
                junction("b", 0.0),
                Node::reservoir("R2", 10.0),
            ],
            vec![
                pipe("p1", 0, 1, 100.0),
                pipe("p2", 1, 2, 30.0),
                pipe("p3", 2, 3, 50.0),
                pipe("p4", 3, 4, 10.0),
            ],
        );
        let spt = shortest_path_tree(&net).unwrap();
        assert_eq!(spt.dist(NodeId(2)), 60.0);
        assert_eq!(spt.parent(NodeId(2)), Some(PipeId(2)));
        assert_eq!(spt.dist(NodeId(1)), 90.0);
        assert_eq!(spt.parent(NodeId(1)), Some(PipeId(1)));
    }

    #[test]
    fn spt_ties_prefer_smaller_pipe_id() {
        // two parallel equal pipes R-a
        let net = network(
            vec![Node::reservoir("R", 10.0), junction("a", 0.0)],
            vec![pipe("p1", 0, 1, 10.0), pipe("p2", 1, 0, 10.0)],
        );
        let spt = shortest_path_tree(&net).unwrap();
        assert_eq!(spt.parent(NodeId(1)), Some(PipeId(0)));
    }

    fn star(demands: &[f64]) -> Network {
        let mut nodes = vec![Node::reservoir("R", 10.0), junction("c", 0.0)];
        let mut pipes = vec![pipe("trunk", 0, 1, 100.0)];
        for (i, &d) in demands.iter().enumerate() {
            nodes.push(junction(&format!("l{i}"), d));
            pipes.push(pipe(&format!("s{i}"), 1, i + 2, 10.0));
        }
        network(nodes, pipes)
    }

    #[test]
    fn path_list_selects_high_demand_paths() {
        // junction demands {0 (centre), 10, 1, 1}: interval [10 - 0.05*10, 10]
        let net = star(&[10.0, 1.0, 1.0]);
        let spt = shortest_path_tree(&net).unwrap();
        let set = path_list(&net, &spt, 0.05).unwrap();
        assert_eq!(set.into_iter().collect::<Vec<_>>(), vec![PipeId(0), PipeId(1)]);
    }

    #[test]
    fn path_list_with_equal_demands_covers_whole_tree() {
        let net = network(
            vec![
                Node::reservoir("R", 10.0),
                junction("a", 1.0),
                junction("b", 1.0),
                junction("c", 1.0),
            ],
            vec![pipe("p1", 0, 1, 1.0), pipe("p2", 1, 2, 1.0), pipe("p3", 1, 3, 1.0)],
        );
        let spt = shortest_path_tree(&net).unwrap();
        let set = path_list(&net, &spt, 0.0).unwrap();
        assert_eq!(set.len(), 3);
    }

    #[test]
    fn levels_on_a_path() {
        let net = network(
            vec![
                Node::reservoir("R", 10.0),
                junction("a", 0.0),
                junction("b", 0.0),
                junction("c", 0.0),
            ],
            vec![pipe("Ra", 0, 1, 1.0), pipe("ab", 1, 2, 1.0), pipe("bc", 2, 3, 1.0)],
        );
        let lv = bfs_levels(&net, &[NodeId(0), NodeId(1)]);
        assert_eq!(lv.level(PipeId(0)), 1);
        assert_eq!(lv.level(PipeId(1)), 1);
        assert_eq!(lv.level(PipeId(2)), 2);
        assert_eq!(lv.max_level(), 2);
    }

    #[test]
    fn cycle_space_of_k4() {
        let nodes = vec![
            Node::reservoir("R", 10.0),
            junction("a", 0.0),
            junction("b", 0.0),
            junction("c", 0.0),
        ];
        let mut pipes = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                pipes.push(pipe(&format!("p{i}{j}"), i, j, 1.0));
            }
        }
        let net = network(nodes, pipes);
        assert_eq!(cycle_space_dim(&net), 3);
        let cycles = fundamental_cycles(&net);
        assert_eq!(cycles.len(), 3);
        for c in &cycles {
            assert!(is_closed_walk(&net, c));
        }
    }

    #[test]
    fn tree_has_no_cycles() {
        let net = star(&[1.0, 2.0]);
        assert_eq!(cycle_space_dim(&net), 0);
        assert!(fundamental_cycles(&net).is_empty());
    }

    pub(crate) fn is_closed_walk(net: &Network, cycle: &[OrientedPipe]) -> bool {
        let ends = |op: &OrientedPipe| {
            let p = net.pipe(op.pipe);
            if op.forward {
                (p.from, p.to)
            } else {
                (p.to, p.from)
            }
        };
        let start = ends(&cycle[0]).0;
        let mut cur = start;
        for op in cycle {
            let (a, b) = ends(op);
            if a != cur {
                return false;
            }
            cur = b;
        }
        cur == start
    }
}
