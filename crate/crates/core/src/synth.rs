//! Small synthetic networks for tests, examples and benchmarks.

use std::collections::BTreeMap;

use crate::network::{
    DemandCategory, DemandModel, Network, Node, NodeId, Pipe, PipeType, PipeTypeCatalog, Solution, DEFAULT_PERIODS,
};

/// Pattern id used by [`NetworkBuilder::diurnal`].
pub const DIURNAL: &str = "diurnal";

/// A 24-hour demand pattern with a morning and an evening peak.
pub fn diurnal_pattern() -> Vec<f64> {
    vec![
        0.5, 0.45, 0.4, 0.4, 0.45, 0.6, 0.9, 1.3, 1.5, 1.35, 1.2, 1.1, 1.05, 1.0, 0.95, 0.95, 1.0, 1.15, 1.4, 1.6,
        1.45, 1.1, 0.8, 0.6,
    ]
}

/// Incremental construction of a [`Network`] with labels `R0.., J0..`
/// chosen by the caller. Junction demands use the pattern set with
/// [`Self::pattern`] when there is one.
#[derive(Debug, Clone, Default)]
pub struct NetworkBuilder {
    nodes: Vec<Node>,
    pipes: Vec<Pipe>,
    patterns: BTreeMap<String, Vec<f64>>,
    pattern: Option<String>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Uses [`diurnal_pattern`] for all junctions added afterwards.
    pub fn diurnal(self) -> Self {
        self.pattern(DIURNAL, diurnal_pattern())
    }

    pub fn pattern(mut self, id: &str, multipliers: Vec<f64>) -> Self {
        self.patterns.insert(id.to_string(), multipliers);
        self.pattern = Some(id.to_string());
        self
    }

    pub fn reservoir(&mut self, label: &str, head: f64) -> NodeId {
        self.nodes.push(Node::reservoir(label, head));
        NodeId(self.nodes.len() - 1)
    }

    /// Adds a junction with demand `demand` (m³/s); zero means no category.
    pub fn junction(&mut self, label: &str, elevation: f64, demand: f64) -> NodeId {
        let demands = if demand > 0.0 {
            vec![DemandCategory {
                base_load: demand,
                pattern: self.pattern.clone(),
            }]
        } else {
            Vec::new()
        };
        self.nodes.push(Node::junction(label, elevation, demands));
        NodeId(self.nodes.len() - 1)
    }

    pub fn pipe(&mut self, from: NodeId, to: NodeId, length: f64) {
        let label = format!("P{}", self.pipes.len() + 1);
        self.pipes.push(Pipe {
            label,
            from,
            to,
            length,
        });
    }

    /// Panics if the network is invalid; fixtures are built in code.
    pub fn build(self) -> Network {
        let periods = self.patterns.values().map(Vec::len).max().unwrap_or(DEFAULT_PERIODS);
        let dm = DemandModel::new(self.patterns, periods).expect("valid patterns");
        Network::new(self.nodes, self.pipes, dm).expect("valid fixture network")
    }
}

/// Reservoir at `head` feeding a chain of junctions. Junction `i` sits at
/// `elevations[i]`, draws `demands[i]` and is reached over `lengths[i]`.
pub fn path(head: f64, lengths: &[f64], elevations: &[f64], demands: &[f64]) -> Network {
    path_builder(NetworkBuilder::new(), head, lengths, elevations, demands)
}

/// Like [`path`], with the diurnal pattern on every demand.
pub fn diurnal_path(head: f64, lengths: &[f64], elevations: &[f64], demands: &[f64]) -> Network {
    path_builder(NetworkBuilder::new().diurnal(), head, lengths, elevations, demands)
}

fn path_builder(mut b: NetworkBuilder, head: f64, lengths: &[f64], elevations: &[f64], demands: &[f64]) -> Network {
    assert!(lengths.len() == elevations.len() && lengths.len() == demands.len());
    let mut prev = b.reservoir("R0", head);
    for (i, ((&l, &z), &d)) in lengths.iter().zip(elevations).zip(demands).enumerate() {
        let j = b.junction(&format!("J{}", i + 1), z, d);
        b.pipe(prev, j, l);
        prev = j;
    }
    b.build()
}

/// Reservoir connected to a hub junction, which feeds one leaf per entry of
/// `leaves` (`(length, demand)`). All junctions at elevation 0.
pub fn star(head: f64, hub_length: f64, leaves: &[(f64, f64)]) -> Network {
    let mut b = NetworkBuilder::new().diurnal();
    let r = b.reservoir("R0", head);
    let hub = b.junction("J0", 0.0, 0.0);
    b.pipe(r, hub, hub_length);
    for (i, &(l, d)) in leaves.iter().enumerate() {
        let leaf = b.junction(&format!("J{}", i + 1), 0.0, d);
        b.pipe(hub, leaf, l);
    }
    b.build()
}

/// Reservoir feeding a ring of `n` junctions (one loop). Junction `i`
/// draws `demand`; ring pipes alternate between `length` and 1.5 `length`.
pub fn ring(head: f64, n: usize, length: f64, demand: f64) -> Network {
    assert!(n >= 3);
    let mut b = NetworkBuilder::new().diurnal();
    let r = b.reservoir("R0", head);
    let ids: Vec<NodeId> = (0..n).map(|i| b.junction(&format!("J{i}"), 0.0, demand)).collect();
    b.pipe(r, ids[0], length);
    for i in 0..n {
        let l = if i % 2 == 0 { length } else { 1.5 * length };
        b.pipe(ids[i], ids[(i + 1) % n], l);
    }
    b.build()
}

/// `rows x cols` grid of junctions fed at one corner, with
/// `(rows - 1)(cols - 1)` independent loops. Lengths vary deterministically
/// between `length` and 2 `length`.
pub fn grid(head: f64, rows: usize, cols: usize, length: f64, demand: f64) -> Network {
    assert!(rows >= 1 && cols >= 1);
    let mut b = NetworkBuilder::new().diurnal();
    let r = b.reservoir("R0", head);
    let id = |i: usize, j: usize| NodeId(1 + i * cols + j);
    for i in 0..rows {
        for j in 0..cols {
            b.junction(&format!("J{i}_{j}"), 0.0, demand);
        }
    }
    b.pipe(r, id(0, 0), length);
    let mut k = 0usize;
    let mut vary = || {
        k += 1;
        length * (1.0 + ((k * 7) % 11) as f64 / 10.0)
    };
    for i in 0..rows {
        for j in 0..cols {
            if j + 1 < cols {
                let l = vary();
                b.pipe(id(i, j), id(i, j + 1), l);
            }
            if i + 1 < rows {
                let l = vary();
                b.pipe(id(i, j), id(i + 1, j), l);
            }
        }
    }
    b.build()
}

/// Three small pipe types, for networks small enough to enumerate.
pub fn small_catalog() -> PipeTypeCatalog {
    let rows = [(60.0, 6.0), (80.0, 10.0), (100.0, 16.0)];
    let types = rows
        .iter()
        .enumerate()
        .map(|(i, &(d, c))| PipeType {
            index: i + 1,
            diameter_mm: d,
            roughness: 130.0,
            unit_cost: c,
        })
        .collect();
    PipeTypeCatalog::new(types).expect("valid catalog")
}

fn two_reservoir_line() -> Network {
    let mut b = NetworkBuilder::new().diurnal();
    let r1 = b.reservoir("R1", 42.0);
    let r2 = b.reservoir("R2", 38.0);
    let mut prev = r1;
    for i in 0..5 {
        let j = b.junction(&format!("J{i}"), 4.0 + i as f64, 0.0012);
        b.pipe(prev, j, 200.0 + 40.0 * i as f64);
        prev = j;
    }
    b.pipe(prev, r2, 220.0);
    b.build()
}

/// Networks of at most six pipes whose cheapest feasible assignment over
/// [`small_catalog`] mixes types. Pressure bound 20 m, velocity bound 2 m/s.
pub fn oracle_fixtures() -> Vec<(&'static str, Network)> {
    let leaves = [
        (200.0, 0.0008),
        (150.0, 0.0006),
        (300.0, 0.0005),
        (120.0, 0.0007),
        (250.0, 0.0004),
    ];
    vec![
        (
            "path3",
            diurnal_path(
                45.0,
                &[300.0, 200.0, 250.0],
                &[5.0, 8.0, 10.0],
                &[0.0015, 0.001, 0.0012],
            ),
        ),
        ("star5", star(34.0, 300.0, &leaves)),
        ("ring5", ring(36.0, 5, 200.0, 0.0009)),
        ("grid2x2", grid(40.0, 2, 2, 200.0, 0.0009)),
        ("two-reservoirs", two_reservoir_line()),
    ]
}

/// A six-pipe path whose optimum lies four coordinated type changes away
/// from a local optimum the search tends to settle in.
pub fn hard_oracle_fixture() -> Network {
    diurnal_path(
        50.0,
        &[200.0, 150.0, 300.0, 100.0, 250.0, 180.0],
        &[5.0, 6.0, 8.0, 8.0, 10.0, 12.0],
        &[0.0008, 0.0006, 0.0007, 0.0005, 0.0006, 0.0004],
    )
}

/// Ten networks (paths, stars, one to three loops, up to 30 pipes) paired
/// with a mixed assignment over [`PipeTypeCatalog::hg_mp`].
pub fn conservation_fixtures() -> Vec<(&'static str, Network, Solution)> {
    let mixed = |net: &Network, base: usize| {
        let types = (0..net.pipe_count()).map(|i| base + (i * 5) % 3).collect();
        Solution::new(types)
    };
    let mut theta = NetworkBuilder::new().diurnal();
    let r = theta.reservoir("R0", 60.0);
    let a = theta.junction("A", 2.0, 0.004);
    let c = theta.junction("B", 3.0, 0.006);
    let d = theta.junction("C", 4.0, 0.005);
    theta.pipe(r, a, 250.0);
    theta.pipe(a, c, 180.0);
    theta.pipe(a, d, 300.0);
    theta.pipe(c, d, 150.0);
    theta.pipe(r, d, 400.0);
    theta.pipe(c, d, 220.0);
    let theta = theta.build();

    let mut tree = NetworkBuilder::new().diurnal();
    let r = tree.reservoir("R0", 55.0);
    let hub = tree.junction("H", 0.0, 0.002);
    tree.pipe(r, hub, 500.0);
    for i in 0..3 {
        let mid = tree.junction(&format!("M{i}"), 1.0, 0.003);
        tree.pipe(hub, mid, 200.0 + 50.0 * i as f64);
        for k in 0..2 {
            let leaf = tree.junction(&format!("L{i}_{k}"), 2.0, 0.001 * (k + 1) as f64);
            tree.pipe(mid, leaf, 120.0);
        }
    }
    let tree = tree.build();

    let mut twin = NetworkBuilder::new().diurnal();
    let r1 = twin.reservoir("R1", 58.0);
    let r2 = twin.reservoir("R2", 55.0);
    let ids: Vec<NodeId> = (0..6)
        .map(|i| twin.junction(&format!("J{i}"), i as f64, 0.003))
        .collect();
    twin.pipe(r1, ids[0], 300.0);
    for i in 0..6 {
        twin.pipe(ids[i], ids[(i + 1) % 6], 150.0 + 20.0 * i as f64);
    }
    twin.pipe(r2, ids[3], 350.0);
    let twin = twin.build();

    let long_lengths: Vec<f64> = (0..30).map(|i| 80.0 + (i * 37 % 50) as f64).collect();
    let long_demands: Vec<f64> = (0..30).map(|i| 0.0005 + 0.0001 * (i % 4) as f64).collect();
    let nets: Vec<(&'static str, Network, usize)> = vec![
        (
            "path5",
            diurnal_path(
                60.0,
                &[300.0, 250.0, 200.0, 150.0, 100.0],
                &[1.0, 2.0, 3.0, 4.0, 5.0],
                &[0.004, 0.003, 0.002, 0.003, 0.001],
            ),
            9,
        ),
        (
            "path30",
            diurnal_path(80.0, &long_lengths, &[0.0; 30], &long_demands),
            10,
        ),
        ("star8", star(50.0, 400.0, &[(100.0, 0.002); 8]), 8),
        ("tree10", tree, 8),
        ("ring5", ring(50.0, 5, 200.0, 0.003), 8),
        ("ring12", ring(60.0, 12, 150.0, 0.002), 9),
        ("theta", theta, 8),
        ("grid2x3", grid(50.0, 2, 3, 150.0, 0.002), 8),
        ("grid2x4", grid(60.0, 2, 4, 150.0, 0.002), 8),
        ("two-reservoir-ring", twin, 8),
    ];
    nets.into_iter()
        .map(|(name, net, base)| {
            let sol = mixed(&net, base);
            (name, net, sol)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::cycle_space_dim;

    #[test]
    fn shapes() {
        let p = path(50.0, &[100.0, 50.0], &[0.0, 0.0], &[0.001, 0.0]);
        assert_eq!((p.node_count(), p.pipe_count(), cycle_space_dim(&p)), (3, 2, 0));
        let s = star(50.0, 100.0, &[(10.0, 0.001); 4]);
        assert_eq!((s.node_count(), s.pipe_count()), (6, 5));
        let r = ring(50.0, 5, 100.0, 0.001);
        assert_eq!(cycle_space_dim(&r), 1);
        let g = grid(50.0, 3, 4, 100.0, 0.001);
        assert_eq!(cycle_space_dim(&g), (3 - 1) * (4 - 1));
        assert_eq!(g.period_count(), 24);
    }
}
