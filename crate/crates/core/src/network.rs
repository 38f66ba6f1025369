//! Network, demand horizon, pipe-type catalog and solutions.
//!
//! Everything here is immutable after construction except [`Solution`],
//! which is the value the search mutates.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use crate::error::ModelError;

/// Number of periods in the default planning horizon (hourly scenarios of a day).
pub const DEFAULT_PERIODS: usize = 24;

/// Index of a node inside a [`Network`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

/// Index of a pipe inside a [`Network`]. Pipe order is the order of the
/// instance file and doubles as the deterministic tie-break everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PipeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for PipeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipeType {
    /// 1-based ordinal in the catalog.
    pub index: usize,
    pub diameter_mm: f64,
    /// Hazen-Williams roughness coefficient.
    pub roughness: f64,
    /// Cost per meter.
    pub unit_cost: f64,
}

impl PipeType {
    pub fn diameter_m(&self) -> f64 {
        self.diameter_mm / 1000.0
    }
}

/// Ordered list of available pipe types. Type indices are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct PipeTypeCatalog {
    types: Vec<PipeType>,
}

impl PipeTypeCatalog {
    /// Builds a catalog, rejecting empty lists, nonpositive fields and rows
    /// that are not sorted by diameter and cost. Indices are renumbered
    /// 1..=n in the given order.
    pub fn new(types: Vec<PipeType>) -> Result<Self, ModelError> {
        if types.is_empty() {
            return Err(ModelError::EmptyCatalog);
        }
        let mut types = types;
        for (i, t) in types.iter_mut().enumerate() {
            t.index = i + 1;
            if !(t.diameter_mm > 0.0 && t.roughness > 0.0 && t.unit_cost > 0.0) {
                return Err(ModelError::InvalidPipeType {
                    index: t.index,
                    reason: "diameter, roughness and cost must be positive".into(),
                });
            }
        }
        for w in types.windows(2) {
            if w[1].diameter_mm < w[0].diameter_mm {
                return Err(ModelError::UnsortedCatalog {
                    index: w[1].index,
                    field: "diameter",
                });
            }
            if w[1].unit_cost < w[0].unit_cost {
                return Err(ModelError::UnsortedCatalog {
                    index: w[1].index,
                    field: "unit cost",
                });
            }
        }
        Ok(Self { types })
    }

    /// The 16 commercial pipe types used by the HydroGen multi-period
    /// benchmark networks. Types 12 and 13 are identical in the source table
    /// and are kept as two entries.
    pub fn hg_mp() -> Self {
        const ROWS: [(f64, f64); 16] = [
            (20.0, 9.0),
            (30.0, 20.0),
            (40.0, 25.0),
            (50.0, 30.0),
            (60.0, 35.0),
            (80.0, 48.0),
            (100.0, 50.0),
            (150.0, 61.0),
            (200.0, 116.0),
            (250.0, 150.0),
            (300.0, 201.0),
            (400.0, 290.0),
            (400.0, 290.0),
            (500.0, 351.0),
            (600.0, 528.0),
            (1000.0, 628.0),
        ];
        let types = ROWS
            .iter()
            .enumerate()
            .map(|(i, &(d, c))| PipeType {
                index: i + 1,
                diameter_mm: d,
                roughness: 130.0,
                unit_cost: c,
            })
            .collect();
        Self::new(types).expect("built-in catalog is valid")
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    /// Largest type index.
    pub fn max_index(&self) -> usize {
        self.types.len()
    }

    /// Type by 1-based index. Panics when out of range.
    pub fn get(&self, index: usize) -> &PipeType {
        &self.types[index - 1]
    }

    pub fn try_get(&self, index: usize) -> Option<&PipeType> {
        index.checked_sub(1).and_then(|i| self.types.get(i))
    }

    pub fn types(&self) -> &[PipeType] {
        &self.types
    }
}

/// One (base load, pattern) demand category of a junction. A missing
/// pattern means a constant multiplier of 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandCategory {
    /// m³/s
    pub base_load: f64,
    pub pattern: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Junction,
    Reservoir { head: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub label: String,
    pub kind: NodeKind,
    /// m
    pub elevation: f64,
    pub demands: Vec<DemandCategory>,
}

impl Node {
    pub fn junction(label: impl Into<String>, elevation: f64, demands: Vec<DemandCategory>) -> Self {
        Self {
            label: label.into(),
            kind: NodeKind::Junction,
            elevation,
            demands,
        }
    }

    pub fn reservoir(label: impl Into<String>, head: f64) -> Self {
        Self {
            label: label.into(),
            kind: NodeKind::Reservoir { head },
            elevation: head,
            demands: Vec::new(),
        }
    }

    pub fn is_reservoir(&self) -> bool {
        matches!(self.kind, NodeKind::Reservoir { .. })
    }

    pub fn fixed_head(&self) -> Option<f64> {
        match self.kind {
            NodeKind::Reservoir { head } => Some(head),
            NodeKind::Junction => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pipe {
    pub label: String,
    /// Start of the reference orientation; positive flow runs `from -> to`.
    pub from: NodeId,
    pub to: NodeId,
    /// m
    pub length: f64,
}

impl Pipe {
    pub fn other_end(&self, node: NodeId) -> NodeId {
        if self.from == node {
            self.to
        } else {
            self.from
        }
    }
}

/// Demand patterns over the planning horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandModel {
    patterns: BTreeMap<String, Vec<f64>>,
    period_count: usize,
}

impl DemandModel {
    pub fn new(patterns: BTreeMap<String, Vec<f64>>, period_count: usize) -> Result<Self, ModelError> {
        if period_count == 0 {
            return Err(ModelError::InvalidDemand("period count must be at least 1".into()));
        }
        for (id, mult) in &patterns {
            if mult.is_empty() {
                return Err(ModelError::InvalidDemand(format!("pattern {id} is empty")));
            }
            if mult.iter().any(|m| m.is_nan() || *m < 0.0) {
                return Err(ModelError::InvalidDemand(format!(
                    "pattern {id} has a negative multiplier"
                )));
            }
        }
        Ok(Self { patterns, period_count })
    }

    /// A horizon of `period_count` periods with no patterns: every demand is
    /// constant.
    pub fn constant(period_count: usize) -> Self {
        Self {
            patterns: BTreeMap::new(),
            period_count: period_count.max(1),
        }
    }

    pub fn period_count(&self) -> usize {
        self.period_count
    }

    pub fn patterns(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.patterns
    }

    pub fn pattern(&self, id: &str) -> Option<&[f64]> {
        self.patterns.get(id).map(Vec::as_slice)
    }

    /// Pattern multiplier at 1-based `period`; shorter patterns wrap.
    pub fn multiplier(&self, pattern: Option<&str>, period: usize) -> Result<f64, ModelError> {
        match pattern {
            None => Ok(1.0),
            Some(id) => {
                let mult = self
                    .patterns
                    .get(id)
                    .ok_or_else(|| ModelError::UnknownPattern(id.to_string()))?;
                Ok(mult[(period - 1) % mult.len()])
            }
        }
    }
}

/// Water demand of `node` at 1-based period `period`, in m³/s.
pub fn demand_at(node: &Node, period: usize, dm: &DemandModel) -> Result<f64, ModelError> {
    if period == 0 || period > dm.period_count() {
        return Err(ModelError::PeriodOutOfRange {
            period,
            count: dm.period_count(),
        });
    }
    if node.is_reservoir() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for cat in &node.demands {
        total += cat.base_load * dm.multiplier(cat.pattern.as_deref(), period)?;
    }
    Ok(total)
}

/// Smallest demand of `node` over the horizon.
pub fn base_demand(node: &Node, dm: &DemandModel) -> Result<f64, ModelError> {
    let mut min = f64::INFINITY;
    for period in 1..=dm.period_count() {
        min = min.min(demand_at(node, period, dm)?);
    }
    Ok(min)
}

/// Immutable pipe network with a demand horizon.
#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<Node>,
    pipes: Vec<Pipe>,
    demand_model: DemandModel,
    node_index: HashMap<String, NodeId>,
    pipe_index: HashMap<String, PipeId>,
    /// Incident (pipe, neighbor) pairs per node, sorted by pipe id.
    adjacency: Vec<Vec<(PipeId, NodeId)>>,
}

impl Network {
    pub fn new(nodes: Vec<Node>, pipes: Vec<Pipe>, demand_model: DemandModel) -> Result<Self, ModelError> {
        let mut node_index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if node_index.insert(n.label.clone(), NodeId(i)).is_some() {
                return Err(ModelError::DuplicateId(n.label.clone()));
            }
            if n.is_reservoir() && !n.demands.is_empty() {
                return Err(ModelError::InvalidDemand(format!(
                    "reservoir {} cannot carry demand",
                    n.label
                )));
            }
            for cat in &n.demands {
                if cat.base_load.is_nan() || cat.base_load < 0.0 {
                    return Err(ModelError::InvalidDemand(format!(
                        "junction {} has a negative base load",
                        n.label
                    )));
                }
                if let Some(p) = &cat.pattern {
                    if demand_model.pattern(p).is_none() {
                        return Err(ModelError::UnknownPattern(p.clone()));
                    }
                }
            }
        }
        let mut pipe_index = HashMap::with_capacity(pipes.len());
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (i, p) in pipes.iter().enumerate() {
            if pipe_index.insert(p.label.clone(), PipeId(i)).is_some() {
                return Err(ModelError::DuplicateId(p.label.clone()));
            }
            if p.from.0 >= nodes.len() || p.to.0 >= nodes.len() {
                return Err(ModelError::InvalidPipe {
                    pipe: p.label.clone(),
                    reason: "endpoint does not exist".into(),
                });
            }
            if p.from == p.to {
                return Err(ModelError::InvalidPipe {
                    pipe: p.label.clone(),
                    reason: "endpoints must be distinct".into(),
                });
            }
            if p.length.is_nan() || p.length <= 0.0 {
                return Err(ModelError::InvalidPipe {
                    pipe: p.label.clone(),
                    reason: "length must be positive".into(),
                });
            }
            adjacency[p.from.0].push((PipeId(i), p.to));
            adjacency[p.to.0].push((PipeId(i), p.from));
        }
        if !nodes.iter().any(Node::is_reservoir) {
            return Err(ModelError::NoReservoir);
        }
        let net = Self {
            nodes,
            pipes,
            demand_model,
            node_index,
            pipe_index,
            adjacency,
        };
        if net.component_count() != 1 {
            return Err(ModelError::Disconnected);
        }
        Ok(net)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn pipes(&self) -> &[Pipe] {
        &self.pipes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn pipe(&self, id: PipeId) -> &Pipe {
        &self.pipes[id.0]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn pipe_count(&self) -> usize {
        self.pipes.len()
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.node_index.get(label).copied()
    }

    pub fn pipe_id(&self, label: &str) -> Option<PipeId> {
        self.pipe_index.get(label).copied()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn pipe_ids(&self) -> impl Iterator<Item = PipeId> + '_ {
        (0..self.pipes.len()).map(PipeId)
    }

    pub fn junctions(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.node_ids().filter(|&n| !self.node(n).is_reservoir())
    }

    pub fn reservoirs(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.node_ids().filter(|&n| self.node(n).is_reservoir())
    }

    pub fn demand_model(&self) -> &DemandModel {
        &self.demand_model
    }

    pub fn period_count(&self) -> usize {
        self.demand_model.period_count()
    }

    /// Incident pipes of `node` with the node on their other end.
    pub fn incident(&self, node: NodeId) -> &[(PipeId, NodeId)] {
        &self.adjacency[node.0]
    }

    pub fn demand_at(&self, node: NodeId, period: usize) -> Result<f64, ModelError> {
        demand_at(self.node(node), period, &self.demand_model)
    }

    pub fn base_demand(&self, node: NodeId) -> Result<f64, ModelError> {
        base_demand(self.node(node), &self.demand_model)
    }

    /// Connected components of the undirected graph.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.nodes.len()];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.nodes.len() {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &(_, v) in &self.adjacency[u] {
                    if !seen[v.0] {
                        seen[v.0] = true;
                        queue.push_back(v.0);
                    }
                }
            }
        }
        count
    }
}

/// Assignment of one 1-based type index to every pipe.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Solution {
    types: Vec<usize>,
}

impl Solution {
    pub fn new(types: Vec<usize>) -> Self {
        Self { types }
    }

    pub fn uniform(pipe_count: usize, type_index: usize) -> Self {
        Self {
            types: vec![type_index; pipe_count],
        }
    }

    pub fn get(&self, pipe: PipeId) -> usize {
        self.types[pipe.0]
    }

    pub fn set(&mut self, pipe: PipeId, type_index: usize) {
        self.types[pipe.0] = type_index;
    }

    pub fn types(&self) -> &[usize] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    /// Checks that the assignment covers every pipe of `net` with a type
    /// from `cat`.
    pub fn check(&self, net: &Network, cat: &PipeTypeCatalog) -> Result<(), ModelError> {
        if self.types.len() != net.pipe_count() {
            return Err(ModelError::IncompleteSolution {
                expected: net.pipe_count(),
                found: self.types.len(),
            });
        }
        for (i, &t) in self.types.iter().enumerate() {
            if cat.try_get(t).is_none() {
                return Err(ModelError::TypeOutOfRange {
                    pipe: net.pipe(PipeId(i)).label.clone(),
                    index: t,
                    max: cat.max_index(),
                });
            }
        }
        Ok(())
    }
}

/// Cost of one pipe under `sol`: unit cost of its type times its length.
pub fn pipe_cost(sol: &Solution, net: &Network, cat: &PipeTypeCatalog, pipe: PipeId) -> f64 {
    cat.get(sol.get(pipe)).unit_cost * net.pipe(pipe).length
}

/// Total network cost of `sol`.
pub fn solution_cost(sol: &Solution, net: &Network, cat: &PipeTypeCatalog) -> Result<f64, ModelError> {
    sol.check(net, cat)?;
    Ok(net.pipe_ids().map(|p| pipe_cost(sol, net, cat, p)).sum())
}

/// Meshedness coefficient: independent loops over the planar maximum
/// `2|N| - 5`.
pub fn meshedness(net: &Network) -> Result<f64, ModelError> {
    let n = net.node_count() as i64;
    let denom = 2 * n - 5;
    if denom <= 0 {
        return Err(ModelError::MeshednessUndefined(net.node_count()));
    }
    Ok(crate::graph::cycle_space_dim(net) as f64 / denom as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(lengths: &[f64]) -> Network {
        let mut nodes = vec![Node::reservoir("R", 50.0)];
        let mut pipes = Vec::new();
        for (i, &l) in lengths.iter().enumerate() {
            nodes.push(Node::junction(format!("J{i}"), 0.0, vec![]));
            pipes.push(Pipe {
                label: format!("P{i}"),
                from: NodeId(i),
                to: NodeId(i + 1),
                length: l,
            });
        }
        Network::new(nodes, pipes, DemandModel::constant(24)).unwrap()
    }

    fn cat(rows: &[(f64, f64)]) -> PipeTypeCatalog {
        PipeTypeCatalog::new(
            rows.iter()
                .map(|&(d, c)| PipeType {
                    index: 0,
                    diameter_mm: d,
                    roughness: 130.0,
                    unit_cost: c,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn cost_of_one_pipe_uses_catalog_price() {
        let net = line(&[1000.0]);
        let c = PipeTypeCatalog::hg_mp();
        assert_eq!(solution_cost(&Solution::uniform(1, 8), &net, &c).unwrap(), 61000.0);
    }

    #[test]
    fn cost_of_two_pipes() {
        let net = line(&[100.0, 200.0]);
        let c = cat(&[(20.0, 9.0), (30.0, 20.0)]);
        let sol = Solution::new(vec![1, 2]);
        assert_eq!(solution_cost(&sol, &net, &c).unwrap(), 4900.0);
    }

    #[test]
    fn cost_of_pipeless_network_is_zero() {
        let net = Network::new(vec![Node::reservoir("R", 10.0)], vec![], DemandModel::constant(24)).unwrap();
        let c = cat(&[(20.0, 9.0)]);
        assert_eq!(solution_cost(&Solution::new(vec![]), &net, &c).unwrap(), 0.0);
    }

    #[test]
    fn incomplete_solution_is_rejected() {
        let net = line(&[100.0, 200.0]);
        let c = cat(&[(20.0, 9.0)]);
        let err = solution_cost(&Solution::new(vec![1]), &net, &c).unwrap_err();
        assert!(matches!(err, ModelError::IncompleteSolution { expected: 2, found: 1 }));
    }

    #[test]
    fn demand_follows_pattern() {
        let mut patterns = BTreeMap::new();
        patterns.insert("p".to_string(), vec![1.0, 0.5]);
        let dm = DemandModel::new(patterns, 24).unwrap();
        let j = Node::junction(
            "J",
            0.0,
            vec![DemandCategory {
                base_load: 0.002,
                pattern: Some("p".into()),
            }],
        );
        assert!((demand_at(&j, 2, &dm).unwrap() - 0.001).abs() < 1e-15);
        // wraps cyclically
        assert!((demand_at(&j, 3, &dm).unwrap() - 0.002).abs() < 1e-15);
        assert!(demand_at(&j, 25, &dm).is_err());
    }

    #[test]
    fn reservoir_and_empty_junction_have_no_demand() {
        let dm = DemandModel::constant(24);
        let r = Node::reservoir("R", 40.0);
        let j = Node::junction("J", 0.0, vec![]);
        for t in 1..=24 {
            assert_eq!(demand_at(&r, t, &dm).unwrap(), 0.0);
            assert_eq!(demand_at(&j, t, &dm).unwrap(), 0.0);
        }
        assert_eq!(base_demand(&j, &dm).unwrap(), 0.0);
    }

    #[test]
    fn unknown_pattern_is_an_error() {
        let dm = DemandModel::constant(24);
        let j = Node::junction(
            "J",
            0.0,
            vec![DemandCategory {
                base_load: 0.002,
                pattern: Some("nope".into()),
            }],
        );
        assert!(matches!(demand_at(&j, 1, &dm), Err(ModelError::UnknownPattern(_))));
    }

    #[test]
    fn base_demand_is_minimum_over_periods() {
        let mut patterns = BTreeMap::new();
        patterns.insert("p".to_string(), vec![1.0, 0.2, 0.8]);
        let dm = DemandModel::new(patterns, 3).unwrap();
        let j = Node::junction(
            "J",
            0.0,
            vec![DemandCategory {
                base_load: 0.01,
                pattern: Some("p".into()),
            }],
        );
        assert!((base_demand(&j, &dm).unwrap() - 0.002).abs() < 1e-15);

        let c = Node::junction(
            "C",
            0.0,
            vec![DemandCategory {
                base_load: 0.003,
                pattern: None,
            }],
        );
        assert_eq!(base_demand(&c, &DemandModel::constant(24)).unwrap(), 0.003);
    }

    #[test]
    fn catalog_rejects_unsorted_or_nonpositive_rows() {
        let bad = vec![
            PipeType {
                index: 1,
                diameter_mm: 100.0,
                roughness: 130.0,
                unit_cost: 5.0,
            },
            PipeType {
                index: 2,
                diameter_mm: 50.0,
                roughness: 130.0,
                unit_cost: 6.0,
            },
        ];
        assert!(matches!(
            PipeTypeCatalog::new(bad),
            Err(ModelError::UnsortedCatalog { field: "diameter", .. })
        ));
        let zero = vec![PipeType {
            index: 1,
            diameter_mm: 100.0,
            roughness: 0.0,
            unit_cost: 5.0,
        }];
        assert!(PipeTypeCatalog::new(zero).is_err());
        assert!(matches!(PipeTypeCatalog::new(vec![]), Err(ModelError::EmptyCatalog)));
    }

    #[test]
    fn builtin_catalog_matches_table() {
        let c = PipeTypeCatalog::hg_mp();
        assert_eq!(c.len(), 16);
        assert_eq!(c.get(1).diameter_mm, 20.0);
        assert_eq!(c.get(1).unit_cost, 9.0);
        assert_eq!(c.get(16).diameter_mm, 1000.0);
        assert_eq!(c.get(16).unit_cost, 628.0);
        assert_eq!(
            c.get(12),
            &PipeType {
                index: 12,
                ..c.get(13).clone()
            }
        );
    }

    #[test]
    fn network_rejects_bad_topology() {
        let dm = DemandModel::constant(24);
        let no_res = Network::new(vec![Node::junction("J", 0.0, vec![])], vec![], dm.clone());
        assert!(matches!(no_res, Err(ModelError::NoReservoir)));
        let disconnected = Network::new(
            vec![Node::reservoir("R", 1.0), Node::junction("J", 0.0, vec![])],
            vec![],
            dm.clone(),
        );
        assert!(matches!(disconnected, Err(ModelError::Disconnected)));
        let self_loop = Network::new(
            vec![Node::reservoir("R", 1.0)],
            vec![Pipe {
                label: "P".into(),
                from: NodeId(0),
                to: NodeId(0),
                length: 1.0,
            }],
            dm,
        );
        assert!(matches!(self_loop, Err(ModelError::InvalidPipe { .. })));
    }

    #[test]
    fn meshedness_of_tree_and_cycle() {
        let tree = line(&[1.0; 9]);
        assert_eq!(tree.node_count(), 10);
        assert_eq!(meshedness(&tree).unwrap(), 0.0);

        let mut nodes = vec![Node::reservoir("R", 10.0)];
        let mut pipes = Vec::new();
        for i in 1..5 {
            nodes.push(Node::junction(format!("J{i}"), 0.0, vec![]));
        }
        for i in 0..5 {
            pipes.push(Pipe {
                label: format!("P{i}"),
                from: NodeId(i),
                to: NodeId((i + 1) % 5),
                length: 1.0,
            });
        }
        let ring = Network::new(nodes, pipes, DemandModel::constant(24)).unwrap();
        assert!((meshedness(&ring).unwrap() - 0.2).abs() < 1e-15);

        let tiny = line(&[1.0]);
        assert!(matches!(meshedness(&tiny), Err(ModelError::MeshednessUndefined(2))));
    }
}
