//! Steady-state hydraulics of a gravity-fed network for one demand period,
//! and the feasibility check built on top of it.
//!
//! Junction heads are the unknowns. Each Newton step linearizes the
//! Hazen-Williams law around the current flows, solves the SPD junction
//! system for heads and updates the flows from the head differences. The
//! updated flows satisfy mass balance exactly (up to the linear solve), so
//! iteration stops once flows have settled and every pipe's head loss
//! agrees with its head difference.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{HydraulicError, ModelError};
use crate::graph::OrientedPipe;
use crate::linalg::SparseCholesky;
use crate::network::{Network, NodeId, PipeId, PipeType, PipeTypeCatalog, Solution};

/// Unit conversion constant of the SI Hazen-Williams formula.
pub const HW_COEFFICIENT: f64 = 10.6744;
pub const HW_FLOW_EXPONENT: f64 = 1.852;
pub const HW_DIAMETER_EXPONENT: f64 = 4.871;
/// `4 / pi`, rounded as in the velocity formula.
pub const VELOCITY_COEFFICIENT: f64 = 1.27;

/// Total flows below this (m³/s) are treated as this value when measuring
/// the relative flow change, so networks without demand can converge.
const FLOW_SCALE_FLOOR: f64 = 1e-6;
const HEAD_ROUNDING_ULPS: f64 = 8.0;

/// Resistance `K` such that `headloss = K |q|^1.852` for a pipe.
fn resistance(length: f64, t: &PipeType) -> f64 {
    HW_COEFFICIENT * length / (t.roughness.powf(HW_FLOW_EXPONENT) * t.diameter_m().powf(HW_DIAMETER_EXPONENT))
}

/// Signed Hazen-Williams head loss (m) for flow `q` (m³/s) along a pipe of
/// `length` m. Odd in `q`.
pub fn headloss(q: f64, length: f64, t: &PipeType) -> f64 {
    resistance(length, t) * q * q.abs().powf(HW_FLOW_EXPONENT - 1.0)
}

/// Derivative of [`headloss`] with respect to `q`, floored at `floor`.
pub fn headloss_gradient(q: f64, length: f64, t: &PipeType, floor: f64) -> f64 {
    (HW_FLOW_EXPONENT * resistance(length, t) * q.abs().powf(HW_FLOW_EXPONENT - 1.0)).max(floor)
}

/// Mean velocity (m/s) of flow `q` through a pipe of type `t`.
pub fn velocity(q: f64, t: &PipeType) -> f64 {
    let d = t.diameter_m();
    VELOCITY_COEFFICIENT * q.abs() / (d * d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Relative flow change `sum|dq| / sum|q|` below which flows are settled.
    pub flow_tolerance: f64,
    /// Largest admissible `|headloss(q) - (h_from - h_to)|` over pipes, m.
    pub head_tolerance: f64,
    pub max_iterations: usize,
    /// Velocity (m/s) used to seed pipe flows.
    pub init_velocity: f64,
    /// Smallest head-loss derivative used in the linearization.
    pub gradient_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            flow_tolerance: 1e-3,
            head_tolerance: 1e-7,
            max_iterations: 200,
            init_velocity: 0.3048,
            gradient_floor: 1e-7,
        }
    }
}

/// Heads, flows and velocities of one period.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodState {
    /// 1-based period.
    pub period: usize,
    /// Total head per node, m.
    pub head: Vec<f64>,
    /// Signed flow per pipe, positive along `from -> to`, m³/s.
    pub flow: Vec<f64>,
    /// m/s
    pub velocity: Vec<f64>,
    pub converged: bool,
    pub iterations_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HydraulicState {
    pub per_period: Vec<PeriodState>,
}

enum End {
    Unknown(usize),
    Fixed(f64),
}

/// Reusable solver for one network and catalog. Holds the symbolic
/// factorization, the per-period demand vectors and a call counter.
#[derive(Debug)]
pub struct Simulator<'a> {
    net: &'a Network,
    cat: &'a PipeTypeCatalog,
    cfg: SolverConfig,
    unknown_of: Vec<Option<usize>>,
    chol: SparseCholesky,
    /// Off-diagonal storage slot of each junction-to-junction pipe.
    slots: Vec<Option<usize>>,
    /// `demands[period - 1][unknown]`, m³/s
    demands: Vec<Vec<f64>>,
    /// Per catalog type: `10.6744 / (r^1.852 d^4.871)`.
    type_factor: Vec<f64>,
    calls: AtomicU64,
}

impl<'a> Simulator<'a> {
    pub fn new(net: &'a Network, cat: &'a PipeTypeCatalog, cfg: SolverConfig) -> Result<Self, HydraulicError> {
        let mut unknown_of = vec![None; net.node_count()];
        let mut count = 0;
        for j in net.junctions() {
            unknown_of[j.0] = Some(count);
            count += 1;
        }
        check_supplied(net)?;
        let edges: Vec<(usize, usize)> = net
            .pipes()
            .iter()
            .filter_map(|p| Some((unknown_of[p.from.0]?, unknown_of[p.to.0]?)))
            .collect();
        let chol = SparseCholesky::new(count, edges);
        let slots = net
            .pipes()
            .iter()
            .map(|p| match (unknown_of[p.from.0], unknown_of[p.to.0]) {
                (Some(a), Some(b)) => chol.slot(a, b),
                _ => None,
            })
            .collect();
        let mut demands = Vec::with_capacity(net.period_count());
        for period in 1..=net.period_count() {
            let mut d = vec![0.0; count];
            for j in net.junctions() {
                d[unknown_of[j.0].unwrap()] = net.demand_at(j, period)?;
            }
            demands.push(d);
        }
        let type_factor = cat.types().iter().map(|t| resistance(1.0, t)).collect();
        Ok(Self {
            net,
            cat,
            cfg,
            unknown_of,
            chol,
            slots,
            demands,
            type_factor,
            calls: AtomicU64::new(0),
        })
    }

    pub fn network(&self) -> &'a Network {
        self.net
    }

    pub fn catalog(&self) -> &'a PipeTypeCatalog {
        self.cat
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Number of `simulate_period` invocations so far.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn end(&self, node: NodeId, heads: &[f64]) -> End {
        match self.unknown_of[node.0] {
            Some(u) => End::Unknown(u),
            None => End::Fixed(heads[node.0]),
        }
    }

    /// Solves period `period` (1-based) for the pipe types of `sol`.
    /// Non-convergence is reported through [`PeriodState::converged`].
    pub fn simulate_period(&self, sol: &Solution, period: usize) -> Result<PeriodState, HydraulicError> {
        sol.check(self.net, self.cat)?;
        if period == 0 || period > self.demands.len() {
            return Err(ModelError::PeriodOutOfRange {
                period,
                count: self.demands.len(),
            }
            .into());
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        let net = self.net;
        let cfg = &self.cfg;
        let demand = &self.demands[period - 1];
        let n_pipes = net.pipe_count();
        let n_unknown = self.chol.dim();

        let k: Vec<f64> = net
            .pipes()
            .iter()
            .zip(sol.types())
            .map(|(p, &t)| self.type_factor[t - 1] * p.length)
            .collect();
        let mut flow: Vec<f64> = sol
            .types()
            .iter()
            .map(|&t| {
                let d = self.cat.get(t).diameter_m();
                cfg.init_velocity * std::f64::consts::FRAC_PI_4 * d * d
            })
            .collect();
        let mut head: Vec<f64> = net.nodes().iter().map(|n| n.fixed_head().unwrap_or(0.0)).collect();

        let (mut diag, mut off) = self.chol.values();
        let mut rhs = vec![0.0; n_unknown];
        let mut inv_grad = vec![0.0; n_pipes];
        let mut work = Vec::with_capacity(n_unknown);
        let mut converged = false;
        let mut iterations = 0;

        while iterations < cfg.max_iterations {
            iterations += 1;
            diag.iter_mut().for_each(|v| *v = 0.0);
            off.iter_mut().for_each(|v| *v = 0.0);
            rhs.copy_from_slice(demand);
            rhs.iter_mut().for_each(|v| *v = -*v);

            for (i, p) in net.pipes().iter().enumerate() {
                let q = flow[i];
                let aq = q.abs().powf(HW_FLOW_EXPONENT - 1.0);
                let g = (HW_FLOW_EXPONENT * k[i] * aq).max(cfg.gradient_floor);
                let pinv = 1.0 / g;
                let carried = q - k[i] * q * aq * pinv;
                inv_grad[i] = pinv;
                let from = self.end(p.from, &head);
                let to = self.end(p.to, &head);
                match (&from, &to) {
                    (End::Unknown(a), End::Unknown(b)) => {
                        diag[self.chol.diag_slot(*a)] += pinv;
                        diag[self.chol.diag_slot(*b)] += pinv;
                        off[self.slots[i].expect("junction pipe has a slot")] -= pinv;
                    }
                    (End::Unknown(a), End::Fixed(h)) => {
                        diag[self.chol.diag_slot(*a)] += pinv;
                        rhs[*a] += pinv * h;
                    }
                    (End::Fixed(h), End::Unknown(b)) => {
                        diag[self.chol.diag_slot(*b)] += pinv;
                        rhs[*b] += pinv * h;
                    }
                    (End::Fixed(_), End::Fixed(_)) => {}
                }
                // the flow carried by the linearization leaves `from`, enters `to`
                if let End::Unknown(a) = from {
                    rhs[a] -= carried;
                }
                if let End::Unknown(b) = to {
                    rhs[b] += carried;
                }
            }

            if self.chol.factor(&mut diag, &mut off, &mut work).is_err() {
                break;
            }
            self.chol.solve(&diag, &off, &mut rhs, &mut work);
            for j in net.junctions() {
                head[j.0] = rhs[self.unknown_of[j.0].unwrap()];
            }

            // flow steps that rounding in the heads alone could produce are not progress
            let head_noise = HEAD_ROUNDING_ULPS * f64::EPSILON * head.iter().fold(1.0f64, |m, h| m.max(h.abs()));
            let mut sum_dq = 0.0;
            let mut sum_q = 0.0;
            let mut max_residual: f64 = 0.0;
            for (i, p) in net.pipes().iter().enumerate() {
                let q = flow[i];
                let dh = head[p.from.0] - head[p.to.0];
                let h = k[i] * q * q.abs().powf(HW_FLOW_EXPONENT - 1.0);
                let q_new = q - (h - dh) * inv_grad[i];
                sum_dq += ((q_new - q).abs() - head_noise * inv_grad[i]).max(0.0);
                sum_q += q_new.abs();
                flow[i] = q_new;
                let h_new = k[i] * q_new * q_new.abs().powf(HW_FLOW_EXPONENT - 1.0);
                max_residual = max_residual.max((h_new - dh).abs());
            }
            if !sum_dq.is_finite() || !max_residual.is_finite() {
                break;
            }
            if sum_dq / sum_q.max(FLOW_SCALE_FLOOR) < cfg.flow_tolerance && max_residual <= cfg.head_tolerance {
                converged = true;
                break;
            }
        }

        let velocity = flow
            .iter()
            .zip(sol.types())
            .map(|(&q, &t)| velocity(q, self.cat.get(t)))
            .collect();
        Ok(PeriodState {
            period,
            head,
            flow,
            velocity,
            converged,
            iterations_used: iterations,
        })
    }

    /// Solves every period of the horizon.
    pub fn simulate(&self, sol: &Solution) -> Result<HydraulicState, HydraulicError> {
        let per_period = (1..=self.demands.len())
            .map(|t| self.simulate_period(sol, t))
            .collect::<Result<_, _>>()?;
        Ok(HydraulicState { per_period })
    }
}

fn check_supplied(net: &Network) -> Result<(), HydraulicError> {
    let mut seen = vec![false; net.node_count()];
    let mut stack: Vec<NodeId> = net.reservoirs().collect();
    for r in &stack {
        seen[r.0] = true;
    }
    while let Some(u) = stack.pop() {
        for &(_, v) in net.incident(u) {
            if !seen[v.0] {
                seen[v.0] = true;
                stack.push(v);
            }
        }
    }
    match net.node_ids().find(|n| !seen[n.0]) {
        Some(n) => Err(HydraulicError::Unsupplied(net.node(n).label.clone())),
        None => Ok(()),
    }
}

/// One-shot convenience wrapper around [`Simulator::simulate_period`].
pub fn simulate_period(
    net: &Network,
    cat: &PipeTypeCatalog,
    sol: &Solution,
    period: usize,
    cfg: &SolverConfig,
) -> Result<PeriodState, HydraulicError> {
    Simulator::new(net, cat, cfg.clone())?.simulate_period(sol, period)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViolationKind {
    NonConvergence,
    /// Pressure head (m) below the minimum at a junction.
    Pressure {
        node: NodeId,
        pressure: f64,
    },
    /// Velocity (m/s) above the maximum in a pipe.
    Velocity {
        pipe: PipeId,
        velocity: f64,
    },
}

/// First constraint violation met while validating a solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub period: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub violation: Option<Violation>,
    /// Periods simulated before the verdict was reached.
    pub periods_simulated: usize,
}

impl Verdict {
    pub fn is_feasible(&self) -> bool {
        self.violation.is_none()
    }
}

/// Pressure and velocity bounds checked period by period, stopping at the
/// first violation.
#[derive(Debug)]
pub struct Validator<'a> {
    sim: Simulator<'a>,
    pub h_min: f64,
    pub v_max: f64,
}

impl<'a> Validator<'a> {
    pub fn new(sim: Simulator<'a>, h_min: f64, v_max: f64) -> Self {
        Self { sim, h_min, v_max }
    }

    pub fn simulator(&self) -> &Simulator<'a> {
        &self.sim
    }

    pub fn simulator_calls(&self) -> u64 {
        self.sim.calls()
    }

    pub fn validate(&self, sol: &Solution) -> Result<Verdict, HydraulicError> {
        let net = self.sim.network();
        let periods = net.period_count();
        for period in 1..=periods {
            let state = self.sim.simulate_period(sol, period)?;
            let fail = |kind| {
                Ok(Verdict {
                    violation: Some(Violation { period, kind }),
                    periods_simulated: period,
                })
            };
            if !state.converged {
                return fail(ViolationKind::NonConvergence);
            }
            for j in net.junctions() {
                let pressure = state.head[j.0] - net.node(j).elevation;
                if pressure < self.h_min {
                    return fail(ViolationKind::Pressure { node: j, pressure });
                }
            }
            for (i, &v) in state.velocity.iter().enumerate() {
                if v > self.v_max {
                    return fail(ViolationKind::Velocity {
                        pipe: PipeId(i),
                        velocity: v,
                    });
                }
            }
        }
        Ok(Verdict {
            violation: None,
            periods_simulated: periods,
        })
    }
}

/// Sum of oriented head losses around `cycle`, computed from the flows of
/// `state`. Zero (up to solver accuracy) for a converged state.
pub fn loop_headloss_residual(
    net: &Network,
    cat: &PipeTypeCatalog,
    sol: &Solution,
    state: &PeriodState,
    cycle: &[OrientedPipe],
) -> Result<f64, HydraulicError> {
    let ends = |op: &OrientedPipe| {
        let p = net.pipe(op.pipe);
        if op.forward {
            (p.from, p.to)
        } else {
            (p.to, p.from)
        }
    };
    let open = || ModelError::InvalidPipe {
        pipe: String::from("<cycle>"),
        reason: "pipes do not form a closed walk".into(),
    };
    let first = cycle.first().ok_or_else(open)?;
    let start = ends(first).0;
    let mut cur = start;
    let mut sum = 0.0;
    for op in cycle {
        let (a, b) = ends(op);
        if a != cur {
            return Err(open().into());
        }
        cur = b;
        let p = net.pipe(op.pipe);
        let hl = headloss(state.flow[op.pipe.0], p.length, cat.get(sol.get(op.pipe)));
        sum += if op.forward { hl } else { -hl };
    }
    if cur != start {
        return Err(open().into());
    }
    Ok(sum)
}
