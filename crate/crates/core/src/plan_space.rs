//! The space of mixed-radix schedules as a stage DAG.
//!
//! Node `s` means "`s` logical radix-2 stages done". A radix `r` edge leaves
//! node `s` for node `s + log2(r)`, weighted by the cost of running that
//! radix starting at stage `s`. Every path from node 0 to node `n` is a
//! valid plan for a `2^n`-point transform, and the cheapest path is the
//! cheapest plan under the assumption that stage costs are independent.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::cost::CostTable;
use crate::error::{Error, Result};
use crate::radix::{Radix, RadixPlan};

/// Plans are only enumerated up to this many stages (16384 points).
pub const MAX_ENUMERATION_STAGES: u32 = 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanEdge {
    pub from: u32,
    pub to: u32,
    pub radix: Radix,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct PlanGraph {
    stages: u32,
    radices: Vec<Radix>,
    edges: Vec<PlanEdge>,
    /// Outgoing edge indexes per node, in ascending radix order.
    outgoing: Vec<Vec<usize>>,
}

impl PlanGraph {
    /// Builds the graph for `stages` logical stages over `radices`, asking
    /// `cost` for every edge weight.
    pub fn from_fn(
        stages: u32,
        radices: &[Radix],
        mut cost: impl FnMut(u32, Radix) -> Option<f64>,
    ) -> Result<Self> {
        if stages == 0 {
            return Err(Error::InvalidStageCount(stages));
        }
        let mut radices = radices.to_vec();
        radices.sort_unstable();
        radices.dedup();
        if radices.is_empty() {
            return Err(Error::InvalidParameter("empty radix set".into()));
        }
        let mut edges = Vec::new();
        let mut outgoing = vec![Vec::new(); stages as usize + 1];
        for s in 0..stages {
            for &radix in &radices {
                let to = s + radix.log2();
                if to > stages {
                    continue;
                }
                let weight = cost(s, radix).ok_or(Error::MissingCost { stage: s, radix })?;
                if !(weight.is_finite() && weight >= 0.0) {
                    return Err(Error::InvalidCost {
                        stage: s,
                        radix,
                        cost: weight,
                    });
                }
                outgoing[s as usize].push(edges.len());
                edges.push(PlanEdge {
                    from: s,
                    to,
                    radix,
                    weight,
                });
            }
        }
        Ok(Self {
            stages,
            radices,
            edges,
            outgoing,
        })
    }

    /// Every edge weighs 1.
    pub fn uniform(stages: u32, radices: &[Radix]) -> Result<Self> {
        Self::from_fn(stages, radices, |_, _| Some(1.0))
    }

    pub fn stages(&self) -> u32 {
        self.stages
    }

    pub fn radices(&self) -> &[Radix] {
        &self.radices
    }

    pub fn edges(&self) -> &[PlanEdge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.outgoing.len()
    }

    pub fn outgoing(&self, node: u32) -> impl Iterator<Item = &PlanEdge> {
        self.outgoing[node as usize].iter().map(|&i| &self.edges[i])
    }

    pub fn weight(&self, stage: u32, radix: Radix) -> Option<f64> {
        self.outgoing
            .get(stage as usize)?
            .iter()
            .map(|&i| &self.edges[i])
            .find(|e| e.radix == radix)
            .map(|e| e.weight)
    }
}

/// Graph over the default {2, 4, 8} radix set with weights from `costs`.
pub fn build_graph(stages: u32, costs: &CostTable) -> Result<PlanGraph> {
    PlanGraph::from_fn(stages, &Radix::DEFAULT_SET, |s, r| costs.get(s, r))
}

/// A plan with its summed edge weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanCost {
    pub n: u32,
    pub plan: RadixPlan,
    #[serde(rename = "total_cost")]
    pub total: f64,
}

/// Number of distinct source-to-sink paths over {2, 4, 8}.
pub fn count_plans(stages: u32) -> u128 {
    count_plans_with(stages, &Radix::DEFAULT_SET)
}

/// Compositions of `stages` into parts `log2(r)` for `r` in `radices`.
pub fn count_plans_with(stages: u32, radices: &[Radix]) -> u128 {
    let n = stages as usize;
    let mut ways = vec![0u128; n + 1];
    ways[0] = 1;
    for s in 1..=n {
        ways[s] = radices
            .iter()
            .filter_map(|r| s.checked_sub(r.log2() as usize))
            .map(|prev| ways[prev])
            .sum();
    }
    ways[n]
}

/// All plans over {2, 4, 8} in lexicographic radix order.
pub fn enumerate_plans(stages: u32) -> Result<Vec<RadixPlan>> {
    enumerate_plans_with(stages, &Radix::DEFAULT_SET)
}

pub fn enumerate_plans_with(stages: u32, radices: &[Radix]) -> Result<Vec<RadixPlan>> {
    if stages == 0 {
        return Err(Error::InvalidStageCount(stages));
    }
    if stages > MAX_ENUMERATION_STAGES {
        return Err(Error::EnumerationTooLarge(stages));
    }
    let mut radices = radices.to_vec();
    radices.sort_unstable();
    radices.dedup();

    fn walk(remaining: u32, radices: &[Radix], prefix: &mut Vec<Radix>, out: &mut Vec<RadixPlan>) {
        if remaining == 0 {
            out.push(RadixPlan::new(prefix.clone()).expect("non-empty"));
            return;
        }
        for &r in radices {
            if r.log2() <= remaining {
                prefix.push(r);
                walk(remaining - r.log2(), radices, prefix, out);
                prefix.pop();
            }
        }
    }

    let mut out = Vec::new();
    walk(stages, &radices, &mut Vec::new(), &mut out);
    Ok(out)
}

/// Sum of stage-indexed costs along `plan`.
pub fn plan_cost(plan: &RadixPlan, costs: &CostTable) -> Result<PlanCost> {
    plan_cost_with(plan, costs.stages(), |s, r| costs.get(s, r))
}

pub fn plan_cost_on_graph(plan: &RadixPlan, graph: &PlanGraph) -> Result<PlanCost> {
    plan_cost_with(plan, graph.stages(), |s, r| graph.weight(s, r))
}

fn plan_cost_with(
    plan: &RadixPlan,
    stages: u32,
    cost: impl Fn(u32, Radix) -> Option<f64>,
) -> Result<PlanCost> {
    let covered = plan.stages();
    if covered != stages {
        return Err(Error::PlanMismatch {
            covered,
            expected: stages,
        });
    }
    let mut total = 0.0;
    for (stage, radix) in plan.stage_starts() {
        total += cost(stage, radix).ok_or(Error::MissingCost { stage, radix })?;
    }
    Ok(PlanCost {
        n: stages,
        plan: plan.clone(),
        total,
    })
}

#[derive(Debug, Clone, PartialEq)]
struct Label {
    cost: f64,
    path: Vec<Radix>,
    node: u32,
}

impl Eq for Label {}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then_with(|| self.path.cmp(&other.path))
            .then_with(|| self.node.cmp(&other.node))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from node 0 to the sink.
///
/// Labels are ordered by (cost, radix sequence), so among equal-cost
/// shortest paths the lexicographically smallest radix sequence wins.
pub fn shortest_plan(graph: &PlanGraph) -> PlanCost {
    let nodes = graph.node_count();
    let mut settled = vec![false; nodes];
    let mut best: Vec<Option<(f64, Vec<Radix>)>> = vec![None; nodes];
    let mut heap = BinaryHeap::new();
    best[0] = Some((0.0, Vec::new()));
    heap.push(Reverse(Label {
        cost: 0.0,
        path: Vec::new(),
        node: 0,
    }));

    while let Some(Reverse(label)) = heap.pop() {
        let u = label.node as usize;
        if settled[u] {
            continue;
        }
        settled[u] = true;
        if label.node == graph.stages() {
            return PlanCost {
                n: graph.stages(),
                plan: RadixPlan::new(label.path).expect("sink is at least one edge away"),
                total: label.cost,
            };
        }
        for e in graph.outgoing(label.node) {
            let v = e.to as usize;
            if settled[v] {
                continue;
            }
            let cost = label.cost + e.weight;
            let mut path = label.path.clone();
            path.push(e.radix);
            let better = match &best[v] {
                None => true,
                Some((c, p)) => match cost.total_cmp(c) {
                    Ordering::Less => true,
                    Ordering::Equal => path < *p,
                    Ordering::Greater => false,
                },
            };
            if better {
                best[v] = Some((cost, path.clone()));
                heap.push(Reverse(Label { cost, path, node: e.to }));
            }
        }
    }
    unreachable!("radix 2 edges connect every node to the sink")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_counts() {
        for (n, edges) in [(1, 1), (2, 3), (5, 12), (10, 27), (12, 33)] {
            let g = PlanGraph::uniform(n, &Radix::DEFAULT_SET).unwrap();
            assert_eq!(g.edges().len(), edges, "n = {n}");
            let formula = n + n.saturating_sub(1) + n.saturating_sub(2);
            assert_eq!(g.edges().len() as u32, formula);
        }
    }

    #[test]
    fn graph_is_forward_only() {
        let g = PlanGraph::uniform(7, &Radix::DEFAULT_SET).unwrap();
        assert!(g.edges().iter().all(|e| e.to > e.from && e.to <= 7));
        // Node 0 has no incoming edges, node n no outgoing.
        assert!(g.edges().iter().all(|e| e.to != 0));
        assert_eq!(g.outgoing(7).count(), 0);
    }

    #[test]
    fn missing_cost_is_named() {
        let err = PlanGraph::from_fn(3, &Radix::DEFAULT_SET, |s, r| {
            (!(s == 1 && r == Radix::R4)).then_some(1.0)
        })
        .unwrap_err();
        assert_eq!(err.to_string(), "missing cost entry for stage 1, radix 4");
    }

    #[test]
    fn negative_weight_rejected() {
        let err = PlanGraph::from_fn(2, &Radix::DEFAULT_SET, |_, _| Some(-1.0)).unwrap_err();
        assert!(matches!(err, Error::InvalidCost { .. }));
        assert!(PlanGraph::uniform(0, &Radix::DEFAULT_SET).is_err());
    }

    #[test]
    fn counts() {
        assert_eq!(count_plans(1), 1);
        assert_eq!(count_plans(2), 2);
        assert_eq!(count_plans(4), 7);
        assert_eq!(count_plans(10), 274);
        assert_eq!(count_plans(12), 927);
        // {2, 4} only: Fibonacci.
        assert_eq!(count_plans_with(10, &[Radix::R2, Radix::R4]), 89);
    }

    #[test]
    fn small_enumerations() {
        let show = |n| {
            enumerate_plans(n)
                .unwrap()
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
        };
        assert_eq!(show(2), vec!["2,2", "4"]);
        assert_eq!(show(3), vec!["2,2,2", "2,4", "4,2", "8"]);
        assert!(matches!(enumerate_plans(15), Err(Error::EnumerationTooLarge(15))));
    }

    #[test]
    fn uniform_weights_prefer_fewest_edges() {
        let g = PlanGraph::uniform(9, &Radix::DEFAULT_SET).unwrap();
        let best = shortest_plan(&g);
        assert_eq!(best.plan.to_string(), "8,8,8");
        assert_eq!(best.total, 3.0);

        // Four-edge ties at n = 10; the smallest sequence wins.
        let g = PlanGraph::uniform(10, &Radix::DEFAULT_SET).unwrap();
        assert_eq!(shortest_plan(&g).plan.to_string(), "2,8,8,8");
    }

    #[test]
    fn unit_cost_equals_length() {
        let g = PlanGraph::uniform(8, &Radix::DEFAULT_SET).unwrap();
        for p in enumerate_plans(8).unwrap() {
            assert_eq!(plan_cost_on_graph(&p, &g).unwrap().total, p.len() as f64);
        }
    }

    #[test]
    fn extended_radix_set() {
        let set = [Radix::R2, Radix::R4, Radix::R8, Radix::R16];
        let g = PlanGraph::uniform(8, &set).unwrap();
        assert_eq!(shortest_plan(&g).plan.to_string(), "16,16");
        assert_eq!(
            enumerate_plans_with(8, &set).unwrap().len() as u128,
            count_plans_with(8, &set)
        );
    }

    #[test]
    fn plan_cost_json_shape() {
        let pc = PlanCost {
            n: 4,
            plan: "4,4".parse().unwrap(),
            total: 2.5,
        };
        let v: serde_json::Value = serde_json::to_value(&pc).unwrap();
        assert_eq!(v, serde_json::json!({"n": 4, "plan": [4, 4], "total_cost": 2.5}));
    }
}
