//! Best-first branch-and-bound over binary variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::model::{MilpModel, ModelError};
use crate::simplex::{LpData, LpOutcome, Tableau};
use crate::{Limits, Solution, Status, FEASIBILITY_TOL, INTEGRALITY_TOL, OBJECTIVE_TOL};

struct OpenNode {
    bound: f64,
    depth: usize,
    seq: usize,
    branch_var: usize,
    fixings: Vec<(usize, f64)>,
}

impl PartialEq for OpenNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenNode {}

impl PartialOrd for OpenNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenNode {
    // BinaryHeap is a max-heap: the "greatest" node is the lowest bound, then
    // the deepest, then the oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

enum NodeResult {
    Pruned,
    Limit,
    Solved { objective: f64 },
}

struct Search<'a> {
    model: &'a MilpModel,
    data: LpData,
    tableau: Tableau,
    binaries: Vec<usize>,
    limits: &'a Limits,
    lp_iterations: usize,
    nodes: usize,
    incumbent: Option<(f64, Vec<f64>)>,
}

pub(crate) fn solve(model: &MilpModel, limits: &Limits) -> Result<Solution, ModelError> {
    model.validate()?;
    let Some(data) = LpData::from_model(model) else {
        return Ok(Solution::without_values(Status::Infeasible, 0, 0));
    };
    let binaries: Vec<usize> = model
        .variables()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind.is_binary())
        .map(|(i, _)| i)
        .collect();

    let tableau = Tableau::new(&data, &data.lower, &data.upper);
    let mut search = Search {
        model,
        data,
        tableau,
        binaries,
        limits,
        lp_iterations: 0,
        nodes: 1,
        incumbent: None,
    };
    Ok(search.run())
}

impl Search<'_> {
    fn run(&mut self) -> Solution {
        let outcome = self
            .tableau
            .solve_primal(self.limits.max_lp_iterations, &mut self.lp_iterations);
        match outcome {
            LpOutcome::Optimal => {}
            LpOutcome::Infeasible => return self.finish(Status::Infeasible),
            LpOutcome::Unbounded => return self.finish(Status::Unbounded),
            LpOutcome::IterationLimit | LpOutcome::Cutoff => {
                return self.finish(Status::ResourceLimit)
            }
        }
        if self.tableau.needs_refactor() && self.tableau.refactor() {
            self.tableau.prepare_dual();
            if let LpOutcome::IterationLimit = self.tableau.run_dual(
                self.limits.max_lp_iterations,
                &mut self.lp_iterations,
                None,
            ) {
                return self.finish(Status::ResourceLimit);
            }
        }

        let root_bound = self.tableau.objective();
        let mut heap = BinaryHeap::new();
        let mut seq = 0usize;
        match self.most_fractional() {
            None => {
                if let NodeResult::Limit = self.accept_integral(&[]) {
                    return self.finish(Status::ResourceLimit);
                }
            }
            Some(var) => heap.push(OpenNode {
                bound: root_bound,
                depth: 0,
                seq,
                branch_var: var,
                fixings: Vec::new(),
            }),
        }

        while let Some(node) = heap.pop() {
            if !self.may_improve(node.bound) {
                continue;
            }
            for value in [0.0, 1.0] {
                if self.nodes >= self.limits.max_nodes {
                    return self.finish(Status::ResourceLimit);
                }
                self.nodes += 1;
                let mut fixings = node.fixings.clone();
                fixings.push((node.branch_var, value));
                
                let res = self.solve_node(&fixings);
                match res {
                    NodeResult::Pruned => {}
                    NodeResult::Limit => return self.finish(Status::ResourceLimit),
                    NodeResult::Solved { objective } => {
                        if !self.may_improve(objective) {
                            continue;
                        }
                        match self.most_fractional() {
                            None => {
                                if let NodeResult::Limit = self.accept_integral(&fixings) {
                                    return self.finish(Status::ResourceLimit);
                                }
                            }
                            Some(var) => {
                                seq += 1;
                                heap.push(OpenNode {
                                    bound: objective,
                                    depth: node.depth + 1,
                                    seq,
                                    branch_var: var,
                                    fixings,
                                });
                            }
                        }
                    }
                }
            }
        }
        match self.incumbent {
            Some(_) => self.finish(Status::Optimal),
            None => self.finish(Status::Infeasible),
        }
    }

    fn may_improve(&self, bound: f64) -> bool {
        match &self.incumbent {
            None => true,
            Some((best, _)) => bound < best - OBJECTIVE_TOL,
        }
    }

    fn cutoff(&self) -> Option<f64> {
        self.incumbent
            .as_ref()
            .map(|(best, _)| best - OBJECTIVE_TOL)
    }

    fn apply_bounds(&mut self, fixings: &[(usize, f64)]) {
        for &j in &self.binaries {
            self.tableau.set_struct_bounds(j, 0.0, 1.0);
        }
        for &(j, v) in fixings {
            self.tableau.set_struct_bounds(j, v, v);
        }
    }

    fn solve_node(&mut self, fixings: &[(usize, f64)]) -> NodeResult {
        self.apply_bounds(fixings);
        let cutoff = self.cutoff();
        let mut outcome = if self.tableau.prepare_dual() {
            self.tableau
                .run_dual(self.limits.max_lp_iterations, &mut self.lp_iterations, cutoff)
        } else {
            self.cold_solve(fixings)
        };
        if outcome == LpOutcome::Optimal && self.tableau.needs_refactor() {
            if self.tableau.refactor() && self.tableau.prepare_dual() {
                outcome = self.tableau.run_dual(
                    self.limits.max_lp_iterations,
                    &mut self.lp_iterations,
                    cutoff,
                );
            } else {
                outcome = self.cold_solve(fixings);
            }
        }
        match outcome {
            LpOutcome::Optimal => NodeResult::Solved {
                objective: self.tableau.objective(),
            },
            LpOutcome::Infeasible | LpOutcome::Cutoff => NodeResult::Pruned,
            // A bounded root cannot turn unbounded under tighter bounds.
            LpOutcome::Unbounded => NodeResult::Pruned,
            LpOutcome::IterationLimit => NodeResult::Limit,
        }
    }

    /// Solves the node from a fresh slack basis.
    fn cold_solve(&mut self, fixings: &[(usize, f64)]) -> LpOutcome {
        let mut lower = self.data.lower.clone();
        let mut upper = self.data.upper.clone();
        for &(j, v) in fixings {
            lower[j] = v / self.data.col_scale[j];
            upper[j] = v / self.data.col_scale[j];
        }
        self.tableau = Tableau::new(&self.data, &lower, &upper);
        let out = self
            .tableau
            .solve_primal(self.limits.max_lp_iterations, &mut self.lp_iterations);
        if out == LpOutcome::Optimal {
            if let Some(c) = self.cutoff() {
                if self.tableau.objective() > c {
                    return LpOutcome::Cutoff;
                }
            }
        }
        out
    }

    /// Binary with value farthest from integrality; ties go to the lowest index.
    fn most_fractional(&self) -> Option<usize> {
        let values = self.tableau.structural_values();
        let mut best: Option<usize> = None;
        let mut best_frac = INTEGRALITY_TOL;
        for &j in &self.binaries {
            let v = values[j];
            let frac = (v - v.floor()).min(v.ceil() - v);
            if frac > best_frac {
                best_frac = frac;
                best = Some(j);
            }
        }
        best
    }

    /// The current LP point is integral: pin every binary to its rounded value,
    /// re-optimize the continuous part and record the result if it checks out
    /// against the original rows.
    fn accept_integral(&mut self, fixings: &[(usize, f64)]) -> NodeResult {
        let rounded: Vec<(usize, f64)> = {
            let values = self.tableau.structural_values();
            self.binaries
                .iter()
                .map(|&j| (j, values[j].round()))
                .collect()
        };
        for attempt in 0..2 {
            self.apply_bounds(&rounded);
            let outcome = if attempt == 0 && self.tableau.prepare_dual() {
                self.tableau
                    .run_dual(self.limits.max_lp_iterations, &mut self.lp_iterations, None)
            } else {
                self.cold_solve(&rounded)
            };
            match outcome {
                LpOutcome::Optimal => {}
                LpOutcome::IterationLimit => return NodeResult::Limit,
                _ => continue,
            }
            let mut values = self.tableau.structural_values().to_vec();
            for &(j, v) in &rounded {
                values[j] = v;
            }
            if self.model.max_violation(&values) <= FEASIBILITY_TOL {
                let objective = self.model.objective_value(&values);
                if self.may_improve(objective) {
                    self.incumbent = Some((objective, values));
                }
                return NodeResult::Solved { objective };
            }
            if !self.tableau.refactor() {
                continue;
            }
        }
        // Restore the node's own bounds for whatever is solved next.
        self.apply_bounds(fixings);
        NodeResult::Pruned
    }

    fn finish(&self, status: Status) -> Solution {
        match (&self.incumbent, status) {
            (Some((obj, values)), Status::Optimal) => Solution {
                status,
                values: values.clone(),
                objective_value: Some(*obj),
                nodes: self.nodes,
                lp_iterations: self.lp_iterations,
            },
            (Some((_, values)), Status::ResourceLimit) => Solution {
                status,
                values: values.clone(),
                objective_value: None,
                nodes: self.nodes,
                lp_iterations: self.lp_iterations,
            },
            (None, Status::Optimal) => unreachable!("optimal status without incumbent"),
            _ => Solution::without_values(status, self.nodes, self.lp_iterations),
        }
    }
}
