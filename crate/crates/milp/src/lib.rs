//! Exact solver for small mixed binary/continuous linear programs.
//!
//! Models are built with [`MilpModel`] and minimized with [`MilpModel::solve`].
//! LP relaxations use a dense bounded-variable simplex (primal at the root,
//! dual at branch-and-bound nodes, Bland's rule after a run of degenerate
//! pivots). Branching picks the most fractional binary, lowest index first,
//! and open nodes are explored best-bound first. Everything is deterministic.
//!
//! ```
//! use milp::{Limits, MilpModel, Sense, Status, VarKind};
//!
//! let mut m = MilpModel::new();
//! let a = m.add_variable(VarKind::Binary);
//! let b = m.add_variable(VarKind::Binary);
//! m.add_constraint([(a, 1.0), (b, 1.0)], Sense::Le, 1.0).unwrap();
//! m.set_objective([(a, -1.0), (b, -2.0)]).unwrap();
//! let sol = m.solve(&Limits::default()).unwrap();
//! assert_eq!(sol.status, Status::Optimal);
//! assert_eq!(sol.objective_value, Some(-2.0));
//! ```

mod bnb;
pub mod lpfile;
mod model;
mod simplex;

pub use model::{Constraint, MilpModel, ModelError, Sense, VarId, VarKind, Variable};

/// Rows and bounds of an optimal solution hold to this (scaled) tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// A binary counts as integral within this distance of 0 or 1.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Objective values closer than this are considered equal.
pub const OBJECTIVE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_nodes: usize,
    /// Per LP solve.
    pub max_lp_iterations: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_nodes: 200_000,
            max_lp_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    /// A node or iteration limit was hit. `values` holds the best incumbent, if any.
    ResourceLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: Status,
    /// One entry per variable; empty when no feasible point is known.
    pub values: Vec<f64>,
    /// Present iff `status` is `Optimal`.
    pub objective_value: Option<f64>,
    pub nodes: usize,
    pub lp_iterations: usize,
}

impl Solution {
    fn without_values(status: Status, nodes: usize, lp_iterations: usize) -> Self {
        Solution {
            status,
            values: Vec::new(),
            objective_value: None,
            nodes,
            lp_iterations,
        }
    }

    pub fn value(&self, var: VarId) -> Option<f64> {
        self.values.get(var.0).copied()
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

impl MilpModel {
    /// Minimizes the objective. Errors only on malformed models; running out of
    /// nodes or iterations is reported through [`Status::ResourceLimit`].
    pub fn solve(&self, limits: &Limits) -> Result<Solution, ModelError> {
        bnb::solve(self, limits)
    }
}
