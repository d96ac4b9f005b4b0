//! Dense-tableau bounded-variable simplex.
//!
//! Columns are laid out as `[structural | one slack per row | artificials]`.
//! Row `r` reads `a_r . x + sigma_r * s_r (+ g * art) = b_r` where the slack
//! has bounds `[0, inf)` for inequalities (`sigma = +1` for `<=`, `-1` for `>=`)
//! and `[0, 0]` for equalities. Continuous columns are scaled geometrically,
//! then rows to unit max coefficient.
//!
//! The root relaxation is solved with a two-phase primal simplex. Branch-and-bound
//! nodes re-use the current basis: bound changes keep it dual feasible, so a
//! dual simplex pass restores primal feasibility.

use crate::model::{MilpModel, Sense};

pub(crate) const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-7;
const DROP_TOL: f64 = 1e-14;
const RATIO_TIE: f64 = 1e-12;
const PHASE_ONE_TOL: f64 = 1e-8;
const PERTURBATION: f64 = 1e-6;
const DUAL_PERTURBATION: f64 = 1e-6;
const DEGENERATE_STREAK: usize = 50;
const RESIDUAL_TOL: f64 = 1e-9;
/// Pivots between residual checks inside one simplex pass.
const CHECK_INTERVAL: usize = 100;

/// Deterministic value in `[0, 1)` from splitmix64.
fn unit_hash(key: u64) -> f64 {
    let mut z = key.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpOutcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// Dual objective passed the supplied cutoff; the node can be pruned.
    Cutoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
}

/// Scaled row data taken from a model, with empty rows removed.
#[derive(Debug, Clone)]
pub(crate) struct LpData {
    pub n_struct: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub senses: Vec<Sense>,
    pub rhs: Vec<f64>,
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Structural value is `col_scale[j]` times the internal column value.
    pub col_scale: Vec<f64>,
}

fn row_max(row: &[(usize, f64)]) -> f64 {
    row.iter().fold(0.0_f64, |acc, &(_, a)| acc.max(a.abs()))
}

impl LpData {
    /// Returns `None` when an empty row is violated (the model is infeasible).
    pub fn from_model(model: &MilpModel) -> Option<LpData> {
        let n_struct = model.num_variables();
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut senses = Vec::new();
        let mut rhs = Vec::new();
        for c in model.constraints() {
            if c.coefficients.is_empty() {
                let ok = match c.sense {
                    Sense::Le => 0.0 <= c.rhs,
                    Sense::Ge => 0.0 >= c.rhs,
                    Sense::Eq => c.rhs == 0.0,
                };
                if !ok {
                    return None;
                }
                continue;
            }
            let scale = c
                .coefficients
                .iter()
                .fold(0.0_f64, |acc, &(_, a)| acc.max(a.abs()));
            rows.push(
                c.coefficients
                    .iter()
                    .map(|&(v, a)| (v.0, a / scale))
                    .collect(),
            );
            senses.push(c.sense);
            rhs.push(c.rhs / scale);
        }
        let mut cost = vec![0.0; n_struct];
        for &(v, c) in model.objective() {
            cost[v.0] += c;
        }
        let (mut lower, mut upper): (Vec<f64>, Vec<f64>) = model
            .variables()
            .iter()
            .map(|v| v.kind.bounds())
            .unzip();

        // Geometric scaling of continuous columns; binaries keep unit scale so
        // branching can fix them to 0 and 1 directly.
        let mut col_max = vec![0.0_f64; n_struct];
        let mut col_min = vec![f64::INFINITY; n_struct];
        for row in &rows {
            for &(j, a) in row.iter() {
                col_max[j] = col_max[j].max(a.abs());
                col_min[j] = col_min[j].min(a.abs());
            }
        }
        let mut col_scale = vec![1.0; n_struct];
        for (j, v) in model.variables().iter().enumerate() {
            if !v.kind.is_binary() && col_max[j] > 0.0 {
                col_scale[j] = 1.0 / (col_max[j] * col_min[j]).sqrt();
            }
        }
        for (row, b) in rows.iter_mut().zip(rhs.iter_mut()) {
            for (j, a) in row.iter_mut() {
                *a *= col_scale[*j];
            }
            let scale = row_max(row);
            for (_, a) in row.iter_mut() {
                *a /= scale;
            }
            *b /= scale;
        }
        for j in 0..n_struct {
            cost[j] *= col_scale[j];
            lower[j] /= col_scale[j];
            upper[j] /= col_scale[j];
        }
        Some(LpData {
            n_struct,
            rows,
            senses,
            rhs,
            cost,
            lower,
            upper,
            col_scale,
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Tableau {
    m: usize,
    n_struct: usize,
    ncols: usize,
    rows: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    slack_coef: Vec<f64>,
    /// (row, coefficient) of each artificial column.
    artificials: Vec<(usize, f64)>,
    t: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    status: Vec<VarStatus>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    cost: Vec<f64>,
    struct_cost: Vec<f64>,
    col_scale: Vec<f64>,
    d: Vec<f64>,
    pivot_row: Vec<(usize, f64)>,
    pub pivots_since_refactor: usize,
}

impl Tableau {
    /// Slack basis (plus artificials for rows the all-at-lower point violates),
    /// with structural bounds taken from `lower`/`upper`.
    pub fn new(data: &LpData, lower: &[f64], upper: &[f64]) -> Tableau {
        let m = data.rows.len();
        let n = data.n_struct;

        let mut x = vec![0.0; n + m];
        x[..n].copy_from_slice(lower);
        let mut col_lower = lower.to_vec();
        let mut col_upper = upper.to_vec();
        let mut status = vec![VarStatus::AtLower; n + m];
        let mut slack_coef = Vec::with_capacity(m);
        let mut basis = vec![0; m];
        let mut artificials = Vec::new();
        let mut basic_coef = vec![0.0; m];

        for r in 0..m {
            let (sigma, slack_upper) = match data.senses[r] {
                Sense::Le => (1.0, f64::INFINITY),
                Sense::Ge => (-1.0, f64::INFINITY),
                Sense::Eq => (1.0, 0.0),
            };
            slack_coef.push(sigma);
            col_lower.push(0.0);
            col_upper.push(slack_upper);

            let activity: f64 = data.rows[r].iter().map(|&(j, a)| a * x[j]).sum();
            let residual = data.rhs[r] - activity;
            let slack_value = sigma * residual;
            let fits = slack_value >= -PRIMAL_TOL && slack_value <= slack_upper + PRIMAL_TOL;
            if fits {
                basis[r] = n + r;
                status[n + r] = VarStatus::Basic;
                x[n + r] = slack_value.max(0.0).min(slack_upper);
                basic_coef[r] = sigma;
            } else {
                let g = if residual > 0.0 { 1.0 } else { -1.0 };
                artificials.push((r, g));
                basic_coef[r] = g;
            }
        }

        let ncols = n + m + artificials.len();
        for (k, &(r, _)) in artificials.iter().enumerate() {
            let col = n + m + k;
            basis[r] = col;
            status.push(VarStatus::Basic);
            col_lower.push(0.0);
            col_upper.push(f64::INFINITY);
            let activity: f64 = data.rows[r].iter().map(|&(j, a)| a * x[j]).sum();
            x.push((data.rhs[r] - activity).abs());
        }

        let mut t = vec![0.0; m * ncols];
        let mut beta = vec![0.0; m];
        for r in 0..m {
            let inv = 1.0 / basic_coef[r];
            let row = &mut t[r * ncols..(r + 1) * ncols];
            for &(j, a) in &data.rows[r] {
                row[j] = a * inv;
            }
            row[n + r] = slack_coef[r] * inv;
            beta[r] = data.rhs[r] * inv;
        }
        for (k, &(r, g)) in artificials.iter().enumerate() {
            t[r * ncols + n + m + k] = g / basic_coef[r];
        }

        let mut struct_cost = data.cost.clone();
        struct_cost.resize(n, 0.0);
        Tableau {
            m,
            n_struct: n,
            ncols,
            rows: data.rows.clone(),
            b: data.rhs.clone(),
            slack_coef,
            artificials,
            t,
            beta,
            basis,
            status,
            lower: col_lower,
            upper: col_upper,
            x,
            cost: vec![0.0; ncols],
            struct_cost,
            col_scale: data.col_scale.clone(),
            d: vec![0.0; ncols],
            pivot_row: Vec::new(),
            pivots_since_refactor: 0,
        }
    }

    pub fn structural_values(&self) -> Vec<f64> {
        self.x[..self.n_struct]
            .iter()
            .zip(&self.col_scale)
            .map(|(x, s)| x * s)
            .collect()
    }

    pub fn objective(&self) -> f64 {
        self.cost
            .iter()
            .zip(&self.x)
            .map(|(c, x)| c * x)
            .sum()
    }

    /// Two-phase primal simplex from the current (slack) basis, run on
    /// slightly widened bounds to break degeneracy. The true bounds are then
    /// restored and a dual pass removes the remaining infeasibility.
    pub fn solve_primal(&mut self, max_iter: usize, iters: &mut usize) -> LpOutcome {
        let keep = self.n_struct + self.m;
        let saved_lower = self.lower[..keep].to_vec();
        let saved_upper = self.upper[..keep].to_vec();
        self.perturb_bounds();
        let outcome = self.two_phase(max_iter, iters);
        self.lower[..keep].copy_from_slice(&saved_lower);
        self.upper[..keep].copy_from_slice(&saved_upper);
        self.snap_nonbasic();
        if outcome != LpOutcome::Optimal {
            // Leave phase-two costs behind for later warm starts.
            self.set_phase_two_costs();
            return outcome;
        }
        if self.prepare_dual() {
            match self.run_dual(max_iter, iters, None) {
                LpOutcome::Optimal => {}
                other => return other,
            }
        }
        // Dual degeneracy can leave improving columns after the cleanup.
        self.run_primal(max_iter, iters)
    }

    /// Widens every structural and slack bound outward by a small,
    /// deterministic, column-dependent amount.
    fn perturb_bounds(&mut self) {
        let keep = self.n_struct + self.m;
        for j in 0..keep {
            let eps = PERTURBATION * (1.0 + unit_hash(j as u64));
            if self.lower[j].is_finite() {
                self.lower[j] -= eps * self.lower[j].abs().max(1.0);
            }
            if self.upper[j].is_finite() {
                self.upper[j] += eps * self.upper[j].abs().max(1.0);
            }
            if self.status[j] == VarStatus::AtLower {
                self.x[j] = self.lower[j];
            } else if self.status[j] == VarStatus::AtUpper {
                self.x[j] = self.upper[j];
            }
        }
        self.recompute_basic_values();
    }

    fn snap_nonbasic(&mut self) {
        for j in 0..self.ncols {
            match self.status[j] {
                VarStatus::AtLower => self.x[j] = self.lower[j],
                VarStatus::AtUpper => self.x[j] = self.upper[j],
                VarStatus::Basic => {}
            }
        }
        self.recompute_basic_values();
    }

    fn two_phase(&mut self, max_iter: usize, iters: &mut usize) -> LpOutcome {
        let n = self.n_struct;
        let m = self.m;
        if !self.artificials.is_empty() {
            self.cost = vec![0.0; self.ncols];
            for c in &mut self.cost[n + m..] {
                *c = 1.0;
            }
            self.compute_reduced_costs();
            match self.run_primal(max_iter, iters) {
                LpOutcome::Optimal => {}
                LpOutcome::IterationLimit => return LpOutcome::IterationLimit,
                other => return other,
            }
            if self.objective() > PHASE_ONE_TOL {
                return LpOutcome::Infeasible;
            }
        }
        self.set_phase_two_costs();
        self.run_primal(max_iter, iters)
    }

    fn set_phase_two_costs(&mut self) {
        let n = self.n_struct;
        for col in n + self.m..self.ncols {
            self.upper[col] = 0.0;
            if self.status[col] != VarStatus::Basic {
                self.status[col] = VarStatus::AtLower;
                self.x[col] = 0.0;
            }
        }
        self.cost = vec![0.0; self.ncols];
        self.cost[..n].copy_from_slice(&self.struct_cost);
        self.compute_reduced_costs();
    }

    fn compute_reduced_costs(&mut self) {
        let nc = self.ncols;
        self.d.clone_from(&self.cost);
        for r in 0..self.m {
            let cb = self.cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.t[r * nc..(r + 1) * nc];
                for (dj, &a) in self.d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        for &bv in &self.basis {
            self.d[bv] = 0.0;
        }
    }

    fn is_nonbasic_movable(&self, j: usize) -> bool {
        self.status[j] != VarStatus::Basic && self.upper[j] > self.lower[j]
    }

    fn choose_entering(&self, bland: bool) -> Option<usize> {
        let mut best: Option<usize> = None;
        let mut best_score = 0.0;
        for j in 0..self.ncols {
            if !self.is_nonbasic_movable(j) {
                continue;
            }
            let dj = self.d[j];
            let improving = match self.status[j] {
                VarStatus::AtLower => dj < -DUAL_TOL,
                VarStatus::AtUpper => dj > DUAL_TOL,
                VarStatus::Basic => false,
            };
            if !improving {
                continue;
            }
            if bland {
                return Some(j);
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                best = Some(j);
            }
        }
        best
    }

    /// Harris two-pass ratio test for entering column `q` moving in direction
    /// `dir`. Returns the leaving row and the step length.
    fn primal_ratio(&self, q: usize, dir: f64, bland: bool) -> Option<(usize, f64)> {
        let nc = self.ncols;
        let room = |r: usize, da: f64| -> Option<f64> {
            let bv = self.basis[r];
            let xb = self.x[bv];
            if da > 0.0 {
                self.lower[bv].is_finite().then(|| (xb - self.lower[bv]).max(0.0))
            } else {
                self.upper[bv].is_finite().then(|| (self.upper[bv] - xb).max(0.0))
            }
        };
        let mut bound = f64::INFINITY;
        for r in 0..self.m {
            let da = dir * self.t[r * nc + q];
            if da.abs() <= PIVOT_TOL {
                continue;
            }
            if let Some(room) = room(r, da) {
                bound = bound.min((room + PRIMAL_TOL) / da.abs());
            }
        }
        if !bound.is_finite() {
            return None;
        }
        let mut best: Option<(usize, f64, f64)> = None;
        for r in 0..self.m {
            let alpha = self.t[r * nc + q];
            let da = dir * alpha;
            if da.abs() <= PIVOT_TOL {
                continue;
            }
            let Some(room) = room(r, da) else { continue };
            let step = room / da.abs();
            if step > bound {
                continue;
            }
            let better = match best {
                None => true,
                Some((lr, la, _)) => {
                    if bland {
                        self.basis[r] < self.basis[lr]
                    } else {
                        alpha.abs() > la.abs()
                    }
                }
            };
            if better {
                best = Some((r, alpha, step));
            }
        }
        best.map(|(r, _, step)| (r, step))
    }

    /// Harris two-pass ratio test over pivot row `r`. `below` says whether the
    /// leaving variable sits under its lower bound.
    fn dual_ratio(&self, r: usize, below: bool, bland: bool) -> Option<(usize, f64)> {
        let nc = self.ncols;
        let row = &self.t[r * nc..(r + 1) * nc];
        let candidate = |j: usize| -> Option<(f64, f64)> {
            if !self.is_nonbasic_movable(j) {
                return None;
            }
            let alpha = row[j];
            if alpha.abs() <= PIVOT_TOL {
                return None;
            }
            let at_lower = self.status[j] == VarStatus::AtLower;
            let eligible = if below {
                (at_lower && alpha < 0.0) || (!at_lower && alpha > 0.0)
            } else {
                (at_lower && alpha > 0.0) || (!at_lower && alpha < 0.0)
            };
            if !eligible {
                return None;
            }
            let dj = if at_lower { self.d[j] } else { -self.d[j] };
            Some((dj.max(0.0), alpha))
        };
        let mut bound = f64::INFINITY;
        for j in 0..nc {
            if let Some((dj, alpha)) = candidate(j) {
                bound = bound.min((dj + DUAL_TOL) / alpha.abs());
            }
        }
        if !bound.is_finite() {
            return None;
        }
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..nc {
            let Some((dj, alpha)) = candidate(j) else { continue };
            let ratio = dj / alpha.abs();
            if ratio > bound {
                continue;
            }
            let better = match best {
                None => true,
                Some((_, la, _)) => !bland && alpha.abs() > la.abs(),
            };
            if better {
                best = Some((j, alpha, ratio));
            }
        }
        best.map(|(j, _, ratio)| (j, ratio))
    }

    /// Refactors when the incrementally updated point has drifted. Returns
    /// `false` if the basis could not be refactored.
    fn keep_accurate(&mut self) -> bool {
        !self.needs_refactor() || self.refactor()
    }

    fn run_primal(&mut self, max_iter: usize, iters: &mut usize) -> LpOutcome {
        let nc = self.ncols;
        let mut streak = 0usize;
        let mut local = 0usize;
        let mut verified = false;
        loop {
            if local > 0 && local % CHECK_INTERVAL == 0 {
                self.keep_accurate();
            }
            let bland = streak >= DEGENERATE_STREAK;
            let Some(q) = self.choose_entering(bland) else {
                // Confirm optimality on an accurate point once.
                if !verified && self.needs_refactor() && self.refactor() {
                    verified = true;
                    continue;
                }
                return LpOutcome::Optimal;
            };
            if local >= max_iter {
                return LpOutcome::IterationLimit;
            }
            local += 1;
            *iters += 1;

            let dir = if self.status[q] == VarStatus::AtLower {
                1.0
            } else {
                -1.0
            };
            let leave = self.primal_ratio(q, dir, bland);
            let best_step = leave.map_or(f64::INFINITY, |(_, s)| s);

            let flip = self.upper[q] - self.lower[q];
            if flip.is_finite() && flip <= best_step {
                for r in 0..self.m {
                    let alpha = self.t[r * nc + q];
                    if alpha != 0.0 {
                        self.x[self.basis[r]] -= dir * alpha * flip;
                    }
                }
                if dir > 0.0 {
                    self.status[q] = VarStatus::AtUpper;
                    self.x[q] = self.upper[q];
                } else {
                    self.status[q] = VarStatus::AtLower;
                    self.x[q] = self.lower[q];
                }
                streak = 0;
                continue;
            }
            let Some((r, step)) = leave else {
                return LpOutcome::Unbounded;
            };
            for i in 0..self.m {
                let alpha = self.t[i * nc + q];
                if alpha != 0.0 {
                    self.x[self.basis[i]] -= dir * alpha * step;
                }
            }
            self.x[q] += dir * step;
            let bv = self.basis[r];
            let da = dir * self.t[r * nc + q];
            if da > 0.0 {
                self.x[bv] = self.lower[bv];
                self.status[bv] = VarStatus::AtLower;
            } else {
                self.x[bv] = self.upper[bv];
                self.status[bv] = VarStatus::AtUpper;
            }
            self.pivot(r, q);
            if step <= RATIO_TIE {
                streak += 1;
            } else {
                streak = 0;
            }
        }
    }

    /// Dual simplex from a dual-feasible basis. Stops early with `Cutoff` once
    /// the (monotone) objective exceeds `cutoff`.
    pub fn run_dual(&mut self, max_iter: usize, iters: &mut usize, cutoff: Option<f64>) -> LpOutcome {
        // Nearly all costs are zero in typical models; shifting each nonbasic
        // reduced cost by a distinct small amount into its feasible direction
        // breaks the resulting dual ties. True costs are restored at the end
        // and a primal pass removes any leftover dual infeasibility.
        self.perturb_duals();
        let outcome = self.dual_loop(max_iter, iters);
        self.compute_reduced_costs();
        let outcome = match outcome {
            LpOutcome::Optimal => self.run_primal(max_iter, iters),
            other => other,
        };
        if outcome == LpOutcome::Optimal {
            if let Some(c) = cutoff {
                if self.objective() > c {
                    return LpOutcome::Cutoff;
                }
            }
        }
        outcome
    }

    fn perturb_duals(&mut self) {
        for j in 0..self.ncols {
            if !self.is_nonbasic_movable(j) {
                continue;
            }
            let eps = DUAL_PERTURBATION * (1.0 + unit_hash(j as u64 ^ 0xD1B5_4A32_D192_ED03));
            match self.status[j] {
                VarStatus::AtLower => self.d[j] = self.d[j].max(0.0) + eps,
                VarStatus::AtUpper => self.d[j] = self.d[j].min(0.0) - eps,
                VarStatus::Basic => {}
            }
        }
    }

    fn dual_loop(&mut self, max_iter: usize, iters: &mut usize) -> LpOutcome {
        let nc = self.ncols;
        let mut streak = 0usize;
        let mut local = 0usize;
        let mut verified = false;
        loop {
            if local > 0 && local % CHECK_INTERVAL == 0 {
                self.keep_accurate();
            }
            let bland = streak >= DEGENERATE_STREAK;
            let mut leave: Option<usize> = None;
            let mut worst = PRIMAL_TOL;
            for r in 0..self.m {
                let bv = self.basis[r];
                let inf = (self.lower[bv] - self.x[bv]).max(self.x[bv] - self.upper[bv]);
                if inf <= PRIMAL_TOL {
                    continue;
                }
                let take = match leave {
                    None => true,
                    Some(lr) => {
                        if bland {
                            bv < self.basis[lr]
                        } else {
                            inf > worst
                        }
                    }
                };
                if take {
                    leave = Some(r);
                    worst = inf;
                }
            }
            let Some(r) = leave else {
                if !verified && self.needs_refactor() && self.refactor() {
                    verified = true;
                    continue;
                }
                return LpOutcome::Optimal;
            };
            if local >= max_iter {
                return LpOutcome::IterationLimit;
            }

            let bv = self.basis[r];
            let below = self.x[bv] < self.lower[bv];
            let target = if below { self.lower[bv] } else { self.upper[bv] };
            let Some((q, ratio)) = self.dual_ratio(r, below, bland) else {
                if !verified && self.needs_refactor() && self.refactor() {
                    verified = true;
                    continue;
                }
                return LpOutcome::Infeasible;
            };
            local += 1;
            *iters += 1;

            let alpha_rq = self.t[r * nc + q];
            let dx = (self.x[bv] - target) / alpha_rq;
            self.x[q] += dx;
            for i in 0..self.m {
                let a = self.t[i * nc + q];
                if a != 0.0 {
                    self.x[self.basis[i]] -= a * dx;
                }
            }
            self.x[bv] = target;
            self.status[bv] = if below {
                VarStatus::AtLower
            } else {
                VarStatus::AtUpper
            };
            self.pivot(r, q);

            if ratio <= RATIO_TIE {
                streak += 1;
            } else {
                streak = 0;
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let piv = self.t[r * nc + q];
        let inv = 1.0 / piv;
        self.pivot_row.clear();
        {
            let row = &mut self.t[r * nc..(r + 1) * nc];
            for (j, v) in row.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v *= inv;
                    if v.abs() < DROP_TOL {
                        *v = 0.0;
                    } else {
                        self.pivot_row.push((j, *v));
                    }
                }
            }
            row[q] = 1.0;
        }
        self.beta[r] *= inv;
        let beta_r = self.beta[r];
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * nc + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * nc..(i + 1) * nc];
            for &(j, v) in &self.pivot_row {
                let nv = row[j] - f * v;
                row[j] = if nv.abs() < DROP_TOL { 0.0 } else { nv };
            }
            row[q] = 0.0;
            self.beta[i] -= f * beta_r;
        }
        let f = self.d[q];
        if f != 0.0 {
            for &(j, v) in &self.pivot_row {
                self.d[j] -= f * v;
            }
        }
        self.d[q] = 0.0;
        let old = self.basis[r];
        self.basis[r] = q;
        self.status[q] = VarStatus::Basic;
        debug_assert!(self.status[old] != VarStatus::Basic);
        self.pivots_since_refactor += 1;
    }

    /// Sets bounds of a structural column in model units. Takes effect at
    /// the next [`prepare_dual`](Self::prepare_dual).
    pub fn set_struct_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower / self.col_scale[j];
        self.upper[j] = upper / self.col_scale[j];
    }

    /// Places every nonbasic column on the bound its reduced cost prefers and
    /// recomputes basic values. Returns `false` if the basis is not dual
    /// feasible (a column wants an infinite bound).
    pub fn prepare_dual(&mut self) -> bool {
        for j in 0..self.ncols {
            if self.status[j] == VarStatus::Basic {
                continue;
            }
            if self.upper[j] <= self.lower[j] {
                self.status[j] = VarStatus::AtLower;
                self.x[j] = self.lower[j];
                continue;
            }
            let dj = self.d[j];
            let at_upper = if dj < -DUAL_TOL {
                true
            } else if dj > DUAL_TOL {
                false
            } else {
                self.status[j] == VarStatus::AtUpper && self.upper[j].is_finite()
            };
            if at_upper {
                if !self.upper[j].is_finite() {
                    return false;
                }
                self.status[j] = VarStatus::AtUpper;
                self.x[j] = self.upper[j];
            } else {
                self.status[j] = VarStatus::AtLower;
                self.x[j] = self.lower[j];
            }
        }
        self.recompute_basic_values();
        true
    }

    fn recompute_basic_values(&mut self) {
        let nc = self.ncols;
        let active: Vec<(usize, f64)> = (0..nc)
            .filter(|&j| self.status[j] != VarStatus::Basic && self.x[j] != 0.0)
            .map(|j| (j, self.x[j]))
            .collect();
        for r in 0..self.m {
            let row = &self.t[r * nc..(r + 1) * nc];
            let mut v = self.beta[r];
            for &(j, xj) in &active {
                v -= row[j] * xj;
            }
            self.x[self.basis[r]] = v;
        }
    }

    /// Largest absolute residual of the original (scaled) rows at the current point.
    pub fn residual(&self) -> f64 {
        let n = self.n_struct;
        let mut worst: f64 = 0.0;
        let mut art_of_row = vec![None; self.m];
        for (k, &(r, g)) in self.artificials.iter().enumerate() {
            art_of_row[r] = Some((n + self.m + k, g));
        }
        for r in 0..self.m {
            let mut act: f64 = self.rows[r].iter().map(|&(j, a)| a * self.x[j]).sum();
            act += self.slack_coef[r] * self.x[n + r];
            if let Some((col, g)) = art_of_row[r] {
                act += g * self.x[col];
            }
            worst = worst.max((act - self.b[r]).abs());
        }
        worst
    }

    pub fn needs_refactor(&self) -> bool {
        self.residual() > RESIDUAL_TOL
    }

    /// Rebuilds `B^-1 A` and `B^-1 b` from the original rows for the current
    /// basis by Gauss-Jordan elimination. Returns `false` (leaving the tableau
    /// untouched) if the basis matrix is numerically singular.
    pub fn refactor(&mut self) -> bool {
        let m = self.m;
        let n = self.n_struct;
        let nc = self.ncols;
        let mut a = vec![0.0; m * nc];
        let mut b = self.b.clone();
        for r in 0..m {
            for &(j, v) in &self.rows[r] {
                a[r * nc + j] = v;
            }
            a[r * nc + n + r] = self.slack_coef[r];
        }
        for (k, &(r, g)) in self.artificials.iter().enumerate() {
            a[r * nc + n + m + k] = g;
        }

        // Slack and artificial columns first: each has one nonzero, so they
        // pivot without fill-in.
        let mut basic_vars: Vec<usize> = self.basis.clone();
        basic_vars.sort_unstable_by_key(|&c| (c < n, c));
        let mut row_var = vec![usize::MAX; m];
        let mut nz: Vec<(usize, f64)> = Vec::new();
        for &col in &basic_vars {
            let mut best_row = None;
            let mut best = 1e-10;
            for r in 0..m {
                if row_var[r] != usize::MAX {
                    continue;
                }
                let v = a[r * nc + col].abs();
                if v > best {
                    best = v;
                    best_row = Some(r);
                }
            }
            let Some(p) = best_row else {
                return false;
            };
            row_var[p] = col;
            let inv = 1.0 / a[p * nc + col];
            nz.clear();
            for j in 0..nc {
                let v = a[p * nc + j];
                if v != 0.0 {
                    let s = v * inv;
                    a[p * nc + j] = s;
                    nz.push((j, s));
                }
            }
            a[p * nc + col] = 1.0;
            b[p] *= inv;
            let bp = b[p];
            for r in 0..m {
                if r == p {
                    continue;
                }
                let f = a[r * nc + col];
                if f == 0.0 {
                    continue;
                }
                for &(j, v) in &nz {
                    let nv = a[r * nc + j] - f * v;
                    a[r * nc + j] = if nv.abs() < DROP_TOL { 0.0 } else { nv };
                }
                a[r * nc + col] = 0.0;
                b[r] -= f * bp;
            }
        }
        self.t = a;
        self.beta = b;
        self.basis = row_var;
        self.compute_reduced_costs();
        self.recompute_basic_values();
        self.pivots_since_refactor = 0;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MilpModel, VarKind};

    fn cont(m: &mut MilpModel, lo: f64, hi: f64) -> crate::VarId {
        m.add_variable(VarKind::Continuous { lower: lo, upper: hi })
    }

    fn solve_lp(model: &MilpModel) -> (LpOutcome, Vec<f64>, f64) {
        let data = LpData::from_model(model).unwrap();
        let mut t = Tableau::new(&data, &data.lower, &data.upper);
        let mut it = 0;
        let out = t.solve_primal(10_000, &mut it);
        (out, t.structural_values().to_vec(), t.objective())
    }

    #[test]
    fn lower_bound_row() {
        let mut m = MilpModel::new();
        let x = cont(&mut m, 0.0, 10.0);
        m.add_constraint([(x, 1.0)], Sense::Ge, 3.0).unwrap();
        m.set_objective([(x, 1.0)]).unwrap();
        let (out, v, obj) = solve_lp(&m);
        assert_eq!(out, LpOutcome::Optimal);
        assert!((v[0] - 3.0).abs() < 1e-12);
        assert!((obj - 3.0).abs() < 1e-12);
    }

    #[test]
    fn classic_two_variable_lp() {
        // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut m = MilpModel::new();
        let x = cont(&mut m, 0.0, f64::INFINITY);
        let y = cont(&mut m, 0.0, f64::INFINITY);
        m.add_constraint([(x, 1.0)], Sense::Le, 4.0).unwrap();
        m.add_constraint([(y, 2.0)], Sense::Le, 12.0).unwrap();
        m.add_constraint([(x, 3.0), (y, 2.0)], Sense::Le, 18.0).unwrap();
        m.set_objective([(x, -3.0), (y, -5.0)]).unwrap();
        let (out, v, obj) = solve_lp(&m);
        assert_eq!(out, LpOutcome::Optimal);
        assert!((v[0] - 2.0).abs() < 1e-9 && (v[1] - 6.0).abs() < 1e-9);
        assert!((obj + 36.0).abs() < 1e-9);
    }

    #[test]
    fn equality_rows_need_phase_one() {
        // min x + y st x + y = 5, x - y = 1 -> (3, 2)
        let mut m = MilpModel::new();
        let x = cont(&mut m, 0.0, 100.0);
        let y = cont(&mut m, 0.0, 100.0);
        m.add_constraint([(x, 1.0), (y, 1.0)], Sense::Eq, 5.0).unwrap();
        m.add_constraint([(x, 1.0), (y, -1.0)], Sense::Eq, 1.0).unwrap();
        m.set_objective([(x, 1.0), (y, 1.0)]).unwrap();
        let (out, v, _) = solve_lp(&m);
        assert_eq!(out, LpOutcome::Optimal);
        assert!((v[0] - 3.0).abs() < 1e-9 && (v[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut m = MilpModel::new();
        let x = cont(&mut m, -5.0, 5.0);
        m.add_constraint([(x, 1.0)], Sense::Le, 0.0).unwrap();
        m.add_constraint([(x, 1.0)], Sense::Ge, 1.0).unwrap();
        assert_eq!(solve_lp(&m).0, LpOutcome::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut m = MilpModel::new();
        let x = cont(&mut m, 0.0, f64::INFINITY);
        m.set_objective([(x, -1.0)]).unwrap();
        assert_eq!(solve_lp(&m).0, LpOutcome::Unbounded);
    }

    #[test]
    fn upper_bounds_flip_without_rows() {
        let mut m = MilpModel::new();
        let x = cont(&mut m, 1.0, 4.0);
        let y = cont(&mut m, -2.0, 3.0);
        m.set_objective([(x, -1.0), (y, 2.0)]).unwrap();
        let (out, v, obj) = solve_lp(&m);
        assert_eq!(out, LpOutcome::Optimal);
        assert_eq!(v, vec![4.0, -2.0]);
        assert_eq!(obj, -8.0);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the textbook largest-coefficient rule.
        let mut m = MilpModel::new();
        let v: Vec<_> = (0..4).map(|_| cont(&mut m, 0.0, f64::INFINITY)).collect();
        m.add_constraint(
            [(v[0], 0.25), (v[1], -60.0), (v[2], -0.04), (v[3], 9.0)],
            Sense::Le,
            0.0,
        )
        .unwrap();
        m.add_constraint(
            [(v[0], 0.5), (v[1], -90.0), (v[2], -0.02), (v[3], 3.0)],
            Sense::Le,
            0.0,
        )
        .unwrap();
        m.add_constraint([(v[2], 1.0)], Sense::Le, 1.0).unwrap();
        m.set_objective([(v[0], -0.75), (v[1], 150.0), (v[2], -0.02), (v[3], 6.0)])
            .unwrap();
        let (out, _, obj) = solve_lp(&m);
        assert_eq!(out, LpOutcome::Optimal);
        assert!((obj + 0.05).abs() < 1e-9);
    }

    #[test]
    fn dual_reoptimizes_after_bound_change() {
        // min -x - y st x + y <= 1.5, x,y in [0,1]; then fix x to 0.
        let mut m = MilpModel::new();
        let x = cont(&mut m, 0.0, 1.0);
        let y = cont(&mut m, 0.0, 1.0);
        m.add_constraint([(x, 1.0), (y, 1.0)], Sense::Le, 1.5).unwrap();
        m.set_objective([(x, -1.0), (y, -2.0)]).unwrap();
        let data = LpData::from_model(&m).unwrap();
        let mut t = Tableau::new(&data, &data.lower, &data.upper);
        let mut it = 0;
        assert_eq!(t.solve_primal(100, &mut it), LpOutcome::Optimal);
        assert!((t.objective() + 2.5).abs() < 1e-12);
        t.set_struct_bounds(1, 0.0, 0.0);
        assert!(t.prepare_dual());
        assert_eq!(t.run_dual(100, &mut it, None), LpOutcome::Optimal);
        assert!((t.objective() + 1.0).abs() < 1e-12);
        t.set_struct_bounds(1, 1.0, 1.0);
        t.set_struct_bounds(0, 1.0, 1.0);
        assert!(t.prepare_dual());
        assert_eq!(t.run_dual(100, &mut it, None), LpOutcome::Infeasible);
    }

    #[test]
    fn refactor_reproduces_tableau() {
        let mut m = MilpModel::new();
        let x = cont(&mut m, 0.0, f64::INFINITY);
        let y = cont(&mut m, 0.0, f64::INFINITY);
        m.add_constraint([(x, 1.0), (y, 2.0)], Sense::Ge, 4.0).unwrap();
        m.add_constraint([(x, 3.0), (y, 1.0)], Sense::Ge, 6.0).unwrap();
        m.set_objective([(x, 1.0), (y, 1.0)]).unwrap();
        let data = LpData::from_model(&m).unwrap();
        let mut t = Tableau::new(&data, &data.lower, &data.upper);
        let mut it = 0;
        assert_eq!(t.solve_primal(100, &mut it), LpOutcome::Optimal);
        let before = t.structural_values().to_vec();
        assert!(t.refactor());
        let after = t.structural_values().to_vec();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(t.residual() < 1e-12);
    }
}
