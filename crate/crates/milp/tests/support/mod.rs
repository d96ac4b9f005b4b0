//! Test-only reference: exhaustive binary enumeration with each assignment
//! completed by a small textbook two-phase simplex (Bland's rule throughout).
//! Shares no code with the crate's solver.

#![allow(dead_code)]

use milp::{MilpModel, Sense, VarKind};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// min c.y st rows, lo <= y <= hi (all finite). `None` if infeasible.
pub fn reference_lp(
    c: &[f64],
    rows: &[(Vec<f64>, Sense, f64)],
    lo: &[f64],
    hi: &[f64],
) -> Option<f64> {
    let n = c.len();
    // z = y - lo, z >= 0; upper bounds become rows.
    let mut cons: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
    for (a, s, b) in rows {
        let shift: f64 = a.iter().zip(lo).map(|(ai, l)| ai * l).sum();
        cons.push((a.clone(), *s, b - shift));
    }
    for j in 0..n {
        let mut a = vec![0.0; n];
        a[j] = 1.0;
        cons.push((a, Sense::Le, hi[j] - lo[j]));
    }
    let m = cons.len();
    let offset: f64 = c.iter().zip(lo).map(|(ci, l)| ci * l).sum();
    if m == 0 {
        return Some(offset);
    }
    // columns: z (n) | slack per row (m) | artificial per row (m) | rhs
    let width = n + 2 * m + 1;
    let mut tab = vec![vec![0.0; width]; m];
    let mut basis = vec![0usize; m];
    for (i, (a, s, b)) in cons.iter().enumerate() {
        let row = &mut tab[i];
        row[..n].copy_from_slice(a);
        row[n + i] = match s {
            Sense::Le => 1.0,
            Sense::Ge => -1.0,
            Sense::Eq => 0.0,
        };
        row[width - 1] = *b;
        if *b < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        row[n + m + i] = 1.0;
        basis[i] = n + m + i;
    }
    let eps = 1e-9;
    let run = |tab: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, cost: &[f64], allowed: usize| -> bool {
        loop {
            // reduced costs
            let mut enter = None;
            for j in 0..allowed {
                if basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j];
                for (i, &bv) in basis.iter().enumerate() {
                    d -= cost[bv] * tab[i][j];
                }
                if d < -eps {
                    enter = Some(j);
                    break;
                }
            }
            let Some(q) = enter else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..tab.len() {
                let a = tab[i][q];
                if a > eps {
                    let r = tab[i][width - 1] / a;
                    match leave {
                        None => leave = Some((i, r)),
                        Some((li, lr)) => {
                            if r < lr - 1e-12 || (r <= lr + 1e-12 && basis[i] < basis[li]) {
                                leave = Some((i, r));
                            }
                        }
                    }
                }
            }
            let Some((p, _)) = leave else { return false };
            let pv = tab[p][q];
            for v in tab[p].iter_mut() {
                *v /= pv;
            }
            let prow = tab[p].clone();
            for i in 0..tab.len() {
                if i != p {
                    let f = tab[i][q];
                    if f != 0.0 {
                        for (v, pvj) in tab[i].iter_mut().zip(&prow) {
                            *v -= f * pvj;
                        }
                    }
                }
            }
            basis[p] = q;
        }
    };
    let mut cost1 = vec![0.0; width - 1];
    for j in n + m..n + 2 * m {
        cost1[j] = 1.0;
    }
    run(&mut tab, &mut basis, &cost1, width - 1);
    let infeas: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &bv)| bv >= n + m)
        .map(|(i, _)| tab[i][width - 1])
        .sum();
    if infeas > 1e-7 {
        return None;
    }
    // Drive remaining (zero) artificials out where possible.
    for i in 0..m {
        if basis[i] >= n + m {
            if let Some(q) = (0..n + m).find(|&j| tab[i][j].abs() > 1e-9 && !basis.contains(&j)) {
                let pv = tab[i][q];
                for v in tab[i].iter_mut() {
                    *v /= pv;
                }
                let prow = tab[i].clone();
                for k in 0..m {
                    if k != i {
                        let f = tab[k][q];
                        if f != 0.0 {
                            for (v, pvj) in tab[k].iter_mut().zip(&prow) {
                                *v -= f * pvj;
                            }
                        }
                    }
                }
                basis[i] = q;
            }
        }
    }
    let mut cost2 = vec![0.0; width - 1];
    cost2[..n].copy_from_slice(c);
    if !run(&mut tab, &mut basis, &cost2, n + m) {
        return Some(f64::NEG_INFINITY);
    }
    let mut z = vec![0.0; n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            z[bv] = tab[i][width - 1];
        }
    }
    Some(offset + c.iter().zip(&z).map(|(ci, zi)| ci * zi).sum::<f64>())
}

/// Exhaustive optimum of a model with few binaries. `None` if infeasible.
pub fn enumerate_optimum(model: &MilpModel) -> Option<f64> {
    let vars = model.variables();
    let bins: Vec<usize> = (0..vars.len()).filter(|&i| vars[i].kind.is_binary()).collect();
    let conts: Vec<usize> = (0..vars.len()).filter(|&i| !vars[i].kind.is_binary()).collect();
    let mut pos = vec![usize::MAX; vars.len()];
    for (k, &j) in conts.iter().enumerate() {
        pos[j] = k;
    }
    let mut obj = vec![0.0; vars.len()];
    for &(v, c) in model.objective() {
        obj[v.0] += c;
    }
    let lo: Vec<f64> = conts.iter().map(|&j| vars[j].kind.bounds().0).collect();
    let hi: Vec<f64> = conts.iter().map(|&j| vars[j].kind.bounds().1).collect();
    let c: Vec<f64> = conts.iter().map(|&j| obj[j]).collect();

    let mut best: Option<f64> = None;
    for mask in 0u64..(1u64 << bins.len()) {
        let mut fixed = vec![0.0; vars.len()];
        for (k, &j) in bins.iter().enumerate() {
            fixed[j] = ((mask >> k) & 1) as f64;
        }
        let mut rows = Vec::new();
        for con in model.constraints() {
            let mut a = vec![0.0; conts.len()];
            let mut rhs = con.rhs;
            for &(v, coef) in &con.coefficients {
                if vars[v.0].kind.is_binary() {
                    rhs -= coef * fixed[v.0];
                } else {
                    a[pos[v.0]] += coef;
                }
            }
            rows.push((a, con.sense, rhs));
        }
        let bin_obj: f64 = bins.iter().map(|&j| obj[j] * fixed[j]).sum();
        if let Some(v) = reference_lp(&c, &rows, &lo, &hi) {
            let total = v + bin_obj;
            best = Some(best.map_or(total, |b: f64| b.min(total)));
        }
    }
    best
}

/// Independent re-check of a candidate point; returns the worst absolute violation.
pub fn recheck(model: &MilpModel, values: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, v) in model.variables().iter().enumerate() {
        let x = values[i];
        match v.kind {
            VarKind::Binary => worst = worst.max(x.min(1.0 - x).abs().min((x - x.round()).abs())),
            VarKind::Continuous { lower, upper } => worst = worst.max(lower - x).max(x - upper),
        }
    }
    for c in model.constraints() {
        let act: f64 = c.coefficients.iter().map(|&(v, a)| a * values[v.0]).sum();
        let gap = match c.sense {
            Sense::Le => act - c.rhs,
            Sense::Ge => c.rhs - act,
            Sense::Eq => (act - c.rhs).abs(),
        };
        worst = worst.max(gap);
    }
    worst
}

/// Random model: 1..=12 binaries, 0..=6 continuous in finite boxes, up to 20 rows.
/// Most instances are built around a hidden feasible point.
pub fn random_model(seed: u64) -> MilpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_bin = rng.gen_range(1..=12);
    let n_cont = rng.gen_range(0..=6);
    let n_rows = rng.gen_range(1..=20);
    let mut m = MilpModel::new();
    let mut point = Vec::new();
    let mut ids = Vec::new();
    let mut kinds: Vec<bool> = (0..n_bin + n_cont).map(|k| k < n_bin).collect();
    kinds.shuffle(&mut rng);
    for is_binary in kinds {
        if is_binary {
            ids.push(m.add_variable(VarKind::Binary));
            point.push(rng.gen_range(0..=1) as f64);
        } else {
            let lower = rng.gen_range(-5..=2) as f64;
            let upper = lower + rng.gen_range(1..=8) as f64;
            ids.push(m.add_variable(VarKind::Continuous { lower, upper }));
            point.push(rng.gen_range(lower..=upper));
        }
    }
    let hidden_feasible = rng.gen_bool(0.85);
    for _ in 0..n_rows {
        let mut coefs = Vec::new();
        let mut act = 0.0;
        for (k, &v) in ids.iter().enumerate() {
            if rng.gen_bool(0.45) {
                let a = rng.gen_range(-6..=6) as f64;
                if a != 0.0 {
                    coefs.push((v, a));
                    act += a * point[k];
                }
            }
        }
        let sense = match rng.gen_range(0..10) {
            0 => Sense::Eq,
            1..=5 => Sense::Le,
            _ => Sense::Ge,
        };
        let rhs = if hidden_feasible {
            let slack = rng.gen_range(0..=4) as f64;
            match sense {
                Sense::Le => (act + slack).ceil(),
                Sense::Ge => (act - slack).floor(),
                Sense::Eq => act,
            }
        } else {
            rng.gen_range(-10..=10) as f64
        };
        m.add_constraint(coefs, sense, rhs).unwrap();
    }
    let obj: Vec<_> = ids
        .iter()
        .map(|&v| (v, rng.gen_range(-10..=10) as f64))
        .collect();
    m.set_objective(obj).unwrap();
    m
}
