//! Debug dump in the common CPLEX-style LP text format, for cross-checking
//! models against external solvers.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::model::{MilpModel, Sense, VarId, VarKind};

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' })
        .collect()
}

fn var_label(model: &MilpModel, v: VarId) -> String {
    match &model.variables()[v.0].name {
        Some(n) => sanitize(n),
        None => format!("x{}", v.0),
    }
}

fn terms(model: &MilpModel, coefs: &[(VarId, f64)]) -> String {
    if coefs.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, &(v, c)) in coefs.iter().enumerate() {
        let sign = if c < 0.0 { "-" } else if k == 0 { "" } else { "+" };
        if k > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{sign}{} {}", c.abs(), var_label(model, v));
    }
    out
}

pub fn to_lp_string(model: &MilpModel) -> String {
    let mut s = String::from("\\ milp debug dump\nMinimize\n");
    let _ = writeln!(s, " obj: {}", terms(model, model.objective()));
    s.push_str("Subject To\n");
    for (i, c) in model.constraints().iter().enumerate() {
        let name = c.name.as_deref().map(sanitize).unwrap_or_else(|| format!("c{i}"));
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(s, " {name}: {} {op} {}", terms(model, &c.coefficients), c.rhs);
    }
    s.push_str("Bounds\n");
    let mut binaries = Vec::new();
    for (i, v) in model.variables().iter().enumerate() {
        let label = var_label(model, VarId(i));
        match v.kind {
            VarKind::Binary => binaries.push(label),
            VarKind::Continuous { lower, upper } => {
                if upper.is_infinite() {
                    let _ = writeln!(s, " {label} >= {lower}");
                } else {
                    let _ = writeln!(s, " {lower} <= {label} <= {upper}");
                }
            }
        }
    }
    if !binaries.is_empty() {
        s.push_str("Binaries\n");
        for chunk in binaries.chunks(8) {
            let _ = writeln!(s, " {}", chunk.join(" "));
        }
    }
    s.push_str("End\n");
    s
}

pub fn write_lp<W: Write>(model: &MilpModel, mut out: W) -> io::Result<()> {
    out.write_all(to_lp_string(model).as_bytes())
}
