use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Index of a variable inside a [`MilpModel`], assigned densely in creation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarKind {
    /// Continuous variable with `lower <= x <= upper`. The lower bound must be
    /// finite; the upper bound may be `f64::INFINITY`.
    Continuous { lower: f64, upper: f64 },
    /// 0/1 variable.
    Binary,
}

impl VarKind {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            VarKind::Continuous { lower, upper } => (lower, upper),
            VarKind::Binary => (0.0, 1.0),
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, VarKind::Binary)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub kind: VarKind,
    pub name: Option<String>,
}

/// A linear row `sum(coefficients) sense rhs`. Coefficients are kept sorted by
/// variable with duplicates merged.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coefficients: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub name: Option<String>,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .map(|&(v, a)| a * values[v.0])
            .sum()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("constraint references unknown variable {0}")]
    UnknownVariable(VarId),
    #[error("non-finite coefficient or right-hand side in {0}")]
    NonFinite(String),
    #[error("variable {var} has invalid bounds [{lower}, {upper}]")]
    InvalidBounds { var: VarId, lower: f64, upper: f64 },
}

/// Minimization model over continuous and binary variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<(VarId, f64)>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, kind: VarKind) -> VarId {
        let id = VarId(self.variables.len());
        self.variables.push(Variable { kind, name: None });
        id
    }

    pub fn add_named_variable(&mut self, kind: VarKind, name: impl Into<String>) -> VarId {
        let id = VarId(self.variables.len());
        self.variables.push(Variable {
            kind,
            name: Some(name.into()),
        });
        id
    }

    /// Appends a row and returns its index. An empty coefficient list is
    /// accepted; if it is not trivially satisfied the model is infeasible.
    pub fn add_constraint<I>(&mut self, coefficients: I, sense: Sense, rhs: f64) -> Result<usize, ModelError>
    where
        I: IntoIterator<Item = (VarId, f64)>,
    {
        self.push_constraint(coefficients, sense, rhs, None)
    }

    pub fn add_named_constraint<I>(
        &mut self,
        coefficients: I,
        sense: Sense,
        rhs: f64,
        name: impl Into<String>,
    ) -> Result<usize, ModelError>
    where
        I: IntoIterator<Item = (VarId, f64)>,
    {
        self.push_constraint(coefficients, sense, rhs, Some(name.into()))
    }

    fn push_constraint<I>(
        &mut self,
        coefficients: I,
        sense: Sense,
        rhs: f64,
        name: Option<String>,
    ) -> Result<usize, ModelError>
    where
        I: IntoIterator<Item = (VarId, f64)>,
    {
        let index = self.constraints.len();
        let coefficients = self.merge_terms(coefficients, || format!("constraint {index}"))?;
        if !rhs.is_finite() {
            return Err(ModelError::NonFinite(format!("constraint {index}")));
        }
        self.constraints.push(Constraint {
            coefficients,
            sense,
            rhs,
            name,
        });
        Ok(index)
    }

    /// Replaces the (minimization) objective.
    pub fn set_objective<I>(&mut self, coefficients: I) -> Result<(), ModelError>
    where
        I: IntoIterator<Item = (VarId, f64)>,
    {
        self.objective = self.merge_terms(coefficients, || "objective".to_string())?;
        Ok(())
    }

    fn merge_terms<I, F>(&self, terms: I, what: F) -> Result<Vec<(VarId, f64)>, ModelError>
    where
        I: IntoIterator<Item = (VarId, f64)>,
        F: Fn() -> String,
    {
        let mut merged: BTreeMap<VarId, f64> = BTreeMap::new();
        for (var, coef) in terms {
            if var.0 >= self.variables.len() {
                return Err(ModelError::UnknownVariable(var));
            }
            if !coef.is_finite() {
                return Err(ModelError::NonFinite(what()));
            }
            *merged.entry(var).or_insert(0.0) += coef;
        }
        Ok(merged.into_iter().filter(|&(_, c)| c != 0.0).collect())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind.is_binary()).count()
    }

    pub fn var_name(&self, var: VarId) -> String {
        match &self.variables[var.0].name {
            Some(name) => name.clone(),
            None => var.to_string(),
        }
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    pub(crate) fn validate(&self) -> Result<(), ModelError> {
        for (i, v) in self.variables.iter().enumerate() {
            let (lower, upper) = v.kind.bounds();
            if !lower.is_finite() || upper.is_nan() || lower > upper {
                return Err(ModelError::InvalidBounds {
                    var: VarId(i),
                    lower,
                    upper,
                });
            }
        }
        Ok(())
    }

    /// Largest scaled violation of any row or bound by `values`.
    ///
    /// Row violations are divided by `max(1, |rhs|, max_j |a_j x_j|)` so that rows
    /// with large energy coefficients are judged on the same footing as unit rows.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, v) in self.variables.iter().enumerate() {
            let (lower, upper) = v.kind.bounds();
            let x = values[i];
            worst = worst.max(lower - x).max(x - upper);
        }
        for c in &self.constraints {
            let mut activity = 0.0;
            let mut scale = 1.0_f64.max(c.rhs.abs());
            for &(v, a) in &c.coefficients {
                let term = a * values[v.0];
                activity += term;
                scale = scale.max(term.abs());
            }
            let gap = match c.sense {
                Sense::Le => activity - c.rhs,
                Sense::Ge => c.rhs - activity,
                Sense::Eq => (activity - c.rhs).abs(),
            };
            worst = worst.max(gap / scale);
        }
        worst
    }
}
