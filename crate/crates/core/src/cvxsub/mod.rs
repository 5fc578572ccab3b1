//! Convex program representation for one SCA step.
//!
//! Everything is real: a complex vector variable of length `n` occupies
//! `2n` scalar slots (real parts, then imaginary parts). Quadratic forms
//! |g^H x|² are expanded into two squared real linear forms.
//!
//! Four constraint classes are supported natively:
//!
//! * affine:        `a·x + b ≥ 0` or `≤ 0`
//! * second-order:  `‖(a_1·x + b_1, …)‖ ≤ c·x + d`
//! * quadratic:     `Σ (a_j·x + b_j)² + lhs ≤ rhs`
//! * logarithmic:   `lhs + Σ c_i log2(1 + x_i) ≥ rhs`, `c_i ≥ 0`
//!
//! The objective is a linear functional to maximize.

mod solver;

use std::fmt;

use num_complex::Complex64;

pub use solver::{solve, solve_with, SolverSettings};

/// Handle to a scalar real variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(pub(crate) usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Handle to a complex vector variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CVar {
    start: usize,
    len: usize,
}

impl CVar {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn re(&self, i: usize) -> Var {
        assert!(i < self.len);
        Var(self.start + i)
    }

    pub fn im(&self, i: usize) -> Var {
        assert!(i < self.len);
        Var(self.start + self.len + i)
    }

    /// Real and imaginary parts of `g^H x` as linear expressions.
    pub fn inner(&self, g: &[Complex64]) -> (LinExpr, LinExpr) {
        assert_eq!(g.len(), self.len, "inner product length");
        let mut re = LinExpr::zero();
        let mut im = LinExpr::zero();
        // conj(a + ib)(u + iv) = (au + bv) + i(av - bu)
        for (i, gi) in g.iter().enumerate() {
            if gi.re != 0.0 {
                re.add_term(self.re(i), gi.re);
                im.add_term(self.im(i), gi.re);
            }
            if gi.im != 0.0 {
                re.add_term(self.im(i), gi.im);
                im.add_term(self.re(i), -gi.im);
            }
        }
        (re, im)
    }

    /// Squared real forms whose sum is `‖x[range]‖²`.
    pub fn norm_sq_forms(&self, range: std::ops::Range<usize>) -> Vec<LinExpr> {
        range
            .flat_map(|i| [LinExpr::var(self.re(i)), LinExpr::var(self.im(i))])
            .collect()
    }

    pub fn value(&self, x: &[f64]) -> Vec<Complex64> {
        (0..self.len)
            .map(|i| Complex64::new(x[self.re(i).0], x[self.im(i).0]))
            .collect()
    }

    /// Writes a complex value into an assignment vector.
    pub fn assign(&self, x: &mut [f64], value: &[Complex64]) {
        assert_eq!(value.len(), self.len);
        for (i, z) in value.iter().enumerate() {
            x[self.re(i).0] = z.re;
            x[self.im(i).0] = z.im;
        }
    }
}

/// Sparse affine expression `Σ coeff·x[idx] + constant`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinExpr {
    pub(crate) terms: Vec<(usize, f64)>,
    pub(crate) constant: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(v: Var) -> Self {
        Self {
            terms: vec![(v.0, 1.0)],
            constant: 0.0,
        }
    }

    pub fn term(v: Var, coeff: f64) -> Self {
        Self {
            terms: vec![(v.0, coeff)],
            constant: 0.0,
        }
    }

    pub fn add_term(&mut self, v: Var, coeff: f64) -> &mut Self {
        self.terms.push((v.0, coeff));
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn add_expr(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        self.terms
            .extend(other.terms.iter().map(|(i, c)| (*i, c * scale)));
        self.constant += other.constant * scale;
        self
    }

    pub fn plus(mut self, other: &LinExpr) -> Self {
        self.add_expr(other, 1.0);
        self
    }

    pub fn minus(mut self, other: &LinExpr) -> Self {
        self.add_expr(other, -1.0);
        self
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.terms.iter_mut().for_each(|(_, c)| *c *= s);
        self.constant *= s;
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(i, c)| c * x[*i]).sum::<f64>() + self.constant
    }

    /// Sorts terms and merges duplicates.
    pub(crate) fn compact(mut self) -> Self {
        self.terms.sort_by_key(|t| t.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len());
        for (i, c) in self.terms {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += c,
                _ => out.push((i, c)),
            }
        }
        out.retain(|t| t.1 != 0.0);
        Self {
            terms: out,
            constant: self.constant,
        }
    }

    fn is_finite(&self) -> bool {
        self.constant.is_finite() && self.terms.iter().all(|t| t.1.is_finite())
    }

    fn max_index(&self) -> Option<usize> {
        self.terms.iter().map(|t| t.0).max()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `expr ≥ 0`
    Ge,
    /// `expr ≤ 0`
    Le,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogTerm {
    pub coeff: f64,
    pub var: Var,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    Affine {
        expr: LinExpr,
        sense: Sense,
    },
    Soc {
        args: Vec<LinExpr>,
        bound: LinExpr,
    },
    Quad {
        squares: Vec<LinExpr>,
        lhs: LinExpr,
        rhs: LinExpr,
    },
    Log {
        lhs: LinExpr,
        terms: Vec<LogTerm>,
        rhs: LinExpr,
    },
}

impl Constraint {
    /// Signed violation: `≤ 0` means satisfied.
    pub fn violation(&self, x: &[f64]) -> f64 {
        match self {
            Constraint::Affine { expr, sense } => match sense {
                Sense::Ge => -expr.eval(x),
                Sense::Le => expr.eval(x),
            },
            Constraint::Soc { args, bound } => {
                let norm = args.iter().map(|a| a.eval(x).powi(2)).sum::<f64>().sqrt();
                norm - bound.eval(x)
            }
            Constraint::Quad { squares, lhs, rhs } => {
                squares.iter().map(|a| a.eval(x).powi(2)).sum::<f64>() + lhs.eval(x) - rhs.eval(x)
            }
            Constraint::Log { lhs, terms, rhs } => {
                let mut logs = 0.0;
                for t in terms {
                    let arg = 1.0 + x[t.var.0];
                    if arg <= 0.0 {
                        if t.coeff > 0.0 {
                            return f64::INFINITY;
                        }
                        continue;
                    }
                    logs += t.coeff * arg.log2();
                }
                rhs.eval(x) - lhs.eval(x) - logs
            }
        }
    }

    fn exprs(&self) -> Vec<&LinExpr> {
        match self {
            Constraint::Affine { expr, .. } => vec![expr],
            Constraint::Soc { args, bound } => args.iter().chain(std::iter::once(bound)).collect(),
            Constraint::Quad { squares, lhs, rhs } => {
                squares.iter().chain([lhs, rhs]).collect()
            }
            Constraint::Log { lhs, rhs, .. } => vec![lhs, rhs],
        }
    }

    fn class(&self) -> &'static str {
        match self {
            Constraint::Affine { .. } => "aff",
            Constraint::Soc { .. } => "soc",
            Constraint::Quad { .. } => "quad",
            Constraint::Log { .. } => "log",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct NamedConstraint {
    pub(crate) name: String,
    pub(crate) constraint: Constraint,
}

/// Immutable convex program. Build with [`ProgramBuilder`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexProgram {
    pub(crate) n_vars: usize,
    pub(crate) var_names: Vec<String>,
    pub(crate) objective: LinExpr,
    pub(crate) constraints: Vec<NamedConstraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalformedProgram(pub String);

impl fmt::Display for MalformedProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "malformed program: {}", self.0)
    }
}

impl std::error::Error for MalformedProgram {}

impl ConvexProgram {
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.eval(x)
    }

    /// Count of constraints per class: `(affine, soc, quad, log)`.
    pub fn class_counts(&self) -> (usize, usize, usize, usize) {
        let mut out = (0, 0, 0, 0);
        for c in &self.constraints {
            match c.constraint {
                Constraint::Affine { .. } => out.0 += 1,
                Constraint::Soc { .. } => out.1 += 1,
                Constraint::Quad { .. } => out.2 += 1,
                Constraint::Log { .. } => out.3 += 1,
            }
        }
        out
    }

    pub fn constraint_names(&self) -> impl Iterator<Item = &str> {
        self.constraints.iter().map(|c| c.name.as_str())
    }

    pub fn constraints(&self) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter().map(|c| &c.constraint)
    }

    /// Checks variable references, coefficient finiteness and log-term signs.
    pub fn check(&self) -> Result<(), MalformedProgram> {
        let in_range = |e: &LinExpr| e.max_index().is_none_or(|i| i < self.n_vars);
        if !in_range(&self.objective) || !self.objective.is_finite() {
            return Err(MalformedProgram("objective".into()));
        }
        for nc in &self.constraints {
            let bad = |why: &str| Err(MalformedProgram(format!("{}: {why}", nc.name)));
            for e in nc.constraint.exprs() {
                if !in_range(e) {
                    return bad("unregistered variable");
                }
                if !e.is_finite() {
                    return bad("non-finite coefficient");
                }
            }
            if let Constraint::Log { terms, .. } = &nc.constraint {
                for t in terms {
                    if t.var.0 >= self.n_vars {
                        return bad("unregistered variable");
                    }
                    if !(t.coeff >= 0.0 && t.coeff.is_finite()) {
                        return bad("log coefficient must be finite and non-negative");
                    }
                }
            }
        }
        Ok(())
    }
}

/// Signed violation of each constraint at `point` (`≤ 0` = satisfied).
pub fn residuals(p: &ConvexProgram, point: &[f64]) -> Vec<f64> {
    assert_eq!(point.len(), p.n_vars, "assignment length");
    p.constraints
        .iter()
        .map(|c| c.constraint.violation(point))
        .collect()
}

#[derive(Debug, Default)]
pub struct ProgramBuilder {
    var_names: Vec<String>,
    objective: LinExpr,
    constraints: Vec<NamedConstraint>,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn scalar(&mut self, name: impl Into<String>) -> Var {
        self.var_names.push(name.into());
        Var(self.var_names.len() - 1)
    }

    pub fn scalars(&mut self, name: &str, n: usize) -> Vec<Var> {
        (0..n).map(|i| self.scalar(format!("{name}[{i}]"))).collect()
    }

    pub fn complex_vec(&mut self, name: &str, len: usize) -> CVar {
        let start = self.var_names.len();
        for part in ["re", "im"] {
            for i in 0..len {
                self.var_names.push(format!("{name}.{part}[{i}]"));
            }
        }
        CVar { start, len }
    }

    pub fn maximize(&mut self, objective: LinExpr) {
        self.objective = objective;
    }

    pub fn add(&mut self, name: impl Into<String>, constraint: Constraint) {
        let constraint = match constraint {
            Constraint::Affine { expr, sense } => Constraint::Affine {
                expr: expr.compact(),
                sense,
            },
            Constraint::Soc { args, bound } => Constraint::Soc {
                args: args.into_iter().map(LinExpr::compact).collect(),
                bound: bound.compact(),
            },
            Constraint::Quad { squares, lhs, rhs } => Constraint::Quad {
                squares: squares.into_iter().map(LinExpr::compact).collect(),
                lhs: lhs.compact(),
                rhs: rhs.compact(),
            },
            Constraint::Log { lhs, terms, rhs } => Constraint::Log {
                lhs: lhs.compact(),
                terms,
                rhs: rhs.compact(),
            },
        };
        self.constraints.push(NamedConstraint {
            name: name.into(),
            constraint,
        });
    }

    /// `lhs ≥ rhs`
    pub fn ge(&mut self, name: impl Into<String>, lhs: LinExpr, rhs: &LinExpr) {
        self.add(
            name,
            Constraint::Affine {
                expr: lhs.minus(rhs),
                sense: Sense::Ge,
            },
        );
    }

    /// `lhs ≤ rhs`
    pub fn le(&mut self, name: impl Into<String>, lhs: LinExpr, rhs: &LinExpr) {
        self.add(
            name,
            Constraint::Affine {
                expr: lhs.minus(rhs),
                sense: Sense::Le,
            },
        );
    }

    pub fn build(self) -> ConvexProgram {
        ConvexProgram {
            n_vars: self.var_names.len(),
            var_names: self.var_names,
            objective: self.objective.compact(),
            constraints: self.constraints,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    MaxIterations,
    NumericalFailure,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::MaxIterations => "max-iterations",
            Status::NumericalFailure => "numerical-failure",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    pub status: Status,
    /// Objective value at `x` (maximization sense).
    pub value: f64,
    pub x: Vec<f64>,
    /// Newton steps over both phases.
    pub iterations: usize,
    pub max_violation: f64,
    /// Upper bound on the suboptimality of `x` (barrier duality gap).
    pub gap: f64,
}

impl SubproblemSolution {
    pub fn get(&self, v: Var) -> f64 {
        self.x[v.0]
    }

    pub fn get_complex(&self, v: &CVar) -> Vec<Complex64> {
        v.value(&self.x)
    }
}

fn fmt_expr(e: &LinExpr, names: &[String]) -> String {
    let mut s = String::new();
    for (i, c) in &e.terms {
        if s.is_empty() {
            s.push_str(&format!("{c:.12e}*{}", names[*i]));
        } else {
            s.push_str(&format!(" {} {:.12e}*{}", if *c < 0.0 { '-' } else { '+' }, c.abs(), names[*i]));
        }
    }
    if e.constant != 0.0 || s.is_empty() {
        if s.is_empty() {
            s.push_str(&format!("{:.12e}", e.constant));
        } else {
            s.push_str(&format!(
                " {} {:.12e}",
                if e.constant < 0.0 { '-' } else { '+' },
                e.constant.abs()
            ));
        }
    }
    s
}

/// Human-readable dump, one constraint per line, for diffing against
/// external solvers.
impl fmt::Display for ConvexProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = &self.var_names;
        writeln!(f, "variables {}", self.n_vars)?;
        for n in names {
            writeln!(f, "  {n}")?;
        }
        writeln!(f, "maximize {}", fmt_expr(&self.objective, names))?;
        writeln!(f, "subject to {}", self.constraints.len())?;
        for nc in &self.constraints {
            let body = match &nc.constraint {
                Constraint::Affine { expr, sense } => format!(
                    "{} {} 0",
                    fmt_expr(expr, names),
                    if *sense == Sense::Ge { ">=" } else { "<=" }
                ),
                Constraint::Soc { args, bound } => format!(
                    "norm({}) <= {}",
                    args.iter().map(|a| fmt_expr(a, names)).collect::<Vec<_>>().join(", "),
                    fmt_expr(bound, names)
                ),
                Constraint::Quad { squares, lhs, rhs } => format!(
                    "{} + {} <= {}",
                    squares
                        .iter()
                        .map(|a| format!("({})^2", fmt_expr(a, names)))
                        .collect::<Vec<_>>()
                        .join(" + "),
                    fmt_expr(lhs, names),
                    fmt_expr(rhs, names)
                ),
                Constraint::Log { lhs, terms, rhs } => format!(
                    "{}{} >= {}",
                    fmt_expr(lhs, names),
                    terms
                        .iter()
                        .map(|t| format!(" + {:.12e}*log2(1 + {})", t.coeff, names[t.var.0]))
                        .collect::<String>(),
                    fmt_expr(rhs, names)
                ),
            };
            writeln!(f, "  [{}] {}: {}", nc.constraint.class(), nc.name, body)?;
        }
        Ok(())
    }
}
