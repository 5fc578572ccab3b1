//! Log-barrier interior-point solver.
//!
//! Each constraint is turned into a slack function `s(x) > 0` and the
//! barrier `-log s(x)` (second-order cones use `-log(u² - ‖r‖²)`).
//! Phase I minimizes a common relaxation `τ` added to every slack until a
//! strictly feasible point appears; phase II follows the central path of
//! `t·(-c·x) + Σ -log s_i(x)` with damped Newton steps until the barrier
//! duality gap `ν/t` drops below the tolerance.

use nalgebra::{DMatrix, DVector};

use super::{Constraint, ConvexProgram, LinExpr, Sense, Status, SubproblemSolution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Target duality gap.
    pub tol: f64,
    /// Cap on Newton steps over both phases.
    pub max_iterations: usize,
    /// Barrier parameter growth per outer iteration.
    pub mu: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iterations: 200,
            mu: 20.0,
        }
    }
}

pub fn solve(p: &ConvexProgram, tol: f64) -> SubproblemSolution {
    solve_with(
        p,
        &SolverSettings {
            tol,
            ..Default::default()
        },
        None,
    )
}

type Sparse = Vec<(usize, f64)>;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// s = a·x + b
    Linear,
    /// s = a·x + b − Σ (r·x + c)²
    Quadratic,
    /// s = a·x + b + Σ c log2(1 + x_i)
    Logarithmic,
    /// s = (a·x + b)² − Σ (r·x + c)², with a·x + b > 0
    Cone,
}

#[derive(Debug, Clone)]
struct Kernel {
    kind: Kind,
    a: Sparse,
    b: f64,
    rows: Vec<(Sparse, f64)>,
    /// `(index, coeff / ln 2)`
    logs: Vec<(usize, f64)>,
}

fn sparse_dot(a: &Sparse, x: &[f64]) -> f64 {
    a.iter().map(|(i, c)| c * x[*i]).sum()
}

impl Kernel {
    fn from_constraint(c: &Constraint) -> Self {
        let lin = |e: LinExpr| (e.terms, e.constant);
        match c {
            Constraint::Affine { expr, sense } => {
                let e = match sense {
                    Sense::Ge => expr.clone(),
                    Sense::Le => expr.clone().scaled(-1.0),
                };
                let (a, b) = lin(e);
                Kernel {
                    kind: Kind::Linear,
                    a,
                    b,
                    rows: Vec::new(),
                    logs: Vec::new(),
                }
            }
            Constraint::Quad { squares, lhs, rhs } => {
                let (a, b) = lin(rhs.clone().minus(lhs).compact());
                Kernel {
                    kind: Kind::Quadratic,
                    a,
                    b,
                    rows: squares.iter().map(|r| (r.terms.clone(), r.constant)).collect(),
                    logs: Vec::new(),
                }
            }
            Constraint::Log { lhs, terms, rhs } => {
                let (a, b) = lin(lhs.clone().minus(rhs).compact());
                Kernel {
                    kind: Kind::Logarithmic,
                    a,
                    b,
                    rows: Vec::new(),
                    logs: terms
                        .iter()
                        .filter(|t| t.coeff > 0.0)
                        .map(|t| (t.var.0, t.coeff / std::f64::consts::LN_2))
                        .collect(),
                }
            }
            Constraint::Soc { args, bound } => {
                let (a, b) = lin(bound.clone());
                Kernel {
                    kind: Kind::Cone,
                    a,
                    b,
                    rows: args.iter().map(|r| (r.terms.clone(), r.constant)).collect(),
                    logs: Vec::new(),
                }
            }
        }
    }

    /// Adds the relaxation variable `τ` to the affine part.
    fn relaxed(mut self, tau: usize) -> Self {
        self.a.push((tau, 1.0));
        self
    }

    fn degree(&self) -> f64 {
        if self.kind == Kind::Cone {
            2.0
        } else {
            1.0
        }
    }

    fn affine(&self, x: &[f64]) -> f64 {
        sparse_dot(&self.a, x) + self.b
    }

    fn row_sq(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|(r, c)| (sparse_dot(r, x) + c).powi(2))
            .sum()
    }

    /// Slack value, or `None` outside the barrier's domain.
    fn slack(&self, x: &[f64]) -> Option<f64> {
        let s = match self.kind {
            Kind::Linear => self.affine(x),
            Kind::Quadratic => self.affine(x) - self.row_sq(x),
            Kind::Logarithmic => {
                let mut s = self.affine(x);
                for (i, c) in &self.logs {
                    let arg = 1.0 + x[*i];
                    if arg <= 0.0 {
                        return None;
                    }
                    s += c * arg.ln();
                }
                s
            }
            Kind::Cone => {
                let u = self.affine(x);
                if u <= 0.0 {
                    return None;
                }
                u * u - self.row_sq(x)
            }
        };
        (s > 0.0 && s.is_finite()).then_some(s)
    }

    /// Smallest relaxation making this slack positive at `x`.
    fn required_relaxation(&self, x: &[f64]) -> f64 {
        match self.kind {
            Kind::Cone => self.row_sq(x).sqrt() - self.affine(x),
            Kind::Logarithmic => {
                if self.logs.iter().any(|(i, _)| x[*i] <= -1.0) {
                    f64::INFINITY
                } else {
                    let mut s = self.affine(x);
                    for (i, c) in &self.logs {
                        s += c * (1.0 + x[*i]).ln();
                    }
                    -s
                }
            }
            Kind::Linear => -self.affine(x),
            Kind::Quadratic => self.row_sq(x) - self.affine(x),
        }
    }
}

/// Dense scratch accumulator for one sparse gradient.
struct Scratch {
    dense: Vec<f64>,
    marked: Vec<bool>,
    touched: Vec<usize>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            dense: vec![0.0; n],
            marked: vec![false; n],
            touched: Vec::new(),
        }
    }

    fn add(&mut self, i: usize, v: f64) {
        if !self.marked[i] {
            self.marked[i] = true;
            self.touched.push(i);
        }
        self.dense[i] += v;
    }

    fn clear(&mut self) {
        for &i in &self.touched {
            self.dense[i] = 0.0;
            self.marked[i] = false;
        }
        self.touched.clear();
    }
}

fn add_outer(h: &mut [f64], n: usize, a: &Sparse, scale: f64) {
    for &(i, ai) in a {
        for &(j, aj) in a {
            h[i + j * n] += scale * ai * aj;
        }
    }
}

struct Barrier {
    n: usize,
    kernels: Vec<Kernel>,
    /// Linear cost to minimize.
    cost: Vec<f64>,
    nu: f64,
}

impl Barrier {
    fn value(&self, x: &[f64]) -> Option<f64> {
        let mut v = 0.0;
        for k in &self.kernels {
            v -= k.slack(x)?.ln();
        }
        Some(v)
    }

    fn cost(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// Gradient and Hessian of `t·cost + barrier` at an interior point.
    fn derivatives(&self, x: &[f64], t: f64, scratch: &mut Scratch) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.n;
        let mut g = DVector::from_iterator(n, self.cost.iter().map(|c| t * c));
        let mut h = DMatrix::<f64>::zeros(n, n);
        let hs = h.as_mut_slice();
        for k in &self.kernels {
            let s = k.slack(x).expect("interior point");
            scratch.clear();
            match k.kind {
                Kind::Linear => {
                    for &(i, c) in &k.a {
                        scratch.add(i, c);
                    }
                }
                Kind::Quadratic => {
                    for &(i, c) in &k.a {
                        scratch.add(i, c);
                    }
                    for (r, c0) in &k.rows {
                        let rv = sparse_dot(r, x) + c0;
                        for &(i, c) in r {
                            scratch.add(i, -2.0 * rv * c);
                        }
                        add_outer(hs, n, r, 2.0 / s);
                    }
                }
                Kind::Logarithmic => {
                    for &(i, c) in &k.a {
                        scratch.add(i, c);
                    }
                    for &(i, c) in &k.logs {
                        let arg = 1.0 + x[i];
                        scratch.add(i, c / arg);
                        hs[i + i * n] += c / (arg * arg) / s;
                    }
                }
                Kind::Cone => {
                    let u = k.affine(x);
                    for &(i, c) in &k.a {
                        scratch.add(i, 2.0 * u * c);
                    }
                    for (r, c0) in &k.rows {
                        let rv = sparse_dot(r, x) + c0;
                        for &(i, c) in r {
                            scratch.add(i, -2.0 * rv * c);
                        }
                        add_outer(hs, n, r, 2.0 / s);
                    }
                    add_outer(hs, n, &k.a, -2.0 / s);
                }
            }
            let inv_s = 1.0 / s;
            let inv_s2 = inv_s * inv_s;
            for &i in &scratch.touched {
                let gi = scratch.dense[i];
                g[i] -= gi * inv_s;
                for &j in &scratch.touched {
                    hs[i + j * n] += gi * scratch.dense[j] * inv_s2;
                }
            }
        }
        (g, h)
    }
}

fn newton_direction(g: &DVector<f64>, h: DMatrix<f64>) -> Option<DVector<f64>> {
    let n = g.len();
    let scale = (0..n).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut reg = 0.0;
    for _ in 0..12 {
        let mut hr = h.clone();
        if reg > 0.0 {
            for i in 0..n {
                hr[(i, i)] += reg;
            }
        }
        if let Some(ch) = hr.cholesky() {
            let dx = ch.solve(&(-g));
            if dx.iter().all(|v| v.is_finite()) {
                return Some(dx);
            }
        }
        reg = if reg == 0.0 { 1e-14 * scale } else { reg * 100.0 };
    }
    None
}

enum Centering {
    Done,
    Budget,
    Failed,
    /// Phase I only: relaxation went negative.
    Feasible,
}

struct Run<'a> {
    barrier: &'a Barrier,
    iterations: usize,
    max_iterations: usize,
    scratch: Scratch,
}

impl Run<'_> {
    /// Damped Newton on `t·cost + barrier`. With `stop_below`, returns
    /// early once `x[idx] < 0`.
    fn center(&mut self, x: &mut Vec<f64>, t: f64, stop_below: Option<usize>) -> Centering {
        let b = self.barrier;
        let merit = |x: &[f64]| b.value(x).map(|v| t * b.cost(x) + v);
        let mut f = match merit(x) {
            Some(f) => f,
            None => return Centering::Failed,
        };
        loop {
            if self.iterations >= self.max_iterations {
                return Centering::Budget;
            }
            let (g, h) = b.derivatives(x, t, &mut self.scratch);
            let dx = match newton_direction(&g, h) {
                Some(dx) => dx,
                None => return Centering::Failed,
            };
            let decrement = -g.dot(&dx);
            if decrement / 2.0 <= 1e-8 {
                return Centering::Done;
            }
            self.iterations += 1;
            let mut step: f64 = 1.0;
            // Phase I is unbounded below in τ; stop just past zero.
            if let Some(idx) = stop_below {
                if dx[idx] < 0.0 {
                    let floor = -1e-3 * (1.0 + x[idx].abs());
                    step = step.min((x[idx] - floor) / -dx[idx]);
                }
            }
            let mut trial = x.clone();
            let accepted = loop {
                for i in 0..x.len() {
                    trial[i] = x[i] + step * dx[i];
                }
                if let Some(ft) = merit(&trial) {
                    if ft <= f - 0.25 * step * decrement {
                        break Some(ft);
                    }
                }
                step *= 0.5;
                if step < 1e-14 {
                    break None;
                }
            };
            match accepted {
                Some(ft) => {
                    debug_assert!(ft <= f, "barrier merit increased");
                    f = ft;
                    std::mem::swap(x, &mut trial);
                }
                // No progress at machine precision: as centered as it gets.
                None => return Centering::Done,
            }
            if let Some(idx) = stop_below {
                if x[idx] < 0.0 {
                    return Centering::Feasible;
                }
            }
        }
    }
}

fn max_violation(p: &ConvexProgram, x: &[f64]) -> f64 {
    super::residuals(p, x).into_iter().fold(0.0, f64::max)
}

/// Solves `p` starting from an optional initial-point hint.
pub fn solve_with(p: &ConvexProgram, settings: &SolverSettings, hint: Option<&[f64]>) -> SubproblemSolution {
    let n = p.n_vars;
    let kernels: Vec<Kernel> = p
        .constraints
        .iter()
        .map(|c| Kernel::from_constraint(&c.constraint))
        .collect();
    let mut x: Vec<f64> = match hint {
        Some(h) if h.len() == n && h.iter().all(|v| v.is_finite()) => h.to_vec(),
        _ => vec![0.0; n],
    };
    // Log arguments must stay above -1 for phase I to start.
    for k in &kernels {
        for (i, _) in &k.logs {
            if x[*i] <= -1.0 {
                x[*i] = 0.0;
            }
        }
    }

    let fail = |status: Status, x: Vec<f64>, iterations: usize| SubproblemSolution {
        status,
        value: p.objective.eval(&x),
        max_violation: max_violation(p, &x),
        x,
        iterations,
        gap: f64::INFINITY,
    };

    let mut iterations = 0;
    let required = kernels
        .iter()
        .map(|k| k.required_relaxation(&x))
        .fold(f64::NEG_INFINITY, f64::max);
    if !required.is_finite() && required > 0.0 {
        return fail(Status::NumericalFailure, x, 0);
    }

    // Phase I.
    if required >= 0.0 {
        let tau = n;
        let mut relaxed: Vec<Kernel> = kernels.iter().cloned().map(|k| k.relaxed(tau)).collect();
        // A box around the start keeps the relaxed barrier bounded below.
        let data = kernels.iter().fold(0.0f64, |m, k| {
            let rows = k.rows.iter().fold(0.0f64, |m, (_, c)| m.max(c.abs()));
            m.max(k.b.abs()).max(rows)
        });
        let radius = 1e3 * (1.0 + data + x.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        for (i, xi) in x.iter().enumerate() {
            for (sign, offset) in [(1.0, radius - xi), (-1.0, radius + xi)] {
                relaxed.push(Kernel {
                    kind: Kind::Linear,
                    a: vec![(i, sign)],
                    b: offset,
                    rows: Vec::new(),
                    logs: Vec::new(),
                });
            }
        }
        let mut cost = vec![0.0; n + 1];
        cost[tau] = 1.0;
        let nu = relaxed.iter().map(Kernel::degree).sum();
        let barrier = Barrier {
            n: n + 1,
            kernels: relaxed,
            cost,
            nu,
        };
        let mut run = Run {
            barrier: &barrier,
            iterations: 0,
            max_iterations: settings.max_iterations,
            scratch: Scratch::new(n + 1),
        };
        let mut xt = x.clone();
        xt.push(required + 1.0f64.max(0.1 * required.abs()));
        let mut t = barrier.nu / xt[tau];
        let outcome = loop {
            match run.center(&mut xt, t, Some(tau)) {
                Centering::Feasible => break Ok(()),
                Centering::Budget => break Err(Status::MaxIterations),
                Centering::Failed => break Err(Status::NumericalFailure),
                Centering::Done => {}
            }
            if xt[tau] < 0.0 {
                break Ok(());
            }
            // Lower bound on the optimal relaxation.
            if xt[tau] - barrier.nu / t > 0.0 || barrier.nu / t < 1e-12 {
                break Err(Status::Infeasible);
            }
            t *= settings.mu;
        };
        iterations += run.iterations;
        xt.pop();
        x = xt;
        if let Err(status) = outcome {
            return fail(status, x, iterations);
        }
    }

    // Phase II.
    let nu: f64 = kernels.iter().map(Kernel::degree).sum();
    let cost: Vec<f64> = {
        let mut c = vec![0.0; n];
        for (i, v) in &p.objective.terms {
            c[*i] -= v;
        }
        c
    };
    let barrier = Barrier {
        n,
        kernels,
        cost,
        nu,
    };
    let mut run = Run {
        barrier: &barrier,
        iterations: 0,
        max_iterations: settings.max_iterations.saturating_sub(iterations),
        scratch: Scratch::new(n),
    };
    let mut t = (nu / (1.0 + p.objective.eval(&x).abs())).max(1.0);
    let status = if nu == 0.0 {
        Status::Optimal
    } else {
        loop {
            match run.center(&mut x, t, None) {
                Centering::Done | Centering::Feasible => {}
                Centering::Budget => break Status::MaxIterations,
                Centering::Failed => break Status::NumericalFailure,
            }
            if nu / t <= settings.tol {
                break Status::Optimal;
            }
            t *= settings.mu;
        }
    };
    iterations += run.iterations;
    SubproblemSolution {
        status,
        value: p.objective.eval(&x),
        max_violation: max_violation(p, &x),
        gap: if status == Status::Optimal { nu / t } else { f64::INFINITY },
        x,
        iterations,
    }
}
