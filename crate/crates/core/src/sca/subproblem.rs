//! Convex subproblem around an iterate, plus the maps between iterates and
//! solver variable vectors.

use num_complex::Complex64;

use super::surrogate::{qol_expr, relay_expr, tangent_expr};
use super::{ScaIterate, Variant};
use crate::cvxsub::{CVar, Constraint, ConvexProgram, LinExpr, LogTerm, ProgramBuilder, Var};
use crate::netmodel::{NetworkConfig, StackedChannels};
use crate::rates::{gain, Mode, Solution};

#[derive(Debug, Clone)]
struct Layout {
    w_c: CVar,
    w_p: Vec<CVar>,
    v: Option<CVar>,
    c: Vec<Var>,
    g: Vec<Var>,
    gamma_p: Vec<Var>,
    gamma_c: Vec<Var>,
    gamma_relay: Vec<Var>,
    zeta_p: Vec<Var>,
    zeta_c: Vec<Var>,
    objective: Var,
}

/// A built subproblem together with the handles needed to read it back.
#[derive(Debug, Clone)]
pub struct Subproblem {
    pub program: ConvexProgram,
    layout: Layout,
    variant: Variant,
}

/// `|h_si|·v_k` as two real forms whose squares sum to the SI power.
fn si_forms(h_si: Complex64, v: &CVar, k: usize) -> [LinExpr; 2] {
    let a = h_si.norm();
    [LinExpr::term(v.re(k), a), LinExpr::term(v.im(k), a)]
}

fn inner_forms(h: &[Complex64], w: &CVar) -> [LinExpr; 2] {
    let (re, im) = w.inner(h);
    [re, im]
}

pub(crate) fn build(it: &ScaIterate, st: &StackedChannels, cfg: &NetworkConfig, variant: Variant) -> Subproblem {
    let (k_n, l_n, m_n) = (cfg.n_ccu, cfg.n_ceu, cfg.n_users);
    let d = cfg.stacked_len();
    let sigma2 = cfg.noise_power;
    let theta = variant.theta;
    let hd = variant.mode == Mode::Hd;

    let mut b = ProgramBuilder::new();
    let w_c = b.complex_vec("w_c", d);
    let w_p: Vec<CVar> = (0..m_n).map(|m| b.complex_vec(&format!("w_p{m}"), d)).collect();
    let v = variant.relay.then(|| b.complex_vec("v", k_n));
    let c = b.scalars("C", m_n);
    let g = b.scalars("g", m_n);
    let gamma_p = b.scalars("gamma_p", m_n);
    let gamma_c = b.scalars("gamma_c", m_n);
    let gamma_relay = if hd && variant.relay {
        b.scalars("gamma_r", l_n)
    } else {
        Vec::new()
    };
    let zeta_p = b.scalars("zeta_p", m_n);
    let zeta_c = b.scalars("zeta_c", m_n);
    let objective = b.scalar(if hd { "beta" } else { "alpha" });

    let split_sum = c.iter().fold(LinExpr::zero(), |mut e, &ci| {
        e.add_term(ci, 1.0);
        e
    });

    for m in 0..m_n {
        let h = &st.user[m];
        let si = match &v {
            Some(v) if variant.si && m < k_n => si_forms(st.si[m], v, m).to_vec(),
            _ => Vec::new(),
        };
        let relay_of = |m: usize| (m >= k_n).then(|| m - k_n);

        b.add(
            format!("floor[{m}]"),
            Constraint::Log {
                lhs: LinExpr::var(c[m]),
                terms: vec![LogTerm {
                    coeff: theta,
                    var: gamma_p[m],
                }],
                rhs: LinExpr::var(objective),
            },
        );

        let e = qol_expr(h, &it.sol.w_p[m], it.denom_p[m], &w_p[m], zeta_p[m]);
        b.ge(format!("sinr_p[{m}]"), e, &LinExpr::var(gamma_p[m]));
        let mut squares: Vec<LinExpr> = (0..m_n)
            .filter(|&j| j != m)
            .flat_map(|j| inner_forms(h, &w_p[j]))
            .collect();
        squares.extend(si.iter().cloned());
        b.add(
            format!("interference_p[{m}]"),
            Constraint::Quad {
                squares,
                lhs: LinExpr::constant(sigma2),
                rhs: LinExpr::var(zeta_p[m]),
            },
        );

        let mut e = qol_expr(h, &it.sol.w_c, it.denom_c[m], &w_c, zeta_c[m]);
        if let (false, Some(v), Some(l)) = (hd, &v, relay_of(m)) {
            e.add_expr(&relay_expr(&st.relay[l], &it.sol.v, v, sigma2), 1.0);
        }
        b.ge(format!("sinr_c[{m}]"), e, &LinExpr::var(gamma_c[m]));
        let mut squares: Vec<LinExpr> = (0..m_n).flat_map(|j| inner_forms(h, &w_p[j])).collect();
        squares.extend(si);
        b.add(
            format!("interference_c[{m}]"),
            Constraint::Quad {
                squares,
                lhs: LinExpr::constant(sigma2),
                rhs: LinExpr::var(zeta_c[m]),
            },
        );

        let mut terms = vec![LogTerm {
            coeff: theta,
            var: gamma_c[m],
        }];
        if let (Some(l), false) = (relay_of(m), gamma_relay.is_empty()) {
            terms.push(LogTerm {
                coeff: 1.0 - theta,
                var: gamma_relay[l],
            });
        }
        b.add(
            format!("common_split[{m}]"),
            Constraint::Log {
                lhs: LinExpr::zero(),
                terms,
                rhs: split_sum.clone(),
            },
        );

        // Unused upper caps keep ζ bounded when an expansion precoder is zero.
        let mut cap = h.iter().map(|z| z.norm_sqr()).sum::<f64>() * cfg.n_bs as f64 * cfg.bs_power() + sigma2;
        if variant.si && m < k_n {
            cap += st.si[m].norm_sqr() * cfg.ccu_power();
        }
        for (name, z) in [("zeta_p", zeta_p[m]), ("zeta_c", zeta_c[m])] {
            b.le(format!("{name}[{m}]_cap"), LinExpr::var(z), &LinExpr::constant(2.0 * cap));
        }

        let g0 = it.gamma_p[m];
        b.le(format!("tangent[{m}]"), tangent_expr(g0, gamma_p[m]), &LinExpr::var(g[m]));
        b.ge(format!("C[{m}]>=0"), LinExpr::var(c[m]), &LinExpr::zero());
        b.ge(format!("gamma_p[{m}]>=0"), LinExpr::var(gamma_p[m]), &LinExpr::zero());
        b.ge(format!("gamma_c[{m}]>=0"), LinExpr::var(gamma_c[m]), &LinExpr::zero());
    }

    if let Some(v) = &v {
        for (l, &gr) in gamma_relay.iter().enumerate() {
            let e = relay_expr(&st.relay[l], &it.sol.v, v, sigma2);
            b.ge(format!("relay[{l}]"), e, &LinExpr::var(gr));
            b.ge(format!("gamma_r[{l}]>=0"), LinExpr::var(gr), &LinExpr::zero());
        }
    }

    let mut load = split_sum.clone();
    for &gm in &g {
        load.add_term(gm, theta);
    }
    let n_t = cfg.n_tx_antennas;
    for bs in 0..cfg.n_bs {
        b.le(format!("fronthaul[{bs}]"), load.clone(), &LinExpr::constant(cfg.fronthaul_bpshz));
        let range = bs * n_t..(bs + 1) * n_t;
        let squares = std::iter::once(&w_c)
            .chain(&w_p)
            .flat_map(|w| w.norm_sq_forms(range.clone()))
            .collect();
        b.add(
            format!("bs_power[{bs}]"),
            Constraint::Quad {
                squares,
                lhs: LinExpr::zero(),
                rhs: LinExpr::constant(cfg.bs_power()),
            },
        );
    }
    if let Some(v) = &v {
        let radius = cfg.ccu_power().sqrt();
        for k in 0..k_n {
            b.add(
                format!("ccu_power[{k}]"),
                Constraint::Soc {
                    args: vec![LinExpr::var(v.re(k)), LinExpr::var(v.im(k))],
                    bound: LinExpr::constant(radius),
                },
            );
        }
    }

    b.maximize(LinExpr::var(objective));
    Subproblem {
        program: b.build(),
        layout: Layout {
            w_c,
            w_p,
            v,
            c,
            g,
            gamma_p,
            gamma_c,
            gamma_relay,
            zeta_p,
            zeta_c,
            objective,
        },
        variant,
    }
}

impl Subproblem {
    /// Feasible starting point built from the expansion iterate.
    pub fn hint(&self, it: &ScaIterate) -> Vec<f64> {
        let l = &self.layout;
        let mut x = vec![0.0; self.program.n_vars()];
        l.w_c.assign(&mut x, &it.sol.w_c);
        for (w, val) in l.w_p.iter().zip(&it.sol.w_p) {
            w.assign(&mut x, val);
        }
        if let Some(v) = &l.v {
            v.assign(&mut x, &it.sol.v);
        }
        let pairs = [
            (&l.c, &it.sol.c_split),
            (&l.gamma_p, &it.gamma_p),
            (&l.gamma_c, &it.gamma_c),
            (&l.gamma_relay, &it.gamma_relay),
            (&l.zeta_p, &it.denom_p),
            (&l.zeta_c, &it.denom_c),
        ];
        for (vars, vals) in pairs {
            for (v, val) in vars.iter().zip(vals.iter()) {
                x[v.index()] = *val;
            }
        }
        for (v, gp) in l.g.iter().zip(&it.gamma_p) {
            x[v.index()] = (1.0 + gp).log2();
        }
        x[l.objective.index()] = it.objective;
        x
    }

    /// Reads a solver point back into an iterate. Denominators are filled
    /// by the caller from the extracted precoders.
    pub(crate) fn extract(&self, x: &[f64], cfg: &NetworkConfig) -> ScaIterate {
        let l = &self.layout;
        let read = |vars: &[Var]| -> Vec<f64> { vars.iter().map(|v| x[v.index()].max(0.0)).collect() };
        let sol = Solution {
            mode: self.variant.mode,
            w_c: l.w_c.value(x),
            w_p: l.w_p.iter().map(|w| w.value(x)).collect(),
            v: l
                .v
                .as_ref()
                .map_or_else(|| vec![Complex64::new(0.0, 0.0); cfg.n_ccu], |v| v.value(x)),
            c_split: read(&l.c),
            theta: self.variant.theta,
        };
        ScaIterate {
            sol,
            gamma_p: read(&l.gamma_p),
            gamma_c: read(&l.gamma_c),
            gamma_relay: read(&l.gamma_relay),
            denom_p: read(&l.zeta_p),
            denom_c: read(&l.zeta_c),
            g: l.g.iter().map(|v| x[v.index()]).collect(),
            objective: x[l.objective.index()],
            iteration: 0,
        }
    }
}

/// Interference-plus-noise seen by user `m`, for its private stream
/// (`exclude_own`) or the common stream.
pub(crate) fn interference(
    st: &StackedChannels,
    sol: &Solution,
    variant: Variant,
    cfg: &NetworkConfig,
    m: usize,
    exclude_own: bool,
) -> f64 {
    let h = &st.user[m];
    let mut total = cfg.noise_power;
    for (j, w) in sol.w_p.iter().enumerate() {
        if !(exclude_own && j == m) {
            total += gain(h, w);
        }
    }
    if variant.si && m < cfg.n_ccu {
        total += st.si[m].norm_sqr() * sol.v[m].norm_sqr();
    }
    total
}
