//! Successive convex approximation for the max-min rate problem: the HD
//! scheme over a grid of time fractions, the FD scheme, and the
//! non-cooperative baseline (FD pipeline without relaying).

pub mod surrogate;
mod subproblem;

use std::io::Write;

use log::{debug, warn};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cvxsub::{solve_with, SolverSettings, Status};
use crate::error::{Error, Result};
use crate::netmodel::{ChannelRealization, NetworkConfig, StackedChannels};
use crate::rates::{evaluate, gain, Mode, RateReport, Solution, FEASIBILITY_TOL};

pub use subproblem::Subproblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "crsma_hd")]
    Hd,
    #[serde(rename = "crsma_fd")]
    Fd,
    #[serde(rename = "rsma_baseline")]
    Baseline,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Fd, Scheme::Hd, Scheme::Baseline];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Hd => "crsma_hd",
            Scheme::Fd => "crsma_fd",
            Scheme::Baseline => "rsma_baseline",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    /// Accepts the short CLI names as well as the table names.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hd" | "crsma_hd" => Ok(Scheme::Hd),
            "fd" | "crsma_fd" => Ok(Scheme::Fd),
            "baseline" | "rsma_baseline" => Ok(Scheme::Baseline),
            other => Err(Error::InvalidConfig(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Structural switches shared by the three pipelines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Variant {
    pub mode: Mode,
    pub theta: f64,
    /// Relay weights `v` are optimization variables.
    pub relay: bool,
    /// Self-interference enters the CCU denominators.
    pub si: bool,
}

impl Variant {
    fn hd(cfg: &NetworkConfig, theta: f64) -> Self {
        Self {
            mode: Mode::Hd,
            theta,
            relay: cfg.relaying_enabled(),
            si: false,
        }
    }

    fn fd(cfg: &NetworkConfig) -> Self {
        let relay = cfg.relaying_enabled();
        Self {
            mode: Mode::Fd,
            theta: 1.0,
            relay,
            si: relay,
        }
    }

    fn baseline() -> Self {
        Self {
            mode: Mode::Fd,
            theta: 1.0,
            relay: false,
            si: false,
        }
    }
}

/// Current point of an SCA run: the precoders plus every slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaIterate {
    pub sol: Solution,
    /// Private-stream SINR slacks.
    pub gamma_p: Vec<f64>,
    /// Common-stream SINR slacks (FD CEUs: direct plus relayed).
    pub gamma_c: Vec<f64>,
    /// HD relay-phase SNR slacks, one per CEU.
    pub gamma_relay: Vec<f64>,
    /// Interference-plus-noise slacks for the private streams.
    pub denom_p: Vec<f64>,
    /// Interference-plus-noise slacks for the common stream.
    pub denom_c: Vec<f64>,
    /// Fronthaul tangent slacks.
    pub g: Vec<f64>,
    pub objective: f64,
    pub iteration: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaSettings {
    /// Stop once the objective improves by at most this much.
    pub eps: f64,
    pub max_iterations: usize,
    pub solver: SolverSettings,
}

impl Default for ScaSettings {
    fn default() -> Self {
        Self {
            eps: 1e-3,
            max_iterations: 30,
            solver: SolverSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub theta: f64,
    pub objective: f64,
    pub max_residual: f64,
    pub status: String,
}

/// One SCA run at a fixed time fraction.
#[derive(Debug, Clone)]
pub struct ScaRun {
    pub theta: f64,
    pub iterate: ScaIterate,
    pub report: RateReport,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct ScaOutcome {
    pub scheme: Scheme,
    pub solution: Solution,
    pub report: RateReport,
    /// Time fraction of the returned solution (1 for FD and baseline).
    pub theta: f64,
    pub runs: Vec<ScaRun>,
}

impl ScaOutcome {
    pub fn max_min(&self) -> f64 {
        self.report.max_min
    }

    pub fn trace(&self) -> impl Iterator<Item = &TraceRow> {
        self.runs.iter().flat_map(|r| &r.trace)
    }

    pub fn write_trace<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in self.trace() {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn unit(h: &[Complex64]) -> Vec<Complex64> {
    let n: f64 = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        h.iter().map(|z| z / n).collect()
    } else {
        vec![Complex64::new(0.0, 0.0); h.len()]
    }
}

fn private_rate_sum(st: &StackedChannels, sol: &Solution, cfg: &NetworkConfig, variant: Variant) -> f64 {
    (0..cfg.n_users)
        .map(|m| {
            let den = subproblem::interference(st, sol, variant, cfg, m, true);
            variant.theta * (1.0 + gain(&st.user[m], &sol.w_p[m]) / den).log2()
        })
        .sum()
}

/// Fills every slack by evaluating its defining inequality with equality.
fn slacks_at(sol: Solution, st: &StackedChannels, cfg: &NetworkConfig, variant: Variant) -> ScaIterate {
    let (k_n, m_n) = (cfg.n_ccu, cfg.n_users);
    let sigma2 = cfg.noise_power;
    let mut it = ScaIterate {
        gamma_p: Vec::with_capacity(m_n),
        gamma_c: Vec::with_capacity(m_n),
        gamma_relay: Vec::new(),
        denom_p: Vec::with_capacity(m_n),
        denom_c: Vec::with_capacity(m_n),
        g: Vec::with_capacity(m_n),
        objective: f64::INFINITY,
        iteration: 0,
        sol,
    };
    for m in 0..m_n {
        let h = &st.user[m];
        let dp = subproblem::interference(st, &it.sol, variant, cfg, m, true);
        let dc = subproblem::interference(st, &it.sol, variant, cfg, m, false);
        let gp = gain(h, &it.sol.w_p[m]) / dp;
        let mut gc = gain(h, &it.sol.w_c) / dc;
        if variant.mode == Mode::Fd && variant.relay && m >= k_n {
            gc += gain(&st.relay[m - k_n], &it.sol.v) / sigma2;
        }
        it.denom_p.push(dp);
        it.denom_c.push(dc);
        it.gamma_p.push(gp);
        it.gamma_c.push(gc);
        it.g.push((1.0 + gp).log2());
        let floor = it.sol.c_split[m] + variant.theta * (1.0 + gp).log2();
        it.objective = it.objective.min(floor);
    }
    if variant.mode == Mode::Hd && variant.relay {
        it.gamma_relay = st.relay.iter().map(|h| gain(h, &it.sol.v) / sigma2).collect();
    }
    if m_n == 0 {
        it.objective = 0.0;
    }
    it
}

fn initialize(chan: &ChannelRealization, cfg: &NetworkConfig, variant: Variant) -> Result<ScaIterate> {
    cfg.validate()?;
    chan.check_dims(cfg)?;
    let st = chan.stacked();
    let m_n = cfg.n_users;
    let d = cfg.stacked_len();
    let zero = Complex64::new(0.0, 0.0);

    let per_stream = (0.9 * cfg.bs_power() / (m_n + 1) as f64).sqrt();
    let dirs: Vec<Vec<Complex64>> = st.user.iter().map(|h| unit(h)).collect();
    let w_p: Vec<Vec<Complex64>> = dirs
        .iter()
        .map(|u| u.iter().map(|z| z * per_stream).collect())
        .collect();
    let mut sum = vec![zero; d];
    for u in &dirs {
        for (s, z) in sum.iter_mut().zip(u) {
            *s += z;
        }
    }
    let w_c: Vec<Complex64> = unit(&sum).iter().map(|z| z * per_stream).collect();
    let v = if variant.relay {
        let amp = (cfg.ccu_power() / 2.0).sqrt();
        (0..cfg.n_ccu)
            .map(|k| {
                let h = chan.h_d2d[k][0];
                if h.norm() > 0.0 {
                    h / h.norm() * amp
                } else {
                    Complex64::new(amp, 0.0)
                }
            })
            .collect()
    } else {
        vec![zero; cfg.n_ccu]
    };
    let mut sol = Solution {
        mode: variant.mode,
        w_c,
        w_p,
        v,
        c_split: vec![0.0; m_n],
        theta: variant.theta,
    };

    // Shrink the BS precoders until the private rates fit the fronthaul.
    let target = cfg.fronthaul_bpshz * (1.0 - 1e-3);
    if private_rate_sum(&st, &sol, cfg, variant) > target {
        let scaled = |s: f64| {
            let mut out = sol.clone();
            for w in std::iter::once(&mut out.w_c).chain(out.w_p.iter_mut()) {
                w.iter_mut().for_each(|z| *z *= s);
            }
            out
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if private_rate_sum(&st, &scaled(mid), cfg, variant) > target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if lo <= 0.0 {
            return Err(Error::InitializationInfeasible(
                "precoder scaling underflowed while fitting the fronthaul".into(),
            ));
        }
        sol = scaled(lo);
    }

    let it = slacks_at(sol, &st, cfg, variant);
    let report = evaluate(&it.sol, chan, cfg)?;
    if !report.is_feasible(FEASIBILITY_TOL) {
        return Err(Error::InitializationInfeasible(format!(
            "initial point violates the audit by {:.3e}",
            report.max_residual()
        )));
    }
    Ok(it)
}

pub fn initialize_hd(chan: &ChannelRealization, cfg: &NetworkConfig, theta: f64) -> Result<ScaIterate> {
    check_theta(cfg, theta)?;
    initialize(chan, cfg, Variant::hd(cfg, theta))
}

pub fn initialize_fd(chan: &ChannelRealization, cfg: &NetworkConfig) -> Result<ScaIterate> {
    initialize(chan, cfg, Variant::fd(cfg))
}

pub fn build_subproblem_hd(it: &ScaIterate, chan: &ChannelRealization, cfg: &NetworkConfig, theta: f64) -> Subproblem {
    subproblem::build(it, &chan.stacked(), cfg, Variant::hd(cfg, theta))
}

pub fn build_subproblem_fd(it: &ScaIterate, chan: &ChannelRealization, cfg: &NetworkConfig) -> Subproblem {
    subproblem::build(it, &chan.stacked(), cfg, Variant::fd(cfg))
}

fn check_theta(cfg: &NetworkConfig, theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("time fraction {theta} outside (0, 1]")))
    }
    .and_then(|()| cfg.validate())
}

/// Lowers private-stream powers so every private SINR drops to its slack
/// target from above. Each step can only raise the other users' SINRs, so
/// the targets stay met while the private rates shrink to what the
/// fronthaul constraint accounted for.
fn trim_private(sol: &mut Solution, st: &StackedChannels, cfg: &NetworkConfig, variant: Variant, targets: &[f64]) {
    let m_n = cfg.n_users;
    let a: Vec<Vec<f64>> = (0..m_n)
        .map(|m| sol.w_p.iter().map(|w| gain(&st.user[m], w)).collect())
        .collect();
    let floor: Vec<f64> = (0..m_n)
        .map(|m| {
            let mut e = cfg.noise_power;
            if variant.si && m < cfg.n_ccu {
                e += st.si[m].norm_sqr() * sol.v[m].norm_sqr();
            }
            e
        })
        .collect();
    let mut p = vec![1.0; m_n];
    for _ in 0..100_000 {
        let next: Vec<f64> = (0..m_n)
            .map(|m| {
                if targets[m] <= 0.0 {
                    return 0.0;
                }
                if a[m][m] <= 0.0 {
                    return p[m];
                }
                let interf: f64 = (0..m_n).filter(|&j| j != m).map(|j| p[j] * a[m][j]).sum();
                (targets[m] * (interf + floor[m]) / a[m][m]).min(p[m])
            })
            .collect();
        let change = next.iter().zip(&p).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        p = next;
        if change <= 1e-15 {
            break;
        }
    }
    for (w, pm) in sol.w_p.iter_mut().zip(&p) {
        let s = pm.sqrt();
        w.iter_mut().for_each(|z| *z *= s);
    }
}

/// Post-processes an extracted point: trims private powers if the
/// fronthaul audit fails, then re-evaluates the denominators.
fn finish(
    mut it: ScaIterate,
    chan: &ChannelRealization,
    st: &StackedChannels,
    cfg: &NetworkConfig,
    variant: Variant,
) -> Result<(ScaIterate, RateReport)> {
    let mut report = evaluate(&it.sol, chan, cfg)?;
    let over = report
        .residuals
        .iter()
        .any(|r| r.name.starts_with("fronthaul") && r.excess > 0.0);
    if over {
        trim_private(&mut it.sol, st, cfg, variant, &it.gamma_p);
        report = evaluate(&it.sol, chan, cfg)?;
    }
    for m in 0..cfg.n_users {
        it.denom_p[m] = subproblem::interference(st, &it.sol, variant, cfg, m, true);
        it.denom_c[m] = subproblem::interference(st, &it.sol, variant, cfg, m, false);
    }
    Ok((it, report))
}

fn run(chan: &ChannelRealization, cfg: &NetworkConfig, variant: Variant, settings: &ScaSettings) -> Result<ScaRun> {
    let st = chan.stacked();
    let theta = variant.theta;
    let mut it = initialize(chan, cfg, variant)?;
    let mut report = evaluate(&it.sol, chan, cfg)?;
    let row = |iteration: usize, objective: f64, report: &RateReport, status: String| TraceRow {
        iteration,
        theta,
        objective,
        max_residual: report.max_residual(),
        status,
    };
    let mut trace = vec![row(0, it.objective, &report, "init".into())];
    let mut converged = false;

    for n in 1..=settings.max_iterations {
        let sub = subproblem::build(&it, &st, cfg, variant);
        let hint = sub.hint(&it);
        let res = solve_with(&sub.program, &settings.solver, Some(&hint));
        debug!(
            "theta {theta}: iteration {n} {} after {} steps, objective {:.6}",
            res.status, res.iterations, res.value
        );
        let usable = matches!(res.status, Status::Optimal | Status::MaxIterations) && res.max_violation <= 1e-9;
        if !usable {
            warn!("theta {theta}: subproblem {n} ended with {}; keeping previous iterate", res.status);
            trace.push(row(n, it.objective, &report, res.status.to_string()));
            break;
        }

        // Audited objective must not fall below the certified one; back off
        // towards the previous point otherwise.
        let mut damping = 1.0;
        let accepted = loop {
            let x: Vec<f64> = if damping == 1.0 {
                res.x.clone()
            } else {
                hint.iter().zip(&res.x).map(|(h, x)| h + damping * (x - h)).collect()
            };
            let (cand, rep) = finish(sub.extract(&x, cfg), chan, &st, cfg, variant)?;
            if rep.is_feasible(FEASIBILITY_TOL) && rep.max_min >= it.objective - 1e-9 {
                break Some((cand, rep, damping));
            }
            damping *= 0.5;
            if damping < 1.0 / 64.0 {
                break None;
            }
        };
        let Some((mut cand, rep, damping)) = accepted else {
            warn!("theta {theta}: audited objective dropped at iteration {n}; stopping");
            trace.push(row(n, it.objective, &report, "stalled".into()));
            break;
        };
        if cand.objective < it.objective {
            // Solver tolerance only; nothing left to gain.
            trace.push(row(n, it.objective, &report, "converged".into()));
            converged = true;
            break;
        }
        let delta = cand.objective - it.objective;
        cand.iteration = n;
        it = cand;
        report = rep;
        let status = if damping < 1.0 {
            format!("{} damped {damping}", res.status)
        } else {
            res.status.to_string()
        };
        trace.push(row(n, it.objective, &report, status));
        if delta <= settings.eps {
            converged = true;
            break;
        }
    }
    Ok(ScaRun {
        theta,
        iterate: it,
        report,
        trace,
        converged,
    })
}

fn single(
    scheme: Scheme,
    chan: &ChannelRealization,
    cfg: &NetworkConfig,
    variant: Variant,
    settings: &ScaSettings,
) -> Result<ScaOutcome> {
    let r = run(chan, cfg, variant, settings)?;
    Ok(ScaOutcome {
        scheme,
        solution: r.iterate.sol.clone(),
        report: r.report.clone(),
        theta: r.theta,
        runs: vec![r],
    })
}

/// HD scheme: one SCA run per grid value of θ, best max-min returned.
pub fn sca_hd(chan: &ChannelRealization, cfg: &NetworkConfig, settings: &ScaSettings) -> Result<ScaOutcome> {
    cfg.validate()?;
    let results: Vec<(f64, Result<ScaRun>)> = cfg
        .theta_grid
        .par_iter()
        .map(|&theta| {
            let r = check_theta(cfg, theta).and_then(|()| run(chan, cfg, Variant::hd(cfg, theta), settings));
            (theta, r)
        })
        .collect();
    let mut runs = Vec::new();
    for (theta, r) in results {
        match r {
            Ok(r) => runs.push(r),
            Err(e) => warn!("theta {theta} skipped: {e}"),
        }
    }
    let best = runs
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |best, (i, r)| match best {
            Some((_, v)) if v >= r.report.max_min => best,
            _ => Some((i, r.report.max_min)),
        })
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Solver("no time fraction produced a solution".into()))?;
    Ok(ScaOutcome {
        scheme: Scheme::Hd,
        solution: runs[best].iterate.sol.clone(),
        report: runs[best].report.clone(),
        theta: runs[best].theta,
        runs,
    })
}

pub fn sca_fd(chan: &ChannelRealization, cfg: &NetworkConfig, settings: &ScaSettings) -> Result<ScaOutcome> {
    single(Scheme::Fd, chan, cfg, Variant::fd(cfg), settings)
}

/// Same pipeline as FD with the relay weights pinned to zero.
pub fn baseline_rsma(chan: &ChannelRealization, cfg: &NetworkConfig, settings: &ScaSettings) -> Result<ScaOutcome> {
    single(Scheme::Baseline, chan, cfg, Variant::baseline(), settings)
}

pub fn solve_scheme(
    scheme: Scheme,
    chan: &ChannelRealization,
    cfg: &NetworkConfig,
    settings: &ScaSettings,
) -> Result<ScaOutcome> {
    match scheme {
        Scheme::Hd => sca_hd(chan, cfg, settings),
        Scheme::Fd => sca_fd(chan, cfg, settings),
        Scheme::Baseline => baseline_rsma(chan, cfg, settings),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::generate_channels;
    use std::time::Instant;

    fn single_user() -> NetworkConfig {
        NetworkConfig {
            n_cells: 1,
            n_bs: 1,
            n_ccu: 1,
            n_ceu: 0,
            n_users: 1,
            n_tx_antennas: 1,
            disparity_w: vec![],
            ..NetworkConfig::default()
        }
    }

    #[test]
    fn default_hd_variable_count() {
        let cfg = NetworkConfig::default();
        let chan = generate_channels(&cfg, 1).unwrap();
        let it = initialize_hd(&chan, &cfg, 0.5).unwrap();
        let sub = build_subproblem_hd(&it, &chan, &cfg, 0.5);
        let (m, k, l) = (cfg.n_users, cfg.n_ccu, cfg.n_ceu);
        let d = cfg.stacked_len();
        // precoders, v, C, g, γ_p, γ_c, γ_relay, ζ_p, ζ_c, β
        let expected = 2 * (m + 1) * d + 2 * k + m + m + m + m + l + m + m + 1;
        assert_eq!(sub.program.n_vars(), expected);
        assert_eq!(expected, 111);
        assert!(sub.program.check().is_ok());
    }

    #[test]
    fn init_is_feasible_with_exact_slacks() {
        let cfg = NetworkConfig::default();
        for seed in 0..10 {
            let chan = generate_channels(&cfg, seed).unwrap();
            let st = chan.stacked();
            for it in [initialize_hd(&chan, &cfg, 0.3).unwrap(), initialize_fd(&chan, &cfg).unwrap()] {
                let report = evaluate(&it.sol, &chan, &cfg).unwrap();
                assert!(report.is_feasible(FEASIBILITY_TOL));
                assert!(it.sol.c_split.iter().all(|&c| c == 0.0));
                for m in 0..cfg.n_users {
                    let h = &st.user[m];
                    let mut den = cfg.noise_power;
                    for j in (0..cfg.n_users).filter(|&j| j != m) {
                        den += gain(h, &it.sol.w_p[j]);
                    }
                    if it.sol.mode == Mode::Fd && m < cfg.n_ccu {
                        den += st.si[m].norm_sqr() * it.sol.v[m].norm_sqr();
                    }
                    assert_eq!(it.denom_p[m], den);
                    assert!(it.denom_p[m] >= cfg.noise_power);
                }
                assert!((it.objective - report.max_min).abs() < 1e-12);
                // The hint reproduces a feasible point of the subproblem.
                let variant = if it.sol.mode == Mode::Hd {
                    Variant::hd(&cfg, 0.3)
                } else {
                    Variant::fd(&cfg)
                };
                let sub = subproblem::build(&it, &st, &cfg, variant);
                let x = sub.hint(&it);
                let worst = crate::cvxsub::residuals(&sub.program, &x).into_iter().fold(0.0, f64::max);
                assert!(worst <= 1e-9, "hint violation {worst}");
            }
        }
    }

    #[test]
    fn single_user_reaches_capacity() {
        let cfg = single_user();
        for seed in 0..5 {
            let chan = generate_channels(&cfg, seed).unwrap();
            let h = chan.h_bs_user[0][0][0].norm_sqr();
            let cap = (1.0 + cfg.bs_power() * h / cfg.noise_power).log2().min(cfg.fronthaul_bpshz);
            for out in [
                sca_hd(&chan, &cfg, &ScaSettings::default()).unwrap(),
                sca_fd(&chan, &cfg, &ScaSettings::default()).unwrap(),
            ] {
                assert!((out.max_min() - cap).abs() <= 0.01 * cap, "{} vs {cap}", out.max_min());
            }
        }
    }

    #[test]
    fn traces_never_decrease() {
        let cfg = NetworkConfig::default();
        let chan = generate_channels(&cfg, 7).unwrap();
        for scheme in Scheme::ALL {
            let out = solve_scheme(scheme, &chan, &cfg, &ScaSettings::default()).unwrap();
            for r in &out.runs {
                for pair in r.trace.windows(2) {
                    assert!(pair[1].objective >= pair[0].objective - 1e-9, "{scheme:?}: {:?}", r.trace);
                }
            }
            assert!(out.report.max_residual() <= 1e-5);
        }
    }

    #[test]
    fn fd_without_relay_budget_matches_baseline() {
        let cfg = NetworkConfig {
            ccu_power_dbm: f64::NEG_INFINITY,
            si_gain_db: 25.0,
            ..NetworkConfig::default()
        };
        let chan = generate_channels(&cfg, 11).unwrap();
        let fd = sca_fd(&chan, &cfg, &ScaSettings::default()).unwrap();
        let base = baseline_rsma(&chan, &cfg, &ScaSettings::default()).unwrap();
        assert!((fd.max_min() - base.max_min()).abs() < 1e-6);
    }

    #[test]
    fn useless_relays_favour_full_direct_time() {
        let cfg = NetworkConfig {
            lambda_d_db: f64::NEG_INFINITY,
            ..NetworkConfig::default()
        };
        let chan = generate_channels(&cfg, 2).unwrap();
        let out = sca_hd(&chan, &cfg, &ScaSettings::default()).unwrap();
        assert_eq!(out.theta, 1.0);
    }

    #[test]
    fn one_subproblem_is_fast() {
        let cfg = NetworkConfig::default();
        let chan = generate_channels(&cfg, 3).unwrap();
        let start = Instant::now();
        let it = initialize_fd(&chan, &cfg).unwrap();
        let sub = build_subproblem_fd(&it, &chan, &cfg);
        let res = solve_with(&sub.program, &SolverSettings::default(), Some(&sub.hint(&it)));
        assert_eq!(res.status, Status::Optimal);
        assert!(start.elapsed().as_secs_f64() < 5.0);
    }

    #[test]
    fn trace_csv_has_header_and_rows() {
        let cfg = single_user();
        let chan = generate_channels(&cfg, 0).unwrap();
        let out = sca_fd(&chan, &cfg, &ScaSettings::default()).unwrap();
        let mut buf = Vec::new();
        out.write_trace(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("iteration,theta,objective,max_residual,status"));
        assert_eq!(lines.count(), out.runs[0].trace.len());
    }
}
