//! Achievable-rate calculus for HD and FD cooperative rate splitting, and
//! the audit of a full solution against the original (untransformed)
//! max-min problem constraints.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{ChannelRealization, NetworkConfig};

/// Relative tolerance used when deciding feasibility of an audited solution.
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Hd,
    Fd,
}

/// Decision variables of one operating point.
///
/// Precoders are stacked over all BSs: entry `b * N_t + a` is antenna `a`
/// of BS `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub mode: Mode,
    pub w_c: Vec<Complex64>,
    pub w_p: Vec<Vec<Complex64>>,
    pub v: Vec<Complex64>,
    pub c_split: Vec<f64>,
    /// Fraction of time given to direct transmission. Always 1 in FD.
    pub theta: f64,
}

impl Solution {
    /// All-zero point of the right shape.
    pub fn zeros(cfg: &NetworkConfig, mode: Mode) -> Self {
        let d = cfg.stacked_len();
        let zero = Complex64::new(0.0, 0.0);
        Self {
            mode,
            w_c: vec![zero; d],
            w_p: vec![vec![zero; d]; cfg.n_users],
            v: vec![zero; cfg.n_ccu],
            c_split: vec![0.0; cfg.n_users],
            theta: 1.0,
        }
    }

    pub fn check_dims(&self, cfg: &NetworkConfig) -> Result<()> {
        let d = cfg.stacked_len();
        let ok = self.w_c.len() == d
            && self.w_p.len() == cfg.n_users
            && self.w_p.iter().all(|w| w.len() == d)
            && self.v.len() == cfg.n_ccu
            && self.c_split.len() == cfg.n_users
            && self.theta > 0.0
            && self.theta <= 1.0
            && (self.mode == Mode::Hd || self.theta == 1.0);
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch("solution does not match config".into()))
        }
    }

    /// Transmit power of BS `bs` over all streams.
    pub fn bs_power(&self, bs: usize, n_tx: usize) -> f64 {
        let slice = bs * n_tx..(bs + 1) * n_tx;
        std::iter::once(&self.w_c)
            .chain(self.w_p.iter())
            .map(|w| w[slice.clone()].iter().map(Complex64::norm_sqr).sum::<f64>())
            .sum()
    }
}

/// |h^H w|².
pub fn gain(h: &[Complex64], w: &[Complex64]) -> f64 {
    h.iter()
        .zip(w)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        .norm_sqr()
}

fn private_interference(h: &[Complex64], sol: &Solution, exclude: Option<usize>) -> f64 {
    sol.w_p
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != exclude)
        .map(|(_, w)| gain(h, w))
        .sum()
}

fn si_power(h_si: Complex64, v_k: Complex64) -> f64 {
    (h_si.conj() * v_k).norm_sqr()
}

/// SINR of the common stream over the BS link, all private streams as noise.
pub fn common_sinr(h: &[Complex64], sol: &Solution, extra_noise: f64, sigma2: f64) -> f64 {
    gain(h, &sol.w_c) / (private_interference(h, sol, None) + extra_noise + sigma2)
}

/// SINR of user `m`'s private stream after the common stream was removed.
pub fn private_sinr(h: &[Complex64], sol: &Solution, m: usize, extra_noise: f64, sigma2: f64) -> f64 {
    gain(h, &sol.w_p[m]) / (private_interference(h, sol, Some(m)) + extra_noise + sigma2)
}

/// SNR of the relayed common stream at a CEU, |h_{l,d}^H v|²/σ².
pub fn relay_snr(h_ld: &[Complex64], v: &[Complex64], sigma2: f64) -> f64 {
    gain(h_ld, v) / sigma2
}

pub fn rate_common_ccu_hd(h_k: &[Complex64], sol: &Solution, sigma2: f64) -> f64 {
    sol.theta * (1.0 + common_sinr(h_k, sol, 0.0, sigma2)).log2()
}

pub fn rate_private_hd(h_m: &[Complex64], sol: &Solution, m: usize, sigma2: f64) -> f64 {
    sol.theta * (1.0 + private_sinr(h_m, sol, m, 0.0, sigma2)).log2()
}

/// Direct phase plus relayed phase, the two decoded copies combined over time.
pub fn rate_common_ceu_hd(h_l: &[Complex64], h_ld: &[Complex64], sol: &Solution, sigma2: f64) -> f64 {
    let direct = sol.theta * (1.0 + common_sinr(h_l, sol, 0.0, sigma2)).log2();
    let relayed = if sol.theta < 1.0 {
        (1.0 - sol.theta) * (1.0 + relay_snr(h_ld, &sol.v, sigma2)).log2()
    } else {
        0.0
    };
    direct + relayed
}

/// `k` is the CCU's index, used to pick its relay weight for the SI term.
pub fn rate_common_ccu_fd(h_k: &[Complex64], h_si_k: Complex64, k: usize, sol: &Solution, sigma2: f64) -> f64 {
    let si = si_power(h_si_k, sol.v[k]);
    (1.0 + common_sinr(h_k, sol, si, sigma2)).log2()
}

/// Direct and relayed copies are co-phased and MRC-combined, so their SINRs add.
pub fn rate_common_ceu_fd(h_l: &[Complex64], h_ld: &[Complex64], sol: &Solution, sigma2: f64) -> f64 {
    (1.0 + common_sinr(h_l, sol, 0.0, sigma2) + relay_snr(h_ld, &sol.v, sigma2)).log2()
}

/// `h_si_k` is `Some(h_{k,SI})` when user `m` is a CCU (`m == k`).
pub fn rate_private_fd(
    h_m: &[Complex64],
    sol: &Solution,
    m: usize,
    sigma2: f64,
    h_si_k: Option<Complex64>,
) -> f64 {
    let si = h_si_k.map_or(0.0, |h| si_power(h, sol.v[m]));
    (1.0 + private_sinr(h_m, sol, m, si, sigma2)).log2()
}

/// One audited constraint: `excess` is the amount by which the left side
/// exceeds `rhs` (0 when satisfied).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub excess: f64,
    pub rhs: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        self.excess / self.rhs.abs().max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub common_rate_per_user: Vec<f64>,
    pub common_rate: f64,
    pub private_rate_per_user: Vec<f64>,
    pub total_rate_per_user: Vec<f64>,
    pub max_min: f64,
    pub residuals: Vec<Residual>,
}

impl RateReport {
    /// Largest relative constraint violation.
    pub fn max_residual(&self) -> f64 {
        self.residuals
            .iter()
            .map(Residual::relative)
            .fold(0.0, f64::max)
    }

    pub fn is_feasible(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }

    pub fn residual(&self, name: &str) -> Option<&Residual> {
        self.residuals.iter().find(|r| r.name == name)
    }

    /// Header matching [`RateReport::csv_row`] for `m` users.
    pub fn csv_header(m: usize) -> String {
        let mut cols = vec!["max_min".to_string(), "common_rate".to_string()];
        for prefix in ["common", "private", "total"] {
            cols.extend((0..m).map(|i| format!("{prefix}_{i}")));
        }
        cols.push("max_residual".into());
        cols.join(",")
    }

    /// `max_min, common_rate, common_0.., private_0.., total_0.., max_residual`
    pub fn csv_row(&self) -> String {
        let mut cols = vec![self.max_min, self.common_rate];
        cols.extend(&self.common_rate_per_user);
        cols.extend(&self.private_rate_per_user);
        cols.extend(&self.total_rate_per_user);
        cols.push(self.max_residual());
        cols.iter().map(|x| format!("{x:.9}")).collect::<Vec<_>>().join(",")
    }
}

/// Computes every user's rates and audits the solution against the common
/// split, fronthaul, BS power and CCU power constraints.
pub fn evaluate(sol: &Solution, chan: &ChannelRealization, cfg: &NetworkConfig) -> Result<RateReport> {
    sol.check_dims(cfg)?;
    chan.check_dims(cfg)?;
    let st = chan.stacked();
    let sigma2 = cfg.noise_power;
    let (k_count, m_count) = (cfg.n_ccu, cfg.n_users);

    let mut common = Vec::with_capacity(m_count);
    let mut private = Vec::with_capacity(m_count);
    for m in 0..m_count {
        let h = &st.user[m];
        let (c, p) = match sol.mode {
            Mode::Hd if m < k_count => (
                rate_common_ccu_hd(h, sol, sigma2),
                rate_private_hd(h, sol, m, sigma2),
            ),
            Mode::Hd => (
                rate_common_ceu_hd(h, &st.relay[m - k_count], sol, sigma2),
                rate_private_hd(h, sol, m, sigma2),
            ),
            Mode::Fd if m < k_count => (
                rate_common_ccu_fd(h, st.si[m], m, sol, sigma2),
                rate_private_fd(h, sol, m, sigma2, Some(st.si[m])),
            ),
            Mode::Fd => (
                rate_common_ceu_fd(h, &st.relay[m - k_count], sol, sigma2),
                rate_private_fd(h, sol, m, sigma2, None),
            ),
        };
        common.push(c);
        private.push(p);
    }
    let common_rate = common.iter().copied().fold(f64::INFINITY, f64::min);
    let total: Vec<f64> = sol.c_split.iter().zip(&private).map(|(c, p)| c + p).collect();
    let max_min = total.iter().copied().fold(f64::INFINITY, f64::min);

    let mut residuals = Vec::new();
    let split_sum: f64 = sol.c_split.iter().sum();
    residuals.push(Residual {
        name: "common_split".into(),
        excess: (split_sum - common_rate).max(0.0),
        rhs: common_rate,
    });
    let negative = sol.c_split.iter().map(|c| (-c).max(0.0)).fold(0.0, f64::max);
    residuals.push(Residual {
        name: "split_nonnegative".into(),
        excess: negative,
        rhs: 0.0,
    });
    let total_sum: f64 = total.iter().sum();
    let p_max = cfg.bs_power();
    for bs in 0..cfg.n_bs {
        residuals.push(Residual {
            name: format!("fronthaul[{bs}]"),
            excess: (total_sum - cfg.fronthaul_bpshz).max(0.0),
            rhs: cfg.fronthaul_bpshz,
        });
        residuals.push(Residual {
            name: format!("bs_power[{bs}]"),
            excess: (sol.bs_power(bs, cfg.n_tx_antennas) - p_max).max(0.0),
            rhs: p_max,
        });
    }
    let p_tot = cfg.ccu_power();
    for (k, v) in sol.v.iter().enumerate() {
        residuals.push(Residual {
            name: format!("ccu_power[{k}]"),
            excess: (v.norm_sqr() - p_tot).max(0.0),
            rhs: p_tot,
        });
    }

    Ok(RateReport {
        common_rate_per_user: common,
        common_rate: if m_count == 0 { 0.0 } else { common_rate },
        private_rate_per_user: private,
        total_rate_per_user: total,
        max_min: if m_count == 0 { 0.0 } else { max_min },
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::generate_channels;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn toy(mode: Mode, theta: f64) -> Solution {
        Solution {
            mode,
            w_c: vec![c(2.0, 0.0), c(0.0, 0.0)],
            w_p: vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
            v: vec![c(0.0, 0.0)],
            c_split: vec![0.0, 0.0],
            theta,
        }
    }

    const H: [Complex64; 2] = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];

    #[test]
    fn common_ccu_hd_hand_values() {
        // |h^H w_c|² = 4, interference 1, σ² = 1 → SINR 2.
        let r = rate_common_ccu_hd(&H, &toy(Mode::Hd, 0.5), 1.0);
        assert!((r - 0.5 * 3f64.log2()).abs() < 1e-12);
        assert!((r - 0.792_481_250_360_578).abs() < 1e-9);

        let mut s = toy(Mode::Hd, 0.5);
        s.w_c = vec![c(0.0, 0.0); 2];
        assert_eq!(rate_common_ccu_hd(&H, &s, 1.0), 0.0);

        // θ = 1, private orthogonal to h, |h^H w_c|² = σ².
        let s = Solution {
            w_c: vec![c(1.0, 0.0), c(0.0, 0.0)],
            w_p: vec![vec![c(0.0, 0.0), c(3.0, 0.0)]],
            c_split: vec![0.0],
            ..toy(Mode::Hd, 1.0)
        };
        assert!((rate_common_ccu_hd(&H, &s, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn private_hd_hand_values() {
        let s = toy(Mode::Hd, 1.0);
        // User 0: signal 1, interferer [0,1] orthogonal to h → SINR 1.
        assert!((rate_private_hd(&H, &s, 0, 1.0) - 1.0).abs() < 1e-12);
        let mut z = s.clone();
        z.w_p[0] = vec![c(0.0, 0.0); 2];
        assert_eq!(rate_private_hd(&H, &z, 0, 1.0), 0.0);
        // Mirror-symmetric users.
        let h1 = [c(0.0, 0.0), c(1.0, 0.0)];
        assert!((rate_private_hd(&H, &s, 0, 1.0) - rate_private_hd(&h1, &s, 1, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn common_ceu_hd_hand_values() {
        // SINR_direct = 1: signal 2, interference 1, σ² = 1.
        let mut s = toy(Mode::Hd, 0.5);
        s.w_c = vec![c(2f64.sqrt(), 0.0), c(0.0, 0.0)];
        s.v = vec![c(3f64.sqrt(), 0.0)];
        let h_ld = [c(1.0, 0.0)];
        assert!((rate_common_ceu_hd(&H, &h_ld, &s, 1.0) - 1.5).abs() < 1e-12);
        s.v = vec![c(0.0, 0.0)];
        assert!((rate_common_ceu_hd(&H, &h_ld, &s, 1.0) - 0.5).abs() < 1e-12);
        s.theta = 1.0;
        s.v = vec![c(100.0, 0.0)];
        assert!((rate_common_ceu_hd(&H, &h_ld, &s, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn common_ccu_fd_hand_values() {
        let s = Solution {
            v: vec![c(1.0, 0.0)],
            ..toy(Mode::Fd, 1.0)
        };
        let r = rate_common_ccu_fd(&H, c(0.0, 1.0), 0, &s, 1.0);
        assert!((r - (1.0 + 4.0 / 3.0f64).log2()).abs() < 1e-12);
        assert!((r - 1.222_392_421_336_448).abs() < 1e-9);

        let quiet = Solution {
            v: vec![c(0.0, 0.0)],
            ..s.clone()
        };
        let hd = Solution {
            mode: Mode::Hd,
            ..quiet.clone()
        };
        assert_eq!(rate_common_ccu_fd(&H, c(5.0, 0.0), 0, &quiet, 1.0), rate_common_ccu_hd(&H, &hd, 1.0));

        let mut last = f64::INFINITY;
        for si_db in [-10.0, 0.0, 10.0, 20.0, 40.0, 60.0] {
            let h_si = c(crate::netmodel::to_linear(si_db).sqrt(), 0.0);
            let r = rate_common_ccu_fd(&H, h_si, 0, &s, 1.0);
            assert!(r < last);
            last = r;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn common_ceu_fd_hand_values() {
        let mut s = toy(Mode::Fd, 1.0);
        s.w_c = vec![c(2f64.sqrt(), 0.0), c(0.0, 0.0)];
        s.v = vec![c(3f64.sqrt(), 0.0)];
        let h_ld = [c(1.0, 0.0)];
        assert!((rate_common_ceu_fd(&H, &h_ld, &s, 1.0) - 5f64.log2()).abs() < 1e-12);
        assert!((rate_common_ceu_fd(&H, &h_ld, &s, 1.0) - 2.321_928_094_887_362).abs() < 1e-9);
        s.v = vec![c(0.0, 0.0)];
        assert!((rate_common_ceu_fd(&H, &h_ld, &s, 1.0) - 1.0).abs() < 1e-12);
        s.w_c = vec![c(0.0, 0.0); 2];
        assert_eq!(rate_common_ceu_fd(&H, &h_ld, &s, 1.0), 0.0);
    }

    #[test]
    fn private_fd_hand_values() {
        // Signal 3, interference 2 along h, σ² = 1.
        let s = Solution {
            mode: Mode::Fd,
            w_c: vec![c(0.0, 0.0)],
            w_p: vec![vec![c(3f64.sqrt(), 0.0)], vec![c(2f64.sqrt(), 0.0)]],
            v: vec![c(1.0, 0.0), c(0.0, 0.0)],
            c_split: vec![0.0, 0.0],
            theta: 1.0,
        };
        let h = [c(1.0, 0.0)];
        assert!((rate_private_fd(&h, &s, 0, 1.0, None) - 1.0).abs() < 1e-12);
        let r = rate_private_fd(&h, &s, 0, 1.0, Some(c(1.0, 0.0)));
        assert!((r - 1.75f64.log2()).abs() < 1e-12);
        assert!((r - 0.807_354_922_057_604).abs() < 1e-9);
        let mut z = s.clone();
        z.w_p[0] = vec![c(0.0, 0.0)];
        assert_eq!(rate_private_fd(&h, &z, 0, 1.0, Some(c(1.0, 0.0))), 0.0);
    }

    #[test]
    fn zero_solution_is_feasible_with_zero_rates() {
        let cfg = NetworkConfig::default();
        let chan = generate_channels(&cfg, 5).unwrap();
        for mode in [Mode::Hd, Mode::Fd] {
            let rep = evaluate(&Solution::zeros(&cfg, mode), &chan, &cfg).unwrap();
            assert_eq!(rep.max_min, 0.0);
            assert!(rep.total_rate_per_user.iter().all(|r| *r == 0.0));
            assert!(rep.is_feasible(FEASIBILITY_TOL));
        }
    }

    #[test]
    fn over_split_is_flagged() {
        let cfg = NetworkConfig::default();
        let chan = generate_channels(&cfg, 5).unwrap();
        let mut sol = Solution::zeros(&cfg, Mode::Fd);
        sol.c_split[0] = 0.1;
        let rep = evaluate(&sol, &chan, &cfg).unwrap();
        assert!(rep.residual("common_split").unwrap().excess > 0.0);
        assert!(!rep.is_feasible(FEASIBILITY_TOL));
    }

    #[test]
    fn dimension_mismatch() {
        let cfg = NetworkConfig::default();
        let chan = generate_channels(&cfg, 5).unwrap();
        let mut sol = Solution::zeros(&cfg, Mode::Fd);
        sol.w_p.pop();
        assert!(matches!(evaluate(&sol, &chan, &cfg), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn composed_two_user_report() {
        // N = 1, N_t = 2, K = 1, L = 1 with hand-built channels.
        let cfg = NetworkConfig {
            n_cells: 1,
            n_bs: 1,
            n_ccu: 1,
            n_ceu: 1,
            n_users: 2,
            n_tx_antennas: 2,
            disparity_w: vec![0.3],
            ..Default::default()
        };
        let chan = ChannelRealization {
            h_bs_user: vec![vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]],
            h_d2d: vec![vec![c(1.0, 0.0)]],
            h_si: vec![c(0.0, 0.0)],
            seed: 0,
        };
        let sol = Solution {
            mode: Mode::Hd,
            w_c: vec![c(2.0, 0.0), c(2f64.sqrt(), 0.0)],
            w_p: vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
            v: vec![c(3f64.sqrt(), 0.0)],
            c_split: vec![0.3, 0.2],
            theta: 0.5,
        };
        let rep = evaluate(&sol, &chan, &cfg).unwrap();
        // CCU: common SINR 4/2 = 2, private SINR 1/1.
        let ccu_common = 0.5 * 3f64.log2();
        // CEU: direct SINR 2/2 = 1, relay SNR 3.
        let ceu_common = 0.5 * 1.0 + 0.5 * 2.0;
        assert!((rep.common_rate_per_user[0] - ccu_common).abs() < 1e-12);
        assert!((rep.common_rate_per_user[1] - ceu_common).abs() < 1e-12);
        assert_eq!(rep.common_rate, ccu_common);
        assert!((rep.private_rate_per_user[0] - 0.5).abs() < 1e-12);
        assert!((rep.private_rate_per_user[1] - 0.5).abs() < 1e-12);
        assert_eq!(rep.total_rate_per_user, vec![0.3 + 0.5, 0.2 + 0.5]);
        assert_eq!(rep.max_min, 0.7);
        assert!(rep.is_feasible(FEASIBILITY_TOL));
        assert_eq!(rep.csv_row().split(',').count(), RateReport::csv_header(2).split(',').count());
    }

    fn arb_solution(cfg: NetworkConfig) -> impl Strategy<Value = Solution> {
        let d = cfg.stacked_len();
        let m = cfg.n_users;
        let k = cfg.n_ccu;
        let cv = move |n: usize| proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), n);
        (cv(d), proptest::collection::vec(cv(d), m), cv(k)).prop_map(move |(wc, wp, v)| {
            let to_c = |x: Vec<(f64, f64)>| x.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
            Solution {
                mode: Mode::Fd,
                w_c: to_c(wc),
                w_p: wp.into_iter().map(to_c).collect(),
                v: to_c(v),
                c_split: vec![0.0; m],
                theta: 1.0,
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn fd_with_silent_relays_matches_hd_at_full_time(sol in arb_solution(NetworkConfig::default()), seed in 0u64..1000) {
            let cfg = NetworkConfig::default();
            let chan = generate_channels(&cfg, seed).unwrap();
            let mut fd = sol.clone();
            fd.v.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
            let hd = Solution { mode: Mode::Hd, ..fd.clone() };
            let a = evaluate(&fd, &chan, &cfg).unwrap();
            let b = evaluate(&hd, &chan, &cfg).unwrap();
            for m in 0..cfg.n_users {
                prop_assert!((a.total_rate_per_user[m] - b.total_rate_per_user[m]).abs() < 1e-12);
                prop_assert!((a.common_rate_per_user[m] - b.common_rate_per_user[m]).abs() < 1e-12);
            }
        }

        #[test]
        fn common_scale_never_hurts(sol in arb_solution(NetworkConfig::default()), alpha in 1.0f64..10.0, seed in 0u64..1000) {
            let cfg = NetworkConfig::default();
            let chan = generate_channels(&cfg, seed).unwrap();
            let base = evaluate(&sol, &chan, &cfg).unwrap();
            let mut scaled = sol.clone();
            scaled.w_c.iter_mut().for_each(|x| *x *= alpha);
            let up = evaluate(&scaled, &chan, &cfg).unwrap();
            for m in 0..cfg.n_users {
                prop_assert!(up.common_rate_per_user[m] >= base.common_rate_per_user[m] - 1e-12);
                // SIC: private rates ignore the common precoder entirely.
                prop_assert_eq!(up.private_rate_per_user[m], base.private_rate_per_user[m]);
            }
        }

        #[test]
        fn rates_finite_and_nonnegative(sol in arb_solution(NetworkConfig::default()), seed in 0u64..1000, hd in any::<bool>(), theta in 0.05f64..1.0) {
            let cfg = NetworkConfig::default();
            let chan = generate_channels(&cfg, seed).unwrap();
            let sol = if hd { Solution { mode: Mode::Hd, theta, ..sol } } else { sol };
            let rep = evaluate(&sol, &chan, &cfg).unwrap();
            for r in rep.common_rate_per_user.iter().chain(&rep.private_rate_per_user) {
                prop_assert!(r.is_finite() && *r >= 0.0);
            }
            prop_assert_eq!(rep.common_rate, rep.common_rate_per_user.iter().copied().fold(f64::INFINITY, f64::min));
        }
    }
}
