//! Scenario configuration and Rayleigh channel generation.
//!
//! Users are indexed `0..K` for cell-center users (CCUs) followed by
//! `K..K+L` for cell-edge users (CEUs). CCU `k` is served by BS `k mod N`;
//! every other BS reaches it through a cross link.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converts a dB (or dBm) quantity to linear scale.
///
/// dBm values share the reference of the noise power, so `0 dBm` is `1.0`.
pub fn to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

fn default_theta_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

/// All scenario parameters. Field names follow the usual symbols:
/// `n_cells`/`n_bs` = N, `n_ccu` = K, `n_ceu` = L, `n_users` = M,
/// `n_tx_antennas` = N_t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub n_cells: usize,
    pub n_bs: usize,
    pub n_ccu: usize,
    pub n_ceu: usize,
    pub n_users: usize,
    pub n_tx_antennas: usize,
    /// Per-BS power budget P^max (dBm).
    pub bs_power_dbm: f64,
    /// Per-CCU relaying budget P^tot (dBm). `-inf` switches relaying off.
    pub ccu_power_dbm: f64,
    /// Per-BS fronthaul capacity F^Fh (bps/Hz).
    pub fronthaul_bpshz: f64,
    /// Receiver noise power σ² (linear).
    pub noise_power: f64,
    /// Self-interference channel variance Ω²_SI (dB).
    pub si_gain_db: f64,
    /// Mean BS→CCU channel gain λ_s (dB).
    pub lambda_s_db: f64,
    /// Mean BS→CEU channel gain λ_w (dB).
    pub lambda_w_db: f64,
    /// Mean CCU→CEU channel gain λ_d (dB).
    pub lambda_d_db: f64,
    /// δ_s: serving BS → CCU.
    pub disparity_s: f64,
    /// δ_sw: non-serving BS → CCU.
    pub disparity_sw: f64,
    /// δ_w(l): every BS → CEU `l`.
    pub disparity_w: Vec<f64>,
    /// δ_d: `[same-index pair, cross pair]` for CCU → CEU links.
    pub disparity_d: [f64; 2],
    #[serde(default = "default_theta_grid")]
    pub theta_grid: Vec<f64>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            n_cells: 2,
            n_bs: 2,
            n_ccu: 2,
            n_ceu: 2,
            n_users: 4,
            n_tx_antennas: 4,
            bs_power_dbm: 30.0,
            ccu_power_dbm: 20.0,
            fronthaul_bpshz: 20.0,
            noise_power: 1.0,
            si_gain_db: -10.0,
            lambda_s_db: 12.0,
            lambda_w_db: 3.0,
            lambda_d_db: 9.0,
            disparity_s: 1.0,
            disparity_sw: 0.1,
            disparity_w: vec![0.3, 0.4],
            disparity_d: [1.0, 1.0],
            theta_grid: default_theta_grid(),
        }
    }
}

impl NetworkConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Antenna count of the stacked (all-BS) precoders, N·N_t.
    pub fn stacked_len(&self) -> usize {
        self.n_bs * self.n_tx_antennas
    }

    pub fn is_ccu(&self, m: usize) -> bool {
        m < self.n_ccu
    }

    pub fn serving_bs(&self, k: usize) -> usize {
        k % self.n_bs
    }

    pub fn bs_power(&self) -> f64 {
        to_linear(self.bs_power_dbm)
    }

    pub fn ccu_power(&self) -> f64 {
        to_linear(self.ccu_power_dbm)
    }

    /// Whether the CCUs can relay at all (positive relaying budget and at
    /// least one CCU/CEU pair).
    pub fn relaying_enabled(&self) -> bool {
        self.ccu_power() > 0.0 && self.n_ceu > 0
    }

    /// Hard checks. Violations make the model meaningless.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_cells == 0 || self.n_bs == 0 || self.n_tx_antennas == 0 || self.n_ccu == 0 {
            return bad("N, K and N_t must be positive".into());
        }
        if self.n_bs != self.n_cells {
            return bad(format!("n_bs ({}) must equal n_cells ({})", self.n_bs, self.n_cells));
        }
        if self.n_users != self.n_ccu + self.n_ceu {
            return bad(format!(
                "n_users ({}) must equal n_ccu + n_ceu ({})",
                self.n_users,
                self.n_ccu + self.n_ceu
            ));
        }
        if self.disparity_w.len() != self.n_ceu {
            return bad(format!(
                "disparity_w has {} entries, expected {}",
                self.disparity_w.len(),
                self.n_ceu
            ));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return bad("noise_power must be positive and finite".into());
        }
        if !self.bs_power_dbm.is_finite() {
            return bad("bs_power_dbm must be finite".into());
        }
        if self.ccu_power_dbm.is_nan() || self.ccu_power_dbm == f64::INFINITY {
            return bad("ccu_power_dbm must be finite or -inf".into());
        }
        if self.fronthaul_bpshz.is_nan() || self.fronthaul_bpshz <= 0.0 {
            return bad("fronthaul_bpshz must be positive".into());
        }
        for (name, g) in [
            ("si_gain_db", self.si_gain_db),
            ("lambda_s_db", self.lambda_s_db),
            ("lambda_w_db", self.lambda_w_db),
            ("lambda_d_db", self.lambda_d_db),
        ] {
            if g.is_nan() || g == f64::INFINITY {
                return bad(format!("{name} must be finite or -inf"));
            }
        }
        let disparities = [self.disparity_s, self.disparity_sw]
            .into_iter()
            .chain(self.disparity_w.iter().copied())
            .chain(self.disparity_d);
        for d in disparities {
            if !(0.0..=1.0).contains(&d) {
                return bad(format!("disparity {d} outside [0, 1]"));
            }
        }
        if self.theta_grid.is_empty() {
            return bad("theta_grid is empty".into());
        }
        if self.theta_grid.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return bad("theta_grid entries must lie in (0, 1]".into());
        }
        if self.theta_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("theta_grid must be strictly increasing".into());
        }
        Ok(())
    }

    /// Modelling assumptions that the optimizer does not need but that the
    /// network model presumes. Reported as warnings.
    pub fn assumption_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n_ceu > self.n_ccu {
            out.push(format!("L = {} exceeds K = {}", self.n_ceu, self.n_ccu));
        }
        if self.n_ccu < self.n_bs {
            out.push(format!("K = {} is below N = {}", self.n_ccu, self.n_bs));
        }
        let needed = self.n_users.div_ceil(self.n_bs);
        if self.n_tx_antennas < needed {
            out.push(format!(
                "N_t = {} below ceil(M / N) = {needed}: network is overloaded",
                self.n_tx_antennas
            ));
        }
        out
    }

    /// Channel variance of the BS → user link.
    pub fn bs_user_variance(&self, bs: usize, m: usize) -> f64 {
        if self.is_ccu(m) {
            let delta = if self.serving_bs(m) == bs {
                self.disparity_s
            } else {
                self.disparity_sw
            };
            to_linear(self.lambda_s_db) * delta
        } else {
            to_linear(self.lambda_w_db) * self.disparity_w[m - self.n_ccu]
        }
    }

    /// Channel variance of the CCU `k` → CEU `l` link (`l` counted among CEUs).
    pub fn d2d_variance(&self, k: usize, l: usize) -> f64 {
        let delta = if k == l {
            self.disparity_d[0]
        } else {
            self.disparity_d[1]
        };
        to_linear(self.lambda_d_db) * delta
    }
}

/// One draw of every channel in the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    /// `[bs][user]` → length-N_t vector h_{n_b,m}.
    pub h_bs_user: Vec<Vec<Vec<Complex64>>>,
    /// `[k][l]` → scalar h_{k,l}.
    pub h_d2d: Vec<Vec<Complex64>>,
    /// `[k]` → scalar h_{k,SI}.
    pub h_si: Vec<Complex64>,
    pub seed: u64,
}

fn cn(rng: &mut ChaCha12Rng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// Draws every channel i.i.d. circularly-symmetric complex Gaussian with the
/// variance implied by the config. Pure function of `(config, seed)`.
///
/// The unit draws are consumed in a fixed order independent of the
/// variances, so two configs differing only in gains share the same
/// underlying randomness for a given seed.
pub fn generate_channels(config: &NetworkConfig, seed: u64) -> Result<ChannelRealization> {
    config.validate().map_err(|e| Error::DimensionMismatch(e.to_string()))?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let (n, m, nt) = (config.n_bs, config.n_users, config.n_tx_antennas);

    let h_bs_user = (0..n)
        .map(|bs| {
            (0..m)
                .map(|u| {
                    let var = config.bs_user_variance(bs, u);
                    (0..nt).map(|_| cn(&mut rng, var)).collect()
                })
                .collect()
        })
        .collect();
    let h_d2d = (0..config.n_ccu)
        .map(|k| {
            (0..config.n_ceu)
                .map(|l| cn(&mut rng, config.d2d_variance(k, l)))
                .collect()
        })
        .collect();
    let si_var = to_linear(config.si_gain_db);
    let h_si = (0..config.n_ccu).map(|_| cn(&mut rng, si_var)).collect();

    Ok(ChannelRealization {
        h_bs_user,
        h_d2d,
        h_si,
        seed,
    })
}

/// Stacked channel views used by the rate expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedChannels {
    /// Per user, h_m of length N·N_t (BS blocks in order).
    pub user: Vec<Vec<Complex64>>,
    /// Per CEU, h_{l,d} of length K.
    pub relay: Vec<Vec<Complex64>>,
    pub si: Vec<Complex64>,
}

pub fn stack_channels(r: &ChannelRealization) -> StackedChannels {
    let n_users = r.h_bs_user.first().map_or(0, Vec::len);
    let user = (0..n_users)
        .map(|m| {
            r.h_bs_user
                .iter()
                .flat_map(|per_bs| per_bs[m].iter().copied())
                .collect()
        })
        .collect();
    let n_ceu = r.h_d2d.first().map_or(0, Vec::len);
    let relay = (0..n_ceu)
        .map(|l| r.h_d2d.iter().map(|row| row[l]).collect())
        .collect();
    StackedChannels {
        user,
        relay,
        si: r.h_si.clone(),
    }
}

impl ChannelRealization {
    pub fn stacked(&self) -> StackedChannels {
        stack_channels(self)
    }

    /// Checks the block shapes against a config.
    pub fn check_dims(&self, cfg: &NetworkConfig) -> Result<()> {
        let ok = self.h_bs_user.len() == cfg.n_bs
            && self.h_bs_user.iter().all(|b| {
                b.len() == cfg.n_users && b.iter().all(|v| v.len() == cfg.n_tx_antennas)
            })
            && self.h_d2d.len() == cfg.n_ccu
            && self.h_d2d.iter().all(|r| r.len() == cfg.n_ceu)
            && self.h_si.len() == cfg.n_ccu;
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(
                "channel realization does not match config".into(),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn db_conversion() {
        assert_eq!(to_linear(0.0), 1.0);
        assert!(close(to_linear(12.0), 15.848_931_924_611_133, 1e-12));
        assert!(close(to_linear(30.0), 1000.0, 1e-9));
    }

    #[test]
    fn default_shapes() {
        let cfg = NetworkConfig::default();
        let r = generate_channels(&cfg, 7).unwrap();
        let total: usize = r.h_bs_user.iter().map(Vec::len).sum();
        assert_eq!(total, 8);
        assert!(r.h_bs_user.iter().flatten().all(|v| v.len() == 4));
        assert_eq!(r.h_d2d.len(), 2);
        assert!(r.h_d2d.iter().all(|row| row.len() == 2));
        assert_eq!(r.h_si.len(), 2);
        r.check_dims(&cfg).unwrap();
    }

    #[test]
    fn zero_disparity_gives_zero_channels() {
        let cfg = NetworkConfig {
            disparity_s: 0.0,
            disparity_sw: 0.0,
            disparity_w: vec![0.0, 0.0],
            disparity_d: [0.0, 0.0],
            ..Default::default()
        };
        let r = generate_channels(&cfg, 3).unwrap();
        assert!(r.h_bs_user.iter().flatten().flatten().all(|z| *z == Complex64::new(0.0, 0.0)));
        assert!(r.h_d2d.iter().flatten().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn reproducible() {
        let cfg = NetworkConfig::default();
        assert_eq!(generate_channels(&cfg, 11).unwrap(), generate_channels(&cfg, 11).unwrap());
        assert_ne!(generate_channels(&cfg, 11).unwrap(), generate_channels(&cfg, 12).unwrap());
    }

    #[test]
    fn stacking_order() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let r = ChannelRealization {
            h_bs_user: vec![vec![vec![one, zero]], vec![vec![zero, Complex64::new(0.0, 2.0)]]],
            h_d2d: vec![vec![]],
            h_si: vec![zero],
            seed: 0,
        };
        let s = stack_channels(&r);
        assert_eq!(s.user[0], vec![one, zero, zero, Complex64::new(0.0, 2.0)]);
    }

    #[test]
    fn stacked_lengths_default() {
        let cfg = NetworkConfig::default();
        let s = generate_channels(&cfg, 1).unwrap().stacked();
        assert_eq!(s.user.len(), 4);
        assert!(s.user.iter().all(|h| h.len() == 8));
        assert_eq!(s.relay.len(), 2);
        assert!(s.relay.iter().all(|h| h.len() == 2));
    }

    #[test]
    fn link_classes() {
        let cfg = NetworkConfig::default();
        let ls = to_linear(12.0);
        assert!(close(cfg.bs_user_variance(0, 0), ls, 1e-12));
        assert!(close(cfg.bs_user_variance(1, 0), 0.1 * ls, 1e-12));
        assert!(close(cfg.bs_user_variance(1, 1), ls, 1e-12));
        assert!(close(cfg.bs_user_variance(0, 3), 0.4 * to_linear(3.0), 1e-12));
        let cfg = NetworkConfig {
            disparity_d: [1.0, 0.8],
            ..Default::default()
        };
        assert!(close(cfg.d2d_variance(0, 1), 0.8 * to_linear(9.0), 1e-12));
        assert!(close(cfg.d2d_variance(1, 1), to_linear(9.0), 1e-12));
    }

    #[test]
    fn json_rejects_unknown_fields() {
        let mut v = serde_json::to_value(NetworkConfig::default()).unwrap();
        v["bogus"] = serde_json::json!(1);
        assert!(NetworkConfig::from_json(&v.to_string()).is_err());
        let ok = serde_json::to_string(&NetworkConfig::default()).unwrap();
        assert_eq!(NetworkConfig::from_json(&ok).unwrap(), NetworkConfig::default());
    }

    #[test]
    fn validation_errors() {
        let cfg = NetworkConfig {
            n_users: 5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        assert!(generate_channels(&cfg, 0).is_err());
        let cfg = NetworkConfig {
            theta_grid: vec![0.0, 0.5],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = NetworkConfig {
            n_tx_antennas: 1,
            ..Default::default()
        };
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.assumption_warnings().len(), 1);
        assert!(NetworkConfig::default().assumption_warnings().is_empty());
    }
}
