use crsma::{generate_channels, NetworkConfig};
use num_complex::Complex64;

const DRAWS: u64 = 100_000;

struct Samples {
    cfg: NetworkConfig,
    // Per draw: BS0→CCU0 antennas 0 and 1, BS1→CCU0, BS0→CEU0, BS0→CEU1,
    // d2d same pair, d2d cross pair, SI of CCU0.
    draws: Vec<[Complex64; 8]>,
}

fn samples() -> Samples {
    let cfg = NetworkConfig {
        disparity_d: [1.0, 0.8],
        ..NetworkConfig::default()
    };
    let draws = (0..DRAWS)
        .map(|seed| {
            let c = generate_channels(&cfg, seed).unwrap();
            [
                c.h_bs_user[0][0][0],
                c.h_bs_user[0][0][1],
                c.h_bs_user[1][0][0],
                c.h_bs_user[0][2][0],
                c.h_bs_user[0][3][0],
                c.h_d2d[0][0],
                c.h_d2d[0][1],
                c.h_si[0],
            ]
        })
        .collect();
    Samples { cfg, draws }
}

fn power(s: &Samples, i: usize) -> f64 {
    s.draws.iter().map(|d| d[i].norm_sqr()).sum::<f64>() / s.draws.len() as f64
}

#[test]
fn link_variances_and_independence() {
    let s = samples();
    let cfg = &s.cfg;
    let expected = [
        cfg.bs_user_variance(0, 0),
        cfg.bs_user_variance(0, 0),
        cfg.bs_user_variance(1, 0),
        cfg.bs_user_variance(0, 2),
        cfg.bs_user_variance(0, 3),
        cfg.d2d_variance(0, 0),
        cfg.d2d_variance(0, 1),
        10f64.powf(cfg.si_gain_db / 10.0),
    ];
    for (i, &nu) in expected.iter().enumerate() {
        let got = power(&s, i);
        assert!((got - nu).abs() <= 0.02 * nu, "entry {i}: {got} vs {nu}");
    }
    // BS→CEU with λ_w = 3 dB and δ_w = 0.3.
    assert!((power(&s, 3) - 0.5986).abs() <= 0.02 * 0.5986);

    for i in 0..8 {
        for j in i + 1..8 {
            let cross: Complex64 = s.draws.iter().map(|d| d[i] * d[j].conj()).sum::<Complex64>() / DRAWS as f64;
            let rho = cross.norm() / (expected[i] * expected[j]).sqrt();
            assert!(rho < 0.02, "entries {i},{j}: correlation {rho}");
        }
    }
}
