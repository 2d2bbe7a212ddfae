use ldp_core::attacks::{
    attack, brute_force_expected_asr, empirical_asr, expected_asr, expected_asr_she_mc, lh_expected_asr_random_hash,
};
use ldp_core::model::{Family, ProtocolConfig, Report};
use ldp_core::protocols::{max_likelihood_ratio, perturb, support};
use ldp_core::rng::derive_stream;
use proptest::prelude::*;

fn any_config() -> impl Strategy<Value = ProtocolConfig> {
    (0.1f64..8.0, 2usize..40, 0u8..6, 0.0f64..1.0).prop_map(|(eps, k, fam, u)| match fam {
        0 => ProtocolConfig::grr(eps, k).unwrap(),
        1 => ProtocolConfig::ss(eps, k, 1 + (u * (k - 1) as f64) as usize % (k - 1)).unwrap(),
        2 => ProtocolConfig::ue_from_p(eps, k, 0.5 + 0.49 * u).unwrap(),
        3 => ProtocolConfig::lh(eps, k, 2 + (u * 60.0) as usize).unwrap(),
        4 => ProtocolConfig::she(eps, k).unwrap(),
        _ => ProtocolConfig::the(eps, k, 0.5 + 0.5 * u).unwrap(),
    })
}

proptest! {
    #[test]
    fn reports_are_well_formed(cfg in any_config(), x_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let x = ((x_frac * cfg.k as f64) as usize).min(cfg.k - 1);
        let mut rng = derive_stream(seed, 0, 0);
        let report = perturb(&cfg, x, &mut rng).unwrap();
        match (&report, cfg.family) {
            (Report::Subset(s), Family::Ss) => {
                let ldp_core::FamilyParam::SubsetSize(w) = cfg.param else { unreachable!() };
                prop_assert_eq!(s.len(), w);
                prop_assert!(s.windows(2).all(|p| p[0] < p[1]));
                prop_assert!(s.iter().all(|&v| v < cfg.k));
            }
            (Report::RealVector(v), Family::She) => prop_assert_eq!(v.len(), cfg.k),
            _ => {
                let s = support(&report, &cfg).unwrap();
                prop_assert!(s.members.iter().all(|&v| v < cfg.k));
            }
        }
        let guess = attack(&report, &cfg, &mut rng).unwrap();
        prop_assert!(guess.x_hat < cfg.k);
    }

    #[test]
    fn expected_asr_is_a_probability(cfg in any_config()) {
        prop_assume!(cfg.family != Family::She);
        let a = expected_asr(&cfg).unwrap();
        prop_assert!(a > 0.0 && a <= 1.0, "{:?} -> {}", cfg, a);
    }

    #[test]
    fn streams_are_reproducible(seed in any::<u64>(), run in 0u64..1000, user in 0u64..1_000_000) {
        let cfg = ProtocolConfig::oue(2.0, 16).unwrap();
        let a = perturb(&cfg, 3, &mut derive_stream(seed, run, user)).unwrap();
        let b = perturb(&cfg, 3, &mut derive_stream(seed, run, user)).unwrap();
        prop_assert_eq!(a, b);
    }
}

fn enumerable_configs() -> Vec<ProtocolConfig> {
    let mut out = Vec::new();
    for eps in [0.5, 1.0, 2.0] {
        for k in 2..=6 {
            out.push(ProtocolConfig::grr(eps, k).unwrap());
            for w in 1..k {
                out.push(ProtocolConfig::ss(eps, k, w).unwrap());
            }
            out.push(ProtocolConfig::sue(eps, k).unwrap());
            for p in [0.5, 0.7, 0.9] {
                out.push(ProtocolConfig::ue_from_p(eps, k, p).unwrap());
            }
            for t in [0.5, 0.75, 1.0] {
                out.push(ProtocolConfig::the(eps, k, t).unwrap());
            }
        }
    }
    out
}

#[test]
fn oracle_matches_closed_forms_exactly() {
    for cfg in enumerable_configs() {
        let want = expected_asr(&cfg).unwrap();
        for x in 0..cfg.k {
            let got = brute_force_expected_asr(&cfg, x).unwrap();
            assert!(got.exact);
            assert!((got.value - want).abs() < 1e-12, "{cfg:?} x={x}: {} vs {want}", got.value);
        }
    }
}

#[test]
fn ratios_respect_the_budget_for_sampled_hash_seeds() {
    for eps in [0.5, 1.0, 2.0] {
        for k in 2..=6 {
            for g in [2, 3, 5] {
                let cfg = ProtocolConfig::lh(eps, k, g).unwrap();
                for seed in 0..20u64 {
                    let r = max_likelihood_ratio(&cfg, Some(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15))).unwrap();
                    assert!(r <= eps.exp() * (1.0 + 1e-9));
                }
            }
        }
    }
}

#[test]
fn lh_oracle_tracks_random_hash_expectation() {
    for eps in [0.5, 2.0] {
        for (k, g) in [(4, 2), (6, 3), (5, 5), (3, 7)] {
            let cfg = ProtocolConfig::lh(eps, k, g).unwrap();
            let o = brute_force_expected_asr(&cfg, 1).unwrap();
            let want = lh_expected_asr_random_hash(eps, k, g);
            assert!((o.value - want).abs() <= 3.0 * o.stderr, "{cfg:?}: {o:?} vs {want}");
        }
    }
}

/// Empirical ASR over `n` users with uniform true values.
fn simulate_asr(cfg: &ProtocolConfig, n: u64, seed: u64) -> ldp_core::attacks::AsrResult {
    let pairs: Vec<(usize, usize)> = (0..n)
        .map(|u| {
            let x = (u % cfg.k as u64) as usize;
            let mut rng = derive_stream(seed, 0, u);
            let report = perturb(cfg, x, &mut rng).unwrap();
            (x, attack(&report, cfg, &mut rng).unwrap().x_hat)
        })
        .collect();
    empirical_asr(&pairs).unwrap()
}

#[test]
fn monte_carlo_asr_agrees_with_expectation() {
    let n = 100_000;
    let (eps, k) = (2.0, 20);
    let cases = [
        ProtocolConfig::grr(eps, k).unwrap(),
        ProtocolConfig::ss(eps, k, 3).unwrap(),
        ProtocolConfig::sue(eps, k).unwrap(),
        ProtocolConfig::oue(eps, k).unwrap(),
        ProtocolConfig::the(eps, k, 0.8).unwrap(),
    ];
    for (i, cfg) in cases.iter().enumerate() {
        let emp = simulate_asr(cfg, n, 100 + i as u64);
        let want = expected_asr(cfg).unwrap();
        assert!((emp.asr - want).abs() < 4.0 * emp.stderr, "{cfg:?}: {emp:?} vs {want}");
    }

    // LH: the closed form ignores hash collisions, so compare against the
    // collision-aware expectation under a random hash.
    for g in [2, 4, 20] {
        let cfg = ProtocolConfig::lh(eps, k, g).unwrap();
        let emp = simulate_asr(&cfg, n, 200 + g as u64);
        let want = lh_expected_asr_random_hash(eps, k, g);
        assert!((emp.asr - want).abs() < 4.0 * emp.stderr, "{cfg:?}: {emp:?} vs {want}");
    }

    let she = ProtocolConfig::she(eps, k).unwrap();
    let emp = simulate_asr(&she, n, 300);
    let mc = expected_asr_she_mc(eps, k, 1_000_000, &mut derive_stream(301, 0, 0)).unwrap();
    let se = (emp.stderr.powi(2) + mc.stderr.powi(2)).sqrt();
    assert!((emp.asr - mc.asr).abs() < 4.0 * se, "{emp:?} vs {mc:?}");
}
