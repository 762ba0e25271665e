use brightcv_core::channel::ChannelParams;
use brightcv_core::detector::DetectorConfig;
use brightcv_core::gaussian::{log_negativity, symplectic_eigenvalues};
use brightcv_core::protocols::{shared_cm, SchemeKind, SourceParams};
use brightcv_core::qkd::{key_rate, key_rate_at_db};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn det(eps_tot: f64) -> DetectorConfig {
    DetectorConfig::with_eps_tot(500, 500, eps_tot, 1.0).unwrap()
}

fn src(n_bar: f64) -> SourceParams {
    SourceParams::new(n_bar, 500, 500).unwrap()
}

fn log_n() -> impl Strategy<Value = f64> {
    (-2.0..4.0f64).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn shared_state_is_physical(
        n in log_n(),
        eta in 0.001..=1.0f64,
        chi in 0.0..0.5f64,
        eps in 0.0..0.3f64,
        epr in any::<bool>(),
    ) {
        let scheme = if epr { SchemeKind::EprBased } else { SchemeKind::PrepareAndMeasure };
        let cm = shared_cm(&src(n), &ChannelParams::new(eta, chi).unwrap(), &det(eps), scheme).unwrap();
        prop_assert!(symplectic_eigenvalues(&cm).is_ok());
    }

    #[test]
    fn entanglement_grows_with_transmittance(
        n in log_n(),
        e1 in 0.01..=1.0f64,
        e2 in 0.01..=1.0f64,
        eps in 0.0..0.3f64,
    ) {
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let en = |eta| {
            let cm = shared_cm(&src(n), &ChannelParams::pure_loss(eta).unwrap(), &det(eps), SchemeKind::EprBased).unwrap();
            log_negativity(&cm).unwrap()
        };
        prop_assert!(en(hi) >= en(lo) - TOL);
    }

    #[test]
    fn key_rate_falls_with_excess_noise(
        n in log_n(),
        eta in 0.01..=1.0f64,
        c1 in 0.0..0.3f64,
        c2 in 0.0..0.3f64,
        eps in 0.0..0.1f64,
    ) {
        let (lo, hi) = if c1 < c2 { (c1, c2) } else { (c2, c1) };
        let k = |chi| key_rate(&src(n), &ChannelParams::new(eta, chi).unwrap(), &det(eps), 0.97).unwrap().key_rate;
        prop_assert!(k(hi) <= k(lo) + TOL);
    }

    #[test]
    fn key_rate_falls_with_detector_noise(
        n in log_n(),
        eta in 0.01..=1.0f64,
        chi in 0.0..0.3f64,
        e1 in 0.0..0.2f64,
        e2 in 0.0..0.2f64,
    ) {
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let ch = ChannelParams::new(eta, chi).unwrap();
        let k = |eps| key_rate(&src(n), &ch, &det(eps), 0.97).unwrap().key_rate;
        prop_assert!(k(hi) <= k(lo) + TOL);
    }

    /// Below zero `K` climbs back towards 0 as `η → 0` (both information
    /// quantities vanish), so the order is asserted where a key exists.
    #[test]
    fn key_rate_falls_with_attenuation(
        n in log_n(),
        d1 in 0.0..60.0f64,
        d2 in 0.0..60.0f64,
        chi in 0.0..0.3f64,
        eps in 0.0..0.1f64,
    ) {
        let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        let k = |db| key_rate_at_db(&src(n), &det(eps), chi, 0.97, db).unwrap().key_rate;
        let (k_lo, k_hi) = (k(lo), k(hi));
        if k_lo > 0.0 || k_hi > 0.0 {
            prop_assert!(k_hi <= k_lo + TOL, "{k_hi} > {k_lo}");
        }
    }

    #[test]
    fn better_reconciliation_never_hurts(
        n in log_n(),
        eta in 0.01..=1.0f64,
        chi in 0.0..0.3f64,
        eps in 0.0..0.1f64,
    ) {
        let ch = ChannelParams::new(eta, chi).unwrap();
        let d = det(eps);
        let k = |beta| key_rate(&src(n), &ch, &d, beta).unwrap().key_rate;
        prop_assert!(k(0.97) <= k(1.0));
    }

    /// Unbalancing can only add noise when `(T_a − ½)(T_a − T_b) ≥ 0`, which
    /// covers splitting ratios drifting symmetrically around ½ like 51/49.
    #[test]
    fn unbalanced_detection_never_helps(
        n in log_n(),
        db in 0.0..30.0f64,
        chi in 0.0..0.2f64,
        eps in 0.001..0.1f64,
        t_a in 0.3..0.7f64,
        frac in 0.0..=1.0f64,
    ) {
        // T_b between ½ and the mirror image of T_a keeps a(a − b) ≥ 0
        let a = t_a - 0.5;
        let t_b = 0.5 - a * (2.0 * frac - 1.0);
        prop_assume!(a * (a - (t_b - 0.5)) >= 0.0);
        let balanced = det(eps);
        let unbalanced = balanced.with_transmittances(t_a, t_b).unwrap();
        let k = |d: &DetectorConfig| key_rate_at_db(&src(n), d, chi, 0.97, db).unwrap().key_rate;
        prop_assert!(k(&unbalanced) <= k(&balanced) + TOL);
    }
}

#[test]
fn key_rate_is_exactly_beta_i_minus_chi() {
    let r = key_rate(
        &src(30.0),
        &ChannelParams::new(0.3, 0.05).unwrap(),
        &det(1e-2),
        0.97,
    )
    .unwrap();
    assert_eq!(r.key_rate, 0.97 * r.i_ab - r.chi_be);
}
