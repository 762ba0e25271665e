//! Standalone closed forms for a two-mode squeezed vacuum behind pure loss,
//! written without any of the library's matrix machinery.

use brightcv_core::channel::ChannelParams;
use brightcv_core::detector::DetectorConfig;
use brightcv_core::protocols::SourceParams;
use brightcv_core::qkd::key_rate;

fn g(nu: f64) -> f64 {
    if nu <= 1.0 {
        return 0.0;
    }
    let (u, d) = ((nu + 1.0) / 2.0, (nu - 1.0) / 2.0);
    u * u.log2() - d * d.log2()
}

/// Eve's mode is the beamsplitter's second output: variance `(1−η)V + η`.
/// Alice conditioned on Bob's x keeps `V` in p and `V − c²/B` in x.
fn pure_loss_reference(v: f64, eta: f64) -> (f64, f64) {
    let b = eta * v + 1.0 - eta;
    let c2 = eta * (v * v - 1.0);
    let i_ab = 0.5 * (b / (b - c2 / v)).log2();
    let chi = g((1.0 - eta) * v + eta) - g((v * (v - c2 / b)).sqrt());
    (i_ab, chi)
}

#[test]
fn matches_independent_pure_loss_formulas() {
    let det = DetectorConfig::default();
    for &n_bar in &[0.1, 1.0, 4.5, 10.0, 100.0, 1e3] {
        for &eta in &[1.0, 0.9, 0.5, 0.1, 1e-3, 1e-6] {
            let s = SourceParams::new(n_bar, 1, 0).unwrap();
            let r = key_rate(&s, &ChannelParams::pure_loss(eta).unwrap(), &det, 1.0).unwrap();
            let (i_ab, chi) = pure_loss_reference(2.0 * n_bar + 1.0, eta);
            let tol = 1e-9 * (1.0 + i_ab.abs());
            assert!(
                (r.i_ab - i_ab).abs() < tol,
                "I_AB n={n_bar} η={eta}: {} vs {i_ab}",
                r.i_ab
            );
            assert!(
                (r.chi_be - chi).abs() < 1e-8 * (1.0 + chi),
                "χ_BE n={n_bar} η={eta}: {} vs {chi}",
                r.chi_be
            );
        }
    }
}
