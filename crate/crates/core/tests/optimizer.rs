use brightcv_core::channel::ChannelParams;
use brightcv_core::detector::DetectorConfig;
use brightcv_core::protocols::SourceParams;
use brightcv_core::qkd::{key_rate, optimal_photon_number};
use brightcv_core::search::logspace;

#[test]
fn optimum_agrees_with_dense_grid() {
    let ch = ChannelParams::pure_loss(0.9).unwrap();
    let det = DetectorConfig::with_eps_tot(500, 500, 1e-2, 1.0).unwrap();
    let src = SourceParams::new(1.0, 500, 500).unwrap();
    let (lo, hi) = (1e-2, 1e6);
    let opt = optimal_photon_number(&ch, &det, 0.97, &src, lo, hi).unwrap();
    assert!(opt.unimodal);

    let grid = logspace(lo, hi, 10_000);
    let (n_best, k_best) = grid
        .iter()
        .map(|&n| {
            (
                n,
                key_rate(&src.with_n_bar(n), &ch, &det, 0.97)
                    .unwrap()
                    .key_rate,
            )
        })
        .fold(
            (0.0, f64::NEG_INFINITY),
            |a, b| if b.1 > a.1 { b } else { a },
        );
    let spacing = (hi / lo).ln() / 9_999.0;
    assert!(
        opt.n_bar > lo && opt.n_bar < hi,
        "interior optimum expected, got {}",
        opt.n_bar
    );
    assert!(opt.key_rate >= k_best - 1e-9, "{} < {k_best}", opt.key_rate);
    assert!(
        (opt.n_bar / n_best).ln().abs() <= spacing,
        "{} vs {n_best}",
        opt.n_bar
    );
}

#[test]
fn noiseless_detection_pushes_optimum_to_upper_end() {
    let ch = ChannelParams::pure_loss(0.5).unwrap();
    let src = SourceParams::new(1.0, 1, 0).unwrap();
    let opt = optimal_photon_number(&ch, &DetectorConfig::default(), 1.0, &src, 0.1, 1e3).unwrap();
    assert!((opt.n_bar / 1e3 - 1.0).abs() < 1e-3, "{}", opt.n_bar);
}
