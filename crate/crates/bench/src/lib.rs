//! Shared inputs for the pipeline benchmarks.

use witness_tda::{delay_embed, suggest_tau, synthesize, DelayParams, PointCloud, ToneKind, ToneSpec};

/// Delay reconstruction of a noisy piano-like C4, peak-normalized and cut
/// to `points` points.
pub fn piano_cloud(points: usize) -> PointCloud {
    let freq = 261.62;
    let spec = ToneSpec::new(ToneKind::PianoLike, freq, 0.1, 44100.0).with_noise(0.01, 5);
    let ts = synthesize(&spec).expect("valid tone").peak_normalized();
    let tau = suggest_tau(44100.0, freq).expect("valid delay");
    delay_embed(&ts, DelayParams::new(tau, 2).expect("valid params"))
        .expect("long enough")
        .truncated(points)
}
