use lnmusic_core::rosm::{optimize_for_signal, srp, ProbeMode};
use lnmusic_core::scene::incident_signal;
use lnmusic_core::{NoiseConfig, RisControlMatrix, RosmConfig, SceneConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mean clean SRP of the chosen matrix over that of an independent random
/// matrix, pooled over 100 seeds.
fn power_gain(probe: ProbeMode, snr_db: f64) -> f64 {
    let (mut chosen, mut random) = (0.0, 0.0);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let mut scene = SceneConfig::default();
        scene.randomize_source_phases(&mut rng);
        let z = incident_signal(&scene);
        let cfg = RosmConfig {
            seed,
            probe,
            ..RosmConfig::default()
        };
        let noise = NoiseConfig {
            snr_db,
            seed,
            ..NoiseConfig::default()
        };
        let out = optimize_for_signal(&z, scene.slots, &cfg, &noise).unwrap();
        chosen += srp(&out.g.measure(&z).unwrap());
        let g = RisControlMatrix::random(&mut rng, scene.slots, scene.elements);
        random += srp(&g.measure(&z).unwrap());
    }
    chosen / random
}

// Reference values from an independent simulation of the same selection rule
// (20000 seeds); the bands are three standard deviations of a 100-seed estimate.

#[test]
fn noisy_probes_at_zero_db_barely_beat_random() {
    let gain = power_gain(ProbeMode::Noisy, 0.0);
    assert!((gain - 1.0046).abs() <= 3.0 * 0.0121, "{gain}");
}

#[test]
fn noisy_probes_gain_power_as_snr_rises() {
    let gain = power_gain(ProbeMode::Noisy, 10.0);
    assert!((gain - 1.0319).abs() <= 3.0 * 0.0118, "{gain}");
    let gain = power_gain(ProbeMode::Noisy, 20.0);
    assert!((gain - 1.1671).abs() <= 3.0 * 0.0119, "{gain}");
}

#[test]
fn noiseless_probes_pick_the_strongest_candidate() {
    let gain = power_gain(ProbeMode::Noiseless, 0.0);
    assert!((gain - 1.2133).abs() <= 3.0 * 0.0114, "{gain}");
}
