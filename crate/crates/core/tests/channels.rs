use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qpolar::numeric::h2;
use qpolar::{BinaryInputDMC, ChannelKind, QuantumChannelSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid() -> impl Iterator<Item = f64> {
    (0..50).map(|i| i as f64 / 49.0)
}

#[test]
fn coherent_information_identity_on_grids() {
    for kind in [ChannelKind::Erasure, ChannelKind::Depolarizing, ChannelKind::Bb84] {
        for x in grid() {
            let spec = QuantumChannelSpec::new(kind, x).unwrap();
            let sum = spec.induced_amplitude().symmetric_capacity() + spec.induced_phase().symmetric_capacity();
            let expected = match kind {
                ChannelKind::Erasure => 1.0 - 2.0 * x,
                ChannelKind::Depolarizing => 1.0 - h2(x) - x * 3f64.log2(),
                ChannelKind::Bb84 => 1.0 - 2.0 * h2(x),
            };
            assert_abs_diff_eq!(sum - 1.0, expected, epsilon = 1e-9);
            assert_abs_diff_eq!(spec.reference_rate(), expected, epsilon = 1e-12);
        }
    }
}

#[test]
fn depolarizing_phase_beats_amplitude() {
    for i in 1..=12 {
        let p = 0.02 * i as f64;
        let spec = QuantumChannelSpec::depolarizing(p).unwrap();
        let (a, f) = (spec.induced_amplitude().symmetric_capacity(), spec.induced_phase().symmetric_capacity());
        assert!(f > a, "p={p}: phase {f} vs amplitude {a}");
    }
}

#[test]
fn sampling_frequencies_follow_rows() {
    let ch = BinaryInputDMC::depolarizing_phase(0.12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let draws = 200_000;
    for x in 0..2u8 {
        let mut counts = vec![0u64; ch.alphabet_size()];
        for _ in 0..draws {
            counts[ch.sample(x, &mut rng).0] += 1;
        }
        for (c, p) in counts.iter().zip(ch.row(x)) {
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((*c as f64 / draws as f64 - p).abs() <= 5.0 * sigma + 1e-12, "x={x} {counts:?}");
        }
    }
}

proptest! {
    #[test]
    fn capacity_and_bhattacharyya_in_unit_interval(kind in 0usize..3, x in 0.0f64..=1.0) {
        let kind = [ChannelKind::Erasure, ChannelKind::Depolarizing, ChannelKind::Bb84][kind];
        let spec = QuantumChannelSpec::new(kind, x).unwrap();
        for ch in [spec.induced_amplitude(), spec.induced_phase()] {
            let i = ch.symmetric_capacity();
            let z = ch.bhattacharyya();
            prop_assert!((0.0..=1.0).contains(&i));
            prop_assert!((0.0..=1.0 + 1e-12).contains(&z));
        }
    }

    #[test]
    fn bsc_capacity_is_one_minus_entropy(d in 0.0f64..=1.0) {
        let ch = BinaryInputDMC::bsc(d).unwrap();
        prop_assert!((ch.symmetric_capacity() - (1.0 - h2(d))).abs() < 1e-12);
    }
}
