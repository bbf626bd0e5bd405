use statrs::distribution::{ChiSquared, ContinuousCDF};
use tempobench::classifiers::{train_predict, ClassifierKind, ClassifierSpec};
use tempobench::series::accuracy;
use tempobench::synth::{self, SynthKind, SynthSpec};
use tempobench::transforms::{augment_dataset, AugmentSpec};
use tempobench::SplitDataset;

fn test_accuracy(kind: ClassifierKind, ds: &SplitDataset) -> f64 {
    let preds = train_predict(&ClassifierSpec::new(kind), &ds.train, &ds.test).unwrap();
    accuracy(&preds, &ds.test_labels()).unwrap()
}

#[test]
fn temporal_offsets_are_uniform() {
    let spec = SynthSpec::new(SynthKind::Temporal, 0);
    let bins = spec.n - spec.width + 1;
    let mut counts = vec![0usize; bins];
    for i in 0..2000 {
        counts[spec.pattern_offset("train", i)] += 1;
    }
    let expected = 2000.0 / bins as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(chi2);
    assert!(p > 0.01, "chi2 p = {p}");
}

#[test]
fn no_amplitude_means_chance_accuracy() {
    for kind in [SynthKind::Positional, SynthKind::Temporal, SynthKind::Aligned] {
        let mut spec = SynthSpec::new(kind, 3);
        spec.amplitude = 0.0;
        let ds = synth::generate(&spec).unwrap();
        let acc = test_accuracy(ClassifierKind::Nn1Euclid, &ds);
        assert!((acc - 0.5).abs() <= 0.15, "{kind}: {acc}");
    }
}

#[test]
fn padded_aligned_pattern_moves_with_head_length() {
    let spec = SynthSpec::new(SynthKind::Aligned, 5);
    let ds = synth::generate(&spec).unwrap();
    let (aug, rec) = augment_dataset(&ds, &AugmentSpec::new(0.5, 9)).unwrap();
    let centre = (spec.n - spec.width) / 2;
    for ((orig, out), pad) in ds.train.iter().zip(&aug.train).zip(&rec.train) {
        let start = pad.n_h + centre;
        assert_eq!(
            &out.series.values()[start..start + spec.width],
            &orig.series.values()[centre..centre + spec.width]
        );
    }
}

#[test]
fn interval_classifier_on_aligned_defaults() {
    let ds = synth::gen_aligned(&SynthSpec::new(SynthKind::Aligned, 0)).unwrap();
    let acc = test_accuracy(ClassifierKind::Interval, &ds);
    assert!(acc >= 0.9, "interval accuracy {acc}");
}

#[test]
fn dtw_on_temporal_defaults() {
    let ds = synth::gen_temporal(&SynthSpec::new(SynthKind::Temporal, 0)).unwrap();
    let acc = test_accuracy(ClassifierKind::Nn1Dtw, &ds);
    assert!(acc >= 0.9, "nn1_dtw accuracy {acc}");
}

#[test]
fn euclid_on_positional_defaults() {
    let ds = synth::gen_positional(&SynthSpec::new(SynthKind::Positional, 0)).unwrap();
    let acc = test_accuracy(ClassifierKind::Nn1Euclid, &ds);
    assert!(acc >= 0.9, "nn1_euclid accuracy {acc}");
}
