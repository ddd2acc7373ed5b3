use gkmeans::assign::assign_all;
use gkmeans::distortion::total_distortion;
use gkmeans::encode::{decode, encode};
use gkmeans::init::{init_codes_greedy, init_random};
use gkmeans::io::{read_codes, read_fvecs, read_model, write_codes, write_fvecs, write_model};
use gkmeans::synthetic::{mixture, uniform, MixtureSpec};
use gkmeans::trainer::fit;
use gkmeans::{AssignOrder, InitScheme, TrainConfig};

#[test]
fn decode_through_files_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let data = uniform(250, 12, 4).unwrap();
    let cfg = TrainConfig {
        max_outer_iters: 6,
        ..TrainConfig::new(3, 32)
    };
    let (model, _) = fit(&data, &cfg).unwrap();
    let codes = encode(&data, &model, AssignOrder::Two, 10).unwrap();
    let direct = decode(&model, &codes).unwrap();

    write_model(dir.path().join("m"), &model).unwrap();
    write_codes(dir.path().join("c"), &codes).unwrap();
    let m2 = read_model(dir.path().join("m")).unwrap();
    let c2 = read_codes(dir.path().join("c")).unwrap();
    let via_files = decode(&m2, &c2).unwrap();
    assert_eq!(direct.as_slice(), via_files.as_slice());

    write_fvecs(dir.path().join("r.fvecs"), &via_files).unwrap();
    let back = read_fvecs(dir.path().join("r.fvecs")).unwrap();
    let same_bits = back
        .as_slice()
        .iter()
        .zip(direct.as_slice())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    assert!(same_bits);
}

// Per-update monotonicity means refining a start never hurts; O2 starting
// from the O1 fixpoint can only improve on it.
#[test]
fn second_order_refines_first_order_fixpoint() {
    let data = uniform(400, 8, 8).unwrap();
    let cb = init_random(&data, 4, 8, 3, true).unwrap();
    let greedy = init_codes_greedy(&data, &cb, AssignOrder::One).unwrap();
    let o1 = assign_all(&data, &cb, &greedy, AssignOrder::One, 1000).unwrap();
    let o2 = assign_all(&data, &cb, &o1, AssignOrder::Two, 1000).unwrap();
    let e1 = total_distortion(&data, &cb, &o1).unwrap();
    let e2 = total_distortion(&data, &cb, &o2).unwrap();
    assert!(e2 <= e1 + 1e-9 * e1);
    assert!(e2 < e1, "expected a strict improvement on random data");
}

#[test]
fn trained_model_beats_its_initialization() {
    let data = mixture(
        &MixtureSpec {
            points: 800,
            dims: 16,
            ..MixtureSpec::benchmark()
        },
        2,
    )
    .unwrap();
    for init in [
        InitScheme::Random,
        InitScheme::KMeans,
        InitScheme::Hierarchical,
    ] {
        let cfg = TrainConfig {
            init,
            max_outer_iters: 10,
            ..TrainConfig::new(4, 16)
        };
        let (model, report) = fit(&data, &cfg).unwrap();
        let first = report.history[0];
        let last = model.final_distortion().unwrap();
        assert!(last < first, "{init:?}: {first} -> {last}");
        assert!(last > 0.0 && last < 1.0);
    }
}
