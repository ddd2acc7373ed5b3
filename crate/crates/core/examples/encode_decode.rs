//! Encodes held-out vectors with a trained model and decodes them back.

use gkmeans::encode::{decode, encode};
use gkmeans::synthetic::{mixture, MixtureSpec};
use gkmeans::trainer::fit;
use gkmeans::{relative_distortion, AssignOrder, TrainConfig};

fn main() -> gkmeans::Result<()> {
    let all = mixture(
        &MixtureSpec {
            points: 2500,
            ..MixtureSpec::benchmark()
        },
        1,
    )?;
    let train = all.select_rows(&(0..2000).collect::<Vec<_>>())?;
    let test = all.select_rows(&(2000..2500).collect::<Vec<_>>())?;

    let (model, _) = fit(&train, &TrainConfig::new(4, 64))?;
    for sweeps in [0, 1, 10] {
        let codes = encode(&test, &model, AssignOrder::One, sweeps)?;
        println!(
            "sweeps {sweeps:>2}: held-out relative distortion {:.6}",
            relative_distortion(&test, &model.codebooks, &codes)?
        );
    }
    let codes = encode(&test, &model, AssignOrder::Two, 10)?;
    let recon = decode(&model, &codes)?;
    println!("codes for point 0: {:?}", codes.row(0));
    println!("point 0:   {:?}", &test.row(0)[..4]);
    println!("decoded 0: {:?}", &recon.row(0)[..4]);
    Ok(())
}
