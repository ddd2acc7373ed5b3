//! Plain Lloyd k-means, and the same run through the multi-dictionary
//! trainer with a single dictionary.

use gkmeans::lloyd::kmeans_fit;
use gkmeans::synthetic::uniform;
use gkmeans::trainer::fit;
use gkmeans::{AssignOrder, InitScheme, TrainConfig};

fn main() -> gkmeans::Result<()> {
    let data = uniform(2000, 8, 3)?;
    let lloyd = kmeans_fit(&data, 32, 20, 11)?;
    println!("lloyd: {} iterations", lloyd.history.len() - 1);
    println!("lloyd sse: {:.4}", lloyd.history.last().unwrap());

    let cfg = TrainConfig {
        order: AssignOrder::One,
        init: InitScheme::KMeans,
        init_iters: 0,
        ridge: 0.0,
        rel_tol: 0.0,
        max_outer_iters: 20,
        seed: 11,
        ..TrainConfig::new(1, 32)
    };
    let (model, _) = fit(&data, &cfg)?;
    let sse = model.final_distortion().unwrap() * data.energy();
    println!("single-dictionary trainer sse: {sse:.4}");
    Ok(())
}
