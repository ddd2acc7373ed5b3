//! Asymmetric-distance search over encoded points, with recall against
//! exact nearest neighbours.

use gkmeans::encode::encode;
use gkmeans::search::{exact_nn, precompute_norms, recall_at, search_batch};
use gkmeans::synthetic::{mixture, MixtureSpec};
use gkmeans::trainer::fit;
use gkmeans::{AssignOrder, TrainConfig};

fn main() -> gkmeans::Result<()> {
    let all = mixture(
        &MixtureSpec {
            points: 2100,
            ..MixtureSpec::benchmark()
        },
        1,
    )?;
    let base = all.select_rows(&(0..2000).collect::<Vec<_>>())?;
    let queries = all.select_rows(&(2000..2100).collect::<Vec<_>>())?;

    let (model, _) = fit(&base, &TrainConfig::new(4, 256))?;
    let codes = encode(&base, &model, AssignOrder::One, 10)?;
    let norms = precompute_norms(&model, &codes)?;
    let rankings = search_batch(&queries, &model, &codes, &norms, 100)?;
    let truth = exact_nn(&queries, &base)?;
    for r in [1, 10, 100] {
        println!("recall@{r}: {:.3}", recall_at(&rankings, &truth, r)?);
    }
    Ok(())
}
