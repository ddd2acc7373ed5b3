//! Trains a model on the synthetic benchmark and prints the distortion curve.
//!
//! `cargo run --release --example train -- [order] [init]`

use gkmeans::synthetic::{mixture, MixtureSpec};
use gkmeans::trainer::fit;
use gkmeans::{AssignOrder, InitScheme, TrainConfig};

fn main() -> gkmeans::Result<()> {
    let mut args = std::env::args().skip(1);
    let order: AssignOrder = args.next().as_deref().unwrap_or("2").parse()?;
    let init: InitScheme = args.next().as_deref().unwrap_or("hier").parse()?;

    let data = mixture(&MixtureSpec::benchmark(), 7)?;
    let cfg = TrainConfig {
        order,
        init,
        max_outer_iters: 30,
        ..TrainConfig::new(4, 16)
    };
    let (model, report) = fit(&data, &cfg)?;

    for (i, d) in report.history.iter().enumerate() {
        println!("iter {i:>3}  relative distortion {d:.6}");
    }
    if !report.stage_distortions.is_empty() {
        println!("hierarchical stages: {:?}", report.stage_distortions);
    }
    println!(
        "stopped after {} iterations ({}), final {:.6}",
        report.iterations,
        report.reason,
        model.final_distortion().unwrap_or(f64::NAN)
    );
    Ok(())
}
