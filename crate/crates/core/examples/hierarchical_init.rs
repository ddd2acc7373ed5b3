//! Runs the hierarchical initialization stage by stage and prints each
//! stage objective and the objective across each lift.

use gkmeans::init::init_hierarchical_traced;
use gkmeans::synthetic::{mixture, MixtureSpec};
use gkmeans::{AssignOrder, TrainConfig};

fn main() -> gkmeans::Result<()> {
    let data = mixture(&MixtureSpec::benchmark(), 1)?;
    let energy = data.energy();
    let cfg = TrainConfig {
        order: AssignOrder::Two,
        init_iters: 10,
        ..TrainConfig::new(8, 16)
    };
    let trace = init_hierarchical_traced(&data, 8, 16, &cfg)?;
    for (s, obj) in trace.stage_objectives.iter().enumerate() {
        println!("stage {}: relative distortion {:.6}", s + 1, obj / energy);
        if let Some((before, after)) = trace.lift_objectives.get(s) {
            println!("  lift: {:.12} -> {:.12}", before / energy, after / energy);
        }
    }
    println!(
        "rotation order {}, {} dictionaries",
        trace.final_state.rotation().order(),
        trace.codebooks.num_dicts()
    );
    Ok(())
}
