//! Writes and reads back vectors, a model and codes in a temporary directory.

use gkmeans::encode::encode;
use gkmeans::io::{read_codes, read_fvecs, read_model, write_codes, write_fvecs, write_model};
use gkmeans::synthetic::uniform;
use gkmeans::trainer::fit;
use gkmeans::{AssignOrder, TrainConfig};

fn main() -> gkmeans::Result<()> {
    let dir = std::env::temp_dir().join(format!("gkm-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;

    let data = uniform(300, 8, 1)?;
    write_fvecs(dir.join("data.fvecs"), &data)?;
    assert_eq!(read_fvecs(dir.join("data.fvecs"))?, data);

    let cfg = TrainConfig {
        max_outer_iters: 5,
        ..TrainConfig::new(2, 16)
    };
    let (model, _) = fit(&data, &cfg)?;
    write_model(dir.join("model.gkm"), &model)?;
    let loaded = read_model(dir.join("model.gkm"))?;
    assert_eq!(loaded, model);

    let codes = encode(&data, &loaded, AssignOrder::One, 10)?;
    write_codes(dir.join("codes.gkc"), &codes)?;
    assert_eq!(read_codes(dir.join("codes.gkc"))?, codes);

    for name in ["data.fvecs", "model.gkm", "codes.gkc"] {
        let len = std::fs::metadata(dir.join(name))?.len();
        println!("{name:<11} {len:>6} bytes");
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
