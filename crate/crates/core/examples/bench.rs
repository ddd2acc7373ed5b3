//! Encoding time against the number of dictionaries, single-threaded.

use gkmeans::cli::bench_encoding;
use gkmeans::synthetic::uniform;
use gkmeans::AssignOrder;

fn main() -> gkmeans::Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("thread pool");
    pool.install(|| {
        let data = uniform(10_000, 16, 1)?;
        for (order, dicts, sweeps) in [
            (AssignOrder::One, vec![2, 4, 8], 10),
            (AssignOrder::Exhaustive, vec![1, 2, 3], 0),
        ] {
            for row in bench_encoding(&data, &dicts, 8, order, sweeps, 0, 3)? {
                println!(
                    "order {:<10} C={} {:>8.3} us/point  relative distortion {:.4}",
                    order.to_string(),
                    row.num_dicts,
                    row.micros_per_point,
                    row.relative_distortion
                );
            }
        }
        Ok(())
    })
}
