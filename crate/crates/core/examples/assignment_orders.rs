//! Compares order-1, order-2 and exhaustive assignment for fixed dictionaries.

use gkmeans::assign::assign_all;
use gkmeans::distortion::point_errors;
use gkmeans::init::{init_codes_greedy, init_random};
use gkmeans::synthetic::uniform;
use gkmeans::{AssignOrder, CodeMatrix};

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn main() -> gkmeans::Result<()> {
    let data = uniform(500, 6, 5)?;
    let cb = init_random(&data, 3, 8, 1, true)?;
    let greedy = init_codes_greedy(&data, &cb, AssignOrder::One)?;

    let report = |name: &str, codes: &CodeMatrix| -> gkmeans::Result<()> {
        println!(
            "{name:<11} mean error {:.6}",
            mean(&point_errors(&data, &cb, codes)?)
        );
        Ok(())
    };
    report("greedy", &greedy)?;
    for order in [AssignOrder::One, AssignOrder::Two, AssignOrder::Exhaustive] {
        let codes = assign_all(&data, &cb, &greedy, order, 10)?;
        report(&format!("order {order}"), &codes)?;
    }
    Ok(())
}
