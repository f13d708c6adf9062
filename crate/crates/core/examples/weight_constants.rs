// Muckenhoupt constants of line weights.

use weighted_transfer::sampled_line::Interval;
use weighted_transfer::weights::{a1_constant, a_infty_check, ap_constant, default_a_infty_subsets, IntervalFamily, Weight};

pub fn run() -> weighted_transfer::Result<()> {
    let family = IntervalFamily::symmetric(-6, 6)?;
    for alpha in [-0.5, 0.5, 1.5] {
        let w = Weight::power(alpha, 0.0)?;
        let a2 = ap_constant(&w, 2.0, &family).map(|c| format!("{c:.6}"));
        let a1 = a1_constant(&w, &family).map(|c| format!("{c:.6}"));
        println!(
            "|t|^{alpha}: A_2 = {}, A_1 = {}",
            a2.unwrap_or_else(|e| e.to_string()),
            a1.unwrap_or_else(|e| e.to_string())
        );
    }
    // A_2 of |t|^{1/2} on symmetric intervals is 4/3.
    let c = ap_constant(&Weight::power(0.5, 0.0)?, 2.0, &family)?;
    println!("A_2(|t|^0.5) = {c:.9}, exact {:.9}", 4.0 / 3.0);

    let w = Weight::power(0.5, 0.0)?;
    let interval = Interval::new(-1.0, 1.0)?;
    let subsets = default_a_infty_subsets(&w, interval, 0.5, 64, 16, 7)?;
    let est = a_infty_check(&w, interval, 0.5, &subsets)?;
    println!("A_inf on [-1, 1] at delta 1/2: epsilon {:.4}, holds {}", est.epsilon, est.holds);
    Ok(())
}

#[allow(dead_code)]
fn main() -> weighted_transfer::Result<()> {
    run()
}
