// Histogram functions on the line: integrals, weighted norms, level sets.

use weighted_transfer::sampled_line::{distribution_weighted, lp_norm_weighted, Interval, SampledFunction};
use weighted_transfer::weights::Weight;

pub fn run() -> weighted_transfer::Result<()> {
    let h = 1.0 / 256.0;
    let tent = SampledFunction::tent(0.0, 1.0, h)?;
    let mass = tent.integrate(Interval::new(-1.0, 1.0)?);
    println!("tent: {} cells, integral {mass:.6}", tent.len());

    let w = Weight::power(0.5, 0.0)?;
    for p in [1.0, 2.0, 4.0] {
        println!("||tent||_{{L^{p}(|t|^0.5)}} = {:.6}", lp_norm_weighted(&tent, &w, p));
    }
    // w({tent > 1/2}) = ∫_{-1/2}^{1/2} |t|^0.5 dt = 2/3 · 2^{-1/2}
    let level = distribution_weighted(&tent, &w, 0.5);
    println!("w(tent > 1/2) = {level:.6} (exact {:.6})", 2.0 / 3.0 * 0.5f64.sqrt());
    Ok(())
}

#[allow(dead_code)]
fn main() -> weighted_transfer::Result<()> {
    run()
}
