// Semilocal operators on the line and their closed forms on an indicator.

use weighted_transfer::line_operators::{check_semilocality, LineOperator};
use weighted_transfer::sampled_line::SampledFunction;

pub fn run() -> weighted_transfer::Result<()> {
    let h = 1.0 / 1024.0;
    let chi = SampledFunction::indicator(0.0, 1.0, h)?;

    let hilbert = LineOperator::hilbert(1.0 / 64.0)?;
    for t in [-1.0f64, 2.0, 3.0] {
        let exact = ((1.0 - t) / t).abs().ln();
        println!("H chi(t = {t}) = {:.9}, closed form {exact:.9}", hilbert.kernel_at(&chi, t));
    }
    let maximal = LineOperator::maximal_dyadic(-6, 4)?;
    println!("M chi(-1) = {:.9} (exactly 1/2)", maximal.kernel_at(&chi, -1.0));

    let square = LineOperator::default_square();
    let out = square.apply(&chi);
    println!("S chi: {} output cells, peak {:.6}", out.len(), out.max_abs());

    for op in [hilbert, maximal, square] {
        println!("{}: radius {}, support grows by {}", op.descriptor(), op.semilocal_radius(), check_semilocality(&op, &chi));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> weighted_transfer::Result<()> {
    run()
}
