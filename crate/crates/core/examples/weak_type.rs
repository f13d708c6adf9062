// Weak-type (1,1) level-set ratios of the ergodic maximal operator.

use weighted_transfer::flows::{stratified_points, Flow, SpaceFunction};
use weighted_transfer::line_operators::LineOperator;
use weighted_transfer::transfer::TransferredOperator;
use weighted_transfer::verify::{estimate_weak_constant, FunctionFamily, LambdaGrid, Mode};

pub fn run() -> weighted_transfer::Result<()> {
    let flow = Flow::golden();
    let t = TransferredOperator::new(LineOperator::maximal_dyadic(-4, 2)?, flow, None, None, Some(1.0 / 256.0))?;
    let family = FunctionFamily::standard(3).take(3)?;
    let w = SpaceFunction::constant(1.0)?;
    let lambda = LambdaGrid::Relative { lo_log2: -6.0, points: 12 };
    for mode in [Mode::WeakTwoSided, Mode::WeakLeftOnly] {
        let r = estimate_weak_constant(&t, 1.0, &w, &lambda, &family, &stratified_points(&flow, 64), mode)?;
        for fr in &r.per_function_ratios {
            println!("{} {}: {:.4} at lambda {:?}", mode.name(), fr.id, fr.ratio, fr.lambda);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> weighted_transfer::Result<()> {
    run()
}
