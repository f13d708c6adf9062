// Strong-type constant of the ergodic maximal operator next to its line counterpart.

use weighted_transfer::flows::{stratified_points, Flow, SpaceFunction};
use weighted_transfer::line_operators::LineOperator;
use weighted_transfer::transfer::TransferredOperator;
use weighted_transfer::verify::{
    ergodic_sample, matched_line_baseline, strong_from_sample, transfer_comparison, FunctionFamily, LambdaGrid, Mode,
};

pub fn run() -> weighted_transfer::Result<()> {
    let flow = Flow::golden();
    let t = TransferredOperator::new(LineOperator::maximal_dyadic(-4, 2)?, flow, None, None, Some(1.0 / 256.0))?;
    let family = FunctionFamily::standard(1).take(4)?;
    let w = SpaceFunction::constant(1.0)?;
    let points = stratified_points(&flow, 64);
    let sample = ergodic_sample(&t, &family, &points)?;
    let ergodic = strong_from_sample(&t, &family, &sample, 2.0, &w, &w)?;
    let line = matched_line_baseline(&t, 2.0, &w, &w, &family, &stratified_points(&flow, 4), Mode::Strong, &LambdaGrid::default(), None)?;
    let cmp = transfer_comparison(&line, &ergodic, 0.05)?;
    println!(
        "p = 2: ergodic {:.4}, line {:.4}, slack {:.4}, pass {}",
        ergodic.estimated_constant, line.estimated_constant, cmp.slack, cmp.pass
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> weighted_transfer::Result<()> {
    run()
}
