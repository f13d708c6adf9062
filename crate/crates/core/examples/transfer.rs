// Transferred operators against direct ergodic formulas.

use weighted_transfer::flows::{stratified_points, Flow, SpaceFunction};
use weighted_transfer::line_operators::{LineOperator, WindowOrientation};
use weighted_transfer::transfer::{ergodic_hilbert, ergodic_maximal, ergodic_square, TransferredOperator};

pub fn run() -> weighted_transfer::Result<()> {
    let flow = Flow::golden();
    let h = 1.0 / 1024.0;
    let f = SpaceFunction::arc(0.0, 0.125)?;
    let points = stratified_points(&flow, 8);

    let radii: Vec<f64> = (-6..=4).map(|k| 2f64.powi(k)).collect();
    let max_t = TransferredOperator::new(LineOperator::maximal_dyadic(-6, 4)?, flow, None, None, Some(h))?;
    let hil_t = TransferredOperator::new(LineOperator::hilbert(1.0 / 64.0)?, flow, None, None, Some(h))?;
    let sq_t = TransferredOperator::new(
        LineOperator::square_oriented(-6, 4, WindowOrientation::Forward)?,
        flow,
        None,
        None,
        Some(h),
    )?;
    let mut worst = 0.0f64;
    for x in &points {
        let pairs = [
            (max_t.apply(&f, x)?, ergodic_maximal(&flow, &f, x, &radii, h)?),
            (hil_t.apply(&f, x)?, ergodic_hilbert(&flow, &f, x, 1.0 / 64.0, h)?),
            (sq_t.apply(&f, x)?, ergodic_square(&flow, &f, x, -6, 4, h)?),
        ];
        for (a, b) in pairs {
            worst = worst.max((a - b).abs());
        }
    }
    println!("max |transferred - direct| over {} points: {worst:e}", points.len());
    println!("truncation a = {}, pad = {}", max_t.truncation_a(), max_t.pad());
    Ok(())
}

#[allow(dead_code)]
fn main() -> weighted_transfer::Result<()> {
    run()
}
