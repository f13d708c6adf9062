// Irrational flows on the circle and torus: group law and equimeasurability.

use weighted_transfer::flows::{equimeasurability_check, orbit_sample, Flow, Point, SpaceFunction};

pub fn run() -> weighted_transfer::Result<()> {
    let flow = Flow::golden();
    let x = Point::circle(0.125);
    let y = flow.map(0.75, &flow.map(-2.5, &x)?)?;
    println!("U^0.75 U^-2.5 x = {:?}, U^-1.75 x = {:?}", y.coords(), flow.map(-1.75, &x)?.coords());

    let arc = SpaceFunction::arc(0.0, 0.25)?;
    let levels = [0.5];
    for n in [1024usize, 4096] {
        let dev = equimeasurability_check(&flow, &arc, 0.0, 3.7, n, &levels)?;
        println!("n = {n}: level-set deviation {dev:.2e} (budget {:.2e})", 2.0 / n as f64);
    }

    let torus = Flow::torus(2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0)?;
    let g = SpaceFunction::product(SpaceFunction::cosine(1, 1.0, 0.0)?, SpaceFunction::arc(0.0, 0.5)?);
    let trace = orbit_sample(&torus, &g, &Point::torus(0.1, 0.2), 1.0, 0.25, 1.0 / 64.0)?;
    println!("torus orbit trace: {} samples, first {:.6}", trace.values().len(), trace.values()[0]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> weighted_transfer::Result<()> {
    run()
}
