//! Approximates the indicator of a ball outside the unit ball and checks
//! the reported error against an independent distance computation.

use qpfourier::{approximate, Ball, HaarMeasure, PAdicApprox, Prime, StepFunction};

fn main() -> qpfourier::Result<()> {
    let p = Prime::new(3)?;

    // Indicator of the ball 1/3 + 3 Z_3, which lies inside the single
    // unit-ball coset 1/3 + Z_3.
    let center = PAdicApprox::parse_rational("1/3", p, 1)?;
    let f = StepFunction::indicator(&Ball::new(1, &center)?);

    let (phi, report) = approximate(&f, 16)?;
    println!("cosets touched:  {}", report.t);
    println!(
        "total L2 error:  {} (guaranteed < {})",
        report.total_error,
        report.bound.unwrap()
    );
    println!("levels used:     {:?}", report.k_used);

    let measure = HaarMeasure::normalized(p);
    println!("recomputed:      {}", measure.l2_distance(&f, &phi)?);
    Ok(())
}
