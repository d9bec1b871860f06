//! Detection-delay metric on a hand-built timeline.

use itta::metrics::{build_curves, icdd, DetectionTimeline};

fn main() -> itta::Result<()> {
    let mut tl = DetectionTimeline::new(10);
    tl.introduce(0, 2);
    tl.introduce(1, 3);
    tl.detect(0, 6)?;
    let curves = build_curves(&tl)?;
    println!("n_gt  {:?}", curves.n_gt);
    println!("n_det {:?}", curves.n_det);
    println!("icdd  {:.3}", icdd(&tl)?);

    tl.detect(1, 3)?;
    println!("icdd after class 1 detected on arrival: {:.3}", icdd(&tl)?);
    Ok(())
}
