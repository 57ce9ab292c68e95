//! Root count and concavity classes of the frozen Allee-predation field
//! over the (K, Δ) plane, with the driver orbit drawn on top.
use std::time::Instant;

use tippingscope::bifurcation::{classify_region, region_map, REGION_GRID};
use tippingscope::models::AlleePredationModel;

fn main() -> tippingscope::Result<()> {
    let model = AlleePredationModel::default();
    let center = classify_region(|y| model.at(39.3, 39.2).derivs(y), [0.0, 60.0], REGION_GRID);
    println!("(K, Delta) = (39.3, 39.2): {center:?}");

    let start = Instant::now();
    let map = region_map(&model, [38.3, 40.3], [38.2, 40.2], 100, 100, [0.0, 60.0]);
    println!("100x100 map in {:.2}s", start.elapsed().as_secs_f64());

    let mut on_circle = 0;
    let mut same = 0;
    for i in 0..360 {
        let th = (i as f64).to_radians();
        let c = map.class_at(39.3 + th.cos(), 39.2 + th.sin());
        on_circle += 1;
        if c.n_roots == center.n_roots && c.concave_convex == center.concave_convex && c.d_concave == center.d_concave {
            same += 1;
        }
    }
    println!("{same}/{on_circle} points of the driver orbit share the center class");
    Ok(())
}
