//! Concave-convex spline fit of noisy strong-Allee growth data.
use tippingscope::shapefit::{allee_threshold, build_basis, fit, spline_roots, GrowthDataset};

fn main() -> tippingscope::Result<()> {
    // θ(x) = x(x-2)(8-x)/10: convex below 10/3, concave above, roots 0, 2, 8
    let truth = |x: f64| x * (x - 2.0) * (8.0 - x) / 10.0;
    // deterministic ±0.05 wiggle in place of noise
    let points: Vec<(f64, f64)> = (1..=200)
        .map(|i| {
            let x = 10.0 * i as f64 / 200.0;
            (x, truth(x) + 0.05 * (7.0 * i as f64).sin())
        })
        .collect();
    let data = GrowthDataset::direct(points);

    let basis = build_basis(10.0 / 3.0, 10.0, 4, 4)?;
    let f = fit(&basis, &data, 0.0)?;
    println!(
        "sse {:.5} over {} points, active set {:?}",
        f.sse,
        data.points.len(),
        f.active_set
    );
    let roots = spline_roots(&f);
    println!("roots in (0, b]: {roots:?}");
    println!("Allee threshold: {:?} (true 2)", allee_threshold(&roots));
    for x in [1.0, 3.0, 5.0, 9.0] {
        println!("theta({x}) = {:+.4} (true {:+.4})", f.value(x)?, truth(x));
    }
    Ok(())
}
