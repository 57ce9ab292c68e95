//! Fixed points and shape of the period maps of the split families.
use tippingscope::models::{PeriodicModel, Split};
use tippingscope::poincare::{find_fixed_points, second_differences, PoincareConfig};
use tippingscope::roots::linspace;

fn main() -> tippingscope::Result<()> {
    let cfg = PoincareConfig::default();
    let base = PeriodicModel::new(0.1, 0.005, 0.005);
    for (name, split, lambda) in [
        ("concave-linear", Split::ConcaveLinear, -0.0995),
        ("linear-convex", Split::LinearConvex, 0.0995),
        ("full", Split::Full, 0.0),
    ] {
        let model = base.with_split(split).with_lambda(lambda);
        let set = find_fixed_points(&model, [-30.0, 30.0], 200, &cfg)?;
        println!("{name} at lambda={lambda}: {:?}", set.count);
        for p in &set.points {
            println!("  x*={:+.9} multiplier {:.6} {:?}", p.x_star, p.multiplier, p.stability);
        }
        let d2 = second_differences(&model, &linspace(-5.0, 5.0, 200), &cfg.integrator)?;
        let (lo, hi) = d2.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(_, v)| {
            (a.min(v), b.max(v))
        });
        println!("  second differences in [{lo:.3e}, {hi:.3e}]");
    }
    Ok(())
}
