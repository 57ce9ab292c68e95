//! Dense output and blow-up detection of the adaptive integrator.
use tippingscope::models::PeriodicModel;
use tippingscope::odeint::{integrate, FnField, IntegratorConfig, Status};

fn main() -> tippingscope::Result<()> {
    let cfg = IntegratorConfig::default();

    // x' = -x from x(0) = 1
    let decay = FnField::new(|_t: f64, x: f64| -x, |_t: f64, _x: f64| -1.0);
    let traj = integrate(&decay, 0.0, 1.0, 5.0, &cfg)?;
    for t in [0.5, 1.0, 2.5, 5.0] {
        let x = traj.sample(t)?;
        println!("t={t:<4} x={x:.15} error={:.1e}", (x - (-t).exp()).abs());
    }
    println!("{} accepted steps", traj.segments().len());

    // x' = x^2 escapes at t = 1/x0
    let riccati = FnField::new(|_t: f64, x: f64| x * x, |_t: f64, x: f64| 2.0 * x);
    let traj = integrate(&riccati, 0.0, 2.0, 1.0, &cfg)?;
    if let Status::BlewUp { t_escape, direction } = traj.status {
        println!("x' = x^2, x(0)=2: escaped to {direction:?} at t={t_escape:.6} (exact 0.5)");
    }

    // a periodic orbit of the concave-convex family, integrated backward
    let model = PeriodicModel::new(0.1, 0.05, 0.05);
    let back = integrate(&model, 0.0, 0.0, -20.0, &cfg)?;
    println!("backward run status: {:?}, x(-20) = {:.6}", back.status, back.x_last());
    Ok(())
}
