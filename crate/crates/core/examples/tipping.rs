//! Tracking versus tipping in the transition equation, located by
//! bisection in ρ at a desk-sized horizon.
use std::time::Instant;

use tippingscope::models::{AlleePredationModel, DriverOrbit, TransitionModel};
use tippingscope::transition::{classify_run, future_fold, locate_tipping, past_limits, TransitionConfig};

fn main() -> tippingscope::Result<()> {
    let model = TransitionModel::new(AlleePredationModel::default(), DriverOrbit::default(), 0.0);
    let cfg = TransitionConfig::default();
    let past = past_limits(&model)?;
    println!("past equilibria: {:?}", past.roots);

    for rho in [0.0, 0.28, 0.4] {
        let run = classify_run(&model.with_rho(rho), 1e5, 1e-3, &cfg)?;
        println!(
            "rho={rho}: {:?}, u={:.6} at t={:.1}",
            run.class, run.upper, run.t_decided
        );
    }

    let start = Instant::now();
    let report = locate_tipping(&model, 0.0, 1.0, 1e-3, 1e5, 1e-3, &cfg)?;
    println!(
        "tipping bracket [{:.6}, {:.6}] after {} probes ({:.1}s)",
        report.bracket[0],
        report.bracket[1],
        report.rho_values.len(),
        start.elapsed().as_secs_f64()
    );
    println!(
        "fold of the future equation at rho = {:.7}",
        future_fold(&model, [0.0, 10.0], 1e-10)?
    );
    Ok(())
}
