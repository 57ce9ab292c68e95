//! Saddle-node values of the split families, and the blow-up alternative
//! just below λ₋.
use tippingscope::bifurcation::{find_lambda_pair, ScanSettings};
use tippingscope::models::{PeriodicModel, Split};
use tippingscope::odeint::{integrate, Status};

fn main() -> tippingscope::Result<()> {
    let scan = ScanSettings::default();
    for g in [0.05, 0.5] {
        let base = PeriodicModel::new(0.1, g, g);
        let pair = find_lambda_pair(&base, [-2.0, 2.0], 1e-6, &scan)?;
        println!(
            "g={g}: lambda- = {:+.7}, lambda+ = {:+.7} (bracket {:.1e})",
            pair.lambda_minus, pair.lambda_plus, pair.bracket_width
        );

        let below = base
            .with_split(Split::ConcaveLinear)
            .with_lambda(pair.lambda_minus - 0.1);
        // cubic escape outruns the minimum step long before |x| = 1e7
        let cfg = scan.poincare.integrator.with_guard(1e4);
        let mut escapes = 0;
        for x0 in [-10.0, -1.0, 0.0, 1.0, 10.0] {
            let fwd = integrate(&below, 0.0, x0, 400.0, &cfg)?;
            let bwd = integrate(&below, 0.0, x0, -400.0, &cfg)?;
            let hit = |s: Status| matches!(s, Status::BlewUp { .. });
            if hit(fwd.status) || hit(bwd.status) {
                escapes += 1;
            }
        }
        println!("  lambda- - 0.1: {escapes}/5 starts escape in finite time");
    }
    Ok(())
}
