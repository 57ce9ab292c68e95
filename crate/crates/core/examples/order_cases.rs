//! The five relative orders of λ₋, λ⁺, μ₋, μ⁺ for d = 0.1.
use std::time::Instant;

use tippingscope::bifurcation::{classify_order, mu_cosine, ScanSettings};
use tippingscope::models::PeriodicModel;

fn main() -> tippingscope::Result<()> {
    let mu = mu_cosine(0.1, 100)?;
    let scan = ScanSettings::default();
    println!("mu- = {:+.8}, mu+ = {:+.8}", mu.mu_minus, mu.mu_plus);
    println!("{:>7} {:>7}  T- at mu+  T+ at mu-  case", "g-", "g+");
    for (gm, gp) in [(0.005, 0.005), (0.05, 0.005), (0.005, 0.05), (0.05, 0.05), (0.5, 0.5)] {
        let start = Instant::now();
        let c = classify_order(&PeriodicModel::new(0.1, gm, gp), &mu, &scan)?;
        println!(
            "{gm:>7} {gp:>7}  {:>9}  {:>9}  {:?} ({:.2}s)",
            c.evidence.minus_at_mu_plus,
            c.evidence.plus_at_mu_minus,
            c.case,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
