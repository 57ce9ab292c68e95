//! Inflection curve of the Allee-predation field and d-concavity bands.
use tippingscope::bifurcation::{dconcavity_band, dconcavity_band_of, inflection_curve, omega_grid};
use tippingscope::models::{make_decomposition, AlleePredationModel, PeriodicModel, ZeroPivot};

fn main() -> tippingscope::Result<()> {
    let model = AlleePredationModel::default();
    let grid = omega_grid(100);
    let curve = inflection_curve(&model, &grid, 50.0);
    let (lo, hi) = curve
        .samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.y), b.max(s.y)));
    let signs_ok = curve.samples.iter().all(|s| s.h_y > 0.0 && s.h_yyy < 0.0);
    println!(
        "inflection curve on {} angles: y in [{lo:.6}, {hi:.6}], h_y > 0 and h_yyy < 0: {signs_ok}",
        curve.samples.len()
    );

    // band of h_yyy around the inflection curve
    let pivot: Vec<f64> = curve.samples.iter().map(|s| s.y).collect();
    let band = dconcavity_band(
        |w, x| {
            let i = grid.iter().position(|&g| g == w).unwrap();
            model.h(w, pivot[i] + x)[3]
        },
        &grid,
        20.0,
        2000,
    );
    println!(
        "allee band at omega=0: [{:.4}, {:.4}], strict [{:.4}, {:.4}]",
        band.alpha[0], band.beta[0], band.alpha_star[0], band.beta_star[0]
    );

    let dec = make_decomposition(PeriodicModel::new(0.1, 0.05, 0.05), ZeroPivot);
    let band = dconcavity_band_of(&dec, &grid, 20.0);
    println!("periodic band at omega=0: [{}, {}]", band.alpha[0], band.beta[0]);
    Ok(())
}
