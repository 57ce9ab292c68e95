//! Thresholds of the linear family x' = d·x + cos(t+s) + λ by quadrature,
//! checked against the closed form ±d/√(d²+1).
use tippingscope::bifurcation::{bounded_linear_solution, horizon_for, mu_closed_form_cosine, mu_cosine};

fn main() -> tippingscope::Result<()> {
    for d in [0.05, 0.1, 0.5, 1.0] {
        let q = mu_cosine(d, 100)?;
        let c = mu_closed_form_cosine(d);
        println!(
            "d={d:<5} mu-={:+.12} mu+={:+.12} closed form {:+.12} gap {:.1e}",
            q.mu_minus,
            q.mu_plus,
            c.mu_minus,
            (q.mu_minus - c.mu_minus).abs()
        );
    }

    // the bounded solution at t = 0 is affine in λ and vanishes at λ = -I_c/I_1
    let d = 0.1;
    let h = horizon_for(d);
    for lambda in [-0.2, -0.1, 0.0, 0.1, 0.2] {
        let b = bounded_linear_solution(f64::cos, |_| d, lambda, 0.0, h)?;
        println!(
            "lambda={lambda:+.1} b(0)={:+.10} kernel mass {:.6}",
            b.value, b.kernel_mass
        );
    }
    Ok(())
}
