use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use tippingscope::shapefit::{
    allee_threshold, build_basis, eval_spline, fit, ingest_generations, read_dataset, spline_roots, CsvMode,
    GrowthDataset, SplineBasis,
};
use tippingscope::Error;

fn design(basis: &SplineBasis, pts: &[(f64, f64)]) -> (DMatrix<f64>, DVector<f64>) {
    let rows: Vec<Vec<f64>> = pts.iter().map(|&(x, _)| basis.row(x).unwrap()).collect();
    let a = DMatrix::from_fn(pts.len(), basis.len(), |r, c| rows[r][c]);
    (a, DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1)))
}

fn sample(basis: &SplineBasis, alpha: &[f64], n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let x = basis.b * i as f64 / n as f64;
            (x, eval_spline(basis, alpha, x).unwrap()[0])
        })
        .collect()
}

#[test]
fn generations_ingestion_drops_extinct_rows() {
    let csv = "p_t,p_t1\n2,4\n3,0\n1,1\n";
    let data = read_dataset(csv.as_bytes(), CsvMode::Generations).unwrap();
    assert_eq!(data.excluded_rows, 1);
    assert_eq!(data.points.len(), 2);
    assert!((data.points[0].1 - 2.0 * 2f64.ln()).abs() < 1e-15);
    assert_eq!(data.points[1].1, 0.0);
    assert!(matches!(
        ingest_generations(&[(1.0, 2.0), (0.0, 1.0)]),
        Err(Error::NonPositiveCurrentGeneration { row: 1, .. })
    ));
}

#[test]
fn strong_allee_threshold_is_the_middle_root() {
    // θ(x) = x(x-2)(8-x)/10 is convex below 10/3 and concave above
    let basis = build_basis(10.0 / 3.0, 10.0, 4, 4).unwrap();
    let pts: Vec<(f64, f64)> = (1..=150)
        .map(|i| {
            let x = 10.0 * i as f64 / 150.0;
            (x, x * (x - 2.0) * (8.0 - x) / 10.0)
        })
        .collect();
    let f = fit(&basis, &GrowthDataset::direct(pts), 0.0).unwrap();
    let roots = spline_roots(&f);
    assert_eq!(roots.len(), 2, "{roots:?}");
    assert!((allee_threshold(&roots).unwrap() - 2.0).abs() < 1e-3, "{roots:?}");
    assert!((roots[1] - 8.0).abs() < 1e-3);
    assert!(f.value(roots[0]).unwrap().abs() < 1e-9);
}

#[test]
fn too_few_points_is_rank_deficient() {
    let basis = build_basis(3.0, 7.0, 2, 2).unwrap();
    let data = GrowthDataset::direct(vec![(1.0, 0.0), (2.0, 1.0), (4.0, 0.5)]);
    assert!(matches!(fit(&basis, &data, 0.0), Err(Error::RankDeficient { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fit_is_invariant_to_row_order(seed in any::<u64>(), m in 1usize..4, n in 1usize..4) {
        let basis = build_basis(3.0, 7.0, m, n).unwrap();
        let mut pts: Vec<(f64, f64)> = (1..=60).map(|i| {
            let x = 7.0 * i as f64 / 60.0;
            (x, (x - 3.0).sin() + 0.01 * ((i as u64 ^ seed) % 17) as f64)
        }).collect();
        let a = fit(&basis, &GrowthDataset::direct(pts.clone()), 0.0).unwrap();
        // deterministic shuffle
        let mut s = seed | 1;
        for i in (1..pts.len()).rev() {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            pts.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let b = fit(&basis, &GrowthDataset::direct(pts), 0.0).unwrap();
        prop_assert_eq!(a.alpha, b.alpha);
        prop_assert_eq!(a.sse.to_bits(), b.sse.to_bits());
    }

    #[test]
    fn fitted_curve_is_convex_then_concave(seed in any::<u64>(), lb in 0.0f64..0.2) {
        let basis = build_basis(4.0, 9.0, 3, 3).unwrap();
        let pts: Vec<(f64, f64)> = (1..=80).map(|i| {
            let x = 9.0 * i as f64 / 80.0;
            (x, ((seed.wrapping_mul(i as u64 + 7) >> 11) % 1000) as f64 / 500.0 - 1.0)
        }).collect();
        let f = fit(&basis, &GrowthDataset::direct(pts), lb).unwrap();
        prop_assert!(f.alpha[1..].iter().all(|&a| a >= lb - 1e-12));
        for k in 0..=90 {
            let x = 9.0 * k as f64 / 90.0;
            let d2 = f.eval(x).unwrap()[2];
            if x < 4.0 - 1e-9 { prop_assert!(d2 >= -1e-9); }
            if x > 4.0 + 1e-9 { prop_assert!(d2 <= 1e-9); }
        }
    }

    #[test]
    fn kkt_conditions_hold(seed in any::<u64>()) {
        let basis = build_basis(3.0, 8.0, 2, 3).unwrap();
        let pts: Vec<(f64, f64)> = (1..=70).map(|i| {
            let x = 8.0 * i as f64 / 70.0;
            (x, -0.3 * x + (((seed ^ (i as u64 * 2654435761)) % 997) as f64 / 997.0 - 0.5))
        }).collect();
        let f = fit(&basis, &GrowthDataset::direct(pts.clone()), 0.0).unwrap();
        let (a, y) = design(&basis, &pts);
        let alpha = DVector::from_column_slice(&f.alpha);
        let grad = a.transpose() * (&y - &a * &alpha);
        let scale = 1e-8 * (1.0 + a.norm() * y.norm());
        prop_assert!(grad[0].abs() < scale);
        for i in 1..basis.len() {
            if f.active_set.contains(&i) {
                prop_assert!(grad[i] < scale, "bound {} has pull {}", i, grad[i]);
            } else {
                prop_assert!(grad[i].abs() < scale, "free {} has gradient {}", i, grad[i]);
            }
        }
    }

    #[test]
    fn exact_data_is_recovered(a1 in 0.0f64..2.0, a2 in 0.0f64..2.0, a3 in 0.0f64..2.0, a0 in -2.0f64..2.0) {
        let basis = build_basis(3.0, 7.0, 1, 1).unwrap();
        let alpha = vec![a0, a1, a2, a3, 0.5];
        let data = GrowthDataset::direct(sample(&basis, &alpha, 50));
        let f = fit(&basis, &data, 0.0).unwrap();
        for (got, want) in f.alpha.iter().zip(&alpha) {
            prop_assert!((got - want).abs() < 1e-8, "{:?} vs {:?}", f.alpha, alpha);
        }
    }
}
