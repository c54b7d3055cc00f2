use oilcheck::pca::{fit_rows, select_from_eigenvalues, PcaModel, PcaRule};
use proptest::prelude::*;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn fit(rows: &[Vec<f64>]) -> PcaModel {
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    fit_rows(&refs).unwrap()
}

fn total_variance(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len() as f64;
    (0..rows[0].len())
        .map(|j| {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1.0)
        })
        .sum()
}

fn rows_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..12, 1usize..8).prop_flat_map(|(n, d)| prop::collection::vec(prop::collection::vec(-5.0f64..5.0, d), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn spectrum_matches_direct_variance(rows in rows_strategy()) {
        let model = fit(&rows);
        let want = total_variance(&rows);
        let got: f64 = model.eigenvalues.iter().sum();
        prop_assert!((got - want).abs() <= 1e-8 * want.max(1e-12), "{} vs {}", got, want);
        prop_assert!(model.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(model.eigenvalues.iter().all(|&e| e > 0.0));
        prop_assert_eq!(model.eigenvalues.len(), model.components.len());
        prop_assert!(model.components.len() <= (rows.len() - 1).min(rows[0].len()));
    }

    #[test]
    fn components_are_orthonormal_with_positive_peak(rows in rows_strategy()) {
        let model = fit(&rows);
        for (i, a) in model.components.iter().enumerate() {
            for (j, b) in model.components.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot(a, b) - want).abs() <= 1e-8);
            }
            let peak = a.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            prop_assert!(peak > 0.0);
        }
    }

    #[test]
    fn full_rank_projection_is_an_isometry(rows in rows_strategy()) {
        let model = fit(&rows);
        let m = model.components.len();
        let projected: Vec<Vec<f64>> = rows.iter().map(|r| model.project(r, m).unwrap()).collect();
        for (x, p) in rows.iter().zip(&projected) {
            // mean + Σ coeff·component
            let mut back = model.mean.clone();
            for (c, comp) in p.iter().zip(&model.components) {
                back.iter_mut().zip(comp).for_each(|(b, v)| *b += c * v);
            }
            let scale = x.iter().map(|v| v.abs()).fold(1.0, f64::max);
            prop_assert!(x.iter().zip(&back).all(|(a, b)| (a - b).abs() <= 1e-8 * scale));
            prop_assert!(x.iter().zip(&model.reconstruct(p)).all(|(a, b)| (a - b).abs() <= 1e-8 * scale));
        }
        for i in 0..rows.len() {
            for j in 0..i {
                let d0: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                let d1: f64 = projected[i].iter().zip(&projected[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                prop_assert!((d0 - d1).abs() <= 1e-8 * d0.max(1.0));
            }
        }
    }

    #[test]
    fn cumulative_ratio_reaches_one(rows in rows_strategy()) {
        let model = fit(&rows);
        let ratios = model.cumulative_ratio();
        prop_assert!(ratios.windows(2).all(|w| w[0] <= w[1] + 1e-15));
        if let Some(last) = ratios.last() {
            prop_assert!((last - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn rank_one_line_has_one_direction() {
    let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
    let model = fit(&rows);
    assert_eq!(model.components.len(), 1);
    let s = 5f64.sqrt();
    assert!((model.components[0][0] - 1.0 / s).abs() < 1e-10);
    assert!((model.components[0][1] - 2.0 / s).abs() < 1e-10);
}

#[test]
fn isotropic_cross_has_equal_spectrum() {
    let rows = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
    let model = fit(&rows);
    assert_eq!(model.eigenvalues.len(), 2);
    assert!((model.eigenvalues[0] - model.eigenvalues[1]).abs() < 1e-12);
    assert!(model.project(&model.mean, 2).unwrap().iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn selection_rules_follow_cumulative_ratio() {
    assert_eq!(select_from_eigenvalues(&[9.0, 1.0], PcaRule::Variance(0.95)), 2);
    assert_eq!(select_from_eigenvalues(&[99.0, 1.0], PcaRule::Variance(0.95)), 1);
    assert_eq!(select_from_eigenvalues(&[3.0, 2.0, 1.0], PcaRule::Positive), 3);
}

#[test]
fn text_round_trip_and_misuse() {
    let rows: Vec<Vec<f64>> = (0..7).map(|i| vec![(i as f64).sin(), (i as f64).cos(), i as f64]).collect();
    let model = fit(&rows);
    assert_eq!(PcaModel::from_text(&model.to_text()).unwrap(), model);
    assert!(model.project(&rows[0], model.components.len() + 1).is_err());
    assert!(model.project(&[1.0], 1).is_err());
    assert!(fit_rows(&[&[1.0, 2.0][..]]).is_err());
}
