mod common;

use oilcheck::dataset::{Dataset, LabelSpace, Scaling};
use oilcheck::synthgen::{generate, GeneratorConfig};
use proptest::prelude::*;

fn space() -> LabelSpace {
    LabelSpace::new(["soybean", "sesame", "palm"]).unwrap()
}

#[test]
fn csv_examples_parse() {
    let text = "id,labels,f0,f1\ns1,soybean:1.0,0.1,0.2\nm1,soybean:0.8|sesame:0.2,0.3,0.4\n";
    let ds = Dataset::read_csv(text.as_bytes(), &space()).unwrap();
    assert_eq!(ds.dim, 2);
    assert_eq!(ds.examples[0].labels, [0].into());
    assert_eq!(ds.examples[1].labels, [0, 1].into());
    assert_eq!(ds.examples[1].ratios.as_ref().unwrap()[&1], 0.2);
    assert_eq!(ds.binary_view().iter().map(|v| v.1).collect::<Vec<_>>(), vec![-1, 1]);
}

#[test]
fn bad_rows_are_refused() {
    let bad = [
        "id,labels,f0\nm1,soybean:0.5|sesame:0.4,0.3\n",
        "id,labels,f0\nm1,olive,0.3\n",
        "id,labels,f0\nm1,soybean,NaN\n",
        "id,labels,f0,f1\nm1,soybean,0.3\n",
    ];
    for text in bad {
        assert!(Dataset::read_csv(text.as_bytes(), &space()).is_err(), "{text}");
    }
}

#[test]
fn scaling_maps_endpoints_and_extrapolates() {
    let ds = common::dataset(&[(vec![0.0, 3.0], vec![0]), (vec![5.0, 3.0], vec![0]), (vec![10.0, 3.0], vec![1])], 2);
    let scaled = ds.scale_to_unit();
    let col: Vec<f64> = scaled.examples.iter().map(|e| e.features[0]).collect();
    assert_eq!(col, vec![-1.0, 0.0, 1.0]);
    assert!(scaled.examples.iter().all(|e| e.features[1] == 0.0));
    let scaling = scaled.scaling.as_ref().unwrap();
    assert_eq!(scaling.apply(&[20.0, 3.0]).unwrap(), vec![3.0, 0.0]);
}

#[test]
fn unlabeled_reader_ignores_labels() {
    let text = "id,labels,f0,f1\na,,1,2\nb,whatever,3,4\n";
    let rows = Dataset::read_unlabeled_csv(text.as_bytes()).unwrap();
    assert_eq!(rows, vec![("a".into(), vec![1.0, 2.0]), ("b".into(), vec![3.0, 4.0])]);
}

#[test]
fn table1_binary_view_counts() {
    let ds = generate(&GeneratorConfig::table1_with_dim(40, 1)).unwrap();
    let signs: Vec<i8> = ds.binary_view().iter().map(|v| v.1).collect();
    assert_eq!(signs.iter().filter(|&&s| s < 0).count(), 246);
    assert_eq!(signs.iter().filter(|&&s| s > 0).count(), 124);
}

fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    (1usize..5).prop_flat_map(|d| {
        prop::collection::vec(
            (prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, d), 0usize..3, prop::option::of(0.05f64..0.95), any::<bool>()),
            1..10,
        )
        .prop_map(|rows| {
            let rows: Vec<(Vec<f64>, Vec<usize>, Option<f64>)> = rows
                .into_iter()
                .map(|(x, a, r, mix)| {
                    let labels = if mix { vec![a, (a + 1) % 3] } else { vec![a] };
                    (x, labels, r)
                })
                .collect();
            rows
        })
    })
    .prop_map(|rows| {
        let examples = rows
            .into_iter()
            .enumerate()
            .map(|(i, (x, labels, r))| {
                let ratios = r.map(|r| {
                    if labels.len() == 2 {
                        [(labels[0], r), (labels[1], 1.0 - r)].into()
                    } else {
                        [(labels[0], 1.0)].into()
                    }
                });
                oilcheck::dataset::Example::new(format!("e{i}"), x, labels.into_iter().collect(), ratios).unwrap()
            })
            .collect();
        Dataset::new(space(), examples).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn csv_round_trip_is_exact(ds in dataset_strategy()) {
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(buf.as_slice(), &space()).unwrap();
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn scaling_is_idempotent_and_bounded(ds in dataset_strategy()) {
        let scaled = ds.scale_to_unit();
        let again = ds.apply_scaling(scaled.scaling.as_ref().unwrap()).unwrap();
        for (a, b) in scaled.examples.iter().zip(&again.examples) {
            prop_assert!(a.features.iter().zip(&b.features).all(|(p, q)| (p - q).abs() <= 1e-12));
            prop_assert!(a.features.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
        prop_assert_eq!(Scaling::fit(&ds).dim(), ds.dim);
        let v = ds.binary_view();
        prop_assert_eq!(v.iter().filter(|p| p.1 > 0).count() + v.iter().filter(|p| p.1 < 0).count(), ds.len());
    }
}
