use proptest::prelude::*;
use salem_core::bounds::badness;
use salem_core::fourier::{transform, transform_grid};
use salem_core::measure::{random_measure, AtomicMeasure, Measure, RandomProfile};

fn atoms(dim: usize) -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec((prop::collection::vec(0.0f64..1.0, dim), 0.01f64..1.0), 1..8).prop_map(
        move |pts| {
            let (points, weights): (Vec<_>, Vec<_>) = pts.into_iter().unzip();
            let total: f64 = weights.iter().sum();
            AtomicMeasure::new(points, weights.iter().map(|w| w / total).collect()).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coefficients_are_hermitian_and_bounded(mu in atoms(2), seed in 0u64..1000, pick in 0usize..3) {
        let tables = [
            transform(&Measure::Atomic(mu), 6).unwrap(),
            transform_grid(&random_measure(2, 16, seed, RandomProfile::ALL[pick]).unwrap(), 6).unwrap(),
        ];
        for table in &tables {
            prop_assert!((table.get(&[0, 0]).unwrap().re - 1.0).abs() < 1e-12);
            table.for_each(|xi, c| {
                let neg: Vec<i64> = xi.iter().map(|k| -k).collect();
                let mirror = table.get(&neg).unwrap();
                assert!((c - mirror.conj()).norm() < 1e-12);
                assert!(c.norm() <= 1.0 + 1e-12);
            });
        }
    }

    #[test]
    fn badness_is_monotone_and_periodic(x in 0.0f64..1.0, shift in -5i32..5, q in 1u64..400) {
        let b = badness(&[x], q).unwrap();
        prop_assert!(badness(&[x], q + 37).unwrap() <= b);
        let shifted = badness(&[x + shift as f64], q).unwrap();
        prop_assert!((shifted - b).abs() < 1e-9);
    }
}

#[test]
fn product_measure_factorizes() {
    let a = AtomicMeasure::new(vec![vec![0.1], vec![0.7]], vec![0.25, 0.75]).unwrap();
    let b = AtomicMeasure::new(vec![vec![0.3], vec![0.45], vec![0.9]], vec![0.2, 0.3, 0.5]).unwrap();
    let ta = transform(&Measure::Atomic(a.clone()), 5).unwrap();
    let tb = transform(&Measure::Atomic(b.clone()), 5).unwrap();
    let tab = transform(&Measure::Atomic(a.product(&b)), 5).unwrap();
    tab.for_each(|xi, c| {
        let expected = ta.get(&xi[..1]).unwrap() * tb.get(&xi[1..]).unwrap();
        assert!((c - expected).norm() < 1e-12);
    });
}
