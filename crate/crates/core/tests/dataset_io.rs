use mhscg::dataset::{
    load_dataset, load_labels, load_matrix_csv, save_dataset, save_labels, save_matrix_csv,
    synth_multiview, validate,
};
use mhscg::Matrix;
use proptest::prelude::*;

fn finite_matrix() -> impl Strategy<Value = Matrix> {
    (1usize..6, 1usize..5).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, r * c)
            .prop_map(move |v| Matrix::from_row_slice(r, c, &v))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrix_csv_round_trips_bit_exact(m in finite_matrix()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        save_matrix_csv(&m, &path).unwrap();
        let back = load_matrix_csv(&path).unwrap();
        prop_assert_eq!(back.shape(), m.shape());
        for (a, b) in m.iter().zip(back.iter()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn labels_round_trip(labels in prop::collection::vec(0usize..50, 1..100)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.csv");
        save_labels(&labels, &path).unwrap();
        prop_assert_eq!(load_labels(&path).unwrap(), labels);
    }

    #[test]
    fn synthetic_data_validates_and_round_trips(
        n_per in 1usize..8,
        k in 2usize..5,
        dims in prop::collection::vec(1usize..5, 1..4),
        seed in any::<u64>(),
    ) {
        let ds = synth_multiview(n_per, k, dims.len(), &dims, 0.7, seed).unwrap();
        prop_assert!(validate(&ds).is_ok());
        let dir = tempfile::tempdir().unwrap();
        let manifest = save_dataset(&ds, dir.path()).unwrap();
        let back = load_dataset(&manifest).unwrap();
        prop_assert_eq!(back, ds);
    }
}

#[test]
fn one_based_labels_are_rebased_on_load() {
    let ds = synth_multiview(3, 2, 1, &[2], 0.1, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = save_dataset(&ds, dir.path()).unwrap();
    let shifted: Vec<usize> = ds.labels.as_ref().unwrap().iter().map(|l| l + 1).collect();
    save_labels(&shifted, dir.path().join("labels.csv")).unwrap();
    let back = load_dataset(&manifest).unwrap();
    assert_eq!(back.labels, ds.labels);
}
