use std::ffi::{CStr, CString};
use std::ptr;

use mhscg_ffi::*;

fn last_error() -> String {
    let p = mhscg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn synth(k: usize, dims: &[usize], seed: u64) -> *mut MhscgDataset {
    let mut ds = ptr::null_mut();
    let st = unsafe { mhscg_dataset_synth(12, k, dims.as_ptr(), dims.len(), 0.4, seed, &mut ds) };
    assert_eq!(st, MhscgStatus::Ok);
    ds
}

fn quick() -> MhscgOptions {
    MhscgOptions {
        kmeans_restarts: 4,
        ..mhscg_options_default()
    }
}

fn labels_of(res: *const MhscgResult) -> Vec<usize> {
    let mut n = 0;
    assert_eq!(
        unsafe { mhscg_result_n_samples(res, &mut n) },
        MhscgStatus::Ok
    );
    let mut labels = vec![usize::MAX; n];
    assert_eq!(
        unsafe { mhscg_result_labels(res, labels.as_mut_ptr(), n) },
        MhscgStatus::Ok
    );
    labels
}

#[test]
fn synthetic_round_trip() {
    let ds = synth(3, &[3, 5], 1);
    let (mut n, mut r) = (0, 0);
    unsafe {
        assert_eq!(mhscg_dataset_n_samples(ds, &mut n), MhscgStatus::Ok);
        assert_eq!(mhscg_dataset_n_views(ds, &mut r), MhscgStatus::Ok);
    }
    assert_eq!((n, r), (36, 2));

    let opts = quick();
    let mut res = ptr::null_mut();
    assert_eq!(
        unsafe { mhscg_cluster(ds, &opts, &mut res) },
        MhscgStatus::Ok
    );
    let labels = labels_of(res);
    assert!(labels.iter().all(|&l| l < 3));

    let mut iters = 0;
    let mut m = MhscgMetrics::default();
    unsafe {
        assert_eq!(mhscg_result_iterations(res, &mut iters), MhscgStatus::Ok);
        assert_eq!(mhscg_result_metrics(res, &mut m), MhscgStatus::Ok);
    }
    assert!(iters >= 1);
    assert!(m.acc.mean > 0.9);
    assert_eq!(m.runs, 1);

    let mut again = ptr::null_mut();
    assert_eq!(
        unsafe { mhscg_cluster(ds, &opts, &mut again) },
        MhscgStatus::Ok
    );
    assert_eq!(labels_of(again), labels);

    unsafe {
        mhscg_result_free(res);
        mhscg_result_free(again);
        mhscg_dataset_free(ds);
    }
}

#[test]
fn dataset_builder() {
    let mut ds = ptr::null_mut();
    assert_eq!(unsafe { mhscg_dataset_new(2, &mut ds) }, MhscgStatus::Ok);
    // two tight groups on a line, row-major 8×1 and 8×2
    let a = [0.0, 0.1, 0.2, 0.3, 10.0, 10.1, 10.2, 10.3];
    let b: Vec<f64> = a.iter().flat_map(|&x| [x, -x]).collect();
    let truth: Vec<usize> = (0..8).map(|i| i / 4).collect();
    unsafe {
        assert_eq!(
            mhscg_dataset_add_view(ds, a.as_ptr(), 8, 1),
            MhscgStatus::Ok
        );
        assert_eq!(
            mhscg_dataset_add_view(ds, b.as_ptr(), 8, 2),
            MhscgStatus::Ok
        );
        assert_eq!(
            mhscg_dataset_add_view(ds, b.as_ptr(), 4, 2),
            MhscgStatus::InvalidArgument
        );
        assert_eq!(
            mhscg_dataset_set_labels(ds, truth.as_ptr(), 8),
            MhscgStatus::Ok
        );
    }
    let opts = MhscgOptions {
        sigma: 3,
        ..quick()
    };
    let mut res = ptr::null_mut();
    assert_eq!(
        unsafe { mhscg_cluster(ds, &opts, &mut res) },
        MhscgStatus::Ok
    );
    let mut m = MhscgMetrics::default();
    assert_eq!(
        unsafe { mhscg_result_metrics(res, &mut m) },
        MhscgStatus::Ok
    );
    assert_eq!(m.acc.mean, 1.0);
    unsafe {
        mhscg_result_free(res);
        mhscg_dataset_free(ds);
    }
}

#[test]
fn hsc_and_unlabeled_results() {
    let ds = synth(2, &[2, 2, 3], 3);
    let opts = MhscgOptions {
        method: MhscgMethod::Hsc as u32,
        ..quick()
    };
    let mut res = ptr::null_mut();
    assert_eq!(
        unsafe { mhscg_cluster(ds, &opts, &mut res) },
        MhscgStatus::Ok
    );
    let mut iters = 99;
    assert_eq!(
        unsafe { mhscg_result_iterations(res, &mut iters) },
        MhscgStatus::Ok
    );
    assert_eq!(iters, 0);
    unsafe { mhscg_result_free(res) };

    let mut empty = ptr::null_mut();
    assert_eq!(unsafe { mhscg_dataset_new(2, &mut empty) }, MhscgStatus::Ok);
    let v = [0.0, 1.0, 2.0, 10.0, 11.0, 12.0];
    assert_eq!(
        unsafe { mhscg_dataset_add_view(empty, v.as_ptr(), 6, 1) },
        MhscgStatus::Ok
    );
    let mut res = ptr::null_mut();
    let opts = MhscgOptions {
        sigma: 2,
        ..quick()
    };
    assert_eq!(
        unsafe { mhscg_cluster(empty, &opts, &mut res) },
        MhscgStatus::Ok
    );
    let mut m = MhscgMetrics::default();
    assert_eq!(
        unsafe { mhscg_result_metrics(res, &mut m) },
        MhscgStatus::InvalidArgument
    );
    assert!(last_error().contains("labels"));
    unsafe {
        mhscg_result_free(res);
        mhscg_dataset_free(empty);
        mhscg_dataset_free(ds);
    }
}

#[test]
fn per_view_sigma() {
    let ds = synth(2, &[2, 3], 9);
    let global = MhscgOptions {
        sigma: 5,
        ..quick()
    };
    let sigmas = [5usize, 5];
    let per_view = MhscgOptions {
        view_sigma: sigmas.as_ptr(),
        n_view_sigma: 2,
        ..global
    };
    let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(mhscg_cluster(ds, &global, &mut a), MhscgStatus::Ok);
        assert_eq!(mhscg_cluster(ds, &per_view, &mut b), MhscgStatus::Ok);
    }
    assert_eq!(labels_of(a), labels_of(b));

    let short = MhscgOptions {
        n_view_sigma: 1,
        ..per_view
    };
    let mut c = ptr::null_mut();
    assert_eq!(
        unsafe { mhscg_cluster(ds, &short, &mut c) },
        MhscgStatus::InvalidArgument
    );
    assert!(last_error().contains("sigma"));
    unsafe {
        mhscg_result_free(a);
        mhscg_result_free(b);
        mhscg_dataset_free(ds);
    }
}

#[test]
fn error_codes() {
    let mut ds = ptr::null_mut();
    let missing = CString::new("/nonexistent/manifest.json").unwrap();
    assert_eq!(
        unsafe { mhscg_dataset_load(missing.as_ptr(), &mut ds) },
        MhscgStatus::Io
    );
    assert!(ds.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(
        unsafe { mhscg_dataset_load(ptr::null(), &mut ds) },
        MhscgStatus::NullPointer
    );
    assert_eq!(
        unsafe { mhscg_dataset_new(0, &mut ds) },
        MhscgStatus::InvalidArgument
    );
    let dims = [3usize, 2];
    assert_eq!(
        unsafe { mhscg_dataset_synth(5, 0, dims.as_ptr(), 2, 0.1, 0, &mut ds) },
        MhscgStatus::InvalidArgument
    );

    let good = synth(2, &[2], 5);
    let bad = MhscgOptions {
        method: 42,
        ..quick()
    };
    let mut res = ptr::null_mut();
    assert_eq!(
        unsafe { mhscg_cluster(good, &bad, &mut res) },
        MhscgStatus::InvalidArgument
    );
    assert!(res.is_null());
    assert!(last_error().contains("method"));

    let mut n = 0;
    assert_eq!(
        unsafe { mhscg_dataset_n_samples(good, &mut n) },
        MhscgStatus::Ok
    );
    assert!(mhscg_last_error().is_null());
    unsafe {
        mhscg_dataset_free(good);
        mhscg_dataset_free(ptr::null_mut());
        mhscg_result_free(ptr::null_mut());
    }
}

#[test]
fn manifest_loading() {
    let ds = mhscg::dataset::synth_multiview(6, 2, 2, &[2, 3], 0.2, 4).unwrap();
    let dir = std::env::temp_dir().join(format!("mhscg-ffi-{}", std::process::id()));
    let manifest = mhscg::dataset::save_dataset(&ds, &dir).unwrap();
    let path = CString::new(manifest.to_str().unwrap()).unwrap();
    let mut handle = ptr::null_mut();
    assert_eq!(
        unsafe { mhscg_dataset_load(path.as_ptr(), &mut handle) },
        MhscgStatus::Ok
    );
    let mut r = 0;
    assert_eq!(
        unsafe { mhscg_dataset_n_views(handle, &mut r) },
        MhscgStatus::Ok
    );
    assert_eq!(r, 2);
    unsafe { mhscg_dataset_free(handle) };
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn metric_and_statistics_entry_points() {
    let mut m = MhscgMetrics::default();
    let pred = [0usize, 0, 0, 1];
    let truth = [0usize, 0, 1, 1];
    assert_eq!(
        unsafe { mhscg_metrics(pred.as_ptr(), truth.as_ptr(), 4, &mut m) },
        MhscgStatus::Ok
    );
    assert_eq!(m.acc.mean, 0.75);
    assert_eq!(m.fscore.mean, 0.4);
    assert_eq!(m.acc.std, 0.0);

    assert!((mhscg_nemenyi_cd(8, 4, 3.031) - 5.25).abs() <= 0.005);
    let mut ff = 0.0;
    assert_eq!(
        unsafe { mhscg_iman_davenport(14.83, 4, 8, &mut ff) },
        MhscgStatus::Ok
    );
    assert!((ff - 3.38).abs() <= 0.005);
    assert_eq!(
        unsafe { mhscg_iman_davenport(28.0, 4, 8, &mut ff) },
        MhscgStatus::Numerical
    );

    // ranks 1..8 in every row: χ² = 28 and F_F undefined
    let scores: Vec<f64> = (0..4).flat_map(|_| (1..=8).map(f64::from)).collect();
    let (mut chi2, mut ff) = (0.0, 0.0);
    let st = unsafe { mhscg_friedman(scores.as_ptr(), 4, 8, false, &mut chi2, &mut ff) };
    assert_eq!(st, MhscgStatus::Ok);
    assert!((chi2 - 28.0).abs() < 1e-12);
    assert!(ff.is_nan());

    let version = unsafe { CStr::from_ptr(mhscg_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
