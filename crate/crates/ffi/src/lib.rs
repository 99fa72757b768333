//! C ABI for `mhscg`.
//!
//! Datasets and results are opaque handles created and destroyed through
//! this API. Every function returns an [`MhscgStatus`]; on failure a
//! message is available from [`mhscg_last_error`] on the same thread.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use mhscg::dataset::{load_dataset, synth_multiview, MultiViewDataset, ViewMatrix};
use mhscg::metrics::{
    evaluate, friedman_chi2, iman_davenport, mean_ranks, nemenyi_cd, MetricReport, Summary,
};
use mhscg::pipeline::{self, Method, RepeatScope, RunConfig, RunOutput};
use mhscg::{Error, Matrix};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhscgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Numerical = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhscgMethod {
    Mhscg = 0,
    Hsc = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhscgRepeatScope {
    Kmeans = 0,
    Pipeline = 1,
}

/// Run options; start from `mhscg_options_default()`. `method` and
/// `repeat_scope` hold `MhscgMethod` / `MhscgRepeatScope` values.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MhscgOptions {
    pub method: u32,
    pub sigma: usize,
    /// Optional per-view σ array of length `n_view_sigma`; NULL uses `sigma` for every view.
    pub view_sigma: *const usize,
    pub n_view_sigma: usize,
    pub lambda0: f64,
    pub max_outer: usize,
    pub epsilon: f64,
    pub obj_tol: f64,
    pub kmeans_restarts: usize,
    pub repeats: usize,
    pub repeat_scope: u32,
    pub seed: u64,
    pub minmax: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MhscgSummary {
    pub mean: f64,
    pub std: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MhscgMetrics {
    pub acc: MhscgSummary,
    pub nmi: MhscgSummary,
    pub fscore: MhscgSummary,
    pub ari: MhscgSummary,
    pub runs: usize,
}

/// Opaque dataset under construction or loaded from disk.
pub struct MhscgDataset {
    name: String,
    k: usize,
    views: Vec<ViewMatrix>,
    labels: Option<Vec<usize>>,
}

/// Opaque outcome of `mhscg_cluster`.
pub struct MhscgResult {
    output: RunOutput,
}

struct Failure {
    status: MhscgStatus,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => MhscgStatus::Io,
            Error::Parse { .. } => MhscgStatus::Parse,
            Error::Numerical(_) => MhscgStatus::Numerical,
            _ => MhscgStatus::InvalidArgument,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        status: MhscgStatus::InvalidArgument,
        message: message.into(),
    }
}

fn null(what: &str) -> Failure {
    Failure {
        status: MhscgStatus::NullPointer,
        message: format!("{what} is NULL"),
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn call(f: impl FnOnce() -> Result<(), Failure>) -> MhscgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MhscgStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(&failure.message);
            failure.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            MhscgStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn in_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn in_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next API call on the same thread.
#[no_mangle]
pub extern "C" fn mhscg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mhscg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn mhscg_options_default() -> MhscgOptions {
    let d = RunConfig::default();
    MhscgOptions {
        method: MhscgMethod::Mhscg as u32,
        sigma: d.sigma,
        view_sigma: std::ptr::null(),
        n_view_sigma: 0,
        lambda0: d.lambda0,
        max_outer: d.max_outer,
        epsilon: d.epsilon,
        obj_tol: d.obj_tol,
        kmeans_restarts: d.kmeans_restarts,
        repeats: d.repeats,
        repeat_scope: MhscgRepeatScope::Kmeans as u32,
        seed: d.seed,
        minmax: d.minmax,
    }
}

/// # Safety
/// `o.view_sigma`, when non-null, must point to `o.n_view_sigma` values.
unsafe fn run_config(o: &MhscgOptions) -> Result<RunConfig, Failure> {
    let method = match o.method {
        m if m == MhscgMethod::Mhscg as u32 => Method::Mhscg,
        m if m == MhscgMethod::Hsc as u32 => Method::Hsc,
        m => return Err(invalid(format!("unknown method {m}"))),
    };
    let repeat_scope = match o.repeat_scope {
        r if r == MhscgRepeatScope::Kmeans as u32 => RepeatScope::Kmeans,
        r if r == MhscgRepeatScope::Pipeline as u32 => RepeatScope::Pipeline,
        r => return Err(invalid(format!("unknown repeat scope {r}"))),
    };
    Ok(RunConfig {
        method,
        sigma: o.sigma,
        view_sigma: if o.view_sigma.is_null() {
            None
        } else {
            Some(in_slice(o.view_sigma, o.n_view_sigma, "view_sigma")?.to_vec())
        },
        lambda0: o.lambda0,
        max_outer: o.max_outer,
        epsilon: o.epsilon,
        obj_tol: o.obj_tol,
        kmeans_restarts: o.kmeans_restarts,
        repeats: o.repeats,
        repeat_scope,
        seed: o.seed,
        minmax: o.minmax,
        ..RunConfig::default()
    })
}

impl From<MultiViewDataset> for MhscgDataset {
    fn from(ds: MultiViewDataset) -> Self {
        MhscgDataset {
            name: ds.name,
            k: ds.k,
            views: ds.views,
            labels: ds.labels,
        }
    }
}

fn publish<T>(out: &mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Loads a dataset from a JSON manifest.
///
/// # Safety
/// `manifest_path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhscg_dataset_load(
    manifest_path: *const c_char,
    out: *mut *mut MhscgDataset,
) -> MhscgStatus {
    call(|| {
        let out = out_ref(out, "out")?;
        let path = in_str(manifest_path, "manifest_path")?;
        publish(out, load_dataset(path)?.into());
        Ok(())
    })
}

/// Gaussian-blob multi-view dataset with `n_views` views of `dims[l]` features.
///
/// # Safety
/// `dims` must point to `n_views` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhscg_dataset_synth(
    n_per_cluster: usize,
    k: usize,
    dims: *const usize,
    n_views: usize,
    noise_std: f64,
    seed: u64,
    out: *mut *mut MhscgDataset,
) -> MhscgStatus {
    call(|| {
        let out = out_ref(out, "out")?;
        let dims = in_slice(dims, n_views, "dims")?;
        let ds = synth_multiview(n_per_cluster, k, n_views, dims, noise_std, seed)?;
        publish(out, ds.into());
        Ok(())
    })
}

/// Empty dataset with `k` clusters; add views with `mhscg_dataset_add_view`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhscg_dataset_new(k: usize, out: *mut *mut MhscgDataset) -> MhscgStatus {
    call(|| {
        let out = out_ref(out, "out")?;
        if k < 1 {
            return Err(invalid("k must be at least 1"));
        }
        publish(
            out,
            MhscgDataset {
                name: "ffi".into(),
                k,
                views: Vec::new(),
                labels: None,
            },
        );
        Ok(())
    })
}

/// Appends a view given as a row-major `n_rows × n_cols` array.
///
/// # Safety
/// `ds` must come from this library; `data` must hold `n_rows * n_cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn mhscg_dataset_add_view(
    ds: *mut MhscgDataset,
    data: *const f64,
    n_rows: usize,
    n_cols: usize,
) -> MhscgStatus {
    call(|| {
        let ds = out_ref(ds, "ds")?;
        let len = n_rows
            .checked_mul(n_cols)
            .ok_or_else(|| invalid("view size overflows"))?;
        let values = in_slice(data, len, "data")?;
        let view = ViewMatrix::new(Matrix::from_row_slice(n_rows, n_cols, values))?;
        if let Some(first) = ds.views.first() {
            if first.n_samples() != n_rows {
                return Err(invalid(format!(
                    "view has {n_rows} rows, earlier views have {}",
                    first.n_samples()
                )));
            }
        }
        ds.views.push(view);
        Ok(())
    })
}

/// Sets 0-based ground-truth labels.
///
/// # Safety
/// `ds` must come from this library; `labels` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn mhscg_dataset_set_labels(
    ds: *mut MhscgDataset,
    labels: *const usize,
    n: usize,
) -> MhscgStatus {
    call(|| {
        let ds = out_ref(ds, "ds")?;
        let labels = in_slice(labels, n, "labels")?;
        if labels.is_empty() {
            return Err(invalid("labels are empty"));
        }
        ds.labels = Some(labels.to_vec());
        Ok(())
    })
}

/// # Safety
/// `ds` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhscg_dataset_n_samples(
    ds: *const MhscgDataset,
    out: *mut usize,
) -> MhscgStatus {
    call(|| {
        let ds = in_ref(ds, "ds")?;
        *out_ref(out, "out")? = ds.views.first().map_or(0, |v| v.n_samples());
        Ok(())
    })
}

/// # Safety
/// `ds` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhscg_dataset_n_views(
    ds: *const MhscgDataset,
    out: *mut usize,
) -> MhscgStatus {
    call(|| {
        let ds = in_ref(ds, "ds")?;
        *out_ref(out, "out")? = ds.views.len();
        Ok(())
    })
}

/// # Safety
/// `ds` must come from this library and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn mhscg_dataset_free(ds: *mut MhscgDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Clusters `ds` with `opts` (NULL for defaults).
///
/// # Safety
/// `ds` must come from this library; `opts` may be NULL, and a non-null
/// `opts->view_sigma` must hold `opts->n_view_sigma` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhscg_cluster(
    ds: *const MhscgDataset,
    opts: *const MhscgOptions,
    out: *mut *mut MhscgResult,
) -> MhscgStatus {
    call(|| {
        let out = out_ref(out, "out")?;
        let ds = in_ref(ds, "ds")?;
        let opts = opts
            .as_ref()
            .copied()
            .unwrap_or_else(|| mhscg_options_default());
        let dataset =
            MultiViewDataset::new(ds.name.clone(), ds.views.clone(), ds.labels.clone(), ds.k)?;
        let output = pipeline::run(&dataset, &run_config(&opts)?)?;
        publish(out, MhscgResult { output });
        Ok(())
    })
}

/// Copies the labels of the first repeat into `labels` (capacity `len`,
/// at least the sample count).
///
/// # Safety
/// `res` must come from this library; `labels` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn mhscg_result_labels(
    res: *const MhscgResult,
    labels: *mut usize,
    len: usize,
) -> MhscgStatus {
    call(|| {
        let res = in_ref(res, "res")?;
        let src = &res.output.labels;
        if len < src.len() {
            return Err(invalid(format!(
                "buffer holds {len} labels, need {}",
                src.len()
            )));
        }
        if labels.is_null() {
            return Err(null("labels"));
        }
        slice::from_raw_parts_mut(labels, src.len()).copy_from_slice(src);
        Ok(())
    })
}

/// # Safety
/// `res` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhscg_result_n_samples(
    res: *const MhscgResult,
    out: *mut usize,
) -> MhscgStatus {
    call(|| {
        *out_ref(out, "out")? = in_ref(res, "res")?.output.labels.len();
        Ok(())
    })
}

/// Outer iterations of the first repeat (0 for the HSC baseline).
///
/// # Safety
/// `res` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhscg_result_iterations(
    res: *const MhscgResult,
    out: *mut usize,
) -> MhscgStatus {
    call(|| {
        let res = in_ref(res, "res")?;
        *out_ref(out, "out")? = res.output.trace.as_ref().map_or(0, |t| t.records.len());
        Ok(())
    })
}

fn c_summary(s: Summary) -> MhscgSummary {
    MhscgSummary {
        mean: s.mean,
        std: s.std,
    }
}

fn c_metrics(m: &MetricReport) -> MhscgMetrics {
    MhscgMetrics {
        acc: c_summary(m.acc),
        nmi: c_summary(m.nmi),
        fscore: c_summary(m.fscore),
        ari: c_summary(m.ari),
        runs: m.runs,
    }
}

/// Metrics over all repeats; fails when the dataset had no labels.
///
/// # Safety
/// `res` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhscg_result_metrics(
    res: *const MhscgResult,
    out: *mut MhscgMetrics,
) -> MhscgStatus {
    call(|| {
        let res = in_ref(res, "res")?;
        let out = out_ref(out, "out")?;
        let m = res
            .output
            .metrics
            .as_ref()
            .ok_or_else(|| invalid("dataset has no ground-truth labels"))?;
        *out = c_metrics(m);
        Ok(())
    })
}

/// # Safety
/// `res` must come from this library and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn mhscg_result_free(res: *mut MhscgResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// ACC, NMI, F-score and ARI of one prediction (std fields are 0).
///
/// # Safety
/// `pred` and `truth` must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhscg_metrics(
    pred: *const usize,
    truth: *const usize,
    n: usize,
    out: *mut MhscgMetrics,
) -> MhscgStatus {
    call(|| {
        let out = out_ref(out, "out")?;
        let pred = in_slice(pred, n, "pred")?;
        let truth = in_slice(truth, n, "truth")?;
        let report = MetricReport::from_runs(&[evaluate(pred, truth)?])?;
        *out = c_metrics(&report);
        Ok(())
    })
}

/// Nemenyi critical difference for `n_algorithms` compared over `n_datasets`.
#[no_mangle]
pub extern "C" fn mhscg_nemenyi_cd(n_algorithms: usize, n_datasets: usize, q_alpha: f64) -> f64 {
    nemenyi_cd(n_algorithms, n_datasets, q_alpha)
}

/// Iman-Davenport statistic from a Friedman χ².
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhscg_iman_davenport(
    chi2: f64,
    n_datasets: usize,
    n_algorithms: usize,
    out: *mut f64,
) -> MhscgStatus {
    call(|| {
        *out_ref(out, "out")? = iman_davenport(chi2, n_datasets, n_algorithms)?;
        Ok(())
    })
}

/// Friedman χ² and Iman-Davenport F_F from a row-major `n_datasets ×
/// n_algorithms` score table. `ff` is NaN when complete rank agreement
/// leaves F_F undefined. Either output pointer may be NULL.
///
/// # Safety
/// `scores` must hold `n_datasets * n_algorithms` doubles.
#[no_mangle]
pub unsafe extern "C" fn mhscg_friedman(
    scores: *const f64,
    n_datasets: usize,
    n_algorithms: usize,
    higher_is_better: bool,
    chi2: *mut f64,
    ff: *mut f64,
) -> MhscgStatus {
    call(|| {
        let len = n_datasets
            .checked_mul(n_algorithms)
            .ok_or_else(|| invalid("table size overflows"))?;
        let values = in_slice(scores, len, "scores")?;
        let table = mean_ranks(
            &Matrix::from_row_slice(n_datasets, n_algorithms, values),
            higher_is_better,
        )?;
        let c = friedman_chi2(&table)?;
        if let Some(out) = chi2.as_mut() {
            *out = c;
        }
        if let Some(out) = ff.as_mut() {
            *out = iman_davenport(c, n_datasets, n_algorithms).unwrap_or(f64::NAN);
        }
        Ok(())
    })
}
