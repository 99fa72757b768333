//! Multi-view datasets: validation, CSV/JSON persistence and synthetic blobs.
//!
//! On disk a dataset is a JSON manifest next to one CSV file per view
//! (no header, one sample per row) and an optional label file holding one
//! integer per line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Matrix;

/// Radius of the sphere the synthetic cluster centers are drawn from.
pub const SYNTH_CENTER_RADIUS: f64 = 10.0;

/// One view: `n` samples (rows) by `d` features (columns), all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewMatrix {
    data: Matrix,
}

impl ViewMatrix {
    pub fn new(data: Matrix) -> Result<Self> {
        Self::check(&data)?;
        Ok(Self { data })
    }

    fn check(data: &Matrix) -> Result<()> {
        if data.nrows() < 2 {
            return Err(Error::InvalidDataset(format!(
                "a view needs at least 2 samples, got {}",
                data.nrows()
            )));
        }
        if data.ncols() < 1 {
            return Err(Error::InvalidDataset("a view needs at least 1 feature".into()));
        }
        if let Some((idx, _)) = data.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            // column-major storage
            let (row, col) = (idx % data.nrows(), idx / data.nrows());
            return Err(Error::InvalidDataset(format!(
                "non-finite entry at row {row}, column {col}"
            )));
        }
        Ok(())
    }

    pub fn data(&self) -> &Matrix {
        &self.data
    }

    pub fn into_inner(self) -> Matrix {
        self.data
    }

    pub fn n_samples(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.data.ncols()
    }

    /// Rescales every feature column to `[0, 1]`. Constant columns become 0.
    pub fn min_max_scaled(&self) -> ViewMatrix {
        let mut data = self.data.clone();
        for mut col in data.column_iter_mut() {
            let lo = col.min();
            let hi = col.max();
            let span = hi - lo;
            for v in col.iter_mut() {
                *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
            }
        }
        ViewMatrix { data }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewDataset {
    pub name: String,
    pub views: Vec<ViewMatrix>,
    /// Ground truth, 0-based.
    pub labels: Option<Vec<usize>>,
    /// Target number of clusters.
    pub k: usize,
}

impl MultiViewDataset {
    pub fn new(
        name: impl Into<String>,
        views: Vec<ViewMatrix>,
        labels: Option<Vec<usize>>,
        k: usize,
    ) -> Result<Self> {
        let ds = Self {
            name: name.into(),
            views,
            labels,
            k,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn n_samples(&self) -> usize {
        self.views.first().map_or(0, ViewMatrix::n_samples)
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn validate(&self) -> Result<()> {
        validate(self)
    }

    /// Copy of the dataset with every view min-max scaled per feature.
    pub fn min_max_scaled(&self) -> MultiViewDataset {
        MultiViewDataset {
            name: self.name.clone(),
            views: self.views.iter().map(ViewMatrix::min_max_scaled).collect(),
            labels: self.labels.clone(),
            k: self.k,
        }
    }
}

/// Checks every dataset invariant; a no-op on valid input.
pub fn validate(dataset: &MultiViewDataset) -> Result<()> {
    if dataset.views.is_empty() {
        return Err(Error::InvalidDataset("dataset has no views".into()));
    }
    let n = dataset.views[0].n_samples();
    for (l, view) in dataset.views.iter().enumerate() {
        ViewMatrix::check(view.data()).map_err(|e| match e {
            Error::InvalidDataset(msg) => Error::InvalidDataset(format!("view {l}: {msg}")),
            other => other,
        })?;
        if view.n_samples() != n {
            return Err(Error::InvalidDataset(format!(
                "row-count mismatch: view 0 has {n} samples, view {l} has {}",
                view.n_samples()
            )));
        }
    }
    if dataset.k < 1 || dataset.k > n {
        return Err(Error::InvalidDataset(format!(
            "cluster count k = {} must lie in [1, {n}]",
            dataset.k
        )));
    }
    if let Some(labels) = &dataset.labels {
        if labels.len() != n {
            return Err(Error::InvalidDataset(format!(
                "label count {} does not match sample count {n}",
                labels.len()
            )));
        }
        if let Some((i, &bad)) = labels.iter().enumerate().find(|(_, &c)| c >= dataset.k) {
            return Err(Error::InvalidDataset(format!(
                "label {bad} at sample {i} is out of range for k = {}",
                dataset.k
            )));
        }
    }
    Ok(())
}

/// JSON description of a dataset. Paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub k: usize,
    pub views: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<String>,
}

impl DatasetManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: DatasetManifest =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        if manifest.views.is_empty() {
            return Err(Error::parse(path, "manifest lists no views"));
        }
        Ok(manifest)
    }
}

fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Loads and validates the dataset described by a manifest file.
pub fn load_dataset(manifest_path: impl AsRef<Path>) -> Result<MultiViewDataset> {
    let manifest_path = manifest_path.as_ref();
    let manifest = DatasetManifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));

    let views = manifest
        .views
        .iter()
        .map(|rel| {
            let path = resolve(base, rel);
            let m = load_matrix_csv(&path)?;
            ViewMatrix::new(m).map_err(|e| Error::parse(&path, e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;

    let labels = match &manifest.labels {
        Some(rel) => {
            let path = resolve(base, rel);
            let raw = load_labels(&path)?;
            Some(rebase_labels(raw, manifest.k).map_err(|e| Error::parse(&path, e.to_string()))?)
        }
        None => None,
    };

    MultiViewDataset::new(manifest.name, views, labels, manifest.k)
}

/// Re-bases 1-based contiguous labels (min 1, max k) to 0-based.
pub fn rebase_labels(labels: Vec<usize>, k: usize) -> Result<Vec<usize>> {
    let min = labels.iter().copied().min().unwrap_or(0);
    let max = labels.iter().copied().max().unwrap_or(0);
    if min == 1 && max == k {
        warn!("labels look 1-based (range 1..={k}); re-basing to 0");
        return Ok(labels.into_iter().map(|c| c - 1).collect());
    }
    if max >= k {
        return Err(Error::InvalidDataset(format!(
            "label {max} out of range for k = {k}"
        )));
    }
    Ok(labels)
}

/// Reads a header-less CSV of reals into an `n × d` matrix.
pub fn load_matrix_csv(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::parse(path, format!("{other:?}")),
        })?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(path, e.to_string()))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>().map_err(|_| {
                    Error::parse(path, format!("non-numeric cell {cell:?} at row {i}, column {j}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(path, "matrix file is empty"));
    }
    let d = rows[0].len();
    if let Some(i) = rows.iter().position(|r| r.len() != d) {
        return Err(Error::parse(
            path,
            format!("row {i} has {} columns, expected {d}", rows[i].len()),
        ));
    }
    Ok(Matrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
}

/// Writes a matrix as header-less CSV using shortest round-trip float formatting.
pub fn save_matrix_csv(matrix: &Matrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(matrix.nrows() * matrix.ncols() * 12);
    for row in matrix.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads one non-negative integer label per line. Blank lines are ignored.
pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let t = l.trim();
            // tolerate "3.0" style exports
            t.parse::<usize>()
                .ok()
                .or_else(|| {
                    t.parse::<f64>()
                        .ok()
                        .filter(|v| *v >= 0.0 && v.fract() == 0.0)
                        .map(|v| v as usize)
                })
                .ok_or_else(|| Error::parse(path, format!("line {}: invalid label {t:?}", i + 1)))
        })
        .collect()
}

pub fn save_labels(labels: &[usize], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if labels.is_empty() {
        return Err(Error::InvalidArgument("refusing to write an empty label file".into()));
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = String::with_capacity(labels.len() * 3);
    for c in labels {
        out.push_str(&c.to_string());
        out.push('\n');
    }
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Writes view CSVs, labels and a manifest into `dir`; returns the manifest path.
pub fn save_dataset(dataset: &MultiViewDataset, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut view_names = Vec::with_capacity(dataset.n_views());
    for (l, view) in dataset.views.iter().enumerate() {
        let file = format!("view{}.csv", l + 1);
        save_matrix_csv(view.data(), dir.join(&file))?;
        view_names.push(file);
    }
    let labels = match &dataset.labels {
        Some(labels) => {
            save_labels(labels, dir.join("labels.csv"))?;
            Some("labels.csv".to_string())
        }
        None => None,
    };
    let manifest = DatasetManifest {
        name: dataset.name.clone(),
        k: dataset.k,
        views: view_names,
        labels,
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Parameters of [`synth_multiview`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_per_cluster: usize,
    pub k: usize,
    pub dims: Vec<usize>,
    pub noise_std: f64,
    pub seed: u64,
}

/// Gaussian blobs around centers on the radius-10 sphere, one set of centers
/// per view, labels shared across views. Samples are ordered cluster by cluster.
pub fn synth_multiview(
    n_per_cluster: usize,
    k: usize,
    r: usize,
    dims: &[usize],
    noise_std: f64,
    seed: u64,
) -> Result<MultiViewDataset> {
    if dims.len() != r {
        return Err(Error::InvalidArgument(format!(
            "{} view dimensions given for {r} views",
            dims.len()
        )));
    }
    if n_per_cluster < 1 || k < 2 || r < 1 {
        return Err(Error::InvalidArgument(format!(
            "need n_per_cluster ≥ 1, k ≥ 2, r ≥ 1 (got {n_per_cluster}, {k}, {r})"
        )));
    }
    if dims.contains(&0) {
        return Err(Error::InvalidArgument("view dimensions must be positive".into()));
    }
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise_std must be ≥ 0, got {noise_std}")));
    }

    let n = n_per_cluster * k;
    let labels: Vec<usize> = (0..n).map(|i| i / n_per_cluster).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let noise = Normal::new(0.0, noise_std).expect("noise_std checked above");

    let views = dims
        .iter()
        .map(|&d| {
            let centers: Vec<Vec<f64>> = (0..k)
                .map(|_| loop {
                    let v: Vec<f64> = (0..d).map(|_| unit.sample(&mut rng)).collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm > 1e-12 {
                        break v.into_iter().map(|x| SYNTH_CENTER_RADIUS * x / norm).collect();
                    }
                })
                .collect();
            // row-major fill to keep the draw order independent of storage layout
            let mut rows = Vec::with_capacity(n * d);
            for &c in &labels {
                for center_coord in &centers[c] {
                    rows.push(center_coord + noise.sample(&mut rng));
                }
            }
            ViewMatrix::new(Matrix::from_row_slice(n, d, &rows))
        })
        .collect::<Result<Vec<_>>>()?;

    MultiViewDataset::new(
        format!("synth-k{k}-r{r}-s{seed}"),
        views,
        Some(labels),
        k,
    )
}
