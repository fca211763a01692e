//! C ABI for `mcband`.
//!
//! Every fallible call returns an [`McbStatus`]; on failure the message is
//! available from [`mcb_last_error_message`] on the same thread. Objects
//! crossing the boundary are opaque handles created by `*_new`/`*_run`/
//! `*_generate` functions and released with the matching `*_free`. Copy
//! functions take a caller buffer and its capacity in elements and fail
//! with `MCB_STATUS_BUFFER_TOO_SMALL` when it is short.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mcband::{
    band_curve, band_slope, generate_dataset, make_grid, ols_fit, ols_prediction_band, quantile,
    quartile_band, run_study_with_threads, BandCurve, BandKind, Dataset, Error, ForestConfig,
    GenConfig, LinearFit, ModelSpec, QuartileBand, StudyConfig, StudyOutput, TreeConfig,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McbStatus {
    Ok = 0,
    InvalidArgument = 1,
    InsufficientData = 2,
    SingularDesign = 3,
    NullPointer = 4,
    BufferTooSmall = 5,
    FitFailed = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mcb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

struct Failure(McbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InsufficientData { .. } | Error::EmptyInput => McbStatus::InsufficientData,
            Error::SingularDesign => McbStatus::SingularDesign,
            Error::Replication { .. } => McbStatus::FitFailed,
            _ => McbStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(McbStatus::NullPointer, format!("{what} is NULL"))
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> McbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => McbStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            McbStatus::Panic
        }
    }
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn copy_out(src: &[f64], dst: *mut f64, capacity: usize) -> Result<(), Failure> {
    if src.is_empty() {
        return Ok(());
    }
    if dst.is_null() {
        return Err(null("output buffer"));
    }
    if capacity < src.len() {
        return Err(Failure(
            McbStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

#[no_mangle]
pub extern "C" fn mcb_derive_seed(master: u64, index: u64) -> u64 {
    mcband::derive_seed(master, index)
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct McbGenConfig {
    pub intercept: f64,
    pub slope: f64,
    pub x_low: f64,
    pub x_high: f64,
    pub noise_sigma: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl From<McbGenConfig> for GenConfig {
    fn from(c: McbGenConfig) -> Self {
        GenConfig {
            intercept: c.intercept,
            slope: c.slope,
            x_low: c.x_low,
            x_high: c.x_high,
            noise_sigma: c.noise_sigma,
            n_samples: c.n_samples,
            seed: c.seed,
        }
    }
}

impl From<GenConfig> for McbGenConfig {
    fn from(c: GenConfig) -> Self {
        McbGenConfig {
            intercept: c.intercept,
            slope: c.slope,
            x_low: c.x_low,
            x_high: c.x_high,
            noise_sigma: c.noise_sigma,
            n_samples: c.n_samples,
            seed: c.seed,
        }
    }
}

#[no_mangle]
pub extern "C" fn mcb_gen_config_default() -> McbGenConfig {
    GenConfig::default().into()
}

/// Opaque dataset handle.
pub struct McbDataset(Dataset);

#[no_mangle]
pub unsafe extern "C" fn mcb_dataset_generate(
    config: *const McbGenConfig,
    out: *mut *mut McbDataset,
) -> McbStatus {
    guard(|| {
        let cfg = *in_ref(config, "config")?;
        let out = out_ref(out, "out")?;
        let data = generate_dataset(&cfg.into())?;
        *out = Box::into_raw(Box::new(McbDataset(data)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mcb_dataset_new(
    xs: *const f64,
    ys: *const f64,
    len: usize,
    out: *mut *mut McbDataset,
) -> McbStatus {
    guard(|| {
        let xs = slice(xs, len, "xs")?;
        let ys = slice(ys, len, "ys")?;
        let out = out_ref(out, "out")?;
        let data = Dataset::new(xs.to_vec(), ys.to_vec())?;
        *out = Box::into_raw(Box::new(McbDataset(data)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mcb_dataset_len(data: *const McbDataset) -> usize {
    data.as_ref().map_or(0, |d| d.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn mcb_dataset_copy(
    data: *const McbDataset,
    xs_out: *mut f64,
    ys_out: *mut f64,
    capacity: usize,
) -> McbStatus {
    guard(|| {
        let d = &in_ref(data, "dataset")?.0;
        copy_out(d.xs(), xs_out, capacity)?;
        copy_out(d.ys(), ys_out, capacity)
    })
}

#[no_mangle]
pub unsafe extern "C" fn mcb_dataset_free(data: *mut McbDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct McbLinearFit {
    pub a: f64,
    pub b: f64,
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub s: f64,
    pub n: usize,
    pub x_mean: f64,
    pub sxx: f64,
}

impl From<LinearFit> for McbLinearFit {
    fn from(f: LinearFit) -> Self {
        McbLinearFit {
            a: f.a,
            b: f.b,
            sigma_a: f.sigma_a,
            sigma_b: f.sigma_b,
            s: f.s,
            n: f.n,
            x_mean: f.x_mean,
            sxx: f.sxx,
        }
    }
}

impl From<McbLinearFit> for LinearFit {
    fn from(f: McbLinearFit) -> Self {
        LinearFit {
            a: f.a,
            b: f.b,
            sigma_a: f.sigma_a,
            sigma_b: f.sigma_b,
            s: f.s,
            n: f.n,
            x_mean: f.x_mean,
            sxx: f.sxx,
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn mcb_ols_fit(data: *const McbDataset, out: *mut McbLinearFit) -> McbStatus {
    guard(|| {
        let d = &in_ref(data, "dataset")?.0;
        let out = out_ref(out, "out")?;
        *out = ols_fit(d)?.into();
        Ok(())
    })
}

/// Analytical band at `xs`; `observation != 0` selects the new-observation band.
#[no_mangle]
pub unsafe extern "C" fn mcb_ols_prediction_band(
    fit: *const McbLinearFit,
    xs: *const f64,
    len: usize,
    level: f64,
    observation: bool,
    lower_out: *mut f64,
    upper_out: *mut f64,
) -> McbStatus {
    guard(|| {
        let fit: LinearFit = (*in_ref(fit, "fit")?).into();
        let xs = slice(xs, len, "xs")?;
        let kind = if observation {
            BandKind::Observation
        } else {
            BandKind::Mean
        };
        let band = ols_prediction_band(&fit, xs, level, kind)?;
        let lower: Vec<f64> = band.iter().map(|p| p.lower).collect();
        let upper: Vec<f64> = band.iter().map(|p| p.upper).collect();
        copy_out(&lower, lower_out, len)?;
        copy_out(&upper, upper_out, len)
    })
}

#[no_mangle]
pub unsafe extern "C" fn mcb_quantile(
    values: *const f64,
    len: usize,
    p: f64,
    out: *mut f64,
) -> McbStatus {
    guard(|| {
        let v = slice(values, len, "values")?;
        let out = out_ref(out, "out")?;
        *out = quantile(v, p)?;
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct McbQuartileBand {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub iqr: f64,
    pub low: f64,
    pub high: f64,
}

impl From<QuartileBand> for McbQuartileBand {
    fn from(b: QuartileBand) -> Self {
        McbQuartileBand {
            q1: b.q1,
            median: b.median,
            q3: b.q3,
            iqr: b.iqr,
            low: b.low,
            high: b.high,
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn mcb_quartile_band(
    values: *const f64,
    len: usize,
    out: *mut McbQuartileBand,
) -> McbStatus {
    guard(|| {
        let v = slice(values, len, "values")?;
        let out = out_ref(out, "out")?;
        *out = quartile_band(v)?.into();
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McbModelKind {
    Linear = 0,
    Forest = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct McbForestConfig {
    pub n_trees: usize,
    /// Negative for unlimited depth.
    pub max_depth: i64,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

impl From<McbForestConfig> for ForestConfig {
    fn from(c: McbForestConfig) -> Self {
        ForestConfig {
            n_trees: c.n_trees,
            tree: TreeConfig {
                max_depth: usize::try_from(c.max_depth).ok(),
                min_samples_leaf: c.min_samples_leaf,
                min_samples_split: c.min_samples_split,
            },
            bootstrap: c.bootstrap,
            seed: c.seed,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct McbStudyConfig {
    /// `gen.seed` is the master seed.
    pub gen: McbGenConfig,
    pub model: McbModelKind,
    pub forest: McbForestConfig,
    pub grid_low: f64,
    pub grid_high: f64,
    pub grid_points: usize,
    pub replications: usize,
    /// Holdout fraction; zero or negative disables the split.
    pub test_fraction: f64,
    /// Worker cap; zero uses the default pool.
    pub threads: usize,
}

#[no_mangle]
pub extern "C" fn mcb_study_config_default() -> McbStudyConfig {
    let d = StudyConfig::default();
    let f = ForestConfig::default();
    McbStudyConfig {
        gen: d.gen.into(),
        model: McbModelKind::Linear,
        forest: McbForestConfig {
            n_trees: f.n_trees,
            max_depth: f.tree.max_depth.map_or(-1, |v| v as i64),
            min_samples_leaf: f.tree.min_samples_leaf,
            min_samples_split: f.tree.min_samples_split,
            bootstrap: f.bootstrap,
            seed: f.seed,
        },
        grid_low: d.grid.low(),
        grid_high: d.grid.high(),
        grid_points: d.grid.len(),
        replications: d.replications,
        test_fraction: 0.0,
        threads: 0,
    }
}

/// Opaque handle to a finished study and its band curve.
pub struct McbStudy {
    output: StudyOutput,
    curve: BandCurve,
}

#[no_mangle]
pub unsafe extern "C" fn mcb_study_run(
    config: *const McbStudyConfig,
    out: *mut *mut McbStudy,
) -> McbStatus {
    guard(|| {
        let c = *in_ref(config, "config")?;
        let out = out_ref(out, "out")?;
        let cfg = StudyConfig {
            gen: c.gen.into(),
            model: match c.model {
                McbModelKind::Linear => ModelSpec::Linear,
                McbModelKind::Forest => ModelSpec::Forest(c.forest.into()),
            },
            grid: make_grid(c.grid_low, c.grid_high, c.grid_points)?,
            replications: c.replications,
            test_fraction: (c.test_fraction > 0.0).then_some(c.test_fraction),
        };
        let threads = (c.threads > 0).then_some(c.threads);
        let output = run_study_with_threads(&cfg, threads)?;
        let curve = band_curve(&output.matrix)?;
        *out = Box::into_raw(Box::new(McbStudy { output, curve }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mcb_study_rows(study: *const McbStudy) -> usize {
    study.as_ref().map_or(0, |s| s.output.matrix.n_rows())
}

#[no_mangle]
pub unsafe extern "C" fn mcb_study_cols(study: *const McbStudy) -> usize {
    study.as_ref().map_or(0, |s| s.output.matrix.n_cols())
}

/// Number of recorded slope/intercept pairs (zero for forest studies).
#[no_mangle]
pub unsafe extern "C" fn mcb_study_coefficient_count(study: *const McbStudy) -> usize {
    study
        .as_ref()
        .map_or(0, |s| s.output.coefficients.slopes.len())
}

#[no_mangle]
pub unsafe extern "C" fn mcb_study_copy_grid(
    study: *const McbStudy,
    out: *mut f64,
    capacity: usize,
) -> McbStatus {
    guard(|| {
        let s = in_ref(study, "study")?;
        copy_out(s.output.matrix.grid().points(), out, capacity)
    })
}

/// Row-major `rows x cols` predictions.
#[no_mangle]
pub unsafe extern "C" fn mcb_study_copy_matrix(
    study: *const McbStudy,
    out: *mut f64,
    capacity: usize,
) -> McbStatus {
    guard(|| {
        let s = in_ref(study, "study")?;
        copy_out(s.output.matrix.as_slice(), out, capacity)
    })
}

#[no_mangle]
pub unsafe extern "C" fn mcb_study_copy_slopes(
    study: *const McbStudy,
    out: *mut f64,
    capacity: usize,
) -> McbStatus {
    guard(|| {
        let s = in_ref(study, "study")?;
        copy_out(&s.output.coefficients.slopes, out, capacity)
    })
}

#[no_mangle]
pub unsafe extern "C" fn mcb_study_copy_intercepts(
    study: *const McbStudy,
    out: *mut f64,
    capacity: usize,
) -> McbStatus {
    guard(|| {
        let s = in_ref(study, "study")?;
        copy_out(&s.output.coefficients.intercepts, out, capacity)
    })
}

/// One band per grid point.
#[no_mangle]
pub unsafe extern "C" fn mcb_study_copy_band(
    study: *const McbStudy,
    out: *mut McbQuartileBand,
    capacity: usize,
) -> McbStatus {
    guard(|| {
        let s = in_ref(study, "study")?;
        let bands = &s.curve.bands;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        if capacity < bands.len() {
            return Err(Failure(
                McbStatus::BufferTooSmall,
                format!("buffer holds {capacity} bands, {} needed", bands.len()),
            ));
        }
        for (i, b) in bands.iter().enumerate() {
            *out.add(i) = (*b).into();
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mcb_study_band_slope(study: *const McbStudy, out: *mut f64) -> McbStatus {
    guard(|| {
        let s = in_ref(study, "study")?;
        let out = out_ref(out, "out")?;
        *out = band_slope(&s.curve)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mcb_study_free(study: *mut McbStudy) {
    if !study.is_null() {
        drop(Box::from_raw(study));
    }
}
