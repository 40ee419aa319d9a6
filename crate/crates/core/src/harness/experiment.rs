use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, TestCase};
use super::csv::{emit_basis, emit_csv, emit_rows, emit_sigmas, emit_training_log};
use crate::assembly::{sample_coefficients, Axis, ChannelPattern, CoefficientSpec};
use crate::error::{Error, Result};
use crate::grid::{build_pair, Rect, SubdomainPair};
use crate::linalg::rng::streams;
use crate::linalg::{gaussian_vector, GaussianStream};
use crate::rangefinder::{adaptive_range, oracle, projection_errors, random_samples, ErrorTable, RangeApproximation};
use crate::transfer::{build_transfer, caccioppoli_ratio, TransferSystem, DEFAULT_DENSE_CAP};

pub const CHANNEL_CENTERS: [f64; 6] = [-2.0 / 3.0, -1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0, 5.0 / 3.0];
pub const CHANNEL_HALF_WIDTH: f64 = 0.04;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Parallel,
    Lattice,
}

/// Diffusion pattern of the channel cases: bands of value `contrast` on a unit background.
pub fn channel_geometry(kind: ChannelKind, contrast: f64) -> ChannelPattern {
    let axes = match kind {
        ChannelKind::Parallel => vec![Axis::Horizontal],
        ChannelKind::Lattice => vec![Axis::Horizontal, Axis::Vertical],
    };
    ChannelPattern {
        axes,
        centers: CHANNEL_CENTERS.to_vec(),
        half_width: CHANNEL_HALF_WIDTH,
        inside_value: contrast,
        outside_value: 1.0,
    }
}

/// Coefficients of the configured test case on the given oversampling domain.
/// Channel bands whose centerline misses the domain are dropped.
pub fn coefficient_spec(cfg: &ExperimentConfig, oversampling: Rect) -> Result<CoefficientSpec> {
    let channels = |kind| {
        let p = channel_geometry(kind, cfg.contrast);
        let inside = |c: &f64| {
            p.axes.iter().all(|a| match a {
                Axis::Horizontal => (oversampling.y0..=oversampling.y1).contains(c),
                Axis::Vertical => (oversampling.x0..=oversampling.x1).contains(c),
            })
        };
        let centers = p.centers.iter().copied().filter(inside).collect();
        CoefficientSpec::full_cdr(p.axes, centers, p.half_width, cfg.contrast)
    };
    match cfg.test_case {
        TestCase::PureDiffusion => Ok(CoefficientSpec::pure_diffusion()),
        TestCase::FullCdrParallel => Ok(channels(ChannelKind::Parallel)),
        TestCase::FullCdrLattice => Ok(channels(ChannelKind::Lattice)),
        TestCase::Custom => {
            cfg.coefficients.clone().ok_or_else(|| Error::InvalidConfig("custom test case needs coefficients".into()))
        }
    }
}

pub fn build_system_with_h(cfg: &ExperimentConfig, h: f64) -> Result<TransferSystem> {
    let pair = build_pair(cfg.geometry.interior_rect()?, cfg.geometry.delta, h)?;
    build_system_on(cfg, &pair)
}

fn build_system_on(cfg: &ExperimentConfig, pair: &SubdomainPair) -> Result<TransferSystem> {
    let coeff = sample_coefficients(&coefficient_spec(cfg, pair.oversampling)?, &pair.grid)?;
    let t0 = Instant::now();
    let sys = build_transfer(pair, coeff)?;
    log::info!(
        "{}: {} boundary dofs, {} interior dofs, factorized in {:.2?}",
        cfg.output_prefix,
        sys.n_boundary(),
        sys.n_interior(),
        t0.elapsed()
    );
    Ok(sys)
}

pub fn build_system(cfg: &ExperimentConfig) -> Result<TransferSystem> {
    build_system_with_h(cfg, cfg.geometry.h.value()?)
}

/// Files written so far by one run; removed on drop unless committed.
struct Artifacts {
    paths: Vec<PathBuf>,
    committed: bool,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { paths: Vec::new(), committed: false })
    }

    fn track(&mut self, p: PathBuf) -> PathBuf {
        self.paths.push(p.clone());
        p
    }

    fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.paths)
    }
}

impl Drop for Artifacts {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.paths {
                let _ = std::fs::remove_file(p);
            }
        }
    }
}

fn artifact(cfg: &ExperimentConfig, suffix: &str) -> PathBuf {
    cfg.out_dir.join(format!("{}_{suffix}.csv", cfg.output_prefix))
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub range: RangeApproximation,
    pub errors: Option<ErrorTable>,
    pub sigmas: Option<Vec<f64>>,
    pub n_boundary: usize,
    pub artifacts: Vec<PathBuf>,
}

impl ExperimentOutcome {
    pub fn basis_size(&self) -> usize {
        self.range.len()
    }
}

/// Projection errors of `n_eval` fresh transfer images onto `basis`.
pub fn evaluate(sys: &TransferSystem, basis: &[Vec<f64>], seed: u64, n_eval: usize) -> Result<ErrorTable> {
    let (_, samples) = random_samples(sys, seed, streams::EVAL, n_eval)?;
    projection_errors(basis, &samples, &sys.weighted_gram_interior, sys.interior_space().n_flux())
}

fn write_summary(cfg: &ExperimentConfig, sys: &TransferSystem, out: &ExperimentOutcome, path: &Path) -> Result<()> {
    let r = &out.range;
    let mut s = String::new();
    writeln!(s, "test_case = {:?}", cfg.test_case).unwrap();
    writeln!(s, "delta = {}", sys.pair.delta).unwrap();
    writeln!(s, "h = {}", sys.pair.grid.h).unwrap();
    writeln!(s, "boundary_dofs = {}", sys.n_boundary()).unwrap();
    writeln!(s, "interior_dofs = {}", sys.n_interior()).unwrap();
    writeln!(s, "positivity_epsilon = {}", sys.positivity.epsilon).unwrap();
    writeln!(s, "basis_size = {}", r.len()).unwrap();
    writeln!(s, "termination = {:?}", r.termination).unwrap();
    writeln!(s, "draws = {}", r.draws).unwrap();
    if let Some(c) = r.c_est {
        writeln!(s, "c_est = {c}").unwrap();
    }
    if let Some(last) = r.training_log.last() {
        writeln!(s, "final_estimate = {}", last.estimate).unwrap();
    }
    if let Some(e) = &out.errors {
        if let Some(m) = e.median_total().last() {
            writeln!(s, "median_error_at_basis_size = {m}").unwrap();
        }
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Range approximation only: basis and training log.
pub fn run_training(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run(cfg, false, false)
}

/// Training, evaluation on `n_eval` fresh samples and, if enabled and affordable,
/// the singular values of the transfer operator.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run(cfg, true, cfg.oracle)
}

fn run(cfg: &ExperimentConfig, evaluate_errors: bool, with_oracle: bool) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let sys = build_system(cfg)?;
    run_on(cfg, &sys, evaluate_errors, with_oracle)
}

fn run_on(
    cfg: &ExperimentConfig,
    sys: &TransferSystem,
    evaluate_errors: bool,
    with_oracle: bool,
) -> Result<ExperimentOutcome> {
    let mut files = Artifacts::new(&cfg.out_dir)?;
    let t0 = Instant::now();
    let range = adaptive_range(sys, &cfg.training_config())?;
    log::info!("{}: trained {} vectors in {:.2?}", cfg.output_prefix, range.len(), t0.elapsed());
    emit_basis(&range.basis, sys.interior_space().n_flux(), &files.track(artifact(cfg, "basis")))?;
    emit_training_log(&range.training_log, &files.track(artifact(cfg, "training")))?;

    let errors = if evaluate_errors && cfg.n_eval > 0 {
        let table = evaluate(sys, &range.basis, cfg.seed, cfg.n_eval)?;
        emit_csv(&table, &files.track(artifact(cfg, "errors")))?;
        Some(table)
    } else {
        None
    };

    let sigmas = if with_oracle && sys.n_boundary() <= DEFAULT_DENSE_CAP {
        let o = oracle(sys, DEFAULT_DENSE_CAP)?;
        let s = o.sigmas.unwrap_or_default();
        emit_sigmas(&s, &files.track(artifact(cfg, "sigmas")))?;
        Some(s)
    } else {
        if with_oracle {
            log::warn!(
                "{}: {} boundary dofs exceed the dense cap, no singular values",
                cfg.output_prefix,
                sys.n_boundary()
            );
        }
        None
    };

    let mut out = ExperimentOutcome { range, errors, sigmas, n_boundary: sys.n_boundary(), artifacts: Vec::new() };
    let summary = files.track(cfg.out_dir.join(format!("{}_summary.txt", cfg.output_prefix)));
    write_summary(cfg, sys, &out, &summary)?;
    out.artifacts = files.commit();
    Ok(out)
}

/// SVD-optimal spaces: singular values and, if `n_eval > 0`, the projection
/// errors of the first `max_basis` left singular vectors.
pub fn run_oracle(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let sys = build_system(cfg)?;
    let mut files = Artifacts::new(&cfg.out_dir)?;
    let full = oracle(&sys, DEFAULT_DENSE_CAP)?;
    let sigmas = full.sigmas.clone().unwrap_or_default();
    emit_sigmas(&sigmas, &files.track(artifact(cfg, "sigmas")))?;
    let range = full.truncated(cfg.training.max_basis);
    let errors = if cfg.n_eval > 0 {
        let table = evaluate(&sys, &range.basis, cfg.seed, cfg.n_eval)?;
        emit_csv(&table, &files.track(artifact(cfg, "oracle_errors")))?;
        Some(table)
    } else {
        None
    };
    Ok(ExperimentOutcome {
        range,
        errors,
        sigmas: Some(sigmas),
        n_boundary: sys.n_boundary(),
        artifacts: files.commit(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub delta: f64,
    pub h: f64,
    pub n_cells: usize,
    pub basis_size: usize,
    pub wall_time: f64,
}

/// One experiment per oversampling margin, run in parallel. Margins that do not
/// align with `geometry.h` fall back to `study.fallback_h`.
///
/// The summary CSV holds `delta,h,n_cells,basis_size` and stays byte-reproducible;
/// wall times go to a separate text file.
pub fn oversampling_study(cfg: &ExperimentConfig, deltas: &[f64]) -> Result<Vec<StudyRow>> {
    cfg.validate()?;
    if deltas.is_empty() {
        return Err(Error::InvalidConfig("no oversampling margins given".into()));
    }
    let interior = cfg.geometry.interior_rect()?;
    let h = cfg.geometry.h.value()?;
    let fallback = cfg.study.fallback_h.value()?;
    let mut runs = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let (pair, used_h) = match build_pair(interior, delta, h) {
            Ok(p) => (p, h),
            Err(Error::NonConformingResolution { .. }) => {
                log::warn!("delta = {delta} does not align with h = {h}; using h = {fallback}");
                (build_pair(interior, delta, fallback)?, fallback)
            }
            Err(e) => return Err(e),
        };
        let mut sub = cfg.clone();
        sub.geometry.delta = delta;
        sub.geometry.h = used_h.into();
        sub.output_prefix = format!("{}_delta{delta}", cfg.output_prefix);
        runs.push((sub, pair, used_h));
    }

    let rows = runs
        .par_iter()
        .map(|(sub, pair, used_h)| {
            let t0 = Instant::now();
            let sys = build_system_on(sub, pair)?;
            let out = run_on(sub, &sys, true, sub.oracle)?;
            Ok(StudyRow {
                delta: pair.delta,
                h: *used_h,
                n_cells: pair.grid.n_cells(),
                basis_size: out.basis_size(),
                wall_time: t0.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let table: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.delta, r.h, r.n_cells as f64, r.basis_size as f64]).collect();
    emit_rows("delta,h,n_cells,basis_size", &table, &artifact(cfg, "oversampling"))?;
    let mut timing = String::from("delta wall_time_s\n");
    for r in &rows {
        writeln!(timing, "{} {:.3}", r.delta, r.wall_time).unwrap();
    }
    std::fs::write(cfg.out_dir.join(format!("{}_oversampling_timing.txt", cfg.output_prefix)), timing)?;
    Ok(rows)
}

/// Both sides of the Caccioppoli inequality for `samples` shifted local solutions
/// with Gaussian boundary data.
pub fn check_caccioppoli(cfg: &ExperimentConfig, samples: usize) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    let sys = build_system(cfg)?;
    let mut rng = GaussianStream::new(cfg.seed, streams::EVAL);
    let data: Vec<Vec<f64>> = (0..samples).map(|_| gaussian_vector(sys.n_boundary(), &mut rng)).collect();
    let pairs = caccioppoli_samples(&sys, &data)?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let rows: Vec<Vec<f64>> = pairs.iter().enumerate().map(|(i, &(l, r))| vec![i as f64, l, r, l / r]).collect();
    emit_rows("sample,lhs,rhs,ratio", &rows, &artifact(cfg, "caccioppoli"))?;
    Ok(pairs)
}

pub fn caccioppoli_samples(sys: &TransferSystem, data: &[Vec<f64>]) -> Result<Vec<(f64, f64)>> {
    data.par_iter()
        .map(|g| {
            let f = sys.shifted_solution(g)?;
            caccioppoli_ratio(sys, &f)
        })
        .collect()
}
