use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::analysis::ExponentialReference;
use crate::error::{Error, Result};
use crate::linalg::ScaledVector;
use crate::schemes::{integrate, SchemeConfig, SchemeKind};
use crate::semidiscretize::{assemble, initial_vector, Grid2D, SplitOperator2D};

use super::config::ExperimentConfig;

/// One point of an error-versus-step-size curve.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRecord {
    pub scheme: SchemeKind,
    pub theta: f64,
    pub m1: usize,
    pub m2: usize,
    /// Steps per unit time.
    pub n: usize,
    /// Scaled Euclidean norm of `U(T) - U_N`.
    pub error: f64,
    pub wall_time: Duration,
}

/// A cell that could not be computed.
#[derive(Clone, Debug, PartialEq)]
pub struct CellFailure {
    pub theta: f64,
    pub m: usize,
    pub n: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StudyOutcome {
    /// Sorted by `(theta, m, N)`.
    pub records: Vec<ErrorRecord>,
    pub failures: Vec<CellFailure>,
    /// `(m, |U_ref - U_exp|)` for meshes whose reference was cross-checked.
    pub cross_checks: Vec<(usize, f64)>,
}

struct MeshSetup {
    m: usize,
    op: SplitOperator2D<f64>,
    u0: ScaledVector<f64>,
    reference: ScaledVector<f64>,
    cross_check: Option<f64>,
}

fn prepare_mesh(config: &ExperimentConfig, m: usize) -> Result<MeshSetup> {
    let grid = Grid2D::square(m)?;
    let op = assemble(&config.problem, &grid)?;
    let u0 = initial_vector(&config.problem, &grid);
    let horizon = config.problem.final_time();
    let ref_config = SchemeConfig::covering(
        SchemeKind::Hv,
        config.reference_theta,
        horizon,
        config.total_steps(config.reference_steps)?,
    )?;
    let reference = integrate(&ref_config, &op, &u0)?;
    let cross_check = if grid.len() <= config.cross_check_max_unknowns {
        let exact = ExponentialReference::new(&op.to_dense()?)?.solution_at(&u0, horizon)?;
        let gap = reference.sub(&exact).norm();
        if !(gap <= config.cross_check_tolerance) {
            return Err(Error::ReferenceMismatch(format!(
                "HV reference at m = {m} differs from the matrix exponential by {gap:e}"
            )));
        }
        Some(gap)
    } else {
        None
    };
    Ok(MeshSetup {
        m,
        op,
        u0,
        reference,
        cross_check,
    })
}

fn run_cell(config: &ExperimentConfig, setup: &MeshSetup, theta: f64, n: usize) -> Result<ErrorRecord> {
    let start = Instant::now();
    let steps = config.total_steps(n)?;
    let sc = SchemeConfig::new(config.scheme, theta, 1.0 / n as f64, steps)?;
    let u = integrate(&sc, &setup.op, &setup.u0)?;
    let error = u.sub(&setup.reference).norm();
    let wall_time = if config.timing {
        start.elapsed()
    } else {
        Duration::ZERO
    };
    if error.is_nan() {
        return Err(Error::InvalidParameter("error evaluated to NaN".into()));
    }
    Ok(ErrorRecord {
        scheme: config.scheme,
        theta,
        m1: setup.m,
        m2: setup.m,
        n,
        error,
        wall_time,
    })
}

fn map_maybe_parallel<I, O, F>(parallel: bool, items: Vec<I>, f: F) -> Vec<O>
where
    I: Send,
    O: Send,
    F: Fn(I) -> O + Sync + Send,
{
    if parallel {
        items.into_par_iter().map(f).collect()
    } else {
        items.into_iter().map(f).collect()
    }
}

/// Error of the configured scheme against the HV reference for every
/// `(theta, m, N)` cell.
///
/// A failing cell is recorded and the study continues; a reference that
/// disagrees with the matrix exponential aborts the study.
pub fn run_convergence_study(config: &ExperimentConfig) -> Result<StudyOutcome> {
    config.validate()?;
    let mut meshes = config.meshes.clone();
    meshes.sort_unstable();
    meshes.dedup();

    let setups = map_maybe_parallel(config.parallel, meshes, |m| (m, prepare_mesh(config, m)));
    let mut outcome = StudyOutcome::default();
    let mut ready = Vec::new();
    for (m, setup) in setups {
        match setup {
            Ok(s) => ready.push(s),
            Err(e @ Error::ReferenceMismatch(_)) => return Err(e),
            Err(e) => {
                let reason = format!("reference: {e}");
                for &theta in &config.thetas {
                    for &n in &config.steps {
                        outcome.failures.push(CellFailure {
                            theta,
                            m,
                            n,
                            reason: reason.clone(),
                        });
                    }
                }
            }
        }
    }
    outcome.cross_checks = ready.iter().filter_map(|s| s.cross_check.map(|g| (s.m, g))).collect();

    let cells: Vec<(f64, &MeshSetup, usize)> = config
        .thetas
        .iter()
        .flat_map(|&theta| {
            ready
                .iter()
                .flat_map(move |s| config.steps.iter().map(move |&n| (theta, s, n)))
        })
        .collect();
    let results = map_maybe_parallel(config.parallel, cells, |(theta, setup, n)| {
        run_cell(config, setup, theta, n).map_err(|e| CellFailure {
            theta,
            m: setup.m,
            n,
            reason: e.to_string(),
        })
    });
    for r in results {
        match r {
            Ok(rec) => outcome.records.push(rec),
            Err(f) => outcome.failures.push(f),
        }
    }
    outcome.records.sort_by(|a, b| {
        a.theta
            .total_cmp(&b.theta)
            .then(a.m1.cmp(&b.m1))
            .then(a.n.cmp(&b.n))
    });
    outcome.failures.sort_by(|a, b| {
        a.theta
            .total_cmp(&b.theta)
            .then(a.m.cmp(&b.m))
            .then(a.n.cmp(&b.n))
    });
    Ok(outcome)
}

/// Convergence order between neighbouring step counts of one curve.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderEstimate {
    pub scheme: SchemeKind,
    pub theta: f64,
    pub m1: usize,
    pub m2: usize,
    pub n_coarse: usize,
    pub n_fine: usize,
    /// `None` when either error is zero or not finite.
    pub order: Option<f64>,
}

/// `log(e(N1)/e(N2)) / log(N2/N1)` for each pair of neighbouring `N` within
/// every `(scheme, theta, m1, m2)` group; `log2(e(N)/e(2N))` when `N` doubles.
pub fn observed_order(records: &[ErrorRecord]) -> Vec<OrderEstimate> {
    let mut groups: BTreeMap<(SchemeKind, u64, usize, usize), Vec<&ErrorRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.scheme, r.theta.to_bits(), r.m1, r.m2))
            .or_default()
            .push(r);
    }
    let mut out = Vec::new();
    for ((scheme, theta_bits, m1, m2), mut group) in groups {
        group.sort_by_key(|r| r.n);
        group.dedup_by_key(|r| r.n);
        for w in group.windows(2) {
            let (a, b) = (w[0], w[1]);
            let usable = |e: f64| e > 0.0 && e.is_finite();
            let order = (usable(a.error) && usable(b.error))
                .then(|| (a.error / b.error).ln() / (b.n as f64 / a.n as f64).ln());
            out.push(OrderEstimate {
                scheme,
                theta: f64::from_bits(theta_bits),
                m1,
                m2,
                n_coarse: a.n,
                n_fine: b.n,
                order,
            });
        }
    }
    out.sort_by(|a, b| {
        a.theta
            .total_cmp(&b.theta)
            .then(a.m1.cmp(&b.m1))
            .then(a.n_coarse.cmp(&b.n_coarse))
    });
    out
}

pub const CSV_HEADER: &str = "scheme,theta,m1,m2,N,error,wall_time_s";

pub fn records_to_csv(records: &[ErrorRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:e},{}",
            r.scheme,
            r.theta,
            r.m1,
            r.m2,
            r.n,
            r.error,
            r.wall_time.as_secs_f64()
        );
    }
    s
}

/// Two-column `(1/N, error)` text per `(theta, m)`, keyed by a file name.
pub fn plot_series(records: &[ErrorRecord]) -> BTreeMap<String, String> {
    let mut files: BTreeMap<String, String> = BTreeMap::new();
    for r in records {
        let name = format!("{}_theta{:.4}_m{}.dat", r.scheme, r.theta, r.m1).to_lowercase();
        let body = files
            .entry(name)
            .or_insert_with(|| format!("# {} theta={} m1={} m2={}\n# 1/N error\n", r.scheme, r.theta, r.m1, r.m2));
        let _ = writeln!(body, "{:e} {:e}", 1.0 / r.n as f64, r.error);
    }
    files
}

/// Writes `errors.csv` and one plot file per curve into `dir`.
pub fn write_study(dir: &Path, records: &[ErrorRecord]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("errors.csv"), records_to_csv(records))?;
    for (name, body) in plot_series(records) {
        std::fs::write(dir.join(name), body)?;
    }
    Ok(())
}
