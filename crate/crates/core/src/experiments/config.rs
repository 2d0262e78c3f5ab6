use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::schemes::{hv_reference_theta, SchemeKind};
use crate::semidiscretize::{Coefficients, Grid2D, ProblemSpec};

/// Contents of a problem file.
///
/// The format is a flat list of `key = value` lines (a subset of TOML):
///
/// ```text
/// # benchmark problem
/// d11 = 0.025
/// d12 = -0.035
/// d22 = 0.1
/// c1 = -2
/// c2 = -3
/// gamma = 0.7
/// r = 0.05
/// T = 2
/// m1 = 50
/// m2 = 50
/// ```
///
/// Every key is optional; missing coefficients fall back to the benchmark
/// problem. Study settings may be given in the same file as arrays
/// (`theta = [0.5, 1.0]`, `mesh = [25, 50]`, `steps = [8, 16]`) and
/// `ref_steps = 2000`.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub d11: Option<f64>,
    pub d12: Option<f64>,
    pub d22: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub gamma: Option<f64>,
    pub r: Option<f64>,
    #[serde(rename = "T")]
    pub final_time: Option<f64>,
    pub m1: Option<usize>,
    pub m2: Option<usize>,
    pub theta: Option<Vec<f64>>,
    pub mesh: Option<Vec<usize>>,
    pub steps: Option<Vec<usize>>,
    pub ref_steps: Option<usize>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn problem(&self) -> Result<ProblemSpec<f64>> {
        let model = Coefficients::<f64>::model();
        let coefficients = Coefficients {
            d11: self.d11.unwrap_or(model.d11),
            d12: self.d12.unwrap_or(model.d12),
            d22: self.d22.unwrap_or(model.d22),
            c1: self.c1.unwrap_or(model.c1),
            c2: self.c2.unwrap_or(model.c2),
            gamma: self.gamma.unwrap_or(model.gamma),
        };
        ProblemSpec::new(coefficients, self.r.unwrap_or(0.05), self.final_time.unwrap_or(2.0))
    }

    /// Grid from `m1`/`m2`; a single given value is used for both directions.
    pub fn grid(&self) -> Result<Option<Grid2D>> {
        match (self.m1, self.m2) {
            (None, None) => Ok(None),
            (Some(a), None) | (None, Some(a)) => Grid2D::new(a, a).map(Some),
            (Some(a), Some(b)) => Grid2D::new(a, b).map(Some),
        }
    }
}

/// Settings of a convergence study.
#[derive(Clone)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec<f64>,
    /// Square meshes `m1 = m2 = m`.
    pub meshes: Vec<usize>,
    /// Steps per unit time; a run takes `N * T` steps of size `1/N`.
    pub steps: Vec<usize>,
    pub thetas: Vec<f64>,
    pub scheme: SchemeKind,
    /// HV reference, steps per unit time.
    pub reference_steps: usize,
    pub reference_theta: f64,
    /// Meshes with at most this many unknowns get the HV reference checked
    /// against the matrix exponential.
    pub cross_check_max_unknowns: usize,
    pub cross_check_tolerance: f64,
    pub out_dir: Option<PathBuf>,
    /// Record wall-clock times; off gives byte-identical CSV across runs.
    pub timing: bool,
    pub parallel: bool,
}

impl ExperimentConfig {
    /// Desk-scale study of the benchmark problem.
    pub fn desk_scale() -> Self {
        Self {
            problem: ProblemSpec::model(),
            meshes: vec![25, 50, 100],
            steps: vec![8, 16, 32, 64, 128],
            thetas: vec![0.25, 1.0 / 3.0, 0.5, 1.0],
            scheme: SchemeKind::Mcs,
            reference_steps: 2000,
            reference_theta: hv_reference_theta(),
            cross_check_max_unknowns: 625,
            cross_check_tolerance: 1e-8,
            out_dir: None,
            timing: true,
            parallel: true,
        }
    }

    /// Settings of the published study: meshes up to 200, reference with
    /// `10^4` steps per unit time.
    pub fn paper_scale() -> Self {
        Self {
            meshes: vec![25, 50, 100, 150, 200],
            steps: vec![8, 16, 32, 64, 128, 256, 512],
            reference_steps: 10_000,
            ..Self::desk_scale()
        }
    }

    /// Applies study settings present in a problem file.
    pub fn apply_file(mut self, file: &ProblemFile) -> Result<Self> {
        self.problem = file.problem()?;
        if let Some(t) = &file.theta {
            self.thetas = t.clone();
        }
        if let Some(m) = &file.mesh {
            self.meshes = m.clone();
        } else if let Some(g) = file.grid()? {
            if g.m1() != g.m2() {
                return Err(Error::Config("studies use square meshes (m1 = m2)".into()));
            }
            self.meshes = vec![g.m1()];
        }
        if let Some(s) = &file.steps {
            self.steps = s.clone();
        }
        if let Some(r) = file.ref_steps {
            self.reference_steps = r;
        }
        Ok(self)
    }

    /// Total step count for `n` steps per unit time over `[0, T]`.
    pub fn total_steps(&self, n: usize) -> Result<usize> {
        let total = n as f64 * self.problem.final_time();
        let rounded = total.round();
        if (total - rounded).abs() > 1e-9 * total.max(1.0) || rounded < 1.0 {
            return Err(Error::Config(format!(
                "N = {n} does not give a whole number of steps over T = {}",
                self.problem.final_time()
            )));
        }
        Ok(rounded as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if self.meshes.is_empty() || self.steps.is_empty() || self.thetas.is_empty() {
            return Err(Error::Config("mesh, step and theta lists must be non-empty".into()));
        }
        for &m in &self.meshes {
            Grid2D::square(m)?;
        }
        for &t in &self.thetas {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::Config(format!("theta must be positive, got {t}")));
            }
            if self.scheme == SchemeKind::Cs && t != 0.5 {
                return Err(Error::Config(format!("CS fixes theta = 1/2, got {t}")));
            }
        }
        // Self-comparison of the reference scheme is the one case where the
        // reference resolution may equal a tested one.
        let self_reference = self.scheme == SchemeKind::Hv;
        for &n in &self.steps {
            if n == 0 {
                return Err(Error::Config("N must be at least 1".into()));
            }
            let ok = if self_reference {
                self.reference_steps >= n
            } else {
                self.reference_steps > n
            };
            if !ok {
                return Err(Error::Config(format!(
                    "reference N = {} must exceed every tested N (got {n})",
                    self.reference_steps
                )));
            }
            self.total_steps(n)?;
        }
        self.total_steps(self.reference_steps)?;
        Ok(())
    }
}
