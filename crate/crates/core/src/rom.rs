//! Reduced linear Hamiltonian systems, reduced solves and evaluation metrics.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{pod_loss, psd_loss, BasisMethod, PreparedBasis};
use crate::integrator::{implicit_midpoint_linear, solve_full, LinearOde, SnapshotMatrix, TimeGrid, Trajectory};
use crate::models::{CantileverLattice, ExperimentDesign, ForcingProfile, LinearHamiltonianSystem, Param};
use crate::spectral::singular_values;
use crate::symplectic::{PoissonOperator, ReducedBasis};
use crate::{Error, Matrix, Result, Vector};

/// A reduced simulation preserves the Hamiltonian when its relative drift
/// stays below this bound at every time step.
pub const DRIFT_TOL: f64 = 1e-10;

/// Relative errors above this value are clamped in figure data.
pub const ERROR_CLAMP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMode {
    /// `W^T = V^+`, reduced operator `J_2k H_hat`.
    Symplectic,
    /// `W = V` for orthonormal bases.
    Galerkin,
}

impl ProjectionMode {
    /// Symplectic projection for symplectic bases, Galerkin otherwise.
    pub fn for_basis(v: &ReducedBasis) -> Self {
        if v.kind().is_symplectic() {
            ProjectionMode::Symplectic
        } else {
            ProjectionMode::Galerkin
        }
    }

    fn check(self, v: &ReducedBasis) -> Result<()> {
        match self {
            ProjectionMode::Symplectic if !v.kind().is_symplectic() => Err(Error::Mode(format!(
                "symplectic projection needs a symplectic basis, got {}",
                v.kind()
            ))),
            ProjectionMode::Galerkin if !v.kind().is_orthonormal() => Err(Error::Mode(format!(
                "Galerkin projection needs an orthonormal basis, got {}",
                v.kind()
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ProjectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProjectionMode::Symplectic => "symplectic",
            ProjectionMode::Galerkin => "galerkin",
        })
    }
}

impl FromStr for ProjectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symplectic" => Ok(ProjectionMode::Symplectic),
            "galerkin" => Ok(ProjectionMode::Galerkin),
            _ => Err(Error::Config(format!("unknown projection mode '{s}'"))),
        }
    }
}

/// `x_hat' = A_hat x_hat + value(t) b_hat` with `A_hat = W^T J H V`.
#[derive(Debug, Clone)]
pub struct ReducedLinearSystem {
    /// `V^T H V`, symmetric.
    pub h_hat: Matrix,
    /// `V^T h` for the unit profile.
    pub h_vec: Vector,
    pub a_hat: Matrix,
    pub b_hat: Vector,
    pub x0_hat: Vector,
    pub profile: ForcingProfile,
    pub mode: ProjectionMode,
    pub param: Option<Param>,
}

impl ReducedLinearSystem {
    fn assemble(
        h_hat: Matrix,
        h_vec: Vector,
        galerkin: Option<(Matrix, Vector)>,
        x0_hat: Vector,
        profile: ForcingProfile,
        mode: ProjectionMode,
        param: Option<Param>,
    ) -> Result<Self> {
        let h_hat = (&h_hat + h_hat.transpose()) * 0.5;
        let (a_hat, b_hat) = match galerkin {
            Some(ab) => ab,
            None => {
                let j = PoissonOperator::for_dim(h_hat.nrows())?;
                (j.left_mul(&h_hat)?, j.apply(&h_vec)?)
            }
        };
        Ok(Self {
            h_hat,
            h_vec,
            a_hat,
            b_hat,
            x0_hat,
            profile,
            mode,
            param,
        })
    }

    pub fn size(&self) -> usize {
        self.h_hat.nrows()
    }

    pub fn ode(&self) -> LinearOde {
        LinearOde {
            a: self.a_hat.clone(),
            b: self.b_hat.clone(),
            profile: self.profile,
        }
    }

    /// `1/2 x^T H_hat x + value(t) x^T h_hat`.
    pub fn hamiltonian(&self, x: &Vector, t: f64) -> f64 {
        0.5 * x.dot(&(&self.h_hat * x)) + self.profile.value(t) * x.dot(&self.h_vec)
    }
}

/// `W^T` for the projection mode.
fn left_projector(v: &ReducedBasis, mode: ProjectionMode) -> Matrix {
    match mode {
        ProjectionMode::Symplectic => v.symplectic_inverse(),
        ProjectionMode::Galerkin => v.matrix().transpose(),
    }
}

/// Projects `sys` onto `V`.
pub fn reduce_system(
    sys: &LinearHamiltonianSystem,
    v: &ReducedBasis,
    mode: ProjectionMode,
) -> Result<ReducedLinearSystem> {
    mode.check(v)?;
    if v.full_dim() != sys.dim() {
        return Err(Error::dim(format!(
            "basis has {} rows, system dimension is {}",
            v.full_dim(),
            sys.dim()
        )));
    }
    let vm = v.matrix();
    let mut hv = Matrix::zeros(sys.dim(), v.size());
    for j in 0..v.size() {
        hv.set_column(j, &sys.apply_h(&vm.column(j).into_owned()));
    }
    let h_hat = vm.tr_mul(&hv);
    let h_vec = vm.tr_mul(&sys.h_shape());
    let wt = left_projector(v, mode);
    let galerkin = match mode {
        ProjectionMode::Symplectic => None,
        ProjectionMode::Galerkin => {
            let ode = sys.ode();
            Some((&wt * &ode.a * vm, &wt * &ode.b))
        }
    };
    ReducedLinearSystem::assemble(h_hat, h_vec, galerkin, &wt * &sys.x0, sys.profile, mode, sys.param)
}

/// Parameter-independent reduced pieces of the cantilever for one basis:
/// `H_hat(mu) = theta_1 K1_hat + theta_2 K2_hat + M_hat`.
#[derive(Debug, Clone)]
pub struct ReducedOperators {
    mode: ProjectionMode,
    k1: Matrix,
    k2: Matrix,
    m: Matrix,
    h_vec: Vector,
    /// Galerkin pieces `V^T J H_i V` and `V^T J h`.
    galerkin: Option<([Matrix; 3], Vector)>,
    wt: Matrix,
}

impl ReducedOperators {
    pub fn new(model: &CantileverLattice, v: &ReducedBasis, mode: ProjectionMode) -> Result<Self> {
        mode.check(v)?;
        let n = model.n();
        if v.full_dim() != 2 * n {
            return Err(Error::dim(format!(
                "basis has {} rows, model dimension is {}",
                v.full_dim(),
                2 * n
            )));
        }
        let vm = v.matrix();
        let vq = vm.rows(0, n);
        let vp = vm.rows(n, n);
        let k1 = vq.transpose() * (model.k1() * vq);
        let k2 = vq.transpose() * (model.k2() * vq);
        let mut mvp = vp.into_owned();
        for (i, mut row) in mvp.row_iter_mut().enumerate() {
            row *= model.mass_inverse()[i];
        }
        let m = vp.transpose() * &mvp;
        let h_vec = -(vq.transpose() * model.load_shape());
        let galerkin = match mode {
            ProjectionMode::Symplectic => None,
            ProjectionMode::Galerkin => {
                // V^T J = [-Vp^T, Vq^T].
                let k1v = model.k1() * vq;
                let k2v = model.k2() * vq;
                let a1 = -(vp.transpose() * k1v);
                let a2 = -(vp.transpose() * k2v);
                let am = vq.transpose() * &mvp;
                let b = vp.transpose() * model.load_shape();
                Some(([a1, a2, am], b))
            }
        };
        Ok(Self {
            mode,
            k1,
            k2,
            m,
            h_vec,
            galerkin,
            wt: left_projector(v, mode),
        })
    }

    pub fn mode(&self) -> ProjectionMode {
        self.mode
    }

    /// Online assembly for one parameter.
    pub fn system(
        &self,
        model: &CantileverLattice,
        p: Param,
        profile: ForcingProfile,
        x0: &Vector,
    ) -> Result<ReducedLinearSystem> {
        let (t1, t2) = model.theta(p)?;
        if x0.len() != self.wt.ncols() {
            return Err(Error::dim("initial state does not match the basis"));
        }
        let h_hat = &self.k1 * t1 + &self.k2 * t2 + &self.m;
        let galerkin = self
            .galerkin
            .as_ref()
            .map(|([a1, a2, am], b)| (a1 * t1 + a2 * t2 + am, b.clone()));
        ReducedLinearSystem::assemble(
            h_hat,
            self.h_vec.clone(),
            galerkin,
            &self.wt * x0,
            profile,
            self.mode,
            Some(p),
        )
    }
}

/// Reduced trajectory with its reduced Hamiltonian per time step.
#[derive(Debug, Clone)]
pub struct ReducedTrajectory {
    pub trajectory: Trajectory,
    pub hamiltonian: Vec<f64>,
}

pub fn solve_reduced(red: &ReducedLinearSystem, grid: &TimeGrid) -> Result<ReducedTrajectory> {
    let mut trajectory = implicit_midpoint_linear(&red.ode(), grid, &red.x0_hat)?;
    trajectory.param = red.param;
    let hamiltonian = (0..trajectory.nt())
        .map(|i| red.hamiltonian(&trajectory.state(i), trajectory.times[i]))
        .collect();
    Ok(ReducedTrajectory {
        trajectory,
        hamiltonian,
    })
}

/// `max_i ||x_i - V x_hat_i||_inf / max_i ||x_i||_inf`.
pub fn relative_error(full: &Trajectory, reduced: &Trajectory, v: &ReducedBasis) -> Result<f64> {
    if full.nt() != reduced.nt() {
        return Err(Error::dim(format!(
            "{} full and {} reduced time steps",
            full.nt(),
            reduced.nt()
        )));
    }
    if full.dim() != v.full_dim() || reduced.dim() != v.size() {
        return Err(Error::dim("trajectories do not match the basis"));
    }
    let lifted = v.matrix() * &reduced.states;
    let num = (&full.states - lifted)
        .column_iter()
        .map(|c| c.amax())
        .fold(0.0, f64::max);
    let den = full.states.column_iter().map(|c| c.amax()).fold(0.0, f64::max);
    if den == 0.0 {
        return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(num / den)
}

/// Normalization of the Hamiltonian drift: the largest quadratic energy
/// `1/2 x^T H x` along the full trajectory.
pub fn hamiltonian_scale(sys: &LinearHamiltonianSystem, full: &Trajectory) -> Result<f64> {
    let h = (0..full.nt())
        .map(|i| sys.quadratic_energy(&full.state(i)))
        .fold(0.0, f64::max);
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Config(format!("Hamiltonian scale {h:e} is not positive")));
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianDrift {
    pub preserved: bool,
    pub max_relative: f64,
    /// `(H_i - H_0) / H_rel` per time step.
    pub profile: Vec<f64>,
}

pub fn hamiltonian_drift(hamiltonian: &[f64], h_rel: f64) -> Result<HamiltonianDrift> {
    if !(h_rel > 0.0) {
        return Err(Error::Config(format!("H_rel must be positive, got {h_rel:e}")));
    }
    let h0 = *hamiltonian
        .first()
        .ok_or_else(|| Error::dim("empty Hamiltonian profile"))?;
    let profile: Vec<f64> = hamiltonian.iter().map(|h| (h - h0) / h_rel).collect();
    let max_relative = profile.iter().map(|d| d.abs()).fold(0.0, f64::max);
    Ok(HamiltonianDrift {
        preserved: max_relative < DRIFT_TOL && max_relative.is_finite(),
        max_relative,
        profile,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    Failed(String),
}

impl Status {
    pub fn is_ok(&self) -> bool {
        matches!(self, Status::Ok)
    }

    pub fn label(&self) -> String {
        match self {
            Status::Ok => "ok".into(),
            Status::Failed(r) => format!("failed: {r}"),
        }
    }
}

/// Basis-level results of one `(method, 2k)` pair.
#[derive(Debug, Clone)]
pub struct BasisRecord {
    pub method: BasisMethod,
    pub size: usize,
    pub status: Status,
    /// Actual number of columns, which greedy may reduce.
    pub actual_size: usize,
    pub e_l2: f64,
    pub orthonormality: f64,
    pub symplecticity: f64,
    pub warnings: Vec<String>,
    pub seconds: f64,
}

/// Results of one `(method, 2k, test parameter)` cell.
#[derive(Debug, Clone)]
pub struct CellRecord {
    pub method: BasisMethod,
    pub size: usize,
    pub mu_index: usize,
    pub param: Param,
    pub status: Status,
    pub relative_error: f64,
    pub drift: Option<HamiltonianDrift>,
    pub seconds: f64,
}

/// Singular value spectra of the training snapshots.
#[derive(Debug, Clone, Default)]
pub struct Spectra {
    pub singular: Vec<f64>,
    pub symplectic: Vec<f64>,
    pub weighted: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EvaluationReport {
    /// Sorted by method, then size.
    pub bases: Vec<BasisRecord>,
    /// Sorted by method, size, then test parameter index.
    pub cells: Vec<CellRecord>,
    pub spectra: Spectra,
    pub test_params: Vec<Param>,
    pub snapshot_norm_sq: f64,
}

impl EvaluationReport {
    /// Cells with `preserved` flags for one method.
    pub fn preservation(&self, method: BasisMethod) -> (usize, usize) {
        let cells: Vec<&CellRecord> = self.cells.iter().filter(|c| c.method == method).collect();
        let preserved = cells
            .iter()
            .filter(|c| c.status.is_ok() && c.drift.as_ref().is_some_and(|d| d.preserved))
            .count();
        (preserved, cells.len())
    }

    /// Re-evaluates every `preserved` flag against `tol`.
    pub fn apply_drift_tolerance(&mut self, tol: f64) {
        for d in self.cells.iter_mut().filter_map(|c| c.drift.as_mut()) {
            d.preserved = d.max_relative < tol && d.max_relative.is_finite();
        }
    }

    pub fn basis_record(&self, method: BasisMethod, size: usize) -> Option<&BasisRecord> {
        self.bases.iter().find(|b| b.method == method && b.size == size)
    }

    pub fn errors(&self, method: BasisMethod, size: usize) -> Vec<f64> {
        self.cells
            .iter()
            .filter(|c| c.method == method && c.size == size && c.status.is_ok())
            .map(|c| c.relative_error)
            .collect()
    }
}

struct FullSolution {
    trajectory: Trajectory,
    h_rel: Result<f64>,
}

/// Projection error `e_l2` of a basis on the snapshots in its own class.
pub fn projection_error(v: &ReducedBasis, x: &Matrix) -> Result<f64> {
    if v.kind().is_symplectic() {
        psd_loss(v, x)
    } else {
        pod_loss(v, x)
    }
}

/// Trains every method on `snapshots`, evaluates each sweep size on the test
/// parameters and collects all metrics. Failures are recorded per cell.
pub fn run_generalization_experiment(
    model: &CantileverLattice,
    design: &ExperimentDesign,
    profile: ForcingProfile,
    snapshots: &SnapshotMatrix,
    methods: &[BasisMethod],
) -> Result<EvaluationReport> {
    let x = &snapshots.data;
    if x.nrows() != 2 * model.n() {
        return Err(Error::dim("snapshots do not match the model"));
    }
    let max_size = design.sweep.iter().copied().max().unwrap_or(0);

    let full: Vec<FullSolution> = design
        .test
        .par_iter()
        .map(|&p| -> Result<FullSolution> {
            let trajectory = solve_full(model, p, profile, &design.grid)?;
            let sys = model.system(p, profile)?;
            let h_rel = hamiltonian_scale(&sys, &trajectory);
            Ok(FullSolution { trajectory, h_rel })
        })
        .collect::<Result<_>>()?;

    let mut methods: Vec<BasisMethod> = methods.to_vec();
    methods.sort();
    methods.dedup();

    let prepared: Vec<(BasisMethod, std::result::Result<PreparedBasis, String>, f64)> = methods
        .par_iter()
        .map(|&m| {
            let t = Instant::now();
            let p = PreparedBasis::new(m, x, max_size).map_err(|e| e.to_string());
            (m, p, t.elapsed().as_secs_f64())
        })
        .collect();

    let mut spectra = Spectra {
        singular: singular_values(x).iter().copied().collect(),
        ..Spectra::default()
    };
    if let Some((_, Ok(p), _)) = prepared.iter().find(|(m, _, _)| *m == BasisMethod::PsdSvdLike) {
        if let Some((f, w)) = p.svd_like() {
            spectra.symplectic = f.sigma().to_vec();
            spectra.weighted = w.weights.clone();
        }
    }

    let mut tasks = Vec::new();
    for (i, _) in prepared.iter().enumerate() {
        for &size in &design.sweep {
            tasks.push((i, size));
        }
    }
    let results: Vec<(BasisRecord, Vec<CellRecord>)> = tasks
        .par_iter()
        .map(|&(i, size)| {
            let (method, prep, prep_seconds) = &prepared[i];
            evaluate_size(model, design, profile, x, *method, prep, *prep_seconds, size, &full)
        })
        .collect();

    let mut bases = Vec::with_capacity(results.len());
    let mut cells = Vec::new();
    for (b, c) in results {
        bases.push(b);
        cells.extend(c);
    }
    bases.sort_by(|a, b| (a.method, a.size).cmp(&(b.method, b.size)));
    cells.sort_by(|a, b| (a.method, a.size, a.mu_index).cmp(&(b.method, b.size, b.mu_index)));
    Ok(EvaluationReport {
        bases,
        cells,
        spectra,
        test_params: design.test.clone(),
        snapshot_norm_sq: x.norm_squared(),
    })
}

#[allow(clippy::too_many_arguments)]
fn evaluate_size(
    model: &CantileverLattice,
    design: &ExperimentDesign,
    profile: ForcingProfile,
    x: &Matrix,
    method: BasisMethod,
    prepared: &std::result::Result<PreparedBasis, String>,
    prep_seconds: f64,
    size: usize,
    full: &[FullSolution],
) -> (BasisRecord, Vec<CellRecord>) {
    let start = Instant::now();
    let failed = |reason: String| {
        let record = BasisRecord {
            method,
            size,
            status: Status::Failed(reason.clone()),
            actual_size: 0,
            e_l2: f64::NAN,
            orthonormality: f64::NAN,
            symplecticity: f64::NAN,
            warnings: Vec::new(),
            seconds: prep_seconds,
        };
        let cells = design
            .test
            .iter()
            .enumerate()
            .map(|(mu_index, &param)| CellRecord {
                method,
                size,
                mu_index,
                param,
                status: Status::Failed(reason.clone()),
                relative_error: f64::NAN,
                drift: None,
                seconds: 0.0,
            })
            .collect();
        (record, cells)
    };
    let prepared = match prepared {
        Ok(p) => p,
        Err(e) => return failed(e.clone()),
    };
    let outcome = match prepared.basis(size) {
        Ok(o) => o,
        Err(e) => return failed(e.to_string()),
    };
    let v = outcome.basis;
    let e_l2 = match projection_error(&v, x) {
        Ok(e) => e,
        Err(e) => return failed(e.to_string()),
    };
    let mode = ProjectionMode::for_basis(&v);
    let ops = match ReducedOperators::new(model, &v, mode) {
        Ok(o) => o,
        Err(e) => return failed(e.to_string()),
    };
    let record = BasisRecord {
        method,
        size,
        status: Status::Ok,
        actual_size: v.size(),
        e_l2,
        orthonormality: v.orthonormality(),
        symplecticity: v.symplecticity(),
        warnings: outcome.warnings,
        seconds: prep_seconds + start.elapsed().as_secs_f64(),
    };
    let cells = design
        .test
        .iter()
        .enumerate()
        .map(|(mu_index, &param)| {
            let t = Instant::now();
            let result = evaluate_cell(model, design, profile, &ops, &v, param, &full[mu_index]);
            let seconds = t.elapsed().as_secs_f64();
            match result {
                Ok((relative_error, drift)) => CellRecord {
                    method,
                    size,
                    mu_index,
                    param,
                    status: Status::Ok,
                    relative_error,
                    drift: Some(drift),
                    seconds,
                },
                Err(e) => CellRecord {
                    method,
                    size,
                    mu_index,
                    param,
                    status: Status::Failed(e.to_string()),
                    relative_error: f64::NAN,
                    drift: None,
                    seconds,
                },
            }
        })
        .collect();
    (record, cells)
}

fn evaluate_cell(
    model: &CantileverLattice,
    design: &ExperimentDesign,
    profile: ForcingProfile,
    ops: &ReducedOperators,
    v: &ReducedBasis,
    param: Param,
    full: &FullSolution,
) -> Result<(f64, HamiltonianDrift)> {
    let x0 = Vector::zeros(2 * model.n());
    let red = ops.system(model, param, profile, &x0)?;
    let sol = solve_reduced(&red, &design.grid)?;
    let err = relative_error(&full.trajectory, &sol.trajectory, v)?;
    let h_rel = match &full.h_rel {
        Ok(h) => *h,
        Err(e) => return Err(Error::Config(e.to_string())),
    };
    let drift = hamiltonian_drift(&sol.hamiltonian, h_rel)?;
    Ok((err, drift))
}
