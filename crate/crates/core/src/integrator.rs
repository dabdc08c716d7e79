//! Implicit midpoint rule for linear systems `x' = A x + value(t) b`.

use nalgebra::Dyn;
use nalgebra::LU;
use rayon::prelude::*;

use crate::models::{CantileverLattice, ExperimentDesign, ForcingProfile, Param};
use crate::{Error, Matrix, Result, Vector};

/// Uniform time grid with `nt` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t_end: f64,
    pub nt: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, nt: usize) -> Result<Self> {
        if nt < 2 {
            return Err(Error::Config(format!("time grid needs nt >= 2, got {nt}")));
        }
        if !(t_end > t0) || !t0.is_finite() || !t_end.is_finite() {
            return Err(Error::Config(format!("invalid time interval [{t0}, {t_end}]")));
        }
        Ok(Self { t0, t_end, nt })
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t0) / (self.nt - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.nt {
            self.t_end
        } else {
            self.t0 + i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nt).map(|i| self.time(i)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct LinearOde {
    pub a: Matrix,
    pub b: Vector,
    pub profile: ForcingProfile,
}

impl LinearOde {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// One state per column.
    pub states: Matrix,
    pub times: Vec<f64>,
    pub param: Option<Param>,
}

impl Trajectory {
    pub fn nt(&self) -> usize {
        self.times.len()
    }

    pub fn dim(&self) -> usize {
        self.states.nrows()
    }

    pub fn state(&self, i: usize) -> Vector {
        self.states.column(i).into_owned()
    }
}

/// One-step map with `I - dt/2 A` factored once.
pub struct MidpointStepper {
    lu: LU<f64, Dyn, Dyn>,
    plus: Matrix,
    b: Vector,
    profile: ForcingProfile,
    dt: f64,
}

impl MidpointStepper {
    pub fn new(ode: &LinearOde, dt: f64) -> Result<Self> {
        let dim = ode.dim();
        if ode.a.ncols() != dim || ode.b.len() != dim {
            return Err(Error::dim("ODE matrix and forcing sizes disagree"));
        }
        let half = &ode.a * (0.5 * dt);
        let id = Matrix::identity(dim, dim);
        let lu = (&id - &half).lu();
        let diag = lu.u().diagonal().map(f64::abs);
        let (lo, hi) = (diag.min(), diag.max());
        let pivot_ratio = if dim == 0 {
            1.0
        } else if hi > 0.0 {
            lo / hi
        } else {
            0.0
        };
        if !(pivot_ratio > f64::EPSILON) {
            return Err(Error::Integration { dt, pivot_ratio });
        }
        Ok(Self {
            lu,
            plus: id + half,
            b: ode.b.clone(),
            profile: ode.profile,
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `x` from time `t`.
    pub fn step(&self, x: &Vector, t: f64) -> Vector {
        let mut rhs = &self.plus * x;
        let f = self.profile.value(t + 0.5 * self.dt);
        if f != 0.0 {
            rhs.axpy(self.dt * f, &self.b, 1.0);
        }
        self.lu.solve_mut(&mut rhs);
        rhs
    }

    /// `(I - dt/2 A)^-1 (I + dt/2 A)`.
    pub fn propagator(&self) -> Matrix {
        self.lu
            .solve(&self.plus)
            .expect("factorization checked at construction")
    }
}

pub fn implicit_midpoint_linear(ode: &LinearOde, grid: &TimeGrid, x0: &Vector) -> Result<Trajectory> {
    if x0.len() != ode.dim() {
        return Err(Error::dim("initial state does not match the system"));
    }
    let stepper = MidpointStepper::new(ode, grid.dt())?;
    let times = grid.times();
    let mut states = Matrix::zeros(ode.dim(), grid.nt);
    states.set_column(0, x0);
    let mut x = x0.clone();
    for i in 1..grid.nt {
        x = stepper.step(&x, times[i - 1]);
        states.set_column(i, &x);
    }
    Ok(Trajectory {
        states,
        times,
        param: None,
    })
}

/// Training states stacked column-wise, parameter-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    pub data: Matrix,
    pub params: Vec<Param>,
    pub nt: usize,
}

impl SnapshotMatrix {
    pub fn new(data: Matrix, params: Vec<Param>, nt: usize) -> Result<Self> {
        if data.ncols() != params.len() * nt {
            return Err(Error::dim(format!(
                "{} columns for {} parameters x {nt} steps",
                data.ncols(),
                params.len()
            )));
        }
        Ok(Self { data, params, nt })
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    /// `(parameter, time index)` of a column.
    pub fn tag(&self, col: usize) -> (Param, usize) {
        (self.params[col / self.nt], col % self.nt)
    }
}

/// Full-model trajectory for one parameter.
pub fn solve_full(model: &CantileverLattice, p: Param, profile: ForcingProfile, grid: &TimeGrid) -> Result<Trajectory> {
    let sys = model.system(p, profile)?;
    let mut traj = implicit_midpoint_linear(&sys.ode(), grid, &sys.x0)?;
    traj.param = Some(p);
    Ok(traj)
}

pub fn snapshot_collect(
    design: &ExperimentDesign,
    model: &CantileverLattice,
    profile: ForcingProfile,
) -> Result<SnapshotMatrix> {
    let nt = design.grid.nt;
    let trajectories: Vec<Trajectory> = design
        .training
        .par_iter()
        .map(|p| solve_full(model, *p, profile, &design.grid))
        .collect::<Result<_>>()?;
    let mut data = Matrix::zeros(2 * model.n(), design.training.len() * nt);
    for (j, t) in trajectories.iter().enumerate() {
        data.columns_mut(j * nt, nt).copy_from(&t.states);
    }
    SnapshotMatrix::new(data, design.training.clone(), nt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ForcingKind, LinearHamiltonianSystem};
    use crate::symplectic::symplecticity_measure;

    fn oscillator() -> LinearHamiltonianSystem {
        LinearHamiltonianSystem::new(Matrix::identity(1, 1), Vector::from_element(1, 1.0), Vector::zeros(1))
            .unwrap()
            .with_initial_state(Vector::from_vec(vec![1.0, 0.0]))
            .unwrap()
    }

    #[test]
    fn oscillator_energy_is_preserved() {
        let sys = oscillator();
        let grid = TimeGrid::new(0.0, 20.0, 401).unwrap();
        let traj = implicit_midpoint_linear(&sys.ode(), &grid, &sys.x0).unwrap();
        let h0 = sys.quadratic_energy(&sys.x0);
        for i in 0..traj.nt() {
            assert!((sys.quadratic_energy(&traj.state(i)) - h0).abs() < 1e-12 * h0);
        }
    }

    #[test]
    fn zero_matrix_keeps_state() {
        let ode = LinearOde {
            a: Matrix::zeros(4, 4),
            b: Vector::zeros(4),
            profile: ForcingProfile::none(),
        };
        let x0 = Vector::from_vec(vec![1.0, -2.0, 3.0, 0.5]);
        let traj = implicit_midpoint_linear(&ode, &TimeGrid::new(0.0, 1.0, 5).unwrap(), &x0).unwrap();
        for i in 0..5 {
            assert_eq!(traj.state(i), x0);
        }
    }

    #[test]
    fn second_order_against_rotation() {
        let sys = oscillator();
        let err = |nt: usize| {
            let grid = TimeGrid::new(0.0, 2.0, nt).unwrap();
            let traj = implicit_midpoint_linear(&sys.ode(), &grid, &sys.x0).unwrap();
            (0..nt)
                .map(|i| {
                    let t = grid.time(i);
                    let exact = Vector::from_vec(vec![t.cos(), -t.sin()]);
                    (traj.state(i) - exact).amax()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(51) / err(101);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn propagator_is_symplectic() {
        let sys =
            crate::models::build_cantilever_lattice(3, 2, crate::models::ParameterDomain::default().center()).unwrap();
        let stepper = MidpointStepper::new(&sys.ode(), 0.01).unwrap();
        assert!(symplecticity_measure(&stepper.propagator()).unwrap() < 1e-8);
    }

    #[test]
    fn singular_midpoint_matrix() {
        let ode = LinearOde {
            a: Matrix::identity(2, 2) * 2.0,
            b: Vector::zeros(2),
            profile: ForcingProfile::none(),
        };
        assert!(matches!(
            MidpointStepper::new(&ode, 1.0),
            Err(Error::Integration { .. })
        ));
    }

    #[test]
    fn superposition() {
        let sys =
            crate::models::build_cantilever_lattice(3, 1, crate::models::ParameterDomain::default().center()).unwrap();
        let ode = sys.ode();
        let grid = TimeGrid::new(0.0, 0.05, 11).unwrap();
        let xa = Vector::from_fn(sys.dim(), |i, _| (i as f64 * 0.37).sin() * 1e-3);
        let xb = Vector::from_fn(sys.dim(), |i, _| (i as f64 * 0.11).cos() * 1e-3);
        let ta = implicit_midpoint_linear(&ode, &grid, &xa).unwrap();
        let tb = implicit_midpoint_linear(&ode, &grid, &xb).unwrap();
        let tab = implicit_midpoint_linear(&ode, &grid, &(&xa + &xb)).unwrap();
        let diff = (&tab.states - &ta.states - &tb.states).norm();
        assert!(diff <= 1e-10 * tab.states.norm());
    }

    #[test]
    fn forced_oscillator_uses_midpoint_time() {
        // x' = value(t) b with A = 0: one step integrates value at the midpoint.
        let profile = ForcingProfile::new(ForcingKind::SinusoidalTip, 1.0, 1.0).unwrap();
        let ode = LinearOde {
            a: Matrix::zeros(2, 2),
            b: Vector::from_vec(vec![0.0, 1.0]),
            profile,
        };
        let grid = TimeGrid::new(0.0, 0.1, 2).unwrap();
        let traj = implicit_midpoint_linear(&ode, &grid, &Vector::zeros(2)).unwrap();
        let expected = 0.1 * (2.0 * std::f64::consts::PI * 0.05).sin();
        assert!((traj.states[(1, 1)] - expected).abs() < 1e-15);
    }
}
