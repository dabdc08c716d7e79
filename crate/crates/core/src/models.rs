//! Parameterized cantilever in canonical Hamiltonian form.
//!
//! The elastic body is a rectangular spring lattice: every cell carries axial
//! springs on its edges and two diagonal springs. Axial stiffness scales with
//! `(lambda + mu) / lambda_ref`, diagonal stiffness with `mu / mu_ref`, so
//! `K(mu) = theta_1 K_1 + theta_2 K_2`. Masses are lumped per node. All
//! quantities are nondimensional with length `xi_ref`, stress `lambda_ref` and
//! time `sqrt(xi_ref / g_ref)`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::integrator::{LinearOde, TimeGrid};
use crate::symplectic::PoissonOperator;
use crate::{Error, Matrix, Result, Vector};

/// Lame parameters in N/m^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub lambda: f64,
    pub mu: f64,
}

impl Param {
    pub fn new(lambda: f64, mu: f64) -> Self {
        Self { lambda, mu }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:e}, {:e})", self.lambda, self.mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParameterDomain {
    pub lambda: [f64; 2],
    pub mu: [f64; 2],
}

impl Default for ParameterDomain {
    fn default() -> Self {
        Self {
            lambda: [35e9, 125e9],
            mu: [35e9, 83e9],
        }
    }
}

impl ParameterDomain {
    pub fn contains(&self, p: Param) -> bool {
        p.lambda >= self.lambda[0] && p.lambda <= self.lambda[1] && p.mu >= self.mu[0] && p.mu <= self.mu[1]
    }

    pub fn check(&self, p: Param) -> Result<()> {
        if self.contains(p) && p.lambda.is_finite() && p.mu.is_finite() {
            Ok(())
        } else {
            Err(Error::Parameter {
                lambda: p.lambda,
                mu: p.mu,
            })
        }
    }

    pub fn center(&self) -> Param {
        Param::new(0.5 * (self.lambda[0] + self.lambda[1]), 0.5 * (self.mu[0] + self.mu[1]))
    }

    /// Regular `m x m` grid including the corners, lambda varying slowest.
    pub fn grid(&self, m: usize) -> Vec<Param> {
        let at = |r: [f64; 2], i: usize| {
            if m == 1 {
                0.5 * (r[0] + r[1])
            } else {
                r[0] + (r[1] - r[0]) * i as f64 / (m - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                out.push(Param::new(at(self.lambda, i), at(self.mu, j)));
            }
        }
        out
    }
}

/// Material and scaling constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    /// Density, kg/m^3.
    pub rho0: f64,
    pub lambda_ref: f64,
    pub mu_ref: f64,
    /// Length scale, m.
    pub xi_ref: f64,
    /// Acceleration scale, m/s^2.
    pub g_ref: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            rho0: 7856.0,
            lambda_ref: 81e9,
            mu_ref: 81e9,
            xi_ref: 1.0,
            g_ref: 9.81,
        }
    }
}

impl Constants {
    /// Time scale in seconds.
    pub fn time_scale(&self) -> f64 {
        (self.xi_ref / self.g_ref).sqrt()
    }

    /// Nondimensional density.
    pub fn density(&self) -> f64 {
        self.rho0 * self.g_ref * self.xi_ref / self.lambda_ref
    }
}

/// Lattice resolution and physical size (in units of `xi_ref`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeGeometry {
    pub nx: usize,
    pub ny: usize,
    pub length: f64,
    pub height: f64,
}

impl Default for LatticeGeometry {
    fn default() -> Self {
        Self {
            nx: 30,
            ny: 4,
            length: 7.2,
            height: 0.96,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingKind {
    None,
    ConstantTip,
    SinusoidalTip,
}

impl FromStr for ForcingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "constant_tip" => Ok(Self::ConstantTip),
            "sinusoidal_tip" => Ok(Self::SinusoidalTip),
            other => Err(Error::Config(format!("unknown forcing kind `{other}`"))),
        }
    }
}

/// Scalar time profile of the tip load, `f(t) = value(t) * shape`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingProfile {
    pub kind: ForcingKind,
    pub amplitude: f64,
    /// Cycles per unit (nondimensional) time.
    pub frequency: f64,
}

impl ForcingProfile {
    pub fn none() -> Self {
        Self {
            kind: ForcingKind::None,
            amplitude: 0.0,
            frequency: 0.0,
        }
    }

    pub fn new(kind: ForcingKind, amplitude: f64, frequency: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(Error::Config(format!("forcing amplitude {amplitude} is not finite")));
        }
        if kind == ForcingKind::SinusoidalTip && !(frequency > 0.0 && frequency.is_finite()) {
            return Err(Error::Config(format!(
                "sinusoidal forcing needs a positive frequency, got {frequency}"
            )));
        }
        Ok(Self {
            kind,
            amplitude,
            frequency,
        })
    }

    pub fn is_autonomous(&self) -> bool {
        self.kind != ForcingKind::SinusoidalTip
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.kind {
            ForcingKind::None => 0.0,
            ForcingKind::ConstantTip => self.amplitude,
            ForcingKind::SinusoidalTip => self.amplitude * (2.0 * std::f64::consts::PI * self.frequency * t).sin(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self.kind {
            ForcingKind::None | ForcingKind::ConstantTip => 0.0,
            ForcingKind::SinusoidalTip => {
                let w = 2.0 * std::f64::consts::PI * self.frequency;
                self.amplitude * w * (w * t).cos()
            }
        }
    }
}

/// `dx/dt = J (H x + h(t))` with `H = diag(K, M^-1)` and `h = (-f(t), 0)`.
#[derive(Debug, Clone)]
pub struct LinearHamiltonianSystem {
    pub stiffness: Matrix,
    /// Diagonal of `M^-1`.
    pub mass_inverse: Vector,
    /// Spatial shape of the load; the force is `profile.value(t) * load`.
    pub load: Vector,
    pub profile: ForcingProfile,
    pub x0: Vector,
    pub param: Option<Param>,
}

impl LinearHamiltonianSystem {
    pub fn new(stiffness: Matrix, mass_inverse: Vector, load: Vector) -> Result<Self> {
        let n = stiffness.nrows();
        if stiffness.ncols() != n || mass_inverse.len() != n || load.len() != n {
            return Err(Error::dim("stiffness, mass and load sizes disagree"));
        }
        let asym = (&stiffness - stiffness.transpose()).norm();
        if asym > 1e-12 * stiffness.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::Config(format!("stiffness is not symmetric ({asym:e})")));
        }
        if mass_inverse.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::Config("inverse masses must be positive".into()));
        }
        Ok(Self {
            stiffness,
            mass_inverse,
            load,
            profile: ForcingProfile::none(),
            x0: Vector::zeros(2 * n),
            param: None,
        })
    }

    pub fn with_forcing(mut self, profile: ForcingProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn with_initial_state(mut self, x0: Vector) -> Result<Self> {
        if x0.len() != self.dim() {
            return Err(Error::dim("initial state has the wrong length"));
        }
        self.x0 = x0;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.stiffness.nrows()
    }

    pub fn dim(&self) -> usize {
        2 * self.n()
    }

    /// Dense `H`.
    pub fn hamiltonian_matrix(&self) -> Matrix {
        let n = self.n();
        let mut h = Matrix::zeros(2 * n, 2 * n);
        h.view_mut((0, 0), (n, n)).copy_from(&self.stiffness);
        for i in 0..n {
            h[(n + i, n + i)] = self.mass_inverse[i];
        }
        h
    }

    /// `h` with unit profile, `(-load, 0)`.
    pub fn h_shape(&self) -> Vector {
        let n = self.n();
        let mut h = Vector::zeros(2 * n);
        h.rows_mut(0, n).copy_from(&(-&self.load));
        h
    }

    pub fn h_at(&self, t: f64) -> Vector {
        self.h_shape() * self.profile.value(t)
    }

    /// `H x` without forming `H`.
    pub fn apply_h(&self, x: &Vector) -> Vector {
        let n = self.n();
        let mut out = Vector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&(&self.stiffness * x.rows(0, n)));
        out.rows_mut(n, n)
            .copy_from(&x.rows(n, n).component_mul(&self.mass_inverse));
        out
    }

    /// `1/2 x^T H x`.
    pub fn quadratic_energy(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&self.apply_h(x))
    }

    /// `1/2 x^T H x + x^T h(t)`.
    pub fn hamiltonian_value(&self, x: &Vector, t: f64) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::dim(format!(
                "state of length {} for a system of dimension {}",
                x.len(),
                self.dim()
            )));
        }
        let n = self.n();
        Ok(self.quadratic_energy(x) - self.profile.value(t) * x.rows(0, n).dot(&self.load))
    }

    /// Linear ODE `x' = J H x + value(t) J h_shape`.
    pub fn ode(&self) -> LinearOde {
        let n = self.n();
        let mut a = Matrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            a[(i, n + i)] = self.mass_inverse[i];
        }
        a.view_mut((n, 0), (n, n)).copy_from(&(-&self.stiffness));
        let j = PoissonOperator::new(n);
        let b = j.apply(&self.h_shape()).expect("even length");
        LinearOde {
            a,
            b,
            profile: self.profile,
        }
    }

    /// Momentum `p_hat` of the extended phase space along a sampled trajectory:
    /// `p_hat(t0) = -H(t0, x0)`, `dp_hat/dt = -dH/dt`, trapezoidal in time.
    pub fn extended_momentum(&self, times: &[f64], states: &Matrix) -> Result<Vec<f64>> {
        if states.ncols() != times.len() || times.is_empty() {
            return Err(Error::dim("times and states disagree"));
        }
        let n = self.n();
        // -dH/dt = -x^T dh/dt = value'(t) q^T load.
        let rate = |i: usize| self.profile.derivative(times[i]) * states.column(i).rows(0, n).dot(&self.load);
        let mut p = Vec::with_capacity(times.len());
        p.push(-self.hamiltonian_value(&states.column(0).into_owned(), times[0])?);
        for i in 1..times.len() {
            let dt = times[i] - times[i - 1];
            p.push(p[i - 1] + 0.5 * dt * (rate(i - 1) + rate(i)));
        }
        Ok(p)
    }

    /// `H(t, x) + p_hat`, constant along exact flows.
    pub fn extended_hamiltonian(&self, x: &Vector, t: f64, p_hat: f64) -> Result<f64> {
        Ok(self.hamiltonian_value(x, t)? + p_hat)
    }
}

/// Assembled cantilever with the parameter-independent pieces precomputed.
#[derive(Debug, Clone)]
pub struct CantileverLattice {
    geometry: LatticeGeometry,
    constants: Constants,
    domain: ParameterDomain,
    k1: Matrix,
    k2: Matrix,
    mass_inverse: Vector,
    load: Vector,
}

struct Spring {
    a: (usize, usize),
    b: (usize, usize),
    /// Stiffness at unit coefficient.
    k: f64,
    axial: bool,
}

impl CantileverLattice {
    pub fn new(geometry: LatticeGeometry, constants: Constants, domain: ParameterDomain) -> Result<Self> {
        let LatticeGeometry { nx, ny, length, height } = geometry;
        if nx < 2 || ny < 1 {
            return Err(Error::Config(format!(
                "lattice needs nx >= 2 and ny >= 1, got {nx} x {ny}"
            )));
        }
        if !(length > 0.0 && height > 0.0 && length.is_finite() && height.is_finite()) {
            return Err(Error::Config("lattice length and height must be positive".into()));
        }
        if !(constants.rho0 > 0.0
            && constants.lambda_ref > 0.0
            && constants.mu_ref > 0.0
            && constants.xi_ref > 0.0
            && constants.g_ref > 0.0)
        {
            return Err(Error::Config("physical constants must be positive".into()));
        }
        if !(domain.lambda[0] > 0.0
            && domain.lambda[0] <= domain.lambda[1]
            && domain.mu[0] > 0.0
            && domain.mu[0] <= domain.mu[1])
        {
            return Err(Error::Config("parameter domain must be a positive box".into()));
        }
        let (dx, dy) = (length / nx as f64, height / ny as f64);
        let n = 2 * nx * (ny + 1);
        let mut k1 = Matrix::zeros(n, n);
        let mut k2 = Matrix::zeros(n, n);
        for s in Self::springs(nx, ny, dx, dy) {
            let target = if s.axial { &mut k1 } else { &mut k2 };
            add_spring(target, &s, dx, dy, ny);
        }

        let rho = constants.density();
        let mut mass = Vector::zeros(n);
        for i in 0..nx {
            for j in 0..ny {
                for node in [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)] {
                    if let Some(d) = dof(node, ny) {
                        mass[d] += 0.25 * rho * dx * dy;
                        mass[d + 1] += 0.25 * rho * dx * dy;
                    }
                }
            }
        }

        // Unit downward traction on the right edge, lumped with edge weights.
        let mut load = Vector::zeros(n);
        for j in 0..=ny {
            let w = if j == 0 || j == ny { 0.5 } else { 1.0 } / ny as f64;
            load[dof((nx, j), ny).expect("free node") + 1] = -w;
        }

        Ok(Self {
            geometry,
            constants,
            domain,
            k1,
            k2,
            mass_inverse: mass.map(|m| 1.0 / m),
            load,
        })
    }

    fn springs(nx: usize, ny: usize, dx: f64, dy: f64) -> Vec<Spring> {
        let diag = dx * dy / (dx * dx + dy * dy);
        let mut out = Vec::with_capacity(6 * nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                let (a, b, c, d) = ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1));
                // Edges are shared by up to two cells, hence the halves.
                for (p, q) in [(a, b), (d, c)] {
                    out.push(Spring {
                        a: p,
                        b: q,
                        k: 0.5 * dy / dx,
                        axial: true,
                    });
                }
                for (p, q) in [(a, d), (b, c)] {
                    out.push(Spring {
                        a: p,
                        b: q,
                        k: 0.5 * dx / dy,
                        axial: true,
                    });
                }
                for (p, q) in [(a, c), (b, d)] {
                    out.push(Spring {
                        a: p,
                        b: q,
                        k: diag,
                        axial: false,
                    });
                }
            }
        }
        out
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    pub fn domain(&self) -> &ParameterDomain {
        &self.domain
    }

    /// Half dimension `n` (number of displacement DOFs).
    pub fn n(&self) -> usize {
        self.k1.nrows()
    }

    pub fn k1(&self) -> &Matrix {
        &self.k1
    }

    pub fn k2(&self) -> &Matrix {
        &self.k2
    }

    pub fn mass_inverse(&self) -> &Vector {
        &self.mass_inverse
    }

    /// Load shape with unit total downward force.
    pub fn load_shape(&self) -> &Vector {
        &self.load
    }

    /// Nondimensional weight of the beam.
    pub fn weight(&self) -> f64 {
        self.constants.density() * self.geometry.length * self.geometry.height
    }

    pub fn theta(&self, p: Param) -> Result<(f64, f64)> {
        self.domain.check(p)?;
        Ok((
            (p.lambda + p.mu) / self.constants.lambda_ref,
            p.mu / self.constants.mu_ref,
        ))
    }

    pub fn stiffness(&self, p: Param) -> Result<Matrix> {
        let (t1, t2) = self.theta(p)?;
        Ok(&self.k1 * t1 + &self.k2 * t2)
    }

    /// Spring-by-spring assembly with the coefficients applied per spring.
    pub fn assemble_stiffness(&self, p: Param) -> Result<Matrix> {
        let (t1, t2) = self.theta(p)?;
        let LatticeGeometry { nx, ny, length, height } = self.geometry;
        let (dx, dy) = (length / nx as f64, height / ny as f64);
        let mut k = Matrix::zeros(self.n(), self.n());
        for mut s in Self::springs(nx, ny, dx, dy) {
            s.k *= if s.axial { t1 } else { t2 };
            add_spring(&mut k, &s, dx, dy, ny);
        }
        Ok(k)
    }

    pub fn system(&self, p: Param, profile: ForcingProfile) -> Result<LinearHamiltonianSystem> {
        let mut sys = LinearHamiltonianSystem::new(self.stiffness(p)?, self.mass_inverse.clone(), self.load.clone())?
            .with_forcing(profile);
        sys.param = Some(p);
        Ok(sys)
    }
}

/// First DOF index of a node, `None` for clamped nodes.
fn dof(node: (usize, usize), ny: usize) -> Option<usize> {
    let (i, j) = node;
    if i == 0 {
        None
    } else {
        Some(2 * ((i - 1) * (ny + 1) + j))
    }
}

fn add_spring(k: &mut Matrix, s: &Spring, dx: f64, dy: f64, ny: usize) {
    let ex = (s.b.0 as f64 - s.a.0 as f64) * dx;
    let ey = (s.b.1 as f64 - s.a.1 as f64) * dy;
    let len = (ex * ex + ey * ey).sqrt();
    let d = [ex / len, ey / len];
    let ends = [(dof(s.a, ny), 1.0), (dof(s.b, ny), -1.0)];
    for (da, sa) in ends {
        let Some(da) = da else { continue };
        for (db, sb) in ends {
            let Some(db) = db else { continue };
            for r in 0..2 {
                for c in 0..2 {
                    k[(da + r, db + c)] += sa * sb * s.k * d[r] * d[c];
                }
            }
        }
    }
}

/// Lattice with default geometry and constants, unforced.
pub fn build_cantilever_lattice(nx: usize, ny: usize, p: Param) -> Result<LinearHamiltonianSystem> {
    let geometry = LatticeGeometry {
        nx,
        ny,
        ..LatticeGeometry::default()
    };
    CantileverLattice::new(geometry, Constants::default(), ParameterDomain::default())?
        .system(p, ForcingProfile::none())
}

/// Training grid, random test parameters, time grid and basis sizes.
#[derive(Debug, Clone)]
pub struct ExperimentDesign {
    pub training: Vec<Param>,
    pub test: Vec<Param>,
    pub grid: TimeGrid,
    pub sweep: Vec<usize>,
}

impl ExperimentDesign {
    /// `grid_points^2` training parameters and `test_count` uniform test
    /// parameters drawn with a seeded generator.
    pub fn new(
        domain: &ParameterDomain,
        grid_points: usize,
        test_count: usize,
        seed: u64,
        grid: TimeGrid,
        sweep: Vec<usize>,
        full_dim: usize,
    ) -> Result<Self> {
        if grid_points == 0 {
            return Err(Error::Config("training grid needs at least one point".into()));
        }
        for &s in &sweep {
            if s == 0 || s % 2 != 0 || s > full_dim {
                return Err(Error::Config(format!(
                    "sweep size {s} must be even, positive and at most {full_dim}"
                )));
            }
        }
        let training = domain.grid(grid_points);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut test: Vec<Param> = Vec::with_capacity(test_count);
        while test.len() < test_count {
            let p = Param::new(
                rng.random_range(domain.lambda[0]..=domain.lambda[1]),
                rng.random_range(domain.mu[0]..=domain.mu[1]),
            );
            if !training.contains(&p) && !test.contains(&p) {
                test.push(p);
            }
        }
        Ok(Self {
            training,
            test,
            grid,
            sweep,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(nx: usize, ny: usize) -> CantileverLattice {
        let g = LatticeGeometry {
            nx,
            ny,
            ..Default::default()
        };
        CantileverLattice::new(g, Constants::default(), ParameterDomain::default()).unwrap()
    }

    #[test]
    fn small_lattice_is_spd() {
        let sys = build_cantilever_lattice(2, 1, ParameterDomain::default().center()).unwrap();
        assert_eq!(sys.n(), 8);
        let k = &sys.stiffness;
        assert!((k - k.transpose()).norm() < 1e-14);
        let eig = k.clone().symmetric_eigen();
        assert!(eig.eigenvalues.min() > 0.0);
    }

    #[test]
    fn dof_count_excludes_clamped_column() {
        assert_eq!(lattice(5, 3).n(), 2 * 5 * 4);
    }

    #[test]
    fn affine_matches_direct_assembly() {
        let lat = lattice(6, 2);
        for p in ParameterDomain::default().grid(3) {
            let a = lat.stiffness(p).unwrap();
            let b = lat.assemble_stiffness(p).unwrap();
            assert!((&a - &b).norm() <= 1e-12 * b.norm());
        }
    }

    #[test]
    fn out_of_domain_parameter() {
        let lat = lattice(2, 1);
        assert!(matches!(
            lat.stiffness(Param::new(1e9, 50e9)),
            Err(Error::Parameter { .. })
        ));
    }

    #[test]
    fn degenerate_lattice() {
        let g = LatticeGeometry {
            nx: 1,
            ny: 1,
            ..Default::default()
        };
        assert!(matches!(
            CantileverLattice::new(g, Constants::default(), ParameterDomain::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn smallest_eigenvalue_grows_with_parameters() {
        let lat = lattice(4, 2);
        let grid = ParameterDomain::default().grid(3);
        let min_eig = |p: Param| lat.stiffness(p).unwrap().symmetric_eigen().eigenvalues.min();
        for a in &grid {
            for b in &grid {
                if b.lambda >= a.lambda && b.mu >= a.mu {
                    assert!(min_eig(*b) >= min_eig(*a) * (1.0 - 1e-12));
                }
            }
        }
    }

    #[test]
    fn load_is_unit_and_on_tip() {
        let lat = lattice(4, 2);
        let load = lat.load_shape();
        assert!((load.sum() + 1.0).abs() < 1e-15);
        let tip_start = 2 * 3 * 3;
        for (i, v) in load.iter().enumerate() {
            if *v != 0.0 {
                assert!(i >= tip_start && i % 2 == 1);
            }
        }
    }

    #[test]
    fn forcing_profiles() {
        let c = ForcingProfile::new(ForcingKind::ConstantTip, 1.0, 0.0).unwrap();
        assert_eq!(c.value(0.0), c.value(0.3));
        let t_end = 0.2;
        let s = ForcingProfile::new(ForcingKind::SinusoidalTip, 2.0, 1.0 / t_end).unwrap();
        assert_eq!(s.value(0.0), 0.0);
        assert!(s.value(t_end).abs() < 1e-14);
        let s2 = ForcingProfile::new(ForcingKind::SinusoidalTip, 4.0, 1.0 / t_end).unwrap();
        assert!((s2.value(0.03) - 2.0 * s.value(0.03)).abs() < 1e-15);
        assert!("triangle".parse::<ForcingKind>().is_err());
        assert!(ForcingProfile::new(ForcingKind::SinusoidalTip, 1.0, 0.0).is_err());
    }

    #[test]
    fn hamiltonian_examples() {
        let sys = build_cantilever_lattice(2, 1, ParameterDomain::default().center()).unwrap();
        let n = sys.n();
        assert_eq!(sys.hamiltonian_value(&Vector::zeros(2 * n), 0.0).unwrap(), 0.0);
        let mut e = Vector::zeros(2 * n);
        e[n] = 1.0;
        let v = sys.hamiltonian_value(&e, 0.0).unwrap();
        assert!((v - 0.5 * sys.mass_inverse[0]).abs() < 1e-15 * v);
        assert!(sys.hamiltonian_value(&Vector::zeros(3), 0.0).is_err());
    }

    #[test]
    fn hamiltonian_matches_dense_form() {
        let lat = lattice(3, 2);
        let profile = ForcingProfile::new(ForcingKind::SinusoidalTip, 0.7, 2.0).unwrap();
        let sys = lat.system(ParameterDomain::default().center(), profile).unwrap();
        let x = Vector::from_fn(sys.dim(), |i, _| ((i * 7 + 3) % 11) as f64 / 11.0 - 0.4);
        let t = 0.1;
        let h = sys.hamiltonian_matrix();
        let dense = 0.5 * x.dot(&(&h * &x)) + x.dot(&sys.h_at(t));
        let v = sys.hamiltonian_value(&x, t).unwrap();
        assert!((v - dense).abs() <= 1e-12 * dense.abs());
    }

    #[test]
    fn design_is_disjoint_and_seeded() {
        let grid = TimeGrid::new(0.0, 1.0, 3).unwrap();
        let dom = ParameterDomain::default();
        let a = ExperimentDesign::new(&dom, 3, 16, 7, grid, vec![2, 4], 10).unwrap();
        let b = ExperimentDesign::new(&dom, 3, 16, 7, grid, vec![2, 4], 10).unwrap();
        assert_eq!(a.training.len(), 9);
        assert_eq!(a.test, b.test);
        assert!(a.test.iter().all(|p| dom.contains(*p) && !a.training.contains(p)));
        assert!(ExperimentDesign::new(&dom, 3, 16, 7, grid, vec![3], 10).is_err());
        assert!(ExperimentDesign::new(&dom, 3, 16, 7, grid, vec![12], 10).is_err());
    }
}
