//! Spectral Galerkin solver on the sine basis `w_j = sqrt(2/L)·sin(jπx/L)`.
//!
//! The basis is L²-orthonormal, so the semi-discrete system is `d″ + S d = 0`
//! with `S_ij = a²(iπ/L)²δ_ij + Σ_k c·β_k w_i(x_k) w_j(x_k)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{domain, Error, Result};
use crate::field::{MethodTag, ModalTrajectory, ProbeTrace, WaveField};
use crate::model::{CableConfig, DiracConvention, InitialData, Profile, SamplingGrid};
use crate::quadrature::pairwise_sum;
use crate::tension::{FrequencySpectrum, SpectrumMethod};

/// Truncation order used when none is given.
pub const DEFAULT_M: usize = 256;

const EIGEN_MAX_ITER: usize = 0;
const CLUSTER_TOL: f64 = 1e-12;

/// `w_j(x)`.
pub fn basis(j: usize, x: f64, length: f64) -> f64 {
    (2.0 / length).sqrt() * (j as f64 * PI * x / length).sin()
}

/// `w_j′(x)`.
pub fn basis_slope(j: usize, x: f64, length: f64) -> f64 {
    let k = j as f64 * PI / length;
    (2.0 / length).sqrt() * k * (k * x).cos()
}

/// Assembled stiffness, its eigendecomposition and projected initial data.
#[derive(Debug, Clone)]
pub struct ModalSystem {
    length: f64,
    wave_speed_sq: f64,
    convention: DiracConvention,
    supports: Vec<(f64, f64)>,
    stiffness: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    xi: DVector<f64>,
    eta: DVector<f64>,
}

/// Builds `S` for truncation `m` and diagonalizes it; initial data start at zero.
pub fn assemble_bilinear_form(cfg: &CableConfig, m: usize) -> Result<ModalSystem> {
    if m == 0 {
        return domain("truncation order m must be at least 1");
    }
    let length = cfg.length();
    let a2 = cfg.wave_speed_sq();
    let c = cfg.convention().factor(length);
    let supports: Vec<(f64, f64)> =
        cfg.supports().iter().map(|s| (s.position(), s.beta())).collect();

    let mut s = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        let k = (i + 1) as f64 * PI / length;
        s[(i, i)] = a2 * k * k;
    }
    let mut coupled = false;
    for &(x, beta) in &supports {
        if beta == 0.0 {
            continue;
        }
        coupled = true;
        let w: Vec<f64> = (1..=m).map(|j| basis(j, x, length)).collect();
        for i in 0..m {
            for j in 0..m {
                s[(i, j)] += c * beta * w[i] * w[j];
            }
        }
    }

    let (eigenvalues, eigenvectors) = if coupled {
        diagonalize(&s)?
    } else {
        (s.diagonal(), DMatrix::identity(m, m))
    };
    if let Some(bad) = eigenvalues.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::Internal(format!("stiffness eigenvalue {bad} is not positive")));
    }
    Ok(ModalSystem {
        length,
        wave_speed_sq: a2,
        convention: cfg.convention(),
        supports,
        stiffness: s,
        eigenvalues,
        eigenvectors,
        xi: DVector::zeros(m),
        eta: DVector::zeros(m),
    })
}

/// Ascending eigenpairs; columns inside near-degenerate clusters re-orthonormalized.
fn diagonalize(s: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let m = s.nrows();
    let eig = SymmetricEigen::try_new(s.clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Internal("symmetric eigen-solver did not converge".into()))?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(m, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::<f64>::zeros(m, m);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    let scale = values[m - 1].abs();
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m && values[end] - values[end - 1] <= CLUSTER_TOL * scale {
            end += 1;
        }
        for c in start..end {
            for p in start..c {
                let proj = vectors.column(p).dot(&vectors.column(c));
                let prev = vectors.column(p).clone_owned();
                vectors.column_mut(c).axpy(-proj, &prev, 1.0);
            }
            let norm = vectors.column(c).norm();
            vectors.column_mut(c).scale_mut(1.0 / norm);
        }
        start = end;
    }
    Ok((values, vectors))
}

/// `ξ_i = ∫φ w_i`, `η_i = ∫ψ w_i` by composite Simpson (at least 512 panels, 32 per mode).
pub fn project_initial_data(init: &InitialData, m: usize, length: f64) -> (DVector<f64>, DVector<f64>) {
    let panels = (512usize).max(32 * m);
    (project(&init.phi, m, length, panels), project(&init.psi, m, length, panels))
}

fn project(profile: &Profile, m: usize, length: f64, panels: usize) -> DVector<f64> {
    if profile.is_zero() {
        return DVector::zeros(m);
    }
    let n = (panels + 1) & !1;
    let h = length / n as f64;
    let weighted: Vec<f64> = (0..=n)
        .map(|i| {
            let x = if i == n { length } else { i as f64 * h };
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * profile.value(x)
        })
        .collect();
    let mut terms = vec![0.0; n + 1];
    DVector::from_iterator(
        m,
        (1..=m).map(|j| {
            for (i, t) in terms.iter_mut().enumerate() {
                let x = if i == n { length } else { i as f64 * h };
                *t = weighted[i] * basis(j, x, length);
            }
            pairwise_sum(&terms) * h / 3.0
        }),
    )
}

impl ModalSystem {
    /// Assembles and loads projected initial data in one step.
    pub fn new(cfg: &CableConfig, m: usize, init: &InitialData) -> Result<Self> {
        let sys = assemble_bilinear_form(cfg, m)?;
        let (xi, eta) = project_initial_data(init, m, cfg.length());
        sys.with_initial(xi, eta)
    }

    pub fn with_initial(mut self, xi: DVector<f64>, eta: DVector<f64>) -> Result<Self> {
        let m = self.m();
        if xi.len() != m || eta.len() != m {
            return domain(format!("initial coefficient vectors must have length {m}"));
        }
        self.xi = xi;
        self.eta = eta;
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.stiffness.nrows()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn wave_speed_sq(&self) -> f64 {
        self.wave_speed_sq
    }

    pub fn convention(&self) -> DiracConvention {
        self.convention
    }

    /// `(x_k, β_k)` pairs.
    pub fn supports(&self) -> &[(f64, f64)] {
        &self.supports
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    /// Ascending `λ_1 ≤ … ≤ λ_m`.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, matching [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn xi(&self) -> &DVector<f64> {
        &self.xi
    }

    pub fn eta(&self) -> &DVector<f64> {
        &self.eta
    }

    /// `ḋᵀḋ + dᵀSd` for the exact evolution; conserved.
    pub fn modal_energy(&self) -> f64 {
        self.eta.dot(&self.eta) + self.xi.dot(&(&self.stiffness * &self.xi))
    }

    /// Closed-form evolution in eigencoordinates.
    pub fn solution(&self) -> GalerkinSolution<'_> {
        let q0 = self.eigenvectors.tr_mul(&self.xi);
        let qd0 = self.eigenvectors.tr_mul(&self.eta);
        let omega = self.eigenvalues.map(f64::sqrt);
        GalerkinSolution { sys: self, q0, qd0, omega }
    }
}

/// Exact time evolution of a [`ModalSystem`].
#[derive(Debug, Clone)]
pub struct GalerkinSolution<'a> {
    sys: &'a ModalSystem,
    q0: DVector<f64>,
    qd0: DVector<f64>,
    omega: DVector<f64>,
}

/// Sine coefficients `d`, `ḋ`, `d̈` at one instant.
#[derive(Debug, Clone)]
pub struct ModalState {
    pub d: DVector<f64>,
    pub d_t: DVector<f64>,
    pub d_tt: DVector<f64>,
}

impl GalerkinSolution<'_> {
    pub fn system(&self) -> &ModalSystem {
        self.sys
    }

    pub fn state(&self, t: f64) -> ModalState {
        let m = self.omega.len();
        let mut q = DVector::zeros(m);
        let mut qd = DVector::zeros(m);
        for r in 0..m {
            let w = self.omega[r];
            let (s, c) = (w * t).sin_cos();
            q[r] = self.q0[r] * c + self.qd0[r] * s / w;
            qd[r] = -self.q0[r] * w * s + self.qd0[r] * c;
        }
        let qdd = q.component_mul(&self.sys.eigenvalues).map(|v| -v);
        let v = &self.sys.eigenvectors;
        ModalState { d: v * q, d_t: v * qd, d_tt: v * qdd }
    }
}

fn basis_matrix(xs: &[f64], m: usize, length: f64, pin_ends: bool) -> DMatrix<f64> {
    DMatrix::from_fn(m, xs.len(), |j, i| {
        let x = xs[i];
        if pin_ends && (x == 0.0 || x == length) {
            0.0
        } else {
            basis(j + 1, x, length)
        }
    })
}

fn reconstruct(
    sys: &ModalSystem,
    grid: &SamplingGrid,
    probes: &[f64],
    d: DMatrix<f64>,
    d_t: DMatrix<f64>,
    method: MethodTag,
) -> Result<WaveField> {
    let length = sys.length;
    if let Some(p) = probes.iter().find(|p| !(0.0..=length).contains(*p)) {
        return domain(format!("probe position {p} lies outside [0, {length}]"));
    }
    let m = sys.m();
    let basis_grid = basis_matrix(&grid.nodes(length), m, length, true);
    let u = &d * &basis_grid;
    let ut = &d_t * &basis_grid;
    let basis_probes = basis_matrix(probes, m, length, true);
    let pu = &d * &basis_probes;
    let put = &d_t * &basis_probes;
    let traces = probes
        .iter()
        .enumerate()
        .map(|(k, &x)| ProbeTrace {
            x,
            u: pu.column(k).iter().copied().collect(),
            ut: put.column(k).iter().copied().collect(),
        })
        .collect();
    let field = WaveField::new(*grid, length, row_major(&u), row_major(&ut), method)?;
    Ok(field.with_modal(ModalTrajectory { coefficients: d, rates: d_t }).with_probes(traces))
}

fn row_major(a: &DMatrix<f64>) -> Vec<f64> {
    a.transpose().as_slice().to_vec()
}

/// Samples the closed-form evolution on `grid`, plus time series at `probes`.
pub fn propagate_exact(sys: &ModalSystem, grid: &SamplingGrid, probes: &[f64]) -> Result<WaveField> {
    if let Some(bad) = sys.eigenvalues.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::Internal(format!("stiffness eigenvalue {bad} is not positive")));
    }
    let m = sys.m();
    let nt = grid.nt();
    let sol = sys.solution();
    let mut q = DMatrix::<f64>::zeros(nt, m);
    let mut qd = DMatrix::<f64>::zeros(nt, m);
    for n in 0..nt {
        let t = grid.t(n);
        for r in 0..m {
            let w = sol.omega[r];
            let (s, c) = (w * t).sin_cos();
            q[(n, r)] = sol.q0[r] * c + sol.qd0[r] * s / w;
            qd[(n, r)] = -sol.q0[r] * w * s + sol.qd0[r] * c;
        }
    }
    let vt = sys.eigenvectors.transpose();
    reconstruct(sys, grid, probes, &q * &vt, &qd * &vt, MethodTag::GalerkinExact)
}

/// Velocity-Verlet stepping of `d″ = −S d` at the grid's own `dt`.
pub fn propagate_leapfrog(sys: &ModalSystem, grid: &SamplingGrid, probes: &[f64]) -> Result<WaveField> {
    let dt = grid.dt();
    let lambda_max = sys.eigenvalues[sys.m() - 1];
    let bound = 2.0 / lambda_max.sqrt();
    if dt >= bound {
        return Err(Error::Stability(format!(
            "leapfrog step dt = {dt} must satisfy dt < 2/sqrt(lambda_max) = {bound}"
        )));
    }
    let m = sys.m();
    let nt = grid.nt();
    let s = &sys.stiffness;
    let mut d = DMatrix::<f64>::zeros(nt, m);
    let mut d_t = DMatrix::<f64>::zeros(nt, m);
    let mut x = sys.xi.clone();
    let mut v = sys.eta.clone();
    let mut acc = -(s * &x);
    d.set_row(0, &x.transpose());
    d_t.set_row(0, &v.transpose());
    for n in 1..nt {
        v.axpy(0.5 * dt, &acc, 1.0);
        x.axpy(dt, &v, 1.0);
        acc = -(s * &x);
        v.axpy(0.5 * dt, &acc, 1.0);
        d.set_row(n, &x.transpose());
        d_t.set_row(n, &v.transpose());
    }
    reconstruct(sys, grid, probes, d, d_t, MethodTag::GalerkinLeapfrog)
}

/// Lowest `count` frequencies `√λ_r/(2π)` in Hz.
pub fn modal_frequencies(sys: &ModalSystem, count: usize) -> Result<FrequencySpectrum> {
    if count > sys.m() {
        return domain(format!("requested {count} frequencies from a system of order {}", sys.m()));
    }
    let freqs: Vec<f64> = sys.eigenvalues.iter().take(count).map(|l| l.sqrt() / (2.0 * PI)).collect();
    let top = freqs.last().copied().unwrap_or(1.0);
    FrequencySpectrum::new(freqs, SpectrumMethod::EigenGalerkin, 1e-12 * top)
}
