//! Gaussian states over one atom mode and any number of light modes.
//!
//! Quadratures are ordered `(X, P)` per mode, the atom mode always first.
//! Units follow `[X, P] = i`, so the vacuum (coherent) variance is `1/2`
//! per quadrature. Every operation returns a new state; nothing is mutated
//! in place.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Vacuum / coherent-state variance of a single quadrature.
pub const VACUUM_VARIANCE: f64 = 0.5;

/// Tolerance used for the symplectic condition `S Ω Sᵀ = Ω`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;

/// Tolerance used for the uncertainty relation on symplectic eigenvalues.
pub const UNCERTAINTY_TOL: f64 = 1e-9;

/// Identifier of a light mode. Ids are never reused within a state lineage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LightId(pub u32);

impl fmt::Display for LightId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "light#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Atom,
    Light(LightId),
}

/// Standard symplectic form for `modes` modes in `(X, P)` ordering.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn is_diagonal(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == 0.0))
}

/// Smallest eigenvalue of a symmetric matrix.
pub(crate) fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    if is_diagonal(m) {
        return m.diagonal().iter().copied().fold(f64::INFINITY, f64::min);
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Linear symplectic map with displacement: `r ↦ S r + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    pub s: DMatrix<f64>,
    pub d: DVector<f64>,
}

impl SymplecticMap {
    pub fn identity(dim: usize) -> Self {
        Self {
            s: DMatrix::identity(dim, dim),
            d: DVector::zeros(dim),
        }
    }

    pub fn new(s: DMatrix<f64>) -> Self {
        let dim = s.nrows();
        Self {
            s,
            d: DVector::zeros(dim),
        }
    }

    pub fn with_displacement(s: DMatrix<f64>, d: DVector<f64>) -> Self {
        Self { s, d }
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    /// `max |S Ω Sᵀ − Ω|`.
    pub fn symplectic_deviation(&self) -> f64 {
        let omega = symplectic_form(self.dim() / 2);
        let lhs = &self.s * &omega * self.s.transpose();
        (lhs - omega).amax()
    }

    /// Map equal to applying `self` first, then `next`.
    pub fn then(&self, next: &SymplecticMap) -> SymplecticMap {
        SymplecticMap {
            s: &next.s * &self.s,
            d: &next.s * &self.d + &next.d,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.s.nrows() != dim || self.s.ncols() != dim || self.d.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.s.nrows(),
            });
        }
        if !dim.is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: dim + 1,
                got: dim,
            });
        }
        let deviation = self.symplectic_deviation();
        if deviation.is_nan() || deviation > SYMPLECTIC_TOL {
            return Err(Error::NotSymplectic { deviation });
        }
        Ok(())
    }
}

/// Gaussian channel `cov ↦ G cov Gᵀ + N`, `mean ↦ G mean`, with a
/// multiplicative reduction of the mean-spin contrast.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseChannel {
    pub gain: DMatrix<f64>,
    pub noise: DMatrix<f64>,
    pub contrast_factor: f64,
}

impl NoiseChannel {
    pub fn new(gain: DMatrix<f64>, noise: DMatrix<f64>, contrast_factor: f64) -> Self {
        Self {
            gain,
            noise,
            contrast_factor,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim), DMatrix::zeros(dim, dim), 1.0)
    }

    fn validate(&self, dim: usize) -> Result<()> {
        for m in [&self.gain, &self.noise] {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.nrows(),
                });
            }
        }
        if !(self.contrast_factor > 0.0 && self.contrast_factor <= 1.0) {
            return Err(crate::error::invalid(
                "contrast_factor",
                format!("{} not in (0, 1]", self.contrast_factor),
            ));
        }
        let asym = (&self.noise - self.noise.transpose()).amax();
        if asym > 1e-12 {
            return Err(crate::error::invalid(
                "noise",
                format!("not symmetric ({asym:.3e})"),
            ));
        }
        let min_eigenvalue = min_symmetric_eigenvalue(&self.noise);
        if min_eigenvalue < -1e-12 {
            return Err(Error::NoiseNotPsd { min_eigenvalue });
        }
        Ok(())
    }
}

/// Gaussian state of one collective-spin mode plus zero or more light modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    modes: Vec<Mode>,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    contrast: f64,
    next_light: u32,
}

impl GaussianState {
    /// Coherent spin state with `num_light_modes` vacuum probe modes.
    pub fn new(num_light_modes: usize) -> Self {
        let mut modes = vec![Mode::Atom];
        modes.extend((0..num_light_modes as u32).map(|k| Mode::Light(LightId(k))));
        let dim = 2 * modes.len();
        Self {
            modes,
            mean: DVector::zeros(dim),
            cov: DMatrix::identity(dim, dim) * VACUUM_VARIANCE,
            contrast: 1.0,
            next_light: num_light_modes as u32,
        }
    }

    /// Atom-only state with the given 2×2 covariance, zero mean.
    pub fn from_atom_covariance(cov: [[f64; 2]; 2], contrast: f64) -> Result<Self> {
        let m = DMatrix::from_row_slice(2, 2, &[cov[0][0], cov[0][1], cov[1][0], cov[1][1]]);
        Self::from_parts(vec![Mode::Atom], DVector::zeros(2), m, contrast)
    }

    /// Builds a state from raw parts, validating shapes, symmetry, contrast and
    /// the uncertainty relation.
    pub fn from_parts(
        modes: Vec<Mode>,
        mean: DVector<f64>,
        mut cov: DMatrix<f64>,
        contrast: f64,
    ) -> Result<Self> {
        if modes.first() != Some(&Mode::Atom) || modes.iter().skip(1).any(|m| *m == Mode::Atom) {
            return Err(crate::error::invalid(
                "modes",
                "exactly one atom mode, listed first",
            ));
        }
        let dim = 2 * modes.len();
        if mean.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: mean.len(),
            });
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: cov.nrows(),
            });
        }
        let asym = (&cov - cov.transpose()).amax();
        if asym > 1e-12 {
            return Err(crate::error::invalid(
                "cov",
                format!("not symmetric ({asym:.3e})"),
            ));
        }
        if !(contrast > 0.0 && contrast <= 1.0) {
            return Err(crate::error::invalid(
                "contrast",
                format!("{contrast} not in (0, 1]"),
            ));
        }
        symmetrize(&mut cov);
        let next_light = modes
            .iter()
            .filter_map(|m| match m {
                Mode::Light(LightId(k)) => Some(k + 1),
                Mode::Atom => None,
            })
            .max()
            .unwrap_or(0);
        let state = Self {
            modes,
            mean,
            cov,
            contrast,
            next_light,
        };
        state.check_physical("from_parts")?;
        Ok(state)
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.modes.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn contrast(&self) -> f64 {
        self.contrast
    }

    pub fn light_modes(&self) -> impl Iterator<Item = LightId> + '_ {
        self.modes.iter().filter_map(|m| match m {
            Mode::Light(id) => Some(*id),
            Mode::Atom => None,
        })
    }

    /// Position of a light mode in the mode list.
    pub fn light_index(&self, id: LightId) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| *m == Mode::Light(id))
            .ok_or_else(|| Error::ModeNotFound(id.to_string()))
    }

    /// Atom covariance block `[[Var X_A, Cov], [Cov, Var P_A]]`.
    pub fn atom_cov(&self) -> [[f64; 2]; 2] {
        [
            [self.cov[(0, 0)], self.cov[(0, 1)]],
            [self.cov[(1, 0)], self.cov[(1, 1)]],
        ]
    }

    /// Variance of `cos θ X + sin θ P` on the given mode index.
    pub fn quadrature_variance(&self, mode_index: usize, angle: f64) -> f64 {
        let (s, c) = angle.sin_cos();
        let i = 2 * mode_index;
        c * c * self.cov[(i, i)]
            + s * s * self.cov[(i + 1, i + 1)]
            + 2.0 * s * c * self.cov[(i, i + 1)]
    }

    pub fn apply_symplectic(&self, map: &SymplecticMap) -> Result<Self> {
        map.validate(self.dim())?;
        let mut cov = &map.s * &self.cov * map.s.transpose();
        symmetrize(&mut cov);
        let mean = &map.s * &self.mean + &map.d;
        Ok(Self {
            cov,
            mean,
            ..self.clone()
        })
    }

    pub fn apply_channel(&self, ch: &NoiseChannel) -> Result<Self> {
        ch.validate(self.dim())?;
        let mut cov = &ch.gain * &self.cov * ch.gain.transpose() + &ch.noise;
        symmetrize(&mut cov);
        let mean = &ch.gain * &self.mean;
        Ok(Self {
            cov,
            mean,
            contrast: self.contrast * ch.contrast_factor,
            ..self.clone()
        })
    }

    /// Homodyne measurement of `cos(angle) X + sin(angle) P` on a light mode,
    /// followed by removal of that mode.
    ///
    /// `extra_noise_var` is detector noise in units of the shot noise. The
    /// remaining covariance is the Schur-complement conditional covariance;
    /// the mean is kept at its feedback-cancelled value. Returns the state and
    /// the measured-signal variance (shot noise = 1/2).
    pub fn homodyne_condition(
        &self,
        mode: LightId,
        angle: f64,
        extra_noise_var: f64,
    ) -> Result<(Self, f64)> {
        if extra_noise_var.is_nan() || extra_noise_var < 0.0 {
            return Err(crate::error::invalid(
                "extra_noise_var",
                format!("{extra_noise_var} < 0"),
            ));
        }
        let k = self.light_index(mode)?;
        let (s, c) = angle.sin_cos();
        let mut u = DVector::zeros(self.dim());
        u[2 * k] = c;
        u[2 * k + 1] = s;
        let cross = &self.cov * &u;
        let measured = u.dot(&cross) + extra_noise_var * VACUUM_VARIANCE;
        if measured.is_nan() || measured <= 0.0 {
            return Err(Error::DegenerateMeasurement(measured));
        }
        let mut conditioned = self.clone();
        if measured.is_finite() {
            let mut cov = &self.cov - &cross * cross.transpose() / measured;
            symmetrize(&mut cov);
            conditioned.cov = cov;
        }
        Ok((conditioned.without_mode(k), measured))
    }

    /// Discards a light mode (partial trace).
    pub fn trace_out(&self, mode: LightId) -> Result<Self> {
        let k = self.light_index(mode)?;
        Ok(self.without_mode(k))
    }

    /// Removes the mode at index `k`. Only light modes may be removed.
    pub fn remove_mode_index(&self, k: usize) -> Result<Self> {
        match self.modes.get(k) {
            None => Err(Error::ModeNotFound(format!("index {k}"))),
            Some(Mode::Atom) => Err(Error::AtomModeRemoval),
            Some(Mode::Light(_)) => Ok(self.without_mode(k)),
        }
    }

    fn without_mode(&self, k: usize) -> Self {
        let keep: Vec<usize> = (0..self.dim()).filter(|&i| i / 2 != k).collect();
        let cov = DMatrix::from_fn(keep.len(), keep.len(), |i, j| self.cov[(keep[i], keep[j])]);
        let mean = DVector::from_fn(keep.len(), |i, _| self.mean[keep[i]]);
        let mut modes = self.modes.clone();
        modes.remove(k);
        Self {
            modes,
            mean,
            cov,
            contrast: self.contrast,
            next_light: self.next_light,
        }
    }

    /// Appends a fresh vacuum light mode and returns its id.
    pub fn attach_vacuum(&self) -> (Self, LightId) {
        let id = LightId(self.next_light);
        let dim = self.dim();
        let mut cov = DMatrix::zeros(dim + 2, dim + 2);
        cov.view_mut((0, 0), (dim, dim)).copy_from(&self.cov);
        cov[(dim, dim)] = VACUUM_VARIANCE;
        cov[(dim + 1, dim + 1)] = VACUUM_VARIANCE;
        let mut mean = DVector::zeros(dim + 2);
        mean.rows_mut(0, dim).copy_from(&self.mean);
        let mut modes = self.modes.clone();
        modes.push(Mode::Light(id));
        let state = Self {
            modes,
            mean,
            cov,
            contrast: self.contrast,
            next_light: self.next_light + 1,
        };
        (state, id)
    }

    /// Smallest atom-quadrature variance and the angle of its axis, measured
    /// counterclockwise from `+X_A` in `[0, π)`. An isotropic block reports
    /// angle 0.
    pub fn min_variance(&self) -> (f64, f64) {
        min_variance_2x2(self.atom_cov())
    }

    /// Symplectic eigenvalues in ascending order.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        symplectic_eigenvalues(&self.cov)
    }

    /// Lower bound on symplectic eigenvalues for a physical state.
    ///
    /// Decay of the mean spin shrinks the atomic commutator to
    /// `[X_A, P_A] = i·contrast`, so the bound is `contrast/2`; it equals the
    /// vacuum bound `1/2` whenever no decay has been applied.
    pub fn uncertainty_bound(&self) -> f64 {
        VACUUM_VARIANCE * self.contrast
    }

    /// Checks symmetry and the uncertainty relation.
    pub fn check_physical(&self, step: &str) -> Result<()> {
        let nu = if self.num_modes() == 1 {
            let [[a, c], [_, b]] = self.atom_cov();
            (a * b - c * c).max(0.0).sqrt()
        } else {
            self.symplectic_eigenvalues()
                .first()
                .copied()
                .unwrap_or(f64::INFINITY)
        };
        let bound = self.uncertainty_bound();
        // ν² carries an absolute rounding error of order ε·‖V‖².
        let scale = self.cov.norm_squared();
        let rounding = 64.0 * f64::EPSILON * scale / bound.max(nu);
        if !nu.is_finite() || nu < bound - UNCERTAINTY_TOL - rounding {
            return Err(Error::Unphysical {
                step: step.to_string(),
                nu,
                bound,
            });
        }
        Ok(())
    }
}

/// Closed-form 2×2 eigen-analysis: `(λ_min, θ_min)`.
pub fn min_variance_2x2(block: [[f64; 2]; 2]) -> (f64, f64) {
    let [[a, c], [_, b]] = block;
    let half_diff = 0.5 * (a - b);
    let radius = half_diff.hypot(c);
    let trace = a + b;
    if radius <= 1e-14 * trace.abs() {
        return (0.5 * trace, 0.0);
    }
    let lambda_max = 0.5 * trace + radius;
    let lambda_min = (a * b - c * c) / lambda_max;
    let major = 0.5 * (2.0 * c).atan2(a - b);
    let mut theta = major + 0.5 * PI;
    theta = theta.rem_euclid(PI);
    if theta >= PI {
        theta -= PI;
    }
    (lambda_min, theta)
}

/// Symplectic eigenvalues of a positive-definite covariance, ascending.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Vec<f64> {
    let n = cov.nrows();
    if n == 2 {
        let det = cov[(0, 0)] * cov[(1, 1)] - cov[(0, 1)] * cov[(1, 0)];
        return vec![det.max(0.0).sqrt()];
    }
    let eig = SymmetricEigen::new(cov.clone());
    let sqrt_vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let root =
        &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
    let omega = symplectic_form(n / 2);
    // K = V^½ Ω V^½ is antisymmetric with eigenvalues ±iν, so -K² has ν² twice.
    let k = &root * omega * &root;
    let mut kk = -(&k * &k);
    symmetrize(&mut kk);
    let mut vals: Vec<f64> = SymmetricEigen::new(kk)
        .eigenvalues
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    vals.sort_by(f64::total_cmp);
    vals.into_iter().step_by(2).collect()
}
