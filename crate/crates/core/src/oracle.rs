//! Exact state-vector simulation of a collective spin `J = N_A/2` coupled to a
//! two-mode probe with fixed photon number `N_L`.
//!
//! The probe is written in the circular basis `|n₊, n₋⟩`, where the Stokes
//! component `S₃ = (n₊ − n₋)/2` is diagonal; it is handled as a Schwinger
//! spin `s = N_L/2`. Amplitudes are indexed `m_index·(N_L + 1) + n₊` with
//! `m_index = m + J`.
//!
//! Quadratures follow the fixed-frame linearization
//! `X_A = J_y/√(N_A/2)`, `P_A = J_z/√(N_A/2)`, `X_L = S₂/√(N_L/2)`,
//! `P_L = S₃/√(N_L/2)`. A rotation `e^{iθS₁}` by `θ` acts on `(X_L, P_L)`
//! like the Gaussian quarter waveplate applied with the opposite sense, so
//! the Gaussian double pass corresponds to `θ = −π/2`.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gaussian::min_variance_2x2;

type C64 = Complex<f64>;

/// Upper limit on `N_A` and `N_L` accepted by the oracle.
pub const MAX_PARTICLES: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactState {
    n_atoms: usize,
    n_photons: usize,
    amplitudes: Vec<C64>,
}

/// Amplitudes of the spin-`n/2` coherent state along `+x` in the `S_z` basis.
fn coherent_x(n: usize) -> Vec<f64> {
    // √(C(n, k)) / 2^{n/2}, built in log space to stay finite.
    let mut log_binom = 0.0f64;
    let half_log2 = 0.5 * n as f64 * std::f64::consts::LN_2;
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if k > 0 {
            log_binom += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        out.push((0.5 * log_binom - half_log2).exp());
    }
    out
}

/// `⟨m+1|S₊|m⟩` for spin `s`, with `m = index − s`.
fn raising(two_s: usize, index: usize) -> f64 {
    let s = two_s as f64 / 2.0;
    let m = index as f64 - s;
    (s * (s + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    X,
    Y,
    Z,
}

impl ExactState {
    /// Spin coherent along `+J_x` and probe linearly polarized (mean along `+S₁`).
    pub fn coherent(n_atoms: usize, n_photons: usize) -> Result<Self> {
        if n_atoms == 0 || n_atoms > MAX_PARTICLES {
            return Err(invalid(
                "n_atoms",
                format!("{n_atoms} not in 1..={MAX_PARTICLES}"),
            ));
        }
        if n_photons == 0 || n_photons > MAX_PARTICLES {
            return Err(invalid(
                "n_photons",
                format!("{n_photons} not in 1..={MAX_PARTICLES}"),
            ));
        }
        let atom = coherent_x(n_atoms);
        let light = coherent_x(n_photons);
        let amplitudes = atom
            .iter()
            .flat_map(|a| light.iter().map(move |l| C64::new(a * l, 0.0)))
            .collect();
        Ok(Self {
            n_atoms,
            n_photons,
            amplitudes,
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &ExactState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm_sqr()
    }

    fn light_len(&self) -> usize {
        self.n_photons + 1
    }

    fn m(&self, m_index: usize) -> f64 {
        m_index as f64 - self.n_atoms as f64 / 2.0
    }

    fn s3(&self, l_index: usize) -> f64 {
        l_index as f64 - self.n_photons as f64 / 2.0
    }

    fn map_diagonal(&self, phase: impl Fn(f64, f64) -> f64) -> Self {
        let ll = self.light_len();
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a * C64::from_polar(1.0, phase(self.m(i / ll), self.s3(i % ll))))
            .collect();
        Self {
            amplitudes,
            ..self.clone()
        }
    }

    /// `U_F = exp(−iχ J_z S₃)`, diagonal in the product basis.
    pub fn evolve_faraday_exact(&self, chi: f64) -> Self {
        self.map_diagonal(|m, s3| -chi * m * s3)
    }

    /// One-axis twist `exp(−iμ J_z²/2)`.
    pub fn one_axis_twist_exact(&self, mu: f64) -> Self {
        self.map_diagonal(|m, _| -0.5 * mu * m * m)
    }

    /// Probe rotation `exp(iθ S₁)` applied within each `m` block.
    pub fn stokes_rotation_exact(&self, angle: f64) -> Self {
        let n = self.light_len();
        // S₁ is real symmetric tridiagonal in the S₃ basis.
        let s1 = DMatrix::from_fn(n, n, |i, j| {
            if i == j + 1 {
                0.5 * raising(self.n_photons, j)
            } else if j == i + 1 {
                0.5 * raising(self.n_photons, i)
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(s1);
        let q = eig.eigenvectors.map(|v| C64::new(v, 0.0));
        let phases =
            DMatrix::from_diagonal(&eig.eigenvalues.map(|d| C64::from_polar(1.0, angle * d)));
        let u = &q * phases * q.transpose();

        let mut amplitudes = vec![C64::new(0.0, 0.0); self.dim()];
        for (block_in, block_out) in self.amplitudes.chunks(n).zip(amplitudes.chunks_mut(n)) {
            for (i, out) in block_out.iter_mut().enumerate() {
                *out = (0..n).map(|j| u[(i, j)] * block_in[j]).sum();
            }
        }
        Self {
            amplitudes,
            ..self.clone()
        }
    }

    fn apply_atom(&self, axis: Axis) -> Vec<C64> {
        let ll = self.light_len();
        let na = self.n_atoms;
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for mi in 0..=na {
            for l in 0..ll {
                let a = self.amplitudes[mi * ll + l];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                match axis {
                    Axis::Z => out[mi * ll + l] += a * self.m(mi),
                    Axis::X | Axis::Y => {
                        // J₊ moves m_index up, J₋ down.
                        let up = if mi < na { raising(na, mi) } else { 0.0 };
                        let down = if mi > 0 { raising(na, mi - 1) } else { 0.0 };
                        let (cu, cd) = match axis {
                            Axis::X => (C64::new(0.5 * up, 0.0), C64::new(0.5 * down, 0.0)),
                            _ => (C64::new(0.0, -0.5 * up), C64::new(0.0, 0.5 * down)),
                        };
                        if mi < na {
                            out[(mi + 1) * ll + l] += cu * a;
                        }
                        if mi > 0 {
                            out[(mi - 1) * ll + l] += cd * a;
                        }
                    }
                }
            }
        }
        out
    }

    fn apply_light(&self, axis: Axis) -> Vec<C64> {
        let ll = self.light_len();
        let np = self.n_photons;
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for (i, &a) in self.amplitudes.iter().enumerate() {
            let (block, l) = (i / ll, i % ll);
            match axis {
                Axis::Z => out[i] += a * self.s3(l),
                Axis::X | Axis::Y => {
                    let up = if l < np { raising(np, l) } else { 0.0 };
                    let down = if l > 0 { raising(np, l - 1) } else { 0.0 };
                    let (cu, cd) = match axis {
                        Axis::X => (C64::new(0.5 * up, 0.0), C64::new(0.5 * down, 0.0)),
                        _ => (C64::new(0.0, -0.5 * up), C64::new(0.0, 0.5 * down)),
                    };
                    if l < np {
                        out[block * ll + l + 1] += cu * a;
                    }
                    if l > 0 {
                        out[block * ll + l - 1] += cd * a;
                    }
                }
            }
        }
        out
    }

    fn inner(&self, a: &[C64], b: &[C64]) -> C64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    /// `⟨J_x⟩`.
    pub fn mean_jx(&self) -> f64 {
        self.inner(&self.amplitudes, &self.apply_atom(Axis::X)).re
    }

    /// `⟨S₁⟩`.
    pub fn mean_s1(&self) -> f64 {
        self.inner(&self.amplitudes, &self.apply_light(Axis::X)).re
    }

    /// Symmetrized covariance of `(X_A, P_A, X_L, P_L)` in the fixed-frame
    /// linearization.
    pub fn hpa_covariance(&self) -> DMatrix<f64> {
        let na = (self.n_atoms as f64 / 2.0).sqrt();
        let nl = (self.n_photons as f64 / 2.0).sqrt();
        let ops = [
            (self.apply_atom(Axis::Y), na),
            (self.apply_atom(Axis::Z), na),
            (self.apply_light(Axis::Y), nl),
            (self.apply_light(Axis::Z), nl),
        ];
        let means: Vec<f64> = ops
            .iter()
            .map(|(v, _)| self.inner(&self.amplitudes, v).re)
            .collect();
        DMatrix::from_fn(4, 4, |i, j| {
            let second = self.inner(&ops[i].0, &ops[j].0).re;
            (second - means[i] * means[j]) / (ops[i].1 * ops[j].1)
        })
    }

    /// Smallest variance of the transverse spin `(J_y, J_z)`, in units of the
    /// projection noise `N_A/4`.
    pub fn min_transverse_variance(&self) -> f64 {
        let cov = self.hpa_covariance();
        // hpa units are J²/(N_A/2); projection noise N_A/4 is 1/2 there.
        let block = [[cov[(0, 0)], cov[(0, 1)]], [cov[(1, 0)], cov[(1, 1)]]];
        min_variance_2x2(block).0 / 0.5
    }

    /// Wineland parameter `N_A·ΔJ²_min/⟨J_x⟩²` of the atoms.
    pub fn wineland_zeta(&self) -> f64 {
        let n = self.n_atoms as f64;
        let jx = self.mean_jx();
        n * self.min_transverse_variance() * (n / 4.0) / (jx * jx)
    }
}

/// Faraday angle per unit angular momentum giving coupling `ξ`:
/// `χ = 2√(ξ/(N_A N_L))`.
pub fn chi_for_xi(xi: f64, n_atoms: usize, n_photons: usize) -> f64 {
    2.0 * (xi / (n_atoms as f64 * n_photons as f64)).sqrt()
}

/// Twist angle equivalent to a shear of strength `ξ`: `μ = 2ξ/N_A`.
pub fn mu_for_xi(xi: f64, n_atoms: usize) -> f64 {
    2.0 * xi / n_atoms as f64
}

/// Minimal transverse variance of a twisted coherent state, in units of
/// `N_A/4`, from the closed-form one-axis-twisting moments.
///
/// With `A = 1 − cos^{N−2} μ` and `B = 4 sin(μ/2) cos^{N−2}(μ/2)`, the
/// variance is `1 + (N−1)/4·(A − √(A² + B²))`.
pub fn ku_variance(n_atoms: usize, mu: f64) -> f64 {
    let n = n_atoms as f64;
    let a = 1.0 - mu.cos().powf(n - 2.0);
    let b = 4.0 * (0.5 * mu).sin() * (0.5 * mu).cos().powf(n - 2.0);
    1.0 + 0.25 * (n - 1.0) * (a - a.hypot(b))
}

/// Wineland parameter of a twisted coherent state, from [`ku_variance`] and
/// `⟨J_x⟩ = (N/2)·cos^{N−1}(μ/2)`.
pub fn ku_zeta(n_atoms: usize, mu: f64) -> f64 {
    let contrast = (0.5 * mu).cos().powf(n_atoms as f64 - 1.0);
    ku_variance(n_atoms, mu) / (contrast * contrast)
}

/// Exact versus linearized probe variance after one Faraday pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub n_atoms: usize,
    pub n_photons: usize,
    pub xi: f64,
    pub exact_var: f64,
    pub hpa_var: f64,
    pub rel_err: f64,
}

/// `Var(X_L)` after `U_F` from the exact state against `(1 + ξ)/2`.
pub fn compare_faraday(n_atoms: usize, n_photons: usize, xi: f64) -> Result<OracleComparison> {
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(invalid(
            "xi",
            format!("{xi} must be finite and non-negative"),
        ));
    }
    let state = ExactState::coherent(n_atoms, n_photons)?
        .evolve_faraday_exact(chi_for_xi(xi, n_atoms, n_photons));
    let exact_var = state.hpa_covariance()[(2, 2)];
    let hpa_var = (1.0 + xi) / 2.0;
    Ok(OracleComparison {
        n_atoms,
        n_photons,
        xi,
        exact_var,
        hpa_var,
        rel_err: (exact_var - hpa_var).abs() / hpa_var,
    })
}
