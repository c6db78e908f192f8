//! Backward-Euler discretization of the 1-D heat equation with a constant
//! boundary flux, stacked over all time steps into one linear system.
//!
//! Unknowns are ordered time-major: `u = [u₁; u₂; …; u_{n_t}]`, each block of
//! length `n_x`. The first block row is the identity (`u₁ = u₀`), every later
//! row is `(I − λA′)u_{t+1} − u_t = c·e₁` with `λ = diffusivity·Δt/Δx²` and
//! `c = qΔt/(kΔx)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decomposer::{decompose_heat, BoundarySpec};
use crate::error::{Error, Result};
use crate::matrix::{check_oracle_limit, lu_solve, DenseMatrix, DEFAULT_ORACLE_LIMIT};
use crate::sigma::Decomposition;
use crate::simulator::StateVector;

/// Physical and grid parameters of a heat-equation instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatParams {
    /// Spatial grid points, a power of two `2^s` with `s ≥ 1`.
    pub n_x: usize,
    /// Time blocks, a power of two `2^t` with `t ≥ 1`.
    pub n_t: usize,
    pub dx: f64,
    pub dt: f64,
    /// Thermal diffusivity.
    pub diffusivity: f64,
    /// Thermal conductivity `k`.
    pub conductivity: f64,
    /// Boundary heat flux `q` entering at `x = 0`.
    pub flux: f64,
    /// Initial temperature profile, length `n_x`.
    pub u0: Vec<f64>,
    pub bc: BoundarySpec,
}

impl HeatParams {
    /// Unit grid with `u₀ = 1`, `λ = 0.1` and a boundary source of `0.1`.
    pub fn new(n_x: usize, n_t: usize) -> Self {
        Self {
            n_x,
            n_t,
            dx: 1.0,
            dt: 0.1,
            diffusivity: 1.0,
            conductivity: 1.0,
            flux: 1.0,
            u0: vec![1.0; n_x],
            bc: BoundarySpec::Neumann,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("n_x", self.n_x), ("n_t", self.n_t)] {
            if n < 2 || !n.is_power_of_two() {
                return Err(Error::InvalidSize(format!("{name} = {n} must be a power of two >= 2")));
            }
        }
        for (name, v) in [("dx", self.dx), ("dt", self.dt), ("conductivity", self.conductivity)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
            }
        }
        if !self.diffusivity.is_finite() || !self.flux.is_finite() {
            return Err(Error::InvalidParameter("diffusivity and flux must be finite".into()));
        }
        if self.u0.len() != self.n_x {
            return Err(Error::DimensionMismatch(format!(
                "u0 has length {}, expected n_x = {}",
                self.u0.len(),
                self.n_x
            )));
        }
        self.bc.corner_value(self.dx)?;
        Ok(())
    }

    /// `log2 n_x`.
    pub fn s(&self) -> usize {
        self.n_x.trailing_zeros() as usize
    }

    /// `log2 n_t`.
    pub fn t(&self) -> usize {
        self.n_t.trailing_zeros() as usize
    }

    pub fn num_qubits(&self) -> usize {
        self.s() + self.t()
    }

    /// `diffusivity·Δt/Δx²`, the weight of the spatial operator.
    pub fn diffusion_number(&self) -> f64 {
        self.diffusivity * self.dt / (self.dx * self.dx)
    }

    /// `qΔt/(kΔx)`, the boundary source entering each time step.
    pub fn source(&self) -> f64 {
        self.flux * self.dt / (self.conductivity * self.dx)
    }
}

/// The stacked system `A u = b` in both representations.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub decomposition: Decomposition,
    pub dense_a: DenseMatrix,
    pub b: Vec<f64>,
}

/// Spatial operator `A′`: the second-difference stencil whose two corner
/// entries are `−2 + corner` (corner = 1 for the insulated/Neumann case).
pub fn spatial_operator(n_x: usize, corner: f64) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(n_x, n_x);
    for i in 0..n_x {
        a[(i, i)] = Complex64::new(-2.0, 0.0);
        if i + 1 < n_x {
            a[(i, i + 1)] = Complex64::new(1.0, 0.0);
            a[(i + 1, i)] = Complex64::new(1.0, 0.0);
        }
    }
    a[(0, 0)] += corner;
    a[(n_x - 1, n_x - 1)] += corner;
    a
}

/// Assembles `A` block by block, without going through the decomposition.
pub fn assemble_dense(p: &HeatParams) -> Result<DenseMatrix> {
    p.validate()?;
    check_oracle_limit(p.num_qubits(), DEFAULT_ORACLE_LIMIT)?;
    let (nx, nt) = (p.n_x, p.n_t);
    let lambda = Complex64::new(p.diffusion_number(), 0.0);
    let a_prime = spatial_operator(nx, p.bc.corner_value(p.dx)?);
    let mut a = DenseMatrix::zeros(nx * nt, nx * nt);
    for blk in 0..nt {
        let o = blk * nx;
        for i in 0..nx {
            a[(o + i, o + i)] += Complex64::new(1.0, 0.0);
            if blk > 0 {
                a[(o + i, o - nx + i)] -= Complex64::new(1.0, 0.0);
            }
        }
        if blk > 0 {
            for i in 0..nx {
                for j in 0..nx {
                    a[(o + i, o + j)] -= lambda * a_prime[(i, j)];
                }
            }
        }
    }
    Ok(a)
}

/// Right-hand side `[u₀; c·e₁; …; c·e₁]`.
pub fn assemble_rhs(p: &HeatParams) -> Result<Vec<f64>> {
    p.validate()?;
    let mut b = vec![0.0; p.n_x * p.n_t];
    b[..p.n_x].copy_from_slice(&p.u0);
    let src = p.source();
    for blk in 1..p.n_t {
        b[blk * p.n_x] = src;
    }
    Ok(b)
}

pub fn build_system(p: &HeatParams) -> Result<LinearSystem> {
    Ok(LinearSystem {
        decomposition: decompose_heat(p)?,
        dense_a: assemble_dense(p)?,
        b: assemble_rhs(p)?,
    })
}

/// Reference solution of the stacked system by LU with partial pivoting.
pub fn classical_solve(s: &LinearSystem) -> Result<Vec<f64>> {
    let b: Vec<Complex64> = s.b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    Ok(lu_solve(&s.dense_a, &b)?.into_iter().map(|z| z.re).collect())
}

/// `|⟨x/‖x‖, ψ⟩|²`.
pub fn fidelity(x: &[f64], psi: &StateVector) -> Result<f64> {
    let amps = psi.amplitudes();
    if x.len() != amps.len() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} against a {}-amplitude state",
            x.len(),
            amps.len()
        )));
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let overlap: Complex64 = x.iter().zip(amps).map(|(&v, a)| a * v).sum();
    Ok((overlap.norm_sqr() / (norm * norm)).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigma::decomposition_matrix;

    fn re(m: &DenseMatrix) -> Vec<f64> {
        m.entries().iter().map(|z| z.re).collect()
    }

    #[test]
    fn two_by_two_system_by_hand() {
        let mut p = HeatParams::new(2, 2);
        p.dt = 1.0; // λ = 1
        let a = assemble_dense(&p).unwrap();
        // [[I, 0], [-I, I]] - diag(0, A'), A' = [[-1, 1], [1, -1]]
        #[rustfmt::skip]
        let expected = [
             1.0,  0.0,  0.0,  0.0,
             0.0,  1.0,  0.0,  0.0,
            -1.0,  0.0,  2.0, -1.0,
             0.0, -1.0, -1.0,  2.0,
        ];
        assert_eq!(re(&a), expected);
        let s = build_system(&p).unwrap();
        assert!(decomposition_matrix(&s.decomposition).unwrap().max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn zero_source_and_initial_state_give_zero_rhs() {
        let mut p = HeatParams::new(4, 2);
        p.flux = 0.0;
        p.u0 = vec![0.0; 4];
        assert!(assemble_rhs(&p).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rhs_layout() {
        let p = HeatParams::new(2, 4);
        let b = assemble_rhs(&p).unwrap();
        let src = p.source();
        assert_eq!(b, vec![1.0, 1.0, src, 0.0, src, 0.0, src, 0.0]);
    }

    #[test]
    fn zero_diffusivity_leaves_block_bidiagonal() {
        let mut p = HeatParams::new(2, 4);
        p.diffusivity = 0.0;
        let a = assemble_dense(&p).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                let v = a[(r, c)].re;
                let expect = if r == c {
                    1.0
                } else if r >= 2 && c == r - 2 {
                    -1.0
                } else {
                    0.0
                };
                assert_eq!(v, expect, "entry ({r},{c})");
            }
        }
    }

    #[test]
    fn identity_solve() {
        let s = LinearSystem {
            decomposition: Decomposition::empty(1).unwrap(),
            dense_a: DenseMatrix::identity(2),
            b: vec![1.0, 0.0],
        };
        assert_eq!(classical_solve(&s).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn zero_diffusivity_solution_is_block_cumulative_sum() {
        let mut p = HeatParams::new(4, 4);
        p.diffusivity = 0.0;
        p.u0 = vec![0.3, -1.0, 2.0, 0.25];
        let s = build_system(&p).unwrap();
        let x = classical_solve(&s).unwrap();
        let mut acc = [0.0; 4];
        for blk in 0..4 {
            for i in 0..4 {
                acc[i] += s.b[blk * 4 + i];
                assert!((x[blk * 4 + i] - acc[i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_system_is_reported() {
        let s = LinearSystem {
            decomposition: Decomposition::empty(1).unwrap(),
            dense_a: DenseMatrix::zeros(2, 2),
            b: vec![1.0, 0.0],
        };
        assert_eq!(classical_solve(&s), Err(Error::Singular));
    }

    #[test]
    fn invalid_sizes_and_parameters() {
        assert!(HeatParams::new(3, 4).validate().is_err());
        assert!(HeatParams::new(4, 1).validate().is_err());
        let mut p = HeatParams::new(4, 4);
        p.dt = 0.0;
        assert!(matches!(p.validate(), Err(Error::InvalidParameter(_))));
        let mut p = HeatParams::new(4, 4);
        p.u0.pop();
        assert!(matches!(build_system(&p), Err(Error::DimensionMismatch(_))));
        let mut p = HeatParams::new(4, 4);
        p.bc = BoundarySpec::Robin { w1: 1.0, w2: -1.0 };
        assert!(matches!(p.validate(), Err(Error::InvalidBoundary(_))));
    }

    #[test]
    fn fidelity_cases() {
        let psi = StateVector::from_amplitudes(vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
        ])
        .unwrap();
        assert!((fidelity(&[3.0, 0.0], &psi).unwrap() - 0.36).abs() < 1e-15);
        assert!((fidelity(&[0.0, -2.0], &psi).unwrap() - 0.64).abs() < 1e-15);
        let basis = StateVector::zero(1);
        assert!((fidelity(&[5.0, 0.0], &basis).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity(&[0.0, 1.0], &basis).unwrap(), 0.0);
        assert_eq!(fidelity(&[0.0, 0.0], &basis), Err(Error::ZeroVector));
        assert!(fidelity(&[1.0], &basis).is_err());
    }
}
