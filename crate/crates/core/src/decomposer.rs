//! Tensor-product decompositions of the heat-equation system matrix.
//!
//! The sigma path follows the block recursions of the stacked system:
//! the time-stepping part `A₁` takes `t + 1` terms, the spatial operator `A′`
//! takes `2s + 3` and the block-diagonal `A₂` twice that, for
//! `(t + 1) + (4s + 6)` terms overall before merging.
//!
//! The Pauli path decomposes any `2^n × 2^n` matrix by recursive 2×2 block
//! splitting, which is how the two bases are compared.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heat::HeatParams;
use crate::matrix::DenseMatrix;
use crate::sigma::{Decomposition, SigmaFactor, TensorTerm};

use SigmaFactor::{Identity, Minus, MinusPlus, Plus, PlusMinus};

/// Boundary treatment at both ends of the rod.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoundarySpec {
    Neumann,
    /// `w₁ u + w₂ ∂u/∂x = q`.
    Robin { w1: f64, w2: f64 },
}

impl BoundarySpec {
    /// Value carried by the two corner terms of `A′`.
    pub fn corner_value(&self, dx: f64) -> Result<f64> {
        match *self {
            BoundarySpec::Neumann => Ok(1.0),
            BoundarySpec::Robin { w1, w2 } => {
                let denom = w1 * dx + w2;
                if denom == 0.0 || !denom.is_finite() || !w2.is_finite() {
                    return Err(Error::InvalidBoundary(format!(
                        "w1·dx + w2 = {denom} must be finite and nonzero"
                    )));
                }
                Ok(w2 / denom)
            }
        }
    }
}

fn rep(f: SigmaFactor, n: usize) -> Vec<SigmaFactor> {
    vec![f; n]
}

fn term(coefficient: f64, factors: Vec<SigmaFactor>) -> TensorTerm {
    TensorTerm::real(coefficient, factors).expect("non-empty factor list")
}

/// Block lower-bidiagonal time-stepping matrix `A₁` on `s + t` qubits.
pub fn decompose_a1(t: usize, s: usize) -> Result<Decomposition> {
    if t == 0 {
        return Err(Error::InvalidSize("A1 needs at least one time qubit".into()));
    }
    // One time qubit: I ⊗ I_{n_x} − σ₋ ⊗ I_{n_x}.
    let mut terms = vec![term(1.0, rep(Identity, s + 1)), {
        let mut f = vec![Minus];
        f.extend(rep(Identity, s));
        term(-1.0, f)
    }];
    // Each new time qubit: I ⊗ A₁ + σ₋ ⊗ D₁ with D₁ = −σ₊^{⊗(m−1)} ⊗ I_{n_x}.
    for m in 2..=t {
        for t_ in terms.iter_mut() {
            let mut f = vec![Identity];
            f.extend_from_slice(t_.factors());
            *t_ = TensorTerm::new(t_.coefficient, f)?;
        }
        let mut f = vec![Minus];
        f.extend(rep(Plus, m - 1));
        f.extend(rep(Identity, s));
        terms.push(term(-1.0, f));
    }
    Decomposition::new(s + t, terms)
}

/// Spatial operator `A′ = A′₁ + A′₂` on `s` qubits.
pub fn decompose_aprime(s: usize, bc: &BoundarySpec, dx: f64) -> Result<Decomposition> {
    if s == 0 {
        return Err(Error::InvalidSize("A' needs at least one spatial qubit".into()));
    }
    let corner = bc.corner_value(dx)?;
    let mut terms = vec![term(-2.0, vec![Identity]), term(1.0, vec![Minus]), term(1.0, vec![Plus])];
    for m in 2..=s {
        for t_ in terms.iter_mut() {
            let mut f = vec![Identity];
            f.extend_from_slice(t_.factors());
            *t_ = TensorTerm::new(t_.coefficient, f)?;
        }
        let mut lower = vec![Minus];
        lower.extend(rep(Plus, m - 1));
        terms.push(term(1.0, lower));
        let mut upper = vec![Plus];
        upper.extend(rep(Minus, m - 1));
        terms.push(term(1.0, upper));
    }
    terms.push(term(corner, rep(PlusMinus, s)));
    terms.push(term(corner, rep(MinusPlus, s)));
    Decomposition::new(s, terms)
}

/// `A₂ = I^{⊗t} ⊗ A′ − (σ₊σ₋)^{⊗t} ⊗ A′`.
pub fn decompose_a2(t: usize, s: usize, bc: &BoundarySpec, dx: f64) -> Result<Decomposition> {
    if t == 0 {
        return Err(Error::InvalidSize("A2 needs at least one time qubit".into()));
    }
    let a_prime = decompose_aprime(s, bc, dx)?;
    let mut out = a_prime.prefixed(&rep(Identity, t));
    out.extend(
        a_prime
            .prefixed(&rep(PlusMinus, t))
            .scaled(Complex64::new(-1.0, 0.0)),
    )?;
    Ok(out)
}

/// `A = A₁ − λ A₂` with `λ = diffusivity·Δt/Δx²`, unmerged.
pub fn decompose_heat(p: &HeatParams) -> Result<Decomposition> {
    p.validate()?;
    let (s, t) = (p.s(), p.t());
    let mut d = decompose_a1(t, s)?;
    let lambda = Complex64::new(-p.diffusion_number(), 0.0);
    d.extend(decompose_a2(t, s, &p.bc, p.dx)?.scaled(lambda))?;
    Ok(d)
}

/// `(t + 1) + (4s + 6)`, the unmerged sigma term count of the heat system.
pub fn heat_term_count(s: usize, t: usize) -> usize {
    (t + 1) + (4 * s + 6)
}

/// Single-qubit Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn as_factor(self) -> SigmaFactor {
        match self {
            Pauli::I => SigmaFactor::Identity,
            Pauli::X => SigmaFactor::PauliX,
            Pauli::Y => SigmaFactor::PauliY,
            Pauli::Z => SigmaFactor::PauliZ,
        }
    }
}

/// `Σ c_P P` over Pauli strings, with negligible coefficients pruned.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliDecomposition {
    pub num_qubits: usize,
    pub terms: Vec<(Complex64, Vec<Pauli>)>,
}

impl PauliDecomposition {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The same sum expressed with Pauli-valued [`SigmaFactor`]s.
    pub fn to_decomposition(&self) -> Result<Decomposition> {
        let terms = self
            .terms
            .iter()
            .map(|(c, p)| TensorTerm::new(*c, p.iter().map(|x| x.as_factor()).collect()))
            .collect::<Result<Vec<_>>>()?;
        Decomposition::new(self.num_qubits, terms)
    }
}

/// Default pruning threshold for Pauli coefficients.
pub const DEFAULT_PRUNE_TOL: f64 = 1e-10;

/// Pauli coefficients `Tr(P† m)/2^n` by recursive block splitting.
///
/// Writing `m = [[m₀₀, m₀₁], [m₁₀, m₁₁]]` along the most significant qubit,
/// `m = I⊗(m₀₀+m₁₁)/2 + X⊗(m₀₁+m₁₀)/2 + Y⊗i(m₀₁−m₁₀)/2 + Z⊗(m₀₀−m₁₁)/2`,
/// and each half-size block is split again. All-zero blocks are not
/// descended into, which keeps sparse inputs cheap.
pub fn pauli_decompose(m: &DenseMatrix, prune_tol: f64) -> Result<PauliDecomposition> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", m.rows(), m.cols())));
    }
    let dim = m.rows();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::NotPowerOfTwo(dim));
    }
    let n = dim.trailing_zeros() as usize;
    let mut terms = Vec::new();
    let mut prefix = Vec::with_capacity(n);
    split(m.entries().to_vec(), dim, &mut prefix, prune_tol, &mut terms);
    Ok(PauliDecomposition { num_qubits: n, terms })
}

fn split(
    block: Vec<Complex64>,
    dim: usize,
    prefix: &mut Vec<Pauli>,
    prune_tol: f64,
    out: &mut Vec<(Complex64, Vec<Pauli>)>,
) {
    if dim == 1 {
        if block[0].norm() > prune_tol {
            out.push((block[0], prefix.clone()));
        }
        return;
    }
    // Zero blocks only produce zero coefficients.
    if block.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return;
    }
    let h = dim / 2;
    let at = |r: usize, c: usize| block[r * dim + c];
    let half = Complex64::new(0.5, 0.0);
    let i_half = Complex64::new(0.0, 0.5);
    let mut children = [
        Vec::with_capacity(h * h),
        Vec::with_capacity(h * h),
        Vec::with_capacity(h * h),
        Vec::with_capacity(h * h),
    ];
    for r in 0..h {
        for c in 0..h {
            let (m00, m01, m10, m11) = (at(r, c), at(r, c + h), at(r + h, c), at(r + h, c + h));
            children[0].push((m00 + m11) * half);
            children[1].push((m01 + m10) * half);
            children[2].push((m01 - m10) * i_half);
            children[3].push((m00 - m11) * half);
        }
    }
    for (p, child) in Pauli::ALL.into_iter().zip(children) {
        prefix.push(p);
        split(child, h, prefix, prune_tol, out);
        prefix.pop();
    }
}

/// Dense sum of a Pauli decomposition.
pub fn pauli_matrix(d: &PauliDecomposition) -> Result<DenseMatrix> {
    crate::sigma::decomposition_matrix(&d.to_decomposition()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::{assemble_dense, spatial_operator};
    use crate::sigma::{decomposition_matrix, term_matrix};

    fn dense(d: &Decomposition) -> DenseMatrix {
        decomposition_matrix(d).unwrap()
    }

    /// Block lower-bidiagonal reference for `A₁`.
    fn a1_reference(t: usize, s: usize) -> DenseMatrix {
        let nx = 1usize << s;
        let dim = nx << t;
        let mut m = DenseMatrix::identity(dim);
        for r in nx..dim {
            m[(r, r - nx)] = Complex64::new(-1.0, 0.0);
        }
        m
    }

    #[test]
    fn a1_base_case() {
        let d = decompose_a1(1, 0).unwrap();
        assert_eq!(d.to_text(), "# qubits 1\n1 0 : I\n-1 0 : M\n");
    }

    #[test]
    fn a1_two_time_qubits() {
        let d = decompose_a1(2, 0).unwrap();
        let expected = Decomposition::from_text("1 0 : I I\n-1 0 : I M\n-1 0 : M P\n").unwrap();
        assert_eq!(d, expected);
        assert_eq!(dense(&d), a1_reference(2, 0));
    }

    #[test]
    fn a1_reconstruction_and_count() {
        for t in 1..=4 {
            for s in 0..=3 {
                let d = decompose_a1(t, s).unwrap();
                assert_eq!(d.len(), t + 1);
                assert_eq!(dense(&d), a1_reference(t, s), "t={t} s={s}");
            }
        }
        assert!(decompose_a1(0, 2).is_err());
    }

    #[test]
    fn aprime_single_qubit() {
        let d = decompose_aprime(1, &BoundarySpec::Neumann, 1.0).unwrap();
        assert_eq!(d.len(), 5);
        let expect = DenseMatrix::from_real(2, 2, &[-1.0, 1.0, 1.0, -1.0]).unwrap();
        assert_eq!(dense(&d), expect);
    }

    #[test]
    fn aprime_reconstruction_and_count() {
        for s in 1..=5 {
            let d = decompose_aprime(s, &BoundarySpec::Neumann, 1.0).unwrap();
            assert_eq!(d.len(), 2 * s + 3);
            assert_eq!(dense(&d), spatial_operator(1 << s, 1.0));
        }
        assert!(decompose_aprime(0, &BoundarySpec::Neumann, 1.0).is_err());
    }

    #[test]
    fn robin_corner_coefficient() {
        let bc = BoundarySpec::Robin { w1: 1.0, w2: 1.0 };
        let d = decompose_aprime(2, &bc, 1.0).unwrap();
        let corners: Vec<_> = d.terms().iter().rev().take(2).collect();
        for c in corners {
            assert_eq!(c.coefficient, Complex64::new(0.5, 0.0));
        }
        assert_eq!(dense(&d), spatial_operator(4, 0.5));
        assert!(decompose_aprime(2, &BoundarySpec::Robin { w1: 1.0, w2: -1.0 }, 1.0).is_err());
    }

    #[test]
    fn robin_without_w1_is_neumann() {
        let bc = BoundarySpec::Robin { w1: 0.0, w2: 2.5 };
        for s in 1..=3 {
            assert_eq!(
                decompose_aprime(s, &bc, 0.3).unwrap(),
                decompose_aprime(s, &BoundarySpec::Neumann, 0.3).unwrap()
            );
        }
    }

    #[test]
    fn a2_counts_and_signs() {
        let d = decompose_a2(1, 1, &BoundarySpec::Neumann, 1.0).unwrap();
        assert_eq!(d.len(), 10);
        let mut block = DenseMatrix::identity(2);
        block[(0, 0)] = Complex64::new(0.0, 0.0);
        assert_eq!(dense(&d), block.kron(&spatial_operator(2, 1.0)));

        let d = decompose_a2(2, 2, &BoundarySpec::Neumann, 1.0).unwrap();
        assert_eq!(d.len(), 14);
        let half = d.len() / 2;
        for (i, t) in d.terms().iter().enumerate() {
            let prefix = &t.factors()[..2];
            if i < half {
                assert_eq!(prefix, &[Identity, Identity]);
            } else {
                assert_eq!(prefix, &[PlusMinus, PlusMinus]);
                assert_eq!(t.coefficient, -d.terms()[i - half].coefficient);
            }
        }
    }

    #[test]
    fn heat_counts_against_closed_form() {
        for (nx, nt, raw) in [(4, 4, 17), (4, 8, 18), (8, 8, 22), (8, 16, 23)] {
            let p = HeatParams::new(nx, nt);
            let d = decompose_heat(&p).unwrap();
            assert_eq!(d.len(), raw);
            assert_eq!(d.len(), heat_term_count(p.s(), p.t()));
            // The A₁ identity and the −2·I diagonal of A₂ share a factor list.
            assert_eq!(d.merged(0.0).len(), raw - 1);
        }
    }

    #[test]
    fn heat_reconstruction() {
        for s in 1..=3 {
            for t in 1..=3 {
                let mut p = HeatParams::new(1 << s, 1 << t);
                p.dt = 0.37;
                let d = decompose_heat(&p).unwrap();
                assert!(dense(&d).max_abs_diff(&assemble_dense(&p).unwrap()) <= 1e-12);
                assert!(dense(&d.merged(0.0)).max_abs_diff(&assemble_dense(&p).unwrap()) <= 1e-12);
            }
        }
    }

    #[test]
    fn zero_diffusivity_reduces_to_a1() {
        let mut p = HeatParams::new(4, 4);
        p.diffusivity = 0.0;
        let d = decompose_heat(&p).unwrap();
        assert_eq!(dense(&d), a1_reference(2, 2));
        assert_eq!(d.merged(0.0), decompose_a1(2, 2).unwrap());
    }

    #[test]
    fn pauli_identity() {
        let d = pauli_decompose(&DenseMatrix::identity(4), DEFAULT_PRUNE_TOL).unwrap();
        assert_eq!(d.terms, vec![(Complex64::new(1.0, 0.0), vec![Pauli::I, Pauli::I])]);
    }

    #[test]
    fn pauli_rejects_bad_shapes() {
        assert_eq!(
            pauli_decompose(&DenseMatrix::identity(3), DEFAULT_PRUNE_TOL),
            Err(Error::NotPowerOfTwo(3))
        );
        assert!(pauli_decompose(&DenseMatrix::zeros(2, 4), DEFAULT_PRUNE_TOL).is_err());
    }

    /// `Tr(P† m)/N` for every Pauli string, the naive route.
    fn naive_pauli(m: &DenseMatrix) -> Vec<(Complex64, Vec<Pauli>)> {
        let n = m.rows().trailing_zeros() as usize;
        let mut out = Vec::new();
        for code in 0..(1usize << (2 * n)) {
            let string: Vec<Pauli> = (0..n).map(|q| Pauli::ALL[(code >> (2 * (n - 1 - q))) & 3]).collect();
            let t = TensorTerm::unit(&string.iter().map(|p| p.as_factor()).collect::<Vec<_>>());
            let pm = term_matrix(&t, false).unwrap();
            let tr: Complex64 = (0..m.rows())
                .flat_map(|r| (0..m.rows()).map(move |c| (r, c)))
                .map(|(r, c)| pm[(r, c)].conj() * m[(r, c)])
                .sum();
            let coeff = tr / m.rows() as f64;
            if coeff.norm() > DEFAULT_PRUNE_TOL {
                out.push((coeff, string));
            }
        }
        out
    }

    #[test]
    fn splitting_agrees_with_trace_oracle() {
        for (nx, nt) in [(2, 2), (2, 4), (4, 4), (4, 8)] {
            let mut p = HeatParams::new(nx, nt);
            p.dt = 0.29;
            let a = assemble_dense(&p).unwrap();
            let fast = pauli_decompose(&a, DEFAULT_PRUNE_TOL).unwrap();
            let slow = naive_pauli(&a);
            assert_eq!(fast.len(), slow.len());
            for ((c1, s1), (c2, s2)) in fast.terms.iter().zip(&slow) {
                assert_eq!(s1, s2);
                assert!((c1 - c2).norm() < 1e-12);
            }
            assert!(pauli_matrix(&fast).unwrap().max_abs_diff(&a) < 1e-10);
        }
    }

    #[test]
    fn complex_matrix_round_trip() {
        let m = DenseMatrix::from_fn(8, 8, |r, c| {
            Complex64::new((r * 3 + c) as f64 * 0.1 - 1.0, (r as f64 - c as f64) * 0.07)
        });
        let d = pauli_decompose(&m, DEFAULT_PRUNE_TOL).unwrap();
        assert!(pauli_matrix(&d).unwrap().max_abs_diff(&m) < 1e-10);
    }
}
