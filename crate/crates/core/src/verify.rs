//! Self-check suites over the factor algebra and the circuit constructions,
//! compared against dense-matrix oracles. Shared by the tests and the
//! `verify` command.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    circuit_unitary, completion_circuit, dilation_circuit, gate_census, Circuit,
};
use crate::error::Result;
use crate::heat::HeatParams;
use crate::matrix::{DenseMatrix, DEFAULT_ORACLE_LIMIT};
use crate::sigma::{term_complement_matrix, term_completion, term_matrix, SigmaFactor, TensorTerm};
use crate::simulator::run;
use crate::vqls::{build_ansatz, estimate_terms, AnsatzSpec, Entangler, ProblemInstance};

const TOL: f64 = 1e-12;
const HADAMARD_TOL: f64 = 1e-9;
const MAX_REPORTED: usize = 20;

/// Deliberate defects for checking that the suites can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Flips the polarity of one control in every synthesized completion.
    FlipPolarity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    /// Exhaustive algebra and completion checks run for `1 ..= max_qubits`.
    pub max_qubits: usize,
    /// Pure σ± dilation checks run for `1 ..= dilation_max_qubits`.
    pub dilation_max_qubits: usize,
    /// Random parameter draws for the Hadamard-test comparison.
    pub hadamard_draws: usize,
    pub seed: u64,
    pub oracle_limit: usize,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            max_qubits: 3,
            dilation_max_qubits: 4,
            hadamard_draws: 20,
            seed: 0,
            oracle_limit: DEFAULT_ORACLE_LIMIT,
            fault: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub checks: usize,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
    /// Set when the suite was not run; a skipped suite counts as passed.
    pub skipped: Option<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            passed: true,
            checks: 0,
            failures: Vec::new(),
            notes: Vec::new(),
            skipped: None,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.passed = false;
            if self.failures.len() < MAX_REPORTED {
                self.failures.push(what());
            }
        }
    }

    fn skip(mut self, why: String) -> Self {
        self.skipped = Some(why);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

/// Every sigma-only factor list on `n` qubits (`5^n` of them).
pub fn all_sigma_terms(n: usize) -> Vec<TensorTerm> {
    let mut out: Vec<Vec<SigmaFactor>> = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|fs| {
                SigmaFactor::SIGMA.iter().map(move |&f| {
                    let mut g = fs.clone();
                    g.push(f);
                    g
                })
            })
            .collect();
    }
    out.iter().map(|fs| TensorTerm::unit(fs)).collect()
}

/// Every factor list over `{σ₊, σ₋}` on `n` qubits.
pub fn pure_ladder_terms(n: usize) -> Vec<TensorTerm> {
    (0..1usize << n)
        .map(|mask| {
            let fs: Vec<SigmaFactor> = (0..n)
                .map(|p| if (mask >> (n - 1 - p)) & 1 == 1 { SigmaFactor::Minus } else { SigmaFactor::Plus })
                .collect();
            TensorTerm::unit(&fs)
        })
        .collect()
}

fn inject(c: &mut Circuit, fault: Option<Fault>) {
    if let Some(Fault::FlipPolarity) = fault {
        let mut gates = c.gates().to_vec();
        if let Some(g) = gates.iter_mut().rev().find(|g| !g.controls.is_empty()) {
            g.controls[0].polarity = g.controls[0].polarity.flipped();
        }
        let mut fresh = Circuit::with_layout(c.layout().to_vec());
        for g in gates {
            fresh.push(g).expect("same register");
        }
        *c = fresh;
    }
}

fn too_wide(suite: SuiteResult, qubits: usize, limit: usize) -> Option<SuiteResult> {
    (qubits > limit).then(|| {
        suite.skip(format!("needs {qubits} qubits, beyond the dense-oracle limit of {limit}"))
    })
}

/// `A†A` and `AA†` are orthogonal projectors.
pub fn projection_suite(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("projection");
    if let Some(skipped) = too_wide(s.clone(), opts.max_qubits, opts.oracle_limit) {
        return Ok(skipped);
    }
    for n in 1..=opts.max_qubits {
        for t in all_sigma_terms(n) {
            let a = term_matrix(&t, false)?;
            for p in [&a.adjoint() * &a, &a * &a.adjoint()] {
                s.check((&p * &p).max_abs_diff(&p) <= TOL && p.adjoint().max_abs_diff(&p) <= TOL, || {
                    format!("{t}: product is not an orthogonal projector")
                });
            }
        }
    }
    Ok(s)
}

/// `(A^c)†A = 0` and `A(A^c)† = 0`.
pub fn orthogonality_suite(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("complement-orthogonality");
    if let Some(skipped) = too_wide(s.clone(), opts.max_qubits, opts.oracle_limit) {
        return Ok(skipped);
    }
    for n in 1..=opts.max_qubits {
        for t in all_sigma_terms(n) {
            let a = term_matrix(&t, false)?;
            let ac = term_complement_matrix(&t)?;
            s.check((&ac.adjoint() * &a).is_zero(TOL), || format!("{t}: (A^c)†A ≠ 0"));
            s.check((&a * &ac.adjoint()).is_zero(TOL), || format!("{t}: A(A^c)† ≠ 0"));
        }
    }
    Ok(s)
}

/// The completion `Ā = A + A^c` is unitary.
pub fn completion_unitarity_suite(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("completion-unitarity");
    if let Some(skipped) = too_wide(s.clone(), opts.max_qubits, opts.oracle_limit) {
        return Ok(skipped);
    }
    for n in 1..=opts.max_qubits {
        for t in all_sigma_terms(n) {
            let bar = term_matrix(&term_completion(&t), false)?;
            let sum = &term_matrix(&t, false)? + &term_complement_matrix(&t)?;
            s.check(bar.is_unitary(TOL) && bar.max_abs_diff(&sum) <= TOL, || {
                format!("{t}: completion is not a unitary A + A^c")
            });
        }
    }
    Ok(s)
}

/// Completion circuits realize `[[A^c, A], [A, A^c]]` with one
/// multi-controlled X and at most `n` single-qubit gates.
pub fn completion_suite(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("completion-block-form");
    if let Some(skipped) = too_wide(s.clone(), opts.max_qubits + 1, opts.oracle_limit) {
        return Ok(skipped);
    }
    for n in 1..=opts.max_qubits {
        for t in all_sigma_terms(n) {
            let mut c = completion_circuit(&t);
            inject(&mut c, opts.fault);
            let a = term_matrix(&t, false)?;
            let ac = term_complement_matrix(&t)?;
            let expected = DenseMatrix::block2x2(&ac, &a, &a, &ac);
            let census = gate_census(&c);
            s.check(circuit_unitary(&c)?.max_abs_diff(&expected) <= TOL, || {
                format!("{t}: circuit unitary differs from the block form")
            });
            s.check(census.mcx_total() == 1 && census.single_qubit <= n, || {
                format!(
                    "{t}: {} multi-controlled X and {} single-qubit gates",
                    census.mcx_total(),
                    census.single_qubit
                )
            });
        }
        s.notes.push(format!("n={n}: {} terms", 5usize.pow(n as u32)));
    }
    Ok(s)
}

/// Dilation circuits realize `[[A, I − AAᵀ], [I − AᵀA, Aᵀ]]`. Pure σ± terms
/// need `2n + 1` multi-controlled X, projector-only terms one.
pub fn dilation_suite(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("dilation");
    if let Some(skipped) = too_wide(s.clone(), opts.dilation_max_qubits + 1, opts.oracle_limit) {
        return Ok(skipped);
    }
    for n in 1..=opts.dilation_max_qubits {
        let mut counts = Vec::new();
        for t in pure_ladder_terms(n) {
            let c = dilation_circuit(&t)?;
            let a = term_matrix(&t, false)?;
            let at = a.adjoint();
            let id = DenseMatrix::identity(a.rows());
            let expected = DenseMatrix::block2x2(&a, &(&id - &(&a * &at)), &(&id - &(&at * &a)), &at);
            s.check(circuit_unitary(&c)?.max_abs_diff(&expected) <= TOL, || {
                format!("{t}: dilation unitary differs from the block form")
            });
            let mcx = gate_census(&c).mcx_total();
            s.check(mcx == 2 * n + 1, || format!("{t}: {mcx} multi-controlled X, expected {}", 2 * n + 1));
            counts.push(mcx);
        }
        let proj = TensorTerm::unit(&vec![SigmaFactor::PlusMinus; n]);
        let proj_mcx = gate_census(&dilation_circuit(&proj)?).mcx_total();
        s.check(proj_mcx == 1, || format!("{proj}: {proj_mcx} multi-controlled X, expected 1"));
        let completion_mcx = gate_census(&completion_circuit(&pure_ladder_terms(n)[0])).mcx_total();
        s.notes.push(format!(
            "n={n}: pure ladder terms use {} multi-controlled X, completion path {completion_mcx}",
            counts.iter().max().copied().unwrap_or(0)
        ));
    }
    Ok(s)
}

/// `⟨ψ|A_j†A_i|ψ⟩`.
pub fn oracle_beta(ti: &TensorTerm, tj: &TensorTerm, psi: &[Complex64]) -> Result<Complex64> {
    let ai = term_matrix(ti, false)?.matvec(psi)?;
    let aj = term_matrix(tj, false)?.matvec(psi)?;
    Ok(dot(&aj, &ai))
}

/// `⟨b|A_l|ψ⟩`.
pub fn oracle_e(tl: &TensorTerm, psi: &[Complex64], b: &[Complex64]) -> Result<Complex64> {
    Ok(dot(b, &term_matrix(tl, false)?.matvec(psi)?))
}

/// `⟨ψ|A_j†U(Z_k ⊗ I)U†A_i|ψ⟩` with `k` 1-based.
pub fn oracle_delta(
    ti: &TensorTerm,
    tj: &TensorTerm,
    psi: &[Complex64],
    u: &DenseMatrix,
    k: usize,
) -> Result<Complex64> {
    let n = ti.num_qubits();
    let mut zk = DenseMatrix::identity(1);
    for q in 0..n {
        let f = if q + 1 == k {
            DenseMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])?
        } else {
            DenseMatrix::identity(2)
        };
        zk = zk.kron(&f);
    }
    let w = &(u * &zk) * &u.adjoint();
    let ai = term_matrix(ti, false)?.matvec(psi)?;
    let aj = term_matrix(tj, false)?.matvec(psi)?;
    Ok(dot(&aj, &w.matvec(&ai)?))
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Largest deviation between circuit-estimated (exact mode) and dense
/// β, γ, δ values for one parameter point.
pub fn hadamard_deviation(p: &ProblemInstance, spec: &AnsatzSpec) -> Result<f64> {
    let est = estimate_terms(p, spec, 0, 0)?;
    let psi = run(&build_ansatz(spec)?, None)?.into_amplitudes();
    let u = circuit_unitary(&p.b_prep)?;
    let terms = p.decomposition.terms();
    let mut worst = 0.0f64;
    for (i, ti) in terms.iter().enumerate() {
        let ei = oracle_e(ti, &psi, &p.b_vector)?;
        for (j, tj) in terms.iter().enumerate() {
            worst = worst.max((est.beta[i][j] - oracle_beta(ti, tj, &psi)?).norm());
            let ej = oracle_e(tj, &psi, &p.b_vector)?;
            worst = worst.max((est.gamma(i, j) - ei * ej.conj()).norm());
            for k in 1..=p.num_qubits() {
                worst = worst.max((est.delta[k - 1][i][j] - oracle_delta(ti, tj, &psi, &u, k)?).norm());
            }
        }
    }
    Ok(worst)
}

/// Hadamard-test estimates on the smallest heat instance against the
/// dense oracle, over seeded random ansatz parameters.
pub fn hadamard_suite(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("hadamard-oracle");
    let p = ProblemInstance::heat(&HeatParams::new(2, 2))?;
    let n = p.num_qubits();
    if let Some(skipped) = too_wide(s.clone(), n + 2, opts.oracle_limit) {
        return Ok(skipped);
    }
    let mut worst = 0.0f64;
    for draw in 0..opts.hadamard_draws {
        let spec = AnsatzSpec::random(n, 2, Entangler::ChainCnot, opts.seed.wrapping_add(draw as u64))?;
        let dev = hadamard_deviation(&p, &spec)?;
        worst = worst.max(dev);
        s.check(dev <= HADAMARD_TOL, || format!("draw {draw}: deviation {dev:e}"));
    }
    s.notes.push(format!(
        "{} terms, {} draws, worst deviation {worst:e}",
        p.decomposition.len(),
        opts.hadamard_draws
    ));
    Ok(s)
}

pub fn run_all(opts: &VerifyOptions) -> Result<VerifyReport> {
    let suites = vec![
        projection_suite(opts)?,
        orthogonality_suite(opts)?,
        completion_unitarity_suite(opts)?,
        completion_suite(opts)?,
        dilation_suite(opts)?,
        hadamard_suite(opts)?,
    ];
    Ok(VerifyReport {
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

/// Flipping one control polarity of a completion changes its unitary.
pub fn polarity_matters(t: &TensorTerm) -> Result<bool> {
    let c = completion_circuit(t);
    let mut faulty = c.clone();
    inject(&mut faulty, Some(Fault::FlipPolarity));
    let flipped_any = faulty
        .gates()
        .iter()
        .zip(c.gates())
        .any(|(a, b)| a.controls.iter().zip(&b.controls).any(|(x, y)| x.polarity != y.polarity));
    Ok(flipped_any && circuit_unitary(&faulty)?.max_abs_diff(&circuit_unitary(&c)?) > TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerations() {
        assert_eq!(all_sigma_terms(2).len(), 25);
        assert_eq!(pure_ladder_terms(3).len(), 8);
    }

    #[test]
    fn small_suites_pass() {
        let opts = VerifyOptions {
            max_qubits: 2,
            dilation_max_qubits: 2,
            hadamard_draws: 2,
            ..Default::default()
        };
        let report = run_all(&opts).unwrap();
        for s in &report.suites {
            assert!(s.passed, "{}: {:?}", s.name, s.failures);
        }
    }

    #[test]
    fn fault_is_detected() {
        let opts = VerifyOptions {
            max_qubits: 1,
            fault: Some(Fault::FlipPolarity),
            ..Default::default()
        };
        let s = completion_suite(&opts).unwrap();
        assert!(!s.passed);
        assert!(polarity_matters(&TensorTerm::unit(&[SigmaFactor::Minus])).unwrap());
    }

    #[test]
    fn wide_requests_are_skipped() {
        let opts = VerifyOptions {
            max_qubits: 12,
            ..Default::default()
        };
        let s = completion_suite(&opts).unwrap();
        assert!(s.passed && s.skipped.is_some());
    }
}
