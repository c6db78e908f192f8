//! Variational linear solver: ansatz, state preparation, cost assembly from
//! Hadamard-test estimates, classical optimization and solution read-out.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{gamma_circuit, Circuit, Control, Gate, GateKind, InterferenceBlocks, Part, Polarity};
use crate::error::{Error, Result};
use crate::decomposer::decompose_heat;
use crate::heat::{assemble_rhs, HeatParams};
use crate::sigma::{decomposition_matrix, Decomposition, SigmaFactor};
use crate::simulator::{ancilla_distribution, estimate, run, StateVector};

const PREP_TOL: f64 = 1e-10;
/// Coefficients at or below this modulus are dropped when merging.
pub const MERGE_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Entangler {
    ChainCnot,
    ChainCz,
}

/// Layered Ry ansatz. Layer `l` applies `Ry(θ[l·n + q])` to every qubit `q`
/// and then the entangler on `(q, q+1)` for `q = 0 … n−2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub num_qubits: usize,
    pub num_layers: usize,
    pub entangler: Entangler,
    pub theta: Vec<f64>,
}

impl AnsatzSpec {
    /// All angles zero.
    pub fn new(num_qubits: usize, num_layers: usize, entangler: Entangler) -> Result<Self> {
        let spec = Self {
            num_qubits,
            num_layers,
            entangler,
            theta: vec![0.0; num_qubits * num_layers],
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Angles drawn uniformly from `[0, 2π)`.
    pub fn random(num_qubits: usize, num_layers: usize, entangler: Entangler, seed: u64) -> Result<Self> {
        let mut spec = Self::new(num_qubits, num_layers, entangler)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        spec.theta.iter_mut().for_each(|t| *t = rng.random_range(0.0..2.0 * PI));
        Ok(spec)
    }

    pub fn with_theta(&self, theta: Vec<f64>) -> Result<Self> {
        let spec = Self { theta, ..self.clone() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn num_parameters(&self) -> usize {
        self.num_qubits * self.num_layers
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 || self.num_layers == 0 {
            return Err(Error::InvalidParameter("ansatz needs at least one qubit and one layer".into()));
        }
        if self.theta.len() != self.num_parameters() {
            return Err(Error::InvalidParameter(format!(
                "ansatz expects {} angles, got {}",
                self.num_parameters(),
                self.theta.len()
            )));
        }
        Ok(())
    }
}

pub fn build_ansatz(spec: &AnsatzSpec) -> Result<Circuit> {
    spec.validate()?;
    let n = spec.num_qubits;
    let mut c = Circuit::data(n);
    for layer in spec.theta.chunks(n) {
        for (q, &t) in layer.iter().enumerate() {
            c.push(Gate::single(GateKind::Ry(t), q))?;
        }
        for q in 0..n.saturating_sub(1) {
            let kind = match spec.entangler {
                Entangler::ChainCnot => GateKind::X,
                Entangler::ChainCz => GateKind::Z,
            };
            c.push(Gate::new(kind, q + 1, vec![Control::closed(q)])?)?;
        }
    }
    Ok(c)
}

/// State preparation `U|0…0⟩ = v/‖v‖` for a real vector of length `2^n`.
///
/// Qubit `ℓ` gets one Ry per prefix of the first `ℓ` bits, controlled on
/// that prefix, with angle `2·atan2(‖right subtree‖, ‖left subtree‖)`. On the
/// last qubit the signed leaf values are used directly, which carries the
/// signs without a separate phase layer. Levels whose angles all agree
/// collapse to one uncontrolled Ry, and zero angles are skipped.
pub fn amplitude_encode(v: &[f64]) -> Result<Circuit> {
    let len = v.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let n = len.trailing_zeros() as usize;
    // Squared norms of every subtree, level by level from the leaves.
    let mut levels: Vec<Vec<f64>> = vec![v.iter().map(|x| x * x).collect()];
    while levels.last().unwrap().len() > 1 {
        let prev = levels.last().unwrap();
        levels.push(prev.chunks(2).map(|p| p[0] + p[1]).collect());
    }
    let mut c = Circuit::data(n);
    for ell in 0..n {
        let angles: Vec<f64> = (0..1usize << ell)
            .map(|prefix| {
                if ell + 1 == n {
                    2.0 * v[2 * prefix + 1].atan2(v[2 * prefix])
                } else {
                    let child = &levels[n - ell - 1];
                    2.0 * child[2 * prefix + 1].sqrt().atan2(child[2 * prefix].sqrt())
                }
            })
            .collect();
        if angles.iter().all(|&a| a == angles[0]) {
            if angles[0] != 0.0 {
                c.push(Gate::single(GateKind::Ry(angles[0]), ell))?;
            }
            continue;
        }
        for (prefix, &a) in angles.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let controls = (0..ell)
                .map(|q| {
                    if (prefix >> (ell - 1 - q)) & 1 == 1 {
                        Control::closed(q)
                    } else {
                        Control::open(q)
                    }
                })
                .collect();
            c.push(Gate::new(GateKind::Ry(a), ell, controls)?)?;
        }
    }
    Ok(c)
}

/// `A = Σ α_l A_l` together with a preparation circuit for `|b⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub decomposition: Decomposition,
    pub b_prep: Circuit,
    /// Unit vector prepared by `b_prep`.
    pub b_vector: Vec<Complex64>,
    /// `‖b‖` before normalization.
    pub b_norm: f64,
}

impl ProblemInstance {
    /// Normalizes `b` and encodes it with [`amplitude_encode`].
    pub fn new(decomposition: Decomposition, b: &[f64]) -> Result<Self> {
        let n = decomposition.num_qubits();
        if b.len() != 1usize << n {
            return Err(Error::DimensionMismatch(format!(
                "b has length {} for {n} qubits",
                b.len()
            )));
        }
        let b_norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        let b_prep = amplitude_encode(b)?;
        let b_vector: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x / b_norm, 0.0)).collect();
        let prepared = run(&b_prep, None)?;
        let err = prepared
            .amplitudes()
            .iter()
            .zip(&b_vector)
            .map(|(a, e)| (a - e).norm())
            .fold(0.0, f64::max);
        if err > PREP_TOL {
            return Err(Error::InvalidParameter(format!("state preparation off by {err:e}")));
        }
        Ok(Self {
            decomposition,
            b_prep,
            b_vector,
            b_norm,
        })
    }

    /// Uses a given preparation circuit; `b` is whatever it prepares.
    pub fn with_preparation(decomposition: Decomposition, b_prep: Circuit) -> Result<Self> {
        let n = decomposition.num_qubits();
        if b_prep.num_qubits() != n || b_prep.data_width() != n {
            return Err(Error::QubitMismatch {
                expected: n,
                found: b_prep.num_qubits(),
            });
        }
        let b_vector = run(&b_prep, None)?.into_amplitudes();
        Ok(Self {
            decomposition,
            b_prep,
            b_vector,
            b_norm: 1.0,
        })
    }

    /// Heat-equation instance with the merged sigma decomposition.
    pub fn heat(p: &HeatParams) -> Result<Self> {
        let d = decompose_heat(p)?.merged(MERGE_TOL);
        Self::new(d, &assemble_rhs(p)?)
    }

    pub fn num_qubits(&self) -> usize {
        self.decomposition.num_qubits()
    }

    /// Unnormalized right-hand side.
    pub fn b(&self) -> Vec<Complex64> {
        self.b_vector.iter().map(|z| z * self.b_norm).collect()
    }

    /// True when every coefficient, factor and the preparation are real.
    pub fn is_real(&self) -> bool {
        self.b_prep.is_real()
            && self.decomposition.terms().iter().all(|t| {
                t.coefficient.im == 0.0 && !t.factors().contains(&SigmaFactor::PauliY)
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostKind {
    Global,
    Local,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    NelderMead,
    Spsa,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub method: Method,
    pub max_iters: usize,
    pub cost_tolerance: f64,
    pub seed: u64,
    /// 0 selects exact expectation values.
    pub shots: u64,
    pub cost_kind: CostKind,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::NelderMead,
            max_iters: 20_000,
            cost_tolerance: 1e-6,
            seed: 0,
            shots: 0,
            cost_kind: CostKind::Local,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        if !(self.cost_tolerance > 0.0) {
            return Err(Error::InvalidParameter("cost_tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Costs at one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub theta: Vec<f64>,
    /// `⟨φ|φ⟩` with `|φ⟩ = A|ψ⟩`.
    pub phi_norm_sq: f64,
    /// `|⟨b|φ⟩|²`.
    pub overlap_sq: f64,
    /// `Σ_k = ⟨φ|U(|0⟩⟨0|_k ⊗ I)U†|φ⟩`, k = 1 … n.
    pub sigma_k: Vec<f64>,
    pub c_global: f64,
    pub c_local: f64,
}

impl CostReport {
    pub fn cost(&self, kind: CostKind) -> f64 {
        match kind {
            CostKind::Global => self.c_global,
            CostKind::Local => self.c_local,
        }
    }

    /// `⟨φ|φ⟩ − |⟨b|φ⟩|²`.
    pub fn unnormalized_global(&self) -> f64 {
        self.phi_norm_sq - self.overlap_sq
    }

    /// `⟨φ|φ⟩ − (1/n) Σ_k Σ_k`.
    pub fn unnormalized_local(&self) -> f64 {
        self.phi_norm_sq - self.sigma_k.iter().sum::<f64>() / self.sigma_k.len() as f64
    }
}

/// Per-term inner products behind the costs.
#[derive(Clone, Debug, PartialEq)]
pub struct TermEstimates {
    /// `β[i][j] = ⟨ψ|A_j†A_i|ψ⟩`.
    pub beta: Vec<Vec<Complex64>>,
    /// `e[l] = ⟨b|A_l|ψ⟩`; `γ_ij = e_i·e_j*`.
    pub e: Vec<Complex64>,
    /// `δ[k−1][i][j] = ⟨ψ|A_j†U(Z_k ⊗ I)U†A_i|ψ⟩`.
    pub delta: Vec<Vec<Vec<Complex64>>>,
}

impl TermEstimates {
    pub fn gamma(&self, i: usize, j: usize) -> Complex64 {
        self.e[i] * self.e[j].conj()
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of the `index`-th stream derived from `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

#[derive(Clone, Copy)]
enum Slot {
    Beta,
    Delta(usize),
    Gamma,
}

/// Stable per-circuit stream index, independent of evaluation order.
fn stream(slot: Slot, i: usize, j: usize, part: Part) -> u64 {
    let (kind, k) = match slot {
        Slot::Beta => (0u64, 0u64),
        Slot::Delta(k) => (1, k as u64),
        Slot::Gamma => (2, 0),
    };
    let part = matches!(part, Part::Imaginary) as u64;
    ((kind * 2 + part) << 48) | ((i as u64) << 32) | ((j as u64) << 16) | k
}

/// Estimates every β, δ (upper triangle, mirrored by Hermitian symmetry) and
/// per-term γ factor from Hadamard-test circuits. Imaginary parts are only
/// measured when they can be nonzero.
///
/// The β/δ circuits are simulated segment by segment so that the state after
/// each shared prefix is computed once; the gate sequence of every circuit is
/// exactly that of [`crate::circuit::beta_circuit`] and
/// [`crate::circuit::delta_circuit`].
pub fn estimate_terms(p: &ProblemInstance, spec: &AnsatzSpec, shots: u64, seed: u64) -> Result<TermEstimates> {
    let n = p.num_qubits();
    if spec.num_qubits != n {
        return Err(Error::QubitMismatch {
            expected: n,
            found: spec.num_qubits,
        });
    }
    let v = build_ansatz(spec)?;
    let u = &p.b_prep;
    let terms = p.decomposition.terms();
    let m = terms.len();
    let complex = !(p.is_real() && v.is_real());

    let blocks = InterferenceBlocks::new(n);
    let base = run(&blocks.prefix(&v)?, None)?;
    let opens = terms
        .iter()
        .map(|t| blocks.branch(t, Polarity::Open))
        .collect::<Result<Vec<_>>>()?;
    let locals = (1..=n).map(|k| blocks.local(u, k)).collect::<Result<Vec<_>>>()?;
    let suffix = [blocks.suffix(Part::Real), blocks.suffix(Part::Imaginary)];
    let parts = |i: usize, j: usize| -> &'static [Part] {
        if complex && i != j {
            &[Part::Real, Part::Imaginary]
        } else {
            &[Part::Real]
        }
    };
    let read = |s: StateVector, key: u64| -> Result<f64> {
        Ok(ancilla_distribution(&s, 0, 1, shots, derive_seed(seed, key))?.interference())
    };
    // For one selected A_i branch: finish the circuit for every j ≥ i.
    let close = |state: &StateVector, i: usize, slot: Slot| -> Result<Vec<(usize, Complex64)>> {
        let mut out = Vec::with_capacity(m - i);
        for j in i..m {
            let joined = run(&opens[j], Some(state.clone()))?;
            let mut z = Complex64::new(0.0, 0.0);
            for &part in parts(i, j) {
                let idx = matches!(part, Part::Imaginary) as usize;
                let x = read(run(&suffix[idx], Some(joined.clone()))?, stream(slot, i, j, part))?;
                match part {
                    Part::Real => z.re = x,
                    Part::Imaginary => z.im = x,
                }
            }
            out.push((j, z));
        }
        Ok(out)
    };

    type Row = (Vec<(usize, Complex64)>, Vec<Vec<(usize, Complex64)>>);
    let rows = (0..m)
        .into_par_iter()
        .map(|i| -> Result<Row> {
            let selected = run(&blocks.branch(&terms[i], Polarity::Closed)?, Some(base.clone()))?;
            let beta = close(&selected, i, Slot::Beta)?;
            let delta = locals
                .iter()
                .enumerate()
                .map(|(k, local)| close(&run(local, Some(selected.clone()))?, i, Slot::Delta(k + 1)))
                .collect::<Result<Vec<_>>>()?;
            Ok((beta, delta))
        })
        .collect::<Result<Vec<Row>>>()?;

    let e = (0..m)
        .into_par_iter()
        .map(|l| -> Result<Complex64> {
            let mut z = Complex64::new(0.0, 0.0);
            z.re = estimate(&gamma_circuit(&terms[l], &v, u, Part::Real)?, shots, derive_seed(seed, stream(Slot::Gamma, l, l, Part::Real)))?;
            if complex {
                z.im = estimate(
                    &gamma_circuit(&terms[l], &v, u, Part::Imaginary)?,
                    shots,
                    derive_seed(seed, stream(Slot::Gamma, l, l, Part::Imaginary)),
                )?;
            }
            Ok(z)
        })
        .collect::<Result<Vec<_>>>()?;

    let zero = Complex64::new(0.0, 0.0);
    let mut out = TermEstimates {
        beta: vec![vec![zero; m]; m],
        e,
        delta: vec![vec![vec![zero; m]; m]; n],
    };
    for (i, (beta, delta)) in rows.into_iter().enumerate() {
        for (j, z) in beta {
            out.beta[i][j] = z;
            out.beta[j][i] = z.conj();
        }
        for (k, row) in delta.into_iter().enumerate() {
            for (j, z) in row {
                out.delta[k][i][j] = z;
                out.delta[k][j][i] = z.conj();
            }
        }
    }
    Ok(out)
}

/// Combines term estimates into the global and local costs.
pub fn assemble_costs(p: &ProblemInstance, theta: &[f64], est: &TermEstimates) -> Result<CostReport> {
    let alpha: Vec<Complex64> = p.decomposition.terms().iter().map(|t| t.coefficient).collect();
    let quad = |mat: &dyn Fn(usize, usize) -> Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, ai) in alpha.iter().enumerate() {
            for (j, aj) in alpha.iter().enumerate() {
                acc += ai * aj.conj() * mat(i, j);
            }
        }
        acc
    };
    let phi_norm_sq = quad(&|i, j| est.beta[i][j]).re;
    if phi_norm_sq <= 0.0 {
        return Err(Error::Singular);
    }
    let overlap_sq = alpha.iter().zip(&est.e).map(|(a, e)| a * e).sum::<Complex64>().norm_sqr();
    let sigma_k: Vec<f64> = est
        .delta
        .iter()
        .map(|d| quad(&|i, j| (est.beta[i][j] + d[i][j]) / 2.0).re)
        .collect();
    let mean_sigma = sigma_k.iter().sum::<f64>() / sigma_k.len() as f64;
    Ok(CostReport {
        theta: theta.to_vec(),
        phi_norm_sq,
        overlap_sq,
        c_global: 1.0 - overlap_sq / phi_norm_sq,
        c_local: 1.0 - mean_sigma / phi_norm_sq,
        sigma_k,
    })
}

/// Both costs at the parameters held by `spec`.
pub fn cost_report(p: &ProblemInstance, spec: &AnsatzSpec, cfg: &OptimizerConfig) -> Result<CostReport> {
    let est = estimate_terms(p, spec, cfg.shots, cfg.seed)?;
    assemble_costs(p, &spec.theta, &est)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimization {
    pub theta: Vec<f64>,
    pub best: CostReport,
    /// Best report after each iteration.
    pub trace: Vec<CostReport>,
    pub status: Status,
    pub evaluations: usize,
}

struct Objective<'a> {
    p: &'a ProblemInstance,
    spec: &'a AnsatzSpec,
    cfg: &'a OptimizerConfig,
    evaluations: usize,
}

impl Objective<'_> {
    fn eval(&mut self, theta: &[f64]) -> Result<(f64, CostReport)> {
        let spec = self.spec.with_theta(theta.to_vec())?;
        // Fresh shot noise per evaluation, reproducible from the base seed.
        let seed = derive_seed(self.cfg.seed, self.evaluations as u64);
        self.evaluations += 1;
        let est = estimate_terms(self.p, &spec, self.cfg.shots, seed)?;
        let r = assemble_costs(self.p, theta, &est)?;
        Ok((r.cost(self.cfg.cost_kind), r))
    }
}

/// Minimizes the configured cost starting from `spec.theta`.
///
/// Stops once the cost drops below `cfg.cost_tolerance` or after
/// `cfg.max_iters` iterations; the best point seen is returned either way.
pub fn optimize(p: &ProblemInstance, spec: &AnsatzSpec, cfg: &OptimizerConfig) -> Result<Optimization> {
    cfg.validate()?;
    spec.validate()?;
    let mut obj = Objective {
        p,
        spec,
        cfg,
        evaluations: 0,
    };
    let (status, best, trace) = match cfg.method {
        Method::NelderMead => nelder_mead(&mut obj, &spec.theta)?,
        Method::Spsa => spsa(&mut obj, &spec.theta)?,
    };
    Ok(Optimization {
        theta: best.theta.clone(),
        best,
        trace,
        status,
        evaluations: obj.evaluations,
    })
}

type Outcome = (Status, CostReport, Vec<CostReport>);

/// Adaptive Nelder–Mead (dimension-dependent coefficients) that restarts
/// from the best vertex whenever the simplex collapses.
fn nelder_mead(obj: &mut Objective, x0: &[f64]) -> Result<Outcome> {
    let d = x0.len();
    let df = d as f64;
    let (rho, chi, gamma, sigma) = (1.0, 1.0 + 2.0 / df, 0.75 - 1.0 / (2.0 * df), 1.0 - 1.0 / df);
    let (tol, max_iters) = (obj.cfg.cost_tolerance, obj.cfg.max_iters);
    let x_tol = 1e-9;
    let mut step = 0.5;

    let mut simplex = Vec::with_capacity(d + 1);
    let make_simplex = |obj: &mut Objective, x: &[f64], step: f64, first: Option<(f64, CostReport)>| -> Result<Vec<(Vec<f64>, f64, CostReport)>> {
        let mut s = Vec::with_capacity(d + 1);
        let (f, r) = match first {
            Some(fr) => fr,
            None => obj.eval(x)?,
        };
        s.push((x.to_vec(), f, r));
        for i in 0..d {
            let mut y = x.to_vec();
            y[i] += step;
            let (f, r) = obj.eval(&y)?;
            s.push((y, f, r));
        }
        Ok(s)
    };
    simplex.extend(make_simplex(obj, x0, step, None)?);
    let mut trace = Vec::new();

    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 < tol {
            trace.push(simplex[0].2.clone());
            return Ok((Status::Converged, simplex[0].2.clone(), trace));
        }
        let spread = simplex[1..]
            .iter()
            .flat_map(|v| v.0.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let f_spread = simplex[d].1 - simplex[0].1;
        if spread < x_tol || f_spread < tol * 1e-3 {
            step = (step * 0.5).max(0.05);
            let (x, f, r) = simplex.swap_remove(0);
            simplex = make_simplex(obj, &x, step, Some((f, r)))?;
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        }

        let mut centroid = vec![0.0; d];
        for v in &simplex[..d] {
            for (c, x) in centroid.iter_mut().zip(&v.0) {
                *c += x / df;
            }
        }
        let toward = |t: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, x)| c + t * (c - x)).collect()
        };
        let worst = simplex[d].0.clone();
        let xr = toward(rho, &worst);
        let (fr, rr) = obj.eval(&xr)?;
        if fr < simplex[0].1 {
            let xe = toward(rho * chi, &worst);
            let (fe, re) = obj.eval(&xe)?;
            simplex[d] = if fe < fr { (xe, fe, re) } else { (xr, fr, rr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr, rr);
        } else {
            let outside = fr < simplex[d].1;
            let xc = if outside { toward(rho * gamma, &worst) } else { toward(-gamma, &worst) };
            let (fc, rc) = obj.eval(&xc)?;
            let accept = if outside { fc <= fr } else { fc < simplex[d].1 };
            if accept {
                simplex[d] = (xc, fc, rc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let y: Vec<f64> = best.iter().zip(&v.0).map(|(b, x)| b + sigma * (x - b)).collect();
                    let (f, r) = obj.eval(&y)?;
                    *v = (y, f, r);
                }
            }
        }
        let best = simplex.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        trace.push(best.2.clone());
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let status = if simplex[0].1 < tol { Status::Converged } else { Status::MaxIterations };
    Ok((status, simplex[0].2.clone(), trace))
}

/// Simultaneous-perturbation stochastic approximation with the usual
/// power-law gain schedules.
fn spsa(obj: &mut Objective, x0: &[f64]) -> Result<Outcome> {
    let (a, c, alpha, gamma) = (0.2, 0.15, 0.602, 0.101);
    let big_a = 0.1 * obj.cfg.max_iters as f64;
    let tol = obj.cfg.cost_tolerance;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(obj.cfg.seed, u64::MAX));
    let mut x = x0.to_vec();
    let (f0, r0) = obj.eval(&x)?;
    let mut best = (f0, r0);
    let mut trace = Vec::new();
    for k in 0..obj.cfg.max_iters {
        if best.0 < tol {
            return Ok((Status::Converged, best.1, trace));
        }
        let kf = k as f64 + 1.0;
        let ak = a / (kf + big_a).powf(alpha);
        let ck = c / kf.powf(gamma);
        let delta: Vec<f64> = (0..x.len()).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let plus: Vec<f64> = x.iter().zip(&delta).map(|(xi, di)| xi + ck * di).collect();
        let minus: Vec<f64> = x.iter().zip(&delta).map(|(xi, di)| xi - ck * di).collect();
        let (fp, _) = obj.eval(&plus)?;
        let (fm, _) = obj.eval(&minus)?;
        let g = (fp - fm) / (2.0 * ck);
        x.iter_mut().zip(&delta).for_each(|(xi, di)| *xi -= ak * g * di);
        let (f, r) = obj.eval(&x)?;
        if f < best.0 {
            best = (f, r);
        }
        trace.push(best.1.clone());
    }
    let status = if best.0 < tol { Status::Converged } else { Status::MaxIterations };
    Ok((status, best.1, trace))
}

/// Read-out of a trained ansatz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// `V(θ)|0⟩`.
    pub x_hat: Vec<Complex64>,
    /// `c = ⟨A x̂, b⟩ / ‖A x̂‖²`, so that `x ≈ c·x̂`.
    pub scale: Complex64,
    /// `‖c·A x̂ − b‖` against the unnormalized `b`.
    pub residual: f64,
}

impl Solution {
    /// `c·x̂`.
    pub fn scaled(&self) -> Vec<Complex64> {
        self.x_hat.iter().map(|z| z * self.scale).collect()
    }

    pub fn state(&self) -> Result<StateVector> {
        StateVector::from_amplitudes(self.x_hat.clone())
    }
}

pub fn extract_solution(p: &ProblemInstance, spec: &AnsatzSpec, theta: &[f64]) -> Result<Solution> {
    let spec = spec.with_theta(theta.to_vec())?;
    let x_hat = run(&build_ansatz(&spec)?, None)?.into_amplitudes();
    let ax = decomposition_matrix(&p.decomposition)?.matvec(&x_hat)?;
    let denom: f64 = ax.iter().map(|z| z.norm_sqr()).sum();
    if denom == 0.0 {
        return Err(Error::ZeroVector);
    }
    let b = p.b();
    let scale = ax.iter().zip(&b).map(|(a, y)| a.conj() * y).sum::<Complex64>() / denom;
    let residual = ax
        .iter()
        .zip(&b)
        .map(|(a, y)| (scale * a - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(Solution { x_hat, scale, residual })
}
