//! Dense statevector simulation and Hadamard-test read-out.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// Default ceiling on simulated qubits (2^26 amplitudes ≈ 1 GiB).
pub const DEFAULT_QUBIT_LIMIT: usize = 26;

const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩.
    pub fn zero(num_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { num_qubits, amps }
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if index >= 1 << num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut s = Self::zero(num_qubits);
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Wraps a unit vector whose length is a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!("state norm² is {norm}, expected 1")));
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Self::from_amplitudes(amps.into_iter().map(|z| z / norm).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::QubitMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Applies one gate in place.
    pub fn apply(&mut self, g: &Gate) -> Result<()> {
        let n = self.num_qubits;
        for q in g.qubits() {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, num_qubits: n });
            }
        }
        let tmask = 1usize << (n - 1 - g.target);
        let (mut cmask, mut cval) = (0usize, 0usize);
        for c in &g.controls {
            let m = 1usize << (n - 1 - c.qubit);
            cmask |= m;
            if c.polarity.fires_on() == 1 {
                cval |= m;
            }
        }
        let m = g.kind.matrix();
        let amps = &mut self.amps;
        // Visit each pair (i0, i0 | tmask) once by enumerating i0 with the
        // target bit cleared.
        let low = tmask - 1;
        for k in 0..amps.len() / 2 {
            let i0 = ((k & !low) << 1) | (k & low);
            if i0 & cmask != cval {
                continue;
            }
            let i1 = i0 | tmask;
            let (a, b) = (amps[i0], amps[i1]);
            amps[i0] = m[0] * a + m[1] * b;
            amps[i1] = m[2] * a + m[3] * b;
        }
        Ok(())
    }
}

/// Runs `c` from `initial` (default |0…0⟩) under the default qubit limit.
pub fn run(c: &Circuit, initial: Option<StateVector>) -> Result<StateVector> {
    run_with_limit(c, initial, DEFAULT_QUBIT_LIMIT)
}

pub fn run_with_limit(c: &Circuit, initial: Option<StateVector>, limit: usize) -> Result<StateVector> {
    if c.num_qubits() > limit {
        return Err(Error::OracleLimit {
            qubits: c.num_qubits(),
            limit,
        });
    }
    let mut s = match initial {
        Some(s) => {
            if s.num_qubits() != c.num_qubits() {
                return Err(Error::QubitMismatch {
                    expected: c.num_qubits(),
                    found: s.num_qubits(),
                });
            }
            s
        }
        None => StateVector::zero(c.num_qubits()),
    };
    for g in c.gates() {
        s.apply(g)?;
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Readout {
    Exact,
    Sampled { shots: u64 },
}

/// Joint outcome probabilities of two ancillas; `p01` means a0 = 0, a1 = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AncillaDistribution {
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
    pub readout: Readout,
}

impl AncillaDistribution {
    /// `P₀₁ − P₁₁`.
    pub fn interference(&self) -> f64 {
        self.p01 - self.p11
    }
}

/// Marginal distribution of `(a0, a1)`: exact when `shots == 0`, otherwise a
/// seeded multinomial sample.
pub fn ancilla_distribution(
    s: &StateVector,
    a0: usize,
    a1: usize,
    shots: u64,
    seed: u64,
) -> Result<AncillaDistribution> {
    let n = s.num_qubits();
    for q in [a0, a1] {
        if q >= n {
            return Err(Error::QubitOutOfRange { qubit: q, num_qubits: n });
        }
    }
    if a0 == a1 {
        return Err(Error::QubitCollision(a0));
    }
    let (s0, s1) = (n - 1 - a0, n - 1 - a1);
    let mut p = [0.0f64; 4];
    for (i, z) in s.amplitudes().iter().enumerate() {
        p[(((i >> s0) & 1) << 1) | ((i >> s1) & 1)] += z.norm_sqr();
    }
    if shots == 0 {
        return Ok(AncillaDistribution {
            p00: p[0],
            p01: p[1],
            p10: p[2],
            p11: p[3],
            readout: Readout::Exact,
        });
    }
    let counts = multinomial(&p, shots, seed)?;
    let f = |c: u64| c as f64 / shots as f64;
    Ok(AncillaDistribution {
        p00: f(counts[0]),
        p01: f(counts[1]),
        p10: f(counts[2]),
        p11: f(counts[3]),
        readout: Readout::Sampled { shots },
    })
}

/// Multinomial draw as a chain of conditional binomials.
fn multinomial(p: &[f64; 4], shots: u64, seed: u64) -> Result<[u64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: f64 = p.iter().sum();
    let mut left = shots;
    let mut mass = total;
    let mut out = [0u64; 4];
    for i in 0..3 {
        if left == 0 {
            break;
        }
        let q = if mass > 0.0 { (p[i] / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(left, q)
            .map_err(|e| Error::InvalidParameter(format!("binomial: {e}")))?
            .sample(&mut rng);
        out[i] = draw;
        left -= draw;
        mass -= p[i];
    }
    out[3] = left;
    Ok(out)
}

/// Runs a Hadamard-test circuit (a0 = wire 0, a1 = wire 1) and returns
/// `P₀₁ − P₁₁`.
pub fn estimate(c: &Circuit, shots: u64, seed: u64) -> Result<f64> {
    if c.num_qubits() < 2 {
        return Err(Error::InvalidParameter("Hadamard test needs two ancillas".into()));
    }
    let s = run(c, None)?;
    Ok(ancilla_distribution(&s, 0, 1, shots, seed)?.interference())
}
