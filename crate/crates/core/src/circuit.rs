//! Gate-level circuit IR and the circuit constructions built on it.
//!
//! Qubit 0 is always the most significant bit of a basis index. Registers
//! use a fixed wire order: `a0` (Hadamard-test ancilla), then `a1` (the
//! completion/dilation ancilla), then the data qubits `q0 … q_{n-1}`.
//! Circuits of narrower layouts are lifted into wider ones by wire name
//! with [`Circuit::embed`].
//!
//! Multi-controlled X is a gate kind of its own ([`GateKind::Mcx`]) with any
//! number of controls, each open (fires on |0⟩) or closed (fires on |1⟩).

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{check_oracle_limit, DenseMatrix, DEFAULT_ORACLE_LIMIT};
use crate::sigma::{factor_completion, SigmaFactor, TensorTerm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    /// Fires when the control qubit is |0⟩.
    Open,
    /// Fires when the control qubit is |1⟩.
    Closed,
}

impl Polarity {
    pub fn fires_on(self) -> usize {
        match self {
            Polarity::Open => 0,
            Polarity::Closed => 1,
        }
    }

    pub fn flipped(self) -> Polarity {
        match self {
            Polarity::Open => Polarity::Closed,
            Polarity::Closed => Polarity::Open,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn open(qubit: usize) -> Self {
        Control {
            qubit,
            polarity: Polarity::Open,
        }
    }

    pub fn closed(qubit: usize) -> Self {
        Control {
            qubit,
            polarity: Polarity::Closed,
        }
    }
}

/// Angles are in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    X,
    H,
    S,
    Sdg,
    Z,
    Ry(f64),
    Rz(f64),
    /// Multi-controlled X; with no controls it is a plain X.
    Mcx,
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::Z => "z",
            GateKind::Ry(_) => "ry",
            GateKind::Rz(_) => "rz",
            GateKind::Mcx => "mcx",
        }
    }

    /// Target-qubit action as `[m00, m01, m10, m11]`.
    pub fn matrix(&self) -> [Complex64; 4] {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match *self {
            GateKind::X | GateKind::Mcx => [z, one, one, z],
            GateKind::H => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [h, h, h, -h]
            }
            GateKind::S => [one, z, z, i],
            GateKind::Sdg => [one, z, z, -i],
            GateKind::Z => [one, z, z, -one],
            GateKind::Ry(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0), Complex64::new(s, 0.0), Complex64::new(c, 0.0)]
            }
            GateKind::Rz(theta) => [Complex64::from_polar(1.0, -theta / 2.0), z, z, Complex64::from_polar(1.0, theta / 2.0)],
        }
    }

    pub fn inverse(&self) -> GateKind {
        match *self {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Rz(t) => GateKind::Rz(-t),
            k => k,
        }
    }

    pub fn is_real(&self) -> bool {
        !matches!(self, GateKind::S | GateKind::Sdg | GateKind::Rz(_))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub controls: Vec<Control>,
}

impl Gate {
    pub fn new(kind: GateKind, target: usize, controls: Vec<Control>) -> Result<Self> {
        for (i, c) in controls.iter().enumerate() {
            if c.qubit == target || controls[..i].iter().any(|o| o.qubit == c.qubit) {
                return Err(Error::QubitCollision(c.qubit));
            }
        }
        Ok(Self { kind, target, controls })
    }

    pub fn single(kind: GateKind, target: usize) -> Self {
        Self {
            kind,
            target,
            controls: Vec::new(),
        }
    }

    pub fn mcx(target: usize, controls: Vec<Control>) -> Result<Self> {
        Self::new(GateKind::Mcx, target, controls)
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.target).chain(self.controls.iter().map(|c| c.qubit))
    }

    pub fn inverse(&self) -> Gate {
        Gate {
            kind: self.kind.inverse(),
            target: self.target,
            controls: self.controls.clone(),
        }
    }

    pub fn is_multi_controlled_x(&self) -> bool {
        matches!(self.kind, GateKind::Mcx) || (matches!(self.kind, GateKind::X) && !self.controls.is_empty())
    }
}

/// Named wire of a register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Wire {
    A0,
    A1,
    Q(usize),
}

impl fmt::Display for Wire {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Wire::A0 => f.write_str("a0"),
            Wire::A1 => f.write_str("a1"),
            Wire::Q(i) => write!(f, "q{i}"),
        }
    }
}

/// Wire order `[a0?, a1?, q0 … q_{n-1}]`.
pub fn layout(with_a0: bool, with_a1: bool, n: usize) -> Vec<Wire> {
    let mut wires = Vec::with_capacity(n + 2);
    if with_a0 {
        wires.push(Wire::A0);
    }
    if with_a1 {
        wires.push(Wire::A1);
    }
    wires.extend((0..n).map(Wire::Q));
    wires
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    layout: Vec<Wire>,
}

impl Circuit {
    pub fn with_layout(layout: Vec<Wire>) -> Self {
        Self {
            num_qubits: layout.len(),
            gates: Vec::new(),
            layout,
        }
    }

    /// Data register `q0 … q_{n-1}`.
    pub fn data(n: usize) -> Self {
        Self::with_layout(layout(false, false, n))
    }

    /// `a1, q0 … q_{n-1}`.
    pub fn ancilla(n: usize) -> Self {
        Self::with_layout(layout(false, true, n))
    }

    /// `a0, a1, q0 … q_{n-1}`.
    pub fn hadamard_test(n: usize) -> Self {
        Self::with_layout(layout(true, true, n))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn layout(&self) -> &[Wire] {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Index of a named wire.
    pub fn wire(&self, w: Wire) -> Result<usize> {
        self.layout
            .iter()
            .position(|&x| x == w)
            .ok_or_else(|| Error::InvalidParameter(format!("register has no wire {w}")))
    }

    /// Number of data qubits `q*`.
    pub fn data_width(&self) -> usize {
        self.layout.iter().filter(|w| matches!(w, Wire::Q(_))).count()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        for q in gate.qubits() {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Appends a circuit over the same register.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.layout != self.layout {
            return Err(Error::QubitMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// Re-indexes the circuit onto a wider register, matching wires by name.
    pub fn embed(&self, target: &[Wire]) -> Result<Circuit> {
        let map = self
            .layout
            .iter()
            .map(|w| {
                target
                    .iter()
                    .position(|t| t == w)
                    .ok_or_else(|| Error::InvalidParameter(format!("target register lacks wire {w}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Circuit {
            num_qubits: target.len(),
            layout: target.to_vec(),
            gates: self
                .gates
                .iter()
                .map(|g| Gate {
                    kind: g.kind,
                    target: map[g.target],
                    controls: g
                        .controls
                        .iter()
                        .map(|c| Control {
                            qubit: map[c.qubit],
                            polarity: c.polarity,
                        })
                        .collect(),
                })
                .collect(),
        })
    }

    /// Gate sequence of the adjoint circuit.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            layout: self.layout.clone(),
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Adds `ctrl` as an extra control to every gate.
    pub fn controlled(&self, ctrl: usize, polarity: Polarity) -> Result<Circuit> {
        if ctrl >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: ctrl,
                num_qubits: self.num_qubits,
            });
        }
        if self.gates.iter().any(|g| g.qubits().any(|q| q == ctrl)) {
            return Err(Error::QubitCollision(ctrl));
        }
        let mut out = self.clone();
        for g in &mut out.gates {
            g.controls.insert(0, Control { qubit: ctrl, polarity });
        }
        Ok(out)
    }

    /// True when every gate has a real matrix.
    pub fn is_real(&self) -> bool {
        self.gates.iter().all(|g| g.kind.is_real())
    }

    /// Text dump, one gate per line.
    pub fn to_text(&self) -> String {
        TextDump.export(self)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Export seam for circuit serializations.
pub trait CircuitExporter {
    fn export(&self, circuit: &Circuit) -> String;
}

/// `ry(0.5) q1 | a0:closed q0:open`, preceded by a register header.
pub struct TextDump;

impl CircuitExporter for TextDump {
    fn export(&self, c: &Circuit) -> String {
        let mut s = String::from("# wires");
        for w in &c.layout {
            s.push(' ');
            s.push_str(&w.to_string());
        }
        s.push('\n');
        for g in &c.gates {
            match g.kind {
                GateKind::Ry(t) | GateKind::Rz(t) => s.push_str(&format!("{}({t})", g.kind.name())),
                k => s.push_str(k.name()),
            }
            s.push(' ');
            s.push_str(&c.layout[g.target].to_string());
            if !g.controls.is_empty() {
                s.push_str(" |");
                for ctl in &g.controls {
                    let pol = match ctl.polarity {
                        Polarity::Open => "open",
                        Polarity::Closed => "closed",
                    };
                    s.push_str(&format!(" {}:{pol}", c.layout[ctl.qubit]));
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Unitary of a circuit, built by pushing every basis column through the
/// gate list.
pub fn circuit_unitary(c: &Circuit) -> Result<DenseMatrix> {
    check_oracle_limit(c.num_qubits, DEFAULT_ORACLE_LIMIT)?;
    let dim = 1usize << c.num_qubits;
    let mut out = DenseMatrix::zeros(dim, dim);
    let mut col = vec![Complex64::new(0.0, 0.0); dim];
    for j in 0..dim {
        col.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        col[j] = Complex64::new(1.0, 0.0);
        for g in &c.gates {
            apply_dense(&mut col, c.num_qubits, g);
        }
        for (r, z) in col.iter().enumerate() {
            out[(r, j)] = *z;
        }
    }
    Ok(out)
}

fn apply_dense(v: &mut [Complex64], n: usize, g: &Gate) {
    let m = g.kind.matrix();
    let bit = |idx: usize, q: usize| (idx >> (n - 1 - q)) & 1;
    let tmask = 1usize << (n - 1 - g.target);
    for i0 in 0..v.len() {
        if i0 & tmask != 0 {
            continue;
        }
        if !g.controls.iter().all(|c| bit(i0, c.qubit) == c.polarity.fires_on()) {
            continue;
        }
        let i1 = i0 | tmask;
        let (a, b) = (v[i0], v[i1]);
        v[i0] = m[0] * a + m[1] * b;
        v[i1] = m[2] * a + m[3] * b;
    }
}

/// Gates realizing a single unitary factor on data wire `q`.
fn unitary_factor_gates(f: SigmaFactor, q: usize) -> Vec<Gate> {
    match f {
        SigmaFactor::PauliX => vec![Gate::single(GateKind::X, q)],
        SigmaFactor::PauliZ => vec![Gate::single(GateKind::Z, q)],
        // Y = S·X·S†, exact including phase.
        SigmaFactor::PauliY => vec![
            Gate::single(GateKind::Sdg, q),
            Gate::single(GateKind::X, q),
            Gate::single(GateKind::S, q),
        ],
        _ => Vec::new(),
    }
}

/// Controls on the data wires selecting the range of `A·A†`; slots whose
/// range is the full qubit get no control.
fn range_controls(t: &TensorTerm, offset: usize) -> Vec<Control> {
    t.factors()
        .iter()
        .enumerate()
        .filter_map(|(p, f)| match f.range_projector() {
            (true, false) => Some(Control::open(offset + p)),
            (false, true) => Some(Control::closed(offset + p)),
            _ => None,
        })
        .collect()
}

/// Circuit for `U_l = [[A^c, A], [A, A^c]]` on `a1, q0 … q_{n-1}`.
///
/// First the completion `I ⊗ Ā` as single-qubit gates, then one
/// multi-controlled X on `a1` that fires on the range of `A·A†`, so that
/// `U_l|0⟩|ψ⟩ = |0⟩A^c|ψ⟩ + |1⟩A|ψ⟩`.
pub fn completion_circuit(t: &TensorTerm) -> Circuit {
    let mut c = Circuit::ancilla(t.num_qubits());
    for (p, &f) in t.factors().iter().enumerate() {
        for g in unitary_factor_gates(factor_completion(f), 1 + p) {
            c.gates.push(g);
        }
    }
    c.gates.push(Gate {
        kind: GateKind::Mcx,
        target: 0,
        controls: range_controls(t, 1),
    });
    c
}

/// Circuit for the sign-free unitary dilation
/// `Ũ = [[A, I − A·Aᵀ], [I − Aᵀ·A, Aᵀ]]` of a sigma-only term.
///
/// `Ũ = P·(σx ⊗ I)` with `P` a permutation. Projector-only terms need a
/// single multi-controlled X for `P`; otherwise `P` is split into
/// transpositions, each realized by a Gray-code walk of fully controlled X
/// gates over the qubits whose factor is not the identity.
pub fn dilation_circuit(t: &TensorTerm) -> Result<Circuit> {
    if !t.is_sigma_only() {
        return Err(Error::InvalidParameter(
            "dilation synthesis needs sigma-only factors".into(),
        ));
    }
    let n = t.num_qubits();
    let mut c = Circuit::ancilla(n);
    c.gates.push(Gate::single(GateKind::X, 0));

    let projector_only = t
        .factors()
        .iter()
        .all(|f| matches!(f, SigmaFactor::Identity | SigmaFactor::PlusMinus | SigmaFactor::MinusPlus));
    if projector_only {
        c.gates.push(Gate {
            kind: GateKind::Mcx,
            target: 0,
            controls: range_controls(t, 1),
        });
        return Ok(c);
    }

    // Identity slots factor out of Ũ, so the permutation lives on a1 plus
    // the remaining wires.
    let active: Vec<usize> = t
        .factors()
        .iter()
        .enumerate()
        .filter(|(_, f)| **f != SigmaFactor::Identity)
        .map(|(p, _)| p)
        .collect();
    let reduced: Vec<SigmaFactor> = active.iter().map(|&p| t.factors()[p]).collect();
    let wires: Vec<usize> = std::iter::once(0).chain(active.iter().map(|&p| 1 + p)).collect();
    let perm = dilation_permutation(&reduced);
    for (u, v) in cycle_transpositions(&perm) {
        for (from, to) in gray_walk(u, v, wires.len()) {
            c.gates.push(adjacent_swap(from, to, &wires));
        }
    }
    Ok(c)
}

/// `P = Ũ·(σx ⊗ I)` as `perm[col] = row` on `1 + m` bits (a1 most significant).
fn dilation_permutation(factors: &[SigmaFactor]) -> Vec<usize> {
    let m = factors.len();
    let half = 1usize << m;
    // Single-factor maps: A e_j for j in the domain, Aᵀ e_j for j in the range.
    let forward = |j: usize| -> Option<usize> {
        let mut out = 0;
        for (p, f) in factors.iter().enumerate() {
            let b = (j >> (m - 1 - p)) & 1;
            let r = match (f, b) {
                (SigmaFactor::Plus, 1) => 0,
                (SigmaFactor::Minus, 0) => 1,
                (SigmaFactor::PlusMinus, 0) => 0,
                (SigmaFactor::MinusPlus, 1) => 1,
                (SigmaFactor::Identity, b) => b,
                _ => return None,
            };
            out = (out << 1) | r;
        }
        Some(out)
    };
    let backward = |j: usize| -> Option<usize> {
        let mut out = 0;
        for (p, f) in factors.iter().enumerate() {
            let b = (j >> (m - 1 - p)) & 1;
            let r = match (f, b) {
                (SigmaFactor::Plus, 0) => 1,
                (SigmaFactor::Minus, 1) => 0,
                (SigmaFactor::PlusMinus, 0) => 0,
                (SigmaFactor::MinusPlus, 1) => 1,
                (SigmaFactor::Identity, b) => b,
                _ => return None,
            };
            out = (out << 1) | r;
        }
        Some(out)
    };
    // Columns of Ũ: (0, j) ↦ A e_j or (1, j); (1, j) ↦ (0, j) or (1, Aᵀ e_j).
    let mut u_tilde = vec![0usize; 2 * half];
    for j in 0..half {
        u_tilde[j] = forward(j).unwrap_or(half + j);
        u_tilde[half + j] = match backward(j) {
            Some(k) => half + k,
            None => j,
        };
    }
    // P·(σx ⊗ I) = Ũ  ⇒  P(col) = Ũ(col ⊕ a1).
    (0..2 * half).map(|col| u_tilde[col ^ half]).collect()
}

/// Transpositions whose application in order realizes `perm`.
fn cycle_transpositions(perm: &[usize]) -> Vec<(usize, usize)> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let mut x = perm[start];
        while x != start {
            seen[x] = true;
            cycle.push(x);
            x = perm[x];
        }
        // (c0 → c1 → … → c_{k−1}) = (c0 c_{k−1})…(c0 c1), applied right to left.
        for &ck in &cycle[1..] {
            out.push((cycle[0].max(ck), cycle[0].min(ck)));
        }
    }
    out
}

/// Adjacent swaps realizing the transposition `(u v)`: walk from `u` to `v`
/// flipping differing bits from least to most significant, then walk back.
fn gray_walk(u: usize, v: usize, bits: usize) -> Vec<(usize, usize)> {
    let mut path = vec![u];
    let mut cur = u;
    for b in 0..bits {
        let mask = 1usize << b;
        if (cur ^ v) & mask != 0 {
            cur ^= mask;
            path.push(cur);
        }
    }
    let steps: Vec<(usize, usize)> = path.windows(2).map(|w| (w[0], w[1])).collect();
    let mut out = steps.clone();
    out.extend(steps[..steps.len() - 1].iter().rev().copied());
    out
}

/// Fully controlled X swapping two reduced basis states one bit apart.
fn adjacent_swap(a: usize, b: usize, wires: &[usize]) -> Gate {
    let m = wires.len();
    let diff = (a ^ b).trailing_zeros() as usize;
    let target_pos = m - 1 - diff;
    let controls = (0..m)
        .filter(|&pos| pos != target_pos)
        .map(|pos| {
            let bit = (a >> (m - 1 - pos)) & 1;
            Control {
                qubit: wires[pos],
                polarity: if bit == 1 { Polarity::Closed } else { Polarity::Open },
            }
        })
        .collect();
    Gate {
        kind: GateKind::Mcx,
        target: wires[target_pos],
        controls,
    }
}

/// Which part of a complex Hadamard-test estimand is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Part {
    Real,
    Imaginary,
}

fn check_width(label: &str, c: &Circuit, n: usize) -> Result<()> {
    if c.layout() != layout(false, false, n).as_slice() {
        return Err(Error::InvalidParameter(format!(
            "{label} must act on the {n}-qubit data register, got wires {:?}",
            c.layout()
        )));
    }
    Ok(())
}

fn check_terms(a: &TensorTerm, b: &TensorTerm) -> Result<usize> {
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::QubitMismatch {
            expected: a.num_qubits(),
            found: b.num_qubits(),
        });
    }
    Ok(a.num_qubits())
}

/// Segments of the β/δ interference circuits on the `a0, a1, q…` register.
///
/// A full circuit is `prefix · branch(A_i, closed) · [local(k)] ·
/// branch(A_j, open) · suffix(part)`. Exposed so that evaluators can reuse
/// simulated prefixes shared by many circuits.
#[derive(Clone, Debug)]
pub struct InterferenceBlocks {
    n: usize,
    wires: Vec<Wire>,
}

impl InterferenceBlocks {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            wires: layout(true, true, n),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n + 2
    }

    /// `H(a0)` followed by the ansatz.
    pub fn prefix(&self, v: &Circuit) -> Result<Circuit> {
        check_width("V", v, self.n)?;
        let mut c = Circuit::with_layout(self.wires.clone());
        c.push(Gate::single(GateKind::H, 0))?;
        c.append(&v.embed(&self.wires)?)?;
        Ok(c)
    }

    /// Completion circuit of `t`, controlled on `a0`.
    pub fn branch(&self, t: &TensorTerm, polarity: Polarity) -> Result<Circuit> {
        if t.num_qubits() != self.n {
            return Err(Error::QubitMismatch {
                expected: self.n,
                found: t.num_qubits(),
            });
        }
        completion_circuit(t).embed(&self.wires)?.controlled(0, polarity)
    }

    /// `U(Z_k ⊗ I)U†` on the `a0 = 1` branch, the Z also conditioned on `a1 = 1`.
    pub fn local(&self, u: &Circuit, k: usize) -> Result<Circuit> {
        check_width("U", u, self.n)?;
        if k == 0 || k > self.n {
            return Err(Error::InvalidParameter(format!("k = {k} must lie in 1..={}", self.n)));
        }
        let u_wide = u.embed(&self.wires)?;
        let mut c = u_wide.inverse().controlled(0, Polarity::Closed)?;
        c.push(Gate::new(
            GateKind::Z,
            2 + (k - 1),
            vec![Control::closed(0), Control::closed(1)],
        )?)?;
        c.append(&u_wide.controlled(0, Polarity::Closed)?)?;
        Ok(c)
    }

    /// Optional `S†(a0)` for the imaginary part, then `H(a0)`.
    pub fn suffix(&self, part: Part) -> Circuit {
        let mut c = Circuit::with_layout(self.wires.clone());
        if part == Part::Imaginary {
            c.gates.push(Gate::single(GateKind::Sdg, 0));
        }
        c.gates.push(Gate::single(GateKind::H, 0));
        c
    }
}

/// Hadamard test with `P₀₁ − P₁₁ = Re/Im ⟨ψ|A_j† W A_i|ψ⟩`, `|ψ⟩ = V|0⟩`,
/// where `W = U(Z_k ⊗ I)U†` when `local` is given and the identity otherwise.
fn interference_circuit(
    ti: &TensorTerm,
    tj: &TensorTerm,
    v: &Circuit,
    local: Option<(&Circuit, usize)>,
    part: Part,
) -> Result<Circuit> {
    let blocks = InterferenceBlocks::new(check_terms(ti, tj)?);
    let mut c = blocks.prefix(v)?;
    c.append(&blocks.branch(ti, Polarity::Closed)?)?;
    if let Some((u, k)) = local {
        c.append(&blocks.local(u, k)?)?;
    }
    c.append(&blocks.branch(tj, Polarity::Open)?)?;
    c.append(&blocks.suffix(part))?;
    Ok(c)
}

/// Circuit estimating `δ_ijk = ⟨0|V†A_j†U(Z_k ⊗ I)U†A_iV|0⟩` (`k` is 1-based).
pub fn delta_circuit(
    ti: &TensorTerm,
    tj: &TensorTerm,
    v: &Circuit,
    u: &Circuit,
    k: usize,
    part: Part,
) -> Result<Circuit> {
    interference_circuit(ti, tj, v, Some((u, k)), part)
}

/// Circuit estimating `β_ij = ⟨0|V†A_j†A_iV|0⟩`.
pub fn beta_circuit(ti: &TensorTerm, tj: &TensorTerm, v: &Circuit, part: Part) -> Result<Circuit> {
    interference_circuit(ti, tj, v, None, part)
}

/// Circuit estimating `⟨0|U†A_lV|0⟩ = ⟨b|A_l|ψ⟩`.
pub fn gamma_circuit(tl: &TensorTerm, v: &Circuit, u: &Circuit, part: Part) -> Result<Circuit> {
    let n = tl.num_qubits();
    check_width("V", v, n)?;
    check_width("U", u, n)?;
    let mut c = Circuit::hadamard_test(n);
    let wires = c.layout.clone();
    let (a0, a1) = (0, 1);
    c.push(Gate::single(GateKind::H, a0))?;
    c.append(&u.embed(&wires)?.controlled(a0, Polarity::Open)?)?;
    c.append(&v.embed(&wires)?.controlled(a0, Polarity::Closed)?)?;
    c.append(&completion_circuit(tl).embed(&wires)?.controlled(a0, Polarity::Closed)?)?;
    c.push(Gate::new(GateKind::X, a1, vec![Control::open(a0)])?)?;
    if part == Part::Imaginary {
        c.push(Gate::single(GateKind::Sdg, a0))?;
    }
    c.push(Gate::single(GateKind::H, a0))?;
    Ok(c)
}

/// Gate statistics of a circuit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCensus {
    /// Every gate, keyed by kind name.
    pub by_kind: BTreeMap<String, usize>,
    /// Uncontrolled gates other than [`GateKind::Mcx`].
    pub single_qubit: usize,
    /// Multi-controlled X gates (including controlled plain X), by number
    /// of controls.
    pub mcx_by_arity: BTreeMap<usize, usize>,
    /// Controlled gates of any other kind.
    pub other_controlled: usize,
    pub total: usize,
    /// Layers of a greedy as-soon-as-possible schedule.
    pub depth: usize,
}

impl GateCensus {
    pub fn mcx_total(&self) -> usize {
        self.mcx_by_arity.values().sum()
    }
}

pub fn gate_census(c: &Circuit) -> GateCensus {
    let mut census = GateCensus::default();
    let mut level = vec![0usize; c.num_qubits];
    for g in &c.gates {
        *census.by_kind.entry(g.kind.name().to_string()).or_default() += 1;
        if g.is_multi_controlled_x() {
            *census.mcx_by_arity.entry(g.controls.len()).or_default() += 1;
        } else if g.controls.is_empty() {
            census.single_qubit += 1;
        } else {
            census.other_controlled += 1;
        }
        let layer = g.qubits().map(|q| level[q]).max().unwrap_or(0) + 1;
        for q in g.qubits() {
            level[q] = layer;
        }
        census.depth = census.depth.max(layer);
    }
    census.total = c.gates.len();
    census
}
