//! Gate-level statevector simulation of the two-meter protocol circuit.
//!
//! Layout: system `q0 q1`, meter M1 `q2 q3`, meter M2 `q4 q5`. Classical
//! bits `c0 c1 c2 c3` read `q2 q3 q4 q5`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{pauli, ComplexMatrix, PureState, C64, I, ONE};
use crate::states::StateParams;

pub const MAX_SIM_QUBITS: usize = 12;
pub const PROTOCOL_QUBITS: usize = 6;
pub const PROTOCOL_MEASURED: [usize; 4] = [2, 3, 4, 5];

/// `U3(theta, phi, lambda)` in the convention
/// `[[cos t/2, -e^{i l} sin t/2], [e^{i p} sin t/2, e^{i(p+l)} cos t/2]]`.
pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> ComplexMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_vec(
        2,
        2,
        vec![
            C64::new(c, 0.0),
            -C64::from_polar(s, lambda),
            C64::from_polar(s, phi),
            C64::from_polar(c, phi + lambda),
        ],
    )
    .expect("2x2")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    U3 { theta: f64, phi: f64, lambda: f64 },
    H,
    X,
    S,
    Sdg,
}

impl GateKind {
    pub fn matrix(&self) -> ComplexMatrix {
        match *self {
            GateKind::U3 { theta, phi, lambda } => u3_matrix(theta, phi, lambda),
            GateKind::H => pauli::h(),
            GateKind::X => pauli::x(),
            GateKind::S => ComplexMatrix::diagonal(&[ONE, I]),
            GateKind::Sdg => ComplexMatrix::diagonal(&[ONE, -I]),
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            GateKind::U3 { theta, phi, lambda } => vec![theta, phi, lambda],
            _ => Vec::new(),
        }
    }
}

/// A single-qubit operation on `target`, applied only where every control is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub controls: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, target: usize) -> Self {
        Self {
            kind,
            target,
            controls: Vec::new(),
        }
    }

    pub fn u3(theta: f64, phi: f64, lambda: f64, target: usize) -> Self {
        Self::new(GateKind::U3 { theta, phi, lambda }, target)
    }

    pub fn h(target: usize) -> Self {
        Self::new(GateKind::H, target)
    }

    pub fn x(target: usize) -> Self {
        Self::new(GateKind::X, target)
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::X,
            target,
            controls: vec![control],
        }
    }

    pub fn name(&self) -> String {
        let base = match self.kind {
            GateKind::U3 { .. } => "U3",
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::S => "S",
            GateKind::Sdg => "SDG",
        };
        "C".repeat(self.controls.len()) + base
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        for (i, &q) in std::iter::once(&self.target)
            .chain(&self.controls)
            .enumerate()
        {
            if q >= n_qubits {
                return Err(Error::InvalidIndex {
                    index: q,
                    limit: n_qubits,
                });
            }
            if i > 0 && (q == self.target || self.controls[..i - 1].contains(&q)) {
                return Err(Error::InvalidIndex {
                    index: q,
                    limit: n_qubits,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    measured_qubits: Vec<usize>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
            measured_qubits: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn measure(&mut self, qubits: &[usize]) -> Result<&mut Self> {
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.n_qubits || qubits[..i].contains(&q) {
                return Err(Error::InvalidIndex {
                    index: q,
                    limit: self.n_qubits,
                });
            }
        }
        self.measured_qubits = qubits.to_vec();
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn measured_qubits(&self) -> &[usize] {
        &self.measured_qubits
    }

    /// One gate per line: `NAME target [controls] [params]`, then a
    /// `MEASURE q...` line.
    pub fn to_text(&self) -> String {
        let join = |v: &[String]| v.join(",");
        let mut out = format!("QUBITS {}\n", self.n_qubits);
        for g in &self.gates {
            let controls: Vec<String> = g.controls.iter().map(|c| c.to_string()).collect();
            let params: Vec<String> = g.kind.params().iter().map(|p| format!("{p:?}")).collect();
            out.push_str(&format!(
                "{} {} [{}] [{}]\n",
                g.name(),
                g.target,
                join(&controls),
                join(&params)
            ));
        }
        let measured: Vec<String> = self.measured_qubits.iter().map(|q| q.to_string()).collect();
        out.push_str(&format!("MEASURE {}\n", measured.join(" ")));
        out
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |line: &str| Error::InvalidState(format!("unparseable circuit line: {line:?}"));
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad(""))?;
        let n: usize = header
            .strip_prefix("QUBITS ")
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| bad(header))?;
        let mut circuit = Circuit::new(n);
        for line in lines {
            if let Some(rest) = line.strip_prefix("MEASURE") {
                let qs: std::result::Result<Vec<usize>, _> =
                    rest.split_whitespace().map(str::parse).collect();
                circuit.measure(&qs.map_err(|_| bad(line))?)?;
                continue;
            }
            let mut parts = line.split_whitespace();
            let name = parts.next().ok_or_else(|| bad(line))?;
            let target: usize = parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad(line))?;
            let list = |tok: Option<&str>| -> Option<Vec<String>> {
                let inner = tok?.strip_prefix('[')?.strip_suffix(']')?;
                Some(
                    inner
                        .split(',')
                        .filter(|x| !x.is_empty())
                        .map(String::from)
                        .collect(),
                )
            };
            let controls: Vec<usize> = list(parts.next())
                .ok_or_else(|| bad(line))?
                .iter()
                .map(|c| c.parse().map_err(|_| bad(line)))
                .collect::<Result<_>>()?;
            let params: Vec<f64> = list(parts.next())
                .ok_or_else(|| bad(line))?
                .iter()
                .map(|p| p.parse().map_err(|_| bad(line)))
                .collect::<Result<_>>()?;
            let base = name.trim_start_matches('C');
            if name.len() - base.len() != controls.len() {
                return Err(bad(line));
            }
            let kind = match (base, params.as_slice()) {
                ("U3", &[theta, phi, lambda]) => GateKind::U3 { theta, phi, lambda },
                ("H", []) => GateKind::H,
                ("X", []) => GateKind::X,
                ("S", []) => GateKind::S,
                ("SDG", []) => GateKind::Sdg,
                _ => return Err(bad(line)),
            };
            circuit.push(Gate {
                kind,
                target,
                controls,
            })?;
        }
        Ok(circuit)
    }
}

/// Appends the protocol body (state prep, meter prep, both couplings, M2
/// basis change) without measurements.
fn push_protocol_gates(c: &mut Circuit, params: StateParams) -> Result<()> {
    // system |psi>
    c.push(Gate::u3(2.0 * params.theta, params.phi, 0.0, 0))?;
    c.push(Gate::cx(0, 1))?;
    // meter M1: (|00> + |11>)/sqrt2
    c.push(Gate::h(2))?;
    c.push(Gate::cx(2, 3))?;
    // meter M2: (|01> + |10>)/sqrt2
    c.push(Gate::h(4))?;
    c.push(Gate::x(5))?;
    c.push(Gate::cx(4, 5))?;
    // U1: system controls M1
    c.push(Gate::cx(0, 2))?;
    c.push(Gate::cx(1, 3))?;
    // U2: M2 controls system
    c.push(Gate::cx(4, 0))?;
    c.push(Gate::cx(5, 1))?;
    // read M2 in the X basis
    c.push(Gate::h(4))?;
    c.push(Gate::h(5))?;
    Ok(())
}

pub fn build_protocol_circuit(params: StateParams) -> Circuit {
    let mut c = Circuit::new(PROTOCOL_QUBITS);
    push_protocol_gates(&mut c, params).expect("protocol gates use valid indices");
    c.measure(&PROTOCOL_MEASURED).expect("distinct qubits");
    c
}

/// Single-qubit Pauli measurement basis for the system readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliBasis {
    X,
    Y,
    Z,
}

impl PauliBasis {
    pub const ALL: [PauliBasis; 3] = [PauliBasis::X, PauliBasis::Y, PauliBasis::Z];

    pub fn label(self) -> char {
        match self {
            PauliBasis::X => 'X',
            PauliBasis::Y => 'Y',
            PauliBasis::Z => 'Z',
        }
    }

    pub fn matrix(self) -> ComplexMatrix {
        match self {
            PauliBasis::X => pauli::x(),
            PauliBasis::Y => pauli::y(),
            PauliBasis::Z => pauli::z(),
        }
    }

    /// Rotation mapping this basis onto Z before readout.
    fn rotation(self, q: usize) -> Vec<Gate> {
        match self {
            PauliBasis::X => vec![Gate::h(q)],
            PauliBasis::Y => vec![Gate::new(GateKind::Sdg, q), Gate::h(q)],
            PauliBasis::Z => Vec::new(),
        }
    }
}

/// Protocol circuit followed by a system readout in bases `(a, b)` on
/// `(q0, q1)`. Measured order: `q2 q3 q4 q5 q0 q1`.
pub fn build_tomography_circuit(params: StateParams, a: PauliBasis, b: PauliBasis) -> Circuit {
    let mut c = Circuit::new(PROTOCOL_QUBITS);
    push_protocol_gates(&mut c, params).expect("valid indices");
    for g in a.rotation(0).into_iter().chain(b.rotation(1)) {
        c.push(g).expect("valid indices");
    }
    c.measure(&[2, 3, 4, 5, 0, 1]).expect("distinct qubits");
    c
}

fn apply_gate(amps: &mut [C64], n: usize, gate: &Gate) {
    let m = gate.kind.matrix();
    let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let tbit = 1usize << (n - 1 - gate.target);
    let cmask: usize = gate.controls.iter().map(|&c| 1usize << (n - 1 - c)).sum();
    for i in 0..amps.len() {
        if i & tbit != 0 || i & cmask != cmask {
            continue;
        }
        let j = i | tbit;
        let (a0, a1) = (amps[i], amps[j]);
        amps[i] = m00 * a0 + m01 * a1;
        amps[j] = m10 * a0 + m11 * a1;
    }
}

/// Final state of `c` applied to `|0...0>`.
pub fn simulate_statevector(c: &Circuit) -> Result<PureState> {
    if c.n_qubits == 0 || c.n_qubits > MAX_SIM_QUBITS {
        return Err(Error::DimensionMismatch {
            expected: format!("1..={MAX_SIM_QUBITS} qubits"),
            got: c.n_qubits.to_string(),
        });
    }
    let mut state = PureState::basis(c.n_qubits, 0)?;
    let amps = state.amplitudes_mut();
    for g in &c.gates {
        apply_gate(amps, c.n_qubits, g);
    }
    Ok(state)
}

/// Exact outcome distribution over the measured qubits, indexed by the
/// bitstring with the first measured qubit most significant.
pub fn exact_distribution(c: &Circuit) -> Result<Vec<f64>> {
    let state = simulate_statevector(c)?;
    let n = c.n_qubits;
    let m = c.measured_qubits.len();
    let mut dist = vec![0.0; 1 << m];
    for (i, p) in state.probabilities().into_iter().enumerate() {
        let key = c
            .measured_qubits
            .iter()
            .fold(0usize, |acc, &q| (acc << 1) | ((i >> (n - 1 - q)) & 1));
        dist[key] += p;
    }
    Ok(dist)
}

pub fn bitstring(index: usize, width: usize) -> String {
    (0..width)
        .map(|k| {
            if (index >> (width - 1 - k)) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// Shot counts keyed by classical bitstring `c0 c1 ...`. Every possible key
/// is present, including zero counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub shots: u64,
    pub seed: u64,
    pub counts: BTreeMap<String, u64>,
}

impl OutcomeCounts {
    pub fn width(&self) -> usize {
        self.counts.keys().next().map_or(0, String::len)
    }

    /// Counts as a dense vector indexed like [`exact_distribution`].
    pub fn to_vec(&self) -> Vec<u64> {
        let width = self.width();
        let mut v = vec![0; 1 << width];
        for (k, &n) in &self.counts {
            v[usize::from_str_radix(k, 2).expect("binary key")] = n;
        }
        v
    }

    pub fn frequencies(&self) -> Result<Vec<f64>> {
        if self.shots == 0 || self.counts.is_empty() {
            return Err(Error::EmptyCounts);
        }
        let total: u64 = self.counts.values().sum();
        if total != self.shots {
            return Err(Error::InvalidState(format!(
                "counts sum to {total}, shots = {}",
                self.shots
            )));
        }
        Ok(self
            .to_vec()
            .into_iter()
            .map(|n| n as f64 / self.shots as f64)
            .collect())
    }
}

/// Draws `shots` outcomes from `dist` by inverse-CDF lookup.
pub fn sample_distribution(dist: &[f64], shots: u64, seed: u64) -> OutcomeCounts {
    let width = dist.len().trailing_zeros() as usize;
    let mut cdf = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for &p in dist {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    // last outcome with nonzero mass absorbs any rounding shortfall
    let last = dist.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut tally = vec![0u64; dist.len()];
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let k = cdf.partition_point(|&c| c <= u).min(last);
        tally[k] += 1;
    }
    OutcomeCounts {
        shots,
        seed,
        counts: tally
            .into_iter()
            .enumerate()
            .map(|(i, n)| (bitstring(i, width), n))
            .collect(),
    }
}

pub fn sample_counts(c: &Circuit, shots: u64, seed: u64) -> Result<OutcomeCounts> {
    if shots == 0 {
        return Err(Error::OutOfRange {
            value: 0.0,
            min: 1.0,
            max: f64::INFINITY,
        });
    }
    Ok(sample_distribution(&exact_distribution(c)?, shots, seed))
}

/// Meter marginals from a distribution over at least four classical bits:
/// `P_M1[ij]` sums over `c2 c3`, `P_M2[kl]` over `c0 c1`. Extra trailing
/// bits are summed out.
pub fn marginalize_distribution(dist: &[f64]) -> Result<([f64; 4], [f64; 4])> {
    if dist.is_empty() {
        return Err(Error::EmptyCounts);
    }
    let width = dist.len().trailing_zeros() as usize;
    if width < 4 || dist.len() != 1 << width {
        return Err(Error::DimensionMismatch {
            expected: "distribution over >= 4 bits".into(),
            got: format!("{} entries", dist.len()),
        });
    }
    let rest = width - 4;
    let mut m1 = [0.0; 4];
    let mut m2 = [0.0; 4];
    for (i, &p) in dist.iter().enumerate() {
        let head = i >> rest;
        m1[head >> 2] += p;
        m2[head & 3] += p;
    }
    Ok((m1, m2))
}

pub fn marginalize(counts: &OutcomeCounts) -> Result<([f64; 4], [f64; 4])> {
    marginalize_distribution(&counts.frequencies()?)
}
