//! Circuits as ordered gate lists, their ideal and noisy superoperators, and
//! single-qubit randomized-benchmarking sequences.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gates::{hadamard, identity, phase_s, Gate};
use crate::noise::{noisy_gate, NoiseModel};
use crate::superop::{compose, embed, Superoperator, C64, MAX_QUBITS};

/// A gate placed on specific qubits of a register.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    pub gate: Gate,
    pub targets: Vec<usize>,
}

impl GateSpec {
    pub fn new(gate: Gate, targets: Vec<usize>) -> Self {
        Self { gate, targets }
    }

    pub fn label(&self) -> &str {
        self.gate.label()
    }

    pub fn unitary(&self) -> &DMatrix<C64> {
        self.gate.unitary()
    }
}

/// Gates in application order: `gates[0]` acts first.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<GateSpec>,
}

impl Circuit {
    pub fn new(num_qubits: usize, gates: Vec<GateSpec>) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!("unsupported register of {num_qubits} qubits")));
        }
        let circuit = Self { num_qubits, gates: Vec::new() };
        gates.into_iter().try_fold(circuit, |mut c, g| {
            c.push(g)?;
            Ok(c)
        })
    }

    /// Appends a gate after checking its targets.
    pub fn push(&mut self, spec: GateSpec) -> Result<()> {
        let k = spec.gate.num_qubits();
        if spec.targets.len() != k {
            return Err(Error::InvalidTargets(format!(
                "gate {} acts on {k} qubits but has {} targets",
                spec.label(),
                spec.targets.len()
            )));
        }
        for (i, &t) in spec.targets.iter().enumerate() {
            if t >= self.num_qubits {
                return Err(Error::InvalidTargets(format!("qubit {t} out of range for {} qubits", self.num_qubits)));
            }
            if spec.targets[..i].contains(&t) {
                return Err(Error::InvalidTargets(format!("duplicate target {t}")));
            }
        }
        self.gates.push(spec);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[GateSpec] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

/// `𝒢_t ∘ … ∘ 𝒢_1` with every gate embedded in the full register.
pub fn ideal_superop(c: &Circuit) -> Superoperator {
    let dim = 1 << c.num_qubits;
    c.gates.iter().fold(Superoperator::identity(dim), |acc, g| {
        let full = embed(g.gate.superop(), &g.targets, c.num_qubits).expect("targets validated on insertion");
        compose(&full, &acc).expect("matching dimensions")
    })
}

/// The circuit with every gate replaced by `ℰ^{(λᵢ)} ∘ 𝒢ᵢ`.
pub fn noisy_circuit_superop(c: &Circuit, model: &NoiseModel, lambdas: &[f64]) -> Result<Superoperator> {
    if lambdas.len() != c.len() {
        return Err(Error::InvalidArgument(format!("{} scale factors for {} gates", lambdas.len(), c.len())));
    }
    let mut acc = Superoperator::identity(1 << c.num_qubits);
    for (g, &lambda) in c.gates.iter().zip(lambdas) {
        let op = noisy_gate(&g.gate, model, lambda)?;
        acc = compose(&embed(op.superop(), &g.targets, c.num_qubits)?, &acc)?;
    }
    Ok(acc)
}

/// The 24 single-qubit Cliffords modulo global phase.
#[derive(Debug)]
pub struct CliffordGroup {
    elements: Vec<Gate>,
    /// `product[a][b]` is the index of `C_a · C_b`.
    product: Vec<Vec<usize>>,
    inverse: Vec<usize>,
}

/// Phase-normalized entries rounded onto a grid, used as a hash key.
fn phase_key(u: &DMatrix<C64>) -> Vec<(i64, i64)> {
    let pivot = u.iter().find(|z| z.norm() > 1e-6).copied().unwrap_or(C64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    u.iter()
        .map(|z| {
            let w = z * phase;
            ((w.re * 1e6).round() as i64, (w.im * 1e6).round() as i64)
        })
        .collect()
}

impl CliffordGroup {
    fn generate() -> Self {
        let generators = [("H", hadamard()), ("S", phase_s())];
        let mut words: Vec<(String, DMatrix<C64>)> = vec![(String::new(), identity(2))];
        let mut keys = vec![phase_key(&words[0].1)];
        let mut frontier = 0;
        while frontier < words.len() {
            let (word, u) = words[frontier].clone();
            for (name, g) in &generators {
                let next = g * &u;
                let key = phase_key(&next);
                if !keys.contains(&key) {
                    keys.push(key);
                    words.push((format!("{name}{word}"), next));
                }
            }
            frontier += 1;
        }
        let elements: Vec<Gate> = words
            .into_iter()
            .enumerate()
            .map(|(i, (word, u))| {
                let label = if word.is_empty() { "C0[I]".to_string() } else { format!("C{i}[{word}]") };
                Gate::new(label, u).expect("Clifford words are unitary")
            })
            .collect();
        let index_of = |u: &DMatrix<C64>| -> usize {
            let key = phase_key(u);
            keys.iter().position(|k| *k == key).expect("group closed under products")
        };
        let product: Vec<Vec<usize>> = elements
            .iter()
            .map(|a| elements.iter().map(|b| index_of(&(a.unitary() * b.unitary()))).collect())
            .collect();
        let inverse = (0..elements.len())
            .map(|a| (0..elements.len()).find(|&b| product[a][b] == 0).expect("group inverse"))
            .collect();
        Self { elements, product, inverse }
    }

    pub fn get() -> &'static CliffordGroup {
        static GROUP: OnceLock<CliffordGroup> = OnceLock::new();
        GROUP.get_or_init(Self::generate)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, index: usize) -> &Gate {
        &self.elements[index]
    }

    pub fn elements(&self) -> &[Gate] {
        &self.elements
    }

    pub fn product(&self, a: usize, b: usize) -> usize {
        self.product[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }
}

/// A single-qubit RB sequence of exactly `depth` gates: `depth − 1` uniform
/// Cliffords followed by the inverse of their product.
pub fn rb_circuit<R: Rng + ?Sized>(depth: usize, rng: &mut R) -> Result<Circuit> {
    if depth == 0 {
        return Err(Error::InvalidArgument("RB depth must be at least 1".into()));
    }
    let group = CliffordGroup::get();
    let mut running = 0;
    let mut gates = Vec::with_capacity(depth);
    for _ in 0..depth - 1 {
        let pick = rng.random_range(0..group.len());
        running = group.product(pick, running);
        gates.push(GateSpec::new(group.element(pick).clone(), vec![0]));
    }
    gates.push(GateSpec::new(group.element(group.inverse(running)).clone(), vec![0]));
    Circuit::new(1, gates)
}
