//! MaxCut instances: Erdős–Rényi sampling, brute-force optimum and edge lists.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{contract, Result};
use crate::quantum::{Pauli, PauliObservable, PauliString, PauliTerm};

/// Brute force enumerates 2^n cuts; kept well inside the dense-state limits.
pub const MAX_VERTICES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct MaxCutInstance {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
    hamiltonian: PauliObservable,
    c_max: u32,
    ground_bitstrings: Vec<usize>,
}

impl MaxCutInstance {
    /// Normalises each edge to `(min, max)` and sorts the list.
    pub fn new(n_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n_vertices == 0 || n_vertices > MAX_VERTICES {
            return Err(contract(format!("vertex count {n_vertices} outside 1..={MAX_VERTICES}")));
        }
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u == v {
                return Err(contract(format!("self-loop at vertex {u}")));
            }
            if u.max(v) >= n_vertices {
                return Err(contract(format!("edge ({u}, {v}) out of range")));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        if norm.windows(2).any(|w| w[0] == w[1]) {
            return Err(contract("duplicate edge"));
        }
        let hamiltonian = maxcut_hamiltonian(n_vertices, &norm);
        let cuts: Vec<u32> = (0..1usize << n_vertices).map(|b| cut_value(n_vertices, &norm, b)).collect();
        let c_max = cuts.iter().copied().max().unwrap_or(0);
        let ground_bitstrings = (0..cuts.len()).filter(|&b| cuts[b] == c_max).collect();
        Ok(Self {
            n_vertices,
            edges: norm,
            hamiltonian,
            c_max,
            ground_bitstrings,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// Sorted lexicographically; this is also the gate order in the circuit.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn hamiltonian(&self) -> &PauliObservable {
        &self.hamiltonian
    }

    pub fn c_max(&self) -> u32 {
        self.c_max
    }

    /// Basis indices (qubit 0 = most significant bit) of all maximum cuts, ascending.
    pub fn ground_bitstrings(&self) -> &[usize] {
        &self.ground_bitstrings
    }

    /// Number of edges cut by bitstring `b`.
    pub fn cut(&self, b: usize) -> u32 {
        cut_value(self.n_vertices, &self.edges, b)
    }

    /// Text form: header `n m`, then one `u v` line per edge.
    pub fn to_edgelist(&self) -> String {
        let mut s = format!("{} {}\n", self.n_vertices, self.edges.len());
        for (u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn from_edgelist(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| contract("empty edge list"))?;
        let (n, m) = parse_pair(header)?;
        let edges = lines.map(parse_pair).collect::<Result<Vec<_>>>()?;
        if edges.len() != m {
            return Err(contract(format!("header announces {m} edges, found {}", edges.len())));
        }
        Self::new(n, edges)
    }
}

fn parse_pair(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace().map(str::parse::<usize>);
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
        _ => Err(contract(format!("malformed edge-list line '{line}'"))),
    }
}

fn cut_value(n: usize, edges: &[(usize, usize)], b: usize) -> u32 {
    let bit = |q: usize| (b >> (n - 1 - q)) & 1;
    edges.iter().filter(|&&(u, v)| bit(u) != bit(v)).count() as u32
}

/// −½ Σ_{(i,j)∈E} (1 − Z_i Z_j), collected as one identity term plus ½ Z_iZ_j per edge.
pub fn maxcut_hamiltonian(n_vertices: usize, edges: &[(usize, usize)]) -> PauliObservable {
    let mut terms = Vec::with_capacity(edges.len() + 1);
    if !edges.is_empty() {
        terms.push(PauliTerm {
            coeff: -0.5 * edges.len() as f64,
            string: PauliString::identity(n_vertices),
        });
    }
    for &(u, v) in edges {
        let mut letters = vec![Pauli::I; n_vertices];
        letters[u] = Pauli::Z;
        letters[v] = Pauli::Z;
        terms.push(PauliTerm {
            coeff: 0.5,
            string: PauliString::new(letters),
        });
    }
    PauliObservable::new(n_vertices, terms).expect("edge terms are well formed")
}

/// G(n, p), resampling whenever the draw has no edges (needs p > 0).
pub fn erdos_renyi<R: Rng + ?Sized>(n_vertices: usize, edge_prob: f64, rng: &mut R) -> Result<MaxCutInstance> {
    if n_vertices < 2 {
        return Err(contract("need at least two vertices"));
    }
    if !(edge_prob > 0.0 && edge_prob <= 1.0) {
        // p = 0 can only produce the rejected empty graph.
        return Err(contract(format!("edge probability {edge_prob} must lie in (0, 1]")));
    }
    loop {
        let mut edges = Vec::new();
        for u in 0..n_vertices {
            for v in u + 1..n_vertices {
                if rng.gen::<f64>() < edge_prob {
                    edges.push((u, v));
                }
            }
        }
        if !edges.is_empty() {
            return MaxCutInstance::new(n_vertices, edges);
        }
    }
}
