//! Synthetic hypergraph models: a configuration model driven by degree and
//! cardinality sequences, and a stochastic block model driven by an
//! affinity matrix between node and edge communities.
//!
//! Both draw from ChaCha8 seeded with a 64-bit integer, so a seed reproduces
//! the same hypergraph on every platform.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::{Hypergraph, HypergraphError, VertexId};

/// Name of the pseudorandom stream, recorded alongside generated output.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3)";

#[derive(Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("degree sum {degrees} differs from cardinality sum {cardinalities}")]
    StubMismatch { degrees: usize, cardinalities: usize },
    #[error("cardinality sequence contains a zero")]
    ZeroCardinality,
    #[error("community sizes must be positive")]
    ZeroCommunity,
    #[error("affinity matrix must be {rows}x{cols}")]
    AffinityShape { rows: usize, cols: usize },
    #[error("affinity entry ({row}, {col}) = {value} is outside [0, 1]")]
    AffinityRange { row: usize, col: usize, value: f64 },
    #[error("line {line}: {message}")]
    SpecSyntax { line: usize, message: String },
    #[error("spec is missing key {0:?}")]
    MissingKey(&'static str),
    #[error("unknown model {0:?}, expected hcm|hsbm")]
    UnknownModel(String),
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcmSpec {
    pub degrees: Vec<usize>,
    pub cardinalities: Vec<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HsbmSpec {
    pub node_sizes: Vec<usize>,
    pub edge_sizes: Vec<usize>,
    /// `affinity[a][b]` is the probability that a node of community `a`
    /// belongs to an edge of community `b`.
    pub affinity: Vec<Vec<f64>>,
    pub seed: u64,
}

/// Output of the configuration model.
#[derive(Debug, Clone, PartialEq)]
pub struct HcmOutput {
    pub hypergraph: Hypergraph,
    /// Stub groups before duplicate vertices were merged, in edge order.
    pub raw_edges: Vec<Vec<VertexId>>,
    /// Number of hyperedges that lost at least one repeated vertex.
    pub collapsed_edges: usize,
    /// Total number of repeated stubs removed.
    pub collapsed_stubs: usize,
}

/// Output of the block model.
#[derive(Debug, Clone, PartialEq)]
pub struct HsbmOutput {
    pub hypergraph: Hypergraph,
    /// Edge community of each surviving hyperedge.
    pub edge_community: Vec<usize>,
    /// Node community of each vertex.
    pub node_community: Vec<usize>,
    /// Edges drawn with no members and therefore dropped.
    pub dropped_empty: usize,
    /// `(trials, memberships)` per `(node community, edge community)` block,
    /// counted before empty edges were dropped.
    pub block_counts: Vec<Vec<(u64, u64)>>,
}

/// Metadata written next to a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMeta {
    pub model: String,
    pub seed: u64,
    pub rng: String,
    pub num_vertices: usize,
    pub num_edges: usize,
    pub collapsed_edges: usize,
    pub collapsed_stubs: usize,
    pub dropped_empty: usize,
}

impl HcmSpec {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        if self.cardinalities.contains(&0) {
            return Err(GeneratorError::ZeroCardinality);
        }
        let degrees: usize = self.degrees.iter().sum();
        let cardinalities: usize = self.cardinalities.iter().sum();
        if degrees != cardinalities {
            return Err(GeneratorError::StubMismatch { degrees, cardinalities });
        }
        Ok(())
    }
}

impl HsbmSpec {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        if self.node_sizes.contains(&0) || self.edge_sizes.contains(&0) {
            return Err(GeneratorError::ZeroCommunity);
        }
        let (rows, cols) = (self.node_sizes.len(), self.edge_sizes.len());
        if self.affinity.len() != rows || self.affinity.iter().any(|r| r.len() != cols) {
            return Err(GeneratorError::AffinityShape { rows, cols });
        }
        for (row, r) in self.affinity.iter().enumerate() {
            for (col, &value) in r.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    return Err(GeneratorError::AffinityRange { row, col, value });
                }
            }
        }
        Ok(())
    }
}

/// Shuffles `d_v` stubs of every vertex `v` and cuts the sequence into
/// consecutive groups of the prescribed cardinalities. Repeated vertices in
/// a group are merged, so a hyperedge may come out smaller than requested.
pub fn generate_hcm(spec: &HcmSpec) -> Result<HcmOutput, GeneratorError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut stubs: Vec<VertexId> = Vec::with_capacity(spec.degrees.iter().sum());
    for (v, &d) in spec.degrees.iter().enumerate() {
        stubs.extend(std::iter::repeat_n(v, d));
    }
    stubs.shuffle(&mut rng);

    let mut raw_edges = Vec::with_capacity(spec.cardinalities.len());
    let mut edges = Vec::with_capacity(spec.cardinalities.len());
    let mut collapsed_edges = 0;
    let mut collapsed_stubs = 0;
    let mut offset = 0;
    for &k in &spec.cardinalities {
        let group = stubs[offset..offset + k].to_vec();
        offset += k;
        let mut edge = group.clone();
        edge.sort_unstable();
        edge.dedup();
        if edge.len() < group.len() {
            collapsed_edges += 1;
            collapsed_stubs += group.len() - edge.len();
        }
        raw_edges.push(group);
        edges.push(edge);
    }
    let hypergraph = Hypergraph::new(spec.degrees.len(), edges)?;
    Ok(HcmOutput { hypergraph, raw_edges, collapsed_edges, collapsed_stubs })
}

/// Draws each (vertex, hyperedge) membership independently with the
/// affinity of their communities. Edges that end up empty are dropped.
pub fn generate_hsbm(spec: &HsbmSpec) -> Result<HsbmOutput, GeneratorError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let node_community: Vec<usize> =
        spec.node_sizes.iter().enumerate().flat_map(|(a, &size)| std::iter::repeat_n(a, size)).collect();
    let n = node_community.len();
    let mut block_counts = vec![vec![(0u64, 0u64); spec.edge_sizes.len()]; spec.node_sizes.len()];
    let mut edges = Vec::new();
    let mut edge_community = Vec::new();
    let mut dropped_empty = 0;
    for (b, &count) in spec.edge_sizes.iter().enumerate() {
        for _ in 0..count {
            let mut edge = Vec::new();
            for (v, &a) in node_community.iter().enumerate() {
                let hit = rng.gen_bool(spec.affinity[a][b]);
                let cell = &mut block_counts[a][b];
                cell.0 += 1;
                if hit {
                    cell.1 += 1;
                    edge.push(v);
                }
            }
            if edge.is_empty() {
                dropped_empty += 1;
            } else {
                edges.push(edge);
                edge_community.push(b);
            }
        }
    }
    let hypergraph = Hypergraph::new(n, edges)?;
    Ok(HsbmOutput { hypergraph, edge_community, node_community, dropped_empty, block_counts })
}

/// A parsed generator spec file.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Hcm(HcmSpec),
    Hsbm(HsbmSpec),
}

impl ModelSpec {
    pub fn model(&self) -> &'static str {
        match self {
            ModelSpec::Hcm(_) => "hcm",
            ModelSpec::Hsbm(_) => "hsbm",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ModelSpec::Hcm(s) => s.seed,
            ModelSpec::Hsbm(s) => s.seed,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            ModelSpec::Hcm(s) => s.seed = seed,
            ModelSpec::Hsbm(s) => s.seed = seed,
        }
    }

    /// Runs the model and returns the hypergraph with its metadata.
    pub fn generate(&self) -> Result<(Hypergraph, GeneratorMeta), GeneratorError> {
        let (hypergraph, collapsed_edges, collapsed_stubs, dropped_empty) = match self {
            ModelSpec::Hcm(s) => {
                let out = generate_hcm(s)?;
                (out.hypergraph, out.collapsed_edges, out.collapsed_stubs, 0)
            }
            ModelSpec::Hsbm(s) => {
                let out = generate_hsbm(s)?;
                (out.hypergraph, 0, 0, out.dropped_empty)
            }
        };
        let meta = GeneratorMeta {
            model: self.model().to_string(),
            seed: self.seed(),
            rng: RNG_ALGORITHM.to_string(),
            num_vertices: hypergraph.num_vertices(),
            num_edges: hypergraph.num_edges(),
            collapsed_edges,
            collapsed_stubs,
            dropped_empty,
        };
        Ok((hypergraph, meta))
    }
}

impl fmt::Display for ModelSpec {
    /// Renders the spec in the same key-value format [`parse_spec`] reads.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join<T: ToString>(xs: &[T]) -> String {
            xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
        }
        writeln!(f, "model = {}", self.model())?;
        match self {
            ModelSpec::Hcm(s) => {
                writeln!(f, "seed = {}", s.seed)?;
                writeln!(f, "degrees = {}", join(&s.degrees))?;
                writeln!(f, "cardinalities = {}", join(&s.cardinalities))
            }
            ModelSpec::Hsbm(s) => {
                writeln!(f, "seed = {}", s.seed)?;
                writeln!(f, "node_sizes = {}", join(&s.node_sizes))?;
                writeln!(f, "edge_sizes = {}", join(&s.edge_sizes))?;
                let rows: Vec<String> = s.affinity.iter().map(|r| join(r)).collect();
                writeln!(f, "affinity = {}", rows.join("; "))
            }
        }
    }
}

/// Parses a `key = value` spec file. Blank lines and `#` comments are
/// ignored; lists are separated by whitespace or commas and affinity rows by
/// `;`. A missing seed defaults to 0.
pub fn parse_spec(text: &str) -> Result<ModelSpec, GeneratorError> {
    let mut values: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(GeneratorError::SpecSyntax { line: idx + 1, message: "expected key = value".into() });
        };
        values.insert(key.trim().to_string(), (idx + 1, value.trim().to_string()));
    }

    fn get<'a>(
        values: &'a BTreeMap<String, (usize, String)>,
        key: &'static str,
    ) -> Result<&'a (usize, String), GeneratorError> {
        values.get(key).ok_or(GeneratorError::MissingKey(key))
    }
    fn list<T: std::str::FromStr>(line: usize, text: &str) -> Result<Vec<T>, GeneratorError> {
        text.split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().map_err(|_| GeneratorError::SpecSyntax { line, message: format!("bad number {t:?}") }))
            .collect()
    }

    let seed = match values.get("seed") {
        Some((line, s)) => {
            s.parse().map_err(|_| GeneratorError::SpecSyntax { line: *line, message: format!("bad seed {s:?}") })?
        }
        None => 0,
    };
    let (_, model) = get(&values, "model")?;
    match model.as_str() {
        "hcm" => {
            let (l1, degrees) = get(&values, "degrees")?;
            let (l2, cards) = get(&values, "cardinalities")?;
            Ok(ModelSpec::Hcm(HcmSpec { degrees: list(*l1, degrees)?, cardinalities: list(*l2, cards)?, seed }))
        }
        "hsbm" => {
            let (l1, nodes) = get(&values, "node_sizes")?;
            let (l2, edges) = get(&values, "edge_sizes")?;
            let (l3, affinity) = get(&values, "affinity")?;
            let affinity = affinity
                .split(';')
                .filter(|r| !r.trim().is_empty())
                .map(|r| list(*l3, r))
                .collect::<Result<Vec<Vec<f64>>, _>>()?;
            Ok(ModelSpec::Hsbm(HsbmSpec {
                node_sizes: list(*l1, nodes)?,
                edge_sizes: list(*l2, edges)?,
                affinity,
                seed,
            }))
        }
        other => Err(GeneratorError::UnknownModel(other.to_string())),
    }
}

/// Configuration-model spec with `n` vertices and `m` hyperedges whose
/// cardinalities are uniform on `min_card..=max_card`. Every vertex gets at
/// least one stub; the rest are spread uniformly.
pub fn random_hcm_spec(n: usize, m: usize, min_card: usize, max_card: usize, seed: u64) -> HcmSpec {
    assert!(n > 0 && min_card >= 1 && min_card <= max_card);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cardinalities: Vec<usize> = (0..m).map(|_| rng.gen_range(min_card..=max_card)).collect();
    let total: usize = cardinalities.iter().sum();
    let mut degrees = vec![0usize; n];
    let base = total.min(n);
    for d in degrees.iter_mut().take(base) {
        *d = 1;
    }
    for _ in base..total {
        degrees[rng.gen_range(0..n)] += 1;
    }
    HcmSpec { degrees, cardinalities, seed }
}

/// `m` hyperedges, each a uniformly random set of distinct vertices whose
/// size is uniform on `min_card..=max_card` (capped at `n`).
pub fn random_hypergraph(n: usize, m: usize, min_card: usize, max_card: usize, seed: u64) -> Hypergraph {
    assert!(n > 0 && min_card >= 1 && min_card <= max_card);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (0..m)
        .map(|_| {
            let k = rng.gen_range(min_card..=max_card).min(n);
            rand::seq::index::sample(&mut rng, n, k).into_vec()
        })
        .collect();
    Hypergraph::new(n, edges).expect("sampled hyperedges are valid")
}

/// The desk-scale configuration-model instance: 200 vertices, 300
/// hyperedges of cardinality 2 to 6.
pub fn syn_hcm(seed: u64) -> HcmSpec {
    random_hcm_spec(200, 300, 2, 6, seed)
}

/// The desk-scale block-model instance: 4 node communities of 50 and 4 edge
/// communities of 75, with dense diagonal blocks.
pub fn syn_hsbm(seed: u64) -> HsbmSpec {
    let c = 4;
    let affinity = (0..c).map(|a| (0..c).map(|b| if a == b { 0.06 } else { 0.004 }).collect()).collect();
    HsbmSpec { node_sizes: vec![50; c], edge_sizes: vec![75; c], affinity, seed }
}
