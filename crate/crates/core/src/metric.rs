//! Discrete spaces with integer-valued metrics.
//!
//! The curvature bound only ever asks two things of a space: the distance
//! between two points and which points sit at distance exactly one. Graph
//! distance, the ℓ¹ lattice and Hamming strings all fit.

use std::fmt;
use std::hash::Hash;

use thiserror::Error;

use crate::hypergraph::{graph_distance, AdjacencyIndex, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("points lie in different connected components")]
    Unreachable,
    #[error("bit strings have lengths {left} and {right}, expected {expected}")]
    LengthMismatch { left: usize, right: usize, expected: usize },
    #[error("point {point} lies outside the lattice box")]
    OutOfBounds { point: String },
    #[error("vertex {0} is not in the space")]
    UnknownVertex(VertexId),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
}

pub trait IntegerMetricSpace: Sync {
    type Point: Clone + Ord + Eq + Hash + fmt::Debug + Send + Sync;

    fn distance(&self, p: &Self::Point, q: &Self::Point) -> Result<u32, MetricError>;

    /// All points at distance exactly one from `p`.
    fn unit_neighbors(&self, p: &Self::Point) -> Result<Vec<Self::Point>, MetricError>;

    fn is_adjacent(&self, p: &Self::Point, q: &Self::Point) -> bool {
        matches!(self.distance(p, q), Ok(1))
    }

    /// Distances from `p` to each of `targets`. Spaces with expensive distance
    /// queries override this to share work across targets.
    fn distance_row(&self, p: &Self::Point, targets: &[Self::Point]) -> Result<Vec<u32>, MetricError> {
        targets.iter().map(|q| self.distance(p, q)).collect()
    }

    /// Every point of the space, when it is small enough to list.
    fn points(&self) -> Option<Vec<Self::Point>> {
        None
    }
}

/// Shortest-path metric of a hypergraph's adjacency.
#[derive(Debug, Clone, Copy)]
pub struct GraphSpace<'a> {
    adj: &'a AdjacencyIndex,
}

pub fn graph_space(adj: &AdjacencyIndex) -> GraphSpace<'_> {
    GraphSpace { adj }
}

impl<'a> GraphSpace<'a> {
    pub fn adjacency(&self) -> &'a AdjacencyIndex {
        self.adj
    }

    fn check(&self, v: VertexId) -> Result<(), MetricError> {
        if v < self.adj.num_vertices() {
            Ok(())
        } else {
            Err(MetricError::UnknownVertex(v))
        }
    }
}

impl IntegerMetricSpace for GraphSpace<'_> {
    type Point = VertexId;

    fn distance(&self, p: &VertexId, q: &VertexId) -> Result<u32, MetricError> {
        self.check(*p)?;
        self.check(*q)?;
        graph_distance(self.adj, *p, *q).ok_or(MetricError::Unreachable)
    }

    fn unit_neighbors(&self, p: &VertexId) -> Result<Vec<VertexId>, MetricError> {
        self.check(*p)?;
        Ok(self.adj.neighbors(*p).to_vec())
    }

    fn is_adjacent(&self, p: &VertexId, q: &VertexId) -> bool {
        *p < self.adj.num_vertices() && *q < self.adj.num_vertices() && self.adj.is_adjacent(*p, *q)
    }

    fn distance_row(&self, p: &VertexId, targets: &[VertexId]) -> Result<Vec<u32>, MetricError> {
        self.check(*p)?;
        for t in targets {
            self.check(*t)?;
        }
        self.adj.distances_from(*p, targets).into_iter().map(|d| d.ok_or(MetricError::Unreachable)).collect()
    }

    fn points(&self) -> Option<Vec<VertexId>> {
        Some((0..self.adj.num_vertices()).collect())
    }
}

/// Integer lattice ℤᵈ with the ℓ¹ metric, restricted to a box.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Lattice {
    lower: Vec<i64>,
    upper: Vec<i64>,
}

pub fn l1_lattice_space(dimension: usize, bounds: &[(i64, i64)]) -> Result<L1Lattice, MetricError> {
    if dimension == 0 {
        return Err(MetricError::InvalidSpace("dimension must be at least 1".into()));
    }
    if bounds.len() != dimension {
        return Err(MetricError::InvalidSpace(format!("{} axis bounds given for dimension {dimension}", bounds.len())));
    }
    if let Some((axis, _)) = bounds.iter().enumerate().find(|(_, (lo, hi))| lo > hi) {
        return Err(MetricError::InvalidSpace(format!("empty range on axis {axis}")));
    }
    Ok(L1Lattice { lower: bounds.iter().map(|b| b.0).collect(), upper: bounds.iter().map(|b| b.1).collect() })
}

impl L1Lattice {
    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    fn contains(&self, p: &[i64]) -> bool {
        p.len() == self.dimension()
            && p.iter().zip(&self.lower).zip(&self.upper).all(|((x, lo), hi)| lo <= x && x <= hi)
    }

    fn check(&self, p: &[i64]) -> Result<(), MetricError> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(MetricError::OutOfBounds { point: format!("{p:?}") })
        }
    }
}

impl IntegerMetricSpace for L1Lattice {
    type Point = Vec<i64>;

    fn distance(&self, p: &Vec<i64>, q: &Vec<i64>) -> Result<u32, MetricError> {
        self.check(p)?;
        self.check(q)?;
        Ok(p.iter().zip(q).map(|(a, b)| a.abs_diff(*b)).sum::<u64>() as u32)
    }

    fn unit_neighbors(&self, p: &Vec<i64>) -> Result<Vec<Vec<i64>>, MetricError> {
        self.check(p)?;
        let mut out = Vec::with_capacity(2 * p.len());
        for axis in 0..p.len() {
            for step in [-1, 1] {
                let mut q = p.clone();
                q[axis] += step;
                if self.contains(&q) {
                    out.push(q);
                }
            }
        }
        out.sort();
        Ok(out)
    }

    fn points(&self) -> Option<Vec<Vec<i64>>> {
        let size: u128 = self.lower.iter().zip(&self.upper).map(|(lo, hi)| (hi - lo + 1) as u128).product();
        if size > 1 << 20 {
            return None;
        }
        let mut out = vec![Vec::new()];
        for (lo, hi) in self.lower.iter().zip(&self.upper) {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (*lo..=*hi).map(move |x| {
                        let mut p = prefix.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        Some(out)
    }
}

/// Fixed-length binary string, bit `i` stored in bit `i` of `bits`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: u8,
    bits: u64,
}

impl BitString {
    pub fn new(len: usize, bits: u64) -> Self {
        assert!(len <= 64, "bit strings hold at most 64 bits");
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        Self { len: len as u8, bits: bits & mask }
    }

    /// Parses a string of `0`/`1` characters, leftmost character first.
    pub fn parse(s: &str) -> Option<Self> {
        if s.len() > 64 {
            return None;
        }
        let mut bits = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return None,
            }
        }
        Some(Self::new(s.len(), bits))
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn flip(&self, i: usize) -> Self {
        Self { len: self.len, bits: self.bits ^ (1 << i) }
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.bits >> i & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Binary strings of one fixed length under Hamming distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HammingSpace {
    length: usize,
}

pub fn hamming_space(length: usize) -> Result<HammingSpace, MetricError> {
    if !(1..=64).contains(&length) {
        return Err(MetricError::InvalidSpace(format!("length {length} not in 1..=64")));
    }
    Ok(HammingSpace { length })
}

impl HammingSpace {
    pub fn length(&self) -> usize {
        self.length
    }

    fn check(&self, p: &BitString, q: &BitString) -> Result<(), MetricError> {
        if p.len() == self.length && q.len() == self.length {
            Ok(())
        } else {
            Err(MetricError::LengthMismatch { left: p.len(), right: q.len(), expected: self.length })
        }
    }
}

impl IntegerMetricSpace for HammingSpace {
    type Point = BitString;

    fn distance(&self, p: &BitString, q: &BitString) -> Result<u32, MetricError> {
        self.check(p, q)?;
        Ok((p.bits ^ q.bits).count_ones())
    }

    fn unit_neighbors(&self, p: &BitString) -> Result<Vec<BitString>, MetricError> {
        self.check(p, p)?;
        let mut out: Vec<_> = (0..self.length).map(|i| p.flip(i)).collect();
        out.sort();
        Ok(out)
    }

    fn points(&self) -> Option<Vec<BitString>> {
        (self.length <= 16).then(|| (0..1u64 << self.length).map(|b| BitString::new(self.length, b)).collect())
    }
}
