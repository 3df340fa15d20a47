use std::ops::Range;

use crate::contraction::{wired_contract, ContractionError, WiredContraction};
use crate::network::{Conductance, EdgeId, Network, NetworkError, VertexId};
use crate::source::{Incidence, NetworkSource, SourceError};

/// Children of vertex `i` in the breadth-first numbering of the `k`-regular
/// tree: the root 0 has children `1..=k`, every other vertex has `k − 1`.
pub fn regular_tree_children(k: u64, i: u64) -> Option<Range<u64>> {
    if i == 0 {
        return Some(1..k + 1);
    }
    let start = (i - 1).checked_mul(k - 1)?.checked_add(k + 1)?;
    Some(start..start.checked_add(k - 1)?)
}

pub fn regular_tree_parent(k: u64, c: u64) -> Option<u64> {
    match c {
        0 => None,
        c if c <= k => Some(0),
        c => Some((c - k - 1) / (k - 1) + 1),
    }
}

/// Neighbors of `i` in the `k`-regular tree, parent first. The edge to a
/// vertex's parent carries the vertex's id.
pub(crate) fn regular_tree_adjacency(k: u64, i: u64) -> Option<Vec<(EdgeId, u64)>> {
    let mut out = Vec::with_capacity(k as usize);
    if let Some(p) = regular_tree_parent(k, i) {
        out.push((EdgeId(i), p));
    }
    out.extend(regular_tree_children(k, i)?.map(|c| (EdgeId(c), c)));
    Some(out)
}

/// Lazy `k`-regular tree with unit conductances, rooted at vertex 0.
#[derive(Clone, Debug)]
pub struct RegularTreeSource {
    degree: u64,
}

impl RegularTreeSource {
    pub fn new(degree: u64) -> Result<Self, SourceError> {
        if degree < 2 {
            return Err(SourceError::BadParameters(format!("degree {degree} below 2")));
        }
        Ok(RegularTreeSource { degree })
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }
}

impl NetworkSource for RegularTreeSource {
    fn root(&self) -> VertexId {
        VertexId(0)
    }

    fn neighbors(&self, v: VertexId) -> Result<Vec<Incidence>, SourceError> {
        let adj = regular_tree_adjacency(self.degree, v.0).ok_or(SourceError::UnknownVertex(v.0))?;
        Ok(adj
            .into_iter()
            .map(|(edge, other)| Incidence {
                edge,
                conductance: Conductance::one(),
                other: VertexId(other),
            })
            .collect())
    }
}

const COORD_BITS: u32 = 16;
const OFFSET: i64 = 1 << (COORD_BITS - 1);

/// The lattice `Z^d` (`d ≤ 3`) with unit conductances, rooted at the origin.
/// Coordinates are packed into 16-bit fields offset by `2^15`; the edge from
/// `x` to `x + e_i` has id `4·id(x) + i`.
#[derive(Clone, Debug)]
pub struct ZdSource {
    dim: usize,
}

impl ZdSource {
    pub fn new(dim: usize) -> Result<Self, SourceError> {
        if !(1..=3).contains(&dim) {
            return Err(SourceError::BadParameters(format!("dimension {dim} outside 1..=3")));
        }
        Ok(ZdSource { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn encode(&self, coords: &[i64]) -> Option<VertexId> {
        if coords.len() != self.dim {
            return None;
        }
        let mut id = 0u64;
        for (i, &x) in coords.iter().enumerate() {
            let shifted = x + OFFSET;
            if !(0..1 << COORD_BITS).contains(&shifted) {
                return None;
            }
            id |= (shifted as u64) << (COORD_BITS * i as u32);
        }
        Some(VertexId(id))
    }

    pub fn decode(&self, v: VertexId) -> Option<Vec<i64>> {
        if v.0 >> (COORD_BITS * self.dim as u32) != 0 {
            return None;
        }
        Some(
            (0..self.dim)
                .map(|i| ((v.0 >> (COORD_BITS * i as u32)) & 0xffff) as i64 - OFFSET)
                .collect(),
        )
    }
}

impl NetworkSource for ZdSource {
    fn root(&self) -> VertexId {
        self.encode(&vec![0; self.dim]).expect("origin is encodable")
    }

    fn neighbors(&self, v: VertexId) -> Result<Vec<Incidence>, SourceError> {
        let x = self.decode(v).ok_or(SourceError::UnknownVertex(v.0))?;
        let mut out = Vec::with_capacity(2 * self.dim);
        for axis in 0..self.dim {
            for step in [-1, 1] {
                let mut y = x.clone();
                y[axis] += step;
                let w = self.encode(&y).ok_or(SourceError::UnknownVertex(v.0))?;
                let low = if step < 0 { w } else { v };
                out.push(Incidence {
                    edge: EdgeId(low.0 * 4 + axis as u64),
                    conductance: Conductance::one(),
                    other: w,
                });
            }
        }
        Ok(out)
    }

    fn is_recurrent(&self) -> bool {
        self.dim <= 2
    }
}

/// The box `{0, …, side−1}^d` with unit conductances. Vertex ids are
/// lexicographic indices with the first coordinate varying fastest.
pub fn zd_box(dim: usize, side: u64) -> Result<Network, NetworkError> {
    if dim == 0 || side == 0 {
        return Err(NetworkError::Empty);
    }
    let count = side.checked_pow(dim as u32).ok_or(NetworkError::Empty)?;
    let mut builder = Network::builder();
    for id in 0..count {
        builder = builder.vertex(id);
    }
    let mut stride = 1;
    for _ in 0..dim {
        for id in 0..count {
            if (id / stride) % side + 1 < side {
                builder = builder.unit_edge(id, id + stride);
            }
        }
        stride *= side;
    }
    builder.build()
}

/// [`zd_box`] with everything outside the inner box `{m, …, side−1−m}^d`
/// wired to `∂`.
pub fn zd_box_wired(dim: usize, side: u64, margin: u64) -> Result<WiredContraction, ContractionError> {
    let g = zd_box(dim, side)?;
    let inside = |id: u64| {
        let mut rest = id;
        (0..dim).all(|_| {
            let x = rest % side;
            rest /= side;
            x >= margin && x + margin < side
        })
    };
    let keep: Vec<VertexId> = g.vertex_ids().iter().copied().filter(|v| inside(v.0)).collect();
    wired_contract(&g, &keep)
}
