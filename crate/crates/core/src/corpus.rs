//! Small wired contractions used for exact certification: at most five kept
//! vertices, at most eight edges, mixed rational conductances.

use crate::contraction::{truncate, wired_contract, ContractionError, WiredContraction};
use crate::generators::{RegularTreeSource, ZdSource};
use crate::network::{Network, VertexId};

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub contraction: WiredContraction,
}

// vertices 90 and up are always outside the kept set
fn contract(edges: &[(u64, u64, &str)], keep: &[u64]) -> Result<WiredContraction, ContractionError> {
    let g = edges
        .iter()
        .fold(Network::builder(), |b, &(u, v, c)| b.edge(u, v, c))
        .build()?;
    let keep: Vec<VertexId> = keep.iter().copied().map(VertexId).collect();
    wired_contract(&g, &keep)
}

pub fn corpus() -> Result<Vec<CorpusEntry>, ContractionError> {
    let mut out = Vec::new();
    let mut add = |name: &'static str, c: WiredContraction| out.push(CorpusEntry { name, contraction: c });

    add("parallel-2", contract(&[(0, 90, "1"), (0, 90, "3")], &[0])?);
    add(
        "parallel-3-loop",
        contract(&[(0, 90, "1/2"), (0, 90, "1/3"), (0, 90, "2"), (0, 0, "5/2")], &[0])?,
    );
    add(
        "path-3",
        contract(&[(90, 0, "1"), (0, 1, "2.5"), (1, 2, "1/3"), (2, 91, "1")], &[0, 1, 2])?,
    );
    add(
        "triangle-pendant",
        contract(
            &[(0, 1, "1"), (1, 2, "2"), (2, 0, "3"), (2, 90, "0.5"), (90, 91, "9")],
            &[0, 1, 2],
        )?,
    );
    add(
        "triangle-tail",
        contract(
            &[(0, 1, "1"), (1, 2, "2"), (2, 0, "3"), (2, 3, "0.5"), (3, 90, "1/4"), (0, 91, "3/2")],
            &[0, 1, 2, 3],
        )?,
    );
    add(
        "k4-wired",
        contract(
            &[
                (0, 1, "1"),
                (0, 2, "2"),
                (0, 3, "3"),
                (1, 2, "1/2"),
                (1, 3, "1/3"),
                (2, 3, "3/2"),
                (0, 90, "1"),
                (3, 91, "2/3"),
            ],
            &[0, 1, 2, 3],
        )?,
    );
    add(
        "square-diagonal",
        contract(
            &[
                (0, 1, "1"),
                (1, 2, "2"),
                (2, 3, "0.75"),
                (3, 0, "1/5"),
                (0, 2, "5/3"),
                (1, 90, "1"),
                (3, 91, "0.25"),
            ],
            &[0, 1, 2, 3],
        )?,
    );
    add(
        "star-5",
        contract(
            &[
                (0, 1, "1"),
                (0, 2, "1/2"),
                (0, 3, "2"),
                (0, 4, "0.75"),
                (1, 90, "1/3"),
                (2, 91, "4"),
            ],
            &[0, 1, 2, 3, 4],
        )?,
    );
    add(
        "multi-edge-pair",
        contract(
            &[
                (0, 1, "1"),
                (0, 1, "1/2"),
                (0, 1, "2"),
                (1, 90, "1/3"),
                (1, 90, "3"),
                (0, 91, "1.25"),
            ],
            &[0, 1],
        )?,
    );
    add(
        "five-path-loop",
        contract(
            &[
                (0, 1, "1"),
                (1, 2, "2"),
                (2, 3, "1/2"),
                (3, 4, "3"),
                (4, 90, "1/4"),
                (0, 91, "1"),
                (2, 2, "7/3"),
            ],
            &[0, 1, 2, 3, 4],
        )?,
    );
    add("line-window", truncate(&ZdSource::new(1)?, 1)?);
    add("tree-star", truncate(&RegularTreeSource::new(3)?, 0)?);
    Ok(out)
}
