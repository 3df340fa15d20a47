#![allow(dead_code)]

use std::collections::BTreeSet;

use cyclebreak_core::contraction::{wired_contract, WiredContraction};
use cyclebreak_core::forest::OrientedForest;
use cyclebreak_core::network::{EdgeIndex, Network, OrientedEdge, VertexId};
use cyclebreak_core::update::{update, UpdateCase};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const CONDUCTANCES: [&str; 7] = ["1", "1/2", "2", "3/4", "5/3", "0.25", "3"];

/// Random connected multigraph on kept vertices `0..k` and one outside
/// vertex 90, wired at 90. Loops and parallel edges appear freely.
pub fn random_contraction<R: Rng>(rng: &mut R, k: usize, extra: usize) -> WiredContraction {
    let labels: Vec<u64> = std::iter::once(90).chain(0..k as u64).collect();
    let mut b = Network::builder();
    for i in 1..labels.len() {
        let j = rng.random_range(0..i);
        b = b.edge(labels[i], labels[j], CONDUCTANCES.choose(rng).unwrap());
    }
    for _ in 0..extra {
        let u = *labels.choose(rng).unwrap();
        let v = *labels.choose(rng).unwrap();
        b = b.edge(u, v, CONDUCTANCES.choose(rng).unwrap());
    }
    let g = b.build().unwrap();
    let keep: Vec<VertexId> = (0..k as u64).map(VertexId).collect();
    wired_contract(&g, &keep).unwrap()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Every spanning tree with its weight, by checking all edge subsets.
pub fn brute_force_trees(g: &Network) -> Vec<(BTreeSet<EdgeIndex>, BigRational)> {
    let m = g.edge_count();
    let n = g.vertex_count();
    assert!(m <= 20, "brute force limited to 20 edges");
    let mut out = Vec::new();
    for mask in 0u32..1 << m {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        let mut weight = BigRational::one();
        let mut ok = true;
        for i in (0..m).filter(|i| mask >> i & 1 == 1) {
            let e = &g.edges()[i];
            let (a, b) = (find(&mut parent, e.u.index()), find(&mut parent, e.v.index()));
            if a == b {
                ok = false;
                break;
            }
            parent[a] = b;
            weight *= g.conductance(EdgeIndex::new(i)).exact();
        }
        if ok {
            let edges = (0..m).filter(|i| mask >> i & 1 == 1).map(EdgeIndex::new).collect();
            out.push((edges, weight));
        }
    }
    out
}

pub fn brute_force_total(g: &Network) -> BigRational {
    brute_force_trees(g).into_iter().fold(BigRational::zero(), |s, (_, w)| s + w)
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Checks one update against its defining properties: the unoriented
/// identity `f ∪ {e} \ {d}`, validity of the output, and that updating the
/// output at whichever of `d`, `−d` leaves `tail(e)` gives back `f`.
pub fn check_update_pair(g: &Network, f: &OrientedForest, e: OrientedEdge) -> Result<UpdateCase, String> {
    let out = update(g, f, e).map_err(|err| err.to_string())?;
    out.forest.validate(g).map_err(|err| format!("invalid output: {err}"))?;
    let before = f.unoriented();
    let after = out.forest.unoriented();
    match out.case {
        UpdateCase::NoOp => {
            if out.forest != *f {
                return Err("no-op changed the forest".into());
            }
            return Ok(out.case);
        }
        _ => {
            let d = out.deleted.ok_or("missing deleted edge")?;
            let mut expected = before.clone();
            expected.insert(e.edge);
            expected.remove(&d.edge);
            if after != expected {
                return Err(format!("unoriented identity fails: {before:?} + {e:?} - {d:?} gave {after:?}"));
            }
            let v = g.tail(e);
            let back = if g.tail(d) == v { d } else { d.reversal() };
            if g.tail(back) != v {
                return Err(format!("deleted edge {d:?} is not incident to the tail"));
            }
            let restored = update(g, &out.forest, back).map_err(|err| err.to_string())?;
            if restored.forest != *f {
                return Err("updating at the deleted edge does not give back the forest".into());
            }
        }
    }
    Ok(out.case)
}
