use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::network::Network;

/// Weighted spanning-tree total `Σ_t ∏_{e∈t} c(e)` via the matrix-tree
/// theorem: the determinant of the Laplacian with its first row and column
/// removed. Self-loops do not enter the Laplacian.
pub fn kirchhoff_total(g: &Network) -> BigRational {
    let n = g.vertex_count();
    if n <= 1 {
        return BigRational::one();
    }
    let m = n - 1;
    let mut a = vec![vec![BigRational::zero(); m]; m];
    for edge in g.edges() {
        if edge.is_self_loop() {
            continue;
        }
        let c = edge.conductance.exact();
        let (u, v) = (edge.u.index(), edge.v.index());
        // vertex 0 is the removed row/column
        if u > 0 {
            a[u - 1][u - 1] += c;
        }
        if v > 0 {
            a[v - 1][v - 1] += c;
        }
        if u > 0 && v > 0 {
            a[u - 1][v - 1] -= c;
            a[v - 1][u - 1] -= c;
        }
    }
    determinant(a)
}

fn determinant(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let m = a.len();
    let mut det = BigRational::one();
    for col in 0..m {
        let Some(pivot) = (col..m).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..m {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &p;
            for k in col..m {
                let delta = &factor * &a[col][k];
                a[r][k] -= delta;
            }
        }
    }
    det
}
