//! Closure and reduction of precedence relations over `n` indexed nodes.

use std::collections::BTreeSet;

use super::PowlError;

fn reachability(edges: &BTreeSet<(usize, usize)>, n: usize) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; n]; n];
    for &(s, t) in edges {
        reach[s][t] = true;
    }
    // Warshall
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                let row = reach[k].clone();
                for (r, &via) in reach[i].iter_mut().zip(&row) {
                    *r |= via;
                }
            }
        }
    }
    reach
}

/// Smallest transitive relation containing `edges`. Endpoints must be `< n`.
pub fn transitive_closure(edges: &BTreeSet<(usize, usize)>, n: usize) -> BTreeSet<(usize, usize)> {
    let reach = reachability(edges, n);
    let mut out = BTreeSet::new();
    for (i, row) in reach.iter().enumerate() {
        for (j, &r) in row.iter().enumerate() {
            if r {
                out.insert((i, j));
            }
        }
    }
    out
}

/// True when the closure of `edges` relates some node to itself.
pub fn has_cycle(edges: &BTreeSet<(usize, usize)>, n: usize) -> bool {
    let reach = reachability(edges, n);
    (0..n).any(|i| reach[i][i])
}

/// Minimal edge set with the same closure. Fails on cyclic input, where the
/// reduction is not unique.
pub fn transitive_reduction(
    edges: &BTreeSet<(usize, usize)>,
    n: usize,
) -> Result<BTreeSet<(usize, usize)>, PowlError> {
    let reach = reachability(edges, n);
    if (0..n).any(|i| reach[i][i]) {
        return Err(PowlError::CycleInPartialOrder);
    }
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if reach[i][j] && !(0..n).any(|k| reach[i][k] && reach[k][j]) {
                out.insert((i, j));
            }
        }
    }
    Ok(out)
}
