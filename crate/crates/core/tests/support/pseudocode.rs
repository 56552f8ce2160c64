//! The witness complex at one scale, built by the plain nested loops: for
//! every witness, every landmark subset whose members are all within `eps`
//! of the witness's nearest landmark joins the complex. Shared by test
//! targets in more than one crate.

use std::collections::BTreeSet;

/// Simplices (sorted vertex lists) of dimension at most `max_dim` over the
/// landmark-by-witness distances `d[l][w]`.
#[allow(clippy::needless_range_loop)]
pub fn witness_complex(d: &[Vec<f64>], eps: f64, max_dim: usize) -> BTreeSet<Vec<u32>> {
    let landmarks = d.len();
    let witnesses = d.first().map_or(0, Vec::len);
    let mut out: BTreeSet<Vec<u32>> = (0..landmarks as u32).map(|l| vec![l]).collect();
    for w in 0..witnesses {
        let nearest = (0..landmarks).map(|l| d[l][w]).fold(f64::INFINITY, f64::min);
        let bound = nearest + eps;
        let close = |l: usize| d[l][w] <= bound;
        // Edges.
        for i in 0..landmarks {
            for j in i + 1..landmarks {
                if close(i) && close(j) {
                    out.insert(vec![i as u32, j as u32]);
                }
            }
        }
        if max_dim < 2 {
            continue;
        }
        // Triangles.
        for i in 0..landmarks {
            for j in i + 1..landmarks {
                for k in j + 1..landmarks {
                    if close(i) && close(j) && close(k) {
                        out.insert(vec![i as u32, j as u32, k as u32]);
                    }
                }
            }
        }
        // Higher dimensions: every (max_dim + 1)-subset, by the same test.
        for size in 4..=max_dim + 1 {
            let mut idx: Vec<usize> = (0..size).collect();
            if size > landmarks {
                break;
            }
            loop {
                if idx.iter().all(|&l| close(l)) {
                    out.insert(idx.iter().map(|&l| l as u32).collect());
                }
                // Next combination in lexicographic order.
                let mut p = size;
                while p > 0 && idx[p - 1] == landmarks - size + p - 1 {
                    p -= 1;
                }
                if p == 0 {
                    break;
                }
                idx[p - 1] += 1;
                for q in p..size {
                    idx[q] = idx[q - 1] + 1;
                }
            }
        }
    }
    out
}
