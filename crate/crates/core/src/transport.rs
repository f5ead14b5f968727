//! Exact Wasserstein-1 distance between finite measures.
//!
//! The transportation problem is solved by the primal transportation simplex
//! (MODI method): a northwest-corner basis of `m + n − 1` cells, potentials
//! `u_i + v_j = c_ij` on the basis tree, and cycle pivots on the most negative
//! reduced cost. After a run of degenerate pivots the entering and leaving
//! choices switch to lowest-index rules, which cannot cycle.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;

/// Largest atom count accepted on either side.
pub const MAX_ATOMS: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransportPlan {
    /// `(i, j, mass)` with `i` indexing the source atoms and `j` the target.
    pub flows: Vec<(usize, usize, f64)>,
    pub cost: f64,
}

/// Optimal transport cost with Euclidean ground cost, and an optimal plan.
pub fn wasserstein1(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<(f64, TransportPlan)> {
    for m in [mu, nu] {
        if m.atoms.len() > MAX_ATOMS {
            return Err(Error::TooManyAtoms { atoms: m.atoms.len(), limit: MAX_ATOMS });
        }
    }
    let (tm, tn) = (mu.total(), nu.total());
    if (tm - tn).abs() > 1e-9 * tm.max(tn) {
        return Err(Error::Unbalanced { left: tm, right: tn });
    }
    // Zero-mass atoms never carry flow; drop them and map indices back.
    let rows: Vec<usize> = (0..mu.atoms.len()).filter(|&i| mu.masses[i] > 0.0).collect();
    let cols: Vec<usize> = (0..nu.atoms.len()).filter(|&j| nu.masses[j] > 0.0).collect();
    if rows.is_empty() || cols.is_empty() {
        return Ok((0.0, TransportPlan { flows: Vec::new(), cost: 0.0 }));
    }
    let cost: Vec<Vec<f64>> =
        rows.iter().map(|&i| cols.iter().map(|&j| mu.atoms[i].dist(&nu.atoms[j])).collect()).collect();
    let supply: Vec<f64> = rows.iter().map(|&i| mu.masses[i]).collect();
    let demand: Vec<f64> = cols.iter().map(|&j| nu.masses[j]).collect();
    let basis = solve(&cost, &supply, &demand);
    let mut flows: Vec<(usize, usize, f64)> =
        basis.into_iter().filter(|c| c.2 > 0.0).map(|(i, j, x)| (rows[i], cols[j], x)).collect();
    flows.sort_by_key(|f| (f.0, f.1));
    let total: f64 = flows.iter().map(|&(i, j, x)| x * mu.atoms[i].dist(&nu.atoms[j])).sum();
    Ok((total, TransportPlan { flows, cost: total }))
}

/// Basic cells `(i, j, flow)` of an optimal solution.
fn solve(cost: &[Vec<f64>], supply: &[f64], demand: &[f64]) -> Vec<(usize, usize, f64)> {
    let (m, n) = (supply.len(), demand.len());
    let mut basis = northwest_corner(supply, demand);
    let scale = cost.iter().flatten().fold(0.0f64, |a, &c| a.max(c)).max(1.0);
    let tol = 1e-12 * scale;
    let mut degenerate_run = 0usize;
    let max_pivots = 50 * (m + n) * (m + n) + 1000;
    for _ in 0..max_pivots {
        let (u, v) = potentials(&basis, cost, m, n);
        let bland = degenerate_run > m + n;
        let mut enter: Option<(usize, usize)> = None;
        let mut best = -tol;
        'scan: for i in 0..m {
            for j in 0..n {
                let rc = cost[i][j] - u[i] - v[j];
                if rc < best {
                    enter = Some((i, j));
                    if bland {
                        break 'scan;
                    }
                    best = rc;
                }
            }
        }
        let Some((ei, ej)) = enter else { break };
        let cycle = cycle_through(&basis, m, n, ei, ej);
        // Cells at odd positions lose flow.
        let mut leave = None;
        for (k, &b) in cycle.iter().enumerate().skip(1).step_by(2) {
            let x = basis[b].2;
            let better = match leave {
                None => true,
                Some((_, lx, lb)) => {
                    let (bi, bj, _): (usize, usize, f64) = basis[b];
                    let (li, lj, _) = basis[lb];
                    x < lx || (x == lx && bland && (bi, bj) < (li, lj))
                }
            };
            if better {
                leave = Some((k, x, b));
            }
        }
        let (_, theta, leave_b) = leave.expect("cycle has a losing cell");
        degenerate_run = if theta == 0.0 { degenerate_run + 1 } else { 0 };
        for (k, &b) in cycle.iter().enumerate().skip(1) {
            if k % 2 == 1 {
                basis[b].2 -= theta;
            } else {
                basis[b].2 += theta;
            }
        }
        basis[leave_b] = (ei, ej, theta);
    }
    basis
}

fn northwest_corner(supply: &[f64], demand: &[f64]) -> Vec<(usize, usize, f64)> {
    let (m, n) = (supply.len(), demand.len());
    let (mut s, mut d) = (supply.to_vec(), demand.to_vec());
    let mut out = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0, 0);
    while i < m && j < n {
        let x = if i == m - 1 {
            d[j]
        } else if j == n - 1 {
            s[i]
        } else {
            s[i].min(d[j])
        };
        out.push((i, j, x.max(0.0)));
        s[i] -= x;
        d[j] -= x;
        if i == m - 1 {
            j += 1;
        } else if j == n - 1 || s[i] <= d[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Tree adjacency over nodes `0..m` (rows) and `m..m+n` (columns); each
/// entry is `(neighbour, basis cell)`.
fn adjacency(basis: &[(usize, usize, f64)], m: usize, n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); m + n];
    for (b, &(i, j, _)) in basis.iter().enumerate() {
        adj[i].push((m + j, b));
        adj[m + j].push((i, b));
    }
    adj
}

fn potentials(basis: &[(usize, usize, f64)], cost: &[Vec<f64>], m: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let adj = adjacency(basis, m, n);
    let mut pot = vec![f64::NAN; m + n];
    let mut stack = Vec::new();
    for root in 0..m + n {
        if !pot[root].is_nan() {
            continue;
        }
        pot[root] = 0.0;
        stack.push(root);
        while let Some(a) = stack.pop() {
            for &(b, cell) in &adj[a] {
                if pot[b].is_nan() {
                    let (i, j, _) = basis[cell];
                    pot[b] = cost[i][j] - pot[a];
                    stack.push(b);
                }
            }
        }
    }
    let v = pot.split_off(m);
    (pot, v)
}

/// Basis cells on the tree path from column `ej` to row `ei`, preceded by a
/// placeholder for the entering cell so that odd positions lose flow.
fn cycle_through(basis: &[(usize, usize, f64)], m: usize, n: usize, ei: usize, ej: usize) -> Vec<usize> {
    let adj = adjacency(basis, m, n);
    let start = m + ej;
    let mut parent = vec![usize::MAX; m + n];
    let mut via = vec![usize::MAX; m + n];
    parent[start] = start;
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(a) = queue.pop_front() {
        if a == ei {
            break;
        }
        for &(b, cell) in &adj[a] {
            if parent[b] == usize::MAX {
                parent[b] = a;
                via[b] = cell;
                queue.push_back(b);
            }
        }
    }
    // Walk back from the row to the column: the first cell touches row `ei`
    // and loses flow.
    let mut path = vec![usize::MAX];
    let mut node = ei;
    while node != start {
        path.push(via[node]);
        node = parent[node];
    }
    path
}
