//! Dense O(n³) Hungarian algorithm (shortest augmenting path with
//! potentials) over real costs.

use nalgebra::DMatrix;

/// Minimum-cost perfect matching on a square cost matrix.
///
/// Returns `assign` with row `i` matched to column `assign[i]`.
pub fn min_cost_assignment(costs: &DMatrix<f64>) -> Vec<usize> {
    let n = costs.nrows();
    assert_eq!(n, costs.ncols(), "assignment needs a square cost matrix");
    if n == 0 {
        return Vec::new();
    }

    // 1-based arrays; index 0 is the virtual root column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = costs[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assign = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Maximum-weight perfect matching; row `i` goes to column `assign[i]`.
pub fn max_weight_assignment(weights: &DMatrix<f64>) -> Vec<usize> {
    min_cost_assignment(&weights.map(|w| -w))
}
