//! Euclidean projection onto the probability simplex and onto row-stochastic
//! matrices.

use ndarray::{Array2, ArrayView2};

use crate::instance::FractionalAllocation;

/// Rows within this distance of the simplex are left untouched.
const ON_SIMPLEX_TOL: f64 = 1e-12;

/// Projects `v` onto `{w >= 0, sum w = 1}` in place (sort-based, exact).
pub fn project_simplex(v: &mut [f64]) {
    if v.is_empty() {
        return;
    }
    let sum: f64 = v.iter().sum();
    if v.iter().all(|&x| x >= 0.0) && (sum - 1.0).abs() <= ON_SIMPLEX_TOL {
        return;
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            tau = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - tau).max(0.0);
    }
}

/// Row-wise projection of an `n x m` matrix onto row-stochastic matrices.
pub fn project_row_stochastic(x_raw: ArrayView2<'_, f64>) -> FractionalAllocation {
    let mut x = x_raw.to_owned();
    project_rows_in_place(&mut x);
    FractionalAllocation::from_array_unchecked(x)
}

pub(crate) fn project_rows_in_place(x: &mut Array2<f64>) {
    for mut row in x.rows_mut() {
        match row.as_slice_mut() {
            Some(s) => project_simplex(s),
            None => {
                let mut tmp = row.to_vec();
                project_simplex(&mut tmp);
                row.iter_mut().zip(tmp).for_each(|(d, s)| *d = s);
            }
        }
    }
}
