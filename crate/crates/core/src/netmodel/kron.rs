use num_complex::Complex64;

use super::ReducedAdmittance;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Kron reduction `Y_rr - Y_re Y_ee⁻¹ Y_er`, keeping `retained` in the order
/// given.
///
/// Buses are eliminated one at a time, always taking the remaining eliminated
/// bus with the largest diagonal; this preserves symmetry. If no usable
/// diagonal pivot remains, a pivoted LU of the leftover block is tried before
/// reporting the offending bus.
pub fn kron_reduce(y_full: &CMatrix, retained: &[usize]) -> Result<ReducedAdmittance> {
    let n = y_full.nrows();
    if !y_full.is_square() {
        return Err(Error::Dimension(format!(
            "admittance must be square, got {}x{}",
            y_full.nrows(),
            y_full.ncols()
        )));
    }
    let mut keep = vec![false; n];
    for &r in retained {
        if r >= n {
            return Err(Error::Dimension(format!("retained bus {r} out of range 0..{n}")));
        }
        if keep[r] {
            return Err(Error::Dimension(format!("retained bus {r} listed twice")));
        }
        keep[r] = true;
    }
    let scale = y_full.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut w = y_full.clone();
    let mut pending: Vec<usize> = (0..n).filter(|&i| !keep[i]).collect();
    let mut alive: Vec<bool> = vec![true; n];

    while !pending.is_empty() {
        let (slot, &k) = pending
            .iter()
            .enumerate()
            .max_by(|a, b| w[(*a.1, *a.1)].norm().total_cmp(&w[(*b.1, *b.1)].norm()))
            .expect("pending is non-empty");
        let pivot = w[(k, k)];
        if pivot.norm() <= 1e-13 * scale {
            return finish_with_lu(&w, &pending, retained, k);
        }
        pending.swap_remove(slot);
        alive[k] = false;
        let live: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
        let col: Vec<Complex64> = live.iter().map(|&i| w[(i, k)] / pivot).collect();
        for (a, &i) in live.iter().enumerate() {
            if col[a] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for &j in &live {
                let d = col[a] * w[(k, j)];
                w[(i, j)] -= d;
            }
        }
    }
    let m = retained.len();
    Ok(ReducedAdmittance::new(CMatrix::from_fn(m, m, |i, j| {
        w[(retained[i], retained[j])]
    })))
}

fn finish_with_lu(
    w: &CMatrix,
    pending: &[usize],
    retained: &[usize],
    offending: usize,
) -> Result<ReducedAdmittance> {
    let e = pending.len();
    let m = retained.len();
    let yee = CMatrix::from_fn(e, e, |i, j| w[(pending[i], pending[j])]);
    let yer = CMatrix::from_fn(e, m, |i, j| w[(pending[i], retained[j])]);
    let yre = CMatrix::from_fn(m, e, |i, j| w[(retained[i], pending[j])]);
    let yrr = CMatrix::from_fn(m, m, |i, j| w[(retained[i], retained[j])]);
    let lu = yee.full_piv_lu();
    let scale = w.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let u = lu.u();
    let min_pivot = (0..e).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if min_pivot <= 1e-13 * scale {
        return Err(Error::ReductionFailure { pivot: offending });
    }
    let x = lu
        .solve(&yer)
        .ok_or(Error::ReductionFailure { pivot: offending })?;
    Ok(ReducedAdmittance::new(yrr - yre * x))
}
