//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;

/// Truncated SVD pseudoinverse.
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    pub pinv: DMatrix<f64>,
    pub sigma_max: f64,
    /// Smallest of the `min(rows, cols)` singular values.
    pub sigma_min: f64,
    /// Number of singular values kept (those above `rtol * sigma_max`).
    pub rank: usize,
}

impl PseudoInverse {
    pub fn is_full_rank(&self) -> bool {
        self.rank == self.pinv.nrows().min(self.pinv.ncols())
    }
}

/// Pseudoinverse of `a`, dropping singular values below `rtol * sigma_max`.
pub fn pinv(a: &DMatrix<f64>, rtol: f64) -> PseudoInverse {
    let (rows, cols) = a.shape();
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd computed with u");
    let v_t = svd.v_t.as_ref().expect("svd computed with v_t");
    let sv = &svd.singular_values;

    let sigma_max = sv.iter().cloned().fold(0.0, f64::max);
    let sigma_min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let cutoff = rtol * sigma_max;

    let mut out = DMatrix::zeros(cols, rows);
    let mut rank = 0;
    for (i, &s) in sv.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            rank += 1;
            out += v_t.row(i).transpose() * u.column(i).transpose() * (1.0 / s);
        }
    }
    PseudoInverse {
        pinv: out,
        sigma_max,
        sigma_min: if sv.is_empty() { 0.0 } else { sigma_min },
        rank,
    }
}

/// Largest absolute entry of `a - a^T`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    (a - a.transpose()).amax()
}
