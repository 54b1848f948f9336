use ndarray::Array2;

use crate::Matrix;

/// Sinusoidal encoding of integer codes: each value `v` becomes
/// `[sin(v / 10000^(k/K)), cos(v / 10000^(k/K))]` for `k = 0..K`, and the
/// pairs of all columns are concatenated, giving `cols * 2K` features.
pub fn positional_encode(codes: &[Vec<i32>], frequencies: usize) -> Matrix {
    let cols = codes.first().map_or(0, |r| r.len());
    let mut out = Array2::zeros((codes.len(), cols * 2 * frequencies));
    for (r, row) in codes.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            for k in 0..frequencies {
                let angle = v as f64 / 10000f64.powf(k as f64 / frequencies as f64);
                let base = (c * frequencies + k) * 2;
                out[[r, base]] = angle.sin();
                out[[r, base + 1]] = angle.cos();
            }
        }
    }
    out
}
