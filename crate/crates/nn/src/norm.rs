use ndarray::{Array2, Axis};

use crate::error::{shape_err, Result};
use crate::{Matrix, ParamId, ParamStore};

const EPS: f64 = 1e-5;

/// Row-wise layer normalization with learned gain and shift.
#[derive(Clone, Debug)]
pub struct LayerNorm {
    pub gain: ParamId,
    pub shift: ParamId,
    pub dim: usize,
}

#[derive(Clone, Debug)]
pub struct LayerNormCache {
    normalized: Matrix,
    inv_std: Vec<f64>,
}

impl LayerNorm {
    pub fn new(store: &mut ParamStore, name: &str, dim: usize) -> Result<Self> {
        let gain = store.add_filled(format!("{name}.gain"), 1, dim, 1.0)?;
        let shift = store.add_filled(format!("{name}.shift"), 1, dim, 0.0)?;
        Ok(Self { gain, shift, dim })
    }

    pub fn forward(&self, store: &ParamStore, x: &Matrix) -> Result<(Matrix, LayerNormCache)> {
        if x.ncols() != self.dim {
            return shape_err(format!("layer norm expects {} columns, got {}", self.dim, x.ncols()));
        }
        let mut normalized = Array2::zeros(x.raw_dim());
        let mut inv_std = Vec::with_capacity(x.nrows());
        for (row, mut out) in x.axis_iter(Axis(0)).zip(normalized.axis_iter_mut(Axis(0))) {
            let mean = row.mean().unwrap_or(0.0);
            let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / self.dim as f64;
            let s = 1.0 / (var + EPS).sqrt();
            out.assign(&row.mapv(|v| (v - mean) * s));
            inv_std.push(s);
        }
        let y = &normalized * store.value(self.gain) + store.value(self.shift);
        Ok((y, LayerNormCache { normalized, inv_std }))
    }

    pub fn backward(&self, store: &mut ParamStore, cache: &LayerNormCache, dy: &Matrix) -> Matrix {
        store.accumulate(self.gain, &(dy * &cache.normalized).sum_axis(Axis(0)).insert_axis(Axis(0)));
        store.accumulate(self.shift, &dy.sum_axis(Axis(0)).insert_axis(Axis(0)));
        let dxhat = dy * store.value(self.gain);
        let d = self.dim as f64;
        let mut dx = Array2::zeros(dy.raw_dim());
        for (r, mut out) in dx.axis_iter_mut(Axis(0)).enumerate() {
            let g = dxhat.row(r);
            let xh = cache.normalized.row(r);
            let sum_g = g.sum();
            let sum_gx = g.dot(&xh);
            let s = cache.inv_std[r];
            for c in 0..self.dim {
                out[c] = s / d * (d * g[c] - sum_g - xh[c] * sum_gx);
            }
        }
        dx
    }
}
