use ndarray::{s, Array2};
use rand::Rng;

use crate::error::{shape_err, Result};
use crate::linear::{Linear, LinearCache};
use crate::{Matrix, ParamStore};

/// Multi-head scaled dot-product attention with query, key, value and
/// output projections. Keys can be masked out; a query with no visible key
/// attends to nothing and receives only the output bias.
#[derive(Clone, Debug)]
pub struct MultiHeadAttention {
    pub query: Linear,
    pub key: Linear,
    pub value: Linear,
    pub output: Linear,
    pub heads: usize,
    pub dim: usize,
}

#[derive(Clone, Debug)]
pub struct AttentionCache {
    q_cache: LinearCache,
    k_cache: LinearCache,
    v_cache: LinearCache,
    o_cache: LinearCache,
    q: Matrix,
    k: Matrix,
    v: Matrix,
    /// Per head, `n_q x n_k` attention weights.
    pub weights: Vec<Matrix>,
}

impl MultiHeadAttention {
    pub fn new<R: Rng>(store: &mut ParamStore, name: &str, dim: usize, heads: usize, rng: &mut R) -> Result<Self> {
        if heads == 0 || !dim.is_multiple_of(heads) {
            return shape_err(format!("model width {dim} is not divisible by {heads} heads"));
        }
        Ok(Self {
            query: Linear::new(store, &format!("{name}.query"), dim, dim, rng)?,
            key: Linear::new(store, &format!("{name}.key"), dim, dim, rng)?,
            value: Linear::new(store, &format!("{name}.value"), dim, dim, rng)?,
            output: Linear::new(store, &format!("{name}.output"), dim, dim, rng)?,
            heads,
            dim,
        })
    }

    fn head_dim(&self) -> usize {
        self.dim / self.heads
    }

    pub fn forward(
        &self,
        store: &ParamStore,
        q_in: &Matrix,
        k_in: &Matrix,
        v_in: &Matrix,
        key_mask: Option<&[bool]>,
    ) -> Result<(Matrix, AttentionCache)> {
        if k_in.nrows() != v_in.nrows() {
            return shape_err(format!("{} keys but {} values", k_in.nrows(), v_in.nrows()));
        }
        if let Some(m) = key_mask {
            if m.len() != k_in.nrows() {
                return shape_err(format!("key mask has {} entries for {} keys", m.len(), k_in.nrows()));
            }
        }
        let (q, q_cache) = self.query.forward(store, q_in)?;
        let (k, k_cache) = self.key.forward(store, k_in)?;
        let (v, v_cache) = self.value.forward(store, v_in)?;
        let dh = self.head_dim();
        let scale = 1.0 / (dh as f64).sqrt();
        let mut concat = Array2::zeros((q.nrows(), self.dim));
        let mut weights = Vec::with_capacity(self.heads);
        for h in 0..self.heads {
            let cols = s![.., h * dh..(h + 1) * dh];
            let scores = q.slice(cols).dot(&k.slice(cols).t()) * scale;
            let a = masked_softmax(&scores, key_mask);
            concat.slice_mut(cols).assign(&a.dot(&v.slice(cols)));
            weights.push(a);
        }
        let (out, o_cache) = self.output.forward(store, &concat)?;
        Ok((out, AttentionCache { q_cache, k_cache, v_cache, o_cache, q, k, v, weights }))
    }

    /// Returns gradients with respect to the query, key and value inputs.
    pub fn backward(&self, store: &mut ParamStore, cache: &AttentionCache, dy: &Matrix) -> (Matrix, Matrix, Matrix) {
        let dconcat = self.output.backward(store, &cache.o_cache, dy);
        let dh = self.head_dim();
        let scale = 1.0 / (dh as f64).sqrt();
        let mut dq = Array2::zeros(cache.q.raw_dim());
        let mut dk = Array2::zeros(cache.k.raw_dim());
        let mut dv = Array2::zeros(cache.v.raw_dim());
        for h in 0..self.heads {
            let cols = s![.., h * dh..(h + 1) * dh];
            let a = &cache.weights[h];
            let dout = dconcat.slice(cols);
            dv.slice_mut(cols).assign(&a.t().dot(&dout));
            let da = dout.dot(&cache.v.slice(cols).t());
            let mut ds = Array2::zeros(a.raw_dim());
            for r in 0..a.nrows() {
                let dot: f64 = (0..a.ncols()).map(|c| da[[r, c]] * a[[r, c]]).sum();
                for c in 0..a.ncols() {
                    ds[[r, c]] = a[[r, c]] * (da[[r, c]] - dot) * scale;
                }
            }
            dq.slice_mut(cols).assign(&ds.dot(&cache.k.slice(cols)));
            dk.slice_mut(cols).assign(&ds.t().dot(&cache.q.slice(cols)));
        }
        let dq_in = self.query.backward(store, &cache.q_cache, &dq);
        let dk_in = self.key.backward(store, &cache.k_cache, &dk);
        let dv_in = self.value.backward(store, &cache.v_cache, &dv);
        (dq_in, dk_in, dv_in)
    }
}

fn masked_softmax(scores: &Matrix, mask: Option<&[bool]>) -> Matrix {
    let visible = |c: usize| mask.is_none_or(|m| m[c]);
    let mut out = Array2::zeros(scores.raw_dim());
    for r in 0..scores.nrows() {
        let max = (0..scores.ncols()).filter(|&c| visible(c)).map(|c| scores[[r, c]]).fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            continue;
        }
        let mut total = 0.0;
        for c in (0..scores.ncols()).filter(|&c| visible(c)) {
            let e = (scores[[r, c]] - max).exp();
            out[[r, c]] = e;
            total += e;
        }
        for c in 0..scores.ncols() {
            out[[r, c]] /= total;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
        Array2::from_shape_simple_fn((r, c), || rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn single_key_returns_projected_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut store = ParamStore::new();
        let att = MultiHeadAttention::new(&mut store, "a", 8, 2, &mut rng).unwrap();
        let kv = random(&mut rng, 1, 8);
        let (a, _) = att.forward(&store, &random(&mut rng, 3, 8), &kv, &kv, None).unwrap();
        let (b, _) = att.forward(&store, &random(&mut rng, 3, 8), &kv, &kv, None).unwrap();
        let expected = att.output.apply(&store, &att.value.apply(&store, &kv).unwrap()).unwrap();
        for r in 0..3 {
            for c in 0..8 {
                assert!((a[[r, c]] - expected[[0, c]]).abs() < 1e-12);
                assert!((b[[r, c]] - expected[[0, c]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn weight_rows_sum_to_one_and_mask_excludes_keys() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut store = ParamStore::new();
        let att = MultiHeadAttention::new(&mut store, "a", 8, 4, &mut rng).unwrap();
        let kv = random(&mut rng, 5, 8);
        let mask = [true, false, true, true, false];
        let (_, cache) = att.forward(&store, &random(&mut rng, 3, 8), &kv, &kv, Some(&mask)).unwrap();
        for w in &cache.weights {
            for row in w.rows() {
                assert!((row.sum() - 1.0).abs() < 1e-12);
                assert_eq!(row[1], 0.0);
                assert_eq!(row[4], 0.0);
            }
        }
    }

    #[test]
    fn indivisible_width_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(MultiHeadAttention::new(&mut ParamStore::new(), "a", 10, 4, &mut rng).is_err());
    }
}
