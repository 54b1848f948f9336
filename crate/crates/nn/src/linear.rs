use ndarray::{Array2, Axis};
use rand::Rng;

use crate::error::{shape_err, Result};
use crate::{Matrix, ParamId, ParamStore};

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn silu(x: f64) -> f64 {
    x * sigmoid(x)
}

pub fn silu_grad(x: f64) -> f64 {
    let s = sigmoid(x);
    s * (1.0 + x * (1.0 - s))
}

/// `y = x W + b` with `W` of shape `in x out` and `b` of shape `1 x out`.
#[derive(Clone, Debug)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: ParamId,
    pub in_dim: usize,
    pub out_dim: usize,
}

#[derive(Clone, Debug)]
pub struct LinearCache {
    input: Matrix,
}

impl Linear {
    pub fn new<R: Rng>(store: &mut ParamStore, name: &str, in_dim: usize, out_dim: usize, rng: &mut R) -> Result<Self> {
        let weight = store.add_glorot(format!("{name}.weight"), in_dim, out_dim, rng)?;
        let bias = store.add_filled(format!("{name}.bias"), 1, out_dim, 0.0)?;
        Ok(Self { weight, bias, in_dim, out_dim })
    }

    pub fn apply(&self, store: &ParamStore, x: &Matrix) -> Result<Matrix> {
        if x.ncols() != self.in_dim {
            return shape_err(format!("linear expects {} input columns, got {}", self.in_dim, x.ncols()));
        }
        Ok(x.dot(store.value(self.weight)) + store.value(self.bias))
    }

    pub fn forward(&self, store: &ParamStore, x: &Matrix) -> Result<(Matrix, LinearCache)> {
        Ok((self.apply(store, x)?, LinearCache { input: x.clone() }))
    }

    pub fn backward(&self, store: &mut ParamStore, cache: &LinearCache, dy: &Matrix) -> Matrix {
        store.accumulate(self.weight, &cache.input.t().dot(dy));
        store.accumulate(self.bias, &dy.sum_axis(Axis(0)).insert_axis(Axis(0)));
        dy.dot(&store.value(self.weight).t())
    }
}

/// Linear layers with SiLU between them and no activation on the output.
#[derive(Clone, Debug)]
pub struct Mlp {
    pub layers: Vec<Linear>,
}

#[derive(Clone, Debug)]
pub struct MlpCache {
    linear: Vec<LinearCache>,
    pre_activation: Vec<Matrix>,
}

impl Mlp {
    /// `dims` lists every layer width, input first: `[4, 8, 2]` is 4 -> 8 -> 2.
    pub fn new<R: Rng>(store: &mut ParamStore, name: &str, dims: &[usize], rng: &mut R) -> Result<Self> {
        if dims.len() < 2 {
            return shape_err("an MLP needs at least an input and an output width");
        }
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| Linear::new(store, &format!("{name}.{i}"), w[0], w[1], rng))
            .collect::<Result<_>>()?;
        Ok(Self { layers })
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    pub fn apply(&self, store: &ParamStore, x: &Matrix) -> Result<Matrix> {
        let mut h = x.clone();
        for (i, l) in self.layers.iter().enumerate() {
            h = l.apply(store, &h)?;
            if i + 1 < self.layers.len() {
                h.mapv_inplace(silu);
            }
        }
        Ok(h)
    }

    pub fn forward(&self, store: &ParamStore, x: &Matrix) -> Result<(Matrix, MlpCache)> {
        let mut cache = MlpCache { linear: Vec::new(), pre_activation: Vec::new() };
        let mut h = x.clone();
        for (i, l) in self.layers.iter().enumerate() {
            let (z, c) = l.forward(store, &h)?;
            cache.linear.push(c);
            if i + 1 < self.layers.len() {
                h = z.mapv(silu);
                cache.pre_activation.push(z);
            } else {
                h = z;
            }
        }
        Ok((h, cache))
    }

    pub fn backward(&self, store: &mut ParamStore, cache: &MlpCache, dy: &Matrix) -> Matrix {
        let mut g = dy.clone();
        for i in (0..self.layers.len()).rev() {
            if i + 1 < self.layers.len() {
                g = g * cache.pre_activation[i].mapv(silu_grad);
            }
            g = self.layers[i].backward(store, &cache.linear[i], &g);
        }
        g
    }
}

/// Element-wise product, used by gating layers.
pub(crate) fn hadamard(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Array2::zeros(a.raw_dim());
    ndarray::Zip::from(&mut out).and(a).and(b).for_each(|o, x, y| *o = x * y);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn linear_weight_gradient_by_hand() {
        let mut store = ParamStore::new();
        let w = store.add("l.weight", array![[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let b = store.add("l.bias", array![[0.5, -0.5]]).unwrap();
        let layer = Linear { weight: w, bias: b, in_dim: 2, out_dim: 2 };
        let x = array![[1.0, 2.0], [3.0, 4.0]];
        let (y, cache) = layer.forward(&store, &x).unwrap();
        assert_eq!(y, array![[7.5, 9.5], [15.5, 21.5]]);
        let dy = array![[1.0, 0.0], [0.0, 1.0]];
        let dx = layer.backward(&mut store, &cache, &dy);
        // dW = x^T dy, db = column sums of dy, dx = dy W^T.
        assert_eq!(store.grad(w), &array![[1.0, 3.0], [2.0, 4.0]]);
        assert_eq!(store.grad(b), &array![[1.0, 1.0]]);
        assert_eq!(dx, array![[1.0, 3.0], [2.0, 4.0]]);
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let mut store = ParamStore::new();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let mlp = Mlp::new(&mut store, "m", &[4, 8, 2], &mut rng).unwrap();
        let x = Array2::from_elem((3, 4), 0.3);
        let (_, cache) = mlp.forward(&store, &x).unwrap();
        let dx = mlp.backward(&mut store, &cache, &Array2::zeros((3, 2)));
        assert!(dx.iter().all(|v| *v == 0.0));
        assert_eq!(store.grad_norm(), 0.0);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let mut store = ParamStore::new();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let l = Linear::new(&mut store, "l", 3, 2, &mut rng).unwrap();
        assert!(l.apply(&store, &Array2::zeros((1, 4))).is_err());
    }

    #[test]
    fn silu_derivative_matches_difference() {
        for x in [-3.0, -0.5, 0.0, 0.7, 4.0] {
            let h = 1e-6;
            let fd = (silu(x + h) - silu(x - h)) / (2.0 * h);
            assert!((fd - silu_grad(x)).abs() < 1e-8);
        }
    }
}
