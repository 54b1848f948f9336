use ndarray::{Array2, Axis};
use rand::Rng;

use crate::error::{shape_err, Result};
use crate::linear::{hadamard, sigmoid, Linear, LinearCache, Mlp, MlpCache};
use crate::{Matrix, ParamStore};

/// One multi-context gating block: every element passes through an MLP and
/// is gated by a sigmoid of the shared context; the new context is the
/// element-wise max over the visible elements.
#[derive(Clone, Debug)]
pub struct McgBlock {
    pub mlp: Mlp,
    pub gate: Linear,
    pub dim: usize,
}

#[derive(Clone, Debug)]
pub struct McgBlockCache {
    mlp: MlpCache,
    gate: LinearCache,
    transformed: Matrix,
    gate_values: Matrix,
    /// Row chosen by the max-pool for each column; `None` when nothing is visible.
    argmax: Vec<Option<usize>>,
}

impl McgBlock {
    pub fn new<R: Rng>(store: &mut ParamStore, name: &str, in_dim: usize, dim: usize, rng: &mut R) -> Result<Self> {
        Ok(Self {
            mlp: Mlp::new(store, &format!("{name}.mlp"), &[in_dim, dim, dim], rng)?,
            gate: Linear::new(store, &format!("{name}.gate"), dim, dim, rng)?,
            dim,
        })
    }

    /// `context` is `1 x dim`; `mask` marks visible rows (all when `None`).
    pub fn forward(
        &self,
        store: &ParamStore,
        elements: &Matrix,
        context: &Matrix,
        mask: Option<&[bool]>,
    ) -> Result<(Matrix, Matrix, McgBlockCache)> {
        if context.shape() != [1, self.dim] {
            return shape_err(format!("context must be 1x{}, got {:?}", self.dim, context.shape()));
        }
        if let Some(m) = mask {
            if m.len() != elements.nrows() {
                return shape_err(format!("mask has {} entries for {} elements", m.len(), elements.nrows()));
            }
        }
        let (transformed, mlp) = self.mlp.forward(store, elements)?;
        let (logits, gate) = self.gate.forward(store, context)?;
        let gate_values = logits.mapv(sigmoid);
        let out = &transformed * &gate_values;
        let visible = |r: usize| mask.is_none_or(|m| m[r]);
        let mut pooled = Array2::zeros((1, self.dim));
        let mut argmax = vec![None; self.dim];
        for c in 0..self.dim {
            for r in (0..out.nrows()).filter(|&r| visible(r)) {
                if argmax[c].is_none_or(|b: usize| out[[r, c]] > out[[b, c]]) {
                    argmax[c] = Some(r);
                }
            }
            if let Some(r) = argmax[c] {
                pooled[[0, c]] = out[[r, c]];
            }
        }
        Ok((out, pooled, McgBlockCache { mlp, gate, transformed, gate_values, argmax }))
    }

    /// Returns gradients with respect to the elements and the incoming context.
    pub fn backward(
        &self,
        store: &mut ParamStore,
        cache: &McgBlockCache,
        d_elements: &Matrix,
        d_context: &Matrix,
    ) -> (Matrix, Matrix) {
        let mut d_out = d_elements.clone();
        for (c, r) in cache.argmax.iter().enumerate() {
            if let Some(r) = r {
                d_out[[*r, c]] += d_context[[0, c]];
            }
        }
        let d_transformed = &d_out * &cache.gate_values;
        let d_gate = hadamard(&d_out, &cache.transformed).sum_axis(Axis(0)).insert_axis(Axis(0));
        let d_logits = d_gate * cache.gate_values.mapv(|g| g * (1.0 - g));
        let d_prev_context = self.gate.backward(store, &cache.gate, &d_logits);
        let d_in = self.mlp.backward(store, &cache.mlp, &d_transformed);
        (d_in, d_prev_context)
    }
}

/// Stacked MCG blocks starting from a zero context.
#[derive(Clone, Debug)]
pub struct McgStack {
    pub blocks: Vec<McgBlock>,
}

#[derive(Clone, Debug)]
pub struct McgStackCache {
    blocks: Vec<McgBlockCache>,
}

impl McgStack {
    pub fn new<R: Rng>(
        store: &mut ParamStore,
        name: &str,
        in_dim: usize,
        dim: usize,
        layers: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if layers == 0 {
            return shape_err("an MCG stack needs at least one block");
        }
        let blocks = (0..layers)
            .map(|i| McgBlock::new(store, &format!("{name}.{i}"), if i == 0 { in_dim } else { dim }, dim, rng))
            .collect::<Result<_>>()?;
        Ok(Self { blocks })
    }

    pub fn dim(&self) -> usize {
        self.blocks[0].dim
    }

    /// Returns the final element features and the final context.
    pub fn forward(
        &self,
        store: &ParamStore,
        elements: &Matrix,
        mask: Option<&[bool]>,
    ) -> Result<(Matrix, Matrix, McgStackCache)> {
        let mut e = elements.clone();
        let mut ctx = Array2::zeros((1, self.dim()));
        let mut caches = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let (ne, nc, cache) = b.forward(store, &e, &ctx, mask)?;
            e = ne;
            ctx = nc;
            caches.push(cache);
        }
        Ok((e, ctx, McgStackCache { blocks: caches }))
    }

    /// Gradient with respect to the input elements; the initial context is
    /// a constant and receives none.
    pub fn backward(
        &self,
        store: &mut ParamStore,
        cache: &McgStackCache,
        d_elements: &Matrix,
        d_context: &Matrix,
    ) -> Matrix {
        let mut de = d_elements.clone();
        let mut dc = d_context.clone();
        for (b, c) in self.blocks.iter().zip(&cache.blocks).rev() {
            let (ne, nc) = b.backward(store, c, &de, &dc);
            de = ne;
            dc = nc;
        }
        de
    }
}
