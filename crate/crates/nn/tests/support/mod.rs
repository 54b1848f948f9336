//! Finite-difference probes for every layer, shared with the workspace
//! acceptance harness.

#![allow(dead_code)]

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trajgen_nn::{
    gradcheck, GradcheckOptions, GradcheckReport, LayerNorm, Linear, Matrix, McgBlock, McgStack, Mlp,
    MultiHeadAttention, ParamStore,
};

pub fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    Array2::from_shape_simple_fn((r, c), || rng.gen_range(-1.0..1.0))
}

/// Scalar probe `sum(y * weights)` whose gradient with respect to `y` is `weights`.
pub fn probe(y: &Matrix, weights: &Matrix) -> f64 {
    (y * weights).sum()
}

fn check(store: &mut ParamStore, loss: impl FnMut(&mut ParamStore) -> f64) -> GradcheckReport {
    gradcheck(store, loss, &GradcheckOptions::default())
}

pub fn linear(seed: u64) -> GradcheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParamStore::new();
    let layer = Linear::new(&mut store, "l", 4, 3, &mut rng).unwrap();
    let x = store.add("x", random(&mut rng, 5, 4)).unwrap();
    let w = random(&mut rng, 5, 3);
    check(&mut store, |s| {
        let input = s.value(x).clone();
        let (y, cache) = layer.forward(s, &input).unwrap();
        let dx = layer.backward(s, &cache, &w);
        s.accumulate(x, &dx);
        probe(&y, &w)
    })
}

pub fn mlp(seed: u64) -> GradcheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParamStore::new();
    let mlp = Mlp::new(&mut store, "m", &[4, 8, 2], &mut rng).unwrap();
    let x = store.add("x", random(&mut rng, 3, 4)).unwrap();
    let w = random(&mut rng, 3, 2);
    check(&mut store, |s| {
        let input = s.value(x).clone();
        let (y, cache) = mlp.forward(s, &input).unwrap();
        let dx = mlp.backward(s, &cache, &w);
        s.accumulate(x, &dx);
        probe(&y, &w)
    })
}

pub fn layer_norm(seed: u64) -> GradcheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParamStore::new();
    let ln = LayerNorm::new(&mut store, "ln", 6).unwrap();
    store.value_mut(ln.gain).assign(&random(&mut rng, 1, 6));
    store.value_mut(ln.shift).assign(&random(&mut rng, 1, 6));
    let x = store.add("x", random(&mut rng, 4, 6)).unwrap();
    let w = random(&mut rng, 4, 6);
    check(&mut store, |s| {
        let input = s.value(x).clone();
        let (y, cache) = ln.forward(s, &input).unwrap();
        let dx = ln.backward(s, &cache, &w);
        s.accumulate(x, &dx);
        probe(&y, &w)
    })
}

pub fn attention(seed: u64, masked: bool) -> GradcheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParamStore::new();
    let att = MultiHeadAttention::new(&mut store, "a", 8, 2, &mut rng).unwrap();
    let q = store.add("q", random(&mut rng, 3, 8)).unwrap();
    let k = store.add("k", random(&mut rng, 4, 8)).unwrap();
    let v = store.add("v", random(&mut rng, 4, 8)).unwrap();
    let w = random(&mut rng, 3, 8);
    let mask = [true, false, true, true];
    check(&mut store, |s| {
        let (qi, ki, vi) = (s.value(q).clone(), s.value(k).clone(), s.value(v).clone());
        let (y, cache) = att.forward(s, &qi, &ki, &vi, masked.then_some(&mask[..])).unwrap();
        let (dq, dk, dv) = att.backward(s, &cache, &w);
        s.accumulate(q, &dq);
        s.accumulate(k, &dk);
        s.accumulate(v, &dv);
        probe(&y, &w)
    })
}

pub fn mcg_block(seed: u64) -> GradcheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParamStore::new();
    let block = McgBlock::new(&mut store, "b", 5, 6, &mut rng).unwrap();
    let x = store.add("x", random(&mut rng, 4, 5)).unwrap();
    let c = store.add("c", random(&mut rng, 1, 6)).unwrap();
    let (we, wc) = (random(&mut rng, 4, 6), random(&mut rng, 1, 6));
    check(&mut store, |s| {
        let (xi, ci) = (s.value(x).clone(), s.value(c).clone());
        let (e, ctx, cache) = block.forward(s, &xi, &ci, Some(&[true, true, false, true])).unwrap();
        let (dx, dc) = block.backward(s, &cache, &we, &wc);
        s.accumulate(x, &dx);
        s.accumulate(c, &dc);
        probe(&e, &we) + probe(&ctx, &wc)
    })
}

pub fn mcg_stack(seed: u64) -> GradcheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParamStore::new();
    let stack = McgStack::new(&mut store, "s", 5, 6, 3, &mut rng).unwrap();
    let x = store.add("x", random(&mut rng, 4, 5)).unwrap();
    let (we, wc) = (random(&mut rng, 4, 6), random(&mut rng, 1, 6));
    check(&mut store, |s| {
        let xi = s.value(x).clone();
        let (e, ctx, cache) = stack.forward(s, &xi, None).unwrap();
        let dx = stack.backward(s, &cache, &we, &wc);
        s.accumulate(x, &dx);
        probe(&e, &we) + probe(&ctx, &wc)
    })
}

/// Every layer probe for one seed, labelled.
pub fn all_layers(seed: u64) -> Vec<(&'static str, GradcheckReport)> {
    vec![
        ("linear", linear(seed)),
        ("mlp", mlp(seed)),
        ("layer_norm", layer_norm(seed)),
        ("attention", attention(seed, false)),
        ("masked_attention", attention(seed, true)),
        ("mcg_block", mcg_block(seed)),
        ("mcg_stack", mcg_stack(seed)),
    ]
}
