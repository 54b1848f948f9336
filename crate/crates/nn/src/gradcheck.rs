use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ParamStore;

#[derive(Clone, Debug)]
pub struct GradcheckOptions {
    /// Central-difference step.
    pub step: f64,
    pub tolerance: f64,
    /// Denominator floor so that near-zero gradients compare absolutely.
    pub floor: f64,
    /// Coordinates sampled per parameter tensor; all when `None`.
    pub max_per_param: Option<usize>,
    pub seed: u64,
}

impl Default for GradcheckOptions {
    fn default() -> Self {
        Self { step: 1e-4, tolerance: 1e-4, floor: 1e-6, max_per_param: None, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradcheckReport {
    pub max_rel_error: f64,
    pub worst_param: String,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub checked: usize,
    pub tolerance: f64,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error < self.tolerance
    }
}

/// Compares analytic gradients with central differences. `loss` must
/// evaluate the scalar loss at the store's current values and accumulate
/// its gradient into the store.
pub fn gradcheck<F>(store: &mut ParamStore, mut loss: F, opts: &GradcheckOptions) -> GradcheckReport
where
    F: FnMut(&mut ParamStore) -> f64,
{
    store.zero_grad();
    loss(store);
    let analytic: Vec<Vec<f64>> = store.iter().map(|p| p.grad.iter().copied().collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = GradcheckReport {
        max_rel_error: 0.0,
        worst_param: String::new(),
        worst_index: 0,
        analytic: 0.0,
        numeric: 0.0,
        checked: 0,
        tolerance: opts.tolerance,
    };
    for (pi, grads) in analytic.iter().enumerate() {
        let n = grads.len();
        let coords: Vec<usize> = match opts.max_per_param {
            Some(m) if m < n => {
                let mut v = sample(&mut rng, n, m).into_vec();
                v.sort_unstable();
                v
            }
            _ => (0..n).collect(),
        };
        for idx in coords {
            let original = nth(store, pi, idx);
            set_nth(store, pi, idx, original + opts.step);
            let plus = loss(store);
            set_nth(store, pi, idx, original - opts.step);
            let minus = loss(store);
            set_nth(store, pi, idx, original);
            let numeric = (plus - minus) / (2.0 * opts.step);
            let a = grads[idx];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(opts.floor);
            report.checked += 1;
            if rel > report.max_rel_error || !rel.is_finite() {
                report.max_rel_error = if rel.is_finite() { rel } else { f64::INFINITY };
                report.worst_param = store.iter().nth(pi).map(|p| p.name.clone()).unwrap_or_default();
                report.worst_index = idx;
                report.analytic = a;
                report.numeric = numeric;
            }
        }
    }
    store.zero_grad();
    report
}

fn nth(store: &ParamStore, p: usize, i: usize) -> f64 {
    *store.iter().nth(p).and_then(|p| p.value.iter().nth(i)).expect("coordinate exists")
}

fn set_nth(store: &mut ParamStore, p: usize, i: usize, v: f64) {
    *store.iter_mut().nth(p).and_then(|p| p.value.iter_mut().nth(i)).expect("coordinate exists") = v;
}
