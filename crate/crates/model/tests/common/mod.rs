#![allow(dead_code)]

use trajgen_core::codec::{extract_codes, CodecConfig};
use trajgen_core::metrics::{scenario_metrics, MetricConfig, ScenarioMetrics};
use trajgen_core::synth::random_dataset;
use trajgen_core::Scenario;
use trajgen_model::{prepare_examples, scenario_loss, Decoder, DecoderConfig, DecoderNet, TrainExample};
use trajgen_nn::{gradcheck, GradcheckOptions, GradcheckReport, ParamStore};

pub fn named(scenarios: Vec<Scenario>) -> Vec<(String, Scenario)> {
    scenarios.into_iter().enumerate().map(|(i, s)| (format!("s{i:02}"), s)).collect()
}

pub fn examples(count: usize, seed: u64, max_others: usize, cfg: &DecoderConfig) -> Vec<TrainExample> {
    prepare_examples(&named(random_dataset(count, seed, max_others)), cfg, &CodecConfig::default()).unwrap()
}

/// Mean per-scenario metrics of the decoder's reconstruction of each
/// scenario from its own codes and map.
pub fn reconstruction_metrics(decoder: &Decoder, scenarios: &[Scenario]) -> (f64, f64) {
    let codec = CodecConfig::default();
    let per: Vec<ScenarioMetrics> = scenarios
        .iter()
        .map(|s| {
            let local = s.to_ego_frame();
            let codes = extract_codes(&local, &codec).unwrap();
            let pred = decoder.decode(&codes, &local.map, &codec).unwrap();
            scenario_metrics(&local, &pred, &MetricConfig::default()).unwrap()
        })
        .collect();
    let n = per.len() as f64;
    (per.iter().map(|m| m.made).sum::<f64>() / n, per.iter().map(|m| m.mfde).sum::<f64>() / n)
}

/// End-to-end finite-difference check of the shrink decoder through the
/// training loss, sampling three coordinates per tensor.
pub fn decoder_gradcheck(seed: u64) -> GradcheckReport {
    let cfg = DecoderConfig { seed, ..DecoderConfig::shrink() };
    let ex = examples(1, 100 + seed, 3, &cfg).remove(0);
    let mut store = ParamStore::new();
    let net = DecoderNet::new(&mut store, &cfg).unwrap();
    let evaluate = |store: &ParamStore| {
        let (offsets, cache) = net.forward(store, &ex.input).unwrap();
        let pred = net.positions(&ex.input, &offsets);
        let (loss, grad) = scenario_loss(&pred, &ex.target).unwrap();
        (loss.total, grad, cache)
    };
    // Normalized to unit loss so the absolute floor tracks round-off.
    let scale = 1.0 / evaluate(&store).0;
    let loss = |store: &mut ParamStore| {
        let (total, grad, cache) = evaluate(store);
        net.backward(store, &cache, &(grad * scale));
        total * scale
    };
    let opts = GradcheckOptions { tolerance: 1e-3, max_per_param: Some(3), seed, ..Default::default() };
    gradcheck(&mut store, loss, &opts)
}
