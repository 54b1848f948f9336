use std::collections::HashMap;
use std::fmt::Display;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use log::{info, warn};
use trajgen_core::codec::{extract_codes, parse_codes_with, serialize_codes};
use trajgen_core::maplib::{build_index_with_ids, MapIndex};
use trajgen_core::metrics::evaluate as evaluate_pairs;
use trajgen_core::synth::{random_dataset, synth_scenario, SynthSpec};
use trajgen_core::{CodeBundle, MapCode, RigidTransform, Scenario};
use trajgen_llm::{encode_description, ChatProvider, HttpProvider, MockProvider};
use trajgen_model::{
    load_checkpoint, load_checkpoint_expecting, prepare_examples, save_checkpoint, Checkpoint, Decoder, Trainer,
};

use crate::config::AppConfig;
use crate::render::render_svg;
use crate::{GenerateArgs, MapCommand, SynthArgs, TrainArgs};

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    /// Bad arguments or unreadable, malformed or invalid input files.
    pub fn input(e: impl Into<anyhow::Error>) -> Self {
        Self { code: 2, error: e.into() }
    }

    pub fn runtime(e: impl Into<anyhow::Error>) -> Self {
        Self { code: 1, error: e.into() }
    }
}

type CmdResult = Result<(), Failure>;

fn staged<E: Display>(stage: &'static str) -> impl Fn(E) -> anyhow::Error {
    move |e| anyhow!("{stage} stage: {e}")
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| dir.display().to_string()).map_err(Failure::runtime)?;
    }
    fs::write(path, contents).with_context(|| path.display().to_string()).map_err(Failure::runtime)
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    Scenario::load(path).with_context(|| path.display().to_string()).map_err(Failure::input)
}

/// `*.json` files in `dir`, sorted by name, keyed by file name.
fn json_files(dir: &Path) -> Result<Vec<(String, PathBuf)>, Failure> {
    let entries = fs::read_dir(dir).with_context(|| dir.display().to_string()).map_err(Failure::input)?;
    let mut files: Vec<(String, PathBuf)> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .filter_map(|p| Some((p.file_name()?.to_string_lossy().into_owned(), p)))
        .collect();
    files.sort();
    Ok(files)
}

fn load_dir(dir: &Path) -> Result<Vec<(String, Scenario)>, Failure> {
    let files = json_files(dir)?;
    if files.is_empty() {
        return Err(Failure::input(anyhow!("{}: no scenario files", dir.display())));
    }
    files
        .into_iter()
        .map(|(name, path)| Ok((name.trim_end_matches(".json").to_string(), load_scenario(&path)?)))
        .collect()
}

pub fn analyze(config: &AppConfig, scenario: &Path, out: Option<&Path>) -> CmdResult {
    let s = load_scenario(scenario)?;
    let codes =
        extract_codes(&s, &config.codec).with_context(|| scenario.display().to_string()).map_err(Failure::input)?;
    let text = serialize_codes(&codes);
    match out {
        Some(p) => write_file(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn open_checkpoint(config: &AppConfig, path: &Path) -> Result<Checkpoint, Failure> {
    if !path.exists() {
        return Err(Failure::input(anyhow!("checkpoint {} does not exist", path.display())));
    }
    let loaded = match &config.decoder {
        Some(expected) => load_checkpoint_expecting(path, expected),
        None => load_checkpoint(path),
    };
    loaded.with_context(|| path.display().to_string()).map_err(Failure::input)
}

pub fn train(config: &AppConfig, seed: Option<u64>, args: &TrainArgs) -> CmdResult {
    let scenarios = match (&args.data, args.synth) {
        (Some(dir), _) => load_dir(dir)?,
        (None, Some(n)) => random_dataset(n, config.train.seed, args.max_others)
            .into_iter()
            .enumerate()
            .map(|(i, s)| (format!("synth_{i:03}"), s))
            .collect(),
        (None, None) => return Err(Failure::input(anyhow!("either --data or --synth is required"))),
    };
    let mut train_cfg = config.train.clone();
    if let Some(e) = args.epochs {
        train_cfg.epochs = e;
    }
    let mut trainer = match &args.resume {
        Some(path) => {
            let ck = open_checkpoint(config, path)?;
            info!("resuming from {} at step {}", path.display(), ck.optimizer.as_ref().map_or(0, |o| o.step));
            match ck.optimizer {
                Some(opt) => Trainer::resume(ck.decoder, opt, train_cfg),
                None => Trainer::new(ck.decoder, train_cfg),
            }
        }
        None => {
            let decoder = Decoder::new(config.fresh_decoder(seed)).map_err(Failure::input)?;
            Trainer::new(decoder, train_cfg)
        }
    }
    .map_err(Failure::input)?;

    let examples = prepare_examples(&scenarios, &trainer.decoder.config, &config.codec).map_err(Failure::input)?;
    info!("training on {} scenarios", examples.len());
    let mut log_file = match &args.log {
        Some(p) => Some(fs::File::create(p).with_context(|| p.display().to_string()).map_err(Failure::runtime)?),
        None => None,
    };
    let total_steps = trainer.optimizer.step + trainer.config.epochs as u64 * steps_per_epoch(&trainer, examples.len());
    let every = args.log_every.max(1);
    let mut log_error = None;
    let result = trainer.run(&examples, |r| {
        let line = r.to_line();
        if r.step % every == 0 || r.step == total_steps {
            println!("{line}");
        }
        if let Some(f) = &mut log_file {
            if let Err(e) = writeln!(f, "{line}") {
                log_error.get_or_insert(e);
            }
        }
    });
    if let Some(e) = log_error {
        return Err(Failure::runtime(anyhow!("writing training log: {e}")));
    }
    result.map_err(|e| Failure::runtime(anyhow!("training aborted: {e}")))?;
    save_checkpoint(&args.out, &trainer.decoder, Some(&trainer.optimizer)).map_err(Failure::runtime)?;
    info!("wrote {}", args.out.display());
    Ok(())
}

fn steps_per_epoch(trainer: &Trainer, examples: usize) -> u64 {
    match trainer.config.batch_size {
        0 => 1,
        b => examples.div_ceil(b.min(examples)) as u64,
    }
}

fn codes_from_description(config: &AppConfig, args: &GenerateArgs, description: &str) -> Result<CodeBundle, Failure> {
    let provider: Box<dyn ChatProvider> = if args.mock {
        let script: HashMap<String, String> = match &args.mock_script {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| p.display().to_string()).map_err(Failure::input)?;
                serde_json::from_str(&text).with_context(|| p.display().to_string()).map_err(Failure::input)?
            }
            None => HashMap::new(),
        };
        Box::new(MockProvider::new(script))
    } else {
        Box::new(HttpProvider::from_env(config.llm.clone()).map_err(|e| Failure::input(staged("llm")(e)))?)
    };
    let result = encode_description(description, provider.as_ref(), &config.llm.retry_policy(), &config.codec)
        .map_err(|e| Failure::runtime(staged("llm")(e)))?;
    for w in &result.warnings {
        warn!("llm reply: {w}");
    }
    Ok(result.bundle)
}

pub fn generate(config: &AppConfig, args: &GenerateArgs) -> CmdResult {
    let bundle = match (&args.codes, &args.description) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| path.display().to_string()).map_err(Failure::input)?;
            let parsed = parse_codes_with(&text, &config.codec).map_err(|e| Failure::input(staged("parse")(e)))?;
            for w in &parsed.warnings {
                warn!("{}: {w}", path.display());
            }
            parsed.bundle
        }
        (None, Some(d)) => codes_from_description(config, args, d)?,
        (None, None) => return Err(Failure::input(anyhow!("either --codes or --description is required"))),
    };
    if let Some(p) = &args.codes_out {
        write_file(p, &serialize_codes(&bundle))?;
    }
    let decoder = open_checkpoint(config, &args.checkpoint)?.decoder;

    let (map, frame) = match (&args.map_from, &args.map_index) {
        (Some(path), _) => {
            let source = load_scenario(path)?;
            let ego = &source.vehicles[0];
            let back = RigidTransform::new(ego.initial_heading.angle(), ego.initial_position);
            (source.to_ego_frame().map, Some(back))
        }
        (None, Some(path)) => {
            let index = MapIndex::load(path).map_err(|e| Failure::input(staged("map")(e)))?;
            let (i, d) = index.best_match(&bundle.map_code).map_err(|e| Failure::runtime(staged("map")(e)))?;
            info!("retrieved map {} at code distance {d}", index.entries[i].source_id);
            (index.entries[i].map.clone(), None)
        }
        (None, None) => return Err(Failure::input(anyhow!("either --map-index or --map-from is required"))),
    };
    let mut scenario =
        decoder.decode(&bundle, &map, &config.codec).map_err(|e| Failure::runtime(staged("decode")(e)))?;
    if let Some(tf) = frame {
        scenario = scenario.transformed(&tf);
    }
    write_file(&args.out, &scenario.to_json())?;
    if let Some(p) = &args.render {
        write_file(p, &render_svg(&scenario, &config.render))?;
    }
    Ok(())
}

pub fn evaluate(config: &AppConfig, gt_dir: &Path, pred_dir: &Path, out: Option<&Path>, json: bool) -> CmdResult {
    let gt = json_files(gt_dir)?;
    let pred: HashMap<String, PathBuf> = json_files(pred_dir)?.into_iter().collect();
    let mut pairs = Vec::new();
    let mut matched = 0;
    for (name, gt_path) in &gt {
        let Some(pred_path) = pred.get(name) else {
            warn!("{name}: no prediction in {}; skipped", pred_dir.display());
            continue;
        };
        matched += 1;
        pairs.push((name.trim_end_matches(".json").to_string(), load_scenario(gt_path)?, load_scenario(pred_path)?));
    }
    let gt_names: std::collections::HashSet<&String> = gt.iter().map(|(n, _)| n).collect();
    for name in pred.keys().filter(|n| !gt_names.contains(n)) {
        warn!("{name}: no ground truth in {}; skipped", gt_dir.display());
    }
    if matched == 0 {
        return Err(Failure::input(anyhow!(
            "no paired scenario files between {} and {}",
            gt_dir.display(),
            pred_dir.display()
        )));
    }
    let report = evaluate_pairs(&pairs, &config.metrics).map_err(Failure::input)?;
    let text = if json { report.to_json() } else { report.to_csv() };
    if let Some(p) = out {
        write_file(p, &text)?;
    }
    print!("{text}");
    if !text.ends_with('\n') {
        println!();
    }
    Ok(())
}

pub fn synth(config: &AppConfig, seed: u64, args: &SynthArgs) -> CmdResult {
    match (args.count, &args.spec) {
        (_, Some(spec_path)) => {
            let text = fs::read_to_string(spec_path)
                .with_context(|| spec_path.display().to_string())
                .map_err(Failure::input)?;
            let spec: SynthSpec =
                serde_json::from_str(&text).with_context(|| spec_path.display().to_string()).map_err(Failure::input)?;
            let s = synth_scenario(&spec, seed).map_err(Failure::input)?;
            write_file(&args.out, &s.to_json())?;
            if args.render {
                write_file(&args.out.with_extension("svg"), &render_svg(&s, &config.render))?;
            }
        }
        (Some(n), None) => {
            for (i, s) in random_dataset(n, seed, args.max_others).iter().enumerate() {
                let path = args.out.join(format!("scene_{i:03}.json"));
                write_file(&path, &s.to_json())?;
                if args.render {
                    write_file(&path.with_extension("svg"), &render_svg(s, &config.render))?;
                }
            }
        }
        (None, None) => return Err(Failure::input(anyhow!("either --count or --spec is required"))),
    }
    Ok(())
}

fn parse_map_code(text: &str) -> anyhow::Result<MapCode> {
    let values: Vec<i32> = text
        .trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(',')
        .map(|v| v.trim().parse::<i32>().map_err(|_| anyhow!("non-integer map code value {v:?}")))
        .collect::<anyhow::Result<_>>()?;
    let values: [i32; 6] =
        values.try_into().map_err(|v: Vec<i32>| anyhow!("map code needs 6 values, got {}", v.len()))?;
    Ok(MapCode::from_array(values))
}

pub fn retrieve_map(config: &AppConfig, cmd: MapCommand) -> CmdResult {
    match cmd {
        MapCommand::Build { data, out } => {
            let scenarios = load_dir(&data)?;
            let (ids, scenes): (Vec<String>, Vec<Scenario>) = scenarios.into_iter().unzip();
            let index = build_index_with_ids(&scenes, &ids, &config.codec).map_err(Failure::input)?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(Failure::runtime)?;
            }
            index.save(&out).map_err(Failure::runtime)?;
            info!("indexed {} maps", index.len());
        }
        MapCommand::Query { index, code, codes, out } => {
            let index = MapIndex::load(&index).map_err(Failure::input)?;
            let key = match (code, codes) {
                (Some(c), _) => parse_map_code(&c).map_err(Failure::input)?,
                (None, Some(p)) => {
                    let text =
                        fs::read_to_string(&p).with_context(|| p.display().to_string()).map_err(Failure::input)?;
                    parse_codes_with(&text, &config.codec).map_err(Failure::input)?.bundle.map_code
                }
                (None, None) => return Err(Failure::input(anyhow!("either --code or --codes is required"))),
            };
            let (i, d) = index.best_match(&key).map_err(Failure::runtime)?;
            let entry = &index.entries[i];
            println!("source={} distance={d} code={:?}", entry.source_id, entry.code.to_array());
            if let Some(p) = out {
                write_file(&p, &serde_json::to_string_pretty(&entry.map).map_err(Failure::runtime)?)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_codes_parse_from_flags() {
        assert_eq!(parse_map_code("[2,1,0,0,-1,1]").unwrap().to_array(), [2, 1, 0, 0, -1, 1]);
        assert_eq!(parse_map_code(" 1, 0, 0, 0, 2, 1 ").unwrap().to_array(), [1, 0, 0, 0, 2, 1]);
        assert!(parse_map_code("1,2,3").is_err());
        assert!(parse_map_code("1,2,x,0,0,1").is_err());
    }
}
