//! The line-oriented code text format:
//!
//! ```text
//! Vehicle Code:
//! - 'V1': [-1,0,0,4,4,4,4,4,4,1]
//!
//! Map Code:
//! - 'Map': [2,0,0,0,-1,1]
//!
//! Interaction Code:
//! - 'I1': [0,0,0,0,0] | [0,0,0,0,0]
//! ```
//!
//! The parser accepts the same lines buried in free text, markdown fences and
//! bullets, and clamps out-of-range values with a warning instead of failing.

use std::fmt::Write as _;
use std::sync::OnceLock;

use regex::Regex;

use super::{
    CodeBundle, CodecConfig, InteractionCode, MapCode, TrajectoryType, VehicleCode, INTERACTION_LEN, MAP_CODE_LEN,
    VEHICLE_CODE_LEN, VEHICLE_POS_AREAS,
};
use crate::error::{Error, Result};
use crate::scenario::MAX_VEHICLES;

pub fn serialize_codes(b: &CodeBundle) -> String {
    let mut out = String::from("Vehicle Code:\n");
    for (i, v) in b.vehicle_codes.iter().enumerate() {
        let _ = writeln!(out, "- 'V{}': {}", i + 1, list(&v.to_row()));
    }
    out.push_str("\nMap Code:\n");
    let _ = writeln!(out, "- 'Map': {}", list(&b.map_code.to_array()));
    out.push_str("\nInteraction Code:\n");
    for (i, c) in b.interaction_codes.iter().enumerate() {
        let _ = writeln!(out, "- 'I{}': {} | {}", i + 1, list(&c.distance_bins), list(&c.direction_sectors));
    }
    out
}

fn list(values: &[i32]) -> String {
    let cells: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("[{}]", cells.join(","))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedCodes {
    pub bundle: CodeBundle,
    pub warnings: Vec<String>,
}

pub fn parse_codes(text: &str) -> Result<ParsedCodes> {
    parse_codes_with(text, &CodecConfig::default())
}

struct Patterns {
    vehicle: Regex,
    map: Regex,
    interaction: Regex,
    header: Regex,
}

fn patterns() -> &'static Patterns {
    static P: OnceLock<Patterns> = OnceLock::new();
    P.get_or_init(|| {
        let q = r#"['"`]?"#;
        Patterns {
            vehicle: Regex::new(&format!(r"(?i)^{q}V(\d+){q}\s*:\s*\[([^\]]*)\]\s*,?$")).unwrap(),
            map: Regex::new(&format!(r"(?i)^{q}Map{q}\s*:\s*\[([^\]]*)\]\s*,?$")).unwrap(),
            interaction: Regex::new(&format!(r"(?i)^{q}I(\d+){q}\s*:\s*\[([^\]]*)\]\s*\|\s*\[([^\]]*)\]\s*,?$"))
                .unwrap(),
            header: Regex::new(r"(?i)^(vehicle|map|interaction)\s+codes?\s*:").unwrap(),
        }
    })
}

/// Removes list bullets and emphasis markers around a line.
fn strip_decoration(line: &str) -> &str {
    let mut s = line.trim();
    loop {
        let next = s.trim_start_matches(['-', '*', '•', '+', '#', '>']).trim_start();
        let next = next.trim_end_matches('*').trim_end();
        if next.len() == s.len() {
            return s;
        }
        s = next;
    }
}

fn cells(line_no: usize, raw: &str, expected: usize) -> Result<Vec<i64>> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != expected {
        return Err(Error::Parse(format!("line {line_no}: expected {expected} values, got {}", parts.len())));
    }
    parts
        .iter()
        .map(|c| c.parse::<i64>().map_err(|_| Error::Parse(format!("line {line_no}: non-numeric cell '{c}'"))))
        .collect()
}

struct Clamp<'a> {
    warnings: &'a mut Vec<String>,
}

impl Clamp<'_> {
    fn range(&mut self, what: &str, v: i64, lo: i64, hi: i64) -> i32 {
        let c = v.clamp(lo, hi);
        if c != v {
            self.warnings.push(format!("{what}: {v} clamped to {c}"));
        }
        c as i32
    }

    fn force(&mut self, what: &str, v: i64, want: i64) -> i32 {
        if v != want {
            self.warnings.push(format!("{what}: {v} replaced by {want}"));
        }
        want as i32
    }
}

pub fn parse_codes_with(text: &str, cfg: &CodecConfig) -> Result<ParsedCodes> {
    let p = patterns();
    let mut warnings = Vec::new();
    let mut vehicles: Vec<(usize, usize, Vec<i64>)> = Vec::new();
    let mut interactions: Vec<(usize, usize, Vec<i64>, Vec<i64>)> = Vec::new();
    let mut map: Option<(usize, Vec<i64>)> = None;
    let mut fences = 0;
    let mut prose = 0;

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        if raw.trim_start().starts_with("```") {
            fences += 1;
            continue;
        }
        let line = strip_decoration(raw);
        if line.is_empty() {
            continue;
        }
        if let Some(c) = p.vehicle.captures(line) {
            let idx = index(line_no, &c[1])?;
            vehicles.push((idx, line_no, cells(line_no, &c[2], VEHICLE_CODE_LEN)?));
        } else if let Some(c) = p.interaction.captures(line) {
            let idx = index(line_no, &c[1])?;
            let d = cells(line_no, &c[2], INTERACTION_LEN)?;
            let s = cells(line_no, &c[3], INTERACTION_LEN)?;
            interactions.push((idx, line_no, d, s));
        } else if let Some(c) = p.map.captures(line) {
            let values = cells(line_no, &c[1], MAP_CODE_LEN)?;
            if map.is_some() {
                warnings.push(format!("line {line_no}: extra Map line ignored"));
            } else {
                map = Some((line_no, values));
            }
        } else if !p.header.is_match(line) {
            prose += 1;
        }
    }
    if fences > 0 {
        warnings.push(format!("stripped {fences} markdown fence line(s)"));
    }
    if prose > 0 {
        warnings.push(format!("ignored {prose} line(s) of surrounding text"));
    }

    if vehicles.is_empty() {
        return Err(Error::Parse("missing section: Vehicle Code".into()));
    }
    let Some((_, map)) = map else {
        return Err(Error::Parse("missing section: Map Code".into()));
    };
    if interactions.is_empty() {
        return Err(Error::Parse("missing section: Interaction Code".into()));
    }
    if vehicles.len() != interactions.len() {
        return Err(Error::Parse(format!(
            "count mismatch: {} vehicle codes, {} interaction codes",
            vehicles.len(),
            interactions.len()
        )));
    }
    if vehicles.len() > MAX_VEHICLES {
        return Err(Error::Parse(format!("{} vehicles exceed the maximum of {MAX_VEHICLES}", vehicles.len())));
    }
    vehicles.sort_by_key(|v| v.0);
    interactions.sort_by_key(|v| v.0);
    check_indices("V", vehicles.iter().map(|v| (v.0, v.1)))?;
    check_indices("I", interactions.iter().map(|v| (v.0, v.1)))?;

    let mut clamp = Clamp { warnings: &mut warnings };
    let vehicle_codes = vehicles
        .iter()
        .map(|(k, _, c)| {
            let name = |d: usize| format!("V{k} dim {d}");
            let ego = *k == 1;
            let pos = if ego {
                clamp.force(&name(0), c[0], -1)
            } else if c[0] == -1 {
                clamp.force(&name(0), c[0], 0)
            } else {
                clamp.range(&name(0), c[0], 0, VEHICLE_POS_AREAS as i64 - 1)
            };
            let distance = if ego {
                clamp.force(&name(1), c[1], 0)
            } else {
                clamp.range(&name(1), c[1], 0, cfg.vehicle_distance_max_bin as i64)
            };
            let direction = if ego { clamp.force(&name(2), c[2], 0) } else { clamp.range(&name(2), c[2], 0, 3) };
            let mut speed_bins = [0; 6];
            for (j, s) in speed_bins.iter_mut().enumerate() {
                *s = clamp.range(&name(3 + j), c[3 + j], 0, cfg.speed_max_bin as i64);
            }
            let action = clamp.range(&name(9), c[9], 0, 5);
            VehicleCode {
                pos_sector: pos,
                distance_bin: distance,
                direction_class: direction,
                speed_bins,
                action: TrajectoryType::from_index(action as i64).expect("clamped"),
            }
        })
        .collect();

    let interaction_codes = interactions
        .iter()
        .map(|(k, _, d, s)| {
            let mut code = InteractionCode::default();
            for j in 0..INTERACTION_LEN {
                if *k == 1 {
                    code.distance_bins[j] = clamp.force(&format!("I1 distance {j}"), d[j], 0);
                    code.direction_sectors[j] = clamp.force(&format!("I1 direction {j}"), s[j], 0);
                } else {
                    code.distance_bins[j] =
                        clamp.range(&format!("I{k} distance {j}"), d[j], 0, cfg.interaction_distance_max_bin as i64);
                    code.direction_sectors[j] =
                        clamp.range(&format!("I{k} direction {j}"), s[j], 0, cfg.interaction_areas as i64 - 1);
                }
            }
            code
        })
        .collect();

    let same = clamp.range("Map dim 0", map[0], 1, i64::from(i32::MAX));
    let map_code = MapCode {
        same_dir_lanes: same,
        opposite_dir_lanes: clamp.range("Map dim 1", map[1], 0, i64::from(i32::MAX)),
        perp_up_lanes: clamp.range("Map dim 2", map[2], 0, i64::from(i32::MAX)),
        perp_down_lanes: clamp.range("Map dim 3", map[3], 0, i64::from(i32::MAX)),
        intersection_bin: clamp.range("Map dim 4", map[4], -1, cfg.intersection_distance_max_bin as i64),
        ego_lane_id: clamp.range("Map dim 5", map[5], 1, same as i64),
    };

    let bundle = CodeBundle { map_code, vehicle_codes, interaction_codes };
    debug_assert!(bundle.validate(cfg).is_ok());
    Ok(ParsedCodes { bundle, warnings })
}

fn index(line_no: usize, digits: &str) -> Result<usize> {
    digits.parse().map_err(|_| Error::Parse(format!("line {line_no}: bad index '{digits}'")))
}

/// Requires indices `1..=n`, each exactly once (input must be sorted).
fn check_indices(prefix: &str, idx: impl Iterator<Item = (usize, usize)>) -> Result<()> {
    for (expected, (k, line_no)) in (1..).zip(idx) {
        if k != expected {
            return Err(Error::Parse(format!(
                "line {line_no}: expected '{prefix}{expected}', found '{prefix}{k}' (indices must run 1..N without gaps)"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const APPENDIX_STYLE: &str = "\
Summary: three vehicles on a two-lane road.

Explanation: V2 follows the ego, V3 overtakes on the left.

Vehicle Code: A list of codes of length ten, describing the attributes of each of the vehicles in the scenario, only output the values without any text:

- 'V1': [-1,0,0,4,4,4,4,4,4,1]

- 'V2': [3,1,0,4,4,4,4,4,4,1]

- 'V3': [4,0,0,6,6,6,6,6,6,4]

Map Code: A code of length six describing the map attributes, only output the values without any text:

- 'Map': [2,0,0,0,-1,1]

Interaction Code:

- 'I1': [0,0,0,0,0] | [0,0,0,0,0]

- 'I2': [1,1,1,1,1] | [3,3,3,3,3]

- 'I3': [0,0,0,1,1] | [4,5,0,0,0]
";

    #[test]
    fn appendix_style_text() {
        let p = parse_codes(APPENDIX_STYLE).unwrap();
        assert_eq!(p.bundle.len(), 3);
        assert_eq!(p.bundle.vehicle_codes[2].action, TrajectoryType::LeftLaneChange);
        assert_eq!(p.bundle.interaction_codes[2].direction_sectors, [4, 5, 0, 0, 0]);
    }

    #[test]
    fn fenced_and_wrapped_text_parses_identically() {
        let wrapped = format!(
            "Sure! Here are the codes you asked for.\n```\n{APPENDIX_STYLE}```\nLet me know if you need anything else."
        );
        let a = parse_codes(APPENDIX_STYLE).unwrap();
        let b = parse_codes(&wrapped).unwrap();
        assert_eq!(a.bundle, b.bundle);
        assert!(b.warnings.iter().any(|w| w.contains("fence")));
    }

    #[test]
    fn out_of_range_speed_is_clamped_with_warning() {
        let text = APPENDIX_STYLE.replace("[3,1,0,4,4,4,4,4,4,1]", "[3,1,0,9,4,4,4,4,4,1]");
        let p = parse_codes(&text).unwrap();
        assert_eq!(p.bundle.vehicle_codes[1].speed_bins[0], 8);
        assert!(p.warnings.iter().any(|w| w == "V2 dim 3: 9 clamped to 8"), "{:?}", p.warnings);
    }

    #[test]
    fn serialize_follower_bundle() {
        let p = parse_codes(APPENDIX_STYLE).unwrap();
        let text = serialize_codes(&p.bundle);
        assert!(text.contains("- 'I2': [1,1,1,1,1] | [3,3,3,3,3]\n"));
        assert!(text.starts_with("Vehicle Code:\n- 'V1': [-1,0,0,4,4,4,4,4,4,1]\n"));
        assert_eq!(parse_codes(&text).unwrap(), ParsedCodes { bundle: p.bundle, warnings: vec![] });
    }

    #[test]
    fn ego_only_bundle_has_one_line_each() {
        let text = "- 'V1': [-1,0,0,0,0,0,0,0,0,0]\n- 'Map': [1,0,0,0,-1,1]\n- 'I1': [0,0,0,0,0] | [0,0,0,0,0]\n";
        let b = parse_codes(text).unwrap().bundle;
        let out = serialize_codes(&b);
        assert_eq!(out.matches("'V").count(), 1);
        assert_eq!(out.matches("'Map'").count(), 1);
        assert_eq!(out.matches("'I").count(), 1);
    }

    #[test]
    fn errors() {
        let no_map = APPENDIX_STYLE.replace("- 'Map': [2,0,0,0,-1,1]", "");
        assert!(matches!(parse_codes(&no_map), Err(Error::Parse(m)) if m.contains("Map Code")));
        let no_i = APPENDIX_STYLE.replace("- 'I", "- 'X");
        assert!(matches!(parse_codes(&no_i), Err(Error::Parse(m)) if m.contains("Interaction Code")));
        let mismatch = APPENDIX_STYLE.replace("- 'I3': [0,0,0,1,1] | [4,5,0,0,0]", "");
        assert!(matches!(parse_codes(&mismatch), Err(Error::Parse(m)) if m.contains("count mismatch")));
        let bad_cell = APPENDIX_STYLE.replace("[3,1,0,4,4,4,4,4,4,1]", "[3,1,0,x,4,4,4,4,4,1]");
        match parse_codes(&bad_cell) {
            Err(Error::Parse(m)) => assert!(m.starts_with("line 9:") && m.contains("'x'"), "{m}"),
            other => panic!("{other:?}"),
        }
        assert!(parse_codes("nothing to see here").is_err());
    }
}
