use std::collections::HashMap;
use std::time::Duration;

use trajgen_core::codec::{parse_codes, serialize_codes, CodecConfig};
use trajgen_llm::{encode_description, LlmError, MockProvider, ProviderError, RetryPolicy, FALLBACK_REPLY};

const CANNED: &str = "\
Vehicle Code:
- 'V1': [-1,0,0,2,2,3,3,4,4,2]
- 'V2': [1,0,1,4,4,4,4,4,4,1]
- 'V3': [3,1,0,2,2,2,2,2,2,1]

Map Code:
- 'Map': [2,1,1,1,1,1]

Interaction Code:
- 'I1': [0,0,0,0,0] | [0,0,0,0,0]
- 'I2': [1,1,0,1,2] | [1,1,0,5,5]
- 'I3': [2,2,2,2,2] | [3,3,3,3,3]
";

fn no_wait(retries: usize) -> RetryPolicy {
    RetryPolicy { max_retries: retries, base_delay: Duration::ZERO }
}

fn mock(description: &str, reply: &str) -> MockProvider {
    MockProvider::new(HashMap::from([(description.to_string(), reply.to_string())]))
}

#[test]
fn canned_reply_gives_its_bundle() {
    let p = mock("left turn at a crossing", CANNED);
    let r = encode_description("left turn at a crossing", &p, &no_wait(0), &CodecConfig::default()).unwrap();
    assert_eq!(r.bundle, parse_codes(CANNED).unwrap().bundle);
    assert_eq!(r.raw_reply, CANNED);
    assert!(r.warnings.is_empty(), "{:?}", r.warnings);
    assert_eq!(p.calls(), 1);
}

#[test]
fn prose_wrapped_reply_parses_identically_with_a_warning() {
    let wrapped = format!("Summary: three cars.\nExplanation: V2 crosses.\n```\n{CANNED}```\nHope this helps!");
    let p = mock("d", &wrapped);
    let r = encode_description("d", &p, &no_wait(0), &CodecConfig::default()).unwrap();
    assert_eq!(r.bundle, parse_codes(CANNED).unwrap().bundle);
    assert!(!r.warnings.is_empty());
}

#[test]
fn garbage_twice_is_a_parse_error_with_the_reply() {
    let p = mock("d", "I cannot help with that.");
    match encode_description("d", &p, &no_wait(0), &CodecConfig::default()) {
        Err(LlmError::Parse { raw_reply, .. }) => assert_eq!(raw_reply, "I cannot help with that."),
        other => panic!("{other:?}"),
    }
    assert_eq!(p.calls(), 2);
}

#[test]
fn repair_round_recovers() {
    let p = MockProvider::default().with_sequence("d", vec!["nonsense".into(), CANNED.into()]);
    let r = encode_description("d", &p, &no_wait(0), &CodecConfig::default()).unwrap();
    assert_eq!(r.bundle, parse_codes(CANNED).unwrap().bundle);
    assert!(r.warnings[0].starts_with("first reply rejected"));
    assert_eq!(p.calls(), 2);
}

#[test]
fn transient_failures_are_retried_then_surface() {
    let p = MockProvider::default().failing_first(2);
    assert!(encode_description("x", &p, &no_wait(2), &CodecConfig::default()).is_ok());
    assert_eq!(p.calls(), 3);

    let p = MockProvider::default().failing_first(5);
    match encode_description("x", &p, &no_wait(2), &CodecConfig::default()) {
        Err(LlmError::Provider { attempts: 3, source: ProviderError::Transient(_) }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn backoff_doubles() {
    let policy = RetryPolicy { max_retries: 4, base_delay: Duration::from_millis(100) };
    let delays: Vec<u128> = (0..4).map(|r| policy.delay(r).as_millis()).collect();
    assert_eq!(delays, [100, 200, 400, 800]);
}

#[test]
fn fallback_and_out_of_range_values_yield_valid_bundles() {
    let codec = CodecConfig::default();
    let r = encode_description("anything", &MockProvider::default(), &no_wait(0), &codec).unwrap();
    assert_eq!(r.bundle, parse_codes(FALLBACK_REPLY).unwrap().bundle);
    let noisy = CANNED.replace("[1,0,1,4,4,4,4,4,4,1]", "[9,7,1,40,4,4,4,4,4,9]");
    let r = encode_description("n", &mock("n", &noisy), &no_wait(0), &codec).unwrap();
    r.bundle.validate(&codec).unwrap();
    assert!(r.warnings.iter().any(|w| w.contains("clamped")));
    assert_eq!(parse_codes(&serialize_codes(&r.bundle)).unwrap().bundle, r.bundle);
}

#[test]
fn encoding_is_deterministic() {
    let p = MockProvider::default();
    let a = encode_description("same text", &p, &no_wait(0), &CodecConfig::default()).unwrap();
    let b = encode_description("same text", &p, &no_wait(0), &CodecConfig::default()).unwrap();
    assert_eq!(a, b);
}
