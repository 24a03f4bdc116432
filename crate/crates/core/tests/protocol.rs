use proptest::prelude::*;
use serde_json::{json, Value};
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use vg_core::envserver::{
    decode_request, decode_response, encode, serve_tcp, Envelope, ErrorCode, FrameFormat,
    Request, Response, Session,
};
use vg_core::episode::EpisodeConfig;
use vg_core::maps::build_city8;
use vg_core::render::{ObservationStack, STACK_BYTES};
use vg_core::world::{Action, SemanticClass};

fn base() -> EpisodeConfig {
    EpisodeConfig::for_route("W1", "M2")
}

/// Response lines for a script covering every response kind.
fn transcript(script: &[&str]) -> Vec<String> {
    let map = build_city8();
    let mut s = Session::new(&map, base());
    script.iter().map(|l| s.handle_line(l)).collect()
}

const SCRIPT: [&str; 12] = [
    r#"{"id":1,"type":"hello","protocol":"vgenv/1"}"#,
    r#"{"id":2,"type":"step","action":"noop"}"#,
    r#"{"id":3,"type":"reset","seed":4,"config":{"horizon":3}}"#,
    r#"{"id":4,"type":"render","format":"raw"}"#,
    r#"{"id":5,"type":"render","format":"ppm"}"#,
    r#"{"id":6,"type":"step","action":"turn_left"}"#,
    r#"{"id":7,"type":"step","action":"turn_right"}"#,
    r#"{"id":8,"type":"step","action":"noop"}"#,
    r#"{"id":9,"type":"step","action":"noop"}"#,
    r#"{"id":10,"type":"warp"}"#,
    r#"not json"#,
    r#"{"id":"last","type":"close"}"#,
];

#[test]
fn every_response_kind_round_trips() {
    let lines = transcript(&SCRIPT);
    let mut kinds = std::collections::BTreeSet::new();
    for line in &lines {
        let msg = decode_response(line).unwrap();
        assert_eq!(&encode(&msg), line);
        assert_eq!(decode_response(&encode(&msg)).unwrap(), msg);
        let v: Value = serde_json::from_str(line).unwrap();
        kinds.insert(v["type"].as_str().unwrap().to_string());
    }
    let expected: std::collections::BTreeSet<String> =
        ["spec", "observation", "frame", "closed", "error"].iter().map(|s| s.to_string()).collect();
    assert_eq!(kinds, expected);
}

#[test]
fn every_request_kind_round_trips() {
    for line in SCRIPT.iter().filter(|l| !l.contains("warp") && !l.contains("not json")) {
        let req = decode_request(line).unwrap();
        let again = decode_request(&encode(&req)).unwrap();
        assert_eq!(again, req);
    }
}

#[test]
fn observation_payload_is_a_frame_stack() {
    let lines = transcript(&SCRIPT);
    let Response::Observation(obs) = decode_response(&lines[2]).unwrap().body else {
        panic!("{}", lines[2])
    };
    assert_eq!(obs.frames.0.len(), STACK_BYTES);
    assert_eq!(STACK_BYTES, 45_360);
    assert!(obs.frames.0.iter().all(|&b| SemanticClass::from_id(b).is_some()));
    let stack = ObservationStack::from_bytes(&obs.frames.0).unwrap();
    assert_eq!(stack.to_bytes(), obs.frames.0);
    let Response::Frame(raw) = decode_response(&lines[3]).unwrap().body else { panic!() };
    assert_eq!((raw.format, raw.rows, raw.cols, raw.data.0.len()), (FrameFormat::Raw, 84, 180, 84 * 180));
    assert_eq!(raw.data.0, stack.latest().as_bytes());
}

#[test]
fn state_machine_rejections() {
    let lines = transcript(&SCRIPT);
    let code = |i: usize| match decode_response(&lines[i]).unwrap().body {
        Response::Error { code, .. } => Some(code),
        _ => None,
    };
    assert_eq!(code(1), Some(ErrorCode::NoEpisode));
    assert_eq!(code(7), None, "third step reaches the horizon");
    assert_eq!(code(8), Some(ErrorCode::EpisodeDone));
    assert_eq!(code(9), Some(ErrorCode::UnknownType));
    assert_eq!(code(10), Some(ErrorCode::Malformed));
    assert_eq!(decode_response(&lines[11]).unwrap().id, Some(json!("last")));
}

fn client_run(addr: std::net::SocketAddr, script: &[String]) -> Vec<String> {
    let stream = TcpStream::connect(addr).unwrap();
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut writer = stream;
    let mut out = Vec::new();
    for line in script {
        writeln!(writer, "{line}").unwrap();
        let mut reply = String::new();
        reader.read_line(&mut reply).unwrap();
        out.push(reply);
    }
    out
}

#[test]
fn tcp_sessions_with_same_seed_are_identical() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = std::thread::spawn(move || serve_tcp(listener, Arc::new(build_city8()), base(), Some(2)));
    let mut script = vec![r#"{"type":"hello"}"#.to_string(), r#"{"type":"reset","seed":11}"#.to_string()];
    for k in 0..30 {
        let a = ["noop", "turn_left", "turn_right", "turn_right"][k % 4];
        script.push(format!(r#"{{"type":"step","action":"{a}"}}"#));
    }
    script.push(r#"{"type":"close"}"#.to_string());
    let s1 = script.clone();
    let first = std::thread::spawn(move || client_run(addr, &s1));
    let second = client_run(addr, &script);
    let first = first.join().unwrap();
    server.join().unwrap().unwrap();
    assert_eq!(first.len(), script.len());
    assert_eq!(first, second);
}

fn action() -> impl Strategy<Value = Action> {
    prop_oneof![Just(Action::Noop), Just(Action::TURN_LEFT), Just(Action::TURN_RIGHT)]
}

fn id() -> impl Strategy<Value = Option<Value>> {
    prop_oneof![
        Just(None),
        any::<i64>().prop_map(|n| Some(json!(n))),
        "[a-z0-9-]{0,8}".prop_map(|s| Some(json!(s))),
    ]
}

fn request() -> impl Strategy<Value = Request> {
    prop_oneof![
        proptest::option::of("[a-z/0-9]{1,8}").prop_map(|protocol| Request::Hello { protocol }),
        (proptest::option::of(any::<u64>()), proptest::option::of(0u64..5000))
            .prop_map(|(seed, horizon)| Request::Reset { seed, config: horizon.map(|h| json!({"horizon": h})) }),
        action().prop_map(|action| Request::Step { action }),
        prop_oneof![Just(FrameFormat::Raw), Just(FrameFormat::Ppm)].prop_map(|format| Request::Render { format }),
        Just(Request::Close),
    ]
}

proptest! {
    #[test]
    fn arbitrary_requests_round_trip(id in id(), body in request()) {
        let msg = Envelope::new(id, body);
        let line = encode(&msg);
        let back = decode_request(&line).unwrap();
        prop_assert_eq!(&back, &msg);
        prop_assert_eq!(encode(&back), line);
    }

    #[test]
    fn error_responses_round_trip(id in id(), message in ".{0,40}") {
        let msg = Envelope::new(id, Response::error(ErrorCode::BadConfig, message));
        let line = encode(&msg);
        prop_assert_eq!(decode_response(&line).unwrap(), msg);
    }
}
