use super::protocol::{
    decode_request, encode, Envelope, ErrorCode, FrameFormat, FrameMsg, ObservationMsg, Request,
    Response, SpecMsg, PROTOCOL,
};
use crate::episode::{Episode, EpisodeConfig, EpisodeError};
use crate::render::{FRAME_COLS, FRAME_ROWS};
use crate::world::CityMap;
use serde_json::Value;
use std::io::{self, BufRead, Write};
use std::net::TcpListener;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionState {
    Idle,
    Running,
    Terminal,
}

/// One client connection. Owns at most one episode.
pub struct Session<'m> {
    map: &'m CityMap,
    base: EpisodeConfig,
    episode: Option<Episode<'m>>,
    closed: bool,
}

/// Recursively overlays `patch` onto `target`; objects merge, anything else replaces.
fn merge(target: &mut Value, patch: Value) {
    match (target, patch) {
        (Value::Object(t), Value::Object(p)) => {
            for (k, v) in p {
                merge(t.entry(k).or_insert(Value::Null), v);
            }
        }
        (t, p) => *t = p,
    }
}

impl<'m> Session<'m> {
    pub fn new(map: &'m CityMap, base: EpisodeConfig) -> Self {
        Self {
            map,
            base,
            episode: None,
            closed: false,
        }
    }

    pub fn state(&self) -> SessionState {
        match &self.episode {
            None => SessionState::Idle,
            Some(ep) if ep.is_done() => SessionState::Terminal,
            Some(_) => SessionState::Running,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    fn observation(&self) -> Response {
        let ep = self.episode.as_ref().expect("caller checked");
        let msg = ObservationMsg::from_observation(&ep.observation(), ep.outcome())
            .expect("server episodes always render");
        Response::Observation(msg)
    }

    fn reset(&mut self, seed: Option<u64>, overrides: Option<Value>) -> Response {
        // A reset while running drops the old episode first.
        self.episode = None;
        let mut config = self.base.clone();
        if let Some(patch) = overrides {
            let mut merged = serde_json::to_value(&config).expect("config serializes");
            merge(&mut merged, patch);
            config = match serde_json::from_value(merged) {
                Ok(c) => c,
                Err(e) => return Response::error(ErrorCode::BadConfig, e.to_string()),
            };
        }
        if let Some(seed) = seed {
            config.seed = seed;
        }
        match Episode::new(self.map, config, true) {
            Ok(ep) => {
                self.episode = Some(ep);
                self.observation()
            }
            Err(EpisodeError::Plan(e)) => Response::error(ErrorCode::PlanError, e.to_string()),
            Err(e) => Response::error(ErrorCode::BadConfig, e.to_string()),
        }
    }

    pub fn handle(&mut self, req: Envelope<Request>) -> Envelope<Response> {
        let body = match req.body {
            Request::Hello { protocol } => match protocol {
                Some(p) if p != PROTOCOL => Response::error(
                    ErrorCode::VersionMismatch,
                    format!("server speaks {PROTOCOL}, client asked for {p}"),
                ),
                _ => Response::Spec(SpecMsg::for_map(self.map.name())),
            },
            Request::Reset { seed, config } => self.reset(seed, config),
            Request::Step { action } => match self.state() {
                SessionState::Idle => Response::error(ErrorCode::NoEpisode, "step before reset"),
                SessionState::Terminal => {
                    Response::error(ErrorCode::EpisodeDone, "episode is over, send reset")
                }
                SessionState::Running => {
                    let ep = self.episode.as_mut().expect("running");
                    match ep.step(action) {
                        Ok(_) => self.observation(),
                        Err(EpisodeError::Plan(e)) => {
                            Response::error(ErrorCode::PlanError, e.to_string())
                        }
                        Err(e) => Response::error(ErrorCode::EpisodeDone, e.to_string()),
                    }
                }
            },
            Request::Render { format } => match &self.episode {
                None => Response::error(ErrorCode::NoEpisode, "render before reset"),
                Some(ep) => {
                    let frame = ep.render_current();
                    let data = match format {
                        FrameFormat::Raw => frame.as_bytes().to_vec(),
                        FrameFormat::Ppm => frame.to_ppm(),
                    };
                    Response::Frame(FrameMsg {
                        format,
                        rows: FRAME_ROWS,
                        cols: FRAME_COLS,
                        data: super::protocol::Payload(data),
                    })
                }
            },
            Request::Close => {
                self.closed = true;
                self.episode = None;
                Response::Closed
            }
        };
        Envelope::new(req.id, body)
    }

    /// Handles one raw request line and returns the response line (no newline).
    pub fn handle_line(&mut self, line: &str) -> String {
        let response = match decode_request(line) {
            Ok(req) => self.handle(req),
            Err(err) => err,
        };
        encode(&response)
    }
}

/// Serves one session over a line stream until `close` or end of input.
pub fn serve_stream<R: BufRead, W: Write>(
    map: &CityMap,
    base: &EpisodeConfig,
    reader: R,
    mut writer: W,
) -> io::Result<()> {
    let mut session = Session::new(map, base.clone());
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let out = session.handle_line(&line);
        writer.write_all(out.as_bytes())?;
        writer.write_all(b"\n")?;
        writer.flush()?;
        if session.is_closed() {
            break;
        }
    }
    Ok(())
}

/// Accepts connections and serves each on its own thread. Stops after
/// `limit` connections when given, waiting for their sessions to end.
pub fn serve_tcp(
    listener: TcpListener,
    map: Arc<CityMap>,
    base: EpisodeConfig,
    limit: Option<usize>,
) -> io::Result<()> {
    let mut handles = Vec::new();
    for (n, stream) in listener.incoming().enumerate() {
        let stream = stream?;
        let map = Arc::clone(&map);
        let base = base.clone();
        handles.push(std::thread::spawn(move || -> io::Result<()> {
            let reader = io::BufReader::new(stream.try_clone()?);
            serve_stream(&map, &base, reader, stream)
        }));
        if limit.is_some_and(|l| n + 1 >= l) {
            break;
        }
    }
    for h in handles {
        // A broken connection only ends its own session.
        let _ = h.join();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envserver::protocol::decode_response;
    use crate::render::STACK_BYTES;

    fn session_map() -> CityMap {
        crate::maps::build_city8()
    }

    fn base() -> EpisodeConfig {
        EpisodeConfig::for_route("N1", "S1")
    }

    fn reply(s: &mut Session<'_>, line: &str) -> Response {
        decode_response(&s.handle_line(line)).unwrap().body
    }

    fn code(r: Response) -> ErrorCode {
        match r {
            Response::Error { code, .. } => code,
            other => panic!("expected error, got {other:?}"),
        }
    }

    #[test]
    fn state_machine() {
        let map = session_map();
        let mut s = Session::new(&map, base());
        assert!(matches!(reply(&mut s, r#"{"type":"hello"}"#), Response::Spec(_)));
        assert_eq!(code(reply(&mut s, r#"{"type":"step","action":"noop"}"#)), ErrorCode::NoEpisode);
        assert_eq!(code(reply(&mut s, r#"{"type":"render"}"#)), ErrorCode::NoEpisode);
        let Response::Observation(obs) = reply(&mut s, r#"{"type":"reset","seed":3,"config":{"horizon":2}}"#) else {
            panic!()
        };
        assert_eq!(obs.frames.0.len(), STACK_BYTES);
        assert!(!obs.terminal);
        assert_eq!(s.state(), SessionState::Running);
        reply(&mut s, r#"{"type":"step","action":"noop"}"#);
        let Response::Observation(last) = reply(&mut s, r#"{"type":"step","action":"noop"}"#) else {
            panic!()
        };
        assert!(last.terminal);
        assert_eq!(s.state(), SessionState::Terminal);
        assert_eq!(code(reply(&mut s, r#"{"type":"step","action":"noop"}"#)), ErrorCode::EpisodeDone);
        assert!(matches!(reply(&mut s, r#"{"type":"render","format":"ppm"}"#), Response::Frame(_)));
        // a fresh reset works from Terminal
        assert!(matches!(reply(&mut s, r#"{"type":"reset"}"#), Response::Observation(_)));
        assert!(matches!(reply(&mut s, r#"{"type":"close"}"#), Response::Closed));
        assert!(s.is_closed());
    }

    #[test]
    fn reset_while_running_starts_over() {
        let map = session_map();
        let mut s = Session::new(&map, base());
        reply(&mut s, r#"{"type":"reset"}"#);
        reply(&mut s, r#"{"type":"step","action":"turn_left"}"#);
        let Response::Observation(obs) = reply(&mut s, r#"{"type":"reset"}"#) else { panic!() };
        assert_eq!(obs.t, 0);
    }

    #[test]
    fn config_errors() {
        let map = session_map();
        let mut s = Session::new(&map, base());
        let r = reply(&mut s, r#"{"type":"reset","config":{"warp":1}}"#);
        assert_eq!(code(r), ErrorCode::BadConfig);
        let r = reply(&mut s, r#"{"type":"reset","config":{"route":["N1","Q7"]}}"#);
        assert_eq!(code(r), ErrorCode::BadConfig);
        let r = reply(&mut s, r#"{"type":"hello","protocol":"vgenv/2"}"#);
        assert_eq!(code(r), ErrorCode::VersionMismatch);
        assert_eq!(s.state(), SessionState::Idle);
    }

    #[test]
    fn ids_are_echoed() {
        let map = session_map();
        let mut s = Session::new(&map, base());
        let out = decode_response(&s.handle_line(r#"{"id":"x-1","type":"hello"}"#)).unwrap();
        assert_eq!(out.id, Some(Value::from("x-1")));
        let out = decode_response(&s.handle_line(r#"{"id":9,"type":"nope"}"#)).unwrap();
        assert_eq!(out.id, Some(Value::from(9)));
    }

    #[test]
    fn rewards_are_consistent() {
        let map = session_map();
        let mut s = Session::new(&map, base());
        reply(&mut s, r#"{"type":"reset","config":{"horizon":40}}"#);
        for k in 0.. {
            let action = ["noop", "turn_left", "turn_right"][k % 3];
            match reply(&mut s, &format!(r#"{{"type":"step","action":"{action}"}}"#)) {
                Response::Observation(o) => {
                    assert!(o.reward.is_consistent());
                    if o.terminal {
                        break;
                    }
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn stream_serving_stops_at_close() {
        let map = session_map();
        let input = "{\"type\":\"hello\"}\n\n{\"type\":\"close\"}\n{\"type\":\"hello\"}\n";
        let mut out = Vec::new();
        serve_stream(&map, &base(), input.as_bytes(), &mut out).unwrap();
        let lines: Vec<_> = String::from_utf8(out).unwrap().lines().map(str::to_string).collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1], r#"{"type":"closed"}"#);
    }
}
