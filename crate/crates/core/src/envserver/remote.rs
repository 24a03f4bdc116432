use super::protocol::{decode_request, encode, Envelope, ObservationMsg, Request, Response};
use crate::episode::Observation;
use crate::policies::{Policy, PolicyError};
use crate::world::Action;
use std::io::{BufRead, Write};

/// A policy driven by an external agent over `vgenv/1` framing.
///
/// Roles are reversed from [`super::serve_stream`]: this side writes an
/// `observation` message each step and expects a `step` request back.
pub struct RemotePolicy<R, W> {
    reader: R,
    writer: W,
    next_id: u64,
}

impl<R: BufRead, W: Write> RemotePolicy<R, W> {
    pub fn new(reader: R, writer: W) -> Self {
        Self {
            reader,
            writer,
            next_id: 0,
        }
    }

    fn read_action(&mut self) -> Result<Action, PolicyError> {
        let mut line = String::new();
        loop {
            line.clear();
            if self.reader.read_line(&mut line)? == 0 {
                return Err(PolicyError::Remote("agent closed the stream".into()));
            }
            if !line.trim().is_empty() {
                break;
            }
        }
        match decode_request(line.trim_end()) {
            Ok(Envelope {
                body: Request::Step { action },
                ..
            }) => Ok(action),
            Ok(Envelope { body, .. }) => Err(PolicyError::Remote(format!(
                "expected a step request, got {}",
                encode(&Envelope::new(None, body))
            ))),
            Err(Envelope {
                body: Response::Error { code, message },
                ..
            }) => Err(PolicyError::Remote(format!("{code:?}: {message}"))),
            Err(other) => Err(PolicyError::Remote(encode(&other))),
        }
    }
}

impl<R: BufRead + Send, W: Write + Send> Policy for RemotePolicy<R, W> {
    fn name(&self) -> &'static str {
        "remote"
    }

    fn wants_frames(&self) -> bool {
        true
    }

    fn act(&mut self, obs: &Observation<'_>) -> Result<Action, PolicyError> {
        let msg = ObservationMsg::from_observation(obs, None)
            .ok_or_else(|| PolicyError::Remote("no frames rendered".into()))?;
        let out = Envelope::new(Some(self.next_id.into()), Response::Observation(msg));
        self.next_id += 1;
        writeln!(self.writer, "{}", encode(&out))?;
        self.writer.flush()?;
        self.read_action()
    }
}
