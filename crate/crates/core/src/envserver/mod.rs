//! Environment server speaking `vgenv/1` over TCP or standard streams.

pub mod protocol;
mod remote;
mod session;

pub use protocol::{
    decode_request, decode_response, encode, Envelope, ErrorCode, FrameFormat, ObservationMsg,
    Request, Response, SpecMsg, PROTOCOL,
};
pub use remote::RemotePolicy;
pub use session::{serve_stream, serve_tcp, Session, SessionState};
