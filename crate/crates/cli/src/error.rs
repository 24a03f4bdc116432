use std::fmt;
use vg_core::detect::DetectError;
use vg_core::episode::EpisodeError;
use vg_core::eval::EvalError;
use vg_core::planner::PlanError;
use vg_core::scenario::ScenarioError;
use vg_core::world::MapError;

/// An error reported as `error: <code>: <message>` on one line.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn io(what: &str, e: std::io::Error) -> Self {
        Self::new("Io", format!("{what}: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Keep the report on a single line whatever the source said.
        let one_line = self.message.split_whitespace().collect::<Vec<_>>().join(" ");
        write!(f, "error: {}: {}", self.code, one_line)
    }
}

macro_rules! coded {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::new(e.code(), e.to_string())
            }
        }
    )*};
}

coded!(MapError, PlanError, EpisodeError, EvalError, DetectError);

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::new("BadScenario", e.to_string())
    }
}
