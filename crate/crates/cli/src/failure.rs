use std::fmt;

use realpath::Error;

pub const USAGE: u8 = 64;
pub const DATA: u8 = 65;
pub const SOFTWARE: u8 = 70;
pub const IO: u8 = 74;

/// A failed command: a message and its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: USAGE, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self { code: DATA, message: message.into() }
    }

    pub fn context(mut self, path: &std::path::Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Parse(_) => USAGE,
            Error::AllZeroProbability => SOFTWARE,
            _ => DATA,
        };
        Self { code, message: err.to_string() }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(err: serde_json::Error) -> Self {
        Self::usage(format!("config: {err}"))
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Self { code: IO, message: err.to_string() }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;
