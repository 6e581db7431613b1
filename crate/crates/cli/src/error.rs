use std::fmt;

/// Process exit codes.
pub const USAGE: i32 = 2;
pub const DATA: i32 = 3;
pub const NUMERICAL: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            code: DATA,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<mvdenoise::Error> for CliError {
    fn from(e: mvdenoise::Error) -> Self {
        use mvdenoise::Error as E;
        let code = match &e {
            _ if e.is_numerical() => NUMERICAL,
            E::InvalidParameter(_) => USAGE,
            _ => DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::data(format!("JSON: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
