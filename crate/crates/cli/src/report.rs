use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::{Map, Value};

use cheshire_core::Amplitude;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Serialize, Debug)]
pub struct Report {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub inputs: Map<String, Value>,
    pub results: Value,
    pub provenance: Provenance,
}

#[derive(Serialize, Debug, Default)]
pub struct Provenance {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prng: Option<&'static str>,
    pub tolerances: BTreeMap<&'static str, f64>,
}

impl Report {
    pub fn new(command: &'static str, inputs: Map<String, Value>, results: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            inputs,
            results,
            provenance: Provenance::default(),
        }
    }

    pub fn tolerance(mut self, name: &'static str, value: f64) -> Self {
        self.provenance.tolerances.insert(name, value);
        self
    }

    pub fn seeded(mut self, seed: u64, prng: &'static str) -> Self {
        self.provenance.seed = Some(seed);
        self.provenance.prng = Some(prng);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

/// Why a command did not produce a report.
#[derive(Debug)]
pub enum Failure {
    /// Bad user input; exit status 2.
    Input(anyhow::Error),
    /// An internal invariant check failed; exit status 3.
    Numerical(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(e) => write!(f, "error: {e:#}"),
            Failure::Numerical(e) => write!(f, "numerical validation failed: {e:#}"),
        }
    }
}

impl From<cheshire_core::Error> for Failure {
    fn from(e: cheshire_core::Error) -> Self {
        use cheshire_core::Error::*;
        match e {
            BasisMismatch { .. } | WrongKind(_) | InvalidState(_) => Failure::Numerical(e.into()),
            _ => Failure::Input(e.into()),
        }
    }
}

pub type Outcome<T> = Result<T, Failure>;

pub fn input_error(msg: impl fmt::Display) -> Failure {
    Failure::Input(anyhow::anyhow!("{msg}"))
}

/// Fails with exit status 3 unless `cond` holds.
pub fn check(cond: bool, msg: impl FnOnce() -> String) -> Outcome<()> {
    if cond {
        Ok(())
    } else {
        Err(Failure::Numerical(anyhow::anyhow!(msg())))
    }
}

pub fn check_finite(name: &str, x: f64) -> Outcome<f64> {
    check(x.is_finite(), || format!("{name} is not finite ({x})"))?;
    Ok(x)
}

/// `[re, im]`, rejecting non-finite parts. Negative zero is written as 0.
pub fn complex(name: &str, z: Amplitude) -> Outcome<[f64; 2]> {
    Ok([check_finite(name, z.re)? + 0.0, check_finite(name, z.im)? + 0.0])
}
