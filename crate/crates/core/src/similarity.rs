//! Coincidence values between two tags from their co-occurrence counts.
//!
//! With `a` and `b` the number of bookmarks carrying each tag and `g` the
//! number carrying both:
//!
//! * Dice: `2g / (a + b)`
//! * Cosine: `g / sqrt(a * b)`
//! * Jaccard-Sneath: `g / (a + b - g)`
//!
//! All three lie in `[0, 1]`, are 0 exactly when `g = 0` and 1 exactly when
//! `a = b = g`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimilarityError {
    #[error("tag counts must be positive (a={a}, b={b})")]
    EmptyTag { a: u32, b: u32 },
    #[error("co-occurrence g={g} exceeds min(a={a}, b={b})")]
    CoocTooLarge { a: u32, b: u32, g: u32 },
}

/// Validated `(a, b, g)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimilarityInput {
    a: u32,
    b: u32,
    g: u32,
}

impl SimilarityInput {
    pub fn new(a: u32, b: u32, g: u32) -> Result<Self, SimilarityError> {
        if a == 0 || b == 0 {
            return Err(SimilarityError::EmptyTag { a, b });
        }
        if g > a.min(b) {
            return Err(SimilarityError::CoocTooLarge { a, b, g });
        }
        Ok(Self { a, b, g })
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn g(&self) -> u32 {
        self.g
    }
}

/// A similarity score in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct CoincidenceValue(f64);

impl CoincidenceValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<CoincidenceValue> for f64 {
    fn from(v: CoincidenceValue) -> f64 {
        v.0
    }
}

pub fn dice(input: SimilarityInput) -> CoincidenceValue {
    let (a, b, g) = as_f64(input);
    CoincidenceValue(2.0 * g / (a + b))
}

pub fn cosine(input: SimilarityInput) -> CoincidenceValue {
    let (a, b, g) = as_f64(input);
    CoincidenceValue(g / (a * b).sqrt())
}

pub fn jaccard(input: SimilarityInput) -> CoincidenceValue {
    let (a, b, g) = as_f64(input);
    CoincidenceValue(g / (a + b - g))
}

fn as_f64(input: SimilarityInput) -> (f64, f64, f64) {
    (f64::from(input.a), f64::from(input.b), f64::from(input.g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Dice,
    Cosine,
    Jaccard,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::Dice, Measure::Cosine, Measure::Jaccard];

    pub fn apply(self, input: SimilarityInput) -> CoincidenceValue {
        match self {
            Measure::Dice => dice(input),
            Measure::Cosine => cosine(input),
            Measure::Jaccard => jaccard(input),
        }
    }

    /// Validates the counts and evaluates the measure.
    pub fn coincidence(self, a: u32, b: u32, g: u32) -> Result<CoincidenceValue, SimilarityError> {
        SimilarityInput::new(a, b, g).map(|input| self.apply(input))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Dice => "dice",
            Measure::Cosine => "cosine",
            Measure::Jaccard => "jaccard",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
#[error("unknown measure {0:?} (expected dice, cosine or jaccard)")]
pub struct ParseMeasureError(String);

impl FromStr for Measure {
    type Err = ParseMeasureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dice" => Ok(Measure::Dice),
            "cosine" => Ok(Measure::Cosine),
            "jaccard" => Ok(Measure::Jaccard),
            other => Err(ParseMeasureError(other.to_string())),
        }
    }
}
