//! Finite-support digit strings.
//!
//! Text form: whitespace-separated signed integers with exactly one
//! standalone `.` token marking the radix point, most significant first,
//! e.g. `"1 0 . 1"` is `beta + beta^-1`. The zero string prints as `.`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("missing radix marker `.` (at byte {offset})")]
    MissingRadix { offset: usize },
    #[error("second radix marker at byte {offset}")]
    DuplicateRadix { offset: usize },
    #[error("invalid digit `{token}` at byte {offset}")]
    InvalidDigit { token: String, offset: usize },
}

/// Digits `digits[0] beta^(e+n-1) + ... + digits[n-1] beta^e` where
/// `e = lsd_exponent`. The zero value has no digits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DigitString {
    pub lsd_exponent: i64,
    pub digits: Vec<i64>,
}

impl DigitString {
    pub fn zero() -> Self {
        DigitString {
            lsd_exponent: 0,
            digits: Vec::new(),
        }
    }

    /// Most significant digit first.
    pub fn new(lsd_exponent: i64, digits: Vec<i64>) -> Self {
        DigitString {
            lsd_exponent,
            digits,
        }
    }

    /// Integer-part digits only (`lsd_exponent = 0`), normalized.
    pub fn integer(digits: Vec<i64>) -> Self {
        DigitString::new(0, digits).normalize()
    }

    /// Builds from least-significant-first digits.
    pub fn from_lsd_first(lsd_exponent: i64, mut lsd_first: Vec<i64>) -> Self {
        lsd_first.reverse();
        DigitString::new(lsd_exponent, lsd_first)
    }

    pub fn to_lsd_first(&self) -> Vec<i64> {
        self.digits.iter().rev().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Exponent of the most significant stored digit (`None` when empty).
    pub fn msd_exponent(&self) -> Option<i64> {
        if self.digits.is_empty() {
            None
        } else {
            Some(self.lsd_exponent + self.digits.len() as i64 - 1)
        }
    }

    /// Digit at exponent `e` (zero outside the stored range).
    pub fn digit_at(&self, e: i64) -> i64 {
        let Some(msd) = self.msd_exponent() else {
            return 0;
        };
        if e < self.lsd_exponent || e > msd {
            0
        } else {
            self.digits[(msd - e) as usize]
        }
    }

    /// Trims leading and trailing zeros; the zero value becomes empty.
    pub fn normalize(&self) -> Self {
        let first = self.digits.iter().position(|&d| d != 0);
        let Some(first) = first else {
            return DigitString::zero();
        };
        let last = self.digits.iter().rposition(|&d| d != 0).unwrap();
        let trailing = (self.digits.len() - 1 - last) as i64;
        DigitString {
            lsd_exponent: self.lsd_exponent + trailing,
            digits: self.digits[first..=last].to_vec(),
        }
    }

    pub fn is_normalized(&self) -> bool {
        *self == self.normalize()
    }

    pub fn negate_digits(&self) -> Self {
        DigitString {
            lsd_exponent: self.lsd_exponent,
            digits: self.digits.iter().map(|d| -d).collect(),
        }
    }

    /// Multiplies the value by `beta^k`.
    pub fn shift_exponent(&self, k: i64) -> Self {
        if self.digits.is_empty() {
            return self.clone();
        }
        DigitString {
            lsd_exponent: self.lsd_exponent + k,
            digits: self.digits.clone(),
        }
    }

    pub fn min_digit(&self) -> Option<i64> {
        self.digits.iter().copied().min()
    }

    pub fn max_digit(&self) -> Option<i64> {
        self.digits.iter().copied().max()
    }

    /// Dense least-significant-first copy covering exponents `[lo, lo+len)`.
    pub fn dense_lsd_first(&self, lo: i64, len: usize) -> Vec<i64> {
        (0..len as i64).map(|i| self.digit_at(lo + i)).collect()
    }
}

/// Parses the text grammar; the result is normalized.
pub fn parse_digit_string(text: &str) -> Result<DigitString, ParseError> {
    let mut left: Vec<i64> = Vec::new();
    let mut right: Vec<i64> = Vec::new();
    let mut radix_seen = false;
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        let token = &text[start..i];
        if token == "." {
            if radix_seen {
                return Err(ParseError::DuplicateRadix { offset: start });
            }
            radix_seen = true;
            continue;
        }
        let digit: i64 = token.parse().map_err(|_| ParseError::InvalidDigit {
            token: token.to_string(),
            offset: start,
        })?;
        if radix_seen {
            right.push(digit);
        } else {
            left.push(digit);
        }
    }
    if !radix_seen {
        return Err(ParseError::MissingRadix { offset: text.len() });
    }
    let lsd_exponent = -(right.len() as i64);
    left.extend(right);
    Ok(DigitString::new(lsd_exponent, left).normalize())
}

/// Canonical text: integer part always present (at least one digit) for
/// nonzero values, fractional part only when needed.
pub fn format_digit_string(ds: &DigitString) -> String {
    let ds = ds.normalize();
    let Some(msd) = ds.msd_exponent() else {
        return ".".to_string();
    };
    let hi = msd.max(0);
    let lo = ds.lsd_exponent.min(0);
    let mut out = String::new();
    for e in (0..=hi).rev() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&ds.digit_at(e).to_string());
    }
    out.push_str(" .");
    for e in (lo..0).rev() {
        out.push(' ');
        out.push_str(&ds.digit_at(e).to_string());
    }
    out
}

/// Normalizing free function.
pub fn normalize(ds: &DigitString) -> DigitString {
    ds.normalize()
}

impl fmt::Display for DigitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_digit_string(self))
    }
}

impl FromStr for DigitString {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_digit_string(s)
    }
}
