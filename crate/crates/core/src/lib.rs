//! Exact parallel addition in non-standard positional numeration systems.
//!
//! A number is a finite digit string over a contiguous alphabet in a base
//! beta (negative integer, root of an integer, quadratic Pisot unit or
//! rational). Addition is done digitwise and the result is brought back to
//! the alphabet by a fixed number of passes of local rules, each output digit
//! depending only on a bounded window of input digits.

pub mod adder;
pub mod algebra;
pub mod bench;
pub mod bounds;
pub mod cli;
pub mod digits;
pub mod engine;
pub mod expansions;
pub mod field;
pub mod interval;
pub mod oracle;
pub mod rules;
pub mod system;

pub use digits::{format_digit_string, parse_digit_string, DigitString};
pub use system::{make_system, Alphabet, BaseFamily, BaseSpec, CoreError, NumerationSystem};
