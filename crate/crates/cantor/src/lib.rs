//! Exact structure of `C ∩ (C + t)` for deleted-digits Cantor sets `C = C_{n,D}`.

pub mod betaexp;
pub mod cli;
pub mod digitset;
pub mod equivalence;
pub mod error;
pub mod intervals;
pub mod kernel;
pub mod measure;
pub mod radix;

pub use digitset::{Classification, DigitSet, SliceSet};
pub use error::{Error, Result};
pub use radix::{Alphabet, PeriodicCode, Rational};
