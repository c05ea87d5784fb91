#![no_std]
#![doc = include_str!("../README.md")]

extern crate alloc;

pub mod boundary;
pub mod boxes;
pub mod circle;
pub mod domain;
pub mod error;
pub mod fft;
pub mod field;
pub mod green;
pub mod kpz;
mod linalg;
pub mod measure;
pub mod passage;
pub mod rng;
pub mod rooted;
pub mod stats;

pub use domain::{DomainKind, DomainSpec, Point};
pub use error::{Error, Result};
pub use field::{Field, FieldTag, GffSampler};
