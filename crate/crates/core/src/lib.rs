//! Exact piecewise-linear machinery for Thompson's group F, free-ball
//! certificates, and markings that converge to a free group.

pub mod free_approx;
pub mod marked_space;
pub mod marking;
pub mod pl;
pub mod rational;
pub mod slp;
pub mod thompson;
pub mod word;

pub use pl::{compose, Affine, PlError, PlMap, SupportSet};
pub use rational::Rational;
pub use slp::{SlpBuilder, SlpError, SlpNode, SlpWord};
pub use word::{Word, WordError};
