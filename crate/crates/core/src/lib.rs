pub mod envbridge;
pub mod error;
pub mod experiment;
pub mod nas;
pub mod optim;
pub mod qnet;
pub mod qsim;
pub mod rl;
pub mod seeding;

pub use error::{Error, Result};
