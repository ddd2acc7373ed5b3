pub mod assign;
pub mod cli;
pub mod config;
pub mod data;
pub mod distortion;
pub mod encode;
pub mod error;
pub mod init;
pub mod io;
pub mod linalg;
pub mod lloyd;
pub mod model;
pub(crate) mod par;
pub mod search;
pub mod synthetic;
pub mod trainer;
pub mod update;

pub use config::{AssignOrder, InitScheme, TrainConfig};
pub use data::{CodeMatrix, CodebookSet, DataMatrix};
pub use distortion::{reconstruct, relative_distortion};
pub use error::{Error, Result};
pub use model::Model;
