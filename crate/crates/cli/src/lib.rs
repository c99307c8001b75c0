//! `advtax` command-line tool and local HTTP API.

pub mod cli;
pub mod config;
pub mod error;
pub mod server;
pub mod workspace;

pub use cli::run;
pub use config::{WorkspaceConfig, DATA_DIR_ENV};
pub use error::WorkspaceError;
pub use workspace::Workspace;
