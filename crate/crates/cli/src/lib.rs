//! Command-line tool and HTTP gateway for synchro applications.

pub mod commands;
pub mod config;
pub mod gateway;
pub mod input;

pub use commands::Report;
pub use config::AppConfig;
pub use gateway::{router, Gateway};
