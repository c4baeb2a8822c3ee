pub mod error;
pub mod numkit;
pub mod schemes;
pub mod system;
pub mod dynamics;
pub mod holonomy;
pub mod bench;
pub mod cli;
