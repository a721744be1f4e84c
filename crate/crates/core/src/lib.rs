pub mod cli;
pub mod diagnostics;
pub mod dynamics;
pub mod minnorm;
pub mod objectives;
pub mod trajio;
pub mod vecops;
