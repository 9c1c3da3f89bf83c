//! Library surface of the `posmod` command-line workbench: workspace
//! loading, report assembly, and the bundled verification suite.

pub mod context;
pub mod report;
pub mod verify;
