//! Pipeline driver for the `poseval` toolkit: configuration, ingestion
//! orchestration, trial execution, aggregation and artifact output.

pub mod config;
pub mod demo;
pub mod inspect;
pub mod outputs;
pub mod pipeline;

/// Exit codes for the `poseval` binary.
pub mod exit_codes {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const CATALOG: i32 = 3;
    pub const ADAPTER: i32 = 4;
}

/// Maps a pipeline error onto the documented exit codes.
pub fn exit_code_for(err: &pipeline::PipelineError) -> i32 {
    use pipeline::PipelineError::*;
    match err {
        Config(_) => exit_codes::CONFIG,
        Parse(_) | Io(_) => exit_codes::PARSE,
        Catalog(_) => exit_codes::CATALOG,
        Trial(_) => exit_codes::ADAPTER,
    }
}
