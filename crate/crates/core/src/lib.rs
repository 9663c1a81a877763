pub mod amr;
pub mod axes;
pub mod config;
pub mod corpus;
pub mod labels;
pub mod metagraph;
pub mod providers;
pub mod report;
pub mod stats;
pub mod synthetic;
