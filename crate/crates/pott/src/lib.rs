//! File formats, fixture corpora and the command line for proof-of-transit
//! timestamping. Protocol logic lives in `pott-core`.

pub mod cli;
pub mod corpus;
pub mod formats;
pub mod report;
pub mod scenario;
