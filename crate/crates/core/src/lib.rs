//! Text analytics for short institutional statements: readability, lexical
//! diversity, co-occurrence networks, network metrics and group comparisons.

pub mod corpus;
pub mod graphmetrics;
pub mod lexmetrics;
pub mod pipeline;
pub mod semnet;
pub mod stats;
pub mod textprep;
