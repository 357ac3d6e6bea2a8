pub mod graph;
pub mod snapshot;
pub mod cypher;
pub mod etl;
pub mod http;
pub mod mcp;
