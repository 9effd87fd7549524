pub mod error;
pub mod exploration;
pub mod graph;
pub mod protocol;
pub mod sequences;
pub mod sim;
pub mod verify;
