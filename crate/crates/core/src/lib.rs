pub mod expr;
pub mod geometry;
pub mod linalg;
pub mod maps;
pub mod forms;
pub mod integrate;
pub mod report;
pub mod symbol;
pub mod certify;
pub mod document;
pub mod gallery;
pub mod pipeline;
pub mod cli;
