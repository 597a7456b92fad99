pub mod group;
pub mod cayley;
pub mod fire;
pub mod strategies;
pub mod isoperimetry;
pub mod wreath_paths;
pub mod xlab;
