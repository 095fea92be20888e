pub mod grounding;
pub mod logic;
pub mod query;
pub mod reasoner;
pub mod overlay;
pub mod dataset;
