pub mod meter;
pub mod instances;
pub mod algorithms;
pub mod treelang;
pub mod xpath;
pub mod sweep;
