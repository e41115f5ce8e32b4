pub mod fieldtower;
pub mod linalg;
pub mod poly;
pub mod finitegroups;
pub mod modrep;
pub mod finitehecke;
pub mod localfield;
pub mod proppihecke;
pub mod principalseries;
pub mod weights;
pub mod coeffsystems;
pub mod cli;
