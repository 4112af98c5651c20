pub mod domquery;
pub mod filterlist;
pub mod fixture;
pub mod harvest;
pub mod inference;
pub mod noticemetrics;
pub mod report;
