pub mod optimize;
pub mod point;
pub mod rates;
pub mod sweep;
pub mod validate;
