mod demo;
mod optimize;
mod simulate;
mod validate;

pub use demo::deliver_demo;
pub use optimize::optimize;
pub use simulate::{analyze, simulate};
pub use validate::validate;

pub(crate) fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
