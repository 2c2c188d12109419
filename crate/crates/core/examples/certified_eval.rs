//! Minimal certified evaluation, as shown in the README.

use qlho::operator::apply;
use qlho::{OperatorParams64, QBase64, TestFunction64};

fn main() -> Result<(), qlho::Error> {
    let params = OperatorParams64::new(10, QBase64::new(0.9)?, vec![0.8], 1e-10)?;
    let g = TestFunction64::smooth_sample();
    let out = apply(&g, 0.5, &params)?;
    println!(
        "value {} is within {} of the full series ({} terms)",
        out.value, out.error_bound, out.terms
    );
    Ok(())
}
