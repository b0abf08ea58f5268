//! Prints the central second-derivative and staggered first-derivative
//! weights for every supported order.

use stencil_tb::fd::{fd_weights, staggered_weights, MAX_SPACE_ORDER};

fn main() -> stencil_tb::Result<()> {
    for so in (2..=MAX_SPACE_ORDER).step_by(2) {
        let c = fd_weights(so)?;
        let s = staggered_weights(so)?;
        let row = |w: &[f64]| w.iter().map(|v| format!("{v:+.6}")).collect::<Vec<_>>().join(" ");
        println!("so={so:2}  d2: {}", row(&c.weights));
        println!("       d1: {}", row(&s.weights));
    }
    Ok(())
}
