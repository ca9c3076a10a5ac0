//! The kernel value equals the inner product of the explicit sequence
//! embeddings, at a fraction of the cost.
//!
//! cargo run --example kernel_trick

use karma::{embed, embedding_inner_product, gamma_dims, kernel, ObservedVector};

fn main() -> karma::Result<()> {
    let a = ObservedVector::from_options(&[Some(0.5), None, Some(-0.2), Some(0.1)])?;
    let b = ObservedVector::from_options(&[Some(0.3), Some(0.9), Some(0.4), None])?;
    println!("{:>5} {:>10} {:>14} {:>14}", "gamma", "dims", "kernel", "embedding");
    for gamma in 1..=4 {
        let k = kernel(&a, &b, gamma)?;
        let e = embedding_inner_product(&embed(&a, gamma)?, &embed(&b, gamma)?)?;
        let dims = gamma_dims(a.dim(), gamma)?;
        println!("{gamma:>5} {:>10} {k:>14.10} {e:>14.10}", dims.total);
    }
    Ok(())
}
