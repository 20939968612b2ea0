//! Evaluates each built-in proximal map once.
//!
//! cargo run --example proximal_maps

use tvadmm::{
    prox_gaussian, prox_neg_logdet, soft_threshold_group, soft_threshold_scalar, BlockVector, GaussianProxCache,
    SymMatrix,
};

fn main() -> tvadmm::Result<()> {
    let a = [3.0, -4.0];
    println!("group threshold, kappa = 1:  {:?}", soft_threshold_group(&a, 1.0)?);
    println!("scalar threshold, kappa = 1: {:?}", soft_threshold_scalar(&a, 1.0)?);

    let sigma = SymMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]])?;
    let y = BlockVector::new(vec![vec![1.0, -1.0]])?;
    let cache = GaussianProxCache::new(&sigma, &y, 0.5)?;
    println!(
        "gaussian prox toward (0, 0):  {:?}",
        prox_gaussian(&cache, 0, &[0.0, 0.0])?
    );

    let v = SymMatrix::from_rows(&[vec![0.2, 0.1], vec![0.1, -0.3]])?;
    let x = prox_neg_logdet(&v, &[1.0, 0.5], 2.0)?;
    println!("log-det prox: {:?}", x.as_slice());
    Ok(())
}
