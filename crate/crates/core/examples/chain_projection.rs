//! Projects a random pair `(w, v)` onto `{(z, s) : s_i = z_{i+1} - z_i}`.
//!
//! cargo run --example chain_projection

use tvadmm::{chain_factor, project, BlockVector};

fn main() -> tvadmm::Result<()> {
    let w = BlockVector::new(vec![vec![1.0, 0.0], vec![4.0, 1.0], vec![2.0, 2.0], vec![0.0, 3.0]])?;
    let v = BlockVector::new(vec![vec![0.5, 0.5], vec![-1.0, 0.0], vec![0.0, 1.0]])?;

    let chol = chain_factor(w.n_blocks())?;
    println!("factor diagonal:    {:?}", chol.diag);
    println!("factor subdiagonal: {:?}", chol.subdiag);

    let (z, s) = project(&chol, &w, &v)?;
    for (i, zi) in z.blocks().enumerate() {
        println!("z[{i}] = {zi:?}");
    }
    for (i, si) in s.blocks().enumerate() {
        println!("s[{i}] = {si:?}");
    }
    Ok(())
}
