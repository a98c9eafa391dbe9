//! The discrete operators: divergence and its adjoint, total variation,
//! and the jump operator of a torn partition.

use tvdd::decomposition::InterfaceMultiplier;
use tvdd::grid::{inner, inner_dual, tv_maximizer};
use tvdd::prelude::*;

fn main() -> tvdd::Result<()> {
    let shape = GridShape::new(4, 5)?;
    let u = ImageField::from_fn(shape, |i, j| ((i * 7 + j * 3) % 5) as f64 / 4.0);

    // <div p, u> = <p, div* u>
    let p = project_unit_ball(&divergence_adjoint(&u.map(|x| 3.0 * x)));
    let lhs = inner(&divergence(&p), &u);
    let rhs = inner_dual(&p, &divergence_adjoint(&u));
    println!("adjoint identity: {lhs:.6} vs {rhs:.6}");

    let q = tv_maximizer(&u);
    println!(
        "TV(u) = {:.6}, <div* u, sign(div* u)> = {:.6}",
        total_variation(&u),
        inner_dual(&divergence_adjoint(&u), &q)
    );

    let partition = Partition::uniform(shape, 2, 2)?;
    println!(
        "{} subdomains, {} interface edges ({} vertical), {} torn dofs vs {} global edges",
        partition.len(),
        partition.interface_len(),
        partition.vertical_interface_len(),
        partition.torn_dof_count(),
        shape.edges()
    );

    // Tearing a global field gives a jump-free torn field that reassembles exactly.
    let torn = partition.tear(&p)?;
    println!("max |B tear(p)| = {:.1e}", partition.jump(&torn)?.max_abs());
    println!("assemble(tear(p)) == p: {}", partition.assemble(&torn, 0.0)? == p);

    // B B* = 2 I
    let lambda = InterfaceMultiplier::new((0..partition.interface_len()).map(|k| k as f64).collect());
    let back = partition.jump(&partition.jump_adjoint(&lambda)?)?;
    println!("B B* lambda == 2 lambda: {}", back.values().iter().zip(lambda.values()).all(|(a, b)| *a == 2.0 * b));
    Ok(())
}
