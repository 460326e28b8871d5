//! Prints the Legendre projection kernels of increasing order with their
//! moment tables: order M means unit mass and vanishing moments 1..=M,
//! which is what buys bias of order h^beta for beta <= M targets.

use fracdensity::kernels::{kernel_moment, Kernel1D};

fn main() -> fracdensity::Result<()> {
    for order in [0usize, 2, 4, 6] {
        let kernel = Kernel1D::legendre(order);
        println!("order M = {order} (polynomial degree {})", kernel.degree());
        print!("  moments:");
        let mut worst = 0.0f64;
        for i in 0..=order + 2 {
            let m = kernel_moment(&kernel, i, 64)?;
            let target = if i == 0 { 1.0 } else { 0.0 };
            if i <= order {
                worst = worst.max((m - target).abs());
            }
            print!(" {m:+.3e}");
        }
        println!();
        println!("  max deviation for i <= M: {worst:.2e}");
        println!("  K(0) = {:+.4}, K(0.5) = {:+.4}", kernel.at_zero(), kernel.eval(0.5));
    }
    println!(
        "\nmoments beyond M need not vanish; the first non-zero one sets the\n\
         h^(M+1) (or h^(M+2), by symmetry) bias term."
    );
    Ok(())
}
