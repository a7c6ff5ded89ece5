//! Weights the odd pseudokernels give to paths of each odd length.

use bilink::transform::{taylor_weights, SpectralTransform};

fn main() -> bilink::Result<()> {
    let alpha = 0.5;
    let kernels = [
        ("sinh", SpectralTransform::Sinh { alpha, beta: 1.0 }),
        ("neumann", SpectralTransform::OddNeumann { alpha, beta: 1.0 }),
    ];
    println!("power,{},{}", kernels[0].0, kernels[1].0);
    let columns: Vec<Vec<(u32, f64)>> = kernels
        .iter()
        .map(|(_, t)| taylor_weights(t, 11))
        .collect::<bilink::Result<_>>()?;
    for (row, &(p, w)) in columns[0].iter().enumerate() {
        println!("{p},{w:.6e},{:.6e}", columns[1][row].1);
    }
    Ok(())
}
