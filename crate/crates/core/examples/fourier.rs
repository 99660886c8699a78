//! Truncated alternating series for the Fourier transform of the Gaussian
//! cost kernel, with its tail bound.

use tsdiv::verify::fourier_gauss_series;

fn main() -> tsdiv::Result<()> {
    for omega in [0.0, 1.0, 2.0, 2.65, 3.0] {
        let s = fourier_gauss_series(omega, 1_000_000)?;
        let r = s.residual_bound.expect("N >= 2");
        println!(
            "omega = {omega:<4}  value = {:+.6}  bound = {r:.2e}  value + bound = {:+.6}",
            s.value,
            s.value + r
        );
    }
    Ok(())
}
