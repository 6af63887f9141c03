// Lloyd-Max codebooks for a unit Gaussian and a Monte Carlo check of the
// additive quantization-noise model they induce.
//
//   cargo run --release --example quantizer_codebooks

use cellfree::config::Resolution;
use cellfree::harness::aqnm_check;
use cellfree::rf::quantizer::asymptotic_distortion;
use cellfree::rf::{distortion_factor, lloyd_max_codebook};

fn main() -> cellfree::Result<()> {
    println!(" B   rho(B)        asymptote     iterations");
    for b in 1..=8 {
        let cb = lloyd_max_codebook(b)?;
        println!("{b:2}   {:.6e}  {:.6e}  {}", cb.mse, asymptotic_distortion(b), cb.iterations);
    }
    let cb = lloyd_max_codebook(2)?;
    println!("2-bit points {:?}", cb.points);
    println!("2-bit thresholds {:?}", cb.thresholds);
    println!("rho(inf) = {}", distortion_factor(Resolution::Infinite)?);

    println!("\nMonte Carlo, 200k samples per resolution");
    for b in 1..=4 {
        let c = aqnm_check(b, 200_000, 7)?;
        println!(
            "B={b}: rho {:.5} measured {:.5}, cov error {:.2}%, max correlation {:.1e}",
            c.rho,
            c.measured_rho,
            100.0 * c.cov_error,
            c.correlation
        );
    }
    Ok(())
}
