// Codebook sizing: the compression noise that makes a Gaussian source fit a
// given fronthaul budget.
//
//   cargo run --release --example fronthaul_compression

use cellfree::downlink::{fronthaul_rate, solve_sigma_d};
use cellfree::fronthaul::noise_for_rate;
use cellfree::linalg::{c, log2_det_identity_plus, CMat};
use cellfree::uplink::solve_sigma_u;

fn main() -> cellfree::Result<()> {
    // Isotropic source: σ² = s / (2^{C/n} - 1).
    let n = 4;
    let s = 2.5;
    let cov = CMat::identity(n, n) * c(s, 0.0);
    for bits in [1.0, 4.0, 8.0, 16.0] {
        let sigma2 = noise_for_rate(&cov, bits)?;
        let closed = s / (2f64.powf(bits / n as f64) - 1.0);
        println!("C={bits:>4}: σ² = {sigma2:.6e}  closed form {closed:.6e}  rate {:.12}", log2_det_identity_plus(&cov, sigma2));
    }

    // Uplink: T channel uses share a per-use budget C_u.
    let a = CMat::from_fn(3, 3, |i, j| c((i + 2 * j) as f64 * 0.3 - 0.4, (i as f64 - j as f64) * 0.2));
    let c_y = &a * a.adjoint() + CMat::identity(3, 3) * c(0.1, 0.0);
    let sigma = solve_sigma_u(&c_y, 4, 2.0)?;
    println!("uplink: σ_u = {sigma:.6e}, log2 det(I + C_y/σ²) = {:.10} (target 8)", log2_det_identity_plus(&c_y, sigma * sigma));

    // Downlink: precoded covariance F P F^H must fit C_d.
    let f = CMat::from_fn(2, 3, |i, j| c(1.0 + i as f64 - 0.5 * j as f64, 0.3 * j as f64));
    let p = [0.7, 1.2, 0.4];
    let sigma = solve_sigma_d(&f, &p, 6.0)?;
    println!("downlink: σ_d = {sigma:.6e}, rate {:.10} (target 6)", fronthaul_rate(&f, &p, sigma));
    Ok(())
}
