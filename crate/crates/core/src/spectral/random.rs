use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::field::StateField;
use super::operator::{frequencies, DiagonalizedOperator};

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn signed_index(k: usize, side: usize) -> i64 {
    if k < side / 2 {
        k as i64
    } else {
        k as i64 - side as i64
    }
}

/// Complex Gaussian with a generator keyed by `(seed, sample, wavenumber)`,
/// so a mode gets the same draw at every resolution.
fn keyed_normal(seed: u64, sample: u64, key: (i64, i64)) -> Complex64 {
    let h = splitmix(seed ^ splitmix(sample ^ splitmix((key.0 as u64) ^ splitmix(key.1 as u64 ^ 0x5151))));
    let mut rng = ChaCha8Rng::seed_from_u64(h);
    let re: f64 = StandardNormal.sample(&mut rng);
    let im: f64 = StandardNormal.sample(&mut rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Fourier coefficients (FFT order, unitary scaling) of a random field with
/// spectrum `(1 + |ξ|)^{-decay}`.
pub fn random_fourier_coeffs(dim: usize, side: usize, length: f64, seed: u64, sample: u64, decay: f64) -> Vec<Complex64> {
    let f = frequencies(side, length);
    let amp = |xi2: f64| (1.0 + xi2.sqrt()).powf(-decay);
    match dim {
        1 => (0..side)
            .map(|k| keyed_normal(seed, sample, (signed_index(k, side), 0)) * amp(f[k] * f[k]))
            .collect(),
        _ => (0..side * side)
            .map(|idx| {
                let (ky, kx) = (idx / side, idx % side);
                let key = (signed_index(kx, side), signed_index(ky, side));
                keyed_normal(seed, sample, key) * amp(f[kx] * f[kx] + f[ky] * f[ky])
            })
            .collect(),
    }
}

/// Random state for `op`, expressed in its own basis. Dense operators get the
/// same physical field as the Fourier path would.
pub fn random_field(op: &DiagonalizedOperator, seed: u64, sample: u64, decay: f64) -> StateField {
    let c = random_fourier_coeffs(op.dim(), op.side(), op.length(), seed, sample, decay);
    if !op.is_dense() {
        return StateField::new(c);
    }
    let Ok(fourier) = DiagonalizedOperator::build_diagonal(
        super::SymbolSpec::Schrodinger { dim: op.dim() },
        op.side(),
        op.length(),
    ) else {
        // injected matrices without a torus grid: draw directly in the eigenbasis
        return StateField::new(c);
    };
    let phys = fourier.to_physical(&StateField::new(c));
    op.from_physical(&phys).expect("same mode count")
}
