use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Copula, CopulaFamily};
use crate::special::{normal_cdf, normal_quantile};

/// Generator for stream `stream` of a given seed. Streams never overlap, so
/// chunks keyed by (point, chunk) can run on any thread.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw on the open interval (0, 1).
pub(crate) fn open01<R: Rng>(rng: &mut R) -> f64 {
    ((rng.random::<u64>() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

impl Copula {
    /// Solve ∂C/∂u(u, v) = w for v.
    pub fn conditional_inverse(&self, u: f64, w: f64) -> f64 {
        match self.family() {
            Some(CopulaFamily::Independence) => w,
            Some(CopulaFamily::Comonotone) => u,
            Some(CopulaFamily::Countermonotone) => 1.0 - u,
            Some(CopulaFamily::Clayton { alpha }) => {
                let t = (w.powf(-alpha / (1.0 + alpha)) - 1.0) * u.powf(-alpha);
                (t.ln_1p() * (-1.0 / alpha)).exp()
            }
            Some(CopulaFamily::Frank { alpha }) => {
                let a = (-alpha * u).exp();
                let d = (-alpha).exp_m1();
                -(w * d / (w + (1.0 - w) * a)).ln_1p() / alpha
            }
            Some(CopulaFamily::Fgm { alpha }) => {
                let a = alpha * (1.0 - 2.0 * u);
                if a.abs() < 1e-12 {
                    w
                } else {
                    let b = 1.0 + a;
                    2.0 * w / (b + (b * b - 4.0 * a * w).sqrt())
                }
            }
            Some(CopulaFamily::Gaussian { rho }) => {
                normal_cdf(rho * normal_quantile(u) + (1.0 - rho * rho).sqrt() * normal_quantile(w))
            }
            _ => {
                let (mut lo, mut hi) = (0.0, 1.0);
                while hi - lo > 1e-10 {
                    let mid = 0.5 * (lo + hi);
                    if self.du(u, mid) < w {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
        .clamp(0.0, 1.0)
    }

    /// Draw one pair by the conditional-distribution method.
    pub fn sample_one<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        let u = open01(rng);
        let w = open01(rng);
        (u, self.conditional_inverse(u, w))
    }
}

/// `n` pairs with copula `c`; a pure function of (c, n, seed).
pub fn sample_pairs(c: &Copula, n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = stream_rng(seed, 0);
    (0..n).map(|_| c.sample_one(&mut rng)).collect()
}
