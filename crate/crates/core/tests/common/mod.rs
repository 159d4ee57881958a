#![allow(dead_code)]

use rand::Rng;
use wpt_relay::mechanism::{AuctionInput, Candidate};
use wpt_relay::valuation::ValuationModel;

/// Two-sided Kolmogorov-Smirnov distance of `samples` against `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Adaptive Simpson quadrature on [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Upper critical value of a chi-square law (Wilson-Hilferty), for the
/// standard normal quantile `z`.
pub fn chi_square_critical(df: f64, z: f64) -> f64 {
    let c = 2.0 / (9.0 * df);
    df * (1.0 - c + z * c.sqrt()).powi(3)
}

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp()
}

pub fn random_model<R: Rng>(rng: &mut R) -> ValuationModel {
    ValuationModel::new(
        log_uniform(rng, 1e-6, 1e-2),
        log_uniform(rng, 1e-4, 1e-1),
        rng.random_range(0.3..3.0),
    )
    .unwrap()
}

/// Random auction with truthful bids and `n` candidates.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize) -> AuctionInput {
    let candidates = (0..n)
        .map(|_| {
            let model = random_model(rng);
            Candidate {
                bid: model.sample(rng).value(),
                model,
                wpt_gain: log_uniform(rng, 1e-9, 1e-5),
            }
        })
        .collect();
    AuctionInput::new(0.1, log_uniform(rng, 1e-3, 10.0), candidates).unwrap()
}

/// Quantile of a valuation model: the valuation whose fading coordinate is `z`.
pub fn model_quantile(model: &ValuationModel, p: f64) -> f64 {
    // F(v) = 1 - Phi(z) so z = -Phi^{-1}(p); invert Phi by bisection.
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if wpt_relay::numerics::std_normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = -0.5 * (lo + hi);
    model.p_si + model.k / (model.sigma_ln * z).exp()
}
