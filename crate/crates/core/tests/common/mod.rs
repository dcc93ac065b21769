//! Seeded fixtures shared by the integration and acceptance tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skyloss::atmosphere::{AbsorptionProfile, ContinuumTerm, ExactModel, Line, ProfileMode};
use skyloss::datagrid::{builtin_band, builtin_scenario, GridAxes, ScenarioSpec, SubBand};
use skyloss::regression::horner;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Monomial coefficients (in `u`) of `Σ aₖ·Tₖ(u)`.
pub fn chebyshev_to_monomial(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    let mut t_prev = vec![0.0; n];
    let mut t_cur = vec![0.0; n];
    t_prev[0] = 1.0;
    if n > 1 {
        t_cur[1] = 1.0;
    }
    for (k, &ak) in a.iter().enumerate() {
        let tk = if k == 0 { &t_prev } else { &t_cur };
        for (o, t) in out.iter_mut().zip(tk) {
            *o += ak * t;
        }
        if k >= 1 && k + 1 < n {
            let mut next = vec![0.0; n];
            for i in 0..n {
                if i + 1 < n {
                    next[i + 1] += 2.0 * t_cur[i];
                }
                next[i] -= t_prev[i];
            }
            t_prev = std::mem::replace(&mut t_cur, next);
        }
    }
    out
}

/// A random degree-`deg` polynomial in `u ∈ [-1, 1]` whose values stay in
/// `[lo, hi]`: a center plus Chebyshev terms whose absolute sum fits the
/// remaining margin.
pub fn bounded_poly(rng: &mut ChaCha8Rng, deg: usize, lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let center = rng.random_range(lo + 0.25 * span..hi - 0.25 * span);
    let margin = (center - lo).min(hi - center) * 0.999;
    let raw: Vec<f64> = (0..deg).map(|_| rng.random_range(-1.0..1.0)).collect();
    let total: f64 = raw.iter().map(|x: &f64| x.abs()).sum();
    let budget = margin * rng.random_range(0.3..1.0);
    let mut cheb = vec![center];
    cheb.extend(raw.iter().map(|x| x / total * budget));
    chebyshev_to_monomial(&cheb)
}

pub const EXACT_B2H: f64 = -0.40;
pub const EXACT_B2V: f64 = -0.55;

/// Model-exact profile over a band with random degree-6 Λ in [−2, −0.05] 1/km.
pub fn model_exact_profile(seed: u64, band: &SubBand) -> (AbsorptionProfile, ExactModel) {
    let mut r = rng(seed);
    let m = ExactModel {
        b2h: EXACT_B2H,
        b2v: EXACT_B2V,
        lambda_h: bounded_poly(&mut r, 6, -2.0, -0.05),
        lambda_v: bounded_poly(&mut r, 6, -2.0, -0.05),
    };
    let p = AbsorptionProfile::new(
        "model-exact",
        ProfileMode::ModelExact(m.clone()),
        band.f_lo(),
        band.f_hi(),
    )
    .expect("bounded lambda is valid");
    (p, m)
}

/// A random continuum profile with 1 to 3 layers.
pub fn random_continuum(r: &mut ChaCha8Rng) -> AbsorptionProfile {
    let n = r.random_range(1..=3);
    let terms = (0..n)
        .map(|_| ContinuumTerm {
            amplitude_poly: vec![
                r.random_range(0.0..0.5),
                r.random_range(0.0..2.0),
                r.random_range(0.0..8.0),
            ],
            scale_height: r.random_range(0.5..10.0),
        })
        .collect();
    AbsorptionProfile::new("random", ProfileMode::Continuum(terms), 0.1, 1.0).expect("non-negative terms")
}

/// A random line profile: a continuum plus 1 to 4 Lorentzian lines.
pub fn random_lines(r: &mut ChaCha8Rng) -> AbsorptionProfile {
    let ProfileMode::Continuum(continuum) = random_continuum(r).mode().clone() else {
        unreachable!()
    };
    let n = r.random_range(1..=4);
    let lines = (0..n)
        .map(|_| Line {
            center: r.random_range(0.1..1.0),
            strength: r.random_range(0.0..200.0),
            half_width: r.random_range(0.001..0.01),
            scale_height: r.random_range(0.5..10.0),
        })
        .collect();
    AbsorptionProfile::new("random-lines", ProfileMode::Lines { continuum, lines }, 0.1, 1.0).expect("valid lines")
}

fn pick(axis: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| axis[i * (axis.len() - 1) / (n - 1)]).collect()
}

/// MAAC × Y1 reduced to 5 altitudes, 5 distances, all 21 angles and 20
/// frequencies, each spread evenly over the full axis.
pub fn reduced_maac_y1() -> GridAxes {
    let full = builtin_scenario("MAAC").unwrap();
    let scenario = full
        .with_axes(
            pick(full.altitudes(), 5),
            pick(full.distances(), 5),
            full.thetas().to_vec(),
        )
        .unwrap();
    let band = builtin_band("Y1").unwrap();
    let freqs = pick(&band.frequencies(), 20);
    GridAxes::with_frequencies(scenario, band, freqs).unwrap()
}

/// A small scenario for fast end-to-end tests.
pub fn small_scenario() -> ScenarioSpec {
    ScenarioSpec::new(
        "small",
        vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
        vec![0.01, 0.03, 0.05, 0.07, 0.1],
        (0..=10).map(|i| i as f64 * 9.0).collect(),
    )
    .unwrap()
}

/// Evaluates a monomial polynomial in `u` (test-side oracle).
pub fn eval_u(c: &[f64], u: f64) -> f64 {
    horner(c, u)
}
