#![allow(dead_code)]

use homophily_core::steady_state::epidemic_threshold;
use homophily_core::ModelParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Ordered vaccination `x_a < x_v`, generic `h`, recovery below the threshold.
pub fn draw_supercritical(rng: &mut ChaCha8Rng) -> ModelParams {
    let q = rng.gen_range(0.1..0.9);
    let h = rng.gen_range(0.0..1.0);
    let x_a: f64 = rng.gen_range(0.0..0.4);
    let x_v = rng.gen_range(x_a + 0.05..(x_a + 0.5).min(0.9));
    let r = rng.gen_range(0.05..1.0);
    let base = ModelParams::new(q, h, 0.1, x_a, x_v, r).unwrap();
    let mu = rng.gen_range(0.1..0.9) * epidemic_threshold(&base);
    base.with_mu(mu).unwrap()
}

/// Draw with both groups endemic at every `h`: `mu < 1 - x_v`.
pub fn draw_both_endemic(rng: &mut ChaCha8Rng, h: f64) -> ModelParams {
    let q = rng.gen_range(0.1..0.9);
    let x_a: f64 = rng.gen_range(0.0..0.4);
    let x_v = rng.gen_range(x_a + 0.05..(x_a + 0.4).min(0.8));
    let mu = rng.gen_range(0.05..0.95) * (1.0 - x_v);
    let r = rng.gen_range(0.05..1.0);
    ModelParams::new(q, h, mu, x_a, x_v, r).unwrap()
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WEIGHTS[7] * fc;
    let mut g = G_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = hw * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            g += G_WEIGHTS[i / 2] * s;
        }
    }
    (k * hw, ((k - g) * hw).abs())
}

/// Adaptive Gauss-Kronrod (7, 15) quadrature.
pub fn integrate_gk<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    let mut stack = vec![(a, b, tol)];
    let mut total = 0.0;
    while let Some((lo, hi, t)) = stack.pop() {
        let (v, err) = gk15(&mut f, lo, hi);
        if err <= t || hi - lo < 1e-9 {
            total += v;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * t));
            stack.push((mid, hi, 0.5 * t));
        }
    }
    total
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

/// Central difference with step `e`.
pub fn central<F: FnMut(f64) -> f64>(mut f: F, x: f64, e: f64) -> f64 {
    (f(x + e) - f(x - e)) / (2.0 * e)
}
