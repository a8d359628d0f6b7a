//! Adaptive Gauss–Kronrod (7/15) integration on a finite interval.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_64, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

const MAX_INTERVALS: usize = 4096;

/// Returns (Kronrod estimate, |Kronrod − Gauss|).
fn kronrod15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = half * XGK[k];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// `∫_a^b f(x) dx` to absolute tolerance `abs_tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    let mut pending = vec![(a, b, abs_tol)];
    let mut total = 0.0;
    let mut intervals = 0usize;
    let mut leftover = 0.0;
    while let Some((lo, hi, tol)) = pending.pop() {
        intervals += 1;
        let (value, err) = kronrod15(&f, lo, hi);
        if err <= tol || intervals > MAX_INTERVALS || (hi - lo) < 1e-12 * (b - a).abs() {
            if err > tol {
                leftover += err;
            }
            total += value;
            continue;
        }
        let mid = 0.5 * (lo + hi);
        pending.push((mid, hi, 0.5 * tol));
        pending.push((lo, mid, 0.5 * tol));
    }
    if leftover > abs_tol {
        return Err(Error::Quadrature { error: leftover });
    }
    Ok(total)
}
