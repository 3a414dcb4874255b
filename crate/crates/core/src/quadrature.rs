//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.
//!
//! Used for window constants and for the conditional expectations of the
//! Gaussian-copula pair laws in [`crate::hoeffding`].

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 50;

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by recursive
/// bisection. Intervals narrower than machine resolution are accepted as-is.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a, tol);
    }
    let (value, err) = gk15(&f, a, b);
    refine(&f, a, b, value, err, tol, 0)
}

fn refine(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (a + b);
    if err <= tol || depth >= MAX_DEPTH || mid <= a || mid >= b {
        return value;
    }
    let (left, left_err) = gk15(f, a, mid);
    let (right, right_err) = gk15(f, mid, b);
    if left_err + right_err <= tol {
        return left + right;
    }
    refine(f, a, mid, left, left_err, 0.5 * tol, depth + 1)
        + refine(f, mid, b, right, right_err, 0.5 * tol, depth + 1)
}

/// Integrates `f` over `[a, b]` after splitting at the interior `breaks`,
/// which keeps known discontinuities on subinterval boundaries.
pub fn integrate_pieces(f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&c| c > a && c < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let pieces = cuts.len() + 1;
    let mut lo = a;
    let mut total = 0.0;
    for hi in cuts.into_iter().chain(std::iter::once(b)) {
        total += integrate(&f, lo, hi, tol / pieces as f64);
        lo = hi;
    }
    total
}

/// Iterated integral over the rectangle `[a, b] × [c, d]`, with optional
/// break points in each coordinate.
pub fn integrate_2d(
    f: impl Fn(f64, f64) -> f64,
    (a, b): (f64, f64),
    (c, d): (f64, f64),
    x_breaks: &[f64],
    y_breaks: &[f64],
    tol: f64,
) -> f64 {
    let width = (b - a).abs().max(1.0);
    let inner_tol = 0.1 * tol / width;
    integrate_pieces(
        |x| integrate_pieces(|y| f(x, y), c, d, y_breaks, inner_tol),
        a,
        b,
        x_breaks,
        0.5 * tol,
    )
}
