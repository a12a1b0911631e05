//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued
//! integrands.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
// Shadowed by inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{numerical, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-14, max_intervals: 4000 }
    }
}

struct Segment<const M: usize> {
    a: f64,
    b: f64,
    value: [f64; M],
    error: f64,
}

fn max_norm<const M: usize>(v: &[f64; M]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn kronrod<const M: usize, F>(f: &mut F, a: f64, b: f64) -> Result<Segment<M>>
where
    F: FnMut(f64) -> Result<[f64; M]>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut k15 = [0.0; M];
    let mut g7 = [0.0; M];
    let fc = f(center)?;
    for m in 0..M {
        k15[m] = WGK[7] * fc[m];
        g7[m] = WG[3] * fc[m];
    }
    for (j, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let lo = f(center - half * x)?;
        let hi = f(center + half * x)?;
        for m in 0..M {
            let s = lo[m] + hi[m];
            k15[m] += w * s;
            if j % 2 == 1 {
                g7[m] += WG[j / 2] * s;
            }
        }
    }
    let mut err = [0.0; M];
    for m in 0..M {
        k15[m] *= half;
        err[m] = (k15[m] - half * g7[m]).abs();
    }
    Ok(Segment { a, b, value: k15, error: max_norm(&err) })
}

/// Integrate `f` over `[a, b]`, bisecting the segment with the largest error
/// estimate until the summed error meets `max(abs_tol, rel_tol·|I|)` in the
/// max norm.
pub fn integrate<const M: usize, F>(mut f: F, a: f64, b: f64, opts: QuadratureOptions) -> Result<[f64; M]>
where
    F: FnMut(f64) -> Result<[f64; M]>,
{
    if a == b {
        return Ok([0.0; M]);
    }
    let mut segments: Vec<Segment<M>> = alloc::vec![kronrod(&mut f, a, b)?];
    loop {
        let mut total = [0.0; M];
        let mut error = 0.0;
        for s in &segments {
            for m in 0..M {
                total[m] += s.value[m];
            }
            error += s.error;
        }
        let target = opts.abs_tol.max(opts.rel_tol * max_norm(&total));
        if error <= target {
            return Ok(total);
        }
        if segments.len() >= opts.max_intervals {
            return Err(numerical!(
                "quadrature did not converge on [{a:.6e}, {b:.6e}]: error {error:.3e} > target {target:.3e}"
            ));
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            return Err(numerical!("quadrature segment collapsed near {mid:.6e}"));
        }
        segments.push(kronrod(&mut f, seg.a, mid)?);
        segments.push(kronrod(&mut f, mid, seg.b)?);
    }
}

/// Integrate `f` over the whole real line through `x = scale·tan(θ)`.
pub fn integrate_real_line<const M: usize, F>(mut f: F, scale: f64, opts: QuadratureOptions) -> Result<[f64; M]>
where
    F: FnMut(f64) -> Result<[f64; M]>,
{
    let g = move |theta: f64| -> Result<[f64; M]> {
        let (s, c) = theta.sin_cos();
        let x = scale * s / c;
        let jac = scale / (c * c);
        let mut v = f(x)?;
        for e in v.iter_mut() {
            *e *= jac;
        }
        Ok(v)
    };
    integrate(g, -FRAC_PI_2, FRAC_PI_2, opts)
}
