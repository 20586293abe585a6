//! Globally adaptive Gauss-Kronrod (7/15) integration, a semi-infinite
//! variant, and a nested polar rule for the secrecy-outage double integrals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

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
/// Gauss weights for the odd-indexed Kronrod nodes (and the centre).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and limits shared by every integration routine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Safety multiplier applied to the analytic radius beyond which the
    /// exponential kernels fall below `abs_tol`.
    pub radial_truncation_factor: f64,
    pub max_subdivisions: usize,
    /// When set, the eta = 2 closed forms are also evaluated by quadrature and
    /// a disagreement beyond `1e-6` relative is reported as an error.
    #[serde(default)]
    pub cross_check_closed_forms: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            radial_truncation_factor: 2.0,
            max_subdivisions: 2048,
            cross_check_closed_forms: false,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(invalid("rel_tol", "must be positive"));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(invalid("abs_tol", "must be positive"));
        }
        if !(self.radial_truncation_factor >= 1.0 && self.radial_truncation_factor.is_finite()) {
            return Err(invalid("radial_truncation_factor", "must be >= 1"));
        }
        if self.max_subdivisions < 16 {
            return Err(invalid("max_subdivisions", "must be >= 16"));
        }
        Ok(())
    }

    /// Radius beyond which `exp(-decay * r^eta)` is below `abs_tol`, times the
    /// safety factor.
    pub fn truncation_radius(&self, decay: f64, eta: f64) -> f64 {
        self.radial_truncation_factor * ((1.0 / self.abs_tol).ln() / decay).powf(1.0 / eta)
    }
}

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub err_est: f64,
}

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// One 15-point Kronrod rule on `[lo, hi]`. `f` returns a value and an
/// auxiliary error density (the inner error of a nested integral); the aux
/// density is integrated with the Kronrod weights and added to the error.
fn kronrod<F>(f: &F, lo: f64, hi: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let (fc, ec) = f(centre)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    let mut aux = ec * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, e1) = f(centre - dx)?;
        let (f2, e2) = f(centre + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        aux += WGK[j] * (e1 + e2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() || !err.is_finite() {
        return Err(Error::Domain {
            function: "integrand",
            value,
        });
    }
    Ok((value, err + (aux * half).abs()))
}

/// Global adaptive bisection starting from the partition `breaks`.
fn adaptive<F>(f: &F, breaks: &[f64], rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Estimate>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let (value, err) = kronrod(f, lo, hi)?;
        total += value;
        total_err += err;
        heap.push(Segment { lo, hi, value, err });
    }
    let mut frozen_err = 0.0;
    let mut subdivisions = heap.len();
    loop {
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(Estimate {
                value: total,
                err_est: total_err,
            });
        }
        let Some(worst) = heap.pop() else {
            break;
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if subdivisions >= max_subdivisions {
            heap.push(worst);
            break;
        }
        if mid <= worst.lo || mid >= worst.hi {
            // Interval at floating-point resolution; its error stays in the
            // total but it cannot be refined further.
            frozen_err += worst.err;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (v1, e1) = kronrod(f, worst.lo, mid)?;
        let (v2, e2) = kronrod(f, mid, worst.hi)?;
        total += v1 + v2 - worst.value;
        heap.push(Segment { lo: worst.lo, hi: mid, value: v1, err: e1 });
        heap.push(Segment { lo: mid, hi: worst.hi, value: v2, err: e2 });
        subdivisions += 1;
        // Resumming avoids drift from repeated subtraction.
        total_err = frozen_err + heap.iter().map(|s| s.err).sum::<f64>();
    }
    Err(Error::Convergence {
        estimate: total,
        err_est: total_err,
        subdivisions,
    })
}

fn sorted_breaks(lower: f64, upper: f64, interior: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut breaks = vec![lower];
    breaks.extend(interior.into_iter().filter(|&x| x > lower && x < upper));
    breaks.push(upper);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
}

/// Adaptive integral of `f` over `[lower, upper]`; `upper` may be
/// `f64::INFINITY`, in which case the map `x = lower + (1 - t) / t` sends the
/// range onto `(0, 1]`.
pub fn integrate_1d<F>(f: F, lower: f64, upper: f64, cfg: &QuadratureConfig) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !lower.is_finite() || upper.is_nan() || upper < lower {
        return Err(invalid("bounds", format!("need finite lower <= upper, got [{lower}, {upper}]")));
    }
    if upper == f64::INFINITY {
        // [lower, lower + 1] directly (keeps endpoint singularities at a
        // representable point), the tail through t in (0, 1].
        let split = lower + 1.0;
        let head = integrate_breaks(&f, &[lower, split], &QuadratureConfig { abs_tol: 0.5 * cfg.abs_tol, ..*cfg })?;
        let mapped = |t: f64| {
            let x = split + (1.0 - t) / t;
            Ok((f(x) / (t * t), 0.0))
        };
        let tail = adaptive(&mapped, &[0.0, 1.0], cfg.rel_tol, 0.5 * cfg.abs_tol, cfg.max_subdivisions)?;
        Ok(Estimate {
            value: head.value + tail.value,
            err_est: head.err_est + tail.err_est,
        })
    } else {
        integrate_breaks(f, &[lower, upper], cfg)
    }
}

/// Adaptive integral over `[breaks[0], breaks[last]]` with an initial
/// partition at the given (sorted, finite) points.
pub fn integrate_breaks<F>(f: F, breaks: &[f64], cfg: &QuadratureConfig) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    let wrapped = |x: f64| Ok((f(x), 0.0));
    adaptive(&wrapped, breaks, cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions)
}

/// Narrow feature of a polar integrand: a peak of width `width` around the
/// point at distance `radius` on the polar axis (theta = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ridge {
    pub radius: f64,
    pub width: f64,
}

/// Integration domain `[0, r_max] x [0, pi]` plus the length scales used to
/// seed the initial partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    pub r_max: f64,
    pub ridge: Option<Ridge>,
    /// Decay lengths of kernels centred on the origin.
    pub origin_scales: Vec<f64>,
}

impl PolarGrid {
    pub fn new(r_max: f64) -> Self {
        Self {
            r_max,
            ridge: None,
            origin_scales: Vec::new(),
        }
    }

    pub fn with_ridge(mut self, radius: f64, width: f64) -> Self {
        self.ridge = Some(Ridge { radius, width });
        self
    }

    pub fn with_origin_scale(mut self, scale: f64) -> Self {
        self.origin_scales.push(scale);
        self
    }

    fn radial_breaks(&self) -> Vec<f64> {
        let mut points = Vec::new();
        for &scale in &self.origin_scales {
            geometric(&mut points, 0.0, scale, 1.0, self.r_max);
        }
        if let Some(ridge) = self.ridge {
            points.push(ridge.radius);
            geometric(&mut points, ridge.radius, ridge.width, 1.0, self.r_max);
            geometric(&mut points, ridge.radius, ridge.width, -1.0, self.r_max);
        }
        sorted_breaks(0.0, self.r_max, points)
    }

    fn angular_breaks(&self, d: f64) -> Vec<f64> {
        let mut points = Vec::new();
        if let Some(ridge) = self.ridge {
            let theta_w = ridge.width / (ridge.radius * d).sqrt();
            if theta_w.is_finite() && theta_w < 0.5 {
                geometric(&mut points, 0.0, theta_w, 1.0, PI);
            }
        }
        sorted_breaks(0.0, PI, points)
    }
}

/// Pushes `origin + sign * scale * 2^k` while inside `(0, limit)`.
fn geometric(points: &mut Vec<f64>, origin: f64, scale: f64, sign: f64, limit: f64) {
    if !(scale > 0.0 && scale.is_finite()) {
        return;
    }
    let mut step = scale;
    loop {
        let x = origin + sign * step;
        if x <= 0.0 || x >= limit {
            break;
        }
        points.push(x);
        step *= 2.0;
    }
}

/// `int_0^{r_max} int_0^pi g(d, theta) dtheta dd` by nested adaptive
/// quadrature: an angular integral at each radial node, radial outside.
pub fn integrate_2d_polar<G>(g: G, grid: &PolarGrid, cfg: &QuadratureConfig) -> Result<Estimate>
where
    G: Fn(f64, f64) -> f64,
{
    cfg.validate()?;
    if !(grid.r_max > 0.0 && grid.r_max.is_finite()) {
        return Err(invalid("r_max", "radial truncation must be finite and positive"));
    }
    let inner_rel = 0.1 * cfg.rel_tol;
    let inner_abs = 0.1 * cfg.abs_tol / grid.r_max;
    let radial = |d: f64| -> Result<(f64, f64)> {
        let breaks = grid.angular_breaks(d);
        let inner = adaptive(&|theta: f64| Ok((g(d, theta), 0.0)), &breaks, inner_rel, inner_abs, cfg.max_subdivisions)?;
        Ok((inner.value, inner.err_est))
    };
    adaptive(&radial, &grid.radial_breaks(), cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn semi_infinite_examples() {
        let e = integrate_1d(|t| (-t).exp(), 0.0, f64::INFINITY, &cfg()).unwrap();
        assert_relative_eq!(e.value, 1.0, max_relative = 1e-10);
        assert!(e.err_est <= 1e-12f64.max(1e-8 * e.value.abs()));

        let e = integrate_1d(|t| t * (-t * t).exp(), 0.0, f64::INFINITY, &cfg()).unwrap();
        assert_relative_eq!(e.value, 0.5, max_relative = 1e-10);

        let e = integrate_1d(|t| (-t).exp() / t.sqrt(), 0.0, f64::INFINITY, &cfg()).unwrap();
        assert_relative_eq!(e.value, PI.sqrt(), max_relative = 1e-8);
    }

    #[test]
    fn finite_interval_polynomial_exact() {
        let e = integrate_1d(|x| x.powi(20), -1.0, 1.0, &cfg()).unwrap();
        assert_relative_eq!(e.value, 2.0 / 21.0, max_relative = 1e-14);
    }

    #[test]
    fn rejects_bad_bounds_and_config() {
        assert!(integrate_1d(|x| x, 1.0, 0.0, &cfg()).is_err());
        assert!(integrate_1d(|x| x, f64::NEG_INFINITY, 0.0, &cfg()).is_err());
        let bad = QuadratureConfig { max_subdivisions: 4, ..cfg() };
        assert!(integrate_1d(|x| x, 0.0, 1.0, &bad).is_err());
        let bad = QuadratureConfig { rel_tol: 0.0, ..cfg() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn non_convergence_reports_best_estimate() {
        let tight = QuadratureConfig {
            rel_tol: 1e-15,
            abs_tol: 1e-300,
            max_subdivisions: 16,
            ..cfg()
        };
        // Oscillatory integrand that 16 segments cannot resolve to 1e-15.
        let err = integrate_1d(|x| (50.0 * x).sin().powi(2) / (x + 1e-3).sqrt(), 0.0, 10.0, &tight).unwrap_err();
        match err {
            Error::Convergence { estimate, subdivisions, .. } => {
                assert!(estimate.is_finite());
                assert_eq!(subdivisions, 16);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn separable_polar() {
        let grid = PolarGrid::new(cfg().truncation_radius(1.0, 2.0));
        let e = integrate_2d_polar(|d, _| d * (-d * d).exp() / PI, &grid, &cfg()).unwrap();
        assert_relative_eq!(e.value, 0.5, max_relative = 1e-9);
    }

    #[test]
    fn narrow_ridge_is_resolved() {
        // Gaussian of width ~0.01 centred at distance 5 on the polar axis;
        // its half-plane integral is pi / (2 c).
        let c = 1e4;
        let kernel = |d: f64, t: f64| d * (-c * (25.0 + d * d - 10.0 * d * t.cos())).exp();
        let r_max = 5.0 + cfg().truncation_radius(c, 2.0);
        let grid = PolarGrid::new(r_max).with_ridge(5.0, c.powf(-0.5));
        let e = integrate_2d_polar(kernel, &grid, &cfg()).unwrap();
        assert_relative_eq!(e.value, PI / (2.0 * c), max_relative = 1e-7);
    }

    #[test]
    fn truncation_radius_bounds_tail() {
        let q = cfg();
        for (c, eta) in [(0.1, 2.0), (1.0, 4.0), (30.0, 3.0)] {
            let r = q.truncation_radius(c, eta);
            let f = |x: f64| (-c * x.powf(eta)).exp();
            assert!(f(r) < q.abs_tol);
        }
    }
}
