//! Probability that a Gaussian-distributed relative position falls inside
//! the Minkowski sum of two rectangular footprints.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::prediction::Cov2;

/// 8-point Gauss-Legendre rule on [-1, 1].
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_48),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_48),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Integration range in standard deviations around the mean.
const TRUNCATION: f64 = 9.0;
/// Panel width of the composite rule in standard deviations.
const PANEL: f64 = 0.5;
/// Standard deviations below this are treated as degenerate.
const DEGENERATE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Footprint {
    pub length: f64,
    pub width: f64,
}

/// P(a <= Z <= b) for a standard normal Z, accurate in both tails.
fn standard_interval(a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let tail = |z: f64| 0.5 * libm::erfc(z * FRAC_1_SQRT_2);
    if a >= 0.0 {
        tail(a) - tail(b)
    } else if b <= 0.0 {
        tail(-b) - tail(-a)
    } else {
        1.0 - tail(-a) - tail(b)
    }
}

/// P(lo <= Y <= hi) for Y ~ N(mean, sd^2); closed interval when sd = 0.
fn interval(mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    if sd < DEGENERATE {
        return if mean >= lo && mean <= hi { 1.0 } else { 0.0 };
    }
    standard_interval((lo - mean) / sd, (hi - mean) / sd)
}

/// P(|X| <= hx, |Y| <= hy) for (X, Y) ~ N(mean, cov).
///
/// The covariance is factored as `L L^T` (whitening): the first whitened
/// coordinate is integrated with composite 8-point Gauss-Legendre panels over
/// its truncated range, and the second coordinate, conditionally Gaussian,
/// is integrated in closed form with the error function. Panel breakpoints
/// are placed where the conditional mean crosses the box edges so that
/// near-singular covariances stay accurate.
pub fn box_probability(mean: (f64, f64), cov: &Cov2, hx: f64, hy: f64) -> Result<f64> {
    if !(cov.is_psd(1e-12 * (1.0 + cov.trace().abs()))) {
        return Err(Error::NumericalInput(format!(
            "covariance is not positive semi-definite: {cov:?}"
        )));
    }
    if !(mean.0.is_finite() && mean.1.is_finite() && hx >= 0.0 && hy >= 0.0) {
        return Err(Error::NumericalInput(
            "non-finite mean or negative box extent".into(),
        ));
    }
    let (mx, my) = mean;
    let sx = cov.xx.max(0.0).sqrt();
    let sy = cov.yy.max(0.0).sqrt();
    if my.abs() - hy > TRUNCATION * sy && sy >= DEGENERATE {
        return Ok(0.0);
    }
    if sx < DEGENERATE {
        let px = if mx.abs() <= hx { 1.0 } else { 0.0 };
        return Ok(px * interval(my, sy, -hy, hy));
    }
    let slope = cov.xy / cov.xx;
    let cond_sd = (cov.yy - cov.xy * slope).max(0.0).sqrt();

    let lo = (-hx).max(mx - TRUNCATION * sx);
    let hi = hx.min(mx + TRUNCATION * sx);
    if lo >= hi {
        return Ok(0.0);
    }

    let mut breaks = vec![lo, hi];
    if slope.abs() > 1e-15 {
        for edge in [-hy, hy] {
            let x = mx + (edge - my) / slope;
            if x > lo && x < hi {
                breaks.push(x);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);

    let norm = 1.0 / (sx * (2.0 * PI).sqrt());
    let integrand = |x: f64| {
        let z = (x - mx) / sx;
        let density = norm * (-0.5 * z * z).exp();
        density * interval(my + slope * (x - mx), cond_sd, -hy, hy)
    };

    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let panels = ((b - a) / (PANEL * sx)).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            let half = 0.5 * h;
            total += half
                * GL8
                    .iter()
                    .map(|&(xi, wt)| wt * integrand(mid + half * xi))
                    .sum::<f64>();
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Half extents of the ego-aligned box that contains `fp` rotated by `angle`.
pub fn aligned_half_extents(fp: Footprint, angle: f64) -> (f64, f64) {
    let (s, c) = angle.sin_cos();
    (
        0.5 * (fp.length * c.abs() + fp.width * s.abs()),
        0.5 * (fp.length * s.abs() + fp.width * c.abs()),
    )
}

/// Collision probability between the ego at a known pose and another road
/// user whose centre is Gaussian with the given mean and covariance.
///
/// Both footprints are expressed as boxes aligned with the ego heading; the
/// other body is replaced by its aligned bounding box.
pub fn collision_probability(
    ego: Pose,
    ego_fp: Footprint,
    other_mean: (f64, f64),
    other_heading: f64,
    other_fp: Footprint,
    cov: &Cov2,
) -> Result<f64> {
    let mean = ego.to_local(other_mean.0, other_mean.1);
    let local_cov = cov.rotated(-ego.heading);
    let (ox, oy) = aligned_half_extents(other_fp, other_heading - ego.heading);
    box_probability(
        mean,
        &local_cov,
        0.5 * ego_fp.length + ox,
        0.5 * ego_fp.width + oy,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi(z: f64) -> f64 {
        0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
    }

    #[test]
    fn axis_aligned_matches_product_of_marginals() {
        let cov = Cov2 {
            xx: 0.64,
            xy: 0.0,
            yy: 0.25,
        };
        let p = box_probability((0.3, -0.4), &cov, 1.0, 0.7).unwrap();
        let px = phi((1.0 - 0.3) / 0.8) - phi((-1.0 - 0.3) / 0.8);
        let py = phi((0.7 + 0.4) / 0.5) - phi((-0.7 + 0.4) / 0.5);
        assert!((p - px * py).abs() < 1e-12, "{p} vs {}", px * py);
    }

    #[test]
    fn far_field_is_negligible() {
        let fp = Footprint {
            length: 4.0,
            width: 2.0,
        };
        let p = collision_probability(
            Pose::new(0.0, 0.0, 0.0),
            fp,
            (50.0, 0.0),
            0.0,
            fp,
            &Cov2::isotropic(0.5),
        )
        .unwrap();
        assert!(p < 1e-12);
    }

    #[test]
    fn engulfing_region_is_certain() {
        let fp = Footprint {
            length: 4.0,
            width: 2.0,
        };
        let p = collision_probability(
            Pose::new(1.0, 1.0, 0.4),
            fp,
            (1.0, 1.0),
            0.4,
            fp,
            &Cov2::isotropic(0.01),
        )
        .unwrap();
        assert!(p > 0.999);
    }

    #[test]
    fn singular_covariance_is_handled() {
        // All mass on the line y = x.
        let cov = Cov2 {
            xx: 1.0,
            xy: 1.0,
            yy: 1.0,
        };
        let p = box_probability((0.0, 0.0), &cov, 1.0, 0.5).unwrap();
        let expected = phi(0.5) - phi(-0.5);
        assert!((p - expected).abs() < 1e-9, "{p} vs {expected}");
        let zero = box_probability((0.2, 0.0), &Cov2::ZERO, 1.0, 0.5).unwrap();
        assert_eq!(zero, 1.0);
    }

    #[test]
    fn non_psd_covariance_is_rejected() {
        let cov = Cov2 {
            xx: 1.0,
            xy: 2.0,
            yy: 1.0,
        };
        assert!(matches!(
            box_probability((0.0, 0.0), &cov, 1.0, 1.0),
            Err(Error::NumericalInput(_))
        ));
    }

    #[test]
    fn rotated_footprint_extents() {
        let fp = Footprint {
            length: 4.0,
            width: 2.0,
        };
        let (x, y) = aligned_half_extents(fp, std::f64::consts::FRAC_PI_2);
        assert!((x - 1.0).abs() < 1e-12 && (y - 2.0).abs() < 1e-12);
    }
}
