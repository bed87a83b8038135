//! Test images: the (modified) Shepp–Logan phantom and a piecewise-smooth
//! synthetic scene used when no image file is supplied.

use crate::error::{Error, Result};
use crate::operators::Grid2D;

/// Ellipse in normalized coordinates `[-1, 1]²`, `y` pointing up.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipse {
    pub intensity: f64,
    pub semi_x: f64,
    pub semi_y: f64,
    pub center_x: f64,
    pub center_y: f64,
    pub angle_deg: f64,
}

const fn ellipse(
    intensity: f64,
    semi_x: f64,
    semi_y: f64,
    center_x: f64,
    center_y: f64,
    angle_deg: f64,
) -> Ellipse {
    Ellipse {
        intensity,
        semi_x,
        semi_y,
        center_x,
        center_y,
        angle_deg,
    }
}

/// Ten-ellipse Shepp–Logan head with the contrast-enhanced intensities, so
/// every pixel lies in `[0, 1]`.
pub const SHEPP_LOGAN: [Ellipse; 10] = [
    ellipse(1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    ellipse(-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0),
    ellipse(-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0),
    ellipse(-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0),
    ellipse(0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0),
    ellipse(0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0),
    ellipse(0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0),
    ellipse(0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0),
    ellipse(0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0),
    ellipse(0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0),
];

pub const MIN_PHANTOM_SIZE: usize = 32;

/// Rasterizes ellipses at pixel centers of an `n x n` grid, clamped to `[0, 1]`.
pub fn rasterize_ellipses(ellipses: &[Ellipse], n: usize) -> Grid2D {
    let half = (n as f64 - 1.0) / 2.0;
    let prepared: Vec<(f64, f64, Ellipse)> = ellipses
        .iter()
        .map(|e| {
            let t = e.angle_deg.to_radians();
            (t.cos(), t.sin(), *e)
        })
        .collect();
    Grid2D::from_fn(n, n, |(r, c)| {
        let x = (c as f64 - half) / half;
        let y = (half - r as f64) / half;
        let mut value = 0.0;
        for &(cos, sin, e) in &prepared {
            let (dx, dy) = (x - e.center_x, y - e.center_y);
            let u = dx * cos + dy * sin;
            let v = -dx * sin + dy * cos;
            if (u / e.semi_x).powi(2) + (v / e.semi_y).powi(2) <= 1.0 {
                value += e.intensity;
            }
        }
        value.clamp(0.0, 1.0)
    })
}

pub fn shepp_logan(n: usize) -> Result<Grid2D> {
    if n < MIN_PHANTOM_SIZE {
        return Err(Error::invalid(format!(
            "phantom size must be at least {MIN_PHANTOM_SIZE}, got {n}"
        )));
    }
    Ok(rasterize_ellipses(&SHEPP_LOGAN, n))
}

/// Piecewise-smooth `n x n` scene in `[0, 1]`: a shaded background, a bright
/// rectangle, a dark disc, a smooth blob and a thin bar.
pub fn synthetic_image(n: usize) -> Result<Grid2D> {
    if n < 16 {
        return Err(Error::invalid(format!(
            "synthetic image size must be at least 16, got {n}"
        )));
    }
    let s = n as f64;
    Ok(Grid2D::from_fn(n, n, |(r, c)| {
        let (x, y) = (c as f64 / s, r as f64 / s);
        let mut v = 0.25 + 0.3 * x + 0.15 * (std::f64::consts::PI * y).sin();
        if (0.15..0.45).contains(&x) && (0.2..0.55).contains(&y) {
            v = 0.85;
        }
        let (dx, dy) = (x - 0.68, y - 0.35);
        if dx * dx + dy * dy < 0.16 * 0.16 {
            v = 0.1;
        }
        let (bx, by) = (x - 0.6, y - 0.75);
        v += 0.35 * (-(bx * bx + by * by) / (2.0 * 0.08 * 0.08)).exp();
        if (0.1..0.9).contains(&x) && (0.86..0.89).contains(&y) {
            v = 0.95;
        }
        v.clamp(0.0, 1.0)
    }))
}
