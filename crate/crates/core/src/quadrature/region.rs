//! Integration regions and their decomposition into cubature pieces.
//!
//! A neighbourhood of the singular point (and of an excluded ball) becomes a
//! polar patch in `(u, theta)` coordinates: radially log-graded around the
//! singularity, linear otherwise. Angular sectors break at the patch corners
//! and wherever a circle bounding the patch crosses one of its edges, so the
//! radial limits are smooth inside every sector. The remainder is a tensor
//! grid of rectangles whose knots sit on the cut-off transition lines, at the
//! singular point, and graded towards the layers.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::cubature::Rect;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    UnitSquare,
    /// `(0,1)^2` with the closed ball `|p - center| <= radius` removed.
    SquareMinusBall { center: (f64, f64), radius: f64 },
    /// The part of the ball `|p - center| < radius` inside `(0,1)^2`.
    BallIntersectSquare { center: (f64, f64), radius: f64 },
    /// An axis-aligned window; `eta` may leave `[0, 1]` for strip variants.
    StripWindow { xi: (f64, f64), eta: (f64, f64) },
}

impl Region {
    pub fn name(&self) -> &'static str {
        match self {
            Region::UnitSquare => "unit_square",
            Region::SquareMinusBall { .. } => "square_minus_ball",
            Region::BallIntersectSquare { .. } => "ball_intersect_square",
            Region::StripWindow { .. } => "strip_window",
        }
    }

    /// Bounding box of the region.
    pub fn bounds(&self) -> Bounds {
        match *self {
            Region::StripWindow { xi, eta } => Bounds { x0: xi.0, x1: xi.1, y0: eta.0, y1: eta.1 },
            _ => Bounds::UNIT,
        }
    }

    /// Whether `p` lies in the region's interior.
    pub fn contains(&self, p: (f64, f64)) -> bool {
        let b = self.bounds();
        let inside = p.0 > b.x0 && p.0 < b.x1 && p.1 > b.y0 && p.1 < b.y1;
        match *self {
            Region::SquareMinusBall { center, radius } => inside && dist(p, center) > radius,
            Region::BallIntersectSquare { center, radius } => inside && dist(p, center) < radius,
            _ => inside,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Region(m));
        match *self {
            Region::UnitSquare => Ok(()),
            Region::SquareMinusBall { center, radius } | Region::BallIntersectSquare { center, radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return bad(format!("ball radius {radius} must be positive"));
                }
                if !(center.0 > 0.0 && center.0 < 1.0 && center.1 > 0.0 && center.1 < 1.0) {
                    return bad(format!("ball center {center:?} outside the unit square"));
                }
                Ok(())
            }
            Region::StripWindow { xi, eta } => {
                if !(xi.0 >= 0.0 && xi.1 <= 1.0 && xi.0 < xi.1) {
                    return bad(format!("window xi-range {xi:?} must be a subinterval of [0, 1]"));
                }
                if !(eta.0 < eta.1 && eta.0.is_finite() && eta.1.is_finite()) {
                    return bad(format!("window eta-range {eta:?} is empty or unbounded"));
                }
                Ok(())
            }
        }
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Bounds {
    pub const UNIT: Bounds = Bounds { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };

    fn around(c: (f64, f64), half: f64, clip: &Bounds) -> Bounds {
        Bounds {
            x0: (c.0 - half).max(clip.x0),
            x1: (c.0 + half).min(clip.x1),
            y0: (c.1 - half).max(clip.y0),
            y1: (c.1 + half).min(clip.y1),
        }
    }

    fn overlaps(&self, o: &Bounds) -> bool {
        self.x0 < o.x1 && o.x0 < self.x1 && self.y0 < o.y1 && o.y0 < self.y1
    }

    fn contains_strict(&self, p: (f64, f64)) -> bool {
        p.0 > self.x0 && p.0 < self.x1 && p.1 > self.y0 && p.1 < self.y1
    }

    /// Distance from `c` to the boundary along direction `theta`.
    fn exit(&self, c: (f64, f64), theta: f64) -> f64 {
        let (s, co) = theta.sin_cos();
        let mut t = f64::INFINITY;
        if co > 0.0 {
            t = t.min((self.x1 - c.0) / co);
        } else if co < 0.0 {
            t = t.min((self.x0 - c.0) / co);
        }
        if s > 0.0 {
            t = t.min((self.y1 - c.1) / s);
        } else if s < 0.0 {
            t = t.min((self.y0 - c.1) / s);
        }
        t.max(0.0)
    }
}

/// Radial scheme of a polar patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Radial {
    /// `r = r_lo (r_hi / r_lo)^u`; used around the singular point.
    Log { floor: f64 },
    Linear,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Polar {
    pub center: (f64, f64),
    pub r_in: f64,
    pub r_cap: f64,
    pub bounds: Bounds,
    pub radial: Radial,
}

impl Polar {
    /// Maps `(u, theta)` to a field point and the Jacobian of the map.
    #[inline]
    pub fn map(&self, u: f64, theta: f64) -> Option<((f64, f64), f64)> {
        let r_hi = self.bounds.exit(self.center, theta).min(self.r_cap);
        let (r, jac) = match self.radial {
            Radial::Log { floor } => {
                let r_lo = self.r_in.max(floor);
                if r_hi <= r_lo {
                    return None;
                }
                let span = (r_hi / r_lo).ln();
                let r = r_lo * (u * span).exp();
                (r, r * r * span)
            }
            Radial::Linear => {
                if r_hi <= self.r_in {
                    return None;
                }
                let span = r_hi - self.r_in;
                let r = self.r_in + span * u;
                (r, r * span)
            }
        };
        let (s, c) = theta.sin_cos();
        let b = &self.bounds;
        let p = (
            (self.center.0 + r * c).clamp(b.x0, b.x1),
            (self.center.1 + r * s).clamp(b.y0, b.y1),
        );
        Some((p, jac))
    }

    /// Angular breakpoints that make the radial limits smooth per sector.
    fn sectors(&self) -> Vec<(f64, f64)> {
        let b = &self.bounds;
        let c = self.center;
        let mut angles = vec![-PI, PI];
        for (px, py) in [(b.x0, b.y0), (b.x1, b.y0), (b.x1, b.y1), (b.x0, b.y1)] {
            angles.push((py - c.1).atan2(px - c.0));
        }
        let edges = [(b.x1 - c.0, 0.0), (c.0 - b.x0, PI), (b.y1 - c.1, 0.5 * PI), (c.1 - b.y0, -0.5 * PI)];
        for radius in [self.r_in, self.r_cap] {
            if !(radius > 0.0 && radius.is_finite()) {
                continue;
            }
            for &(d, normal) in &edges {
                if d < radius {
                    let half = (d / radius).clamp(-1.0, 1.0).acos();
                    angles.push(normal + half);
                    angles.push(normal - half);
                }
            }
        }
        for a in angles.iter_mut() {
            if *a > PI {
                *a -= 2.0 * PI;
            } else if *a < -PI {
                *a += 2.0 * PI;
            }
        }
        angles.sort_by(f64::total_cmp);
        angles.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        angles.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| b - a > 1e-14).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Piece {
    Cartesian,
    Polar(Polar),
}

impl Piece {
    #[inline]
    pub fn map(&self, u: f64, v: f64) -> Option<((f64, f64), f64)> {
        match self {
            Piece::Cartesian => Some(((u, v), 1.0)),
            Piece::Polar(p) => p.map(u, v),
        }
    }
}

/// Where the integrand is singular or steep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layout {
    /// Point where the integrand has a logarithmic-or-worse singularity.
    pub singular: Option<(f64, f64)>,
    /// Layer width scale.
    pub eps: f64,
    /// Whether the integrand is integrable at `singular` (false for second
    /// derivatives).
    pub integrable_at_singular: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct Decomposition {
    pub pieces: Vec<Piece>,
    pub cells: Vec<(usize, Rect)>,
}

const RADIAL_FLOOR: f64 = 1e-10;
/// Keeps log-graded radii resolvable against unit-size coordinates.
const ABS_FLOOR: f64 = 1e-14;
const SAME_POINT: f64 = 1e-12;

fn singular_half_width(eps: f64) -> f64 {
    (6.0 * eps).min(0.25)
}

pub(crate) fn decompose(region: &Region, layout: &Layout) -> Result<Decomposition> {
    region.validate()?;
    if !(layout.eps > 0.0) {
        return Err(Error::Region(format!("layer scale {} must be positive", layout.eps)));
    }
    let dom = region.bounds();
    let sing = layout.singular.filter(|&s| dom.contains_strict(s));
    let mut pieces = Vec::new();
    let mut cells = Vec::new();
    let mut holes = Vec::new();

    let add_polar = |pieces: &mut Vec<Piece>, cells: &mut Vec<(usize, Rect)>, p: Polar| {
        let id = pieces.len();
        for (a, b) in p.sectors() {
            cells.push((id, Rect::new((0.0, 1.0), (a, b))));
        }
        pieces.push(Piece::Polar(p));
    };

    match *region {
        Region::BallIntersectSquare { center, radius } => {
            let radial = match sing {
                Some(s) if dist(s, center) <= SAME_POINT => Radial::Log { floor: (RADIAL_FLOOR * radius).max(ABS_FLOOR) },
                Some(s) if dist(s, center) < radius => {
                    return Err(Error::Region(format!(
                        "singular point {s:?} inside but off-centre of the ball at {center:?}"
                    )))
                }
                _ => Radial::Linear,
            };
            if matches!(radial, Radial::Log { .. }) && !layout.integrable_at_singular {
                return Err(Error::Region("integrand is not integrable at the singular point".into()));
            }
            add_polar(&mut pieces, &mut cells, Polar { center, r_in: 0.0, r_cap: radius, bounds: dom, radial });
            return Ok(Decomposition { pieces, cells });
        }
        Region::SquareMinusBall { center, radius } => {
            let on_ball = sing.is_some_and(|s| dist(s, center) <= SAME_POINT);
            if let Some(s) = sing {
                if !on_ball && dist(s, center) <= radius {
                    return Err(Error::Region(format!(
                        "singular point {s:?} inside but off-centre of the excluded ball"
                    )));
                }
            }
            let half = if on_ball {
                singular_half_width(layout.eps).max(2.0 * radius)
            } else {
                2.0 * radius
            };
            let bounds = Bounds::around(center, half, &dom);
            let radial = if on_ball { Radial::Log { floor: 0.0 } } else { Radial::Linear };
            add_polar(
                &mut pieces,
                &mut cells,
                Polar { center, r_in: radius, r_cap: f64::INFINITY, bounds, radial },
            );
            holes.push(bounds);
            if let (Some(s), false) = (sing, on_ball) {
                if bounds.contains_strict(s) {
                    return Err(Error::Region(format!(
                        "singular point {s:?} too close to the excluded ball at {center:?}"
                    )));
                }
            }
        }
        Region::UnitSquare | Region::StripWindow { .. } => {}
    }

    let ball_centered = matches!(*region, Region::SquareMinusBall { center, .. }
        if sing.is_some_and(|s| dist(s, center) <= SAME_POINT));
    if let (Some(s), false) = (sing, ball_centered) {
        if !layout.integrable_at_singular {
            return Err(Error::Region("integrand is not integrable at the singular point".into()));
        }
        let bounds = Bounds::around(s, singular_half_width(layout.eps), &dom);
        if holes.iter().any(|h| h.overlaps(&bounds)) {
            return Err(Error::Region("singular patch overlaps the excluded ball patch".into()));
        }
        let floor = (RADIAL_FLOOR * singular_half_width(layout.eps)).max(ABS_FLOOR);
        add_polar(
            &mut pieces,
            &mut cells,
            Polar { center: s, r_in: 0.0, r_cap: f64::INFINITY, bounds, radial: Radial::Log { floor } },
        );
        holes.push(bounds);
    }

    let (kx, ky) = knots(&dom, layout, &holes);
    let rest = pieces.len();
    pieces.push(Piece::Cartesian);
    for wy in ky.windows(2) {
        for wx in kx.windows(2) {
            let mid = (0.5 * (wx[0] + wx[1]), 0.5 * (wy[0] + wy[1]));
            if holes.iter().any(|h| h.contains_strict(mid)) {
                continue;
            }
            cells.push((rest, Rect::new((wx[0], wx[1]), (wy[0], wy[1]))));
        }
    }
    Ok(Decomposition { pieces, cells })
}

fn knots(dom: &Bounds, layout: &Layout, holes: &[Bounds]) -> (Vec<f64>, Vec<f64>) {
    let eps = layout.eps;
    let se = eps.sqrt();
    let cut = [1.0 / 6.0, 1.0 / 3.0, 2.0 / 3.0, 5.0 / 6.0];
    let mut kx = vec![dom.x0, dom.x1];
    let mut ky = vec![dom.y0, dom.y1];
    kx.extend(cut);
    ky.extend(cut);
    for h in holes {
        kx.extend([h.x0, h.x1]);
        ky.extend([h.y0, h.y1]);
    }
    for m in [1.0, 4.0, 16.0, 64.0] {
        kx.extend([m * eps, 1.0 - m * eps]);
    }
    for m in [0.5, 2.0, 8.0] {
        ky.extend([m * se, 1.0 - m * se]);
    }
    if let Some((x, y)) = layout.singular {
        kx.push(x);
        ky.push(y);
        for m in [1.0, 4.0, 16.0, 64.0] {
            kx.extend([x - m * eps, x + m * eps]);
            ky.extend([y - m * eps, y + m * eps]);
        }
        for m in [0.5, 1.0, 2.0, 4.0, 8.0] {
            ky.extend([y - m * se, y + m * se]);
        }
    }
    let tidy = |mut k: Vec<f64>, lo: f64, hi: f64| {
        k.retain(|&t| t >= lo && t <= hi && t.is_finite());
        k.sort_by(f64::total_cmp);
        k.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
        k
    };
    (tidy(kx, dom.x0, dom.x1), tidy(ky, dom.y0, dom.y1))
}
