//! Curves, discrete Fréchet distance, arc-length resampling and relevance
//! scoring of freshly sensed tracks against reference patterns.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Comparison length used when the caller does not configure one.
pub const DEFAULT_COMPARISON_LENGTH: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    /// meters
    pub x: f64,
    /// meters
    pub y: f64,
    /// seconds
    pub t: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        Point { x, y, t }
    }

    /// Euclidean distance over the spatial projection.
    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        libm::sqrt(dx * dx + dy * dy)
    }

    fn is_valid(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.t.is_finite() && self.t >= 0.0
    }
}

/// A time-ordered, non-empty point sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    points: Vec<Point>,
    label: Option<String>,
}

impl Trajectory {
    /// Builds a trajectory, rejecting empty input, non-finite coordinates,
    /// negative time and timestamps that are not strictly increasing.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("trajectory must contain at least one point"));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.is_valid() {
                return Err(Error::invalid(alloc::format!(
                    "point {i} is not finite or has negative time"
                )));
            }
            if i > 0 && p.t <= points[i - 1].t {
                return Err(Error::invalid(alloc::format!(
                    "timestamps must be strictly increasing (point {i})"
                )));
            }
        }
        Ok(Trajectory { points, label: None })
    }

    /// Convenience constructor that stamps the points `0, 1, 2, ...` seconds.
    pub fn from_xy(coords: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            coords
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| Point::new(x, y, i as f64))
                .collect(),
        )
    }

    /// Internal constructor for sequences that are monotone by construction.
    pub(crate) fn from_points_unchecked(points: Vec<Point>) -> Self {
        debug_assert!(!points.is_empty());
        Trajectory { points, label: None }
    }

    /// Raw access for the simulator, whose step clock is monotone by construction.
    pub(crate) fn points_mut(&mut self) -> &mut Vec<Point> {
        &mut self.points
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> &Point {
        &self.points[0]
    }

    pub fn last(&self) -> &Point {
        &self.points[self.points.len() - 1]
    }

    /// Appends a point; its timestamp must exceed the current last one.
    pub fn push(&mut self, p: Point) -> Result<()> {
        if !p.is_valid() {
            return Err(Error::invalid("point is not finite or has negative time"));
        }
        if p.t <= self.last().t {
            return Err(Error::invalid("timestamps must be strictly increasing"));
        }
        self.points.push(p);
        Ok(())
    }

    /// The trailing `n` points (or the whole curve when shorter).
    pub fn tail(&self, n: usize) -> Trajectory {
        let n = n.max(1);
        let start = self.points.len().saturating_sub(n);
        Trajectory {
            points: self.points[start..].to_vec(),
            label: self.label.clone(),
        }
    }

    /// Total polyline length of the spatial projection.
    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(&w[1])).sum()
    }

    /// Mean spatial position of the points.
    pub fn mean_point(&self) -> Point {
        let n = self.points.len() as f64;
        let (sx, sy, st) = self
            .points
            .iter()
            .fold((0.0, 0.0, 0.0), |(sx, sy, st), p| (sx + p.x, sy + p.y, st + p.t));
        Point::new(sx / n, sy / n, st / n)
    }
}

/// Discrete Fréchet distance between the spatial projections of two curves.
///
/// Eiter–Mannila coupling dynamic program in O(mn) time and O(n) memory.
pub fn discrete_frechet(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("discrete Fréchet distance needs non-empty curves"));
    }
    Ok(frechet_points(a.points(), b.points()))
}

pub(crate) fn frechet_points(a: &[Point], b: &[Point]) -> f64 {
    let n = b.len();
    let mut prev = vec![0.0f64; n];
    let mut cur = vec![0.0f64; n];
    for (i, pa) in a.iter().enumerate() {
        for (j, pb) in b.iter().enumerate() {
            let d = pa.dist(pb);
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => d.max(cur[j - 1]),
                (_, 0) => d.max(prev[0]),
                _ => d.max(prev[j].min(prev[j - 1]).min(cur[j - 1])),
            };
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[n - 1]
}

/// Resamples a polyline to `n` points equally spaced in arc length.
///
/// Endpoints are kept exactly and timestamps are interpolated linearly along
/// each segment. A curve with zero total length is spread uniformly in time.
pub fn resample_uniform(a: &Trajectory, n: usize) -> Result<Trajectory> {
    if n < 2 {
        return Err(Error::invalid("resampling needs at least 2 output points"));
    }
    if a.len() < 2 {
        return Err(Error::invalid("resampling needs a curve with at least 2 points"));
    }
    let pts = a.points();
    let mut cumulative = Vec::with_capacity(pts.len());
    cumulative.push(0.0);
    for w in pts.windows(2) {
        let last = cumulative[cumulative.len() - 1];
        cumulative.push(last + w[0].dist(&w[1]));
    }
    let total = cumulative[cumulative.len() - 1];
    let first = pts[0];
    let last = pts[pts.len() - 1];

    let mut out = Vec::with_capacity(n);
    if total <= 0.0 {
        for k in 0..n {
            let f = k as f64 / (n - 1) as f64;
            out.push(Point::new(first.x, first.y, lerp(first.t, last.t, f)));
        }
        out[n - 1] = last;
        return Ok(Trajectory::from_points_unchecked(out));
    }

    let mut seg = 0;
    out.push(first);
    for k in 1..n - 1 {
        let target = total * k as f64 / (n - 1) as f64;
        while seg + 2 < pts.len() && cumulative[seg + 1] < target {
            seg += 1;
        }
        let len = cumulative[seg + 1] - cumulative[seg];
        let f = if len > 0.0 {
            ((target - cumulative[seg]) / len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (p, q) = (pts[seg], pts[seg + 1]);
        out.push(Point::new(lerp(p.x, q.x, f), lerp(p.y, q.y, f), lerp(p.t, q.t, f)));
    }
    out.push(last);
    Ok(Trajectory::from_points_unchecked(out))
}

#[inline]
fn lerp(a: f64, b: f64, f: f64) -> f64 {
    a + f * (b - a)
}

/// Fréchet distance of a sensed curve to its closest reference pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelevanceScore {
    /// meters
    pub distance: f64,
    pub is_novel: bool,
}

impl RelevanceScore {
    /// Novelty requires strict exceedance; a distance equal to the
    /// threshold is treated as already known.
    pub fn classify(distance: f64, threshold: f64) -> Self {
        RelevanceScore {
            distance,
            is_novel: distance > threshold,
        }
    }

    /// Score used when no reference patterns exist yet: everything is new.
    pub fn unreferenced() -> Self {
        RelevanceScore {
            distance: f64::INFINITY,
            is_novel: true,
        }
    }
}

/// Reference patterns pre-resampled to a common comparison length.
#[derive(Debug, Clone, Default)]
pub struct ReferenceSet {
    references: Vec<Trajectory>,
    comparison_length: usize,
}

impl ReferenceSet {
    pub fn new(references: &[Trajectory], comparison_length: usize) -> Result<Self> {
        if comparison_length < 2 {
            return Err(Error::invalid("comparison length must be at least 2"));
        }
        let references = references
            .iter()
            .map(|r| prepare(r, comparison_length))
            .collect::<Result<Vec<_>>>()?;
        Ok(ReferenceSet {
            references,
            comparison_length,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.references.is_empty()
    }

    pub fn len(&self) -> usize {
        self.references.len()
    }

    pub fn references(&self) -> &[Trajectory] {
        &self.references
    }

    /// Minimum Fréchet distance from `data` to any reference.
    pub fn distance(&self, data: &Trajectory) -> Result<f64> {
        if self.references.is_empty() {
            return Err(Error::invalid("reference set is empty"));
        }
        let data = prepare(data, self.comparison_length)?;
        Ok(self
            .references
            .iter()
            .map(|r| frechet_points(data.points(), r.points()))
            .fold(f64::INFINITY, f64::min))
    }

    pub fn score(&self, data: &Trajectory, threshold: f64) -> Result<RelevanceScore> {
        check_threshold(threshold)?;
        Ok(RelevanceScore::classify(self.distance(data)?, threshold))
    }
}

/// Single-point curves cannot be resampled and are compared as they are.
fn prepare(t: &Trajectory, n: usize) -> Result<Trajectory> {
    if t.len() < 2 {
        Ok(t.clone())
    } else {
        resample_uniform(t, n)
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold.is_finite() && threshold > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("relevance threshold must be positive and finite"))
    }
}

/// Scores `new_data` against the closest of `references` after resampling
/// both sides to `comparison_length` points.
pub fn relevance_score(
    new_data: &Trajectory,
    references: &[Trajectory],
    threshold: f64,
    comparison_length: usize,
) -> Result<RelevanceScore> {
    if references.is_empty() {
        return Err(Error::invalid("relevance scoring needs at least one reference"));
    }
    check_threshold(threshold)?;
    ReferenceSet::new(references, comparison_length)?.score(new_data, threshold)
}

/// Fréchet distance between aligned windows of two paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowDistance {
    pub start_time: f64,
    pub end_time: f64,
    pub distance: f64,
}

/// Slides a window of `window` points with step `stride` over two paths
/// sampled on the same clock and reports the Fréchet distance per window.
pub fn sliding_window_frechet(
    a: &Trajectory,
    b: &Trajectory,
    window: usize,
    stride: usize,
) -> Result<Vec<WindowDistance>> {
    if window == 0 || stride == 0 {
        return Err(Error::invalid("window and stride must be positive"));
    }
    let len = a.len().min(b.len());
    let mut out = Vec::new();
    if len < window {
        return Ok(out);
    }
    let mut start = 0;
    while start + window <= len {
        let wa = &a.points()[start..start + window];
        let wb = &b.points()[start..start + window];
        out.push(WindowDistance {
            start_time: wa[0].t,
            end_time: wa[window - 1].t,
            distance: frechet_points(wa, wb),
        });
        start += stride;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy(c: &[(f64, f64)]) -> Trajectory {
        Trajectory::from_xy(c).unwrap()
    }

    #[test]
    fn rejects_bad_trajectories() {
        assert!(Trajectory::new(vec![]).is_err());
        assert!(Trajectory::new(vec![Point::new(0.0, 0.0, 1.0), Point::new(1.0, 0.0, 1.0)]).is_err());
        assert!(Trajectory::new(vec![Point::new(f64::NAN, 0.0, 1.0)]).is_err());
        assert!(Trajectory::new(vec![Point::new(0.0, 0.0, -1.0)]).is_err());
        let mut t = xy(&[(0.0, 0.0)]);
        assert!(t.push(Point::new(1.0, 1.0, 0.0)).is_err());
        assert!(t.push(Point::new(1.0, 1.0, 0.5)).is_ok());
    }

    #[test]
    fn frechet_identity_and_single_points() {
        let a = xy(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        assert_eq!(discrete_frechet(&a, &a).unwrap(), 0.0);
        let p = xy(&[(0.0, 0.0)]);
        let q = xy(&[(3.0, 4.0)]);
        assert_eq!(discrete_frechet(&p, &q).unwrap(), 5.0);
    }

    #[test]
    fn frechet_single_point_against_curve() {
        let p = xy(&[(0.0, 0.0)]);
        let c = xy(&[(1.0, 0.0), (0.0, 2.0), (-3.0, 0.0)]);
        assert_eq!(discrete_frechet(&p, &c).unwrap(), 3.0);
    }

    #[test]
    fn frechet_ignores_timestamps() {
        let a = Trajectory::new(vec![Point::new(0.0, 0.0, 0.0), Point::new(1.0, 1.0, 1.0)]).unwrap();
        let b = Trajectory::new(vec![Point::new(0.0, 0.0, 5.0), Point::new(1.0, 1.0, 90.0)]).unwrap();
        assert_eq!(discrete_frechet(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn resample_segment_midpoint() {
        let a = Trajectory::new(vec![Point::new(0.0, 0.0, 0.0), Point::new(10.0, 0.0, 2.0)]).unwrap();
        let r = resample_uniform(&a, 3).unwrap();
        assert_eq!(
            r.points(),
            &[Point::new(0.0, 0.0, 0.0), Point::new(5.0, 0.0, 1.0), Point::new(10.0, 0.0, 2.0)]
        );
    }

    #[test]
    fn resample_fixed_point() {
        let a = xy(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]);
        assert_eq!(resample_uniform(&a, 4).unwrap(), a);
    }

    #[test]
    fn resample_zigzag_arc_positions() {
        let a = xy(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]);
        let r = resample_uniform(&a, 5).unwrap();
        let expect = [(0.0, 0.0), (0.5, 0.5), (1.0, 1.0), (1.5, 0.5), (2.0, 0.0)];
        let s = 2.0 * core::f64::consts::SQRT_2;
        let mut walked = 0.0;
        for (k, (p, e)) in r.points().iter().zip(expect).enumerate() {
            assert!((p.x - e.0).abs() < 1e-12 && (p.y - e.1).abs() < 1e-12, "{k}: {p:?}");
            if k > 0 {
                walked += p.dist(&r.points()[k - 1]);
                assert!((walked - s * k as f64 / 4.0).abs() < 1e-12);
            }
        }
        assert!((r.points()[1].t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn resample_errors_and_degenerate() {
        let a = xy(&[(0.0, 0.0), (1.0, 0.0)]);
        assert!(resample_uniform(&a, 1).is_err());
        assert!(resample_uniform(&xy(&[(0.0, 0.0)]), 4).is_err());
        let still = xy(&[(2.0, 2.0), (2.0, 2.0), (2.0, 2.0)]);
        let r = resample_uniform(&still, 5).unwrap();
        assert_eq!(r.len(), 5);
        assert!(r.points().windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn resample_skips_zero_length_segments() {
        let a = xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let r = resample_uniform(&a, 5).unwrap();
        let xs: Vec<f64> = r.points().iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(r.points().windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn relevance_redundant_and_boundary() {
        let r = xy(&[(0.0, 0.0), (5.0, 5.0), (10.0, 0.0)]);
        let s = relevance_score(&r, core::slice::from_ref(&r), 1.0, 32).unwrap();
        assert_eq!(s, RelevanceScore { distance: 0.0, is_novel: false });

        // a straight segment shifted by exactly 1 m scores exactly 1
        let a = xy(&[(0.0, 0.0), (4.0, 0.0)]);
        let b = xy(&[(0.0, 1.0), (4.0, 1.0)]);
        let s = relevance_score(&b, &[a], 1.0, 5).unwrap();
        assert_eq!(s.distance, 1.0);
        assert!(!s.is_novel);
    }

    #[test]
    fn relevance_errors() {
        let r = xy(&[(0.0, 0.0), (1.0, 0.0)]);
        assert!(relevance_score(&r, &[], 1.0, 32).is_err());
        assert!(relevance_score(&r, core::slice::from_ref(&r), 0.0, 32).is_err());
    }

    #[test]
    fn sliding_windows_of_identical_paths_are_zero() {
        let a = xy(&[(0.0, 0.0), (1.0, 2.0), (3.0, 1.0), (4.0, 4.0), (6.0, 2.0)]);
        let w = sliding_window_frechet(&a, &a, 3, 1).unwrap();
        assert_eq!(w.len(), 3);
        assert!(w.iter().all(|d| d.distance == 0.0));
    }
}
