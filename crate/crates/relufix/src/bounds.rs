//! Axis-aligned boxes over `R^n`.
//!
//! Boxes describe property input regions, search domains and the subdivision
//! cells of the verifier. Bounds may be infinite until a box is bound to a
//! network whose normalization supplies finite sensor ranges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An axis-aligned box `[lower_1, upper_1] x ... x [lower_n, upper_n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    /// Builds a box, rejecting NaN entries, mismatched lengths and inverted axes.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Dimension {
                what: "box bounds",
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        for (i, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() {
                return Err(Error::InvalidBox(format!("NaN bound on axis {i}")));
            }
            if l > u {
                return Err(Error::InvalidBox(format!("axis {i} has lower {l} > upper {u}")));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// True when every bound is finite.
    pub fn is_finite(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|v| v.is_finite())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.lower)
                .zip(&self.upper)
                .all(|((&v, &l), &u)| v >= l && v <= u)
    }

    /// Returns the first coordinate of `x` outside the box, if any.
    pub fn check_contains(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension { what: "point", expected: self.dim(), actual: x.len() });
        }
        for (i, &v) in x.iter().enumerate() {
            if v < self.lower[i] || v > self.upper[i] {
                return Err(Error::OutOfBox { dim: i, value: v, lo: self.lower[i], hi: self.upper[i] });
            }
        }
        Ok(())
    }

    /// Componentwise projection of `x` onto the box.
    pub fn clip(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.lower)
            .zip(&self.upper)
            .map(|((&v, &l), &u)| v.max(l).min(u))
            .collect()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| 0.5 * (l + u))
            .collect()
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    /// Intersects with `other`; errors when the intersection is empty.
    pub fn intersect(&self, other: &Bounds) -> Result<Bounds> {
        if other.dim() != self.dim() {
            return Err(Error::Dimension { what: "box bounds", expected: self.dim(), actual: other.dim() });
        }
        let lower: Vec<f64> = self.lower.iter().zip(&other.lower).map(|(&a, &b)| a.max(b)).collect();
        let upper: Vec<f64> = self.upper.iter().zip(&other.upper).map(|(&a, &b)| a.min(b)).collect();
        Bounds::new(lower, upper)
            .map_err(|_| Error::InvalidBox("empty intersection".into()))
    }

    /// Splits at the midpoint of `axis` into lower and upper halves.
    pub fn split(&self, axis: usize) -> (Bounds, Bounds) {
        let mid = 0.5 * (self.lower[axis] + self.upper[axis]);
        let mut lo_half = self.clone();
        let mut hi_half = self.clone();
        lo_half.upper[axis] = mid;
        hi_half.lower[axis] = mid;
        (lo_half, hi_half)
    }

    /// Widest axis under per-axis scale factors; ties break to the lowest index.
    ///
    /// `scale[i]` divides the raw width, so sensor ranges can be passed to
    /// compare normalized widths.
    pub fn widest_axis(&self, scale: Option<&[f64]>) -> usize {
        let mut best = 0;
        let mut best_w = f64::NEG_INFINITY;
        for i in 0..self.dim() {
            let mut w = self.width(i);
            if let Some(s) = scale {
                if s[i] > 0.0 {
                    w /= s[i];
                }
            }
            if w > best_w {
                best_w = w;
                best = i;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inverted_axis() {
        assert!(Bounds::new(vec![0.0, 1.0], vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn rejects_length_mismatch() {
        assert!(Bounds::new(vec![0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn degenerate_axis_is_allowed() {
        let b = Bounds::new(vec![0.0, 2.0], vec![1.0, 2.0]).unwrap();
        assert!(b.contains(&[0.5, 2.0]));
        assert_eq!(b.width(1), 0.0);
    }

    #[test]
    fn clip_projects_into_box() {
        let b = Bounds::new(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(b.clip(&[2.0, -3.0]), vec![1.0, -1.0]);
        assert_eq!(b.clip(&[0.25, 0.5]), vec![0.25, 0.5]);
    }

    #[test]
    fn split_halves_share_midpoint() {
        let b = Bounds::new(vec![0.0, 0.0], vec![4.0, 1.0]).unwrap();
        let (lo, hi) = b.split(0);
        assert_eq!(lo.upper[0], 2.0);
        assert_eq!(hi.lower[0], 2.0);
        assert_eq!(lo.lower[0], 0.0);
        assert_eq!(hi.upper[0], 4.0);
    }

    #[test]
    fn widest_axis_respects_scale() {
        let b = Bounds::new(vec![0.0, 0.0], vec![10.0, 2.0]).unwrap();
        assert_eq!(b.widest_axis(None), 0);
        // Axis 0 spans 10 of a 100-wide sensor (0.1 normalized); axis 1 spans
        // 2 of a 2-wide sensor (1.0 normalized).
        assert_eq!(b.widest_axis(Some(&[100.0, 2.0])), 1);
    }

    #[test]
    fn intersect_clips_infinite_bounds() {
        let raw = Bounds::new(vec![55947.691, f64::NEG_INFINITY], vec![f64::INFINITY, 60.0]).unwrap();
        let sensors = Bounds::new(vec![0.0, 0.0], vec![60760.0, 1200.0]).unwrap();
        let got = raw.intersect(&sensors).unwrap();
        assert_eq!(got.lower, vec![55947.691, 0.0]);
        assert_eq!(got.upper, vec![60760.0, 60.0]);
    }

    #[test]
    fn intersect_detects_empty() {
        let a = Bounds::new(vec![0.0], vec![1.0]).unwrap();
        let b = Bounds::new(vec![2.0], vec![3.0]).unwrap();
        assert!(a.intersect(&b).is_err());
    }
}
