use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs 0 < r_min < r_max, got [{r_min}, {r_max}]")]
    Bounds { r_min: f64, r_max: f64 },
    #[error("grid needs at least {min} nodes, got {count}")]
    TooFewNodes { count: usize, min: usize },
}

/// Logarithmically spaced radial nodes, i.e. a uniform grid in `s = log r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    s: Vec<f64>,
    r: Vec<f64>,
}

/// Serialized form of a grid: the nodes are regenerated on load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub count: usize,
}

impl TryFrom<GridSpec> for RadialGrid {
    type Error = GridError;
    fn try_from(spec: GridSpec) -> Result<Self, Self::Error> {
        RadialGrid::new(spec.r_min, spec.r_max, spec.count)
    }
}

impl From<RadialGrid> for GridSpec {
    fn from(g: RadialGrid) -> Self {
        g.spec()
    }
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, count: usize) -> Result<Self, GridError> {
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(GridError::Bounds { r_min, r_max });
        }
        if count < 2 {
            return Err(GridError::TooFewNodes { count, min: 2 });
        }
        let (s0, s1) = (r_min.ln(), r_max.ln());
        let ds = (s1 - s0) / (count - 1) as f64;
        let mut s: Vec<f64> = (0..count).map(|i| s0 + i as f64 * ds).collect();
        s[count - 1] = s1;
        let mut r: Vec<f64> = s.iter().map(|x| x.exp()).collect();
        r[0] = r_min;
        r[count - 1] = r_max;
        Ok(Self { r_min, r_max, s, r })
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            r_min: self.r_min,
            r_max: self.r_max,
            count: self.len(),
        }
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Radii.
    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    /// `log r` at each node.
    pub fn log_nodes(&self) -> &[f64] {
        &self.s
    }

    /// Spacing in `log r`.
    pub fn log_step(&self) -> f64 {
        (self.s[self.len() - 1] - self.s[0]) / (self.len() - 1) as f64
    }

    /// Index `i` with `s_i <= s < s_{i+1}`, or `None` outside the grid.
    pub fn locate(&self, s: f64) -> Option<usize> {
        let n = self.len();
        if !(s >= self.s[0] && s <= self.s[n - 1]) {
            return None;
        }
        let i = ((s - self.s[0]) / self.log_step()).floor() as usize;
        Some(i.min(n - 2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_nodes() {
        let g = RadialGrid::new(1e-4, 1e6, 501).unwrap();
        assert_eq!(g.nodes()[0], 1e-4);
        assert_eq!(*g.nodes().last().unwrap(), 1e6);
        let ratio = g.nodes()[1] / g.nodes()[0];
        for w in g.nodes().windows(2) {
            assert!((w[1] / w[0] - ratio).abs() <= 1e-12 * ratio);
        }
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(RadialGrid::new(0.0, 1.0, 10).is_err());
        assert!(RadialGrid::new(2.0, 1.0, 10).is_err());
        assert!(RadialGrid::new(1.0, 2.0, 1).is_err());
    }

    #[test]
    fn locate_brackets() {
        let g = RadialGrid::new(1e-2, 1e2, 41).unwrap();
        let s = g.log_nodes();
        assert_eq!(g.locate(s[0]), Some(0));
        assert_eq!(g.locate(s[40]), Some(39));
        assert_eq!(g.locate(0.5 * (s[7] + s[8])), Some(7));
        assert_eq!(g.locate(s[40] + 1e-9), None);
    }

    #[test]
    fn serde_regenerates_nodes() {
        let g = RadialGrid::new(1e-3, 1e3, 33).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, r#"{"r_min":0.001,"r_max":1000.0,"count":33}"#);
        let back: RadialGrid = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
    }
}
