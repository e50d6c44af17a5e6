//! Square QAM constellations with Gray labelling and unit average energy.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QamConstellation {
    order: usize,
    side: usize,
    scale: f64,
    points: Vec<Complex64>,
    labels: Vec<u32>,
}

fn gray(i: usize) -> u32 {
    (i ^ (i >> 1)) as u32
}

impl QamConstellation {
    /// `order` must be a power of four (4, 16, 64, ...).
    pub fn new(order: usize) -> Result<Self> {
        if order < 4 || !order.is_power_of_two() || !order.trailing_zeros().is_multiple_of(2) {
            return Err(Error::domain(format!("QAM order {order} is not a power of four")));
        }
        let side = 1usize << (order.trailing_zeros() / 2);
        let bits = side.trailing_zeros();
        // Mean energy of the unscaled grid {±1, ±3, ...}² is 2(K−1)/3.
        let scale = (1.5 / (order as f64 - 1.0)).sqrt();
        let mut points = Vec::with_capacity(order);
        let mut labels = Vec::with_capacity(order);
        for i in 0..side {
            for q in 0..side {
                points.push(Complex64::new(
                    scale * (2.0 * i as f64 - (side as f64 - 1.0)),
                    scale * (2.0 * q as f64 - (side as f64 - 1.0)),
                ));
                labels.push((gray(i) << bits) | gray(q));
            }
        }
        Ok(QamConstellation {
            order,
            side,
            scale,
            points,
            labels,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.order.trailing_zeros()
    }

    /// Points in index order `i · side + q` (in-phase level `i`, quadrature level `q`).
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Gray bit label of each point.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    /// Index of the point carrying bit label `label`.
    pub fn index_of_label(&self, label: u32) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Euclidean minimum-distance detection. The square grid decouples into two
    /// independent per-axis slicers.
    pub fn detect(&self, z: Complex64) -> usize {
        let last = self.side as f64 - 1.0;
        let axis = |v: f64| -> usize {
            let level = ((v / self.scale + last) / 2.0).round();
            if level.is_nan() {
                0
            } else {
                level.clamp(0.0, last) as usize
            }
        };
        axis(z.re) * self.side + axis(z.im)
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order as f64
    }

    /// Distance between adjacent points on an axis.
    pub fn min_distance(&self) -> f64 {
        2.0 * self.scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_detect(c: &QamConstellation, z: Complex64) -> usize {
        let mut best = 0;
        for (i, p) in c.points().iter().enumerate() {
            if (z - p).norm_sqr() < (z - c.point(best)).norm_sqr() {
                best = i;
            }
        }
        best
    }

    #[test]
    fn orders() {
        assert!(QamConstellation::new(8).is_err());
        assert!(QamConstellation::new(2).is_err());
        assert!(QamConstellation::new(32).is_err());
        for k in [4, 16, 64, 256] {
            let c = QamConstellation::new(k).unwrap();
            assert_eq!(c.points().len(), k);
            assert!((c.mean_energy() - 1.0).abs() < 1e-12);
            let mut l = c.labels().to_vec();
            l.sort_unstable();
            assert_eq!(l, (0..k as u32).collect::<Vec<_>>());
        }
    }

    #[test]
    fn gray_adjacency() {
        for k in [4, 16, 64] {
            let c = QamConstellation::new(k).unwrap();
            let d = c.min_distance();
            for i in 0..k {
                for j in i + 1..k {
                    if ((c.point(i) - c.point(j)).norm() - d).abs() < 1e-9 {
                        assert_eq!((c.labels()[i] ^ c.labels()[j]).count_ones(), 1, "k={k} {i} {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn slicer_matches_brute_force() {
        let c = QamConstellation::new(16).unwrap();
        for a in -40..=40 {
            for b in -40..=40 {
                let z = Complex64::new(a as f64 * 0.037 + 0.001, b as f64 * 0.041 - 0.002);
                assert_eq!(c.detect(z), brute_detect(&c, z));
            }
        }
        for (i, &p) in c.points().iter().enumerate() {
            assert_eq!(c.detect(p), i);
            assert_eq!(c.index_of_label(c.labels()[i]), Some(i));
        }
    }
}
