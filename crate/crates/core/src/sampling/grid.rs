use nalgebra::Point2;
use rayon::prelude::*;

use crate::bie::DtnOperator;
use crate::error::{Error, Result};
use crate::regularization::{perturb_matrix, NoiseNorm, RegStrategy};
use crate::sampling::{GapSolver, IndicatorNorm};
use crate::scalar::{from_usize, lit, Real};

/// Sampling points farther than this from the origin are not evaluated.
pub const DEFAULT_MASK_RADIUS: f64 = 0.9;

/// Square sampling grid, `resolution × resolution` points spanning the extent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub resolution: usize,
    /// `[x_min, x_max, y_min, y_max]`.
    pub extent: [T; 4],
    pub mask_radius: T,
}

impl<T: Real> GridSpec<T> {
    /// Grid over `[-1, 1]²` masked outside `|z| ≤ 0.9`.
    pub fn unit_disk(resolution: usize) -> Self {
        Self { resolution, extent: [-T::one(), T::one(), -T::one(), T::one()], mask_radius: lit(DEFAULT_MASK_RADIUS) }
    }

    fn coord(&self, i: usize, lo: T, hi: T) -> T {
        if self.resolution == 1 {
            (lo + hi) * lit::<T>(0.5)
        } else {
            lo + (hi - lo) * from_usize::<T>(i) / from_usize::<T>(self.resolution - 1)
        }
    }

    pub fn x(&self, i: usize) -> T {
        self.coord(i, self.extent[0], self.extent[1])
    }

    pub fn y(&self, j: usize) -> T {
        self.coord(j, self.extent[2], self.extent[3])
    }

    pub fn point(&self, i: usize, j: usize) -> Point2<T> {
        Point2::new(self.x(i), self.y(j))
    }

    pub fn spacing(&self) -> T {
        if self.resolution < 2 {
            T::zero()
        } else {
            (self.extent[1] - self.extent[0]) / from_usize::<T>(self.resolution - 1)
        }
    }

    pub fn is_masked(&self, p: &Point2<T>) -> bool {
        p.coords.norm() > self.mask_radius
    }
}

/// Indicator values on a grid; `None` marks masked points. Row-major in `y`:
/// index `j * resolution + i` holds `(x_i, y_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorGrid<T: Real> {
    pub spec: GridSpec<T>,
    pub values: Vec<Option<T>>,
}

impl<T: Real> IndicatorGrid<T> {
    /// Evaluates `w` at every unmasked point.
    pub fn from_fn(spec: GridSpec<T>, w: impl Fn(&Point2<T>) -> T) -> Self {
        let n = spec.resolution;
        let values = (0..n * n)
            .map(|k| {
                let p = spec.point(k % n, k / n);
                (!spec.is_masked(&p)).then(|| w(&p))
            })
            .collect();
        Self { spec, values }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        self.values[j * self.spec.resolution + i]
    }

    pub fn max(&self) -> Option<T> {
        self.values.iter().flatten().copied().reduce(|a, b| a.max(b))
    }

    /// Unmasked `(point, W)` pairs in storage order.
    pub fn samples(&self) -> impl Iterator<Item = (Point2<T>, T)> + '_ {
        let n = self.spec.resolution;
        self.values.iter().enumerate().filter_map(move |(k, v)| v.map(|w| (self.spec.point(k % n, k / n), w)))
    }

    /// Mean of `W` over unmasked points satisfying `pred`.
    pub fn mean_where(&self, pred: impl Fn(&Point2<T>) -> bool) -> Option<T> {
        let (sum, count) = self
            .samples()
            .filter(|(p, _)| pred(p))
            .fold((T::zero(), 0usize), |(s, c), (_, w)| (s + w, c + 1));
        (count > 0).then(|| sum / from_usize::<T>(count))
    }
}

/// Multiplicative matrix noise applied once before a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixNoise<T> {
    pub delta: T,
    pub seed: u64,
    pub norm: NoiseNorm,
}

/// Evaluates `W` on the grid. The gap matrix is perturbed (optionally) and
/// decomposed once; points are evaluated in parallel.
pub fn scan<T: Real>(
    dtn: &DtnOperator<T>,
    spec: GridSpec<T>,
    reg: RegStrategy<T>,
    norm: IndicatorNorm,
    noise: Option<MatrixNoise<T>>,
) -> Result<IndicatorGrid<T>> {
    if spec.resolution == 0 {
        return Err(Error::InvalidConfig("grid resolution must be positive".into()));
    }
    let gap = match noise {
        Some(MatrixNoise { delta, seed, norm }) => perturb_matrix(&dtn.gap, delta, seed, norm),
        None => dtn.gap.clone(),
    };
    let solver = GapSolver::from_matrix(dtn.basis, gap, reg)?;
    let n = spec.resolution;
    let values = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let p = spec.point(k % n, k / n);
            if spec.is_masked(&p) {
                Ok(None)
            } else {
                solver.indicator(&p, norm).map(Some)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    if values.iter().all(Option::is_none) {
        return Err(Error::AllMasked);
    }
    Ok(IndicatorGrid { spec, values })
}
