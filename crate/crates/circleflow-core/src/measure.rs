//! Periodic probability measures and conversions between their three views.
//!
//! The canonical representation is the equal-mass cell measure: `N` arcs of
//! positive length, each carrying mass exactly `1/N`, whose left endpoints
//! form a monotone lift over one period.  That lift *is* the quantile
//! function of the measure, which makes the periodic Wasserstein geometry
//! native: transport distances, geodesics and the JKO objective all act on
//! quantiles directly.
//!
//! Cells are allowed to leave gaps (the lift may jump), so singular-but-
//! atomless measures such as the Cantor construction fit the same format;
//! contiguous measures (gap-free, spacings summing to the full circle) are
//! the common case produced by density inversion.
//!
//! Atomic and grid views exist for the transport plan solvers and the
//! pseudospectral solver respectively; conversions between all three are
//! here.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;

use crate::TAU;

const PI: f64 = core::f64::consts::PI;

/// Spacing sums and weight sums must close to this tolerance.
const MASS_TOL: f64 = 1e-12;
/// Gap/overlap tolerance when validating boundary arrays.
const GEOM_TOL: f64 = 1e-9;

/// Wrap an angle into the fundamental domain `[-π, π)`.
pub fn wrap(x: f64) -> f64 {
    let w = x - TAU * ((x + PI) / TAU).floor();
    // Guard against `x + π` rounding to exactly 2π·k from below.
    if w >= PI {
        w - TAU
    } else if w < -PI {
        w + TAU
    } else {
        w
    }
}

/// Geodesic distance on the circle: `min_k |x − y − 2πk| ≤ π`.
pub fn point_dist(x: f64, y: f64) -> f64 {
    wrap(x - y).abs()
}

/// Signed displacement from `y` to `x` along the shortest arc, in `[-π, π]`.
///
/// Antipodal pairs are resolved to `+π` so that the matched lift satisfies
/// `ŷ < x̂`, which keeps geodesic interpolation deterministic.
pub fn signed_displacement(x: f64, y: f64) -> f64 {
    let d = wrap(x - y);
    if d == -PI {
        PI
    } else {
        d
    }
}

/// Errors from measure construction and conversion.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureError {
    CellCountTooSmall { n: usize },
    NonPositiveSpacing { index: usize },
    CellOverlap { index: usize },
    SpanExceedsCircle { span: f64 },
    WeightSum { sum: f64 },
    NegativeWeight { index: usize },
    GridNotPowerOfTwo { m: usize },
    NegativeDensity { index: usize, value: f64 },
    NotNormalized { mass: f64 },
    CantorLevelOutOfRange { level: u32 },
    CosineAmplitudeTooLarge { a1: f64 },
    MollifierTooWide { width: f64, gap: f64 },
    NonFinite { what: &'static str },
}

impl fmt::Display for MeasureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::CellCountTooSmall { n } => write!(f, "cell count {n} is below the minimum of 2"),
            Self::NonPositiveSpacing { index } => {
                write!(f, "spacing at cell {index} is not strictly positive")
            }
            Self::CellOverlap { index } => write!(f, "cell {index} overlaps its successor"),
            Self::SpanExceedsCircle { span } => {
                write!(f, "cell boundaries span {span} > 2π radians")
            }
            Self::WeightSum { sum } => write!(f, "atom weights sum to {sum}, expected 1"),
            Self::NegativeWeight { index } => write!(f, "atom {index} has negative weight"),
            Self::GridNotPowerOfTwo { m } => write!(f, "grid size {m} is not a power of two ≥ 2"),
            Self::NegativeDensity { index, value } => {
                write!(f, "density value {value} at node {index} is negative")
            }
            Self::NotNormalized { mass } => write!(f, "density integrates to {mass}, expected 1"),
            Self::CantorLevelOutOfRange { level } => {
                write!(f, "cantor level {level} outside 1..=12")
            }
            Self::CosineAmplitudeTooLarge { a1 } => {
                write!(f, "cosine amplitude {a1} makes the density sign-changing")
            }
            Self::MollifierTooWide { width, gap } => {
                write!(f, "mollifier width {width} exceeds smallest atom gap {gap}")
            }
            Self::NonFinite { what } => write!(f, "non-finite value in {what}"),
        }
    }
}

impl core::error::Error for MeasureError {}

pub type Result<T> = core::result::Result<T, MeasureError>;

// ---------------------------------------------------------------------------
// CellMeasure
// ---------------------------------------------------------------------------

/// A periodic probability measure as `N` equal-mass cells.
///
/// Cell `i` occupies `[lefts[i], lefts[i] + widths[i])` on the lift and
/// carries mass `1/N`; the implied density there is `1/(N·widths[i])`.
/// Invariants: widths strictly positive, `lefts[0] ∈ [-π, π)`, cells ordered
/// and non-overlapping, total extent at most one period.
#[derive(Debug, Clone)]
pub struct CellMeasure {
    lefts: Vec<f64>,
    widths: Vec<f64>,
}

impl CellMeasure {
    /// Contiguous measure from a base point and raw spacings.  Spacings are
    /// renormalized so they close the circle exactly.
    pub fn contiguous(base: f64, widths: Vec<f64>) -> Result<Self> {
        if widths.len() < 2 {
            return Err(MeasureError::CellCountTooSmall { n: widths.len() });
        }
        let mut sum = 0.0;
        for (i, &w) in widths.iter().enumerate() {
            if !w.is_finite() {
                return Err(MeasureError::NonFinite { what: "spacing" });
            }
            if w <= 0.0 {
                return Err(MeasureError::NonPositiveSpacing { index: i });
            }
            sum += w;
        }
        let scale = TAU / sum;
        let widths: Vec<f64> = widths.iter().map(|w| w * scale).collect();
        let base = wrap(base);
        let mut lefts = Vec::with_capacity(widths.len());
        let mut x = base;
        for &w in &widths {
            lefts.push(x);
            x += w;
        }
        Ok(Self { lefts, widths })
    }

    /// Measure from explicit cell boundaries; the layout used by measures
    /// whose support has gaps.
    pub fn with_boundaries(lefts: Vec<f64>, widths: Vec<f64>) -> Result<Self> {
        if lefts.len() != widths.len() || lefts.is_empty() {
            return Err(MeasureError::CellCountTooSmall { n: lefts.len() });
        }
        for (i, (&l, &w)) in lefts.iter().zip(&widths).enumerate() {
            if !l.is_finite() || !w.is_finite() {
                return Err(MeasureError::NonFinite { what: "cell boundary" });
            }
            if w <= 0.0 {
                return Err(MeasureError::NonPositiveSpacing { index: i });
            }
        }
        for i in 0..lefts.len() - 1 {
            if lefts[i] + widths[i] > lefts[i + 1] + GEOM_TOL {
                return Err(MeasureError::CellOverlap { index: i });
            }
        }
        let n = lefts.len();
        let span = lefts[n - 1] + widths[n - 1] - lefts[0];
        if span > TAU + GEOM_TOL {
            return Err(MeasureError::SpanExceedsCircle { span });
        }
        // Anchor the lift so its first endpoint sits in the fundamental domain.
        let shift = wrap(lefts[0]) - lefts[0];
        let lefts = lefts.iter().map(|l| l + shift).collect();
        Ok(Self { lefts, widths })
    }

    /// The rotation-invariant measure: constant density `1/2π`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(MeasureError::CellCountTooSmall { n });
        }
        Self::contiguous(-PI, vec![TAU / n as f64; n])
    }

    /// Level-`n` Cantor construction on `[-π, π]`: `2^n` cells of width
    /// `2π·3^{-n}`, masses `2^{-n}`, located on the surviving ternary
    /// intervals.  The support has gaps, so explicit boundaries are stored.
    pub fn cantor(level: u32) -> Result<Self> {
        if !(1..=12).contains(&level) {
            return Err(MeasureError::CantorLevelOutOfRange { level });
        }
        let n = 1usize << level;
        let width = TAU * 3f64.powi(-(level as i32));
        let mut lefts = Vec::with_capacity(n);
        for idx in 0..n {
            // Ternary digits: bit b of idx selects digit 0 or 2 at depth b+1.
            let mut t = 0.0;
            let mut scale = 1.0 / 3.0;
            for b in 0..level {
                if idx >> (level - 1 - b) & 1 == 1 {
                    t += 2.0 * scale;
                }
                scale /= 3.0;
            }
            lefts.push(-PI + TAU * t);
        }
        Self::with_boundaries(lefts, vec![width; n])
    }

    /// Equal-width cells centered on the atoms of an equal-weight atomic
    /// measure; fails if the mollifier width exceeds the smallest gap.
    pub fn from_atoms(atoms: &AtomMeasure, width: f64) -> Result<Self> {
        if !atoms.is_equal_weight() {
            return Err(MeasureError::WeightSum { sum: f64::NAN });
        }
        let p = atoms.positions();
        let n = p.len();
        for i in 0..n {
            let gap = if i + 1 < n { p[i + 1] - p[i] } else { p[0] + TAU - p[n - 1] };
            if gap < width {
                return Err(MeasureError::MollifierTooWide { width, gap });
            }
        }
        let cells: Vec<(f64, f64)> = p.iter().map(|&x| (x - width / 2.0, width)).collect();
        Self::from_cells(cells)
    }

    /// Canonical measure from unordered (left, width) pairs on the circle.
    fn from_cells(cells: Vec<(f64, f64)>) -> Result<Self> {
        let mut cells: Vec<(f64, f64)> = cells.into_iter().map(|(l, w)| (wrap(l), w)).collect();
        cells.sort_by(|a, b| a.0.total_cmp(&b.0));
        let lefts: Vec<f64> = cells.iter().map(|c| c.0).collect();
        let widths: Vec<f64> = cells.iter().map(|c| c.1).collect();
        // Wrap-around overlap shows up as the final cell reaching past
        // lefts[0] + 2π; with_boundaries rejects it via the span check.
        Self::with_boundaries(lefts, widths)
    }

    /// Invert the CDF of a grid density at levels `i/N`; cell `i` spans
    /// quantile levels `[i/N, (i+1)/N)`.  On zero-density plateaus the level
    /// set is an interval and its midpoint is taken.
    pub fn from_density(g: &GridDensity, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(MeasureError::CellCountTooSmall { n });
        }
        let m = g.len();
        let dx = TAU / m as f64;
        // Node-centered bins: node j owns [node_j - dx/2, node_j + dx/2).
        let start = -PI - dx / 2.0;
        let mut cdf = Vec::with_capacity(m + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for &v in g.values() {
            acc += v * dx;
            cdf.push(acc);
        }
        let total = cdf[m];
        if total <= 0.0 {
            return Err(MeasureError::NotNormalized { mass: total });
        }
        let invert = |level: f64| -> f64 {
            if level >= total {
                return start + TAU;
            }
            if level <= 0.0 {
                // The level-0 set wraps through the cut: any leading run of
                // empty bins joins the trailing one.  Take its circular
                // midpoint so the empty arc is split symmetrically.
                let mut lead = 0;
                while cdf[lead + 1] == 0.0 {
                    lead += 1;
                }
                let mut trail = m;
                while trail > 0 && cdf[trail - 1] == total {
                    trail -= 1;
                }
                return start + dx * (lead as f64 + trail as f64 - m as f64) / 2.0;
            }
            let mut k = match cdf.binary_search_by(|c| c.total_cmp(&level)) {
                Ok(mut j) => {
                    // Exact hit: the level set may be a plateau [p_j0, p_j].
                    let mut j0 = j;
                    while j0 > 0 && cdf[j0 - 1] == level {
                        j0 -= 1;
                    }
                    while j + 1 <= m && cdf[j + 1] == level {
                        j += 1;
                    }
                    if j0 != j {
                        return start + dx * (j0 as f64 + j as f64) / 2.0;
                    }
                    j
                }
                Err(j) => j - 1,
            };
            while cdf[k + 1] <= level {
                k += 1;
            }
            let v = g.values()[k];
            start + dx * k as f64 + (level - cdf[k]) / v
        };
        let mut q = Vec::with_capacity(n + 1);
        for i in 0..n {
            q.push(invert(total * i as f64 / n as f64));
        }
        q.push(q[0] + TAU);
        let lefts: Vec<f64> = q[..n].to_vec();
        let widths: Vec<f64> = (0..n).map(|i| q[i + 1] - q[i]).collect();
        Self::with_boundaries(lefts, widths)
    }

    /// Deposit each cell's mass uniformly over its arc onto `m` node-centered
    /// bins, then renormalize.
    pub fn to_density(&self, m: usize) -> Result<GridDensity> {
        if !(m >= 2 && m.is_power_of_two()) {
            return Err(MeasureError::GridNotPowerOfTwo { m });
        }
        let dx = TAU / m as f64;
        let mass = 1.0 / self.len() as f64;
        let mut bins = vec![0.0f64; m];
        for (&l, &w) in self.lefts.iter().zip(&self.widths) {
            // Bin coordinate: node j owns [j, j+1) after this map.
            let b0 = (wrap(l) + PI) / dx + 0.5;
            let b1 = b0 + w / dx;
            let per_unit = mass / (w / dx);
            let mut lo = b0;
            while lo < b1 - 1e-15 {
                let cell = lo.floor();
                let hi = (cell + 1.0).min(b1);
                let j = (cell as i64).rem_euclid(m as i64) as usize;
                bins[j] += (hi - lo) * per_unit;
                lo = hi;
            }
        }
        let total: f64 = crate::sum::pairwise(&bins);
        let values: Vec<f64> = bins.iter().map(|&mass_j| mass_j / (total * dx)).collect();
        GridDensity::new(values)
    }

    /// Midpoint atoms: atom `i` at the center of cell `i`, weight `1/N`.
    pub fn atoms(&self) -> AtomMeasure {
        let n = self.len();
        let positions: Vec<f64> =
            self.lefts.iter().zip(&self.widths).map(|(&l, &w)| wrap(l + w / 2.0)).collect();
        AtomMeasure::new(positions, vec![1.0 / n as f64; n])
            .expect("midpoint atoms of a valid cell measure are valid")
    }

    /// Rotate the measure by `delta` and re-anchor the lift canonically.
    pub fn rotate(&self, delta: f64) -> Self {
        let cells: Vec<(f64, f64)> =
            self.lefts.iter().zip(&self.widths).map(|(&l, &w)| (l + delta, w)).collect();
        Self::from_cells(cells).expect("rotation preserves validity")
    }

    /// Quantile lift: monotone, with `X(s+1) = X(s) + 2π`.
    pub fn quantile(&self, s: f64) -> f64 {
        let period = s.floor();
        let t = s - period;
        let n = self.len();
        let scaled = t * n as f64;
        let i = (scaled as usize).min(n - 1);
        self.lefts[i] + (scaled - i as f64) * self.widths[i] + TAU * period
    }

    pub fn len(&self) -> usize {
        self.lefts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lefts.is_empty()
    }

    pub fn base(&self) -> f64 {
        self.lefts[0]
    }

    pub fn lefts(&self) -> &[f64] {
        &self.lefts
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        self.lefts[i] + self.widths[i] / 2.0
    }

    pub fn min_width(&self) -> f64 {
        self.widths.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Supremum of the piecewise-constant density, `1/(N·min width)`.
    pub fn sup_density(&self) -> f64 {
        1.0 / (self.len() as f64 * self.min_width())
    }

    /// True when the cells tile the whole circle with no gaps.
    pub fn is_contiguous(&self) -> bool {
        let n = self.len();
        for i in 0..n - 1 {
            if self.lefts[i + 1] - (self.lefts[i] + self.widths[i]) > GEOM_TOL {
                return false;
            }
        }
        let span = self.lefts[n - 1] + self.widths[n - 1] - self.lefts[0];
        (span - TAU).abs() <= GEOM_TOL
    }

    /// Total spacing; `2π` for contiguous measures, less when gapped.
    pub fn support_length(&self) -> f64 {
        crate::sum::pairwise(&self.widths)
    }
}

// ---------------------------------------------------------------------------
// AtomMeasure
// ---------------------------------------------------------------------------

/// Finitely many weighted atoms, canonically wrapped, sorted, and with
/// coincident positions merged.
#[derive(Debug, Clone)]
pub struct AtomMeasure {
    positions: Vec<f64>,
    weights: Vec<f64>,
}

impl AtomMeasure {
    pub fn new(positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if positions.len() != weights.len() || positions.is_empty() {
            return Err(MeasureError::CellCountTooSmall { n: positions.len() });
        }
        let mut sum = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(MeasureError::NonFinite { what: "weight" });
            }
            if w < 0.0 {
                return Err(MeasureError::NegativeWeight { index: i });
            }
            sum += w;
        }
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(MeasureError::WeightSum { sum });
        }
        let mut pairs: Vec<(f64, f64)> =
            positions.iter().zip(&weights).map(|(&p, &w)| (wrap(p), w)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut positions = Vec::with_capacity(pairs.len());
        let mut weights = Vec::with_capacity(pairs.len());
        for (p, w) in pairs {
            if positions.last() == Some(&p) {
                *weights.last_mut().unwrap() += w;
            } else {
                positions.push(p);
                weights.push(w);
            }
        }
        Ok(Self { positions, weights })
    }

    /// Equal-weight atoms at the given positions.
    pub fn equal_weights(positions: Vec<f64>) -> Result<Self> {
        let n = positions.len();
        Self::new(positions, vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_equal_weight(&self) -> bool {
        let n = self.len() as f64;
        self.weights.iter().all(|&w| (w - 1.0 / n).abs() <= MASS_TOL)
    }
}

// ---------------------------------------------------------------------------
// GridDensity
// ---------------------------------------------------------------------------

/// Density samples at the uniform nodes `x_j = -π + 2πj/M` with `M` a power
/// of two; nonnegative and normalized under the rectangle rule.
#[derive(Debug, Clone)]
pub struct GridDensity {
    values: Vec<f64>,
}

impl GridDensity {
    /// Strict constructor: nonnegative values whose rectangle quadrature is
    /// already `1` to within `1e-10`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let m = values.len();
        if !(m >= 2 && m.is_power_of_two()) {
            return Err(MeasureError::GridNotPowerOfTwo { m });
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(MeasureError::NonFinite { what: "density" });
            }
            if v < 0.0 {
                return Err(MeasureError::NegativeDensity { index: i, value: v });
            }
        }
        let mass = crate::sum::pairwise(&values) * TAU / m as f64;
        if (mass - 1.0).abs() > 1e-10 {
            return Err(MeasureError::NotNormalized { mass });
        }
        Ok(Self { values })
    }

    /// Tolerant constructor for sampled data: clips tiny negatives and
    /// renormalizes.  Intended for solver output and user-supplied samples.
    pub fn from_samples(values: Vec<f64>) -> Result<Self> {
        let m = values.len();
        if !(m >= 2 && m.is_power_of_two()) {
            return Err(MeasureError::GridNotPowerOfTwo { m });
        }
        let mut values = values;
        for (i, v) in values.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(MeasureError::NonFinite { what: "density" });
            }
            if *v < -1e-8 {
                return Err(MeasureError::NegativeDensity { index: i, value: *v });
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let mass = crate::sum::pairwise(&values) * TAU / m as f64;
        if mass <= 0.0 {
            return Err(MeasureError::NotNormalized { mass });
        }
        for v in values.iter_mut() {
            *v /= mass;
        }
        Ok(Self { values })
    }

    /// Sample `f` at the grid nodes and normalize.
    pub fn from_fn(m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(m >= 2 && m.is_power_of_two()) {
            return Err(MeasureError::GridNotPowerOfTwo { m });
        }
        let values: Vec<f64> = (0..m).map(|j| f(node(j, m))).collect();
        Self::from_samples(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node(&self, j: usize) -> f64 {
        node(j, self.values.len())
    }

    /// Rectangle-rule mass (equals the trapezoid value on a periodic grid).
    pub fn mass(&self) -> f64 {
        crate::sum::pairwise(&self.values) * TAU / self.values.len() as f64
    }
}

/// Grid node `x_j = -π + 2πj/M`.
pub fn node(j: usize, m: usize) -> f64 {
    -PI + TAU * j as f64 / m as f64
}

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

/// Canonical initial-data families.  Loading a measure from a snapshot file
/// is handled by the IO layer of the companion crate.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// Constant density `1/2π`.
    Uniform,
    /// Density `1/2π + a1·cos(x)`; requires `|a1| < 1/2π`.
    Cosine { a1: f64 },
    /// An ε-mollified atom at the origin: all mass on an arc of length `eps`.
    Dirac { eps: f64 },
    /// Level-`n` Cantor construction.
    Cantor { level: u32 },
}

impl InitialData {
    /// Grid resolution used when a family is realized through CDF inversion.
    const INVERSION_GRID: usize = 4096;

    pub fn build(&self, n: usize) -> Result<CellMeasure> {
        match *self {
            Self::Uniform => CellMeasure::uniform(n),
            Self::Cosine { a1 } => {
                if !a1.is_finite() || a1.abs() >= 1.0 / TAU {
                    return Err(MeasureError::CosineAmplitudeTooLarge { a1 });
                }
                let m = Self::INVERSION_GRID.max((4 * n).next_power_of_two());
                let g = GridDensity::from_fn(m, |x| 1.0 / TAU + a1 * x.cos())?;
                CellMeasure::from_density(&g, n)
            }
            Self::Dirac { eps } => {
                if !(eps.is_finite() && eps > 0.0 && eps < TAU) {
                    return Err(MeasureError::NonFinite { what: "dirac width" });
                }
                if n < 2 {
                    return Err(MeasureError::CellCountTooSmall { n });
                }
                let w = eps / n as f64;
                let lefts: Vec<f64> = (0..n).map(|i| -eps / 2.0 + i as f64 * w).collect();
                CellMeasure::with_boundaries(lefts, vec![w; n])
            }
            Self::Cantor { level } => CellMeasure::cantor(level),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn wrap_basics() {
        assert_close(wrap(3.0 * PI / 2.0), -PI / 2.0, 1e-15);
        assert_close(wrap(-PI), -PI, 0.0);
        assert_close(wrap(PI), -PI, 0.0);
        assert_close(wrap(0.0), 0.0, 0.0);
        for k in -5i32..=5 {
            let x = 0.7;
            assert_close(wrap(x + TAU * k as f64), x, 1e-12);
        }
    }

    #[test]
    fn point_dist_examples() {
        assert_close(point_dist(0.0, PI), PI, 0.0);
        assert_close(point_dist(-3.0, 3.0), TAU - 6.0, 1e-15);
        assert_close(point_dist(0.1, 0.4), 0.3, 1e-15);
        // symmetry and range
        for &(x, y) in &[(0.3, -2.9), (1.0, 1.0), (-PI, PI - 1e-3)] {
            assert_close(point_dist(x, y), point_dist(y, x), 1e-15);
            assert!(point_dist(x, y) <= PI);
        }
    }

    #[test]
    fn antipodal_tie_break() {
        assert_close(signed_displacement(0.0, PI), PI, 0.0);
        assert_close(signed_displacement(PI / 2.0, -PI / 2.0), PI, 0.0);
    }

    #[test]
    fn uniform_layout() {
        let m = CellMeasure::uniform(4).unwrap();
        assert_eq!(m.widths(), &[PI / 2.0; 4]);
        assert_close(m.base(), -PI, 0.0);
        assert!(m.is_contiguous());
        assert!(CellMeasure::uniform(1).is_err());
    }

    #[test]
    fn uniform_atoms() {
        let a = CellMeasure::uniform(2).unwrap().atoms();
        assert_close(a.positions()[0], -PI / 2.0, 1e-15);
        assert_close(a.positions()[1], PI / 2.0, 1e-15);
        let a4 = CellMeasure::uniform(4).unwrap().atoms();
        let expect = [-3.0 * PI / 4.0, -PI / 4.0, PI / 4.0, 3.0 * PI / 4.0];
        for (p, e) in a4.positions().iter().zip(&expect) {
            assert_close(*p, *e, 1e-15);
        }
        let total: f64 = a4.weights().iter().sum();
        assert_close(total, 1.0, 1e-15);
    }

    #[test]
    fn quantile_is_monotone_lift() {
        let m = CellMeasure::contiguous(0.3, vec![1.0, 2.0, 0.5, 3.0]).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=400 {
            let s = -1.0 + 3.0 * i as f64 / 400.0;
            let q = m.quantile(s);
            assert!(q >= prev - 1e-12);
            prev = q;
        }
        assert_close(m.quantile(1.25) - m.quantile(0.25), TAU, 1e-12);
    }

    #[test]
    fn cantor_first_levels() {
        let c1 = CellMeasure::cantor(1).unwrap();
        assert_eq!(c1.len(), 2);
        assert_close(c1.lefts()[0], -PI, 1e-15);
        assert_close(c1.lefts()[1], PI / 3.0, 1e-12);
        assert_close(c1.widths()[0], TAU / 3.0, 1e-12);

        let c2 = CellMeasure::cantor(2).unwrap();
        assert_eq!(c2.len(), 4);
        for &w in c2.widths() {
            assert_close(w, TAU / 9.0, 1e-12);
        }
        assert!(!c2.is_contiguous());
        assert!(CellMeasure::cantor(0).is_err());
        assert!(CellMeasure::cantor(13).is_err());
    }

    #[test]
    fn density_round_trip_uniform() {
        let g = GridDensity::from_fn(64, |_| 1.0 / TAU).unwrap();
        let m = CellMeasure::from_density(&g, 8).unwrap();
        for &w in m.widths() {
            assert_close(w, TAU / 8.0, 1e-12);
        }
        let back = CellMeasure::uniform(8).unwrap().to_density(64).unwrap();
        for &v in back.values() {
            assert_close(v, 1.0 / TAU, 1e-12);
        }
    }

    #[test]
    fn cosine_inversion_matches_analytic_cdf() {
        // density (1 + cos x)/2π has CDF F(x) = (x + π + sin x)/2π
        let g = GridDensity::from_fn(4096, |x| (1.0 + x.cos()) / TAU).unwrap();
        let n = 64;
        let m = CellMeasure::from_density(&g, n).unwrap();
        for (i, &l) in m.lefts().iter().enumerate() {
            let level = i as f64 / n as f64;
            // invert analytically by bisection
            let (mut lo, mut hi) = (-PI, PI);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if (mid + PI + mid.sin()) / TAU < level {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert_close(l, 0.5 * (lo + hi), 2e-4);
        }
        // widths narrowest where density peaks (x = 0)
        let (narrow_idx, _) = m
            .widths()
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert!(point_dist(m.midpoint(narrow_idx), 0.0) < 0.2);
    }

    #[test]
    fn zero_plateau_tie_break() {
        // density 1/π on the middle half circle, zero elsewhere: level 0 sits
        // on a plateau that wraps through the cut, and its circular midpoint
        // is the antipode of the support center.
        let m_grid = 256;
        let g = GridDensity::from_fn(m_grid, |x| if x.abs() < PI / 2.0 { 1.0 / PI } else { 0.0 })
            .unwrap();
        let m = CellMeasure::from_density(&g, 8).unwrap();
        let slack = TAU / m_grid as f64;
        assert!(point_dist(m.lefts()[0], -PI) <= slack);
        // interior boundaries stay inside the support
        for &l in &m.lefts()[1..] {
            assert!(l >= -PI / 2.0 - slack && l <= PI / 2.0 + slack, "boundary {l}");
        }
    }

    #[test]
    fn dirac_family_is_clustered() {
        let m = InitialData::Dirac { eps: 1e-3 }.build(64).unwrap();
        assert_eq!(m.len(), 64);
        assert_close(m.support_length(), 1e-3, 1e-15);
        assert!(m.lefts()[0] >= -5.1e-4);
        let last = m.lefts()[63] + m.widths()[63];
        assert!(last <= 5.1e-4);
    }

    #[test]
    fn cosine_family_density_value() {
        let m = InitialData::Cosine { a1: 0.1 }.build(256).unwrap();
        // density at x=0 should be 1/2π + 0.1; the cell containing 0 has
        // implied density 1/(N·h).  Membership is tested on the circle since
        // the lift may start anywhere in [-π, π).
        let idx = (0..m.len())
            .find(|&i| (0.0 - m.lefts()[i]).rem_euclid(TAU) < m.widths()[i])
            .unwrap();
        let implied = 1.0 / (m.len() as f64 * m.widths()[idx]);
        assert_close(implied, 1.0 / TAU + 0.1, 2e-3);
        assert!(InitialData::Cosine { a1: 0.2 }.build(8).is_err());
    }

    #[test]
    fn cosine_zero_is_uniform() {
        let m = InitialData::Cosine { a1: 0.0 }.build(16).unwrap();
        for &w in m.widths() {
            assert_close(w, TAU / 16.0, 1e-9);
        }
    }

    #[test]
    fn rotation_reanchors() {
        let m = CellMeasure::uniform(4).unwrap();
        let r = m.rotate(PI);
        assert!(r.base() >= -PI && r.base() < PI);
        for &w in r.widths() {
            assert_close(w, PI / 2.0, 1e-12);
        }
        let r2 = CellMeasure::contiguous(-1.0, vec![1.0, 2.0, 3.0]).unwrap().rotate(0.37);
        assert!(r2.is_contiguous());
    }

    #[test]
    fn atom_canonicalization_merges_ties() {
        let a = AtomMeasure::new(vec![0.5, 0.5 - TAU, 1.0], vec![0.25, 0.25, 0.5]).unwrap();
        assert_eq!(a.len(), 2);
        assert_close(a.weights()[0], 0.5, 1e-15);
        assert!(AtomMeasure::new(vec![0.0], vec![0.5]).is_err());
        assert!(AtomMeasure::new(vec![0.0, 1.0], vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn grid_density_validation() {
        assert!(GridDensity::new(vec![1.0 / TAU; 48]).is_err()); // not a power of two
        assert!(GridDensity::new(vec![1.0; 16]).is_err()); // not normalized
        assert!(GridDensity::from_samples(vec![-1.0; 16]).is_err());
        let g = GridDensity::from_samples(vec![2.0; 16]).unwrap();
        assert_close(g.mass(), 1.0, 1e-14);
    }

    #[test]
    fn overlap_rejected() {
        let err = CellMeasure::with_boundaries(vec![0.0, 0.5], vec![1.0, 1.0]).unwrap_err();
        assert_eq!(err, MeasureError::CellOverlap { index: 0 });
        let err =
            CellMeasure::with_boundaries(vec![0.0, 4.0], vec![1.0, 3.0]).unwrap_err();
        assert!(matches!(err, MeasureError::SpanExceedsCircle { .. }));
    }
}
