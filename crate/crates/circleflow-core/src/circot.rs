//! Periodic 2-Wasserstein distances, optimal plans, and geodesics.
//!
//! Two routes to the same distance, checked against each other:
//!
//! * **Atomic route** ([`dper2`]): for two systems of `N` equal-weight atoms
//!   the optimal coupling is non-crossing, and non-crossing bijections of
//!   cyclically ordered points are exactly the `N` cyclic shifts, so the
//!   distance is the best of `N` candidate matchings with per-pair geodesic
//!   cost.  [`dper2_oracle`] solves the full assignment problem instead and
//!   guards the reduction.
//!
//! * **Quantile route** ([`dper2_quantile`]): any pair of measures is
//!   compared through monotone quantile lifts `X`, `Y` with
//!   `X(s+1) = X(s) + 2π`.  The squared distance is
//!
//!   ```text
//!   min_θ ∫₀¹ |X(s) − Y(s+θ)|² ds,
//!   ```
//!
//!   and the objective is convex in the cut shift `θ`, so a bracketing
//!   golden-section pass plus bisection on the (exactly integrated)
//!   derivative pins the minimum.  The integrand is piecewise quadratic on
//!   the merged cell breakpoints and is integrated in closed form.
//!
//! Constant-speed geodesics move each matched pair along its shortest arc;
//! generalized geodesics interpolate two lifted optimal maps over a common
//! base measure.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;

use crate::measure::{point_dist, signed_displacement, wrap, AtomMeasure, CellMeasure};
use crate::TAU;

#[derive(Debug, Clone, PartialEq)]
pub enum TransportError {
    SizeMismatch { a: usize, b: usize },
    UnequalWeights,
    ParameterOutOfRange { t: f64 },
}

impl fmt::Display for TransportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SizeMismatch { a, b } => write!(f, "atom counts differ: {a} vs {b}"),
            Self::UnequalWeights => write!(f, "atoms must carry equal weights 1/N"),
            Self::ParameterOutOfRange { t } => write!(f, "interpolation parameter {t} outside [0, 1]"),
        }
    }
}

impl core::error::Error for TransportError {}

pub type Result<T> = core::result::Result<T, TransportError>;

// ---------------------------------------------------------------------------
// Atomic optimal transport
// ---------------------------------------------------------------------------

/// Optimal matching between two equal-size, equal-weight atom systems.
///
/// Pair `i` couples source atom `x_i` with target atom `y_{(i+k*) mod N}`
/// through the lift `ỹ_i` nearest to `x_i`; displacements are `x_i − ỹ_i`
/// and never exceed `π` in magnitude.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    shift: usize,
    lifted_targets: Vec<f64>,
    displacements: Vec<f64>,
    cost: f64,
}

impl TransportPlan {
    pub fn len(&self) -> usize {
        self.displacements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.displacements.is_empty()
    }

    /// The optimal cyclic shift `k*`.
    pub fn shift(&self) -> usize {
        self.shift
    }

    /// Real lifts `ỹ_i` of the matched targets.
    pub fn lifted_targets(&self) -> &[f64] {
        &self.lifted_targets
    }

    /// Signed displacements `x_i − ỹ_i`.
    pub fn displacements(&self) -> &[f64] {
        &self.displacements
    }

    /// Total squared cost `(1/N)·Σ displacementsᵢ²`.
    pub fn cost(&self) -> f64 {
        self.cost
    }
}

fn require_matched(a: &AtomMeasure, b: &AtomMeasure) -> Result<usize> {
    if a.len() != b.len() {
        return Err(TransportError::SizeMismatch { a: a.len(), b: b.len() });
    }
    if !a.is_equal_weight() || !b.is_equal_weight() {
        return Err(TransportError::UnequalWeights);
    }
    Ok(a.len())
}

/// Squared periodic 2-Wasserstein distance between equal-weight atom systems,
/// together with the optimal plan.
///
/// Scans the `N` cyclic-shift matchings of the cyclically ordered atoms and
/// keeps the cheapest; per-pair cost is the squared geodesic distance.
pub fn dper2(a: &AtomMeasure, b: &AtomMeasure) -> Result<(f64, TransportPlan)> {
    let n = require_matched(a, b)?;
    let xs = a.positions();
    let ys = b.positions();
    let inv_n = 1.0 / n as f64;

    let mut best = (f64::INFINITY, 0usize);
    let mut pair_costs = vec![0.0f64; n];
    for k in 0..n {
        for (i, c) in pair_costs.iter_mut().enumerate() {
            let d = point_dist(xs[i], ys[(i + k) % n]);
            *c = d * d;
        }
        let cost = crate::sum::pairwise(&pair_costs) * inv_n;
        if cost < best.0 {
            best = (cost, k);
        }
    }

    let k = best.1;
    let mut lifted = Vec::with_capacity(n);
    let mut disp = Vec::with_capacity(n);
    for i in 0..n {
        let d = signed_displacement(xs[i], ys[(i + k) % n]);
        disp.push(d);
        lifted.push(xs[i] - d);
    }
    let sq: Vec<f64> = disp.iter().map(|d| d * d).collect();
    let cost = crate::sum::pairwise(&sq) * inv_n;
    Ok((cost, TransportPlan { shift: k, lifted_targets: lifted, displacements: disp, cost }))
}

/// Independent Kantorovich oracle: exact optimum over *all* permutation
/// couplings of the cost matrix `C_ij = d_per²(x_i, y_j)`.
///
/// Exhaustive enumeration up to `N = 10`; a shortest-augmenting-path
/// assignment solver beyond that.
pub fn dper2_oracle(a: &AtomMeasure, b: &AtomMeasure) -> Result<f64> {
    let n = require_matched(a, b)?;
    let xs = a.positions();
    let ys = b.positions();
    let cost: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| {
            ys.iter()
                .map(|&y| {
                    let d = point_dist(x, y);
                    d * d
                })
                .collect()
        })
        .collect();
    let total = if n <= 10 { exhaustive_assignment(&cost) } else { hungarian(&cost) };
    Ok(total / n as f64)
}

/// Branch-and-bound enumeration of all row-to-column bijections.
fn exhaustive_assignment(cost: &[Vec<f64>]) -> f64 {
    fn recurse(cost: &[Vec<f64>], row: usize, taken: &mut [bool], partial: f64, best: &mut f64) {
        if partial >= *best {
            return;
        }
        if row == cost.len() {
            *best = partial;
            return;
        }
        for col in 0..cost.len() {
            if !taken[col] {
                taken[col] = true;
                recurse(cost, row + 1, taken, partial + cost[row][col], best);
                taken[col] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut taken = vec![false; cost.len()];
    recurse(cost, 0, &mut taken, 0.0, &mut best);
    best
}

/// O(n³) assignment solver (potentials + shortest augmenting paths).
fn hungarian(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched_row = vec![n; n + 1]; // per column; n = unmatched
    for row in 0..n {
        matched_row[n] = row;
        let mut j0 = n;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut prev_col = vec![n; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = n;
            for j in 0..n {
                if !used[j] {
                    let slack = cost[i0][j] - u[i0] - v[j];
                    if slack < min_slack[j] {
                        min_slack[j] = slack;
                        prev_col[j] = j0;
                    }
                    if min_slack[j] < delta {
                        delta = min_slack[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == n {
                break;
            }
        }
        // augment along the alternating path
        while j0 != n {
            let j1 = prev_col[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
        }
    }
    let mut total = 0.0;
    for j in 0..n {
        total += cost[matched_row[j]][j];
    }
    total
}

// ---------------------------------------------------------------------------
// Quantile-lift distance
// ---------------------------------------------------------------------------

/// Exactly integrated pieces of `∫ (X(s) − Y(s+θ))² ds` together with the
/// per-cell moments the JKO objective differentiates through.
#[derive(Debug, Clone)]
pub(crate) struct QuantileTransport {
    pub theta: f64,
    pub cost: f64,
    /// `∫_{cell i} D(s) ds` with `D = X − Y_θ`, indexed by cells of `X`.
    pub cell_mean: Vec<f64>,
    /// `∫_{cell i} D(s)·(sN − i) ds`, the within-cell moment.
    pub cell_moment: Vec<f64>,
    /// `sup_s |D(s)|` under the optimal shift.
    pub sup_displacement: f64,
}

struct Sweep {
    g: f64,
    gprime: f64,
    cell_mean: Vec<f64>,
    cell_moment: Vec<f64>,
    sup: f64,
}

/// Integrate over the merged breakpoints of `X` and the shifted `Y`.
///
/// The derivative in `θ` has two parts: the smooth `−2∫D·Y′` and, when the
/// quantile of `Y` jumps (gapped support), a boundary term `D₊² − D₋²` at
/// every Y-breakpoint, because those discontinuities travel with speed
/// `ds/dθ = −1` across the integration domain.
fn sweep(x: &CellMeasure, y: &CellMeasure, theta: f64, moments: bool) -> Sweep {
    let nx = x.len();
    let ny = y.len();
    // (position, came from Y) — Y-breakpoints move with θ
    let mut breaks: Vec<(f64, bool)> = Vec::with_capacity(nx + ny + 4);
    for i in 0..=nx {
        breaks.push((i as f64 / nx as f64, false));
    }
    let j_lo = ((theta) * ny as f64).ceil() as i64;
    let j_hi = ((1.0 + theta) * ny as f64).floor() as i64;
    for j in j_lo..=j_hi {
        let s = j as f64 / ny as f64 - theta;
        if s > 0.0 && s < 1.0 {
            breaks.push((s, true));
        }
    }
    breaks.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, bool)> = Vec::with_capacity(breaks.len());
    for (s, from_y) in breaks {
        match merged.last_mut() {
            Some(last) if s - last.0 <= 1e-15 => last.1 |= from_y,
            _ => merged.push((s, from_y)),
        }
    }

    let (xl, xw) = (x.lefts(), x.widths());
    let (yl, yw) = (y.lefts(), y.widths());

    let mut g = 0.0;
    let mut gprime = 0.0;
    let mut sup = 0.0f64;
    let mut cell_mean = if moments { vec![0.0; nx] } else { Vec::new() };
    let mut cell_moment = if moments { vec![0.0; nx] } else { Vec::new() };
    let mut prev_d1: Option<f64> = None;

    for w in merged.windows(2) {
        let (s0, y_break_at_s0) = w[0];
        let s1 = w[1].0;
        let len = s1 - s0;
        let mid = 0.5 * (s0 + s1);

        let i = ((mid * nx as f64) as usize).min(nx - 1);
        let xv = xl[i] + (mid * nx as f64 - i as f64) * xw[i];
        let slope_x = nx as f64 * xw[i];

        let u = mid + theta;
        let jj = (u * ny as f64).floor() as i64;
        let cell = jj.rem_euclid(ny as i64) as usize;
        let per = jj.div_euclid(ny as i64) as f64;
        let yv = yl[cell] + TAU * per + (u * ny as f64 - jj as f64) * yw[cell];
        let slope_y = ny as f64 * yw[cell];

        let dm = xv - yv;
        let slope_d = slope_x - slope_y;
        let d0 = dm - slope_d * (mid - s0);
        let d1 = dm + slope_d * (s1 - mid);

        g += len * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
        gprime += -2.0 * slope_y * len * 0.5 * (d0 + d1);
        if let Some(before) = prev_d1 {
            if y_break_at_s0 {
                gprime += d0 * d0 - before * before;
            }
        }
        prev_d1 = Some(d1);
        sup = sup.max(d0.abs()).max(d1.abs());

        if moments {
            cell_mean[i] += len * 0.5 * (d0 + d1);
            let a0 = s0 * nx as f64 - i as f64;
            let a1 = s1 * nx as f64 - i as f64;
            let am = mid * nx as f64 - i as f64;
            cell_moment[i] += len / 6.0 * (d0 * a0 + 4.0 * dm * am + d1 * a1);
        }
    }

    Sweep { g, gprime, cell_mean, cell_moment, sup }
}

/// Locate the minimizing cut shift of the convex objective.  A `hint`
/// seeds a narrow bracket around a previously optimal shift; the bracket is
/// validated against the derivative sign and widened if stale.
fn minimize_theta(x: &CellMeasure, y: &CellMeasure, hint: Option<f64>) -> f64 {
    let gp = |t: f64| sweep(x, y, t, false).gprime;

    if let Some(h) = hint {
        let mut half = (1.5 / x.len() as f64).max(1e-3);
        for _ in 0..8 {
            let (lo, hi) = (h - half, h + half);
            if gp(lo) <= 0.0 && gp(hi) >= 0.0 {
                return bisect_gprime(&gp, lo, hi);
            }
            half *= 4.0;
        }
    }

    // Bracket a sign change of the nondecreasing derivative.
    let mut lo = -1.0;
    let mut hi = 1.0;
    let mut step = 1.0;
    while gp(lo) > 0.0 && lo > -70.0 {
        lo -= step;
        step *= 2.0;
    }
    step = 1.0;
    while gp(hi) < 0.0 && hi < 70.0 {
        hi += step;
        step *= 2.0;
    }

    // Golden-section pass on values to tighten the bracket cheaply.
    let gv = |t: f64| sweep(x, y, t, false).g;
    let phi = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (gv(c), gv(d));
    for _ in 0..48 {
        if b - a < 1e-8 {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = gv(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = gv(d);
        }
    }

    // Bisection on the derivative pins θ*.  The golden bracket may have
    // collapsed onto a kink from one side; fall back to the outer bracket
    // on the side the derivative sign points to.
    let (ga, gb) = (gp(a), gp(b));
    if ga > 0.0 {
        bisect_gprime(&gp, lo, a)
    } else if gb < 0.0 {
        bisect_gprime(&gp, b, hi)
    } else {
        bisect_gprime(&gp, a, b)
    }
}

fn bisect_gprime(gp: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..100 {
        if hi - lo < 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if gp(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub(crate) fn quantile_transport(
    x: &CellMeasure,
    y: &CellMeasure,
    hint: Option<f64>,
) -> QuantileTransport {
    let theta = minimize_theta(x, y, hint);
    let s = sweep(x, y, theta, true);
    QuantileTransport {
        theta,
        cost: s.g.max(0.0),
        cell_mean: s.cell_mean,
        cell_moment: s.cell_moment,
        sup_displacement: s.sup,
    }
}

/// Squared periodic 2-Wasserstein distance through quantile lifts; works for
/// any pair of cell measures, including different cell counts and gapped
/// supports.
pub fn dper2_quantile(m: &CellMeasure, r: &CellMeasure) -> f64 {
    let theta = minimize_theta(m, r, None);
    sweep(m, r, theta, false).g.max(0.0)
}

// ---------------------------------------------------------------------------
// Geodesics
// ---------------------------------------------------------------------------

/// Point on the constant-speed geodesic from `m0` to `m1` at time `t`: each
/// matched pair moves along its shortest arc, antipodal ties already broken
/// inside the plan.
pub fn geodesic(m0: &AtomMeasure, m1: &AtomMeasure, t: f64) -> Result<AtomMeasure> {
    if !(0.0..=1.0).contains(&t) {
        return Err(TransportError::ParameterOutOfRange { t });
    }
    let (_, plan) = dper2(m0, m1)?;
    let positions: Vec<f64> = m0
        .positions()
        .iter()
        .zip(plan.displacements())
        .map(|(&x, &d)| wrap(x - t * d))
        .collect();
    Ok(AtomMeasure::equal_weights(positions).expect("geodesic atoms are valid"))
}

/// Generalized geodesic with base `w`: pushforward of `w` under the convex
/// combination of the lifted optimal maps onto `m0` and `m1`.  Also returns
/// the squared plan distance `d_γ² = (1/N)·Σ |t̃₀(x_i) − t̃₁(x_i)|²`, which
/// dominates `d_per²(m0, m1)`.
pub fn generalized_geodesic(
    w: &AtomMeasure,
    m0: &AtomMeasure,
    m1: &AtomMeasure,
    t: f64,
) -> Result<(AtomMeasure, f64)> {
    if !(0.0..=1.0).contains(&t) {
        return Err(TransportError::ParameterOutOfRange { t });
    }
    let (_, p0) = dper2(w, m0)?;
    let (_, p1) = dper2(w, m1)?;
    let n = w.len();
    let positions: Vec<f64> = (0..n)
        .map(|i| wrap((1.0 - t) * p0.lifted_targets()[i] + t * p1.lifted_targets()[i]))
        .collect();
    let gaps: Vec<f64> = (0..n)
        .map(|i| {
            let g = p0.lifted_targets()[i] - p1.lifted_targets()[i];
            g * g
        })
        .collect();
    let dgamma2 = crate::sum::pairwise(&gaps) / n as f64;
    let curve = AtomMeasure::equal_weights(positions).expect("interpolated atoms are valid");
    Ok((curve, dgamma2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::InitialData;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PI: f64 = core::f64::consts::PI;

    fn random_atoms(rng: &mut ChaCha8Rng, n: usize) -> AtomMeasure {
        loop {
            let pos: Vec<f64> = (0..n).map(|_| rng.gen_range(-PI..PI)).collect();
            if let Ok(a) = AtomMeasure::equal_weights(pos) {
                if a.len() == n {
                    return a;
                }
            }
        }
    }

    fn random_cells(rng: &mut ChaCha8Rng, n: usize) -> CellMeasure {
        let widths: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
        CellMeasure::contiguous(rng.gen_range(-PI..PI), widths).unwrap()
    }

    #[test]
    fn identity_and_antipodes() {
        let a = AtomMeasure::equal_weights(vec![0.3, -1.0, 2.0]).unwrap();
        let (c, _) = dper2(&a, &a).unwrap();
        assert!(c.abs() < 1e-15);

        let p = AtomMeasure::equal_weights(vec![0.0]).unwrap();
        let q = AtomMeasure::equal_weights(vec![PI]).unwrap();
        let (c, plan) = dper2(&p, &q).unwrap();
        assert!((c - PI * PI).abs() < 1e-12);
        assert!((plan.displacements()[0] - PI).abs() < 1e-15); // tie resolved to ŷ < x̂
    }

    #[test]
    fn quarter_turn_pair() {
        let a = AtomMeasure::equal_weights(vec![0.0, PI]).unwrap();
        let b = AtomMeasure::equal_weights(vec![-PI / 2.0, PI / 2.0]).unwrap();
        let (c, _) = dper2(&a, &b).unwrap();
        assert!((c - PI * PI / 4.0).abs() < 1e-12);
        let oracle = dper2_oracle(&a, &b).unwrap();
        assert!((oracle - PI * PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let a = AtomMeasure::equal_weights(vec![0.0, 1.0]).unwrap();
        let b = AtomMeasure::equal_weights(vec![0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(dper2(&a, &b), Err(TransportError::SizeMismatch { .. })));
        let c = AtomMeasure::new(vec![0.0, 1.0], vec![0.3, 0.7]).unwrap();
        assert!(matches!(dper2(&a, &c), Err(TransportError::UnequalWeights)));
    }

    #[test]
    fn cyclic_scan_matches_assignment_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..60 {
            let n = rng.gen_range(2..=8);
            let a = random_atoms(&mut rng, n);
            let b = random_atoms(&mut rng, n);
            let (fast, plan) = dper2(&a, &b).unwrap();
            let slow = dper2_oracle(&a, &b).unwrap();
            assert!(
                (fast - slow).abs() <= 1e-10,
                "trial {trial}: cyclic {fast} vs oracle {slow}"
            );
            assert!(fast <= PI * PI + 1e-12);
            for &d in plan.displacements() {
                assert!(d.abs() <= PI + 1e-12);
            }
        }
    }

    #[test]
    fn hungarian_agrees_with_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let n = rng.gen_range(2..=7);
            let cost: Vec<Vec<f64>> =
                (0..n).map(|_| (0..n).map(|_| rng.gen_range(0.0..5.0)).collect()).collect();
            let h = hungarian(&cost);
            let e = exhaustive_assignment(&cost);
            assert!((h - e).abs() < 1e-12, "hungarian {h} vs exhaustive {e}");
        }
    }

    #[test]
    fn oracle_uses_assignment_solver_above_cutoff() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_atoms(&mut rng, 14);
        let b = random_atoms(&mut rng, 14);
        let (fast, _) = dper2(&a, &b).unwrap();
        let slow = dper2_oracle(&a, &b).unwrap();
        assert!((fast - slow).abs() <= 1e-10);
    }

    #[test]
    fn quantile_zero_on_identical_and_rotated_uniform() {
        let u = CellMeasure::uniform(16).unwrap();
        assert!(dper2_quantile(&u, &u) < 1e-18);
        let r = CellMeasure::contiguous(1.234, vec![TAU / 16.0; 16]).unwrap();
        assert!(dper2_quantile(&u, &r) < 1e-16, "got {}", dper2_quantile(&u, &r));
    }

    #[test]
    fn quantile_matches_atomic_on_equal_width_families() {
        // equal mollifier widths make the quantile integrand piecewise
        // constant at the optimum, so both routes agree to rounding
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = 8;
            let a = random_atoms(&mut rng, n);
            let b = random_atoms(&mut rng, n);
            let eps = 1e-4;
            let (Ok(ma), Ok(mb)) =
                (CellMeasure::from_atoms(&a, eps), CellMeasure::from_atoms(&b, eps))
            else {
                continue;
            };
            let (atomic, _) = dper2(&a, &b).unwrap();
            let quant = dper2_quantile(&ma, &mb);
            assert!(
                (atomic - quant).abs() <= 1e-8,
                "atomic {atomic} vs quantile {quant}"
            );
        }
    }

    #[test]
    fn quantile_point_mass_across_the_cut() {
        // masses near ∓3 are 2π−6 apart through the cut, not 6
        let a = InitialData::Dirac { eps: 1e-6 }.build(4).unwrap().rotate(-3.0);
        let b = InitialData::Dirac { eps: 1e-6 }.build(4).unwrap().rotate(3.0);
        let d = dper2_quantile(&a, &b).sqrt();
        assert!((d - (TAU - 6.0)).abs() < 1e-6, "got {d}");
    }

    #[test]
    fn quantile_symmetry_and_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let m = random_cells(&mut rng, 12);
            let r = random_cells(&mut rng, 20);
            let w = random_cells(&mut rng, 16);
            let ab = dper2_quantile(&m, &r);
            let ba = dper2_quantile(&r, &m);
            assert!((ab - ba).abs() < 1e-10, "symmetry {ab} vs {ba}");
            let (dab, dbw, daw) =
                (ab.sqrt(), dper2_quantile(&r, &w).sqrt(), dper2_quantile(&m, &w).sqrt());
            assert!(daw <= dab + dbw + 1e-10);
        }
    }

    #[test]
    fn geodesic_endpoints_and_midpoint() {
        let m0 = AtomMeasure::equal_weights(vec![0.0]).unwrap();
        let m1 = AtomMeasure::equal_weights(vec![PI / 2.0]).unwrap();
        let g0 = geodesic(&m0, &m1, 0.0).unwrap();
        let g1 = geodesic(&m0, &m1, 1.0).unwrap();
        let gh = geodesic(&m0, &m1, 0.5).unwrap();
        assert!((g0.positions()[0] - 0.0).abs() < 1e-15);
        assert!((g1.positions()[0] - PI / 2.0).abs() < 1e-15);
        assert!((gh.positions()[0] - PI / 4.0).abs() < 1e-15);
        assert!(geodesic(&m0, &m1, 1.5).is_err());
    }

    #[test]
    fn geodesic_constant_speed() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let m0 = random_atoms(&mut rng, 16);
        let m1 = random_atoms(&mut rng, 16);
        let (d2, _) = dper2(&m0, &m1).unwrap();
        let d = d2.sqrt();
        let ts = [0.0, 0.25, 0.5, 0.75, 1.0];
        for &s in &ts {
            for &t in &ts {
                let gs = geodesic(&m0, &m1, s).unwrap();
                let gt = geodesic(&m0, &m1, t).unwrap();
                let (dst2, _) = dper2(&gs, &gt).unwrap();
                assert!(
                    (dst2.sqrt() - (t - s).abs() * d).abs() <= 1e-8,
                    "s={s} t={t}: {} vs {}",
                    dst2.sqrt(),
                    (t - s).abs() * d
                );
            }
        }
    }

    #[test]
    fn generalized_geodesic_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let n = 12;
            let w = random_atoms(&mut rng, n);
            let m0 = random_atoms(&mut rng, n);
            let m1 = random_atoms(&mut rng, n);

            let (g0, _) = generalized_geodesic(&w, &m0, &m1, 0.0).unwrap();
            let (c0, _) = dper2(&g0, &m0).unwrap();
            assert!(c0 < 1e-18, "t=0 endpoint mismatch: {c0}");

            let (_, dgamma2) = generalized_geodesic(&w, &m0, &m1, 0.5).unwrap();
            let (d01, _) = dper2(&m0, &m1).unwrap();
            assert!(dgamma2 >= d01 - 1e-10, "dγ² {dgamma2} < d² {d01}");

            let (_, dg_same) = generalized_geodesic(&w, &m0, &m0, 0.5).unwrap();
            assert!(dg_same < 1e-18);
        }
    }

    #[test]
    fn two_convexity_of_squared_distance() {
        // d²(w, μ_t) ≤ (1−t)d²(w,μ0) + t d²(w,μ1) − t(1−t)·d_γ²
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..30 {
            let n = 10;
            let w = random_atoms(&mut rng, n);
            let m0 = random_atoms(&mut rng, n);
            let m1 = random_atoms(&mut rng, n);
            let (dw0, _) = dper2(&w, &m0).unwrap();
            let (dw1, _) = dper2(&w, &m1).unwrap();
            for &t in &[0.25, 0.5, 0.75] {
                let (mt, dgamma2) = generalized_geodesic(&w, &m0, &m1, t).unwrap();
                let (dwt, _) = dper2(&w, &mt).unwrap();
                let bound = (1.0 - t) * dw0 + t * dw1 - t * (1.0 - t) * dgamma2;
                assert!(dwt <= bound + 1e-8, "2-convexity violated: {dwt} > {bound}");
            }
        }
    }
}
