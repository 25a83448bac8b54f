//! Independent verification: brute-force computation of the minimal locally
//! concave function on a grid by iterated two-point concavification, plus
//! concavity and Monge-Ampere scans of a constructed candidate.

use crate::error::{Error, Result};
use crate::foliation::GlobalCandidate;
use crate::geometry::{BoundaryFunction, DomainSpec, Point};
use crate::num::CounterRng;

#[derive(Debug, Clone)]
pub struct OracleOptions {
    /// Horizontal grid spacing.
    pub h: f64,
    /// Vertical rows across the strip; default derived from `h`.
    pub rows: Option<usize>,
    /// Number of chord directions.
    pub directions: usize,
    /// Sweep convergence tolerance (max pointwise increment).
    pub tol: f64,
    pub max_sweeps: usize,
    pub x_lo: f64,
    pub x_hi: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            h: 0.01,
            rows: None,
            directions: 64,
            tol: 1e-6,
            max_sweeps: 2000,
            x_lo: -1.2,
            x_hi: 1.2,
        }
    }
}

/// Grid values of the oracle in curvilinear coordinates: column `i` at
/// `x1 = x_lo + i h`, row `j` at relative height `j/(rows-1)` between the
/// fixed and free boundaries.
pub struct OracleGrid {
    pub eps: f64,
    pub x_lo: f64,
    pub h: f64,
    pub cols: usize,
    pub rows: usize,
    pub values: Vec<f64>,
    pub fixed_heights: Vec<f64>,
    pub free_heights: Vec<f64>,
    pub sweeps_used: usize,
    pub final_increment: f64,
}

impl OracleGrid {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.rows + j]
    }

    pub fn point(&self, i: usize, j: usize) -> Point {
        let x1 = self.x_lo + self.h * i as f64;
        let v = j as f64 / (self.rows - 1) as f64;
        let lo = self.col_fixed(i);
        let hi = self.col_free(i);
        Point::new(x1, lo + v * (hi - lo))
    }

    /// Catmull-Rom interpolation of a per-column table at abscissa `x1`.
    /// The tables carry two guard columns beyond each window edge so the
    /// stencil is complete everywhere inside.
    fn column_interp(&self, table: &[f64], x1: f64) -> f64 {
        let s = (x1 - self.x_lo) / self.h;
        let i1 = (s.floor() as isize).clamp(0, self.cols as isize - 2) as usize;
        let u = s - i1 as f64;
        // Guard offset: table index = column index + 2.
        let (p0, p1, p2, p3) = (
            table[i1 + 1],
            table[i1 + 2],
            table[i1 + 3],
            table[i1 + 4],
        );
        let m1 = 0.5 * (p2 - p0);
        let m2 = 0.5 * (p3 - p1);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * p1
            + (u3 - 2.0 * u2 + u) * m1
            + (-2.0 * u3 + 3.0 * u2) * p2
            + (u3 - u2) * m2
    }

    pub fn fixed_height(&self, x1: f64) -> f64 {
        self.column_interp(&self.fixed_heights, x1)
    }

    pub fn free_height(&self, x1: f64) -> f64 {
        self.column_interp(&self.free_heights, x1)
    }

    /// Exact (non-guard) height of a grid column.
    fn col_fixed(&self, i: usize) -> f64 {
        self.fixed_heights[i + 2]
    }

    fn col_free(&self, i: usize) -> f64 {
        self.free_heights[i + 2]
    }

    /// Relative vertical coordinate of a point; `[0, 1]` inside the strip.
    pub fn vcoord(&self, p: Point) -> f64 {
        let lo = self.fixed_height(p.x);
        let hi = self.free_height(p.x);
        (p.y - lo) / (hi - lo)
    }

    pub fn inside(&self, p: Point, tol: f64) -> bool {
        if p.x < self.x_lo - 1e-12 || p.x > self.x_lo + self.h * (self.cols - 1) as f64 + 1e-12 {
            return false;
        }
        let v = self.vcoord(p);
        (-tol..=1.0 + tol).contains(&v)
    }

    /// Cubic (Catmull-Rom) interpolation along a row of values.
    ///
    /// The rows live on curvilinear coordinates whose map to the plane is
    /// quadratic-like in the column index, so linear or limited schemes
    /// overshoot the pulled-back function by O(h^2) per evaluation and the
    /// max-iteration chains those overshoots across the window. Catmull-Rom
    /// reproduces quadratic profiles exactly; near the (C^1) junction kinks
    /// of the candidate its error is higher order.
    fn row_interp(&self, j: usize, i: usize, u: f64) -> f64 {
        let get = |k: isize| -> f64 {
            let kk = k.clamp(0, self.cols as isize - 1) as usize;
            self.at(kk, j)
        };
        let i = i as isize;
        let (p0, p1, p2, p3) = (get(i - 1), get(i), get(i + 1), get(i + 2));
        let m1 = 0.5 * (p2 - p0);
        let m2 = 0.5 * (p3 - p1);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * p1
            + (u3 - 2.0 * u2 + u) * m1
            + (-2.0 * u3 + 3.0 * u2) * p2
            + (u3 - u2) * m2
    }

    /// Interpolation of the oracle values at a point: Catmull-Rom along the
    /// columns and across the rows (both directions carry quadratic-scale
    /// coordinate curvature that lower-order schemes would turn into a
    /// per-hop bias chained by the max-iteration).
    pub fn interp(&self, p: Point) -> f64 {
        let s = ((p.x - self.x_lo) / self.h).clamp(0.0, (self.cols - 1) as f64);
        let i = (s.floor() as usize).min(self.cols - 2);
        let u = s - i as f64;
        let v = (self.vcoord(p) * (self.rows - 1) as f64).clamp(0.0, (self.rows - 1) as f64);
        let j = (v.floor() as usize).min(self.rows - 2);
        let w = v - j as f64;
        let jj = j as isize;
        let rows_i = self.rows as isize;
        let row_at = |k: isize| -> f64 {
            let kk = k.clamp(0, rows_i - 1) as usize;
            self.row_interp(kk, i, u)
        };
        let (p0, p1, p2, p3) = (row_at(jj - 1), row_at(jj), row_at(jj + 1), row_at(jj + 2));
        let m1 = if jj == 0 { p2 - p1 } else { 0.5 * (p2 - p0) };
        let m2 = if jj + 2 >= rows_i {
            p2 - p1
        } else {
            0.5 * (p3 - p1)
        };
        let w2 = w * w;
        let w3 = w2 * w;
        (2.0 * w3 - 3.0 * w2 + 1.0) * p1
            + (w3 - 2.0 * w2 + w) * m1
            + (-2.0 * w3 + 3.0 * w2) * p2
            + (w3 - w2) * m2
    }

    /// Largest `r` such that the whole segment from `x` along `dir` up to
    /// length `r` stays inside the strip.
    ///
    /// The free-boundary excess `y(r) - F(x1(r))` is concave along the ray
    /// (line minus convex graph), so its positive set is one interval: the
    /// first crossing bounds the reach. The fixed-boundary excess is convex
    /// with a single exit crossing. Window walls are handled in closed form.
    fn max_reach(&self, x: Point, dir: Point, r_max: f64) -> f64 {
        let margin = 1e-12;
        let x_hi = self.x_lo + self.h * (self.cols - 1) as f64;
        // Window walls.
        let mut r_cap = r_max;
        if dir.x > 1e-300 {
            r_cap = r_cap.min((x_hi - x.x) / dir.x);
        } else if dir.x < -1e-300 {
            r_cap = r_cap.min((self.x_lo - x.x) / dir.x);
        }
        if r_cap <= 0.0 {
            return 0.0;
        }
        let at = |r: f64| x + dir * r;
        // Fixed boundary: convex excess, at most one exit crossing.
        let fixed_bump = |r: f64| {
            let p = at(r);
            self.fixed_height(p.x) - p.y
        };
        if fixed_bump(r_cap) > margin {
            let (mut lo, mut hi) = (0.0, r_cap);
            for _ in 0..60 {
                let m = 0.5 * (lo + hi);
                if fixed_bump(m) > margin {
                    hi = m;
                } else {
                    lo = m;
                }
            }
            r_cap = lo;
        }
        if r_cap <= 0.0 {
            return 0.0;
        }
        // Free boundary: concave excess; locate its maximum by ternary
        // search, then the first crossing by bisection when it is positive.
        let free_bump = |r: f64| {
            let p = at(r);
            p.y - self.free_height(p.x)
        };
        let (mut lo, mut hi) = (0.0, r_cap);
        for _ in 0..40 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if free_bump(m1) < free_bump(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let r_peak = 0.5 * (lo + hi);
        if free_bump(r_peak) <= margin && free_bump(r_cap) <= margin {
            return r_cap;
        }
        // First crossing lies in (0, r_peak] (or before r_cap when the peak
        // is at the end).
        let target = if free_bump(r_peak) > margin {
            r_peak
        } else {
            r_cap
        };
        let (mut lo, mut hi) = (0.0, target);
        for _ in 0..60 {
            let m = 0.5 * (lo + hi);
            if free_bump(m) > margin {
                hi = m;
            } else {
                lo = m;
            }
        }
        lo
    }
}

/// Dirichlet data imposed on the side-cut columns of the truncated window.
pub enum SideData<'a> {
    /// Extend the fixed-boundary value of the cut column upward (crude; the
    /// cut's influence must be excluded from comparisons).
    FExtension,
    /// Pin the cut columns to a constructed candidate.
    Candidate(&'a GlobalCandidate),
    /// Pin the cut columns to explicit values.
    Values(&'a dyn Fn(Point) -> f64),
}

/// Iterated two-point concavification on the grid. Dirichlet data: `f` on
/// the fixed boundary row plus the side-cut data.
pub fn grid_value_iteration(
    spec: &DomainSpec,
    f: &BoundaryFunction,
    eps: f64,
    opts: &OracleOptions,
    side_data: SideData<'_>,
) -> Result<OracleGrid> {
    let cols = ((opts.x_hi - opts.x_lo) / opts.h).round() as usize + 1;
    if cols < 8 {
        return Err(Error::Domain {
            op: "grid_value_iteration",
            msg: "window too small for the grid".into(),
        });
    }
    // Height tables with two guard columns beyond each edge.
    let mut fixed_heights = Vec::with_capacity(cols + 4);
    let mut free_heights = Vec::with_capacity(cols + 4);
    let mut boundary_data = Vec::with_capacity(cols);
    for gi in 0..cols + 4 {
        let x1 = opts.x_lo + opts.h * (gi as f64 - 2.0);
        let t = spec.fixed_param_at_x1(x1)?;
        fixed_heights.push(spec.fixed(t).p.y);
        if (2..cols + 2).contains(&gi) {
            boundary_data.push(f.f(t));
        }
        let s = spec.free_param_at_x1(x1, eps)?;
        free_heights.push(spec.free(s, eps).p.y);
    }
    let strip_height = free_heights
        .iter()
        .zip(fixed_heights.iter())
        .map(|(a, b)| a - b)
        .fold(f64::INFINITY, f64::min);
    let rows = opts
        .rows
        .unwrap_or(((strip_height / opts.h).ceil() as usize + 1).clamp(8, 64));
    // Every admissible test function averages f over the boundary, so the
    // global minimum of the boundary data is a true finite lower bound:
    // the iteration starts from it and increases monotonically.
    let f_min = boundary_data.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let mut grid = OracleGrid {
        eps,
        x_lo: opts.x_lo,
        h: opts.h,
        cols,
        rows,
        values: vec![f_min; cols * rows],
        fixed_heights,
        free_heights,
        sweeps_used: 0,
        final_increment: f64::INFINITY,
    };
    // Dirichlet data.
    for i in 0..cols {
        grid.values[i * rows] = boundary_data[i];
    }
    let mut pinned = vec![false; cols * rows];
    for i in 0..cols {
        pinned[i * rows] = true;
    }
    for j in 1..rows {
        for &i in &[0usize, cols - 1] {
            let p = grid.point(i, j);
            let v = match &side_data {
                SideData::Candidate(cand) => {
                    cand.evaluate(p).map(|r| r.value).unwrap_or(boundary_data[i])
                }
                SideData::Values(func) => func(p),
                SideData::FExtension => boundary_data[i],
            };
            grid.values[i * rows + j] = v;
            pinned[i * rows + j] = true;
        }
    }

    // Direction set: m equally spaced angles over the upper half circle.
    let m = opts.directions.max(4);
    let dirs: Vec<Point> = (0..m)
        .map(|k| {
            let th = std::f64::consts::PI * (k as f64 + 0.5) / m as f64;
            Point::new(th.cos(), th.sin())
        })
        .collect();
    let window_diag = (opts.x_hi - opts.x_lo).hypot(strip_height);

    let mut increment = f64::INFINITY;
    let mut sweep = 0usize;
    while sweep < opts.max_sweeps && increment > opts.tol {
        increment = 0.0;
        sweep += 1;
        let serpentine = sweep % 2 == 0;
        for ii in 0..cols {
            let i = if serpentine { cols - 1 - ii } else { ii };
            for j in 1..rows {
                let idx = i * rows + j;
                if pinned[idx] {
                    continue;
                }
                let x = grid.point(i, j);
                let mut best = grid.values[idx];
                let chord_value = |theta: f64| -> f64 {
                    let d = Point::new(theta.cos(), theta.sin());
                    let r_plus = grid.max_reach(x, d, window_diag);
                    let r_minus = grid.max_reach(x, d * -1.0, window_diag);
                    if r_plus <= 0.0 || r_minus <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    let mut v = f64::NEG_INFINITY;
                    for scale in [1.0, 0.45] {
                        let sp = r_plus * scale;
                        let sq = r_minus * scale;
                        let p = x + d * sp;
                        let q = x + d * (-sq);
                        let cand = (sq * grid.interp(p) + sp * grid.interp(q)) / (sp + sq);
                        v = v.max(cand);
                    }
                    v
                };
                // The free boundary's tangent direction always admits an
                // inside chord (the tangent line lies below the convex free
                // boundary); without it the top rows have no admissible
                // directions in the quantized set.
                let dh = grid.h;
                let slope = (grid.free_height(x.x + dh) - grid.free_height(x.x - dh))
                    / (2.0 * dh);
                let tangent_theta = slope.atan();
                let mut best_theta = tangent_theta;
                let v = chord_value(tangent_theta);
                if v > best {
                    best = v;
                }
                for (k, _) in dirs.iter().enumerate() {
                    let theta = std::f64::consts::PI * (k as f64 + 0.5) / m as f64;
                    let v = chord_value(theta);
                    if v > best {
                        best = v;
                        best_theta = theta;
                    }
                }
                // Refine the best direction continuously: the discrete
                // direction set alone leaves an O(1/m^2) value deficit.
                {
                    let dtheta = std::f64::consts::PI / m as f64;
                    let (mut lo_t, mut hi_t) = (best_theta - dtheta, best_theta + dtheta);
                    for _ in 0..22 {
                        let m1 = lo_t + (hi_t - lo_t) / 3.0;
                        let m2 = hi_t - (hi_t - lo_t) / 3.0;
                        if chord_value(m1) < chord_value(m2) {
                            lo_t = m1;
                        } else {
                            hi_t = m2;
                        }
                    }
                    let v = chord_value(0.5 * (lo_t + hi_t));
                    if v > best {
                        best = v;
                    }
                }
                if best > grid.values[idx] {
                    increment = increment.max(best - grid.values[idx]);
                    grid.values[idx] = best;
                }
            }
        }
    }
    grid.sweeps_used = sweep;
    // Budget exhaustion is not an error: the best-so-far grid is returned
    // with the last increment as its convergence certificate.
    grid.final_increment = increment;
    Ok(grid)
}

/// Comparison statistics between a candidate and the oracle grid.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CompareReport {
    pub max_abs: f64,
    pub mean_abs: f64,
    pub nodes: usize,
    /// Margin (in columns) excluded at the side cuts.
    pub margin_cols: usize,
}

pub fn compare(
    cand: &GlobalCandidate,
    grid: &OracleGrid,
    margin_frac: f64,
) -> Result<CompareReport> {
    let margin_cols = ((grid.cols as f64) * margin_frac).ceil() as usize;
    let mut max_abs = 0.0f64;
    let mut sum = 0.0f64;
    let mut nodes = 0usize;
    for i in margin_cols..grid.cols - margin_cols {
        for j in 0..grid.rows {
            let p = grid.point(i, j);
            let b = cand.evaluate(p)?.value;
            let d = (b - grid.at(i, j)).abs();
            max_abs = max_abs.max(d);
            sum += d;
            nodes += 1;
        }
    }
    Ok(CompareReport {
        max_abs,
        mean_abs: sum / nodes.max(1) as f64,
        nodes,
        margin_cols,
    })
}

/// Concavity violations of the candidate along random in-domain segments.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConcavityViolation {
    pub p: (f64, f64),
    pub q: (f64, f64),
    pub deficiency: f64,
}

pub fn segment_concavity_scan(
    cand: &GlobalCandidate,
    spec: &DomainSpec,
    eps: f64,
    segments: usize,
    x_span: (f64, f64),
    tol: f64,
    rng: &mut CounterRng,
) -> Result<Vec<ConcavityViolation>> {
    let mut out = vec![];
    let inside = |x: Point| -> bool {
        let Ok(t) = spec.fixed_param_at_x1(x.x) else {
            return false;
        };
        let Ok(s) = spec.free_param_at_x1(x.x, eps) else {
            return false;
        };
        x.y >= spec.fixed(t).p.y - 1e-12 && x.y <= spec.free(s, eps).p.y + 1e-12
    };
    let mut tried = 0usize;
    let mut done = 0usize;
    while done < segments && tried < segments * 50 {
        tried += 1;
        let x1 = rng.uniform(x_span.0, x_span.1);
        let x2 = rng.uniform(x_span.0, x_span.1);
        let pick = |x1: f64, rng: &mut CounterRng| -> Point {
            let t = spec.fixed_param_at_x1(x1).unwrap();
            let lo = spec.fixed(t).p.y;
            let s = spec.free_param_at_x1(x1, eps).unwrap();
            let hi = spec.free(s, eps).p.y;
            Point::new(x1, lo + rng.uniform(0.01, 0.99) * (hi - lo))
        };
        let p = pick(x1, rng);
        let q = pick(x2, rng);
        let mid = Point::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y));
        // Keep only segments inside the domain: sample along it.
        let mut ok = true;
        for k in 1..8 {
            let s = k as f64 / 8.0;
            if !inside(Point::new(p.x + s * (q.x - p.x), p.y + s * (q.y - p.y))) {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        done += 1;
        let bp = cand.evaluate(p)?.value;
        let bq = cand.evaluate(q)?.value;
        let bm = cand.evaluate(mid)?.value;
        let deficiency = bm - 0.5 * (bp + bq);
        if deficiency < -tol * (1.0 + bm.abs()) {
            out.push(ConcavityViolation {
                p: (p.x, p.y),
                q: (q.x, q.y),
                deficiency,
            });
        }
    }
    Ok(out)
}

/// Normalized determinant of the central-difference Hessian at an interior
/// point: `det H / (1 + |H|^2)`.
pub fn monge_ampere_residual(
    cand: &GlobalCandidate,
    spec: &DomainSpec,
    eps: f64,
    x: Point,
    h: f64,
) -> Result<f64> {
    // The whole stencil must stay inside the domain.
    let inside = |p: Point| -> bool {
        match (
            spec.fixed_param_at_x1(p.x),
            spec.free_param_at_x1(p.x, eps),
        ) {
            (Ok(t), Ok(s)) => p.y >= spec.fixed(t).p.y && p.y <= spec.free(s, eps).p.y,
            _ => false,
        }
    };
    for (dx, dy) in [
        (h, 0.0),
        (-h, 0.0),
        (0.0, h),
        (0.0, -h),
        (h, h),
        (h, -h),
        (-h, h),
        (-h, -h),
    ] {
        if !inside(Point::new(x.x + dx, x.y + dy)) {
            return Err(Error::OutsideDomain {
                op: "monge_ampere_residual",
                x1: x.x + dx,
                x2: x.y + dy,
            });
        }
    }
    let b = |p: Point| -> Result<f64> { Ok(cand.evaluate(p)?.value) };
    let b0 = b(x)?;
    let bxx = (b(Point::new(x.x + h, x.y))? - 2.0 * b0 + b(Point::new(x.x - h, x.y))?) / (h * h);
    let byy = (b(Point::new(x.x, x.y + h))? - 2.0 * b0 + b(Point::new(x.x, x.y - h))?) / (h * h);
    let bxy = (b(Point::new(x.x + h, x.y + h))? - b(Point::new(x.x + h, x.y - h))?
        - b(Point::new(x.x - h, x.y + h))?
        + b(Point::new(x.x - h, x.y - h))?)
        / (4.0 * h * h);
    let det = bxx * byy - bxy * bxy;
    let norm2 = bxx * bxx + 2.0 * bxy * bxy + byy * byy;
    Ok(det / (1.0 + norm2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_domain, CurveSpec, Preset};

    fn strip() -> DomainSpec {
        make_domain(&CurveSpec::Preset(Preset::ParabolicStrip { eps_max: 4.0 })).unwrap()
    }

    fn coarse_opts() -> OracleOptions {
        OracleOptions {
            h: 0.04,
            rows: Some(8),
            directions: 32,
            tol: 1e-6,
            max_sweeps: 3000,
            x_lo: -0.9,
            x_hi: 0.9,
        }
    }

    #[test]
    fn oracle_reproduces_affine_data() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("1 + 2*t - 3*t*t").unwrap();
        // Affine in curve coordinates: B(x) = 1 + 2 x1 - 3 x2.
        let truth = |p: Point| 1.0 + 2.0 * p.x - 3.0 * p.y;
        let grid =
            grid_value_iteration(&spec, &f, 0.3, &coarse_opts(), SideData::Values(&truth))
                .unwrap();
        let mut worst = 0.0f64;
        for i in 2..grid.cols - 2 {
            for j in 0..grid.rows {
                let p = grid.point(i, j);
                let expect = 1.0 + 2.0 * p.x - 3.0 * p.y;
                worst = worst.max((grid.at(i, j) - expect).abs());
            }
        }
        assert!(worst < 1e-3, "affine reproduction error {worst:.3e}");
    }

    #[test]
    fn oracle_matches_exponential_closed_form() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("exp(t)").unwrap();
        let eps = 0.5;
        let opts = OracleOptions {
            h: 0.02,
            rows: Some(14),
            directions: 48,
            tol: 1e-6,
            max_sweeps: 4000,
            x_lo: -1.5,
            x_hi: 1.5,
        };
        let closed = |x: Point| -> f64 {
            let d = (x.x * x.x - x.y + eps * eps).sqrt();
            (1.0 - d) / (1.0 - eps) * (x.x - eps + d).exp()
        };
        let grid =
            grid_value_iteration(&spec, &f, eps, &opts, SideData::Values(&closed)).unwrap();
        let mut worst = 0.0f64;
        let margin = grid.cols / 5;
        for i in margin..grid.cols - margin {
            for j in 0..grid.rows {
                let p = grid.point(i, j);
                worst = worst.max((grid.at(i, j) - closed(p)).abs());
            }
        }
        assert!(worst < 2e-2, "oracle error vs closed form: {worst:.3e}");
    }

    #[test]
    fn oracle_affine_shift_invariance() {
        let spec = strip();
        let f1 = BoundaryFunction::from_expr("-(t^4)").unwrap();
        let f2 = BoundaryFunction::from_expr("-(t^4) + 2 + t - 0.5*t*t").unwrap();
        let opts = coarse_opts();
        // Consistent side data: a common baseline plus the affine shift.
        let base = |p: Point| -> f64 {
            // f-extension of the cut column for f1.
            -(p.x.powi(4))
        };
        let shifted = |p: Point| -> f64 { base(p) + 2.0 + p.x - 0.5 * p.y };
        let g1 = grid_value_iteration(&spec, &f1, 0.3, &opts, SideData::Values(&base)).unwrap();
        let g2 =
            grid_value_iteration(&spec, &f2, 0.3, &opts, SideData::Values(&shifted)).unwrap();
        let mut worst = 0.0f64;
        for i in 0..g1.cols {
            for j in 0..g1.rows {
                let p = g1.point(i, j);
                let shift = 2.0 + p.x - 0.5 * p.y;
                worst = worst.max((g2.at(i, j) - g1.at(i, j) - shift).abs());
            }
        }
        assert!(worst < 1e-5, "shift invariance error {worst:.3e}");
    }

    #[test]
    fn oracle_sweeps_are_monotone() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("-(t^4)").unwrap();
        // Run twice with different sweep budgets: the longer run dominates
        // pointwise (monotone nondecreasing iteration).
        let mut o_short = coarse_opts();
        o_short.max_sweeps = 3;
        o_short.tol = 1e-300;
        let mut o_long = coarse_opts();
        o_long.max_sweeps = 8;
        o_long.tol = 1e-300;
        let gs = grid_value_iteration(&spec, &f, 0.3, &o_short, SideData::FExtension).unwrap();
        let gl = grid_value_iteration(&spec, &f, 0.3, &o_long, SideData::FExtension).unwrap();
        for idx in 0..gs.values.len() {
            assert!(
                gl.values[idx] >= gs.values[idx] - 1e-12,
                "sweep monotonicity violated at node {idx}"
            );
        }
    }
}
