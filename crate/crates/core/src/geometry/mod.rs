//! Boundary curve families, tangency geometry, and the scalar fields built
//! from the boundary data.

mod conditions;
mod presets;
mod profile;

pub use conditions::{
    bellman_infinite_reason, check_conditions, classify_infinities, lambda_integral,
    validate_domain, ConditionsReport, InfinityCase, InfinityClassification, SideDiagnostics,
    SummabilityReport, ValidationReport,
};
pub use presets::{make_domain, CurveSpec, Preset};
pub use profile::{essential_roots, Root, RootKind, RootLocus, RootScanOptions, TorsionProfile};

use crate::error::{Error, Result};
use crate::num;
use std::fmt;
use std::sync::Arc;

/// A point of the plane.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Value and first three parameter derivatives of a plane curve at one point.
#[derive(Debug, Clone, Copy)]
pub struct CurveJet {
    pub p: Point,
    pub d1: Point,
    pub d2: Point,
    pub d3: Point,
}

/// A one-parameter family of boundary pairs: the fixed boundary `g(t)` and
/// the free boundary `G(t; eps)`, both graphs over `x1` with closed-form
/// derivatives to third order in `t` and first order in `eps`.
pub trait CurveFamily: Send + Sync {
    fn fixed_jet(&self, t: f64) -> CurveJet;
    fn free_jet(&self, t: f64, eps: f64) -> CurveJet;
    /// d/d eps of the free boundary point.
    fn free_deps(&self, t: f64, eps: f64) -> Point;
    fn eps_max(&self) -> f64;
    /// Parameter window on which the family is intended to be used.
    fn default_window(&self) -> (f64, f64) {
        (-12.0, 12.0)
    }
    /// Window for free-boundary parameter searches; wider than the fixed
    /// window when the two parametrizations cover different abscissas.
    fn free_param_window(&self) -> (f64, f64) {
        let (lo, hi) = self.default_window();
        let m = 0.5 * (hi - lo);
        (lo - m, hi + m)
    }
}

/// The domain family plus its preset identity.
#[derive(Clone)]
pub struct DomainSpec {
    family: Arc<dyn CurveFamily>,
    preset: Preset,
    window: (f64, f64),
}

impl fmt::Debug for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DomainSpec")
            .field("preset", &self.preset)
            .field("eps_max", &self.family.eps_max())
            .field("window", &self.window)
            .finish()
    }
}

impl DomainSpec {
    pub fn new(family: Arc<dyn CurveFamily>, preset: Preset) -> Self {
        let window = family.default_window();
        DomainSpec {
            family,
            preset,
            window,
        }
    }

    pub fn with_window(mut self, t_min: f64, t_max: f64) -> Self {
        self.window = (t_min, t_max);
        self
    }

    pub fn preset(&self) -> &Preset {
        &self.preset
    }

    pub fn eps_max(&self) -> f64 {
        self.family.eps_max()
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    /// Fixed boundary jet `g(t)`.
    pub fn fixed(&self, t: f64) -> CurveJet {
        self.family.fixed_jet(t)
    }

    /// Free boundary jet `G(s; eps)`.
    pub fn free(&self, s: f64, eps: f64) -> CurveJet {
        self.family.free_jet(s, eps)
    }

    pub fn free_deps(&self, s: f64, eps: f64) -> Point {
        self.family.free_deps(s, eps)
    }

    /// Parameter of the fixed-boundary point with abscissa `x1`.
    pub fn fixed_param_at_x1(&self, x1: f64) -> Result<f64> {
        let (lo, hi) = self.window;
        param_at_x1(|t| self.fixed(t).p.x, x1, lo, hi)
    }

    /// Parameter of the free-boundary point with abscissa `x1`.
    pub fn free_param_at_x1(&self, x1: f64, eps: f64) -> Result<f64> {
        let (lo, hi) = self.family.free_param_window();
        param_at_x1(|s| self.free(s, eps).p.x, x1, lo, hi)
    }

    /// Window for free-boundary parameter searches.
    pub fn free_window(&self) -> (f64, f64) {
        self.family.free_param_window()
    }
}

fn param_at_x1<F: Fn(f64) -> f64>(x1_of: F, x1: f64, lo: f64, hi: f64) -> Result<f64> {
    let f = |t: f64| x1_of(t) - x1;
    let (flo, fhi) = (f(lo), f(hi));
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::Domain {
            op: "param_at_x1",
            msg: format!("abscissa {x1} outside the window image [{:.3}, {:.3}]", lo, hi),
        });
    }
    num::solve_bracketed(f, lo, hi, 1e-14)
}

/// Tangency data of the two tangents from `g(t)` to the free boundary.
#[derive(Debug, Clone, Copy)]
pub struct TangencyData {
    pub t: f64,
    pub eps: f64,
    /// Free-boundary parameter of the left tangency point.
    pub s_left: f64,
    /// Free-boundary parameter of the right tangency point.
    pub s_right: f64,
    pub w_left: Point,
    pub w_right: Point,
    pub kappa_left: f64,
    pub kappa_right: f64,
    pub lambda_left: f64,
    pub lambda_right: f64,
}

/// Which tangent family a fence uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => write!(f, "left"),
            Side::Right => write!(f, "right"),
        }
    }
}

/// Residual of the tangency equation for base point `g(t)` and free-boundary
/// parameter `s`: the cross product of the free tangent direction with the
/// chord from the free point to `g(t)`.
pub fn tangency_residual(spec: &DomainSpec, t: f64, s: f64, eps: f64) -> f64 {
    let g = spec.fixed(t).p;
    let fj = spec.free(s, eps);
    (g.y - fj.p.y) * fj.d1.x - (g.x - fj.p.x) * fj.d1.y
}

/// Solve the tangency equation for both tangency parameters from `g(t)`.
pub fn tangency(spec: &DomainSpec, t: f64, eps: f64) -> Result<TangencyData> {
    if !(eps > 0.0) || eps >= spec.eps_max() {
        return Err(Error::Domain {
            op: "tangency",
            msg: format!("eps = {eps} outside (0, {})", spec.eps_max()),
        });
    }
    let g = spec.fixed(t);
    // Start from the free parameter directly above g(t): the residual there is
    // strictly negative, giving the midpoint of the two roots' bracket.
    let (fwlo, fwhi) = spec.free_window();
    let s_mid = spec.free_param_at_x1(g.p.x, eps).unwrap_or(t);
    let res = |s: f64| tangency_residual(spec, t, s, eps);
    let r_mid = res(s_mid);
    if !(r_mid < 0.0) {
        return Err(Error::Bracket {
            op: "tangency",
            lo: s_mid,
            hi: s_mid,
            msg: format!("residual above g(t) is {r_mid:.3e}, expected negative"),
        });
    }
    // Search limits follow the base point so fences may extend beyond the
    // nominal window toward the infinities.
    let reach = (fwhi - fwlo).max(8.0);
    let xtol = 1e-14 * (1.0 + s_mid.abs());
    let s_right = num::expand_and_solve(&res, s_mid, -1.0, 0.05, s_mid - reach, xtol)?;
    let s_left = num::expand_and_solve(&res, s_mid, 1.0, 0.05, s_mid + reach, xtol)?;
    let data_for = |s: f64| -> (Point, f64, f64) {
        let fj = spec.free(s, eps);
        let w = fj.p;
        let kappa = (w.y - g.p.y) / (w.x - g.p.x);
        // Implicit differentiation of the tangency equation gives s'(t);
        // lambda follows from w' = lambda (g - w).
        let dres_dt = g.d1.y * fj.d1.x - g.d1.x * fj.d1.y;
        let dres_ds = (g.p.y - fj.p.y) * fj.d2.x - (g.p.x - fj.p.x) * fj.d2.y;
        let s_prime = -dres_dt / dres_ds;
        let lambda = fj.d1.x * s_prime / (g.p.x - w.x);
        (w, kappa, lambda)
    };
    let (w_right, kappa_right, lambda_right) = data_for(s_right);
    let (w_left, kappa_left, lambda_left) = data_for(s_left);
    Ok(TangencyData {
        t,
        eps,
        s_left,
        s_right,
        w_left,
        w_right,
        kappa_left,
        kappa_right,
        lambda_left,
        lambda_right,
    })
}

impl TangencyData {
    pub fn w(&self, side: Side) -> Point {
        match side {
            Side::Left => self.w_left,
            Side::Right => self.w_right,
        }
    }

    pub fn kappa(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.kappa_left,
            Side::Right => self.kappa_right,
        }
    }

    pub fn lambda(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.lambda_left,
            Side::Right => self.lambda_right,
        }
    }

    pub fn s(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.s_left,
            Side::Right => self.s_right,
        }
    }
}

/// Boundary data `f` along the fixed boundary, with derivatives to third
/// order supplied in closed form.
pub trait BoundaryData: Send + Sync {
    /// `[f, f', f'', f''']` at `t`.
    fn jet(&self, t: f64) -> [f64; 4];
}

/// Boundary data from an expression of `t`.
pub struct ExprBoundary {
    jet: crate::expr::Jet3,
}

impl ExprBoundary {
    pub fn new(src: &str) -> Result<Self> {
        Ok(ExprBoundary {
            jet: crate::expr::Jet3::new(crate::expr::parse(src)?),
        })
    }
}

impl BoundaryData for ExprBoundary {
    fn jet(&self, t: f64) -> [f64; 4] {
        self.jet.eval_all(t, 0.0)
    }
}

/// Boundary data from closures (used heavily in tests).
pub struct FnBoundary<F: Fn(f64) -> [f64; 4] + Send + Sync>(pub F);

impl<F: Fn(f64) -> [f64; 4] + Send + Sync> BoundaryData for FnBoundary<F> {
    fn jet(&self, t: f64) -> [f64; 4] {
        (self.0)(t)
    }
}

/// The boundary function together with the derived scalar fields.
#[derive(Clone)]
pub struct BoundaryFunction {
    data: Arc<dyn BoundaryData>,
}

impl fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoundaryFunction")
    }
}

/// Scalar fields of the boundary data at a parameter `t`.
#[derive(Debug, Clone, Copy)]
pub struct CurveScalars {
    /// Slope of the fixed boundary: `g2'/g1'`.
    pub kappa2: f64,
    /// `d kappa2 / dt`.
    pub kappa2_prime: f64,
    /// Second derivative of `kappa2`.
    pub kappa2_second: f64,
    /// Slope of the data projection: `f'/g1'`.
    pub kappa3: f64,
    pub kappa3_prime: f64,
    /// Torsion quotient `kappa3'/kappa2'`.
    pub tors: f64,
    /// `d tors / dt`.
    pub tors_prime: f64,
    /// Torsion determinant `det(gamma', gamma'', gamma''')`.
    pub torsion_det: f64,
}

impl BoundaryFunction {
    pub fn new(data: Arc<dyn BoundaryData>) -> Self {
        BoundaryFunction { data }
    }

    pub fn from_expr(src: &str) -> Result<Self> {
        Ok(Self::new(Arc::new(ExprBoundary::new(src)?)))
    }

    pub fn f(&self, t: f64) -> f64 {
        self.data.jet(t)[0]
    }

    pub fn jet(&self, t: f64) -> [f64; 4] {
        self.data.jet(t)
    }

    /// Space curve `gamma(t) = (g(t), f(t))` derivatives, rows 1..3.
    pub fn gamma_jets(&self, spec: &DomainSpec, t: f64) -> [[f64; 3]; 3] {
        let g = spec.fixed(t);
        let fj = self.data.jet(t);
        [
            [g.d1.x, g.d1.y, fj[1]],
            [g.d2.x, g.d2.y, fj[2]],
            [g.d3.x, g.d3.y, fj[3]],
        ]
    }

    pub fn gamma(&self, spec: &DomainSpec, t: f64) -> [f64; 3] {
        let g = spec.fixed(t);
        [g.p.x, g.p.y, self.f(t)]
    }

    /// All scalar fields at `t`.
    pub fn scalars(&self, spec: &DomainSpec, t: f64) -> CurveScalars {
        let g = spec.fixed(t);
        let fj = self.data.jet(t);
        let g1p = g.d1.x;
        let kappa2 = g.d1.y / g1p;
        let kappa2_prime = (g.d2.y * g1p - g.d1.y * g.d2.x) / (g1p * g1p);
        let kappa2_second =
            (g.d3.y * g1p - g.d1.y * g.d3.x) / (g1p * g1p) - 2.0 * kappa2_prime * g.d2.x / g1p;
        let kappa3 = fj[1] / g1p;
        let kappa3_prime = (fj[2] * g1p - fj[1] * g.d2.x) / (g1p * g1p);
        let kappa3_second =
            (fj[3] * g1p - fj[1] * g.d3.x) / (g1p * g1p) - 2.0 * kappa3_prime * g.d2.x / g1p;
        let tors = kappa3_prime / kappa2_prime;
        let tors_prime = (kappa3_second * kappa2_prime - kappa3_prime * kappa2_second)
            / (kappa2_prime * kappa2_prime);
        // det(gamma',gamma'',gamma''') = tors' * (g1')^3 * (kappa2')^2
        let torsion_det = tors_prime * g1p.powi(3) * kappa2_prime.powi(2);
        CurveScalars {
            kappa2,
            kappa2_prime,
            kappa2_second,
            kappa3,
            kappa3_prime,
            tors,
            tors_prime,
            torsion_det,
        }
    }

    pub fn tors(&self, spec: &DomainSpec, t: f64) -> f64 {
        self.scalars(spec, t).tors
    }

    pub fn tors_prime(&self, spec: &DomainSpec, t: f64) -> f64 {
        self.scalars(spec, t).tors_prime
    }
}

/// Region classification of a point relative to `Omega_eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Interior { t_fiber: f64 },
    FixedBoundary { t: f64 },
    FreeBoundary { s: f64 },
    Outside,
}

/// Locate a point relative to the domain at `eps`. The fiber parameter is the
/// fixed-boundary parameter with the same abscissa.
pub fn locate_point(spec: &DomainSpec, x: Point, eps: f64, tol: f64) -> Region {
    let t = match spec.fixed_param_at_x1(x.x) {
        Ok(t) => t,
        Err(_) => return Region::Outside,
    };
    let g = spec.fixed(t).p;
    let scale = 1.0 + g.norm();
    if x.y < g.y - tol * scale {
        return Region::Outside;
    }
    let s = match spec.free_param_at_x1(x.x, eps) {
        Ok(s) => s,
        Err(_) => return Region::Outside,
    };
    let fb = spec.free(s, eps).p;
    if x.y > fb.y + tol * scale {
        return Region::Outside;
    }
    if (x.y - g.y).abs() <= tol * scale {
        return Region::FixedBoundary { t };
    }
    if (x.y - fb.y).abs() <= tol * scale {
        return Region::FreeBoundary { s };
    }
    Region::Interior { t_fiber: t }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strip() -> DomainSpec {
        make_domain(&CurveSpec::Preset(Preset::ParabolicStrip { eps_max: 4.0 })).unwrap()
    }

    fn f_exp() -> BoundaryFunction {
        BoundaryFunction::from_expr("exp(t)").unwrap()
    }

    #[test]
    fn strip_tangency_closed_form() {
        let spec = strip();
        for &(t, eps) in &[(0.0, 0.5), (1.3, 0.25), (-2.0, 0.9)] {
            let td = tangency(&spec, t, eps).unwrap();
            assert!((td.s_right - (t - eps)).abs() < 1e-10, "s_right");
            assert!((td.s_left - (t + eps)).abs() < 1e-10, "s_left");
            assert!((td.lambda_right - 1.0 / eps).abs() < 1e-8, "lambda_right");
            assert!((td.lambda_left + 1.0 / eps).abs() < 1e-8, "lambda_left");
            assert!(td.s_right < td.s_left);
            assert!(td.lambda_right > 0.0 && td.lambda_left < 0.0);
            // kappa identities
            let g = spec.fixed(t).p;
            for side in [Side::Left, Side::Right] {
                let w = td.w(side);
                let k = td.kappa(side);
                assert!((k - (w.y - g.y) / (w.x - g.x)).abs() < 1e-12);
            }
            // residuals at the solved parameters
            for s in [td.s_left, td.s_right] {
                assert!(tangency_residual(&spec, t, s, eps).abs() < 1e-10 * (1.0 + g.norm()));
            }
            // kappa_R < kappa2 < kappa_L
            let k2 = 2.0 * t;
            assert!(td.kappa_right < k2 && k2 < td.kappa_left);
        }
    }

    #[test]
    fn strip_scalars_exp() {
        let spec = strip();
        let f = f_exp();
        for &t in &[-1.0, 0.0, 0.7, 2.0] {
            let s = f.scalars(&spec, t);
            assert!((s.kappa2 - 2.0 * t).abs() < 1e-12);
            assert!((s.kappa2_prime - 2.0).abs() < 1e-12);
            assert!((s.kappa3 - t.exp()).abs() < 1e-12);
            assert!((s.tors - t.exp() / 2.0).abs() < 1e-12);
            assert!((s.tors_prime - t.exp() / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn torsion_det_sign_matches_tors_prime() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("-(t^4)").unwrap();
        for &t in &[-0.8, -0.1, 0.2, 1.1] {
            let s = f.scalars(&spec, t);
            // tors = -6 t^2, tors' = -12 t
            assert!((s.tors + 6.0 * t * t).abs() < 1e-10);
            assert!((s.tors_prime + 12.0 * t).abs() < 1e-9);
            assert_eq!(s.torsion_det.signum(), s.tors_prime.signum());
        }
    }

    #[test]
    fn affine_in_curve_coordinates_has_zero_torsion() {
        let spec = strip();
        // f = 3 + 2 g1 - g2 = 3 + 2t - t^2
        let f = BoundaryFunction::from_expr("3 + 2*t - t^2").unwrap();
        for &t in &[-2.0, 0.0, 1.5] {
            let s = f.scalars(&spec, t);
            assert!(s.tors_prime.abs() < 1e-12);
            assert!(s.torsion_det.abs() < 1e-12);
        }
    }

    #[test]
    fn locate_point_strip() {
        let spec = strip();
        let eps = 0.5;
        let tol = 1e-9;
        assert!(matches!(
            locate_point(&spec, Point::new(0.0, 0.1), eps, tol),
            Region::Interior { .. }
        ));
        assert!(matches!(
            locate_point(&spec, Point::new(1.0, 1.0), eps, tol),
            Region::FixedBoundary { .. }
        ));
        assert!(matches!(
            locate_point(&spec, Point::new(0.0, 0.3), eps, tol),
            Region::Outside
        ));
        assert!(matches!(
            locate_point(&spec, Point::new(0.0, 0.25), eps, tol),
            Region::FreeBoundary { .. }
        ));
    }
}
