//! Essential roots of the torsion: the points (or intervals) where the
//! boundary data's torsion changes sign. These organize the entire foliation.

use super::{BoundaryFunction, DomainSpec};
use crate::error::{Error, Result};
use crate::num;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum RootKind {
    /// Torsion changes from `+` to `-`; cups originate here.
    C,
    /// Torsion changes from `-` to `+`; angles gravitate here as `eps -> 0`.
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum RootLocus {
    Point(f64),
    /// Solid root: the torsion vanishes on a whole interval.
    Interval(f64, f64),
    NegInfinity,
    PosInfinity,
}

impl RootLocus {
    /// Representative coordinate for ordering and distance computations.
    pub fn left(&self) -> f64 {
        match self {
            RootLocus::Point(t) => *t,
            RootLocus::Interval(l, _) => *l,
            RootLocus::NegInfinity => f64::NEG_INFINITY,
            RootLocus::PosInfinity => f64::INFINITY,
        }
    }

    pub fn right(&self) -> f64 {
        match self {
            RootLocus::Point(t) => *t,
            RootLocus::Interval(_, r) => *r,
            RootLocus::NegInfinity => f64::NEG_INFINITY,
            RootLocus::PosInfinity => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, RootLocus::NegInfinity | RootLocus::PosInfinity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Root {
    pub kind: RootKind,
    pub locus: RootLocus,
}

/// The ordered essential roots `c_0 < v_1 < c_1 < ... < v_n < c_n`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TorsionProfile {
    pub roots: Vec<Root>,
}

impl TorsionProfile {
    pub fn c_roots(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter().filter(|r| r.kind == RootKind::C)
    }

    pub fn v_roots(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter().filter(|r| r.kind == RootKind::V)
    }

    /// Number of `v` roots (the `n` of the profile).
    pub fn n(&self) -> usize {
        self.v_roots().count()
    }

    /// Check the strict interleaving `c, v, c, v, ..., c`.
    pub fn is_interleaved(&self) -> bool {
        if self.roots.is_empty() {
            return true;
        }
        for (i, r) in self.roots.iter().enumerate() {
            let expect = if i % 2 == 0 { RootKind::C } else { RootKind::V };
            if r.kind != expect {
                return false;
            }
            if i > 0 && !(self.roots[i - 1].locus.right() < r.locus.left()) {
                return false;
            }
        }
        self.roots.len() % 2 == 1
    }
}

/// Options for the root scan.
#[derive(Debug, Clone)]
pub struct RootScanOptions {
    pub samples: usize,
    /// Relative threshold below which `tors'` counts as zero.
    pub zero_rtol: f64,
    /// Minimal parameter length for a vanishing run to count as solid.
    pub min_solid_len: f64,
    /// Maximal number of monotonicity intervals before Condition "reg" is
    /// declared violated.
    pub monotonicity_budget: usize,
}

impl Default for RootScanOptions {
    fn default() -> Self {
        RootScanOptions {
            samples: 4096,
            zero_rtol: 1e-10,
            min_solid_len: 1e-4,
            monotonicity_budget: 64,
        }
    }
}

/// Scan the window for essential roots of the torsion.
pub fn essential_roots(
    f: &BoundaryFunction,
    spec: &DomainSpec,
    opts: &RootScanOptions,
) -> Result<TorsionProfile> {
    let (lo, hi) = spec.window();
    let n = opts.samples.max(16);
    let dt = (hi - lo) / (n as f64);
    let ts: Vec<f64> = (0..=n).map(|i| lo + dt * i as f64).collect();
    let tp: Vec<f64> = ts.iter().map(|&t| f.tors_prime(spec, t)).collect();
    let max_abs = tp.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs == 0.0 {
        // Torsion-free data: no essential roots at all.
        return Ok(TorsionProfile { roots: vec![] });
    }
    let thresh = opts.zero_rtol * max_abs;
    let sign_of = |v: f64| -> i8 {
        if v > thresh {
            1
        } else if v < -thresh {
            -1
        } else {
            0
        }
    };

    // Compress into runs of constant sign.
    let mut runs: Vec<(i8, usize, usize)> = Vec::new();
    for (i, &v) in tp.iter().enumerate() {
        let s = sign_of(v);
        match runs.last_mut() {
            Some((rs, _, end)) if *rs == s => *end = i,
            _ => runs.push((s, i, i)),
        }
    }

    let nonzero_runs = runs.iter().filter(|(s, _, _)| *s != 0).count();
    if nonzero_runs > opts.monotonicity_budget {
        return Err(Error::Budget {
            op: "essential_roots",
            residual: nonzero_runs as f64,
        });
    }

    let mut roots: Vec<Root> = Vec::new();
    // Walk over nonzero runs; zero runs between opposite signs yield solid
    // roots when long enough, otherwise the transition is a point root.
    let nz: Vec<&(i8, usize, usize)> = runs.iter().filter(|(s, _, _)| *s != 0).collect();
    for w in nz.windows(2) {
        let (s0, _, e0) = *w[0];
        let (s1, b1, _) = *w[1];
        if s0 == s1 {
            continue;
        }
        let kind = if s0 > 0 { RootKind::C } else { RootKind::V };
        let gap_lo = ts[e0];
        let gap_hi = ts[b1];
        if gap_hi - gap_lo > opts.min_solid_len.max(3.0 * dt) {
            // Solid root: refine both ends of the vanishing plateau.
            let l = refine_plateau_edge(f, spec, gap_lo - dt, gap_lo + dt, thresh, true);
            let r = refine_plateau_edge(f, spec, gap_hi - dt, gap_hi + dt, thresh, false);
            roots.push(Root {
                kind,
                locus: RootLocus::Interval(l, r),
            });
        } else {
            let root = num::solve_bracketed(
                |t| f.tors_prime(spec, t),
                gap_lo,
                gap_hi,
                1e-13 * (1.0 + gap_lo.abs()),
            )
            .unwrap_or(0.5 * (gap_lo + gap_hi));
            roots.push(Root {
                kind,
                locus: RootLocus::Point(root),
            });
        }
    }

    // Boundary conventions: torsion negative near -infinity contributes
    // c_0 = -infinity, positive near +infinity contributes c_n = +infinity.
    if let Some(&&(s, _, _)) = nz.first() {
        if s < 0 {
            roots.insert(
                0,
                Root {
                    kind: RootKind::C,
                    locus: RootLocus::NegInfinity,
                },
            );
        }
    }
    if let Some(&&(s, _, _)) = nz.last() {
        if s > 0 {
            roots.push(Root {
                kind: RootKind::C,
                locus: RootLocus::PosInfinity,
            });
        }
    }

    let profile = TorsionProfile { roots };
    if !profile.is_interleaved() {
        return Err(Error::Domain {
            op: "essential_roots",
            msg: format!("root sequence failed interleaving: {:?}", profile.roots),
        });
    }
    Ok(profile)
}

/// Locate the parameter where `|tors'|` crosses the zero threshold at a
/// plateau edge.
fn refine_plateau_edge(
    f: &BoundaryFunction,
    spec: &DomainSpec,
    lo: f64,
    hi: f64,
    thresh: f64,
    left_edge: bool,
) -> f64 {
    let h = |t: f64| f.tors_prime(spec, t).abs() - thresh;
    num::solve_bracketed(h, lo, hi, 1e-12 * (1.0 + lo.abs())).unwrap_or(if left_edge {
        lo
    } else {
        hi
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_domain, CurveSpec, FnBoundary, Preset};
    use std::sync::Arc;

    fn strip() -> DomainSpec {
        make_domain(&CurveSpec::Preset(Preset::ParabolicStrip { eps_max: 4.0 })).unwrap()
    }

    #[test]
    fn neg_t4_single_c_root() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("-(t^4)").unwrap();
        let p = essential_roots(&f, &spec, &RootScanOptions::default()).unwrap();
        assert_eq!(p.roots.len(), 1);
        assert_eq!(p.roots[0].kind, RootKind::C);
        match p.roots[0].locus {
            RootLocus::Point(t) => assert!(t.abs() < 1e-9),
            other => panic!("expected point root, got {other:?}"),
        }
    }

    #[test]
    fn exp_only_infinite_c() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("exp(t)").unwrap();
        let p = essential_roots(&f, &spec, &RootScanOptions::default()).unwrap();
        assert_eq!(p.roots.len(), 1);
        assert_eq!(p.roots[0].kind, RootKind::C);
        assert_eq!(p.roots[0].locus, RootLocus::PosInfinity);
    }

    #[test]
    fn sextic_full_profile() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("t^6 - 5*t^4").unwrap();
        let p = essential_roots(&f, &spec, &RootScanOptions::default()).unwrap();
        // c0 = -inf, v1 = -1, c1 = 0, v2 = +1, c2 = +inf
        assert_eq!(p.roots.len(), 5);
        assert_eq!(p.roots[0].locus, RootLocus::NegInfinity);
        assert_eq!(p.roots[4].locus, RootLocus::PosInfinity);
        let expect = [(RootKind::V, -1.0), (RootKind::C, 0.0), (RootKind::V, 1.0)];
        for (i, (kind, at)) in expect.iter().enumerate() {
            assert_eq!(p.roots[i + 1].kind, *kind);
            match p.roots[i + 1].locus {
                RootLocus::Point(t) => assert!((t - at).abs() < 1e-9, "root {i}: {t} vs {at}"),
                other => panic!("expected point root, got {other:?}"),
            }
        }
        assert!(p.is_interleaved());
        assert_eq!(p.n(), 2);
    }

    #[test]
    fn quartic_single_v_root() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("t^4").unwrap();
        let p = essential_roots(&f, &spec, &RootScanOptions::default()).unwrap();
        assert_eq!(p.roots.len(), 3);
        assert_eq!(p.roots[1].kind, RootKind::V);
    }

    #[test]
    fn oscillatory_fails_reg() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("sin(exp(t))").unwrap();
        let err = essential_roots(&f, &spec, &RootScanOptions::default());
        assert!(matches!(err, Err(Error::Budget { .. })));
    }

    #[test]
    fn solid_root_detected() {
        let spec = strip();
        // tors = (t+1)^2 for t < -1, 0 on [-1, 1], (t-1)^2 for t > 1:
        // a C^1 function whose derivative changes - to + across the plateau,
        // i.e. a solid v root [-1, 1]. On the strip tors = f''/2.
        let f = BoundaryFunction::new(Arc::new(FnBoundary(|t: f64| {
            // f'' = 2*tors; integrate twice picking C^3 joins.
            // We only need derivatives up to order 3 for the scan.
            let (f2, f3);
            if t < -1.0 {
                let u = t + 1.0;
                f2 = 2.0 * u * u;
                f3 = 4.0 * u;
            } else if t > 1.0 {
                let u = t - 1.0;
                f2 = 2.0 * u * u;
                f3 = 4.0 * u;
            } else {
                f2 = 0.0;
                f3 = 0.0;
            }
            // The scan never uses f or f' for root location; fill with
            // consistent primitives (values irrelevant to tors').
            [0.0, 0.0, f2, f3]
        })));
        let p = essential_roots(&f, &spec, &RootScanOptions::default()).unwrap();
        assert_eq!(p.roots.len(), 3, "{:?}", p.roots);
        match p.roots[1] {
            Root {
                kind: RootKind::V,
                locus: RootLocus::Interval(l, r),
            } => {
                assert!((l + 1.0).abs() < 1e-2, "left edge {l}");
                assert!((r - 1.0).abs() < 1e-2, "right edge {r}");
            }
            other => panic!("expected solid v root, got {other:?}"),
        }
    }

    #[test]
    fn invariant_under_affine_in_curve_coordinates() {
        let spec = strip();
        let f1 = BoundaryFunction::from_expr("t^6 - 5*t^4").unwrap();
        let f2 = BoundaryFunction::from_expr("t^6 - 5*t^4 + 7 + 3*t - 2*t*t").unwrap();
        let p1 = essential_roots(&f1, &spec, &RootScanOptions::default()).unwrap();
        let p2 = essential_roots(&f2, &spec, &RootScanOptions::default()).unwrap();
        assert_eq!(p1.roots.len(), p2.roots.len());
        for (a, b) in p1.roots.iter().zip(p2.roots.iter()) {
            assert_eq!(a.kind, b.kind);
            if let (RootLocus::Point(x), RootLocus::Point(y)) = (a.locus, b.locus) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }
}
