//! Built-in domain families and the expression-backed custom family.

use super::{CurveFamily, CurveJet, DomainSpec, Point};
use crate::error::{Error, Result};
use crate::expr::{parse, Jet3};
use std::sync::Arc;

/// Identity of a domain family. `Custom` carries the expression strings so a
/// spec can be reconstructed from its serialized form.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Preset {
    ParabolicStrip { eps_max: f64 },
    AInfinity { q: f64 },
    AP1P2 { p1: f64, p2: f64, q: f64 },
    ExampleA,
    ExampleB,
    ExampleC,
    Custom { fixed: [String; 2], free: [String; 2], eps_max: f64 },
}

/// What to build a domain from.
#[derive(Debug, Clone)]
pub enum CurveSpec {
    Preset(Preset),
}

struct ExprFamily {
    fixed: [Jet3; 2],
    free: [Jet3; 2],
    eps_max: f64,
    window: (f64, f64),
    free_window: (f64, f64),
}

impl ExprFamily {
    fn build(
        fixed: [&str; 2],
        free: [&str; 2],
        eps_max: f64,
        window: (f64, f64),
        free_window: (f64, f64),
    ) -> Result<Self> {
        if !(eps_max > 0.0) {
            return Err(Error::Domain {
                op: "make_domain",
                msg: format!("eps_max must be positive, got {eps_max}"),
            });
        }
        Ok(ExprFamily {
            fixed: [Jet3::new(parse(fixed[0])?), Jet3::new(parse(fixed[1])?)],
            free: [Jet3::new(parse(free[0])?), Jet3::new(parse(free[1])?)],
            eps_max,
            window,
            free_window,
        })
    }
}

impl CurveFamily for ExprFamily {
    fn fixed_jet(&self, t: f64) -> CurveJet {
        let a = self.fixed[0].eval_all(t, 0.0);
        let b = self.fixed[1].eval_all(t, 0.0);
        CurveJet {
            p: Point::new(a[0], b[0]),
            d1: Point::new(a[1], b[1]),
            d2: Point::new(a[2], b[2]),
            d3: Point::new(a[3], b[3]),
        }
    }

    fn free_jet(&self, t: f64, eps: f64) -> CurveJet {
        let a = self.free[0].eval_all(t, eps);
        let b = self.free[1].eval_all(t, eps);
        CurveJet {
            p: Point::new(a[0], b[0]),
            d1: Point::new(a[1], b[1]),
            d2: Point::new(a[2], b[2]),
            d3: Point::new(a[3], b[3]),
        }
    }

    fn free_deps(&self, t: f64, eps: f64) -> Point {
        Point::new(
            self.free[0].eval_deps(t, eps),
            self.free[1].eval_deps(t, eps),
        )
    }

    fn eps_max(&self) -> f64 {
        self.eps_max
    }

    fn default_window(&self) -> (f64, f64) {
        self.window
    }

    fn free_param_window(&self) -> (f64, f64) {
        self.free_window
    }
}

/// Build a `DomainSpec` from a preset or custom curve specification.
pub fn make_domain(spec: &CurveSpec) -> Result<DomainSpec> {
    let CurveSpec::Preset(preset) = spec;
    let family: Arc<dyn CurveFamily> = match preset {
        Preset::ParabolicStrip { eps_max } => Arc::new(ExprFamily::build(
            ["t", "t*t"],
            ["t", "t*t + eps*eps"],
            *eps_max,
            (-12.0, 12.0),
            (-16.0, 16.0),
        )?),
        Preset::AInfinity { q } => {
            if !(*q > 1.0) {
                return Err(Error::Domain {
                    op: "make_domain",
                    msg: format!("a-infinity requires q > 1, got {q}"),
                });
            }
            // Family Q(eps) = 1 + eps (q - 1), eps in (0, 1): free boundary
            // x2 = Q(eps) e^{x1}, strictly nested in eps.
            let free2 = format!("(1 + eps*{})*exp(t)", q - 1.0);
            Arc::new(ExprFamily::build(
                ["t", "exp(t)"],
                ["t", &free2],
                1.0,
                (-10.0, 6.0),
                (-14.0, 10.0),
            )?)
        }
        Preset::AP1P2 { p1, p2, q } => {
            if !(*p2 < 0.0 && 0.0 < *p1) {
                return Err(Error::Domain {
                    op: "make_domain",
                    msg: format!(
                        "a-p1p2 preset requires p2 < 0 < p1 for a convex graph, got p1={p1}, p2={p2}"
                    ),
                });
            }
            if !(*q > 1.0) {
                return Err(Error::Domain {
                    op: "make_domain",
                    msg: format!("a-p1p2 requires q > 1, got {q}"),
                });
            }
            let fixed1 = format!("exp({p1}*t)");
            let fixed2 = format!("exp({p2}*t)");
            // Free boundary: x2 = Q(eps)^(-p2) x1^(p2/p1) with Q(eps) as above.
            let free2 = format!("((1 + eps*{})^({}))*exp({p2}*t)", q - 1.0, -p2);
            Arc::new(ExprFamily::build(
                [&fixed1, &fixed2],
                [&fixed1, &free2],
                1.0,
                (-4.0, 4.0),
                (-6.0, 6.0),
            )?)
        }
        Preset::ExampleA => Arc::new(ExprFamily::build(
            ["exp(t) + exp(t/2)", "exp(2*t) + 2*exp(3*t/2)"],
            ["exp(t)", "exp(2*t)"],
            1.0,
            (-40.0, 2.0),
            (-60.0, 4.0),
        )?),
        Preset::ExampleB => Arc::new(ExprFamily::build(
            ["t", "(1 + t + t*t)*exp(-t*t)"],
            ["-t*t", "exp(-t*t)"],
            1.0,
            (-10.0, -2.0),
            (-12.5, -0.3),
        )?),
        Preset::ExampleC => Arc::new(ExprFamily::build(
            [
                "t + t*t/(1 + t*t)",
                "exp(-t)/(1 + t*t)",
            ],
            ["t", "exp(-t)"],
            1.0,
            (-40.0, -0.8),
            (-44.0, 6.0),
        )?),
        Preset::Custom {
            fixed,
            free,
            eps_max,
        } => Arc::new(ExprFamily::build(
            [&fixed[0], &fixed[1]],
            [&free[0], &free[1]],
            *eps_max,
            (-12.0, 12.0),
            (-16.0, 16.0),
        )?),
    };
    Ok(DomainSpec::new(family, preset.clone()))
}
