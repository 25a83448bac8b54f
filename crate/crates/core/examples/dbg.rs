use bellman_foliation::geometry::*;
use bellman_foliation::oracle::*;

fn main() {
    let spec = make_domain(&CurveSpec::Preset(Preset::ParabolicStrip { eps_max: 4.0 })).unwrap();
    let f = BoundaryFunction::from_expr("exp(t)").unwrap();
    let eps = 0.5;
    let closed = |x: Point| -> f64 {
        let d = (x.x*x.x - x.y + eps*eps).sqrt();
        (1.0 - d)/(1.0 - eps)*(x.x - eps + d).exp()
    };
    let opts = OracleOptions { h: 0.02, rows: Some(14), directions: 48, tol: 1e-6, max_sweeps: 4000, x_lo: -1.5, x_hi: 1.5 };
    let grid = grid_value_iteration(&spec, &f, eps, &opts, SideData::Values(&closed)).unwrap();
    println!("sweeps {}", grid.sweeps_used);
    let margin = grid.cols/5;
    for j in [1usize, 5, 9, 13] {
        let (mut wneg, mut wpos) = (0.0f64, 0.0f64);
        let mut at = 0usize;
        for i in margin..grid.cols-margin {
            let p = grid.point(i, j);
            let d = grid.values[i*grid.rows+j] - closed(p);
            if d < wneg { wneg = d; at = i; }
            if d > wpos { wpos = d; }
        }
        println!("row {j}: undershoot {wneg:.3e} (col {at}), overshoot {wpos:.3e}");
    }
    // error along row 9
    let j = 9;
    for i in (margin..grid.cols-margin).step_by(12) {
        let p = grid.point(i, j);
        let d = grid.values[i*grid.rows+j] - closed(p);
        println!("  i={i} x={:.2} err={d:.3e}", p.x);
    }
}
