use geodesic_lab::geodesic_flow::{integrate_geodesic, PhasePoint};
use geodesic_lab::jacobi::TransferPath;
use geodesic_lab::numeric::Vec2;
use geodesic_lab::surface::{Profile, SurfaceMetric};
use std::f64::consts::PI;

fn main() {
    let m = SurfaceMetric::revolution(Profile::Cosh, -1.5, 1.5);
    let start = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.0), 0.0);
    let waist = integrate_geodesic(&m, &start, 2.0 * PI).unwrap();
    let path = TransferPath::over_closed(&m, &waist, 10.0).unwrap();
    for k in 0..360 {
        let theta = PI * k as f64 / 360.0;
        let v = Vec2::new(theta.cos(), theta.sin());
        match path.crossings(v, 0.0, path.t_end()) {
            Ok(_) => {}
            Err(e) => {
                println!("k={k} theta={theta:.6}: {e}");
                // inspect propagation near the failure
                let data = path.propagate(v);
                for (t, s) in data.iter().filter(|(t, _)| (*t - 18.448).abs() < 0.08) {
                    println!("  t={t:.4} J={:9.3e} J'={:9.3e}", s.j, s.jp);
                }
                break;
            }
        }
    }
}
