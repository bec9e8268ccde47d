//! Local sections of the geodesic flow along a closed geodesic: the
//! transversal is the meridian through γ(t₀) (a geodesic of every
//! Fermi-form metric), coordinates are (position along the transversal,
//! angle relative to the base direction).

use crate::closed_orbits::ClosedGeodesicRecord;
use crate::error::{Error, Result};
use crate::geodesic_flow::{integrate_until, PhasePoint};
use crate::numeric::Vec2;
use crate::surface::SurfaceMetric;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Above,
    Below,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Above => 1.0,
            Side::Below => -1.0,
        }
    }
}

/// Orientation of the asymptotic geodesics relative to the base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    Same,
    Reversed,
}

/// Section of the flow at γ(t₀), coordinatized by (u, θ): footpoint at
/// distance u along the meridian transversal, direction at angle θ from
/// the (possibly reversed) base direction.
#[derive(Debug, Clone)]
pub struct SectionChart {
    pub base_point: Vec2,
    /// Frame angle of the base direction at the footpoint column.
    pub base_angle: f64,
    /// s-coordinate of the transversal meridian.
    pub s0: f64,
    /// Transversality margin: angle between base direction and the
    /// transversal (must stay away from 0).
    pub transversality_angle: f64,
}

impl SectionChart {
    /// Section at parameter t0 of the record, with the given orientation.
    pub fn at(
        metric: &SurfaceMetric,
        record: &ClosedGeodesicRecord,
        t0: f64,
        orientation: Orientation,
    ) -> Result<SectionChart> {
        let p = record.trajectory.state_at(t0);
        let mut base_angle = metric.frame_angle(p.pos, p.vel);
        if orientation == Orientation::Reversed {
            base_angle += std::f64::consts::PI;
        }
        // The transversal meridian runs along +t (frame angle π/2).
        let gap = (base_angle - std::f64::consts::FRAC_PI_2).sin().abs();
        if gap < 0.1 {
            return Err(Error::Precondition(format!(
                "base direction too close to the transversal: margin {gap}"
            )));
        }
        Ok(SectionChart {
            base_point: p.pos,
            base_angle,
            s0: p.pos.x,
            transversality_angle: gap.asin(),
        })
    }

    /// Phase point of section coordinates (u, θ).
    pub fn point(&self, metric: &SurfaceMetric, u: f64, theta: f64) -> PhasePoint {
        let pos = Vec2::new(self.s0, self.base_point.y + u);
        PhasePoint::from_angle(metric, pos, self.base_angle + theta)
    }

    /// Section coordinates of a phase point on the transversal.
    pub fn coords(&self, metric: &SurfaceMetric, p: &PhasePoint) -> (f64, f64) {
        let u = p.pos.y - self.base_point.y;
        let mut dtheta =
            (metric.frame_angle(p.pos, p.vel) - self.base_angle).rem_euclid(std::f64::consts::TAU);
        if dtheta > std::f64::consts::PI {
            dtheta -= std::f64::consts::TAU;
        }
        (u, dtheta)
    }

    /// First return to the section (crossing of the transversal meridian
    /// in the base direction's s-orientation). Errors when the orbit
    /// leaves the chart before returning.
    pub fn first_return(
        &self,
        metric: &SurfaceMetric,
        from: &PhasePoint,
        t_max: f64,
    ) -> Result<Option<(f64, PhasePoint)>> {
        let period = metric.s_period();
        let s0 = self.s0;
        let forward_s = self.base_angle.cos() >= 0.0;
        let mut t_from = 0.0;
        let mut state = *from;
        // Repeat until a crossing passes the orientation filter.
        for _ in 0..64 {
            let event = |_t: f64, p: &PhasePoint| {
                (2.0 * std::f64::consts::PI * (p.pos.x - s0) / period).sin()
            };
            let hit = integrate_until(metric, &state, t_max - t_from, 0.05, &event)?;
            match hit {
                None => return Ok(None),
                Some(h) => {
                    let wrapped = metric
                        .displacement(Vec2::new(s0, h.state.pos.y), h.state.pos)
                        .x;
                    let s_dir_ok = (h.state.vel.x >= 0.0) == forward_s;
                    if wrapped.abs() < period / 4.0 && s_dir_ok {
                        return Ok(Some((t_from + h.t, h.state)));
                    }
                    t_from += h.t;
                    state = h.state;
                    if t_from >= t_max {
                        return Ok(None);
                    }
                }
            }
        }
        Err(Error::ShrinkSection(
            "return search exceeded crossing budget".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_orbits::finder::equator_record;
    use crate::surface::Profile;
    use std::f64::consts::PI;

    #[test]
    fn return_map_fixes_the_origin() {
        let m = SurfaceMetric::revolution(Profile::Cosh, -1.5, 1.5);
        let rec = equator_record(&m, 0.0).unwrap();
        let chart = SectionChart::at(&m, &rec, 0.0, Orientation::Same).unwrap();
        let origin = chart.point(&m, 0.0, 0.0);
        let (t, back) = chart
            .first_return(&m, &origin, 10.0)
            .unwrap()
            .expect("waist orbit returns");
        assert!((t - 2.0 * PI).abs() < 1e-6);
        let (u, th) = chart.coords(&m, &back);
        assert!(u.abs() < 1e-9 && th.abs() < 1e-9);
    }

    #[test]
    fn return_map_expands_along_unstable_direction() {
        let m = SurfaceMetric::revolution(Profile::Cosh, -1.5, 1.5);
        let rec = equator_record(&m, 0.0).unwrap();
        let chart = SectionChart::at(&m, &rec, 0.0, Orientation::Same).unwrap();
        // (J, J') along the expanding eigendirection (1, 1): u = ε, θ ≈ ε.
        let eps = 1e-5;
        let x = chart.point(&m, eps, eps);
        let (_, back) = chart.first_return(&m, &x, 10.0).unwrap().unwrap();
        let (u, _) = chart.coords(&m, &back);
        let expansion = u / eps;
        let expected = (2.0 * PI).exp();
        assert!(
            (expansion - expected).abs() / expected < 1e-2,
            "expansion {expansion} vs {expected}"
        );
    }
}
