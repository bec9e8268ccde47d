//! Continuity probe: closed stable geodesics of a bumpy metric persist
//! under shrinking bump perturbations, with displacements vanishing with
//! the amplitude.

use super::finder::{find_closed_geodesics, FinderConfig};
use super::record::Classification;
use crate::error::{Error, Result};
use crate::surface::{Bump, SurfaceMetric};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct VaryProbeReport {
    pub amplitudes: Vec<f64>,
    /// Max phase-space displacement of matched records per amplitude.
    pub max_displacement: Vec<f64>,
    /// Records that found no partner, per amplitude (continuity violation
    /// when nonempty).
    pub unmatched: Vec<usize>,
    pub base_count: usize,
}

/// Re-runs the finder for bump amplitudes shrinking to zero and matches
/// records to the base list by phase-space proximity. Refuses when the
/// base metric is not bumpy below the cap (a degenerate record exists).
pub fn vary_continuity_probe(
    metric: &SurfaceMetric,
    bump: Bump,
    amplitudes: &[f64],
    length_cap: f64,
    cfg: &FinderConfig,
) -> Result<VaryProbeReport> {
    let base = find_closed_geodesics(metric, length_cap, cfg)?;
    if base.iter().any(|r| r.classification == Classification::Degenerate) {
        return Err(Error::Precondition(
            "base metric is not bumpy below the cap: degenerate record present".into(),
        ));
    }
    let mut max_displacement = Vec::new();
    let mut unmatched = Vec::new();
    for &amp in amplitudes {
        let perturbed = if amp == 0.0 {
            metric.clone()
        } else {
            metric.clone().with_bumps(vec![Bump {
                amplitude: amp,
                ..bump
            }])
        };
        let found = find_closed_geodesics(&perturbed, length_cap, cfg)?;
        let mut worst: f64 = 0.0;
        let mut missing = 0usize;
        for b in &base {
            // Distance modulo time shift: nearest state on the candidate.
            let mut best = f64::INFINITY;
            for f in &found {
                if (f.length - b.length).abs() > 0.2 {
                    continue;
                }
                let s = f.start_state();
                let mut d = f64::INFINITY;
                for (_, p) in b.trajectory.samples() {
                    d = d.min(s.distance(metric, &p));
                }
                best = best.min(d);
            }
            if best.is_finite() && best < 0.2 {
                worst = worst.max(best);
            } else {
                missing += 1;
            }
        }
        max_displacement.push(worst);
        unmatched.push(missing);
    }
    Ok(VaryProbeReport {
        amplitudes: amplitudes.to_vec(),
        max_displacement,
        unmatched,
        base_count: base.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Profile;
    use std::f64::consts::PI;

    #[test]
    fn flat_torus_base_is_refused() {
        let m = SurfaceMetric::flat_torus(1.0, 1.0);
        let cfg = FinderConfig::for_metric(&m);
        let bump = Bump {
            center_s: 0.3,
            center_t: 0.3,
            amplitude: 1e-3,
            radius: 0.2,
        };
        let e = vary_continuity_probe(&m, bump, &[1e-3], 1.5, &cfg);
        assert!(matches!(e, Err(Error::Precondition(_))));
    }

    #[test]
    fn torus_equators_persist_under_small_bumps() {
        let m = SurfaceMetric::revolution_periodic(Profile::TorusMinor { major: 2.0 }, 2.0 * PI);
        // Cap below the meridian length (2π) so only the inner equator is
        // in range and the base list is bumpy.
        let mut cfg = FinderConfig::for_metric(&m);
        cfg.n_position = 10;
        cfg.n_angle = 8;
        let cap = 1.9 * PI;
        // Bump placed away from the inner equator at t = π.
        let bump = Bump {
            center_s: 2.0,
            center_t: 0.9,
            amplitude: 0.0,
            radius: 0.5,
        };
        let report =
            vary_continuity_probe(&m, bump, &[1e-3, 1e-4, 0.0], cap, &cfg).unwrap();
        assert_eq!(report.unmatched, vec![0, 0, 0]);
        assert!(report.max_displacement[0] < 0.05);
        assert!(report.max_displacement[2] < 1e-8, "amplitude 0 is identical");
        assert!(
            report.max_displacement[1] <= report.max_displacement[0] + 1e-9,
            "displacement should shrink with amplitude"
        );
    }
}
