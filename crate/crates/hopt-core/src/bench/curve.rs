//! Crash-curve metrics: specific energy absorption and crush force
//! efficiency over sampled force-deflection curves.
//!
//! Absorbed energy is the trapezoidal integral of force over deflection.
//! SEA divides it by structural mass (J/kg); CFE is the mean crushing
//! force (energy over stroke) divided by the peak force, a number in
//! (0, 1] where 1 is a perfectly rectangular crush response.

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::util::{fmt_f64, parse_f64};

/// A sampled force-deflection curve plus the mass of the crushed
/// structure. Deflections rise strictly from zero; forces are finite and
/// non-negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceDeflectionCurve {
    deflections_m: Vec<f64>,
    forces_n: Vec<f64>,
    mass_kg: f64,
}

impl ForceDeflectionCurve {
    pub fn new(
        deflections_m: Vec<f64>,
        forces_n: Vec<f64>,
        mass_kg: f64,
    ) -> Result<Self, BenchError> {
        let bad = |msg: String| Err(BenchError::Curve(msg));
        if deflections_m.len() != forces_n.len() {
            return bad(format!(
                "{} deflection samples but {} force samples",
                deflections_m.len(),
                forces_n.len()
            ));
        }
        if deflections_m.len() < 2 {
            return bad("a curve needs at least two samples".into());
        }
        if deflections_m[0] != 0.0 {
            return bad(format!("deflection must start at 0, got {}", deflections_m[0]));
        }
        for pair in deflections_m.windows(2) {
            if !(pair[1] > pair[0]) || !pair[1].is_finite() {
                return bad(format!(
                    "deflections must increase strictly: {} then {}",
                    pair[0], pair[1]
                ));
            }
        }
        for f in &forces_n {
            if !f.is_finite() || *f < 0.0 {
                return bad(format!("forces must be finite and non-negative, got {f}"));
            }
        }
        if !(mass_kg > 0.0) || !mass_kg.is_finite() {
            return bad(format!("mass must be positive, got {mass_kg}"));
        }
        Ok(ForceDeflectionCurve { deflections_m, forces_n, mass_kg })
    }

    pub fn deflections_m(&self) -> &[f64] {
        &self.deflections_m
    }

    pub fn forces_n(&self) -> &[f64] {
        &self.forces_n
    }

    pub fn mass_kg(&self) -> f64 {
        self.mass_kg
    }

    /// Total stroke: the final (largest) deflection, meters.
    pub fn stroke_m(&self) -> f64 {
        *self.deflections_m.last().expect("validated: at least 2 samples")
    }

    pub fn peak_force_n(&self) -> f64 {
        self.forces_n.iter().fold(0.0f64, |a, &b| a.max(b))
    }

    /// Trapezoidal ∫F dx over the full stroke, joules.
    pub fn absorbed_energy_j(&self) -> f64 {
        self.deflections_m
            .windows(2)
            .zip(self.forces_n.windows(2))
            .map(|(x, f)| 0.5 * (f[0] + f[1]) * (x[1] - x[0]))
            .sum()
    }
}

/// Specific energy absorption: absorbed energy per unit mass, J/kg.
pub fn compute_sea(curve: &ForceDeflectionCurve) -> f64 {
    curve.absorbed_energy_j() / curve.mass_kg()
}

/// Crush force efficiency: mean crushing force over peak force. Errors on
/// an all-zero force history, where the ratio is undefined.
pub fn compute_cfe(curve: &ForceDeflectionCurve) -> Result<f64, BenchError> {
    let peak = curve.peak_force_n();
    if peak == 0.0 {
        return Err(BenchError::Curve(
            "crush force efficiency is undefined for an all-zero force curve".into(),
        ));
    }
    let mean = curve.absorbed_energy_j() / curve.stroke_m();
    Ok(mean / peak)
}

/// Serializes a curve as a two-column CSV (deflection, force); the mass
/// travels in a JSON sidecar written by the caller.
pub fn curve_to_csv(curve: &ForceDeflectionCurve) -> String {
    let mut out = String::from("deflection_m,force_n\n");
    for (x, f) in curve.deflections_m().iter().zip(curve.forces_n()) {
        out.push_str(&format!("{},{}\n", fmt_f64(*x), fmt_f64(*f)));
    }
    out
}

/// Parses [`curve_to_csv`] output. `mass_kg` comes from the sidecar.
pub fn curve_from_csv(text: &str, mass_kg: f64) -> Result<ForceDeflectionCurve, BenchError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "deflection_m,force_n")) => {}
        _ => {
            return Err(BenchError::Curve(
                "line 1: expected header `deflection_m,force_n`".into(),
            ))
        }
    }
    let mut xs = Vec::new();
    let mut fs = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        let (Some(x), Some(f), None) = (cells.next(), cells.next(), cells.next()) else {
            return Err(BenchError::Curve(format!("line {}: expected 2 columns", idx + 1)));
        };
        xs.push(parse_f64(x).map_err(|e| {
            BenchError::Curve(format!("line {}: bad deflection `{x}`: {e}", idx + 1))
        })?);
        fs.push(parse_f64(f).map_err(|e| {
            BenchError::Curve(format!("line {}: bad force `{f}`: {e}", idx + 1))
        })?);
    }
    ForceDeflectionCurve::new(xs, fs, mass_kg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled(f: impl Fn(f64) -> f64, n: usize, stroke: f64, mass: f64) -> ForceDeflectionCurve {
        let xs: Vec<f64> = (0..=n).map(|i| stroke * i as f64 / n as f64).collect();
        let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        ForceDeflectionCurve::new(xs, fs, mass).unwrap()
    }

    #[test]
    fn constant_force_hand_values() {
        // 10 kN over 0.2 m on 2 kg: energy 2000 J, SEA 1000 J/kg, CFE 1.
        let curve = sampled(|_| 10_000.0, 4, 0.2, 2.0);
        assert!((compute_sea(&curve) - 1000.0).abs() < 1e-12);
        assert!((compute_cfe(&curve).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn linear_ramp_has_half_efficiency() {
        // Trapezoid rule is exact on a straight line, so CFE is exactly
        // the triangle ratio regardless of sampling.
        for n in [2, 7, 100] {
            let curve = sampled(|x| 5.0e4 * x, n, 0.31, 1.7);
            assert!((compute_cfe(&curve).unwrap() - 0.5).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn refinement_barely_moves_smooth_curves() {
        let f = |x: f64| 3.0e4 * (1.0 + 0.4 * (9.0 * x).sin()) * (1.0 - 0.3 * x);
        let coarse = sampled(f, 400, 0.25, 2.2);
        let fine = sampled(f, 800, 0.25, 2.2);
        let (s1, s2) = (compute_sea(&coarse), compute_sea(&fine));
        assert!((s1 - s2).abs() <= 1e-4 * s2.abs());
        let (c1, c2) = (
            compute_cfe(&coarse).unwrap(),
            compute_cfe(&fine).unwrap(),
        );
        assert!((c1 - c2).abs() <= 1e-4 * c2.abs());
    }

    #[test]
    fn efficiency_stays_in_unit_interval() {
        use rand::Rng;
        let mut rng = crate::util::seeded_rng(4, 0);
        for _ in 0..50 {
            let n = rng.gen_range(2..40);
            let xs: Vec<f64> = {
                let mut acc = vec![0.0];
                for _ in 0..n {
                    let last = *acc.last().unwrap();
                    acc.push(last + rng.gen_range(1e-4..0.02));
                }
                acc
            };
            let fs: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.0..9.0e4)).collect();
            let curve = ForceDeflectionCurve::new(xs, fs, rng.gen_range(0.5..4.0)).unwrap();
            let cfe = compute_cfe(&curve).unwrap();
            assert!(cfe > 0.0 && cfe <= 1.0, "cfe {cfe}");
        }
    }

    #[test]
    fn invalid_curves_are_rejected() {
        // Non-monotone deflection.
        assert!(ForceDeflectionCurve::new(vec![0.0, 0.2, 0.1], vec![1.0; 3], 1.0).is_err());
        // Not starting at zero.
        assert!(ForceDeflectionCurve::new(vec![0.1, 0.2], vec![1.0; 2], 1.0).is_err());
        // Negative force.
        assert!(ForceDeflectionCurve::new(vec![0.0, 0.1], vec![1.0, -2.0], 1.0).is_err());
        // Bad mass, too few samples, length mismatch.
        assert!(ForceDeflectionCurve::new(vec![0.0, 0.1], vec![1.0; 2], 0.0).is_err());
        assert!(ForceDeflectionCurve::new(vec![0.0], vec![1.0], 1.0).is_err());
        assert!(ForceDeflectionCurve::new(vec![0.0, 0.1], vec![1.0; 3], 1.0).is_err());
        // All-zero force: SEA is zero, CFE undefined.
        let flat = ForceDeflectionCurve::new(vec![0.0, 0.1], vec![0.0; 2], 1.0).unwrap();
        assert_eq!(compute_sea(&flat), 0.0);
        assert!(compute_cfe(&flat).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let curve = sampled(|x| 2.0e4 * (1.0 + (7.3 * x).cos().abs()), 37, 0.23, 1.9);
        let text = curve_to_csv(&curve);
        let back = curve_from_csv(&text, curve.mass_kg()).unwrap();
        assert_eq!(curve, back);
        assert_eq!(curve_to_csv(&back), text);

        let err = curve_from_csv("deflection_m,force_n\n0.0,1.0\nnope,2\n", 1.0);
        let msg = format!("{}", err.unwrap_err());
        assert!(msg.contains("line 3"), "{msg}");
        assert!(curve_from_csv("bad header\n", 1.0).is_err());
    }
}
