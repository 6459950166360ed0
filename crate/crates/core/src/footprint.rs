//! Energy-based carbon estimate.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FootprintInput {
    pub power_w: f64,
    pub duration_h: f64,
    /// Power usage effectiveness; 1.0 for a home machine.
    pub pue: f64,
    pub carbon_intensity_g_per_kwh: f64,
}

impl FootprintInput {
    pub fn new(power_w: f64, duration_h: f64, pue: f64, carbon_intensity_g_per_kwh: f64) -> Result<Self> {
        let input = Self { power_w, duration_h, pue, carbon_intensity_g_per_kwh };
        input.validate()?;
        Ok(input)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [self.power_w, self.duration_h, self.pue, self.carbon_intensity_g_per_kwh];
        if fields.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidArgument("footprint inputs must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

/// Kilograms of CO₂-equivalent: W × h × PUE × g/kWh × 10⁻⁶.
pub fn co2_estimate(input: &FootprintInput) -> f64 {
    input.power_w * input.duration_h * input.pue * input.carbon_intensity_g_per_kwh * 1e-6
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_rig() {
        let kg = co2_estimate(&FootprintInput::new(350.0, 4.5, 1.0, 57.0).unwrap());
        assert!((kg - 0.089775).abs() < 1e-12);
        assert!((kg - 0.09).abs() < 0.005);
        let with_host = co2_estimate(&FootprintInput::new(425.0, 4.5, 1.0, 57.0).unwrap());
        assert!((with_host - 0.11).abs() < 0.005);
        assert_eq!(co2_estimate(&FootprintInput::new(0.0, 4.5, 1.0, 57.0).unwrap()), 0.0);
        assert!(FootprintInput::new(-1.0, 1.0, 1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn linear_in_each_argument(p in 0.0f64..1000.0, t in 0.0f64..24.0, pue in 1.0f64..2.0, ci in 0.0f64..900.0, s in 0.0f64..5.0) {
            let est = |power_w, duration_h, pue, carbon_intensity_g_per_kwh| {
                co2_estimate(&FootprintInput { power_w, duration_h, pue, carbon_intensity_g_per_kwh })
            };
            let base = est(p, t, pue, ci);
            let tol = 1e-9 * (1.0 + base * s);
            let scaled = [est(p * s, t, pue, ci), est(p, t * s, pue, ci), est(p, t, pue * s, ci), est(p, t, pue, ci * s)];
            for v in scaled {
                prop_assert!((v - base * s).abs() < tol);
            }
        }
    }
}
