//! Eigenvalue data of the two saddle-foci and the constants of the return map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Magnitudes of the linearisation at the two saddle-foci.
///
/// `c1`, `e1` are the contracting and expanding rates at the first
/// equilibrium, `c2`, `e2` at the second; `omega_spin` is the imaginary part
/// of the complex pair (the same at both foci).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleValues {
    pub c1: f64,
    pub e1: f64,
    pub c2: f64,
    pub e2: f64,
    pub omega_spin: f64,
}

impl SaddleValues {
    pub fn new(c1: f64, e1: f64, c2: f64, e2: f64, omega_spin: f64) -> Result<Self> {
        let sv = Self {
            c1,
            e1,
            c2,
            e2,
            omega_spin,
        };
        sv.validate()?;
        Ok(sv)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("C1", self.c1),
            ("E1", self.e1),
            ("C2", self.c2),
            ("E2", self.e2),
            ("omega", self.omega_spin),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidSaddleValue { name, value });
            }
        }
        let delta = (self.c1 * self.c2) / (self.e1 * self.e2);
        if delta <= 1.0 {
            return Err(Error::NotWeaklyAttracting { delta });
        }
        Ok(())
    }
}

/// Constants entering the truncated return map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapConstants {
    pub delta1: f64,
    pub delta2: f64,
    /// Product `delta1 * delta2`, strictly greater than one.
    pub delta: f64,
    /// Spin factor `(C1 + E2) / (E1 E2)` multiplying `omega` in the angular shift.
    pub k: f64,
    /// Global maximum of `G_l`, `delta^(1/(1-delta)) - delta^(delta/(1-delta))`.
    pub m: f64,
    /// Expanding rates, kept for the individual local maps.
    pub e1: f64,
    pub e2: f64,
}

impl MapConstants {
    /// Constants from `delta` and `K` alone, for callers that never look at the
    /// individual saddle ratios. The split is symmetric: `delta1 = delta2 = sqrt(delta)`.
    pub fn from_delta_k(delta: f64, k: f64) -> Result<Self> {
        if !delta.is_finite() || delta <= 1.0 {
            return Err(Error::NotWeaklyAttracting { delta });
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidSaddleValue { name: "K", value: k });
        }
        let half = delta.sqrt();
        // 1/E1 + delta1/E2 = K with E1 = E2
        let e = (1.0 + half) / k;
        Ok(Self {
            delta1: half,
            delta2: half,
            delta,
            k,
            m: max_of_g(delta),
            e1: e,
            e2: e,
        })
    }
}

/// `delta^(1/(1-delta)) - delta^(delta/(1-delta))`.
pub fn max_of_g(delta: f64) -> f64 {
    let e = 1.0 / (1.0 - delta);
    delta.powf(e) - delta.powf(delta * e)
}

pub fn derive_constants(sv: &SaddleValues) -> Result<MapConstants> {
    sv.validate()?;
    let delta1 = sv.c1 / sv.e1;
    let delta2 = sv.c2 / sv.e2;
    let delta = delta1 * delta2;
    Ok(MapConstants {
        delta1,
        delta2,
        delta,
        k: (sv.c1 + sv.e2) / (sv.e1 * sv.e2),
        m: max_of_g(delta),
        e1: sv.e1,
        e2: sv.e2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_saddles() {
        let sv = SaddleValues::new(1.1, 0.9, 1.1, 0.9, 1.0).unwrap();
        let c = derive_constants(&sv).unwrap();
        assert!((c.delta1 - 1.1 / 0.9).abs() < 1e-15);
        assert!((c.delta2 - 1.1 / 0.9).abs() < 1e-15);
        // (11/9)^2 = 121/81, K = 2/0.81 = 200/81
        assert!((c.delta - 121.0 / 81.0).abs() < 1e-14);
        assert!((c.k - 200.0 / 81.0).abs() < 1e-14);
        assert!((c.delta - 1.4938).abs() < 1e-4);
        assert!((c.k - 2.4691).abs() < 1e-4);
        assert!(c.m > 0.0 && c.m < 1.0);
    }

    #[test]
    fn both_spellings_of_k_agree() {
        let sv = SaddleValues::new(1.3, 0.7, 2.1, 1.9, 0.5).unwrap();
        let c = derive_constants(&sv).unwrap();
        let k_alt = (sv.e2 + sv.c1) / (sv.e1 * sv.e2);
        assert_eq!(c.k, k_alt);
    }

    #[test]
    fn from_delta_k_is_consistent() {
        let c = MapConstants::from_delta_k(3.0, 2.0).unwrap();
        assert!((c.delta1 * c.delta2 - 3.0).abs() < 1e-14);
        assert!((1.0 / c.e1 + c.delta1 / c.e2 - 2.0).abs() < 1e-14);
        assert!(MapConstants::from_delta_k(1.0, 1.0).is_err());
        assert!(MapConstants::from_delta_k(3.0, 0.0).is_err());
    }

    #[test]
    fn delta_one_is_rejected() {
        // C1 = E2, E1 = C2 gives delta = 1 exactly.
        let err = SaddleValues::new(0.8, 1.25, 1.25, 0.8, 1.0).unwrap_err();
        assert!(matches!(err, Error::NotWeaklyAttracting { .. }));
        assert!(err.to_string().contains("not weakly attracting"));
    }

    #[test]
    fn non_positive_input_is_rejected() {
        assert!(matches!(
            SaddleValues::new(-1.0, 1.0, 1.0, 1.0, 1.0),
            Err(Error::InvalidSaddleValue { name: "C1", .. })
        ));
        assert!(SaddleValues::new(1.0, 1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn m_for_delta_three() {
        let m = max_of_g(3.0);
        let expected = 3f64.powf(-0.5) - 3f64.powf(-1.5);
        assert!((m - expected).abs() < 1e-15);
        assert!((m - 0.384900).abs() < 1e-6);
    }

    #[test]
    fn m_matches_brute_force_maximum() {
        // G(w) = exp(-2 pi / w) - exp(-2 pi delta / w), K = l = 1
        let delta = 3.0;
        let g = |w: f64| {
            (-2.0 * std::f64::consts::PI / w).exp()
                - (-2.0 * std::f64::consts::PI * delta / w).exp()
        };
        let best = (1..200_000)
            .map(|i| g(i as f64 * 1e-4))
            .fold(f64::MIN, f64::max);
        assert!((best - max_of_g(delta)).abs() < 1e-9);
    }
}
