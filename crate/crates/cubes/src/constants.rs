//! Every numeric constraint and derived constant used by the construction,
//! in one auditable place. Each admissible bound carries the formula it
//! enforces so reports can quote exactly what was checked.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One admissible upper bound on delta or a0, with its closed form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bound {
    /// Which parameter the bound constrains: "delta" or "a0".
    pub parameter: String,
    /// Closed form in terms of A0 (and C1, C3 where applicable).
    pub formula: String,
    pub value: f64,
}

/// All structural constants derived from A0, plus the chosen delta and a0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantLedger {
    pub a0_quasi: f64,
    /// Outer-ball coefficient: A0 + 3*A0^3 + 2*A0^4.
    pub c1: f64,
    /// Strong inner-ball radius coefficient: 1/(4*A0^2).
    pub c3: f64,
    /// Boundary-family distance coefficient: A0^2*(C1 + C5).
    pub c4: f64,
    /// Boundary-scale coefficient: 1/(8*A0^4).
    pub c5: f64,
    /// Ancestor center drift coefficient: 2*A0.
    pub drift: f64,
    pub delta_sup: f64,
    pub a0_sup: f64,
    pub delta: f64,
    pub a0: f64,
    pub relaxed: bool,
    /// Individual bounds the chosen parameters violate (relaxed mode only).
    pub violated_bounds: Vec<String>,
    /// All admissible bounds, for report annotation.
    pub bounds: Vec<Bound>,
}

impl ConstantLedger {
    /// C6 depends on delta, so it is computed on demand for reports:
    /// A0*(C1 + C4) / (delta * C5).
    pub fn c6(&self) -> f64 {
        self.a0_quasi * (self.c1 + self.c4) / (self.delta * self.c5)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("A0          = {}\n", self.a0_quasi));
        out.push_str(&format!("C1          = {}   (A0 + 3*A0^3 + 2*A0^4)\n", self.c1));
        out.push_str(&format!("C3          = {}   (1/(4*A0^2))\n", self.c3));
        out.push_str(&format!("C4          = {}   (A0^2*(C1 + C5))\n", self.c4));
        out.push_str(&format!("C5          = {}   (1/(8*A0^4))\n", self.c5));
        out.push_str(&format!("C6          = {}   (A0*(C1 + C4)/(delta*C5))\n", self.c6()));
        out.push_str(&format!("drift coeff = {}   (2*A0)\n", self.drift));
        out.push_str(&format!("delta_sup   = {}\n", self.delta_sup));
        out.push_str(&format!("a0_sup      = {}\n", self.a0_sup));
        out.push_str(&format!("delta       = {}\n", self.delta));
        out.push_str(&format!("a0          = {}\n", self.a0));
        out.push_str(&format!("relaxed     = {}\n", self.relaxed));
        for b in &self.bounds {
            out.push_str(&format!(
                "  bound: {} < {} = {}\n",
                b.parameter, b.formula, b.value
            ));
        }
        for v in &self.violated_bounds {
            out.push_str(&format!("  VIOLATED: {v}\n"));
        }
        out
    }
}

fn delta_bounds(a0q: f64, c1: f64, c3: f64) -> Vec<Bound> {
    vec![
        Bound {
            parameter: "delta".into(),
            formula: "1/(2*A0)".into(),
            value: 1.0 / (2.0 * a0q),
        },
        Bound {
            parameter: "delta".into(),
            formula: "1/(8*A0^3)".into(),
            value: 1.0 / (8.0 * a0q.powi(3)),
        },
        Bound {
            parameter: "delta".into(),
            formula: "1/(4*A0^2*C1)".into(),
            value: 1.0 / (4.0 * a0q.powi(2) * c1),
        },
        Bound {
            parameter: "delta".into(),
            formula: "C3/(3*A0^3*C1)".into(),
            value: c3 / (3.0 * a0q.powi(3) * c1),
        },
    ]
}

fn a0_bounds(a0q: f64) -> Vec<Bound> {
    vec![
        Bound {
            parameter: "a0".into(),
            formula: "1/(2*A0)".into(),
            value: 1.0 / (2.0 * a0q),
        },
        Bound {
            parameter: "a0".into(),
            formula: "3/(4*A0)".into(),
            value: 3.0 / (4.0 * a0q),
        },
        Bound {
            parameter: "a0".into(),
            formula: "1/(8*A0^3)".into(),
            value: 1.0 / (8.0 * a0q.powi(3)),
        },
        Bound {
            parameter: "a0".into(),
            formula: "1/(8*A0^4)".into(),
            value: 1.0 / (8.0 * a0q.powi(4)),
        },
    ]
}

/// Populate the ledger from A0. Omitted delta/a0 default to half their
/// suprema. In non-relaxed mode out-of-range parameters are errors naming
/// the violated bound; in relaxed mode they are recorded for the verifier.
pub fn derive_constants(
    a0_quasi: f64,
    delta: Option<f64>,
    a0: Option<f64>,
    relaxed: bool,
) -> Result<ConstantLedger> {
    if !(a0_quasi >= 1.0) {
        return Err(Error::Input(format!("A0 must be >= 1, got {a0_quasi}")));
    }
    let c1 = a0_quasi + 3.0 * a0_quasi.powi(3) + 2.0 * a0_quasi.powi(4);
    let c3 = 1.0 / (4.0 * a0_quasi.powi(2));
    let c5 = 1.0 / (8.0 * a0_quasi.powi(4));
    let c4 = a0_quasi.powi(2) * (c1 + c5);

    let d_bounds = delta_bounds(a0_quasi, c1, c3);
    let a_bounds = a0_bounds(a0_quasi);
    let delta_sup = d_bounds.iter().map(|b| b.value).fold(f64::INFINITY, f64::min);
    let a0_sup = a_bounds.iter().map(|b| b.value).fold(f64::INFINITY, f64::min);

    let delta = delta.unwrap_or(delta_sup / 2.0);
    let a0 = a0.unwrap_or(a0_sup / 2.0);
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Input(format!("delta must lie in (0,1), got {delta}")));
    }
    if !(a0 > 0.0 && a0 < 1.0) {
        return Err(Error::Input(format!("a0 must lie in (0,1), got {a0}")));
    }

    let mut violated = Vec::new();
    for b in &d_bounds {
        if !(delta < b.value) {
            violated.push(format!("delta = {} is not < {} = {}", delta, b.formula, b.value));
        }
    }
    for b in &a_bounds {
        if !(a0 < b.value) {
            violated.push(format!("a0 = {} is not < {} = {}", a0, b.formula, b.value));
        }
    }
    if !relaxed && !violated.is_empty() {
        return Err(Error::Constraint(violated.join("; ")));
    }

    let mut bounds = d_bounds;
    bounds.extend(a_bounds);
    Ok(ConstantLedger {
        a0_quasi,
        c1,
        c3,
        c4,
        c5,
        drift: 2.0 * a0_quasi,
        delta_sup,
        a0_sup,
        delta,
        a0,
        relaxed,
        violated_bounds: violated,
        bounds,
    })
}

/// Generation range for a concrete space: coarsest k with scale above the
/// diameter, finest k with scale at or below the minimum separation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleLadder {
    pub delta: f64,
    pub k_min: i32,
    pub k_max: i32,
}

impl ScaleLadder {
    pub fn scale(&self, k: i32) -> f64 {
        self.delta.powi(k)
    }

    pub fn generations(&self) -> impl Iterator<Item = i32> {
        self.k_min..=self.k_max
    }

    pub fn generation_count(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }
}

/// k_min is the largest integer with delta^k_min > diam; k_max the smallest
/// with delta^k_max <= min_sep. Single-point spaces (diam = 0) get (0, 0).
pub fn scale_ladder(delta: f64, diam: f64, min_sep: f64) -> Result<ScaleLadder> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Input(format!("delta must lie in (0,1), got {delta}")));
    }
    if diam == 0.0 {
        return Ok(ScaleLadder {
            delta,
            k_min: 0,
            k_max: 0,
        });
    }
    if !(min_sep > 0.0 && diam > 0.0) {
        return Err(Error::Input("diam and min_sep must be positive".into()));
    }
    // Seed from logs, then fix up with exact powi comparisons.
    let mut k_min = (diam.ln() / delta.ln()).floor() as i32;
    while !(delta.powi(k_min) > diam) {
        k_min -= 1;
    }
    while delta.powi(k_min + 1) > diam {
        k_min += 1;
    }
    let mut k_max = (min_sep.ln() / delta.ln()).ceil() as i32;
    while !(delta.powi(k_max) <= min_sep) {
        k_max += 1;
    }
    while k_max > k_min && delta.powi(k_max - 1) <= min_sep {
        k_max -= 1;
    }
    debug_assert!(k_min <= k_max);
    Ok(ScaleLadder {
        delta,
        k_min,
        k_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ledger_a0_one() {
        let l = derive_constants(1.0, None, None, false).unwrap();
        assert_eq!(l.c1, 6.0);
        assert_eq!(l.c3, 0.25);
        assert_eq!(l.c5, 0.125);
        assert!((l.delta_sup - 1.0 / 72.0).abs() <= 1e-15 * (1.0 / 72.0));
        assert_eq!(l.a0_sup, 0.125);
        assert_eq!(l.c4, 6.125);
        assert_eq!(l.drift, 2.0);
        assert!(l.violated_bounds.is_empty());
        // defaults sit at half the suprema
        assert_eq!(l.delta, l.delta_sup / 2.0);
        assert_eq!(l.a0, l.a0_sup / 2.0);
    }

    #[test]
    fn ledger_a0_two() {
        let l = derive_constants(2.0, None, None, false).unwrap();
        assert_eq!(l.c1, 58.0);
        assert_eq!(l.c3, 1.0 / 16.0);
        assert_eq!(l.c5, 1.0 / 128.0);
        assert_eq!(l.a0_sup, 1.0 / 128.0);
    }

    #[test]
    fn relaxed_flags_each_violated_bound() {
        let l = derive_constants(1.0, Some(0.5), None, true).unwrap();
        // 0.5 is not < 1/2, and violates the three tighter delta bounds too
        let delta_viol: Vec<_> = l
            .violated_bounds
            .iter()
            .filter(|v| v.starts_with("delta"))
            .collect();
        assert_eq!(delta_viol.len(), 4);
        assert!(delta_viol[0].contains("1/(2*A0)"));
    }

    #[test]
    fn strict_mode_rejects_out_of_range() {
        let err = derive_constants(1.0, Some(0.5), None, false).unwrap_err();
        assert!(err.to_string().contains("1/(2*A0)"));
        assert!(derive_constants(0.5, None, None, false).is_err());
    }

    #[test]
    fn delta_sup_is_always_the_chain_bound() {
        // C3/(3*A0^3*C1) = 1/(12*A0^5*C1) is strictly the smallest delta bound.
        for a0q in [1.0, 1.5, 2.0, 4.0] {
            let l = derive_constants(a0q, None, None, false).unwrap();
            let chain = l.c3 / (3.0 * a0q.powi(3) * l.c1);
            assert_eq!(l.delta_sup, chain);
            assert!((chain - 1.0 / (12.0 * a0q.powi(5) * l.c1)).abs() < 1e-15 * chain);
            assert_eq!(l.a0_sup, 1.0 / (8.0 * a0q.powi(4)));
        }
    }

    #[test]
    fn ladder_examples() {
        let l = scale_ladder(1.0 / 144.0, 7.0, 1.0).unwrap();
        assert_eq!((l.k_min, l.k_max), (-1, 0));
        let l = scale_ladder(1.0 / 144.0, 7.0, 0.5).unwrap();
        assert_eq!((l.k_min, l.k_max), (-1, 1));
        let l = scale_ladder(0.3, 0.0, f64::INFINITY).unwrap();
        assert_eq!((l.k_min, l.k_max), (0, 0));
        assert!(scale_ladder(1.5, 7.0, 1.0).is_err());
    }

    #[test]
    fn ladder_scales_are_monotone() {
        let l = scale_ladder(0.5, 21.2, 1.0).unwrap();
        assert!(l.scale(l.k_min) > 21.2);
        assert!(l.scale(l.k_max) <= 1.0);
        for k in l.k_min..l.k_max {
            assert!(l.scale(k) > l.scale(k + 1));
        }
    }
}
