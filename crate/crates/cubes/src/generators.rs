//! Deterministic fixture generators:
//! `grid:WxH[:spacing]`, `line:N`, `uniform:N:seed`,
//! `clustered:N:clusters:seed`, `snowflake(inner, eps)`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::space::{FiniteSpace, Metric};

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Grid { w: usize, h: usize, spacing: f64 },
    Line { n: usize },
    Uniform { n: usize, seed: u64 },
    Clustered { n: usize, clusters: usize, seed: u64 },
    Snowflake { inner: Box<GeneratorSpec>, eps: f64 },
}

pub fn parse_spec(text: &str) -> Result<GeneratorSpec> {
    let text = text.trim();
    if let Some(rest) = text.strip_prefix("snowflake(") {
        let body = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::Input(format!("unbalanced parens in '{text}'")))?;
        let comma = body
            .rfind(',')
            .ok_or_else(|| Error::Input(format!("snowflake needs (inner, eps): '{text}'")))?;
        let inner = parse_spec(&body[..comma])?;
        let eps: f64 = body[comma + 1..]
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("bad snowflake exponent in '{text}'")))?;
        if !(eps >= 1.0) {
            return Err(Error::Input(format!("snowflake exponent must be >= 1, got {eps}")));
        }
        return Ok(GeneratorSpec::Snowflake {
            inner: Box::new(inner),
            eps,
        });
    }
    let parts: Vec<&str> = text.split(':').collect();
    let usage = || Error::Input(format!("malformed generator spec '{text}'"));
    match parts.as_slice() {
        ["grid", dims] | ["grid", dims, _] => {
            let (w, h) = dims.split_once('x').ok_or_else(usage)?;
            let w: usize = w.parse().map_err(|_| usage())?;
            let h: usize = h.parse().map_err(|_| usage())?;
            let spacing: f64 = if parts.len() == 3 {
                parts[2].parse().map_err(|_| usage())?
            } else {
                1.0
            };
            if w == 0 || h == 0 || !(spacing > 0.0) {
                return Err(usage());
            }
            Ok(GeneratorSpec::Grid { w, h, spacing })
        }
        ["line", n] => Ok(GeneratorSpec::Line {
            n: n.parse().map_err(|_| usage())?,
        }),
        ["uniform", n, seed] => Ok(GeneratorSpec::Uniform {
            n: n.parse().map_err(|_| usage())?,
            seed: seed.parse().map_err(|_| usage())?,
        }),
        ["clustered", n, clusters, seed] => Ok(GeneratorSpec::Clustered {
            n: n.parse().map_err(|_| usage())?,
            clusters: clusters.parse().map_err(|_| usage())?,
            seed: seed.parse().map_err(|_| usage())?,
        }),
        _ => Err(usage()),
    }
}

fn coords_of(spec: &GeneratorSpec) -> Result<Vec<Vec<f64>>> {
    match spec {
        GeneratorSpec::Grid { w, h, spacing } => {
            let mut coords = Vec::with_capacity(w * h);
            for y in 0..*h {
                for x in 0..*w {
                    coords.push(vec![x as f64 * spacing, y as f64 * spacing]);
                }
            }
            Ok(coords)
        }
        GeneratorSpec::Line { n } => {
            if *n == 0 {
                return Err(Error::Input("line:N needs N >= 1".into()));
            }
            Ok((0..*n).map(|i| vec![i as f64]).collect())
        }
        GeneratorSpec::Uniform { n, seed } => {
            if *n == 0 {
                return Err(Error::Input("uniform:N needs N >= 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok((0..*n)
                .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
                .collect())
        }
        GeneratorSpec::Clustered { n, clusters, seed } => {
            if *n == 0 || *clusters == 0 {
                return Err(Error::Input("clustered needs N >= 1 and clusters >= 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let centers: Vec<(f64, f64)> = (0..*clusters)
                .map(|_| (rng.gen::<f64>(), rng.gen::<f64>()))
                .collect();
            Ok((0..*n)
                .map(|i| {
                    let (cx, cy) = centers[i % clusters];
                    // box-muller around the cluster center
                    let u1: f64 = rng.gen::<f64>().max(1e-12);
                    let u2: f64 = rng.gen();
                    let r = (-2.0 * u1.ln()).sqrt() * 0.02;
                    vec![
                        cx + r * (2.0 * std::f64::consts::PI * u2).cos(),
                        cy + r * (2.0 * std::f64::consts::PI * u2).sin(),
                    ]
                })
                .collect())
        }
        GeneratorSpec::Snowflake { inner, .. } => coords_of(inner),
    }
}

fn metric_of(spec: &GeneratorSpec) -> (Metric, f64) {
    match spec {
        GeneratorSpec::Snowflake { inner, eps } => {
            let (base, base_a0) = metric_of(inner);
            // (a+b)^eps <= 2^(eps-1) * (a^eps + b^eps)
            let a0 = base_a0.powf(*eps) * 2.0f64.powf(eps - 1.0);
            (
                Metric::Snowflake {
                    base: Box::new(base),
                    eps: *eps,
                },
                a0,
            )
        }
        _ => (Metric::Euclidean, 1.0),
    }
}

/// Build the fixture: unit weights, ids `p0..p{n-1}`, declared A0 from the
/// metric (1 for true metrics, 2^(eps-1)-scaled for snowflakes).
pub fn generate(spec: &GeneratorSpec) -> Result<FiniteSpace> {
    let coords = coords_of(spec)?;
    let (metric, declared_a0) = metric_of(spec);
    let n = coords.len();
    let ids = (0..n).map(|i| format!("p{i}")).collect();
    FiniteSpace::new(ids, Some(coords), metric, vec![1.0; n], declared_a0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{validate_quasimetric, ValidationMode};

    #[test]
    fn grid_8x1_is_line8() {
        let s = generate(&parse_spec("grid:8x1").unwrap()).unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(s.dist(0, 7), 7.0);
        let line = generate(&parse_spec("line:8").unwrap()).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(s.dist(i, j), line.dist(i, j));
            }
        }
    }

    #[test]
    fn snowflake_declared_a0_matches_empirical() {
        let s = generate(&parse_spec("snowflake(line:3, 2)").unwrap()).unwrap();
        assert_eq!(s.declared_a0(), 2.0);
        let rep = validate_quasimetric(&s, ValidationMode::Exhaustive).unwrap();
        assert!(rep.a0_emp <= s.declared_a0() + 1e-15);
        assert!((rep.a0_emp - 2.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_is_reproducible() {
        let a = generate(&parse_spec("uniform:100:42").unwrap()).unwrap();
        let b = generate(&parse_spec("uniform:100:42").unwrap()).unwrap();
        assert_eq!(a.len(), 100);
        for i in 0..100 {
            assert_eq!(a.coords().unwrap()[i], b.coords().unwrap()[i]);
        }
        let c = generate(&parse_spec("uniform:100:43").unwrap()).unwrap();
        assert_ne!(a.coords().unwrap()[0], c.coords().unwrap()[0]);
    }

    #[test]
    fn clustered_and_spacing() {
        let s = generate(&parse_spec("clustered:50:4:7").unwrap()).unwrap();
        assert_eq!(s.len(), 50);
        let g = generate(&parse_spec("grid:3x3:0.5").unwrap()).unwrap();
        assert_eq!(g.dist(0, 1), 0.5);
    }

    #[test]
    fn malformed_specs() {
        for bad in ["", "grid:8", "grid:0x3", "line:x", "uniform:10", "snowflake(line:3", "blob:9"] {
            assert!(parse_spec(bad).is_err(), "{bad}");
        }
    }
}
