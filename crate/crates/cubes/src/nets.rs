//! Maximal separated center sets, one per generation, with an exhaustive
//! maximality/separation checker and packing counts.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::FiniteSpace;

/// Scan order for greedy admission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanOrder {
    ById,
    SeededShuffle(u64),
}

/// One generation's maximal separated center set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Net {
    pub k: i32,
    pub separation: f64,
    /// Center point indices, in admission order; position = index alpha.
    pub centers: Vec<usize>,
    pub order: ScanOrder,
}

impl Net {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// Greedy first-fit scan: admit a point iff it is at distance >= separation
/// from every admitted center. Maximal by construction; ties at exactly the
/// separation admit the point. `seed_centers` are scanned first, which
/// reproduces nested-net constructions when fed the previous generation.
pub fn build_net_seeded(
    space: &FiniteSpace,
    k: i32,
    separation: f64,
    order: ScanOrder,
    seed_centers: &[usize],
) -> Result<Net> {
    if !(separation > 0.0) {
        return Err(Error::Input(format!(
            "separation must be positive, got {separation}"
        )));
    }
    let mut scan: Vec<usize> = (0..space.len()).collect();
    if let ScanOrder::SeededShuffle(seed) = order {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        scan.shuffle(&mut rng);
    }
    let mut centers: Vec<usize> = Vec::new();
    for &cand in seed_centers.iter().chain(scan.iter()) {
        if centers
            .iter()
            .all(|&c| space.dist(cand, c) >= separation)
        {
            centers.push(cand);
        }
    }
    Ok(Net {
        k,
        separation,
        centers,
        order,
    })
}

pub fn build_net(space: &FiniteSpace, k: i32, separation: f64, order: ScanOrder) -> Result<Net> {
    build_net_seeded(space, k, separation, order, &[])
}

/// Outcome of the separation/maximality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NetCheck {
    Pass,
    /// Two subset points closer than the separation.
    SeparationViolation { a: usize, b: usize, dist: f64 },
    /// A point at distance >= separation from every subset point.
    NotMaximal { addable: usize },
}

/// Exhaustive check of both net conditions. A pass certifies that every
/// point of the space lies within `separation` of the subset.
pub fn check_maximal_separated(
    space: &FiniteSpace,
    subset: &[usize],
    separation: f64,
) -> Result<NetCheck> {
    if let Some(&bad) = subset.iter().find(|&&i| i >= space.len()) {
        return Err(Error::Input(format!("point index {bad} out of range")));
    }
    for (i, &a) in subset.iter().enumerate() {
        for &b in &subset[i + 1..] {
            let d = space.dist(a, b);
            if d < separation {
                return Ok(NetCheck::SeparationViolation { a, b, dist: d });
            }
        }
    }
    for x in 0..space.len() {
        if subset.iter().all(|&c| space.dist(x, c) >= separation) {
            return Ok(NetCheck::NotMaximal { addable: x });
        }
    }
    Ok(NetCheck::Pass)
}

/// Number of net centers inside `B(x, K * separation)`.
pub fn packing_count(space: &FiniteSpace, net: &Net, x: usize, big_k: f64) -> usize {
    let radius = big_k * net.separation;
    net.centers
        .iter()
        .filter(|&&z| space.dist(x, z) < radius)
        .count()
}

/// Max packing count over all points of the space.
pub fn max_packing_count(space: &FiniteSpace, net: &Net, big_k: f64) -> usize {
    (0..space.len())
        .map(|x| packing_count(space, net, x, big_k))
        .max()
        .unwrap_or(0)
}

/// Net dump format: one line `k alpha point_id` in construction order.
pub fn dump_nets(space: &FiniteSpace, nets: &[Net]) -> String {
    let mut out = String::new();
    for net in nets {
        for (alpha, &z) in net.centers.iter().enumerate() {
            out.push_str(&format!("{} {} {}\n", net.k, alpha, space.id(z)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::line8;

    #[test]
    fn greedy_traces_on_line8() {
        let s = line8();
        let n1 = build_net(&s, 0, 1.0, ScanOrder::ById).unwrap();
        assert_eq!(n1.centers, (0..8).collect::<Vec<_>>());
        let n2 = build_net(&s, 0, 2.0, ScanOrder::ById).unwrap();
        assert_eq!(n2.centers, vec![0, 2, 4, 6]);
        let n3 = build_net(&s, 0, 100.0, ScanOrder::ById).unwrap();
        assert_eq!(n3.centers, vec![0]);
    }

    #[test]
    fn maximality_checker() {
        let s = line8();
        assert_eq!(
            check_maximal_separated(&s, &[0, 2, 4, 6], 2.0).unwrap(),
            NetCheck::Pass
        );
        assert_eq!(
            check_maximal_separated(&s, &[0, 4], 2.0).unwrap(),
            NetCheck::NotMaximal { addable: 2 }
        );
        assert_eq!(
            check_maximal_separated(&s, &[0, 1], 2.0).unwrap(),
            NetCheck::SeparationViolation {
                a: 0,
                b: 1,
                dist: 1.0
            }
        );
    }

    #[test]
    fn built_nets_always_pass_check() {
        let s = line8();
        for sep in [0.5, 1.0, 2.0, 3.5, 100.0] {
            for order in [ScanOrder::ById, ScanOrder::SeededShuffle(7)] {
                let net = build_net(&s, 0, sep, order).unwrap();
                assert_eq!(
                    check_maximal_separated(&s, &net.centers, sep).unwrap(),
                    NetCheck::Pass,
                    "sep={sep} order={order:?}"
                );
            }
        }
    }

    #[test]
    fn coarser_separation_never_grows_the_net() {
        let s = line8();
        let mut prev = usize::MAX;
        for sep in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let n = build_net(&s, 0, sep, ScanOrder::ById).unwrap().len();
            assert!(n <= prev);
            prev = n;
        }
    }

    #[test]
    fn packing_counts() {
        let s = line8();
        let all = build_net(&s, 0, 1.0, ScanOrder::ById).unwrap();
        assert_eq!(packing_count(&s, &all, 0, 2.0), 2);
        let sparse = build_net(&s, 0, 2.0, ScanOrder::ById).unwrap();
        assert_eq!(packing_count(&s, &sparse, 0, 2.0), 2);
        assert_eq!(packing_count(&s, &all, 0, 1e-9), 1);
    }

    #[test]
    fn seeded_scan_reproduces_nested_net() {
        let s = line8();
        let coarse = build_net(&s, -1, 4.0, ScanOrder::ById).unwrap();
        let fine = build_net_seeded(&s, 0, 2.0, ScanOrder::ById, &coarse.centers).unwrap();
        for z in &coarse.centers {
            assert!(fine.centers.contains(z));
        }
        assert_eq!(
            check_maximal_separated(&s, &fine.centers, 2.0).unwrap(),
            NetCheck::Pass
        );
    }
}
