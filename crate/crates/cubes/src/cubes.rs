//! Cube materialization: every cube is the union of balls
//! `B(z(l,beta), a0*delta^l)` over the descendants (l,beta) of its node.
//! Members are accumulated bottom-up through the parent links.

use serde::{Deserialize, Serialize};

use crate::constants::{scale_ladder, ConstantLedger, ScaleLadder};
use crate::error::{Error, Result};
use crate::nets::{build_net, Net, ScanOrder};
use crate::order::{link_generations, OrderTree};
use crate::space::FiniteSpace;
use crate::util::BitSet;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct Cube {
    pub k: i32,
    pub alpha: usize,
    /// Point index of the center z(k, alpha).
    pub center: usize,
    pub members: BitSet,
    /// Sorted member point indices.
    pub member_list: Vec<usize>,
    /// Sum of member weights.
    pub measure: f64,
    /// Exact max pairwise distance among members.
    pub diameter: f64,
}

impl Cube {
    pub fn key(&self) -> (i32, usize) {
        (self.k, self.alpha)
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.contains(x)
    }

    fn from_members(space: &FiniteSpace, k: i32, alpha: usize, center: usize, members: BitSet) -> Self {
        let member_list = members.to_vec();
        let measure = space.measure_of(member_list.iter().copied());
        let diameter = if member_list.len() < 2 {
            0.0
        } else {
            space.diam_subset(&member_list).expect("members valid")
        };
        Cube {
            k,
            alpha,
            center,
            members,
            member_list,
            measure,
            diameter,
        }
    }
}

/// Fully materialized decomposition: ladder, nets, order tree, and per-
/// generation cube families. Immutable after construction; fields are
/// public for the verifier and for fault-injection tests.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub space: FiniteSpace,
    pub ledger: ConstantLedger,
    pub ladder: ScaleLadder,
    pub nets: Vec<Net>,
    pub tree: OrderTree,
    /// generations[i] holds the cubes of generation k_min + i, indexed by alpha.
    pub generations: Vec<Vec<Cube>>,
}

impl Decomposition {
    pub fn gen_index(&self, k: i32) -> Result<usize> {
        if k < self.ladder.k_min || k > self.ladder.k_max {
            return Err(Error::Input(format!(
                "generation {k} outside ladder [{}, {}]",
                self.ladder.k_min, self.ladder.k_max
            )));
        }
        Ok((k - self.ladder.k_min) as usize)
    }

    pub fn cubes_at(&self, k: i32) -> Result<&[Cube]> {
        Ok(&self.generations[self.gen_index(k)?])
    }

    pub fn cube(&self, k: i32, alpha: usize) -> Result<&Cube> {
        self.cubes_at(k)?
            .get(alpha)
            .ok_or_else(|| Error::Input(format!("no cube ({k}, {alpha})")))
    }

    pub fn all_cubes(&self) -> impl Iterator<Item = &Cube> {
        self.generations.iter().flatten()
    }

    /// The unique generation-k cube containing x, or `None` iff x is
    /// uncovered at k. When the finest net exhausts the space each point is
    /// its own leaf center and location follows the ancestor chain; that
    /// path and the linear scan are cross-checked in tests.
    pub fn locate(&self, x: usize, k: i32) -> Result<Option<(i32, usize)>> {
        self.gen_index(k)?;
        let leaf_net = &self.nets[self.nets.len() - 1];
        if leaf_net.len() == self.space.len() {
            if let Some(leaf_alpha) = leaf_net.centers.iter().position(|&z| z == x) {
                let node = self.tree.ancestor_of(self.ladder.k_max, leaf_alpha, k)?;
                // ancestor chain and membership agree when coverage is exact;
                // fall through to the scan if the located cube disowns x
                if self.cube(node.0, node.1)?.contains(x) {
                    return Ok(Some(node));
                }
            }
        }
        self.locate_by_scan(x, k)
    }

    /// Linear scan of generation k.
    pub fn locate_by_scan(&self, x: usize, k: i32) -> Result<Option<(i32, usize)>> {
        Ok(self
            .cubes_at(k)?
            .iter()
            .find(|c| c.contains(x))
            .map(|c| c.key()))
    }

    pub fn children_of(&self, k: i32, alpha: usize) -> Result<Vec<&Cube>> {
        if k >= self.ladder.k_max {
            return Ok(Vec::new());
        }
        let child_gen = self.cubes_at(k + 1)?;
        Ok(child_gen
            .iter()
            .filter(|c| self.tree.parent_of(k + 1, c.alpha) == Some((k, alpha)))
            .collect())
    }

    /// Points of X not covered by generation k.
    pub fn uncovered(&self, k: i32) -> Result<Vec<usize>> {
        let cubes = self.cubes_at(k)?;
        let mut covered = BitSet::new(self.space.len());
        for c in cubes {
            covered.union_with(&c.members);
        }
        Ok((0..self.space.len()).filter(|&i| !covered.contains(i)).collect())
    }

    /// Union of all generations' uncovered sets; its complement realizes the
    /// covered core of the space.
    pub fn uncovered_any(&self) -> Vec<usize> {
        self.uncovered_any_set().to_vec()
    }

    pub fn uncovered_any_set(&self) -> BitSet {
        let mut out = BitSet::new(self.space.len());
        for k in self.ladder.generations() {
            for x in self.uncovered(k).expect("k in ladder") {
                out.insert(x);
            }
        }
        out
    }

    /// Members of the cube within `t * delta^k` of its complement, and their
    /// mass. An empty complement puts every member at distance +infinity, so
    /// the layer is empty.
    pub fn boundary_layer(&self, k: i32, alpha: usize, t: f64) -> Result<(Vec<usize>, f64)> {
        if !(t > 0.0) {
            return Err(Error::Input(format!("t must be positive, got {t}")));
        }
        let cube = self.cube(k, alpha)?;
        let complement: Vec<usize> = (0..self.space.len())
            .filter(|&i| !cube.contains(i))
            .collect();
        let threshold = t * self.ladder.scale(k);
        let mut members = Vec::new();
        for &x in &cube.member_list {
            let d = self.space.dist_point_set(x, &complement)?;
            if d <= threshold {
                members.push(x);
            }
        }
        let mass = self.space.measure_of(members.iter().copied());
        Ok((members, mass))
    }

    /// Per-member distance to the cube's complement, for reuse across a
    /// grid of t values.
    pub fn complement_distances(&self, k: i32, alpha: usize) -> Result<Vec<(usize, f64)>> {
        let cube = self.cube(k, alpha)?;
        let complement: Vec<usize> = (0..self.space.len())
            .filter(|&i| !cube.contains(i))
            .collect();
        cube.member_list
            .iter()
            .map(|&x| Ok((x, self.space.dist_point_set(x, &complement)?)))
            .collect()
    }

    /// Strong inner ball: `B(z, C3*delta^k)` restricted to the covered core
    /// must land inside the cube; also checks the plain inner ball
    /// `B(z, a0*delta^k)` is contained.
    pub fn strong_inner_ball_check(&self, k: i32, alpha: usize) -> Result<InnerBallCheck> {
        let uncovered = self.uncovered_any_set();
        self.strong_inner_ball_check_with(k, alpha, &uncovered)
    }

    /// Same check with the uncovered set precomputed, for suite-wide scans.
    pub fn strong_inner_ball_check_with(
        &self,
        k: i32,
        alpha: usize,
        uncovered: &BitSet,
    ) -> Result<InnerBallCheck> {
        let cube = self.cube(k, alpha)?;
        let scale = self.ladder.scale(k);
        for x in self.space.ball_members(cube.center, self.ledger.c3 * scale)? {
            if !uncovered.contains(x) && !cube.contains(x) {
                return Ok(InnerBallCheck::StrongFail {
                    witness: x,
                    located: self.locate_by_scan(x, k)?,
                });
            }
        }
        for x in self.space.ball_members(cube.center, self.ledger.a0 * scale)? {
            if !cube.contains(x) {
                return Ok(InnerBallCheck::InnerFail { witness: x });
            }
        }
        Ok(InnerBallCheck::Pass)
    }

    /// Decomposition dump: one record per cube
    /// `k alpha center_id member_count measure diameter parent_alpha`.
    pub fn dump_cubes(&self) -> String {
        let mut out = String::new();
        for gen in &self.generations {
            for c in gen {
                let parent = match self.tree.parent_of(c.k, c.alpha) {
                    Some((_, beta)) => beta.to_string(),
                    None => "-".to_string(),
                };
                out.push_str(&format!(
                    "{} {} {} {} {} {} {}\n",
                    c.k,
                    c.alpha,
                    self.space.id(c.center),
                    c.member_list.len(),
                    crate::util::fmt_f64(c.measure),
                    crate::util::fmt_f64(c.diameter),
                    parent
                ));
            }
        }
        out
    }

    /// Member lists keyed by `k:alpha`.
    pub fn dump_members(&self) -> String {
        let mut out = String::new();
        for gen in &self.generations {
            for c in gen {
                out.push_str(&format!("{}:{}", c.k, c.alpha));
                for &x in &c.member_list {
                    out.push(' ');
                    out.push_str(self.space.id(x));
                }
                out.push('\n');
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InnerBallCheck {
    Pass,
    StrongFail {
        witness: usize,
        located: Option<(i32, usize)>,
    },
    InnerFail {
        witness: usize,
    },
}

/// Build nets for every generation of the ladder.
pub fn build_all_nets(
    space: &FiniteSpace,
    ladder: &ScaleLadder,
    order: ScanOrder,
    nested: bool,
) -> Result<Vec<Net>> {
    let mut nets: Vec<Net> = Vec::with_capacity(ladder.generation_count());
    for k in ladder.generations() {
        let sep = ladder.scale(k);
        let net = if nested {
            let seed: Vec<usize> = nets.last().map(|n: &Net| n.centers.clone()).unwrap_or_default();
            crate::nets::build_net_seeded(space, k, sep, order, &seed)?
        } else {
            build_net(space, k, sep, order)?
        };
        nets.push(net);
    }
    Ok(nets)
}

/// Materialize the full decomposition from a space and a ledger. Aborts if
/// two same-generation cubes intersect, naming the violating pair.
pub fn materialize(space: FiniteSpace, ledger: ConstantLedger, order: ScanOrder, nested: bool) -> Result<Decomposition> {
    let (diam, min_sep) = space.diam_and_min_sep();
    let ladder = scale_ladder(ledger.delta, diam, min_sep)?;
    let nets = build_all_nets(&space, &ladder, order, nested)?;
    let tree = link_generations(&space, &nets, &ledger)?;
    materialize_with(space, ledger, ladder, nets, tree)
}

/// Materialize from pre-built parts (also the reload path for artifacts).
pub fn materialize_with(
    space: FiniteSpace,
    ledger: ConstantLedger,
    ladder: ScaleLadder,
    nets: Vec<Net>,
    tree: OrderTree,
) -> Result<Decomposition> {
    let n = space.len();
    let mut generations: Vec<Vec<Cube>> = Vec::with_capacity(nets.len());

    // Bottom-up: leaf cubes are plain balls; each coarser cube is its ball
    // unioned with its children's member sets.
    let mut child_sets: Vec<BitSet> = Vec::new();
    for (i, net) in nets.iter().enumerate().rev() {
        let scale = ladder.scale(net.k);
        let radius = ledger.a0 * scale;
        let mut sets: Vec<BitSet> = net
            .centers
            .iter()
            .map(|&z| {
                let mut s = BitSet::new(n);
                for x in space.ball_members(z, radius)? {
                    s.insert(x);
                }
                Ok(s)
            })
            .collect::<Result<_>>()?;
        if i + 1 < nets.len() {
            let link = &tree.links[i]; // links[i] maps generation k+1 -> k
            for (child_alpha, &parent_alpha) in link.parent.iter().enumerate() {
                let child = child_sets[child_alpha].clone();
                sets[parent_alpha].union_with(&child);
            }
        }
        child_sets = sets.clone();
        let build_cube = |(alpha, members): (usize, BitSet)| {
            Cube::from_members(&space, net.k, alpha, net.centers[alpha], members)
        };
        #[cfg(feature = "parallel")]
        let cubes: Vec<Cube> = sets.into_par_iter().enumerate().map(|(a, m)| build_cube((a, m))).collect();
        #[cfg(not(feature = "parallel"))]
        let cubes: Vec<Cube> = sets.into_iter().enumerate().map(build_cube).collect();
        generations.push(cubes);
    }
    generations.reverse();

    // same-generation overlap aborts construction
    for gen in &generations {
        for (a, ca) in gen.iter().enumerate() {
            for cb in &gen[a + 1..] {
                if ca.members.intersects(&cb.members) {
                    return Err(Error::Materialize(format!(
                        "cubes ({}, {}) and ({}, {}) share members; \
                         parameter constraints are violated",
                        ca.k, ca.alpha, cb.k, cb.alpha
                    )));
                }
            }
        }
    }

    Ok(Decomposition {
        space,
        ledger,
        ladder,
        nets,
        tree,
        generations,
    })
}
