//! Parent links between consecutive generations of net centers. A node
//! (k, alpha) links to the unique coarser center within (1/(2*A0))*delta^(k-1)
//! when one exists, otherwise to the nearest center within delta^(k-1).

use serde::{Deserialize, Serialize};

use crate::constants::ConstantLedger;
use crate::error::{Error, Result};
use crate::nets::Net;
use crate::space::FiniteSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// Fired the (1/(2*A0))*delta^(k-1) rule; the candidate is unique.
    Near,
    /// No near candidate; nearest center within delta^(k-1), ties broken by
    /// smallest index.
    Fallback,
}

/// Parent links for one generation k: `parent[alpha]` is the index beta of
/// the node's parent in generation k-1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationLink {
    pub k: i32,
    pub parent: Vec<usize>,
    pub branch: Vec<Branch>,
}

/// The partial order restricted to consecutive generations. The full
/// relation is the transitive closure of these parent chains.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderTree {
    pub k_min: i32,
    pub k_max: i32,
    /// links[i] holds generation k_min + 1 + i.
    pub links: Vec<GenerationLink>,
}

impl OrderTree {
    fn link_for(&self, k: i32) -> &GenerationLink {
        &self.links[(k - self.k_min - 1) as usize]
    }

    pub fn parent_of(&self, k: i32, alpha: usize) -> Option<(i32, usize)> {
        if k <= self.k_min || k > self.k_max {
            return None;
        }
        Some((k - 1, self.link_for(k).parent[alpha]))
    }

    pub fn branch_of(&self, k: i32, alpha: usize) -> Option<Branch> {
        if k <= self.k_min || k > self.k_max {
            return None;
        }
        Some(self.link_for(k).branch[alpha])
    }

    /// Unique ancestor of (k, alpha) in generation l <= k; reflexive at l = k.
    pub fn ancestor_of(&self, k: i32, alpha: usize, l: i32) -> Result<(i32, usize)> {
        if l < self.k_min || l > k || k > self.k_max {
            return Err(Error::Input(format!(
                "generation {l} outside [{}, {k}]",
                self.k_min
            )));
        }
        let mut node = (k, alpha);
        while node.0 > l {
            node = self
                .parent_of(node.0, node.1)
                .expect("non-root node has a parent");
        }
        Ok(node)
    }

    /// Whether (l, beta) is related below (k, alpha), i.e. the ancestor chain
    /// of (l, beta) passes through (k, alpha). Reflexive.
    pub fn descends(&self, l: i32, beta: usize, k: i32, alpha: usize) -> bool {
        l >= k && self.ancestor_of(l, beta, k).map(|a| a.1 == alpha).unwrap_or(false)
    }
}

/// Build the parent map for every consecutive pair of generations.
/// `nets[i]` must hold generation k_min + i with separation delta^k.
pub fn link_generations(
    space: &FiniteSpace,
    nets: &[Net],
    ledger: &ConstantLedger,
) -> Result<OrderTree> {
    if nets.is_empty() {
        return Err(Error::Input("no nets to link".into()));
    }
    let k_min = nets[0].k;
    let k_max = nets[nets.len() - 1].k;
    let mut links = Vec::with_capacity(nets.len() - 1);
    for w in nets.windows(2) {
        let (coarse, fine) = (&w[0], &w[1]);
        debug_assert_eq!(fine.k, coarse.k + 1);
        let scale_coarse = coarse.separation; // delta^(k-1)
        let near_radius = scale_coarse / (2.0 * ledger.a0_quasi);
        let mut parent = Vec::with_capacity(fine.len());
        let mut branch = Vec::with_capacity(fine.len());
        for (alpha, &z) in fine.centers.iter().enumerate() {
            let near: Vec<usize> = coarse
                .centers
                .iter()
                .enumerate()
                .filter(|(_, &c)| space.dist(z, c) < near_radius)
                .map(|(beta, _)| beta)
                .collect();
            match near.as_slice() {
                [beta] => {
                    parent.push(*beta);
                    branch.push(Branch::Near);
                }
                [] => {
                    // nearest center within delta^(k-1); smallest index on ties
                    let mut best: Option<(f64, usize)> = None;
                    for (beta, &c) in coarse.centers.iter().enumerate() {
                        let d = space.dist(z, c);
                        if d < scale_coarse && best.map(|(bd, _)| d < bd).unwrap_or(true) {
                            best = Some((d, beta));
                        }
                    }
                    let (_, beta) = best.ok_or_else(|| {
                        Error::Materialize(format!(
                            "node ({}, {alpha}) has no coarser center within {scale_coarse}; \
                             generation {} net is not maximal",
                            fine.k, coarse.k
                        ))
                    })?;
                    parent.push(beta);
                    branch.push(Branch::Fallback);
                }
                many => {
                    // two near candidates would be closer than delta^(k-1)
                    // to each other, breaking the net separation
                    return Err(Error::Materialize(format!(
                        "node ({}, {alpha}) has {} centers within {near_radius}; \
                         generation {} net separation is broken",
                        fine.k,
                        many.len(),
                        coarse.k
                    )));
                }
            }
        }
        links.push(GenerationLink {
            k: fine.k,
            parent,
            branch,
        });
    }
    Ok(OrderTree {
        k_min,
        k_max,
        links,
    })
}

/// One verified order axiom, with witnesses on failure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomResult {
    pub name: &'static str,
    pub constraint: &'static str,
    pub failures: Vec<String>,
    /// Headline number where meaningful (e.g. max observed drift ratio).
    pub observed: Option<f64>,
}

impl AxiomResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Exhaustive verification of the order axioms and the ancestor drift bound.
pub fn verify_order(
    space: &FiniteSpace,
    nets: &[Net],
    tree: &OrderTree,
    ledger: &ConstantLedger,
) -> Vec<AxiomResult> {
    let mut results = Vec::new();

    // (a) structural: links relate generation k only to k-1, roots have none.
    let mut a = AxiomResult {
        name: "order_axiom_generation",
        constraint: "links relate (k, alpha) only to (k-1, beta)",
        failures: Vec::new(),
        observed: None,
    };
    for (i, link) in tree.links.iter().enumerate() {
        if link.k != tree.k_min + 1 + i as i32 {
            a.failures
                .push(format!("link slot {i} holds generation {}", link.k));
        }
    }
    results.push(a);

    // (b) unique ancestor at every level: parent map total and single-valued.
    let mut b = AxiomResult {
        name: "order_axiom_unique_ancestor",
        constraint: "every node has exactly one ancestor in each coarser generation",
        failures: Vec::new(),
        observed: None,
    };
    for net in nets {
        for alpha in 0..net.len() {
            for l in tree.k_min..=net.k {
                if tree.ancestor_of(net.k, alpha, l).is_err() {
                    b.failures
                        .push(format!("ancestor_of(({}, {alpha}), {l}) undefined", net.k));
                }
            }
            // chain consistency: ancestor at l equals ancestor of ancestor at m
            for m in tree.k_min..=net.k {
                for l in tree.k_min..=m {
                    let direct = tree.ancestor_of(net.k, alpha, l).unwrap();
                    let via = tree.ancestor_of(net.k, alpha, m).unwrap();
                    let two_step = tree.ancestor_of(via.0, via.1, l).unwrap();
                    if direct != two_step {
                        b.failures.push(format!(
                            "chain broken at ({}, {alpha}) via {m}: {direct:?} != {two_step:?}",
                            net.k
                        ));
                    }
                }
            }
        }
    }
    results.push(b);

    // (c) every link spans less than delta^(k-1).
    let mut c = AxiomResult {
        name: "order_axiom_link_distance",
        constraint: "d(z(k,alpha), z(k-1,parent)) < delta^(k-1)",
        failures: Vec::new(),
        observed: None,
    };
    let mut max_link = 0.0f64;
    for (i, link) in tree.links.iter().enumerate() {
        let fine = &nets[i + 1];
        let coarse = &nets[i];
        for (alpha, &beta) in link.parent.iter().enumerate() {
            let d = space.dist(fine.centers[alpha], coarse.centers[beta]);
            max_link = max_link.max(d / coarse.separation);
            if !(d < coarse.separation) {
                c.failures.push(format!(
                    "link ({}, {alpha}) -> ({}, {beta}) spans {d} >= {}",
                    fine.k, coarse.k, coarse.separation
                ));
            }
        }
    }
    c.observed = Some(max_link);
    results.push(c);

    // (d) the near rule is honored: any coarse center within the near radius
    // must be the parent.
    let mut d = AxiomResult {
        name: "order_axiom_near_rule",
        constraint: "d(z(k,alpha), z(k-1,beta)) < delta^(k-1)/(2*A0) forces the link to beta",
        failures: Vec::new(),
        observed: None,
    };
    for (i, link) in tree.links.iter().enumerate() {
        let fine = &nets[i + 1];
        let coarse = &nets[i];
        let near_radius = coarse.separation / (2.0 * ledger.a0_quasi);
        for (alpha, &z) in fine.centers.iter().enumerate() {
            for (beta, &cz) in coarse.centers.iter().enumerate() {
                if space.dist(z, cz) < near_radius && link.parent[alpha] != beta {
                    d.failures.push(format!(
                        "({}, {alpha}) is near ({}, {beta}) but linked to ({}, {})",
                        fine.k, coarse.k, coarse.k, link.parent[alpha]
                    ));
                }
            }
        }
    }
    results.push(d);

    // drift: every descendant center stays within 2*A0*delta^k of its
    // ancestor; the sharper geometric-series bound holds for delta < 1/(2*A0).
    let mut drift = AxiomResult {
        name: "center_drift",
        constraint: "d(z(l,beta), z(k,alpha)) <= 2*A0*delta^k along ancestor chains",
        failures: Vec::new(),
        observed: None,
    };
    let a0q = ledger.a0_quasi;
    let series_bound_applies = ledger.delta < 1.0 / (2.0 * a0q);
    let series_coeff = a0q / (1.0 - a0q * ledger.delta);
    let mut max_ratio = 0.0f64;
    for (i, net) in nets.iter().enumerate() {
        for (beta, &z) in net.centers.iter().enumerate() {
            for (j, anc_net) in nets[..=i].iter().enumerate() {
                if j == i {
                    continue;
                }
                let (_, alpha) = tree.ancestor_of(net.k, beta, anc_net.k).unwrap();
                let d = space.dist(z, anc_net.centers[alpha]);
                let scale = anc_net.separation;
                max_ratio = max_ratio.max(d / scale);
                if !(d <= ledger.drift * scale) {
                    drift.failures.push(format!(
                        "drift ({}, {beta}) vs ancestor ({}, {alpha}): {d} > {}",
                        net.k,
                        anc_net.k,
                        ledger.drift * scale
                    ));
                }
                // sharper series bound A0*delta^k/(1 - A0*delta); scale = delta^k
                if series_bound_applies && !(d <= series_coeff * scale) {
                    drift.failures.push(format!(
                        "series drift ({}, {beta}) vs ({}, {alpha}): {d} > {}",
                        net.k,
                        anc_net.k,
                        series_coeff * scale
                    ));
                }
            }
        }
    }
    drift.observed = Some(max_ratio);
    results.push(drift);

    results
}

/// DOT digraph export; node label `k:alpha:point_id`, edge attribute `branch`.
pub fn dump_dot(space: &FiniteSpace, nets: &[Net], tree: &OrderTree) -> String {
    let mut out = String::from("digraph order {\n");
    for net in nets {
        for (alpha, &z) in net.centers.iter().enumerate() {
            out.push_str(&format!(
                "  \"{}:{}\" [label=\"{}:{}:{}\"];\n",
                net.k,
                alpha,
                net.k,
                alpha,
                space.id(z)
            ));
        }
    }
    for (i, link) in tree.links.iter().enumerate() {
        let fine_k = nets[i + 1].k;
        let coarse_k = nets[i].k;
        for (alpha, &beta) in link.parent.iter().enumerate() {
            let tag = match link.branch[alpha] {
                Branch::Near => "near",
                Branch::Fallback => "fallback",
            };
            out.push_str(&format!(
                "  \"{fine_k}:{alpha}\" -> \"{coarse_k}:{beta}\" [branch=\"{tag}\"];\n"
            ));
        }
    }
    out.push_str("}\n");
    out
}

/// Flat dump: one line `child parent branch` with nodes as `k:alpha`.
pub fn dump_flat(tree: &OrderTree) -> String {
    let mut out = String::new();
    for link in &tree.links {
        for (alpha, &beta) in link.parent.iter().enumerate() {
            let tag = match link.branch[alpha] {
                Branch::Near => "near",
                Branch::Fallback => "fallback",
            };
            out.push_str(&format!("{}:{} {}:{} {}\n", link.k, alpha, link.k - 1, beta, tag));
        }
    }
    out
}
