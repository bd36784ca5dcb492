//! On-disk artifact layout shared by `build`, `verify`, and `query`.
//!
//! JSON files carry everything needed to reassemble a decomposition without
//! rebuilding it; the text dumps (`nets.txt`, `tree.txt`, `tree.dot`,
//! `cubes.txt`, `members.txt`) are the line-oriented formats for external
//! tools and independent oracles. Nothing here embeds timestamps, so two
//! identical runs produce byte-identical directories.

use std::fs;
use std::path::Path;

use crate::constants::{ConstantLedger, ScaleLadder};
use crate::cubes::{Cube, Decomposition};
use crate::error::{Error, Result};
use crate::nets::Net;
use crate::order::OrderTree;
use crate::space::FiniteSpace;
use crate::util::BitSet;

pub fn save(dir: &Path, dec: &Decomposition) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("space.json"), serde_json::to_string_pretty(&dec.space)?)?;
    fs::write(dir.join("ledger.json"), serde_json::to_string_pretty(&dec.ledger)?)?;
    fs::write(dir.join("ledger.txt"), dec.ledger.render_text())?;
    fs::write(dir.join("ladder.json"), serde_json::to_string_pretty(&dec.ladder)?)?;
    fs::write(dir.join("nets.json"), serde_json::to_string_pretty(&dec.nets)?)?;
    fs::write(dir.join("nets.txt"), crate::nets::dump_nets(&dec.space, &dec.nets))?;
    fs::write(dir.join("tree.json"), serde_json::to_string_pretty(&dec.tree)?)?;
    fs::write(dir.join("tree.txt"), crate::order::dump_flat(&dec.tree))?;
    fs::write(
        dir.join("tree.dot"),
        crate::order::dump_dot(&dec.space, &dec.nets, &dec.tree),
    )?;
    fs::write(dir.join("cubes.txt"), dec.dump_cubes())?;
    fs::write(dir.join("members.txt"), dec.dump_members())?;
    Ok(())
}

pub fn load(dir: &Path) -> Result<Decomposition> {
    let read = |name: &str| -> Result<String> {
        fs::read_to_string(dir.join(name))
            .map_err(|e| Error::Input(format!("missing artifact {name}: {e}")))
    };
    let mut space: FiniteSpace = serde_json::from_str(&read("space.json")?)?;
    space.reindex();
    let ledger: ConstantLedger = serde_json::from_str(&read("ledger.json")?)?;
    let ladder: ScaleLadder = serde_json::from_str(&read("ladder.json")?)?;
    let nets: Vec<Net> = serde_json::from_str(&read("nets.json")?)?;
    let tree: OrderTree = serde_json::from_str(&read("tree.json")?)?;

    // member lists come from the dump, not from re-materialization
    let mut generations: Vec<Vec<Cube>> = nets.iter().map(|_| Vec::new()).collect();
    for line in read("members.txt")?.lines() {
        let mut fields = line.split(' ');
        let key = fields
            .next()
            .ok_or_else(|| Error::Input("empty members.txt line".into()))?;
        let (k, alpha) = key
            .split_once(':')
            .ok_or_else(|| Error::Input(format!("bad cube key '{key}'")))?;
        let k: i32 = k
            .parse()
            .map_err(|_| Error::Input(format!("bad generation in '{key}'")))?;
        let alpha: usize = alpha
            .parse()
            .map_err(|_| Error::Input(format!("bad index in '{key}'")))?;
        let gi = (k - ladder.k_min) as usize;
        let net = nets
            .get(gi)
            .ok_or_else(|| Error::Input(format!("cube key '{key}' outside ladder")))?;
        let mut members = BitSet::new(space.len());
        for id in fields {
            members.insert(space.resolve(id)?);
        }
        let member_list = members.to_vec();
        let measure = space.measure_of(member_list.iter().copied());
        let diameter = if member_list.len() < 2 {
            0.0
        } else {
            space.diam_subset(&member_list)?
        };
        let center = *net
            .centers
            .get(alpha)
            .ok_or_else(|| Error::Input(format!("cube key '{key}' has no net center")))?;
        generations[gi].push(Cube {
            k,
            alpha,
            center,
            members,
            member_list,
            measure,
            diameter,
        });
    }
    for (gi, gen) in generations.iter_mut().enumerate() {
        gen.sort_by_key(|c| c.alpha);
        if gen.len() != nets[gi].len() {
            return Err(Error::Input(format!(
                "generation {} has {} cubes but {} net centers",
                nets[gi].k,
                gen.len(),
                nets[gi].len()
            )));
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

pub fn save_report(dir: &Path, report: &crate::verify::VerificationReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)?)?;
    fs::write(dir.join("report.txt"), report.render_text())?;
    Ok(())
}
