//! End-to-end acceptance suite. Each test prints one PASS/FAIL line; run
//! with `--nocapture` to see them. Fixtures are built once and shared.

use std::sync::OnceLock;
use std::time::Instant;

use dyadic_cubes::constants::derive_constants;
use dyadic_cubes::cubes::{materialize, Decomposition};
use dyadic_cubes::generators::{generate, parse_spec};
use dyadic_cubes::nets::ScanOrder;
use dyadic_cubes::verify::{fit_boundary_exponent, run_suite, Status, VerificationReport};
use dyadic_cubes::{artifacts, verify};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FIXTURES: [&str; 4] = [
    "line:8",
    "grid:16x16",
    "uniform:200:42",
    "snowflake(line:64, 2)",
];

fn build_fixture(spec: &str) -> Decomposition {
    let space = generate(&parse_spec(spec).unwrap()).unwrap();
    let ledger = derive_constants(space.declared_a0(), None, None, false).unwrap();
    materialize(space, ledger, ScanOrder::ById, false).unwrap()
}

fn fixtures() -> &'static Vec<(String, Decomposition, VerificationReport)> {
    static CELL: OnceLock<Vec<(String, Decomposition, VerificationReport)>> = OnceLock::new();
    CELL.get_or_init(|| {
        FIXTURES
            .iter()
            .map(|spec| {
                let dec = build_fixture(spec);
                let report = run_suite(&dec);
                (spec.to_string(), dec, report)
            })
            .collect()
    })
}

fn conclude(criterion: usize, what: &str, failures: Vec<String>) {
    let verdict = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("acceptance criterion {criterion}: {verdict} - {what}");
    assert!(
        failures.is_empty(),
        "criterion {criterion} failed:\n{}",
        failures.join("\n")
    );
}

fn require_pass(
    report: &VerificationReport,
    spec: &str,
    names: &[&str],
    failures: &mut Vec<String>,
) {
    for name in names {
        match report.check(name) {
            None => failures.push(format!("{spec}: check '{name}' missing from report")),
            Some(c) if c.status != Status::Pass => failures.push(format!(
                "{spec}: check '{name}' is {:?}; witnesses: {:?}",
                c.status,
                c.witnesses.iter().take(3).collect::<Vec<_>>()
            )),
            _ => {}
        }
    }
}

#[test]
fn criterion_1_constants_ledger() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let ledger = derive_constants(1.0, None, None, false).unwrap();
    let rel = |got: f64, want: f64| ((got - want) / want).abs();
    for (name, got, want) in [
        ("C1", ledger.c1, 6.0),
        ("C3", ledger.c3, 0.25),
        ("C5", ledger.c5, 0.125),
        ("delta_sup", ledger.delta_sup, 1.0 / 72.0),
        ("a0_sup", ledger.a0_sup, 0.125),
    ] {
        if rel(got, want) > 1e-15 {
            failures.push(format!("{name} = {got}, expected {want}"));
        }
    }
    if ledger.bounds.len() != 8 {
        failures.push(format!(
            "expected 8 recorded bounds, found {}",
            ledger.bounds.len()
        ));
    }
    if t0.elapsed().as_secs_f64() >= 1.0 {
        failures.push(format!("took {:?}, budget 1 s", t0.elapsed()));
    }
    conclude(1, "constants ledger matches closed forms exactly", failures);
}

#[test]
fn criterion_2_order_axioms() {
    let mut failures = Vec::new();
    for (spec, _, report) in fixtures() {
        let t0 = Instant::now();
        require_pass(
            report,
            spec,
            &[
                "order_axiom_generation",
                "order_axiom_unique_ancestor",
                "order_axiom_link_distance",
                "order_axiom_near_rule",
                "center_drift",
            ],
            &mut failures,
        );
        if t0.elapsed().as_secs_f64() >= 10.0 {
            failures.push(format!("{spec}: took {:?}, budget 10 s", t0.elapsed()));
        }
    }
    conclude(2, "order axioms and drift bound hold on all fixtures", failures);
}

#[test]
fn criterion_3_cube_property_suite() {
    let mut failures = Vec::new();
    for (spec, _, report) in fixtures() {
        require_pass(
            report,
            spec,
            &[
                "same_generation_disjoint",
                "nesting_subset_or_disjoint",
                "order_containment_equivalence",
                "inner_ball",
                "strong_inner_ball",
                "outer_ball_diameter",
                "order_axiom_unique_ancestor",
                "coverage",
                "children_packing_bound",
            ],
            &mut failures,
        );
    }
    conclude(3, "cube structure suite holds on all fixtures", failures);
}

#[test]
#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail the bound
fn criterion_4_measure_doubling_of_cubes() {
    let mut failures = Vec::new();
    for (spec, dec, report) in fixtures() {
        require_pass(report, spec, &["parent_child_measure_ratio"], &mut failures);
        let mr = verify::check_parent_child_measure(dec, report.a1_emp);
        if !(mr.max_ratio <= mr.bound) {
            failures.push(format!(
                "{spec}: max ratio {} exceeds bound {}",
                mr.max_ratio, mr.bound
            ));
        }
        let a0 = dec.ledger.a0;
        let need = dec.space.declared_a0() * (1.0 + dec.ledger.c1) / dec.ledger.delta;
        if !(2f64.powi(mr.d as i32) * a0 >= need) {
            failures.push(format!("{spec}: d = {} does not satisfy 2^d*a0 >= A0*(1+C1)/delta", mr.d));
        }
    }
    conclude(4, "parent/child measure ratios within doubling bound", failures);
}

// Direct recomputation of one boundary layer from the distance function,
// mirroring the summation order of the implementation so equality is exact.
fn oracle_boundary_layer(dec: &Decomposition, k: i32, alpha: usize, t: f64) -> (Vec<usize>, f64) {
    let cube = dec.cube(k, alpha).unwrap();
    let complement: Vec<usize> = (0..dec.space.len())
        .filter(|&x| !cube.contains(x))
        .collect();
    let scale = dec.ladder.scale(k);
    let mut members = Vec::new();
    for &x in &cube.member_list {
        let d = complement
            .iter()
            .map(|&y| dec.space.dist(x, y))
            .fold(f64::INFINITY, f64::min);
        if d <= t * scale {
            members.push(x);
        }
    }
    let mass = dec.space.measure_of(members.iter().copied());
    (members, mass)
}

#[test]
fn criterion_5_boundary_layers() {
    let mut failures = Vec::new();
    let mut t_grid = verify::default_t_grid();
    assert_eq!(t_grid.len(), 4);
    t_grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (spec, dec, _) in fixtures() {
        for cube in dec.all_cubes() {
            let mut prev = 0.0f64;
            for &t in &t_grid {
                let (members, mass) = dec.boundary_layer(cube.k, cube.alpha, t).unwrap();
                let (o_members, o_mass) = oracle_boundary_layer(dec, cube.k, cube.alpha, t);
                if members != o_members || mass != o_mass {
                    failures.push(format!(
                        "{spec}: cube ({}, {}) at t={t} disagrees with oracle",
                        cube.k, cube.alpha
                    ));
                }
                if mass < prev || mass > cube.measure {
                    failures.push(format!(
                        "{spec}: cube ({}, {}) layer mass {mass} not monotone within mu(Q)",
                        cube.k, cube.alpha
                    ));
                }
                prev = mass;
            }
        }
    }

    // the exponent fit needs intermediate generations, so it runs on a
    // deliberately coarse ladder (delta = 1/2) flagged as out of bounds
    let space = generate(&parse_spec("grid:16x16").unwrap()).unwrap();
    let ledger = derive_constants(1.0, Some(0.5), Some(0.0625), true).unwrap();
    let dec = materialize(space, ledger, ScanOrder::ById, false).unwrap();
    let fit = fit_boundary_exponent(&dec, &t_grid);
    match fit.eta_emp {
        Some(eta) if eta > 0.0 => {}
        other => failures.push(format!("grid:16x16 eta_emp = {other:?}, expected > 0")),
    }
    conclude(
        5,
        "boundary layers match the brute-force oracle; fitted decay exponent positive",
        failures,
    );
}

#[test]
fn criterion_6_top_cube() {
    let mut failures = Vec::new();
    for (spec, dec, report) in fixtures() {
        require_pass(report, spec, &["top_cube_equals_space"], &mut failures);
        let top = dec.cubes_at(dec.ladder.k_min).unwrap();
        if !top
            .iter()
            .any(|c| c.member_list.len() == dec.space.len())
        {
            failures.push(format!("{spec}: no coarsest cube equals the whole space"));
        }
    }
    conclude(6, "coarsest generation contains the whole space as one cube", failures);
}

#[test]
fn criterion_7_determinism() {
    let mut failures = Vec::new();
    let run = || {
        let dec = build_fixture("uniform:200:42");
        let dir = tempfile::tempdir().unwrap();
        artifacts::save(dir.path(), &dec).unwrap();
        artifacts::save_report(dir.path(), &run_suite(&dec)).unwrap();
        let mut files: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        files.sort();
        let contents: Vec<(String, Vec<u8>)> = files
            .iter()
            .map(|f| (f.clone(), std::fs::read(dir.path().join(f)).unwrap()))
            .collect();
        contents
    };
    let a = run();
    let b = run();
    if a.len() != b.len() {
        failures.push(format!("artifact counts differ: {} vs {}", a.len(), b.len()));
    }
    for ((fa, ca), (fb, cb)) in a.iter().zip(&b) {
        if fa != fb || ca != cb {
            failures.push(format!("artifact '{fa}' differs between identical runs"));
        }
    }
    conclude(7, "identical configurations produce byte-identical artifacts", failures);
}

// Membership per the defining unions: x lies in the cube at (k, alpha) iff
// some descendant net point at level l has x within a0 * delta^l of it.
fn oracle_locate(dec: &Decomposition, x: usize, k: i32) -> Option<(i32, usize)> {
    let mut hits = Vec::new();
    for (gi, net) in dec.nets.iter().enumerate() {
        let _ = gi;
        let l = net.k;
        if l < k {
            continue;
        }
        let radius = dec.ledger.a0 * dec.ladder.scale(l);
        for (beta, &z) in net.centers.iter().enumerate() {
            if dec.space.dist(x, z) < radius {
                let (ak, alpha) = dec.tree.ancestor_of(l, beta, k).unwrap();
                assert_eq!(ak, k);
                if !hits.contains(&(k, alpha)) {
                    hits.push((k, alpha));
                }
            }
        }
    }
    assert!(hits.len() <= 1, "point {x} in two cubes of generation {k}");
    hits.pop()
}

#[test]
fn criterion_8_locate_matches_ball_membership() {
    let mut failures = Vec::new();
    for (spec, dec, _) in fixtures() {
        for k in dec.ladder.k_min..=dec.ladder.k_max {
            for x in 0..dec.space.len() {
                let got = dec.locate(x, k).unwrap();
                let want = oracle_locate(dec, x, k);
                if got != want {
                    failures.push(format!(
                        "{spec}: locate({x}, {k}) = {got:?} but ball membership gives {want:?}"
                    ));
                }
            }
        }
    }
    conclude(8, "locate agrees with descendant-ball membership everywhere", failures);
}

#[test]
fn criterion_9_fault_injection() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    // every mutation must flip at least one named check, with a witness
    let mut expect_caught = |label: &str, dec: Decomposition, names: &[&str]| {
        let report = run_suite(&dec);
        let caught: Vec<&str> = names
            .iter()
            .copied()
            .filter(|n| {
                report
                    .check(n)
                    .is_some_and(|c| c.status == Status::Fail && !c.witnesses.is_empty())
            })
            .collect();
        if caught.is_empty() {
            failures.push(format!("{label}: no check among {names:?} produced a witness"));
        } else {
            println!("  fault '{label}' caught by {caught:?}");
        }
    };

    // 1. reparent a finest-generation node onto a different coarse cube
    {
        let mut dec = build_fixture("uniform:200:42");
        let coarser = dec.nets[dec.nets.len() - 2].len();
        assert!(coarser >= 2, "fixture needs a coarse net with several centers");
        let link = dec.tree.links.last_mut().unwrap();
        let alpha = rng.gen_range(0..link.parent.len());
        link.parent[alpha] = (link.parent[alpha] + 1) % coarser;
        expect_caught(
            "reparented node",
            dec,
            &[
                "order_axiom_near_rule",
                "order_axiom_link_distance",
                "order_containment_equivalence",
            ],
        );
    }

    // 2. delete a member from the top cube
    {
        let mut dec = build_fixture("grid:16x16");
        let victim = rng.gen_range(0..dec.space.len());
        let top = &mut dec.generations[0][0];
        top.members.remove(victim);
        top.member_list.retain(|&x| x != victim);
        top.measure = dec.space.measure_of(top.member_list.iter().copied());
        expect_caught(
            "deleted member",
            dec,
            &["coverage", "order_containment_equivalence", "top_cube_equals_space"],
        );
    }

    // 3. inflate one finest cube's ball so it swallows a neighbor's point
    {
        let mut dec = build_fixture("grid:16x16");
        let gi = dec.generations.len() - 1;
        let alpha = rng.gen_range(0..dec.generations[gi].len());
        let center = dec.generations[gi][alpha].center;
        let inflated = dec.space.ball_members(center, 1.5).unwrap();
        let cube = &mut dec.generations[gi][alpha];
        for x in inflated {
            cube.members.insert(x);
        }
        cube.member_list = cube.members.to_vec();
        cube.measure = dec.space.measure_of(cube.member_list.iter().copied());
        expect_caught(
            "inflated ball radius",
            dec,
            &[
                "same_generation_disjoint",
                "order_containment_equivalence",
                "outer_ball_diameter",
            ],
        );
    }

    // 4. break a net's separation by adding a point next to its center
    {
        let mut dec = build_fixture("grid:16x16");
        let near = dec.space.ball_members(dec.nets[0].centers[0], 1.5).unwrap();
        let extra = *near.iter().find(|&&x| x != dec.nets[0].centers[0]).unwrap();
        dec.nets[0].centers.push(extra);
        expect_caught("broken net separation", dec, &["net_separation_maximality"]);
    }

    // 5. zero one point's weight behind the decomposition's back
    {
        let mut dec = build_fixture("grid:16x16");
        let victim = rng.gen_range(0..dec.space.len());
        dec.space.set_weight_unchecked(victim, 0.0);
        expect_caught("weight zeroing", dec, &["measure_positivity"]);
    }

    conclude(9, "all five seeded faults caught with witnesses", failures);
}
