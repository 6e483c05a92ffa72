//! Acceptance run: one line per criterion, exit status nonzero if any fails.
//!
//! Every expected value comes from an oracle in this file or in
//! `railway_model::oracle`, never from the engines under test.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dataval_core::codec::{decode, encode, roundtrip_check, RoundTrip};
use dataval_core::dataset_io::{load_dataset, parse_bindings, write_canonical, Dataset};
use dataval_core::eval_core::{cross_check, CrossStatus, Engine, EngineOptions, RefEngine, Truth};
use dataval_core::railway_model::{
    bindings, generate_network, load, model, mutations, oracle, Dir, GenParams, NetworkSpec, BINDINGS_SOURCE,
    MODEL_SOURCE,
};
use dataval_core::spec_lang::{load_model, SpecModel};
use dataval_core::validator::{parse_manifest, run, test_properties, Outcome, RunConfig, Source, DEFAULT_REF_BOUND};
use dataval_core::value::Value;

type Criterion = (&'static str, fn() -> Check);

struct Check {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Check {
    Check { pass, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn random_params(rng: &mut ChaCha8Rng, max_blocks: usize) -> GenParams {
    let blocks = rng.gen_range(2..=max_blocks);
    GenParams {
        blocks,
        switches: rng.gen_range(0..=blocks / 5),
        flips: rng.gen_range(0..=blocks / 4),
        signals: rng.gen_range(2..=blocks.max(2)),
    }
}

/// Seeded networks drawn from `params`, skipping infeasible draws.
fn networks(seed: u64, count: usize, mut params: impl FnMut(&mut ChaCha8Rng) -> GenParams) -> Vec<NetworkSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let p = params(&mut rng);
        if let Ok(net) = generate_network(rng.gen(), &p) {
            out.push(net);
        }
    }
    out
}

fn dual_chain_agreement() -> Check {
    let start = Instant::now();
    let nets = networks(0xa11, 200, |rng| random_params(rng, 50));
    let (mut verdicts, mut disagreements, mut mutated) = (0usize, Vec::new(), 0usize);
    let (mut switched, mut flipped) = (0, 0);
    for (i, net) in nets.iter().enumerate() {
        switched += usize::from(!net.switches.is_empty());
        flipped += usize::from(net.blocks.iter().any(|b| b.flipped));
        let mut variants = vec![net.clone()];
        if i % 4 == 0 {
            let ms: Vec<NetworkSpec> = mutations(net).into_iter().map(|m| m.network).collect();
            mutated += ms.len();
            variants.extend(ms);
        }
        for v in variants {
            let data = load(&v).expect("generated networks load");
            let main = Engine::new(model(), &data, EngineOptions::default());
            let reference = RefEngine::new(model(), &data, DEFAULT_REF_BOUND);
            for p in &model().properties {
                let r = cross_check(&main, Some(&reference), &p.name).unwrap();
                verdicts += 1;
                if r.status != CrossStatus::Agree {
                    disagreements.push(format!("network {i} {}: {} vs {:?}", p.name, r.main, r.reference));
                }
            }
        }
    }
    let t = start.elapsed();
    let pass = disagreements.is_empty() && t < Duration::from_secs(300) && switched > 0 && flipped > 0;
    verdict(
        pass,
        format!(
            "{} networks ({switched} with switches, {flipped} with flips) + {mutated} mutants, {verdicts} verdicts, {} not agreeing, {}{}",
            nets.len(),
            disagreements.len(),
            secs(t),
            disagreements.first().map(|d| format!("; first: {d}")).unwrap_or_default()
        ),
    )
}

fn ordering_oracle() -> Check {
    let start = Instant::now();
    let nets = networks(0x0de, 12, |rng| {
        let blocks = rng.gen_range(4..=12);
        GenParams {
            blocks,
            switches: rng.gen_range(1..=2),
            flips: rng.gen_range(1..=3),
            signals: 2,
        }
    });
    let (mut pairs, mut mismatches) = (0usize, Vec::new());
    let mut covered = true;
    for (i, net) in nets.iter().enumerate() {
        covered &= !net.switches.is_empty() && net.blocks.iter().any(|b| b.flipped) && net.blocks.len() <= 12;
        let data = load(net).unwrap();
        let main = Engine::new(model(), &data, EngineOptions::default());
        let f = main.definition_value("f_pos_afterwards").unwrap().unwrap();
        let block = |b: usize| data.atom("t_block", &NetworkSpec::block_key(b)).unwrap();
        let positions: Vec<(usize, i64)> = (0..net.blocks.len())
            .flat_map(|b| (0..=net.blocks[b].len).map(move |a| (b, a)))
            .collect();
        for d in Dir::ALL {
            let dir = data.atom("t_dir", d.atom()).unwrap();
            for &(b1, a1) in &positions {
                let head = Value::pair(Value::pair(dir.clone(), block(b1)), Value::int(a1));
                for &(b2, a2) in &positions {
                    let arg = Value::pair(Value::pair(head.clone(), block(b2)), Value::int(a2));
                    let got = main.apply_value(&f, &arg).ok().and_then(|v| v.as_bool());
                    let want = oracle::pos_afterwards(net, d, b1, a1, b2, a2);
                    pairs += 1;
                    if got != Some(want) {
                        mismatches.push(format!("network {i} {d:?} ({b1},{a1}) ({b2},{a2}): {got:?} vs {want}"));
                    }
                }
            }
        }
    }
    verdict(
        covered && mismatches.is_empty(),
        format!(
            "{} networks of 4..=12 blocks, each with a switch and a flip: {pairs} position pairs, {} mismatches, {}{}",
            nets.len(),
            mismatches.len(),
            secs(start.elapsed()),
            mismatches.first().map(|d| format!("; first: {d}")).unwrap_or_default()
        ),
    )
}

const GRAPH_MODEL: &str = r#"
SETS t_node
CONSTANTS r_next : t_node <-> t_node & k_src : t_node & k_dst : t_node
DEFINITIONS
  @desc "nodes reachable in one or more steps"
  r_reach == closure1(r_next)
PROPERTIES
  @req R_REACH @desc "the source reaches the target"
  p_reach == k_src |-> k_dst : r_reach
"#;

const GRAPH_BINDINGS: &str = "t_node set /g/n/@id\n\
r_next relation /g/n/@id e/@to\n\
k_src scalar /g/@src\n\
k_dst scalar /g/@dst\n";

fn graph_model() -> SpecModel {
    load_model(GRAPH_MODEL).unwrap()
}

fn graph_xml(nodes: usize, edges: &[(usize, usize)], src: usize, dst: usize) -> String {
    let mut adj = vec![Vec::new(); nodes];
    for &(a, b) in edges {
        adj[a].push(b);
    }
    let mut xml = format!("<g src=\"n{src}\" dst=\"n{dst}\">\n");
    for (a, succ) in adj.iter().enumerate() {
        let _ = write!(xml, "<n id=\"n{a}\">");
        for b in succ {
            let _ = write!(xml, "<e to=\"n{b}\"/>");
        }
        xml.push_str("</n>\n");
    }
    xml.push_str("</g>\n");
    xml
}

fn random_edges(rng: &mut ChaCha8Rng, nodes: usize, edges: usize) -> Vec<(usize, usize)> {
    let mut set = BTreeSet::new();
    let edges = edges.min(nodes * nodes);
    while set.len() < edges {
        set.insert((rng.gen_range(0..nodes), rng.gen_range(0..nodes)));
    }
    set.into_iter().collect()
}

/// Non-reflexive transitive closure by breadth-first search from every node.
fn bfs_closure(nodes: usize, edges: &[(usize, usize)]) -> BTreeSet<(usize, usize)> {
    let mut adj = vec![Vec::new(); nodes];
    for &(a, b) in edges {
        adj[a].push(b);
    }
    let mut out = BTreeSet::new();
    for s in 0..nodes {
        let mut seen = vec![false; nodes];
        let mut queue: VecDeque<usize> = adj[s].iter().copied().collect();
        while let Some(x) = queue.pop_front() {
            if std::mem::replace(&mut seen[x], true) {
                continue;
            }
            out.insert((s, x));
            queue.extend(adj[x].iter().copied());
        }
    }
    out
}

fn node_index(data: &Dataset, v: &Value) -> usize {
    let key = data.universes.atom_key(v.as_atom().unwrap());
    key[1..].parse().unwrap()
}

fn closure_oracle() -> Check {
    let start = Instant::now();
    let model = graph_model();
    let bindings = parse_bindings(GRAPH_BINDINGS).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc105);
    let (mut mismatches, mut pairs, mut probes) = (Vec::new(), 0usize, 0usize);
    for i in 0..100 {
        let nodes = if i < 10 { 1000 } else { rng.gen_range(1..=1000) };
        let edges = if i < 10 { 5000 } else { rng.gen_range(0..=5000) };
        let edges = random_edges(&mut rng, nodes, edges);
        let xml = graph_xml(nodes, &edges, 0, nodes - 1);
        let data = load_dataset(&xml, &bindings, &model).unwrap();
        let want = bfs_closure(nodes, &edges);
        let main = Engine::new(&model, &data, EngineOptions::default());
        let reach = main.definition_value("r_reach").unwrap().unwrap();
        let forced = main.force(&reach, Default::default()).unwrap();
        let got: BTreeSet<(usize, usize)> = forced
            .as_set()
            .unwrap()
            .iter()
            .map(|p| {
                let (a, b) = p.as_pair().unwrap();
                (node_index(&data, a), node_index(&data, b))
            })
            .collect();
        pairs += want.len();
        if got != want {
            mismatches.push(format!("relation {i}: {} pairs vs {} from BFS", got.len(), want.len()));
            continue;
        }
        // lazy membership on a fresh engine, on both members and non-members
        let lazy = Engine::new(&model, &data, EngineOptions::default());
        let reach = lazy.definition_value("r_reach").unwrap().unwrap();
        for _ in 0..50 {
            let (a, b) = (rng.gen_range(0..nodes), rng.gen_range(0..nodes));
            let pair = Value::pair(
                data.atom("t_node", &format!("n{a}")).unwrap(),
                data.atom("t_node", &format!("n{b}")).unwrap(),
            );
            probes += 1;
            if lazy.contains(&reach, &pair, Default::default()).unwrap() != want.contains(&(a, b)) {
                mismatches.push(format!("relation {i}: membership of (n{a}, n{b})"));
            }
        }
    }
    let t = start.elapsed();
    verdict(
        mismatches.is_empty() && t < Duration::from_secs(60),
        format!(
            "100 relations (up to 1000 nodes, 5000 edges): {pairs} closure pairs, {probes} membership probes, {} mismatches, {}{}",
            mismatches.len(),
            secs(t),
            mismatches.first().map(|d| format!("; first: {d}")).unwrap_or_default()
        ),
    )
}

fn lazy_membership() -> Check {
    const N: usize = 100_000;
    const SLACK: u64 = 16;
    let model = graph_model();
    let bindings = parse_bindings(GRAPH_BINDINGS).unwrap();
    let chain: Vec<(usize, usize)> = (0..N - 1).map(|k| (k, k + 1)).collect();
    let data = load_dataset(&graph_xml(N, &chain, 0, N - 1), &bindings, &model).unwrap();
    let p = &model.property("p_reach").unwrap().pred;

    let main = Engine::new(&model, &data, EngineOptions::default());
    let start = Instant::now();
    let lazy = main.holds(p);
    let lazy_time = start.elapsed();
    let enumerated = main.counters.snapshot().elements_enumerated;
    let path = (N - 1) as u64;

    let reference = RefEngine::new(&model, &data, DEFAULT_REF_BOUND);
    let start = Instant::now();
    let eager = reference.holds(p);
    let eager_time = start.elapsed();
    let eager_note = match &eager {
        Ok(t) => format!("eager {t} in {}", secs(eager_time)),
        Err(e) => format!("eager stopped by its bound after {} ({e})", secs(eager_time)),
    };

    // lazy and eager agree on small instances
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2e);
    let (mut compared, mut differ) = (0, 0);
    for _ in 0..60 {
        let nodes = rng.gen_range(2..=500);
        let m = rng.gen_range(0..=nodes * 2);
        let edges = random_edges(&mut rng, nodes, m);
        let xml = graph_xml(nodes, &edges, rng.gen_range(0..nodes), rng.gen_range(0..nodes));
        let data = load_dataset(&xml, &bindings, &model).unwrap();
        let main = Engine::new(&model, &data, EngineOptions::default());
        let reference = RefEngine::new(&model, &data, DEFAULT_REF_BOUND);
        compared += 1;
        if reference.holds(p) != Ok(main.holds(p)) {
            differ += 1;
        }
    }
    verdict(
        lazy == Truth::True && lazy_time < Duration::from_secs(1) && enumerated <= path + SLACK && differ == 0,
        format!(
            "chain of {N}: lazy {lazy} in {}, {enumerated} elements enumerated for a path of {path}; {eager_note}; {compared} small instances, {differ} disagreements",
            secs(lazy_time)
        ),
    )
}

fn scale_run() -> Check {
    let params = GenParams {
        blocks: 32_000,
        switches: 400,
        flips: 400,
        signals: 32_000,
    };
    let net = generate_network(7, &params).expect("feasible");
    let integers = net.integer_count();
    let xml = net.to_xml();
    let cfg = RunConfig {
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        ..RunConfig::default()
    };
    let start = Instant::now();
    let report = run(
        &Source::new("railway.model", MODEL_SOURCE),
        &Source::new("railway.bindings", BINDINGS_SOURCE),
        &Source::new("scale.xml", xml),
        &cfg,
    );
    let t = start.elapsed();
    let s = &report.summary;
    verdict(
        integers >= 1_000_000 && report.outcome == Outcome::Pass && t < Duration::from_secs(60),
        format!(
            "{} blocks, {} signals, {integers} integers: {} in {} ({} pass, {} cross-checked, {} main engine only)",
            params.blocks,
            params.signals,
            report.outcome.label(),
            secs(t),
            s.pass,
            s.properties - s.reference_incomplete,
            s.reference_incomplete
        ),
    )
}

fn codec_roundtrip() -> Check {
    let start = Instant::now();
    let nets = networks(0xc0de, 1000, |rng| random_params(rng, 30));
    let mut failures = Vec::new();
    let mut valid = Vec::new();
    for (i, net) in nets.iter().enumerate() {
        let data = load(net).unwrap();
        let first = encode(&data).unwrap();
        let decoded = decode(&first).unwrap();
        let second = encode(&decoded).unwrap();
        if first != second || write_canonical(&decoded) != write_canonical(&data) {
            failures.push(format!("dataset {i}"));
        }
        if i < 50 {
            valid.push(first);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xf022);
    let (mut panics, mut accepted) = (0, 0);
    for i in 0..100_000 {
        let bytes: Vec<u8> = match i % 4 {
            0 => (0..rng.gen_range(0..256)).map(|_| rng.gen()).collect(),
            1 => {
                let mut b = b"DVAL\x01\x00\x00\x00".to_vec();
                b.extend((0..rng.gen_range(0..128)).map(|_| rng.gen::<u8>()));
                b
            }
            2 => {
                let mut b = valid[rng.gen_range(0..valid.len())].clone();
                for _ in 0..rng.gen_range(1..=4) {
                    let k = rng.gen_range(0..b.len());
                    b[k] ^= rng.gen_range(1..=255u8);
                }
                b
            }
            _ => {
                let mut b = valid[rng.gen_range(0..valid.len())].clone();
                match rng.gen_range(0..3) {
                    0 => b.truncate(rng.gen_range(0..b.len())),
                    1 => b.insert(rng.gen_range(0..=b.len()), rng.gen()),
                    _ => {
                        b.remove(rng.gen_range(0..b.len()));
                    }
                }
                b
            }
        };
        if valid.contains(&bytes) {
            continue;
        }
        match catch_unwind(AssertUnwindSafe(|| (decode(&bytes).is_ok(), roundtrip_check(&bytes)))) {
            Err(_) => panics += 1,
            Ok((_, RoundTrip::Pass)) => accepted += 1,
            Ok(_) => {}
        }
    }
    verdict(
        failures.is_empty() && panics == 0 && accepted == 0,
        format!(
            "1000 datasets: {} not byte-identical; 100000 random or altered messages: {panics} panics, {accepted} passed the round trip, {}",
            failures.len(),
            secs(start.elapsed())
        ),
    )
}

fn mutation_harness() -> Check {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets/fixtures");
    let read = |name: &str| std::fs::read_to_string(dir.join(name)).map_err(|e| e.to_string());
    let manifest = parse_manifest(&read("manifest").unwrap()).unwrap();
    let report = match test_properties(model(), bindings(), &manifest, &read, DEFAULT_REF_BOUND) {
        Ok(r) => r,
        Err(e) => return verdict(false, format!("harness error: {e}")),
    };
    let mut per_property: BTreeMap<&str, usize> = model().properties.iter().map(|p| (p.name.as_str(), 0)).collect();
    for e in &manifest {
        if let Some(t) = &e.target {
            *per_property.entry(t).or_default() += 1;
        }
    }
    let counts_ok = per_property.values().all(|&n| (1..=3).contains(&n));
    let with_witness = manifest.iter().filter(|e| e.target.is_some() && !e.witness.is_empty()).count();
    let mutants = manifest.iter().filter(|e| e.target.is_some()).count();
    let problems: usize = report.fixtures.iter().map(|f| f.problems.len()).sum();
    verdict(
        report.passed() && counts_ok && with_witness == mutants,
        format!(
            "{} properties with {:?} mutation fixtures each, {mutants} mutants with witnesses checked, {problems} problems, {} vacuous quantifiers on nominal data",
            per_property.len(),
            per_property.values().collect::<Vec<_>>(),
            report.vacuity.len()
        ),
    )
}

fn epsilon_boundary() -> Check {
    let base = generate_network(3, &GenParams::linear(4)).unwrap();
    let mut lines = Vec::new();
    let mut pass = true;
    for eps in [base.eps_len, 7, 0] {
        for sign in [1, -1] {
            for (delta, want) in [(eps - 1, Truth::True), (eps, Truth::True), (eps + 1, Truth::False)] {
                if delta < 0 {
                    continue;
                }
                let mut net = base.clone();
                net.eps_len = eps;
                for b in &mut net.blocks {
                    let span = b.len * 1000;
                    b.kp_dest = if b.kp_dest >= b.kp_orig { b.kp_orig + span } else { b.kp_orig - span };
                }
                let b = &mut net.blocks[1];
                let span = b.len * 1000 + sign * delta;
                b.kp_dest = if b.kp_dest >= b.kp_orig { b.kp_orig + span } else { b.kp_orig - span };
                let data = load(&net).unwrap();
                let main = Engine::new(model(), &data, EngineOptions::default());
                let reference = RefEngine::new(model(), &data, DEFAULT_REF_BOUND);
                let r = cross_check(&main, Some(&reference), "p_block_len_kp").unwrap();
                let ok = r.main == want && r.status == CrossStatus::Agree;
                pass &= ok;
                if !ok {
                    lines.push(format!("eps {eps} delta {}: {} ({})", sign * delta, r.main, r.status));
                }
            }
        }
    }
    verdict(
        pass,
        if lines.is_empty() {
            format!("eps from the dataset in {{{}, 7, 0}} mm: |delta| = eps - 1 and eps pass, eps + 1 fails, both signs", base.eps_len)
        } else {
            lines.join("; ")
        },
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("dual-chain agreement", dual_chain_agreement),
        ("ordering oracle", ordering_oracle),
        ("closure oracle", closure_oracle),
        ("lazy membership", lazy_membership),
        ("scale run", scale_run),
        ("codec round trip", codec_roundtrip),
        ("mutation harness", mutation_harness),
        ("epsilon boundary", epsilon_boundary),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|k| k != n) {
            continue;
        }
        let o = match catch_unwind(check) {
            Ok(o) => o,
            Err(_) => verdict(false, "panicked".to_string()),
        };
        failed += usize::from(!o.pass);
        println!("criterion {n} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
