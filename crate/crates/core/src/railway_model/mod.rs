//! The bundled railway model, its bindings, a network generator and
//! mutation fixtures.

pub mod network;
pub mod oracle;

use std::sync::OnceLock;

use crate::dataset_io::{load_dataset, parse_bindings, BindingSpec, Dataset, LoadError};
use crate::spec_lang::{load_model, SpecModel};

pub use network::{generate_network, BlockSpec, Dir, GenError, GenParams, NetworkSpec, SignalSpec, Switch};

pub const MODEL_SOURCE: &str = include_str!("../../assets/railway.model");
pub const BINDINGS_SOURCE: &str = include_str!("../../assets/railway.bindings");

/// Seed of the nominal fixture.
pub const NOMINAL_SEED: u64 = 1;

pub fn model() -> &'static SpecModel {
    static MODEL: OnceLock<SpecModel> = OnceLock::new();
    MODEL.get_or_init(|| load_model(MODEL_SOURCE).expect("bundled model is valid"))
}

pub fn bindings() -> &'static [BindingSpec] {
    static BINDINGS: OnceLock<Vec<BindingSpec>> = OnceLock::new();
    BINDINGS.get_or_init(|| parse_bindings(BINDINGS_SOURCE).expect("bundled bindings are valid"))
}

/// Loads a network through the bundled bindings.
pub fn load(net: &NetworkSpec) -> Result<Dataset, LoadError> {
    load_dataset(&net.to_xml(), bindings(), model())
}

/// The three-block line all mutation fixtures derive from.
pub fn nominal() -> NetworkSpec {
    generate_network(NOMINAL_SEED, &GenParams::linear(3)).expect("feasible")
}

/// A network that breaks exactly one property.
#[derive(Debug, Clone)]
pub struct Mutation {
    pub name: &'static str,
    pub property: &'static str,
    /// Quantified variables of the expected counterexample.
    pub witness: Vec<(String, String)>,
    pub network: NetworkSpec,
}

fn one(name: &str, value: String) -> Vec<(String, String)> {
    vec![(name.to_string(), value)]
}

/// Mutations of `net` that apply to it, at least one per property on the
/// nominal fixture.
pub fn mutations(net: &NetworkSpec) -> Vec<Mutation> {
    let mut out = Vec::new();
    let mansigs: Vec<usize> = (0..net.signals.len()).filter(|&k| net.signals[k].manoeuvre).collect();
    let plain = (0..net.signals.len()).find(|&k| !net.signals[k].manoeuvre);

    if let Some(&k) = mansigs.first() {
        let mut m = net.clone();
        let s = &mut m.signals[k];
        s.prot_block = s.block;
        s.prot_abs = match s.dir {
            Dir::Up => s.abs - 1,
            Dir::Down => s.abs + 1,
        };
        out.push(Mutation {
            name: "sig_prot_behind",
            property: "p_sig_prot_afterwards",
            witness: one("mansig", NetworkSpec::signal_key(k)),
            network: m,
        });
    }
    let upstream = mansigs.iter().find_map(|&k| {
        let s = &net.signals[k];
        let ahead = oracle::reachable(net, s.block, s.dir);
        (0..net.blocks.len())
            .find(|&b| b != s.block && !ahead.iter().any(|&(a, _)| a == b))
            .map(|b| (k, b))
    });
    if let Some((k, b)) = upstream {
        let mut m = net.clone();
        m.signals[k].prot_block = b;
        m.signals[k].prot_abs = 0;
        out.push(Mutation {
            name: "sig_prot_upstream",
            property: "p_sig_prot_afterwards",
            witness: one("mansig", NetworkSpec::signal_key(k)),
            network: m,
        });
    }

    let dists: Vec<(usize, i64)> = mansigs
        .iter()
        .filter_map(|&k| {
            let s = &net.signals[k];
            oracle::min_distance(net, s.dir, s.block, s.abs, s.prot_block, s.prot_abs).map(|d| (k, d))
        })
        .collect();
    if let Some(longest) = dists.iter().map(|&(_, d)| d).max().filter(|&d| d >= 1) {
        let mut m = net.clone();
        m.prot_max = longest - 1;
        let k = dists.iter().find(|&&(_, d)| d > m.prot_max).expect("longest").0;
        out.push(Mutation {
            name: "prot_max_short",
            property: "p_sig_prot_distance",
            witness: one("mansig", NetworkSpec::signal_key(k)),
            network: m,
        });
    }

    for (name, delta) in [("kp_beyond_eps", 1), ("kp_below_eps", -1)] {
        let mut m = net.clone();
        let b = &mut m.blocks[0];
        let span = b.len * 1000 + delta * (net.eps_len + 1);
        b.kp_dest = if b.kp_dest >= b.kp_orig { b.kp_orig + span } else { b.kp_orig - span };
        out.push(Mutation {
            name,
            property: "p_block_len_kp",
            witness: one("b", NetworkSpec::block_key(0)),
            network: m,
        });
    }

    if let Some(k) = plain {
        let mut m = net.clone();
        m.signals[k].abs = net.blocks[net.signals[k].block].len + 1;
        out.push(Mutation {
            name: "sig_abs_beyond",
            property: "p_sig_abs_in_block",
            witness: one("sig", NetworkSpec::signal_key(k)),
            network: m,
        });
        let mut m = net.clone();
        m.signals[k].prot_abs = net.blocks[net.signals[k].prot_block].len + 1;
        out.push(Mutation {
            name: "prot_abs_beyond",
            property: "p_sig_abs_in_block",
            witness: one("sig", NetworkSpec::signal_key(k)),
            network: m,
        });
    }

    let detached = (0..net.blocks.len()).find_map(|b| {
        let f = net.exit_frontier(b, Dir::Up);
        if net.next[b][0].len() >= 2 {
            return None;
        }
        (0..net.blocks.len())
            .find(|&t| t != b && net.blocks[t].orig != f && net.blocks[t].dest != f)
            .map(|t| (b, t))
    });
    if let Some((b, t)) = detached {
        let mut m = net.clone();
        m.next[b][0].push(t);
        out.push(Mutation {
            name: "next_not_adjacent",
            property: "p_next_block_adjacent",
            witness: vec![
                ("b1".to_string(), NetworkSpec::block_key(b)),
                ("b2".to_string(), NetworkSpec::block_key(t)),
            ],
            network: m,
        });
    }
    out
}

/// Fixture files: the nominal dataset, one per mutation and a manifest
/// listing each file with its target property and counterexample.
pub fn fixture_files() -> Vec<(String, String)> {
    let net = nominal();
    let mut manifest = String::from("# fixture target-property counterexample\nnominal.xml - -\n");
    let mut files = vec![("nominal.xml".to_string(), net.to_xml())];
    for m in mutations(&net) {
        let file = format!("{}.xml", m.name);
        let witness: Vec<String> = m.witness.iter().map(|(n, v)| format!("{n}={v}")).collect();
        manifest.push_str(&format!("{file} {} {}\n", m.property, witness.join(",")));
        files.push((file, m.network.to_xml()));
    }
    files.push(("manifest".to_string(), manifest));
    files
}

#[cfg(test)]
mod tests;
