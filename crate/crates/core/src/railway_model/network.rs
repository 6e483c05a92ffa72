//! Seeded generation of block networks and their XML datasets.

use std::collections::HashMap;
use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Travel direction relative to a block's own orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dir {
    Up,
    Down,
}

impl Dir {
    pub const ALL: [Dir; 2] = [Dir::Up, Dir::Down];

    pub fn atom(self) -> &'static str {
        match self {
            Dir::Up => "c_upward",
            Dir::Down => "c_downward",
        }
    }

    pub fn from_atom(s: &str) -> Option<Dir> {
        match s {
            "c_upward" => Some(Dir::Up),
            "c_downward" => Some(Dir::Down),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Dir::Up => 0,
            Dir::Down => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSpec {
    /// Length in metres.
    pub len: i64,
    pub orig: usize,
    pub dest: usize,
    /// Kilometric points of the origin and destination, in millimetres.
    pub kp_orig: i64,
    pub kp_dest: i64,
    /// Speed limit per direction, up then down.
    pub speed: [i64; 2],
    /// Orientation reversed relative to the construction direction.
    pub flipped: bool,
}

/// A frontier joining three block ends: the narrow end and two branches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Switch {
    pub frontier: usize,
    pub narrow: usize,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalSpec {
    pub block: usize,
    pub abs: i64,
    pub dir: Dir,
    pub prot_block: usize,
    pub prot_abs: i64,
    pub manoeuvre: bool,
}

/// A generated network. Indices are zero-based; XML keys are one-based
/// (`b1`, `fr1`, `s1`, ...).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    pub blocks: Vec<BlockSpec>,
    pub frontiers: usize,
    pub switches: Vec<Switch>,
    /// Next blocks per block and direction, left first. A sole successor is
    /// always on the left.
    pub next: Vec<[Vec<usize>; 2]>,
    pub signals: Vec<SignalSpec>,
    pub sections: Vec<Vec<usize>>,
    pub beacons: Vec<usize>,
    /// Millimetres.
    pub eps_len: i64,
    pub prot_max: i64,
    pub zone_horizon: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub blocks: usize,
    pub switches: usize,
    pub flips: usize,
    pub signals: usize,
}

impl GenParams {
    /// A straight line with one signal per block, at least two.
    pub fn linear(blocks: usize) -> Self {
        GenParams {
            blocks,
            switches: 0,
            flips: 0,
            signals: blocks.max(2),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("infeasible network: {0}")]
    Infeasible(String),
}

pub const MIN_LEN: i64 = 5;
pub const MAX_LEN: i64 = 20;
pub const EPS_LEN: i64 = 5;
pub const PROT_MAX: i64 = 40;
pub const ZONE_HORIZON: i64 = 60;

enum Branch {
    Spur { len: usize },
    Loop { len: usize },
}

impl Branch {
    fn len(&self) -> usize {
        match self {
            Branch::Spur { len } | Branch::Loop { len } => *len,
        }
    }
}

struct Builder {
    /// Construction direction of each block: from frontier, to frontier.
    ends: Vec<(usize, usize)>,
    frontiers: usize,
    switches: Vec<Switch>,
}

impl Builder {
    fn frontier(&mut self) -> usize {
        self.frontiers += 1;
        self.frontiers - 1
    }

    fn block(&mut self, from: usize, to: usize) -> usize {
        self.ends.push((from, to));
        self.ends.len() - 1
    }

    fn switch(&mut self, rng: &mut ChaCha8Rng, frontier: usize, narrow: usize, a: usize, b: usize) {
        let (left, right) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
        self.switches.push(Switch {
            frontier,
            narrow,
            left,
            right,
        });
    }
}

/// Builds a network deterministically from a seed.
pub fn generate_network(seed: u64, p: &GenParams) -> Result<NetworkSpec, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if p.blocks == 0 {
        return Err(GenError::Infeasible("a network needs at least one block".into()));
    }
    if p.flips > p.blocks {
        return Err(GenError::Infeasible(format!("{} flips for {} blocks", p.flips, p.blocks)));
    }

    let mut branches = Vec::new();
    let mut left = p.switches;
    while left > 0 {
        let len = rng.gen_range(1..=2);
        if left >= 2 && rng.gen_bool(0.5) {
            branches.push(Branch::Loop { len });
            left -= 2;
        } else {
            branches.push(Branch::Spur { len });
            left -= 1;
        }
    }
    let fits = |branches: &[Branch]| {
        let used: usize = branches.iter().map(Branch::len).sum();
        p.blocks >= used && p.blocks - used > p.switches
    };
    if !fits(&branches) {
        for b in &mut branches {
            match b {
                Branch::Spur { len } | Branch::Loop { len } => *len = 1,
            }
        }
    }
    if !fits(&branches) {
        return Err(GenError::Infeasible(format!(
            "{} switches do not fit in {} blocks",
            p.switches, p.blocks
        )));
    }
    let main = p.blocks - branches.iter().map(Branch::len).sum::<usize>();

    let mut b = Builder {
        ends: Vec::new(),
        frontiers: 0,
        switches: Vec::new(),
    };
    let line: Vec<usize> = (0..=main).map(|_| b.frontier()).collect();
    for k in 0..main {
        b.block(line[k], line[k + 1]);
    }
    // Junction j lies between main blocks j - 1 and j.
    let mut junctions: Vec<usize> = (1..main).collect();
    junctions.shuffle(&mut rng);
    for branch in &branches {
        match *branch {
            Branch::Spur { len } => {
                let j = junctions.pop().expect("enough junctions");
                if rng.gen_bool(0.5) {
                    let mut from = line[j];
                    let mut first = None;
                    for _ in 0..len {
                        let to = b.frontier();
                        let c = b.block(from, to);
                        first.get_or_insert(c);
                        from = to;
                    }
                    b.switch(&mut rng, line[j], j - 1, j, first.expect("spur block"));
                } else {
                    let mut to = line[j];
                    let mut last = None;
                    for _ in 0..len {
                        let from = b.frontier();
                        let c = b.block(from, to);
                        last.get_or_insert(c);
                        to = from;
                    }
                    b.switch(&mut rng, line[j], j, j - 1, last.expect("spur block"));
                }
            }
            Branch::Loop { len } => {
                let x = junctions.pop().expect("enough junctions");
                let y = junctions.pop().expect("enough junctions");
                let (i, j) = (x.min(y), x.max(y));
                let mut from = line[i];
                let mut blocks = Vec::new();
                for k in 0..len {
                    let to = if k + 1 == len { line[j] } else { b.frontier() };
                    blocks.push(b.block(from, to));
                    from = to;
                }
                b.switch(&mut rng, line[i], i - 1, i, blocks[0]);
                b.switch(&mut rng, line[j], j, j - 1, *blocks.last().expect("loop block"));
            }
        }
    }

    let n = b.ends.len();
    let mut flipped = vec![false; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for &k in order.iter().take(p.flips) {
        flipped[k] = true;
    }

    // Kilometric points follow the construction direction.
    let lens: Vec<i64> = (0..n).map(|_| rng.gen_range(MIN_LEN..=MAX_LEN)).collect();
    let mut pos = vec![None; b.frontiers];
    pos[line[0]] = Some(0i64);
    // Branches are built after the line they hang from, so one pass
    // suffices.
    for (k, &(from, to)) in b.ends.iter().enumerate() {
        match (pos[from], pos[to]) {
            (Some(x), None) => pos[to] = Some(x + lens[k] * 1000),
            (None, Some(y)) => pos[from] = Some(y - lens[k] * 1000),
            _ => {}
        }
    }
    let blocks: Vec<BlockSpec> = (0..n)
        .map(|k| {
            let (from, to) = b.ends[k];
            let noise = if k == 0 { EPS_LEN } else { rng.gen_range(-EPS_LEN..=EPS_LEN) };
            let kp_from = pos[from].unwrap_or(0);
            let kp_to = kp_from + lens[k] * 1000 + noise;
            let speed = [rng.gen_range(3..=8) * 10, rng.gen_range(3..=8) * 10];
            let (orig, dest, kp_orig, kp_dest) = if flipped[k] {
                (to, from, kp_to, kp_from)
            } else {
                (from, to, kp_from, kp_to)
            };
            BlockSpec {
                len: lens[k],
                orig,
                dest,
                kp_orig,
                kp_dest,
                speed,
                flipped: flipped[k],
            }
        })
        .collect();

    let mut net = NetworkSpec {
        blocks,
        frontiers: b.frontiers,
        switches: b.switches,
        next: Vec::new(),
        signals: Vec::new(),
        sections: Vec::new(),
        beacons: Vec::new(),
        eps_len: EPS_LEN,
        prot_max: PROT_MAX,
        zone_horizon: ZONE_HORIZON,
    };
    let mut at = vec![Vec::new(); net.frontiers];
    for (k, b) in net.blocks.iter().enumerate() {
        at[b.orig].push(k);
        at[b.dest].push(k);
    }
    let switches: HashMap<usize, &Switch> = net.switches.iter().map(|s| (s.frontier, s)).collect();
    let next = (0..n)
        .map(|k| [Dir::Up, Dir::Down].map(|d| net.topology_next(&at, &switches, k, d)))
        .collect();
    net.next = next;

    for i in 0..p.signals {
        let block = rng.gen_range(0..n);
        let dir = if rng.gen_bool(0.5) { Dir::Up } else { Dir::Down };
        let len = net.blocks[block].len;
        let abs = rng.gen_range(1..len);
        let manoeuvre = match i {
            0 => true,
            1 => false,
            _ => rng.gen_bool(0.6),
        };
        let distance = rng.gen_range(1..=PROT_MAX);
        let (prot_block, prot_abs) = net.walk(&mut rng, block, dir, abs, distance);
        net.signals.push(SignalSpec {
            block,
            abs,
            dir,
            prot_block,
            prot_abs,
            manoeuvre,
        });
    }
    for chunk in (0..n).collect::<Vec<_>>().chunks(4) {
        net.sections.push(chunk.to_vec());
    }
    net.beacons = (0..n).step_by(3).collect();
    Ok(net)
}

impl NetworkSpec {
    /// Frontier a block is left by in a direction.
    pub fn exit_frontier(&self, block: usize, dir: Dir) -> usize {
        let b = &self.blocks[block];
        match dir {
            Dir::Up => b.dest,
            Dir::Down => b.orig,
        }
    }

    /// Direction of travel on `block` when entering it through `frontier`.
    pub fn entry_dir(&self, block: usize, frontier: usize) -> Dir {
        if self.blocks[block].orig == frontier {
            Dir::Up
        } else {
            Dir::Down
        }
    }

    fn topology_next(&self, at: &[Vec<usize>], switches: &HashMap<usize, &Switch>, block: usize, dir: Dir) -> Vec<usize> {
        let f = self.exit_frontier(block, dir);
        if let Some(sw) = switches.get(&f) {
            return if sw.narrow == block {
                vec![sw.left, sw.right]
            } else {
                vec![sw.narrow]
            };
        }
        at[f].iter().copied().filter(|&k| k != block).collect()
    }

    /// Position `distance` metres ahead along a random path, stopping at a
    /// dead end.
    fn walk(&self, rng: &mut ChaCha8Rng, mut block: usize, mut dir: Dir, mut abs: i64, mut rem: i64) -> (usize, i64) {
        loop {
            let len = self.blocks[block].len;
            let exit = match dir {
                Dir::Up => len - abs,
                Dir::Down => abs,
            };
            if rem <= exit {
                return match dir {
                    Dir::Up => (block, abs + rem),
                    Dir::Down => (block, abs - rem),
                };
            }
            let succ = &self.next[block][dir.index()];
            if succ.is_empty() {
                return (block, if dir == Dir::Up { len } else { 0 });
            }
            let f = self.exit_frontier(block, dir);
            let b2 = succ[rng.gen_range(0..succ.len())];
            rem -= exit;
            dir = self.entry_dir(b2, f);
            block = b2;
            abs = if dir == Dir::Up { 0 } else { self.blocks[b2].len };
        }
    }

    pub fn block_key(k: usize) -> String {
        format!("b{}", k + 1)
    }

    pub fn signal_key(k: usize) -> String {
        format!("s{}", k + 1)
    }

    /// The dataset document read by the bundled bindings.
    pub fn to_xml(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<network eps_len="{}" prot_max="{}" zone_horizon="{}">"#,
            milli(self.eps_len),
            self.prot_max,
            self.zone_horizon
        );
        for f in 0..self.frontiers {
            let _ = writeln!(out, r#"  <frontier id="fr{}"/>"#, f + 1);
        }
        for (k, b) in self.blocks.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"  <block id="{}" orig="fr{}" dest="fr{}" len="{}" kp_orig="{}" kp_dest="{}">"#,
                Self::block_key(k),
                b.orig + 1,
                b.dest + 1,
                b.len,
                milli(b.kp_orig),
                milli(b.kp_dest)
            );
            for dir in Dir::ALL {
                let name = if dir == Dir::Up { "up" } else { "down" };
                for (side, &t) in ["left", "right"].iter().zip(&self.next[k][dir.index()]) {
                    let _ = writeln!(
                        out,
                        r#"    <next dir="{name}" side="{side}" ref="{}"/>"#,
                        Self::block_key(t)
                    );
                }
            }
            for dir in Dir::ALL {
                let _ = writeln!(out, r#"    <speed dir="{}" limit="{}"/>"#, dir.atom(), b.speed[dir.index()]);
            }
            out.push_str("  </block>\n");
        }
        for (k, s) in self.signals.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"  <signal id="{}" type="{}" block="{}" abs="{}" dir="{}" prot_block="{}" prot_abs="{}"/>"#,
                Self::signal_key(k),
                if s.manoeuvre { "manoeuvre" } else { "permanent" },
                Self::block_key(s.block),
                s.abs,
                s.dir.atom(),
                Self::block_key(s.prot_block),
                s.prot_abs
            );
        }
        for (k, blocks) in self.sections.iter().enumerate() {
            let _ = write!(out, r#"  <section id="sec{}">"#, k + 1);
            for &b in blocks {
                let _ = write!(out, r#"<block ref="{}"/>"#, Self::block_key(b));
            }
            out.push_str("</section>\n");
        }
        for (k, &b) in self.beacons.iter().enumerate() {
            let _ = writeln!(out, r#"  <beacon id="bc{}" block="{}"/>"#, k + 1, Self::block_key(b));
        }
        out.push_str("</network>\n");
        out
    }

    /// Integers held by the dataset's constants, pairs counting two.
    pub fn integer_count(&self) -> usize {
        let n = self.blocks.len();
        let nexts: usize = self.next.iter().map(|d| d[0].len() + d[1].len()).sum();
        let sections: usize = self.sections.iter().map(Vec::len).sum();
        // orig, dest, len, two kps: five pairs; speeds: two triples.
        n * 10 + n * 6 + nexts * 2 + self.signals.len() * 10 + sections * 2 + self.beacons.len() * 2 + 3
    }
}

fn milli(v: i64) -> String {
    let sign = if v < 0 { "-" } else { "" };
    format!("{sign}{}.{:03}", v.abs() / 1000, v.abs() % 1000)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn milli_formatting() {
        assert_eq!(milli(12005), "12.005");
        assert_eq!(milli(-5), "-0.005");
        assert_eq!(milli(0), "0.000");
    }

    #[test]
    fn linear_network_shape() {
        let net = generate_network(1, &GenParams::linear(3)).unwrap();
        assert_eq!(net.blocks.len(), 3);
        assert_eq!(net.frontiers, 4);
        assert_eq!(net.next[0], [vec![1], vec![]]);
        assert_eq!(net.next[1], [vec![2], vec![0]]);
        assert_eq!(net.next[2], [vec![], vec![1]]);
        assert!(net.signals[0].manoeuvre && !net.signals[1].manoeuvre);
    }

    #[test]
    fn switches_and_flips_are_placed() {
        let p = GenParams {
            blocks: 12,
            switches: 3,
            flips: 2,
            signals: 6,
        };
        let net = generate_network(7, &p).unwrap();
        assert_eq!(net.blocks.len(), 12);
        assert_eq!(net.switches.len(), 3);
        assert_eq!(net.blocks.iter().filter(|b| b.flipped).count(), 2);
        for sw in &net.switches {
            let d = Dir::ALL
                .into_iter()
                .find(|&d| net.exit_frontier(sw.narrow, d) == sw.frontier)
                .unwrap();
            assert_eq!(net.next[sw.narrow][d.index()], vec![sw.left, sw.right]);
        }
        assert_eq!(generate_network(7, &p).unwrap(), net);
    }

    #[test]
    fn infeasible_parameters() {
        let p = GenParams {
            blocks: 3,
            switches: 5,
            flips: 0,
            signals: 1,
        };
        assert!(generate_network(1, &p).is_err());
        assert!(generate_network(1, &GenParams::linear(0)).is_err());
    }
}
