//! Blacklist/whitelist ingestion and synthetic clustered workload generation.
//!
//! Input files are UTF-8 text with one `address[,weight]` entry per line and
//! `#` comments. The generators produce spatially clustered address sets
//! (attack sources concentrate in a few prefixes in practice) and are
//! deterministic functions of their seed.

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::prefix::{check_width, parse_address_value, space_size, Address, Prefix};
use crate::Result;

/// Ceiling on the summed weight of one set, leaving headroom so that any
/// objective combining good and bad totals still fits in i64.
pub const MAX_TOTAL_WEIGHT: u64 = 1 << 60;

/// Whether a set lists legitimate (good) or malicious (bad) sources.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Good,
    Bad,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Good => write!(f, "good"),
            Role::Bad => write!(f, "bad"),
        }
    }
}

/// A set of addresses with non-negative integer weights (traffic quanta or
/// operator-assigned importance). Duplicate inserts merge by summing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedAddressSet {
    width: u8,
    role: Role,
    entries: BTreeMap<u32, u64>,
    total: u64,
}

impl WeightedAddressSet {
    pub fn new(width: u8, role: Role) -> Result<Self> {
        check_width(width)?;
        Ok(WeightedAddressSet { width, role, entries: BTreeMap::new(), total: 0 })
    }

    pub fn from_entries(
        width: u8,
        role: Role,
        entries: impl IntoIterator<Item = (u32, u64)>,
    ) -> Result<Self> {
        let mut set = WeightedAddressSet::new(width, role)?;
        for (value, weight) in entries {
            set.insert(value, weight)?;
        }
        Ok(set)
    }

    /// Insert an address, merging weights when it is already present.
    pub fn insert(&mut self, value: u32, weight: u64) -> Result<()> {
        if u64::from(value) >= space_size(self.width) {
            return Err(Error::AddressOutOfRange { value: u64::from(value), width: self.width });
        }
        let total = self.total.checked_add(weight).filter(|&t| t <= MAX_TOTAL_WEIGHT);
        self.total = total.ok_or(Error::WeightOverflow)?;
        *self.entries.entry(value).or_insert(0) += weight;
        Ok(())
    }

    pub fn remove(&mut self, value: u32) -> Option<u64> {
        let weight = self.entries.remove(&value)?;
        self.total -= weight;
        Some(weight)
    }

    pub fn weight_of(&self, value: u32) -> Option<u64> {
        self.entries.get(&value).copied()
    }

    pub fn contains(&self, value: u32) -> bool {
        self.entries.contains_key(&value)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn total_weight(&self) -> u64 {
        self.total
    }

    /// Entries in ascending address order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.entries.iter().map(|(&v, &w)| (v, w))
    }

    pub fn addresses(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.keys().copied()
    }

    pub fn address_list(&self) -> Vec<Address> {
        self.entries
            .keys()
            .map(|&v| Address::new(v, self.width).expect("entries are validated on insert"))
            .collect()
    }

    /// Replace every weight with `weight`.
    pub fn set_uniform_weight(&mut self, weight: u64) -> Result<()> {
        let total = (self.entries.len() as u64).checked_mul(weight);
        self.total = total.filter(|&t| t <= MAX_TOTAL_WEIGHT).ok_or(Error::WeightOverflow)?;
        for w in self.entries.values_mut() {
            *w = weight;
        }
        Ok(())
    }

    /// Parse a set from `address[,weight]` lines. Weight defaults to 1,
    /// duplicates merge, `#` starts a comment. The first malformed entry is
    /// reported with its line and column.
    pub fn load(reader: impl BufRead, role: Role, width: u8) -> Result<Self> {
        let mut set = WeightedAddressSet::new(width, role)?;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::Parse {
                line: line_no,
                col: 1,
                msg: format!("read failed: {e}"),
            })?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let at = |msg: String, col: usize| Error::Parse { line: line_no, col, msg };
            let (addr_s, weight_s) = match body.split_once(',') {
                Some((a, w)) => (a.trim(), Some(w.trim())),
                None => (body, None),
            };
            let value = parse_address_value(addr_s, width)
                .map_err(|e| at(e.to_string(), line.find(addr_s).map_or(1, |c| c + 1)))?;
            let weight = match weight_s {
                None => 1,
                Some(w) => w.parse::<u64>().map_err(|_| {
                    at(
                        format!("invalid weight {w:?} (non-negative integer required)"),
                        line.find(w).map_or(1, |c| c + 1),
                    )
                })?,
            };
            set.insert(value, weight)
                .map_err(|e| at(e.to_string(), 1))?;
        }
        Ok(set)
    }

    pub fn load_path(path: impl AsRef<Path>, role: Role, width: u8) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref()).map_err(|e| Error::Parse {
            line: 0,
            col: 0,
            msg: format!("cannot open {}: {e}", path.as_ref().display()),
        })?;
        Self::load(std::io::BufReader::new(file), role, width)
    }

    /// Serialize back to the `address,weight` text form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (value, weight) in self.iter() {
            let addr = Address::new(value, self.width).expect("validated");
            out.push_str(&format!("{addr},{weight}\n"));
        }
        out
    }
}

/// Shared knobs of one experiment scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub width: u8,
    pub f_max: usize,
    pub capacity: Option<u64>,
    pub weight_ratio: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn new(width: u8, f_max: usize, capacity: Option<u64>, weight_ratio: f64, seed: u64) -> Result<Self> {
        check_width(width)?;
        if weight_ratio.is_nan() || weight_ratio <= 0.0 {
            return Err(Error::Scenario(format!("weight_ratio must be > 0, got {weight_ratio}")));
        }
        Ok(ScenarioConfig { width, f_max, capacity, weight_ratio, seed })
    }
}

/// Weight distribution for generated good traffic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum WeightDist {
    /// Every address gets the same weight.
    Constant(u64),
    /// Heavy-tailed integer weights: floor(scale / u^(1/alpha)) clamped to
    /// [1, cap].
    Pareto { alpha: f64, scale: u64, cap: u64 },
}

impl WeightDist {
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::Scenario(msg);
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "constant" => {
                let w: u64 = args.parse().map_err(|_| bad(format!("bad constant weight {args:?}")))?;
                Ok(WeightDist::Constant(w))
            }
            "pareto" => {
                let parts: Vec<&str> = args.split(',').collect();
                if parts.len() < 2 || parts.len() > 3 {
                    return Err(bad(format!("pareto expects alpha,scale[,cap], got {args:?}")));
                }
                let alpha: f64 = parts[0].parse().map_err(|_| bad(format!("bad alpha {:?}", parts[0])))?;
                let scale: u64 = parts[1].parse().map_err(|_| bad(format!("bad scale {:?}", parts[1])))?;
                let cap: u64 = if parts.len() == 3 {
                    parts[2].parse().map_err(|_| bad(format!("bad cap {:?}", parts[2])))?
                } else {
                    scale.saturating_mul(1000)
                };
                if alpha.is_nan() || alpha <= 0.0 || scale == 0 || cap < scale {
                    return Err(bad(format!("pareto parameters out of range: {s:?}")));
                }
                Ok(WeightDist::Pareto { alpha, scale, cap })
            }
            other => Err(bad(format!("unknown weight distribution {other:?}"))),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        match *self {
            WeightDist::Constant(w) => w,
            WeightDist::Pareto { alpha, scale, cap } => {
                let u: f64 = rng.gen_range(1e-9..1.0);
                let w = (scale as f64 / u.powf(1.0 / alpha)).floor() as u64;
                w.clamp(1, cap)
            }
        }
    }
}

impl fmt::Display for WeightDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightDist::Constant(w) => write!(f, "constant:{w}"),
            WeightDist::Pareto { alpha, scale, cap } => write!(f, "pareto:{alpha},{scale},{cap}"),
        }
    }
}

/// Generator parameters beyond counts: cluster prefix length band, split
/// bias of the within-cluster cascade, and weight distributions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenOptions {
    /// Inclusive band of cluster prefix lengths.
    pub cluster_len: (u8, u8),
    /// Good-address weight distribution.
    pub weight_dist: WeightDist,
    /// Uniform weight of generated bad addresses.
    pub bad_weight: u64,
}

impl GenOptions {
    pub fn defaults(width: u8) -> Self {
        GenOptions {
            cluster_len: (width / 4, width / 2),
            weight_dist: WeightDist::Constant(1),
            bad_weight: 1,
        }
    }
}

/// A generated workload with the cluster prefixes it was seeded from, so
/// callers can verify spatial clustering.
#[derive(Clone, Debug)]
pub struct GeneratedSet {
    pub set: WeightedAddressSet,
    pub clusters: Vec<Prefix>,
}

const BAD_SALT: u64 = 0x626164; // distinct rng streams per role
const GOOD_SALT: u64 = 0x676f6f64;

/// Generate `n` unique clustered bad addresses. Deterministic given the
/// config seed.
pub fn gen_clustered_blacklist(
    config: &ScenarioConfig,
    n: u64,
    clusters: u64,
) -> Result<WeightedAddressSet> {
    let opts = GenOptions::defaults(config.width);
    Ok(gen_clustered(config, n, clusters, &opts, Role::Bad, BAD_SALT, &[])?.set)
}

/// Generate clustered good traffic with weights drawn from the configured
/// distribution. Deterministic given the config seed.
pub fn gen_good_traffic(
    config: &ScenarioConfig,
    n: u64,
    clusters: u64,
) -> Result<WeightedAddressSet> {
    let opts = GenOptions::defaults(config.width);
    Ok(gen_clustered(config, n, clusters, &opts, Role::Good, GOOD_SALT, &[])?.set)
}

/// Generate a disjoint (bad, good) pair for one scenario; good sampling
/// resamples any collision with the bad set.
pub fn gen_workload(
    config: &ScenarioConfig,
    bad_n: u64,
    bad_clusters: u64,
    good_n: u64,
    good_clusters: u64,
    opts: &GenOptions,
) -> Result<(GeneratedSet, GeneratedSet)> {
    let bad = gen_clustered(config, bad_n, bad_clusters, opts, Role::Bad, BAD_SALT, &[])?;
    let taken: Vec<u32> = bad.set.addresses().collect();
    let good = gen_clustered(config, good_n, good_clusters, opts, Role::Good, GOOD_SALT, &taken)?;
    Ok((bad, good))
}

fn gen_clustered(
    config: &ScenarioConfig,
    n: u64,
    clusters: u64,
    opts: &GenOptions,
    role: Role,
    salt: u64,
    exclude: &[u32],
) -> Result<GeneratedSet> {
    let width = config.width;
    let space = space_size(width);
    if clusters < 1 || n < clusters {
        return Err(Error::Scenario(format!(
            "need n >= clusters >= 1, got n={n} clusters={clusters}"
        )));
    }
    if n + exclude.len() as u64 > space {
        return Err(Error::SpaceExhausted { requested: n, width, capacity: space });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt);
    let excluded: std::collections::HashSet<u32> = exclude.iter().copied().collect();
    let mut chosen: std::collections::HashSet<u32> = std::collections::HashSet::new();
    let mut set = WeightedAddressSet::new(width, role)?;

    // clusters >= n degenerates to uniform sampling over the whole space.
    if clusters >= n {
        let root = Prefix::new(0, 0, width).expect("root prefix");
        let mut picked = Vec::with_capacity(n as usize);
        sample_in_prefix(&mut rng, root, n, &excluded, &mut chosen, &mut picked, 0.5);
        for value in picked {
            let weight = weight_for(role, opts, &mut rng);
            set.insert(value, weight)?;
        }
        return Ok(GeneratedSet { set, clusters: vec![root] });
    }

    let (len_lo, len_hi) = opts.cluster_len;
    let len_hi = len_hi.min(width);
    let len_lo = len_lo.min(len_hi);

    // Seed cluster prefixes, distinct unless the band is saturated.
    let mut cluster_prefixes: Vec<Prefix> = Vec::with_capacity(clusters as usize);
    let mut seen = std::collections::HashSet::new();
    for _ in 0..clusters {
        let mut tries = 0;
        loop {
            let len = rng.gen_range(len_lo..=len_hi);
            let slot = rng.gen_range(0..(1u64 << len)) as u32;
            let base = if len == 0 { 0 } else { slot << (width - len) };
            let pfx = Prefix::new(base, len, width).expect("aligned by construction");
            tries += 1;
            if seen.insert((base, len)) || tries > 64 {
                cluster_prefixes.push(pfx);
                break;
            }
        }
    }

    // Spread n over the clusters: the first n % clusters get one extra.
    let base_count = n / clusters;
    for (i, pfx) in cluster_prefixes.iter().enumerate() {
        let want = base_count + u64::from((i as u64) < n % clusters);
        // Per-cluster split bias makes some subtrees denser than others.
        let bias = rng.gen_range(0.55..0.9);
        let mut picked = Vec::with_capacity(want as usize);
        sample_in_prefix(&mut rng, *pfx, want, &excluded, &mut chosen, &mut picked, bias);
        for value in picked {
            let weight = weight_for(role, opts, &mut rng);
            set.insert(value, weight)?;
        }
    }
    // Saturated clusters yield fewer than requested; make up the shortfall
    // uniformly over the whole space.
    let shortfall = n - set.len() as u64;
    if shortfall > 0 {
        let root = Prefix::new(0, 0, width).expect("root prefix");
        let mut picked = Vec::with_capacity(shortfall as usize);
        sample_in_prefix(&mut rng, root, shortfall, &excluded, &mut chosen, &mut picked, 0.5);
        for value in picked {
            let weight = weight_for(role, opts, &mut rng);
            set.insert(value, weight)?;
        }
    }
    Ok(GeneratedSet { set, clusters: cluster_prefixes })
}

fn weight_for(role: Role, opts: &GenOptions, rng: &mut ChaCha8Rng) -> u64 {
    match role {
        Role::Bad => opts.bad_weight,
        Role::Good => opts.weight_dist.sample(rng),
    }
}

fn count_in(excluded: &std::collections::HashSet<u32>, pfx: &Prefix) -> u64 {
    excluded.iter().filter(|&&v| pfx.contains_value(v)).count() as u64
}

/// Sample `want` fresh unique addresses inside `pfx` via a biased bit
/// cascade; stops early only if the prefix is saturated.
fn sample_in_prefix(
    rng: &mut ChaCha8Rng,
    pfx: Prefix,
    want: u64,
    excluded: &std::collections::HashSet<u32>,
    chosen: &mut std::collections::HashSet<u32>,
    out: &mut Vec<u32>,
    bias: f64,
) {
    let width = pfx.width();
    let free = pfx.span() - count_in(excluded, &pfx) - chosen.iter().filter(|&&v| pfx.contains_value(v)).count() as u64;
    let want = want.min(free);
    let mut produced = 0;
    let mut stalled = 0u32;
    while produced < want {
        let mut value = pfx.base();
        for level in pfx.len()..width {
            let one: bool = rng.gen_bool(bias);
            if one {
                value |= 1 << (width - level - 1);
            }
        }
        if !excluded.contains(&value) && chosen.insert(value) {
            out.push(value);
            produced += 1;
            stalled = 0;
        } else {
            stalled += 1;
            // Dense prefixes defeat rejection sampling; walk to the next
            // free value deterministically.
            if stalled > 128 {
                let mut v = value;
                loop {
                    v = if v == pfx.high() { pfx.low() } else { v + 1 };
                    if !excluded.contains(&v) && chosen.insert(v) {
                        out.push(v);
                        produced += 1;
                        stalled = 0;
                        break;
                    }
                }
            }
        }
    }
}

/// Apply a uniform weighting with ratio `w_b / w_g` to both sets: the ratio
/// is realized with the smallest integer pair (1, round(r)) or
/// (round(1/r), 1).
pub fn apply_weight_ratio(
    bad: &mut WeightedAddressSet,
    good: &mut WeightedAddressSet,
    ratio: f64,
) -> Result<()> {
    if ratio.is_nan() || ratio <= 0.0 {
        return Err(Error::Scenario(format!("weight ratio must be > 0, got {ratio}")));
    }
    let (w_b, w_g) = if ratio >= 1.0 {
        (ratio.round().max(1.0) as u64, 1u64)
    } else {
        (1u64, (1.0 / ratio).round().max(1.0) as u64)
    };
    bad.set_uniform_weight(w_b)?;
    good.set_uniform_weight(w_g)?;
    Ok(())
}

/// A scenario preset: flat `key = value` text with `#` comments.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioPreset {
    pub config: ScenarioConfig,
    pub bad_n: u64,
    pub bad_clusters: u64,
    pub good_n: u64,
    pub good_clusters: u64,
    pub opts: GenOptions,
}

impl ScenarioPreset {
    /// Parse the flat key-value preset format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut preset = ScenarioPreset::builtin("small")?;
        let mut config = preset.config.clone();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Scenario(format!("line {}: expected key = value", idx + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |e: String| Error::Scenario(format!("line {}: {e}", idx + 1));
            let parse_u64 = |v: &str| v.parse::<u64>().map_err(|_| bad(format!("bad integer {v:?}")));
            match key {
                "width" => config.width = parse_u64(value)? as u8,
                "f_max" => config.f_max = parse_u64(value)? as usize,
                "capacity" => config.capacity = Some(parse_u64(value)?),
                "weight_ratio" => {
                    config.weight_ratio =
                        value.parse().map_err(|_| bad(format!("bad ratio {value:?}")))?
                }
                "seed" => config.seed = parse_u64(value)?,
                "bad_n" => preset.bad_n = parse_u64(value)?,
                "bad_clusters" => preset.bad_clusters = parse_u64(value)?,
                "good_n" => preset.good_n = parse_u64(value)?,
                "good_clusters" => preset.good_clusters = parse_u64(value)?,
                "cluster_len_min" => preset.opts.cluster_len.0 = parse_u64(value)? as u8,
                "cluster_len_max" => preset.opts.cluster_len.1 = parse_u64(value)? as u8,
                "weight_dist" => preset.opts.weight_dist = WeightDist::parse(value)?,
                "bad_weight" => preset.opts.bad_weight = parse_u64(value)?,
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        check_width(config.width)?;
        preset.config = config;
        Ok(preset)
    }

    pub fn parse_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            Error::Scenario(format!("cannot read {}: {e}", path.as_ref().display()))
        })?;
        Self::parse(&text)
    }

    /// Built-in presets:
    /// - `small`: quick 8-bit toy scenario.
    /// - `hosting`: a domain hosting 20 servers with ~1,000 incoming
    ///   legitimate connections/s each at 5 KB per connection (KB/s quanta)
    ///   under a 10,000-source clustered attack.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "small" => Ok(ScenarioPreset {
                config: ScenarioConfig::new(8, 4, None, 1.0, 7)?,
                bad_n: 24,
                bad_clusters: 3,
                good_n: 16,
                good_clusters: 4,
                opts: GenOptions::defaults(8),
            }),
            "hosting" => Ok(ScenarioPreset {
                config: ScenarioConfig::new(32, 1000, None, 1.0, 7)?,
                bad_n: 10_000,
                bad_clusters: 50,
                good_n: 2_000,
                good_clusters: 20,
                opts: GenOptions {
                    cluster_len: (8, 16),
                    // 2,000 good sources carrying 100,000 KB/s in aggregate.
                    weight_dist: WeightDist::Constant(50),
                    bad_weight: 1,
                },
            }),
            other => Err(Error::Scenario(format!("unknown preset {other:?}"))),
        }
    }

    pub fn generate(&self) -> Result<(GeneratedSet, GeneratedSet)> {
        gen_workload(
            &self.config,
            self.bad_n,
            self.bad_clusters,
            self.good_n,
            self.good_clusters,
            &self.opts,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn cfg(width: u8, seed: u64) -> ScenarioConfig {
        ScenarioConfig::new(width, 4, None, 1.0, seed).unwrap()
    }

    #[test]
    fn load_defaults_and_merges() {
        let set =
            WeightedAddressSet::load(Cursor::new("10.0.0.1\n"), Role::Bad, 32).unwrap();
        assert_eq!(set.weight_of(0x0a000001), Some(1));

        let set = WeightedAddressSet::load(
            Cursor::new("10.0.0.1,5\n10.0.0.1,2\n"),
            Role::Bad,
            32,
        )
        .unwrap();
        assert_eq!(set.weight_of(0x0a000001), Some(7));
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn load_rejects_negative_weight_with_location() {
        let err = WeightedAddressSet::load(Cursor::new("10.0.0.1,-3\n"), Role::Bad, 32)
            .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_skips_comments_and_reports_bad_lines() {
        let text = "# header\n3,2\n\n5 # trailing comment\nbogus\n";
        let err = WeightedAddressSet::load(Cursor::new(text), Role::Bad, 8).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let a = gen_clustered_blacklist(&cfg(16, 42), 64, 4).unwrap();
        let b = gen_clustered_blacklist(&cfg(16, 42), 64, 4).unwrap();
        assert_eq!(a, b);
        let c = gen_clustered_blacklist(&cfg(16, 43), 64, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn single_cluster_shares_its_prefix() {
        let config = cfg(8, 5);
        let opts = GenOptions::defaults(8);
        let generated =
            gen_clustered(&config, 4, 1, &opts, Role::Bad, BAD_SALT, &[]).unwrap();
        assert_eq!(generated.clusters.len(), 1);
        let pfx = generated.clusters[0];
        assert!(generated.set.addresses().all(|v| pfx.contains_value(v)));
        assert_eq!(generated.set.len(), 4);
    }

    #[test]
    fn clusters_equal_n_degenerates_to_uniform() {
        let set = gen_clustered_blacklist(&cfg(8, 9), 16, 16).unwrap();
        assert_eq!(set.len(), 16);
    }

    #[test]
    fn workload_sets_are_disjoint() {
        let config = cfg(10, 11);
        let opts = GenOptions::defaults(10);
        let (bad, good) = gen_workload(&config, 200, 5, 200, 5, &opts).unwrap();
        assert_eq!(bad.set.len(), 200);
        assert_eq!(good.set.len(), 200);
        for v in good.set.addresses() {
            assert!(!bad.set.contains(v));
        }
    }

    #[test]
    fn clustered_good_traffic_stays_in_seeded_prefixes() {
        let config = cfg(32, 3);
        let opts = GenOptions { cluster_len: (6, 12), ..GenOptions::defaults(32) };
        let (_, good) = gen_workload(&config, 100, 4, 1000, 20, &opts).unwrap();
        let inside = good
            .set
            .addresses()
            .filter(|&v| good.clusters.iter().any(|c| c.contains_value(v)))
            .count();
        assert!(inside * 10 >= good.set.len() * 9, "only {inside}/1000 clustered");
    }

    #[test]
    fn constant_weight_dist() {
        let config = cfg(16, 21);
        let opts = GenOptions { weight_dist: WeightDist::Constant(1), ..GenOptions::defaults(16) };
        let generated =
            gen_clustered(&config, 32, 4, &opts, Role::Good, GOOD_SALT, &[]).unwrap();
        assert!(generated.set.iter().all(|(_, w)| w == 1));
    }

    #[test]
    fn preset_round_trip() {
        let text = "width = 8\nf_max = 6\nseed = 3\nbad_n = 12\nbad_clusters = 2\nweight_dist = pareto:1.5,4\n";
        let preset = ScenarioPreset::parse(text).unwrap();
        assert_eq!(preset.config.width, 8);
        assert_eq!(preset.config.f_max, 6);
        assert_eq!(preset.bad_n, 12);
        let (bad, good) = preset.generate().unwrap();
        assert_eq!(bad.set.len(), 12);
        assert!(!good.set.is_empty());
    }

    #[test]
    fn weight_ratio_uniformizes() {
        let mut bad = WeightedAddressSet::from_entries(8, Role::Bad, [(1, 3), (2, 9)]).unwrap();
        let mut good = WeightedAddressSet::from_entries(8, Role::Good, [(5, 2)]).unwrap();
        apply_weight_ratio(&mut bad, &mut good, 16.0).unwrap();
        assert!(bad.iter().all(|(_, w)| w == 16));
        assert!(good.iter().all(|(_, w)| w == 1));
    }
}
