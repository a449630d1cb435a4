//! Exhaustive feasibility census of small circuit shapes.
//!
//! A circuit is *type 0* when every component is a threshold function,
//! *type 1* when some but not all are, and *type 2* when none are.

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write as _};
use std::path::PathBuf;

use crate::circuit::{table_bits, Circuit};
use crate::lp::SolverOptions;
use crate::par::{self, Execution};
use crate::synth;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CircuitType {
    AllThreshold = 0,
    SomeThreshold = 1,
    NoThreshold = 2,
}

impl CircuitType {
    pub fn number(self) -> u8 {
        self as u8
    }

    fn from_number(v: u8) -> Option<Self> {
        match v {
            0 => Some(Self::AllThreshold),
            1 => Some(Self::SomeThreshold),
            2 => Some(Self::NoThreshold),
            _ => None,
        }
    }

    fn from_counts(threshold: usize, total: usize) -> Self {
        if threshold == total {
            Self::AllThreshold
        } else if threshold == 0 {
            Self::NoThreshold
        } else {
            Self::SomeThreshold
        }
    }
}

impl fmt::Display for CircuitType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "type {}", self.number())
    }
}

/// Type of a circuit, deciding each component with an LP.
pub fn circuit_type(c: &Circuit) -> Result<CircuitType> {
    let mut threshold = 0;
    for comp in c.components() {
        if comp.is_threshold()?.is_some() {
            threshold += 1;
        }
    }
    Ok(CircuitType::from_counts(threshold, c.m()))
}

/// `table[i]` is whether the shape-`(n, 1)` circuit with index `i` is a threshold function.
pub fn threshold_table(n: usize, solver: &SolverOptions, exec: Execution) -> Result<Vec<bool>> {
    let bits = table_bits(n, 1);
    if bits > 20 {
        return Err(Error::Budget {
            what: "threshold table",
            bits,
            cap: 20,
        });
    }
    par::map_range(exec, 0..1u64 << bits, |i| {
        let c = Circuit::from_index(n, 1, i)?;
        synth::is_feasible(&c, solver)
    })
    .into_iter()
    .collect()
}

/// Index of component `i` of circuit `c` as a shape-`(n, 1)` circuit.
fn component_index(c: &Circuit, i: usize) -> u64 {
    c.output_indices()
        .iter()
        .enumerate()
        .fold(0, |acc, (x, &y)| acc | ((y >> i) & 1) << x)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationReport {
    pub n: usize,
    pub m: usize,
    /// Circuits of each type, indexed by type number.
    pub counts: [u64; 3],
    /// Feasible circuits of each type.
    pub feasible: [u64; 3],
}

impl ClassificationReport {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn total_feasible(&self) -> u64 {
        self.feasible.iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("shape,type,count,feasible_count\n");
        for t in 0..3 {
            writeln!(out, "{}x{},{t},{},{}", self.n, self.m, self.counts[t], self.feasible[t]).unwrap();
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("shape ({}, {}): {} circuits, {} feasible\n", self.n, self.m, self.total(), self.total_feasible());
        out.push_str("type    count  feasible\n");
        for t in 0..3 {
            writeln!(out, "{t:>4} {:>8} {:>9}", self.counts[t], self.feasible[t]).unwrap();
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    pub solver: SolverOptions,
    pub execution: Execution,
    /// Largest `log2` of the number of circuits to enumerate (`m·2ⁿ`).
    pub max_bits: u32,
    /// Resumable on-disk cache of per-circuit results.
    pub cache: Option<PathBuf>,
    /// Circuits classified between cache flushes.
    pub chunk: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            execution: Execution::default(),
            max_bits: 20,
            cache: None,
            chunk: 4096,
        }
    }
}

/// Per-circuit record as stored in the cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircuitRecord {
    pub index: u64,
    pub kind: CircuitType,
    pub feasible: bool,
}

const CACHE_HEADER: &str = "# ising classify cache v1: n m index type feasible";

fn read_cache(path: &PathBuf, n: usize, m: usize) -> Result<HashMap<u64, CircuitRecord>> {
    let mut out = HashMap::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
        Err(e) => return Err(e.into()),
    };
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let parsed = (|| -> Option<(usize, usize, CircuitRecord)> {
            if f.len() != 5 {
                return None;
            }
            Some((
                f[0].parse().ok()?,
                f[1].parse().ok()?,
                CircuitRecord {
                    index: f[2].parse().ok()?,
                    kind: CircuitType::from_number(f[3].parse().ok()?)?,
                    feasible: match f[4] {
                        "1" => true,
                        "0" => false,
                        _ => return None,
                    },
                },
            ))
        })();
        match parsed {
            Some((cn, cm, rec)) if (cn, cm) == (n, m) => {
                out.insert(rec.index, rec);
            }
            Some(_) => {}
            // A partially written final line from an interrupted run is harmless.
            None => log::warn!("ignoring malformed cache line {}", k + 1),
        }
    }
    Ok(out)
}

fn append_cache(path: &PathBuf, n: usize, m: usize, records: &[CircuitRecord]) -> Result<()> {
    let mut f = OpenOptions::new().create(true).read(true).append(true).open(path)?;
    let len = f.metadata()?.len();
    let mut buf = String::new();
    if len == 0 {
        buf.push_str(CACHE_HEADER);
        buf.push('\n');
    } else {
        // Start on a fresh line if an interrupted run left a torn one.
        let mut last = [0u8; 1];
        f.seek(SeekFrom::Start(len - 1))?;
        f.read_exact(&mut last)?;
        if last[0] != b'\n' {
            buf.push('\n');
        }
    }
    for r in records {
        writeln!(buf, "{n} {m} {} {} {}", r.index, r.kind.number(), u8::from(r.feasible)).unwrap();
    }
    f.write_all(buf.as_bytes())?;
    f.flush()?;
    Ok(())
}

fn classify_one(n: usize, m: usize, index: u64, thresholds: &[bool], solver: &SolverOptions) -> Result<CircuitRecord> {
    let c = Circuit::from_index(n, m, index)?;
    let threshold = (0..m).filter(|&i| thresholds[component_index(&c, i) as usize]).count();
    Ok(CircuitRecord {
        index,
        kind: CircuitType::from_counts(threshold, m),
        feasible: synth::is_feasible(&c, solver)?,
    })
}

/// Classifies every shape-`(n, m)` circuit.
///
/// Totals do not depend on the execution mode or on how much of the work
/// came from the cache.
pub fn classify_shape(n: usize, m: usize, opts: &ClassifyOptions) -> Result<ClassificationReport> {
    Ok(summarize(n, m, &classify_records(n, m, opts)?))
}

/// Per-circuit results in canonical order.
pub fn classify_records(n: usize, m: usize, opts: &ClassifyOptions) -> Result<Vec<CircuitRecord>> {
    let bits = table_bits(n, m);
    if bits > opts.max_bits || bits >= 64 {
        return Err(Error::Budget {
            what: "circuit enumeration",
            bits,
            cap: opts.max_bits,
        });
    }
    let total = 1u64 << bits;
    let thresholds = threshold_table(n, &opts.solver, opts.execution)?;
    let mut cached = match &opts.cache {
        Some(p) => read_cache(p, n, m)?,
        None => HashMap::new(),
    };
    let pending: Vec<u64> = (0..total).filter(|i| !cached.contains_key(i)).collect();
    if !cached.is_empty() {
        log::info!("resuming: {} of {total} circuits cached", total - pending.len() as u64);
    }
    for chunk in pending.chunks(opts.chunk.max(1) as usize) {
        let records: Vec<CircuitRecord> = par::map_slice(opts.execution, chunk, |&i| {
            classify_one(n, m, i, &thresholds, &opts.solver)
        })
        .into_iter()
        .collect::<Result<_>>()?;
        if let Some(p) = &opts.cache {
            append_cache(p, n, m, &records)?;
        }
        cached.extend(records.into_iter().map(|r| (r.index, r)));
    }
    Ok((0..total).map(|i| cached[&i]).collect())
}

pub fn summarize(n: usize, m: usize, records: &[CircuitRecord]) -> ClassificationReport {
    let mut counts = [0u64; 3];
    let mut feasible = [0u64; 3];
    for r in records {
        let t = r.kind.number() as usize;
        counts[t] += 1;
        feasible[t] += u64::from(r.feasible);
    }
    ClassificationReport {
        n,
        m,
        counts,
        feasible,
    }
}

/// Orbit of a shape-`(2, 1)` truth table (as an index) under input
/// negations, input swap and output negation.
pub fn spin_orbit_2(index: u64) -> BTreeSet<u64> {
    let table = |idx: u64| -> Vec<u64> { (0..4).map(|x| (idx >> x) & 1).collect() };
    let pack = |t: &[u64]| -> u64 { t.iter().enumerate().fold(0, |a, (x, &b)| a | b << x) };
    let base = table(index);
    let mut orbit = BTreeSet::new();
    for neg in 0..4u64 {
        for swap in [false, true] {
            for out_neg in [0u64, 1] {
                let t: Vec<u64> = (0..4u64)
                    .map(|x| {
                        let mut x1 = x & 1;
                        let mut x2 = (x >> 1) & 1;
                        if swap {
                            std::mem::swap(&mut x1, &mut x2);
                        }
                        let src = (x1 | x2 << 1) ^ neg;
                        base[src as usize] ^ out_neg
                    })
                    .collect();
                orbit.insert(pack(&t));
            }
        }
    }
    orbit
}

/// A circuit where LP feasibility and the `(2, m)` characterization disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub index: u64,
    pub feasible: bool,
    pub predicted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremCheck {
    pub m: usize,
    pub checked: u64,
    pub mismatches: Vec<Mismatch>,
}

/// Predicted feasibility of a shape-`(2, m)` circuit: no XOR-type component,
/// or at least one AND-type component.
pub fn predicted_feasible_2m(c: &Circuit) -> bool {
    let xor = spin_orbit_2(crate::circuit::gates::xor(2).index().expect("small"));
    let and = spin_orbit_2(crate::circuit::gates::and(2).index().expect("small"));
    let comps: Vec<u64> = (0..c.m()).map(|i| component_index(c, i)).collect();
    !comps.iter().any(|k| xor.contains(k)) || comps.iter().any(|k| and.contains(k))
}

/// Compares LP feasibility of every shape-`(2, m)` circuit with [`predicted_feasible_2m`].
pub fn check_2m_theorem(m: usize, solver: &SolverOptions, exec: Execution) -> Result<TheoremCheck> {
    if !(1..=3).contains(&m) {
        return Err(Error::Invalid(format!("the (2, m) check supports 1 ≤ m ≤ 3, got {m}")));
    }
    let total = 1u64 << table_bits(2, m);
    let results = par::map_range(exec, 0..total, |i| -> Result<Option<Mismatch>> {
        let c = Circuit::from_index(2, m, i)?;
        let feasible = synth::is_feasible(&c, solver)?;
        let predicted = predicted_feasible_2m(&c);
        Ok((feasible != predicted).then_some(Mismatch {
            index: i,
            feasible,
            predicted,
        }))
    });
    let mismatches = results.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    Ok(TheoremCheck {
        m,
        checked: total,
        mismatches,
    })
}

/// Whether every shape-`(1, m)` circuit is feasible.
pub fn all_feasible(n: usize, m: usize, solver: &SolverOptions, exec: Execution) -> Result<bool> {
    let bits = table_bits(n, m);
    if bits > 20 {
        return Err(Error::Budget {
            what: "circuit enumeration",
            bits,
            cap: 20,
        });
    }
    let ok = par::map_range(exec, 0..1u64 << bits, |i| synth::is_feasible(&Circuit::from_index(n, m, i)?, solver));
    Ok(ok.into_iter().collect::<Result<Vec<bool>>>()?.into_iter().all(|b| b))
}
