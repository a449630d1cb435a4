//! Nearest-site (Voronoi) solutions and the Hamiltonians they induce.
//!
//! An affine embedding `B(y) = T y + b` places the `2^m` output states in
//! input space `ℝⁿ`. It solves a circuit when every input `x` is strictly
//! closer to `B f(x)` than to any other image point. Expanding
//! `½‖x - B y‖²` then gives an encoding Hamiltonian
//! `H(x, y) = -Tᵀ(x - b)·y + Σ_{i<j} (TᵀT)_ij y_i y_j`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, SpinState};
use crate::hamiltonian::{Couplings, Hamiltonian};
use crate::par::{self, Execution};
use crate::{Error, Result};

/// `B(y) = T y + b` with `T` an `n × m` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineEmbedding {
    t: Vec<Vec<f64>>,
    b: Vec<f64>,
    m: usize,
}

fn dist2(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn dot(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a * b).sum()
}

impl AffineEmbedding {
    pub fn new(t: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        if t.len() != b.len() {
            return Err(Error::Dimension {
                expected: b.len(),
                got: t.len(),
            });
        }
        let m = t.first().map_or(0, Vec::len);
        for row in &t {
            if row.len() != m {
                return Err(Error::Dimension {
                    expected: m,
                    got: row.len(),
                });
            }
        }
        if t.iter().flatten().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite embedding entry".into()));
        }
        Ok(Self { t, b, m })
    }

    /// The identity embedding of `Σⁿ` into `ℝⁿ`.
    pub fn identity(n: usize) -> Self {
        let t = (0..n)
            .map(|r| (0..n).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            t,
            b: vec![0.0; n],
            m: n,
        }
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn linear(&self) -> &[Vec<f64>] {
        &self.t
    }

    pub fn offset(&self) -> &[f64] {
        &self.b
    }

    /// `B(y) = T y + b`.
    pub fn image(&self, y: SpinState) -> Vec<f64> {
        self.t
            .iter()
            .zip(&self.b)
            .map(|(row, bi)| {
                let mut acc = *bi;
                for (j, tij) in row.iter().enumerate() {
                    acc += tij * y.spin_f64(j);
                }
                acc
            })
            .collect()
    }

    /// All `2^m` image points in canonical output order.
    pub fn sites(&self) -> Vec<Vec<f64>> {
        SpinState::all(self.m).map(|y| self.image(y)).collect()
    }

    /// The pseudo-adjoint `B*(x) = Tᵀ(x - b)`.
    pub fn pseudo_adjoint(&self, x: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|j| (0..self.n()).map(|i| self.t[i][j] * (x[i] - self.b[i])).sum())
            .collect()
    }

    /// `J_T`: strictly upper-triangular part of `TᵀT`.
    pub fn couplings(&self) -> Couplings {
        let gram: Vec<Vec<f64>> = (0..self.m)
            .map(|i| {
                (0..self.m)
                    .map(|j| (0..self.n()).map(|k| self.t[k][i] * self.t[k][j]).sum())
                    .collect()
            })
            .collect();
        Couplings::upper_part(&gram)
    }

    /// First pair of distinct outputs with identical images, compared exactly.
    pub fn first_collision(&self) -> Option<(SpinState, SpinState)> {
        let sites = self.sites();
        for i in 0..sites.len() {
            for j in i + 1..sites.len() {
                if sites[i] == sites[j] {
                    return Some((
                        SpinState::from_index(i as u64, self.m),
                        SpinState::from_index(j as u64, self.m),
                    ));
                }
            }
        }
        None
    }

    pub fn is_injective(&self) -> bool {
        self.first_collision().is_none()
    }

    /// The circuit that sends each input to its nearest image point, if every
    /// nearest point wins by more than `margin` in squared distance.
    pub fn induced_circuit(&self, margin: f64) -> Option<Circuit> {
        let n = self.n();
        let sites = self.sites();
        let mut table = Vec::with_capacity(1 << n);
        for x in SpinState::all(n) {
            let xf = x.to_f64();
            let d: Vec<f64> = sites.iter().map(|s| dist2(&xf, s)).collect();
            let best = (0..d.len()).min_by(|&a, &b| d[a].total_cmp(&d[b]))?;
            if (0..d.len()).any(|k| k != best && d[k] - d[best] <= margin) {
                return None;
            }
            table.push(SpinState::from_index(best as u64, self.m));
        }
        Circuit::new(n, self.m, table).ok()
    }

    /// Text format: `emb <n> <m>`, then the `n` rows of `T`, then `b`.
    pub fn to_text(&self) -> String {
        let mut out = format!("emb {} {}\n", self.n(), self.m);
        for row in &self.t {
            let v: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
            writeln!(out, "{}", v.join(" ")).unwrap();
        }
        let v: Vec<String> = self.b.iter().map(|x| format!("{x:?}")).collect();
        writeln!(out, "{}", v.join(" ")).unwrap();
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        let (hl, header) = lines.next().ok_or(perr(0, "empty embedding".into()))?;
        let f: Vec<&str> = header.split_whitespace().collect();
        if f.len() != 3 || f[0] != "emb" {
            return Err(perr(hl, "expected `emb <n> <m>`".into()));
        }
        let n: usize = f[1].parse().map_err(|_| perr(hl, "bad n".into()))?;
        let m: usize = f[2].parse().map_err(|_| perr(hl, "bad m".into()))?;
        let mut numbers = |want: usize| -> Result<Vec<f64>> {
            let (line, body) = lines.next().ok_or(perr(0, "embedding ends early".into()))?;
            let v: Vec<f64> = body
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| perr(line, format!("bad value `{s}`"))))
                .collect::<Result<_>>()?;
            if v.len() != want {
                return Err(perr(line, format!("expected {want} values, found {}", v.len())));
            }
            Ok(v)
        };
        let t = (0..n).map(|_| numbers(m)).collect::<Result<Vec<_>>>()?;
        let b = numbers(n)?;
        if let Some((line, _)) = lines.next() {
            return Err(perr(line, "trailing content".into()));
        }
        let mut e = Self::new(t, b)?;
        e.m = m;
        Ok(e)
    }
}

/// Half-space test: `x` lies in the open Voronoi cell of `sites[p]`.
///
/// `⟨p - q, x⟩ + ½(‖q‖² - ‖p‖²) > 0` for every other site `q`.
pub fn voronoi_cell_membership(sites: &[Vec<f64>], p: usize, x: &[f64]) -> Result<bool> {
    let site = sites.get(p).ok_or(Error::OutOfRange {
        index: p,
        size: sites.len(),
    })?;
    let pp = dot(site, site);
    Ok(sites.iter().enumerate().filter(|&(q, _)| q != p).all(|(_, q)| {
        let diff: Vec<f64> = site.iter().zip(q).map(|(a, b)| a - b).collect();
        dot(&diff, x) + 0.5 * (dot(q, q) - pp) > 0.0
    }))
}

/// Distance test: `x` is strictly closer to `sites[p]` than to every other site.
pub fn nearest_site_membership(sites: &[Vec<f64>], p: usize, x: &[f64]) -> Result<bool> {
    let site = sites.get(p).ok_or(Error::OutOfRange {
        index: p,
        size: sites.len(),
    })?;
    let d = dist2(x, site);
    Ok(sites
        .iter()
        .enumerate()
        .filter(|&(q, _)| q != p)
        .all(|(_, q)| dist2(x, q) > d))
}

fn check_dims(c: &Circuit, b: &AffineEmbedding) -> Result<()> {
    if (b.n(), b.m()) != c.shape() {
        return Err(Error::Shape(format!(
            "embedding maps ℝ^{} into ℝ^{} but the circuit has shape {:?}",
            b.m(),
            b.n(),
            c.shape()
        )));
    }
    Ok(())
}

/// `min_x min_{y ≠ f(x)} ‖x - B y‖² - ‖x - B f(x)‖²`; positive iff `B` solves `c`.
pub fn voronoi_slack(c: &Circuit, b: &AffineEmbedding) -> Result<f64> {
    check_dims(c, b)?;
    let sites = b.sites();
    let mut slack = f64::INFINITY;
    for (x, fx) in c.rows() {
        let xf = x.to_f64();
        let own = dist2(&xf, &sites[fx.index() as usize]);
        for (k, s) in sites.iter().enumerate() {
            if k as u64 != fx.index() {
                slack = slack.min(dist2(&xf, s) - own);
            }
        }
    }
    Ok(slack)
}

/// Whether every input is strictly closer to `B f(x)` than to every other image point.
pub fn is_voronoi_solution(c: &Circuit, b: &AffineEmbedding) -> Result<bool> {
    Ok(voronoi_slack(c, b)? > 0.0)
}

/// Perturbs `T` until `B` is injective on `Σᵐ`, keeping it a solution of `c`.
///
/// Each round separates the first colliding pair `(y, z)` by nudging one
/// entry `T[r][j]`, where `j` is a coordinate on which `y` and `z` differ
/// and `r` is drawn from the seeded generator. The step is small enough
/// that no squared distance moves by more than `3/8` of the current slack
/// and no two distinct image points can meet.
pub fn perturb_to_injective(c: &Circuit, b: &AffineEmbedding, seed: u64) -> Result<AffineEmbedding> {
    if !is_voronoi_solution(c, b)? {
        return Err(Error::NotVoronoiSolution);
    }
    if b.n() == 0 && b.m() > 0 {
        return Err(Error::NotInjective);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = b.clone();
    while let Some((y, z)) = cur.first_collision() {
        let slack = voronoi_slack(c, &cur)?;
        let sites = cur.sites();
        let reach = c
            .rows()
            .flat_map(|(x, _)| {
                let xf = x.to_f64();
                sites.iter().map(move |s| dist2(&xf, s).sqrt()).collect::<Vec<_>>()
            })
            .fold(0.0f64, f64::max);
        let mut gap = f64::INFINITY;
        for i in 0..sites.len() {
            for k in i + 1..sites.len() {
                if sites[i] != sites[k] {
                    gap = gap.min(dist2(&sites[i], &sites[k]).sqrt());
                }
            }
        }
        let bound = (slack / (8.0 * (reach + 1.0))).min(gap / 4.0).min(1.0);
        let j = (y.index() ^ z.index()).trailing_zeros() as usize;
        let r = rng.gen_range(0..cur.n());
        let scale = rng.gen_range(0.5..1.0);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        cur.t[r][j] += sign * scale * bound;
    }
    debug_assert!(is_voronoi_solution(c, &cur).unwrap_or(false));
    Ok(cur)
}

/// The Hamiltonian `-B*(x)·y + ⟨J_T, y^{⊗2}⟩_F` of an injective Voronoi solution.
pub fn hamiltonian_from_voronoi(c: &Circuit, b: &AffineEmbedding) -> Result<Hamiltonian> {
    if !is_voronoi_solution(c, b)? {
        return Err(Error::NotVoronoiSolution);
    }
    if !b.is_injective() {
        return Err(Error::NotInjective);
    }
    let (n, m) = c.shape();
    let mut h = Hamiltonian::zeros(n, m);
    for j in 0..m {
        h.set_bias(j, (0..n).map(|i| b.t[i][j] * b.b[i]).sum());
        for k in 0..n {
            h.set_input_coupling(k, j, -b.t[k][j]);
        }
    }
    *h.couplings_mut() = b.couplings();
    Ok(h)
}

/// Random embeddings with entries uniform in `[-scale, scale]`.
pub fn random_embedding(n: usize, m: usize, scale: f64, rng: &mut impl Rng) -> AffineEmbedding {
    let t = (0..n)
        .map(|_| (0..m).map(|_| rng.gen_range(-scale..=scale)).collect())
        .collect();
    let b = (0..n).map(|_| rng.gen_range(-scale..=scale)).collect();
    AffineEmbedding { t, b, m }
}

/// Seeded random search for a Voronoi solution of `c`; trial `t` draws from stream `t`.
pub fn random_embedding_search(
    c: &Circuit,
    seed: u64,
    trials: u64,
    scale: f64,
    exec: Execution,
) -> Option<(u64, AffineEmbedding)> {
    let (n, m) = c.shape();
    par::find_first(exec, 0..trials, |trial| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let e = random_embedding(n, m, scale, &mut rng);
        matches!(is_voronoi_solution(c, &e), Ok(true)).then_some((trial, e))
    })
}
