//! Dressed doublets, amplitude tables and the coefficients `A_ij^(q)` of the
//! atomic raising operator in the dressed basis.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::hamiltonian::{assemble, flat_index, Atom, BareBasisIndex, HamiltonianSpec};
use crate::linalg::{diagonalize, EigenDecomposition};
use crate::Level;

#[derive(Debug, Error, PartialEq)]
pub enum DressingError {
    #[error("band structure: {0}")]
    Structure(String),
    #[error("doublet gap {gap:e} is not below the laser frequency {omega_l}")]
    GapTooLarge { gap: f64, omega_l: f64 },
    #[error("degenerate doublet at band {band}: gap {gap:e}")]
    Degenerate { band: i64, gap: f64 },
    #[error(
        "amplitudes depend on the photon number (max deviation {deviation:e} > {tol:e} between bands {reference} and {other}); the laser-statistics hypothesis fails"
    )]
    PhotonNumberDependence {
        deviation: f64,
        tol: f64,
        reference: i64,
        other: i64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DressingConfig {
    /// Fraction of bands discarded at each end of the ladder.
    pub edge_fraction: f64,
    /// Allowed spread of amplitudes between the central band and its neighbours.
    pub n_independence_tol: f64,
    /// Amplitude mass allowed beyond the truncated `p` window.
    pub tail_mass: f64,
    /// Coefficients with `|A|²` below this are dropped.
    pub prune: f64,
}

impl Default for DressingConfig {
    fn default() -> Self {
        Self {
            edge_fraction: 0.2,
            n_independence_tol: 1e-6,
            tail_mass: 1e-12,
            prune: 1e-14,
        }
    }
}

/// One retained doublet. `vec1` belongs to the upper level.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub n: i64,
    pub e1: f64,
    pub e2: f64,
    pub vec1: Vec<f64>,
    pub vec2: Vec<f64>,
}

impl Band {
    pub fn gap(&self) -> f64 {
        self.e1 - self.e2
    }

    pub fn energy(&self, level: Level) -> f64 {
        match level {
            Level::One => self.e1,
            Level::Two => self.e2,
        }
    }

    pub fn vector(&self, level: Level) -> &[f64] {
        match level {
            Level::One => &self.vec1,
            Level::Two => &self.vec2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DressedSolution {
    pub bands: Vec<Band>,
    /// Label of the central doublet.
    pub central: i64,
    pub omega_gap: f64,
    pub omega_l: f64,
    pub n_levels: usize,
    /// `max |gap(N) − Ω| / Ω` over retained bands.
    pub band_stability: f64,
    /// `max |E_j(N+1) − E_j(N) − ω_L| / ω_L` over retained bands.
    pub ladder_deviation: f64,
}

impl DressedSolution {
    pub fn band(&self, n: i64) -> Option<&Band> {
        let first = self.bands.first()?.n;
        usize::try_from(n - first)
            .ok()
            .and_then(|k| self.bands.get(k))
    }

    pub fn central_band(&self) -> &Band {
        self.band(self.central).expect("central band is retained")
    }

    pub fn retained(&self) -> (i64, i64) {
        (self.bands[0].n, self.bands[self.bands.len() - 1].n)
    }
}

fn excitations(v: &[f64]) -> f64 {
    v.iter()
        .enumerate()
        .map(|(i, x)| x * x * BareBasisIndex::from_flat(i).excitations() as f64)
        .sum()
}

/// Groups eigenpairs into doublets, one per photon band.
///
/// The central doublet is the pair whose mean excitation number is closest to
/// the middle of the ladder; every other eigenvalue is assigned to a band by
/// its distance from that doublet in units of `ω_L`. Signs follow the RWA
/// composition: the upper state has `⟨g,N+1|1⟩ + ⟨e,N|1⟩ ≥ 0`, the lower one
/// `⟨g,N+1|2⟩ − ⟨e,N|2⟩ ≥ 0`.
pub fn extract_doublets(
    eig: &EigenDecomposition,
    spec: &HamiltonianSpec,
    cfg: &DressingConfig,
) -> Result<DressedSolution, DressingError> {
    let n_levels = spec.n_levels;
    let omega_l = spec.omega_l;
    let dim = eig.len();
    if dim != 2 * n_levels || n_levels < 4 {
        return Err(DressingError::Structure(format!(
            "{dim} eigenpairs for a ladder of {n_levels} levels"
        )));
    }

    let middle = (n_levels / 2) as f64;
    let mut order: Vec<(f64, usize)> = (0..dim)
        .map(|k| ((excitations(&eig.vector(k)) - middle).abs(), k))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut lo, mut hi) = (order[0].1, order[1].1);
    if eig.values[lo] > eig.values[hi] {
        std::mem::swap(&mut lo, &mut hi);
    }
    let central = n_levels as i64 / 2 - 1;
    let gap = eig.values[hi] - eig.values[lo];
    if gap >= omega_l {
        return Err(DressingError::GapTooLarge { gap, omega_l });
    }
    let reference = 0.5 * (eig.values[lo] + eig.values[hi]) - central as f64 * omega_l;

    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (k, &e) in eig.values.iter().enumerate() {
        let band = ((e - reference) / omega_l).round() as i64;
        groups.entry(band).or_default().push(k);
    }
    let n_bands = groups.len();
    let drop = (cfg.edge_fraction * n_bands as f64).floor() as usize;
    if 2 * drop >= n_bands {
        return Err(DressingError::Structure(format!(
            "edge policy drops every one of {n_bands} bands"
        )));
    }
    let kept: Vec<(i64, Vec<usize>)> = groups
        .into_iter()
        .skip(drop)
        .take(n_bands - 2 * drop)
        .collect();
    for w in kept.windows(2) {
        if w[1].0 != w[0].0 + 1 {
            return Err(DressingError::Structure(format!(
                "no eigenpair falls in band {}",
                w[0].0 + 1
            )));
        }
    }

    let mut bands = Vec::with_capacity(kept.len());
    for (n, members) in kept {
        if members.len() != 2 {
            return Err(DressingError::Structure(format!(
                "band {n} holds {} eigenpairs instead of a doublet",
                members.len()
            )));
        }
        let (k_lo, k_hi) = if eig.values[members[0]] <= eig.values[members[1]] {
            (members[0], members[1])
        } else {
            (members[1], members[0])
        };
        let (e1, e2) = (eig.values[k_hi], eig.values[k_lo]);
        if e1 - e2 < 1e-12 * omega_l {
            return Err(DressingError::Degenerate {
                band: n,
                gap: e1 - e2,
            });
        }
        let mut vec1 = eig.vector(k_hi);
        let mut vec2 = eig.vector(k_lo);
        fix_phase(&mut vec1, n, n_levels, 1.0);
        fix_phase(&mut vec2, n, n_levels, -1.0);
        bands.push(Band {
            n,
            e1,
            e2,
            vec1,
            vec2,
        });
    }

    let omega_gap = bands
        .iter()
        .find(|b| b.n == central)
        .map(Band::gap)
        .ok_or_else(|| {
            DressingError::Structure(format!("central band {central} was discarded"))
        })?;
    let band_stability = bands
        .iter()
        .map(|b| (b.gap() - omega_gap).abs() / omega_gap)
        .fold(0.0, f64::max);
    let ladder_deviation = bands
        .windows(2)
        .flat_map(|w| {
            Level::BOTH
                .map(|l| (w[1].energy(l) - w[0].energy(l) - omega_l).abs() / omega_l)
        })
        .fold(0.0, f64::max);

    Ok(DressedSolution {
        bands,
        central,
        omega_gap,
        omega_l,
        n_levels,
        band_stability,
        ladder_deviation,
    })
}

// `sign` is +1 for the upper level and −1 for the lower one.
fn fix_phase(v: &mut [f64], band: i64, n_levels: usize, sign: f64) {
    let at = |atom, n| flat_index(atom, n, n_levels).map_or(0.0, |i| v[i]);
    let mut probe = at(Atom::Ground, band + 1) + sign * at(Atom::Excited, band);
    if probe.abs() < 1e-8 {
        // far from the RWA composition: fall back to the largest component
        let big = v
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(0.0);
        probe = big;
    }
    if probe < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Assembles, diagonalizes and extracts doublets in one go.
pub fn dress(spec: &HamiltonianSpec, cfg: &DressingConfig) -> crate::Result<DressedSolution> {
    let h = assemble(spec)?;
    let eig = diagonalize(&h)?;
    Ok(extract_doublets(&eig, spec, cfg)?)
}

/// `α_j^(p) = ⟨g,N+1−p|j(N)⟩`, `β_j^(p) = ⟨e,N−p|j(N)⟩` for `|p| ≤ p_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeTable {
    pub band: i64,
    pub p_max: i64,
    alpha: [Vec<f64>; 2],
    beta: [Vec<f64>; 2],
}

impl AmplitudeTable {
    /// Builds a table from explicit `(α, β)` vectors indexed by `p + p_max`.
    pub fn from_parts(band: i64, p_max: i64, alpha: [Vec<f64>; 2], beta: [Vec<f64>; 2]) -> Self {
        let len = (2 * p_max + 1) as usize;
        assert!(alpha.iter().chain(&beta).all(|v| v.len() == len));
        Self {
            band,
            p_max,
            alpha,
            beta,
        }
    }

    fn slot(&self, p: i64) -> Option<usize> {
        (p.abs() <= self.p_max).then(|| (p + self.p_max) as usize)
    }

    pub fn alpha(&self, j: Level, p: i64) -> f64 {
        self.slot(p).map_or(0.0, |s| self.alpha[j.index()][s])
    }

    pub fn beta(&self, j: Level, p: i64) -> f64 {
        self.slot(p).map_or(0.0, |s| self.beta[j.index()][s])
    }

    pub fn p_range(&self) -> std::ops::RangeInclusive<i64> {
        -self.p_max..=self.p_max
    }

    pub fn norm(&self, j: Level) -> f64 {
        self.p_range()
            .map(|p| self.alpha(j, p).powi(2) + self.beta(j, p).powi(2))
            .sum()
    }

    pub fn overlap(&self) -> f64 {
        self.p_range()
            .map(|p| {
                self.alpha(Level::One, p) * self.alpha(Level::Two, p)
                    + self.beta(Level::One, p) * self.beta(Level::Two, p)
            })
            .sum()
    }

    /// `Σ_p |β_j^(p)|²`
    pub fn excited_weight(&self, j: Level) -> f64 {
        self.p_range().map(|p| self.beta(j, p).powi(2)).sum()
    }

    /// `Σ_p |α_j^(p)|²`
    pub fn ground_weight(&self, j: Level) -> f64 {
        self.p_range().map(|p| self.alpha(j, p).powi(2)).sum()
    }

    pub fn max_deviation(&self, other: &AmplitudeTable) -> f64 {
        let p = self.p_max.max(other.p_max);
        let mut worst = 0.0f64;
        for j in Level::BOTH {
            for p in -p..=p {
                worst = worst
                    .max((self.alpha(j, p) - other.alpha(j, p)).abs())
                    .max((self.beta(j, p) - other.beta(j, p)).abs());
            }
        }
        worst
    }
}

/// Amplitude table of band `n`, truncated to the smallest `p_max` whose
/// discarded mass stays below `cfg.tail_mass` for both levels.
pub fn amplitudes_at(
    solution: &DressedSolution,
    n: i64,
    cfg: &DressingConfig,
) -> Result<AmplitudeTable, DressingError> {
    let band = solution
        .band(n)
        .ok_or_else(|| DressingError::Structure(format!("band {n} is not retained")))?;
    let levels = solution.n_levels;
    let reach = levels as i64;
    let read = |v: &[f64], atom, photons: i64| flat_index(atom, photons, levels).map_or(0.0, |i| v[i]);
    let mass = |p: i64| -> f64 {
        Level::BOTH
            .iter()
            .map(|&j| {
                let v = band.vector(j);
                read(v, Atom::Ground, n + 1 - p).powi(2) + read(v, Atom::Excited, n - p).powi(2)
            })
            .fold(0.0, f64::max)
    };
    // grow the tail from the outside in until it would reach the budget
    let mut tail = 0.0;
    let mut p_max = reach + 1;
    for k in (1..=reach + 1).rev() {
        let shell = mass(k) + mass(-k);
        if tail + shell >= cfg.tail_mass {
            break;
        }
        tail += shell;
        p_max = k - 1;
    }
    let collect = |j: Level, atom: Atom| -> Vec<f64> {
        (-p_max..=p_max)
            .map(|p| {
                let photons = match atom {
                    Atom::Ground => n + 1 - p,
                    Atom::Excited => n - p,
                };
                read(band.vector(j), atom, photons)
            })
            .collect()
    };
    Ok(AmplitudeTable {
        band: n,
        p_max,
        alpha: [collect(Level::One, Atom::Ground), collect(Level::Two, Atom::Ground)],
        beta: [collect(Level::One, Atom::Excited), collect(Level::Two, Atom::Excited)],
    })
}

/// Amplitude table at the central band, after checking that the bands two
/// steps above and below carry the same amplitudes.
pub fn amplitudes(
    solution: &DressedSolution,
    cfg: &DressingConfig,
) -> Result<AmplitudeTable, DressingError> {
    let c = solution.central;
    let table = amplitudes_at(solution, c, cfg)?;
    for other in [c - 2, c + 2] {
        if solution.band(other).is_none() {
            continue;
        }
        let t = amplitudes_at(solution, other, cfg)?;
        let deviation = table.max_deviation(&t);
        if deviation > cfg.n_independence_tol {
            return Err(DressingError::PhotonNumberDependence {
                deviation,
                tol: cfg.n_independence_tol,
                reference: c,
                other,
            });
        }
    }
    Ok(table)
}

/// `A_ij^(q) = ⟨i(N+q)|S₊|j(N)⟩` for every `q` with a surviving entry.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TransitionCoefficients {
    /// `q ↦ [[A_11, A_12], [A_21, A_22]]`
    pub by_q: BTreeMap<i64, [[f64; 2]; 2]>,
}

impl TransitionCoefficients {
    pub fn get(&self, i: Level, j: Level, q: i64) -> f64 {
        self.by_q
            .get(&q)
            .map_or(0.0, |m| m[i.index()][j.index()])
    }

    pub fn set(&mut self, i: Level, j: Level, q: i64, value: f64) {
        self.by_q.entry(q).or_insert([[0.0; 2]; 2])[i.index()][j.index()] = value;
    }

    pub fn q_values(&self) -> impl Iterator<Item = i64> + '_ {
        self.by_q.keys().copied()
    }

    /// Entry-wise largest difference, counting missing entries as zero.
    pub fn max_difference(&self, other: &Self) -> f64 {
        let qs: std::collections::BTreeSet<i64> =
            self.q_values().chain(other.q_values()).collect();
        let mut worst = 0.0f64;
        for q in qs {
            for i in Level::BOTH {
                for j in Level::BOTH {
                    worst = worst.max((self.get(i, j, q) - other.get(i, j, q)).abs());
                }
            }
        }
        worst
    }

    /// `Σ_{j,q} |A_ij^(q)|²` for `row = Some(i)`, or `Σ_{i,q}` for the column `j`.
    pub fn row_weight(&self, i: Level) -> f64 {
        self.by_q
            .values()
            .map(|m| m[i.index()].iter().map(|a| a * a).sum::<f64>())
            .sum()
    }

    pub fn column_weight(&self, j: Level) -> f64 {
        self.by_q
            .values()
            .map(|m| m.iter().map(|row| row[j.index()].powi(2)).sum::<f64>())
            .sum()
    }
}

pub fn coefficients(table: &AmplitudeTable, cfg: &DressingConfig) -> TransitionCoefficients {
    let p_max = table.p_max;
    let mut out = TransitionCoefficients::default();
    for q in (1 - 2 * p_max)..=(1 + 2 * p_max) {
        let mut m = [[0.0; 2]; 2];
        let mut any = false;
        for i in Level::BOTH {
            for j in Level::BOTH {
                let a: f64 = table
                    .p_range()
                    .map(|p| table.beta(i, p + q - 1) * table.alpha(j, p))
                    .sum();
                if a * a >= cfg.prune {
                    m[i.index()][j.index()] = a;
                    any = true;
                }
            }
        }
        if any {
            out.by_q.insert(q, m);
        }
    }
    out
}
