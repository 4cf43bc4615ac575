//! Time evolution of the dressed atom–laser state.
//!
//! Two routes: closed-form propagation of the reduced coherences
//! `σ_ij^(ℓ) = Σ_N σ_{i(N),j(N+ℓ)}`, and a brute-force RK4 integration of the
//! element-wise master equation on a finite window of bands.
//!
//! The dissipator only couples elements with equal energy differences, so it
//! commutes with the free evolution. The integrator therefore evolves the
//! interaction-picture matrix `X = e^{iHt} σ e^{−iHt}` under the dissipator
//! alone and restores the phases `e^{−i(E_a−E_b)t}` exactly on readout, with
//! `E_j(N) = Nω_L ± Ω/2`.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{diagonalize, DenseMatrix};
use crate::rates::{ChannelRates, RateSet};
use crate::Level;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("time step {dt:e} exceeds the stability limit {limit:e} (0.1 / largest rate {max_rate:e})")]
    StepSize { dt: f64, limit: f64, max_rate: f64 },
    #[error("trace drift {drift:e} exceeds {tol:e} at t = {time}")]
    TraceDrift { drift: f64, tol: f64, time: f64 },
    #[error(
        "horizon {horizon} drains about {expected_drop:.3} bands but only {room} bands lie below the initial state (budget {budget:.3})"
    )]
    PhotonBudget {
        horizon: f64,
        expected_drop: f64,
        room: i64,
        budget: f64,
    },
    #[error("window: {0}")]
    Window(String),
}

/// Default number of `ℓ` values tracked on each side of zero.
pub const DEFAULT_L_MAX: i64 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub time: f64,
    pub l_max: i64,
    // [11, 22, 12, 21], each indexed by ℓ + l_max
    data: [Vec<Complex64>; 4],
}

fn family(i: Level, j: Level) -> usize {
    match (i, j) {
        (Level::One, Level::One) => 0,
        (Level::Two, Level::Two) => 1,
        (Level::One, Level::Two) => 2,
        (Level::Two, Level::One) => 3,
    }
}

impl ReducedState {
    pub fn zeros(l_max: i64) -> Self {
        let len = (2 * l_max + 1) as usize;
        Self {
            time: 0.0,
            l_max,
            data: std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); len]),
        }
    }

    /// Diagonal state with populations `(p1, 1 − p1)` and no coherences.
    pub fn populations(p1: f64, l_max: i64) -> Self {
        let mut s = Self::zeros(l_max);
        s.set(Level::One, Level::One, 0, Complex64::new(p1, 0.0));
        s.set(Level::Two, Level::Two, 0, Complex64::new(1.0 - p1, 0.0));
        s
    }

    pub fn get(&self, i: Level, j: Level, l: i64) -> Complex64 {
        if l.abs() > self.l_max {
            return Complex64::new(0.0, 0.0);
        }
        self.data[family(i, j)][(l + self.l_max) as usize]
    }

    pub fn set(&mut self, i: Level, j: Level, l: i64, v: Complex64) {
        assert!(l.abs() <= self.l_max, "ℓ = {l} outside ±{}", self.l_max);
        self.data[family(i, j)][(l + self.l_max) as usize] = v;
    }

    pub fn population(&self, j: Level) -> f64 {
        self.get(j, j, 0).re
    }

    pub fn normalization_error(&self) -> f64 {
        (self.population(Level::One) + self.population(Level::Two) - 1.0).abs()
    }

    /// `max |σ_ji^(−ℓ) − conj σ_ij^(ℓ)|`
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in Level::BOTH {
            for j in Level::BOTH {
                for l in -self.l_max..=self.l_max {
                    worst = worst.max((self.get(j, i, -l) - self.get(i, j, l).conj()).norm());
                }
            }
        }
        worst
    }

    pub fn max_difference(&self, other: &Self) -> f64 {
        let l = self.l_max.max(other.l_max);
        let mut worst = 0.0f64;
        for i in Level::BOTH {
            for j in Level::BOTH {
                for l in -l..=l {
                    worst = worst.max((self.get(i, j, l) - other.get(i, j, l)).norm());
                }
            }
        }
        worst
    }
}

/// Closed-form propagation over `tau`.
pub fn evolve_reduced(state: &ReducedState, rates: &RateSet, tau: f64) -> ReducedState {
    let wl = rates.omega_l;
    let om = rates.omega_gap;
    let decay_coh = (-rates.gamma_coh * tau).exp();
    let decay_pop = (-rates.gamma_pop * tau).exp();
    let mut out = ReducedState::zeros(state.l_max);
    out.time = state.time + tau;
    for l in -state.l_max..=state.l_max {
        let lw = l as f64 * wl;
        let rot = |w: f64| Complex64::from_polar(1.0, w * tau);
        out.set(
            Level::One,
            Level::Two,
            l,
            state.get(Level::One, Level::Two, l) * rot(lw - om) * decay_coh,
        );
        out.set(
            Level::Two,
            Level::One,
            l,
            state.get(Level::Two, Level::One, l) * rot(lw + om) * decay_coh,
        );
        let s11 = state.get(Level::One, Level::One, l);
        let s22 = state.get(Level::Two, Level::Two, l);
        let sum = s11 + s22;
        let phase = rot(lw);
        out.set(
            Level::One,
            Level::One,
            l,
            phase * (sum * rates.pi_1 + (s11 - sum * rates.pi_1) * decay_pop),
        );
        out.set(
            Level::Two,
            Level::Two,
            l,
            phase * (sum * rates.pi_2 + (s22 - sum * rates.pi_2) * decay_pop),
        );
    }
    out
}

/// Contiguous bands `lo, …, lo + bands − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BandWindow {
    pub lo: i64,
    pub bands: usize,
}

impl BandWindow {
    pub fn new(lo: i64, bands: usize) -> Self {
        Self { lo, bands }
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.bands as i64 - 1
    }

    pub fn dim(&self) -> usize {
        2 * self.bands
    }

    pub fn contains(&self, band: i64) -> bool {
        (self.lo..=self.hi()).contains(&band)
    }

    pub fn index(&self, level: Level, band: i64) -> Option<usize> {
        self.contains(band)
            .then(|| 2 * (band - self.lo) as usize + level.index())
    }
}

/// Idealized dressed energy `Nω_L ± Ω/2`.
pub fn dressed_energy(level: Level, band: i64, omega_l: f64, omega_gap: f64) -> f64 {
    let half = 0.5 * omega_gap;
    band as f64 * omega_l
        + match level {
            Level::One => half,
            Level::Two => -half,
        }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullDressedState {
    pub window: BandWindow,
    pub time: f64,
    pub omega_l: f64,
    pub omega_gap: f64,
    /// Interaction-picture density matrix, row-major.
    x: Vec<Complex64>,
    /// Population that has decayed below the window.
    pub leaked: f64,
}

impl FullDressedState {
    /// Pure state `Σ c |j(N)⟩` normalized to unit trace.
    pub fn pure(
        window: BandWindow,
        components: &[(Level, i64, Complex64)],
        omega_l: f64,
        omega_gap: f64,
    ) -> Result<Self, DynamicsError> {
        let d = window.dim();
        let mut psi = vec![Complex64::new(0.0, 0.0); d];
        for &(level, band, c) in components {
            let k = window.index(level, band).ok_or_else(|| {
                DynamicsError::Window(format!("band {band} lies outside the window"))
            })?;
            psi[k] += c;
        }
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        if norm == 0.0 {
            return Err(DynamicsError::Window("empty initial state".into()));
        }
        let mut x = vec![Complex64::new(0.0, 0.0); d * d];
        for a in 0..d {
            for b in 0..d {
                x[a * d + b] = psi[a] * psi[b].conj() / norm;
            }
        }
        Ok(Self {
            window,
            time: 0.0,
            omega_l,
            omega_gap,
            x,
            leaked: 0.0,
        })
    }

    fn dim(&self) -> usize {
        self.window.dim()
    }

    /// Schrödinger-picture element `σ_{i(a), j(b)}`; zero outside the window.
    pub fn element(&self, i: Level, a: i64, j: Level, b: i64) -> Complex64 {
        let (Some(r), Some(c)) = (self.window.index(i, a), self.window.index(j, b)) else {
            return Complex64::new(0.0, 0.0);
        };
        let de = dressed_energy(i, a, self.omega_l, self.omega_gap)
            - dressed_energy(j, b, self.omega_l, self.omega_gap);
        self.x[r * self.dim() + c] * Complex64::from_polar(1.0, -de * self.time)
    }

    pub fn trace(&self) -> f64 {
        let d = self.dim();
        (0..d).map(|k| self.x[k * d + k].re).sum()
    }

    /// `|tr σ + leaked − 1|`
    pub fn trace_error(&self) -> f64 {
        (self.trace() + self.leaked - 1.0).abs()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in a..d {
                worst = worst.max((self.x[a * d + b] - self.x[b * d + a].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue, via the real symmetric embedding `[[Re, −Im], [Im, Re]]`.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let mut m = DenseMatrix::zeros(2 * d);
        for a in 0..d {
            for b in 0..d {
                // symmetrize so that rounding noise cannot trip the solver
                let z = 0.5 * (self.x[a * d + b] + self.x[b * d + a].conj());
                m.set(a, b, z.re);
                m.set(a + d, b + d, z.re);
                m.set(a, b + d, -z.im);
                m.set(a + d, b, z.im);
            }
        }
        diagonalize(&m).map_or(f64::NAN, |e| e.values[0])
    }

    /// Population of level `j` summed over the window.
    pub fn population(&self, level: Level) -> f64 {
        let d = self.dim();
        (0..self.window.bands)
            .map(|k| {
                let i = 2 * k + level.index();
                self.x[i * d + i].re
            })
            .sum()
    }

    pub fn band_population(&self, level: Level, band: i64) -> f64 {
        self.window
            .index(level, band)
            .map_or(0.0, |i| self.x[i * self.dim() + i].re)
    }

    /// Lowest band carrying population above `floor`.
    pub fn lowest_support(&self, floor: f64) -> Option<i64> {
        (self.window.lo..=self.window.hi()).find(|&n| {
            self.band_population(Level::One, n) + self.band_population(Level::Two, n) > floor
        })
    }

    pub fn reduce(&self, l_max: i64) -> ReducedState {
        let mut out = ReducedState::zeros(l_max);
        out.time = self.time;
        for i in Level::BOTH {
            for j in Level::BOTH {
                for l in -l_max..=l_max {
                    let v = (self.window.lo..=self.window.hi())
                        .map(|n| self.element(i, n, j, n + l))
                        .sum();
                    out.set(i, j, l, v);
                }
            }
        }
        out
    }
}

/// Fixed-step RK4 integrator of the element equations on a band window.
#[derive(Debug, Clone)]
pub struct FullIntegrator {
    channels: Vec<ChannelRates>,
    loss: [f64; 2],
    max_rate: f64,
    pub dt: f64,
}

impl FullIntegrator {
    pub fn new(rates: &RateSet, dt: f64) -> Result<Self, DynamicsError> {
        let channels: Vec<ChannelRates> = rates
            .channels
            .iter()
            .filter(|c| c.q >= 0)
            .copied()
            .collect();
        let loss = [rates.loss(Level::One), rates.loss(Level::Two)];
        let max_rate = channels
            .iter()
            .flat_map(|c| [c.gamma_11, c.gamma_22, c.gamma_12, c.gamma_21, c.k_12.abs()])
            .chain(loss)
            .fold(0.0, f64::max);
        let limit = if max_rate > 0.0 { 0.1 / max_rate } else { f64::INFINITY };
        if !(dt > 0.0) || dt > limit {
            return Err(DynamicsError::StepSize {
                dt,
                limit,
                max_rate,
            });
        }
        Ok(Self {
            channels,
            loss,
            max_rate,
            dt,
        })
    }

    pub fn max_rate(&self) -> f64 {
        self.max_rate
    }

    /// Expected number of bands descended per unit time, for the faster level.
    pub fn drain_rate(&self) -> f64 {
        let per_level = |level: Level| -> f64 {
            self.channels
                .iter()
                .map(|c| {
                    let out = match level {
                        Level::One => c.gamma_11 + c.gamma_12,
                        Level::Two => c.gamma_22 + c.gamma_21,
                    };
                    c.q as f64 * out
                })
                .sum()
        };
        per_level(Level::One).max(per_level(Level::Two))
    }

    /// Refuses horizons that would drain more than half the room below the state.
    pub fn check_budget(&self, state: &FullDressedState, horizon: f64) -> Result<(), DynamicsError> {
        let lowest = state
            .lowest_support(1e-14)
            .ok_or_else(|| DynamicsError::Window("state has no population".into()))?;
        let room = lowest - state.window.lo;
        let expected_drop = self.drain_rate() * horizon;
        let budget = 0.5 * room as f64;
        if expected_drop > budget {
            return Err(DynamicsError::PhotonBudget {
                horizon,
                expected_drop,
                room,
                budget,
            });
        }
        Ok(())
    }

    // dX/dt and the leak rate out of the bottom of the window
    fn derivative(&self, window: &BandWindow, x: &[Complex64], out: &mut [Complex64]) -> f64 {
        let d = window.dim();
        let w = window.bands as i64;
        let half_loss = |a: usize, b: usize| 0.5 * (self.loss[a % 2] + self.loss[b % 2]);
        for r in 0..d {
            for c in 0..d {
                out[r * d + c] = -x[r * d + c] * half_loss(r, c);
            }
        }
        let mut leak = 0.0;
        for ch in &self.channels {
            let q = ch.q;
            let shift = 2 * q as usize;
            // sources (a+q, b+q) must lie inside the window
            let top = (w - q).max(0) as usize;
            for ka in 0..top {
                for kb in 0..top {
                    let (r1, r2) = (2 * ka, 2 * ka + 1);
                    let (c1, c2) = (2 * kb, 2 * kb + 1);
                    let s11 = x[(r1 + shift) * d + c1 + shift];
                    let s22 = x[(r2 + shift) * d + c2 + shift];
                    let s12 = x[(r1 + shift) * d + c2 + shift];
                    let s21 = x[(r2 + shift) * d + c1 + shift];
                    out[r1 * d + c1] += s11 * ch.gamma_11 + s22 * ch.gamma_21;
                    out[r2 * d + c2] += s11 * ch.gamma_12 + s22 * ch.gamma_22;
                    out[r1 * d + c2] += s12 * ch.k_12;
                    out[r2 * d + c1] += s21 * ch.k_12;
                }
            }
            // bands whose decay by q lands below the window
            for k in 0..(q.min(w) as usize) {
                let i1 = 2 * k;
                let i2 = 2 * k + 1;
                leak += x[i1 * d + i1].re * (ch.gamma_11 + ch.gamma_12)
                    + x[i2 * d + i2].re * (ch.gamma_22 + ch.gamma_21);
            }
        }
        leak
    }

    pub fn step(&self, state: &mut FullDressedState) {
        let n = state.x.len();
        let h = self.dt;
        let window = state.window;
        let zero = Complex64::new(0.0, 0.0);
        let mut k1 = vec![zero; n];
        let mut k2 = vec![zero; n];
        let mut k3 = vec![zero; n];
        let mut k4 = vec![zero; n];
        let mut tmp = vec![zero; n];

        let l1 = self.derivative(&window, &state.x, &mut k1);
        for i in 0..n {
            tmp[i] = state.x[i] + k1[i] * (0.5 * h);
        }
        let l2 = self.derivative(&window, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = state.x[i] + k2[i] * (0.5 * h);
        }
        let l3 = self.derivative(&window, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = state.x[i] + k3[i] * h;
        }
        let l4 = self.derivative(&window, &tmp, &mut k4);
        for i in 0..n {
            state.x[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        state.leaked += (l1 + 2.0 * (l2 + l3) + l4) * (h / 6.0);
        state.time += h;
    }

    /// Trace tolerance after evolving for `elapsed`.
    pub fn trace_tolerance(&self, elapsed: f64) -> f64 {
        1e-8 * f64::max(1.0, self.max_rate * elapsed)
    }

    /// Advances `steps` steps, checking the trace after each one.
    pub fn run(&self, state: &mut FullDressedState, steps: usize) -> Result<(), DynamicsError> {
        let start = state.time;
        for _ in 0..steps {
            self.step(state);
            let drift = state.trace_error();
            let tol = self.trace_tolerance(state.time - start);
            if !(drift <= tol) {
                return Err(DynamicsError::TraceDrift {
                    drift,
                    tol,
                    time: state.time,
                });
            }
        }
        Ok(())
    }
}

/// Checks the budget for `dt · steps`, then integrates.
pub fn evolve_full(
    state: &FullDressedState,
    rates: &RateSet,
    dt: f64,
    steps: usize,
) -> Result<FullDressedState, DynamicsError> {
    let integrator = FullIntegrator::new(rates, dt)?;
    integrator.check_budget(state, dt * steps as f64)?;
    let mut out = state.clone();
    integrator.run(&mut out, steps)?;
    Ok(out)
}

/// Least-squares fit of `y = A e^{−γ t}` on the log scale; returns `(γ, A)`.
pub fn fit_exponential(t: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter(|(_, &y)| y > 0.0)
        .map(|(&t, &y)| (t, y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((-slope, (my - slope * mt).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    /// Populations renormalized to what is left inside the window.
    pub pi_1: f64,
    pub pi_2: f64,
    /// `|σ_12^(0)|`
    pub coherence: f64,
    pub trace_error: f64,
}

impl TrajectoryPoint {
    fn of(state: &FullDressedState) -> Self {
        let p1 = state.population(Level::One);
        let p2 = state.population(Level::Two);
        let inside = p1 + p2;
        let (pi_1, pi_2) = if inside > 0.0 { (p1 / inside, p2 / inside) } else { (0.0, 0.0) };
        Self {
            t: state.time,
            pi_1,
            pi_2,
            coherence: state.reduce(0).get(Level::One, Level::Two, 0).norm(),
            trace_error: state.trace_error(),
        }
    }
}

/// Integrates over `horizon` and records `samples + 1` evenly spaced points.
/// The step actually used is the largest one ≤ `dt` that divides the sample spacing.
pub fn sample_trajectory(
    state: &FullDressedState,
    rates: &RateSet,
    dt: f64,
    horizon: f64,
    samples: usize,
) -> Result<(Vec<TrajectoryPoint>, FullDressedState), DynamicsError> {
    let samples = samples.max(1);
    let spacing = horizon / samples as f64;
    let per_sample = (spacing / dt).ceil().max(1.0) as usize;
    let integrator = FullIntegrator::new(rates, spacing / per_sample as f64)?;
    integrator.check_budget(state, horizon)?;
    let mut st = state.clone();
    let start = st.time;
    let mut out = Vec::with_capacity(samples + 1);
    out.push(TrajectoryPoint::of(&st));
    for _ in 0..samples {
        for _ in 0..per_sample {
            integrator.step(&mut st);
        }
        let drift = st.trace_error();
        let tol = integrator.trace_tolerance(st.time - start);
        if !(drift <= tol) {
            return Err(DynamicsError::TraceDrift {
                drift,
                tol,
                time: st.time,
            });
        }
        out.push(TrajectoryPoint::of(&st));
    }
    Ok((out, st))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaxationFit {
    pub gamma_pop: Option<f64>,
    pub gamma_coh: Option<f64>,
}

/// Exponential fits of `|Π_1 − Π_1^st|` and `|σ_12^(0)|`. Points that have
/// decayed below `1e-8` of the initial value are left out.
pub fn fit_relaxation(traj: &[TrajectoryPoint], pi_1_st: f64) -> RelaxationFit {
    let fit = |y: Vec<f64>| {
        let y0 = y.first().copied().unwrap_or(0.0);
        let (t, y): (Vec<f64>, Vec<f64>) = traj
            .iter()
            .zip(&y)
            .filter(|(_, &v)| v > 1e-8 * y0)
            .map(|(p, &v)| (p.t, v))
            .unzip();
        if t.len() < 3 {
            return None;
        }
        fit_exponential(&t, &y).map(|(g, _)| g)
    };
    RelaxationFit {
        gamma_pop: fit(traj.iter().map(|p| (p.pi_1 - pi_1_st).abs()).collect()),
        gamma_coh: fit(traj.iter().map(|p| p.coherence).collect()),
    }
}
