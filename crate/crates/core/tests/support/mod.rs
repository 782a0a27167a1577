//! Reference models shared by the integration tests. None of this goes
//! through the simulator under test.
#![allow(dead_code)]

use hetlb_core::geometry::CellKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

/// Long-run statistics of an M/M/1 processor-sharing queue.
#[derive(Debug, Clone, Copy)]
pub struct PsStats {
    /// Fraction of time with at least one job.
    pub busy: f64,
    /// Time-average number of jobs.
    pub mean_jobs: f64,
    pub completed: usize,
}

/// Event-driven PS queue: Poisson arrivals at `arrival_rate`, exponential
/// sizes with mean `mean_size`, total service `capacity` split equally.
pub fn ps_queue(arrival_rate: f64, mean_size: f64, capacity: f64, horizon: f64, seed: u64) -> PsStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaps = Exp::new(arrival_rate).unwrap();
    let sizes = Exp::new(1.0 / mean_size).unwrap();
    let mut jobs: Vec<f64> = Vec::new();
    let mut t = 0.0;
    let mut next_arrival = gaps.sample(&mut rng);
    let (mut busy, mut area, mut completed) = (0.0, 0.0, 0);
    while t < horizon {
        let n = jobs.len();
        let next_departure = if n == 0 {
            f64::INFINITY
        } else {
            let smallest = jobs.iter().copied().fold(f64::INFINITY, f64::min);
            t + smallest * n as f64 / capacity
        };
        let next = next_arrival.min(next_departure).min(horizon);
        let dt = next - t;
        if n > 0 {
            let served = dt * capacity / n as f64;
            jobs.iter_mut().for_each(|w| *w -= served);
            busy += dt;
            area += dt * n as f64;
        }
        t = next;
        if t >= horizon {
            break;
        }
        if next_arrival <= next_departure {
            jobs.push(sizes.sample(&mut rng));
            next_arrival = t + gaps.sample(&mut rng);
        } else {
            let k = jobs.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            jobs.swap_remove(k);
            completed += 1;
        }
    }
    PsStats { busy: busy / horizon, mean_jobs: area / horizon, completed }
}

/// A macro and a small cell on a line, users uniform on `[0, length]`.
/// Loads are continuous in the small cell's CIO because the cell boundary is
/// solved exactly instead of on a grid.
#[derive(Debug, Clone, Copy)]
pub struct LineModel {
    pub length_m: f64,
    pub small_at_m: f64,
    pub macro_power_dbm: f64,
    pub small_power_dbm: f64,
    /// Offered traffic over the whole line, Mbps.
    pub demand_mbps: f64,
    pub macro_capacity_mbps: f64,
    pub small_capacity_mbps: f64,
}

impl LineModel {
    pub fn standard() -> Self {
        Self {
            length_m: 400.0,
            small_at_m: 300.0,
            macro_power_dbm: 46.0,
            small_power_dbm: 30.0,
            demand_mbps: 24.0,
            macro_capacity_mbps: 20.0,
            small_capacity_mbps: 14.0,
        }
    }

    fn margin(&self, x: f64, cio: f64) -> f64 {
        let pl = |kind: CellKind, d: f64| kind.pathloss_db(d.max(10.0) / 1000.0);
        (self.small_power_dbm + cio - pl(CellKind::Small, (self.small_at_m - x).abs()))
            - (self.macro_power_dbm - pl(CellKind::MacroSector, x))
    }

    /// Position between the sites where the small cell starts to win.
    pub fn boundary(&self, cio: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, self.small_at_m);
        if self.margin(lo, cio) >= 0.0 {
            return lo;
        }
        if self.margin(hi, cio) < 0.0 {
            return hi;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.margin(mid, cio) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// (macro load, small load), each capped at 1.
    pub fn loads(&self, cio: f64) -> (f64, f64) {
        let b = self.boundary(cio);
        let share = b / self.length_m;
        let m = self.demand_mbps * share / self.macro_capacity_mbps;
        let s = self.demand_mbps * (1.0 - share) / self.small_capacity_mbps;
        (m.min(1.0), s.min(1.0))
    }

    /// CIO at which both loads are equal, by bisection on `[lo, hi]`.
    pub fn balancing_cio(&self, lo: f64, hi: f64) -> f64 {
        let gap = |c: f64| {
            let (m, s) = self.loads(c);
            m - s
        };
        let (mut lo, mut hi) = (lo, hi);
        assert!(gap(lo) > 0.0 && gap(hi) < 0.0, "balance point not bracketed");
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if gap(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Mean of `values[from..]`.
pub fn tail_mean(values: &[f64], from: usize) -> f64 {
    let tail = &values[from.min(values.len())..];
    tail.iter().sum::<f64>() / tail.len() as f64
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}
