//! Euler–Maruyama paths, stationary starts and discretized two-sided Wiener
//! increments.
//!
//! All randomness flows through [`RngStream`]: a `(seed, stream_id)` pair
//! names one ChaCha8 stream, so a replicate's output does not depend on which
//! thread runs it or in which order.

use std::io::{BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::InvariantLaw;

/// A path observed at `t0, t0 + dt, ..., t0 + n dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl Trajectory {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::validation(format!("time step must be positive, got {dt}")));
        }
        if values.len() < 2 {
            return Err(Error::validation("a trajectory needs at least two points"));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!("non-finite trajectory value at index {k}")));
        }
        Ok(Trajectory { t0, dt, values })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of steps `n`.
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    /// `T = n dt`.
    pub fn horizon(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    /// Writes the `t,x` CSV form with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,x")?;
        for (k, x) in self.values.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e}", self.t0 + k as f64 * self.dt, x)?;
        }
        out.flush()
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    /// Parses the `t,x` CSV form. Times must be uniformly spaced.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = reader.headers().map_err(|e| Error::parse(e.to_string()))?.clone();
        if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "x" {
            return Err(Error::parse("trajectory CSV must have header `t,x`"));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::parse(e.to_string()))?;
            let field = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(format!("row {}: expected two finite numbers", line + 1)))
            };
            times.push(field(0)?);
            values.push(field(1)?);
        }
        if times.len() < 2 {
            return Err(Error::parse("trajectory CSV needs at least two rows"));
        }
        let t0 = times[0];
        let n = (times.len() - 1) as f64;
        let dt = (times[times.len() - 1] - t0) / n;
        if !(dt > 0.0) {
            return Err(Error::parse("trajectory times must increase"));
        }
        for (k, t) in times.iter().enumerate() {
            if (t - (t0 + k as f64 * dt)).abs() > 1e-9 * dt.max(t.abs()) {
                return Err(Error::parse(format!("non-uniform time grid at row {}", k + 1)));
            }
        }
        Trajectory::new(t0, dt, values).map_err(|e| Error::parse(e.to_string()))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Trajectory::read_csv(std::io::BufReader::new(file))
    }
}

/// Names one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// A fresh generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Two-sided Wiener increments on the cells of a uniform grid over `[-L, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerGrid {
    /// Cell edges, `-L = z_0 < z_1 < ... < z_n = L`.
    pub z_grid: Vec<f64>,
    /// `W(z_{i+1}) - W(z_i)`.
    pub increments: Vec<f64>,
    /// Actual cell width.
    pub dz: f64,
}

impl WienerGrid {
    pub fn half_width(&self) -> f64 {
        self.z_grid[self.z_grid.len() - 1]
    }

    /// Cell midpoints.
    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.z_grid.windows(2).map(|w| 0.5 * (w[0] + w[1]))
    }
}

/// Euler–Maruyama path of `dX = S(X) dt + sigma(X) dW` from `x0`.
pub fn simulate_path<S, D, R>(drift: S, diffusion: D, x0: f64, horizon: f64, dt: f64, rng: &mut R) -> Result<Trajectory>
where
    S: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
    R: Rng + ?Sized,
{
    let n = step_count(horizon, dt)?;
    if !x0.is_finite() {
        return Err(Error::Simulation { step: 0, value: x0 });
    }
    let sqrt_dt = dt.sqrt();
    let mut values = Vec::with_capacity(n + 1);
    let mut x = x0;
    values.push(x);
    for k in 0..n {
        let xi: f64 = rng.sample(StandardNormal);
        x = x + drift(x) * dt + diffusion(x) * sqrt_dt * xi;
        if !x.is_finite() {
            return Err(Error::Simulation { step: k + 1, value: x });
        }
        values.push(x);
    }
    Ok(Trajectory { t0: 0.0, dt, values })
}

/// Number of steps for `horizon / dt`, which must be integral up to rounding.
pub fn step_count(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::validation(format!("time step must be positive, got {dt}")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::validation(format!("horizon must be positive, got {horizon}")));
    }
    let ratio = horizon / dt;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-6 * n.max(1.0) || n < 1.0 {
        return Err(Error::validation(format!("T = {horizon} is not a multiple of dt = {dt}")));
    }
    Ok(n as usize)
}

/// Draws a starting point from the stationary law by inversion.
pub fn sample_stationary_init<L, R>(law: &L, rng: &mut R) -> Result<f64>
where
    L: InvariantLaw + ?Sized,
    R: Rng + ?Sized,
{
    let u = loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            break u;
        }
    };
    law.quantile(u)
}

/// Stationary start followed by an Euler–Maruyama path, all on one stream.
pub fn simulate_stationary<L, S, D>(
    law: &L,
    drift: S,
    diffusion: D,
    horizon: f64,
    dt: f64,
    stream: RngStream,
) -> Result<Trajectory>
where
    L: InvariantLaw + ?Sized,
    S: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut rng = stream.rng();
    let x0 = sample_stationary_init(law, &mut rng)?;
    simulate_path(drift, diffusion, x0, horizon, dt, &mut rng)
}

/// Independent `N(0, dz)` increments on cells of width close to `dz`
/// partitioning `[-L, L]`.
pub fn wiener_increments<R: Rng + ?Sized>(half_width: f64, dz: f64, rng: &mut R) -> Result<WienerGrid> {
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::validation(format!("grid half-width must be positive, got {half_width}")));
    }
    if !(dz > 0.0 && dz <= half_width) {
        return Err(Error::validation(format!("cell width must lie in (0, {half_width}], got {dz}")));
    }
    let cells = ((2.0 * half_width / dz) - 1e-9).ceil().max(1.0) as usize;
    let dz = 2.0 * half_width / cells as f64;
    let z_grid: Vec<f64> = (0..=cells)
        .map(|i| if i == cells { half_width } else { -half_width + i as f64 * dz })
        .collect();
    let sd = dz.sqrt();
    let increments = (0..cells)
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(WienerGrid { z_grid, increments, dz })
}
