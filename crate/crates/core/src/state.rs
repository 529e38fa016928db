//! Conservative fluid state `(ρ, ρu)` on the strip grid, perturbed initial
//! data, and the binary snapshot format.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, ShockError};
use crate::grid::Grid3;
use crate::par::{for_each_slab_mut, ExecPolicy};
use crate::profile::ProfileTable;

/// Per node `[ρ, ρu₁, ρu₂, ρu₃]`, ξ₁ slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub grid: Grid3,
    pub q: Vec<[f64; 4]>,
}

impl FluidState {
    pub fn uniform(grid: Grid3, rho: f64, u: [f64; 3]) -> Self {
        Self {
            grid,
            q: vec![[rho, rho * u[0], rho * u[1], rho * u[2]]; grid.len()],
        }
    }

    #[inline]
    pub fn rho(&self, n: usize) -> f64 {
        self.q[n][0]
    }

    #[inline]
    pub fn v(&self, n: usize) -> f64 {
        1.0 / self.q[n][0]
    }

    #[inline]
    pub fn u(&self, n: usize) -> [f64; 3] {
        let q = self.q[n];
        [q[1] / q[0], q[2] / q[0], q[3] / q[0]]
    }

    pub fn min_density(&self) -> f64 {
        self.q.iter().map(|q| q[0]).fold(f64::INFINITY, f64::min)
    }

    /// Trapezoidal total mass `∫ρ`.
    pub fn total_mass(&self) -> f64 {
        let g = &self.grid;
        let s = g.slab();
        (0..g.nodes1())
            .map(|i| g.weight(i) * self.q[i * s..(i + 1) * s].iter().map(|q| q[0]).sum::<f64>())
            .sum()
    }

    /// Writes the snapshot: an ASCII header line `SHOCKLAB1 N1 N2 N3 L t X`
    /// followed by little-endian f64 `[ρ, m₁, m₂, m₃]` per node.
    pub fn write_snapshot<W: Write>(&self, mut out: W, t: f64, shift: f64) -> Result<()> {
        let g = &self.grid;
        writeln!(
            out,
            "SHOCKLAB1 {} {} {} {:e} {:e} {:e}",
            g.n1, g.n2, g.n3, g.half_length, t, shift
        )?;
        let mut buf = Vec::with_capacity(self.q.len() * 32);
        for q in &self.q {
            for x in q {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        out.write_all(&buf)?;
        Ok(())
    }

    /// Reads a snapshot; returns the state with its `t` and `X`.
    pub fn read_snapshot<R: Read>(mut input: R) -> Result<(Self, f64, f64)> {
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| ShockError::config("snapshot header missing"))?;
        let header = std::str::from_utf8(&bytes[..nl])
            .map_err(|_| ShockError::config("snapshot header not ASCII"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 7 || parts[0] != "SHOCKLAB1" {
            return Err(ShockError::config(format!("bad snapshot header: {header}")));
        }
        let bad = |_| ShockError::config(format!("bad snapshot header: {header}"));
        let n1: usize = parts[1].parse().map_err(bad)?;
        let n2: usize = parts[2].parse().map_err(bad)?;
        let n3: usize = parts[3].parse().map_err(bad)?;
        let l: f64 = parts[4].parse().map_err(|_| ShockError::config("bad L"))?;
        let t: f64 = parts[5].parse().map_err(|_| ShockError::config("bad t"))?;
        let x: f64 = parts[6].parse().map_err(|_| ShockError::config("bad X"))?;
        let grid = Grid3::new(l, n1, n2, n3)?;
        let body = &bytes[nl + 1..];
        if body.len() != grid.len() * 32 {
            return Err(ShockError::config(format!(
                "snapshot body has {} bytes, expected {}",
                body.len(),
                grid.len() * 32
            )));
        }
        let q = body
            .chunks_exact(32)
            .map(|c| {
                let f = |o: usize| f64::from_le_bytes(c[o..o + 8].try_into().unwrap());
                [f(0), f(8), f(16), f(24)]
            })
            .collect();
        Ok((Self { grid, q }, t, x))
    }
}

/// Shape of the initial perturbation `(φ, ψ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationShape {
    /// `φ = e^{−ξ₁²}(1 + cos2πξ₂ cos2πξ₃)`, `ψ = (φ, e^{−ξ₁²} sin2πξ₂, e^{−ξ₁²} sin2πξ₃)`.
    GaussTransverse,
    /// `φ = e^{−ξ₁²}`, `ψ = (e^{−ξ₁²}, 0, 0)`, no transverse dependence.
    GaussPlanar,
    /// `φ = e^{−ξ₁²}(1 + Σ a_m cos θ_m)`, `ψ = (φ, e^{−ξ₁²}Σ b_m sin θ_m, e^{−ξ₁²}Σ c_m sin θ_m)`
    /// with three seeded transverse modes `θ_m = 2π(k·ξ′) + ϑ_m`, `|k| ≤ 2`,
    /// `|a_m|, |b_m|, |c_m| ≤ 1/3`.
    RandomModes { seed: u64 },
}

impl PerturbationShape {
    /// Shape from its name; `seed` is used by the random family only.
    pub fn parse(s: &str, seed: u64) -> Option<Self> {
        match s {
            "gauss-transverse" => Some(Self::GaussTransverse),
            "gauss-planar" => Some(Self::GaussPlanar),
            "random-modes" => Some(Self::RandomModes { seed }),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::GaussTransverse => "gauss-transverse",
            Self::GaussPlanar => "gauss-planar",
            Self::RandomModes { .. } => "random-modes",
        }
    }
}

/// Seeded transverse modes of [`PerturbationShape::RandomModes`].
fn random_modes(seed: u64) -> [([f64; 2], f64, [f64; 3]); 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let third = 1.0 / 3.0;
    std::array::from_fn(|_| {
        let k = [rng.gen_range(-2..=2) as f64, rng.gen_range(-2..=2) as f64];
        let phase = rng.gen_range(0.0..2.0 * PI);
        let c = [
            rng.gen_range(-third..third),
            rng.gen_range(-third..third),
            rng.gen_range(-third..third),
        ];
        (k, phase, c)
    })
}

/// `v₀ = vˢ + εφ`, `u₀ = uˢ + εψ`, with `φ, ψ` centered at `center` and cut
/// off beyond `support` from it. No zero-mass condition is imposed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub amplitude: f64,
    pub shape: PerturbationShape,
    pub center: f64,
    pub support: f64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self {
            amplitude: 0.01,
            shape: PerturbationShape::GaussTransverse,
            center: 0.0,
            support: 10.0,
        }
    }
}

impl Perturbation {
    pub fn none() -> Self {
        Self {
            amplitude: 0.0,
            ..Self::default()
        }
    }

    /// `(φ, ψ)` at a point, without the amplitude.
    pub fn shape_at(&self, xi: [f64; 3]) -> (f64, [f64; 3]) {
        let x = xi[0] - self.center;
        if x.abs() > self.support {
            return (0.0, [0.0; 3]);
        }
        let g = (-x * x).exp();
        match self.shape {
            PerturbationShape::GaussTransverse => {
                let (s2, c2) = (2.0 * PI * xi[1]).sin_cos();
                let (s3, c3) = (2.0 * PI * xi[2]).sin_cos();
                let phi = g * (1.0 + c2 * c3);
                (phi, [phi, g * s2, g * s3])
            }
            PerturbationShape::GaussPlanar => (g, [g, 0.0, 0.0]),
            PerturbationShape::RandomModes { seed } => {
                let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
                for (k, ph, coef) in random_modes(seed) {
                    let (s, co) = (2.0 * PI * (k[0] * xi[1] + k[1] * xi[2]) + ph).sin_cos();
                    a += coef[0] * co;
                    b += coef[1] * s;
                    c += coef[2] * s;
                }
                let phi = g * (1.0 + a);
                (phi, [phi, g * b, g * c])
            }
        }
    }
}

/// Profile plus perturbation, converted to conservative variables.
pub fn init_state(table: &ProfileTable, grid: Grid3, pert: &Perturbation) -> Result<FluidState> {
    grid.validate()?;
    let mut q = vec![[0.0; 4]; grid.len()];
    let slab = grid.slab();
    let eps = pert.amplitude;
    for_each_slab_mut(ExecPolicy::Parallel, &mut q, slab, |i, out| {
        let x1 = grid.xi1(i);
        let p = table.query_shifted(x1, 0.0);
        for j in 0..grid.n2 {
            for k in 0..grid.n3 {
                let (phi, psi) = if eps == 0.0 {
                    (0.0, [0.0; 3])
                } else {
                    pert.shape_at([x1, grid.xi2(j), grid.xi3(k)])
                };
                let v = p.v + eps * phi;
                let rho = 1.0 / v;
                let u = [p.u1 + eps * psi[0], eps * psi[1], eps * psi[2]];
                out[j * grid.n3 + k] = [rho, rho * u[0], rho * u[1], rho * u[2]];
            }
        }
    });
    if q.iter().any(|q| !(q[0] > 0.0) || !q[0].is_finite()) {
        return Err(ShockError::InvalidPerturbation(format!(
            "amplitude {eps} produces non-positive specific volume"
        )));
    }
    Ok(FluidState { grid, q })
}
