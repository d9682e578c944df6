#![allow(dead_code)]

use gfdtd::field::EV;
use gfdtd::{GridSpec, PhysicalParams, PotentialField, StencilOrder, WaveField};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DX: f64 = 1e-11;

fn weights(order: StencilOrder) -> Vec<(isize, f64)> {
    match order {
        StencilOrder::Second => vec![(-1, 1.0), (0, -2.0), (1, 1.0)],
        StencilOrder::Fourth => vec![
            (-2, -1.0 / 12.0),
            (-1, 16.0 / 12.0),
            (0, -30.0 / 12.0),
            (1, 16.0 / 12.0),
            (2, -1.0 / 12.0),
        ],
    }
}

/// Dense Laplacian with zero values outside the grid, assembled point by point.
pub fn laplacian_matrix(grid: &GridSpec, order: StencilOrder) -> DMatrix<f64> {
    let (nx, ny) = (grid.nx() as isize, grid.ny() as isize);
    let n = grid.len();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..nx {
        for k in 0..ny {
            let row = (j * ny + k) as usize;
            for &(o, w) in &weights(order) {
                let jj = j + o;
                if (0..nx).contains(&jj) {
                    m[(row, (jj * ny + k) as usize)] += w / (grid.dx() * grid.dx());
                }
                if grid.is_2d() {
                    let kk = k + o;
                    if (0..ny).contains(&kk) {
                        m[(row, (j * ny + kk) as usize)] += w / (grid.dy() * grid.dy());
                    }
                }
            }
        }
    }
    m
}

pub fn b_matrix(
    grid: &GridSpec,
    pot: &PotentialField,
    phys: &PhysicalParams,
    order: StencilOrder,
) -> DMatrix<f64> {
    let mut b = laplacian_matrix(grid, order) * (phys.hbar() / (2.0 * phys.mass()));
    for (i, v) in pot.values().iter().enumerate() {
        b[(i, i)] -= v / phys.hbar();
    }
    b
}

pub fn matrix_power(b: &DMatrix<f64>, p: u32) -> DMatrix<f64> {
    let mut out = DMatrix::identity(b.nrows(), b.ncols());
    for _ in 0..p {
        out = &out * b;
    }
    out
}

/// `Σ_{p≤N} 2(−1)^p (Δt/2)^{2p+1} B^{2p+1} / (2p+1)!`
pub fn series_matrix(b: &DMatrix<f64>, dt: f64, terms: usize) -> DMatrix<f64> {
    let mut sum = DMatrix::zeros(b.nrows(), b.ncols());
    let mut fact = 1.0;
    for p in 0..=terms {
        let q = 2 * p as u32 + 1;
        if q > 1 {
            fact *= (q - 1) as f64 * q as f64;
        }
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        sum += matrix_power(b, q) * (2.0 * sign * (dt / 2.0).powi(q as i32) / fact);
    }
    sum
}

pub fn oracle_step(field: &WaveField, series: &DMatrix<f64>) -> WaveField {
    let r = DVector::from_vec(field.real.clone());
    let i = DVector::from_vec(field.imag.clone());
    let r1 = &r - series * &i;
    let i1 = &i + series * &r1;
    WaveField {
        real: r1.as_slice().to_vec(),
        imag: i1.as_slice().to_vec(),
        real_time_index: field.real_time_index + 1,
    }
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = a
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    diff / scale
}

pub fn random_values(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn random_field(grid: &GridSpec, seed: u64) -> WaveField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let real = random_values(grid.len(), &mut rng);
    let imag = random_values(grid.len(), &mut rng);
    WaveField::from_parts(grid, real, imag).unwrap()
}

/// Potential between 0 and 100 eV.
pub fn random_potential(grid: &GridSpec, seed: u64) -> PotentialField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..grid.len())
        .map(|_| rng.gen_range(0.0..100.0) * EV)
        .collect();
    PotentialField::from_values(grid, v).unwrap()
}

/// Small grids covering both dimensionalities and non-square shapes.
pub fn small_grids() -> Vec<GridSpec> {
    vec![
        GridSpec::one_d(16, DX).unwrap(),
        GridSpec::two_d(5, 5, DX, DX).unwrap(),
        GridSpec::two_d(7, 11, DX, 1.5 * DX).unwrap(),
        GridSpec::two_d(16, 16, DX, DX).unwrap(),
    ]
}

/// Maximum of `x − x³/6 + x⁵/120` over `[0, hi]` by brute-force sampling.
pub fn dense_sine_max(hi: f64, samples: usize) -> (f64, f64) {
    (0..=samples)
        .map(|i| {
            let x = hi * i as f64 / samples as f64;
            (x, x - x.powi(3) / 6.0 + x.powi(5) / 120.0)
        })
        .fold(
            (0.0, f64::MIN),
            |best, (x, s)| if s > best.1 { (x, s) } else { best },
        )
}
