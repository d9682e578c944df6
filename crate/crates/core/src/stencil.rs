//! Central-difference Laplacians and the generator `B = (ħ/2m)∇² − V/ħ`.
//!
//! Neighbours outside the grid read as zero. Odd powers of `B` are formed by
//! repeated application, so `B^p` is exactly the p-th matrix power of the
//! truncated operator.

use rayon::prelude::*;

use crate::error::{Result, SolverError};
use crate::field::{GridSpec, PhysicalParams, PotentialField};

/// Rows-per-task threshold below which the 2-D kernel stays sequential.
const PAR_MIN_POINTS: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StencilOrder {
    /// `[1, −2, 1]` per axis.
    Second,
    /// `[−1, 16, −30, 16, −1] / 12` per axis.
    Fourth,
}

impl StencilOrder {
    pub fn from_accuracy(order: u32) -> Option<Self> {
        match order {
            2 => Some(StencilOrder::Second),
            4 => Some(StencilOrder::Fourth),
            _ => None,
        }
    }

    pub fn accuracy(self) -> u32 {
        match self {
            StencilOrder::Second => 2,
            StencilOrder::Fourth => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryPolicy {
    #[default]
    ZeroDirichlet,
}

#[inline(always)]
fn axis2(m1: f64, c: f64, p1: f64) -> f64 {
    m1 - 2.0 * c + p1
}

#[inline(always)]
fn axis4(m2: f64, m1: f64, c: f64, p1: f64, p2: f64) -> f64 {
    -m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2
}

#[inline(always)]
fn at(s: &[f64], i: isize) -> f64 {
    if i < 0 || i as usize >= s.len() {
        0.0
    } else {
        s[i as usize]
    }
}

/// Second difference along a contiguous line, scaled by `scale`
/// (1/Δ² or 1/(12Δ²)), accumulated into `out`.
fn line_term(order: StencilOrder, line: &[f64], scale: f64, out: &mut [f64], accumulate: bool) {
    let n = line.len();
    let edge = |k: usize| -> f64 {
        let k = k as isize;
        match order {
            StencilOrder::Second => axis2(at(line, k - 1), line[k as usize], at(line, k + 1)),
            StencilOrder::Fourth => axis4(
                at(line, k - 2),
                at(line, k - 1),
                line[k as usize],
                at(line, k + 1),
                at(line, k + 2),
            ),
        }
    };
    let store = |o: &mut f64, v: f64| {
        if accumulate {
            *o += scale * v
        } else {
            *o = scale * v
        }
    };
    for k in [0, 1, n - 2, n - 1] {
        store(&mut out[k], edge(k));
    }
    match order {
        StencilOrder::Second => {
            for k in 2..n - 2 {
                store(&mut out[k], axis2(line[k - 1], line[k], line[k + 1]));
            }
        }
        StencilOrder::Fourth => {
            for k in 2..n - 2 {
                store(
                    &mut out[k],
                    axis4(line[k - 2], line[k - 1], line[k], line[k + 1], line[k + 2]),
                );
            }
        }
    }
}

fn scale_for(order: StencilOrder, d: f64) -> f64 {
    match order {
        StencilOrder::Second => 1.0 / (d * d),
        StencilOrder::Fourth => 1.0 / (12.0 * d * d),
    }
}

/// Unchecked kernel: writes the Laplacian of `input` into `out`.
pub(crate) fn laplacian_into(input: &[f64], out: &mut [f64], grid: &GridSpec, order: StencilOrder) {
    debug_assert_eq!(input.len(), grid.len());
    debug_assert_eq!(out.len(), grid.len());
    let sx = scale_for(order, grid.dx());
    if !grid.is_2d() {
        line_term(order, input, sx, out, false);
        return;
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let sy = scale_for(order, grid.dy());
    let zeros = vec![0.0; ny];
    let row = |j: isize| -> &[f64] {
        if j < 0 || j as usize >= nx {
            &zeros
        } else {
            let j = j as usize;
            &input[j * ny..(j + 1) * ny]
        }
    };
    let kernel = |(j, out_row): (usize, &mut [f64])| {
        let ji = j as isize;
        let c = row(ji);
        line_term(order, c, sy, out_row, false);
        match order {
            StencilOrder::Second => {
                let (m1, p1) = (row(ji - 1), row(ji + 1));
                for k in 0..ny {
                    out_row[k] += sx * axis2(m1[k], c[k], p1[k]);
                }
            }
            StencilOrder::Fourth => {
                let (m2, m1, p1, p2) = (row(ji - 2), row(ji - 1), row(ji + 1), row(ji + 2));
                for k in 0..ny {
                    out_row[k] += sx * axis4(m2[k], m1[k], c[k], p1[k], p2[k]);
                }
            }
        }
    };
    if grid.len() >= PAR_MIN_POINTS {
        out.par_chunks_mut(ny).enumerate().for_each(kernel);
    } else {
        out.chunks_mut(ny).enumerate().for_each(kernel);
    }
}

/// `a·∇²(input) − w∘input`, the generator up to a constant time scaling.
#[derive(Debug, Clone)]
pub(crate) struct Generator {
    grid: GridSpec,
    order: StencilOrder,
    kinetic: f64,
    rate: Vec<f64>,
}

impl Generator {
    /// `scale·B` with `B = (ħ/2m)∇² − V/ħ`.
    pub(crate) fn new(
        grid: &GridSpec,
        potential: &PotentialField,
        physics: &PhysicalParams,
        order: StencilOrder,
        scale: f64,
    ) -> Result<Self> {
        grid.check_len("potential", potential.len())?;
        let inv_hbar = scale / physics.hbar();
        Ok(Self {
            grid: *grid,
            order,
            kinetic: scale * physics.kinetic_coefficient(),
            rate: potential.values().iter().map(|v| v * inv_hbar).collect(),
        })
    }

    pub(crate) fn apply_into(&self, input: &[f64], out: &mut [f64]) {
        laplacian_into(input, out, &self.grid, self.order);
        let a = self.kinetic;
        let body = |((o, x), w): ((&mut f64, &f64), &f64)| *o = a * *o - w * x;
        if out.len() >= PAR_MIN_POINTS {
            out.par_iter_mut()
                .zip(input.par_iter())
                .zip(self.rate.par_iter())
                .for_each(body);
        } else {
            out.iter_mut().zip(input).zip(&self.rate).for_each(body);
        }
    }
}

/// Central-difference Laplacian with zero reads outside the grid.
pub fn apply_laplacian(
    field: &[f64],
    grid: &GridSpec,
    order: StencilOrder,
    boundary: BoundaryPolicy,
) -> Result<Vec<f64>> {
    let BoundaryPolicy::ZeroDirichlet = boundary;
    grid.check_len("field component", field.len())?;
    let mut out = vec![0.0; grid.len()];
    laplacian_into(field, &mut out, grid, order);
    Ok(out)
}

/// `(ħ/2m)∇²f − (V/ħ)f`.
pub fn apply_b(
    field: &[f64],
    grid: &GridSpec,
    potential: &PotentialField,
    physics: &PhysicalParams,
    order: StencilOrder,
) -> Result<Vec<f64>> {
    apply_b_power(field, 1, grid, potential, physics, order)
}

/// `B` applied `power` times; `power` must be odd and positive.
pub fn apply_b_power(
    field: &[f64],
    power: u32,
    grid: &GridSpec,
    potential: &PotentialField,
    physics: &PhysicalParams,
    order: StencilOrder,
) -> Result<Vec<f64>> {
    if power == 0 || power.is_multiple_of(2) {
        return Err(SolverError::Contract(format!(
            "operator power must be odd and positive, got {power}"
        )));
    }
    grid.check_len("field component", field.len())?;
    let gen = Generator::new(grid, potential, physics, order, 1.0)?;
    let mut cur = field.to_vec();
    let mut next = vec![0.0; grid.len()];
    for _ in 0..power {
        gen.apply_into(&cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ELECTRON_MASS, HBAR};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const D: f64 = 1e-11;

    fn g2(nx: usize, ny: usize) -> GridSpec {
        GridSpec::two_d(nx, ny, D, 1.3 * D).unwrap()
    }

    #[test]
    fn order_parsing() {
        assert_eq!(StencilOrder::from_accuracy(2), Some(StencilOrder::Second));
        assert_eq!(StencilOrder::from_accuracy(4), Some(StencilOrder::Fourth));
        assert_eq!(StencilOrder::from_accuracy(6), None);
    }

    #[test]
    fn constant_annihilated_in_interior_only() {
        let g = g2(9, 8);
        let f = vec![3.0; g.len()];
        for (order, halo) in [(StencilOrder::Second, 1), (StencilOrder::Fourth, 2)] {
            let l = apply_laplacian(&f, &g, order, BoundaryPolicy::ZeroDirichlet).unwrap();
            for j in 0..g.nx() {
                for k in 0..g.ny() {
                    let v = l[g.index(j, k)];
                    let interior = j >= halo && j + halo < g.nx() && k >= halo && k + halo < g.ny();
                    if interior {
                        assert!(v.abs() < 1e-6 * 3.0 / (D * D), "{order:?} ({j},{k}) {v}");
                    } else {
                        assert!(v.abs() > 1e-3 / (D * D), "{order:?} ({j},{k}) {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn second_order_corner_by_hand() {
        let g = GridSpec::two_d(5, 5, 1.0, 2.0).unwrap();
        let f = vec![1.0; 25];
        let l =
            apply_laplacian(&f, &g, StencilOrder::Second, BoundaryPolicy::ZeroDirichlet).unwrap();
        // corner: x term (0 - 2 + 1)/1, y term (0 - 2 + 1)/4
        assert_eq!(l[0], -1.0 - 0.25);
        // fourth order at corner: x (-0 + 0 - 30 + 16 - 1)/12, y same / 4
        let l4 =
            apply_laplacian(&f, &g, StencilOrder::Fourth, BoundaryPolicy::ZeroDirichlet).unwrap();
        assert!((l4[0] - (-15.0 / 12.0 - 15.0 / 48.0)).abs() < 1e-15);
        // one cell in: x (0 + 16 - 30 + 16 - 1)/12 = 1/12
        assert!((l4[g.index(1, 2)] - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch_is_config_error() {
        let g = g2(6, 6);
        let r = apply_laplacian(
            &[0.0; 10],
            &g,
            StencilOrder::Second,
            BoundaryPolicy::ZeroDirichlet,
        );
        assert!(matches!(r, Err(SolverError::Config(_))));
    }

    fn plane_wave_check(order: StencilOrder, bx: f64, by: f64) {
        let g = g2(12, 11);
        let (tx, ty) = (bx * g.dx(), by * g.dy());
        // real and imaginary parts of the plane wave e^{i(j tx + k ty)}
        let parts: [fn(f64) -> f64; 2] = [f64::cos, f64::sin];
        let sx = (tx / 2.0).sin().powi(2);
        let sy = (ty / 2.0).sin().powi(2);
        let factor = match order {
            StencilOrder::Second => -4.0 * (sx / (g.dx() * g.dx()) + sy / (g.dy() * g.dy())),
            StencilOrder::Fourth => {
                -(4.0 / (3.0 * g.dx() * g.dx())) * sx * (3.0 + sx)
                    - (4.0 / (3.0 * g.dy() * g.dy())) * sy * (3.0 + sy)
            }
        };
        for part in parts {
            let mut f = vec![0.0; g.len()];
            for j in 0..g.nx() {
                for k in 0..g.ny() {
                    f[g.index(j, k)] = part(j as f64 * tx + k as f64 * ty);
                }
            }
            let l = apply_laplacian(&f, &g, order, BoundaryPolicy::ZeroDirichlet).unwrap();
            for j in 2..g.nx() - 2 {
                for k in 2..g.ny() - 2 {
                    let i = g.index(j, k);
                    let err = (l[i] - factor * f[i]).abs();
                    assert!(
                        err <= 1e-10 * factor.abs(),
                        "{order:?} bx={bx} by={by} err={err}"
                    );
                }
            }
        }
    }

    #[test]
    fn plane_wave_symbols_match_closed_forms() {
        for order in [StencilOrder::Second, StencilOrder::Fourth] {
            for a in 1..=16 {
                for b in [1usize, 5, 11, 16] {
                    let bx = PI * a as f64 / 16.0 / D;
                    let by = PI * b as f64 / 16.0 / (1.3 * D);
                    plane_wave_check(order, bx, by);
                }
            }
        }
    }

    #[test]
    fn one_d_uses_x_axis_only() {
        let g = GridSpec::one_d(7, 0.5).unwrap();
        let f: Vec<f64> = (0..7).map(|i| (i * i) as f64).collect();
        let l =
            apply_laplacian(&f, &g, StencilOrder::Second, BoundaryPolicy::ZeroDirichlet).unwrap();
        // d²(i²) = 2 per cell², divided by 0.25
        for v in &l[1..6] {
            assert!((v - 8.0).abs() < 1e-12);
        }
        assert!((l[0] - (0.0 - 0.0 + 1.0) / 0.25).abs() < 1e-12);
    }

    #[test]
    fn fourth_order_convergence_factor() {
        // max interior error against the analytic second derivative of a Gaussian
        let width = 0.5;
        let exact = |x: f64| {
            (x * x / (width * width * width * width) - 1.0 / (width * width))
                * (-x * x / (2.0 * width * width)).exp()
        };
        let err = |n: usize| {
            let h = 8.0 / (n - 1) as f64;
            let g = GridSpec::one_d(n, h).unwrap();
            let xs: Vec<f64> = (0..n).map(|i| -4.0 + i as f64 * h).collect();
            let f: Vec<f64> = xs
                .iter()
                .map(|x| (-x * x / (2.0 * width * width)).exp())
                .collect();
            let l = apply_laplacian(&f, &g, StencilOrder::Fourth, BoundaryPolicy::ZeroDirichlet)
                .unwrap();
            (2..n - 2)
                .map(|i| (l[i] - exact(xs[i])).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(81) / err(161);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn b_of_constant_with_constant_potential() {
        let g = g2(9, 9);
        let v = 1.6e-17;
        let pot = PotentialField::uniform(&g, v).unwrap();
        let phys = PhysicalParams::electron();
        let out = apply_b(&vec![2.0; g.len()], &g, &pot, &phys, StencilOrder::Fourth).unwrap();
        let want = -(v / HBAR) * 2.0;
        for j in 2..7 {
            for k in 2..7 {
                let got = out[g.index(j, k)];
                // interior Laplacian cancellation leaves O(eps · ħ/(m dx²)) residue
                assert!((got - want).abs() < 1e-9 * want.abs(), "{got} vs {want}");
            }
        }
        let zero = apply_b(&vec![0.0; g.len()], &g, &pot, &phys, StencilOrder::Second).unwrap();
        assert!(zero.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn b_plane_wave_eigen_factor() {
        let g = g2(12, 12);
        let v = 50.0 * crate::field::EV;
        let pot = PotentialField::uniform(&g, v).unwrap();
        let phys = PhysicalParams::new(ELECTRON_MASS, HBAR).unwrap();
        let (tx, ty) = (0.7, 1.9);
        let f: Vec<f64> = (0..g.len())
            .map(|i| ((i / 12) as f64 * tx + (i % 12) as f64 * ty).cos())
            .collect();
        let out = apply_b(&f, &g, &pot, &phys, StencilOrder::Second).unwrap();
        let sx = (tx / 2.0f64).sin().powi(2);
        let sy = (ty / 2.0f64).sin().powi(2);
        let factor = -(HBAR / (2.0 * ELECTRON_MASS))
            * 4.0
            * (sx / (g.dx() * g.dx()) + sy / (g.dy() * g.dy()))
            - v / HBAR;
        for j in 1..11 {
            for k in 1..11 {
                let i = g.index(j, k);
                assert!((out[i] - factor * f[i]).abs() <= 1e-10 * factor.abs());
            }
        }
    }

    #[test]
    fn b_power_contract() {
        let g = g2(6, 6);
        let pot = PotentialField::zeros(&g);
        let phys = PhysicalParams::electron();
        let f = vec![1.0; g.len()];
        for p in [0, 2, 4] {
            assert!(matches!(
                apply_b_power(&f, p, &g, &pot, &phys, StencilOrder::Second),
                Err(SolverError::Contract(_))
            ));
        }
        let one = apply_b_power(&f, 1, &g, &pot, &phys, StencilOrder::Second).unwrap();
        assert_eq!(
            one,
            apply_b(&f, &g, &pot, &phys, StencilOrder::Second).unwrap()
        );
        let z = apply_b_power(
            &vec![0.0; g.len()],
            5,
            &g,
            &pot,
            &phys,
            StencilOrder::Fourth,
        )
        .unwrap();
        assert!(z.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn parallel_kernel_matches_sequential() {
        // above the parallel threshold the per-point arithmetic is unchanged
        let g = GridSpec::two_d(140, 130, D, D).unwrap();
        assert!(g.len() >= PAR_MIN_POINTS);
        let f: Vec<f64> = (0..g.len())
            .map(|i| ((i * 7919) % 1000) as f64 / 1000.0 - 0.5)
            .collect();
        let par =
            apply_laplacian(&f, &g, StencilOrder::Fourth, BoundaryPolicy::ZeroDirichlet).unwrap();
        let s = scale_for(StencilOrder::Fourth, D);
        for j in 0..g.nx() {
            for k in 0..g.ny() {
                let get = |a: isize, b: isize| {
                    if a < 0 || b < 0 || a as usize >= g.nx() || b as usize >= g.ny() {
                        0.0
                    } else {
                        f[g.index(a as usize, b as usize)]
                    }
                };
                let (a, b) = (j as isize, k as isize);
                let y = s * axis4(
                    get(a, b - 2),
                    get(a, b - 1),
                    get(a, b),
                    get(a, b + 1),
                    get(a, b + 2),
                );
                let x = s * axis4(
                    get(a - 2, b),
                    get(a - 1, b),
                    get(a, b),
                    get(a + 1, b),
                    get(a + 2, b),
                );
                assert_eq!(par[g.index(j, k)], y + x);
            }
        }
    }

    proptest! {
        #[test]
        fn laplacian_is_linear(
            f in prop::collection::vec(-1.0f64..1.0, 64),
            h in prop::collection::vec(-1.0f64..1.0, 64),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            fourth in any::<bool>(),
        ) {
            let g = GridSpec::two_d(8, 8, 1.0, 1.0).unwrap();
            let order = if fourth { StencilOrder::Fourth } else { StencilOrder::Second };
            let lap = |v: &[f64]| apply_laplacian(v, &g, order, BoundaryPolicy::ZeroDirichlet).unwrap();
            let comb: Vec<f64> = f.iter().zip(&h).map(|(x, y)| a * x + b * y).collect();
            let lhs = lap(&comb);
            let (lf, lh) = (lap(&f), lap(&h));
            let scale = lf.iter().chain(&lh).fold(1.0f64, |m, v| m.max(v.abs())) * (a.abs() + b.abs()).max(1.0);
            for i in 0..64 {
                prop_assert!((lhs[i] - (a * lf[i] + b * lh[i])).abs() <= 1e-12 * scale);
            }
        }
    }
}
