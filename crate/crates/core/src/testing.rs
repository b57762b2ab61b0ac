//! Deterministic random instances for the property and acceptance suites.
//!
//! Shift exponents are drawn on an arithmetic progression `base + k g` with a
//! delay-combination gap `g`, mirroring the structure the system class
//! produces; this keeps the division step counts small while exercising
//! multi-delay exponent arithmetic.

use crate::gpoly::{GPoly, GPolyR, PolyD, RatD};
use crate::scalars::{BasisRef, DelayBasis, Exponent};
use num_rational::BigRational;
use num_traits::Signed;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;

fn qi(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

pub fn random_basis(rng: &mut ChaCha8Rng, max_delays: usize) -> BasisRef {
    let k = rng.gen_range(1..=max_delays);
    let mut grid: Vec<i64> = (2..=24).collect();
    for i in (1..grid.len()).rev() {
        let j = rng.gen_range(0..=i);
        grid.swap(i, j);
    }
    let entries = (0..k)
        .map(|i| (format!("d{i}"), BigRational::new(grid[i].into(), 8.into())))
        .collect();
    DelayBasis::new(entries, 50).expect("positive grid delays")
}

pub fn random_exponent(rng: &mut ChaCha8Rng, basis: &BasisRef) -> Exponent {
    let coeffs = (0..basis.len())
        .map(|_| qi(rng.gen_range(-2..=2)))
        .collect();
    let offset = BigRational::new(rng.gen_range(-6..=6).into(), 2.into());
    Exponent::new(basis, coeffs, offset)
}

/// A strictly positive delay combination used as the progression gap.
fn random_gap(rng: &mut ChaCha8Rng, basis: &BasisRef) -> Exponent {
    loop {
        let g = random_exponent(rng, basis);
        if g.eval().is_positive() {
            return g;
        }
        if g.eval().is_negative() {
            return g.neg();
        }
    }
}

fn random_poly(rng: &mut ChaCha8Rng, max_deg: usize) -> PolyD {
    loop {
        let deg = rng.gen_range(0..=max_deg);
        let coeffs: Vec<BigRational> = (0..=deg).map(|_| qi(rng.gen_range(-3..=3))).collect();
        let p = PolyD::from_rationals(&coeffs);
        if !p.is_zero() {
            return p;
        }
    }
}

fn progression(base: &Exponent, gap: &Exponent, k: i64) -> Exponent {
    base.add(&gap.scale(&qi(k)))
}

/// Admissible division pair: `x` spans at least the shift diameter of `y`,
/// both on a shared exponent progression.
pub fn random_division_pair(seed: u64) -> (GPolyR, GPolyR, BasisRef) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = random_basis(&mut rng, 3);
    let gap = random_gap(&mut rng, &basis);
    let base_y = random_exponent(&mut rng, &basis);

    let ny = rng.gen_range(1..=3usize);
    let y_terms: Vec<(Exponent, RatD)> = (0..ny)
        .map(|k| {
            (
                progression(&base_y, &gap, k as i64),
                RatD::from_poly(random_poly(&mut rng, 2)),
            )
        })
        .collect();
    let y: GPolyR = GPoly::normalize(y_terms);

    // x on the same progression, possibly offset by half a gap, spanning wider
    let half_shift = if rng.gen_bool(0.4) {
        gap.scale(&BigRational::new(1.into(), 2.into()))
    } else {
        Exponent::zero()
    };
    let base_x = progression(&base_y, &gap, rng.gen_range(-1..=2)).add(&half_shift);
    let nx = rng.gen_range(ny..=ny + 3);
    let x_terms: Vec<(Exponent, RatD)> = (0..nx)
        .map(|k| {
            (
                progression(&base_x, &gap, k as i64),
                RatD::from_poly(random_poly(&mut rng, 2)),
            )
        })
        .collect();
    let x: GPolyR = GPoly::normalize(x_terms);

    if x.is_zero()
        || y.is_zero()
        || x.deg_sigma().unwrap().compare(&y.deg_sigma().unwrap()) == Ordering::Less
    {
        // term merges can shrink a span; rare, just redraw
        return random_division_pair(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    }
    (x, y, basis)
}

/// Division pair tailored to the correction step: the divisor's extreme
/// coefficients are products of rational linear factors (repeats allowed)
/// and every coefficient degree stays at most theirs, so the corrected
/// quotient must come out proper.
pub fn random_correction_pair(seed: u64) -> (GPolyR, GPolyR, BasisRef) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = random_basis(&mut rng, 2);
    let gap = random_gap(&mut rng, &basis);
    let base_y = random_exponent(&mut rng, &basis);

    let deg = rng.gen_range(1..=3usize);
    let root_pool = [
        qi(0),
        qi(1),
        qi(-1),
        qi(2),
        qi(-2),
        BigRational::new(1.into(), 2.into()),
    ];
    let linear_product = |rng: &mut ChaCha8Rng| -> PolyD {
        let mut p = if rng.gen_bool(0.5) {
            PolyD::one()
        } else {
            PolyD::from_ints(&[-1])
        };
        for _ in 0..deg {
            let r = root_pool[rng.gen_range(0..root_pool.len())].clone();
            let lin = PolyD::from_rationals(&[-r, qi(1)]);
            p = p.mul(&lin);
        }
        p
    };

    // divisor: two or three terms, factored extreme coefficients
    let ny = rng.gen_range(2..=3usize);
    let mut y_terms = vec![
        (
            progression(&base_y, &gap, (ny - 1) as i64),
            RatD::from_poly(linear_product(&mut rng)),
        ),
        (base_y.clone(), RatD::from_poly(linear_product(&mut rng))),
    ];
    if ny == 3 {
        y_terms.push((
            progression(&base_y, &gap, 1),
            RatD::from_poly(random_poly(&mut rng, deg)),
        ));
    }
    let y: GPolyR = GPoly::normalize(y_terms);

    // dividend: wider span on the same progression, degrees bounded by `deg`
    let base_x = progression(&base_y, &gap, rng.gen_range(-2..=-1));
    let nx = ny + rng.gen_range(1..=3);
    let x_terms: Vec<(Exponent, RatD)> = (0..nx)
        .map(|k| {
            (
                progression(&base_x, &gap, k as i64),
                RatD::from_poly(random_poly(&mut rng, deg)),
            )
        })
        .collect();
    let x: GPolyR = GPoly::normalize(x_terms);

    if x.is_zero()
        || y.is_zero()
        || x.deg_sigma().unwrap().compare(&y.deg_sigma().unwrap()) == Ordering::Less
    {
        return random_correction_pair(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    }
    (x, y, basis)
}
