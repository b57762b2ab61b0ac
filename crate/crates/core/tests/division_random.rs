//! Randomized division and correction checks over small instances. The full
//! acceptance counts run in the CLI crate's acceptance suite; this is the
//! fast regression version.

use hcf_core::division::{entire_correction, gp_div_rem};
use hcf_core::oracle::{check_identity, Identity, OracleConfig};
use hcf_core::prec::pow10;
use hcf_core::testing::{random_correction_pair, random_division_pair};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use std::cmp::Ordering;

fn tol20() -> BigRational {
    BigRational::new(BigInt::one(), pow10(20))
}

#[test]
fn division_reconstruction_random() {
    for seed in 0..25u64 {
        let (x, y, _) = random_division_pair(seed);
        let div = gp_div_rem(&x, &y).unwrap();

        // degree postconditions (strict) for a nonzero remainder
        if !div.remainder.is_zero() {
            let r = &div.remainder;
            assert_eq!(
                r.deg_plus().unwrap().compare(y.deg_plus().unwrap()),
                Ordering::Less,
                "seed {seed}: upper degree not reduced"
            );
            assert_ne!(
                r.deg_minus().unwrap().compare(y.deg_minus().unwrap()),
                Ordering::Less,
                "seed {seed}: lower degree not raised"
            );
            assert_eq!(
                r.deg_sigma().unwrap().compare(&y.deg_sigma().unwrap()),
                Ordering::Less,
                "seed {seed}: diameter not reduced"
            );
        }

        // exact reconstruction over the rational layer
        assert_eq!(div.quotient.mul(&y).add(&div.remainder), x, "seed {seed}");

        // sampled reconstruction at 16 points
        let mut cfg = OracleConfig::new(seed, 50, tol20());
        cfg.trials = 16;
        let id = Identity {
            name: format!("seed {seed}"),
            lhs: vec![vec![x.clone()]],
            rhs: vec![
                vec![div.quotient.clone(), y.clone()],
                vec![div.remainder.clone()],
            ],
        };
        let rep = check_identity(&id, &cfg);
        assert!(rep.pass, "{}", rep.line());
    }
}

#[test]
fn correction_random() {
    let mut nontrivial = 0usize;
    for seed in 0..20u64 {
        let (x, y, _) = random_correction_pair(seed);
        let div = gp_div_rem(&x, &y).unwrap();
        let ent = entire_correction(&div, 50, &tol20()).unwrap();

        assert!(ent.proper, "seed {seed}: corrected quotient not proper");
        for c in &ent.certificate {
            assert!(
                c.residual.to_f64() <= 1e-20,
                "seed {seed}: residual {}",
                c.residual
            );
        }
        // reconstruction with the corrected pair
        assert_eq!(ent.qstar.mul(&y).add(&ent.rstar), x, "seed {seed}");

        if !ent.correction.is_zero() {
            nontrivial += 1;
            let rs = &ent.rstar;
            assert_eq!(
                rs.deg_plus().unwrap().compare(y.deg_plus().unwrap()),
                Ordering::Equal,
                "seed {seed}: corrected upper degree"
            );
            assert_eq!(
                rs.deg_minus().unwrap().compare(y.deg_minus().unwrap()),
                Ordering::Equal,
                "seed {seed}: corrected lower degree"
            );
        }
    }
    assert!(nontrivial >= 10, "only {nontrivial} corrections were nontrivial");
}

#[test]
fn division_and_oracle_timing_sample() {
    // keep an eye on the per-instance cost that the acceptance suite scales up
    let start = std::time::Instant::now();
    for seed in 100..110u64 {
        let (x, y, _) = random_division_pair(seed);
        let div = gp_div_rem(&x, &y).unwrap();
        let mut cfg = OracleConfig::new(seed, 50, tol20());
        cfg.trials = 64;
        let id = Identity {
            name: "timing".into(),
            lhs: vec![vec![x.clone()]],
            rhs: vec![
                vec![div.quotient.clone(), y.clone()],
                vec![div.remainder.clone()],
            ],
        };
        let rep = check_identity(&id, &cfg);
        assert!(rep.pass, "{}", rep.line());
    }
    eprintln!("10 instances with 64-point checks: {:?}", start.elapsed());
}
