use hcf_core::document::{build_basis, doc_to_system, generate_document};
use hcf_core::gpmatrix::{reduce_shifts, sort_structure, ReduceOptions};
use hcf_core::system::{build_h, flat_parametrize};
use num_rational::BigRational;

#[test]
fn debug_seed1() {
    let doc = generate_document(1, 3, 2).unwrap();
    eprintln!("{}", doc.to_json());
    let basis = build_basis(&doc).unwrap();
    let sys = doc_to_system(&doc, &basis).unwrap();
    let flat = flat_parametrize(&sys.f, &sys.b).unwrap();
    eprintln!("nu = {:?}", flat.nu);
    let h = build_h(&sys, &flat).unwrap();
    let s = sort_structure(&h).unwrap();
    eprintln!("rows {:?} cols {:?}", s.row_perm, s.col_perm);
    for i in 0..2 {
        for j in 0..2 {
            let e = s.sorted.get(i, j);
            eprintln!(
                "entry ({i},{j}): deg_dt {:?}  deg+ {:?} deg- {:?}  :: {}",
                e.deg_dt(),
                e.deg_plus().map(|x| x.to_string()),
                e.deg_minus().map(|x| x.to_string()),
                e
            );
        }
    }
    let opts = ReduceOptions {
        digits: 50,
        tol_entire: BigRational::new(1.into(), hcf_core::prec::pow10(20)),
        pass_budget: 8,
    };
    match reduce_shifts(&s.sorted, &opts) {
        Ok(red) => {
            eprintln!("reduced in {} passes, {} records", red.passes, red.records.len());
            for i in 0..2 {
                for j in 0..2 {
                    let e = red.hbar.get(i, j);
                    eprintln!(
                        "hbar ({i},{j}): deg_dt {:?} deg+ {:?} deg- {:?}",
                        e.deg_dt(),
                        e.deg_plus().map(|x| x.to_string()),
                        e.deg_minus().map(|x| x.to_string())
                    );
                }
            }
        }
        Err(e) => eprintln!("reduce failed: {e}"),
    }
}

#[test]
fn debug_entry_reduction() {
    let doc = generate_document(1, 3, 2).unwrap();
    let basis = build_basis(&doc).unwrap();
    let sys = doc_to_system(&doc, &basis).unwrap();
    let flat = flat_parametrize(&sys.f, &sys.b).unwrap();
    let h = build_h(&sys, &flat).unwrap();
    let s = sort_structure(&h).unwrap();
    let hbar = s.sorted.lift();
    let x = hbar.get(1, 0).clone();
    let y = hbar.get(0, 0).clone();
    eprintln!("within_bounds = {:?}", hcf_core::division::within_bounds(&x, &y));
    let tol = BigRational::new(1.into(), hcf_core::prec::pow10(20));
    match hcf_core::division::reduce_entry(&x, &y, 50, &tol) {
        Ok(out) => {
            eprintln!("record some = {}", out.record.is_some());
            eprintln!("qstar = {}", out.qstar);
            eprintln!("hbar = {}", out.hbar);
        }
        Err(e) => eprintln!("reduce_entry error: {e}"),
    }
}
