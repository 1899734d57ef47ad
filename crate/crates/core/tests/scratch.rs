//! Temporary probe for the closedness-form cost profile.

use std::time::Instant;
use wnhcalc_core::geom::symplectic_trilinear;
use wnhcalc_core::opalg::Space;
use wnhcalc_core::ring::DiffExpr;
use wnhcalc_core::varcalc::{frechet, ResolutionMode};

fn jet(f: u16, k: u32) -> DiffExpr {
    DiffExpr::jet(f, k)
}

#[test]
fn probe() {
    let n = 2usize;
    let big = |a: u32, b: u32| jet(0, a).pow(2).mul(&jet(1, b).pow(2));
    let gamma = vec![
        big(2, 1).add(&big(0, 2)).add(&big(1, 1)),
        big(2, 2).sub(&big(1, 0)).add(&big(0, 0)),
    ];
    let x1 = vec![big(1, 1), big(0, 1)];
    let x2 = vec![big(1, 0), big(0, 0)];
    let x3 = vec![big(0, 1), big(1, 1)];
    let t0 = Instant::now();
    let gop = frechet(&gamma, Space::Covector, n).unwrap();
    let j = gop.sub(&gop.adjoint()).unwrap();
    eprintln!("frechet+sub: {:?}", t0.elapsed());
    let t1 = Instant::now();
    let t = symplectic_trilinear(
        &j,
        [x1.as_slice(), x2.as_slice(), x3.as_slice()],
        &[],
        ResolutionMode::Strict,
    )
    .unwrap();
    eprintln!("trilinear: {:?}", t1.elapsed());
    let t2 = Instant::now();
    let z = t.value.is_zero(&[]).unwrap();
    eprintln!("is_zero: {:?} -> {:?}", t2.elapsed(), z);
}
