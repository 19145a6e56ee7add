use std::time::Instant;

#[test]
fn bench_full_scale() {
    let t0 = Instant::now();
    let r = smoc_core::verify::check_relation_ranks(6, 6, 5, 1_000_000).unwrap();
    println!("ranks(6,6,5): pass={} {:?}", r.pass, t0.elapsed());
    for d in &r.details { if !d.holds() { println!("  RANKFAIL {} {}: {} vs {}", d.ty, d.bigrade, d.lhs, d.rhs); } }

    let t0 = Instant::now();
    let r = smoc_core::verify::check_pure_bijection(7, 1_000_000).unwrap();
    println!("bijection(7): pass={} {:?}", r.pass, t0.elapsed());
    for d in &r.details { if !d.holds() { println!("  BIJFAIL {} {}: {} vs {}", d.ty, d.bigrade, d.lhs, d.rhs); } }

    let t0 = Instant::now();
    let r = smoc_core::verify::check_odd_even(8, 1_000_000).unwrap();
    println!("odd_even(8): pass={} {:?}", r.pass, t0.elapsed());
    for d in &r.details { if !d.holds() { println!("  ODDFAIL {} {}: {} vs {}", d.ty, d.bigrade, d.lhs, d.rhs); } }
}
