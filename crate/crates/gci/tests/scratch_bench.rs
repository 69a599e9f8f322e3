// temporary timing probe; deleted before finalizing
use gci::enumeration::{enumerate_semigraphoids, filter};
use std::time::Instant;

#[test]
#[ignore]
fn n4_census_probe() {
    let t0 = Instant::now();
    let classes = enumerate_semigraphoids(4, true);
    println!("semigraphoid classes: {} in {:?}", classes.len(), t0.elapsed());
    let t1 = Instant::now();
    let structural = filter(&classes, "structural", "structural").unwrap();
    println!("structural: {} in {:?}", structural.len(), t1.elapsed());
    let t2 = Instant::now();
    let sa = filter(&structural, "sa", "selfadhesion:structural").unwrap();
    println!("sa-structural: {} in {:?}", sa.len(), t2.elapsed());
}
