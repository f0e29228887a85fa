use lorentz::corridors::*;
use lorentz::geometry::*;
fn main() {
    let cfg = build_config(vec![Disk::new(0.0,0.0,0.2), Disk::new(0.5,0.5,0.2)], Dimension::Two).unwrap();
    for c in enumerate_corridors(&cfg, 2).unwrap() {
        println!("dir {:?} width {:.6} n_C {} lower {:?} upper {:?}", c.direction, c.width, c.n_c(),
            c.lower.iter().map(|t|(t.obstacle, t.side, t.along, t.offset)).collect::<Vec<_>>(),
            c.upper.iter().map(|t|(t.obstacle, t.side, t.along, t.offset)).collect::<Vec<_>>());
        for (a,b,co) in &c.coefficients { println!("   A=({},{}) B=({},{}) a={:.6}", a.obstacle, a.side, b.obstacle, b.side, co); }
        println!("   sums {:?}", c.coefficient_sums());
    }
}
