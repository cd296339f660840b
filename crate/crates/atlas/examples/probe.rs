use k3atlas::curves::curve_set;
use k3atlas::discriminant::gram_isometric;
use k3atlas::lattice::{GramLattice, LatticeSpec};
use std::time::Instant;
fn main() {
    // S4 curve-basis vs overlattice presentation
    let a = vec![vec![-2, 3, 1], vec![3, -2, 1], vec![1, 1, -2]];
    let b = vec![vec![6, 2, -1], vec![2, -6, 3], vec![-1, 3, -2]];
    eprintln!("S4 isometric: {}", gram_isometric(&a, &b));
    for (name, spec, want) in [
        ("S111", "gram [[-2,0,1],[0,-2,2],[1,2,-2]]", 3),
        ("S112", "gram [[-2,0,2],[0,-2,2],[2,2,-2]]", 3),
        ("S113", "gram [[-2,3,2],[3,-2,0],[2,0,-2]]", 4),
        ("S114", "gram [[-2,4,0],[4,-2,2],[0,2,-2]]", 4),
        ("S116", "gram [[-2,2,6],[2,-2,0],[6,0,-2]]", 6),
        ("S118", "gram [[-2,2,0],[2,-2,8],[0,8,-2]]", 8),
        ("S191", "gram [[-2,2,8],[2,-2,1],[8,1,-2]]", 9),
        ("S4", "gram [[-2,3,1],[3,-2,1],[1,1,-2]]", 4),
        ("S6", "gram [[14,2,-1],[2,-6,3],[-1,3,-2]]", 6),
        ("S1", "[6]+A1^2", 6),
        ("S2", "[36]+A2", 6),
        ("U+A1^3", "U+A1^3", 7),
        ("U+E8", "U+E8", 10),
        ("U+E8+E8", "U+E8+E8", 19),
    ] {
        let l = GramLattice::from_spec(name, &LatticeSpec::parse(spec).unwrap()).unwrap();
        let t0 = Instant::now();
        match curve_set(&l, 4096) {
            Ok(r) => eprintln!(
                "{name}: {} curves (want {want}) complete={} bound={} in {:?}",
                r.config.count(),
                r.config.complete,
                r.config.degree_bound,
                t0.elapsed()
            ),
            Err(e) => eprintln!("{name}: ERROR {e}"),
        }
    }
}
