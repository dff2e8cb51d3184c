//! Galton-Watson trees: subcritical trees die out (ζ = ∞), and the
//! degenerate law p₂ = 1 is the binary tree, realization for realization.
use dsy::sim::{gw_zeta_to_depth, zeta_to_depth, CascadeModel, GwConfig};

fn main() -> dsy::Result<()> {
    let yule = CascadeModel::yule();
    let sub = GwConfig::new(vec![0.6, 0.4])?;
    let dead = (0..100)
        .map(|t| gw_zeta_to_depth(&yule, &sub, 30, 100_000, 5, t))
        .filter(|z| z.as_ref().is_ok_and(|z| z.zeta() == Some(f64::INFINITY)))
        .count();
    println!("mu = {}: ζ = ∞ in {dead}/100 trees", sub.mean());

    let binary = GwConfig::new(vec![0.0, 0.0, 1.0])?;
    for trial in 0..3 {
        let a = zeta_to_depth(&yule, 15, 100_000, 9, trial)?;
        let b = gw_zeta_to_depth(&yule, &binary, 15, 100_000, 9, trial)?;
        println!("trial {trial}: ζ_15 binary {:?}, p2 = 1 {:?}", a.zeta(), b.zeta());
        assert_eq!(a.zeta_n, b.zeta_n);
    }
    Ok(())
}
