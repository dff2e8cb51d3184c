//! The Bessel kernel p(x,y) with λ(x) = x²: the b-test, and the smallest a
//! with ‖T_a‖ < 1/2 on a grid, checked against the doubled grid.
use dsy::criteria::{cor36_check, find_min_a, ASearch, GridSpec};
use dsy::kernels::BesselKernel;
use dsy::numerics::{PowerIteration, Quadrature};

fn main() -> dsy::Result<()> {
    let k = BesselKernel::new();
    let q = Quadrature::default();
    for x in [5.0, 20.0, 100.0] {
        let (below, above) = k.two_step_split(x, &q)?;
        println!("x = {x:>5}: x² p⁽²⁾(x,x) splits {:.6} + {:.6}", x * x * below, x * x * above);
    }
    let c = cor36_check(&k, 1.0, &q)?;
    println!("b = 1: sup λ p⁽²⁾ = {:.4} at x = {:.3}, ∫ λ/(1+λ)² = {:.6}", c.sup_term, c.argsup, c.integral_term.value);

    let grid: GridSpec = "0:16:401".parse()?;
    let m = find_min_a(&k, Some(&grid), 0.5, ASearch::default(), PowerIteration::default())?
        .expect("the Bessel cascade has a passing a");
    println!(
        "a = {:.5}: ‖T_a‖ = {:.6} ({} grid), {:.6} on the doubled grid",
        m.a, m.norm, grid, m.norm_doubled
    );
    Ok(())
}
