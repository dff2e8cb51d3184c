//! First-passage speed on the binary tree: ζ_n/n against the root of c − 1 − ln c = ln 2.
use dsy::cli::fpp_speed;
use dsy::numerics::stats::RunningStats;
use dsy::sim::{zeta_trials, CascadeModel};

fn main() -> dsy::Result<()> {
    let c = fpp_speed()?;
    let yule = CascadeModel::yule();
    for n in [10u32, 20, 30, 40] {
        let runs = zeta_trials(&yule, n, 2_000_000, 100, 3, None)?;
        let mut s = RunningStats::default();
        runs.iter().filter_map(|z| z.zeta()).for_each(|z| s.push(z / n as f64));
        let censored = runs.iter().filter(|z| z.censored).count();
        println!("n = {n:>3}: mean ζ_n/n = {:.4} ± {:.4} ({censored} censored)", s.mean(), s.std_error());
    }
    // the approach is slow: E ζ_n − c n grows like (3/2c) ln n
    println!("limit c = {c:.6}");
    Ok(())
}
