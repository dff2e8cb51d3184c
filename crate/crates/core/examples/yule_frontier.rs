//! Classical Yule tree: frontier growth E N(t) = e^t, and no budget blow-ups.
use dsy::numerics::stats::RunningStats;
use dsy::sim::{explosion_probability, frontier_trials, CascadeModel};

fn main() -> dsy::Result<()> {
    let yule = CascadeModel::yule();
    let runs = frontier_trials(&yule, 3.0, 1_000_000, 2000, 1, None)?;
    let mut s = RunningStats::default();
    runs.iter().for_each(|r| s.push(r.crossed_count as f64));
    println!("N(3): mean {:.3} ± {:.3}, e^3 = {:.3}", s.mean(), s.std_error(), 3f64.exp());

    let e = explosion_probability(&yule, 10.0, 1_000_000, 20, 2, None)?;
    println!(
        "budget exceeded before t = 10 in {}/{} trials ({})",
        e.exceeded, e.trials, e.caveat
    );
    Ok(())
}
