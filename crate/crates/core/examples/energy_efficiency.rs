// Energy efficiency against converter resolution: faster converters buy rate
// until their power draw dominates.
//
//   cargo run --release --example energy_efficiency

use cellfree::config::Resolution;
use cellfree::energy::{component_powers, PowerParams};
use cellfree::harness::{run_experiment, ExperimentKind, Metric, PrecoderChoice, RunConfig, RunOptions};

fn main() -> cellfree::Result<()> {
    let params = PowerParams::default();
    for b in [1, 4, 6, 8] {
        let (adc, rf) = component_powers(&params, Resolution::Bits(b))?;
        println!("B={b}: P_ADC = {:.3} mW, P_RF = {:.1} mW", adc * 1e3, rf * 1e3);
    }

    let mut run = RunConfig::default();
    run.experiment.drops = 3;
    run.experiment.blocks = 2;
    run.experiment.capacities = vec![16.0];
    run.experiment.precoder = PrecoderChoice::Zf;
    let rows = run_experiment(ExperimentKind::EeSweep, &run, &RunOptions::default())?;
    println!("\n B   EE (Mbits/J)   sum P_BS (W)");
    for pair in rows.chunks(2) {
        let ee = pair.iter().find(|r| r.metric == Metric::Ee).unwrap();
        let pbs = pair.iter().find(|r| r.metric == Metric::PBsTotal).unwrap();
        println!("{:>2}   {:>12.4}   {:>12.4}", ee.bits, ee.value / 1e6, pbs.value);
    }
    Ok(())
}
