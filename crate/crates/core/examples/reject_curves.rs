//! Precision and recall reject curves for a handful of scored predictions.

use wskdc::metrics::{curve_to_table, reject_curves};

fn main() -> wskdc::error::Result<()> {
    let scores = [0.1, 0.2, 0.3, 0.4];
    let predicted = [true, true, false, true];
    let labels = [false, true, false, true];
    let curves = reject_curves(&scores, &predicted, &labels, Some(0.25))?;

    println!("coverage  precision  recall  tau");
    for row in curve_to_table(&curves) {
        println!(
            "{:>8.2}  {:>9.4}  {:>6.4}  {}",
            row.coverage,
            row.precision,
            row.recall,
            if row.tau_marker { "*" } else { "" }
        );
    }
    println!("AUPRC {:.4}, AURRC {:.4}", curves.auprc, curves.aurrc);
    Ok(())
}
