//! Score a digit distribution against the Benford reference.
//!
//! The five measures: Pearson χ² on the nine digit cells (critical values
//! 13.36 / 15.51 / 20.09 at df = 8), Pearson correlation, maximum deviation
//! M, the normalized Euclidean distance d*, and the mean-digit distance a*.
//!
//! Run with: `cargo run --example conformance_scores`

use benford_audit::conformance::{
    conformance_report, BenfordReference, DStarMode, DigitFrequencies,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reference = BenfordReference::new();
    println!("Benford reference (percent):");
    for (i, &b) in reference.probabilities().iter().enumerate() {
        print!("  {}:{:.4}", i + 1, 100.0 * b);
    }
    println!(
        "\nmean digit {:.6}, d* normalizer {:.6}, d* maximum {:.6}\n",
        reference.mean_digit(),
        reference.d_star_normalizer(),
        reference.d_star_max()
    );

    // A published-style frequency row (percent) with its observation count.
    let observed = DigitFrequencies::from_percentages(
        [23.2044, 18.3241, 17.9558, 13.2597, 8.6556, 5.5249, 4.8803, 4.4199, 3.7753],
        1080.0,
    )?;
    let report = conformance_report("MATS", &observed, &reference, DStarMode::TableConsistent)?;
    println!("sector {}  (n = {})", report.sector, report.n);
    println!(
        "  chi2 = {:.4}  significant at 10%/5%/1%: {}/{}/{}",
        report.chi_square.statistic,
        report.chi_square.significant_10,
        report.chi_square.significant_5,
        report.chi_square.significant_1,
    );
    println!("  corr = {:.4}", report.correlation);
    println!("  M    = {:.4} percentage points", report.m_deviation);
    println!("  d*   = {:.5}  ({})", report.d_star, report.d_star_mode);
    println!("  a*   = {:.5}", report.a_star);

    // The same distance under the alternative normalization, which divides
    // by the sample's own maximum deviation instead of the fixed constant.
    let literal = benford_audit::conformance::d_star(&observed, &reference, DStarMode::LiteralEq3);
    println!("  d*   = {:.5}  ({})", literal.value, literal.mode);
    Ok(())
}
