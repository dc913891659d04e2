//! Tree-by-tree order conditions for the built-in schemes.
//!
//! For each scheme and series, prints the highest order whose conditions all
//! hold and the worst residual at the next order.

use dgflow::sbar::{builtin_scheme, SCHEME_NAMES};
use dgflow::trees::{check_order, Series};

fn main() -> dgflow::Result<()> {
    println!(
        "{:<12} {:>6} {:>8} {:>10} {:>12}",
        "scheme", "series", "nominal", "attained", "next resid"
    );
    for name in SCHEME_NAMES {
        let scheme = builtin_scheme(name)?;
        for series in [Series::B, Series::P, Series::G] {
            if series == Series::P && scheme.requires_constant_s {
                continue;
            }
            let top = series.max_order();
            let report = check_order(&scheme, top, series)?;
            let attained = report.attained_order();
            let next = report
                .rows_of_order(attained + 1)
                .map(|r| r.residual)
                .fold(0.0, f64::max);
            println!(
                "{:<12} {:>6} {:>8} {:>10} {:>12.3e}",
                name, series, scheme.nominal_order, attained, next
            );
        }
    }
    Ok(())
}
