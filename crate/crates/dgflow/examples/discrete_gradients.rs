//! The discrete gradients side by side at a pair of Hénon–Heiles states.
//!
//! Prints the mean-value residual, the consistency gap at `y = x` and the
//! size of `Q(x, y)`, which vanishes for the AVF gradient.

use dgflow::dg::{DgKind, DiscreteGradient};
use dgflow::system::henon_heiles;
use dgflow::Vector;

fn main() -> dgflow::Result<()> {
    let sys = henon_heiles().system;
    let x = Vector::from_vec(vec![0.1, -0.5, 0.2, 0.3]);
    let y = Vector::from_vec(vec![0.4, 0.1, -0.3, 0.25]);
    let dh = sys.energy(&y)? - sys.energy(&x)?;
    for kind in [
        DgKind::Avf,
        DgKind::ItohAbe,
        DgKind::SymItohAbe,
        DgKind::Furihata,
        DgKind::GonzalezMidpoint,
    ] {
        let dg = DiscreteGradient::new(kind);
        let g = dg.eval(&sys, &x, &y)?;
        let mean_value = (g.dot(&(&y - &x)) - dh).abs();
        let gap = (dg.eval(&sys, &x, &x)? - sys.grad(&x)?).amax();
        let q = if dg.has_jacobian() {
            format!("{:.2e}", dg.q(&sys, &x, &y)?.amax())
        } else {
            "-".into()
        };
        println!("{kind:<9} |mean value| {mean_value:.1e}  |dg(x,x) - grad| {gap:.1e}  |Q(x,y)| {q}  symmetric {}", dg.is_symmetric());
    }
    Ok(())
}
