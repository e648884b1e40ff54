//! The classic two-sector economy end to end: eigen data, chain transform,
//! and the exact collapse experiment.

use ecomat::eigen::{eigentriple, SolverConfig};
use ecomat::stability::{collapse_report, iterate_exact, CrisisConfig};
use ecomat::transform::chen_transform;
use ecomat::{parse_decimal, StructureMatrix};

fn main() -> Result<(), ecomat::Error> {
    let a = StructureMatrix::from_decimal_rows(
        vec!["agriculture".into(), "manufacturing".into()],
        &[vec!["0.25", "0.14"], vec!["0.4", "0.12"]],
    )?;
    let triple = eigentriple(&a, &SolverConfig::default())?;
    println!("rho = {}", triple.rho);
    println!("u   = {:?} (equilibrium,* any positive constant)", triple.u);
    let chain = chen_transform(&a, &triple)?;
    println!("pi  = {:?}", chain.pi());

    let x0 = vec![parse_decimal("44.344")?, parse_decimal("20")?];
    let trajectory = iterate_exact(&a, &x0, 1000)?;
    let report = collapse_report(&trajectory, &CrisisConfig { rho: Some(triple.rho), threshold: 0.1 });
    assert_eq!(report.collapse_time, Some(8));
    println!(
        "starting from the equilibrium rounded to 3 decimals, product {:?} collapses at year {}",
        report.collapse_product.map(|k| &a.labels()[k]),
        report.collapse_time.unwrap()
    );
    Ok(())
}
