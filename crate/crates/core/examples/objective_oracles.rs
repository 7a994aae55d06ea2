//! Population-level checks of the least-squares objective on a small pmf.
//!
//! cargo run --example objective_oracles

use gcmi::gcin::{
    chi2_generator_objective, optimal_discriminator, population_discriminator_loss, population_generator_loss,
    DiscreteDist,
};

fn main() -> gcmi::Result<()> {
    let support = vec![0.0, 1.0, 2.0, 3.0];
    let p = DiscreteDist::new(support.clone(), vec![0.4, 0.3, 0.2, 0.1])?;
    let g = DiscreteDist::new(support.clone(), vec![0.1, 0.2, 0.3, 0.4])?;

    let d_star: Vec<f64> = support
        .iter()
        .map(|&x| optimal_discriminator(&p, &g, x))
        .collect::<gcmi::Result<_>>()?;
    println!("D* = {d_star:.4?}");

    let best = population_discriminator_loss(&p, &g, &d_star)?;
    let flat = population_discriminator_loss(&p, &g, &[1.0; 4])?;
    println!("L_D at D* = {best:.6}, at D = 1 everywhere = {flat:.6}");

    let lg = population_generator_loss(&p, &g, &d_star)?;
    let chi2 = chi2_generator_objective(&p, &g)?;
    println!("L_G at D* = {lg:.12}\nhalf chi-square = {chi2:.12}");
    println!("at g = p: {}", chi2_generator_objective(&p, &p)?);
    Ok(())
}
