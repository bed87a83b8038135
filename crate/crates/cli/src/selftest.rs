//! `csalsa selftest`: the oracle suites at small sizes.

use csalsa::operators::{make_circulant, Grid2D};
use csalsa::oracle::{
    adjoint_parseval_suite, adjoint_trials, denoising_suite, operator_oracle_suite, prox_suite,
    CheckRow, PerturbedAdjoint,
};
use csalsa::Result;

pub struct SelftestOptions {
    pub quick: bool,
    /// Test hook: adds a check on a deliberately wrong adjoint.
    pub perturb_adjoint: Option<f64>,
    pub seed: u64,
}

pub fn run_selftest(opts: &SelftestOptions) -> Result<Vec<CheckRow>> {
    let (draws, trials, seeds) = if opts.quick {
        (10, 20, 5)
    } else {
        (50, 100, 20)
    };
    let mut rows = operator_oracle_suite(draws, opts.seed, 1e-8)?;
    rows.extend(adjoint_parseval_suite(8, trials, opts.seed + 1)?);
    if let Some(delta) = opts.perturb_adjoint {
        let kernel = Grid2D::from_fn(3, 3, |(r, c)| (1 + r + 2 * c) as f64 / 36.0);
        let op = PerturbedAdjoint {
            inner: make_circulant(&kernel, 8, 8)?,
            delta,
        };
        rows.push(CheckRow::new(
            format!("circulant adjoint, perturbed by {delta:e}"),
            adjoint_trials(&op, trials, opts.seed + 2)?,
            1e-10,
        ));
    }
    let tv_iters = if opts.quick { 1000 } else { 3000 };
    let mut prox = prox_suite(opts.seed + 3, tv_iters, 1e-12)?;
    if opts.quick {
        // The shorter TV budget is only checked loosely.
        if let Some(row) = prox.iter_mut().find(|r| r.name.starts_with("tv prox")) {
            *row = CheckRow::new(row.name.clone(), row.value, 1e-3);
        }
    }
    rows.extend(prox);
    rows.extend(denoising_suite(32, seeds, 200)?);
    Ok(rows)
}
