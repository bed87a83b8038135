use csalsa::bench::{
    run_experiment, BlurSpec, ExperimentOutcome, ExperimentSpec, ImageSource, OutputPaths,
    SolverSettings,
};
use csalsa::operators::Signal;
use csalsa::solver::Status;

fn run(spec: &ExperimentSpec, max_iters: usize) -> ExperimentOutcome {
    let settings = SolverSettings {
        max_iters: Some(max_iters),
        ..Default::default()
    };
    run_experiment(spec, &settings, &OutputPaths::default()).unwrap()
}

fn feasible_when_converged(out: &ExperimentOutcome) {
    let r = &out.report;
    if r.status == Status::Converged {
        assert!(r.final_residual <= r.epsilon * (1.0 + r.solver.feas_rtol));
    }
}

// ‖u − w‖ and ‖B u − y − v‖ at termination, both relative to ‖y‖.
fn assert_gaps_small(out: &ExperimentOutcome) {
    let last = out.trace.last().unwrap();
    let y_norm = out.observation_image.norm();
    assert!(
        last.gap_uw <= 1e-3 * y_norm,
        "gap_uw {} vs ‖y‖ {y_norm}",
        last.gap_uw
    );
    assert!(
        last.gap_v <= 1e-3 * y_norm,
        "gap_v {} vs ‖y‖ {y_norm}",
        last.gap_v
    );
}

#[test]
fn noiseless_identity_blur_recovers_exactly() {
    let mut spec = ExperimentSpec::deblur_preset("1", ImageSource::Synthetic { size: 64 }).unwrap();
    spec.blur = Some(BlurSpec::Identity);
    spec.noise_variance = 0.0;
    spec.epsilon = Some(0.0);
    let out = run(&spec, 300);
    assert!(out.report.mse <= 1e-8, "mse {}", out.report.mse);
    feasible_when_converged(&out);
}

#[test]
fn deblur_gaps_close() {
    let spec = ExperimentSpec::deblur_preset("1", ImageSource::Synthetic { size: 256 }).unwrap();
    let out = run(&spec, 300);
    feasible_when_converged(&out);
    assert_gaps_small(&out);
}

#[test]
fn mri_gaps_close() {
    let out = run(&ExperimentSpec::mri_preset(128, 22), 500);
    // The zero-filled image has the norm of y: the mask is conjugate-symmetric.
    assert!(out.report.adjoint_imag_residual.unwrap() < 1e-12);
    feasible_when_converged(&out);
    assert_gaps_small(&out);
}

#[test]
fn small_runs_repeat_bit_for_bit() {
    let specs = [
        ExperimentSpec::deblur_preset("2B", ImageSource::Synthetic { size: 64 }).unwrap(),
        ExperimentSpec::mri_preset(64, 12),
    ];
    for spec in &specs {
        let (a, b) = (run(spec, 40), run(spec, 40));
        assert_eq!(a.report.without_timing(), b.report.without_timing());
        assert_eq!(a.reconstruction, b.reconstruction);
        let strip = |o: &ExperimentOutcome| {
            o.trace
                .records
                .iter()
                .map(|r| (r.iter, r.res_w, r.res_u, r.phi_w, r.gap_uw, r.gap_v, r.mse))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b));
    }
}
