use pendulum_core::oracle;
use pendulum_core::pendulum::uniform_grid;
use pendulum_core::{
    find_eigenvalues, predetermined_spectrum, reconstruct_eigenfunction, ForceFunction, PotentialPair, SpectrumOptions,
};

#[test]
fn two_level_ladder_agrees_with_oracle() {
    let force = predetermined_spectrum(0, 2, None).unwrap();
    let opts = SpectrumOptions::for_force(&force);
    let search = find_eigenvalues(&force, (0.0, 1.0), &opts).unwrap();
    assert!(search.suspects.is_empty());
    assert_eq!(search.levels.len(), 2);

    let l = opts.integration.half_width;
    let v = PotentialPair::new(&force).v;
    let reference = oracle::richardson(|x| v.eval(x), l, 4000, 2, v.continuum_edge(l)).unwrap();
    for (level, r) in search.levels.iter().zip(&reference) {
        let allowed = (10.0 * r.uncertainty).max(1e-6);
        assert!(
            (level.energy - r.extrapolated).abs() < allowed,
            "n={}: {} vs {}",
            level.n,
            level.energy,
            r.extrapolated
        );
    }

    let grid = uniform_grid(l, 4001);
    for level in &search.levels {
        let pair = reconstruct_eigenfunction(&force, level, &grid, &opts.integration).unwrap();
        assert_eq!(pair.nodes, level.n);
    }
}

#[test]
fn sampled_force_tracks_closed_form() {
    let exact = ForceFunction::sech_well(0.5).unwrap();
    let xs: Vec<f64> = (0..=8000).map(|i| -20.0 + 0.005 * i as f64).collect();
    let values = xs.iter().map(|&x| exact.value(x)).collect();
    let sampled = ForceFunction::from_samples(xs, values).unwrap();
    let opts = SpectrumOptions::for_force(&sampled);
    let search = find_eigenvalues(&sampled, (0.0, 1.0), &opts).unwrap();
    assert_eq!(search.levels.len(), 1);
    assert!((search.levels[0].energy - 0.25).abs() < 1e-6);
}
