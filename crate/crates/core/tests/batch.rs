use pidtune::trials::{
    default_registry, generate_configs, run_batch, EecLevel, InitialState, RobotSetup, TrialSettings,
};
use pidtune::{OptimizerKind, PlantParams, RobotKind};

#[test]
fn a_diverging_plant_fails_only_its_own_trials() {
    let mut registry = default_registry();
    let omni = registry.get_mut(&RobotKind::Omnidirectional).unwrap();
    *omni = RobotSetup {
        plant: PlantParams { inertia: 1e-300, damping: 0.0, command_limit: 1e300, noise_std: 0.0 },
        experiment: omni.experiment,
    };
    let eecs = EecLevel::defaults();
    let mut configs = generate_configs(
        &eecs[..1],
        &InitialState::defaults()[..1],
        &[OptimizerKind::De],
        &RobotKind::ALL,
        &[0, 1, 2],
        &TrialSettings::default(),
    );
    configs.retain(|c| c.robot == RobotKind::Ddrm || c.seed == 0);
    assert_eq!(configs.len(), 4);

    for parallelism in [1, 3] {
        let results = run_batch(&configs, &registry, parallelism);
        assert_eq!(results.len(), configs.len());
        for (r, c) in results.iter().zip(&configs) {
            assert_eq!(&r.config, c);
            if c.robot == RobotKind::Omnidirectional {
                assert!(r.is_failure());
                assert!(!r.converged);
                assert!(r.failure.as_deref().unwrap().contains("diverge"), "{:?}", r.failure);
            } else {
                assert!(!r.is_failure(), "{:?}", r.failure);
            }
        }
    }
}
