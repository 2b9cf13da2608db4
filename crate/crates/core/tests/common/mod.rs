use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use squeezekit_core::analysis::{optimize_rotation, rotation_objective};
use squeezekit_core::gaussian::UNCERTAINTY_TOL;
use squeezekit_core::oracle::ExactState;
use squeezekit_core::*;

pub const CASES: u32 = 1000;

type Check = std::result::Result<(), TestCaseError>;

#[derive(Debug, Clone)]
pub enum Op {
    Attach,
    Faraday(usize, f64),
    Waveplate(usize),
    Rotate(f64),
    Loss(usize, f64),
    Eraser(usize, f64, f64, f64),
    Scatter(f64, f64),
    Homodyne(usize, f64, f64),
    Trace(usize),
}

pub fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        Just(Op::Attach),
        (0..4usize, 0.0..3.0f64).prop_map(|(i, x)| Op::Faraday(i, x)),
        (0..4usize).prop_map(Op::Waveplate),
        (-4.0..4.0f64).prop_map(Op::Rotate),
        (0..4usize, 0.0..0.99f64).prop_map(|(i, l)| Op::Loss(i, l)),
        (0..4usize, 0.0..3.0f64, 0.0..0.5f64, 0.0..0.5f64)
            .prop_map(|(i, x, e, s)| Op::Eraser(i, x, e, s)),
        (0.0..0.5f64, 0.0..1.0f64).prop_map(|(perp, frac)| Op::Scatter(perp, frac)),
        (0..4usize, -4.0..4.0f64, 0.0..1.0f64).prop_map(|(i, a, s)| Op::Homodyne(i, a, s)),
        (0..4usize).prop_map(Op::Trace),
    ]
}

pub fn unitary_op() -> impl Strategy<Value = Op> {
    prop_oneof![
        Just(Op::Attach),
        (0..4usize, 0.0..2.0f64).prop_map(|(i, x)| Op::Faraday(i, x)),
        (0..4usize).prop_map(Op::Waveplate),
        (-4.0..4.0f64).prop_map(Op::Rotate),
    ]
}

pub fn pick(state: &GaussianState, i: usize) -> (GaussianState, LightId) {
    let ids: Vec<LightId> = state.light_modes().collect();
    if ids.is_empty() {
        state.attach_vacuum()
    } else {
        (state.clone(), ids[i % ids.len()])
    }
}

pub fn apply(state: &GaussianState, op: &Op) -> GaussianState {
    match *op {
        Op::Attach => state.attach_vacuum().0,
        Op::Faraday(i, xi) => {
            let (st, id) = pick(state, i);
            faraday_pass(&st, id, xi).unwrap()
        }
        Op::Waveplate(i) => {
            let (st, id) = pick(state, i);
            waveplate_quarter(&st, id).unwrap()
        }
        Op::Rotate(phi) => atom_rotation(state, phi).unwrap(),
        Op::Loss(i, loss) => {
            let (st, id) = pick(state, i);
            optical_loss(&st, id, loss).unwrap()
        }
        Op::Eraser(i, xi, eps, sigma2) => {
            let (st, id) = pick(state, i);
            let imp = ImperfectionSettings::new(eps, sigma2).unwrap();
            eraser_step(&st, id, xi, &imp).unwrap()
        }
        Op::Scatter(perp, frac) => {
            let rates = DecayRates::new(2.0 * perp * frac, perp).unwrap();
            scattering_channel(state, &rates).unwrap()
        }
        Op::Homodyne(i, angle, sigma2) => {
            let (st, id) = pick(state, i);
            st.homodyne_condition(id, angle, sigma2).unwrap().0
        }
        Op::Trace(i) => {
            let (st, id) = pick(state, i);
            st.trace_out(id).unwrap()
        }
    }
}

pub fn run_ops(ops: &[Op]) -> GaussianState {
    ops.iter()
        .fold(GaussianState::new(0), |st, op| apply(&st, op))
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().min()
}

fn assert_physical(st: &GaussianState) -> Check {
    let bound = st.uncertainty_bound();
    for nu in st.symplectic_eigenvalues() {
        prop_assert!(nu >= bound - UNCERTAINTY_TOL, "nu {nu} < {bound}");
    }
    prop_assert!(st.check_physical("property").is_ok());
    Ok(())
}

fn atom_only(st: GaussianState) -> GaussianState {
    let ids: Vec<LightId> = st.light_modes().collect();
    ids.into_iter().fold(st, |s, id| s.trace_out(id).unwrap())
}

pub fn channel_maps_are_symplectic((modes, k, xi, phi): (usize, usize, f64, f64)) -> Check {
    let dim = 2 * modes;
    let k = 1 + (k - 1) % (modes - 1);
    let f = faraday_map(dim, k, xi).unwrap();
    let w = waveplate_map(dim, k);
    let r = rotation_map(dim, phi).unwrap();
    for map in [&f, &w, &r] {
        prop_assert!(map.symplectic_deviation() < 1e-10);
    }
    let dp = f.then(&w).then(&f);
    let scale = dp.s.amax().powi(2).max(1.0);
    prop_assert!(dp.symplectic_deviation() < 1e-13 * scale);
    Ok(())
}

pub fn uncertainty_survives_any_sequence(ops: Vec<Op>) -> Check {
    let mut st = GaussianState::new(0);
    for op in &ops {
        st = apply(&st, op);
        assert_physical(&st)?;
    }
    if st.contrast() == 1.0 {
        for nu in st.symplectic_eigenvalues() {
            prop_assert!(nu >= 0.5 - UNCERTAINTY_TOL);
        }
    }
    Ok(())
}

pub fn unitary_sequences_stay_pure(ops: Vec<Op>) -> Check {
    let st = run_ops(&ops);
    for nu in st.symplectic_eigenvalues() {
        prop_assert!((nu - 0.5).abs() < 1e-8, "nu = {nu}");
    }
    let [[a, c], [_, b]] = atom_only(st).atom_cov();
    prop_assert!(a * b - c * c >= 0.25 - 1e-10);
    Ok(())
}

pub fn atom_only_symplectic_keeps_determinant(steps: Vec<(f64, f64, f64)>) -> Check {
    let mut st = GaussianState::new(0);
    for (phi, shear, log_r) in steps {
        let r = log_r.exp();
        let m = DMatrix::from_row_slice(2, 2, &[1.0, shear, 0.0, 1.0]);
        let sq = DMatrix::from_row_slice(2, 2, &[r, 0.0, 0.0, 1.0 / r]);
        st = atom_rotation(&st, phi).unwrap();
        st = st.apply_symplectic(&SymplecticMap::new(sq * m)).unwrap();
    }
    let [[a, c], [_, b]] = st.atom_cov();
    let scale = (a * b).max(1.0);
    prop_assert!((a * b - c * c - 0.25).abs() < 1e-10 * scale);
    Ok(())
}

pub fn conditioning_never_increases_variance(
    (ops, i, angle, sigma2, extra): (Vec<Op>, usize, f64, f64, usize),
) -> Check {
    let mut st = run_ops(&ops);
    for _ in 0..=extra {
        st = apply(&st, &Op::Faraday(i, 0.7));
    }
    let (st, id) = pick(&st, i);
    let k = st.light_index(id).unwrap();
    let (out, _) = st.homodyne_condition(id, angle, sigma2).unwrap();
    let keep: Vec<usize> = (0..st.dim())
        .filter(|&j| j != 2 * k && j != 2 * k + 1)
        .collect();
    let before = DMatrix::from_fn(keep.len(), keep.len(), |r, c| st.cov()[(keep[r], keep[c])]);
    let diff = &before - out.cov();
    let scale = before.amax().max(1.0);
    prop_assert!(min_eigenvalue(&diff) >= -1e-12 * scale);
    for j in 0..keep.len() {
        prop_assert!(out.cov()[(j, j)] <= before[(j, j)] + 1e-12 * scale);
    }
    Ok(())
}

pub fn trace_inverts_attach(ops: Vec<Op>) -> Check {
    let st = run_ops(&ops);
    let (bigger, id) = st.attach_vacuum();
    let back = bigger.trace_out(id).unwrap();
    prop_assert_eq!(back.cov(), st.cov());
    prop_assert_eq!(back.mean(), st.mean());
    prop_assert_eq!(back.modes(), st.modes());
    prop_assert_eq!(back.contrast(), st.contrast());
    Ok(())
}

pub fn scattering_preserves_bound((ops, perp, frac): (Vec<Op>, f64, f64)) -> Check {
    let st = run_ops(&ops);
    let rates = DecayRates::new(2.0 * perp * frac, perp).unwrap();
    assert_physical(&scattering_channel(&st, &rates).unwrap())
}

pub fn ideal_eraser_is_pure_shear((ops, xi): (Vec<Op>, f64)) -> Check {
    let st = atom_only(run_ops(&ops));
    let (with_light, id) = st.attach_vacuum();
    let out = eraser_step(&with_light, id, xi, &ImperfectionSettings::ideal()).unwrap();
    let s = DMatrix::from_row_slice(2, 2, &[1.0, xi, 0.0, 1.0]);
    let expect = &s * st.cov() * s.transpose();
    let err = (out.cov() - &expect).amax();
    prop_assert!(err < 1e-10 * expect.amax().max(1.0), "err {err}");
    Ok(())
}

pub fn optimized_rotation_dominates_heuristics(
    (ops, xi_step, perp, eps, sigma2): (Vec<Op>, f64, f64, f64, f64),
) -> Check {
    let st = atom_only(run_ops(&ops));
    let rates = DecayRates::new(perp, perp).unwrap();
    let imp = ImperfectionSettings::new(eps, sigma2).unwrap();
    let phi = optimize_rotation(&st, xi_step, &rates, &imp).unwrap();
    let best = rotation_objective(&st, phi, xi_step, &rates, &imp).unwrap();
    for other in [0.0, 0.5 * xi_step] {
        let v = rotation_objective(&st, other, xi_step, &rates, &imp).unwrap();
        prop_assert!(
            best <= v * (1.0 + 1e-9) + 1e-15,
            "phi {phi}: {best} > {v} at {other}"
        );
    }
    Ok(())
}

pub fn closed_form_ordering(xi: f64) -> Check {
    let (qnd, dp, qe, pm) = (zeta_qnd(xi), zeta_dp(xi), zeta_qe(xi), zeta_pm(xi));
    let tol = 1e-12;
    prop_assert!(pm <= qe * (1.0 + tol));
    prop_assert!(qe <= qnd.min(dp) * (1.0 + tol));
    prop_assert!(qnd <= dp * (1.0 + tol));
    Ok(())
}

pub fn runs_are_deterministic_and_consistent(
    (kind, rho, eta, eps, sigma2, segments): (ProtocolKind, f64, f64, f64, f64, usize),
) -> Check {
    let sched = ProtocolSchedule::from_density(kind, rho, eta)
        .unwrap()
        .with_segments(segments)
        .with_imperfections(ImperfectionSettings::new(eps, sigma2).unwrap());
    let a = run_protocol(&sched).unwrap();
    let b = run_protocol(&sched).unwrap();
    prop_assert_eq!(&a, &b);
    prop_assert!(a.validate().is_ok());
    prop_assert!(
        (a.zeta - 2.0 * a.min_variance / (a.contrast * a.contrast)).abs() <= 1e-12 * a.zeta
    );
    Ok(())
}

#[derive(Debug, Clone)]
pub enum ExactOp {
    Faraday(f64),
    Twist(f64),
    Rotate(f64),
}

pub fn exact_op() -> impl Strategy<Value = ExactOp> {
    prop_oneof![
        (-1.0..1.0f64).prop_map(ExactOp::Faraday),
        (-1.0..1.0f64).prop_map(ExactOp::Twist),
        (-7.0..7.0f64).prop_map(ExactOp::Rotate),
    ]
}

pub fn exact_evolution_is_unitary((na, nl, ops): (usize, usize, Vec<ExactOp>)) -> Check {
    let mut st = ExactState::coherent(na, nl).unwrap();
    for op in &ops {
        st = match *op {
            ExactOp::Faraday(chi) => st.evolve_faraday_exact(chi),
            ExactOp::Twist(mu) => st.one_axis_twist_exact(mu),
            ExactOp::Rotate(theta) => st.stokes_rotation_exact(theta),
        };
    }
    prop_assert!((st.norm() - 1.0).abs() < 1e-12);
    Ok(())
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    check: impl Fn(S::Value) -> Check,
) -> std::result::Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new(config)
        .run(&strategy, check)
        .map_err(|e| e.to_string())
}

pub type Suite = (&'static str, fn(u32) -> std::result::Result<(), String>);

/// Every randomized suite, by name.
pub const SUITES: &[Suite] = &[
    ("channel_maps_are_symplectic", |n| {
        run(
            n,
            (2..5usize, 1..4usize, 0.0..100.0f64, -10.0..10.0f64),
            channel_maps_are_symplectic,
        )
    }),
    ("uncertainty_survives_any_sequence", |n| {
        run(
            n,
            prop::collection::vec(op(), 0..12),
            uncertainty_survives_any_sequence,
        )
    }),
    ("unitary_sequences_stay_pure", |n| {
        run(
            n,
            prop::collection::vec(unitary_op(), 0..10),
            unitary_sequences_stay_pure,
        )
    }),
    ("atom_only_symplectic_keeps_determinant", |n| {
        let step = (-3.0..3.0f64, -2.0..2.0f64, -1.0..1.0f64);
        run(
            n,
            prop::collection::vec(step, 0..8),
            atom_only_symplectic_keeps_determinant,
        )
    }),
    ("conditioning_never_increases_variance", |n| {
        let ops = prop::collection::vec(op(), 0..8);
        run(
            n,
            (ops, 0..4usize, -4.0..4.0f64, 0.0..2.0f64, 0..3usize),
            conditioning_never_increases_variance,
        )
    }),
    ("trace_inverts_attach", |n| {
        run(n, prop::collection::vec(op(), 0..10), trace_inverts_attach)
    }),
    ("scattering_preserves_bound", |n| {
        run(
            n,
            (prop::collection::vec(op(), 0..8), 0.0..5.0f64, 0.0..1.0f64),
            scattering_preserves_bound,
        )
    }),
    ("ideal_eraser_is_pure_shear", |n| {
        run(
            n,
            (prop::collection::vec(op(), 0..6), 0.0..100.0f64),
            ideal_eraser_is_pure_shear,
        )
    }),
    ("optimized_rotation_dominates_heuristics", |n| {
        let ops = prop::collection::vec(op(), 0..6);
        let strategy = (ops, 0.0..0.5f64, 0.0..0.01f64, 0.0..0.3f64, 0.0..0.3f64);
        run(n, strategy, optimized_rotation_dominates_heuristics)
    }),
    ("closed_form_ordering", |n| {
        run(n, 1e-3..200.0f64, closed_form_ordering)
    }),
    ("runs_are_deterministic_and_consistent", |n| {
        let kind = prop::sample::select(ProtocolKind::ALL.to_vec());
        let strategy = (
            kind,
            10.0..1000.0f64,
            0.0..0.5f64,
            0.0..0.3f64,
            0.0..0.3f64,
            1..12usize,
        );
        run(n, strategy, runs_are_deterministic_and_consistent)
    }),
    ("exact_evolution_is_unitary", |n| {
        run(
            n,
            (
                1..10usize,
                1..10usize,
                prop::collection::vec(exact_op(), 0..6),
            ),
            exact_evolution_is_unitary,
        )
    }),
];
