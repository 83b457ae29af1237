use super::*;
use crate::algebra::{rat, ratio};
use crate::sampling::RatSampler;

fn env_a(p: i64, q: i64) -> ParamEnv {
    ParamEnv::new().set("p", rat(p)).set("q", rat(q))
}

fn env_n(n: i64) -> ParamEnv {
    ParamEnv::new().set("n", rat(n))
}

/// One spec per model with small parameters, for sweeping checks.
pub(crate) fn sample_specs() -> Vec<ModelSpec> {
    vec![
        get_model(ModelId::A, &env_a(2, 1)).unwrap(),
        get_model(ModelId::A, &env_a(3, 2)).unwrap(),
        get_model(ModelId::B, &env_n(2)).unwrap(),
        get_model(ModelId::B, &env_n(4)).unwrap(),
        get_model(ModelId::C, &env_n(3)).unwrap(),
        get_model(ModelId::C, &env_n(5)).unwrap(),
        get_model(ModelId::D, &ParamEnv::new()).unwrap(),
        get_model(ModelId::E, &ParamEnv::new()).unwrap(),
    ]
}

#[test]
fn model_a_dimensions_and_killing_constants() {
    let spec = get_model(ModelId::A, &env_a(2, 1)).unwrap();
    assert_eq!(spec.s, 3);
    assert_eq!(spec.dims, vec![1, 4, 2]);
    assert_eq!(spec.b, vec![rat(6), rat(12), rat(8)]);
}

#[test]
fn model_c_bracket_at_n3() {
    let spec = get_model(ModelId::C, &env_n(3)).unwrap();
    assert_eq!(spec.triple_bracket(1, 2, 3), ratio(1, 2));
    assert!(spec.warnings.is_empty());
}

#[test]
fn model_c_accepts_n2_with_warning() {
    let spec = get_model(ModelId::C, &env_n(2)).unwrap();
    assert_eq!(spec.warnings.len(), 1);
    assert!(get_model(ModelId::C, &env_n(1)).is_err());
}

#[test]
fn model_a_rejects_invalid_parameters() {
    assert!(matches!(
        get_model(ModelId::A, &env_a(1, 1)),
        Err(ModelError::InvalidParameters(_))
    ));
    assert!(get_model(ModelId::A, &env_a(2, 3)).is_err());
    assert!(get_model(ModelId::A, &ParamEnv::new().set("p", rat(2))).is_err());
    assert!(get_model(ModelId::A, &ParamEnv::new().set("p", ratio(5, 2)).set("q", rat(1))).is_err());
    assert!(get_model(ModelId::B, &env_n(1)).is_err());
}

#[test]
fn bracket_lookup_is_symmetric_and_sparse() {
    let b = get_model(ModelId::B, &env_n(2)).unwrap();
    assert_eq!(b.triple_bracket(1, 3, 3), ratio(1, 15)); // (n-1)^2/((n+1)(n+3)) at n = 2
    let d = get_model(ModelId::D, &ParamEnv::new()).unwrap();
    assert_eq!(d.triple_bracket(2, 4, 5), rat(4));
    assert_eq!(d.triple_bracket(4, 5, 2), rat(4));
    assert_eq!(d.triple_bracket(1, 1, 1), rat(0));
    let e = get_model(ModelId::E, &ParamEnv::new()).unwrap();
    assert_eq!(e.triple_bracket(1, 4, 5), rat(24));
    // All six permutations agree, on every nonzero entry of every model.
    for spec in sample_specs() {
        for i in 1..=spec.s {
            for j in 1..=spec.s {
                for k in 1..=spec.s {
                    let v = spec.triple_bracket(i, j, k);
                    assert_eq!(v, spec.triple_bracket(j, i, k));
                    assert_eq!(v, spec.triple_bracket(k, j, i));
                    assert_eq!(v, spec.triple_bracket(i, k, j));
                }
            }
        }
    }
}

#[test]
#[should_panic(expected = "out of range")]
fn bracket_index_out_of_range_panics() {
    let spec = get_model(ModelId::C, &env_n(3)).unwrap();
    let _ = spec.triple_bracket(0, 1, 4);
}

#[test]
fn boundary_data_examples() {
    // A at 0: f' = (2, 0, 1), f(0) = (0, zeta0, 0) in the unscaled convention.
    let a = get_model(ModelId::A, &env_a(2, 1)).unwrap();
    let bd = a.boundary_conditions(0);
    assert_eq!(bd.fp_values(), vec![2.0, 0.0, 1.0]);
    assert_eq!(bd.c_sq(0), Some(&rat(4)));
    assert_eq!(bd.c_sq(2), Some(&rat(1)));
    let env = ParamEnv::new().set("zeta0_sq", rat(9));
    assert_eq!(bd.f_values(&env).unwrap(), vec![0.0, 3.0, 0.0]);

    // E at 0: slopes (4, sqrt2, 0, 0, 0) stored via c^2 = (16, 2).
    let e = get_model(ModelId::E, &ParamEnv::new()).unwrap();
    let bd = e.boundary_conditions(0);
    assert_eq!(bd.c_sq(0), Some(&rat(16)));
    assert_eq!(bd.c_sq(1), Some(&rat(2)));
    assert_eq!(bd.collapsing(), vec![0, 1]);

    // C at 1: f' = (0, -1/2, 0), f(1) = (zeta1, 0, zeta1) with one group.
    let c = get_model(ModelId::C, &env_n(3)).unwrap();
    let bd = c.boundary_conditions(1);
    assert_eq!(bd.fp_values(), vec![0.0, -0.5, 0.0]);
    assert_eq!(bd.groups, vec!["zeta1_sq"]);
    assert_eq!(bd.group_members(), vec![vec![0, 2]]);
}

#[test]
fn collapsing_dimensions_sum_to_sphere_dimension() {
    for spec in sample_specs() {
        for endpoint in 0..2 {
            for bd in [&spec.boundary_unscaled[endpoint], &spec.boundary_ivp[endpoint]] {
                let sum: i64 = bd.collapsing().iter().map(|&i| spec.dims[i]).sum();
                assert_eq!(sum, bd.sphere_dim, "model {} endpoint {endpoint}", spec.id);
            }
        }
    }
}

#[test]
fn symmetry_maps() {
    let specs = sample_specs();
    let by_id = |id: ModelId| specs.iter().find(|s| s.id == id).unwrap();
    assert_eq!(by_id(ModelId::B).symmetry_map(), Some(&[0, 1, 2, 4, 3][..]));
    assert_eq!(by_id(ModelId::A).symmetry_map(), None);
    assert_eq!(by_id(ModelId::C).symmetry_map(), Some(&[0, 2, 1][..]));
    assert_eq!(by_id(ModelId::D).symmetry_map(), Some(&[0, 1, 2, 4, 3][..]));
    assert_eq!(by_id(ModelId::E).symmetry_map(), Some(&[0, 1, 2, 4, 3][..]));
}

#[test]
fn initial_points_match_reference_values() {
    // B at 1: x(0) = (zeta1^2, 1/(n+3), zeta1^2, xi1^2, xi1^2).
    let b = get_model(ModelId::B, &env_n(3)).unwrap();
    let env = b.base_env().set("zeta1_sq", ratio(9, 4)).set("xi1_sq", rat(5));
    let x0 = b.ivp(1).x0_eval(&env).unwrap();
    assert_eq!(
        x0.0,
        vec![ratio(9, 4), ratio(1, 6), ratio(9, 4), rat(5), rat(5)]
    );

    // D at 1: x(0) = (zeta1^2, 1, zeta1^2, xi1^2, xi1^2).
    let d = get_model(ModelId::D, &ParamEnv::new()).unwrap();
    let env = ParamEnv::new().set("zeta1_sq", rat(2)).set("xi1_sq", rat(3));
    let x0 = d.ivp(1).x0_eval(&env).unwrap();
    assert_eq!(x0.0, vec![rat(2), rat(1), rat(2), rat(3), rat(3)]);

    // E at 0: x(0) = (16, 2, zeta0^2, zeta0^2, zeta0^2).
    let e = get_model(ModelId::E, &ParamEnv::new()).unwrap();
    let env = ParamEnv::new().set("zeta0_sq", ratio(7, 2));
    let x0 = e.ivp(0).x0_eval(&env).unwrap();
    assert_eq!(x0.0, vec![rat(16), rat(2), ratio(7, 2), ratio(7, 2), ratio(7, 2)]);

    // A at 0 (rescaled convention): x(0) = (1, zeta0^2, 1).
    let a = get_model(ModelId::A, &env_a(2, 1)).unwrap();
    let env = a.base_env().set("zeta0_sq", rat(4));
    assert_eq!(a.ivp(0).x0_eval(&env).unwrap().0, vec![rat(1), rat(4), rat(1)]);
}

#[test]
fn data_files_agree_with_generic_construction() {
    // The shipped IVP sections were frozen from `recipe::derive_ivp`; this
    // guards against drift and validates the parse/print round trip.
    let mut sampler = RatSampler::new(2024);
    for spec in sample_specs() {
        for endpoint in 0..2 {
            let from_file = spec.ivp(endpoint);
            let derived = recipe::derive_ivp(spec.id, endpoint);
            let mut env = spec.default_env(endpoint);
            env.insert("lambda", ratio(3, 7));
            for _ in 0..20 {
                let x = sampler.positive_vec(spec.s, 24, 8);
                let y = sampler.rational_vec(spec.s, 12, 8);
                let t = sampler.rational(4, 8);
                for (ef, ed) in from_file.a.iter().zip(&derived.a) {
                    assert_eq!(
                        ef.eval_point(&env, &t, &x, &y),
                        ed.eval_point(&env, &t, &x, &y),
                        "A mismatch, model {} endpoint {endpoint}",
                        spec.id
                    );
                }
                for (ef, ed) in from_file.b.iter().zip(&derived.b) {
                    assert_eq!(ef.eval_point(&env, &t, &x, &y), ed.eval_point(&env, &t, &x, &y));
                }
                for (ef, ed) in from_file.c.iter().zip(&derived.c) {
                    assert_eq!(ef.eval_point(&env, &t, &x, &y), ed.eval_point(&env, &t, &x, &y));
                }
            }
            for (ef, ed) in from_file.x0.iter().zip(&derived.x0) {
                let env = spec.default_env(endpoint);
                assert_eq!(
                    ef.eval_point(&env, &Rational::zero(), &[], &[]),
                    ed.eval_point(&env, &Rational::zero(), &[], &[])
                );
            }
        }
    }
}

#[test]
fn rendered_sections_match_shipped_files() {
    for spec in [ModelId::A, ModelId::B, ModelId::C, ModelId::D, ModelId::E] {
        let rendered = recipe::render_ivp_sections(spec);
        let shipped = datafile::raw(spec);
        let tail = shipped
            .find("[ivp0]")
            .map(|i| &shipped[i..])
            .unwrap_or_default()
            .trim_end();
        assert_eq!(
            tail,
            rendered.trim_end(),
            "model {spec} data file drifted from the generic construction"
        );
    }
}

#[test]
fn vector_fields_are_p_equivariant() {
    // A(Px) = P(A(x)), B(Px,Py) = P(B(x,y)), C(t,Px,Py) = P(C(t,x,y)),
    // exactly, at 100 random interior points per model and endpoint.
    // Equivariance holds for the IVP at the symmetric endpoint, where the
    // swapped summands are of the same (non-collapsing) type; at the other
    // endpoint the change of variables itself distinguishes them.
    let mut sampler = RatSampler::new(99);
    for spec in sample_specs() {
        let (Some(perm), Some(endpoint)) = (spec.symmetry_map(), spec.symmetric_endpoint) else {
            continue;
        };
        {
            let ivp = spec.ivp(endpoint);
            let mut env = spec.default_env(endpoint);
            env.insert("lambda", ratio(-2, 3));
            for _ in 0..100 {
                let x = sampler.positive_vec(spec.s, 20, 6);
                let y = sampler.rational_vec(spec.s, 10, 6);
                let t = sampler.rational(3, 5);
                let px: Vec<Rational> = perm.iter().map(|&j| x[j].clone()).collect();
                let py: Vec<Rational> = perm.iter().map(|&j| y[j].clone()).collect();

                let a = ivp.eval_a(&env, &x).unwrap();
                let pa = ivp.eval_a(&env, &px).unwrap();
                assert_eq!(pa, a.permute(perm), "A equivariance, model {}", spec.id);

                let b = ivp.eval_b(&env, &x, &y).unwrap();
                let pb = ivp.eval_b(&env, &px, &py).unwrap();
                assert_eq!(pb, b.permute(perm), "B equivariance, model {}", spec.id);

                let c = ivp.eval_c(&env, &t, &x, &y).unwrap();
                let pc = ivp.eval_c(&env, &t, &px, &py).unwrap();
                assert_eq!(pc, c.permute(perm), "C equivariance, model {}", spec.id);
            }
        }
    }
}

#[test]
fn symmetric_endpoint_fixes_initial_point() {
    for spec in sample_specs() {
        let (Some(perm), Some(endpoint)) = (spec.symmetry_map(), spec.symmetric_endpoint) else {
            continue;
        };
        let env = spec.default_env(endpoint).set("zeta0_sq", ratio(5, 3)).set("zeta1_sq", ratio(5, 3));
        let x0 = spec.ivp(endpoint).x0_eval(&env).unwrap();
        assert_eq!(x0.permute(perm), x0, "model {}", spec.id);
    }
}

#[test]
fn nondiagonal_constraint_present_only_for_model_b() {
    for spec in sample_specs() {
        assert_eq!(spec.nondiagonal_constraint.is_some(), spec.id == ModelId::B);
    }
}

#[test]
fn data_file_errors_report_position() {
    let bad = "format = 1\nmodel = C\n[einstein]\ng1 = x1 +\n";
    let err = datafile::parse(ModelId::C, bad).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("line 4"), "{msg}");
    assert!(msg.contains("g1"), "{msg}");

    let wrong_model = "format = 1\nmodel = D\n";
    assert!(datafile::parse(ModelId::C, wrong_model).is_err());

    let bad_version = "format = 9\nmodel = C\n";
    assert!(datafile::parse(ModelId::C, bad_version).unwrap_err().to_string().contains("version"));

    let no_section = "format = 1\nmodel = C\ng1 = x1\n";
    assert!(datafile::parse(ModelId::C, no_section).unwrap_err().to_string().contains("outside"));
}
