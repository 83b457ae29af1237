//! The second-order Einstein systems in the metric functions `f_i`.
//!
//! Each equation has the shape `f_i''/f_i + G_i(f, f') = -lambda` with `G_i` a
//! rational function; an [`EinsteinSystem`] stores the `G_i` (variables
//! `x_i = f_i`, `y_i = f_i'`), so every residual is affine in `f_i''` with
//! coefficient `1/f_i` by construction. Systems are assembled on two routes:
//!
//! * [`build_generic`] from the model constants `(d_i, b_i, [ijk])`,
//! * [`printed_system`] from the transcribed per-model equations in the data
//!   files,
//!
//! and [`equivalence_check`] verifies that the two routes agree exactly at
//! random rational points. The trace equation `sum d_i f_i''/f_i = -lambda`
//! is monitored, not imposed; model B additionally carries the non-diagonal
//! scalar constraint.

use crate::algebra::{rat, QVector, Rational};
use crate::expr::{EvalError, Expr, ParamEnv};
use crate::models::{datafile, ModelError, ModelId, ModelSpec, TripleBracket};
use crate::sampling::RatSampler;

/// A diagonal Einstein system `f_i''/f_i + G_i(f, f') = -lambda`.
#[derive(Clone, Debug)]
pub struct EinsteinSystem {
    pub model: ModelId,
    pub s: usize,
    pub dims: Vec<i64>,
    /// `G_i` with `x_i = f_i`, `y_i = f_i'`.
    pub g: Vec<Expr>,
    /// Solved form `f_i'' = F_i(f, f') = f_i (-lambda - G_i)`.
    solved: Vec<Expr>,
}

impl EinsteinSystem {
    fn new(model: ModelId, dims: Vec<i64>, g: Vec<Expr>) -> Self {
        let solved = g
            .iter()
            .enumerate()
            .map(|(i, gi)| {
                Expr::x(i + 1).mul(
                    Expr::param("lambda")
                        .neg()
                        .sub(gi.clone()),
                )
            })
            .collect();
        EinsteinSystem {
            model,
            s: dims.len(),
            dims,
            g,
            solved,
        }
    }

    /// Solved-form accelerations `F_i(f, f')`, exact. Requires `lambda` bound.
    pub fn accel(&self, env: &ParamEnv, f: &[Rational], fp: &[Rational]) -> Result<QVector, EvalError> {
        let zero = Rational::zero();
        let mut out = QVector::zeros(self.s);
        for (i, e) in self.solved.iter().enumerate() {
            out[i] = e.eval_point(env, &zero, f, fp)?;
        }
        Ok(out)
    }

    /// Solved-form accelerations in `f64` (the shooting path).
    pub fn accel_f64(&self, env: &ParamEnv, f: &[f64], fp: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.solved
            .iter()
            .map(|e| e.eval_f64(env, 0.0, f, fp))
            .collect()
    }

    /// Residuals `R_i = f_i''/f_i + G_i + lambda`; all zero iff `(f, f', f'')`
    /// satisfies the system.
    pub fn residual(
        &self,
        env: &ParamEnv,
        f: &[Rational],
        fp: &[Rational],
        fpp: &[Rational],
        lambda: &Rational,
    ) -> Result<QVector, EvalError> {
        let zero = Rational::zero();
        let mut out = QVector::zeros(self.s);
        for i in 0..self.s {
            if f[i].is_zero() {
                return Err(EvalError::DivisionByZero);
            }
            let gi = self.g[i].eval_point(env, &zero, f, fp)?;
            out[i] = &fpp[i] / &f[i] + gi + lambda;
        }
        Ok(out)
    }

    /// Trace residual `sum d_i f_i''/f_i + lambda` (the monitored equation).
    pub fn trace_residual(&self, f: &[Rational], fpp: &[Rational], lambda: &Rational) -> Result<Rational, EvalError> {
        let mut acc = lambda.clone();
        for i in 0..self.s {
            if f[i].is_zero() {
                return Err(EvalError::DivisionByZero);
            }
            acc += rat(self.dims[i]) * &fpp[i] / &f[i];
        }
        Ok(acc)
    }

    /// Trace residual in `f64`, for trajectory monitoring.
    pub fn trace_residual_f64(&self, f: &[f64], fpp: &[f64], lambda: f64) -> f64 {
        let mut acc = lambda;
        for i in 0..self.s {
            acc += self.dims[i] as f64 * fpp[i] / f[i];
        }
        acc
    }
}

/// Assembles `G_i` from `(d_i, b_i, [ijk])`:
///
/// ```text
/// G_i = -b_i/(2 f_i^2)
///       - (1/d_i) sum_{k,l} [ikl] (f_i^4 - 2 f_k^4)/(4 f_i^2 f_k^2 f_l^2)
///       + (d_i - 1) f_i'^2/f_i^2 + sum_{k != i} d_k f_i' f_k'/(f_i f_k)
/// ```
fn assemble(model: ModelId, dims: &[i64], b: &[Rational], brackets: &TripleBracket) -> EinsteinSystem {
    let s = dims.len();
    let mut g = Vec::with_capacity(s);
    for i in 1..=s {
        let mut gi = Expr::cnst(-(&b[i - 1] / &rat(2))).div(Expr::x(i).pow(2));
        for k in 1..=s {
            for l in 1..=s {
                let w = brackets.get(i, k, l);
                if w.is_zero() {
                    continue;
                }
                let num = Expr::x(i).pow(4).sub(Expr::int(2).mul(Expr::x(k).pow(4)));
                let den = Expr::int(4).mul(Expr::x(i).pow(2)).mul(Expr::x(k).pow(2)).mul(Expr::x(l).pow(2));
                gi = gi.sub(Expr::cnst(&w / &rat(dims[i - 1])).mul(num.div(den)));
            }
        }
        gi = gi.add(Expr::int(dims[i - 1] - 1).mul(Expr::y(i).pow(2)).div(Expr::x(i).pow(2)));
        for k in 1..=s {
            if k != i {
                gi = gi.add(
                    Expr::int(dims[k - 1])
                        .mul(Expr::y(i))
                        .mul(Expr::y(k))
                        .div(Expr::x(i).mul(Expr::x(k))),
                );
            }
        }
        g.push(gi);
    }
    EinsteinSystem::new(model, dims.to_vec(), g)
}

/// Generic system from the unscaled constants.
pub fn build_generic(spec: &ModelSpec) -> EinsteinSystem {
    assemble(spec.id, &spec.dims, &spec.b, &spec.brackets)
}

/// Generic system in the IVP convention (model A with `f_1` halved; identical
/// to [`build_generic`] for the other models).
pub fn build_generic_scaled(spec: &ModelSpec) -> EinsteinSystem {
    assemble(spec.id, &spec.dims, &spec.ivp_b, &spec.ivp_brackets)
}

fn printed_from_section(spec: &ModelSpec, section: &str) -> Result<EinsteinSystem, ModelError> {
    let file = datafile::load(spec.id)?;
    let names: Vec<String> = (1..=spec.s).map(|i| format!("g{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let g = datafile::section_exprs(&file, section, &refs)?;
    Ok(EinsteinSystem::new(spec.id, spec.dims.clone(), g))
}

/// The per-model system in closed form, as transcribed in the data file.
pub fn printed_system(spec: &ModelSpec) -> Result<EinsteinSystem, ModelError> {
    printed_from_section(spec, "einstein")
}

/// The transcribed system in the IVP convention: for model A this is the variant
/// with `f_1` halved; for the other models it coincides with
/// [`printed_system`].
pub fn printed_system_scaled(spec: &ModelSpec) -> Result<EinsteinSystem, ModelError> {
    match spec.id {
        ModelId::A => printed_from_section(spec, "einstein_scaled"),
        _ => printed_system(spec),
    }
}

/// Evaluates generic and transcribed solved forms at `trials` random positive
/// rational points and returns the maximum absolute difference (exact; must
/// be zero). Model A is compared in both conventions.
pub fn equivalence_check(spec: &ModelSpec, trials: usize, seed: u64) -> Result<Rational, ModelError> {
    let pairs = [
        (build_generic(spec), printed_system(spec)?),
        (build_generic_scaled(spec), printed_system_scaled(spec)?),
    ];
    let mut sampler = RatSampler::new(seed);
    let mut env = spec.base_env();
    let mut max_diff = Rational::zero();
    for (generic, printed) in &pairs {
        for trial in 0..trials {
            env.insert("lambda", sampler.rational(8, 4));
            let f = sampler.positive_vec(spec.s, 20, 6);
            let fp = sampler.rational_vec(spec.s, 10, 6);
            let ag = generic
                .accel(&env, &f, &fp)
                .map_err(|e| ModelError::DataFile(format!("generic evaluation failed on trial {trial}: {e}")))?;
            let ap = printed
                .accel(&env, &f, &fp)
                .map_err(|e| ModelError::DataFile(format!("data-file system evaluation failed on trial {trial}: {e}")))?;
            for i in 0..spec.s {
                let d = (&ag[i] - &ap[i]).abs();
                if d > max_diff {
                    max_diff = d;
                }
            }
        }
    }
    Ok(max_diff)
}

/// The non-diagonal residual of model B:
///
/// ```text
/// -f1^2/f3^2 - f2^2 f3^2/(f4^2 f5^2) + f4^2/f5^2 + f5^2/f4^2
/// + f2^2/f1^2 - f3^2/f1^2
/// ```
pub fn nondiagonal_residual_b(spec: &ModelSpec, f: &[Rational]) -> Result<Rational, EvalError> {
    let expr = spec
        .nondiagonal_constraint
        .as_ref()
        .expect("non-diagonal constraint only exists for model B");
    expr.eval_point(&spec.base_env(), &Rational::zero(), f, &[])
}

/// `f64` variant of the model B constraint, for trajectory monitoring.
pub fn nondiagonal_residual_b_f64(spec: &ModelSpec, f: &[f64]) -> Result<f64, EvalError> {
    let expr = spec
        .nondiagonal_constraint
        .as_ref()
        .expect("non-diagonal constraint only exists for model B");
    expr.eval_f64(&spec.base_env(), 0.0, f, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ratio;
    use crate::models::get_model;

    fn spec_a() -> ModelSpec {
        get_model(ModelId::A, &ParamEnv::new().set("p", rat(2)).set("q", rat(1))).unwrap()
    }

    fn spec_n(id: ModelId, n: i64) -> ModelSpec {
        get_model(id, &ParamEnv::new().set("n", rat(n))).unwrap()
    }

    fn spec_plain(id: ModelId) -> ModelSpec {
        get_model(id, &ParamEnv::new()).unwrap()
    }

    #[test]
    fn generic_equals_printed_for_every_model() {
        let specs = vec![
            spec_a(),
            get_model(ModelId::A, &ParamEnv::new().set("p", rat(3)).set("q", rat(2))).unwrap(),
            spec_n(ModelId::B, 2),
            spec_n(ModelId::B, 5),
            spec_n(ModelId::C, 4),
            spec_n(ModelId::C, 3),
            spec_plain(ModelId::D),
            spec_plain(ModelId::E),
        ];
        for spec in specs {
            let diff = equivalence_check(&spec, 100, 7).unwrap();
            assert!(diff.is_zero(), "model {}: max difference {diff}", spec.id);
        }
    }

    #[test]
    fn system_size_matches_summand_count() {
        for (spec, s) in [(spec_a(), 3), (spec_n(ModelId::B, 3), 5), (spec_plain(ModelId::E), 5)] {
            assert_eq!(build_generic(&spec).g.len(), s);
            assert_eq!(printed_system(&spec).unwrap().g.len(), s);
        }
    }

    #[test]
    fn model_c_acceleration_at_unit_point() {
        // n = 3, f = (1,1,1), f' = 0, lambda = 0 -> f_1'' = (n-1)/8 = 1/4.
        let spec = spec_n(ModelId::C, 3);
        let sys = build_generic(&spec);
        let env = spec.base_env().set("lambda", rat(0));
        let one = vec![rat(1), rat(1), rat(1)];
        let zero = vec![rat(0), rat(0), rat(0)];
        let acc = sys.accel(&env, &one, &zero).unwrap();
        assert_eq!(acc[0], ratio(1, 4));
    }

    #[test]
    fn model_a_coefficient_of_inverse_f2_squared() {
        // With f_1 = f_3 = 1 and f' = 0, G_2(f_2) = c2/f_2^2 + c4/f_2^4
        // exactly; solving the 2x2 fit recovers c2 = -2(p+1) = -6.
        let spec = spec_a();
        let sys = printed_system(&spec).unwrap();
        let env = spec.base_env();
        let g2 = |v: Rational| {
            sys.g[1]
                .eval_point(&env, &Rational::zero(), &[rat(1), v, rat(1)], &vec![rat(0); 3])
                .unwrap()
        };
        let at1 = g2(rat(1)); // c2 + c4
        let at2 = g2(rat(2)); // c2/4 + c4/16
        // Solve: c2 = (16*at2 - at1)/3, c4 = at1 - c2.
        let c2 = (rat(16) * at2 - &at1) / rat(3);
        let c4 = at1 - &c2;
        assert_eq!(c2, rat(-6));
        assert_eq!(c4, ratio(1, 2));
    }

    /// Walks an expression tree looking for a subtree equal to `needle`.
    fn contains(e: &Expr, needle: &Expr) -> bool {
        if e == needle {
            return true;
        }
        match e {
            Expr::Add(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => contains(a, needle) || contains(b, needle),
            Expr::Neg(a) | Expr::Pow(a, _) => contains(a, needle),
            _ => false,
        }
    }

    #[test]
    fn printed_systems_carry_the_quoted_terms() {
        // Model E: R_1 includes -24/f_1^2.
        let e = printed_system(&spec_plain(ModelId::E)).unwrap();
        let neg24 = crate::expr::parse_expr("-24/x1^2").unwrap();
        assert!(contains(&e.g[0], &neg24));

        // Model D: R_2 includes -5/f_2^2.
        let d = printed_system(&spec_plain(ModelId::D)).unwrap();
        let neg5 = crate::expr::parse_expr("-5/x2^2").unwrap();
        assert!(contains(&d.g[1], &neg5));

        // Model B: R_1 carries the coefficient (n-1)/(4(n+1)(n+3)); at n = 2
        // that constant subtree evaluates to 1/60.
        let b = spec_n(ModelId::B, 2);
        let g1 = &printed_system(&b).unwrap().g[0];
        fn const_subtrees(e: &Expr, env: &ParamEnv, out: &mut Vec<Rational>) {
            let mut params = std::collections::BTreeSet::new();
            e.collect_params(&mut params);
            match e {
                Expr::Add(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                    if let Ok(v) = e.eval_point(env, &Rational::zero(), &[], &[]) {
                        out.push(v);
                    }
                    const_subtrees(a, env, out);
                    const_subtrees(b, env, out);
                }
                Expr::Neg(a) | Expr::Pow(a, _) => const_subtrees(a, env, out),
                _ => {}
            }
        }
        let mut consts = Vec::new();
        const_subtrees(g1, &b.base_env(), &mut consts);
        assert!(consts.contains(&ratio(1, 60)), "missing (n-1)/(4(n+1)(n+3)) at n=2");
    }

    #[test]
    fn trace_residual_examples() {
        let spec = spec_n(ModelId::C, 3);
        let sys = build_generic(&spec);
        // f'' chosen so each f_i''/f_i = -lambda/sum(d_i) gives zero residual.
        let lambda = ratio(5, 2);
        let total: i64 = spec.dims.iter().sum();
        let f = vec![rat(2), rat(3), rat(5)];
        let fpp: Vec<Rational> = f.iter().map(|fi| -&lambda * fi / rat(total)).collect();
        assert!(sys.trace_residual(&f, &fpp, &lambda).unwrap().is_zero());

        // With f'' from the solved form, the trace is nonzero in general:
        // the trace equation is a separate, monitored condition.
        let env = spec.base_env().set("lambda", rat(1));
        let one = vec![rat(1); 3];
        let zero = vec![rat(0); 3];
        let acc = sys.accel(&env, &one, &zero).unwrap();
        let tr = sys.trace_residual(&one, &acc.0, &rat(1)).unwrap();
        assert!(!tr.is_zero());

        // Linearity in f'': doubling f'' doubles the non-lambda part.
        let tr2 = sys.trace_residual(&one, &acc.scale(&rat(2)).0, &rat(1)).unwrap();
        assert_eq!(&tr2 - &rat(1), (&tr - &rat(1)) * rat(2));
    }

    #[test]
    fn residual_is_affine_in_acceleration_with_unit_over_f_coefficient() {
        let spec = spec_n(ModelId::B, 3);
        let sys = printed_system(&spec).unwrap();
        let env = spec.base_env();
        let lambda = ratio(1, 3);
        let f: Vec<Rational> = (1..=5).map(|k| ratio(k + 1, 2)).collect();
        let fp: Vec<Rational> = (1..=5).map(|k| ratio(k - 3, 4)).collect();
        let zero_acc = vec![rat(0); 5];
        let base = sys.residual(&env, &f, &fp, &zero_acc, &lambda).unwrap();
        for i in 0..5 {
            let mut acc = zero_acc.clone();
            acc[i] = rat(1);
            let shifted = sys.residual(&env, &f, &fp, &acc, &lambda).unwrap();
            for j in 0..5 {
                let expected = if i == j { &base[j] + f[i].recip() } else { base[j].clone() };
                assert_eq!(shifted[j], expected);
            }
        }
    }

    #[test]
    fn nondiagonal_residual_values() {
        let spec = spec_n(ModelId::B, 2);
        let at = |f: [i64; 5]| {
            let fr: Vec<Rational> = f.iter().map(|&v| rat(v)).collect();
            nondiagonal_residual_b(&spec, &fr).unwrap()
        };
        assert_eq!(at([1, 1, 1, 1, 1]), rat(0));
        assert_eq!(at([1, 2, 1, 1, 1]), rat(0));
        // First term is -f1^2/f3^2 = -1/4 here, so the total is -21/4.
        assert_eq!(at([1, 1, 2, 1, 1]), ratio(-21, 4));
    }

    #[test]
    fn nondiagonal_residual_vanishes_on_symmetric_locus() {
        // On {f_1 = f_3, f_4 = f_5} the residual reduces to
        // f_2^2 (1/f_1^2 - f_1^2/f_4^4); it vanishes identically once
        // f_4 = f_1 as well.
        let spec = spec_n(ModelId::B, 4);
        let mut sampler = RatSampler::new(5);
        let mut off_locus_nonzero = 0;
        for _ in 0..50 {
            let a = sampler.positive(12, 5);
            let b = sampler.positive(12, 5);
            let f = vec![a.clone(), b.clone(), a.clone(), a.clone(), a.clone()];
            assert!(nondiagonal_residual_b(&spec, &f).unwrap().is_zero());

            let c = sampler.positive(12, 5);
            let partial = vec![a.clone(), b.clone(), a.clone(), c.clone(), c.clone()];
            let expected = (&b * &b) * (a.recip() * a.recip() - &a * &a / (&c * &c * &c * &c));
            let got = nondiagonal_residual_b(&spec, &partial).unwrap();
            assert_eq!(got, expected);
            if !got.is_zero() {
                off_locus_nonzero += 1;
            }
        }
        assert!(off_locus_nonzero > 40, "constraint should not vanish for generic f_4 != f_1");
    }
}
