use super::*;
use crate::asymptotics::{JointModel, StepMap};
use crate::distortion::parse_distortion;
use crate::special::normal_quantile;

fn x31() -> Distribution {
    Distribution::discrete(&[(0.0, 0.6), (100.0, 0.375), (500.0, 0.025)]).unwrap()
}

fn y31() -> Distribution {
    Distribution::discrete(&[(0.0, 0.6), (100.0, 0.39), (1100.0, 0.01)]).unwrap()
}

fn unif() -> Distribution {
    Distribution::uniform(0.0, 1.0).unwrap()
}

fn g(s: &str) -> Distortion {
    parse_distortion(s).unwrap()
}

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
}

#[test]
fn example_31_values() {
    for d in [x31(), y31()] {
        close(choquet(&g("identity"), &d).unwrap().value, 50.0, 1e-10);
        assert_eq!(var(&d, 0.95).unwrap(), 100.0);
        assert_eq!(var(&d, 0.96).unwrap(), 100.0);
        close(tvar(&d, 0.95).unwrap(), 300.0, 1e-10);
        close(tvar(&d, 0.96).unwrap(), 350.0, 1e-10);
    }
    let gp = g("compose(tvar:0.95,tvar:0.95)");
    let rx = choquet(&gp, &x31()).unwrap();
    assert_eq!(rx.method, Method::ExactStieltjes);
    assert_eq!(rx.abs_error_estimate, 0.0);
    close(rx.value, 500.0, 1e-10);
    close(choquet(&gp, &y31()).unwrap().value, 1100.0, 1e-10);
}

#[test]
fn quantile_form_discrete() {
    close(choquet_quantile_form(&g("var:0.95"), &x31()).unwrap().value, 100.0, 1e-12);
    close(choquet_quantile_form(&g("identity"), &unif()).unwrap().value, 0.5, 1e-9);
    let glue = g("glue:0.5,0.8,0.95,0.99");
    for d in [x31(), y31()] {
        let a = choquet(&glue, &d).unwrap().value;
        let b = choquet_quantile_form(&glue, &d).unwrap().value;
        close(a, b, 1e-9);
    }
}

#[test]
fn jump_on_a_level_splits_between_quantiles() {
    // S = 0.025 at x = 100 sits exactly on the jump of var:0.975
    let d = x31();
    for s in ["var:0.975", "dual(var:0.025)", "mix(0.5*var:0.975,0.5*dual(var:0.025))", "var:0.4"] {
        let h = g(s);
        let a = choquet(&h, &d).unwrap().value;
        let b = choquet_quantile_form(&h, &d).unwrap().value;
        close(a, b, 1e-10);
    }
    close(choquet(&g("var:0.975"), &d).unwrap().value, 100.0, 1e-12);
}

#[test]
fn var_examples() {
    assert_eq!(var(&Distribution::bernoulli(0.02).unwrap(), 0.975).unwrap(), 0.0);
    assert_eq!(var_plus(&x31(), 0.6).unwrap(), 100.0);
    assert!(var(&x31(), 0.0).is_err());
    assert!(var_plus(&x31(), 1.0).is_err());
    // continuous strictly increasing cdf: VaR equals the var distortion measure
    let n = Distribution::parametric(Family::Normal { mu: 1.0, sigma: 2.0 }).unwrap();
    let v = var(&n, 0.9).unwrap();
    close(choquet(&g("var:0.9"), &n).unwrap().value, v, 1e-8);
}

#[test]
fn tvar_examples() {
    close(tvar(&unif(), 0.95).unwrap(), 0.975, 1e-15);
    for c in [-3.0, 0.0, 12.5] {
        for p in [0.1, 0.5, 0.99] {
            close(tvar(&Distribution::point_mass(c), p).unwrap(), c, 1e-12);
        }
    }
    for p in [0.3, 0.6, 0.95, 0.96, 0.975, 0.99] {
        close(tvar_eq21(&x31(), p).unwrap(), tvar(&x31(), p).unwrap(), 1e-10);
        close(tvar_eq21(&y31(), p).unwrap(), tvar(&y31(), p).unwrap(), 1e-10);
    }
    close(tvar(&x31(), 0.0).unwrap(), 50.0, 1e-12);
    close(tvar(&x31(), 1.0).unwrap(), 500.0, 0.0);
}

#[test]
fn tvar_closed_forms_match_quadrature() {
    let cases = [
        Family::Uniform { a: -1.0, b: 3.0 },
        Family::Exponential { rate: 0.5 },
        Family::Pareto { alpha: 2.5, scale: 1.0 },
        Family::Normal { mu: 1.0, sigma: 2.0 },
        Family::Lognormal { mu: 0.0, sigma: 0.5 },
    ];
    for f in cases {
        let d = Distribution::parametric(f).unwrap();
        for p in [0.5, 0.9, 0.99] {
            let closed = tvar(&d, p).unwrap();
            let quad = choquet(&Distortion::tvar(p).unwrap(), &d).unwrap();
            assert_eq!(quad.method, Method::Quadrature);
            close(quad.value, closed, 1e-8 * closed.abs().max(1.0));
        }
    }
}

#[test]
fn uniform_tvar_against_sample_mean() {
    // mean of the top 5% of 10^6 uniform draws
    use rand::Rng;
    let mut rng = crate::copula::stream_rng(3, 0);
    let mut xs: Vec<f64> = (0..1_000_000).map(|_| rng.random::<f64>()).collect();
    xs.sort_by(f64::total_cmp);
    let top = &xs[950_000..];
    let mc = top.iter().sum::<f64>() / top.len() as f64;
    let r = choquet(&g("tvar:0.95"), &unif()).unwrap();
    close(r.value, 0.975, 1e-9);
    close(r.value, mc, 1e-3);
}

#[test]
fn pareto_closed_forms_and_divergence() {
    let d = Distribution::pareto(2.0, 1.0).unwrap();
    // ρ = 1 + 1/(αa − 1) for g = u^a
    let r = choquet(&g("power:0.75"), &d).unwrap();
    close(r.value, 3.0, 1e-7);
    let q = choquet_quantile_form(&g("power:0.75"), &d).unwrap();
    close(q.value, 3.0, 1e-7);
    assert!(matches!(choquet(&g("power:0.5"), &d), Err(Error::Divergence(_))));
    let p1 = Distribution::pareto(1.0, 1.0).unwrap();
    assert!(matches!(choquet(&g("identity"), &p1), Err(Error::Divergence(_))));
    assert!(matches!(choquet(&g("tvar:0.95"), &p1), Err(Error::Divergence(_))));
    assert!(matches!(choquet_quantile_form(&g("tvar:0.95"), &p1), Err(Error::Divergence(_))));
    assert!(matches!(tvar(&p1, 0.95), Err(Error::Divergence(_))));
    assert!(matches!(choquet(&g("var:1"), &d), Err(Error::Divergence(_))));
    assert!(matches!(choquet_quantile_form(&g("var:1"), &d), Err(Error::Divergence(_))));
}

#[test]
fn parametric_closed_forms() {
    // PH transform of an exponential: ∫ e^{−aλx} dx = 1/(aλ)
    let e = Distribution::parametric(Family::Exponential { rate: 2.0 }).unwrap();
    close(choquet(&g("power:0.5"), &e).unwrap().value, 1.0, 1e-8);
    // dual power on U(0,1): ∫ 1 − x^b dx = b/(b+1)
    close(choquet(&g("dualpower:3"), &unif()).unwrap().value, 0.75, 1e-10);
    // Wang transform of a normal shifts the mean by σΦ⁻¹(p)
    let n = Distribution::parametric(Family::Normal { mu: -2.0, sigma: 3.0 }).unwrap();
    for p in [0.2, 0.7, 0.95] {
        let want = -2.0 + 3.0 * normal_quantile(p);
        let h = Distortion::wang(p).unwrap();
        close(choquet(&h, &n).unwrap().value, want, 1e-8);
        close(choquet_quantile_form(&h, &n).unwrap().value, want, 1e-8);
    }
}

#[test]
fn cte_examples() {
    close(cte(&unif(), 0.95).unwrap(), 0.975, 1e-12);
    close(cte(&x31(), 0.95).unwrap(), 500.0, 1e-12);
    assert!(cte(&Distribution::point_mass(4.0), 0.5).unwrap_err().is_domain());
}

#[test]
fn spectral_examples() {
    close(spectral(&SpectralWeight::tvar(0.95).unwrap(), &x31()).unwrap().value, 300.0, 1e-8);
    for p in [0.5, 0.95, 0.99] {
        let r = spectral(&SpectralWeight::point_mass(p).unwrap(), &x31()).unwrap();
        assert_eq!(r.value, var(&x31(), p).unwrap());
    }
    let flat = SpectralWeight::from_density("1", |_| 1.0, &[]).unwrap();
    close(spectral(&flat, &unif()).unwrap().value, 0.5, 1e-9);
    let n = Distribution::parametric(Family::Normal { mu: 0.0, sigma: 1.0 }).unwrap();
    let phi = SpectralWeight::tvar(0.9).unwrap();
    close(spectral(&phi, &n).unwrap().value, tvar(&n, 0.9).unwrap(), 1e-8);
    let via_g = choquet_quantile_form(&Distortion::from_spectral(&phi), &n).unwrap().value;
    close(spectral(&phi, &n).unwrap().value, via_g, 1e-8);
}

#[test]
fn weighted_tvar_examples() {
    let d = x31();
    for p in [0.0, 0.5, 0.95] {
        let r = weighted_tvar(&TvarMixing::point_mass(p).unwrap(), &d).unwrap();
        close(r.value, tvar(&d, p).unwrap(), 1e-12);
    }
    let mu = TvarMixing::new(vec![(0.95, 0.5), (0.96, 0.5)], None, &[]).unwrap();
    close(weighted_tvar(&mu, &d).unwrap().value, 325.0, 1e-10);
    close(weighted_tvar(&TvarMixing::point_mass(0.0).unwrap(), &unif()).unwrap().value, 0.5, 1e-15);
    assert!(TvarMixing::new(vec![(0.5, 0.7)], None, &[]).is_err());
    // dμ = 2(1−w)dw reproduces dual power 2
    let dens = TvarMixing::new(vec![], Some(Arc::new(|w: f64| 2.0 * (1.0 - w))), &[]).unwrap();
    close(weighted_tvar(&dens, &unif()).unwrap().value, 2.0 / 3.0, 1e-9);
}

#[test]
fn decompose_examples() {
    // dual power 2: φ(q) = 2q, so μ has density 2(1−w) and μ([0,t]) = 2t − t²
    let mu = decompose_concave(&g("dualpower:2")).unwrap();
    assert!(mu.density.is_none());
    for t in [0.1, 0.5, 0.9] {
        let m: f64 = mu.atoms.iter().filter(|a| a.0 <= t).map(|a| a.1).sum();
        close(m, 2.0 * t - t * t, 2e-4);
    }
    let r = weighted_tvar(&mu, &unif()).unwrap().value;
    close(r, 2.0 / 3.0, 1e-4);

    let id = decompose_concave(&g("identity")).unwrap();
    assert_eq!(id.atoms.len(), 1);
    assert_eq!(id.atoms[0].0, 0.0);
    close(id.atoms[0].1, 1.0, 1e-9);

    let p = 0.9;
    let t = decompose_concave(&Distortion::tvar(p).unwrap()).unwrap();
    let near: f64 = t.atoms.iter().filter(|a| (a.0 - p).abs() <= 1e-4).map(|a| a.1).sum();
    close(near, 1.0, 1e-8);

    let top = decompose_concave(&g("esssup(0.25,identity)")).unwrap();
    let at_one: f64 = top.atoms.iter().filter(|a| a.0 == 1.0).map(|a| a.1).sum();
    close(at_one, 0.25, 1e-12);
    close(weighted_tvar(&top, &x31()).unwrap().value, 0.25 * 500.0 + 0.75 * 50.0, 1e-9);

    assert!(decompose_concave(&g("var:0.9")).unwrap_err().is_domain());
    assert!(decompose_concave(&g("power:2")).unwrap_err().is_domain());
}

/// The distortion α(1−β)u + αβ·1(u > 1−p) + (1−α)·min(u/(1−p), 1).
fn example_33_g(alpha: f64, beta: f64, p: f64) -> Distortion {
    Distortion::mix(&[
        (alpha * (1.0 - beta), Distortion::identity()),
        (alpha * beta, Distortion::var(p).unwrap()),
        (1.0 - alpha, Distortion::tvar(p).unwrap()),
    ])
    .unwrap()
}

#[test]
fn example_33_closed_form() {
    for a in [0.0, 0.25, 0.5, 0.75, 1.0] {
        for b in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let want = 50.0 * a * b - 250.0 * a + 300.0;
            for d in [x31(), y31()] {
                close(choquet(&example_33_g(a, b, 0.95), &d).unwrap().value, want, 1e-10);
            }
        }
    }
    let g_lambda = Distortion::mix(&[(0.5, Distortion::var(1.0).unwrap()), (0.5, example_33_g(1.0, 0.0, 0.95))]).unwrap();
    close(choquet(&g_lambda, &x31()).unwrap().value, 275.0, 1e-10);
    close(choquet(&g_lambda, &y31()).unwrap().value, 575.0, 1e-10);
}

#[test]
fn glue_var_examples() {
    let d = x31();
    assert_eq!(glue_var([0.0, 0.0, 0.0, 1.0], 0.95, 0.96, &d).unwrap().value, 100.0);
    let w = [0.1, 0.2, 0.3, 0.4];
    let r = glue_var(w, 0.95, 0.96, &d).unwrap();
    close(r.value, 0.1 * 350.0 + 0.2 * 300.0 + 0.3 * 100.0 + 0.4 * 100.0, 1e-10);
    let mixed = Distortion::mix(&[
        (w[0], Distortion::tvar(0.96).unwrap()),
        (w[1], Distortion::tvar(0.95).unwrap()),
        (w[2], Distortion::var(0.96).unwrap()),
        (w[3], Distortion::var(0.95).unwrap()),
    ])
    .unwrap();
    for d in [x31(), y31()] {
        close(glue_var(w, 0.95, 0.96, &d).unwrap().value, choquet(&mixed, &d).unwrap().value, 1e-10);
    }
    assert!(glue_var([0.5, 0.6, 0.0, 0.0], 0.9, 0.95, &d).is_err());
    assert!(glue_var([0.5, 0.5, 0.0, 0.0], 0.99, 0.95, &d).is_err());
}

#[test]
fn tail_choquet_examples() {
    let d = x31();
    let h = g("tvar:0.95");
    close(tail_choquet(&h, &d, 100.0).unwrap(), 200.0, 1e-12);
    close(tail_choquet(&h, &d, 0.0).unwrap(), choquet(&h, &d).unwrap().value, 1e-12);
    close(tail_choquet(&h, &d, -5.0).unwrap(), choquet(&h, &d).unwrap().value, 1e-12);
    assert_eq!(tail_choquet(&h, &d, 500.0).unwrap(), 0.0);
    assert_eq!(tail_choquet(&h, &d, 800.0).unwrap(), 0.0);
    let e = Distribution::parametric(Family::Exponential { rate: 1.0 }).unwrap();
    close(tail_choquet(&g("identity"), &e, 0.0).unwrap(), 1.0, 1e-9);
    close(tail_choquet(&g("identity"), &e, 2.0).unwrap(), (-2.0f64).exp(), 1e-9);
    // a cutoff at the lower endpoint of a signed risk gives its mean
    let s = Distribution::uniform(-1.0, 1.0).unwrap();
    close(tail_choquet(&g("identity"), &s, -1.0).unwrap(), 0.0, 1e-9);
    let ds = Distribution::discrete(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap();
    close(tail_choquet(&g("identity"), &ds, -2.0).unwrap(), 0.0, 1e-12);
    close(tail_choquet(&g("identity"), &ds, -0.5).unwrap(), 0.5 - 0.25, 1e-12);
}

#[test]
fn tail_check_example_42_is_inapplicable() {
    let x = StepMap::new(vec![0.04, 1.0], vec![1000.0, 0.0]).unwrap();
    let y = StepMap::new(vec![0.96, 1.0], vec![0.0, 1000.0]).unwrap();
    let j = JointModel::functional(vec![x, y]).unwrap();
    let r = tail_subadditivity_check(&g("tvar:0.97"), &j, 0.97, None).unwrap();
    assert_eq!(r.verdict, TailVerdict::Inapplicable);
    assert_eq!(r.s_alpha, [1000.0, 1000.0, 1000.0]);
    assert_eq!(r.m_alpha, 1000.0);
}

#[test]
fn tail_check_comonotone() {
    let x = Distribution::discrete(&[(0.0, 0.5), (2.0, 0.3), (5.0, 0.2)]).unwrap();
    let y = Distribution::discrete(&[(1.0, 0.6), (3.0, 0.3), (4.0, 0.1)]).unwrap();
    let j = JointModel::comonotone(vec![x.clone(), y.clone()]).unwrap();
    let h = g("tvar:0.7");
    let r = tail_subadditivity_check(&h, &j, 0.7, None).unwrap();
    // the common cutoff removes more from each marginal than from the sum
    assert!(r.lhs >= r.rhs - 1e-12);
    let m = r.m_alpha;
    close(r.lhs, tail_choquet(&h, &j.sum_distribution(None).unwrap().distribution, m).unwrap(), 0.0);
    // with the cutoff below every support the three integrals are plain
    // Choquet integrals and comonotone additivity is exact
    let full = choquet(&h, &j.sum_distribution(None).unwrap().distribution).unwrap().value;
    close(full, choquet(&h, &x).unwrap().value + choquet(&h, &y).unwrap().value, 1e-12);
}

#[test]
fn report_serializes() {
    let r = choquet(&g("identity"), &x31()).unwrap();
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    assert_eq!(v["method"], "exact_stieltjes");
    assert_eq!(v["value"], 50.0);
    assert_eq!(v["distortion"], "identity");
    assert!(v["distribution"].as_str().unwrap().starts_with("discrete:"));
}
