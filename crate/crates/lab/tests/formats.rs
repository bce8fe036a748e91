use cocycle_core::cocycle::{Cocycle, Frequency, QuadratureGrid, TrigPoly};
use cocycle_core::models::{random_trig_cocycle, sample_gallery, JacobiData, GALLERY};
use cocycle_core::random::rng;
use cocycle_lab::format::{cocycle_from_json, cocycle_to_json, jacobi_from_json, jacobi_to_json, to_text, JacobiSpec};
use cocycle_lab::report::{emit_report, reemit_json, Format, Report, Value};
use proptest::prelude::*;

fn same_coefficients(a: &Cocycle, b: &Cocycle) -> bool {
    let (ea, eb) = (a.entries().unwrap(), b.entries().unwrap());
    a.m() == b.m()
        && a.r().to_bits() == b.r().to_bits()
        && a.frequency().omega().iter().zip(b.frequency().omega()).all(|(x, y)| x.to_bits() == y.to_bits())
        && ea.iter().zip(eb).all(|(p, q)| {
            p.terms.len() == q.terms.len()
                && p.terms.iter().zip(&q.terms).all(|(s, t)| {
                    s.k == t.k && s.coeff.re.to_bits() == t.coeff.re.to_bits() && s.coeff.im.to_bits() == t.coeff.im.to_bits()
                })
        })
}

#[test]
fn gallery_round_trips_bit_exactly() {
    for name in GALLERY {
        let a = sample_gallery(name).unwrap();
        let text = to_text(&cocycle_to_json(&a).unwrap());
        let b = cocycle_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert!(same_coefficients(&a, &b), "{name}");
        assert_eq!(text, to_text(&cocycle_to_json(&b).unwrap()));
    }
}

#[test]
fn jacobi_round_trip() {
    let freq = Frequency::golden();
    let c = |k: i64, a: f64| TrigPoly::cos(&[k], a);
    let k = |a: f64| TrigPoly::constant(1, a);
    let data = JacobiData::new(
        2,
        vec![k(2.0).add(&c(1, 0.3)), k(0.1), k(0.0), k(1.5)],
        vec![c(1, 0.2), k(0.4), k(0.4), c(2, 0.1)],
        vec![c(1, 2.0), k(0.0), k(0.0), c(1, 1.0)],
        2.5,
        -0.3,
        &freq,
    )
    .unwrap();
    let spec = JacobiSpec { data, freq, r: 0.25 };
    let text = to_text(&jacobi_to_json(&spec).unwrap());
    let back = jacobi_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back.data.band(), 2);
    assert_eq!(back.data.lambda, 2.5);
    assert_eq!(back.data.energy, -0.3);
    assert_eq!(back.r, 0.25);
    assert_eq!(text, to_text(&jacobi_to_json(&back).unwrap()));
}

#[test]
fn lyapunov_schema() {
    let mut r = Report::with_columns("lyapunov", ["n", "L1", "L2", "sumL", "det_integral"].map(String::from).to_vec());
    let bytes = emit_report(&r, Format::Csv).unwrap();
    assert_eq!(bytes, b"n,L1,L2,sumL,det_integral\n");
    r.push(vec![Value::Int(1), 0.5.into(), (-0.5).into(), 0.0.into(), 0.0.into()]);
    let text = String::from_utf8(emit_report(&r, Format::Csv).unwrap()).unwrap();
    assert_eq!(text.lines().count(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_cocycles_round_trip(seed in any::<u64>(), m in 1usize..4, degree in 0i64..3) {
        let a = random_trig_cocycle(&mut rng(seed), m, Frequency::golden(), 0.5, degree, 0.7).unwrap();
        let b = cocycle_from_json(&cocycle_to_json(&a).unwrap()).unwrap();
        prop_assert!(same_coefficients(&a, &b));
        let g = QuadratureGrid::new(4, 1).unwrap();
        for i in 0..g.len() {
            let x = g.point(i);
            prop_assert_eq!(a.eval_real(&x), b.eval_real(&x));
        }
    }

    #[test]
    fn json_reports_reemit_identically(values in proptest::collection::vec(any::<f64>(), 1..20), n in any::<i64>()) {
        let mut r = Report::new("probe", &["n", "x"]);
        for v in &values {
            r.push(vec![n.into(), (*v).into()]);
        }
        r.note("label", "a \"quoted\" text");
        let bytes = emit_report(&r, Format::Json).unwrap();
        let again = reemit_json(std::str::from_utf8(&bytes).unwrap()).unwrap();
        prop_assert_eq!(bytes, again);
    }
}
