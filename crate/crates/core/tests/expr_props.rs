use proptest::prelude::*;

use symdeg::expr::{eval, eval_dual, BinOp, Expr, Func, C64};

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0.1f64..3.0).prop_map(Expr::Num),
        Just(Expr::ImagUnit),
        Just(Expr::Var("x".into())),
        Just(Expr::Var("y".into())),
    ]
}

/// Entire expressions, so derivatives exist everywhere.
fn smooth_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (inner.clone(), inner.clone(), prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul)])
                .prop_map(|(a, b, op)| Expr::Binary(op, Box::new(a), Box::new(b))),
            (inner.clone(), 0i32..4).prop_map(|(e, k)| Expr::Pow(Box::new(e), k)),
            (inner, prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Exp)])
                .prop_map(|(e, f)| Expr::Call(f, Box::new(e))),
        ]
    })
}

fn close(a: C64, b: C64, rel: f64) -> bool {
    (a - b).norm() <= rel * a.norm().max(b.norm()).max(1.0)
}

fn at(x: f64, y: f64) -> [(&'static str, C64); 2] {
    [("x", C64::new(x, 0.0)), ("y", C64::new(y, 0.0))]
}

proptest! {
    #[test]
    fn printing_then_parsing_preserves_values(e in smooth_expr(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let printed = e.to_string();
        let reparsed: Expr = printed.parse().unwrap();
        let (a, b) = (eval(&e, &at(x, y)).unwrap(), eval(&reparsed, &at(x, y)).unwrap());
        prop_assume!(a.is_finite());
        prop_assert!(close(a, b, 1e-12), "{printed}: {a} vs {b}");
    }

    #[test]
    fn dual_derivatives_match_finite_differences(e in smooth_expr(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let d = eval_dual(&e, &at(x, y), &["x", "y"]).unwrap();
        prop_assume!(d.value.is_finite() && d.value.norm() < 1e6);
        let h = 1e-6;
        let fd = [
            (eval(&e, &at(x + h, y)).unwrap() - eval(&e, &at(x - h, y)).unwrap()) / (2.0 * h),
            (eval(&e, &at(x, y + h)).unwrap() - eval(&e, &at(x, y - h)).unwrap()) / (2.0 * h),
        ];
        for k in 0..2 {
            prop_assert!(close(d.partials[k], fd[k], 1e-5), "{e}: ∂{k} {} vs {}", d.partials[k], fd[k]);
        }
    }

    #[test]
    fn differentiation_is_linear(
        f in smooth_expr(),
        g in smooth_expr(),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        x in -1.0f64..1.0,
    ) {
        let combo = Expr::Binary(
            BinOp::Add,
            Box::new(Expr::Binary(BinOp::Mul, Box::new(Expr::Num(a)), Box::new(f.clone()))),
            Box::new(Expr::Binary(BinOp::Mul, Box::new(Expr::Num(b)), Box::new(g.clone()))),
        );
        let bind = at(x, 0.3);
        let (df, dg, dc) = (
            eval_dual(&f, &bind, &["x"]).unwrap(),
            eval_dual(&g, &bind, &["x"]).unwrap(),
            eval_dual(&combo, &bind, &["x"]).unwrap(),
        );
        prop_assume!(df.partials[0].norm() < 1e8 && dg.partials[0].norm() < 1e8);
        let expected = df.partials[0] * a + dg.partials[0] * b;
        prop_assert!(close(dc.partials[0], expected, 1e-10));
    }
}

#[test]
fn bump_is_smooth_and_supported_below_one() {
    let e: Expr = "bump(x)".parse().unwrap();
    let v = |x: f64| eval(&e, &[("x", C64::new(x, 0.0))]).unwrap().re;
    assert_eq!(v(0.0), 1.0);
    assert_eq!(v(1.0), 0.0);
    assert_eq!(v(1.5), 0.0);
    assert!(v(0.99) > 0.0 && v(0.99) < 1e-40);
    let d = eval_dual(&e, &[("x", C64::new(0.5, 0.0))], &["x"]).unwrap();
    // d/ds exp(1 - 1/(1-s)) = -exp(...)/(1-s)²
    assert!((d.partials[0].re + v(0.5) / 0.25).abs() < 1e-14);
}

#[test]
fn parse_errors_carry_positions() {
    for bad in ["x +", "sin(x", "2 ** x", "foo(x)", "x^y"] {
        assert!(Expr::parse(bad).is_err(), "{bad} should not parse");
    }
}
