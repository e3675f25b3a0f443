use bdfoa_core::expr::{BinOp, Func, Node, Var};
use bdfoa_core::problems::{builtin, BUILTIN_NAMES};
use bdfoa_core::{fd_check, EvalPoint, Expr};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn leaf() -> impl Strategy<Value = Node> {
    prop_oneof![
        (0u32..1000).prop_map(|k| Node::Num(k as f64 / 8.0)),
        (1e-6f64..1e6).prop_map(Node::Num),
        (0usize..2).prop_map(|i| Node::Var(Var::X(i))),
        (0usize..2).prop_map(|i| Node::Var(Var::Y(i))),
    ]
}

fn ast() -> impl Strategy<Value = Node> {
    leaf().prop_recursive(5, 48, 2, |inner| {
        let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)];
        let func = prop_oneof![Just(Func::Exp), Just(Func::Log), Just(Func::Sqrt), Just(Func::Sin), Just(Func::Cos)];
        prop_oneof![
            inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
            (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Node::Binary(o, Box::new(a), Box::new(b))),
            (inner.clone(), -6i32..7, prop::bool::ANY)
                .prop_map(|(a, k, half)| Node::Pow(Box::new(a), if half { k as f64 + 0.5 } else { k as f64 })),
            (func, inner).prop_map(|(f, a)| Node::Call(f, Box::new(a))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn print_then_parse_is_identity(root in ast()) {
        let e = Expr::from_node(root.clone(), 2, 2).unwrap();
        let text = e.to_string();
        let back = Expr::parse(&text, 2, 2).unwrap();
        prop_assert_eq!(back.root(), &root, "{}", text);
    }
}

fn random_point(name: &str, rng: &mut ChaCha8Rng) -> EvalPoint {
    let p = builtin(name).unwrap();
    let xw = p.x_window.clone().unwrap_or_else(|| vec![(-2.0, 2.0); p.n]);
    let x = xw.iter().map(|&(lo, hi)| rng.gen_range(lo.max(-2.0)..hi.min(25.0))).collect();
    let y = p.y_box.window(2.0).iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
    EvalPoint::new(x, y)
}

#[test]
fn ad_matches_central_differences_on_builtins() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for name in BUILTIN_NAMES {
        let p = builtin(name).unwrap();
        let mut exprs = vec![&p.upper, &p.lower];
        exprs.extend(p.constraints.iter());
        for _ in 0..100 {
            let pt = random_point(name, &mut rng);
            for e in &exprs {
                let err = fd_check(e, &pt, 1e-5).unwrap();
                assert!(err <= 1e-6, "{name}: {e} at {pt:?}: {err:e}");
            }
        }
    }
}

#[test]
fn hessians_are_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for name in BUILTIN_NAMES {
        let p = builtin(name).unwrap();
        for _ in 0..20 {
            let d = p.lower.differentiate(&random_point(name, &mut rng)).unwrap();
            assert!(d.asymmetry <= 1e-12 * d.hessian.norm().max(1.0), "{name}");
        }
    }
}
