mod common;

use common::{ModelGen, Shape};
use promodel::conversion::{check_soundness, to_petri_net, DEFAULT_STATE_CAP};
use promodel::dsl::{
    audit, compile, extract_code_block, interpret, parse, render, DslError, Expr, Program, Statement, StatementKind,
};
use promodel::orchestrator::{classify, Category, Source};
use promodel::powl::{from_json, to_json, transitive_closure, validate, Node, PowlModel};
use promodel::semantics::{contains_trace, Trace};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn listing2() -> PowlModel {
    compile(&common::listing2_code()).unwrap().model
}

#[test]
fn listing2_counts() {
    let program = parse(&common::listing2_code()).unwrap();
    assert_eq!(program.statements.len(), 20);
    assert!(audit(&program).is_empty());
    let m = interpret(&program).unwrap().model;
    assert_eq!(m.activity_count(), 12);
    let Node::PartialOrder(root) = m.node() else { panic!("root is {m}") };
    assert_eq!(root.nodes().len(), 3);
    assert_eq!(root.edges().len(), 2);
    assert!(validate(&m).is_empty());
    assert!(check_soundness(&to_petri_net(&m).unwrap(), DEFAULT_STATE_CAP).sound);
}

#[test]
fn listing2_accept_branch_orders_accept_before_shipping() {
    let m = listing2();
    let Node::PartialOrder(root) = m.node() else { unreachable!() };
    let Node::Xor { children } = root.nodes()[1].node() else { panic!() };
    let Node::PartialOrder(accept) = children[0].node() else { panic!() };
    assert_eq!(accept.edges().len(), 7);
    let index = |label: &str| {
        accept
            .nodes()
            .iter()
            .position(|n| matches!(n.node(), Node::Activity { label: l } if l == label))
            .unwrap()
    };
    let closure = transitive_closure(accept.edges(), accept.nodes().len());
    assert!(closure.contains(&(index("Accept order"), index("Ship bicycle"))));
}

#[test]
fn listing2_json_round_trip_and_reject_trace() {
    let m = listing2();
    assert_eq!(from_json(&to_json(&m)).unwrap(), m);
    let reject = Trace::new(["Create process instance", "Reject order", "Finish process instance"]);
    assert!(contains_trace(&m, &reject, 1).unwrap());
    assert!(!contains_trace(&m, &Trace::new(["Create process instance", "Finish process instance"]), 1).unwrap());
}

fn name() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,5}".prop_filter("keywords are not names", |n| {
        !matches!(
            n.as_str(),
            "and" | "as" | "assert" | "async" | "await" | "break" | "class" | "continue" | "def" | "del" | "elif"
                | "else" | "except" | "finally" | "for" | "from" | "global" | "if" | "import" | "in" | "is"
                | "lambda" | "nonlocal" | "not" | "or" | "pass" | "raise" | "return" | "try" | "while" | "with"
                | "yield"
        )
    })
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        name().prop_map(Expr::Ident),
        "[ -~\n\t]{0,8}".prop_map(Expr::Str),
        Just(Expr::None),
    ];
    leaf.prop_recursive(4, 32, 4, |inner| {
        prop_oneof![
            (
                proptest::option::of(name()),
                name().prop_filter("copy() is its own node", |m| m != "copy"),
                proptest::collection::vec(inner.clone(), 0..3),
                proptest::collection::btree_map(name(), inner.clone(), 0..3),
            )
                .prop_map(|(receiver, method, args, kwargs)| Expr::Call {
                    receiver,
                    method,
                    args,
                    kwargs: kwargs.into_iter().collect(),
                }),
            proptest::collection::vec(inner.clone(), 0..4).prop_map(Expr::List),
            proptest::collection::vec(inner.clone(), 1..4).prop_map(Expr::Tuple),
            inner.prop_map(|e| Expr::Copy { receiver: Box::new(e) }),
        ]
    })
}

fn program() -> impl Strategy<Value = Program> {
    let stmt = prop_oneof![
        1 => prop_oneof![Just("utils.model_generation"), Just("model_generation")].prop_map(|m| StatementKind::Import {
            module: m.to_string(),
            name: "ModelGenerator".to_string(),
        }),
        6 => (name(), expr()).prop_map(|(target, expr)| StatementKind::Assign { target, expr }),
    ];
    proptest::collection::vec(stmt, 1..6).prop_map(|kinds| Program {
        statements: kinds.into_iter().enumerate().map(|(i, kind)| Statement { line: i + 1, kind }).collect(),
    })
}

proptest! {
    #[test]
    fn parse_render_round_trip(p in program()) {
        let text = render(&p);
        let back = parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, p);
    }

    #[test]
    fn extraction_always_carries_final_model(
        pre in "[ -~\n]{0,40}",
        body in prop_oneof![Just("final_model = gen.activity('a')"), Just("x = 1"), Just("final_model")],
        lang in prop_oneof![Just("python"), Just(""), Just("py")],
        post in "[ -~\n]{0,40}",
        closed in any::<bool>(),
    ) {
        let fence = if closed { "\n```" } else { "" };
        let text = format!("{pre}\n```{lang}\n{body}{fence}\n{post}");
        if let Ok(code) = extract_code_block(&text) {
            prop_assert!(code.code.contains("final_model"));
        }
    }
}

/// Source code for `m`, using one variable per node.
fn emit(m: &PowlModel) -> String {
    fn go(m: &PowlModel, lines: &mut Vec<String>) -> String {
        let var = format!("n{}", lines.len());
        let rhs = match m.node() {
            Node::Activity { label } => format!("gen.activity({label:?})"),
            Node::Silent => return "None".into(),
            Node::Xor { children } => {
                let args: Vec<String> = children.iter().map(|c| go(c, lines)).collect();
                format!("gen.xor({})", args.join(", "))
            }
            Node::Loop { body, redo } => {
                let (b, r) = (go(body, lines), go(redo, lines));
                format!("gen.loop(do={b}, redo={r})")
            }
            Node::PartialOrder(po) => {
                let vars: Vec<String> = po.nodes().iter().map(|c| go(c, lines)).collect();
                // Singletons first keep the node order of the original.
                let mut deps: Vec<String> = vars.iter().map(|v| format!("({v},)")).collect();
                deps.extend(po.edges().iter().map(|&(a, b)| format!("({}, {})", vars[a], vars[b])));
                format!("gen.partial_order(dependencies=[{}])", deps.join(", "))
            }
        };
        let var = format!("{var}_{}", lines.len());
        lines.push(format!("{var} = {rhs}"));
        var
    }
    let mut lines = Vec::new();
    let root = go(m, &mut lines);
    format!("from utils.model_generation import ModelGenerator\ngen = ModelGenerator()\n{}\nfinal_model = {root}\n", lines.join("\n"))
}

/// Silent steps can only be written as `None` inside xor and loop, and an
/// xor takes at most one of them.
fn inexpressible(m: &PowlModel) -> bool {
    let silent = |c: &&PowlModel| matches!(c.node(), Node::Silent);
    match m.node() {
        Node::Silent => true,
        Node::PartialOrder(po) => po.nodes().iter().any(|c| silent(&c) || inexpressible(c)),
        Node::Xor { children } if children.iter().filter(silent).count() > 1 => true,
        _ => m.children().iter().any(|c| !silent(c) && inexpressible(c)),
    }
}

#[test]
fn generated_programs_rebuild_their_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut compared = 0;
    for _ in 0..300 {
        let m = ModelGen::new(&mut rng, Shape::FULL).model();
        if inexpressible(&m) {
            continue;
        }
        let code = emit(&m);
        let out = compile(&code).unwrap_or_else(|e| panic!("{e:?}\n{code}"));
        assert_eq!(out.model, m, "{code}");
        assert!(validate(&out.model).is_empty());
        compared += 1;
    }
    assert!(compared > 100, "{compared}");
}

#[test]
fn adversarial_corpus_is_rejected_before_interpretation() {
    let dir = common::fixtures().join("adversarial");
    let mut files: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert!(files.len() >= 50);
    for path in files {
        let code = std::fs::read_to_string(&path).unwrap();
        let kinds: Vec<_> = match parse(&code) {
            Err(v) => vec![v.kind],
            Ok(program) => {
                let found = audit(&program);
                assert!(!found.is_empty(), "{} passed the audit", path.display());
                found.into_iter().map(|v| v.kind).collect()
            }
        };
        for k in kinds {
            assert_eq!(classify(Source::Security(k)), Category::Critical, "{}", path.display());
        }
        match compile(&code) {
            Err(DslError::Rejected(v)) => assert!(!v.is_empty()),
            other => panic!("{}: {other:?}", path.display()),
        }
    }
}

#[test]
fn few_shot_examples_compile_to_sound_models() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("templates/examples");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if !path.to_string_lossy().ends_with("-code.txt") {
            continue;
        }
        let m = compile(&std::fs::read_to_string(&path).unwrap()).unwrap().model;
        assert!(validate(&m).is_empty());
        assert!(check_soundness(&to_petri_net(&m).unwrap(), DEFAULT_STATE_CAP).sound, "{}", path.display());
        count += 1;
    }
    assert_eq!(count, 3);
}
