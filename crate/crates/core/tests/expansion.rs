//! Symbolic expansion sanity: predicate calls unfold to constructor-term
//! substitutions that agree with concrete solving.

use tulaverif_core::expand::Expander;
use tulaverif_core::fixtures::load_fixture;
use tulaverif_core::pred::{solve, Goal, DEFAULT_DEPTH};
use tulaverif_core::{FreshName, Sort, Subst, Term};

fn fresh(id: u64, sort: Sort, hint: &str) -> Term {
    Term::Fresh(FreshName { id, sort, hint: hint.into() })
}

#[test]
fn is_msg1_expansion_shapes_the_envelope() {
    let script = load_fixture("correct").unwrap();
    let mut ex = Expander::new(&script);
    let sx = fresh(1, Sort::Bytes, "sx");
    let args = vec![
        Term::var("msg1", Sort::Item),
        Term::var("U", Sort::Item),
        sx.clone(),
        fresh(2, Sort::Bytes, "cert"),
        Term::var("S", Sort::Item),
        Term::var("id1", Sort::String),
        Term::var("t1", Sort::String),
        Term::var("b1", Sort::Item),
    ];
    let sols = ex.call("isMsg1", &args, Subst::new(), 64).unwrap();
    assert_eq!(sols.len(), 1, "one symbolic disjunct for isMsg1");
    let msg1 = sols[0].get("msg1").expect("msg1 instantiated");
    let Term::Element(env) = msg1 else { panic!("not an element: {msg1}") };
    assert_eq!(env.tag, "Envelope");
    // The encrypted token must be an rsa encryption under pk(sx).
    let printed = msg1.to_string();
    assert!(printed.contains("rsa(pk(sx#1)"), "{printed}");
    assert!(printed.contains("hmacsha1(psha1("), "{printed}");
    // The envelope timestamp stays an open hole, independent of the
    // token-internal creation time.
    let t1 = sols[0].get("t1");
    assert!(t1.is_none() || !t1.unwrap().is_ground());
}

#[test]
fn expansion_agrees_with_concrete_solving_on_ground_goals() {
    let script = load_fixture("correct").unwrap();
    let dk = fresh(3, Sort::Bytes, "dk");
    let ek = script.table.normalize(&Term::apply("pk", vec![dk.clone()]));
    let plain = Term::element("Tok", vec![], vec![Term::str("data")]);
    let goal = Goal {
        predicate: "mkEncryptedData".into(),
        args: vec![Term::var("e", Sort::Item), plain.clone(), ek.clone()],
    };
    let concrete = solve(&script, &goal, DEFAULT_DEPTH).unwrap();
    let mut ex = Expander::new(&script);
    let symbolic = ex
        .call("mkEncryptedData", &goal.args, Subst::new(), 64)
        .unwrap();
    assert_eq!(concrete.len(), 1);
    assert_eq!(symbolic.len(), 1);
    assert_eq!(
        concrete[0].get("e"),
        symbolic[0].get("e"),
        "expansion and solving build the same ground term"
    );
}

#[test]
fn narrowing_rejects_impossible_decryptions() {
    let script = load_fixture("correct").unwrap();
    let mut ex = Expander::new(&script);
    // decrsa of a pk application can never fire.
    let t = Term::apply(
        "decrsa",
        vec![fresh(4, Sort::Bytes, "k"), Term::apply("pk", vec![fresh(5, Sort::Bytes, "s")])],
    );
    let branches = ex.narrow(&t, Subst::new()).unwrap();
    assert!(branches.is_empty());
}
