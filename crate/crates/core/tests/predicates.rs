//! Predicate engine behaviour over the bundled library and protocol.

use tulaverif_core::fixtures::load_fixture;
use tulaverif_core::pred::{check_ground, solve, solve_formula, Goal, SolveError, DEFAULT_DEPTH};
use tulaverif_core::syntax::CheckedScript;
use tulaverif_core::{FreshName, Sort, Subst, Term};

fn script() -> CheckedScript {
    load_fixture("correct").expect("correct fixture loads")
}

fn fresh(id: u64, sort: Sort, hint: &str) -> Term {
    Term::Fresh(FreshName { id, sort, hint: hint.into() })
}

fn user(u: &str, pwd: Term) -> Term {
    Term::element(
        "User",
        vec![],
        vec![
            Term::element("Username", vec![], vec![Term::str(u)]),
            Term::element("Password", vec![], vec![pwd]),
        ],
    )
}

fn service(uri: &str, ac: &str, subj: &str) -> Term {
    Term::element(
        "Service",
        vec![],
        vec![
            Term::element("To", vec![], vec![Term::str(uri)]),
            Term::element("Action", vec![], vec![Term::str(ac)]),
            Term::element("Subject", vec![], vec![Term::str(subj)]),
        ],
    )
}

#[test]
fn is_user_extracts_username_and_password() {
    let s = script();
    let goal = Goal {
        predicate: "isUser".into(),
        args: vec![
            user("alice", Term::str("pw")),
            Term::var("u", Sort::String),
            Term::var("pwd", Sort::String),
        ],
    };
    let sols = solve(&s, &goal, DEFAULT_DEPTH).unwrap();
    assert_eq!(sols.len(), 1);
    assert_eq!(sols[0].get("u"), Some(&Term::str("alice")));
    assert_eq!(sols[0].get("pwd"), Some(&Term::str("pw")));
}

#[test]
fn is_user_rejects_service_elements() {
    let s = script();
    let goal = Goal {
        predicate: "isUser".into(),
        args: vec![
            service("http://bobspetshop.com", "order", "BobsPetShop"),
            Term::var("u", Sort::String),
            Term::var("pwd", Sort::String),
        ],
    };
    assert!(solve(&s, &goal, DEFAULT_DEPTH).unwrap().is_empty());
}

#[test]
fn sig_val_symmetric_roundtrip() {
    let s = script();
    let k = fresh(1, Sort::Bytes, "k");
    let si = Term::element("SignedInfo", vec![], vec![Term::str("data")]);
    let sv = s
        .table
        .normalize(&Term::apply("hmacsha1", vec![k.clone(), Term::apply("c14n", vec![si.clone()])]));
    assert!(check_ground(
        &s,
        "isSigVal",
        &[sv.clone(), si.clone(), k.clone(), Term::str("hmacsha1")],
        DEFAULT_DEPTH
    )
    .unwrap());
    // A different key fails.
    let other = fresh(2, Sort::Bytes, "k2");
    assert!(!check_ground(&s, "isSigVal", &[sv, si, other, Term::str("hmacsha1")], DEFAULT_DEPTH)
        .unwrap());
}

#[test]
fn encrypted_data_roundtrip_recovers_plaintext() {
    let s = script();
    let dk = fresh(3, Sort::Bytes, "dk");
    let ek = s.table.normalize(&Term::apply("pk", vec![dk.clone()]));
    let plain = Term::element("UsernameToken", vec![], vec![Term::str("data")]);

    // Forward: construct with the oracle being plain normalization.
    let goal = Goal {
        predicate: "mkEncryptedData".into(),
        args: vec![Term::var("e", Sort::Item), plain.clone(), ek.clone()],
    };
    let sols = solve(&s, &goal, DEFAULT_DEPTH).unwrap();
    assert_eq!(sols.len(), 1);
    let e = sols[0].get("e").unwrap().clone();
    let expected_cipher =
        s.table.normalize(&Term::apply("rsa", vec![ek, Term::apply("c14n", vec![plain.clone()])]));
    let expected = Term::element(
        "EncryptedData",
        vec![],
        vec![Term::element(
            "CipherData",
            vec![],
            vec![Term::element(
                "CipherValue",
                vec![],
                vec![Term::apply("base64", vec![expected_cipher])],
            )],
        )],
    );
    assert_eq!(e, expected);

    // Backward: decryption recovers the original plaintext.
    let goal = Goal {
        predicate: "isEncryptedData".into(),
        args: vec![e.clone(), Term::var("plain", Sort::Item), dk.clone()],
    };
    let sols = solve(&s, &goal, DEFAULT_DEPTH).unwrap();
    assert_eq!(sols.len(), 1);
    assert_eq!(sols[0].get("plain"), Some(&plain));

    // The wrong private key finds nothing.
    let wrong = fresh(4, Sort::Bytes, "dk2");
    let goal = Goal {
        predicate: "isEncryptedData".into(),
        args: vec![e, Term::var("plain", Sort::Item), wrong],
    };
    assert!(solve(&s, &goal, DEFAULT_DEPTH).unwrap().is_empty());
}

#[test]
fn x509_cert_checks_issuer() {
    let s = script();
    let sr = fresh(5, Sort::Bytes, "sr");
    let kr = s.table.normalize(&Term::apply("pk", vec![sr.clone()]));
    let k = fresh(6, Sort::Bytes, "k");
    let cert = Term::apply(
        "x509",
        vec![sr.clone(), Term::str("BobsPetShop"), Term::str("rsasha1"), k.clone()],
    );
    assert!(check_ground(
        &s,
        "isX509Cert",
        &[cert.clone(), kr, Term::str("BobsPetShop"), Term::str("rsasha1"), k.clone()],
        DEFAULT_DEPTH
    )
    .unwrap());

    let other = fresh(7, Sort::Bytes, "sr2");
    let wrong_kr = s.table.normalize(&Term::apply("pk", vec![other]));
    assert!(!check_ground(
        &s,
        "isX509Cert",
        &[cert, wrong_kr, Term::str("BobsPetShop"), Term::str("rsasha1"), k],
        DEFAULT_DEPTH
    )
    .unwrap());
}

/// Builds consistent ground inputs and runs mkMsg1 forward and isMsg1
/// backward, the full client/server processing chain for the request.
#[test]
fn msg1_duality_roundtrip() {
    let s = script();
    let sr = fresh(10, Sort::Bytes, "sr");
    let kr = s.table.normalize(&Term::apply("pk", vec![sr.clone()]));
    let sx = fresh(11, Sort::Bytes, "sx");
    let cert = Term::apply(
        "x509",
        vec![sr, Term::str("BobsPetShop"), Term::str("rsasha1"),
             s.table.normalize(&Term::apply("pk", vec![sx.clone()]))],
    );
    let pwd = fresh(12, Sort::String, "pwd");
    let u = user("alice", pwd);
    let svc = service("http://bobspetshop.com/service.asmx", "getOrder", "BobsPetShop");
    let n = fresh(13, Sort::Bytes, "n");
    let id1 = fresh(14, Sort::String, "id1");
    let t1 = Term::str("2004-03-19T09:46:32Z");
    let b1 = Term::element("GetOrder", vec![], vec![Term::str("42")]);

    let goal = Goal {
        predicate: "mkMsg1".into(),
        args: vec![
            Term::var("msg1", Sort::Item),
            u.clone(),
            svc.clone(),
            kr,
            cert.clone(),
            n,
            id1.clone(),
            t1.clone(),
            b1.clone(),
        ],
    };
    let sols = solve(&s, &goal, DEFAULT_DEPTH).unwrap();
    assert_eq!(sols.len(), 1, "mkMsg1 constructs exactly one envelope");
    let msg1 = sols[0].get("msg1").unwrap().clone();
    assert!(msg1.is_ground());

    let goal = Goal {
        predicate: "isMsg1".into(),
        args: vec![
            msg1.clone(),
            u,
            sx,
            cert,
            svc,
            Term::var("id1", Sort::String),
            Term::var("t1", Sort::String),
            Term::var("b1", Sort::Item),
        ],
    };
    let sols = solve(&s, &goal, DEFAULT_DEPTH).unwrap();
    assert_eq!(sols.len(), 1, "isMsg1 accepts the constructed envelope");
    assert_eq!(sols[0].get("id1"), Some(&id1));
    assert_eq!(sols[0].get("t1"), Some(&t1));
    assert_eq!(sols[0].get("b1"), Some(&b1));
}

#[test]
fn msg2_duality_roundtrip_and_signature_tamper() {
    let s = script();
    let sr = fresh(20, Sort::Bytes, "sr");
    let kr = s.table.normalize(&Term::apply("pk", vec![sr.clone()]));
    let sx = fresh(21, Sort::Bytes, "sx");
    let cert = Term::apply(
        "x509",
        vec![sr, Term::str("ChasMarket"), Term::str("rsasha1"),
             s.table.normalize(&Term::apply("pk", vec![sx.clone()]))],
    );
    let svc = service("http://chasmarket.com/svc", "quote", "ChasMarket");
    let id1 = fresh(22, Sort::String, "id1");
    let id2 = fresh(23, Sort::String, "id2");
    let t2 = Term::str("2004-03-19T09:48:00Z");
    let b2 = Term::element("Quote", vec![], vec![Term::str("99")]);

    let goal = Goal {
        predicate: "mkMsg2".into(),
        args: vec![
            Term::var("msg2", Sort::Item),
            sx,
            cert,
            svc.clone(),
            id1.clone(),
            id2.clone(),
            t2.clone(),
            b2.clone(),
        ],
    };
    let sols = solve(&s, &goal, DEFAULT_DEPTH).unwrap();
    assert_eq!(sols.len(), 1);
    let msg2 = sols[0].get("msg2").unwrap().clone();

    let goal = Goal {
        predicate: "isMsg2".into(),
        args: vec![
            msg2.clone(),
            svc.clone(),
            kr.clone(),
            id1.clone(),
            Term::var("id2", Sort::String),
            Term::var("t2", Sort::String),
            Term::var("b2", Sort::Item),
        ],
    };
    let sols = solve(&s, &goal, DEFAULT_DEPTH).unwrap();
    assert_eq!(sols.len(), 1);
    assert_eq!(sols[0].get("id2"), Some(&id2));
    assert_eq!(sols[0].get("t2"), Some(&t2));
    assert_eq!(sols[0].get("b2"), Some(&b2));

    // A client waiting on a different request identifier rejects the
    // response: the RelatesTo header no longer matches.
    let other_id = fresh(24, Sort::String, "id1b");
    let goal = Goal {
        predicate: "isMsg2".into(),
        args: vec![
            msg2,
            svc,
            kr,
            other_id,
            Term::var("id2", Sort::String),
            Term::var("t2", Sort::String),
            Term::var("b2", Sort::Item),
        ],
    };
    assert!(solve(&s, &goal, DEFAULT_DEPTH).unwrap().is_empty());
}

#[test]
fn signature_tamper_fails_verification() {
    let s = script();
    let k = fresh(30, Sort::Bytes, "k");
    let items = Term::element(
        "list",
        vec![],
        vec![
            Term::element("Body", vec![], vec![Term::str("b")]),
            Term::element("MessageId", vec![], vec![Term::str("m-1")]),
        ],
    );
    let goal = Goal {
        predicate: "mkSignature".into(),
        args: vec![Term::var("sig", Sort::Item), Term::str("hmacsha1"), k.clone(), items.clone()],
    };
    let sols = solve(&s, &goal, DEFAULT_DEPTH).unwrap();
    assert_eq!(sols.len(), 1);
    let sig = sols[0].get("sig").unwrap().clone();

    assert!(check_ground(
        &s,
        "isSignature",
        &[sig.clone(), Term::str("hmacsha1"), k.clone(), items],
        DEFAULT_DEPTH
    )
    .unwrap());

    // Tampering with a signed string literal breaks verification.
    let tampered = Term::element(
        "list",
        vec![],
        vec![
            Term::element("Body", vec![], vec![Term::str("b-tampered")]),
            Term::element("MessageId", vec![], vec![Term::str("m-1")]),
        ],
    );
    assert!(!check_ground(
        &s,
        "isSignature",
        &[sig, Term::str("hmacsha1"), k, tampered],
        DEFAULT_DEPTH
    )
    .unwrap());
}

#[test]
fn depth_limit_reported_distinctly() {
    let s = script();
    let goal = Goal {
        predicate: "isUser".into(),
        args: vec![
            user("alice", Term::str("pw")),
            Term::var("u", Sort::String),
            Term::var("p", Sort::String),
        ],
    };
    match solve(&s, &goal, 0) {
        Err(SolveError::DepthExceeded { .. }) => {}
        other => panic!("expected depth error, got {other:?}"),
    }
}

#[test]
fn solve_is_deterministic() {
    let s = script();
    let k = fresh(40, Sort::Bytes, "k");
    let items = Term::element(
        "list",
        vec![],
        vec![Term::element("Body", vec![], vec![Term::str("x")])],
    );
    let goal = Goal {
        predicate: "mkSignature".into(),
        args: vec![Term::var("sig", Sort::Item), Term::str("hmacsha1"), k, items],
    };
    let a = solve(&s, &goal, DEFAULT_DEPTH).unwrap();
    let b = solve(&s, &goal, DEFAULT_DEPTH).unwrap();
    assert_eq!(a, b);
}

#[test]
fn formula_solving_supports_filters() {
    let s = script();
    // Formula taken from the MkService process.
    let atoms = vec![tulaverif_core::syntax::Atom::Call {
        predicate: "isService".into(),
        args: vec![
            Term::var("S0", Sort::Item),
            Term::var("uri", Sort::Item),
            Term::var("ac", Sort::Item),
            Term::Wildcard(Sort::String),
        ],
        span: Default::default(),
    }];
    let mut seed = Subst::new();
    seed.bind("S0", service("http://x", "a", "whoever"));
    let sols = solve_formula(&s, &atoms, &seed, DEFAULT_DEPTH).unwrap();
    assert_eq!(sols.len(), 1);
    assert_eq!(sols[0].get("uri"), Some(&Term::str("http://x")));
    assert_eq!(sols[0].get("ac"), Some(&Term::str("a")));
}
