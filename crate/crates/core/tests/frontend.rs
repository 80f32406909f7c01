//! Parser, pretty-printer, and sort-checker behaviour on script sources.

use tulaverif_core::syntax::{
    ast_eq, load_script, parse_script, pretty_script, sort_check, CheckError,
};
use tulaverif_core::{Sort, Term};

const SYMBOLS: &str = r#"
constructor pk(bytes):bytes.
constructor rsa(bytes,bytes):bytes.
destructor decrsa(bytes,bytes):bytes with
  decrsa(s,rsa(pk(s),b)) = b.
constructor rsasha1(bytes,bytes):bytes.
destructor checkrsasha1(bytes,bytes,bytes):bytes with
  checkrsasha1(pk(s),x,rsasha1(s,x)) = pk(s).
"#;

#[test]
fn empty_source_parses_to_empty_script() {
    let script = parse_script("").unwrap();
    assert!(script.decls.is_empty());
    assert!(sort_check(script).is_ok());
}

#[test]
fn constructor_declaration_has_arity_one() {
    let script = parse_script("constructor pk(bytes):bytes.").unwrap();
    assert_eq!(script.decls.len(), 1);
    match &script.decls[0] {
        tulaverif_core::syntax::Decl::Constructor { name, arg_sorts, result_sort, .. } => {
            assert_eq!(name, "pk");
            assert_eq!(arg_sorts.as_slice(), &[Sort::Bytes]);
            assert_eq!(*result_sort, Sort::Bytes);
        }
        other => panic!("unexpected decl {other:?}"),
    }
}

#[test]
fn body_element_with_id_attribute() {
    let src = r#"
predicate hasBody(msg:item, request:item) :-
  msg = <Body Id="1">request</>.
"#;
    let checked = load_script(src).unwrap();
    let def = &checked.predicates["hasBody"];
    let clause = &def.clauses[0];
    match &clause.body[0] {
        tulaverif_core::syntax::Atom::Eq { right: Term::Element(el), .. } => {
            assert_eq!(el.tag, "Body");
            assert_eq!(el.attrs.items.len(), 1);
            assert_eq!(el.attrs.items[0], Term::attr("Id", Term::str("1")));
            assert_eq!(el.children.items.len(), 1);
            assert_eq!(el.children.items[0], Term::Var("request".into(), Sort::Item));
        }
        other => panic!("unexpected atom {other:?}"),
    }
}

#[test]
fn filter_with_three_outputs() {
    let src = format!(
        "{SYMBOLS}
predicate isMsg2(msg2:item, kr:bytes, id1:string, id2:string, t2:string, b2:item) :-
  msg2 = <Envelope><RelatesTo>id1</> <MessageId>id2</> <Created>t2</> <Body>b2</></>.
channel soap(item).
process Client(kr:bytes, id1:string) =
  in soap(msg2);
  filter isMsg2(msg2, kr, id1, id2, t2, b2) -> id2, t2, b2;
  done.
"
    );
    let checked = load_script(&src).unwrap();
    let def = &checked.processes["Client"];
    let mut found = false;
    fn walk(p: &tulaverif_core::syntax::Proc, found: &mut bool) {
        if let tulaverif_core::syntax::Proc::Filter { outputs, next, .. } = p {
            assert_eq!(outputs, &["id2", "t2", "b2"]);
            *found = true;
            walk(next, found);
        } else if let tulaverif_core::syntax::Proc::In { next, .. } = p {
            walk(next, found);
        }
    }
    walk(&def.body, &mut found);
    assert!(found, "filter not reached");
}

#[test]
fn pretty_print_round_trips() {
    let src = format!(
        "{SYMBOLS}
predicate isUser(U:item, u:string, pwd:string) :-
  U = <User><Username>u</> <Password>pwd</></>.
channel soap(item).
private channel anyUser(item).
correspondence C1(item,item,string,string,item).
process Echo(x:item) =
  out soap(x); 0.
process
  new s:bytes;
  let k = pk(s);
  ( !(in anyUser(U); Echo(U)) | out soap(base64(k)); done ).
"
    );
    let first = parse_script(&src).unwrap();
    let printed = pretty_script(&first);
    let second = parse_script(&printed).expect("pretty output re-parses");
    assert!(ast_eq(&first, &second), "round-trip changed the AST:\n{printed}");
    let third = parse_script(&pretty_script(&second)).unwrap();
    assert!(ast_eq(&second, &third));
}

#[test]
fn arity_mismatch_on_out() {
    let src = r#"
channel soap(item).
process
  out soap("x", "y"); 0.
"#;
    match load_script(src) {
        Err(tulaverif_core::LoadError::Check(CheckError::ArityMismatch { expected, found, .. })) => {
            assert_eq!((expected, found), (1, 2));
        }
        other => panic!("expected arity mismatch, got {other:?}"),
    }
}

#[test]
fn unbound_clause_variable_rejected() {
    let src = r#"
channel soap(item).
predicate bad(x:item) :-
  y = z,
  x = y.
process
  in soap(m);
  filter bad(m) -> ;
  0.
"#;
    match load_script(src) {
        Err(tulaverif_core::LoadError::Check(CheckError::UnboundVariable { name, .. })) => {
            assert_eq!(name, "y");
        }
        other => panic!("expected unbound variable, got {other:?}"),
    }
}

#[test]
fn destructor_over_unbound_variables_rejected_as_pattern() {
    let src = format!(
        "{SYMBOLS}
channel soap(item).
predicate bad(x:bytes) :-
  x = decrsa(y, z).
process
  in soap(m);
  let c = c14n(m);
  filter bad(c) -> ;
  0.
"
    );
    match load_script(&src) {
        Err(tulaverif_core::LoadError::Check(CheckError::Mode { message, .. })) => {
            assert!(message.contains("decrsa"), "{message}");
        }
        other => panic!("expected mode error, got {other:?}"),
    }
}

#[test]
fn syntax_errors_carry_location_within_input() {
    let src = "constructor pk(bytes):bytes";
    let err = parse_script(src).unwrap_err();
    assert!(err.offset <= src.len());
    assert!(err.line >= 1);
}

#[test]
fn username_token_attr_rest_parses() {
    let src = r#"
predicate isTok(tok:item, u:string) :-
  tok = <UsernameToken @ _><Username>u</></>.
"#;
    let checked = load_script(src).unwrap();
    let clause = &checked.predicates["isTok"].clauses[0];
    match &clause.body[0] {
        tulaverif_core::syntax::Atom::Eq { right: Term::Element(el), .. } => {
            assert!(matches!(el.attrs.rest.as_deref(), Some(Term::Wildcard(_))));
        }
        other => panic!("unexpected atom {other:?}"),
    }
}

#[test]
fn keywords_are_reserved_but_tags_are_not() {
    assert!(parse_script("channel in(item).").is_err());
    let src = r#"
predicate weird(x:item) :-
  x = <filter><new>"ok"</></>.
"#;
    load_script(src).unwrap();
}

#[test]
fn emit_ast_as_json() {
    let script = parse_script(SYMBOLS).unwrap();
    let json = serde_json::to_value(&script).unwrap();
    assert!(json["decls"].as_array().unwrap().len() == 5);
}
