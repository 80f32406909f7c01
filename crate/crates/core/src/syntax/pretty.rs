//! Canonical textual form of scripts. Pretty-printed output re-parses to a
//! structurally identical AST, making the printer a fixpoint on checked
//! scripts.

use super::ast::*;
use crate::term::Term;
use std::fmt::Write;

pub fn pretty_script(script: &Script) -> String {
    let mut out = String::new();
    for (i, decl) in script.decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        pretty_decl(&mut out, decl);
    }
    out
}

fn pretty_decl(out: &mut String, decl: &Decl) {
    match decl {
        Decl::Constructor { name, arg_sorts, result_sort, .. } => {
            let args: Vec<String> = arg_sorts.iter().map(|s| s.to_string()).collect();
            let _ = writeln!(out, "constructor {name}({}):{result_sort}.", args.join(","));
        }
        Decl::Destructor { name, arg_sorts, result_sort, lhs, rhs, .. } => {
            let args: Vec<String> = arg_sorts.iter().map(|s| s.to_string()).collect();
            let _ = writeln!(
                out,
                "destructor {name}({}):{result_sort} with\n  {lhs} = {rhs}.",
                args.join(",")
            );
        }
        Decl::Clause(c) => {
            let params: Vec<String> =
                c.params.iter().map(|(n, s)| format!("{n}:{s}")).collect();
            let _ = write!(out, "predicate {}({}) :-", c.name, params.join(", "));
            for (i, atom) in c.body.iter().enumerate() {
                let sep = if i + 1 == c.body.len() { "." } else { "," };
                let _ = write!(out, "\n  {}{sep}", pretty_atom(atom));
            }
            out.push('\n');
        }
        Decl::Channel { name, payload_sorts, private, .. } => {
            let sorts: Vec<String> = payload_sorts.iter().map(|s| s.to_string()).collect();
            let vis = if *private { "private " } else { "" };
            let _ = writeln!(out, "{vis}channel {name}({}).", sorts.join(","));
        }
        Decl::Correspondence { name, payload_sorts, .. } => {
            let sorts: Vec<String> = payload_sorts.iter().map(|s| s.to_string()).collect();
            let _ = writeln!(out, "correspondence {name}({}).", sorts.join(","));
        }
        Decl::Process { name, params, body, .. } => {
            let params: Vec<String> = params.iter().map(|(n, s)| format!("{n}:{s}")).collect();
            let _ = writeln!(out, "process {name}({}) =", params.join(", "));
            pretty_proc(out, body, 1);
            let _ = writeln!(out, ".");
        }
        Decl::Main { body, .. } => {
            let _ = writeln!(out, "process");
            pretty_proc(out, body, 1);
            let _ = writeln!(out, ".");
        }
    }
}

fn pretty_atom(atom: &Atom) -> String {
    match atom {
        Atom::Eq { left, right, .. } => format!("{left} = {right}"),
        Atom::Call { predicate, args, .. } => format!("{predicate}({})", join_terms(args)),
    }
}

fn join_terms(terms: &[Term]) -> String {
    terms.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn pretty_proc(out: &mut String, proc: &Proc, depth: usize) {
    indent(out, depth);
    pretty_naked(out, proc, depth);
}

fn pretty_naked(out: &mut String, proc: &Proc, depth: usize) {
    match proc {
        Proc::Out { channel, args, next, .. } => {
            let _ = writeln!(out, "out {channel}({});", join_terms(args));
            pretty_tail(out, next, depth);
        }
        Proc::In { channel, binders, next, .. } => {
            let bs: Vec<String> = binders
                .iter()
                .map(|b| match b {
                    Binder::Name(n) => n.clone(),
                    Binder::Wildcard => "_".into(),
                })
                .collect();
            let _ = writeln!(out, "in {channel}({});", bs.join(", "));
            pretty_tail(out, next, depth);
        }
        Proc::New { name, sort, next, .. } => {
            let _ = writeln!(out, "new {name}:{sort};");
            pretty_tail(out, next, depth);
        }
        Proc::Let { name, term, next, .. } => {
            let _ = writeln!(out, "let {name} = {term};");
            pretty_tail(out, next, depth);
        }
        Proc::Filter { atoms, outputs, next, .. } => {
            let body: Vec<String> = atoms.iter().map(pretty_atom).collect();
            let _ = writeln!(out, "filter {} -> {};", body.join(", "), outputs.join(", "));
            pretty_tail(out, next, depth);
        }
        Proc::Begin { label, args, next, .. } => {
            let _ = writeln!(out, "begin {label}({});", join_terms(args));
            pretty_tail(out, next, depth);
        }
        Proc::End { label, args, next, .. } => {
            let _ = writeln!(out, "end {label}({});", join_terms(args));
            pretty_tail(out, next, depth);
        }
        Proc::Par { .. } => {
            let _ = writeln!(out, "(");
            let mut parts = Vec::new();
            flatten_par(proc, &mut parts);
            for (i, part) in parts.iter().enumerate() {
                if i > 0 {
                    indent(out, depth);
                    let _ = writeln!(out, "|");
                }
                pretty_proc(out, part, depth + 1);
            }
            indent(out, depth);
            let _ = writeln!(out, ")");
        }
        Proc::Repl { body, .. } => {
            out.push('!');
            if needs_parens(body) {
                let _ = writeln!(out, "(");
                pretty_proc(out, body, depth + 1);
                indent(out, depth);
                let _ = writeln!(out, ")");
            } else {
                pretty_naked(out, body, depth);
            }
        }
        Proc::Invoke { process, args, .. } => {
            let _ = writeln!(out, "{process}({})", join_terms(args));
        }
        Proc::Done { .. } => {
            let _ = writeln!(out, "done");
        }
        Proc::Nil { .. } => {
            let _ = writeln!(out, "0");
        }
    }
}

/// Prefix continuations print at the same depth; a parallel continuation
/// needs parentheses to keep the prefix binding tighter than `|`.
fn pretty_tail(out: &mut String, next: &Proc, depth: usize) {
    pretty_proc(out, next, depth);
}

fn needs_parens(p: &Proc) -> bool {
    matches!(p, Proc::Par { .. })
}

fn flatten_par<'a>(p: &'a Proc, out: &mut Vec<&'a Proc>) {
    match p {
        Proc::Par { left, right, .. } => {
            flatten_par(left, out);
            flatten_par(right, out);
        }
        other => out.push(other),
    }
}

/// Structural comparison ignoring spans, for round-trip checks.
pub fn ast_eq(a: &Script, b: &Script) -> bool {
    format!("{:?}", strip(a)) == format!("{:?}", strip(b))
}

fn strip(s: &Script) -> Script {
    let mut s = s.clone();
    for d in &mut s.decls {
        strip_decl(d);
    }
    s
}

fn strip_decl(d: &mut Decl) {
    let zero = Span::default();
    match d {
        Decl::Constructor { span, .. }
        | Decl::Destructor { span, .. }
        | Decl::Channel { span, .. }
        | Decl::Correspondence { span, .. } => *span = zero,
        Decl::Clause(c) => {
            c.span = zero;
            for a in &mut c.body {
                strip_atom(a);
            }
        }
        Decl::Process { body, span, .. } | Decl::Main { body, span } => {
            *span = zero;
            strip_proc(body);
        }
    }
}

fn strip_atom(a: &mut Atom) {
    match a {
        Atom::Eq { span, .. } | Atom::Call { span, .. } => *span = Span::default(),
    }
}

fn strip_proc(p: &mut Proc) {
    let zero = Span::default();
    match p {
        Proc::Out { next, span, .. }
        | Proc::In { next, span, .. }
        | Proc::New { next, span, .. }
        | Proc::Let { next, span, .. }
        | Proc::Begin { next, span, .. }
        | Proc::End { next, span, .. } => {
            *span = zero;
            strip_proc(next);
        }
        Proc::Filter { atoms, next, span, .. } => {
            *span = zero;
            for a in atoms {
                strip_atom(a);
            }
            strip_proc(next);
        }
        Proc::Par { left, right, span } => {
            *span = zero;
            strip_proc(left);
            strip_proc(right);
        }
        Proc::Repl { body, span } => {
            *span = zero;
            strip_proc(body);
        }
        Proc::Invoke { span, .. } | Proc::Done { span } | Proc::Nil { span } => *span = zero,
    }
}
