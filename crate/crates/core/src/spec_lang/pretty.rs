//! Pretty-printer producing re-parseable source text.
//!
//! Compound sub-terms are always parenthesized, so the output re-parses to
//! the same tree regardless of operator precedence.

use std::fmt::Write;

use super::ast::*;

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e);
    s
}

pub fn pred_to_string(p: &Pred) -> String {
    let mut s = String::new();
    write_pred(&mut s, p);
    s
}

fn write_list(out: &mut String, items: &[String]) {
    out.push_str(&items.join(", "));
}

fn write_expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Int(n) => write!(out, "{n}").unwrap(),
        ExprKind::Bool(true) => out.push_str("TRUE"),
        ExprKind::Bool(false) => out.push_str("FALSE"),
        ExprKind::Ident(n) => out.push_str(n),
        ExprKind::Builtin(b) => out.push_str(b.name()),
        ExprKind::Pair(l, r) => {
            out.push('(');
            write_expr(out, l);
            out.push_str(" |-> ");
            write_expr(out, r);
            out.push(')');
        }
        ExprKind::SetExt(items) => {
            out.push('{');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, item);
            }
            out.push('}');
        }
        ExprKind::Interval(l, r) => {
            out.push('(');
            write_expr(out, l);
            out.push_str(" .. ");
            write_expr(out, r);
            out.push(')');
        }
        ExprKind::Binary(op, l, r) => {
            out.push('(');
            write_expr(out, l);
            write!(out, " {} ", op.symbol()).unwrap();
            write_expr(out, r);
            out.push(')');
        }
        ExprKind::Unary(op, inner) => {
            let name = match op {
                UnOp::Neg => {
                    out.push_str("-(");
                    write_expr(out, inner);
                    out.push(')');
                    return;
                }
                UnOp::Inverse => {
                    out.push('(');
                    write_expr(out, inner);
                    out.push_str(")~");
                    return;
                }
                UnOp::Dom => "dom",
                UnOp::Ran => "ran",
                UnOp::Closure1 => "closure1",
                UnOp::Card => "card",
                UnOp::Min => "min",
                UnOp::Max => "max",
            };
            out.push_str(name);
            out.push('(');
            write_expr(out, inner);
            out.push(')');
        }
        ExprKind::Iterate(r, n) => {
            out.push_str("iterate(");
            write_expr(out, r);
            out.push_str(", ");
            write_expr(out, n);
            out.push(')');
        }
        ExprKind::Image(r, s) => {
            out.push('(');
            write_expr(out, r);
            out.push_str(")[");
            write_expr(out, s);
            out.push(']');
        }
        ExprKind::Apply(f, x) => {
            out.push('(');
            write_expr(out, f);
            out.push_str(")(");
            write_expr(out, x);
            out.push(')');
        }
        ExprKind::Lambda {
            params,
            constraint,
            body,
        } => {
            out.push_str("%(");
            write_list(out, params);
            out.push_str(").(");
            write_pred(out, constraint);
            out.push_str(" | ");
            write_expr(out, body);
            out.push(')');
        }
        ExprKind::Comprehension {
            vars,
            constraint,
            output,
        } => {
            out.push('{');
            write_list(out, vars);
            match output {
                None => {
                    out.push_str(" | ");
                    write_pred(out, constraint);
                }
                Some(o) => {
                    out.push_str(" . ");
                    write_pred(out, constraint);
                    out.push_str(" | ");
                    write_expr(out, o);
                }
            }
            out.push('}');
        }
        ExprKind::BoolOf(p) => {
            out.push_str("bool(");
            write_pred(out, p);
            out.push(')');
        }
    }
}

fn write_binary_pred(out: &mut String, op: &str, l: &Pred, r: &Pred) {
    out.push('(');
    write_pred(out, l);
    write!(out, " {op} ").unwrap();
    write_pred(out, r);
    out.push(')');
}

fn write_pred(out: &mut String, p: &Pred) {
    match &p.kind {
        PredKind::Cmp(op, l, r) => {
            write_expr(out, l);
            write!(out, " {} ", op.symbol()).unwrap();
            write_expr(out, r);
        }
        PredKind::And(l, r) => write_binary_pred(out, "&", l, r),
        PredKind::Or(l, r) => write_binary_pred(out, "or", l, r),
        PredKind::Implies(l, r) => write_binary_pred(out, "=>", l, r),
        PredKind::Equiv(l, r) => write_binary_pred(out, "<=>", l, r),
        PredKind::Not(inner) => {
            out.push_str("not(");
            write_pred(out, inner);
            out.push(')');
        }
        PredKind::ForAll(vars, body) | PredKind::Exists(vars, body) => {
            out.push(if matches!(p.kind, PredKind::ForAll(..)) { '!' } else { '#' });
            out.push('(');
            write_list(out, vars);
            out.push_str(").(");
            write_pred(out, body);
            out.push(')');
        }
    }
}
